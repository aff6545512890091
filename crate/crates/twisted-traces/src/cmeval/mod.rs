//! Certified evaluation of modular function expressions at CM points, and
//! recognition of integers, rationals and integer polynomials from the values.

mod expr;

pub use expr::{parse_modfunc, render, Atom, AtomKind, ModFuncExpr};

use crate::arith::sigma;
use crate::ball::{CBall, CertifiedComplex, Ctx, RBall};
use crate::error::{Error, Result};
use crate::qforms::{cm_point, reduce_gauss, CmPoint, Mat2};
use crate::qseries::{faber_polynomial, j_qexp_int};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::f64::consts::{LOG2_E, PI};
use std::sync::Mutex;

const MAX_PREC: usize = 1 << 15;

/// Coefficients of `J` (index `n` holds `c(n)`, `c(−1) = 1` implicit), grown on demand.
static J_COEFFS: Mutex<Vec<BigInt>> = Mutex::new(Vec::new());

fn j_coefficients(upto: usize) -> Vec<BigInt> {
    let mut cache = J_COEFFS.lock().expect("coefficient cache");
    if cache.len() <= upto {
        let order = (upto + 1).max(2 * cache.len()).max(64);
        let j = j_qexp_int(order as i64);
        *cache = (0..order as i64)
            .map(|n| if n == 0 { BigInt::zero() } else { j.coeff(n) })
            .collect();
    }
    cache[..=upto].to_vec()
}

/// `log2` of the envelope `e^{4π√n}/n^{3/4}` bounding `|c(n)|` for the coefficients of `J`.
pub fn j_envelope_log2(n: u64) -> f64 {
    let n = n as f64;
    (4.0 * PI * n.sqrt()) * LOG2_E - 0.75 * n.log2()
}

/// A point `x + iy` with `x = num/den` exact and `y = √rad/den2`, plus its ball value.
struct Point {
    x_num: i64,
    x_den: i64,
    y: RBall,
    y_f64: f64,
}

impl Point {
    fn of(p: &CmPoint, ctx: &Ctx) -> Point {
        let f = p.form();
        let (rad, den) = p.imag();
        let y = RBall::from_i64(rad, ctx)
            .sqrt(ctx)
            .div(&RBall::from_i64(den, ctx), ctx);
        Point {
            x_num: -f.b,
            x_den: 2 * f.a,
            y,
            y_f64: (rad as f64).sqrt() / den as f64,
        }
    }

    fn value(&self, ctx: &Ctx) -> CBall {
        let x = RBall::from_i64(self.x_num, ctx).div(&RBall::from_i64(self.x_den, ctx), ctx);
        CBall::new(x, self.y.clone())
    }

    /// `e(z/k)`.
    fn e_over(&self, k: i64, ctx: &Ctx) -> CBall {
        let r = ctx
            .pi()
            .mul_i64(-2, ctx)
            .mul(&self.y, ctx)
            .div(&RBall::from_i64(k, ctx), ctx)
            .exp(ctx);
        CBall::e_rational(self.x_num, self.x_den * k, ctx).scale(&r, ctx)
    }

    /// `log2 |e(z)|`.
    fn log2_q(&self) -> f64 {
        -2.0 * PI * self.y_f64 * LOG2_E
    }
}

fn tail_error(log2_bound: f64) -> f64 {
    2f64.powf(log2_bound).max(f64::MIN_POSITIVE)
}

/// `Σ_{n>=1} c(n) qⁿ` with `|c(n)| <= C n^e`, truncated where the tail is below `2^{−target}`.
fn power_series(
    q: &CBall,
    log2_q: f64,
    coeff: impl Fn(u64) -> BigInt,
    c: f64,
    e: f64,
    target: f64,
    ctx: &Ctx,
) -> CBall {
    let mut acc = CBall::zero();
    let mut pw = CBall::from_i64(1, ctx);
    let mut n = 1u64;
    loop {
        pw = pw.mul(q, ctx);
        acc = acc.add(&pw.scale(&RBall::from_bigint(&coeff(n), ctx), ctx), ctx);
        // tail from n+1 on, with term ratio at most ((n+2)/(n+1))^e |q| <= 1/2
        let m = (n + 1) as f64;
        let ratio_log2 = e * ((m + 1.0) / m).log2() + log2_q;
        let tail = c.log2() + e * m.log2() + m * log2_q + 1.0;
        if ratio_log2 < -1.0 && tail < -target {
            return acc.add_error(tail_error(tail));
        }
        n += 1;
    }
}

fn eisenstein(k: u32, q: &CBall, log2_q: f64, target: f64, ctx: &Ctx) -> CBall {
    // σ_{k−1}(n) <= ζ(k−1) n^{k−1}
    let (factor, bound, e) = if k == 4 {
        (240i64, 289.0, 3.0)
    } else {
        (-504, 523.0, 5.0)
    };
    let s = power_series(
        q,
        log2_q,
        |n| BigInt::from(factor) * BigInt::from(sigma(k - 1, n)),
        bound,
        e,
        target,
        ctx,
    );
    s.add(&CBall::from_i64(1, ctx), ctx)
}

/// `Π (1 − qⁿ) = Σ_k (−1)^k q^{k(3k−1)/2}`.
fn euler(q: &CBall, log2_q: f64, target: f64, ctx: &Ctx) -> CBall {
    let mut acc = CBall::from_i64(1, ctx);
    let mut k = 1i64;
    loop {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        for e in [k * (3 * k - 1) / 2, k * (3 * k + 1) / 2] {
            acc = acc.add(&q.powi(e as u32, ctx).mul_i64(sign, ctx), ctx);
        }
        let next = (k + 1) * (3 * (k + 1) - 1) / 2;
        let tail = next as f64 * log2_q + 1.0 - (1.0 - 2f64.powf(log2_q)).log2();
        if tail < -target {
            return acc.add_error(tail_error(tail));
        }
        k += 1;
    }
}

/// `J` at a point of the standard fundamental domain, summed directly under the coefficient envelope.
fn j_series(p: &Point, target: f64, ctx: &Ctx) -> CBall {
    let q = p.e_over(1, ctx);
    let log2_q = p.log2_q();
    let mut n = 1u64;
    // smallest truncation where later terms shrink by at least half and the tail is small
    loop {
        let m = (n + 1) as f64;
        let ratio = 2.0 * PI / m.sqrt() * LOG2_E + log2_q;
        let tail = j_envelope_log2(n + 1) + m * log2_q + 1.0;
        if ratio < -1.0 && tail < -target {
            break;
        }
        n += 1;
    }
    let coeffs = j_coefficients(n as usize);
    let mut acc = CBall::from_i64(1, ctx).div(&q, ctx);
    let mut pw = CBall::from_i64(1, ctx);
    for c in coeffs.iter().skip(1) {
        pw = pw.mul(&q, ctx);
        acc = acc.add(&pw.scale(&RBall::from_bigint(c, ctx), ctx), ctx);
    }
    let m = (n + 1) as f64;
    acc.add_error(tail_error(j_envelope_log2(n + 1) + m * log2_q + 1.0))
}

/// `J` at a reduced point through `E4³/Δ − 744`.
fn j_via_eisenstein(p: &Point, target: f64, ctx: &Ctx) -> CBall {
    let q = p.e_over(1, ctx);
    let l = p.log2_q();
    let e4 = eisenstein(4, &q, l, target, ctx);
    let disc = q.mul(&euler(&q, l, target, ctx).powi(24, ctx), ctx);
    e4.powi(3, ctx)
        .div(&disc, ctx)
        .sub(&CBall::from_i64(744, ctx), ctx)
}

fn eta_direct(p: &Point, target: f64, ctx: &Ctx) -> CBall {
    let q = p.e_over(1, ctx);
    p.e_over(24, ctx)
        .mul(&euler(&q, p.log2_q(), target, ctx), ctx)
}

struct Reduced {
    point: Point,
    /// `c w + d` for the matrix carrying the reduced point `w` back to the original one
    factor: CBall,
}

fn reduce(p: &CmPoint, ctx: &Ctx) -> Reduced {
    let (r, m): (_, Mat2) = reduce_gauss(&p.form()).expect("positive definite");
    let point = Point::of(&cm_point(&r).expect("reduced form"), ctx);
    let factor = point
        .value(ctx)
        .mul_i64(m.c, ctx)
        .add(&CBall::from_i64(m.d, ctx), ctx);
    Reduced { point, factor }
}

fn eval_atom(atom: &Atom, tau: &CmPoint, target: f64, ctx: &Ctx) -> CBall {
    let p = tau.scaled(atom.scale as i64);
    if atom.kind == AtomKind::Eta {
        return eta_direct(&Point::of(&p, ctx), target, ctx);
    }
    let red = reduce(&p, ctx);
    let q = || red.point.e_over(1, ctx);
    match atom.kind {
        AtomKind::J => j_series(&red.point, target, ctx),
        AtomKind::SmallJ => j_series(&red.point, target, ctx).add(&CBall::from_i64(744, ctx), ctx),
        AtomKind::Jm(m) => {
            let j = j_series(&red.point, target, ctx).add(&CBall::from_i64(744, ctx), ctx);
            let poly = faber_polynomial(m);
            let mut acc = CBall::zero();
            for c in poly.iter().rev() {
                acc = acc
                    .mul(&j, ctx)
                    .add(&CBall::real(RBall::from_bigint(c, ctx)), ctx);
            }
            acc
        }
        AtomKind::E4 => {
            eisenstein(4, &q(), red.point.log2_q(), target, ctx).mul(&red.factor.powi(4, ctx), ctx)
        }
        AtomKind::E6 => {
            eisenstein(6, &q(), red.point.log2_q(), target, ctx).mul(&red.factor.powi(6, ctx), ctx)
        }
        AtomKind::Eta => unreachable!(),
    }
}

fn eval_tree(e: &ModFuncExpr, atoms: &HashMap<Atom, CBall>, ctx: &Ctx) -> CBall {
    match e {
        ModFuncExpr::Const(c) => CBall::real(RBall::from_rational(c, ctx)),
        ModFuncExpr::Atom(a) => atoms[a].clone(),
        ModFuncExpr::Neg(x) => eval_tree(x, atoms, ctx).neg(),
        ModFuncExpr::Add(x, y) => eval_tree(x, atoms, ctx).add(&eval_tree(y, atoms, ctx), ctx),
        ModFuncExpr::Sub(x, y) => eval_tree(x, atoms, ctx).sub(&eval_tree(y, atoms, ctx), ctx),
        ModFuncExpr::Mul(x, y) => eval_tree(x, atoms, ctx).mul(&eval_tree(y, atoms, ctx), ctx),
        ModFuncExpr::Div(x, y) => eval_tree(x, atoms, ctx).div(&eval_tree(y, atoms, ctx), ctx),
        ModFuncExpr::Pow(x, k) => {
            let b = eval_tree(x, atoms, ctx);
            let p = b.powi(k.unsigned_abs() as u32, ctx);
            if *k < 0 {
                CBall::from_i64(1, ctx).div(&p, ctx)
            } else {
                p
            }
        }
    }
}

/// Evaluation at a fixed working precision; the error bound is whatever it turns out to be.
pub fn eval_at_precision(f: &ModFuncExpr, tau: &CmPoint, ctx: &Ctx) -> CBall {
    let target = ctx.prec() as f64 + 16.0;
    let atoms: HashMap<Atom, CBall> = f
        .atoms()
        .into_iter()
        .map(|a| (a, eval_atom(&a, tau, target, ctx)))
        .collect();
    eval_tree(f, &atoms, ctx)
}

/// Estimated `log2` of the largest atom value, used to choose the starting precision.
pub fn magnitude_bits(f: &ModFuncExpr, tau: &CmPoint) -> f64 {
    f.atoms()
        .iter()
        .map(|a| {
            let p = tau.scaled(a.scale as i64);
            let (r, _) = reduce_gauss(&p.form()).expect("positive definite");
            let y = cm_point(&r).expect("reduced").to_f64().1;
            let y0 = p.to_f64().1;
            match a.kind {
                AtomKind::J | AtomKind::SmallJ => 2.0 * PI * y * LOG2_E,
                AtomKind::Jm(m) => m as f64 * 2.0 * PI * y * LOG2_E,
                AtomKind::E4 => 2.0 * (y / y0).log2(),
                AtomKind::E6 => 3.0 * (y / y0).log2(),
                // cancellation in the unreduced η series
                AtomKind::Eta => PI / (12.0 * y0) * LOG2_E,
            }
        })
        .fold(0.0, f64::max)
}

/// `f(τ)` with absolute error at most `2^{−bits}`, raising the working precision as needed.
pub fn eval_modfunc(f: &ModFuncExpr, tau: &CmPoint, bits: u32) -> Result<CertifiedComplex> {
    let goal = 2f64.powi(-(bits as i32));
    let mut prec = bits as usize + 32 + magnitude_bits(f, tau).ceil() as usize;
    loop {
        let ctx = Ctx::new(prec);
        let v = eval_at_precision(f, tau, &ctx);
        let err = v.error_bound();
        if err <= goal {
            return Ok(v);
        }
        if prec >= MAX_PREC {
            return Err(Error::Precision { bound: err });
        }
        let missing = if err.is_finite() {
            (err.log2() - goal.log2()).ceil() as usize
        } else {
            prec
        };
        prec = (prec + missing.max(prec / 2) + 16).min(MAX_PREC);
    }
}

/// Evaluation of `J` at `τ` through the independent route `E4³/Δ − 744`.
pub fn eval_j_eisenstein(tau: &CmPoint, ctx: &Ctx) -> CBall {
    let red = reduce(tau, ctx);
    j_via_eisenstein(&red.point, ctx.prec() as f64 + 16.0, ctx)
}

/// The integer within the error bound of `x`.
pub fn recognize_integer(x: &CertifiedComplex) -> Result<BigInt> {
    if !(x.error_bound() < 0.25) || !x.im.contains_zero() {
        return Err(Error::Precision {
            bound: x.error_bound(),
        });
    }
    x.re.to_integer().ok_or(Error::Precision {
        bound: x.error_bound(),
    })
}

/// The rational with denominator dividing `den` within the error bound of `x`.
pub fn recognize_rational(x: &CertifiedComplex, den: i64, ctx: &Ctx) -> Result<BigRational> {
    let n = recognize_integer(&x.mul_i64(den, ctx))?;
    Ok(BigRational::new(n, den.into()))
}

/// Coefficients (constant term first) of `Π (x − v)`, recognized as integers.
pub fn minimal_polynomial(values: &[CertifiedComplex], ctx: &Ctx) -> Result<Vec<BigInt>> {
    let mut poly = vec![CBall::from_i64(1, ctx)];
    for v in values {
        let mut next = vec![CBall::zero(); poly.len() + 1];
        for (i, c) in poly.iter().enumerate() {
            next[i + 1] = next[i + 1].add(c, ctx);
            next[i] = next[i].sub(&c.mul(v, ctx), ctx);
        }
        poly = next;
    }
    poly.iter().map(recognize_integer).collect()
}

/// `x^d + … ` rendered with the usual sign conventions, highest degree first.
pub fn format_polynomial(coeffs: &[BigInt]) -> String {
    let mut out = String::new();
    for (d, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let neg = c < &BigInt::zero();
        let a = if neg { -c } else { c.clone() };
        if out.is_empty() {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = match d {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{d}"),
        };
        if d == 0 || !a.is_one() {
            out.push_str(&a.to_string());
        }
        out.push_str(&mono);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qforms::QuadForm;
    use proptest::prelude::*;

    fn point(a: i64, b: i64, c: i64) -> CmPoint {
        cm_point(&QuadForm::new(a, b, c)).unwrap()
    }

    fn close(x: &CBall, re: f64, im: f64, tol: f64) -> bool {
        (x.re.to_f64() - re).abs() < tol && (x.im.to_f64() - im).abs() < tol
    }

    #[test]
    fn classical_values() {
        let j = parse_modfunc("J(z)").unwrap();
        let v = eval_modfunc(&j, &point(1, 0, 1), 80).unwrap();
        assert_eq!(recognize_integer(&v).unwrap(), BigInt::from(984));
        assert!(v.error_bound() < 1e-20);
        let v = eval_modfunc(&j, &point(1, 1, 1), 80).unwrap();
        assert_eq!(recognize_integer(&v).unwrap(), BigInt::from(-744));
        let e6 = eval_modfunc(&parse_modfunc("E6(z)").unwrap(), &point(1, 0, 1), 80).unwrap();
        assert!(e6.mag() < 1e-20);
        let e4 = eval_modfunc(&parse_modfunc("E4(z)").unwrap(), &point(1, 1, 1), 80).unwrap();
        assert!(e4.mag() < 1e-20);
        // j(√−2) = 8000
        let v = eval_modfunc(&parse_modfunc("j(z)").unwrap(), &point(1, 0, 2), 60).unwrap();
        assert_eq!(recognize_integer(&v).unwrap(), BigInt::from(8000));
    }

    #[test]
    fn level_eleven_value() {
        let f = parse_modfunc("J(11z)").unwrap();
        let v = eval_modfunc(&f, &point(407, 90, 5), 64).unwrap();
        assert!(close(&v, 20641.38121, 0.0, 1e-4), "{v}");
        let w = eval_modfunc(&f, &point(1001, 200, 10), 64).unwrap();
        let ctx = Ctx::new(128);
        let poly = minimal_polynomial(&[v, w], &ctx).unwrap();
        let expected: Vec<BigInt> = ["8786430582336", "-425691312", "1"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(poly, expected);
        assert_eq!(format_polynomial(&poly), "x^2 - 425691312x + 8786430582336");
    }

    #[test]
    fn expressions_combine_componentwise() {
        let tau = point(1, 0, 1);
        let lhs = eval_modfunc(&parse_modfunc("J2(z) - J(z)^2").unwrap(), &tau, 60).unwrap();
        let ctx = Ctx::new(128);
        let j2 = eval_modfunc(&parse_modfunc("J2(z)").unwrap(), &tau, 60).unwrap();
        let j = eval_modfunc(&parse_modfunc("J(z)").unwrap(), &tau, 60).unwrap();
        let rhs = j2.sub(&j.mul(&j, &ctx), &ctx);
        assert!(lhs.sub(&rhs, &ctx).mag() < 1e-15);
        // J_2 = J² − 2·196884
        assert_eq!(recognize_integer(&lhs).unwrap(), BigInt::from(-2 * 196884));
        // Δ = η^24 and 1728Δ = E4³ − E6²
        let id = parse_modfunc("(E4(z)^3 - E6(z)^2)/1728 - eta(z)^24").unwrap();
        let tau = point(3, 1, 2);
        assert!(eval_modfunc(&id, &tau, 80).unwrap().mag() < 1e-20);
    }

    #[test]
    fn recognition_rules() {
        let ctx = Ctx::new(128);
        let x = CBall::real(RBall::from_i64(380712960, &ctx)).add_error(1e-6);
        assert_eq!(recognize_integer(&x).unwrap(), BigInt::from(380712960));
        let half = CBall::real(RBall::from_rational(
            &BigRational::new(1.into(), 2.into()),
            &ctx,
        ))
        .add_error(0.1);
        assert!(matches!(
            recognize_integer(&half),
            Err(Error::Precision { .. })
        ));
        assert_eq!(recognize_integer(&CBall::zero()).unwrap(), BigInt::zero());
        let c = CBall::new(RBall::from_i64(3, &ctx), RBall::from_i64(1, &ctx));
        assert!(recognize_integer(&c).is_err());
        assert!(minimal_polynomial(&[c.clone()], &ctx).is_err());
        assert!(minimal_polynomial(&[c.clone(), c.conj()], &ctx).is_ok());
        let v = eval_modfunc(&parse_modfunc("J(z)").unwrap(), &point(1, 0, 1), 60).unwrap();
        assert_eq!(
            format_polynomial(&minimal_polynomial(&[v], &ctx).unwrap()),
            "x - 984"
        );
    }

    #[test]
    fn direct_and_eisenstein_routes_agree() {
        let ctx = Ctx::new(200);
        for f in [
            QuadForm::new(1, 1, 49),
            QuadForm::new(2, 1, 3),
            QuadForm::new(407, 90, 5),
        ] {
            let tau = cm_point(&f).unwrap();
            let a = eval_at_precision(&parse_modfunc("J(z)").unwrap(), &tau, &ctx);
            let b = eval_j_eisenstein(&tau, &ctx);
            assert!(a.sub(&b, &ctx).mag() < 1e-30 * (1.0 + a.mag()), "{f}");
        }
    }

    #[test]
    fn envelope_bounds_coefficients() {
        let c = j_coefficients(400);
        for (n, v) in c.iter().enumerate().skip(1) {
            let bits = v.bits() as f64;
            assert!(bits - 1.0 <= j_envelope_log2(n as u64), "n={n}");
        }
    }

    #[test]
    fn error_shrinks_with_bits() {
        let f = parse_modfunc("J(11z) + E4(2z)/E6(z)").unwrap();
        let tau = point(407, 90, 5);
        let e1 = eval_modfunc(&f, &tau, 64).unwrap().error_bound();
        let e2 = eval_modfunc(&f, &tau, 128).unwrap().error_bound();
        assert!(e2.log2() <= e1.log2() - 56.0, "{e1} {e2}");
        assert!(e1 <= 2f64.powi(-64) && e2 <= 2f64.powi(-128));
    }

    #[test]
    fn eta_quotient_is_level_eleven_invariant() {
        // sixth power of the weight 2 newform (η(z)η(11z))² on Γ0(11)
        let f = parse_modfunc("eta(z)^12*eta(11z)^12").unwrap();
        let tau = point(11, 1, 3);
        let g = Mat2::new(1, 0, 11, 1);
        let moved = tau.moved(&g);
        let ctx = Ctx::new(160);
        let a = eval_modfunc(&f, &tau, 100).unwrap();
        let b = eval_modfunc(&f, &moved, 100).unwrap();
        // f(gτ) = (11τ + 1)^12 f(τ)
        let t = Point::of(&tau, &ctx).value(&ctx);
        let factor = t
            .mul_i64(11, &ctx)
            .add(&CBall::from_i64(1, &ctx), &ctx)
            .powi(12, &ctx);
        assert!(b.sub(&a.mul(&factor, &ctx), &ctx).mag() < 1e-20 * (1.0 + b.mag()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]

        #[test]
        fn j_is_modular(a in 1i64..20, b in -20i64..20, c in 1i64..30, k in -5i64..5, l in -3i64..3) {
            let f = QuadForm::new(a, b, c);
            prop_assume!(f.disc() < 0);
            let tau = cm_point(&f).unwrap();
            let g = Mat2::t_pow(k).mul(&Mat2::S).mul(&Mat2::t_pow(l));
            let e = parse_modfunc("j(z)").unwrap();
            let x = eval_modfunc(&e, &tau, 40).unwrap();
            let y = eval_modfunc(&e, &tau.moved(&g), 40).unwrap();
            let ctx = Ctx::new(128);
            prop_assert!(x.sub(&y, &ctx).mag() <= 1.01 * (x.error_bound() + y.error_bound()));
        }
    }
}
