//! Integral binary quadratic forms, Γ₀(N) Heegner classes and CM points.
//!
//! Forms act on the right: `act(g, Q)(x, y) = Q(g·(x, y))`, so
//! `act(gh, Q) = act(h, act(g, Q))` and the CM point transforms as
//! `α_{act(g,Q)} = g⁻¹ α_Q`.

use crate::arith::{ext_gcd, gcd, gcd_all};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::ser::{Serialize, SerializeStruct, Serializer};
use std::fmt;

/// The form `a x² + b x y + c y²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub const fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn disc(&self) -> i64 {
        narrow((self.b as i128).pow(2) - 4 * self.a as i128 * self.c as i128)
    }

    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.a * x * x + self.b * x * y + self.c * y * y
    }

    pub fn content(&self) -> i64 {
        gcd_all(&[self.a, self.b, self.c])
    }

    pub fn is_positive_definite(&self) -> bool {
        self.disc() < 0 && self.a > 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.disc() < 0 && self.a < 0
    }

    pub fn neg(&self) -> Self {
        QuadForm::new(-self.a, -self.b, -self.c)
    }

    /// `(a, b, c) ↦ (c, b, a)`.
    pub fn mirror(&self) -> Self {
        QuadForm::new(self.c, self.b, self.a)
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

/// Integer 2×2 matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };
    pub const S: Mat2 = Mat2 {
        a: 0,
        b: -1,
        c: 1,
        d: 0,
    };
    pub const T: Mat2 = Mat2 {
        a: 1,
        b: 1,
        c: 0,
        d: 1,
    };

    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    /// Inverse of a determinant one matrix.
    pub fn inv(&self) -> Mat2 {
        Mat2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> Mat2 {
        Mat2::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn t_pow(k: i64) -> Mat2 {
        Mat2::new(1, k, 0, 1)
    }

    pub fn in_gamma0(&self, n: i64) -> bool {
        self.c % n == 0
    }
}

fn narrow(x: i128) -> i64 {
    i64::try_from(x).expect("quadratic form coefficient overflow")
}

/// `Q ∘ g`, the form `(x, y) ↦ Q(g (x, y)ᵀ)`.
pub fn act(g: &Mat2, q: &QuadForm) -> Result<QuadForm> {
    if g.det() != 1 {
        return Err(Error::invalid(format!(
            "matrix {g:?} does not have determinant 1"
        )));
    }
    Ok(act_unchecked(g, q))
}

fn act_unchecked(g: &Mat2, q: &QuadForm) -> QuadForm {
    let (p, qq, r, s) = (g.a as i128, g.b as i128, g.c as i128, g.d as i128);
    let (a, b, c) = (q.a as i128, q.b as i128, q.c as i128);
    QuadForm::new(
        narrow(a * p * p + b * p * r + c * r * r),
        narrow(2 * a * p * qq + b * (p * s + qq * r) + 2 * c * r * s),
        narrow(a * qq * qq + b * qq * s + c * s * s),
    )
}

/// Whether `Q` satisfies `|b| <= a <= c` with `b >= 0` when `|b| = a` or `a = c`.
pub fn is_reduced(q: &QuadForm) -> bool {
    q.b.abs() <= q.a && q.a <= q.c && (q.b >= 0 || (q.b.abs() != q.a && q.a != q.c))
}

/// Gauss reduction: returns `(R, M)` with `R` reduced and `act(M, Q) = R`.
pub fn reduce_gauss(q: &QuadForm) -> Result<(QuadForm, Mat2)> {
    if !q.is_positive_definite() {
        return Err(Error::invalid(format!("{q} is not positive definite")));
    }
    let mut f = *q;
    let mut m = Mat2::IDENTITY;
    loop {
        let k = (f.a - f.b).div_euclid(2 * f.a);
        if k != 0 {
            let t = Mat2::t_pow(k);
            f = act_unchecked(&t, &f);
            m = m.mul(&t);
        }
        if f.a > f.c {
            f = act_unchecked(&Mat2::S, &f);
            m = m.mul(&Mat2::S);
        } else {
            break;
        }
    }
    if f.a == f.c && f.b < 0 {
        f = act_unchecked(&Mat2::S, &f);
        m = m.mul(&Mat2::S);
    }
    debug_assert!(is_reduced(&f));
    Ok((f, m))
}

/// Automorphs of a reduced positive definite form, one per `±` pair.
pub fn reduced_automorphs(r: &QuadForm) -> Vec<Mat2> {
    let mut out = vec![Mat2::IDENTITY];
    for a in -1..=1 {
        for b in -1..=1 {
            for c in -1..=1 {
                for d in -1..=1 {
                    let g = Mat2::new(a, b, c, d);
                    if g.det() != 1 || g == Mat2::IDENTITY || g == Mat2::IDENTITY.neg() {
                        continue;
                    }
                    if out.iter().any(|h| *h == g.neg()) {
                        continue;
                    }
                    if act_unchecked(&g, r) == *r {
                        out.push(g);
                    }
                }
            }
        }
    }
    out
}

/// Reduces a definite form (negative definite forms via their negatives).
fn reduce_definite(q: &QuadForm) -> Result<(QuadForm, Mat2, bool)> {
    if q.disc() >= 0 {
        return Err(Error::invalid(format!("{q} is not definite")));
    }
    if q.a > 0 {
        let (r, m) = reduce_gauss(q)?;
        Ok((r, m, true))
    } else {
        let (r, m) = reduce_gauss(&q.neg())?;
        Ok((r, m, false))
    }
}

/// Order of the image in PSL₂(Z) of the stabilizer of `Q` in Γ₀(N).
pub fn stabilizer_order(q: &QuadForm, n: u64) -> Result<usize> {
    let (r, m, _) = reduce_definite(q)?;
    let minv = m.inv();
    Ok(reduced_automorphs(&r)
        .iter()
        .filter(|s| m.mul(s).mul(&minv).in_gamma0(n as i64))
        .count())
}

/// Whether `Q1` and `Q2` lie in the same Γ₀(N)-orbit.
pub fn gamma0_equivalent(q1: &QuadForm, q2: &QuadForm, n: u64) -> Result<bool> {
    let (r1, m1, s1) = reduce_definite(q1)?;
    let (r2, m2, s2) = reduce_definite(q2)?;
    if r1 != r2 || s1 != s2 {
        return Ok(false);
    }
    let m2inv = m2.inv();
    Ok(reduced_automorphs(&r1)
        .iter()
        .any(|s| m1.mul(s).mul(&m2inv).in_gamma0(n as i64)))
}

/// All reduced positive definite forms of discriminant `d < 0`, primitive or not.
pub fn reduced_forms(d: i64) -> Vec<QuadForm> {
    assert!(d < 0);
    let mut out = Vec::new();
    let mut a = 1;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            let q = QuadForm::new(a, b, c);
            if c >= a && is_reduced(&q) {
                out.push(q);
            }
        }
        a += 1;
    }
    out
}

/// Canonical representatives of P¹(Z/N), each the lexicographically least among its unit multiples.
pub fn projective_line(n: i64) -> Vec<(i64, i64)> {
    let units: Vec<i64> = (0..n).filter(|&u| gcd(u, n) == 1).collect();
    let mut out = Vec::new();
    for p in 0..n {
        for r in 0..n {
            if gcd_all(&[p, r, n]) != 1 {
                continue;
            }
            if canonical_point(p, r, n, &units) == (p, r) {
                out.push((p, r));
            }
        }
    }
    out
}

fn canonical_point(p: i64, r: i64, n: i64, units: &[i64]) -> (i64, i64) {
    units
        .iter()
        .map(|&u| ((u * p).rem_euclid(n), (u * r).rem_euclid(n)))
        .min()
        .unwrap_or((0, 0))
}

/// A matrix in SL₂(Z) whose first column is congruent to `(p, r)` modulo `n`.
pub fn lift_to_sl2(p: i64, r: i64, n: i64) -> Mat2 {
    if (p - 1).rem_euclid(n) == 0 && r.rem_euclid(n) == 0 {
        return Mat2::IDENTITY;
    }
    for i in 0..=n + 1 {
        for j in 0..=n + 1 {
            for (sp, sr) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
                let pp = sp * (p + n * i);
                let rr = sr * (r + n * j);
                if (pp - p).rem_euclid(n) != 0 || (rr - r).rem_euclid(n) != 0 {
                    continue;
                }
                if gcd(pp, rr) == 1 {
                    let (_, x, y) = ext_gcd(pp, rr);
                    return Mat2::new(pp, -y, rr, x);
                }
            }
        }
    }
    unreachable!("coprime lift always exists")
}

/// A Heegner class representative with its Γ₀(N) stabilizer order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClassRep {
    pub form: QuadForm,
    pub stabilizer_order: usize,
}

/// Γ₀(N)-classes of definite forms of discriminant `D` with `N | a` and `b ≡ β (mod 2N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeegnerClassSet {
    pub level: u64,
    pub disc: i64,
    pub beta: i64,
    pub reps: Vec<ClassRep>,
}

impl HeegnerClassSet {
    pub fn positive(&self) -> impl Iterator<Item = &ClassRep> {
        self.reps.iter().filter(|c| c.form.a > 0)
    }

    pub fn negative(&self) -> impl Iterator<Item = &ClassRep> {
        self.reps.iter().filter(|c| c.form.a < 0)
    }
}

impl Serialize for HeegnerClassSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let reps: Vec<[i64; 4]> = self
            .reps
            .iter()
            .map(|c| [c.form.a, c.form.b, c.form.c, c.stabilizer_order as i64])
            .collect();
        let mut st = s.serialize_struct("HeegnerClassSet", 4)?;
        st.serialize_field("N", &self.level)?;
        st.serialize_field("D", &self.disc)?;
        st.serialize_field("beta", &self.beta)?;
        st.serialize_field("reps", &reps)?;
        st.end()
    }
}

/// Positive definite classes with `N | a` and `b ≡ β (mod 2N)`.
pub fn positive_heegner_classes(n: u64, d: i64, beta: i64) -> Result<Vec<ClassRep>> {
    validate_heegner(n, d, beta)?;
    let nn = n as i64;
    let units: Vec<i64> = (0..nn).filter(|&u| gcd(u, nn) == 1).collect();
    let points = projective_line(nn);
    let mut out = Vec::new();
    for r in reduced_forms(d) {
        let autos = reduced_automorphs(&r);
        let mut seen = std::collections::BTreeSet::new();
        for &(p, rr) in &points {
            if seen.contains(&(p, rr)) {
                continue;
            }
            for s in &autos {
                let x = (s.a * p + s.b * rr).rem_euclid(nn.max(1));
                let y = (s.c * p + s.d * rr).rem_euclid(nn.max(1));
                seen.insert(canonical_point(x, y, nn, &units));
            }
            let g = lift_to_sl2(p, rr, nn);
            let mut q = act_unchecked(&g, &r);
            let k = (q.a - q.b).div_euclid(2 * q.a);
            q = act_unchecked(&Mat2::t_pow(k), &q);
            if q.a % nn != 0 || (q.b - beta).rem_euclid(2 * nn) != 0 {
                continue;
            }
            let stab = stabilizer_order(&q, n)?;
            out.push(ClassRep {
                form: q,
                stabilizer_order: stab,
            });
        }
    }
    Ok(out)
}

fn validate_heegner(n: u64, d: i64, beta: i64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("level must be positive"));
    }
    if d >= 0 {
        return Err(Error::invalid(format!("discriminant {d} is not negative")));
    }
    if (beta * beta - d).rem_euclid(4 * n as i64) != 0 {
        return Err(Error::invalid(format!(
            "{d} is not congruent to {beta}^2 modulo {}",
            4 * n
        )));
    }
    Ok(())
}

/// Both definite signs: positive forms with `b ≡ β` and negatives of positive forms with `b ≡ −β`.
pub fn heegner_classes(n: u64, d: i64, beta: i64) -> Result<HeegnerClassSet> {
    validate_heegner(n, d, beta)?;
    let beta = beta.rem_euclid(2 * n as i64);
    let mut reps = positive_heegner_classes(n, d, beta)?;
    for c in positive_heegner_classes(n, d, -beta)? {
        reps.push(ClassRep {
            form: c.form.neg(),
            stabilizer_order: c.stabilizer_order,
        });
    }
    Ok(HeegnerClassSet {
        level: n,
        disc: d,
        beta,
        reps,
    })
}

/// The CM point `α_Q = (−b + i√|D|)/(2a)` of a positive definite form, kept exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CmPoint {
    form: QuadForm,
}

impl CmPoint {
    pub fn form(&self) -> QuadForm {
        self.form
    }

    pub fn real(&self) -> BigRational {
        BigRational::new(BigInt::from(-self.form.b), BigInt::from(2 * self.form.a))
    }

    /// Imaginary part as `(radicand, denominator)`: `√radicand / denominator`.
    pub fn imag(&self) -> (i64, i64) {
        (-self.form.disc(), 2 * self.form.a)
    }

    /// The point `k·α_Q`.
    pub fn scaled(&self, k: i64) -> CmPoint {
        assert!(k >= 1);
        CmPoint {
            form: QuadForm::new(self.form.a, k * self.form.b, k * k * self.form.c),
        }
    }

    /// The point `g·α_Q`.
    pub fn moved(&self, g: &Mat2) -> CmPoint {
        CmPoint {
            form: act_unchecked(&g.inv(), &self.form),
        }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        let (rad, den) = self.imag();
        (
            -(self.form.b as f64) / (2.0 * self.form.a as f64),
            (rad as f64).sqrt() / den as f64,
        )
    }
}

impl fmt::Display for CmPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}+sqrt({}))/{}",
            -self.form.b,
            self.form.disc(),
            2 * self.form.a
        )
    }
}

pub fn cm_point(q: &QuadForm) -> Result<CmPoint> {
    if !q.is_positive_definite() {
        return Err(Error::invalid(format!("{q} is not positive definite")));
    }
    Ok(CmPoint { form: *q })
}
