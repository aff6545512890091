//! Twisted traces of CM values and their generating series.
//!
//! Lift indices `m` are rational with `m ≡ sgn(Δ)·Q(h) (mod 1)`, `Q(h) = −h²/4N`. At
//! `m > 0` the trace sums over Heegner classes of discriminant `−4N|Δ|m`; at `m < 0`
//! it sums over geodesics attached to cusps. Values are normalized by `1/√Δ`
//! (principal branch) unless stated otherwise.

pub mod cusps;
pub mod cyclo;
mod lift;
mod negative;

pub use cusps::{cusp_expansions, cusps, dconst, geodesic_reps, Cusp, CuspExpansion, GeodesicRep};
pub use cyclo::Cyclo;
pub use lift::{assemble_lift, beta_integral, LiftCoeff, LiftExpansion, NonHolomorphicTerm};
pub use negative::{
    integer_principal_part, mu_params, trace_negative, trace_negative_fricke, trace_negative_mu,
    MuParams,
};

use crate::arith::{lcm, Discriminant};
use crate::ball::{CBall, Ctx, RBall};
use crate::cmeval::{eval_modfunc, magnitude_bits, recognize_rational, ModFuncExpr};
use crate::error::{Error, Result};
use crate::genus::{chi_delta, is_admissible};
use crate::qforms::{cm_point, heegner_classes, positive_heegner_classes};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Level, twisting discriminant and the residue `r` with `r² ≡ Δ (mod 4N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TwistData {
    pub level: u64,
    pub delta: Discriminant,
    pub r: i64,
}

impl TwistData {
    pub fn new(level: u64, delta: Discriminant, r: i64) -> Result<Self> {
        if level == 0 {
            return Err(Error::invalid("level must be positive"));
        }
        if !delta.is_fundamental() && delta.value() != 1 {
            return Err(Error::invalid(format!(
                "{} is not a fundamental discriminant",
                delta.value()
            )));
        }
        if !is_admissible(delta, level) {
            return Err(Error::invalid(format!(
                "{} is not a square modulo {}",
                delta.value(),
                4 * level
            )));
        }
        let four_n = 4 * level as i64;
        if (r * r - delta.value()).rem_euclid(four_n) != 0 {
            return Err(Error::invalid(format!(
                "{r}^2 is not congruent to {} modulo {four_n}",
                delta.value()
            )));
        }
        Ok(TwistData {
            level,
            delta,
            r: r.rem_euclid(2 * level as i64),
        })
    }

    fn two_n(&self) -> i64 {
        2 * self.level as i64
    }

    /// Whether `m ≡ sgn(Δ)·Q(h) (mod 1)`.
    pub fn in_support(&self, h: i64, m: &BigRational) -> bool {
        let four_n = 4 * self.level as i64;
        let shifted = m + BigRational::new((self.delta.sign() * h * h).into(), four_n.into());
        shifted.is_integer()
    }

    fn check_support(&self, h: i64, m: &BigRational) -> Result<()> {
        if self.in_support(h, m) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "index {m} is not congruent to sgn(Δ)Q({h}) modulo 1"
            )))
        }
    }
}

/// How trace values are reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Normalization {
    /// Divided by `√Δ`; always rational.
    SqrtDelta,
    /// Undivided, as a surd `t·√Δ`.
    Raw,
}

/// An exact trace together with the certified error of the numerics it was read from.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceValue {
    pub value: BigRational,
    pub error_bound: f64,
    pub delta: i64,
}

impl TraceValue {
    pub fn render(&self, norm: Normalization) -> String {
        match norm {
            Normalization::SqrtDelta => self.value.to_string(),
            Normalization::Raw if self.delta == 1 || self.value.is_zero() => self.value.to_string(),
            Normalization::Raw => format!("{}*sqrt({})", self.value, self.delta),
        }
    }
}

/// `x/√Δ` on the principal branch.
fn divide_sqrt_delta(x: &CBall, delta: i64, ctx: &Ctx) -> CBall {
    let root = RBall::from_i64(delta.abs(), ctx).sqrt(ctx);
    let y = x.div_real(&root, ctx);
    if delta > 0 {
        y
    } else {
        y.mul_i().neg()
    }
}

fn recognize(x: &CBall, den: i64, ctx: &Ctx) -> Result<TraceValue> {
    let value = recognize_rational(x, den, ctx)?;
    Ok(TraceValue {
        value,
        error_bound: x.error_bound(),
        delta: 0,
    })
}

struct Term {
    chi: i32,
    weight: usize,
    point: crate::qforms::CmPoint,
}

/// `Σ χ/w · f(α)` with a working budget of `bits` absolute bits per term.
fn sum_terms(f: &ModFuncExpr, terms: &[Term], bits: u32) -> Result<(CBall, Ctx)> {
    let mag = terms
        .iter()
        .map(|t| magnitude_bits(f, &t.point))
        .fold(0.0, f64::max);
    let ctx = Ctx::new(bits as usize + mag.ceil() as usize + 64);
    let mut acc = CBall::zero();
    for t in terms {
        if t.chi == 0 {
            continue;
        }
        let v = eval_modfunc(f, &t.point, bits)?;
        let c = RBall::from_rational(
            &BigRational::new(t.chi.into(), (t.weight as i64).into()),
            &ctx,
        );
        acc = acc.add(&v.scale(&c, &ctx), &ctx);
    }
    Ok((acc, ctx))
}

/// Evaluate, recognize with denominator `den`, and raise precision on failure.
fn certified(
    f: &ModFuncExpr,
    terms: &[Term],
    den: i64,
    delta: i64,
    bits: u32,
) -> Result<TraceValue> {
    let count = terms.len().max(1) as f64;
    let mut b = bits.max((count * den as f64).log2().ceil() as u32 + 12);
    let mut last = Error::Precision {
        bound: f64::INFINITY,
    };
    for _ in 0..4 {
        let (raw, ctx) = sum_terms(f, terms, b)?;
        let t = divide_sqrt_delta(&raw, delta, &ctx);
        match recognize(&t, den, &ctx) {
            Ok(mut v) => {
                v.delta = delta;
                return Ok(v);
            }
            Err(e) => last = e,
        }
        b += 64;
    }
    Err(last)
}

fn check_function(f: &ModFuncExpr, n: u64) -> Result<()> {
    if f.has_level(n) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{f} is not of level {n}")))
    }
}

/// `t_{Δ,r}(f; h, m)` for `m > 0`: the sum over both definite signs of
/// `χ_Δ(Q)/w_Q · f(α_Q)` for `Q` of discriminant `−4N|Δ|m` with `b ≡ rh (mod 2N)`,
/// where a negative definite `Q` is evaluated at the CM point of `−Q`.
pub fn trace_positive(
    f: &ModFuncExpr,
    data: &TwistData,
    h: i64,
    m: &BigRational,
    bits: u32,
) -> Result<TraceValue> {
    check_function(f, data.level)?;
    if !m.is_positive() {
        return Err(Error::invalid(format!("index {m} is not positive")));
    }
    data.check_support(h, m)?;
    let dv = data.delta.value();
    let disc = -(m * BigInt::from(4 * data.level as i64 * dv.abs()));
    let disc = disc
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::invalid("discriminant out of range"))?;
    let beta = (data.r * h).rem_euclid(data.two_n());
    let classes = heegner_classes(data.level, disc, beta)?;
    let mut terms = Vec::new();
    let mut den = 1;
    for rep in &classes.reps {
        let chi = chi_delta(data.delta, data.level, &rep.form)?;
        let pos = if rep.form.a > 0 {
            rep.form
        } else {
            rep.form.neg()
        };
        den = lcm(den, rep.stabilizer_order as i64);
        terms.push(Term {
            chi,
            weight: rep.stabilizer_order,
            point: cm_point(&pos)?,
        });
    }
    certified(f, &terms, den, dv, bits)
}

/// `(1/√Δ)·Σ χ_Δ(Q)/w_Q · f(α_Q)` over positive definite `Q` of discriminant `−d|Δ|`
/// with `N | a`, all residues of `b`.
pub fn trace_scalar(
    f: &ModFuncExpr,
    n: u64,
    delta: Discriminant,
    d: i64,
    bits: u32,
) -> Result<TraceValue> {
    check_function(f, n)?;
    let dv = delta.value();
    if dv <= 0 {
        return Err(Error::invalid(
            "the scalar trace needs a positive discriminant",
        ));
    }
    if d <= 0 {
        return Err(Error::invalid(format!("{d} is not positive")));
    }
    if !is_admissible(delta, n) {
        return Err(Error::invalid(format!(
            "{dv} is not a square modulo {}",
            4 * n
        )));
    }
    let disc = -d * dv;
    let two_n = 2 * n as i64;
    let mut terms = Vec::new();
    let mut den = 1;
    for beta in 0..two_n {
        if (beta * beta - disc).rem_euclid(2 * two_n) != 0 {
            continue;
        }
        for rep in positive_heegner_classes(n, disc, beta)? {
            let chi = chi_delta(delta, n, &rep.form)?;
            den = lcm(den, rep.stabilizer_order as i64);
            terms.push(Term {
                chi,
                weight: rep.stabilizer_order,
                point: cm_point(&rep.form)?,
            });
        }
    }
    certified(f, &terms, den, dv, bits)
}

/// `t_{Δ,r}(f; h, m)` for any index on the support.
///
/// At `m = 0` the value is 0 for `Δ ≠ 1` or `h ≠ 0`; for `Δ = 1, h = 0` it is a
/// regularized integral and is reported as [`Error::NotComputed`].
pub fn trace(
    f: &ModFuncExpr,
    data: &TwistData,
    h: i64,
    m: &BigRational,
    bits: u32,
) -> Result<TraceValue> {
    data.check_support(h, m)?;
    let dv = data.delta.value();
    if m.is_positive() {
        trace_positive(f, data, h, m, bits)
    } else if m.is_zero() {
        if dv == 1 && h.rem_euclid(data.two_n()) == 0 {
            Err(Error::NotComputed(
                "constant term t(f; 0, 0) for Δ = 1 (regularized integral)".into(),
            ))
        } else {
            Ok(TraceValue {
                value: BigRational::zero(),
                error_bound: 0.0,
                delta: dv,
            })
        }
    } else {
        let exps = cusp_expansions(f, data.level)?;
        trace_negative(&exps, data, h, m)
    }
}

/// All `h mod 2N` and all positive indices up to `m_max` on the support.
pub fn positive_indices(data: &TwistData, m_max: &BigRational) -> Vec<(i64, BigRational)> {
    let four_n = 4 * data.level as i64;
    let top = (m_max * BigInt::from(four_n))
        .floor()
        .to_integer()
        .to_i64()
        .unwrap_or(0);
    let mut out = Vec::new();
    for h in 0..data.two_n() {
        for num in 1..=top {
            let m = BigRational::new(num.into(), four_n.into());
            if data.in_support(h, &m) {
                out.push((h, m));
            }
        }
    }
    out
}

/// The integer `j` with `m = −j²/(4N|Δ|)`, if `m` has that shape.
pub(crate) fn geodesic_index(data: &TwistData, m: &BigRational) -> Option<i64> {
    let scaled = -(m * BigInt::from(4 * data.level as i64 * data.delta.value().abs()));
    if !scaled.is_integer() || !scaled.is_positive() {
        return None;
    }
    let v = scaled.to_integer().to_i64()?;
    let j = (v as f64).sqrt().round() as i64;
    (j * j == v).then_some(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmeval::parse_modfunc;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn disc(v: i64) -> Discriminant {
        Discriminant::new(v).unwrap()
    }

    #[test]
    fn twist_data_validation() {
        assert!(TwistData::new(11, disc(5), 7).is_ok());
        assert!(TwistData::new(11, disc(5), 6).is_err());
        assert!(TwistData::new(11, disc(-3), 1).is_err());
        let d = TwistData::new(11, disc(5), 7).unwrap();
        assert!(d.in_support(6, &q(8, 44)));
        assert!(!d.in_support(6, &q(9, 44)));
    }

    #[test]
    fn level_one_classical_traces() {
        let f = parse_modfunc("J(z)").unwrap();
        let one = disc(1);
        // J(i)/2 at d = 4 and J(ρ)/3 at d = 3
        assert_eq!(trace_scalar(&f, 1, one, 3, 64).unwrap().value, q(-248, 1));
        assert_eq!(trace_scalar(&f, 1, one, 4, 64).unwrap().value, q(492, 1));
        assert_eq!(trace_scalar(&f, 1, one, 7, 64).unwrap().value, q(-4119, 1));
        // the twisted trace at D = −15 is 2·√5·… ; its normalized value is an integer
        let t = trace_scalar(&f, 1, disc(5), 3, 64).unwrap();
        assert!(t.value.is_integer());
    }

    #[test]
    fn lift_trace_is_twice_the_scalar_trace() {
        let f = parse_modfunc("J(11z)").unwrap();
        let data = TwistData::new(11, disc(5), 7).unwrap();
        let lift = trace_positive(&f, &data, 6, &q(8, 44), 64).unwrap();
        let scalar = trace_scalar(&f, 11, disc(5), 8, 64).unwrap();
        assert_eq!(lift.value, scalar.value);
        assert_eq!(lift.value, q(380712960, 1));
        assert!(lift.error_bound < 1e-10);
    }

    #[test]
    fn symmetry_in_h() {
        let f = parse_modfunc("J(5z) + 3").unwrap();
        for (dv, r) in [(5i64, 5i64), (-4, 0), (-7, 3)] {
            let Ok(data) = TwistData::new(5, disc(dv), r) else {
                continue;
            };
            for (h, m) in positive_indices(&data, &q(2, 1)) {
                let a = trace_positive(&f, &data, h, &m, 64).unwrap();
                let b = trace_positive(&f, &data, -h, &m, 64).unwrap();
                assert_eq!(
                    b.value,
                    a.value * BigInt::from(data.delta.sign()),
                    "Δ={dv} h={h} m={m}"
                );
            }
        }
    }

    #[test]
    fn zero_index() {
        let f = parse_modfunc("J(z)").unwrap();
        let d1 = TwistData::new(1, disc(1), 1).unwrap();
        assert!(matches!(
            trace(&f, &d1, 0, &q(0, 1), 64),
            Err(Error::NotComputed(_))
        ));
        let d5 = TwistData::new(1, disc(5), 1).unwrap();
        assert_eq!(trace(&f, &d5, 0, &q(0, 1), 64).unwrap().value, q(0, 1));
        assert!(trace(&f, &d5, 0, &q(1, 3), 64).is_err());
    }

    #[test]
    fn rendering() {
        let t = TraceValue {
            value: q(-3, 2),
            error_bound: 0.0,
            delta: 5,
        };
        assert_eq!(t.render(Normalization::SqrtDelta), "-3/2");
        assert_eq!(t.render(Normalization::Raw), "-3/2*sqrt(5)");
    }
}
