//! The generating series of traces and the ingredients of its non-holomorphic part.

use super::cusps::{cusp_expansions, dconst, geodesic_reps, CuspExpansion};
use super::cyclo::Cyclo;
use super::{positive_indices, trace_negative, trace_positive, TraceValue, TwistData};
use crate::ball::{Ctx, RBall};
use crate::cmeval::ModFuncExpr;
use crate::error::{Error, Result};
use crate::genus::chi_delta_lattice;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

fn int(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

/// One coefficient `c(h, m)`; `value` is `None` where it is not computed.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftCoeff {
    pub h: i64,
    pub m: BigRational,
    pub value: Option<TraceValue>,
}

/// Coefficient of a non-holomorphic term: the `1/√v` term (`m = 0`) or a `β`-integral term.
#[derive(Clone, Debug, PartialEq)]
pub struct NonHolomorphicTerm {
    pub h: i64,
    pub m: BigRational,
    pub coefficient: Cyclo,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftExpansion {
    pub data: TwistData,
    pub m_max: BigRational,
    pub coefficients: Vec<LiftCoeff>,
    pub nonholomorphic: Vec<NonHolomorphicTerm>,
}

impl LiftExpansion {
    pub fn coeff(&self, h: i64, m: &BigRational) -> Option<&LiftCoeff> {
        let h = h.rem_euclid(2 * self.data.level as i64);
        self.coefficients.iter().find(|c| c.h == h && &c.m == m)
    }

    pub fn is_holomorphic(&self) -> bool {
        self.nonholomorphic.iter().all(|t| t.coefficient.is_zero())
    }

    /// The constant terms `c(h, 0)` that are present.
    pub fn constant_terms(&self) -> impl Iterator<Item = &LiftCoeff> {
        self.coefficients.iter().filter(|c| c.m.is_zero())
    }
}

impl Serialize for LiftExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let coeffs: Vec<(i64, String, Option<String>)> = self
            .coefficients
            .iter()
            .map(|c| {
                (
                    c.h,
                    c.m.to_string(),
                    c.value.as_ref().map(|v| v.value.to_string()),
                )
            })
            .collect();
        let nonhol: Vec<(i64, String, bool)> = self
            .nonholomorphic
            .iter()
            .map(|t| (t.h, t.m.to_string(), t.coefficient.is_zero()))
            .collect();
        let mut st = s.serialize_struct("LiftExpansion", 6)?;
        st.serialize_field("N", &self.data.level)?;
        st.serialize_field("Delta", &self.data.delta.value())?;
        st.serialize_field("r", &self.data.r)?;
        st.serialize_field("m_max", &self.m_max.to_string())?;
        st.serialize_field("coefficients", &coeffs)?;
        st.serialize_field("nonholomorphic_vanishing", &nonhol)?;
        st.end()
    }
}

/// `Σ_ℓ Σ_λ χ_Δ(λ)·a_ℓ(0)` over `λ ∈ Γ_ℓ\L_{h,ℓ}` with `Q(λ) = −j²/4N`.
fn constant_pairing(exps: &[CuspExpansion], data: &TwistData, h: i64, j: i64) -> Result<Cyclo> {
    let mut acc = Cyclo::zero();
    for exp in exps {
        for rep in geodesic_reps(data.level, &exp.cusp, h, j) {
            let (a, b, c) = rep.coords;
            let chi = chi_delta_lattice(data.delta, data.level, a, b, c)?;
            acc = acc.add(&exp.constant.scale(&int(chi as i64)));
        }
    }
    Ok(acc)
}

/// Non-holomorphic coefficients for every `h` and every `m ∈ [−m_max, 0]` on the support.
fn nonholomorphic_terms(
    exps: &[CuspExpansion],
    data: &TwistData,
    m_max: &BigRational,
) -> Result<Vec<NonHolomorphicTerm>> {
    let n = data.level as i64;
    let d = data.delta.value().abs();
    let sgn = data.delta.sign();
    let mut out = Vec::new();
    for h in 0..2 * n {
        let rh = data.r * h;
        let mut coefficient = Cyclo::zero();
        for exp in exps {
            let dc = dconst(data.level, data.delta, &exp.cusp, rh)?;
            coefficient = coefficient.add(&exp.constant.scale(&(int(dc as i64) * exp.cusp.eps())));
        }
        if data.in_support(h, &BigRational::zero()) {
            out.push(NonHolomorphicTerm {
                h,
                m: BigRational::zero(),
                coefficient,
            });
        }
        let mut j = 1;
        loop {
            let m = BigRational::new((-j * j).into(), (4 * n * d).into());
            if -m.clone() > *m_max {
                break;
            }
            if data.in_support(h, &m) {
                let plus = constant_pairing(exps, data, rh, j)?;
                let minus = constant_pairing(exps, data, -rh, j)?;
                out.push(NonHolomorphicTerm {
                    h,
                    m,
                    coefficient: plus.add(&minus.scale(&int(sgn))),
                });
            }
            j += 1;
        }
    }
    Ok(out)
}

/// All coefficients `c(h, m)` with `|m| <= m_max`, checking `c(−h, m) = sgn(Δ)·c(h, m)`.
pub fn assemble_lift(
    f: &ModFuncExpr,
    data: &TwistData,
    m_max: &BigRational,
    bits: u32,
) -> Result<LiftExpansion> {
    let exps = cusp_expansions(f, data.level)?;
    let n = data.level as i64;
    let d = data.delta.value().abs();
    let dv = data.delta.value();
    let mut coefficients = Vec::new();
    for h in 0..2 * n {
        let mut j = (4.0 * (n * d) as f64 * m_max.to_f64().unwrap_or(0.0))
            .sqrt()
            .floor() as i64
            + 1;
        while j >= 1 {
            let m = BigRational::new((-j * j).into(), (4 * n * d).into());
            if -m.clone() <= *m_max && data.in_support(h, &m) {
                coefficients.push(LiftCoeff {
                    h,
                    m: m.clone(),
                    value: Some(trace_negative(&exps, data, h, &m)?),
                });
            }
            j -= 1;
        }
        let zero = BigRational::zero();
        if data.in_support(h, &zero) {
            let value = if dv == 1 && h == 0 {
                None
            } else {
                Some(TraceValue {
                    value: zero.clone(),
                    error_bound: 0.0,
                    delta: dv,
                })
            };
            coefficients.push(LiftCoeff { h, m: zero, value });
        }
    }
    for (h, m) in positive_indices(data, m_max) {
        coefficients.push(LiftCoeff {
            h,
            m: m.clone(),
            value: Some(trace_positive(f, data, h, &m, bits)?),
        });
    }
    coefficients.sort_by(|a, b| (a.h, &a.m).cmp(&(b.h, &b.m)));
    let sgn = BigInt::from(data.delta.sign());
    for c in &coefficients {
        let mirror = (-c.h).rem_euclid(2 * n);
        let other = coefficients.iter().find(|o| o.h == mirror && o.m == c.m);
        let ok = match (other.and_then(|o| o.value.as_ref()), c.value.as_ref()) {
            (Some(o), Some(v)) => o.value == &v.value * &sgn,
            (None, None) => true,
            _ => false,
        };
        if !ok {
            return Err(Error::Inconsistent(format!(
                "c(-h, m) != sgn(Δ) c(h, m) at h = {}, m = {}",
                c.h, c.m
            )));
        }
    }
    let nonholomorphic = nonholomorphic_terms(&exps, data, m_max)?;
    Ok(LiftExpansion {
        data: *data,
        m_max: m_max.clone(),
        coefficients,
        nonholomorphic,
    })
}

/// `β(s) = ∫_1^∞ t^{−3/2} e^{−st} dt = 2e^{−s} − 2√(πs)·erfc(√s)` for `s >= 0`.
pub fn beta_integral(s: &BigRational, bits: u32) -> Result<RBall> {
    if s < &BigRational::zero() {
        return Err(Error::invalid(format!("β needs s >= 0, got {s}")));
    }
    let sf = s.to_f64().unwrap_or(f64::INFINITY);
    // erfc(√s) ≈ e^{−s}: the subtraction 1 − erf loses about s·log₂e bits
    let extra = (sf * std::f64::consts::LOG2_E).ceil() as usize;
    let ctx = Ctx::new(bits as usize + extra + 64);
    let sb = RBall::from_rational(s, &ctx);
    let two = RBall::from_i64(2, &ctx);
    let e = sb.neg().exp(&ctx);
    if sf == 0.0 {
        return Ok(two);
    }
    let x = sb.sqrt(&ctx);
    // erf(x) = (2/√π)·e^{−x²}·Σ 2ⁿ x^{2n+1}/(2n+1)!!
    let pi = ctx.pi();
    let mut term = x.clone();
    let mut sum = x.clone();
    let x2 = sb.mul_i64(2, &ctx);
    let goal = 2f64.powi(-(ctx.prec() as i32));
    let mut k = 0i64;
    loop {
        term = term
            .mul(&x2, &ctx)
            .div(&RBall::from_i64(2 * k + 3, &ctx), &ctx);
        sum = sum.add(&term, &ctx);
        k += 1;
        // ratio of consecutive terms is 2x²/(2k+3); once it is below 1/2 the tail is under twice the next term
        if 4.0 * sf < (2 * k + 3) as f64 && term.mag() <= goal * sum.mag_lower() {
            let tail = 2.0 * term.mag() * 2.0 * sf / (2 * k + 3) as f64;
            sum = sum.add_error(tail);
            break;
        }
    }
    let erf = sum.mul(&e, &ctx).mul(&two, &ctx).div(&pi.sqrt(&ctx), &ctx);
    let erfc = RBall::from_i64(1, &ctx).sub(&erf, &ctx);
    let root = pi.mul(&sb, &ctx).sqrt(&ctx);
    Ok(two
        .mul(&e, &ctx)
        .sub(&two.mul(&root, &ctx).mul(&erfc, &ctx), &ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::Discriminant;
    use crate::cmeval::parse_modfunc;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Romberg quadrature of `2∫₀¹ e^{−s/u²} du`, midpoints only.
    fn romberg(s: &BigRational, levels: usize, ctx: &Ctx) -> RBall {
        let sb = RBall::from_rational(s, ctx);
        let f = |u: &RBall| -> RBall {
            if u.mag() == 0.0 {
                return RBall::zero();
            }
            sb.div(&u.mul(u, ctx), ctx).neg().exp(ctx).mul_i64(2, ctx)
        };
        let strip = |x: RBall| RBall::exact(x.mid().clone());
        let one = RBall::from_i64(1, ctx);
        let mut rows: Vec<Vec<RBall>> = Vec::new();
        let mut trap = strip(f(&one).div(&RBall::from_i64(2, ctx), ctx));
        for level in 0..levels {
            let n = 1i64 << level;
            if level > 0 {
                let mut mid = RBall::zero();
                for i in 0..n / 2 {
                    let u = RBall::from_i64(2 * i + 1, ctx).div(&RBall::from_i64(n, ctx), ctx);
                    mid = mid.add(&f(&u), ctx);
                }
                trap = strip(
                    trap.div(&RBall::from_i64(2, ctx), ctx)
                        .add(&mid.div(&RBall::from_i64(n, ctx), ctx), ctx),
                );
            }
            let mut row = vec![trap.clone()];
            let mut p4 = 1i64;
            for k in 1..=level {
                p4 *= 4;
                let prev = &rows[level - 1][k - 1];
                let cur = &row[k - 1];
                let next = cur
                    .sub(prev, ctx)
                    .div(&RBall::from_i64(p4 - 1, ctx), ctx)
                    .add(cur, ctx);
                row.push(strip(next));
            }
            rows.push(row);
        }
        rows.last().unwrap().last().unwrap().clone()
    }

    #[test]
    fn beta_matches_quadrature() {
        let ctx = Ctx::new(160);
        for s in [q(1, 1), q(1, 4), q(5, 2), q(1, 100)] {
            let b = beta_integral(&s, 100).unwrap();
            assert!(b.rad() < 1e-28);
            let r = romberg(&s, 14, &ctx);
            let diff = b.sub(&r, &ctx).mag();
            assert!(diff < 1e-20, "s={s}: {diff:e}");
        }
        assert_eq!(beta_integral(&q(0, 1), 64).unwrap().to_f64(), 2.0);
        assert!(beta_integral(&q(-1, 1), 64).is_err());
        // e^{−s}/s·(1 − 3/(2s) + O(s⁻²))
        let big = beta_integral(&q(40, 1), 64).unwrap().to_f64();
        let approx = (-40f64).exp() / 40.0 * (1.0 - 3.0 / 80.0);
        assert!((big / approx - 1.0).abs() < 0.005, "{big:e} vs {approx:e}");
    }

    #[test]
    fn level_eleven_lift() {
        let f = parse_modfunc("J(11z)").unwrap();
        let data = TwistData::new(11, Discriminant::new(5).unwrap(), 7).unwrap();
        let lift = assemble_lift(&f, &data, &q(1, 2), 64).unwrap();
        assert!(lift.is_holomorphic());
        assert!(lift
            .constant_terms()
            .all(|c| c.value.as_ref().unwrap().value.is_zero()));
        assert_eq!(
            lift.coeff(6, &q(8, 44))
                .unwrap()
                .value
                .as_ref()
                .unwrap()
                .value,
            q(380712960, 1)
        );
        assert_eq!(
            lift.coeff(7, &q(-5, 44))
                .unwrap()
                .value
                .as_ref()
                .unwrap()
                .value,
            q(-2, 1)
        );
        assert_eq!(
            lift.coeff(13, &q(7, 44))
                .unwrap()
                .value
                .as_ref()
                .unwrap()
                .value,
            q(-105512960, 1)
        );
    }

    #[test]
    fn nonholomorphic_part_detects_constants() {
        let f = parse_modfunc("j(z)").unwrap();
        let data = TwistData::new(1, Discriminant::new(1).unwrap(), 1).unwrap();
        let lift = assemble_lift(&f, &data, &q(1, 1), 64).unwrap();
        assert!(!lift.is_holomorphic());
        assert!(lift.coeff(0, &q(0, 1)).unwrap().value.is_none());
        let twisted = TwistData::new(1, Discriminant::new(5).unwrap(), 1).unwrap();
        let lift = assemble_lift(&f, &twisted, &q(1, 1), 64).unwrap();
        assert!(lift.is_holomorphic());
    }
}
