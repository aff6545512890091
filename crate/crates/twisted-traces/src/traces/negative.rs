//! Traces at negative index: cycle integrals over infinite geodesics.

use super::cusps::{geodesic_reps, Cusp, CuspExpansion};
use super::cyclo::Cyclo;
use super::{divide_sqrt_delta, geodesic_index, recognize, TraceValue, TwistData};
use crate::arith::{gcd, inv_mod, is_squarefree, kronecker, Discriminant};
use crate::ball::{CBall, Ctx, RBall};
use crate::error::{Error, Result};
use crate::genus::chi_delta_lattice;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn int(x: i64) -> BigRational {
    BigRational::from_integer(x.into())
}

/// `−Σ_{n<0} a(n) e(x·n)`: the pairing of `f` with a geodesic whose real part is `x`.
fn pairing(exp: &CuspExpansion, x: &BigRational) -> Cyclo {
    let mut acc = Cyclo::zero();
    for (e, c) in &exp.principal {
        acc = acc.add(&c.rotate(&(x * e)).scale(&int(-1)));
    }
    acc
}

/// `Σ_ℓ Σ_{λ ∈ Γ_ℓ\L_{h,ℓ}} χ_Δ(λ)·value(ℓ, λ)` for `Q(λ) = −j²/4N`.
fn geodesic_sum(
    exps: &[CuspExpansion],
    n: u64,
    delta: Discriminant,
    h: i64,
    j: i64,
    value: impl Fn(&CuspExpansion, &BigRational) -> Cyclo,
) -> Result<Cyclo> {
    let mut acc = Cyclo::zero();
    for exp in exps {
        for rep in geodesic_reps(n, &exp.cusp, h, j) {
            let (a, b, c) = rep.coords;
            let chi = chi_delta_lattice(delta, n, a, b, c)?;
            if chi != 0 {
                acc = acc.add(&value(exp, &rep.re).scale(&int(chi as i64)));
            }
        }
    }
    Ok(acc)
}

/// Raw negative-index trace, unnormalized, as an exact cyclotomic number.
fn raw_negative(exps: &[CuspExpansion], data: &TwistData, h: i64, j: i64) -> Result<Cyclo> {
    let rh = data.r * h;
    let plus = geodesic_sum(exps, data.level, data.delta, rh, j, pairing)?;
    let minus = geodesic_sum(exps, data.level, data.delta, -rh, j, pairing)?;
    Ok(plus.add(&minus.scale(&int(data.delta.sign()))))
}

fn normalized(raw: &Cyclo, delta: i64) -> Result<TraceValue> {
    let den = raw
        .denominator()
        .to_i64()
        .ok_or_else(|| Error::invalid("coefficient denominators too large"))?;
    let ctx = Ctx::new(192);
    let t = divide_sqrt_delta(&raw.to_ball(&ctx), delta, &ctx);
    let mut v = recognize(&t, den, &ctx)?;
    v.delta = delta;
    Ok(v)
}

fn check_expansions(exps: &[CuspExpansion], n: u64) -> Result<()> {
    let expected = super::cusps::cusps(n);
    if exps.len() != expected.len() || exps.iter().zip(&expected).any(|(e, c)| &e.cusp != c) {
        return Err(Error::invalid(format!(
            "expansions must be given at the {} cusps of level {n}",
            expected.len()
        )));
    }
    Ok(())
}

fn negative_index(data: &TwistData, h: i64, m: &BigRational) -> Result<Option<i64>> {
    if !m.is_negative() {
        return Err(Error::invalid(format!("index {m} is not negative")));
    }
    data.check_support(h, m)?;
    Ok(geodesic_index(data, m))
}

/// `t_{Δ,r}(f; h, m)` for `m < 0`, summing the cusp pairings over geodesic representatives.
pub fn trace_negative(
    exps: &[CuspExpansion],
    data: &TwistData,
    h: i64,
    m: &BigRational,
) -> Result<TraceValue> {
    check_expansions(exps, data.level)?;
    let dv = data.delta.value();
    let Some(j) = negative_index(data, h, m)? else {
        return Ok(TraceValue {
            value: BigRational::zero(),
            error_bound: 0.0,
            delta: dv,
        });
    };
    normalized(&raw_negative(exps, data, h, j)?, dv)
}

/// Parameters of the finite exponential sum `μ_ℓ` at one cusp.
#[derive(Clone, Debug, PartialEq)]
pub struct MuParams {
    pub level: u64,
    pub delta: Discriminant,
    /// `ν_ℓ`, the number of Γ_ℓ-classes attached to the cusp.
    pub nu: i64,
    pub k: BigRational,
    pub beta: BigRational,
    pub eps: BigRational,
    pub r_ell: BigRational,
}

impl MuParams {
    pub fn from_cusp(
        level: u64,
        delta: Discriminant,
        cusp: &Cusp,
        nu: i64,
        k: BigRational,
        r_ell: BigRational,
    ) -> Self {
        MuParams {
            level,
            delta,
            nu,
            k,
            beta: cusp.beta.clone(),
            eps: cusp.eps(),
            r_ell,
        }
    }

    fn abs_delta(&self) -> i64 {
        self.delta.value().abs()
    }

    /// `n' = |Δ|n/(2kε)`; requires `Δ | 2kε` and `2kε/|Δ| | n`.
    pub fn n_prime(&self, n: i64) -> Result<i64> {
        let two_k_eps = int(2) * &self.k * &self.eps;
        if !two_k_eps.is_integer() {
            return Err(Error::invalid(format!(
                "2kε = {two_k_eps} is not an integer"
            )));
        }
        let tke = two_k_eps.to_integer().to_i64().expect("small");
        let d = self.abs_delta();
        if tke % d != 0 || n % (tke / d) != 0 {
            return Err(Error::invalid(format!(
                "Δ = {} and n = {n} do not fit 2kε = {tke}",
                self.delta.value()
            )));
        }
        Ok(n / (tke / d))
    }

    fn n_beta(&self) -> Result<i64> {
        let nb = int(self.level as i64) * &self.beta;
        nb.is_integer()
            .then(|| nb.to_integer().to_i64().expect("small"))
            .ok_or_else(|| Error::invalid(format!("Nβ = {nb} is not an integer")))
    }

    /// `Σ_{j mod |Δ|, Nβj ≡ n'} (Δ/j)·e(2Nk·r_ℓ·j/|Δ|)`.
    pub fn sum(&self, n: i64) -> Result<Cyclo> {
        let np = self.n_prime(n)?;
        let nb = self.n_beta()?;
        let d = self.abs_delta();
        let step = int(2 * self.level as i64) * &self.k * &self.r_ell / int(d);
        let mut acc = Cyclo::zero();
        for jj in 0..d {
            if (nb * jj - np).rem_euclid(d) == 0 {
                let chi = kronecker(self.delta.value(), jj);
                acc = acc.add(&Cyclo::root(int(chi as i64), &step * int(jj)));
            }
        }
        Ok(acc)
    }

    /// The same sum when `gcd(Nβ, Δ) = 1`: `(Δ/(Nβ·n'))·e(2Nk·r_ℓ·n's/|Δ|)` with `s·Nβ ≡ 1`.
    pub fn explicit_sum(&self, n: i64) -> Result<Cyclo> {
        let np = self.n_prime(n)?;
        let nb = self.n_beta()?;
        let d = self.abs_delta();
        let s = inv_mod(nb, d).ok_or_else(|| Error::invalid("Nβ is not invertible modulo Δ"))?;
        let chi = kronecker(self.delta.value(), nb * np);
        let angle =
            int(2 * self.level as i64) * &self.k * &self.r_ell * int((np * s).rem_euclid(d))
                / int(d);
        Ok(Cyclo::root(int(chi as i64), angle))
    }

    /// `μ_ℓ = (ν/√|Δ|)·ε̄·sum`, with `ε = 1` or `i` by the sign of Δ.
    pub fn value(&self, n: i64, ctx: &Ctx) -> Result<CBall> {
        let s = self.sum(n)?.to_ball(ctx);
        let root = RBall::from_i64(self.abs_delta(), ctx).sqrt(ctx);
        let v = s.mul_i64(self.nu, ctx).div_real(&root, ctx);
        Ok(if self.delta.sign() > 0 {
            v
        } else {
            v.mul_i().neg()
        })
    }

    /// `μ_ℓ/√Δ = ν·sgn(Δ)/|Δ|·sum`, exact.
    fn over_sqrt_delta(&self, n: i64) -> Result<Cyclo> {
        Ok(self
            .sum(n)?
            .scale(&(int(self.nu * self.delta.sign()) / int(self.abs_delta()))))
    }
}

/// `μ`-data of the cusp for the class `h`: the count `ν` and `r_ℓ = −Re c(λ)` for one representative.
pub fn mu_params(
    data_level: u64,
    delta: Discriminant,
    cusp: &Cusp,
    h: i64,
    j: i64,
) -> Option<MuParams> {
    let reps = geodesic_reps(data_level, cusp, h, j);
    let first = reps.first()?;
    let k = q(j, 2 * data_level as i64);
    Some(MuParams::from_cusp(
        data_level,
        delta,
        cusp,
        reps.len() as i64,
        k,
        -first.re.clone(),
    ))
}

/// One side `Σ_ℓ Σ_n a_ℓ(n)·μ_ℓ(h, m, nα)·e(−r_ℓ n)` of the closed formula, divided by `√Δ`.
fn mu_side(exps: &[CuspExpansion], data: &TwistData, h: i64, j: i64) -> Result<Cyclo> {
    let n = data.level;
    let d = data.delta.value().abs();
    let mut acc = Cyclo::zero();
    for exp in exps {
        let Some(mu) = mu_params(n, data.delta, &exp.cusp, h, j) else {
            continue;
        };
        // n ∈ (2k/(|Δ|β))·Z_{<0}
        let step = int(2) * &mu.k / (int(d) * &mu.beta);
        for (e, c) in &exp.principal {
            let ratio = e / &step;
            if !ratio.is_integer() || !ratio.is_negative() {
                continue;
            }
            let arg = e * int(exp.cusp.width);
            let arg = arg.to_integer().to_i64().expect("exponent in (1/α)Z");
            let term = mu.over_sqrt_delta(arg)?.mul(c).rotate(&(-(&mu.r_ell * e)));
            acc = acc.add(&term);
        }
    }
    Ok(acc)
}

/// `t_{Δ,r}(f; h, m)` for `m < 0` through the closed formula with the sums `μ_ℓ`
/// (squarefree level prime to Δ; the trace vanishes unless `m = −|Δ|k'²/4N`).
pub fn trace_negative_mu(
    exps: &[CuspExpansion],
    data: &TwistData,
    h: i64,
    m: &BigRational,
) -> Result<TraceValue> {
    check_expansions(exps, data.level)?;
    if !is_squarefree(data.level as i64) {
        return Err(Error::NotComputed(format!(
            "closed formula at non-squarefree level {}",
            data.level
        )));
    }
    let dv = data.delta.value();
    if gcd(data.level as i64, dv) != 1 {
        return Err(Error::NotComputed(format!(
            "closed formula with level {} not prime to Δ = {dv}",
            data.level
        )));
    }
    let zero = TraceValue {
        value: BigRational::zero(),
        error_bound: 0.0,
        delta: dv,
    };
    let Some(j) = negative_index(data, h, m)? else {
        return Ok(zero);
    };
    if j % dv.abs() != 0 {
        return Ok(zero);
    }
    let rh = data.r * h;
    let plus = mu_side(exps, data, rh, j)?;
    let minus = mu_side(exps, data, -rh, j)?;
    let t = plus
        .add(&minus.scale(&int(data.delta.sign())))
        .scale(&int(-1));
    let ctx = Ctx::new(128);
    let den = t
        .denominator()
        .to_i64()
        .ok_or_else(|| Error::invalid("coefficient denominators too large"))?;
    let mut v = recognize(&t.to_ball(&ctx), den, &ctx)?;
    v.delta = dv;
    Ok(v)
}

/// `m·Σ_{n>0} (Δ/n)·a(−mn)` from the principal part `a(n), n < 0`, at `∞`.
pub fn trace_negative_fricke(principal: &[(i64, BigInt)], delta: Discriminant, m: i64) -> BigInt {
    assert!(m >= 1);
    let mut acc = BigInt::zero();
    for (e, a) in principal {
        if *e < 0 && (-e) % m == 0 {
            let n = -e / m;
            acc += a * BigInt::from(kronecker(delta.value(), n));
        }
    }
    acc * BigInt::from(m)
}

/// Integer principal part at `∞` from an expansion with rational exponents.
pub fn integer_principal_part(exp: &CuspExpansion) -> Result<Vec<(i64, BigInt)>> {
    exp.principal
        .iter()
        .map(|(e, c)| {
            let v = super::cusps::cyclo_integer(c);
            match (e.is_integer(), v) {
                (true, Some(v)) => Ok((e.to_integer().to_i64().expect("small"), v)),
                _ => Err(Error::invalid("principal part at infinity is not integral")),
            }
        })
        .collect()
}
