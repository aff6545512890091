//! Cusps of Γ₀(N), principal parts there, and lattice vectors attached to cusps.

use super::cyclo::Cyclo;
use crate::arith::{divisors, ext_gcd, gcd, gcd_all, Discriminant};
use crate::cmeval::{AtomKind, ModFuncExpr};
use crate::error::{Error, Result};
use crate::genus::chi_delta_lattice;
use crate::qforms::Mat2;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// A cusp `σ∞` of Γ₀(N) with width `α` and `β`, where `[[0, β], [0, 0]]`
/// generates the isotropic line at `∞` intersected with `σ⁻¹Lσ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cusp {
    pub label: String,
    pub sigma: Mat2,
    pub width: i64,
    pub beta: BigRational,
}

impl Cusp {
    /// `ε = α/β`.
    pub fn eps(&self) -> BigRational {
        BigRational::from_integer(self.width.into()) / &self.beta
    }
}

/// Γ₀(N)-inequivalent cusps `a/c` with `c | N`; `∞` comes first with `σ = 1`.
pub fn cusps(n: u64) -> Vec<Cusp> {
    let nn = n as i64;
    let mut out = Vec::new();
    let mut ds: Vec<i64> = divisors(n).into_iter().map(|d| d as i64).collect();
    ds.reverse();
    for c in ds {
        let g = gcd(c, nn / c);
        for a0 in 0..g {
            if gcd(a0, g) != 1 {
                continue;
            }
            let sigma = if c == nn {
                Mat2::IDENTITY
            } else {
                let a = (0..)
                    .map(|t| a0 + g * t)
                    .find(|&a| gcd(a, c) == 1)
                    .expect("coprime lift");
                let (_, x, y) = ext_gcd(a, c);
                Mat2::new(a, -y, c, x)
            };
            let label = if c == nn {
                "inf".to_string()
            } else if sigma.a == 0 {
                "0".to_string()
            } else {
                format!("{}/{}", sigma.a, c)
            };
            let (a, cc) = (sigma.a, sigma.c);
            let width = nn / gcd(cc * cc, nn);
            let g_line = gcd_all(&[a * cc, nn * a * a, cc * cc]);
            out.push(Cusp {
                label,
                sigma,
                width,
                beta: q(1, g_line),
            });
        }
    }
    out
}

/// Principal part and constant term of a level N function at a cusp, in powers of
/// `q = e(τ)` with exponents in `(1/α)Z`.
#[derive(Clone, Debug, PartialEq)]
pub struct CuspExpansion {
    pub cusp: Cusp,
    pub principal: Vec<(BigRational, Cyclo)>,
    pub constant: Cyclo,
}

impl CuspExpansion {
    pub fn coeff(&self, n: &BigRational) -> Cyclo {
        self.principal
            .iter()
            .find(|(e, _)| e == n)
            .map(|(_, c)| c.clone())
            .unwrap_or_default()
    }
}

impl Serialize for CuspExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let fmt = |c: &Cyclo| -> Vec<[String; 2]> {
            c.terms()
                .map(|(t, v)| [v.to_string(), t.to_string()])
                .collect()
        };
        let principal: Vec<(String, Vec<[String; 2]>)> = self
            .principal
            .iter()
            .map(|(e, c)| (e.to_string(), fmt(c)))
            .collect();
        let mut st = s.serialize_struct("CuspExpansion", 4)?;
        st.serialize_field("cusp", &self.cusp.label)?;
        st.serialize_field("width", &self.cusp.width)?;
        st.serialize_field("principal", &principal)?;
        st.serialize_field("constant", &fmt(&self.constant))?;
        st.end()
    }
}

/// `f` as `Σ c_i·atom_i + c_0`; only such linear combinations have principal parts derived here.
fn linear_terms(f: &ModFuncExpr) -> Result<Vec<(BigRational, Option<(AtomKind, u64)>)>> {
    let unsupported = || {
        Error::NotComputed(format!(
            "cusp expansion of {f}; supply the expansions explicitly"
        ))
    };
    Ok(match f {
        ModFuncExpr::Const(c) => vec![(c.clone(), None)],
        ModFuncExpr::Atom(a) => match a.kind {
            AtomKind::J | AtomKind::SmallJ | AtomKind::Jm(_) => {
                vec![(BigRational::one(), Some((a.kind, a.scale)))]
            }
            _ => return Err(unsupported()),
        },
        ModFuncExpr::Neg(x) => linear_terms(x)?.into_iter().map(|(c, a)| (-c, a)).collect(),
        ModFuncExpr::Add(x, y) => [linear_terms(x)?, linear_terms(y)?].concat(),
        ModFuncExpr::Sub(x, y) => {
            let mut out = linear_terms(x)?;
            out.extend(linear_terms(y)?.into_iter().map(|(c, a)| (-c, a)));
            out
        }
        ModFuncExpr::Mul(x, y) => match (x.as_ref(), y.as_ref()) {
            (ModFuncExpr::Const(c), e) | (e, ModFuncExpr::Const(c)) => linear_terms(e)?
                .into_iter()
                .map(|(d, a)| (c * d, a))
                .collect(),
            _ => return Err(unsupported()),
        },
        ModFuncExpr::Div(x, y) => match y.as_ref() {
            ModFuncExpr::Const(c) if !c.is_zero() => linear_terms(x)?
                .into_iter()
                .map(|(d, a)| (d / c, a))
                .collect(),
            _ => return Err(unsupported()),
        },
        ModFuncExpr::Pow(x, 1) => linear_terms(x)?,
        ModFuncExpr::Pow(_, 0) => vec![(BigRational::one(), None)],
        ModFuncExpr::Pow(..) => return Err(unsupported()),
    })
}

/// Write `diag(k, 1)·σ = σ'·[[g, b'], [0, k/g]]` with `σ' ∈ SL₂(Z)`; returns `(g, b')`.
fn hermite(k: i64, sigma: &Mat2) -> (i64, i64) {
    let (ka, kb) = (k * sigma.a, k * sigma.b);
    let (c, d) = (sigma.c, sigma.d);
    let g = gcd(ka, c);
    let (_, y, xneg) = ext_gcd(ka / g, c / g);
    // (ka/g)·y − x·(c/g) = 1 with x = −xneg
    let x = -xneg;
    (g, y * kb - x * d)
}

/// Principal parts of `f` at every cusp of Γ₀(N).
pub fn cusp_expansions(f: &ModFuncExpr, n: u64) -> Result<Vec<CuspExpansion>> {
    if !f.has_level(n) {
        return Err(Error::invalid(format!("{f} is not of level {n}")));
    }
    let terms = linear_terms(f)?;
    let mut out = Vec::new();
    for cusp in cusps(n) {
        let mut principal: Vec<(BigRational, Cyclo)> = Vec::new();
        let mut constant = Cyclo::zero();
        for (c, atom) in &terms {
            let Some((kind, scale)) = atom else {
                constant = constant.add(&Cyclo::rational(c.clone()));
                continue;
            };
            let k = *scale as i64;
            let (g, bp) = hermite(k, &cusp.sigma);
            let dp = k / g;
            let m = match kind {
                AtomKind::Jm(m) => *m as i64,
                _ => 1,
            };
            if *kind == AtomKind::SmallJ {
                constant =
                    constant.add(&Cyclo::rational(c * BigRational::from_integer(744.into())));
            }
            // J_m((gτ + b')/d') = e(−m b'/d')·q^{−m g/d'} + O(q^{>0})
            let exponent = q(-m * g, dp);
            let value = Cyclo::root(c.clone(), q(-m * bp, dp));
            match principal.iter_mut().find(|(e, _)| *e == exponent) {
                Some((_, v)) => *v = v.add(&value),
                None => principal.push((exponent, value)),
            }
        }
        principal.retain(|(_, v)| !v.is_zero());
        principal.sort_by(|a, b| a.0.cmp(&b.0));
        out.push(CuspExpansion {
            cusp,
            principal,
            constant,
        });
    }
    Ok(out)
}

/// A Γ_ℓ-representative `λ` attached to the cusp `ℓ`, with `σ⁻¹λσ = [[−k, s], [0, k]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeodesicRep {
    /// Lattice coordinates `(a, b, c)` of `λ = [[b/2N, −a/N], [c, −b/2N]]`.
    pub coords: (i64, i64, i64),
    /// `Re c(λ) = s/2k`.
    pub re: BigRational,
}

/// Representatives of `Γ_ℓ \ L_{h, −Nk², ℓ}` for `k = j/2N`.
///
/// The entry `s` lies in `(1/2N)Z` and is determined modulo `2kα`, so `s = t/2N` with
/// `0 <= t < 2jα`.
pub fn geodesic_reps(n: u64, cusp: &Cusp, h: i64, j: i64) -> Vec<GeodesicRep> {
    assert!(j >= 1);
    let nn = n as i64;
    let Mat2 { a, b, c, d } = cusp.sigma;
    let mut out = Vec::new();
    for t in 0..2 * j * cusp.width {
        // m = −j/2N, s = t/2N
        if (a * a * t) % 2 != 0 {
            continue;
        }
        let cn = -2 * c * d * j - c * c * t;
        if cn % (2 * nn) != 0 {
            continue;
        }
        let la = -(a * a * t) / 2 - a * b * j;
        let lb = -j * (a * d + b * c) - a * c * t;
        let lc = cn / (2 * nn);
        if (lb - h).rem_euclid(2 * nn) != 0 {
            continue;
        }
        debug_assert_eq!(4 * nn * la * lc - lb * lb, -j * j);
        out.push(GeodesicRep {
            coords: (la, lb, lc),
            re: q(t, 2 * j),
        });
    }
    out
}

/// `(g', h ↦ i)`: the line through `σ∞` meets `L'` in `(1/g')·[[−ac, a²], [−c², ac]]·Z`;
/// returns `g'`, `g` (for `L`) and the class `h_i` of `i/g'` times that vector.
fn line_data(n: u64, cusp: &Cusp) -> (i64, i64, impl Fn(i64) -> i64) {
    let nn = n as i64;
    let (a, c) = (cusp.sigma.a, cusp.sigma.c);
    let g_dual = gcd_all(&[2 * nn * a * c, nn * a * a, c * c]);
    let g = gcd_all(&[a * c, nn * a * a, c * c]);
    (g_dual, g, move |i: i64| {
        (-2 * nn * a * c * i / g_dual).rem_euclid(2 * nn)
    })
}

/// Whether the isotropic line of the cusp meets `L + h`.
pub fn line_meets(n: u64, cusp: &Cusp, h: i64) -> bool {
    let (g_dual, _, class) = line_data(n, cusp);
    (0..g_dual).any(|i| class(i) == h.rem_euclid(2 * n as i64))
}

/// The denominator `d(ℓ, h)` of `h_ℓ = s·λ_ℓ`, where `ℓ ∩ (L + h) = Zλ_ℓ + h_ℓ`.
pub fn line_denominator(n: u64, cusp: &Cusp, h: i64) -> Option<i64> {
    let (g_dual, g, class) = line_data(n, cusp);
    let i = (0..g_dual).find(|&i| class(i) == h.rem_euclid(2 * n as i64))?;
    let s = q(i * g, g_dual);
    Some(i64::try_from(s.denom()).expect("small"))
}

/// The constant `dconst_{ℓ,Δ}(h)`: `δ_ℓ(h)` for `Δ = 1`, otherwise χ_Δ of `λ_ℓ/d(ℓ,h)`
/// when `Δ | d(ℓ,h)`, and 0 if not.
pub fn dconst(n: u64, delta: Discriminant, cusp: &Cusp, h: i64) -> Result<i32> {
    let Some(d) = line_denominator(n, cusp, h) else {
        return Ok(0);
    };
    let dv = delta.value();
    if dv == 1 {
        return Ok(1);
    }
    if d % dv != 0 {
        return Ok(0);
    }
    let nn = n as i64;
    let (a, c) = (cusp.sigma.a, cusp.sigma.c);
    let (_, g, _) = line_data(n, cusp);
    let den = g * d;
    let coords = [-nn * a * a, -2 * nn * a * c, -c * c];
    if coords.iter().any(|x| x % den != 0) {
        return Err(Error::Inconsistent(format!(
            "λ_ℓ/{d} is not in the dual lattice at cusp {}",
            cusp.label
        )));
    }
    chi_delta_lattice(delta, n, coords[0] / den, coords[1] / den, coords[2] / den)
}

/// Exact value of a cyclotomic number when it is an integer.
pub(crate) fn cyclo_integer(c: &Cyclo) -> Option<BigInt> {
    c.to_rational()
        .filter(|v| v.is_integer())
        .map(|v| v.to_integer())
}
