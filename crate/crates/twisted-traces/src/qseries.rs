//! Truncated Laurent series in q, Laurent polynomials in ζ, and the classical
//! level one expansions (η, E4, E6, Δ, j and the Faber polynomials J_m).

use crate::arith::sigma;
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficient ring for [`Series`].
pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
{
    /// Multiplicative inverse when it exists in the ring.
    fn try_inverse(&self) -> Option<Self>;
}

impl Coeff for BigRational {
    fn try_inverse(&self) -> Option<Self> {
        (!self.is_zero()).then(|| self.recip())
    }
}

impl Coeff for BigInt {
    fn try_inverse(&self) -> Option<Self> {
        (self.abs().is_one()).then(|| self.clone())
    }
}

/// Laurent series `Σ_{valuation <= n < order} c_n q^n + O(q^order)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series<C> {
    valuation: i64,
    coeffs: Vec<C>,
    order: i64,
}

pub type FormalSeries = Series<BigRational>;
pub type IntSeries = Series<BigInt>;

impl<C: Coeff> Series<C> {
    /// Builds `Σ coeffs[i] q^(start + i) + O(q^order)`; terms at or beyond `order` are dropped.
    pub fn new(start: i64, mut coeffs: Vec<C>, order: i64) -> Self {
        let keep = (order - start).max(0) as usize;
        coeffs.truncate(keep);
        let mut s = Series {
            valuation: start,
            coeffs,
            order,
        };
        s.normalize();
        s
    }

    pub fn zero(order: i64) -> Self {
        Series {
            valuation: order,
            coeffs: Vec::new(),
            order,
        }
    }

    pub fn one(order: i64) -> Self {
        Self::monomial(C::one(), 0, order)
    }

    pub fn monomial(c: C, exponent: i64, order: i64) -> Self {
        Self::new(exponent, vec![c], order)
    }

    fn normalize(&mut self) {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(k) => {
                self.coeffs.drain(..k);
                self.valuation += k as i64;
            }
            None => {
                self.coeffs.clear();
                self.valuation = self.order;
            }
        }
        while self.coeffs.len() as i64 > self.order - self.valuation {
            self.coeffs.pop();
        }
        let len = (self.order - self.valuation).max(0) as usize;
        self.coeffs.resize(len, C::zero());
    }

    /// Lowest exponent with a nonzero coefficient (equals `order` for the zero series).
    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    /// Exclusive truncation exponent.
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `q^n`. Panics if `n >= order`, which would read unknown data.
    pub fn coeff(&self, n: i64) -> C {
        assert!(
            n < self.order,
            "coefficient q^{n} beyond truncation order {}",
            self.order
        );
        if n < self.valuation {
            C::zero()
        } else {
            self.coeffs[(n - self.valuation) as usize].clone()
        }
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Iterates over `(exponent, coefficient)` for the stored range.
    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        let v = self.valuation;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (v + i as i64, c))
    }

    pub fn truncate(&self, order: i64) -> Self {
        let order = order.min(self.order);
        Self::new(self.valuation, self.coeffs.clone(), order)
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(
            self.valuation,
            self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
            self.order,
        )
    }

    /// Multiplication by `q^k`.
    pub fn shift(&self, k: i64) -> Self {
        Series {
            valuation: self.valuation + k,
            coeffs: self.coeffs.clone(),
            order: self.order + k,
        }
    }

    /// Substitution `q -> q^k` for `k >= 1`.
    pub fn substitute_power(&self, k: i64) -> Self {
        assert!(k >= 1);
        let start = self.valuation * k;
        let order = self.order * k;
        let mut out = vec![C::zero(); (order - start) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * k as usize] = c.clone();
        }
        Self::new(start, out, order)
    }

    fn combine(&self, other: &Self, sign: bool) -> Self {
        let order = self.order.min(other.order);
        let start = self.valuation.min(other.valuation).min(order);
        let mut out = vec![C::zero(); (order - start) as usize];
        for (n, c) in self.terms() {
            if n < order {
                out[(n - start) as usize] = c.clone();
            }
        }
        for (n, c) in other.terms() {
            if n < order {
                let slot = &mut out[(n - start) as usize];
                let cur = std::mem::replace(slot, C::zero());
                *slot = if sign {
                    cur - c.clone()
                } else {
                    cur + c.clone()
                };
            }
        }
        Self::new(start, out, order)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, true)
    }

    pub fn neg(&self) -> Self {
        Self::new(
            self.valuation,
            self.coeffs.iter().map(|c| -c.clone()).collect(),
            self.order,
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            let order = (self.valuation + other.order).min(other.valuation + self.order);
            return Self::zero(order);
        }
        let start = self.valuation + other.valuation;
        let order = (self.valuation + other.order).min(other.valuation + self.order);
        let len = (order - start) as usize;
        let mut out = vec![C::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate().take(len) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(len - i) {
                if b.is_zero() {
                    continue;
                }
                let slot = &mut out[i + j];
                let cur = std::mem::replace(slot, C::zero());
                *slot = cur + a.clone() * b.clone();
            }
        }
        Self::new(start, out, order)
    }

    /// Multiplicative inverse; the leading coefficient must be a unit of the ring.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::invalid("inverse of the zero series"));
        }
        let a0inv = self.coeffs[0]
            .try_inverse()
            .ok_or_else(|| Error::invalid("leading coefficient is not a unit"))?;
        let rel = self.coeffs.len();
        let mut b: Vec<C> = Vec::with_capacity(rel);
        b.push(a0inv.clone());
        for n in 1..rel {
            let mut acc = C::zero();
            for k in 1..=n {
                let a = &self.coeffs[k];
                if !a.is_zero() {
                    acc = acc + a.clone() * b[n - k].clone();
                }
            }
            b.push(-(acc * a0inv.clone()));
        }
        Ok(Self::new(-self.valuation, b, -self.valuation + rel as i64))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Integer power; negative exponents go through [`Series::inverse`].
    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        if e == 0 {
            let rel = if base.is_zero() {
                0
            } else {
                base.order - base.valuation
            };
            return Ok(Self::one(rel));
        }
        let mut result: Option<Self> = None;
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = Some(match result {
                    None => sq.clone(),
                    Some(r) => r.mul(&sq),
                });
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(result.expect("nonzero exponent"))
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Series<D> {
        Series::new(
            self.valuation,
            self.coeffs.iter().map(f).collect(),
            self.order,
        )
    }
}

impl IntSeries {
    pub fn to_rational(&self) -> FormalSeries {
        self.map(|c| BigRational::from_integer(c.clone()))
    }
}

impl FormalSeries {
    /// Converts to an integer series, failing on any non-integral coefficient.
    pub fn to_integral(&self) -> Result<IntSeries> {
        if let Some((n, c)) = self.terms().find(|(_, c)| !c.is_integer()) {
            return Err(Error::Inconsistent(format!(
                "non-integral coefficient {c} at q^{n}"
            )));
        }
        Ok(self.map(|c| c.to_integer()))
    }
}

impl<C: Coeff + fmt::Display> Serialize for Series<C> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Series", 3)?;
        st.serialize_field("valuation", &self.valuation)?;
        st.serialize_field("order", &self.order)?;
        let cs: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        st.serialize_field("coefficients", &cs)?;
        st.end()
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})q^{n}")?;
        }
        if !first {
            write!(f, " + ")?;
        }
        write!(f, "O(q^{})", self.order)
    }
}

/// Laurent polynomial `Σ c_r ζ^r` with finite support.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaPoly<C> {
    lo: i64,
    coeffs: Vec<C>,
}

pub type ZetaPolynomial = ZetaPoly<BigRational>;

impl<C: Coeff> ZetaPoly<C> {
    pub fn new(lo: i64, coeffs: Vec<C>) -> Self {
        let mut p = ZetaPoly { lo, coeffs };
        p.trim();
        p
    }

    pub fn constant(c: C) -> Self {
        Self::new(0, vec![c])
    }

    pub fn monomial(c: C, r: i64) -> Self {
        Self::new(r, vec![c])
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let k = self
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .unwrap_or(self.coeffs.len());
        self.coeffs.drain(..k);
        self.lo = if self.coeffs.is_empty() {
            0
        } else {
            self.lo + k as i64
        };
    }

    pub fn coeff(&self, r: i64) -> C {
        let i = r - self.lo;
        if i < 0 || i >= self.coeffs.len() as i64 {
            C::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Inclusive exponent range of the support, `None` for zero.
    pub fn range(&self) -> Option<(i64, i64)> {
        (!self.coeffs.is_empty()).then(|| (self.lo, self.lo + self.coeffs.len() as i64 - 1))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        let lo = self.lo;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (lo + i as i64, c))
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> ZetaPoly<D> {
        ZetaPoly::new(self.lo, self.coeffs.iter().map(f).collect())
    }

    fn combine(self, other: Self, sign: bool) -> Self {
        let (Some((a0, a1)), Some((b0, b1))) = (self.range(), other.range()) else {
            return if self.coeffs.is_empty() {
                if sign {
                    -other
                } else {
                    other
                }
            } else {
                self
            };
        };
        let lo = a0.min(b0);
        let hi = a1.max(b1);
        let mut out = vec![C::zero(); (hi - lo + 1) as usize];
        for (i, c) in self.coeffs.into_iter().enumerate() {
            out[(a0 - lo) as usize + i] = c;
        }
        for (i, c) in other.coeffs.into_iter().enumerate() {
            let slot = &mut out[(b0 - lo) as usize + i];
            let cur = std::mem::replace(slot, C::zero());
            *slot = if sign { cur - c } else { cur + c };
        }
        Self::new(lo, out)
    }
}

impl<C: Coeff> Zero for ZetaPoly<C> {
    fn zero() -> Self {
        ZetaPoly {
            lo: 0,
            coeffs: Vec::new(),
        }
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<C: Coeff> One for ZetaPoly<C> {
    fn one() -> Self {
        Self::constant(C::one())
    }
}

impl<C: Coeff> Add for ZetaPoly<C> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.combine(o, false)
    }
}

impl<C: Coeff> Sub for ZetaPoly<C> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.combine(o, true)
    }
}

impl<C: Coeff> Neg for ZetaPoly<C> {
    type Output = Self;
    fn neg(self) -> Self {
        ZetaPoly {
            lo: self.lo,
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl<C: Coeff> Mul for ZetaPoly<C> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Self::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let slot = &mut out[i + j];
                let cur = std::mem::replace(slot, C::zero());
                *slot = cur + a.clone() * b.clone();
            }
        }
        Self::new(self.lo + o.lo, out)
    }
}

impl<C: Coeff> Coeff for ZetaPoly<C> {
    fn try_inverse(&self) -> Option<Self> {
        if self.coeffs.len() == 1 {
            let inv = self.coeffs[0].try_inverse()?;
            Some(Self::monomial(inv, -self.lo))
        } else {
            None
        }
    }
}

impl<C: Coeff + fmt::Display> fmt::Display for ZetaPoly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (r, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})z^{r}")?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A q-series whose coefficients are Laurent polynomials in ζ, tagged with weight and index.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiSeries {
    pub series: Series<ZetaPolynomial>,
    pub weight: i64,
    pub index: i64,
}

impl JacobiSeries {
    /// Coefficient of `q^n ζ^r`.
    pub fn coeff(&self, n: i64, r: i64) -> BigRational {
        self.series.coeff(n).coeff(r)
    }

    pub fn order(&self) -> i64 {
        self.series.order()
    }

    /// All nonzero `(n, r, c)` in increasing `(n, r)` order.
    pub fn terms(&self) -> Vec<(i64, i64, BigRational)> {
        let mut out = Vec::new();
        for (n, p) in self.series.terms() {
            for (r, c) in p.terms() {
                out.push((n, r, c.clone()));
            }
        }
        out
    }
}

impl Serialize for JacobiSeries {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct Term {
            n: i64,
            r: i64,
            c: String,
        }
        let terms: Vec<Term> = self
            .terms()
            .into_iter()
            .map(|(n, r, c)| Term {
                n,
                r,
                c: c.to_string(),
            })
            .collect();
        let mut st = s.serialize_struct("JacobiSeries", 3)?;
        st.serialize_field("weight", &self.weight)?;
        st.serialize_field("index", &self.index)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

/// Euler's product `Π_{n>=1} (1 − q^n)` through the pentagonal number theorem.
pub fn euler_product(order: i64) -> IntSeries {
    let mut c = vec![BigInt::zero(); order.max(0) as usize];
    for k in 0i64.. {
        let e1 = k * (3 * k - 1) / 2;
        let e2 = k * (3 * k + 1) / 2;
        if e1 >= order {
            break;
        }
        let s = if k % 2 == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        if k > 0 && e2 < order {
            c[e2 as usize] = s.clone();
        }
        c[e1 as usize] = s;
    }
    Series::new(0, c, order)
}

/// Expansion of η as `q^{q24_exponent/24} · series`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaExpansion {
    pub q24_exponent: i64,
    pub series: FormalSeries,
}

pub fn eta_qexp(order: i64) -> EtaExpansion {
    EtaExpansion {
        q24_exponent: 1,
        series: euler_product(order).to_rational(),
    }
}

/// `Δ = q Π (1 − q^n)^24`, known for exponents below `order`.
pub fn delta_qexp_int(order: i64) -> IntSeries {
    let p = euler_product(order - 1);
    p.pow(24).expect("positive power").shift(1)
}

pub fn delta_qexp(order: i64) -> FormalSeries {
    delta_qexp_int(order).to_rational()
}

fn eisenstein_int(k: u32, order: i64) -> Result<IntSeries> {
    let factor: i64 = match k {
        4 => 240,
        6 => -504,
        _ => {
            return Err(Error::invalid(format!(
                "Eisenstein series of weight {k} not supported"
            )))
        }
    };
    let mut c = Vec::with_capacity(order.max(0) as usize);
    for n in 0..order {
        if n == 0 {
            c.push(BigInt::one());
        } else {
            c.push(BigInt::from(factor) * BigInt::from(sigma(k - 1, n as u64)));
        }
    }
    Ok(Series::new(0, c, order))
}

pub fn eisenstein_qexp_int(k: u32, order: i64) -> Result<IntSeries> {
    eisenstein_int(k, order)
}

/// Normalized Eisenstein series `E_k` for `k` in {4, 6}.
pub fn eisenstein_qexp(k: u32, order: i64) -> Result<FormalSeries> {
    Ok(eisenstein_int(k, order)?.to_rational())
}

/// `j = E4^3 / Δ`, known for exponents below `order`.
pub fn j_qexp_int(order: i64) -> IntSeries {
    let e4 = eisenstein_int(4, order + 1).expect("weight 4");
    let delta = delta_qexp_int(order + 2);
    e4.pow(3)
        .expect("cube")
        .div(&delta)
        .expect("Δ has unit leading coefficient")
        .truncate(order)
}

pub fn j_qexp(order: i64) -> FormalSeries {
    j_qexp_int(order).to_rational()
}

/// `J = j − 744`.
pub fn normalized_j_qexp(order: i64) -> FormalSeries {
    j_qexp(order).sub(&FormalSeries::monomial(
        BigRational::from_integer(744.into()),
        0,
        order,
    ))
}

/// Coefficients `p_0, …, p_m` of the Faber polynomial with `J_m = Σ p_k j^k`.
pub fn faber_polynomial(m: u32) -> Vec<BigInt> {
    assert!(m >= 1);
    let m = m as i64;
    let j = j_qexp_int(m + 1);
    let mut powers = vec![IntSeries::one(m + 1)];
    for k in 1..=m {
        let next = powers[(k - 1) as usize].mul(&j);
        powers.push(next);
    }
    let mut poly = vec![BigInt::zero(); (m + 1) as usize];
    poly[m as usize] = BigInt::one();
    let mut acc = powers[m as usize].clone();
    for e in (0..m).rev() {
        let c = acc.coeff(-e);
        if !c.is_zero() {
            acc = acc.sub(&powers[e as usize].scale(&c));
            poly[e as usize] -= c;
        }
    }
    poly
}

fn faber_int(m: u32, order: i64) -> IntSeries {
    let poly = faber_polynomial(m);
    let deg = poly.len() as i64 - 1;
    let j = j_qexp_int(order + deg);
    let mut acc = IntSeries::zero(order);
    let mut pw = IntSeries::one(order + deg);
    for (e, c) in poly.iter().enumerate() {
        if e > 0 {
            pw = pw.mul(&j);
        }
        if !c.is_zero() {
            acc = acc.add(&pw.scale(c));
        }
    }
    acc.truncate(order)
}

/// The unique weakly holomorphic function `J_m = q^{−m} + O(q)`.
pub fn faber_jm(m: u32, order: i64) -> FormalSeries {
    faber_int(m, order).to_rational()
}

pub fn faber_jm_int(m: u32, order: i64) -> IntSeries {
    faber_int(m, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(int(n), int(d))
    }

    fn direct_product(order: i64) -> IntSeries {
        let mut acc = IntSeries::one(order);
        for n in 1..order {
            let mut f = vec![BigInt::zero(); order as usize];
            f[0] = BigInt::one();
            f[n as usize] = -BigInt::one();
            acc = acc.mul(&Series::new(0, f, order));
        }
        acc
    }

    #[test]
    fn pentagonal_matches_product() {
        assert_eq!(euler_product(60), direct_product(60));
        let nonzero = euler_product(60)
            .terms()
            .filter(|(_, c)| !c.is_zero())
            .count();
        assert_eq!(nonzero, 13);
    }

    #[test]
    fn delta_leading_terms() {
        let d = delta_qexp_int(4);
        assert_eq!(d.valuation(), 1);
        assert_eq!(d.coeff(1), int(1));
        assert_eq!(d.coeff(2), int(-24));
        assert_eq!(d.coeff(3), int(252));
        assert_eq!(delta_qexp_int(2).coeffs(), &[int(1)]);
    }

    #[test]
    fn eisenstein_and_delta_identity() {
        let e4 = eisenstein_qexp(4, 30).unwrap();
        let e6 = eisenstein_qexp(6, 30).unwrap();
        assert_eq!(e4.coeff(1), rat(240, 1));
        assert_eq!(e4.coeff(2), rat(2160, 1));
        assert_eq!(e6.coeff(1), rat(-504, 1));
        assert_eq!(e6.coeff(2), rat(-16632, 1));
        let lhs = e4.pow(3).unwrap().sub(&e6.pow(2).unwrap());
        let rhs = delta_qexp(30).scale(&rat(1728, 1));
        assert_eq!(lhs, rhs);
        assert!(eisenstein_qexp(8, 5).is_err());
    }

    #[test]
    fn j_coefficients() {
        let jj = normalized_j_qexp(4);
        assert_eq!(jj.valuation(), -1);
        assert_eq!(jj.coeff(-1), rat(1, 1));
        assert_eq!(jj.coeff(0), rat(0, 1));
        assert_eq!(jj.coeff(1), rat(196884, 1));
        assert_eq!(jj.coeff(2), rat(21493760, 1));
        assert_eq!(jj.coeff(3), rat(864299970, 1));
    }

    #[test]
    fn faber_principal_parts() {
        assert_eq!(faber_jm(1, 10), normalized_j_qexp(10));
        for m in 1..=5u32 {
            let f = faber_jm(m, 6);
            assert_eq!(f.valuation(), -(m as i64));
            assert_eq!(f.coeff(-(m as i64)), rat(1, 1));
            for n in -(m as i64) + 1..=0 {
                assert_eq!(f.coeff(n), rat(0, 1), "m={m} n={n}");
            }
        }
        // J_2 = J^2 − 2·196884 by uniqueness of the principal part.
        let jj = normalized_j_qexp(8);
        let alt = jj
            .mul(&jj)
            .sub(&FormalSeries::monomial(rat(2 * 196884, 1), 0, 7));
        assert_eq!(faber_jm(2, 7), alt.truncate(7));
        assert_eq!(faber_polynomial(2), vec![int(159768), int(-1488), int(1)]);
    }

    #[test]
    fn division_recovers_dividend() {
        let a = j_qexp(20);
        let b = eisenstein_qexp(6, 20).unwrap();
        let q = a.div(&b).unwrap();
        assert_eq!(q.mul(&b), a.truncate(q.mul(&b).order()));
    }

    #[test]
    fn zeta_polynomials() {
        let z = |lo: i64, cs: &[i64]| ZetaPoly::new(lo, cs.iter().map(|&c| int(c)).collect());
        let p = z(-1, &[1, -2, 1]);
        let sq = p.clone() * p.clone();
        assert_eq!(sq, z(-2, &[1, -4, 6, -4, 1]));
        assert_eq!(sq.range(), Some((-2, 2)));
        assert!((p.clone() - p).is_zero());
    }

    #[test]
    fn serializes_coefficients_as_strings() {
        let s = serde_json::to_string(&delta_qexp(3)).unwrap();
        assert_eq!(s, r#"{"valuation":1,"order":3,"coefficients":["1","-24"]}"#);
    }

    fn arb_series() -> impl Strategy<Value = FormalSeries> {
        (-3i64..3, prop::collection::vec(-20i64..20, 1..8), 1i64..6).prop_map(|(v, cs, extra)| {
            let order = v + cs.len() as i64 + extra;
            Series::new(v, cs.into_iter().map(|c| rat(c, 1)).collect(), order)
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_series(), b in arb_series(), c in arb_series()) {
            let ab_c = a.mul(&b).mul(&c);
            let a_bc = a.mul(&b.mul(&c));
            let o = ab_c.order().min(a_bc.order());
            prop_assert_eq!(ab_c.truncate(o), a_bc.truncate(o));
            let l = a.mul(&b.add(&c));
            let r = a.mul(&b).add(&a.mul(&c));
            let o = l.order().min(r.order());
            prop_assert_eq!(l.truncate(o), r.truncate(o));
            prop_assert_eq!(a.add(&b), b.add(&a));
        }

        #[test]
        fn inverse_roundtrip(a in arb_series()) {
            prop_assume!(!a.is_zero());
            let p = a.mul(&a.inverse().unwrap());
            prop_assert_eq!(p.clone(), FormalSeries::one(p.order()));
        }
    }
}
