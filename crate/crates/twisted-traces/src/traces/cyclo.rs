//! Exact elements of cyclotomic fields as rational combinations of roots of unity.

use crate::ball::{CBall, Ctx};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

static CYCLOTOMIC: Mutex<Option<HashMap<i64, Vec<i64>>>> = Mutex::new(None);

/// Coefficients of the cyclotomic polynomial `Φ_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: i64) -> Vec<i64> {
    assert!(n >= 1);
    if let Some(p) = CYCLOTOMIC
        .lock()
        .unwrap()
        .get_or_insert_with(HashMap::new)
        .get(&n)
    {
        return p.clone();
    }
    // Φ_n = (xⁿ − 1) / Π_{d | n, d < n} Φ_d
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            num = divide_exact(&num, &cyclotomic_polynomial(d));
        }
    }
    CYCLOTOMIC
        .lock()
        .unwrap()
        .get_or_insert_with(HashMap::new)
        .insert(n, num.clone());
    num
}

fn divide_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![0i64; rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        for (k, &b) in den.iter().enumerate() {
            rem[i + k] -= c * b;
        }
    }
    debug_assert!(rem.iter().all(|&x| x == 0));
    quot
}

/// `Σ c·e(θ)` with `θ ∈ [0, 1)` rational. Equality is equality of the complex values.
#[derive(Clone, Debug, Default)]
pub struct Cyclo {
    terms: BTreeMap<BigRational, BigRational>,
}

fn frac(x: &BigRational) -> BigRational {
    x - x.floor()
}

impl Cyclo {
    pub fn zero() -> Self {
        Cyclo::default()
    }

    pub fn rational(c: BigRational) -> Self {
        Cyclo::root(c, BigRational::zero())
    }

    /// `c·e(θ)`.
    pub fn root(c: BigRational, theta: BigRational) -> Self {
        let mut out = Cyclo::zero();
        out.push(c, theta);
        out
    }

    fn push(&mut self, c: BigRational, theta: BigRational) {
        if c.is_zero() {
            return;
        }
        let key = frac(&theta);
        let entry = self
            .terms
            .entry(key.clone())
            .or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() || self.reduced(self.order()).iter().all(|c| c.is_zero())
    }

    /// Least common multiple of the angle denominators.
    pub fn order(&self) -> i64 {
        self.terms.keys().fold(1i64, |acc, t| {
            acc.lcm(&t.denom().to_i64().expect("angle denominator"))
        })
    }

    /// Coordinates in the power basis of `Q(e(1/m))`; `m` must be a multiple of the order.
    fn reduced(&self, m: i64) -> Vec<BigRational> {
        let mut poly = vec![BigRational::zero(); m as usize];
        for (t, c) in &self.terms {
            let k = (t * BigRational::from_integer(m.into()))
                .to_integer()
                .to_usize()
                .expect("multiple of the order");
            poly[k] += c;
        }
        let phi = cyclotomic_polynomial(m);
        let deg = phi.len() - 1;
        for i in (deg..poly.len()).rev() {
            let c = std::mem::take(&mut poly[i]);
            if c.is_zero() {
                continue;
            }
            for (k, &b) in phi.iter().enumerate().take(deg) {
                poly[i - deg + k] -= &c * BigRational::from_integer(b.into());
            }
        }
        poly.truncate(deg);
        poly
    }

    /// The value as a rational number, if it is one.
    pub fn to_rational(&self) -> Option<BigRational> {
        let red = self.reduced(self.order());
        red.iter()
            .skip(1)
            .all(|c| c.is_zero())
            .then(|| red.first().cloned().unwrap_or_else(BigRational::zero))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BigRational, &BigRational)> {
        self.terms.iter()
    }

    pub fn add(&self, o: &Cyclo) -> Cyclo {
        let mut out = self.clone();
        for (t, c) in &o.terms {
            out.push(c.clone(), t.clone());
        }
        out
    }

    pub fn scale(&self, k: &BigRational) -> Cyclo {
        let mut out = Cyclo::zero();
        for (t, c) in &self.terms {
            out.push(c * k, t.clone());
        }
        out
    }

    /// Multiplication by `e(θ)`.
    pub fn rotate(&self, theta: &BigRational) -> Cyclo {
        let mut out = Cyclo::zero();
        for (t, c) in &self.terms {
            out.push(c.clone(), t + theta);
        }
        out
    }

    pub fn mul(&self, o: &Cyclo) -> Cyclo {
        let mut out = Cyclo::zero();
        for (t1, c1) in &self.terms {
            for (t2, c2) in &o.terms {
                out.push(c1 * c2, t1 + t2);
            }
        }
        out
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }

    /// The value as a ball; angle denominators must fit in `i64`.
    pub fn to_ball(&self, ctx: &Ctx) -> CBall {
        let mut acc = CBall::zero();
        for (t, c) in &self.terms {
            let num = t.numer().to_i64().expect("angle numerator");
            let den = t.denom().to_i64().expect("angle denominator");
            let root = CBall::e_rational(num, den, ctx);
            let num_c = crate::ball::RBall::from_rational(c, ctx);
            acc = acc.add(&root.scale(&num_c, ctx), ctx);
        }
        acc
    }
}

impl PartialEq for Cyclo {
    fn eq(&self, o: &Cyclo) -> bool {
        self.add(&o.scale(&-BigRational::one())).is_zero()
    }
}

impl Eq for Cyclo {}
