//! Midpoint-radius real and complex balls over `astro_float::BigFloat`.
//!
//! A real ball `(mid, rad)` stands for every real `x` with `|x − mid| <= rad`.
//! Midpoints are rounded to nearest at the context precision; every rounding
//! and truncation error is pushed into the `f64` radius, which is itself
//! rounded upwards.

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_rational::BigRational;
use num_traits::Zero;
use std::cell::RefCell;
use std::fmt;

const RM: RoundingMode = RoundingMode::ToEven;
const EPS: f64 = 1.0 / (1u64 << 50) as f64;

fn up(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        (x * (1.0 + EPS)).max(f64::MIN_POSITIVE)
    }
}

fn radd(a: f64, b: f64) -> f64 {
    up(a + b)
}

fn rmul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        up(a * b)
    }
}

fn pow2(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e < -1074 {
        0.0
    } else {
        2f64.powi(e as i32)
    }
}

/// Upper bound for `|x|`.
pub fn mag_upper(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::INFINITY,
        Some((m, _, _, e, _)) => {
            let top = *m.last().unwrap_or(&0);
            if top == 0 {
                return 0.0;
            }
            let v = ((top >> 11) + 1) as f64 * pow2(e as i64 - 53);
            if v == 0.0 {
                f64::MIN_POSITIVE
            } else {
                v
            }
        }
    }
}

/// Lower bound for `|x|`.
pub fn mag_lower(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => 0.0,
        Some((m, _, _, e, _)) => {
            let top = *m.last().unwrap_or(&0);
            (top >> 11) as f64 * pow2(e as i64 - 53)
        }
    }
}

/// Nearest `f64` (for display and heuristics only).
pub fn to_f64(x: &BigFloat) -> f64 {
    match x.as_raw_parts() {
        None => f64::NAN,
        Some((m, _, s, e, _)) => {
            let top = *m.last().unwrap_or(&0);
            let v = top as f64 * pow2(e as i64 - 64);
            if s == Sign::Neg {
                -v
            } else {
                v
            }
        }
    }
}

/// Working precision and cached constants.
pub struct Ctx {
    prec: usize,
    consts: RefCell<Consts>,
}

impl Ctx {
    pub fn new(prec: usize) -> Self {
        let prec = prec.max(64);
        Ctx {
            prec,
            consts: RefCell::new(Consts::new().expect("constant cache")),
        }
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    fn ulp(&self, x: &BigFloat) -> f64 {
        rmul(mag_upper(x), pow2(1 - self.prec as i64))
    }

    pub fn pi(&self) -> RBall {
        let mid = self.consts.borrow_mut().pi(self.prec, RM);
        let rad = self.ulp(&mid);
        RBall { mid, rad }
    }

    pub fn format(&self, x: &BigFloat) -> String {
        x.format(Radix::Dec, RM, &mut self.consts.borrow_mut())
            .unwrap_or_else(|_| "NaN".into())
    }
}

/// A real interval in midpoint-radius form.
#[derive(Clone, Debug)]
pub struct RBall {
    mid: BigFloat,
    rad: f64,
}

fn bigfloat_from_biguint(u: &BigUint, sign: Sign) -> BigFloat {
    if u.is_zero() {
        return BigFloat::from_u64(0, 64);
    }
    let words = u.to_u64_digits();
    BigFloat::from_words(&words, sign, (64 * words.len()) as i32)
}

impl RBall {
    pub fn exact(mid: BigFloat) -> Self {
        RBall { mid, rad: 0.0 }
    }

    pub fn new(mid: BigFloat, rad: f64) -> Self {
        RBall { mid, rad }
    }

    pub fn zero() -> Self {
        RBall {
            mid: BigFloat::from_u64(0, 64),
            rad: 0.0,
        }
    }

    pub fn from_i64(x: i64, ctx: &Ctx) -> Self {
        RBall {
            mid: BigFloat::from_i64(x, ctx.prec.max(64)),
            rad: 0.0,
        }
    }

    pub fn from_bigint(x: &BigInt, ctx: &Ctx) -> Self {
        let sign = if x.sign() == BigSign::Minus {
            Sign::Neg
        } else {
            Sign::Pos
        };
        let mut mid = bigfloat_from_biguint(x.magnitude(), sign);
        let before = mid.clone();
        mid.set_precision(ctx.prec, RM).expect("precision");
        let rad = if mid.inexact() || x.bits() as usize > ctx.prec {
            ctx.ulp(&before)
        } else {
            0.0
        };
        RBall { mid, rad }
    }

    pub fn from_rational(x: &BigRational, ctx: &Ctx) -> Self {
        let n = RBall::from_bigint(x.numer(), ctx);
        if x.denom() == &BigInt::from(1) {
            return n;
        }
        n.div(&RBall::from_bigint(x.denom(), ctx), ctx)
    }

    pub fn mid(&self) -> &BigFloat {
        &self.mid
    }

    pub fn rad(&self) -> f64 {
        self.rad
    }

    pub fn add_error(&self, e: f64) -> Self {
        RBall {
            mid: self.mid.clone(),
            rad: radd(self.rad, e.abs()),
        }
    }

    pub fn mag(&self) -> f64 {
        radd(mag_upper(&self.mid), self.rad)
    }

    pub fn mag_lower(&self) -> f64 {
        (mag_lower(&self.mid) - self.rad).max(0.0)
    }

    pub fn contains_zero(&self) -> bool {
        mag_lower(&self.mid) <= self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.mid.is_positive() && !self.contains_zero()
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.mid)
    }

    pub fn neg(&self) -> Self {
        RBall {
            mid: self.mid.neg(),
            rad: self.rad,
        }
    }

    pub fn add(&self, o: &RBall, ctx: &Ctx) -> Self {
        let mid = self.mid.add(&o.mid, ctx.prec, RM);
        let rad = radd(radd(self.rad, o.rad), ctx.ulp(&mid));
        RBall { mid, rad }
    }

    pub fn sub(&self, o: &RBall, ctx: &Ctx) -> Self {
        let mid = self.mid.sub(&o.mid, ctx.prec, RM);
        let rad = radd(radd(self.rad, o.rad), ctx.ulp(&mid));
        RBall { mid, rad }
    }

    pub fn mul(&self, o: &RBall, ctx: &Ctx) -> Self {
        let mid = self.mid.mul(&o.mid, ctx.prec, RM);
        let a = mag_upper(&self.mid);
        let b = mag_upper(&o.mid);
        let rad = radd(
            radd(rmul(a, o.rad), rmul(b, self.rad)),
            radd(rmul(self.rad, o.rad), ctx.ulp(&mid)),
        );
        RBall { mid, rad }
    }

    pub fn mul_i64(&self, k: i64, ctx: &Ctx) -> Self {
        self.mul(&RBall::from_i64(k, ctx), ctx)
    }

    /// Division; the divisor must exclude zero (otherwise the radius is infinite).
    pub fn div(&self, o: &RBall, ctx: &Ctx) -> Self {
        let mid = self.mid.div(&o.mid, ctx.prec, RM);
        let bl = mag_lower(&o.mid) * (1.0 - EPS) - o.rad;
        if bl <= 0.0 {
            return RBall {
                mid,
                rad: f64::INFINITY,
            };
        }
        let a = mag_upper(&self.mid);
        let bu = mag_upper(&o.mid);
        let num = radd(rmul(self.rad, bu), rmul(a, o.rad));
        let den = bl * mag_lower(&o.mid) * (1.0 - EPS);
        let rad = radd(up(num / den), ctx.ulp(&mid));
        RBall { mid, rad }
    }

    pub fn sqrt(&self, ctx: &Ctx) -> Self {
        let mid = self.mid.sqrt(ctx.prec, RM);
        let lower = mag_lower(&self.mid) * (1.0 - EPS) - self.rad;
        let rad = if self.rad == 0.0 {
            0.0
        } else if lower <= 0.0 || self.mid.is_negative() {
            f64::INFINITY
        } else {
            up(self.rad / (lower.sqrt() * (1.0 - EPS)))
        };
        RBall {
            mid: mid.clone(),
            rad: radd(rad, ctx.ulp(&mid)),
        }
    }

    pub fn exp(&self, ctx: &Ctx) -> Self {
        let mid = self.mid.exp(ctx.prec, RM, &mut ctx.consts.borrow_mut());
        let growth = if self.rad == 0.0 {
            0.0
        } else {
            up(self.rad * self.rad.exp())
        };
        let rad = radd(rmul(mag_upper(&mid), growth), rmul(4.0, ctx.ulp(&mid)));
        RBall { mid, rad }
    }

    pub fn cos(&self, ctx: &Ctx) -> Self {
        let mid = self.mid.cos(ctx.prec, RM, &mut ctx.consts.borrow_mut());
        let rad = radd(
            radd(self.rad, rmul(4.0, ctx.ulp(&mid))),
            pow2(2 - ctx.prec as i64),
        );
        RBall { mid, rad }
    }

    pub fn sin(&self, ctx: &Ctx) -> Self {
        let mid = self.mid.sin(ctx.prec, RM, &mut ctx.consts.borrow_mut());
        let rad = radd(
            radd(self.rad, rmul(4.0, ctx.ulp(&mid))),
            pow2(2 - ctx.prec as i64),
        );
        RBall { mid, rad }
    }

    /// Unique integer in the ball, if the ball has radius below one half and contains one.
    pub fn to_integer(&self) -> Option<BigInt> {
        if !(self.rad < 0.5) {
            return None;
        }
        let n = round_to_bigint(&self.mid);
        let diff = self.mid.sub(
            &bigint_to_bigfloat_exact(&n),
            self.mid.precision().unwrap_or(64) + 64,
            RM,
        );
        (mag_upper(&diff) <= self.rad || diff.is_zero()).then_some(n)
    }
}

fn bigint_to_bigfloat_exact(x: &BigInt) -> BigFloat {
    let sign = if x.sign() == BigSign::Minus {
        Sign::Neg
    } else {
        Sign::Pos
    };
    bigfloat_from_biguint(x.magnitude(), sign)
}

/// Nearest integer to `x` (ties away from zero).
pub fn round_to_bigint(x: &BigFloat) -> BigInt {
    let Some((m, _, s, e, _)) = x.as_raw_parts() else {
        return BigInt::zero();
    };
    if m.iter().all(|&w| w == 0) {
        return BigInt::zero();
    }
    let bytes: Vec<u8> = m.iter().flat_map(|w| w.to_le_bytes()).collect();
    let mant = BigUint::from_bytes_le(&bytes);
    let shift = e as i64 - 64 * m.len() as i64;
    let mag = if shift >= 0 {
        mant << shift as usize
    } else {
        let sh = (-shift) as usize;
        if sh > mant.bits() as usize + 1 {
            BigUint::zero()
        } else {
            (mant + (BigUint::from(1u8) << (sh - 1))) >> sh
        }
    };
    let v = BigInt::from(mag);
    if s == Sign::Neg {
        -v
    } else {
        v
    }
}

impl fmt::Display for RBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ± {:e}", self.mid, self.rad)
    }
}

/// A complex ball as a rectangle of real balls. Also the certified value type of CM evaluations.
#[derive(Clone, Debug)]
pub struct CBall {
    pub re: RBall,
    pub im: RBall,
}

pub type CertifiedComplex = CBall;

impl CBall {
    pub fn new(re: RBall, im: RBall) -> Self {
        CBall { re, im }
    }

    pub fn zero() -> Self {
        CBall {
            re: RBall::zero(),
            im: RBall::zero(),
        }
    }

    pub fn real(re: RBall) -> Self {
        CBall {
            re,
            im: RBall::zero(),
        }
    }

    pub fn from_i64(x: i64, ctx: &Ctx) -> Self {
        CBall::real(RBall::from_i64(x, ctx))
    }

    /// Upper bound on the distance from the midpoint to any point of the ball.
    pub fn error_bound(&self) -> f64 {
        radd(self.re.rad, self.im.rad)
    }

    pub fn mag(&self) -> f64 {
        let a = self.re.mag();
        let b = self.im.mag();
        up((a * a + b * b).sqrt())
    }

    pub fn add_error(&self, e: f64) -> Self {
        CBall {
            re: self.re.add_error(e),
            im: self.im.add_error(e),
        }
    }

    pub fn neg(&self) -> Self {
        CBall {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    pub fn conj(&self) -> Self {
        CBall {
            re: self.re.clone(),
            im: self.im.neg(),
        }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> Self {
        CBall {
            re: self.im.neg(),
            im: self.re.clone(),
        }
    }

    pub fn add(&self, o: &CBall, ctx: &Ctx) -> Self {
        CBall {
            re: self.re.add(&o.re, ctx),
            im: self.im.add(&o.im, ctx),
        }
    }

    pub fn sub(&self, o: &CBall, ctx: &Ctx) -> Self {
        CBall {
            re: self.re.sub(&o.re, ctx),
            im: self.im.sub(&o.im, ctx),
        }
    }

    pub fn mul(&self, o: &CBall, ctx: &Ctx) -> Self {
        let re = self.re.mul(&o.re, ctx).sub(&self.im.mul(&o.im, ctx), ctx);
        let im = self.re.mul(&o.im, ctx).add(&self.im.mul(&o.re, ctx), ctx);
        CBall { re, im }
    }

    pub fn scale(&self, x: &RBall, ctx: &Ctx) -> Self {
        CBall {
            re: self.re.mul(x, ctx),
            im: self.im.mul(x, ctx),
        }
    }

    pub fn mul_i64(&self, k: i64, ctx: &Ctx) -> Self {
        self.scale(&RBall::from_i64(k, ctx), ctx)
    }

    pub fn div(&self, o: &CBall, ctx: &Ctx) -> Self {
        let n = o.re.mul(&o.re, ctx).add(&o.im.mul(&o.im, ctx), ctx);
        let t = self.mul(&o.conj(), ctx);
        CBall {
            re: t.re.div(&n, ctx),
            im: t.im.div(&n, ctx),
        }
    }

    pub fn div_real(&self, x: &RBall, ctx: &Ctx) -> Self {
        CBall {
            re: self.re.div(x, ctx),
            im: self.im.div(x, ctx),
        }
    }

    pub fn powi(&self, e: u32, ctx: &Ctx) -> Self {
        let mut result = CBall::from_i64(1, ctx);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, ctx);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, ctx);
            }
        }
        result
    }

    /// `e^{iθ}` for a real ball `θ`.
    pub fn expi(theta: &RBall, ctx: &Ctx) -> Self {
        CBall {
            re: theta.cos(ctx),
            im: theta.sin(ctx),
        }
    }

    /// `e(x) = e^{2πix}` for rational `x`.
    pub fn e_rational(num: i64, den: i64, ctx: &Ctx) -> Self {
        let r = num.rem_euclid(den);
        if r == 0 {
            return CBall::from_i64(1, ctx);
        }
        if 2 * r == den {
            return CBall::from_i64(-1, ctx);
        }
        if 4 * r == den {
            return CBall::new(RBall::zero(), RBall::from_i64(1, ctx));
        }
        if 4 * r == 3 * den {
            return CBall::new(RBall::zero(), RBall::from_i64(-1, ctx));
        }
        let theta = ctx
            .pi()
            .mul_i64(2 * r, ctx)
            .div(&RBall::from_i64(den, ctx), ctx);
        CBall::expi(&theta, ctx)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for CBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + ({})i", self.re, self.im)
    }
}

/// Table of `e(k/m)` for `k = 0, …, m − 1`.
pub struct RootTable {
    order: i64,
    roots: Vec<CBall>,
}

impl RootTable {
    pub fn new(order: i64, ctx: &Ctx) -> Self {
        let roots = (0..order)
            .map(|k| CBall::e_rational(k, order, ctx))
            .collect();
        RootTable { order, roots }
    }

    pub fn order(&self) -> i64 {
        self.order
    }

    /// `e(k/m)`.
    pub fn get(&self, k: i64) -> &CBall {
        &self.roots[k.rem_euclid(self.order) as usize]
    }
}

/// Whether `|x| <= bound` for certain, i.e. the ball lies in the disc of radius `bound`.
pub fn certainly_below(x: &CBall, bound: f64) -> bool {
    x.mag() <= bound
}
