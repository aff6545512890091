//! Kronecker symbols, fundamental discriminants and square roots modulo 4N.

use crate::error::{Error, Result};
use num_integer::Integer;

/// Kronecker symbol `(d/n)` with the full extension to `n <= 0` and `n` even.
pub fn kronecker(d: i64, n: i64) -> i32 {
    if n == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1;
    let mut n = n;
    if n < 0 {
        n = -n;
        if d < 0 {
            result = -result;
        }
    }
    let twos = n.trailing_zeros();
    n >>= twos;
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if twos % 2 == 1 {
            let r = d.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    result * jacobi(d.rem_euclid(n), n)
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
fn jacobi(a: i64, n: i64) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

pub fn is_squarefree(n: i64) -> bool {
    if n == 0 {
        return false;
    }
    factorize(n.unsigned_abs()).iter().all(|&(_, e)| e == 1)
}

/// Trial-division factorization, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

pub fn sigma(k: u32, n: u64) -> u128 {
    divisors(n).iter().map(|&d| (d as u128).pow(k)).sum()
}

pub fn is_fundamental(d: i64) -> bool {
    if d == 1 {
        return true;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m)
        }
        _ => false,
    }
}

/// A nonzero integer congruent to 0 or 1 modulo 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Discriminant(i64);

impl Discriminant {
    pub fn new(value: i64) -> Result<Self> {
        if value == 0 || !matches!(value.rem_euclid(4), 0 | 1) {
            return Err(Error::invalid(format!("{value} is not a discriminant")));
        }
        Ok(Discriminant(value))
    }

    pub fn fundamental(value: i64) -> Result<Self> {
        if !is_fundamental(value) {
            return Err(Error::invalid(format!(
                "{value} is not a fundamental discriminant"
            )));
        }
        Ok(Discriminant(value))
    }

    pub fn value(self) -> i64 {
        self.0
    }

    pub fn is_fundamental(self) -> bool {
        is_fundamental(self.0)
    }

    pub fn sign(self) -> i64 {
        self.0.signum()
    }
}

/// Prime discriminants whose product is the fundamental discriminant `d`.
pub fn prime_discriminants(d: i64) -> Result<Vec<i64>> {
    if !is_fundamental(d) {
        return Err(Error::invalid(format!(
            "{d} is not a fundamental discriminant"
        )));
    }
    let mut out = Vec::new();
    let mut rest = d;
    for (p, _) in factorize(d.unsigned_abs()) {
        if p == 2 {
            continue;
        }
        let p = p as i64;
        let pstar = if p % 4 == 1 { p } else { -p };
        out.push(pstar);
        rest /= pstar;
    }
    if rest != 1 {
        out.push(rest);
    }
    Ok(out)
}

/// All ordered pairs `(d1, d2)` of discriminants with `d1 * d2 = d`.
pub fn discriminant_splittings(d: Discriminant) -> Result<Vec<(i64, i64)>> {
    let primes = prime_discriminants(d.value())?;
    let mut out = Vec::with_capacity(1 << primes.len());
    for mask in 0u32..(1 << primes.len()) {
        let d1: i64 = primes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, p)| *p)
            .product();
        out.push((d1, d.value() / d1));
    }
    out.sort_by_key(|&(d1, _)| (d1.abs(), d1));
    Ok(out)
}

/// Residues `r` in `[0, 2N)` with `r^2 = d (mod 4N)`.
pub fn sqrts_mod_4n(d: i64, n: u64) -> Vec<u64> {
    let m = 4 * n as i64;
    (0..2 * n)
        .filter(|&r| ((r * r) as i64 - d).rem_euclid(m) == 0)
        .collect()
}

pub fn gcd(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn gcd_all(xs: &[i64]) -> i64 {
    xs.iter().fold(0, |g, &x| g.gcd(&x))
}

/// Extended Euclid: returns `(g, x, y)` with `a x + b y = g >= 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let e = a.extended_gcd(&b);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

/// Whether `x` is a square modulo `m`.
pub fn is_square_mod(x: i64, m: u64) -> bool {
    let m = m as i64;
    (0..m).any(|y| (y * y - x).rem_euclid(m) == 0)
}

pub fn lcm(a: i64, b: i64) -> i64 {
    a.lcm(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn legendre_by_squares(d: i64, p: i64) -> i32 {
        let r = d.rem_euclid(p);
        if r == 0 {
            0
        } else if (1..p).any(|x| (x * x) % p == r) {
            1
        } else {
            -1
        }
    }

    #[test]
    fn kronecker_small_values() {
        assert_eq!(kronecker(5, 1), 1);
        assert_eq!(kronecker(5, 5), 0);
        assert_eq!(kronecker(5, 7), -1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-4, -1), -1);
        assert_eq!(kronecker(8, 0), 0);
        assert_eq!(kronecker(1, 0), 1);
        assert_eq!(kronecker(-3, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn legendre_agrees_with_square_counting() {
        let primes = [3i64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
        for d in [-20i64, -8, -7, -4, -3, 1, 5, 8, 12, 13, 21, 24, 28, 40] {
            for &p in &primes {
                assert_eq!(kronecker(d, p), legendre_by_squares(d, p), "d={d} p={p}");
            }
        }
    }

    #[test]
    fn fundamental_examples() {
        assert!(is_fundamental(1));
        assert!(is_fundamental(5));
        assert!(is_fundamental(-4));
        assert!(is_fundamental(12));
        assert!(is_fundamental(-3));
        assert!(is_fundamental(8));
        assert!(!is_fundamental(45));
        assert!(!is_fundamental(-16));
        assert!(!is_fundamental(4));
        assert!(!is_fundamental(2));
    }

    #[test]
    fn splittings_examples() {
        let s = |d| discriminant_splittings(Discriminant::new(d).unwrap()).unwrap();
        assert_eq!(s(5), vec![(1, 5), (5, 1)]);
        assert_eq!(s(1), vec![(1, 1)]);
        assert_eq!(s(-20), vec![(1, -20), (-4, 5), (5, -4), (-20, 1)]);
        assert!(discriminant_splittings(Discriminant::new(-16).unwrap()).is_err());
    }

    #[test]
    fn sqrt_examples() {
        assert!(sqrts_mod_4n(5, 11).contains(&7));
        assert_eq!(sqrts_mod_4n(1, 1), vec![1]);
        assert!(sqrts_mod_4n(2, 1).is_empty());
    }

    #[test]
    fn divisor_helpers() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(sigma(3, 2), 9);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
    }

    proptest! {
        #[test]
        fn kronecker_multiplicative(d in -200i64..200, n in -300i64..300, m in -300i64..300) {
            prop_assert_eq!(kronecker(d, n * m), kronecker(d, n) * kronecker(d, m));
        }

        #[test]
        fn kronecker_zero_iff_common_factor(d in -200i64..200, n in 1i64..500) {
            prop_assert_eq!(kronecker(d, n) == 0, gcd(d, n) > 1 || (d == 0 && n != 1));
        }

        #[test]
        fn splittings_multiply_back(d in -300i64..300) {
            prop_assume!(is_fundamental(d));
            for (d1, d2) in discriminant_splittings(Discriminant::new(d).unwrap()).unwrap() {
                prop_assert_eq!(d1 * d2, d);
                prop_assert!(matches!(d1.rem_euclid(4), 0 | 1));
                prop_assert!(matches!(d2.rem_euclid(4), 0 | 1));
            }
        }

        #[test]
        fn sqrt_residues_canonical(d in -500i64..500, n in 1u64..40) {
            let rs = sqrts_mod_4n(d, n);
            for &r in &rs {
                prop_assert!(r < 2 * n);
                prop_assert_eq!(((r * r) as i64 - d).rem_euclid(4 * n as i64), 0);
            }
        }
    }
}
