//! The genus character χ_Δ on level N forms and lattice vectors.
//!
//! A lattice vector with coordinates `(a, b, c)` is the matrix
//! `[[b/2N, −a/N], [c, −b/2N]]`; it corresponds to the form `[a, b, Nc]`, stored
//! here in the `N | a` convention as `[Nc, b, a]`.

use crate::arith::{
    discriminant_splittings, divisors, gcd, gcd_all, is_square_mod, kronecker, Discriminant,
};
use crate::error::{Error, Result};
use crate::qforms::QuadForm;

/// Lattice coordinates `(a, b, c)` of a form at level `N`, if it is one.
pub fn lattice_coords(n: u64, q: &QuadForm) -> Option<(i64, i64, i64)> {
    let nn = n as i64;
    if q.a % nn == 0 {
        Some((q.c, q.b, q.a / nn))
    } else if q.c % nn == 0 {
        Some((q.a, q.b, q.c / nn))
    } else {
        None
    }
}

pub fn form_of_lattice(n: u64, a: i64, b: i64, c: i64) -> QuadForm {
    QuadForm::new(n as i64 * c, b, a)
}

fn vanishes(delta: i64, n: u64, a: i64, b: i64, c: i64) -> bool {
    let disc = (b as i128).pow(2) - 4 * n as i128 * a as i128 * c as i128;
    let delta = delta as i128;
    disc % delta != 0
        || !is_square_mod((disc / delta).rem_euclid(4 * n as i128) as i64, 4 * n)
        || gcd_all(&[a, b, c, delta as i64]) != 1
}

/// Whether `Δ` is a square modulo `4N`, the setting in which χ_Δ is defined at level `N`.
pub fn is_admissible(delta: Discriminant, n: u64) -> bool {
    is_square_mod(delta.value(), 4 * n)
}

fn check_admissible(delta: Discriminant, n: u64) -> Result<()> {
    if is_admissible(delta, n) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{} is not a square modulo {}",
            delta.value(),
            4 * n
        )))
    }
}

/// All values of the product formula over admissible splittings of `Δ` and `N`.
pub fn chi_delta_splitting_values(delta: Discriminant, n: u64, a: i64, b: i64, c: i64) -> Vec<i32> {
    let d = delta.value();
    let mut out = Vec::new();
    if vanishes(d, n, a, b, c) {
        return out;
    }
    let splits = discriminant_splittings(delta).expect("fundamental discriminant");
    for (d1, d2) in splits {
        for n1 in divisors(n) {
            let n2 = n / n1;
            let x = n1 as i64 * a;
            let y = n2 as i64 * c;
            if gcd(d1, x) == 1 && gcd(d2, y) == 1 {
                out.push(kronecker(d1, x) * kronecker(d2, y));
            }
        }
    }
    out
}

/// χ_Δ on the lattice vector `(a, b, c)` via the product formula.
pub fn chi_delta_lattice(delta: Discriminant, n: u64, a: i64, b: i64, c: i64) -> Result<i32> {
    check_admissible(delta, n)?;
    let values = chi_delta_splitting_values(delta, n, a, b, c);
    debug_assert!(
        values.windows(2).all(|w| w[0] == w[1]),
        "splitting dependence at {:?}",
        (a, b, c)
    );
    Ok(values.first().copied().unwrap_or(0))
}

/// χ_Δ on a form with `N | a` (or `N | c`); forms that are neither are outside the level N lattice and give 0.
pub fn chi_delta(delta: Discriminant, n: u64, q: &QuadForm) -> Result<i32> {
    match lattice_coords(n, q) {
        Some((a, b, c)) => chi_delta_lattice(delta, n, a, b, c),
        None => Ok(0),
    }
}

/// χ_Δ through a represented value coprime to Δ, searched over `|x|, |y| <= bound`.
pub fn chi_delta_oracle(delta: Discriminant, n: u64, q: &QuadForm, bound: i64) -> Result<i32> {
    check_admissible(delta, n)?;
    let Some((a, b, c)) = lattice_coords(n, q) else {
        return Ok(0);
    };
    let d = delta.value();
    if vanishes(d, n, a, b, c) {
        return Ok(0);
    }
    for r in 0..=bound {
        for x in -r..=r {
            for y in -r..=r {
                if x.abs() != r && y.abs() != r {
                    continue;
                }
                let v = q.eval(x, y);
                if (v != 0 || d == 1) && gcd(v, d) == 1 {
                    return Ok(kronecker(d, v));
                }
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no value of {q} coprime to {d} with |x|,|y| <= {bound}"
    )))
}
