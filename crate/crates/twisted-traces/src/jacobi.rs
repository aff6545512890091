//! Weak Jacobi forms of even weight as polynomials in the generators `a ∈ J̃_{−2,1}`
//! and `b ∈ J̃_{0,1}` over E4, E6 and 1/Δ, with a solver for forms with prescribed
//! singular coefficients and plus-space coefficient extraction.

use crate::arith::{divisors, kronecker, Discriminant};
use crate::cmeval::parse_modfunc;
use crate::error::{Error, Result};
use crate::qseries::{
    delta_qexp_int, eisenstein_qexp_int, euler_product, j_qexp_int, FormalSeries, IntSeries,
    JacobiSeries, Series, ZetaPoly, ZetaPolynomial,
};
use crate::traces::{trace_negative_fricke, trace_scalar, LiftExpansion};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

type IntZeta = ZetaPoly<BigInt>;
type IntJacobi = Series<IntZeta>;

fn zeta(lo: i64, cs: &[i64]) -> IntZeta {
    IntZeta::new(lo, cs.iter().map(|&c| BigInt::from(c)).collect())
}

fn constants(s: &IntSeries) -> IntJacobi {
    s.map(|c| IntZeta::constant(c.clone()))
}

fn to_rational(s: &IntJacobi) -> Series<ZetaPolynomial> {
    s.map(|p| p.map(|c| BigRational::from_integer(c.clone())))
}

/// `s · Σ c_e q^e` for a sparse factor with `e >= 0`.
fn sparse_mul(s: &IntJacobi, factor: &[(i64, IntZeta)]) -> IntJacobi {
    let mut acc = IntJacobi::zero(s.order());
    for (e, c) in factor {
        acc = acc.add(&s.shift(*e).scale(c));
    }
    acc
}

fn generators(order: i64) -> (IntJacobi, IntJacobi) {
    let m = order.max(1);
    // P = Π (1 − q^n ζ)²(1 − q^n ζ⁻¹)² / (1 − q^n)⁴
    let mut p = IntJacobi::one(m);
    for n in 1..m {
        let f = [
            (0, zeta(0, &[1])),
            (n, zeta(-1, &[-1, 0, -1])),
            (2 * n, zeta(0, &[1])),
        ];
        p = sparse_mul(&sparse_mul(&p, &f), &f);
    }
    let inv4 = euler_product(m).pow(-4).expect("unit leading coefficient");
    p = p.mul(&constants(&inv4));
    let a = p.scale(&zeta(-1, &[1, -2, 1]));
    // S = Σ_n Σ_{d|n} d(ζ^d − 2 + ζ^{−d}) q^n
    let mut s = vec![IntZeta::zero(); m as usize];
    for n in 1..m {
        for d in divisors(n as u64) {
            let d = d as i64;
            let mut cs = vec![0i64; (2 * d + 1) as usize];
            cs[0] = d;
            cs[d as usize] = -2 * d;
            cs[2 * d as usize] = d;
            s[n as usize] = s[n as usize].clone() + zeta(-d, &cs);
        }
    }
    let s = IntJacobi::new(0, s, m);
    let b = a.add(
        &a.mul(&s)
            .add(&p)
            .scale(&IntZeta::constant(BigInt::from(12))),
    );
    (a, b)
}

/// The weak Jacobi form `a = φ_{−2,1}` through `q^{order−1}`.
pub fn gen_a(order: i64) -> JacobiSeries {
    let (a, _) = generators(order);
    JacobiSeries {
        series: to_rational(&a),
        weight: -2,
        index: 1,
    }
}

/// The weak Jacobi form `b = φ_{0,1}` through `q^{order−1}`.
pub fn gen_b(order: i64) -> JacobiSeries {
    let (_, b) = generators(order);
    JacobiSeries {
        series: to_rational(&b),
        weight: 0,
        index: 1,
    }
}

pub fn jacobi_mul(x: &JacobiSeries, y: &JacobiSeries) -> JacobiSeries {
    JacobiSeries {
        series: x.series.mul(&y.series),
        weight: x.weight + y.weight,
        index: x.index + y.index,
    }
}

pub fn jacobi_scale(x: &JacobiSeries, c: &BigRational) -> JacobiSeries {
    JacobiSeries {
        series: x.series.scale(&ZetaPolynomial::constant(c.clone())),
        weight: x.weight,
        index: x.index,
    }
}

pub fn jacobi_coeff(phi: &JacobiSeries, n: i64, r: i64) -> BigRational {
    phi.coeff(n, r)
}

/// Every `(n, r)` slot worth inspecting: the stored ζ-support plus `|r| <= N`.
fn slots(phi: &JacobiSeries) -> Vec<(i64, i64)> {
    let big_n = phi.index;
    let mut out = Vec::new();
    for n in phi.series.valuation()..phi.order() {
        let (lo, hi) = phi.series.coeff(n).range().unwrap_or((0, 0));
        for r in lo.min(-big_n)..=hi.max(big_n) {
            out.push((n, r));
        }
    }
    out
}

/// `D -> c(D)` for `D = 4Nn − r² <= d_max`, asserting that `c` depends on `D` alone.
pub fn plus_space_series(phi: &JacobiSeries, d_max: i64) -> Result<BTreeMap<i64, BigRational>> {
    let four_n = 4 * phi.index;
    let mut out: BTreeMap<i64, BigRational> = BTreeMap::new();
    for (n, r) in slots(phi) {
        let d = four_n * n - r * r;
        if d > d_max {
            continue;
        }
        let c = phi.coeff(n, r);
        match out.get(&d) {
            Some(prev) if *prev != c => {
                return Err(Error::Inconsistent(format!(
                    "c({d}) takes values {prev} and {c} (at n={n}, r={r})"
                )));
            }
            Some(_) => {}
            None => {
                out.insert(d, c);
            }
        }
    }
    Ok(out)
}

/// Checks `c(n, r) = c(n, −r)` and `c(n, r) = c(n', r')` for `r' ≡ r mod 2N` with equal discriminant.
pub fn check_jacobi_symmetries(phi: &JacobiSeries) -> Result<()> {
    let big_n = phi.index;
    if big_n < 1 {
        return Err(Error::invalid("index must be positive"));
    }
    let (lo, hi) = (phi.series.valuation(), phi.order());
    for (n, r) in slots(phi) {
        let c = phi.coeff(n, r);
        if phi.coeff(n, -r) != c {
            return Err(Error::Inconsistent(format!("c({n},{r}) != c({n},{})", -r)));
        }
        let r0 = (r + big_n - 1).rem_euclid(2 * big_n) - big_n + 1;
        let n0 = n + (r0 * r0 - r * r) / (4 * big_n);
        if (lo..hi).contains(&n0) && phi.coeff(n0, r0) != c {
            return Err(Error::Inconsistent(format!("c({n},{r}) != c({n0},{r0})")));
        }
    }
    Ok(())
}

/// Basis `E4^α E6^β Δ^{−γ} j^i` of weakly holomorphic forms of the given weight with pole order at most `pole`.
fn weight_basis(weight: i64, pole: i64, order: i64) -> Result<Vec<IntSeries>> {
    let (alpha, beta) = match weight.rem_euclid(12) {
        0 => (0, 0),
        2 => (2, 1),
        4 => (1, 0),
        6 => (0, 1),
        8 => (2, 0),
        10 => (1, 1),
        _ => return Err(Error::invalid(format!("odd weight {weight}"))),
    };
    let gamma = (4 * alpha + 6 * beta - weight) / 12;
    if gamma > pole {
        return Ok(Vec::new());
    }
    let work = order + 3 * (pole + gamma.abs() + 4) + 8;
    let mut base = eisenstein_qexp_int(4, work)?
        .pow(alpha)?
        .mul(&eisenstein_qexp_int(6, work)?.pow(beta)?);
    base = base.mul(&delta_qexp_int(work).pow(-gamma)?);
    let j = j_qexp_int(work);
    let mut out = Vec::new();
    let mut cur = base;
    for _ in 0..=(pole - gamma) {
        if cur.order() < order {
            return Err(Error::NotComputed(
                "working precision of the modular form basis".into(),
            ));
        }
        out.push(cur.truncate(order));
        cur = cur.mul(&j);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Constraint {
    pub disc: i64,
    pub n: i64,
    pub r: i64,
}

/// Output of [`solve_principal_part`].
#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub form: JacobiSeries,
    pub pole_order: i64,
    pub unknowns: usize,
    pub constraints: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub primes: usize,
}

mod modp {
    pub fn mul(a: u64, b: u64, p: u64) -> u64 {
        ((a as u128 * b as u128) % p as u128) as u64
    }

    pub fn pow(mut a: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1 % p;
        a %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a, p);
            }
            a = mul(a, a, p);
            e >>= 1;
        }
        r
    }

    pub fn inv(a: u64, p: u64) -> u64 {
        pow(a, p - 2, p)
    }

    pub fn is_prime(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
        for b in BASES {
            if n % b == 0 {
                return n == b;
            }
        }
        let s = (n - 1).trailing_zeros();
        let d = (n - 1) >> s;
        'outer: for b in BASES {
            let mut x = pow(b, d, n);
            if x == 1 || x == n - 1 {
                continue;
            }
            for _ in 1..s {
                x = mul(x, x, n);
                if x == n - 1 {
                    continue 'outer;
                }
            }
            return false;
        }
        true
    }

    /// Primes below 2^62 in decreasing order.
    pub fn primes() -> impl Iterator<Item = u64> {
        ((1u64 << 61)..(1u64 << 62))
            .rev()
            .filter(|&n| n % 2 == 1 && is_prime(n))
    }
}

struct ModSolve {
    pivots: Vec<usize>,
    bad_rows: Vec<usize>,
    solution: Vec<u64>,
}

/// Gauss–Jordan elimination of `[rows | rhs]` over `F_p`, pivoting on the earliest columns.
fn solve_mod(rows: &[Vec<BigInt>], rhs: &[BigInt], p: u64) -> ModSolve {
    let pb = BigInt::from(p);
    let red = |x: &BigInt| x.mod_floor(&pb).to_u64().expect("reduced");
    let cols = rows.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| row.iter().map(red).chain(std::iter::once(red(b))).collect())
        .collect();
    let mut ids: Vec<usize> = (0..a.len()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(i) = (r..a.len()).find(|&i| a[i][c] != 0) else {
            continue;
        };
        a.swap(r, i);
        ids.swap(r, i);
        let inv = modp::inv(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = modp::mul(*x, inv, p);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = (*x + p - modp::mul(f, *y, p)) % p;
            }
        }
        pivots.push(c);
        r += 1;
    }
    let bad_rows = (r..a.len())
        .filter(|&i| a[i][cols] != 0)
        .map(|i| ids[i])
        .collect();
    let mut solution = vec![0; cols];
    for (k, &c) in pivots.iter().enumerate() {
        solution[c] = a[k][cols];
    }
    ModSolve {
        pivots,
        bad_rows,
        solution,
    }
}

/// `n/d ≡ a mod m` with `|n|, d <= sqrt(m/2)`, if it exists.
fn rational_reconstruct(a: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

const MAX_PRIMES: usize = 400;

/// Finds `Σ_j f_j a^j b^{N−j}` of the given weight and index `N` whose coefficients of negative
/// discriminant are exactly `targets` (keyed by `D = 4Nn − r²`, applied to every class `r` with
/// that discriminant) and zero elsewhere. The result is returned through `q^{order−1}`.
pub fn solve_principal_part(
    weight: i64,
    index: i64,
    targets: &BTreeMap<i64, BigRational>,
    order: i64,
) -> Result<Solution> {
    if index < 1 {
        return Err(Error::invalid("index must be positive"));
    }
    if weight % 2 != 0 {
        return Err(Error::invalid(format!("odd weight {weight}")));
    }
    let four_n = 4 * index;
    for &d in targets.keys() {
        if d >= 0 {
            return Err(Error::invalid(format!(
                "target discriminant {d} is not negative"
            )));
        }
        if !(0..=index).any(|r| (d + r * r).rem_euclid(four_n) == 0) {
            return Err(Error::invalid(format!(
                "{d} is not a discriminant of index {index}"
            )));
        }
    }
    let d_min = targets.keys().next().copied().unwrap_or(0);
    let pole = (-d_min) / four_n;
    // constrained coefficients sit at n < N/4; keep them inside the working range
    let work = order.max((index * index - 1) / four_n + 1).max(1);

    let mut cons = Vec::new();
    for d in (-four_n * pole - index * index)..0 {
        for r in 0..=index {
            if (d + r * r).rem_euclid(four_n) == 0 {
                cons.push(Constraint {
                    disc: d,
                    n: (d + r * r) / four_n,
                    r,
                });
            }
        }
    }
    let rhs: Vec<BigInt> = Vec::new();
    let target_of = |d: i64| targets.get(&d).cloned().unwrap_or_else(BigRational::zero);

    let (a, b) = generators(work + pole);
    let mut a_pows = vec![IntJacobi::one(work + pole)];
    let mut b_pows = vec![IntJacobi::one(work + pole)];
    for k in 1..=index as usize {
        a_pows.push(a_pows[k - 1].mul(&a));
        b_pows.push(b_pows[k - 1].mul(&b));
    }
    let mut blocks: Vec<(IntJacobi, Vec<IntSeries>)> = Vec::new();
    for j in 0..=index as usize {
        let w = a_pows[j].mul(&b_pows[index as usize - j]);
        let basis = weight_basis(weight + 2 * j as i64, pole, work)?;
        blocks.push((w, basis));
    }
    let unknowns: usize = blocks.iter().map(|(_, bs)| bs.len()).sum();

    // integer constraint matrix, cleared of target denominators
    let den = targets
        .values()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut rows = Vec::with_capacity(cons.len());
    let mut rhs = rhs;
    for c in &cons {
        let mut row = Vec::with_capacity(unknowns);
        for (w, basis) in &blocks {
            for s in basis {
                let mut acc = BigInt::zero();
                for (m, sm) in s.terms() {
                    if !sm.is_zero() {
                        acc += sm * w.coeff(c.n - m).coeff(c.r);
                    }
                }
                row.push(acc * &den);
            }
        }
        rows.push(row);
        rhs.push((target_of(c.disc) * BigRational::from_integer(den.clone())).to_integer());
    }

    let mut best: Option<Vec<usize>> = None;
    let mut residues: Vec<BigInt> = Vec::new();
    let mut modulus = BigInt::one();
    let mut used = 0usize;
    let mut infeasible = 0;
    let mut last: Option<Vec<BigRational>> = None;
    for p in modp::primes().take(MAX_PRIMES) {
        let s = solve_mod(&rows, &rhs, p);
        let better = match &best {
            None => true,
            Some(bp) => s.pivots.len() > bp.len() || (s.pivots.len() == bp.len() && s.pivots < *bp),
        };
        if better {
            best = Some(s.pivots.clone());
            residues = vec![BigInt::zero(); unknowns];
            modulus = BigInt::one();
            used = 0;
            infeasible = 0;
            last = None;
        } else if best.as_ref() != Some(&s.pivots) {
            continue;
        }
        if !s.bad_rows.is_empty() {
            infeasible += 1;
            if infeasible >= 2 {
                let listed: Vec<String> = s
                    .bad_rows
                    .iter()
                    .take(8)
                    .map(|&i| format!("c({})@(n={},r={})", cons[i].disc, cons[i].n, cons[i].r))
                    .collect();
                return Err(Error::Infeasible(format!(
                    "pole order {pole}: {} inconsistent constraints, e.g. {}",
                    s.bad_rows.len(),
                    listed.join(", ")
                )));
            }
            continue;
        }
        let pb = BigInt::from(p);
        let minv = BigInt::from(modp::inv((&modulus % &pb).to_u64().expect("reduced"), p));
        for (x, &v) in residues.iter_mut().zip(&s.solution) {
            let t = ((BigInt::from(v) - &*x) * &minv).mod_floor(&pb);
            *x += &modulus * t;
        }
        modulus *= &pb;
        used += 1;
        if used < 2 {
            continue;
        }
        let recon: Option<Vec<BigRational>> = residues
            .iter()
            .map(|x| rational_reconstruct(x, &modulus))
            .collect();
        let Some(x) = recon else { continue };
        if last.as_ref() == Some(&x) {
            if let Some(form) = assemble(&blocks, &x, &cons, &target_of, weight, index, work) {
                let rank = best.as_ref().map_or(0, |b| b.len());
                return Ok(Solution {
                    form: JacobiSeries {
                        series: form.series.truncate(order),
                        ..form
                    },
                    pole_order: pole,
                    unknowns,
                    constraints: cons.len(),
                    rank,
                    kernel_dim: unknowns - rank,
                    primes: used,
                });
            }
        }
        last = Some(x);
    }
    Err(Error::NotComputed(format!(
        "no stable rational solution after {MAX_PRIMES} primes"
    )))
}

/// Exact combination of the basis with coefficients `x`; `None` if a constraint fails.
fn assemble(
    blocks: &[(IntJacobi, Vec<IntSeries>)],
    x: &[BigRational],
    cons: &[Constraint],
    target_of: &dyn Fn(i64) -> BigRational,
    weight: i64,
    index: i64,
    work: i64,
) -> Option<JacobiSeries> {
    let mut phi: Option<Series<ZetaPolynomial>> = None;
    let mut k = 0;
    for (w, basis) in blocks {
        let mut f = FormalSeries::zero(work);
        for s in basis {
            if !x[k].is_zero() {
                f = f.add(&s.to_rational().scale(&x[k]));
            }
            k += 1;
        }
        let term = f
            .map(|c| ZetaPolynomial::constant(c.clone()))
            .mul(&to_rational(w));
        phi = Some(match phi {
            None => term,
            Some(acc) => acc.add(&term),
        });
    }
    let series = phi?.truncate(work);
    let form = JacobiSeries {
        series,
        weight,
        index,
    };
    cons.iter()
        .all(|c| form.coeff(c.n, c.r) == target_of(c.disc))
        .then_some(form)
}

/// Singular coefficients `D = −|Δ|k'² -> m·Σ(Δ/n)a(−k'n)` of `−½φ` for a function
/// with principal part `principal` at `∞`.
pub fn fricke_targets(
    principal: &[(i64, BigInt)],
    delta: Discriminant,
) -> BTreeMap<i64, BigRational> {
    let mut out = BTreeMap::new();
    let mut ks: Vec<i64> = Vec::new();
    for (e, _) in principal {
        if *e < 0 {
            ks.extend(divisors(e.unsigned_abs()).into_iter().map(|k| k as i64));
        }
    }
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let v = trace_negative_fricke(principal, delta, k);
        if !v.is_zero() {
            out.insert(-delta.value().abs() * k * k, BigRational::from_integer(v));
        }
    }
    out
}

/// `−½φ_Δ^{(N)}`: the weight 2 index `N` form whose coefficients are `−½` times the
/// twisted traces of the function with the given principal part at `∞`.
pub fn generating_form(
    principal: &[(i64, BigInt)],
    level: u64,
    delta: Discriminant,
    order: i64,
) -> Result<Solution> {
    if delta.value() <= 0 {
        return Err(Error::invalid(
            "generating Jacobi forms need a positive discriminant",
        ));
    }
    solve_principal_part(2, level as i64, &fricke_targets(principal, delta), order)
}

/// Coefficients `d -> c(d)` for `d <= d_max` of Zagier's plus-space form
/// `g_D = q^{−D} + Σ_{d>=0} c(d) q^d` of weight 3/2.
pub fn zagier_g(disc: i64, d_max: i64) -> Result<BTreeMap<i64, BigRational>> {
    if disc <= 0 || !matches!(disc.rem_euclid(4), 0 | 1) {
        return Err(Error::invalid(format!(
            "−{disc} is not a negative discriminant"
        )));
    }
    let targets = BTreeMap::from([(-disc, BigRational::one())]);
    let order = (d_max.max(0) + 1) / 4 + 1;
    let sol = solve_principal_part(2, 1, &targets, order)?;
    plus_space_series(&sol.form, d_max)
}

/// One compared index of [`cross_check`].
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub h: i64,
    pub m: String,
    pub n: i64,
    pub r: i64,
    pub jacobi: String,
    pub trace: String,
    pub agree: bool,
}

/// Compares every computed lift coefficient `t(h, m)` with `c_φ(n, r)`, where `r ≡ h mod 2N`
/// and `4Nn − r² = 4Nm`; indices beyond the truncation of `φ` are skipped.
pub fn cross_check(phi: &JacobiSeries, lift: &LiftExpansion) -> Result<Vec<CrossCheck>> {
    let big_n = lift.data.level as i64;
    if phi.index != big_n {
        return Err(Error::invalid(format!(
            "index {} does not match level {big_n}",
            phi.index
        )));
    }
    if lift.data.delta.value() <= 0 {
        return Err(Error::invalid("cross-check needs a positive discriminant"));
    }
    let mut out = Vec::new();
    for c in &lift.coefficients {
        let Some(v) = &c.value else { continue };
        let d = &c.m * BigRational::from_integer(BigInt::from(4 * big_n));
        if !d.is_integer() {
            return Err(Error::Inconsistent(format!(
                "index {} has no integral discriminant",
                c.m
            )));
        }
        let d = d
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::invalid("discriminant out of range"))?;
        let r = (c.h + big_n - 1).rem_euclid(2 * big_n) - big_n + 1;
        if (d + r * r) % (4 * big_n) != 0 {
            return Err(Error::Inconsistent(format!(
                "class {} does not carry discriminant {d}",
                c.h
            )));
        }
        let n = (d + r * r) / (4 * big_n);
        if n >= phi.order() {
            continue;
        }
        let j = phi.coeff(n, r);
        out.push(CrossCheck {
            h: c.h,
            m: c.m.to_string(),
            n,
            r,
            jacobi: j.to_string(),
            trace: v.value.to_string(),
            agree: j == v.value,
        });
    }
    Ok(out)
}

/// `Σ_{n | m} (Δ/(m/n))·n·x_n`, the twisted Hecke combination.
pub fn hecke_combination(
    delta: i64,
    m: i64,
    value: impl Fn(i64) -> Result<BigRational>,
) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for n in divisors(m as u64) {
        let n = n as i64;
        let k = kronecker(delta, m / n) as i64 * n;
        if k != 0 {
            acc += value(n)? * BigInt::from(k);
        }
    }
    Ok(acc)
}

/// One `d` of [`hecke_rows`].
#[derive(Clone, Debug, Serialize)]
pub struct HeckeRow {
    pub d: i64,
    pub lhs: String,
    pub plus_space: String,
    pub traces: String,
    pub plus_space_holds: bool,
    pub traces_hold: bool,
}

/// For `d <= d_max`, compares `t_Δ(J_m; d)` from CM sums at level one with
/// `Σ_{n|m} (Δ/(m/n))·n·x_n`, where `x_n` is either minus the `q^d` coefficient of
/// `g_{Δn²}` (`plus_space`) or the trace `t_Δ(J; dn²)` (`traces`).
pub fn hecke_rows(delta: Discriminant, m: i64, d_max: i64, bits: u32) -> Result<Vec<HeckeRow>> {
    let dv = delta.value();
    if dv <= 0 {
        return Err(Error::invalid(
            "the Hecke check needs a positive discriminant",
        ));
    }
    if m < 1 {
        return Err(Error::invalid("m must be positive"));
    }
    let j = parse_modfunc("J(z)")?;
    let jm = parse_modfunc(&format!("J{m}(z)"))?;
    let mut gs = BTreeMap::new();
    for n in divisors(m as u64) {
        let n = n as i64;
        gs.insert(n, zagier_g(dv * n * n, d_max)?);
    }
    let mut out = Vec::new();
    for d in (1..=d_max).filter(|d| matches!(d % 4, 0 | 3)) {
        let lhs = trace_scalar(&jm, 1, delta, d, bits)?.value;
        let plus = hecke_combination(dv, m, |n| {
            Ok(-gs[&n].get(&d).cloned().unwrap_or_else(BigRational::zero))
        })?;
        let traces = hecke_combination(dv, m, |n| {
            Ok(trace_scalar(&j, 1, delta, d * n * n, bits)?.value)
        })?;
        out.push(HeckeRow {
            d,
            plus_space_holds: plus == lhs,
            traces_hold: traces == lhs,
            lhs: lhs.to_string(),
            plus_space: plus.to_string(),
            traces: traces.to_string(),
        });
    }
    Ok(out)
}
