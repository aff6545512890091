//! The finite quadratic modules `D(Δ) = L′/ΔL`, Weil representation matrices for
//! `S` and `T`, the intertwiner ψ_{Δ,r}, and Gauss type sums.

use crate::arith::{gcd, kronecker, lcm, Discriminant};
use crate::ball::{CBall, Ctx, RBall, RootTable};
use crate::error::{Error, Result};
use crate::genus::chi_delta_lattice;
use serde_json::{json, Value};

/// `L′/ΔL` at level `N`, elements `(a mod |Δ|, b mod 2N|Δ|, c mod |Δ|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscModule {
    pub level: u64,
    pub delta: Discriminant,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModElement {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl DiscModule {
    pub fn new(level: u64, delta: Discriminant) -> Result<Self> {
        if level == 0 {
            return Err(Error::invalid("level must be positive"));
        }
        if !delta.is_fundamental() {
            return Err(Error::invalid(format!(
                "{} is not a fundamental discriminant",
                delta.value()
            )));
        }
        Ok(DiscModule { level, delta })
    }

    fn abs_delta(&self) -> i64 {
        self.delta.value().abs()
    }

    fn b_mod(&self) -> i64 {
        2 * self.level as i64 * self.abs_delta()
    }

    /// Common denominator `4N|Δ|` of all values of `Q_Δ` and `(·,·)_Δ`.
    pub fn denominator(&self) -> i64 {
        4 * self.level as i64 * self.abs_delta()
    }

    pub fn len(&self) -> usize {
        let d = self.abs_delta() as usize;
        2 * self.level as usize * d * d * d
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn element(&self, a: i64, b: i64, c: i64) -> ModElement {
        let d = self.abs_delta();
        ModElement {
            a: a.rem_euclid(d),
            b: b.rem_euclid(self.b_mod()),
            c: c.rem_euclid(d),
        }
    }

    pub fn index(&self, x: &ModElement) -> usize {
        let d = self.abs_delta();
        ((x.a * self.b_mod() + x.b) * d + x.c) as usize
    }

    pub fn get(&self, i: usize) -> ModElement {
        let d = self.abs_delta() as usize;
        let bm = self.b_mod() as usize;
        ModElement {
            a: (i / (bm * d)) as i64,
            b: ((i / d) % bm) as i64,
            c: (i % d) as i64,
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = ModElement> + '_ {
        (0..self.len()).map(move |i| self.get(i))
    }

    /// Numerator of `Q_Δ(x)` over [`denominator`](Self::denominator), reduced mod the denominator.
    pub fn norm_num(&self, x: &ModElement) -> i64 {
        let n = self.level as i64;
        (4 * n * x.a * x.c - x.b * x.b).rem_euclid(self.denominator())
    }

    /// Numerator of `(x, y)_Δ` over [`denominator`](Self::denominator).
    pub fn bilinear_num(&self, x: &ModElement, y: &ModElement) -> i64 {
        let n = self.level as i64;
        (2 * (2 * n * (x.a * y.c + y.a * x.c) - x.b * y.b)).rem_euclid(self.denominator())
    }

    /// The projection to `L′/L = Z/2N`.
    pub fn project(&self, x: &ModElement) -> i64 {
        x.b.rem_euclid(2 * self.level as i64)
    }

    pub fn chi(&self, x: &ModElement) -> i32 {
        chi_delta_lattice(self.delta, self.level, x.a, x.b, x.c).unwrap_or(0)
    }
}

/// A dense complex matrix of balls.
#[derive(Clone, Debug)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<CBall>,
}

pub type UnitaryMatrix = CMatrix;

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![CBall::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize, ctx: &Ctx) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, CBall::from_i64(1, ctx));
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &CBall {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: CBall) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, o: &CMatrix, ctx: &Ctx) -> CMatrix {
        assert_eq!(self.cols, o.rows);
        let mut out = CMatrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let x = self.get(i, k);
                if x.mag() == 0.0 {
                    continue;
                }
                for j in 0..o.cols {
                    let y = o.get(k, j);
                    if y.mag() == 0.0 {
                        continue;
                    }
                    let v = out.get(i, j).add(&x.mul(y, ctx), ctx);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(CBall::conj).collect(),
        }
    }

    /// Upper bound for `max |self − o|` entrywise.
    pub fn distance(&self, o: &CMatrix, ctx: &Ctx) -> f64 {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        self.data
            .iter()
            .zip(&o.data)
            .map(|(x, y)| x.sub(y, ctx).mag())
            .fold(0.0, f64::max)
    }

    /// Entries as `[re, im]` decimal strings.
    pub fn to_json(&self, ctx: &Ctx) -> Value {
        let rows: Vec<Value> = (0..self.rows)
            .map(|i| {
                Value::Array(
                    (0..self.cols)
                        .map(|j| {
                            let z = self.get(i, j);
                            json!([ctx.format(z.re.mid()), ctx.format(z.im.mid())])
                        })
                        .collect(),
                )
            })
            .collect();
        Value::Array(rows)
    }
}

/// `ρ_Δ(T)` as exact exponents: entry `i` is `e(num_i / denominator)`.
pub fn rho_t_exponents(m: &DiscModule) -> Vec<i64> {
    m.elements().map(|x| m.norm_num(&x)).collect()
}

/// The order of `ρ_Δ(T)`.
pub fn rho_t_order(m: &DiscModule) -> i64 {
    let den = m.denominator();
    rho_t_exponents(m)
        .into_iter()
        .fold(1, |acc, k| lcm(acc, den / gcd(k, den)))
}

pub fn rho_t(m: &DiscModule, ctx: &Ctx) -> CMatrix {
    let roots = RootTable::new(m.denominator(), ctx);
    let mut out = CMatrix::zeros(m.len(), m.len());
    for (i, k) in rho_t_exponents(m).into_iter().enumerate() {
        out.set(i, i, roots.get(k).clone());
    }
    out
}

fn sqrt_i(ctx: &Ctx) -> CBall {
    CBall::e_rational(1, 8, ctx)
}

pub fn rho_s(m: &DiscModule, ctx: &Ctx) -> CMatrix {
    let n = m.len();
    let roots = RootTable::new(m.denominator(), ctx);
    let scale = sqrt_i(ctx).div_real(&RBall::from_i64(n as i64, ctx).sqrt(ctx), ctx);
    let elems: Vec<ModElement> = m.elements().collect();
    let mut out = CMatrix::zeros(n, n);
    for (i, x) in elems.iter().enumerate() {
        for (j, y) in elems.iter().enumerate() {
            out.set(i, j, roots.get(-m.bilinear_num(x, y)).mul(&scale, ctx));
        }
    }
    out
}

/// Residual `‖M M* − I‖∞`.
pub fn unitarity_residual(mat: &CMatrix, ctx: &Ctx) -> f64 {
    mat.mul(&mat.conj_transpose(), ctx)
        .distance(&CMatrix::identity(mat.rows, ctx), ctx)
}

/// Residual of `(ST)³ = S²`.
pub fn braid_residual(m: &DiscModule, ctx: &Ctx) -> f64 {
    let s = rho_s(m, ctx);
    let t = rho_t(m, ctx);
    let st = s.mul(&t, ctx);
    st.mul(&st, ctx)
        .mul(&st, ctx)
        .distance(&s.mul(&s, ctx), ctx)
}

/// ψ_{Δ,r} as sparse columns indexed by `h ∈ Z/2N`: entries `(element index, χ_Δ)`.
#[derive(Clone, Debug)]
pub struct PsiMatrix {
    pub module: DiscModule,
    pub r: i64,
    pub columns: Vec<Vec<(usize, i32)>>,
}

impl PsiMatrix {
    pub fn entry(&self, row: usize, h: usize) -> i32 {
        self.columns[h]
            .iter()
            .find(|(i, _)| *i == row)
            .map(|&(_, v)| v)
            .unwrap_or(0)
    }

    /// Nonzero entries of each row, `(h, χ_Δ)`.
    pub fn rows(&self) -> Vec<Vec<(usize, i32)>> {
        let mut out = vec![Vec::new(); self.module.len()];
        for (h, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                out[i].push((h, v));
            }
        }
        out
    }
}

pub fn check_r(delta: Discriminant, n: u64, r: i64) -> Result<()> {
    if (r * r - delta.value()).rem_euclid(4 * n as i64) != 0 {
        return Err(Error::invalid(format!(
            "{r}^2 is not congruent to {} modulo {}",
            delta.value(),
            4 * n
        )));
    }
    Ok(())
}

pub fn psi_matrix(n: u64, delta: Discriminant, r: i64) -> Result<PsiMatrix> {
    check_r(delta, n, r)?;
    let m = DiscModule::new(n, delta)?;
    let nn = n as i64;
    let ad = delta.value().abs();
    let den = m.denominator();
    let mut columns = Vec::with_capacity(2 * n as usize);
    for h in 0..2 * nn {
        let target = (r * h).rem_euclid(2 * nn);
        // sgn(Δ)Q(h) = −sgn(Δ)h²/4N over the common denominator
        let q_h = (-delta.sign() * h * h * ad).rem_euclid(den);
        let mut col = Vec::new();
        for a in 0..ad {
            for c in 0..ad {
                let mut b = target;
                while b < m.b_mod() {
                    let x = ModElement { a, b, c };
                    if m.norm_num(&x) == q_h {
                        let v = m.chi(&x);
                        if v != 0 {
                            col.push((m.index(&x), v));
                        }
                    }
                    b += 2 * nn;
                }
            }
        }
        col.sort_unstable();
        columns.push(col);
    }
    Ok(PsiMatrix {
        module: m,
        r,
        columns,
    })
}

/// Residuals of the intertwining relation for `T` and `S`.
#[derive(Clone, Copy, Debug)]
pub struct IntertwiningReport {
    pub residual_t: f64,
    pub residual_s: f64,
}

impl IntertwiningReport {
    pub fn max(&self) -> f64 {
        self.residual_t.max(self.residual_s)
    }
}

/// Checks `ρ_Δ(g)Ψ = Ψρ̃(g)` for `g ∈ {S, T}` without forming `ρ_Δ(S)` densely.
pub fn verify_intertwining(
    n: u64,
    delta: Discriminant,
    r: i64,
    bits: usize,
) -> Result<IntertwiningReport> {
    let ctx = Ctx::new(bits);
    let psi = psi_matrix(n, delta, r)?;
    let m = psi.module;
    let nn = n as i64;
    let den = m.denominator();
    let two_n = 2 * nn as usize;
    let roots = RootTable::new(den, &ctx);
    let sgn = delta.sign();

    let mut residual_t = 0.0f64;
    for (h, col) in psi.columns.iter().enumerate() {
        let hh = h as i64;
        let rhs = roots.get(-sgn * hh * hh * delta.value().abs());
        for &(i, _) in col {
            let lhs = roots.get(m.norm_num(&m.get(i)));
            residual_t = residual_t.max(lhs.sub(rhs, &ctx).mag());
        }
    }

    // ρ_Δ(S) = √i/√|D(Δ)| e(−(δ′,δ)_Δ); ρ̃(S) = √i/√2N e(h′h/2N), conjugated when Δ < 0.
    let lhs_scale = sqrt_i(&ctx).div_real(&RBall::from_i64(m.len() as i64, &ctx).sqrt(&ctx), &ctx);
    let mut rhs_scale = sqrt_i(&ctx).div_real(&RBall::from_i64(2 * nn, &ctx).sqrt(&ctx), &ctx);
    if sgn < 0 {
        rhs_scale = rhs_scale.conj();
    }
    let rows = psi.rows();
    let column_elems: Vec<Vec<(ModElement, i32)>> = psi
        .columns
        .iter()
        .map(|col| col.iter().map(|&(i, v)| (m.get(i), v)).collect())
        .collect();
    let step = 2 * delta.value().abs();
    let mut counts = vec![0i64; den as usize];
    let mut touched: Vec<usize> = Vec::new();
    let mut residual_s = 0.0f64;
    for (i, row) in rows.iter().enumerate() {
        let x = m.get(i);
        for h in 0..two_n {
            for &(y, v) in &column_elems[h] {
                let k = (-m.bilinear_num(&x, &y)).rem_euclid(den) as usize;
                if counts[k] == 0 {
                    touched.push(k);
                }
                counts[k] += v as i64;
            }
            let mut lhs = CBall::zero();
            for &k in &touched {
                if counts[k] != 0 {
                    lhs = lhs.add(&roots.get(k as i64).mul_i64(counts[k], &ctx), &ctx);
                }
                counts[k] = 0;
            }
            touched.clear();
            let lhs = lhs.mul(&lhs_scale, &ctx);
            let mut rhs = CBall::zero();
            for &(hp, v) in row {
                let k = sgn * (hp * h) as i64 * step;
                rhs = rhs.add(&roots.get(k).mul_i64(v as i64, &ctx), &ctx);
            }
            let rhs = rhs.mul(&rhs_scale, &ctx);
            residual_s = residual_s.max(lhs.sub(&rhs, &ctx).mag());
        }
    }
    Ok(IntertwiningReport {
        residual_t,
        residual_s,
    })
}

/// `ε = 1` for `Δ > 0` and `ε = i` for `Δ < 0`.
pub fn epsilon(delta: Discriminant, ctx: &Ctx) -> CBall {
    if delta.sign() > 0 {
        CBall::from_i64(1, ctx)
    } else {
        CBall::new(RBall::zero(), RBall::from_i64(1, ctx))
    }
}

fn check_gauss(delta: Discriminant, m: i64) -> Result<()> {
    if m <= 0 || m % delta.value().abs() != 0 {
        return Err(Error::invalid(format!(
            "modulus {m} is not a positive multiple of {}",
            delta.value().abs()
        )));
    }
    Ok(())
}

/// `Σ_{j mod M} (Δ/(aj+b)) e(jn/M)` by direct summation.
pub fn gauss_sum_direct(
    delta: Discriminant,
    m: i64,
    a: i64,
    b: i64,
    n: i64,
    ctx: &Ctx,
) -> Result<CBall> {
    check_gauss(delta, m)?;
    let roots = RootTable::new(m, ctx);
    let mut acc = CBall::zero();
    for j in 0..m {
        let k = kronecker(delta.value(), a * j + b);
        if k != 0 {
            acc = acc.add(&roots.get(j * n).mul_i64(k as i64, ctx), ctx);
        }
    }
    Ok(acc)
}

/// The same sum through `ε⁻¹ (M/√|Δ|) Σ_{l mod |Δ|, al+n′≡0} (Δ/l) e(bl/|Δ|)`, `n′ = |Δ|n/M`.
pub fn gauss_sum(delta: Discriminant, m: i64, a: i64, b: i64, n: i64, ctx: &Ctx) -> Result<CBall> {
    check_gauss(delta, m)?;
    let ad = delta.value().abs();
    if n % (m / ad) != 0 {
        return Ok(CBall::zero());
    }
    let np = n / (m / ad);
    let roots = RootTable::new(ad, ctx);
    let mut acc = CBall::zero();
    for l in 0..ad {
        if (a * l + np).rem_euclid(ad) == 0 {
            let k = kronecker(delta.value(), l);
            if k != 0 {
                acc = acc.add(&roots.get(b * l).mul_i64(k as i64, ctx), ctx);
            }
        }
    }
    let scale = RBall::from_i64(m, ctx).div(&RBall::from_i64(ad, ctx).sqrt(ctx), ctx);
    let acc = acc.scale(&scale, ctx);
    Ok(if delta.sign() > 0 {
        acc
    } else {
        acc.mul_i().neg()
    })
}
