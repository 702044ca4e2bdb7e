//! Truncated symmetric Fock space over `R^d` and second quantization.
//!
//! Degree-`n` sectors use the orthonormal basis `u_alpha = sqrt(n!/alpha!) e^alpha`,
//! where `e^alpha` is the symmetric product of `alpha_i` copies of `e_i` and
//! `<v_1 ∨ ... ∨ v_n, w_1 ∨ ... ∨ w_n> = (1/n!) sum_sigma prod <v_sigma(i), w_i>`.
//! In these coordinates `v^n` has entries `sqrt(n!/alpha!) v^alpha` and
//! `Exp(v)` has entries `v^alpha / sqrt(alpha!)`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::numerics::{max_abs_diff, op_norm, sym_eigen, Mat, Vector};
use crate::positive::PsStructure;
use crate::symmetric::SymSemigroup;

/// Largest Fock dimension a truncation may have.
pub const MAX_FOCK_DIM: usize = 200_000;
/// Operators with norm above `1 + CONTRACTION_TOL` are flagged.
pub const CONTRACTION_TOL: f64 = 1e-10;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&a| factorial(a)).product()
}

/// The multi-indices of total degree at most `N` over `d` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct FockTrunc {
    d: usize,
    n_max: usize,
    /// Multi-indices per degree, lexicographically descending.
    sectors: Vec<Vec<Vec<usize>>>,
    offsets: Vec<usize>,
    /// `raise[n][k][j]`: index in sector `n + 1` of `sectors[n][k] + e_j`.
    raise: Vec<Vec<Vec<usize>>>,
}

fn compositions(n: usize, d: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, d - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl FockTrunc {
    pub fn new(d: usize, n_max: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::OutOfRange("base dimension must be positive".into()));
        }
        let mut dim = 0usize;
        let mut sectors = Vec::with_capacity(n_max + 1);
        for n in 0..=n_max {
            let s = compositions(n, d);
            dim += s.len();
            if dim > MAX_FOCK_DIM {
                return Err(Error::OutOfRange(format!("Fock dimension exceeds {MAX_FOCK_DIM}")));
            }
            sectors.push(s);
        }
        let mut offsets = vec![0];
        for s in &sectors {
            offsets.push(offsets.last().unwrap() + s.len());
        }
        let mut raise = Vec::with_capacity(n_max);
        for n in 0..n_max {
            let index: HashMap<&[usize], usize> =
                sectors[n + 1].iter().enumerate().map(|(k, a)| (a.as_slice(), k)).collect();
            let table = sectors[n]
                .iter()
                .map(|a| {
                    (0..d)
                        .map(|j| {
                            let mut b = a.clone();
                            b[j] += 1;
                            index[b.as_slice()]
                        })
                        .collect()
                })
                .collect();
            raise.push(table);
        }
        Ok(Self {
            d,
            n_max,
            sectors,
            offsets,
            raise,
        })
    }

    pub fn base_dim(&self) -> usize {
        self.d
    }

    pub fn max_degree(&self) -> usize {
        self.n_max
    }

    /// `C(d + N, N)`.
    pub fn dim(&self) -> usize {
        self.offsets[self.n_max + 1]
    }

    pub fn sector(&self, n: usize) -> &[Vec<usize>] {
        &self.sectors[n]
    }

    pub fn sector_dim(&self, n: usize) -> usize {
        self.sectors[n].len()
    }

    /// Position of the first basis vector of degree `n`.
    pub fn offset(&self, n: usize) -> usize {
        self.offsets[n]
    }

    pub fn index_of(&self, alpha: &[usize]) -> Option<usize> {
        let n: usize = alpha.iter().sum();
        if alpha.len() != self.d || n > self.n_max {
            return None;
        }
        self.sectors[n].iter().position(|a| a == alpha).map(|k| self.offsets[n] + k)
    }

    /// Coefficients over sector `n` of the polynomial `prod_k <forms_k, x>`.
    fn expand(&self, forms: &[&[f64]]) -> Vec<f64> {
        let mut poly = vec![1.0];
        for (m, form) in forms.iter().enumerate() {
            let mut next = vec![0.0; self.sectors[m + 1].len()];
            for (k, &c) in poly.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (j, &l) in form.iter().enumerate() {
                    next[self.raise[m][k][j]] += c * l;
                }
            }
            poly = next;
        }
        poly
    }

    fn check_vector(&self, v: &Vector) -> Result<()> {
        if v.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: v.len(),
            });
        }
        Ok(())
    }

    fn check_degree(&self, n: usize) -> Result<()> {
        if n > self.n_max {
            return Err(Error::OutOfRange(format!("degree {n} above truncation {}", self.n_max)));
        }
        Ok(())
    }

    /// `v_1 ∨ ... ∨ v_n` embedded in the truncated space.
    pub fn sym_product(&self, vs: &[Vector]) -> Result<Vector> {
        let n = vs.len();
        self.check_degree(n)?;
        for v in vs {
            self.check_vector(v)?;
        }
        let forms: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        let poly = self.expand(&forms);
        let nf = factorial(n);
        let mut out = Vector::zeros(self.dim());
        for (k, (alpha, c)) in self.sectors[n].iter().zip(poly).enumerate() {
            out[self.offsets[n] + k] = c * (multi_factorial(alpha) / nf).sqrt();
        }
        Ok(out)
    }

    /// `v^n = v ∨ ... ∨ v`.
    pub fn power(&self, v: &Vector, n: usize) -> Result<Vector> {
        self.check_degree(n)?;
        self.check_vector(v)?;
        let nf = factorial(n);
        let mut out = Vector::zeros(self.dim());
        for (k, alpha) in self.sectors[n].iter().enumerate() {
            out[self.offsets[n] + k] = (nf / multi_factorial(alpha)).sqrt() * monomial(v, alpha);
        }
        Ok(out)
    }
}

fn monomial(v: &Vector, alpha: &[usize]) -> f64 {
    alpha.iter().zip(v.iter()).map(|(&a, &x)| x.powi(a as i32)).product()
}

/// A degree-preserving operator, stored as one block per sector.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOp {
    blocks: Vec<Mat>,
    /// Operator norm of the one-particle input, when built by [`gamma`].
    base_norm: Option<f64>,
}

impl FockOp {
    pub fn identity(trunc: &FockTrunc) -> Self {
        Self {
            blocks: (0..=trunc.n_max)
                .map(|n| Mat::identity(trunc.sector_dim(n), trunc.sector_dim(n)))
                .collect(),
            base_norm: Some(1.0),
        }
    }

    pub fn block(&self, n: usize) -> &Mat {
        &self.blocks[n]
    }

    pub fn blocks(&self) -> &[Mat] {
        &self.blocks
    }

    /// Full block-diagonal matrix.
    pub fn matrix(&self) -> Mat {
        let dim: usize = self.blocks.iter().map(|b| b.nrows()).sum();
        let mut m = Mat::zeros(dim, dim);
        let mut o = 0;
        for b in &self.blocks {
            m.view_mut((o, o), (b.nrows(), b.ncols())).copy_from(b);
            o += b.nrows();
        }
        m
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                found: other.blocks.len(),
            });
        }
        Ok(Self {
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect(),
            base_norm: None,
        })
    }

    pub fn adjoint(&self) -> Self {
        Self {
            blocks: self.blocks.iter().map(|b| b.transpose()).collect(),
            base_norm: self.base_norm,
        }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        let mut out = Vector::zeros(v.len());
        let mut o = 0;
        for b in &self.blocks {
            let k = b.nrows();
            out.rows_mut(o, k).copy_from(&(b * v.rows(o, k)));
            o += k;
        }
        out
    }

    /// Largest entrywise difference over all blocks.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| max_abs_diff(a, b))
            .fold(0.0, f64::max)
    }

    /// Largest block norm.
    pub fn norm(&self) -> f64 {
        self.blocks.iter().map(op_norm).fold(0.0, f64::max)
    }

    /// `NotAContraction` when the one-particle operator had norm above one.
    /// Functoriality still holds; only positivity statements are affected.
    pub fn warning(&self) -> Option<Error> {
        self.base_norm
            .filter(|&n| n > 1.0 + CONTRACTION_TOL)
            .map(|norm| Error::NotAContraction { norm })
    }
}

/// `Γ(a)`: the restriction of `a^{⊗n}` to each symmetric sector.
pub fn gamma(trunc: &FockTrunc, a: &Mat) -> Result<FockOp> {
    let d = trunc.d;
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: a.nrows().max(a.ncols()),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let cols: Vec<Vec<f64>> = (0..d).map(|i| a.column(i).iter().copied().collect()).collect();
    let mut blocks = Vec::with_capacity(trunc.n_max + 1);
    for n in 0..=trunc.n_max {
        let sector = &trunc.sectors[n];
        let mut b = Mat::zeros(sector.len(), sector.len());
        for (col, beta) in sector.iter().enumerate() {
            let forms: Vec<&[f64]> = beta
                .iter()
                .enumerate()
                .flat_map(|(i, &m)| std::iter::repeat_n(cols[i].as_slice(), m))
                .collect();
            let poly = trunc.expand(&forms);
            let beta_f = multi_factorial(beta);
            for (row, (alpha, c)) in sector.iter().zip(poly).enumerate() {
                b[(row, col)] = c * (multi_factorial(alpha) / beta_f).sqrt();
            }
        }
        blocks.push(b);
    }
    Ok(FockOp {
        blocks,
        base_norm: Some(op_norm(a)),
    })
}

/// `Exp_N(v) = sum_{n <= N} v^n / sqrt(n!)`.
pub fn exp_vector(trunc: &FockTrunc, v: &Vector) -> Result<Vector> {
    trunc.check_vector(v)?;
    let mut out = Vector::zeros(trunc.dim());
    for n in 0..=trunc.n_max {
        for (k, alpha) in trunc.sectors[n].iter().enumerate() {
            out[trunc.offsets[n] + k] = monomial(v, alpha) / multi_factorial(alpha).sqrt();
        }
    }
    Ok(out)
}

/// `sum_{n <= N} <v, w>^n / n!`, the truncated reproducing kernel.
pub fn exp_kernel(v: &Vector, w: &Vector, n_max: usize) -> f64 {
    let x = v.dot(w);
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..=n_max {
        term *= x / n as f64;
        sum += term;
    }
    sum
}

/// `(|v| |w|)^{N+1} / (N+1)! * e^{|v| |w|}`, a bound on `|e^{<v,w>} - exp_kernel|`.
pub fn exp_kernel_tail_bound(v: &Vector, w: &Vector, n_max: usize) -> f64 {
    let r = v.norm() * w.norm();
    r.powi(n_max as i32 + 1) / factorial(n_max + 1) * r.exp()
}

/// Probabilists' Gauss-Hermite rule for the standard gaussian, by
/// Golub-Welsch. Weights sum to one; the rule is exact for polynomials of
/// degree below `2 * order`.
pub fn gauss_hermite(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if order == 0 {
        return Err(Error::OutOfRange("quadrature order must be positive".into()));
    }
    let jacobi = Mat::from_fn(order, order, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64).sqrt()
        } else {
            0.0
        }
    });
    let (values, vectors) = sym_eigen(&jacobi);
    let nodes = values.iter().copied().collect();
    let weights: Vec<f64> = (0..order).map(|k| vectors[(0, k)].powi(2)).collect();
    let total: f64 = weights.iter().sum();
    Ok((nodes, weights.into_iter().map(|w| w / total).collect()))
}

/// `h_0(x), ..., h_n(x)` with `h_k = He_k / sqrt(k!)`, orthonormal for the
/// standard gaussian.
pub fn hermite_normalized(n: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push(1.0);
    if n >= 1 {
        h.push(x);
    }
    for k in 1..n {
        let next = (x * h[k] - (k as f64).sqrt() * h[k - 1]) / ((k + 1) as f64).sqrt();
        h.push(next);
    }
    h
}

#[derive(Debug, Clone, PartialEq)]
pub struct MehlerReport {
    pub c: f64,
    /// `c^n a_n`.
    pub diagonal: Vec<f64>,
    /// Hermite coefficients of `x -> ∫ f(c x + sqrt(1 - c^2) y) dγ(y)` by double quadrature.
    pub quadrature: Vec<f64>,
    pub discrepancy: f64,
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c <= 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("c = {c} outside (0, 1]")))
    }
}

/// The Mehler operator `Γ(c)` at `d = 1` applied to `f = sum a_n h_n`,
/// once through the Hermite diagonal and once through its integral form.
pub fn mehler(c: f64, coeffs: &[f64], quad_order: usize) -> Result<MehlerReport> {
    check_c(c)?;
    let deg = coeffs.len().saturating_sub(1);
    if quad_order < 2 * deg.max(1) {
        return Err(Error::OutOfRange(format!(
            "quadrature order {quad_order} below twice the degree {deg}"
        )));
    }
    let diagonal: Vec<f64> = coeffs.iter().enumerate().map(|(n, a)| c.powi(n as i32) * a).collect();
    let (nodes, weights) = gauss_hermite(quad_order)?;
    let s = (1.0 - c * c).max(0.0).sqrt();
    let f = |z: f64| -> f64 { hermite_normalized(deg, z).iter().zip(coeffs).map(|(h, a)| h * a).sum() };
    let mut quadrature = vec![0.0; coeffs.len()];
    for (&x, &wx) in nodes.iter().zip(&weights) {
        let inner: f64 = nodes.iter().zip(&weights).map(|(&y, &wy)| wy * f(c * x + s * y)).sum();
        for (q, h) in quadrature.iter_mut().zip(hermite_normalized(deg, x)) {
            *q += wx * inner * h;
        }
    }
    let discrepancy = diagonal
        .iter()
        .zip(&quadrature)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(MehlerReport {
        c,
        diagonal,
        quadrature,
        discrepancy,
    })
}

/// `(Γ(c) f)(x) = ∫ f(c x + sqrt(1 - c^2) y) dγ(y)` at a point.
pub fn mehler_apply(c: f64, f: impl Fn(f64) -> f64, x: f64, quad_order: usize) -> Result<f64> {
    check_c(c)?;
    let (nodes, weights) = gauss_hermite(quad_order)?;
    let s = (1.0 - c * c).max(0.0).sqrt();
    Ok(nodes.iter().zip(&weights).map(|(&y, &w)| w * f(c * x + s * y)).sum())
}

/// The positive semigroup structure `P_s = Γ(π(s))` with the vacuum.
///
/// At `d = 1` the commutative algebra is multiplication by functions of
/// `x` sampled at the `N + 1` Gauss-Hermite nodes; for `d > 1` it is the
/// algebra diagonal in the Fock basis.
pub fn second_quantized_ps(sym: &SymSemigroup, rep: &BTreeMap<i64, Mat>, trunc: &FockTrunc) -> Result<PsStructure> {
    for (&s, a) in rep {
        if !sym.is_element(s) {
            return Err(Error::InvalidElement(s));
        }
        if let Some(b) = rep.get(&sym.sharp(s)) {
            let deviation = max_abs_diff(b, &a.transpose());
            if deviation > CONTRACTION_TOL {
                return Err(Error::NotInvolutive { deviation });
            }
        }
    }
    let mut ops = BTreeMap::new();
    for (&s, a) in rep {
        ops.insert(s, gamma(trunc, a)?.matrix());
    }
    let dim = trunc.dim();
    let algebra = if trunc.d == 1 {
        let (nodes, weights) = gauss_hermite(trunc.n_max + 1)?;
        Mat::from_fn(dim, dim, |n, k| weights[k].sqrt() * hermite_normalized(trunc.n_max, nodes[k])[n])
    } else {
        Mat::identity(dim, dim)
    };
    let mut omega = Vector::zeros(dim);
    omega[0] = 1.0;
    PsStructure::new(ops, algebra, omega)
}
