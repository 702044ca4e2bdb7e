//! Markov kernels on finite state spaces and positive semigroup structures.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{max_abs_diff, op_norm, psd_min_eig, Mat, Subspace, Vector};
use crate::symmetric::{permutations, SymSemigroup};

/// Row sums of a Markov kernel must be within this of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance for the matrix identities checked on kernel families.
pub const KERNEL_IDENTITY_TOL: f64 = 1e-10;

/// Finite state space with strictly positive reference weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpace {
    nu: Vec<f64>,
}

impl StateSpace {
    pub fn new(nu: Vec<f64>) -> Result<Self> {
        if nu.is_empty() {
            return Err(Error::NonPositiveWeight("empty state space".into()));
        }
        if let Some((i, w)) = nu.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::NonPositiveWeight(format!("nu[{i}] = {w}")));
        }
        Ok(Self { nu })
    }

    pub fn uniform(m: usize) -> Self {
        Self::new(vec![1.0 / m as f64; m]).expect("uniform weights are positive")
    }

    pub fn size(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn total_mass(&self) -> f64 {
        self.nu.iter().sum()
    }

    /// The weights rescaled to a probability vector.
    pub fn normalized(&self) -> Vec<f64> {
        let z = self.total_mass();
        self.nu.iter().map(|w| w / z).collect()
    }
}

/// A row-stochastic nonnegative matrix over a [`StateSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    space: StateSpace,
    p: Mat,
}

impl MarkovKernel {
    pub fn new(space: StateSpace, p: Mat) -> Result<Self> {
        let m = space.size();
        if p.nrows() != m || p.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.nrows().max(p.ncols()),
            });
        }
        if let Some((i, j)) = first_negative(&p) {
            return Err(Error::InvalidKernel(format!("negative entry at ({i}, {j})")));
        }
        if let Some((i, dev)) = worst_row_sum(&p).filter(|(_, d)| *d > ROW_SUM_TOL) {
            return Err(Error::InvalidKernel(format!("row {i} sums to 1{dev:+e}")));
        }
        Ok(Self { space, p })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn matrix(&self) -> &Mat {
        &self.p
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    /// `P^t` for `t >= 0`.
    pub fn power(&self, t: u32) -> Mat {
        self.p.pow(t)
    }

    /// Detailed balance `nu_i P_ij = nu_j P_ji`.
    pub fn is_nu_symmetric(&self) -> bool {
        sps3_deviation(&self.p, &self.p, self.space.nu()).0 <= KERNEL_IDENTITY_TOL
    }
}

fn first_negative(p: &Mat) -> Option<(usize, usize)> {
    (0..p.nrows())
        .flat_map(|i| (0..p.ncols()).map(move |j| (i, j)))
        .find(|&(i, j)| p[(i, j)] < 0.0 || !p[(i, j)].is_finite())
}

/// Row with the largest `|sum - 1|` together with that deviation.
fn worst_row_sum(p: &Mat) -> Option<(usize, f64)> {
    (0..p.nrows())
        .map(|i| (i, (p.row(i).sum() - 1.0).abs()))
        .max_by(|a, b| a.1.total_cmp(&b.1))
}

/// `max |nu_i P_s(i,j) - nu_j P_{s#}(j,i)|` with the first entry exceeding
/// tolerance.
fn sps3_deviation(p_s: &Mat, p_sharp: &Mat, nu: &[f64]) -> (f64, Option<(usize, usize)>) {
    let m = nu.len();
    let mut max = 0.0f64;
    let mut witness = None;
    for i in 0..m {
        for j in 0..m {
            let d = (nu[i] * p_s[(i, j)] - nu[j] * p_sharp[(j, i)]).abs();
            if d > KERNEL_IDENTITY_TOL && witness.is_none() {
                witness = Some((i, j));
            }
            max = max.max(d);
        }
    }
    (max, witness)
}

/// Matrices indexed by semigroup elements, sharing one reference weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFamily {
    nu: Vec<f64>,
    kind: FamilyKind,
}

#[derive(Debug, Clone, PartialEq)]
enum FamilyKind {
    /// `P_t = P^t` on `N0`.
    Powers(Mat),
    /// One matrix per element of a finite S.
    Table(BTreeMap<i64, Mat>),
}

impl KernelFamily {
    pub fn powers(p: Mat, nu: Vec<f64>) -> Result<Self> {
        if p.nrows() != nu.len() || p.ncols() != nu.len() {
            return Err(Error::DimensionMismatch {
                expected: nu.len(),
                found: p.nrows().max(p.ncols()),
            });
        }
        Ok(Self {
            nu,
            kind: FamilyKind::Powers(p),
        })
    }

    pub fn table(kernels: BTreeMap<i64, Mat>, nu: Vec<f64>) -> Result<Self> {
        for p in kernels.values() {
            if p.nrows() != nu.len() || p.ncols() != nu.len() {
                return Err(Error::DimensionMismatch {
                    expected: nu.len(),
                    found: p.nrows().max(p.ncols()),
                });
            }
        }
        Ok(Self {
            nu,
            kind: FamilyKind::Table(kernels),
        })
    }

    pub fn from_kernel(k: &MarkovKernel) -> Self {
        Self {
            nu: k.space().nu().to_vec(),
            kind: FamilyKind::Powers(k.matrix().clone()),
        }
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn size(&self) -> usize {
        self.nu.len()
    }

    /// The generating matrix of a power family.
    pub fn generator(&self) -> Option<&Mat> {
        match &self.kind {
            FamilyKind::Powers(p) => Some(p),
            FamilyKind::Table(_) => None,
        }
    }

    pub fn kernel(&self, s: i64) -> Result<Mat> {
        match &self.kind {
            FamilyKind::Powers(p) if s >= 0 => Ok(p.pow(s as u32)),
            FamilyKind::Powers(_) => Err(Error::MissingElement(s)),
            FamilyKind::Table(t) => t.get(&s).cloned().ok_or(Error::MissingElement(s)),
        }
    }

    /// Elements checked by validation.
    fn sample_elements(&self, sym: &SymSemigroup) -> Vec<i64> {
        match &self.kind {
            FamilyKind::Powers(_) => (0..=FAMILY_SAMPLE_DEPTH).collect(),
            FamilyKind::Table(_) => sym.s_elements(),
        }
    }
}

/// Largest power checked for `(Z, N0)` families.
pub const FAMILY_SAMPLE_DEPTH: i64 = 4;

/// A single identity check: maximal deviation plus a human-readable witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub passed: bool,
    pub max_deviation: f64,
    pub witness: Option<String>,
}

impl IdentityCheck {
    fn new(max_deviation: f64, tol: f64, witness: Option<String>) -> Self {
        Self {
            passed: max_deviation <= tol && witness.is_none(),
            max_deviation,
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelFamilyReport {
    /// Entrywise nonnegativity.
    pub positivity: IdentityCheck,
    /// Row sums equal to one.
    pub markov: IdentityCheck,
    /// `P_s P_t = P_{st}`.
    pub semigroup_law: IdentityCheck,
    /// `D_nu P_s = P_{s#}^T D_nu`.
    pub nu_involutive: IdentityCheck,
    /// `P_h M_f P_h^{-1} = M_{P_h f}` for units h.
    pub unit_automorphism: IdentityCheck,
    /// `nu P_s = nu` (a consequence of the two previous axioms).
    pub nu_invariance: IdentityCheck,
    /// `P_{s# s}` is PSD on `L^2(nu)`.
    pub square_positivity: IdentityCheck,
}

impl KernelFamilyReport {
    /// Axioms proper; the derived consequences are reported separately.
    pub fn passed(&self) -> bool {
        self.positivity.passed
            && self.markov.passed
            && self.semigroup_law.passed
            && self.nu_involutive.passed
            && self.unit_automorphism.passed
    }
}

/// Checks positivity, the Markov condition, the semigroup law and
/// nu-involutivity of a kernel family indexed by a symmetric semigroup.
pub fn validate_kernel_family(sym: &SymSemigroup, family: &KernelFamily) -> Result<KernelFamilyReport> {
    if matches!(family.kind, FamilyKind::Powers(_)) != sym.is_integers() {
        return Err(Error::InvalidKernel(
            "power families index (Z, N0); table families index finite semigroups".into(),
        ));
    }
    let nu = family.nu();
    let m = nu.len();
    let elements = family.sample_elements(sym);
    let mut kernels = BTreeMap::new();
    for &s in &elements {
        let k = family.kernel(s)?;
        if k.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: k.nrows(),
            });
        }
        kernels.insert(s, k);
    }

    let mut neg_witness = None;
    let mut neg_max = 0.0f64;
    let mut row_witness = None;
    let mut row_max = 0.0f64;
    for (&s, k) in &kernels {
        if let Some((i, j)) = first_negative(k) {
            neg_max = neg_max.max(-k[(i, j)]);
            neg_witness.get_or_insert(format!("s={s}, (i,j)=({i},{j})"));
        }
        if let Some((i, d)) = worst_row_sum(k) {
            if d > ROW_SUM_TOL {
                row_witness.get_or_insert(format!("s={s}, row {i}"));
            }
            row_max = row_max.max(d);
        }
    }

    let mut law_max = 0.0f64;
    let mut law_witness = None;
    for &s in &elements {
        for &t in &elements {
            let st = sym.mul(s, t);
            let Some(k_st) = kernels.get(&st) else { continue };
            let d = max_abs_diff(&(&kernels[&s] * &kernels[&t]), k_st);
            if d > KERNEL_IDENTITY_TOL && law_witness.is_none() {
                law_witness = Some(format!("(s,t)=({s},{t})"));
            }
            law_max = law_max.max(d);
        }
    }

    let mut inv_max = 0.0f64;
    let mut inv_witness = None;
    for &s in &elements {
        let sharp = sym.sharp(s);
        let k_sharp = match kernels.get(&sharp) {
            Some(k) => k.clone(),
            None => family.kernel(sharp)?,
        };
        let (d, w) = sps3_deviation(&kernels[&s], &k_sharp, nu);
        if let (Some((i, j)), None) = (w, &inv_witness) {
            inv_witness = Some(format!("s={s}, (i,j)=({i},{j})"));
        }
        inv_max = inv_max.max(d);
    }

    let mut aut_max = 0.0f64;
    let mut aut_witness = None;
    for h in sym.units() {
        let Some(p_h) = kernels.get(&h) else { continue };
        let Some(p_inv) = p_h.clone().try_inverse() else {
            aut_witness.get_or_insert(format!("h={h} not invertible"));
            continue;
        };
        for k in 0..m {
            let mut f = Vector::zeros(m);
            f[k] = 1.0;
            let lhs = p_h * Mat::from_diagonal(&f) * &p_inv;
            let rhs = Mat::from_diagonal(&(p_h * &f));
            let d = max_abs_diff(&lhs, &rhs);
            if d > KERNEL_IDENTITY_TOL && aut_witness.is_none() {
                aut_witness = Some(format!("h={h}, f=indicator({k})"));
            }
            aut_max = aut_max.max(d);
        }
    }

    let nu_row = Vector::from_column_slice(nu).transpose();
    let mut inv_dev = 0.0f64;
    let mut inv_dev_witness = None;
    for (&s, k) in &kernels {
        let d = (&nu_row * k - &nu_row).amax();
        if d > 1e-12 * nu.iter().sum::<f64>().max(1.0) && inv_dev_witness.is_none() {
            inv_dev_witness = Some(format!("s={s}"));
        }
        inv_dev = inv_dev.max(d);
    }

    let sqrt_nu: Vec<f64> = nu.iter().map(|w| w.sqrt()).collect();
    let mut sq_min = 0.0f64;
    let mut sq_witness = None;
    for &s in &elements {
        let prod = sym.mul(sym.sharp(s), s);
        let Ok(k) = kernels.get(&prod).cloned().map_or_else(|| family.kernel(prod), Ok) else {
            continue;
        };
        let conj = Mat::from_fn(m, m, |i, j| sqrt_nu[i] * k[(i, j)] / sqrt_nu[j]);
        let r = psd_min_eig(&conj)?;
        if !r.is_psd && sq_witness.is_none() {
            sq_witness = Some(format!("s={s}"));
        }
        sq_min = sq_min.min(r.min_eig);
    }

    Ok(KernelFamilyReport {
        positivity: IdentityCheck::new(neg_max, 0.0, neg_witness),
        markov: IdentityCheck::new(row_max, ROW_SUM_TOL, row_witness),
        semigroup_law: IdentityCheck::new(law_max, KERNEL_IDENTITY_TOL, law_witness),
        nu_involutive: IdentityCheck::new(inv_max, KERNEL_IDENTITY_TOL, inv_witness),
        unit_automorphism: IdentityCheck::new(aut_max, KERNEL_IDENTITY_TOL, aut_witness),
        nu_invariance: IdentityCheck::new(inv_dev, 1e-12 * nu.iter().sum::<f64>().max(1.0), inv_dev_witness),
        square_positivity: IdentityCheck::new(-sq_min, 1e-10, sq_witness),
    })
}

/// `sum_pi w_pi Perm(pi)` with `Perm(pi)(i, pi(i)) = 1`, over uniform `nu`.
pub fn doubly_stochastic_example(n: usize, weights: &[(Vec<usize>, f64)]) -> Result<MarkovKernel> {
    let mut total = 0.0;
    let mut p = Mat::zeros(n, n);
    for (perm, w) in weights {
        if !(w.is_finite() && *w >= 0.0) {
            return Err(Error::NotADistribution(format!("weight {w}")));
        }
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::NotADistribution(format!("{perm:?} is not a permutation of {n} letters")));
        }
        for (i, &j) in perm.iter().enumerate() {
            p[(i, j)] += w;
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::NotADistribution(format!("weights sum to {total}")));
    }
    MarkovKernel::new(StateSpace::uniform(n), p)
}

/// Uniform weights over all `n!` permutations.
pub fn uniform_permutation_weights(n: usize) -> Vec<(Vec<usize>, f64)> {
    let perms = permutations(n);
    let w = 1.0 / perms.len() as f64;
    perms.into_iter().map(|p| (p, w)).collect()
}

/// Whether `w(pi) = w(pi^{-1})` for every listed permutation.
pub fn is_inverse_symmetric(weights: &[(Vec<usize>, f64)]) -> bool {
    let weight_of = |perm: &[usize]| -> f64 {
        weights
            .iter()
            .filter(|(p, _)| p.as_slice() == perm)
            .map(|(_, w)| *w)
            .sum()
    };
    weights.iter().all(|(p, _)| {
        let mut inv = vec![0; p.len()];
        for (i, &j) in p.iter().enumerate() {
            inv[j] = i;
        }
        (weight_of(p) - weight_of(&inv)).abs() <= 1e-15
    })
}

/// A positive semigroup structure on a finite-dimensional Hilbert space:
/// contractions indexed by semigroup elements, a commutative algebra
/// diagonal in an orthonormal basis, and a vacuum vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PsStructure {
    ops: BTreeMap<i64, Mat>,
    algebra_basis: Mat,
    omega: Vector,
}

impl PsStructure {
    /// `algebra_basis` holds the orthonormal basis, as columns, in which
    /// every multiplication operator is diagonal.
    pub fn new(ops: BTreeMap<i64, Mat>, algebra_basis: Mat, omega: Vector) -> Result<Self> {
        let d = omega.len();
        if algebra_basis.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: algebra_basis.nrows(),
            });
        }
        Subspace::from_orthonormal(algebra_basis.clone())?;
        if algebra_basis.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: algebra_basis.ncols(),
            });
        }
        for p in ops.values() {
            if p.nrows() != d || p.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.nrows().max(p.ncols()),
                });
            }
        }
        Ok(Self {
            ops,
            algebra_basis,
            omega,
        })
    }

    /// The `L^2(M, nu)` picture of a kernel family: orthonormal basis
    /// `e_i / sqrt(nu_i)`, vacuum the normalized constant function.
    pub fn from_kernel_family(family: &KernelFamily, elements: &[i64]) -> Result<Self> {
        let nu = StateSpace::new(family.nu().to_vec())?.normalized();
        let m = nu.len();
        let sqrt_nu: Vec<f64> = nu.iter().map(|w| w.sqrt()).collect();
        let mut ops = BTreeMap::new();
        for &s in elements {
            let k = family.kernel(s)?;
            ops.insert(s, Mat::from_fn(m, m, |i, j| sqrt_nu[i] * k[(i, j)] / sqrt_nu[j]));
        }
        Self::new(ops, Mat::identity(m, m), Vector::from_vec(sqrt_nu))
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn ops(&self) -> &BTreeMap<i64, Mat> {
        &self.ops
    }

    pub fn omega(&self) -> &Vector {
        &self.omega
    }

    pub fn algebra_basis(&self) -> &Mat {
        &self.algebra_basis
    }

    /// The multiplication operator of `f` (values on the algebra basis).
    pub fn multiplication(&self, f: &[f64]) -> Mat {
        let w = &self.algebra_basis;
        w * Mat::from_diagonal(&Vector::from_column_slice(f)) * w.transpose()
    }

    /// `M_f v` without forming the operator.
    fn apply_multiplication(&self, f: &[f64], v: &Vector) -> Vector {
        let w = &self.algebra_basis;
        let mut c = w.transpose() * v;
        for (ci, fi) in c.iter_mut().zip(f) {
            *ci *= fi;
        }
        w * c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsReport {
    /// `max ||P_s Omega - Omega||`.
    pub vacuum: IdentityCheck,
    /// `max (||P_s|| - 1)`, clamped at zero.
    pub contraction: IdentityCheck,
    /// `max ||P_{s#} - P_s^*||` over pairs present in the structure.
    pub adjoint: IdentityCheck,
    /// Dimension of the span of words of length at most the depth applied to Omega.
    pub cyclic_dim: usize,
    pub is_cyclic: bool,
    /// Smallest correlation found; must be nonnegative.
    pub min_correlation: f64,
    pub correlations_nonnegative: bool,
    pub correlation_witness: Option<String>,
    pub exhaustive_depth: usize,
    pub sampled_trials: usize,
}

impl PsReport {
    pub fn passed(&self) -> bool {
        self.vacuum.passed && self.contraction.passed && self.adjoint.passed && self.correlations_nonnegative
    }
}

/// Correlation tolerance: values down to `-1e-10` count as nonnegative.
pub const CORRELATION_TOL: f64 = 1e-10;
/// Word length up to which correlations are enumerated exhaustively.
pub const EXHAUSTIVE_DEPTH: usize = 3;

/// Checks the vacuum, contraction, adjoint, cyclicity and correlation
/// positivity axioms. Correlations `<A_1 P_{s_1} A_2 ... A_n Omega, Omega>`
/// are enumerated over indicator functions up to length 3 and sampled with
/// random nonnegative functions beyond.
pub fn check_ps_structure(
    ps: &PsStructure,
    sym: &SymSemigroup,
    depth: usize,
    trials: usize,
    seed: u64,
) -> Result<PsReport> {
    let d = ps.dim();
    let omega = ps.omega();
    let elements: Vec<i64> = ps.ops.keys().copied().filter(|&s| sym.in_s(s)).collect();

    let mut vac_max = 0.0f64;
    let mut vac_witness = None;
    let mut norm_max = 0.0f64;
    let mut norm_witness = None;
    let mut adj_max = 0.0f64;
    let mut adj_witness = None;
    for (&s, p) in &ps.ops {
        let dv = (p * omega - omega).norm();
        if dv > KERNEL_IDENTITY_TOL && vac_witness.is_none() {
            vac_witness = Some(format!("s={s}"));
        }
        vac_max = vac_max.max(dv);
        let excess = (op_norm(p) - 1.0).max(0.0);
        if excess > KERNEL_IDENTITY_TOL && norm_witness.is_none() {
            norm_witness = Some(format!("s={s}"));
        }
        norm_max = norm_max.max(excess);
        if let Some(q) = ps.ops.get(&sym.sharp(s)) {
            let da = max_abs_diff(q, &p.transpose());
            if da > KERNEL_IDENTITY_TOL && adj_witness.is_none() {
                adj_witness = Some(format!("s={s}"));
            }
            adj_max = adj_max.max(da);
        }
    }

    // Cyclicity: grow the span of words applied to the vacuum.
    let indicators: Vec<Vec<f64>> = (0..d)
        .map(|k| (0..d).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut frontier = vec![omega.clone()];
    let mut span = Subspace::span(&Mat::from_columns(&frontier));
    for _ in 0..depth {
        let mut next = Vec::new();
        for v in &frontier {
            for f in &indicators {
                next.push(ps.apply_multiplication(f, v));
            }
            for s in &elements {
                next.push(&ps.ops[s] * v);
            }
        }
        let mut cols: Vec<Vector> = span.basis().column_iter().map(|c| c.into_owned()).collect();
        cols.extend(next.iter().cloned());
        let grown = Subspace::span(&Mat::from_columns(&cols));
        let saturated = grown.dim() == span.dim();
        span = grown;
        if saturated || span.dim() == d {
            break;
        }
        frontier = Subspace::span(&Mat::from_columns(&next))
            .basis()
            .column_iter()
            .map(|c| c.into_owned())
            .collect();
    }

    let correlation = |fs: &[&[f64]], ss: &[i64]| -> f64 {
        let mut v = ps.apply_multiplication(fs[fs.len() - 1], omega);
        for k in (0..ss.len()).rev() {
            v = &ps.ops[&ss[k]] * v;
            v = ps.apply_multiplication(fs[k], &v);
        }
        v.dot(omega)
    };

    let mut min_corr = f64::INFINITY;
    let mut witness = None;
    let mut record = |value: f64, desc: &dyn Fn() -> String, min_corr: &mut f64| {
        if value < *min_corr {
            *min_corr = value;
            if value < -CORRELATION_TOL {
                witness = Some(desc());
            }
        }
    };
    let exhaustive = depth.min(EXHAUSTIVE_DEPTH);
    for n in 1..=exhaustive {
        for_each_index(d, n, |fi| {
            for_each_index(elements.len(), n - 1, |si| {
                let fs: Vec<&[f64]> = fi.iter().map(|&k| indicators[k].as_slice()).collect();
                let ss: Vec<i64> = si.iter().map(|&k| elements[k]).collect();
                let value = correlation(&fs, &ss);
                record(
                    value,
                    &|| format!("indicators {fi:?}, elements {ss:?}, value {value:e}"),
                    &mut min_corr,
                );
            });
        });
    }
    let mut sampled = 0;
    if depth > EXHAUSTIVE_DEPTH && !elements.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..trials {
            let n = rng.random_range(EXHAUSTIVE_DEPTH + 1..=depth);
            let fs: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.random::<f64>()).collect()).collect();
            let ss: Vec<i64> = (0..n - 1).map(|_| elements[rng.random_range(0..elements.len())]).collect();
            let refs: Vec<&[f64]> = fs.iter().map(Vec::as_slice).collect();
            let value = correlation(&refs, &ss);
            record(value, &|| format!("random functions, elements {ss:?}, value {value:e}"), &mut min_corr);
            sampled += 1;
        }
    }

    Ok(PsReport {
        vacuum: IdentityCheck::new(vac_max, KERNEL_IDENTITY_TOL, vac_witness),
        contraction: IdentityCheck::new(norm_max, KERNEL_IDENTITY_TOL, norm_witness),
        adjoint: IdentityCheck::new(adj_max, KERNEL_IDENTITY_TOL, adj_witness),
        cyclic_dim: span.dim(),
        is_cyclic: span.dim() == d,
        min_correlation: min_corr,
        correlations_nonnegative: min_corr >= -CORRELATION_TOL,
        correlation_witness: witness,
        exhaustive_depth: exhaustive,
        sampled_trials: sampled,
    })
}

/// Calls `f` on every tuple in `{0..base}^len`, lexicographically.
pub(crate) fn for_each_index(base: usize, len: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; len];
    if len > 0 && base == 0 {
        return;
    }
    loop {
        f(&idx);
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < base {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// A seeded random nu-symmetric kernel on `m` states: `P = D^{-1} W` for a
/// random symmetric weight matrix `W` with row sums `D`; the stationary
/// weights are proportional to those row sums.
pub fn random_reversible_kernel(m: usize, seed: u64) -> MarkovKernel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = Mat::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let x = 0.05 + rng.random::<f64>();
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
    }
    let rows: Vec<f64> = (0..m).map(|i| w.row(i).sum()).collect();
    let total: f64 = rows.iter().sum();
    let p = Mat::from_fn(m, m, |i, j| w[(i, j)] / rows[i]);
    let nu = rows.iter().map(|r| r / total).collect();
    MarkovKernel::new(StateSpace::new(nu).expect("positive"), p).expect("stochastic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetric::FiniteGroup;

    fn two_state() -> KernelFamily {
        KernelFamily::powers(Mat::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7]), vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn symmetric_two_state_family_passes() {
        let r = validate_kernel_family(&SymSemigroup::integers(), &two_state()).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.nu_invariance.passed);
        assert!(r.square_positivity.passed);
    }

    #[test]
    fn identity_family_passes() {
        let fam = KernelFamily::powers(Mat::identity(3, 3), vec![1.0, 2.0, 3.0]).unwrap();
        assert!(validate_kernel_family(&SymSemigroup::integers(), &fam).unwrap().passed());
    }

    #[test]
    fn asymmetric_kernel_fails_involutivity() {
        let fam = KernelFamily::powers(Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]), vec![0.5, 0.5]).unwrap();
        let r = validate_kernel_family(&SymSemigroup::integers(), &fam).unwrap();
        assert!(!r.nu_involutive.passed);
        assert_eq!(r.nu_involutive.witness.as_deref(), Some("s=1, (i,j)=(0,1)"));
        assert!(r.positivity.passed && r.markov.passed && r.semigroup_law.passed);
        assert!(!r.passed());
    }

    #[test]
    fn negative_and_substochastic_entries_reported() {
        let fam = KernelFamily::powers(Mat::from_row_slice(2, 2, &[1.2, -0.2, 0.0, 0.9]), vec![0.5, 0.5]).unwrap();
        let r = validate_kernel_family(&SymSemigroup::integers(), &fam).unwrap();
        assert!(!r.positivity.passed);
        assert!(!r.markov.passed);
    }

    #[test]
    fn missing_element_and_mismatch_errors() {
        let z2 = SymSemigroup::finite(FiniteGroup::cyclic(2), vec![0, 1], &[0, 1]).unwrap();
        let mut t = BTreeMap::new();
        t.insert(0, Mat::identity(2, 2));
        let fam = KernelFamily::table(t, vec![0.5, 0.5]).unwrap();
        assert_eq!(validate_kernel_family(&z2, &fam), Err(Error::MissingElement(1)));
        assert!(KernelFamily::powers(Mat::identity(3, 3), vec![1.0]).is_err());
    }

    #[test]
    fn unit_automorphism_on_swap_family() {
        let z2 = SymSemigroup::finite(FiniteGroup::cyclic(2), vec![0, 1], &[0, 1]).unwrap();
        let mut t = BTreeMap::new();
        t.insert(0, Mat::identity(2, 2));
        t.insert(1, Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let fam = KernelFamily::table(t, vec![0.5, 0.5]).unwrap();
        let r = validate_kernel_family(&z2, &fam).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.unit_automorphism.max_deviation < 1e-15);
    }

    #[test]
    fn doubly_stochastic_examples() {
        let k = doubly_stochastic_example(2, &[(vec![0, 1], 0.7), (vec![1, 0], 0.3)]).unwrap();
        assert!(max_abs_diff(k.matrix(), &Mat::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7])) < 1e-15);
        let id = doubly_stochastic_example(3, &[(vec![0, 1, 2], 1.0)]).unwrap();
        assert_eq!(id.matrix(), &Mat::identity(3, 3));
        let avg = doubly_stochastic_example(3, &uniform_permutation_weights(3)).unwrap();
        assert!(max_abs_diff(avg.matrix(), &Mat::from_element(3, 3, 1.0 / 3.0)) < 1e-15);
        assert!(doubly_stochastic_example(2, &[(vec![0, 1], 0.5)]).is_err());
        assert!(doubly_stochastic_example(2, &[(vec![0, 0], 1.0)]).is_err());
    }

    #[test]
    fn doubly_stochastic_symmetry_criterion() {
        let cyc = vec![1, 2, 0];
        let cyc_inv = vec![2, 0, 1];
        let asym = vec![(vec![0, 1, 2], 0.5), (cyc.clone(), 0.5)];
        let sym = vec![(vec![0, 1, 2], 0.5), (cyc, 0.25), (cyc_inv, 0.25)];
        for (w, expect) in [(asym, false), (sym, true)] {
            let k = doubly_stochastic_example(3, &w).unwrap();
            assert_eq!(is_inverse_symmetric(&w), expect);
            assert_eq!(k.is_nu_symmetric(), expect);
        }
    }

    #[test]
    fn l2_picture_of_two_state_chain() {
        let ps = PsStructure::from_kernel_family(&two_state(), &[0, 1, 2]).unwrap();
        let r = check_ps_structure(&ps, &SymSemigroup::integers(), 3, 0, 1).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!(r.vacuum.max_deviation < 1e-15);
        assert!(r.min_correlation >= 0.0);
        assert!(r.is_cyclic);
    }

    #[test]
    fn identity_operators_give_nonnegative_correlations() {
        let mut ops = BTreeMap::new();
        ops.insert(0, Mat::identity(3, 3));
        ops.insert(1, Mat::identity(3, 3));
        let omega = Vector::from_vec(vec![0.6, 0.0, 0.8]);
        let ps = PsStructure::new(ops, Mat::identity(3, 3), omega).unwrap();
        let r = check_ps_structure(&ps, &SymSemigroup::integers(), 5, 200, 3).unwrap();
        assert!(r.passed());
        assert_eq!(r.sampled_trials, 200);
        assert!(!r.is_cyclic);
        assert_eq!(r.cyclic_dim, 2);
    }

    #[test]
    fn sign_flipping_contraction_fails_correlation_positivity() {
        // Projector onto span{1, (1,-1,0)}: fixes the vacuum, has norm 1 and
        // a negative off-diagonal entry.
        let o = Vector::from_element(3, 1.0 / 3f64.sqrt());
        let u = Vector::from_vec(vec![1.0, -1.0, 0.0]) / 2f64.sqrt();
        let p = &o * o.transpose() + &u * u.transpose();
        let mut ops = BTreeMap::new();
        ops.insert(1, p);
        let ps = PsStructure::new(ops, Mat::identity(3, 3), o).unwrap();
        let r = check_ps_structure(&ps, &SymSemigroup::integers(), 3, 0, 0).unwrap();
        assert!(r.vacuum.passed && r.contraction.passed && r.adjoint.passed);
        assert!(!r.correlations_nonnegative);
        assert!((r.min_correlation + 1.0 / 18.0).abs() < 1e-15);
        assert!(r.correlation_witness.is_some());
    }

    #[test]
    fn index_enumeration() {
        let mut seen = Vec::new();
        for_each_index(2, 2, |i| seen.push(i.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let mut count = 0;
        for_each_index(3, 0, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn random_reversible_kernels_are_reversible() {
        for seed in 0..5 {
            let k = random_reversible_kernel(4, seed);
            assert!(k.is_nu_symmetric());
        }
    }
}
