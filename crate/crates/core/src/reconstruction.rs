//! Path-space measures rebuilt from kernel families, and the round trip
//! back through OS quantization.
//!
//! A model `(nu, P)` on `Z` determines the stationary Markov law
//! `mu(X_{t1} = i1, ..., X_{tn} = in) = nu_{i1} (P^{t2-t1})_{i1 i2} ...`.
//! Negative times use the reflected increments, which needs `nu`-symmetry.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numerics::{max_abs_diff, op_norm, Mat, Subspace, Vector};
use crate::os::{
    check_markov_type, check_reflection_positive, expectation_multiplicativity, os_quotient, MarkovReport,
    MultiplicativityReport, OsQuotient, ReflectionGram, RpCheck, RpSpace,
};
use crate::positive::{validate_kernel_family, IdentityCheck, KernelFamily, KernelFamilyReport};
use crate::symmetric::SymSemigroup;
use crate::window::{check_sorted, window_entries, CylinderWindow};

/// Tolerance for exact window identities, relative to the total mass.
pub const WINDOW_TOL: f64 = 1e-12;
/// Tolerance for the quantized round trip.
pub const ROUND_TRIP_TOL: f64 = 1e-10;

/// A validated kernel family together with its index semigroup.
#[derive(Debug, Clone, PartialEq)]
pub struct PathModel {
    sym: SymSemigroup,
    family: KernelFamily,
    report: KernelFamilyReport,
}

impl PathModel {
    /// Accepts families satisfying positivity, the Markov property, the
    /// semigroup law and the unit condition. `nu`-symmetry may fail; it is
    /// recorded and only needed for two-sided windows.
    pub fn new(sym: SymSemigroup, family: KernelFamily) -> Result<Self> {
        if let Some(i) = family.nu().iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::NonPositiveWeight(format!("nu[{i}] = {}", family.nu()[i])));
        }
        let report = validate_kernel_family(&sym, &family)?;
        let hard = [
            ("positivity", &report.positivity),
            ("markov", &report.markov),
            ("semigroup law", &report.semigroup_law),
            ("unit automorphism", &report.unit_automorphism),
        ];
        for (name, check) in hard {
            if !check.passed {
                return Err(Error::InvalidKernel(format!(
                    "{name} fails: {}",
                    check.witness.clone().unwrap_or_else(|| format!("deviation {:e}", check.max_deviation))
                )));
            }
        }
        Ok(Self { sym, family, report })
    }

    /// `(Z, N0)` model generated by powers of `p`.
    pub fn chain(p: Mat, nu: Vec<f64>) -> Result<Self> {
        Self::new(SymSemigroup::integers(), KernelFamily::powers(p, nu)?)
    }

    pub fn sym(&self) -> &SymSemigroup {
        &self.sym
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn report(&self) -> &KernelFamilyReport {
        &self.report
    }

    pub fn nu(&self) -> &[f64] {
        self.family.nu()
    }

    pub fn states(&self) -> usize {
        self.family.size()
    }

    /// Whether `D_nu P_s = P_{s#}^T D_nu` holds.
    pub fn is_symmetric(&self) -> bool {
        self.report.nu_involutive.passed
    }

    fn total_mass(&self) -> f64 {
        self.nu().iter().sum()
    }
}

/// Joint law of `(X_{t1}, ..., X_{tn})` for a `(Z, N0)` model.
pub fn window_measure(model: &PathModel, times: &[i64]) -> Result<CylinderWindow> {
    if !model.sym.is_integers() {
        return Err(Error::InvalidKernel(
            "integer windows need a (Z, N0) model; use chain_window_measure".into(),
        ));
    }
    check_sorted(times)?;
    if times.first().is_some_and(|&t| t < 0) && !model.is_symmetric() {
        return Err(Error::TwoSidedNeedsSymmetry);
    }
    window_entries(model.states(), times.len())?;
    let steps: Vec<Mat> = times
        .windows(2)
        .map(|w| model.family.kernel(w[1] - w[0]))
        .collect::<Result<_>>()?;
    let nu = model.nu().to_vec();
    let total = model.total_mass();
    CylinderWindow::from_fn(times.to_vec(), model.states(), |tuple| {
        path_mass(&nu, &steps, tuple, total)
    })
}

fn path_mass(nu: &[f64], steps: &[Mat], tuple: &[usize], total: f64) -> f64 {
    match tuple.first() {
        None => total,
        Some(&i0) => tuple
            .windows(2)
            .zip(steps)
            .fold(nu[i0], |acc, (w, p)| acc * p[(w[0], w[1])]),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowLawReport {
    pub times: Vec<i64>,
    /// Every sub-window equals the marginal of the full window.
    pub consistency: IdentityCheck,
    /// `window(times + shift) = window(times)`.
    pub stationarity: IdentityCheck,
    /// The window at reflected times equals the index-reversed window.
    pub reflection: IdentityCheck,
}

impl WindowLawReport {
    pub fn passed(&self) -> bool {
        self.consistency.passed && self.stationarity.passed && self.reflection.passed
    }
}

/// Kolmogorov consistency, stationarity and reflection invariance of the
/// model's windows at `times`.
pub fn check_window_laws(model: &PathModel, times: &[i64], shift: i64) -> Result<WindowLawReport> {
    let w = window_measure(model, times)?;
    let tol = WINDOW_TOL * model.total_mass().max(1.0);
    let n = times.len();

    let mut cons_max = 0.0f64;
    let mut cons_witness = None;
    for mask in 0..(1usize << n) {
        let keep: Vec<i64> = (0..n).filter(|k| mask >> k & 1 == 1).map(|k| times[k]).collect();
        let direct = window_measure(model, &keep)?;
        let d = w.marginal(&keep)?.max_abs_diff(&direct).expect("same labels");
        if d > tol && cons_witness.is_none() {
            cons_witness = Some(format!("sub-window {keep:?}"));
        }
        cons_max = cons_max.max(d);
    }

    let moved: Vec<i64> = times.iter().map(|t| t + shift).collect();
    let (stat_dev, stat_witness) = match window_measure(model, &moved) {
        Ok(ws) => {
            let d = ws.max_abs_diff_unlabelled(&w).expect("same shape");
            (d, (d > tol).then(|| worst_tuple(&ws, &w)))
        }
        Err(Error::TwoSidedNeedsSymmetry) => (f64::INFINITY, Some(format!("times {moved:?} need nu-symmetry"))),
        Err(e) => return Err(e),
    };

    // Reflected times shifted back so that they start where `times` does;
    // this keeps one-sided models one-sided.
    let offset = times.first().copied().unwrap_or(0) + times.last().copied().unwrap_or(0);
    let refl_times: Vec<i64> = times.iter().rev().map(|t| offset - t).collect();
    let direct = window_measure(model, &refl_times)?;
    let reversed = w.reflected();
    let refl_dev = direct.max_abs_diff_unlabelled(&reversed).expect("same shape");
    let refl_witness = (refl_dev > tol).then(|| worst_tuple(&direct, &reversed));

    Ok(WindowLawReport {
        times: times.to_vec(),
        consistency: check(cons_max, tol, cons_witness),
        stationarity: check(stat_dev, tol, stat_witness),
        reflection: check(refl_dev, tol, refl_witness),
    })
}

fn check(max_deviation: f64, tol: f64, witness: Option<String>) -> IdentityCheck {
    IdentityCheck {
        passed: max_deviation <= tol && witness.is_none(),
        max_deviation,
        witness,
    }
}

fn worst_tuple(a: &CylinderWindow, b: &CylinderWindow) -> String {
    let (idx, _) = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| (x - y).abs())
        .enumerate()
        .fold((0, -1.0), |best, (i, d)| if d > best.1 { (i, d) } else { best });
    format!("tuple {:?}: {} vs {}", a.tuple_of(idx), a.probs()[idx], b.probs()[idx])
}

/// The reflection positive data of a two-sided window `(-L, ..., L)`:
/// `E+` is spanned by normalized indicators of the nonnegative-time
/// coordinates, `E0` by those of `X_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRp {
    pub window: CylinderWindow,
    pub half_width: usize,
    /// Supported tuples `(y_0, ..., y_L)` indexing the `E+` basis.
    pub plus_tuples: Vec<Vec<usize>>,
    /// Their probabilities.
    pub plus_mass: Vec<f64>,
    pub gram: ReflectionGram,
}

fn half_width(times: &[i64]) -> Result<usize> {
    let l = times.last().copied().unwrap_or(-1);
    let expected: Vec<i64> = (-l..=l).collect();
    if l < 1 || times != expected.as_slice() {
        return Err(Error::WindowNotSymmetric);
    }
    Ok(l as usize)
}

/// Builds the reflection Gram matrix of a symmetric consecutive window.
pub fn window_reflection_gram(model: &PathModel, times: &[i64]) -> Result<WindowRp> {
    if !model.is_symmetric() {
        return Err(Error::TwoSidedNeedsSymmetry);
    }
    let l = half_width(times)?;
    let window = window_measure(model, times)?;
    let m = model.states();
    let plus_times: Vec<i64> = (0..=l as i64).collect();
    let plus = window.marginal(&plus_times)?;
    let scale = model.total_mass();
    let (plus_tuples, plus_mass): (Vec<Vec<usize>>, Vec<f64>) = plus
        .iter()
        .filter(|(_, p)| *p > 1e-300 * scale)
        .unzip();
    let k = plus_tuples.len();

    let mut x = vec![0usize; 2 * l + 1];
    let gram = Mat::from_fn(k, k, |a, b| {
        let (ya, yb) = (&plus_tuples[a], &plus_tuples[b]);
        if ya[0] != yb[0] {
            return 0.0;
        }
        for s in 0..=l {
            x[l - s] = ya[s];
            x[l + s] = yb[s];
        }
        window.get(&x) / (plus_mass[a] * plus_mass[b]).sqrt()
    });

    let nu0 = window.marginal(&[0])?;
    let c = Mat::from_fn(k, m, |a, i| {
        if plus_tuples[a][0] == i {
            (plus_mass[a] / nu0.probs()[i]).sqrt()
        } else {
            0.0
        }
    });
    let gram = ReflectionGram::new(gram, Some(c))?;
    Ok(WindowRp {
        window,
        half_width: l,
        plus_tuples,
        plus_mass,
        gram,
    })
}

impl WindowRp {
    /// The time shift `U_t` compressed to `E+`, in `E+` coordinates.
    ///
    /// For `t <= L` the compression is the conditional expectation onto the
    /// nonnegative window coordinates, read off the window itself. Larger
    /// shifts are powers of `U_1`.
    pub fn shift(&self, t: usize) -> Result<Mat> {
        let l = self.half_width;
        let k = self.plus_tuples.len();
        if t == 0 {
            return Ok(Mat::identity(k, k));
        }
        if t > l {
            return Ok(self.shift(1)?.pow(t as u32));
        }
        let prefix_times: Vec<i64> = (0..=(l - t) as i64).collect();
        let plus_times: Vec<i64> = (0..=l as i64).collect();
        let prefix = self.window.marginal(&plus_times)?.marginal(&prefix_times)?;
        let mut a = Mat::zeros(k, k);
        for (col, y) in self.plus_tuples.iter().enumerate() {
            let c = self.plus_mass[col] / prefix.get(&y[..=l - t]);
            for (row, yp) in self.plus_tuples.iter().enumerate() {
                if yp[t..] == y[..=l - t] {
                    a[(row, col)] = c * (self.plus_mass[row] / self.plus_mass[col]).sqrt();
                }
            }
        }
        Ok(a)
    }

    /// Multiplication by `f(X_0)` on `E+`.
    pub fn multiplication(&self, f: &[f64]) -> Mat {
        Mat::from_diagonal(&Vector::from_iterator(
            self.plus_tuples.len(),
            self.plus_tuples.iter().map(|y| f[y[0]]),
        ))
    }

    /// The same data on the ambient space `L^2(window)`, with `theta` the
    /// time reversal. Only practical for small windows.
    pub fn ambient(&self) -> Result<RpSpace> {
        let l = self.half_width;
        let support: Vec<usize> = (0..self.window.len()).filter(|&i| self.window.probs()[i] > 0.0).collect();
        let pos: BTreeMap<usize, usize> = support.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let n = support.len();
        let mut theta = Mat::zeros(n, n);
        for (a, &i) in support.iter().enumerate() {
            let mut t = self.window.tuple_of(i);
            t.reverse();
            let j = pos
                .get(&self.window.index_of(&t))
                .copied()
                .ok_or_else(|| Error::InvalidKernel("window is not reflection invariant".into()))?;
            theta[(j, a)] = 1.0;
        }
        let mut b = Mat::zeros(n, self.plus_tuples.len());
        for (a, &i) in support.iter().enumerate() {
            let x = self.window.tuple_of(i);
            if let Some(col) = self.plus_tuples.iter().position(|y| y[..] == x[l..]) {
                b[(a, col)] = (self.window.probs()[i] / self.plus_mass[col]).sqrt();
            }
        }
        let e_plus = Subspace::from_orthonormal(b.clone())?;
        let e_zero = match self.gram.e_zero() {
            Some(c) => Some(Subspace::from_orthonormal(&b * c)?),
            None => None,
        };
        RpSpace::new(theta, e_plus, e_zero)
    }
}

/// Everything recovered from one two-sided window.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrip {
    pub rp: RpCheck,
    pub quotient: OsQuotient,
    pub markov: MarkovReport,
    /// `Γ^* Û_t Γ` in the orthonormal basis `delta_i / sqrt(nu_i)` of `L^2(nu)`.
    pub recovered: BTreeMap<i64, Mat>,
    /// `max_t || Γ^* Û_t Γ - D^{1/2} P^t D^{-1/2} ||`.
    pub dilation_error: f64,
    pub multiplicativity: MultiplicativityReport,
}

impl RoundTrip {
    pub fn passed(&self) -> bool {
        self.rp.is_rp
            && self.markov.holds
            && self.markov.gamma_unitary
            && self.quotient.hat_dim() == self.markov.e_zero_dim
            && self.dilation_error <= ROUND_TRIP_TOL
            && self.multiplicativity.multiplicative
            && self.multiplicativity.dilation_holds
    }
}

/// Builds the window `(-L, ..., L)`, quantizes it, and compares the
/// recovered shifts `Û_t`, `t = 0..=max_shift`, with the model's powers.
pub fn rp_gram_and_quantize(model: &PathModel, times: &[i64], max_shift: usize) -> Result<(WindowRp, RoundTrip)> {
    let wrp = window_reflection_gram(model, times)?;
    let rg = &wrp.gram;
    let rp = check_reflection_positive(rg)?;
    let quotient = os_quotient(rg)?;
    let markov = check_markov_type(rg)?;
    let c = rg.e_zero().expect("window gram carries E0");
    let gamma = quotient.q() * c;

    let sqrt_nu: Vec<f64> = model.nu().iter().map(|w| w.sqrt()).collect();
    let m = model.states();
    let mut shifts = BTreeMap::new();
    let mut recovered = BTreeMap::new();
    let mut dilation_error = 0.0f64;
    for t in 0..=max_shift {
        let a = wrp.shift(t)?;
        let hat = quotient.hat(&a)?;
        let rec = gamma.transpose() * hat * &gamma;
        let p = model.family.kernel(t as i64)?;
        let oracle = Mat::from_fn(m, m, |i, j| sqrt_nu[i] * p[(i, j)] / sqrt_nu[j]);
        dilation_error = dilation_error.max(op_norm(&(&rec - oracle)));
        recovered.insert(t as i64, rec);
        shifts.insert(t as i64, a);
    }
    let multiplicativity = expectation_multiplicativity(rg, &shifts, &model.sym)?;
    Ok((
        wrp,
        RoundTrip {
            rp,
            quotient,
            markov,
            recovered,
            dilation_error,
            multiplicativity,
        },
    ))
}

/// A window indexed by a `≺_S`-chain of group elements.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainWindow {
    /// The chain in sorted order; axis `k` of the tensor belongs to `chain[k]`.
    pub chain: Vec<i64>,
    /// Tensor with positional time labels `0..n`.
    pub window: CylinderWindow,
    /// Largest deviation after re-enumerating tied elements (`g^{-1} h` a unit).
    pub enumeration_deviation: f64,
}

/// `mu(X_{g1} = i1, ..., X_{gn} = in) = nu_{i1} P_{g1^{-1} g2}(i1, i2) ...`
/// along the sorted chain.
pub fn chain_window_measure(model: &PathModel, elements: &[i64]) -> Result<ChainWindow> {
    let chain = model.sym.sort_chain(elements)?;
    let window = chain_tensor(model, &chain)?;
    let mut enumeration_deviation = 0.0f64;
    for k in 0..chain.len().saturating_sub(1) {
        let (g, h) = (chain[k], chain[k + 1]);
        if !model.sym.in_s(model.sym.mul(model.sym.inv(h), g)) {
            continue;
        }
        let mut swapped = chain.clone();
        swapped.swap(k, k + 1);
        let other = chain_tensor(model, &swapped)?;
        let mut perm = Vec::new();
        let back = CylinderWindow::from_fn(window.times().to_vec(), window.states(), |tuple| {
            perm.clear();
            perm.extend_from_slice(tuple);
            perm.swap(k, k + 1);
            other.get(&perm)
        })?;
        enumeration_deviation = enumeration_deviation.max(back.max_abs_diff(&window).expect("same labels"));
    }
    Ok(ChainWindow {
        chain,
        window,
        enumeration_deviation,
    })
}

fn chain_tensor(model: &PathModel, chain: &[i64]) -> Result<CylinderWindow> {
    window_entries(model.states(), chain.len())?;
    let sym = &model.sym;
    let steps: Vec<Mat> = chain
        .windows(2)
        .map(|w| model.family.kernel(sym.mul(sym.inv(w[0]), w[1])))
        .collect::<Result<_>>()?;
    let nu = model.nu().to_vec();
    let total = model.total_mass();
    let times: Vec<i64> = (0..chain.len() as i64).collect();
    CylinderWindow::from_fn(times, model.states(), |tuple| path_mass(&nu, &steps, tuple, total))
}

/// `max |U_s - D^{1/2} P_s D^{-1/2}|`-style comparison helper for callers
/// holding matrices in the `L^2(nu)` basis.
pub fn to_l2_basis(p: &Mat, nu: &[f64]) -> Mat {
    let m = nu.len();
    Mat::from_fn(m, m, |i, j| (nu[i] / nu[j]).sqrt() * p[(i, j)])
}

/// Deviation of a recovered family from the model's kernels in the `L^2(nu)` basis.
pub fn round_trip_deviation(model: &PathModel, recovered: &BTreeMap<i64, Mat>) -> Result<f64> {
    let mut d = 0.0f64;
    for (&t, rec) in recovered {
        let oracle = to_l2_basis(&model.family.kernel(t)?, model.nu());
        d = d.max(max_abs_diff(rec, &oracle));
    }
    Ok(d)
}
