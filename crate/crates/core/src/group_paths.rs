//! Convolution semigroups on finite groups and the laws of their paths.
//!
//! Measures act on the right: `(a * b)(x) = sum_g a(g) b(g^{-1} x)`, the
//! transition kernel of `mu` is `P(x, y) = mu(x^{-1} y)`, and a path is
//! `X_{t_{k+1}} = X_{t_k} g_k` with independent increments `g_k ~ mu_{t_{k+1} - t_k}`.
//! Times are integer ticks on a grid of step `dt`.

use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{mat_exp, max_abs_diff, Mat};
use crate::positive::IdentityCheck;
use crate::symmetric::FiniteGroup;
use crate::window::{check_sorted, decode, window_entries, CylinderWindow};

/// Tolerance for exact identities between measures and windows.
pub const MEASURE_TOL: f64 = 1e-12;
/// Paths simulated per random substream.
pub const SAMPLE_CHUNK: usize = 4096;

/// A finite measure on the elements of a group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMeasure {
    group: FiniteGroup,
    weights: Vec<f64>,
    probability: bool,
}

impl GroupMeasure {
    /// A probability measure; weights must sum to one.
    pub fn probability(group: FiniteGroup, weights: Vec<f64>) -> Result<Self> {
        let m = Self::positive(group, weights)?;
        let total: f64 = m.weights.iter().sum();
        if (total - 1.0).abs() > MEASURE_TOL {
            return Err(Error::NotADistribution(format!("total mass {total}")));
        }
        Ok(Self { probability: true, ..m })
    }

    /// A nonnegative measure of arbitrary total mass.
    pub fn positive(group: FiniteGroup, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::NotADistribution("negative or non-finite weight".into()));
        }
        Ok(Self {
            group,
            weights,
            probability: false,
        })
    }

    pub fn dirac(group: FiniteGroup, g: usize) -> Self {
        let mut weights = vec![0.0; group.order()];
        weights[g] = 1.0;
        Self {
            group,
            weights,
            probability: true,
        }
    }

    /// Normalized Haar measure.
    pub fn haar(group: FiniteGroup) -> Self {
        let n = group.order();
        Self {
            group,
            weights: vec![1.0 / n as f64; n],
            probability: true,
        }
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_probability(&self) -> bool {
        self.probability
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `mu*(g) = mu(g^{-1})`.
    pub fn star(&self) -> Self {
        let weights = (0..self.weights.len()).map(|g| self.weights[self.group.inv(g)]).collect();
        Self {
            weights,
            ..self.clone()
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        self.max_abs_diff(&self.star()) <= MEASURE_TOL
    }

    /// Kernel `P(x, y) = mu(x^{-1} y)` of `f -> f * mu`.
    pub fn kernel(&self) -> Mat {
        let n = self.weights.len();
        Mat::from_fn(n, n, |x, y| self.weights[self.group.mul(self.group.inv(x), y)])
    }
}

/// `(a * b)(x) = sum_g a(g) b(g^{-1} x)`.
pub fn convolve(a: &GroupMeasure, b: &GroupMeasure) -> Result<GroupMeasure> {
    if a.group != b.group {
        return Err(Error::GroupMismatch(a.group.order(), b.group.order()));
    }
    let g = &a.group;
    let n = g.order();
    let mut weights = vec![0.0; n];
    for (h, &wa) in a.weights.iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        for (k, &wb) in b.weights.iter().enumerate() {
            weights[g.mul(h, k)] += wa * wb;
        }
    }
    Ok(GroupMeasure {
        group: g.clone(),
        weights,
        probability: a.probability && b.probability,
    })
}

/// `(f * mu)(x) = sum_g f(x g) mu(g)`.
pub fn act(f: &[f64], mu: &GroupMeasure) -> Vec<f64> {
    let g = &mu.group;
    (0..g.order())
        .map(|x| (0..g.order()).map(|h| f[g.mul(x, h)] * mu.weights[h]).sum())
        .collect()
}

/// `mu_t = (1 + e^{-2t})/2 delta_e + (1 - e^{-2t})/2 delta_g` for an involution `g`.
pub fn poisson_semigroup(group: &FiniteGroup, g: usize, t: f64) -> Result<GroupMeasure> {
    check_involution(group, g)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange(format!("time {t}")));
    }
    let d = (-2.0 * t).exp();
    let mut weights = vec![0.0; group.order()];
    weights[group.identity()] += (1.0 + d) / 2.0;
    weights[g] += (1.0 - d) / 2.0;
    Ok(GroupMeasure {
        group: group.clone(),
        weights,
        probability: true,
    })
}

fn check_involution(group: &FiniteGroup, g: usize) -> Result<()> {
    if g >= group.order() {
        return Err(Error::InvalidElement(g as i64));
    }
    if group.mul(g, g) != group.identity() {
        return Err(Error::NotAnInvolution(g as i64));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Generator {
    /// Jumps by an involution at rate 1.
    Poisson(usize),
    /// `exp(t (R_mu - I)) delta_e` with `R_mu` the right convolution by `mu`.
    Exp(Mat),
}

/// `t -> mu_t` on the grid `t = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvSemigroup {
    group: FiniteGroup,
    generator: Generator,
    dt: f64,
}

impl ConvSemigroup {
    pub fn poisson(group: FiniteGroup, g: usize, dt: f64) -> Result<Self> {
        check_involution(&group, g)?;
        check_step(dt)?;
        Ok(Self {
            group,
            generator: Generator::Poisson(g),
            dt,
        })
    }

    /// The compound Poisson semigroup with jump law `base` and unit rate.
    pub fn exp(base: &GroupMeasure, dt: f64) -> Result<Self> {
        check_step(dt)?;
        if !base.probability {
            return Err(Error::NotADistribution("jump law must be a probability".into()));
        }
        let g = &base.group;
        let n = g.order();
        // (a * mu)(x) = sum_h a(h) mu(h^{-1} x): column h of R_mu is mu(h^{-1} .).
        let r = Mat::from_fn(n, n, |x, h| base.weights[g.mul(g.inv(h), x)]);
        Ok(Self {
            group: g.clone(),
            generator: Generator::Exp(r - Mat::identity(n, n)),
            dt,
        })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `mu_t` at a real time `t >= 0`.
    pub fn measure_at(&self, t: f64) -> Result<GroupMeasure> {
        match &self.generator {
            Generator::Poisson(g) => poisson_semigroup(&self.group, *g, t),
            Generator::Exp(a) => {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(Error::OutOfRange(format!("time {t}")));
                }
                let e = mat_exp(a, t)?;
                let id = self.group.identity();
                let weights = (0..self.group.order()).map(|x| e[(x, id)].max(0.0)).collect();
                Ok(GroupMeasure {
                    group: self.group.clone(),
                    weights,
                    probability: true,
                })
            }
        }
    }

    /// `mu_{k dt}`.
    pub fn measure(&self, ticks: i64) -> Result<GroupMeasure> {
        if ticks < 0 {
            return Err(Error::OutOfRange(format!("negative tick {ticks}")));
        }
        self.measure_at(ticks as f64 * self.dt)
    }

    /// `mu_s * mu_t = mu_{s+t}` for grid points `0..=max_ticks`.
    pub fn check_semigroup_law(&self, max_ticks: i64) -> Result<IdentityCheck> {
        let ms: Vec<GroupMeasure> = (0..=2 * max_ticks).map(|k| self.measure(k)).collect::<Result<_>>()?;
        let mut max = self.measure(0)?.max_abs_diff(&GroupMeasure::dirac(self.group.clone(), self.group.identity()));
        let mut witness = (max > MEASURE_TOL).then(|| "mu_0 != delta_e".to_string());
        for s in 0..=max_ticks as usize {
            for t in 0..=max_ticks as usize {
                let d = convolve(&ms[s], &ms[t])?.max_abs_diff(&ms[s + t]);
                if d > MEASURE_TOL && witness.is_none() {
                    witness = Some(format!("(s,t)=({s},{t}) ticks"));
                }
                max = max.max(d);
            }
        }
        Ok(IdentityCheck {
            passed: witness.is_none(),
            max_deviation: max,
            witness,
        })
    }

    /// `mu_t* = mu_t` for grid points `1..=max_ticks`.
    pub fn is_symmetric(&self, max_ticks: i64) -> Result<bool> {
        for k in 1..=max_ticks.max(1) {
            if !self.measure(k)?.is_symmetric() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn require_symmetric(&self, ticks: &[i64]) -> Result<()> {
        let span = ticks.iter().map(|t| t.abs()).max().unwrap_or(0);
        if self.is_symmetric(span.max(1))? {
            Ok(())
        } else {
            Err(Error::NotSymmetric)
        }
    }
}

fn check_step(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("grid step {dt}")))
    }
}

/// Increment laws between consecutive ticks.
fn increments(semi: &ConvSemigroup, ticks: &[i64]) -> Result<Vec<GroupMeasure>> {
    ticks.windows(2).map(|w| semi.measure(w[1] - w[0])).collect()
}

fn check_invariant(semi: &ConvSemigroup, nu: &GroupMeasure, incs: &[GroupMeasure]) -> Result<()> {
    if nu.group != semi.group {
        return Err(Error::GroupMismatch(nu.group.order(), semi.group.order()));
    }
    let tol = MEASURE_TOL * nu.total_mass().max(1.0);
    let mut probes = incs.to_vec();
    probes.push(semi.measure(1)?);
    for mu in &probes {
        let deviation = convolve(nu, mu)?.max_abs_diff(nu);
        if deviation > tol {
            return Err(Error::InvarianceViolated { deviation });
        }
    }
    Ok(())
}

/// Law of `(X_{t1}, ..., X_{tn})` with `X_{t1} ~ nu` and independent increments.
pub fn window_distribution(semi: &ConvSemigroup, nu: &GroupMeasure, ticks: &[i64]) -> Result<CylinderWindow> {
    check_sorted(ticks)?;
    window_entries(semi.group.order(), ticks.len())?;
    let incs = increments(semi, ticks)?;
    check_invariant(semi, nu, &incs)?;
    let g = &semi.group;
    CylinderWindow::from_fn(ticks.to_vec(), g.order(), |x| match x.first() {
        None => nu.total_mass(),
        Some(&x0) => x
            .windows(2)
            .zip(&incs)
            .fold(nu.weights[x0], |acc, (w, mu)| acc * mu.weights[g.mul(g.inv(w[0]), w[1])]),
    })
}

/// Two-sided law of the path pinned at `omega(0) = e`: the past is an
/// independent reflected copy of the future.
pub fn pinned_window(semi: &ConvSemigroup, ticks: &[i64]) -> Result<CylinderWindow> {
    check_sorted(ticks)?;
    let zero = ticks.iter().position(|&t| t == 0).ok_or(Error::MissingElement(0))?;
    window_entries(semi.group.order(), ticks.len())?;
    semi.require_symmetric(ticks)?;
    let g = &semi.group;
    let e = g.identity();
    // Steps outward from 0 on each side.
    let mut chain: Vec<(usize, usize, GroupMeasure)> = Vec::new();
    for k in zero + 1..ticks.len() {
        chain.push((k - 1, k, semi.measure(ticks[k] - ticks[k - 1])?));
    }
    for k in (0..zero).rev() {
        chain.push((k + 1, k, semi.measure(ticks[k + 1] - ticks[k])?));
    }
    CylinderWindow::from_fn(ticks.to_vec(), g.order(), |x| {
        if x[zero] != e {
            return 0.0;
        }
        chain
            .iter()
            .fold(1.0, |acc, (from, to, mu)| acc * mu.weights[g.mul(g.inv(x[*from]), x[*to])])
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowReport {
    pub shift: i64,
    /// Pushforward of the pinned law under `V_t` against the pinned law.
    pub flow_invariance: IdentityCheck,
    /// Pinned law at reflected times against the index-reversed window.
    pub theta_invariance: IdentityCheck,
    /// Number of paths where `theta V_t theta` and `V_{-t}` disagree.
    pub conjugation_mismatches: usize,
}

impl FlowReport {
    pub fn passed(&self) -> bool {
        self.flow_invariance.passed && self.theta_invariance.passed && self.conjugation_mismatches == 0
    }
}

/// `(V_t omega)(s) = omega(-t)^{-1} omega(s - t)` evaluated at `targets`.
pub fn flow(group: &FiniteGroup, path: &BTreeMap<i64, usize>, t: i64, targets: &[i64]) -> Result<Vec<usize>> {
    let at = |s: i64| path.get(&s).copied().ok_or(Error::MissingElement(s));
    let base = group.inv(at(-t)?);
    targets.iter().map(|&s| Ok(group.mul(base, at(s - t)?))).collect()
}

/// `(theta omega)(s) = omega(-s)`.
pub fn reflect(path: &BTreeMap<i64, usize>) -> BTreeMap<i64, usize> {
    path.iter().map(|(&s, &g)| (-s, g)).collect()
}

/// Checks that `V_t` preserves the pinned law on `ticks`, that the pinned
/// law is reflection invariant, and that `theta V_t theta = V_{-t}`.
pub fn check_flow_invariance(semi: &ConvSemigroup, ticks: &[i64], t: i64) -> Result<FlowReport> {
    let target = pinned_window(semi, ticks)?;
    let g = &semi.group;
    let n = g.order();

    let mut source_ticks: Vec<i64> = ticks.iter().map(|s| s - t).chain([-t, 0]).collect();
    source_ticks.sort_unstable();
    source_ticks.dedup();
    let source = pinned_window(semi, &source_ticks)?;
    let mut pushed = vec![0.0; target.len()];
    for (idx, &p) in source.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let path: BTreeMap<i64, usize> = source_ticks.iter().copied().zip(source.tuple_of(idx)).collect();
        let image = flow(g, &path, t, ticks)?;
        pushed[target.index_of(&image)] += p;
    }
    let pushed = CylinderWindow::new(ticks.to_vec(), n, pushed)?;
    let tol = MEASURE_TOL;
    let fd = pushed.max_abs_diff(&target).expect("same labels");
    let flow_invariance = IdentityCheck {
        passed: fd <= tol,
        max_deviation: fd,
        witness: (fd > tol).then(|| format!("shift {t} ticks on {ticks:?}")),
    };

    let refl_ticks: Vec<i64> = ticks.iter().rev().map(|s| -s).collect();
    let refl = pinned_window(semi, &refl_ticks)?;
    let td = refl.max_abs_diff(&target.reflected()).expect("same labels");
    let theta_invariance = IdentityCheck {
        passed: td <= tol,
        max_deviation: td,
        witness: (td > tol).then(|| format!("reflected times {refl_ticks:?}")),
    };

    // theta V_t theta and V_{-t} read omega at t and at s + t.
    let mut domain: Vec<i64> = ticks.iter().map(|s| s + t).chain([t]).collect();
    domain.sort_unstable();
    domain.dedup();
    let count = window_entries(n, domain.len())?;
    let mut tuple = vec![0usize; domain.len()];
    let mut conjugation_mismatches = 0;
    let reflected_targets: Vec<i64> = ticks.iter().map(|s| -s).collect();
    for idx in 0..count {
        decode(idx, n, &mut tuple);
        let path: BTreeMap<i64, usize> = domain.iter().copied().zip(tuple.iter().copied()).collect();
        let lhs = flow(g, &reflect(&path), t, &reflected_targets)?;
        let rhs = flow(g, &path, -t, ticks)?;
        if lhs != rhs {
            conjugation_mismatches += 1;
        }
    }

    Ok(FlowReport {
        shift: t,
        flow_invariance,
        theta_invariance,
        conjugation_mismatches,
    })
}

/// Compares the stationary law with `nu(x_0) * pinned(x_0^{-1} x)`.
pub fn factorization_check(semi: &ConvSemigroup, nu: &GroupMeasure, ticks: &[i64]) -> Result<IdentityCheck> {
    let full = window_distribution(semi, nu, ticks)?;
    let pinned = pinned_window(semi, ticks)?;
    let zero = ticks.iter().position(|&t| t == 0).ok_or(Error::MissingElement(0))?;
    let g = &semi.group;
    let mut shifted = Vec::with_capacity(ticks.len());
    let mut max = 0.0f64;
    let mut witness = None;
    for (x, p) in full.iter() {
        let q = g.inv(x[zero]);
        shifted.clear();
        shifted.extend(x.iter().map(|&xi| g.mul(q, xi)));
        let prod = nu.weights[x[zero]] * pinned.get(&shifted);
        let d = (prod - p).abs();
        if d > MEASURE_TOL && witness.is_none() {
            witness = Some(format!("tuple {x:?}"));
        }
        max = max.max(d);
    }
    Ok(IdentityCheck {
        passed: witness.is_none(),
        max_deviation: max,
        witness,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeynmanKacReport {
    /// `(f * mu_t)(x)`.
    pub convolution: f64,
    /// Path expectation of `f(x omega(t))` under the pinned law.
    pub path_average: f64,
    pub deviation: f64,
    pub passed: bool,
}

pub const FEYNMAN_KAC_TOL: f64 = 1e-14;

/// `(P_t f)(x) = E[f(x omega(t))]` with `omega` the pinned path.
pub fn feynman_kac_check(semi: &ConvSemigroup, f: &[f64], x: usize, ticks: i64) -> Result<FeynmanKacReport> {
    let g = &semi.group;
    if f.len() != g.order() {
        return Err(Error::DimensionMismatch {
            expected: g.order(),
            found: f.len(),
        });
    }
    if x >= g.order() {
        return Err(Error::InvalidElement(x as i64));
    }
    let mu = semi.measure(ticks)?;
    let convolution = act(f, &mu)[x];
    let (times, end) = if ticks == 0 { (vec![0], 0) } else { (vec![0, ticks], 1) };
    let pinned = pinned_window(semi, &times)?;
    let path_average = pinned.iter().map(|(w, p)| p * f[g.mul(x, w[end])]).sum::<f64>();
    let deviation = (convolution - path_average).abs();
    Ok(FeynmanKacReport {
        convolution,
        path_average,
        deviation,
        passed: deviation <= FEYNMAN_KAC_TOL * f.iter().fold(1.0f64, |m, v| m.max(v.abs())),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleReport {
    pub counts: Vec<u64>,
    pub empirical: CylinderWindow,
    pub exact: CylinderWindow,
    pub tv: f64,
    /// `3 sqrt(K / n)` with `K` the number of tuples.
    pub bound: f64,
    pub within_bound: bool,
}

/// Simulates `n` paths at `ticks` and compares the empirical law with the
/// exact window. Chunk `k` of [`SAMPLE_CHUNK`] paths uses ChaCha stream `k`
/// of `seed`, so the counts do not depend on the thread schedule.
pub fn sample_paths(semi: &ConvSemigroup, nu: &GroupMeasure, ticks: &[i64], n: usize, seed: u64) -> Result<SampleReport> {
    if n == 0 {
        return Err(Error::OutOfRange("at least one sample is needed".into()));
    }
    let exact = window_distribution(semi, nu, ticks)?;
    let g = &semi.group;
    let states = g.order();
    let initial = WeightedIndex::new(&nu.weights).map_err(|e| Error::NotADistribution(e.to_string()))?;
    let incs: Vec<WeightedIndex<f64>> = increments(semi, ticks)?
        .iter()
        .map(|m| WeightedIndex::new(&m.weights).map_err(|e| Error::NotADistribution(e.to_string())))
        .collect::<Result<_>>()?;
    let entries = exact.len();
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let counts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk as u64);
            let size = SAMPLE_CHUNK.min(n - chunk * SAMPLE_CHUNK);
            let mut local = vec![0u64; entries];
            for _ in 0..size {
                let mut x = initial.sample(&mut rng);
                let mut idx = x;
                for inc in &incs {
                    x = g.mul(x, inc.sample(&mut rng));
                    idx = idx * states + x;
                }
                local[idx] += 1;
            }
            local
        })
        .reduce(
            || vec![0u64; entries],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mass = nu.total_mass();
    let probs = counts.iter().map(|&c| mass * c as f64 / n as f64).collect();
    let empirical = CylinderWindow::new(ticks.to_vec(), states, probs)?;
    let tv = empirical.tv_distance(&exact).expect("same shape") / mass;
    let bound = 3.0 * (entries as f64 / n as f64).sqrt();
    Ok(SampleReport {
        counts,
        empirical,
        exact,
        tv,
        bound,
        within_bound: tv <= bound,
    })
}

/// `P = (mu(x^{-1} y))` is symmetric on `L^2(Haar)` exactly when `mu* = mu`.
pub fn kernel_is_symmetric(mu: &GroupMeasure) -> bool {
    let k = mu.kernel();
    max_abs_diff(&k, &k.transpose()) <= MEASURE_TOL
}
