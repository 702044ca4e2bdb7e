//! Finite-window joint laws of a path-valued process.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of tensor entries a window may hold.
pub const MAX_WINDOW_ENTRIES: usize = 1_000_000;

/// Joint probabilities of `(X_{t_1}, ..., X_{t_n})` over `states^n` tuples,
/// stored row-major with the first time label varying slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderWindow {
    times: Vec<i64>,
    states: usize,
    probs: Vec<f64>,
}

/// Number of tensor entries for `n` times over `states` states, checked
/// against [`MAX_WINDOW_ENTRIES`].
pub fn window_entries(states: usize, n: usize) -> Result<usize> {
    let entries = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(states));
    match entries {
        Some(e) if e <= MAX_WINDOW_ENTRIES => Ok(e),
        other => Err(Error::WindowTooLarge {
            entries: other.unwrap_or(usize::MAX),
            cap: MAX_WINDOW_ENTRIES,
        }),
    }
}

pub fn check_sorted(times: &[i64]) -> Result<()> {
    if times.windows(2).all(|w| w[0] < w[1]) {
        Ok(())
    } else {
        Err(Error::UnsortedTimes)
    }
}

impl CylinderWindow {
    pub fn new(times: Vec<i64>, states: usize, probs: Vec<f64>) -> Result<Self> {
        check_sorted(&times)?;
        let entries = window_entries(states, times.len())?;
        if probs.len() != entries {
            return Err(Error::DimensionMismatch {
                expected: entries,
                found: probs.len(),
            });
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::NotADistribution("negative or non-finite mass".into()));
        }
        Ok(Self { times, states, probs })
    }

    /// Builds a window by evaluating `mass` on every tuple.
    pub fn from_fn(times: Vec<i64>, states: usize, mut mass: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_sorted(&times)?;
        let entries = window_entries(states, times.len())?;
        let n = times.len();
        let mut probs = Vec::with_capacity(entries);
        let mut tuple = vec![0usize; n];
        for idx in 0..entries {
            decode(idx, states, &mut tuple);
            probs.push(mass(&tuple));
        }
        Self::new(times, states, probs)
    }

    pub fn times(&self) -> &[i64] {
        &self.times
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn index_of(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.times.len());
        tuple.iter().fold(0, |acc, &s| acc * self.states + s)
    }

    pub fn tuple_of(&self, index: usize) -> Vec<usize> {
        let mut t = vec![0; self.times.len()];
        decode(index, self.states, &mut t);
        t
    }

    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.probs[self.index_of(tuple)]
    }

    /// Iterates `(tuple, mass)` in lexicographic tuple order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.tuple_of(i), p))
    }

    /// Marginal on the given subset of time labels.
    pub fn marginal(&self, keep: &[i64]) -> Result<Self> {
        check_sorted(keep)?;
        let axes: Vec<usize> = keep
            .iter()
            .map(|t| {
                self.times
                    .iter()
                    .position(|s| s == t)
                    .ok_or(Error::InvalidElement(*t))
            })
            .collect::<Result<_>>()?;
        let entries = window_entries(self.states, keep.len())?;
        let mut probs = vec![0.0; entries];
        let mut tuple = vec![0usize; self.times.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            decode(idx, self.states, &mut tuple);
            let target = axes.iter().fold(0, |acc, &a| acc * self.states + tuple[a]);
            probs[target] += p;
        }
        Self::new(keep.to_vec(), self.states, probs)
    }

    /// Sums out one time label.
    pub fn marginalize(&self, time: i64) -> Result<Self> {
        let keep: Vec<i64> = self.times.iter().copied().filter(|&t| t != time).collect();
        if keep.len() == self.times.len() {
            return Err(Error::InvalidElement(time));
        }
        self.marginal(&keep)
    }

    /// The image under time reflection `t -> -t`: times are negated and
    /// reversed, tuples reversed accordingly.
    pub fn reflected(&self) -> Self {
        let times: Vec<i64> = self.times.iter().rev().map(|t| -t).collect();
        let mut probs = vec![0.0; self.probs.len()];
        let mut tuple = vec![0usize; self.times.len()];
        for (idx, &p) in self.probs.iter().enumerate() {
            decode(idx, self.states, &mut tuple);
            let target = tuple.iter().rev().fold(0, |acc, &s| acc * self.states + s);
            probs[target] = p;
        }
        Self {
            times,
            states: self.states,
            probs,
        }
    }

    /// The same tensor relabelled with times shifted by `shift`.
    pub fn shifted(&self, shift: i64) -> Self {
        Self {
            times: self.times.iter().map(|t| t + shift).collect(),
            states: self.states,
            probs: self.probs.clone(),
        }
    }

    /// Largest entrywise difference; `None` if the shapes or labels differ.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        if self.times != other.times || self.states != other.states {
            return None;
        }
        Some(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Largest entrywise difference ignoring time labels.
    pub fn max_abs_diff_unlabelled(&self, other: &Self) -> Option<f64> {
        if self.probs.len() != other.probs.len() || self.states != other.states {
            return None;
        }
        Some(
            self.probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Total-variation distance `1/2 sum |p - q|` between tensors of the same shape.
    pub fn tv_distance(&self, other: &Self) -> Option<f64> {
        if self.probs.len() != other.probs.len() {
            return None;
        }
        Some(
            0.5 * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>(),
        )
    }
}

pub(crate) fn decode(mut idx: usize, states: usize, tuple: &mut [usize]) {
    for slot in tuple.iter_mut().rev() {
        *slot = idx % states;
        idx /= states;
    }
}
