//! Decision procedures around gaussian measures: nuclearity from
//! eigenvalue growth, Hilbert-Schmidt equivalence in the finite and atomic
//! cases, and fixed vectors of finite group representations.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{max_abs_diff, pinv_sqrt, psd_min_eig, range_projector, Mat};
use crate::symmetric::FiniteGroup;

pub type CMat = DMatrix<Complex64>;

/// Growth law of the eigenvalues beyond the explicit head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tail {
    /// Finitely many eigenvalues.
    NoTail,
    /// `lambda_n = c n^alpha` for every `n` past the head; `alpha = 0` is an
    /// eigenvalue of infinite multiplicity.
    Power { c: f64, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigSequence {
    pub head: Vec<f64>,
    pub tail: Tail,
}

impl EigSequence {
    pub fn new(head: Vec<f64>, tail: Tail) -> Result<Self> {
        if head.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Tail::Power { c, alpha } = tail {
            if !(c > 0.0 && c.is_finite() && alpha >= 0.0 && alpha.is_finite()) {
                return Err(Error::OutOfRange(format!("tail law c = {c}, alpha = {alpha}")));
            }
        }
        Ok(Self { head, tail })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Nuclearity {
    /// `(1 + A^2)^{-N}` is Hilbert-Schmidt for this minimal `N`;
    /// `head_sum` is `sum (1 + lambda^2)^{-2N}` over the head.
    Nuclear { n: u32, head_sum: f64 },
    NotNuclear,
}

/// Smallest `N >= 1` with `sum_n (1 + lambda_n^2)^{-2N} < infinity`.
///
/// For `lambda_n ~ c n^alpha` the terms decay like `n^{-4 N alpha}`, so the
/// series converges iff `4 N alpha > 1`.
pub fn hs_nuclearity(seq: &EigSequence) -> Nuclearity {
    let n = match seq.tail {
        Tail::NoTail => 1,
        Tail::Power { alpha: 0.0, .. } => return Nuclearity::NotNuclear,
        Tail::Power { alpha, .. } => (1.0 / (4.0 * alpha)).floor() as u32 + 1,
    };
    let head_sum = seq.head.iter().map(|l| (1.0 + l * l).powi(-2 * n as i32)).sum();
    Nuclearity::Nuclear { n, head_sum }
}

/// Ratio law `delta_s = 1 + c s^{-beta}` for atoms `s` past the head
/// (atoms are numbered from 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioTail {
    pub c: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicPair {
    /// `(mu({s}), nu({s}))` for the explicit atoms `s = 1..=k`.
    pub atoms: Vec<(f64, f64)>,
    /// Whether the measures agree away from the atoms.
    pub off_atom_equal: bool,
    pub tail: Option<RatioTail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicVerdict {
    pub equivalent: bool,
    /// `sum |delta_s - 1|^2` over the explicit atoms.
    pub head_sum: f64,
    /// Convergence of the tail series, when there is a tail.
    pub tail_converges: Option<bool>,
    /// `0 < inf delta <= sup delta < infinity`.
    pub bounded: bool,
    pub reason: String,
}

/// Equivalence of measures that agree off a countable set of atoms:
/// `sum |mu({s})/nu({s}) - 1|^2 < infinity` with the ratios bounded away
/// from zero and infinity.
pub fn gaussian_equiv_atomic(pair: &AtomicPair) -> Result<AtomicVerdict> {
    for (s, &(m, n)) in pair.atoms.iter().enumerate() {
        if !(m > 0.0 && n > 0.0 && m.is_finite() && n.is_finite()) {
            return Err(Error::NonPositiveWeight(format!("atom {}: ({m}, {n})", s + 1)));
        }
    }
    let head_sum = pair.atoms.iter().map(|(m, n)| (m / n - 1.0).powi(2)).sum();
    if !pair.off_atom_equal {
        return Ok(AtomicVerdict {
            equivalent: false,
            head_sum,
            tail_converges: None,
            bounded: true,
            reason: "measures differ away from the atoms".into(),
        });
    }
    let (tail_converges, tail_bounded) = match pair.tail {
        None => (None, true),
        Some(RatioTail { c, beta }) => {
            if !(c.is_finite() && beta.is_finite()) {
                return Err(Error::NonFinite);
            }
            let first = (pair.atoms.len() + 1) as f64;
            let converges = c == 0.0 || 2.0 * beta > 1.0;
            // |c s^{-beta}| is largest at the first tail atom when beta >= 0.
            let bounded = c == 0.0 || (beta >= 0.0 && 1.0 + c * first.powf(-beta) > 0.0);
            (Some(converges), bounded)
        }
    };
    let bounded = tail_bounded;
    let equivalent = bounded && tail_converges.unwrap_or(true);
    let reason = if !bounded {
        "density ratio not bounded away from 0 and infinity".into()
    } else if tail_converges == Some(false) {
        "sum |delta_s - 1|^2 diverges".into()
    } else {
        "sum |delta_s - 1|^2 converges".into()
    };
    Ok(AtomicVerdict {
        equivalent,
        head_sum,
        tail_converges,
        bounded,
        reason,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteVerdict {
    pub equivalent: bool,
    /// `||P_range(K) - P_range(Q)||` (max entry).
    pub range_gap: f64,
    /// `||K^{-1/2} Q K^{-1/2} - 1||_HS` on the common range.
    pub hs_distance: Option<f64>,
}

/// Tolerance for comparing range projectors.
pub const RANGE_TOL: f64 = 1e-8;

/// Equivalence of centered gaussians with covariances `k` and `q` on `R^n`.
pub fn gaussian_equiv_finite(k: &Mat, q: &Mat) -> Result<FiniteVerdict> {
    for m in [k, q] {
        let r = psd_min_eig(m)?;
        if !r.is_psd {
            return Err(Error::NotPsd { min_eig: r.min_eig });
        }
    }
    if k.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch {
            expected: k.nrows(),
            found: q.nrows(),
        });
    }
    let tol = |m: &Mat| 1e-10 * m.amax().max(1.0);
    let pk = range_projector(k, tol(k));
    let pq = range_projector(q, tol(q));
    let range_gap = max_abs_diff(&pk, &pq);
    if range_gap > RANGE_TOL {
        return Ok(FiniteVerdict {
            equivalent: false,
            range_gap,
            hs_distance: None,
        });
    }
    let isqrt = pinv_sqrt(k, tol(k));
    let t = &isqrt * q * &isqrt;
    Ok(FiniteVerdict {
        equivalent: true,
        range_gap,
        hs_distance: Some((t - pk).norm()),
    })
}

/// A unitary representation of a finite group on `C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRep {
    group: FiniteGroup,
    matrices: Vec<CMat>,
}

pub const REP_TOL: f64 = 1e-10;

fn cmax_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

impl FiniteRep {
    pub fn new(group: FiniteGroup, matrices: Vec<CMat>) -> Result<Self> {
        if matrices.len() != group.order() {
            return Err(Error::InvalidRepresentation(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let n = matrices[0].nrows();
        for (g, m) in matrices.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidRepresentation(format!("matrix {g} has the wrong shape")));
            }
            let dev = cmax_diff(&(m.adjoint() * m), &CMat::identity(n, n));
            if dev > REP_TOL {
                return Err(Error::InvalidRepresentation(format!("matrix {g} is not unitary ({dev:e})")));
            }
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let dev = cmax_diff(&(&matrices[a] * &matrices[b]), &matrices[group.mul(a, b)]);
                if dev > REP_TOL {
                    return Err(Error::InvalidRepresentation(format!(
                        "homomorphism fails on ({a}, {b}) by {dev:e}"
                    )));
                }
            }
        }
        Ok(Self { group, matrices })
    }

    pub fn from_real(group: FiniteGroup, matrices: Vec<Mat>) -> Result<Self> {
        let m = matrices.iter().map(|m| m.map(|x| Complex64::new(x, 0.0))).collect();
        Self::new(group, m)
    }

    /// Left regular representation: `g` sends `e_h` to `e_{gh}`.
    pub fn regular(group: FiniteGroup) -> Self {
        let n = group.order();
        let matrices = (0..n)
            .map(|g| {
                let mut m = CMat::zeros(n, n);
                for h in 0..n {
                    m[(group.mul(g, h), h)] = Complex64::new(1.0, 0.0);
                }
                m
            })
            .collect();
        Self { group, matrices }
    }

    pub fn trivial(group: FiniteGroup, dim: usize) -> Self {
        let matrices = vec![CMat::identity(dim, dim); group.order()];
        Self { group, matrices }
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn matrix(&self, g: usize) -> &CMat {
        &self.matrices[g]
    }

    pub fn character(&self) -> Vec<Complex64> {
        self.matrices.iter().map(|m| m.trace()).collect()
    }

    fn average(&self, f: impl Fn(&CMat) -> CMat) -> CMat {
        let n = self.group.order() as f64;
        let mut acc = f(&self.matrices[0]);
        for m in &self.matrices[1..] {
            acc += f(m);
        }
        acc / Complex64::new(n, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepAnalysis {
    pub dim: usize,
    /// Dimension of the `G`-fixed vectors.
    pub fixed_dim: usize,
    /// Multiplicities of the irreducible constituents, ascending.
    pub multiplicities: Vec<usize>,
    /// Dimensions of the isotypic components, in the same order.
    pub isotypic_dims: Vec<usize>,
    /// Fixed vectors of `H ⊗ H̄` through the averaging projector.
    pub pair_fixed_dim: usize,
    /// The same dimension as `sum m_i^2`.
    pub pair_fixed_from_multiplicities: usize,
    pub paths_agree: bool,
    /// No nonzero fixed vectors in `H ⊗ H̄`; for finite groups only `H = 0`.
    pub weakly_mixing: bool,
    pub has_invariant_subspace: bool,
}

fn round_count(x: f64) -> Result<usize> {
    let r = x.round();
    if (x - r).abs() > 1e-6 || r < 0.0 {
        return Err(Error::InvalidRepresentation(format!("non-integral dimension {x}")));
    }
    Ok(r as usize)
}

/// Fixed space, isotypic multiplicities and the fixed space of `H ⊗ H̄`.
pub fn rep_analysis(rep: &FiniteRep) -> Result<RepAnalysis> {
    let n = rep.dim();
    let order = rep.group.order() as f64;
    if n == 0 {
        return Ok(RepAnalysis {
            dim: 0,
            fixed_dim: 0,
            multiplicities: vec![],
            isotypic_dims: vec![],
            pair_fixed_dim: 0,
            pair_fixed_from_multiplicities: 0,
            paths_agree: true,
            weakly_mixing: true,
            has_invariant_subspace: false,
        });
    }
    let fixed_dim = round_count(rep.average(|m| m.clone()).trace().re)?;

    // A generic hermitian element of the centre separates the isotypic
    // components, including complex-conjugate pairs.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut h = CMat::zeros(n, n);
    for class in rep.group.conjugacy_classes() {
        let mut c = CMat::zeros(n, n);
        for &g in &class {
            c += &rep.matrices[g];
        }
        let a = Complex64::new(rng.random::<f64>() - 0.5, 0.0);
        let b = Complex64::new(0.0, rng.random::<f64>() - 0.5);
        h += (&c + c.adjoint()) * a + (&c - c.adjoint()) * b;
    }
    let eig = SymmetricEigen::new(h);
    let mut order_idx: Vec<usize> = (0..n).collect();
    order_idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let scale = eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order_idx {
        match clusters.last_mut() {
            Some(cl) if (eig.eigenvalues[i] - eig.eigenvalues[*cl.last().unwrap()]).abs() <= 1e-6 * scale => cl.push(i),
            _ => clusters.push(vec![i]),
        }
    }
    let mut parts = Vec::new();
    for cl in &clusters {
        let v = eig.eigenvectors.select_columns(cl.iter());
        let p = &v * v.adjoint();
        let chi: Vec<Complex64> = rep.matrices.iter().map(|m| (&p * m).trace()).collect();
        let norm2 = chi.iter().map(|c| c.norm_sqr()).sum::<f64>() / order;
        let m = round_count(norm2.sqrt())?;
        parts.push((m, cl.len()));
    }
    parts.sort();
    let multiplicities: Vec<usize> = parts.iter().map(|p| p.0).collect();
    let isotypic_dims = parts.iter().map(|p| p.1).collect();

    let pair = rep.average(|m| m.kronecker(&m.conjugate()));
    let pair_fixed_dim = round_count(pair.trace().re)?;
    let pair_fixed_from_multiplicities = multiplicities.iter().map(|m| m * m).sum();
    Ok(RepAnalysis {
        dim: n,
        fixed_dim,
        multiplicities,
        isotypic_dims,
        pair_fixed_dim,
        pair_fixed_from_multiplicities,
        paths_agree: pair_fixed_dim == pair_fixed_from_multiplicities,
        weakly_mixing: pair_fixed_dim == 0,
        has_invariant_subspace: true,
    })
}

/// A rotation angle `2 pi p / q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Angle {
    pub p: i64,
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VacuumSearch {
    /// Characters searched, as signed angles.
    pub characters: Vec<Angle>,
    /// Smallest `n` for which some product of `n` characters is trivial.
    pub degree: Option<usize>,
    /// Multiplicity of each character in that product.
    pub witness: Option<Vec<usize>>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Smallest degree `n <= bound` at which the symmetric power of the
/// representation with characters `e^{i theta_j}` (and their conjugates
/// when `include_conjugates`) contains a fixed vector.
pub fn fock_vacuum_search(angles: &[Angle], include_conjugates: bool, bound: usize) -> Result<VacuumSearch> {
    if bound == 0 {
        return Err(Error::OutOfRange("degree bound must be at least 1".into()));
    }
    let mut characters = Vec::new();
    for a in angles {
        if a.q <= 0 {
            return Err(Error::OutOfRange(format!("angle denominator {}", a.q)));
        }
        characters.push(*a);
        if include_conjugates {
            characters.push(Angle { p: -a.p, q: a.q });
        }
    }
    if characters.is_empty() {
        return Ok(VacuumSearch {
            characters,
            degree: None,
            witness: None,
        });
    }
    let l = characters.iter().fold(1i64, |acc, a| acc / gcd(acc, a.q) * a.q);
    if l > 1_000_000 {
        return Err(Error::OutOfRange(format!("common denominator {l} too large")));
    }
    let residues: Vec<usize> = characters
        .iter()
        .map(|a| (a.p * (l / a.q)).rem_euclid(l) as usize)
        .collect();
    let l = l as usize;
    // Witness per reachable residue at the current degree.
    let mut layer: Vec<Option<Vec<usize>>> = vec![None; l];
    layer[0] = Some(vec![0; characters.len()]);
    for n in 1..=bound {
        let mut next: Vec<Option<Vec<usize>>> = vec![None; l];
        for (r, w) in layer.iter().enumerate() {
            let Some(w) = w else { continue };
            for (j, &res) in residues.iter().enumerate() {
                let t = (r + res) % l;
                if next[t].is_none() {
                    let mut m = w.clone();
                    m[j] += 1;
                    next[t] = Some(m);
                }
            }
        }
        if let Some(w) = &next[0] {
            return Ok(VacuumSearch {
                characters,
                degree: Some(n),
                witness: Some(w.clone()),
            });
        }
        layer = next;
    }
    Ok(VacuumSearch {
        characters,
        degree: None,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nuclearity_examples() {
        let lin = EigSequence::new(vec![], Tail::Power { c: 1.0, alpha: 1.0 }).unwrap();
        assert!(matches!(hs_nuclearity(&lin), Nuclearity::Nuclear { n: 1, .. }));
        let flat = EigSequence::new(vec![1.0], Tail::Power { c: 2.0, alpha: 0.0 }).unwrap();
        assert_eq!(hs_nuclearity(&flat), Nuclearity::NotNuclear);
        let fin = EigSequence::new(vec![0.0, 1.0], Tail::NoTail).unwrap();
        assert_eq!(hs_nuclearity(&fin), Nuclearity::Nuclear { n: 1, head_sum: 1.25 });
        let slow = EigSequence::new(vec![], Tail::Power { c: 1.0, alpha: 0.25 }).unwrap();
        assert!(matches!(hs_nuclearity(&slow), Nuclearity::Nuclear { n: 2, .. }));
        let slower = EigSequence::new(vec![], Tail::Power { c: 1.0, alpha: 0.1 }).unwrap();
        assert!(matches!(hs_nuclearity(&slower), Nuclearity::Nuclear { n: 3, .. }));
        assert!(EigSequence::new(vec![], Tail::Power { c: 0.0, alpha: 1.0 }).is_err());
    }

    #[test]
    fn atomic_examples() {
        let same = AtomicPair {
            atoms: vec![(0.3, 0.3), (0.2, 0.2)],
            off_atom_equal: true,
            tail: None,
        };
        let v = gaussian_equiv_atomic(&same).unwrap();
        assert!(v.equivalent && v.head_sum == 0.0);
        let series = |beta| AtomicPair {
            atoms: vec![],
            off_atom_equal: true,
            tail: Some(RatioTail { c: 1.0, beta }),
        };
        assert!(gaussian_equiv_atomic(&series(1.0)).unwrap().equivalent);
        assert!(!gaussian_equiv_atomic(&series(0.5)).unwrap().equivalent);
        assert!(gaussian_equiv_atomic(&series(2.0)).unwrap().equivalent);
        let vanishing = AtomicPair {
            atoms: vec![],
            off_atom_equal: true,
            tail: Some(RatioTail { c: -1.0, beta: 1.0 }),
        };
        assert!(!gaussian_equiv_atomic(&vanishing).unwrap().bounded);
        let bad = AtomicPair {
            atoms: vec![(0.0, 1.0)],
            off_atom_equal: true,
            tail: None,
        };
        assert!(matches!(gaussian_equiv_atomic(&bad), Err(Error::NonPositiveWeight(_))));
    }

    #[test]
    fn finite_examples() {
        let i2 = Mat::identity(2, 2);
        let v = gaussian_equiv_finite(&i2, &i2).unwrap();
        assert!(v.equivalent && v.hs_distance.unwrap() < 1e-15);
        let half = Mat::from_diagonal(&crate::numerics::Vector::from_vec(vec![1.0, 0.0]));
        assert!(!gaussian_equiv_finite(&i2, &half).unwrap().equivalent);
        assert!(!gaussian_equiv_finite(&half, &i2).unwrap().equivalent);
        let q = Mat::from_diagonal(&crate::numerics::Vector::from_vec(vec![4.0, 0.25]));
        let v = gaussian_equiv_finite(&i2, &q).unwrap();
        assert!((v.hs_distance.unwrap() - (9.0f64 + 9.0 / 16.0).sqrt()).abs() < 1e-14);
        let neg = Mat::from_diagonal(&crate::numerics::Vector::from_vec(vec![1.0, -1.0]));
        assert!(matches!(gaussian_equiv_finite(&i2, &neg), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn regular_s3() {
        let r = rep_analysis(&FiniteRep::regular(FiniteGroup::symmetric(3))).unwrap();
        assert_eq!(r.multiplicities, vec![1, 1, 2]);
        assert_eq!(r.isotypic_dims, vec![1, 1, 4]);
        assert_eq!(r.pair_fixed_dim, 6);
        assert!(r.paths_agree && !r.weakly_mixing);
        assert_eq!(r.fixed_dim, 1);
    }

    #[test]
    fn regular_z3_separates_conjugate_characters() {
        let r = rep_analysis(&FiniteRep::regular(FiniteGroup::cyclic(3))).unwrap();
        assert_eq!(r.multiplicities, vec![1, 1, 1]);
        assert_eq!(r.pair_fixed_dim, 3);
    }

    #[test]
    fn trivial_and_zero_reps() {
        let r = rep_analysis(&FiniteRep::trivial(FiniteGroup::cyclic(2), 1)).unwrap();
        assert_eq!((r.fixed_dim, r.pair_fixed_dim), (1, 1));
        let z = rep_analysis(&FiniteRep::trivial(FiniteGroup::cyclic(2), 0)).unwrap();
        assert!(z.weakly_mixing && !z.has_invariant_subspace);
    }

    #[test]
    fn rejects_non_homomorphisms() {
        let g = FiniteGroup::cyclic(2);
        let m = vec![Mat::identity(1, 1), Mat::from_element(1, 1, 1.0)];
        assert!(FiniteRep::from_real(g.clone(), m).is_ok());
        let bad = vec![Mat::from_element(1, 1, -1.0), Mat::from_element(1, 1, 1.0)];
        assert!(FiniteRep::from_real(g, bad).is_err());
    }

    #[test]
    fn vacuum_search_examples() {
        let third = [Angle { p: 1, q: 3 }];
        assert_eq!(fock_vacuum_search(&third, false, 10).unwrap().degree, Some(3));
        let half = [Angle { p: 1, q: 2 }];
        assert_eq!(fock_vacuum_search(&half, false, 10).unwrap().degree, Some(2));
        let r = fock_vacuum_search(&[Angle { p: 2, q: 7 }], true, 10).unwrap();
        assert_eq!(r.degree, Some(2));
        assert_eq!(r.witness, Some(vec![1, 1]));
        assert_eq!(fock_vacuum_search(&[Angle { p: 1, q: 5 }], false, 4).unwrap().degree, None);
    }
}
