//! Osterwalder-Schrader quantization of finite-dimensional reflection
//! positive spaces.
//!
//! Everything is computed in orthonormal coordinates of `E+`. For a real
//! unitary involution `theta` and an orthonormal basis `B` of `E+`, the form
//! `<theta u, v>` on `E+` is the Gram matrix `G = B^T theta B`. A subspace
//! `E0 ⊆ E+` fixed by `theta` is carried by its coordinates `C = B^T B0`,
//! and the Markov identity `E+ E0 E- = E+ E-` becomes `C C^T = G`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{max_abs_diff, op_norm, psd_min_eig, sym_eigen, symmetrize, Mat, Subspace, Vector};
use crate::symmetric::SymSemigroup;

/// Tolerance for structural identities (involution, invariance, Markov).
pub const OS_IDENTITY_TOL: f64 = 1e-10;
/// Eigenvalues of the Gram matrix at or below `RANK_REL_TOL * max(1, ||G||)`
/// span the null space.
pub const RANK_REL_TOL: f64 = 1e-10;
/// Eigenvalues between this and the rank tolerance are flagged as borderline.
pub const BORDERLINE_REL_TOL: f64 = 1e-12;

/// A reflection positive candidate `(E, E+, theta)` with optional `E0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RpSpace {
    theta: Mat,
    e_plus: Subspace,
    e_zero: Option<Subspace>,
}

impl RpSpace {
    pub fn new(theta: Mat, e_plus: Subspace, e_zero: Option<Subspace>) -> Result<Self> {
        let n = theta.nrows();
        if theta.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: theta.ncols(),
            });
        }
        if e_plus.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: e_plus.ambient_dim(),
            });
        }
        let id = Mat::identity(n, n);
        let inv_dev = max_abs_diff(&(&theta * &theta), &id);
        let unit_dev = max_abs_diff(&(theta.transpose() * &theta), &id);
        if inv_dev > OS_IDENTITY_TOL || unit_dev > OS_IDENTITY_TOL {
            return Err(Error::InvalidSubspace(format!(
                "theta is not a unitary involution (deviations {inv_dev:e}, {unit_dev:e})"
            )));
        }
        if let Some(e0) = &e_zero {
            if e0.ambient_dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: e0.ambient_dim(),
                });
            }
            for v in e0.basis().column_iter() {
                let v = v.into_owned();
                if e_plus.residual(&v) > OS_IDENTITY_TOL {
                    return Err(Error::InvalidSubspace("E0 is not contained in E+".into()));
                }
                if (&theta * &v - &v).amax() > OS_IDENTITY_TOL {
                    return Err(Error::InvalidSubspace("theta does not fix E0 pointwise".into()));
                }
            }
        }
        Ok(Self { theta, e_plus, e_zero })
    }

    pub fn theta(&self) -> &Mat {
        &self.theta
    }

    pub fn e_plus(&self) -> &Subspace {
        &self.e_plus
    }

    pub fn e_zero(&self) -> Option<&Subspace> {
        self.e_zero.as_ref()
    }

    pub fn with_e_zero(&self, e_zero: Option<Subspace>) -> Result<Self> {
        Self::new(self.theta.clone(), self.e_plus.clone(), e_zero)
    }

    /// The reflection form and `E0` in orthonormal `E+` coordinates.
    pub fn reflection_gram(&self) -> ReflectionGram {
        let b = self.e_plus.basis();
        let gram = symmetrize(&(b.transpose() * &self.theta * b));
        let e_zero = self.e_zero.as_ref().map(|e0| b.transpose() * e0.basis());
        ReflectionGram { gram, e_zero }
    }

    /// Coordinates of an ambient vector of `E+` in the `E+` basis, or an
    /// error if it leaves `E+`.
    pub fn plus_coordinates(&self, v: &Vector) -> Result<Vector> {
        let r = self.e_plus.residual(v);
        if r > OS_IDENTITY_TOL * v.norm().max(1.0) {
            return Err(Error::SubspaceNotInvariant { residual: r });
        }
        Ok(self.e_plus.basis().transpose() * v)
    }

    /// Restriction of an ambient operator to `E+`, in `E+` coordinates.
    pub fn restrict(&self, t: &Mat) -> Result<Mat> {
        let b = self.e_plus.basis();
        let tb = t * b;
        let a = b.transpose() * &tb;
        let residual = op_norm(&(tb - b * &a));
        if residual > OS_IDENTITY_TOL * op_norm(t).max(1.0) {
            return Err(Error::SubspaceNotInvariant { residual });
        }
        Ok(a)
    }
}

/// The form `<theta u, v>` on `E+` and optional `E0`, in orthonormal `E+`
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionGram {
    gram: Mat,
    e_zero: Option<Mat>,
}

impl ReflectionGram {
    pub fn new(gram: Mat, e_zero: Option<Mat>) -> Result<Self> {
        let k = gram.nrows();
        if gram.ncols() != k {
            return Err(Error::NotSquare {
                rows: k,
                cols: gram.ncols(),
            });
        }
        if let Some(c) = &e_zero {
            if c.nrows() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: c.nrows(),
                });
            }
            Subspace::from_orthonormal(c.clone())?;
        }
        Ok(Self {
            gram: symmetrize(&gram),
            e_zero,
        })
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn e_zero(&self) -> Option<&Mat> {
        self.e_zero.as_ref()
    }

    pub fn plus_dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn with_e_zero(&self, e_zero: Option<Mat>) -> Result<Self> {
        Self::new(self.gram.clone(), e_zero)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RpCheck {
    pub is_rp: bool,
    pub min_eig: f64,
}

/// Reflection positivity: the Gram matrix of `<theta u, v>` on `E+` is PSD.
pub fn check_reflection_positive(rg: &ReflectionGram) -> Result<RpCheck> {
    let r = psd_min_eig(&rg.gram)?;
    Ok(RpCheck {
        is_rp: r.is_psd,
        min_eig: r.min_eig,
    })
}

/// The quotient `E+ / N` with its completion `Ê`, realized in the
/// eigenbasis of the Gram matrix on the orthogonal complement of `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OsQuotient {
    gram: Mat,
    null: Subspace,
    /// `hat_dim x dim E+`; `||q v||^2 = <theta v, v>`.
    q: Mat,
    /// Right inverse of `q`: `q q_pinv = I`.
    q_pinv: Mat,
    /// Eigenvectors of the Gram matrix with eigenvalue 1: the `theta`-fixed part of E+.
    fixed: Subspace,
    borderline: usize,
    rank_tol: f64,
}

/// Builds the quotient map `q: E+ -> Ê`.
pub fn os_quotient(rg: &ReflectionGram) -> Result<OsQuotient> {
    let check = check_reflection_positive(rg)?;
    if !check.is_rp {
        return Err(Error::NotReflectionPositive { min_eig: check.min_eig });
    }
    let g = &rg.gram;
    let k = g.nrows();
    let (values, vectors) = sym_eigen(g);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let rank_tol = RANK_REL_TOL * scale;
    let kept: Vec<usize> = (0..k).filter(|&i| values[i] > rank_tol).collect();
    let dropped: Vec<usize> = (0..k).filter(|&i| values[i] <= rank_tol).collect();
    let borderline = (0..k)
        .filter(|&i| values[i] > BORDERLINE_REL_TOL * scale && values[i] <= rank_tol)
        .count();
    let v_kept = vectors.select_columns(kept.iter());
    let sqrt = Vector::from_iterator(kept.len(), kept.iter().map(|&i| values[i].sqrt()));
    let q = Mat::from_diagonal(&sqrt) * v_kept.transpose();
    let q_pinv = &v_kept * Mat::from_diagonal(&sqrt.map(|s| 1.0 / s));
    let null = Subspace::from_orthonormal(vectors.select_columns(dropped.iter()))?;
    let fixed_idx: Vec<usize> = (0..k)
        .filter(|&i| (values[i] - 1.0).abs() <= FIXED_EIG_TOL)
        .collect();
    let fixed = Subspace::from_orthonormal(vectors.select_columns(fixed_idx.iter()))?;
    Ok(OsQuotient {
        gram: g.clone(),
        null,
        q,
        q_pinv,
        fixed,
        borderline,
        rank_tol,
    })
}

/// Gram eigenvalues within this of 1 belong to `theta`-fixed vectors.
pub const FIXED_EIG_TOL: f64 = 1e-9;

impl OsQuotient {
    pub fn hat_dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    pub fn null(&self) -> &Subspace {
        &self.null
    }

    pub fn q(&self) -> &Mat {
        &self.q
    }

    pub fn q_pinv(&self) -> &Mat {
        &self.q_pinv
    }

    /// The `theta`-fixed vectors of `E+`.
    pub fn fixed(&self) -> &Subspace {
        &self.fixed
    }

    /// Gram eigenvalues that were truncated although above `1e-12`.
    pub fn borderline(&self) -> usize {
        self.borderline
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        &self.q * v
    }

    /// `max |(qF)^T (qF) - I|` over the `theta`-fixed part `F`: q is isometric there.
    pub fn fixed_isometry_defect(&self) -> f64 {
        let qf = &self.q * self.fixed.basis();
        let d = qf.ncols();
        if d == 0 {
            return 0.0;
        }
        max_abs_diff(&(qf.transpose() * &qf), &Mat::identity(d, d))
    }

    /// The operator `T̂` on `Ê` with `T̂ q = q A`, for `A` acting on `E+`
    /// coordinates. Fails if `A` does not preserve the null space.
    pub fn hat(&self, a: &Mat) -> Result<Mat> {
        let k = self.gram.nrows();
        if a.nrows() != k || a.ncols() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                found: a.nrows().max(a.ncols()),
            });
        }
        if self.null.dim() > 0 {
            let leak = &self.q * a * self.null.basis();
            let residual = op_norm(&leak);
            let tol = 1e-9 * op_norm(a).max(1.0) * self.gram.amax().sqrt().max(1.0);
            if residual > tol {
                return Err(Error::NullSpaceNotInvariant { residual });
            }
        }
        Ok(&self.q * a * &self.q_pinv)
    }
}

/// What an operator represents, for the extra checks in [`hat_operator`].
#[derive(Debug, Clone, PartialEq)]
pub enum HatKind {
    /// `U_s` for a semigroup element; `tau_partner` is `U_{tau(s)}`, which
    /// must equal `theta U_s theta`. For unitary `U`, `U_{s#} = U_{tau(s)}^*`
    /// and `Û_{s#}` is compared with `Û_s^*`.
    SemigroupElement { tau_partner: Option<Mat> },
    /// Multiplication by a function with the given sup norm.
    Multiplication { sup_norm: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HatOperator {
    pub matrix: Mat,
    pub norm: f64,
    /// `||Û_{s#} - Û_s^*||` for semigroup elements with a partner.
    pub adjoint_defect: Option<f64>,
    /// `| ||M̂_f|| - ||f||_inf |` for multiplication operators.
    pub norm_defect: Option<f64>,
}

/// Passes an ambient operator mapping `E+` into itself to the quotient.
pub fn hat_operator(rp: &RpSpace, osq: &OsQuotient, t: &Mat, kind: HatKind) -> Result<HatOperator> {
    let a = rp.restrict(t)?;
    let matrix = osq.hat(&a)?;
    let norm = op_norm(&matrix);
    let mut adjoint_defect = None;
    let mut norm_defect = None;
    match kind {
        HatKind::SemigroupElement { tau_partner } => {
            if let Some(partner) = tau_partner {
                let conj = rp.theta() * t * rp.theta();
                let dev = max_abs_diff(&conj, &partner);
                if dev > OS_IDENTITY_TOL {
                    return Err(Error::InvalidSubspace(format!(
                        "theta U theta differs from the tau partner by {dev:e}"
                    )));
                }
                let sharp = partner.transpose();
                let sharp_hat = osq.hat(&rp.restrict(&sharp)?)?;
                adjoint_defect = Some(max_abs_diff(&sharp_hat, &matrix.transpose()));
            }
        }
        HatKind::Multiplication { sup_norm } => {
            norm_defect = Some((norm - sup_norm).abs());
        }
    }
    Ok(HatOperator {
        matrix,
        norm,
        adjoint_defect,
        norm_defect,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovReport {
    /// `||E+ E0 E- - E+ E-||`.
    pub defect: f64,
    pub holds: bool,
    pub e_zero_dim: usize,
    /// Dimension of the `theta`-fixed part of `E+` (only when reflection positive).
    pub fixed_dim: Option<usize>,
    /// `||P_{E0} - P_{fixed}||`.
    pub e_zero_vs_fixed: Option<f64>,
    /// `||P_N - (I - P_{E0})||`.
    pub null_vs_complement: Option<f64>,
    pub hat_dim: Option<usize>,
    /// `||Γ^T Γ - I||` and `hat_dim - dim E0` for `Γ = q|E0`.
    pub gamma_isometry_defect: Option<f64>,
    pub gamma_unitary: bool,
    /// Both sides of the equivalence "Markov iff q|E0 unitary" agree.
    pub equivalence_consistent: bool,
    pub witness: Option<String>,
}

/// Tests `E+ E0 E- = E+ E-` and its consequences: `E0` is the fixed part
/// of `E+`, `N` is the complement of `E0` in `E+`, and `q` maps `E0`
/// unitarily onto `Ê`.
pub fn check_markov_type(rg: &ReflectionGram) -> Result<MarkovReport> {
    let c = rg.e_zero().ok_or(Error::MarkovTypeRequired)?;
    let k = rg.plus_dim();
    let p0 = c * c.transpose();
    let defect = op_norm(&(&p0 - rg.gram()));
    let holds = defect <= OS_IDENTITY_TOL;
    let mut report = MarkovReport {
        defect,
        holds,
        e_zero_dim: c.ncols(),
        fixed_dim: None,
        e_zero_vs_fixed: None,
        null_vs_complement: None,
        hat_dim: None,
        gamma_isometry_defect: None,
        gamma_unitary: false,
        equivalence_consistent: false,
        witness: None,
    };
    match os_quotient(rg) {
        Ok(osq) => {
            let fixed = osq.fixed();
            report.fixed_dim = Some(fixed.dim());
            report.e_zero_vs_fixed = Some(op_norm(&(&p0 - fixed.projector())));
            report.null_vs_complement = Some(op_norm(
                &(osq.null().projector() - (Mat::identity(k, k) - &p0)),
            ));
            report.hat_dim = Some(osq.hat_dim());
            let gamma = osq.q() * c;
            let iso = if c.ncols() == 0 {
                0.0
            } else {
                max_abs_diff(&(gamma.transpose() * &gamma), &Mat::identity(c.ncols(), c.ncols()))
            };
            report.gamma_isometry_defect = Some(iso);
            report.gamma_unitary = iso <= OS_IDENTITY_TOL && osq.hat_dim() == c.ncols();
            if !holds {
                report.witness = Some(format!(
                    "dim E0 = {}, dim of the theta-fixed part = {}, dim Ê = {}",
                    c.ncols(),
                    fixed.dim(),
                    osq.hat_dim()
                ));
            }
        }
        Err(Error::NotReflectionPositive { min_eig }) => {
            report.witness = Some(format!("not reflection positive, min eigenvalue {min_eig:e}"));
        }
        Err(e) => return Err(e),
    }
    report.equivalence_consistent = report.holds == report.gamma_unitary;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplicativityReport {
    /// `max ||phi(st) - phi(s) phi(t)||` over sampled pairs.
    pub max_defect: f64,
    pub multiplicative: bool,
    pub witness: Option<(i64, i64)>,
    /// `max ||phi(s) - Γ^* Û_s Γ||`.
    pub dilation_defect: f64,
    pub dilation_holds: bool,
    pub markov_type: bool,
    /// Dimension of the image in `Ê` of the subspace generated by `E0`.
    pub generated_dim: usize,
    pub e_zero_cyclic: bool,
    /// `phi(s)` in the orthonormal `E0` basis, per sampled element.
    pub phi: BTreeMap<i64, Vec<Vec<f64>>>,
}

/// `phi(s) = E0 U_s E0` on the sampled elements of S, tested for
/// multiplicativity and against the dilation `Γ^* Û_s Γ`.
///
/// `rep` gives `U_s` restricted to `E+`, in `E+` coordinates.
pub fn expectation_multiplicativity(
    rg: &ReflectionGram,
    rep: &BTreeMap<i64, Mat>,
    sym: &SymSemigroup,
) -> Result<MultiplicativityReport> {
    let c = rg.e_zero().ok_or(Error::MarkovTypeRequired)?;
    let markov = check_markov_type(rg)?;
    let osq = os_quotient(rg)?;
    let gamma = osq.q() * c;

    let phi: BTreeMap<i64, Mat> = rep
        .iter()
        .filter(|(s, _)| sym.in_s(**s))
        .map(|(&s, a)| (s, c.transpose() * a * c))
        .collect();

    let mut max_defect = 0.0f64;
    let mut witness = None;
    for (&s, ps) in &phi {
        for (&t, pt) in &phi {
            let Some(pst) = phi.get(&sym.mul(s, t)) else { continue };
            let d = op_norm(&(pst - ps * pt));
            if d > OS_IDENTITY_TOL && witness.is_none() {
                witness = Some((s, t));
            }
            max_defect = max_defect.max(d);
        }
    }

    let mut dilation_defect = 0.0f64;
    let mut generated = Vec::new();
    for (&s, a) in rep.iter().filter(|(s, _)| sym.in_s(**s)) {
        let hat = osq.hat(a)?;
        dilation_defect = dilation_defect.max(op_norm(&(&phi[&s] - gamma.transpose() * hat * &gamma)));
        generated.push(osq.q() * a * c);
    }
    generated.push(gamma.clone());
    let cols: Vec<Vector> = generated
        .iter()
        .flat_map(|m| m.column_iter().map(|c| c.into_owned()).collect::<Vec<_>>())
        .collect();
    let generated_dim = if osq.hat_dim() == 0 {
        0
    } else {
        Subspace::span(&Mat::from_columns(&cols)).dim()
    };

    Ok(MultiplicativityReport {
        max_defect,
        multiplicative: witness.is_none(),
        witness,
        dilation_defect,
        dilation_holds: dilation_defect <= OS_IDENTITY_TOL,
        markov_type: markov.holds,
        generated_dim,
        e_zero_cyclic: generated_dim == osq.hat_dim(),
        phi: phi
            .into_iter()
            .map(|(s, m)| (s, m.row_iter().map(|r| r.iter().copied().collect()).collect()))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> Mat {
        Mat::from_column_slice(2, 1, &[a, b])
    }

    fn swap() -> Mat {
        Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn trivial_reflection_gives_identity_gram() {
        let rp = RpSpace::new(Mat::identity(3, 3), Subspace::full(3), None).unwrap();
        let rg = rp.reflection_gram();
        assert_eq!(rg.gram(), &Mat::identity(3, 3));
        let c = check_reflection_positive(&rg).unwrap();
        assert!(c.is_rp);
        let osq = os_quotient(&rg).unwrap();
        assert_eq!(osq.hat_dim(), 3);
        assert_eq!(osq.null().dim(), 0);
        assert!(max_abs_diff(&(osq.q().transpose() * osq.q()), &Mat::identity(3, 3)) < 1e-14);
        let hat = osq.hat(&Mat::identity(3, 3)).unwrap();
        assert!(max_abs_diff(&hat, &Mat::identity(3, 3)) < 1e-14);
    }

    #[test]
    fn tilted_line_under_diagonal_reflection() {
        let a: f64 = 0.5;
        let n = (1.0 + a * a).sqrt();
        let e_plus = Subspace::from_orthonormal(vec2(1.0 / n, a / n)).unwrap();
        let theta = Mat::from_diagonal(&Vector::from_vec(vec![1.0, -1.0]));
        let rg = RpSpace::new(theta, e_plus, None).unwrap().reflection_gram();
        assert!((rg.gram()[(0, 0)] - 0.6).abs() < 1e-15);
        assert!(check_reflection_positive(&rg).unwrap().is_rp);
    }

    #[test]
    fn antisymmetric_vector_is_negative() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let e_plus = Subspace::from_orthonormal(vec2(s, -s)).unwrap();
        let rg = RpSpace::new(swap(), e_plus, None).unwrap().reflection_gram();
        let c = check_reflection_positive(&rg).unwrap();
        assert!(!c.is_rp);
        assert!((c.min_eig + 1.0).abs() < 1e-15);
        assert!(matches!(os_quotient(&rg), Err(Error::NotReflectionPositive { .. })));
    }

    #[test]
    fn orthogonal_reflection_kills_everything() {
        let e_plus = Subspace::from_orthonormal(vec2(1.0, 0.0)).unwrap();
        let rg = RpSpace::new(swap(), e_plus, None).unwrap().reflection_gram();
        let osq = os_quotient(&rg).unwrap();
        assert_eq!(osq.hat_dim(), 0);
        assert_eq!(osq.null().dim(), 1);
    }

    #[test]
    fn rank_one_gram() {
        let rg = ReflectionGram::new(Mat::from_element(2, 2, 1.0), None).unwrap();
        let osq = os_quotient(&rg).unwrap();
        assert_eq!(osq.hat_dim(), 1);
        let n = osq.null().basis().column(0);
        assert!((n[0] + n[1]).abs() < 1e-14);
        assert!((n[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((osq.q() * osq.null().basis()).amax() < 1e-14);
    }

    #[test]
    fn borderline_eigenvalues_are_flagged() {
        let g = Mat::from_diagonal(&Vector::from_vec(vec![1.0, 5e-11, 0.0]));
        let osq = os_quotient(&ReflectionGram::new(g, None).unwrap()).unwrap();
        assert_eq!(osq.hat_dim(), 1);
        assert_eq!(osq.borderline(), 1);
    }

    #[test]
    fn hat_rejects_operators_leaving_subspaces() {
        // E+ = span{e1}, theta = identity on R^2; t maps e1 to e2.
        let rp = RpSpace::new(Mat::identity(2, 2), Subspace::from_orthonormal(vec2(1.0, 0.0)).unwrap(), None).unwrap();
        let osq = os_quotient(&rp.reflection_gram()).unwrap();
        let t = Mat::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let r = hat_operator(&rp, &osq, &t, HatKind::SemigroupElement { tau_partner: None });
        assert!(matches!(r, Err(Error::SubspaceNotInvariant { .. })));

        // Gram [[1,0],[0,0]]: N = span{e2}; A moves e2 onto e1.
        let rg = ReflectionGram::new(Mat::from_diagonal(&Vector::from_vec(vec![1.0, 0.0])), None).unwrap();
        let osq = os_quotient(&rg).unwrap();
        let a = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(matches!(osq.hat(&a), Err(Error::NullSpaceNotInvariant { .. })));
    }

    #[test]
    fn multiplication_by_one_is_identity() {
        let rp = RpSpace::new(Mat::identity(2, 2), Subspace::full(2), None).unwrap();
        let osq = os_quotient(&rp.reflection_gram()).unwrap();
        let h = hat_operator(&rp, &osq, &Mat::identity(2, 2), HatKind::Multiplication { sup_norm: 1.0 }).unwrap();
        assert!(max_abs_diff(&h.matrix, &Mat::identity(2, 2)) < 1e-14);
        assert!(h.norm_defect.unwrap() < 1e-14);
    }

    #[test]
    fn trivial_markov_type() {
        let rp = RpSpace::new(Mat::identity(2, 2), Subspace::full(2), Some(Subspace::full(2))).unwrap();
        let r = check_markov_type(&rp.reflection_gram()).unwrap();
        assert!(r.holds && r.gamma_unitary && r.equivalence_consistent);
        assert_eq!(r.fixed_dim, Some(2));
        assert!(check_markov_type(&rp.with_e_zero(None).unwrap().reflection_gram()).is_err());
    }

    #[test]
    fn e_zero_must_be_fixed_and_inside() {
        let e_plus = Subspace::full(2);
        let e_zero = Subspace::from_orthonormal(vec2(1.0, 0.0)).unwrap();
        assert!(RpSpace::new(swap(), e_plus.clone(), Some(e_zero)).is_err());
        let e_plus_line = Subspace::from_orthonormal(vec2(1.0, 0.0)).unwrap();
        let e_zero_other = Subspace::from_orthonormal(vec2(0.0, 1.0)).unwrap();
        assert!(RpSpace::new(Mat::identity(2, 2), e_plus_line, Some(e_zero_other)).is_err());
        assert!(RpSpace::new(Mat::from_element(2, 2, 1.0), e_plus, None).is_err());
    }

    #[test]
    fn identity_element_is_idempotent() {
        let rp = RpSpace::new(Mat::identity(2, 2), Subspace::full(2), Some(Subspace::full(2))).unwrap();
        let mut rep = BTreeMap::new();
        rep.insert(0, Mat::identity(2, 2));
        let r = expectation_multiplicativity(&rp.reflection_gram(), &rep, &SymSemigroup::integers()).unwrap();
        assert!(r.multiplicative && r.dilation_holds && r.markov_type);
        let phi0 = &r.phi[&0];
        assert_eq!(phi0, &vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }
}
