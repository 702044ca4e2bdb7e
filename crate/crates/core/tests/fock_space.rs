use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reflectpos::fock::{
    exp_kernel, exp_kernel_tail_bound, exp_vector, gamma, gauss_hermite, mehler, mehler_apply, FockOp, FockTrunc,
};
use reflectpos::numerics::op_norm;
use reflectpos::{Error, Mat, Vector};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn permanent(m: &Mat) -> f64 {
    permutations(m.nrows())
        .iter()
        .map(|s| s.iter().enumerate().map(|(i, &j)| m[(i, j)]).product::<f64>())
        .sum()
}

fn kron_power(a: &Mat, n: usize) -> Mat {
    (0..n).fold(Mat::identity(1, 1), |acc, _| acc.kronecker(a))
}

/// Symmetrization of `e_{i_1} ⊗ ... ⊗ e_{i_n}` in `(R^d)^{⊗n}`.
fn sym_tensor(d: usize, idx: &[usize]) -> Vector {
    let n = idx.len();
    let perms = permutations(n);
    let mut out = Vector::zeros(d.pow(n as u32));
    for p in &perms {
        let pos = p.iter().fold(0, |acc, &k| acc * d + idx[k]);
        out[pos] += 1.0;
    }
    out / perms.len() as f64
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `Γ(a)` on sector `n` from the full tensor power and explicit symmetrization.
fn brute_block(trunc: &FockTrunc, a: &Mat, n: usize) -> Mat {
    let d = trunc.base_dim();
    let basis: Vec<Vector> = trunc
        .sector(n)
        .iter()
        .map(|alpha| {
            let idx: Vec<usize> = alpha.iter().enumerate().flat_map(|(i, &m)| std::iter::repeat_n(i, m)).collect();
            let af: f64 = alpha.iter().map(|&m| fact(m)).product();
            sym_tensor(d, &idx) * (fact(n) / af).sqrt()
        })
        .collect();
    let t = kron_power(a, n);
    Mat::from_fn(basis.len(), basis.len(), |r, c| basis[r].dot(&(&t * &basis[c])))
}

fn random_contraction(rng: &mut ChaCha8Rng, d: usize) -> Mat {
    let a = Mat::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let n = op_norm(&a);
    a / n.max(1.0)
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn sector_sizes() {
    let t = FockTrunc::new(3, 4).unwrap();
    let sizes: Vec<usize> = (0..=4).map(|n| t.sector_dim(n)).collect();
    assert_eq!(sizes, vec![1, 3, 6, 10, 15]);
    assert_eq!(t.dim(), 35);
    assert!(FockTrunc::new(0, 2).is_err());
}

#[test]
fn expanding_operator_is_flagged() {
    let t = FockTrunc::new(2, 3).unwrap();
    let op = gamma(&t, &(Mat::identity(2, 2) * 1.5)).unwrap();
    assert!(matches!(op.warning(), Some(Error::NotAContraction { .. })));
    assert!(gamma(&t, &Mat::identity(2, 2)).unwrap().warning().is_none());
}

#[test]
fn gauss_hermite_moments() {
    let (x, w) = gauss_hermite(20).unwrap();
    let mut double_fact = 1.0;
    for k in 0..20 {
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * k)).sum();
        if k > 0 {
            double_fact *= (2 * k - 1) as f64;
        }
        assert!((m - double_fact).abs() <= 1e-9 * double_fact, "moment {k}");
    }
}

#[test]
fn mehler_on_square() {
    for &c in &[0.2, (-1.0f64).exp(), 0.9] {
        let got = mehler_apply(c, |z| z * z, 0.7, 16).unwrap();
        let want = c * c * 0.49 + 1.0 - c * c;
        assert!((got - want).abs() < 1e-12);
    }
    assert!(mehler(0.0, &[1.0], 4).is_err());
    assert!(mehler(0.5, &[1.0, 0.0, 0.0, 1.0], 4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gamma_matches_tensor_power(d in 1usize..4, n in 0usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trunc = FockTrunc::new(d, n).unwrap();
        let a = Mat::from_fn(d, d, |_, _| rng.random_range(-1.5..1.5));
        let op = gamma(&trunc, &a).unwrap();
        let brute = brute_block(&trunc, &a, n);
        let diff = (op.block(n) - &brute).amax();
        prop_assert!(diff <= 1e-10, "{diff}");
    }

    #[test]
    fn symmetric_products_follow_the_permanent(d in 1usize..4, n in 1usize..5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trunc = FockTrunc::new(d, n).unwrap();
        let vs: Vec<Vector> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
        let ws: Vec<Vector> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
        let gram = Mat::from_fn(n, n, |i, j| vs[i].dot(&ws[j]));
        let lhs = trunc.sym_product(&vs).unwrap().dot(&trunc.sym_product(&ws).unwrap());
        let rhs = permanent(&gram) / fact(n);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn second_quantization_is_a_functor(d in 1usize..4, nmax in 1usize..7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trunc = FockTrunc::new(d, nmax).unwrap();
        let a = random_contraction(&mut rng, d);
        let b = random_contraction(&mut rng, d);
        let ga = gamma(&trunc, &a).unwrap();
        let gb = gamma(&trunc, &b).unwrap();
        let gab = gamma(&trunc, &(&a * &b)).unwrap();
        prop_assert!(gab.max_abs_diff(&ga.compose(&gb).unwrap()) <= 1e-10);
        prop_assert!(gamma(&trunc, &a.transpose()).unwrap().max_abs_diff(&ga.adjoint()) <= 1e-10);
        prop_assert!(gamma(&trunc, &Mat::identity(d, d)).unwrap().max_abs_diff(&FockOp::identity(&trunc)) <= 1e-12);
        prop_assert!(ga.norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn exponential_vectors(d in 1usize..4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nmax = 6;
        let trunc = FockTrunc::new(d, nmax).unwrap();
        let v = random_vector(&mut rng, d);
        let w = random_vector(&mut rng, d);
        let ev = exp_vector(&trunc, &v).unwrap();
        let ew = exp_vector(&trunc, &w).unwrap();
        prop_assert!((ev.dot(&ew) - exp_kernel(&v, &w, nmax)).abs() <= 1e-12);
        prop_assert!((ev.dot(&ew) - v.dot(&w).exp()).abs() <= exp_kernel_tail_bound(&v, &w, nmax) + 1e-12);
        let a = random_contraction(&mut rng, d);
        let moved = gamma(&trunc, &a).unwrap().apply(&ev);
        prop_assert!((moved - exp_vector(&trunc, &(&a * &v)).unwrap()).amax() <= 1e-12);
        let p2 = trunc.power(&v, 2).unwrap().dot(&trunc.power(&w, 2).unwrap());
        prop_assert!((p2 - v.dot(&w).powi(2)).abs() <= 1e-12);
    }
}
