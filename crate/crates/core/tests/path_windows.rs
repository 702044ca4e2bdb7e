use proptest::prelude::*;
use reflectpos::positive::random_reversible_kernel;
use reflectpos::reconstruction::{
    check_window_laws, rp_gram_and_quantize, window_measure, PathModel, ROUND_TRIP_TOL,
};
use reflectpos::{Error, Mat};

fn naive_power(p: &[Vec<f64>], t: u32) -> Vec<Vec<f64>> {
    let m = p.len();
    let mut acc: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..t {
        let mut next = vec![vec![0.0; m]; m];
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    next[i][j] += acc[i][k] * p[k][j];
                }
            }
        }
        acc = next;
    }
    acc
}

fn rows(p: &Mat) -> Vec<Vec<f64>> {
    (0..p.nrows()).map(|i| (0..p.ncols()).map(|j| p[(i, j)]).collect()).collect()
}

fn model(m: usize, seed: u64) -> (PathModel, Vec<Vec<f64>>, Vec<f64>) {
    let k = random_reversible_kernel(m, seed);
    let nu = k.space().nu().to_vec();
    let p = rows(k.matrix());
    (PathModel::chain(k.matrix().clone(), nu.clone()).unwrap(), p, nu)
}

#[test]
fn unsorted_times_are_rejected() {
    let (md, _, _) = model(3, 1);
    assert_eq!(window_measure(&md, &[0, 2, 1]).unwrap_err(), Error::UnsortedTimes);
}

#[test]
fn rotation_has_no_two_sided_window() {
    let p = Mat::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    let md = PathModel::chain(p, vec![1.0 / 3.0; 3]).unwrap();
    assert!(!md.is_symmetric());
    assert!(window_measure(&md, &[0, 1, 2]).is_ok());
    assert_eq!(window_measure(&md, &[-1, 0, 1]).unwrap_err(), Error::TwoSidedNeedsSymmetry);
    assert_eq!(rp_gram_and_quantize(&md, &[-1, 0, 1], 2).unwrap_err(), Error::TwoSidedNeedsSymmetry);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn window_matches_product_formula(
        m in 2usize..5,
        seed in any::<u64>(),
        start in -3i64..3,
        gaps in proptest::collection::vec(1u32..3, 1..4),
    ) {
        let (md, p, nu) = model(m, seed);
        let mut times = vec![start];
        for g in &gaps {
            times.push(times.last().unwrap() + *g as i64);
        }
        let w = window_measure(&md, &times).unwrap();
        let powers: Vec<Vec<Vec<f64>>> = gaps.iter().map(|&g| naive_power(&p, g)).collect();
        for (x, prob) in w.iter() {
            let mut expected = nu[x[0]];
            for (k, pk) in powers.iter().enumerate() {
                expected *= pk[x[k]][x[k + 1]];
            }
            prop_assert!((prob - expected).abs() <= 1e-13);
        }
    }

    #[test]
    fn reversible_windows_obey_the_laws(m in 2usize..5, seed in any::<u64>(), shift in -4i64..5) {
        let (md, _, _) = model(m, seed);
        let r = check_window_laws(&md, &[-2, 0, 1, 3], shift).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }

    #[test]
    fn round_trip_recovers_the_kernel(m in 2usize..5, seed in any::<u64>()) {
        let (md, p, nu) = model(m, seed);
        let (_, rt) = rp_gram_and_quantize(&md, &[-1, 0, 1], 3).unwrap();
        prop_assert!(rt.passed(), "{:?}", rt.dilation_error);
        for (&t, rec) in &rt.recovered {
            let pt = naive_power(&p, t as u32);
            for i in 0..m {
                for j in 0..m {
                    let expected = (nu[i] / nu[j]).sqrt() * pt[i][j];
                    prop_assert!((rec[(i, j)] - expected).abs() <= ROUND_TRIP_TOL);
                }
            }
        }
    }
}
