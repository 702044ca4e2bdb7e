//! Acceptance criteria 1-7. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use reflectpos::fock::{exp_kernel, exp_kernel_tail_bound, gamma, mehler, second_quantized_ps, FockTrunc};
use reflectpos::gaussian::{
    fock_vacuum_search, gaussian_equiv_atomic, gaussian_equiv_finite, hs_nuclearity, rep_analysis, Angle,
    AtomicPair, EigSequence, FiniteRep, Nuclearity, RatioTail, Tail,
};
use reflectpos::group_paths::{
    check_flow_invariance, convolve, poisson_semigroup, sample_paths, window_distribution, ConvSemigroup,
    GroupMeasure,
};
use reflectpos::numerics::{mat_exp, psd_min_eig};
use reflectpos::os::{check_markov_type, os_quotient, ReflectionGram};
use reflectpos::positive::{random_reversible_kernel, KernelFamily};
use reflectpos::reconstruction::{chain_window_measure, window_measure, PathModel};
use reflectpos::symmetric::{FiniteGroup, SymSemigroup};
use reflectpos::window::window_entries;
use reflectpos::{Error, Mat, Subspace, Vector};
use reflectpos_cli::{load_scenario, parse_scenario, run_scenario, CliError, Report, RunOptions, Status};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);
type ErrorCase = (&'static str, Option<Error>, fn(&Error) -> bool);

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn run_value(v: &Value) -> Result<Report, String> {
    let s = parse_scenario(&v.to_string()).map_err(|e| e.to_string())?;
    run_scenario(&s, &RunOptions::default()).map_err(|e| e.to_string())
}

fn run_shipped(name: &str) -> Result<Report, String> {
    let s = load_scenario(&scenario_path(name)).map_err(|e| e.to_string())?;
    run_scenario(&s, &RunOptions::default()).map_err(|e| e.to_string())
}

fn rows(m: &Mat) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Every listed check passes with the stated tolerance or a tighter one.
fn require(report: &Report, id: &str, tol: Option<f64>) -> Result<(), String> {
    let c = report.check(id).ok_or_else(|| format!("{}: no check {id}", report.scenario))?;
    if c.status != Status::Pass {
        return Err(format!("{}: {id} is {:?} ({:?})", report.scenario, c.status, c.witness));
    }
    if let Some(t) = tol {
        match c.tolerance {
            Some(used) if used <= t => {}
            other => return Err(format!("{id}: tolerance {other:?}, required {t:e}")),
        }
    }
    Ok(())
}

fn sorted_window(rng: &mut ChaCha8Rng) -> Vec<i64> {
    loop {
        let k = rng.random_range(2..=5);
        let mut t: Vec<i64> = (0..k).map(|_| rng.random_range(-4..=4)).collect();
        t.sort();
        t.dedup();
        if t.len() >= 2 && t[0] < 0 && *t.last().unwrap() > 0 {
            return t;
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..20u64 {
        let m = 2 + (k as usize % 5);
        let kernel = random_reversible_kernel(m, 1000 + k);
        let times = sorted_window(&mut rng);
        let half = 1 + (k as i64 % 2);
        let symmetric: Vec<i64> = (-half..=half).collect();
        let scenario = json!({
            "schema": 1,
            "name": format!("random_kernel_{k}"),
            "structures": {
                "z": { "type": "semigroup", "integers": true },
                "p": {
                    "type": "kernel-family", "semigroup": "z",
                    "generator": rows(kernel.matrix()), "nu": kernel.space().nu(),
                }
            },
            "suites": [
                { "suite": "kernel-axioms", "family": "p" },
                { "suite": "window-laws", "family": "p", "times": times, "shift": 1 + (k as i64 % 3) },
                { "suite": "reconstruction", "family": "p", "times": symmetric, "max_shift": 4 }
            ]
        });
        let r = run_value(&scenario)?;
        for id in ["window-laws/consistency", "window-laws/stationarity", "window-laws/reflection"] {
            require(&r, id, Some(1e-12))?;
        }
        for id in [
            "reconstruction/rp_min_eig",
            "reconstruction/markov_identity",
            "reconstruction/recovered_shifts",
            "reconstruction/multiplicativity",
        ] {
            require(&r, id, Some(1e-10))?;
        }
        require(&r, "reconstruction/gamma_unitary", Some(1e-10))?;
        if !r.passed() {
            return Err(format!("kernel {k}: {:?}", r.failures().map(|c| &c.id).collect::<Vec<_>>()));
        }
    }
    Ok("20 seeded reversible kernels, m = 2..6, two-sided windows".into())
}

fn group_paths_scenario(name: &str, group: Value, semigroup: Value, f: Vec<f64>) -> Value {
    let windows: [&[i64]; 4] = [&[-2, -1, 0, 1], &[0, 3], &[-3, 0, 2, 5], &[0]];
    let mut suites = Vec::new();
    for (i, w) in windows.iter().enumerate() {
        for fk in 1..=4 {
            suites.push(json!({
                "suite": "group-paths", "label": format!("w{i}_fk{fk}"), "semigroup": "s",
                "ticks": w, "shift": 1 + i as i64, "f": f, "fk_ticks": fk, "limit_time": 20.0,
            }));
        }
    }
    json!({
        "schema": 1, "name": name,
        "structures": { "g": group, "s": semigroup },
        "suites": suites,
    })
}

fn criterion_2() -> Outcome {
    let z2 = group_paths_scenario(
        "z2_poisson",
        json!({ "type": "group", "cyclic": 2 }),
        json!({ "type": "conv-semigroup", "group": "g", "poisson": 1, "dt": 0.5 }),
        vec![1.0, -0.25],
    );
    let klein = group_paths_scenario(
        "klein_exp",
        json!({ "type": "group", "klein_four": true }),
        json!({ "type": "conv-semigroup", "group": "g", "jump": [0.1, 0.5, 0.3, 0.1], "dt": 0.4 }),
        vec![0.3, -1.0, 0.75, 0.1],
    );
    for (scenario, poisson) in [(z2, true), (klein, false)] {
        let r = run_value(&scenario)?;
        for c in &r.checks {
            let name = c.id.rsplit('/').next().unwrap();
            let tol = match name {
                "flow_invariance" | "theta_invariance" | "factorization" | "semigroup_law" | "poisson_limit" => {
                    Some(1e-12)
                }
                "feynman_kac" => Some(1e-14),
                _ => None,
            };
            if name == "poisson_limit" && !poisson {
                if c.status != Status::Skip {
                    return Err(format!("{}: {} should be skipped", r.scenario, c.id));
                }
                continue;
            }
            require(&r, &c.id, tol)?;
        }
    }
    // The limit itself, against the closed form.
    let mu = poisson_semigroup(&FiniteGroup::cyclic(2), 1, 20.0).map_err(|e| e.to_string())?;
    let d = (mu.weights()[0] - 0.5).abs().max((mu.weights()[1] - 0.5).abs());
    if d > 1e-12 {
        return Err(format!("poisson limit deviates by {d:e}"));
    }
    Ok("Z/2 Poisson and Klein exp, windows of up to 4 times".into())
}

fn criterion_3() -> Outcome {
    let scenario = json!({
        "schema": 1, "name": "z2_sampling", "seed": 2024,
        "structures": {
            "z2": { "type": "group", "cyclic": 2 },
            "s": { "type": "conv-semigroup", "group": "z2", "poisson": 1, "dt": 0.5 }
        },
        "suites": [{ "suite": "sampling", "semigroup": "s", "ticks": [0, 1, 3], "samples": 100000 }]
    });
    let r = run_value(&scenario)?;
    require(&r, "sampling/tv_distance", Some(0.01))?;
    require(&r, "sampling/reproducible", None)?;
    let tv = r.check("sampling/tv_distance").unwrap().evidence["tv"];

    let semi = ConvSemigroup::poisson(FiniteGroup::cyclic(2), 1, 0.5).map_err(|e| e.to_string())?;
    let haar = GroupMeasure::haar(FiniteGroup::cyclic(2));
    let a = sample_paths(&semi, &haar, &[0, 1, 3], 100_000, 2024).map_err(|e| e.to_string())?;
    let b = sample_paths(&semi, &haar, &[0, 1, 3], 100_000, 2024).map_err(|e| e.to_string())?;
    let bitwise = a.counts == b.counts
        && a.empirical.probs().iter().zip(b.empirical.probs()).all(|(x, y)| x.to_bits() == y.to_bits());
    if !bitwise {
        return Err("empirical tensors differ under a fixed seed".into());
    }
    if a.tv > 0.01 {
        return Err(format!("TV {:e}", a.tv));
    }
    Ok(format!("10^5 paths, TV = {tv:.2e}, reproducible"))
}

fn criterion_4() -> Outcome {
    let mut suites = Vec::new();
    let mut structures = serde_json::Map::new();
    for d in 1..=3usize {
        for n in [3usize, 6] {
            let name = format!("d{d}_n{n}");
            structures.insert(name.clone(), json!({ "type": "fock", "d": d, "n_max": n }));
            suites.push(json!({ "suite": "fock-functor", "label": name, "fock": name, "pairs": 50 }));
        }
    }
    let scenario = json!({ "schema": 1, "name": "fock", "seed": 4, "structures": structures, "suites": suites });
    let r = run_value(&scenario)?;
    for c in &r.checks {
        let tol = match c.id.rsplit('/').next().unwrap() {
            "exp_tail" | "contraction" => None,
            _ => Some(1e-12),
        };
        require(&r, &c.id, tol)?;
    }
    // Tail bound of the truncated kernel, directly.
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..50 {
        let d = rng.random_range(1..=3);
        let v = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let w = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        let n = rng.random_range(0..=6);
        let gap = (v.dot(&w).exp() - exp_kernel(&v, &w, n)).abs();
        // Rounding in the partial sum and in exp is a few ulps of e^{|v||w|}.
        let rounding = 8.0 * f64::EPSILON * (v.norm() * w.norm()).exp();
        if gap > exp_kernel_tail_bound(&v, &w, n) + rounding {
            return Err(format!("tail bound violated at N = {n}"));
        }
    }
    Ok("50 seeded contraction pairs at d <= 3, N <= 6".into())
}

fn criterion_5() -> Outcome {
    let cs = [0.2, (-1.0f64).exp(), 0.9];
    let scenario = json!({
        "schema": 1, "name": "mehler",
        "structures": {},
        "suites": [{ "suite": "mehler", "c": cs, "degree": 8, "quad_order": 64 }]
    });
    let r = run_value(&scenario)?;
    require(&r, "mehler/quadrature", Some(1e-8))?;
    let worst = r.check("mehler/quadrature").unwrap().evidence["max_abs_deviation"];
    Ok(format!("64-point Gauss-Hermite, n <= 8, worst deviation {worst:.1e}"))
}

fn criterion_6() -> Outcome {
    let r = run_shipped("gaussian_analysis")?;
    if !r.passed() {
        return Err(format!("{:?}", r.failures().map(|c| &c.id).collect::<Vec<_>>()));
    }
    let linear = EigSequence::new(vec![], Tail::Power { c: 1.0, alpha: 1.0 }).map_err(|e| e.to_string())?;
    if !matches!(hs_nuclearity(&linear), Nuclearity::Nuclear { n: 1, .. }) {
        return Err("lambda_n = n is not N = 1".into());
    }
    for c in [0.5, 1.0, 7.0] {
        let bounded = EigSequence::new(vec![3.0], Tail::Power { c, alpha: 0.0 }).map_err(|e| e.to_string())?;
        if hs_nuclearity(&bounded) != Nuclearity::NotNuclear {
            return Err(format!("bounded tail c = {c} reported nuclear"));
        }
    }
    for beta in [0.5, 1.0, 2.0] {
        // Sum of n^{-2 beta} converges iff 2 beta > 1.
        let p_series_converges = 2.0 * beta > 1.0;
        let pair = AtomicPair {
            atoms: vec![(1.0, 1.0), (3.0, 2.0)],
            off_atom_equal: true,
            tail: Some(RatioTail { c: 1.0, beta }),
        };
        let v = gaussian_equiv_atomic(&pair).map_err(|e| e.to_string())?;
        if v.equivalent != p_series_converges {
            return Err(format!("beta {beta}: verdict {}", v.equivalent));
        }
    }
    let s3 = rep_analysis(&FiniteRep::regular(FiniteGroup::symmetric(3))).map_err(|e| e.to_string())?;
    if s3.multiplicities != [1, 1, 2] || s3.pair_fixed_dim != 6 || s3.pair_fixed_from_multiplicities != 6 {
        return Err(format!("S3 regular: {s3:?}"));
    }
    Ok("nuclearity, atomic p-series verdicts, S3 regular (1,1,2) and pair dimension 6".into())
}

fn errs<T: std::fmt::Debug>(r: Result<T, Error>) -> Option<Error> {
    r.err()
}

/// One trigger per error branch of the core modules.
fn error_table() -> Vec<(&'static str, bool)> {
    let z2 = FiniteGroup::cyclic(2);
    let z3 = FiniteGroup::cyclic(3);
    let swap = Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let rotation = Mat::from_row_slice(3, 3, &[0.2, 0.7, 0.1, 0.1, 0.2, 0.7, 0.7, 0.1, 0.2]);
    let third = vec![1.0 / 3.0; 3];
    let rot_model = PathModel::chain(rotation.clone(), third.clone()).unwrap();
    let flip = PathModel::chain(Mat::from_row_slice(2, 2, &[0.7, 0.3, 0.3, 0.7]), vec![0.5, 0.5]).unwrap();
    let trivial = SymSemigroup::finite(z2.clone(), vec![0, 1], &[0]).unwrap();
    let frozen = PathModel::new(
        trivial.clone(),
        KernelFamily::table(BTreeMap::from([(0, Mat::identity(2, 2))]), vec![0.5, 0.5]).unwrap(),
    )
    .unwrap();
    let negative = ReflectionGram::new(Mat::from_row_slice(1, 1, &[-1.0]), None).unwrap();
    let positive = ReflectionGram::new(Mat::identity(2, 2), None).unwrap();
    let rot3 = ConvSemigroup::exp(&GroupMeasure::probability(z3.clone(), vec![0.0, 1.0, 0.0]).unwrap(), 0.3).unwrap();
    let poisson = ConvSemigroup::poisson(z2.clone(), 1, 0.5).unwrap();
    let trunc = FockTrunc::new(2, 3).unwrap();

    let rp = reflectpos::os::RpSpace::new(
        swap.clone(),
        Subspace::span(&Mat::from_row_slice(2, 1, &[1.0, 1.0])),
        None,
    )
    .unwrap();
    let leak = {
        // E+ = {(x, Mx)} with M = diag(1, 0); N is spanned by (0, 1, 0, 0).
        let theta = Mat::from_fn(4, 4, |i, j| if (i + 2) % 4 == j { 1.0 } else { 0.0 });
        let e_plus = Mat::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
        reflectpos::os::RpSpace::new(theta, Subspace::span(&e_plus), None).unwrap()
    };
    let leak_q = os_quotient(&leak.reflection_gram()).unwrap();
    let b1 = Vector::from_column_slice(&[1.0, 0.0, 1.0, 0.0]) / 2f64.sqrt();
    let b2 = Vector::from_column_slice(&[0.0, 1.0, 0.0, 0.0]);
    let kernel_leak = &b1 * b2.transpose();
    let cyclic_shift = Mat::from_fn(4, 4, |i, j| if (j + 1) % 4 == i { 1.0 } else { 0.0 });

    let cases: Vec<ErrorCase> = vec![
        ("NotSquare", errs(psd_min_eig(&Mat::zeros(2, 3))), |e| matches!(e, Error::NotSquare { .. })),
        ("NonFinite", errs(psd_min_eig(&Mat::from_element(2, 2, f64::NAN))), |e| matches!(e, Error::NonFinite)),
        ("NotSquare (exp)", errs(mat_exp(&Mat::zeros(1, 2), 1.0)), |e| matches!(e, Error::NotSquare { .. })),
        (
            "NotPsd",
            errs(gaussian_equiv_finite(&Mat::from_diagonal(&Vector::from_column_slice(&[1.0, -1.0])), &Mat::identity(2, 2))),
            |e| matches!(e, Error::NotPsd { .. }),
        ),
        ("MalformedTable", errs(FiniteGroup::from_table(vec![vec![0, 0], vec![0, 0]])), |e| {
            matches!(e, Error::MalformedTable(_))
        }),
        ("NotAChain", errs(trivial.sort_chain(&[0, 1])), |e| matches!(e, Error::NotAChain { .. })),
        ("NotAChain (window)", errs(chain_window_measure(&frozen, &[0, 1])), |e| matches!(e, Error::NotAChain { .. })),
        ("DimensionMismatch", errs(KernelFamily::powers(Mat::identity(2, 2), vec![1.0; 3])), |e| {
            matches!(e, Error::DimensionMismatch { .. })
        }),
        ("MissingElement", errs(frozen.family().kernel(1)), |e| matches!(e, Error::MissingElement(1))),
        ("NotADistribution", errs(GroupMeasure::probability(z2.clone(), vec![0.5, 0.2])), |e| {
            matches!(e, Error::NotADistribution(_))
        }),
        ("NotReflectionPositive", errs(os_quotient(&negative)), |e| {
            matches!(e, Error::NotReflectionPositive { .. })
        }),
        ("SubspaceNotInvariant", errs(rp.restrict(&Mat::from_diagonal(&Vector::from_column_slice(&[1.0, 0.0])))), |e| {
            matches!(e, Error::SubspaceNotInvariant { .. })
        }),
        ("SubspaceNotInvariant (shift)", errs(leak.restrict(&cyclic_shift)), |e| {
            matches!(e, Error::SubspaceNotInvariant { .. })
        }),
        (
            "NullSpaceNotInvariant",
            errs(leak.restrict(&kernel_leak).and_then(|t| leak_q.hat(&t))),
            |e| matches!(e, Error::NullSpaceNotInvariant { .. }),
        ),
        ("MarkovTypeRequired", errs(check_markov_type(&positive)), |e| matches!(e, Error::MarkovTypeRequired)),
        ("UnsortedTimes", errs(window_measure(&flip, &[0, 2, 1])), |e| matches!(e, Error::UnsortedTimes)),
        ("TwoSidedNeedsSymmetry", errs(window_measure(&rot_model, &[-1, 0])), |e| {
            matches!(e, Error::TwoSidedNeedsSymmetry)
        }),
        ("WindowTooLarge", errs(window_entries(10, 7)), |e| matches!(e, Error::WindowTooLarge { .. })),
        (
            "GroupMismatch",
            errs(convolve(&GroupMeasure::haar(z2.clone()), &GroupMeasure::haar(z3.clone()))),
            |e| matches!(e, Error::GroupMismatch(2, 3)),
        ),
        ("NotAnInvolution", errs(poisson_semigroup(&z3, 1, 1.0)), |e| matches!(e, Error::NotAnInvolution(1))),
        (
            "InvarianceViolated",
            errs(window_distribution(&poisson, &GroupMeasure::probability(z2.clone(), vec![0.9, 0.1]).unwrap(), &[0, 1])),
            |e| matches!(e, Error::InvarianceViolated { .. }),
        ),
        ("NotSymmetric", errs(check_flow_invariance(&rot3, &[0, 1], 1)), |e| matches!(e, Error::NotSymmetric)),
        ("NotAContraction", gamma(&trunc, &(Mat::identity(2, 2) * 2.0)).ok().and_then(|g| g.warning()), |e| {
            matches!(e, Error::NotAContraction { .. })
        }),
        ("OutOfRange (c)", errs(mehler(1.5, &[1.0], 16)), |e| matches!(e, Error::OutOfRange(_))),
        (
            "NotInvolutive",
            errs(second_quantized_ps(
                &SymSemigroup::integers(),
                &BTreeMap::from([(1, Mat::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.0]))]),
                &trunc,
            )),
            |e| matches!(e, Error::NotInvolutive { .. }),
        ),
        (
            "NonPositiveWeight",
            errs(gaussian_equiv_atomic(&AtomicPair {
                atoms: vec![(0.0, 1.0)],
                off_atom_equal: true,
                tail: None,
            })),
            |e| matches!(e, Error::NonPositiveWeight(_)),
        ),
        ("OutOfRange (vacuum)", errs(fock_vacuum_search(&[Angle { p: 1, q: 0 }], false, 3)), |e| {
            matches!(e, Error::OutOfRange(_))
        }),
    ];
    cases
        .into_iter()
        .map(|(name, got, want)| (name, got.as_ref().is_some_and(want)))
        .collect()
}

fn cli_error_table() -> Vec<(&'static str, bool)> {
    let parse = parse_scenario("{\n  \"schema\": 1,\n  \"name\": [\n}");
    let unknown = load_scenario(&scenario_path("two_state_chain")).map(|s| {
        run_scenario(
            &s,
            &RunOptions {
                suites: vec!["not-a-suite".into()],
                seed: None,
            },
        )
    });
    let dir = std::env::temp_dir().join(format!("reflectpos-acceptance-{}", std::process::id()));
    let _ = std::fs::create_dir_all(&dir);
    let blocker = dir.join("blocker");
    let _ = std::fs::write(&blocker, "x");
    let report = Report {
        scenario: "x".into(),
        version: "0".into(),
        checks: vec![],
    };
    let unwritable = report.write(&blocker.join("report.json"));
    let _ = std::fs::remove_dir_all(&dir);
    vec![
        ("Parse", matches!(parse, Err(CliError::Parse { line: 3, .. }))),
        ("UnknownSuite", matches!(unknown, Ok(Err(CliError::UnknownSuite(_))))),
        ("Io (unwritable path)", matches!(unwritable, Err(CliError::Io { .. }))),
    ]
}

fn criterion_7() -> Outcome {
    let mut problems = Vec::new();
    for (name, expected) in [
        ("asymmetric_kernel", &[
            "kernel-axioms/nu_symmetry",
            "one_sided/reflection",
            "two_sided/consistency",
            "unsorted/consistency",
            "reconstruction/rp_min_eig",
            "chain-window/chain_order",
        ][..]),
        ("theta_negative", &[
            "negative/reflection_positive",
            "negative/quotient_norm",
            "leaky/operators",
            "leaky/markov_type",
            "swap/markov_type",
        ][..]),
    ] {
        let r = run_shipped(name)?;
        if r.passed() {
            problems.push(format!("{name} passed"));
        }
        for c in r.failures() {
            if c.witness.as_deref().is_none_or(str::is_empty) {
                problems.push(format!("{}: no witness", c.id));
            }
        }
        for id in expected {
            if r.check(id).map(|c| c.status) != Some(Status::Fail) {
                problems.push(format!("{name}: {id} did not fail"));
            }
        }
    }
    let witnesses = [
        ("kernel-axioms/nu_symmetry", "(i,j)"),
        ("one_sided/reflection", "tuple"),
        ("two_sided/consistency", "nu-symmetric"),
        ("unsorted/consistency", "increasing"),
        ("chain-window/chain_order", "not comparable"),
    ];
    let asym = run_shipped("asymmetric_kernel")?;
    for (id, needle) in witnesses {
        let w = asym.check(id).and_then(|c| c.witness.clone()).unwrap_or_default();
        if !w.contains(needle) {
            problems.push(format!("{id}: witness `{w}` lacks `{needle}`"));
        }
    }
    let theta = run_shipped("theta_negative")?;
    let ops = theta.check("leaky/operators").and_then(|c| c.witness.clone()).unwrap_or_default();
    if !(ops.contains("null space") && ops.contains("into itself")) {
        problems.push(format!("leaky/operators witness `{ops}`"));
    }

    let table = error_table();
    let cli = cli_error_table();
    for (name, ok) in table.iter().chain(&cli) {
        if !ok {
            problems.push(format!("error branch {name} not raised"));
        }
    }
    if problems.is_empty() {
        Ok(format!("both failing scenarios carry witnesses; {} error branches raised", table.len() + cli.len()))
    } else {
        Err(problems.join("; "))
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("reconstruction round trip", criterion_1),
        ("group paths", criterion_2),
        ("Monte Carlo cross-validation", criterion_3),
        ("Fock functor", criterion_4),
        ("Mehler quadrature", criterion_5),
        ("gaussian analysis", criterion_6),
        ("failure-path coverage", criterion_7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {} ({name}): {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {} ({name}): {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
