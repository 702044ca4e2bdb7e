//! Suite execution.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reflectpos::fock::{exp_kernel, exp_kernel_tail_bound, exp_vector, gamma, mehler, FockTrunc};
use reflectpos::gaussian::{
    fock_vacuum_search, gaussian_equiv_atomic, gaussian_equiv_finite, hs_nuclearity, rep_analysis, Angle,
    EigSequence, Nuclearity, Tail,
};
use reflectpos::group_paths::{
    check_flow_invariance, factorization_check, feynman_kac_check, sample_paths, GroupMeasure, MEASURE_TOL,
};
use reflectpos::numerics::{max_abs_diff, op_norm};
use reflectpos::os::{check_markov_type, check_reflection_positive, hat_operator, os_quotient, HatKind};
use reflectpos::positive::{validate_kernel_family, IdentityCheck, KERNEL_IDENTITY_TOL};
use reflectpos::reconstruction::{
    chain_window_measure, check_window_laws, rp_gram_and_quantize, PathModel, ROUND_TRIP_TOL, WINDOW_TOL,
};
use reflectpos::{Error, Mat, Vector};

use crate::report::{Check, Report, Status};
use crate::scenario::{is_known_suite, matrix, Built, Scenario, SuiteSpec};
use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Only suites of these kinds; all when empty.
    pub suites: Vec<String>,
    pub seed: Option<u64>,
}

type Plan = &'static [(&'static str, &'static str)];

struct Recorder<'a> {
    tolerances: &'a BTreeMap<String, f64>,
    label: String,
    plan: Plan,
    checks: Vec<Check>,
}

impl Recorder<'_> {
    fn id(&self, name: &str) -> String {
        format!("{}/{name}", self.label)
    }

    fn citation(&self, name: &str) -> String {
        self.plan
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, c)| c.to_string())
            .unwrap_or_else(|| panic!("check `{name}` missing from the plan"))
    }

    /// Tolerance for a check and whether it was overridden.
    fn tol(&self, name: &str, default: f64) -> (f64, bool) {
        match self.tolerances.get(&self.id(name)) {
            Some(&t) => (t, true),
            None => (default, false),
        }
    }

    fn push(&mut self, name: &str, status: Status, evidence: &[(&str, f64)], witness: Option<String>, tol: Option<f64>) {
        let mut ev = BTreeMap::new();
        let mut odd = Vec::new();
        for &(k, v) in evidence {
            if v.is_finite() {
                ev.insert(k.to_string(), v);
            } else {
                odd.push(format!("{k} = {v}"));
            }
        }
        let witness = match (witness, odd.is_empty()) {
            (w, true) => w,
            (Some(w), false) => Some(format!("{w}; {}", odd.join(", "))),
            (None, false) => Some(odd.join(", ")),
        };
        self.checks.push(Check {
            id: self.id(name),
            citation: self.citation(name),
            status,
            evidence: ev,
            witness,
            tolerance: tol,
        });
    }

    /// Passes when `deviation <= tol`.
    fn deviation(&mut self, name: &str, deviation: f64, default_tol: f64, witness: Option<String>) {
        let (tol, _) = self.tol(name, default_tol);
        let ok = deviation <= tol;
        let witness = if ok { None } else { witness.or_else(|| Some(format!("deviation {deviation:e} > {tol:e}"))) };
        self.push(name, status(ok), &[("max_abs_deviation", deviation)], witness, Some(tol));
    }

    fn identity(&mut self, name: &str, check: &IdentityCheck, default_tol: f64) {
        let (tol, overridden) = self.tol(name, default_tol);
        let ok = check.max_deviation <= tol && (overridden || check.passed);
        let witness = if ok {
            None
        } else {
            check
                .witness
                .clone()
                .or_else(|| Some(format!("deviation {:e} > {tol:e}", check.max_deviation)))
        };
        self.push(name, status(ok), &[("max_abs_deviation", check.max_deviation)], witness, Some(tol));
    }

    fn flag(&mut self, name: &str, ok: bool, evidence: &[(&str, f64)], witness: Option<String>) {
        let witness = if ok { None } else { witness };
        self.push(name, status(ok), evidence, witness, None);
    }

    fn recorded(&self, name: &str) -> bool {
        let id = self.id(name);
        self.checks.iter().any(|c| c.id == id)
    }

    /// Emits the planned checks that were not reached: the first carries
    /// the error, the others are skipped.
    fn finish(mut self, outcome: Result<(), Error>) -> Vec<Check> {
        let mut error = outcome.err();
        for &(name, _) in self.plan {
            if self.recorded(name) {
                continue;
            }
            match error.take() {
                Some(e) => self.push(name, Status::Fail, &[], Some(e.to_string()), None),
                None => self.push(name, Status::Skip, &[], Some("not reached".into()), None),
            }
        }
        // Every planned check was recorded before the failure.
        if let (Some(e), Some(c)) = (error, self.checks.last_mut()) {
            c.status = Status::Fail;
            c.witness = Some(e.to_string());
        }
        let order: Vec<String> = self.plan.iter().map(|(n, _)| self.id(n)).collect();
        self.checks.sort_by_key(|c| order.iter().position(|o| *o == c.id));
        self.checks
    }
}

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

const KERNEL_PLAN: Plan = &[
    ("positivity", "positive semigroup structure: kernels are positive"),
    ("markov", "positive semigroup structure: kernels are Markov"),
    ("semigroup_law", "positive semigroup structure: P_s P_t = P_st"),
    ("nu_symmetry", "standard positive semigroup structure: D_nu P_s = P_{s#}^T D_nu"),
    ("unit_automorphism", "conjugation by units: P_h M_f P_h^{-1} = M_{P_h f}"),
    ("nu_invariance", "the reference measure is invariant under every P_s"),
    ("square_positivity", "P_{s# s} is positive semidefinite on L^2(nu)"),
];

const WINDOW_PLAN: Plan = &[
    ("consistency", "a consistent family of cylinder measures on path space"),
    ("stationarity", "the path measure is invariant under time translation"),
    ("reflection", "the two-sided stationary extension is invariant under time reflection"),
];

const RECONSTRUCTION_PLAN: Plan = &[
    ("rp_min_eig", "time reflection is reflection positive on the nonnegative-time subspace"),
    ("markov_identity", "Markov condition E+ E0 E- = E+ E-"),
    ("gamma_unitary", "q restricted to E0 is unitary onto the quotient"),
    ("recovered_shifts", "the quotient shift semigroup recovers the transition semigroup"),
    ("multiplicativity", "E0 U_s E0 is multiplicative on S"),
    ("dilation", "E0 U_s E0 is the compression of the quotient shift through q|E0"),
];

const CHAIN_PLAN: Plan = &[
    ("chain_order", "cylinder measure along a chain of the semigroup order"),
    ("total_mass", "the chain window carries the mass of the reference measure"),
];

const OS_PLAN: Plan = &[
    ("reflection_positive", "reflection positive Hilbert space: <theta v, v> >= 0 on E+"),
    ("quotient_norm", "OS quotient: ||q v||^2 = <theta v, v>"),
    ("operators", "operators preserving E+ and the null space pass to the quotient"),
    ("markov_type", "Markov type iff q restricted to E0 is unitary"),
];

const GROUP_PLAN: Plan = &[
    ("semigroup_law", "convolution semigroup law mu_s * mu_t = mu_{s+t}"),
    ("symmetric", "symmetric convolution semigroup: mu_t* = mu_t"),
    ("flow_invariance", "pinned path measure is invariant under the flow V_t"),
    ("theta_invariance", "pinned path measure is invariant under time reflection"),
    ("conjugation", "theta V_t theta = V_{-t}"),
    ("factorization", "the stationary path measure is a product in pinned coordinates"),
    ("feynman_kac", "group Feynman-Kac-Nelson formula (P_t f)(x) = E[f(x omega(t))]"),
    ("poisson_limit", "the Poisson semigroup tends to (delta_e + delta_g)/2"),
];

const SAMPLING_PLAN: Plan = &[
    ("tv_distance", "Monte Carlo paths reproduce the cylinder measure"),
    ("reproducible", "a fixed seed reproduces the empirical window exactly"),
];

const FOCK_PLAN: Plan = &[
    ("composition", "second quantization is a functor: Gamma(ab) = Gamma(a) Gamma(b)"),
    ("adjoint", "Gamma(a*) = Gamma(a)*"),
    ("power_norms", "<v^n, w^n> = <v, w>^n, so ||v^n|| = ||v||^n"),
    ("exp_reproducing", "exponential vectors reproduce the kernel e^<v,w>"),
    ("exp_tail", "the truncated kernel lies within its tail bound of e^<v,w>"),
    ("exp_transport", "(Gamma(A) F)(v) = F(A* v): Gamma(a) Exp(v) = Exp(a v)"),
    ("contraction", "second quantization of a contraction is a contraction"),
];

const MEHLER_PLAN: Plan = &[("quadrature", "Mehler formula for the Ornstein-Uhlenbeck semigroup")];

const NUCLEAR_PLAN: Plan = &[
    ("decision", "(1 + A^2)^{-N} is Hilbert-Schmidt for the minimal N"),
    ("integral_test", "partial sums agree with the integral test on 10^4 terms"),
];

const ATOMIC_PLAN: Plan = &[("verdict", "measures equal off countably many atoms: sum |mu(s)/nu(s) - 1|^2 < infinity")];

const FINITE_EQ_PLAN: Plan = &[
    ("verdict", "gaussian equivalence: equal Cameron-Martin spaces and TT* - 1 Hilbert-Schmidt"),
    ("symmetry", "gaussian equivalence is symmetric in the two covariances"),
];

const REP_PLAN: Plan = &[
    ("fixed_space", "fixed vectors through the averaging projector"),
    ("multiplicities", "isotypic multiplicities from character inner products"),
    ("pair_space", "fixed vectors of H tensor conj(H) number sum m_i^2"),
    ("weak_mixing", "weak mixing iff no nonzero finite-dimensional invariant subspace"),
];

const VACUUM_PLAN: Plan = &[
    ("degree", "the vacuum is the only fixed vector iff all products of characters are nontrivial"),
    ("witness", "the witness product of characters is trivial"),
];

fn plan(suite: &SuiteSpec) -> Plan {
    match suite {
        SuiteSpec::KernelAxioms { .. } => KERNEL_PLAN,
        SuiteSpec::WindowLaws { .. } => WINDOW_PLAN,
        SuiteSpec::Reconstruction { .. } => RECONSTRUCTION_PLAN,
        SuiteSpec::ChainWindow { .. } => CHAIN_PLAN,
        SuiteSpec::OsQuotient { .. } => OS_PLAN,
        SuiteSpec::GroupPaths { .. } => GROUP_PLAN,
        SuiteSpec::Sampling { .. } => SAMPLING_PLAN,
        SuiteSpec::FockFunctor { .. } => FOCK_PLAN,
        SuiteSpec::Mehler { .. } => MEHLER_PLAN,
        SuiteSpec::Nuclearity { .. } => NUCLEAR_PLAN,
        SuiteSpec::AtomicEquivalence { .. } => ATOMIC_PLAN,
        SuiteSpec::FiniteEquivalence { .. } => FINITE_EQ_PLAN,
        SuiteSpec::Representation { .. } => REP_PLAN,
        SuiteSpec::Vacuum { .. } => VACUUM_PLAN,
    }
}

/// Runs the scenario's suites in file order.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<Report, CliError> {
    for s in &options.suites {
        if !is_known_suite(s) {
            return Err(CliError::UnknownSuite(s.clone()));
        }
    }
    let built = scenario.build()?;
    let seed = options.seed.or(scenario.seed);
    let mut checks = Vec::new();
    for suite in &scenario.suites {
        if !options.suites.is_empty() && !options.suites.iter().any(|s| s == suite.kind()) {
            continue;
        }
        let mut rec = Recorder {
            tolerances: &scenario.tolerances,
            label: suite.label(),
            plan: plan(suite),
            checks: Vec::new(),
        };
        let outcome = run_suite(&mut rec, &built, suite, seed);
        checks.extend(rec.finish(outcome));
    }
    Ok(Report {
        scenario: scenario.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        checks,
    })
}

fn run_suite(rec: &mut Recorder, built: &Built, suite: &SuiteSpec, seed: Option<u64>) -> Result<(), Error> {
    match suite {
        SuiteSpec::KernelAxioms { family, .. } => kernel_axioms(rec, built, family),
        SuiteSpec::WindowLaws { family, times, shift, .. } => {
            let model = path_model(built, family)?;
            let r = check_window_laws(&model, times, *shift)?;
            rec.identity("consistency", &r.consistency, WINDOW_TOL);
            rec.identity("stationarity", &r.stationarity, WINDOW_TOL);
            rec.identity("reflection", &r.reflection, WINDOW_TOL);
            Ok(())
        }
        SuiteSpec::Reconstruction { family, times, max_shift, .. } => {
            reconstruction(rec, built, family, times, *max_shift)
        }
        SuiteSpec::ChainWindow { family, elements, .. } => {
            let model = path_model(built, family)?;
            let cw = chain_window_measure(&model, elements)?;
            rec.deviation(
                "chain_order",
                cw.enumeration_deviation,
                WINDOW_TOL,
                Some(format!("chain {:?}", cw.chain)),
            );
            let mass: f64 = model.nu().iter().sum();
            rec.deviation("total_mass", (cw.window.total_mass() - mass).abs(), WINDOW_TOL, None);
            Ok(())
        }
        SuiteSpec::OsQuotient { space, .. } => os_suite(rec, built, space),
        SuiteSpec::GroupPaths {
            semigroup,
            ticks,
            shift,
            f,
            fk_ticks,
            limit_time,
            ..
        } => group_paths(rec, built, semigroup, ticks, *shift, f.as_deref(), *fk_ticks, *limit_time),
        SuiteSpec::Sampling {
            semigroup, ticks, samples, ..
        } => {
            let (semi, nu, _) = &built.conv[semigroup];
            let seed = seed.expect("validated");
            let a = sample_paths(semi, nu, ticks, *samples, seed)?;
            let (tol, _) = rec.tol("tv_distance", 0.01);
            let ok = a.tv <= tol;
            let witness = (!ok).then(|| format!("tv {:e} with {} samples", a.tv, samples));
            rec.push(
                "tv_distance",
                status(ok),
                &[("tv", a.tv), ("bound", a.bound), ("samples", *samples as f64)],
                witness,
                Some(tol),
            );
            let b = sample_paths(semi, nu, ticks, *samples, seed)?;
            let same = a.counts == b.counts && a.empirical.probs() == b.empirical.probs();
            rec.flag("reproducible", same, &[("seed", seed as f64)], Some("counts differ between runs".into()));
            Ok(())
        }
        SuiteSpec::FockFunctor { fock, pairs, .. } => {
            let spec = &built.focks[fock];
            fock_suite(rec, spec.d, spec.n_max, *pairs, seed.expect("validated"))
        }
        SuiteSpec::Mehler {
            c, degree, quad_order, ..
        } => {
            let mut worst = 0.0f64;
            let mut at = None;
            for &cv in c {
                for n in 0..=*degree {
                    let mut coeffs = vec![0.0; degree + 1];
                    coeffs[n] = 1.0;
                    let r = mehler(cv, &coeffs, *quad_order)?;
                    let d = r.discrepancy.max((r.diagonal[n] - cv.powi(n as i32)).abs());
                    if d > worst {
                        worst = d;
                        at = Some(format!("c = {cv}, n = {n}"));
                    }
                }
            }
            rec.deviation("quadrature", worst, 1e-8, at);
            Ok(())
        }
        SuiteSpec::Nuclearity { sequence, .. } => {
            let (seq, expect) = &built.sequences[sequence];
            nuclearity(rec, seq, *expect);
            Ok(())
        }
        SuiteSpec::AtomicEquivalence { pair, .. } => {
            let (p, expect) = &built.pairs[pair];
            let v = gaussian_equiv_atomic(p)?;
            let ok = expect.is_none_or(|e| e == v.equivalent);
            let mut ev = vec![("equivalent", bool_num(v.equivalent)), ("head_sum", v.head_sum)];
            if let Some(tc) = v.tail_converges {
                ev.push(("tail_converges", bool_num(tc)));
            }
            rec.flag(
                "verdict",
                ok,
                &ev,
                Some(format!("expected equivalent = {}, found {}: {}", expect.unwrap_or(false), v.equivalent, v.reason)),
            );
            Ok(())
        }
        SuiteSpec::FiniteEquivalence {
            k, q, expect_equivalent, ..
        } => {
            let k = matrix(k, "k").map_err(|e| Error::InvalidSubspace(e.to_string()))?;
            let q = matrix(q, "q").map_err(|e| Error::InvalidSubspace(e.to_string()))?;
            let kq = gaussian_equiv_finite(&k, &q)?;
            let qk = gaussian_equiv_finite(&q, &k)?;
            let ok = expect_equivalent.is_none_or(|e| e == kq.equivalent);
            let mut ev = vec![("equivalent", bool_num(kq.equivalent)), ("range_gap", kq.range_gap)];
            if let Some(h) = kq.hs_distance {
                ev.push(("hs_distance", h));
            }
            rec.flag(
                "verdict",
                ok,
                &ev,
                Some(format!("expected equivalent = {:?}, found {}", expect_equivalent, kq.equivalent)),
            );
            rec.flag(
                "symmetry",
                kq.equivalent == qk.equivalent,
                &[("swapped_equivalent", bool_num(qk.equivalent))],
                Some("verdict changes when the covariances are swapped".into()),
            );
            Ok(())
        }
        SuiteSpec::Representation { rep, .. } => {
            let (r, expect) = &built.reps[rep];
            let a = rep_analysis(r)?;
            rec.flag("fixed_space", true, &[("dim", a.dim as f64), ("fixed_dim", a.fixed_dim as f64)], None);
            let ok = expect.as_ref().is_none_or(|m| *m == a.multiplicities);
            let ev: Vec<(String, f64)> = a
                .multiplicities
                .iter()
                .zip(&a.isotypic_dims)
                .enumerate()
                .flat_map(|(i, (m, d))| [(format!("multiplicity_{i}"), *m as f64), (format!("isotypic_dim_{i}"), *d as f64)])
                .collect();
            let ev_ref: Vec<(&str, f64)> = ev.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            rec.flag(
                "multiplicities",
                ok,
                &ev_ref,
                Some(format!("expected {:?}, found {:?}", expect, a.multiplicities)),
            );
            rec.flag(
                "pair_space",
                a.paths_agree,
                &[
                    ("averaging_projector", a.pair_fixed_dim as f64),
                    ("sum_of_squares", a.pair_fixed_from_multiplicities as f64),
                ],
                Some(format!("{} != {}", a.pair_fixed_dim, a.pair_fixed_from_multiplicities)),
            );
            let consistent = a.weakly_mixing == (a.dim == 0) && a.has_invariant_subspace == (a.dim > 0);
            rec.flag(
                "weak_mixing",
                consistent,
                &[("weakly_mixing", bool_num(a.weakly_mixing)), ("dim", a.dim as f64)],
                Some(format!("weakly mixing = {} at dimension {}", a.weakly_mixing, a.dim)),
            );
            Ok(())
        }
        SuiteSpec::Vacuum {
            angles,
            conjugates,
            bound,
            expect_degree,
            ..
        } => {
            let angles: Vec<Angle> = angles.iter().map(|a| Angle { p: a.p, q: a.q }).collect();
            let s = fock_vacuum_search(&angles, *conjugates, *bound)?;
            let ok = expect_degree.is_none_or(|e| e == s.degree);
            let ev: Vec<(&str, f64)> = s.degree.map(|d| ("degree", d as f64)).into_iter().collect();
            rec.flag(
                "degree",
                ok,
                &ev,
                Some(format!("expected {:?}, found {:?}", expect_degree.flatten(), s.degree)),
            );
            let valid = match (&s.degree, &s.witness) {
                (Some(d), Some(w)) => {
                    // sum m_j p_j / q_j must be an integer.
                    let l = s.characters.iter().fold(1i64, |acc, a| lcm(acc, a.q));
                    let total: i64 = w.iter().zip(&s.characters).map(|(m, a)| *m as i64 * a.p * (l / a.q)).sum();
                    w.iter().sum::<usize>() == *d && total.rem_euclid(l) == 0
                }
                (None, None) => true,
                _ => false,
            };
            rec.flag("witness", valid, &[], Some(format!("{:?}", s.witness)));
            Ok(())
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn bool_num(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn path_model(built: &Built, family: &str) -> Result<PathModel, Error> {
    let (sym, fam) = &built.families[family];
    PathModel::new(sym.clone(), fam.clone())
}

fn kernel_axioms(rec: &mut Recorder, built: &Built, family: &str) -> Result<(), Error> {
    let (sym, fam) = &built.families[family];
    if let Some(i) = fam.nu().iter().position(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::NonPositiveWeight(format!("nu[{i}] = {}", fam.nu()[i])));
    }
    let r = validate_kernel_family(sym, fam)?;
    rec.identity("positivity", &r.positivity, KERNEL_IDENTITY_TOL);
    rec.identity("markov", &r.markov, KERNEL_IDENTITY_TOL);
    rec.identity("semigroup_law", &r.semigroup_law, KERNEL_IDENTITY_TOL);
    rec.identity("nu_symmetry", &r.nu_involutive, KERNEL_IDENTITY_TOL);
    rec.identity("unit_automorphism", &r.unit_automorphism, KERNEL_IDENTITY_TOL);
    rec.identity("nu_invariance", &r.nu_invariance, KERNEL_IDENTITY_TOL);
    rec.identity("square_positivity", &r.square_positivity, 1e-10);
    Ok(())
}

fn reconstruction(rec: &mut Recorder, built: &Built, family: &str, times: &[i64], max_shift: usize) -> Result<(), Error> {
    let model = path_model(built, family)?;
    let (_, rt) = rp_gram_and_quantize(&model, times, max_shift)?;
    let (tol, _) = rec.tol("rp_min_eig", 1e-10);
    let ok = rt.rp.min_eig >= -tol;
    rec.push(
        "rp_min_eig",
        status(ok),
        &[("min_eig", rt.rp.min_eig)],
        (!ok).then(|| format!("min eigenvalue {:e}", rt.rp.min_eig)),
        Some(tol),
    );
    rec.deviation("markov_identity", rt.markov.defect, 1e-10, rt.markov.witness.clone());
    let iso = rt.markov.gamma_isometry_defect.unwrap_or(f64::INFINITY);
    let (tol, _) = rec.tol("gamma_unitary", 1e-10);
    let ok = iso <= tol && rt.markov.hat_dim == Some(rt.markov.e_zero_dim);
    rec.push(
        "gamma_unitary",
        status(ok),
        &[
            ("isometry_defect", iso),
            ("hat_dim", rt.markov.hat_dim.map_or(f64::NAN, |d| d as f64)),
            ("e_zero_dim", rt.markov.e_zero_dim as f64),
        ],
        (!ok).then(|| rt.markov.witness.clone().unwrap_or_else(|| "q|E0 is not onto".into())),
        Some(tol),
    );
    rec.deviation("recovered_shifts", rt.dilation_error, ROUND_TRIP_TOL, None);
    let m = &rt.multiplicativity;
    rec.deviation(
        "multiplicativity",
        m.max_defect,
        1e-10,
        m.witness.map(|(s, t)| format!("(s, t) = ({s}, {t})")),
    );
    rec.deviation("dilation", m.dilation_defect, 1e-10, None);
    Ok(())
}

fn os_suite(rec: &mut Recorder, built: &Built, space: &str) -> Result<(), Error> {
    let (rp, ops) = &built.spaces[space];
    let rg = rp.reflection_gram();
    let r = check_reflection_positive(&rg)?;
    let (tol, _) = rec.tol("reflection_positive", 1e-10);
    let ok = r.is_rp;
    rec.push(
        "reflection_positive",
        status(ok),
        &[("min_eig", r.min_eig)],
        (!ok).then(|| negative_direction(&rg, r.min_eig)),
        Some(tol),
    );
    let osq = os_quotient(&rg)?;
    let qtq = osq.q().transpose() * osq.q();
    rec.deviation("quotient_norm", max_abs_diff(&qtq, rg.gram()), 1e-10, None);

    let mut failures = Vec::new();
    let mut max_norm = 0.0f64;
    for (name, t) in ops {
        match hat_operator(rp, &osq, t, HatKind::SemigroupElement { tau_partner: None }) {
            Ok(h) => max_norm = max_norm.max(h.norm),
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    rec.flag(
        "operators",
        failures.is_empty(),
        &[("count", ops.len() as f64), ("max_hat_norm", max_norm)],
        Some(failures.join("; ")),
    );

    let m = check_markov_type(&rg)?;
    let (tol, _) = rec.tol("markov_type", 1e-10);
    let ok = m.defect <= tol && m.equivalence_consistent;
    rec.push(
        "markov_type",
        status(ok),
        &[
            ("defect", m.defect),
            ("e_zero_dim", m.e_zero_dim as f64),
            ("gamma_unitary", bool_num(m.gamma_unitary)),
        ],
        (!ok).then(|| m.witness.clone().unwrap_or_else(|| format!("defect {:e}", m.defect))),
        Some(tol),
    );
    Ok(())
}

/// The eigenvector of the most negative eigenvalue, as a witness vector in `E+` coordinates.
fn negative_direction(rg: &reflectpos::os::ReflectionGram, min_eig: f64) -> String {
    let (values, vectors) = reflectpos::numerics::sym_eigen(rg.gram());
    let i = (0..values.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    let v: Vec<String> = vectors.column(i).iter().map(|x| format!("{x:.6}")).collect();
    format!("<theta v, v> = {min_eig:e} at v = [{}]", v.join(", "))
}

#[allow(clippy::too_many_arguments)]
fn group_paths(
    rec: &mut Recorder,
    built: &Built,
    name: &str,
    ticks: &[i64],
    shift: i64,
    f: Option<&[f64]>,
    fk_ticks: i64,
    limit_time: f64,
) -> Result<(), Error> {
    let (semi, nu, poisson) = &built.conv[name];
    let span = ticks.iter().map(|t| t.abs()).max().unwrap_or(0).max(shift.abs()).max(2);
    rec.identity("semigroup_law", &semi.check_semigroup_law(span)?, MEASURE_TOL);
    let sym = semi.is_symmetric(2 * span)?;
    rec.flag("symmetric", sym, &[], Some("mu_t differs from its reflection mu_t*".into()));

    let flow = check_flow_invariance(semi, ticks, shift)?;
    rec.identity("flow_invariance", &flow.flow_invariance, MEASURE_TOL);
    rec.identity("theta_invariance", &flow.theta_invariance, MEASURE_TOL);
    rec.flag(
        "conjugation",
        flow.conjugation_mismatches == 0,
        &[("mismatches", flow.conjugation_mismatches as f64)],
        Some(format!("{} paths where theta V_t theta != V_-t", flow.conjugation_mismatches)),
    );
    rec.identity("factorization", &factorization_check(semi, nu, ticks)?, MEASURE_TOL);

    let order = semi.group().order();
    let default_f: Vec<f64> = (0..order).map(|x| x as f64).collect();
    let f = f.unwrap_or(&default_f);
    let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    let mut at = None;
    for x in 0..order {
        let r = feynman_kac_check(semi, f, x, fk_ticks)?;
        if r.deviation > worst {
            worst = r.deviation;
            at = Some(format!("x = {x}"));
        }
    }
    rec.deviation("feynman_kac", worst / scale, 1e-14, at);

    match poisson {
        Some(g) => {
            let mu = semi.measure_at(limit_time)?;
            let mut target = vec![0.0; order];
            target[semi.group().identity()] += 0.5;
            target[*g] += 0.5;
            let target = GroupMeasure::probability(semi.group().clone(), target)?;
            rec.deviation(
                "poisson_limit",
                mu.max_abs_diff(&target),
                1e-12,
                Some(format!("t = {limit_time}")),
            );
        }
        None => rec.push("poisson_limit", Status::Skip, &[], Some("not a Poisson semigroup".into()), None),
    }
    Ok(())
}

fn random_contraction(rng: &mut ChaCha8Rng, d: usize) -> Mat {
    let a = Mat::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let n = op_norm(&a);
    a / n.max(1.0)
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0))
}

fn fock_suite(rec: &mut Recorder, d: usize, n_max: usize, pairs: usize, seed: u64) -> Result<(), Error> {
    let trunc = FockTrunc::new(d, n_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut comp, mut adj, mut pow, mut repro, mut transport, mut worst_norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut tail_ok = true;
    let mut tail_slack = f64::INFINITY;
    let mut warnings = 0usize;
    for _ in 0..pairs {
        let a = random_contraction(&mut rng, d);
        let b = random_contraction(&mut rng, d);
        let v = random_vector(&mut rng, d);
        let w = random_vector(&mut rng, d);
        let ga = gamma(&trunc, &a)?;
        let gb = gamma(&trunc, &b)?;
        comp = comp.max(gamma(&trunc, &(&a * &b))?.max_abs_diff(&ga.compose(&gb)?));
        adj = adj.max(gamma(&trunc, &a.transpose())?.max_abs_diff(&ga.adjoint()));
        for n in 0..=n_max {
            let vn = trunc.power(&v, n)?;
            let wn = trunc.power(&w, n)?;
            pow = pow.max((vn.norm() - v.norm().powi(n as i32)).abs());
            pow = pow.max((vn.dot(&wn) - v.dot(&w).powi(n as i32)).abs());
        }
        let ev = exp_vector(&trunc, &v)?;
        let ew = exp_vector(&trunc, &w)?;
        repro = repro.max((ev.dot(&ew) - exp_kernel(&v, &w, n_max)).abs());
        let gap = (exp_kernel(&v, &w, n_max) - v.dot(&w).exp()).abs();
        // Rounding in the partial sum and in exp is a few ulps of e^{|v||w|}.
        let bound = exp_kernel_tail_bound(&v, &w, n_max) + 8.0 * f64::EPSILON * (v.norm() * w.norm()).exp();
        tail_ok &= gap <= bound;
        tail_slack = tail_slack.min(bound - gap);
        transport = transport.max((ga.apply(&ev) - exp_vector(&trunc, &(&a * &v))?).amax());
        worst_norm = worst_norm.max(ga.norm());
        warnings += usize::from(ga.warning().is_some()) + usize::from(gb.warning().is_some());
    }
    rec.deviation("composition", comp, 1e-12, None);
    rec.deviation("adjoint", adj, 1e-12, None);
    rec.deviation("power_norms", pow, 1e-12, None);
    rec.deviation("exp_reproducing", repro, 1e-12, None);
    rec.flag(
        "exp_tail",
        tail_ok,
        &[("min_slack", tail_slack)],
        Some("truncated kernel outside its tail bound".into()),
    );
    rec.deviation("exp_transport", transport, 1e-12, None);
    rec.flag(
        "contraction",
        warnings == 0 && worst_norm <= 1.0 + 1e-10,
        &[("max_norm", worst_norm), ("warnings", warnings as f64)],
        Some(format!("{warnings} operators flagged as non-contractions")),
    );
    Ok(())
}

const INTEGRAL_TERMS: usize = 10_000;

/// Partial sums of `(1 + lambda_n^2)^{-2N}` over the head and `INTEGRAL_TERMS`
/// tail terms against the integral-test bounds: bounded for the chosen `N`,
/// growing for `N - 1`. Returns `(agrees, partial sum at N)`.
fn integral_test(seq: &EigSequence, decision: &Nuclearity) -> (bool, f64) {
    let head = |n: u32| -> f64 { seq.head.iter().map(|l| (1.0 + l * l).powi(-2 * n as i32)).sum() };
    let Tail::Power { c, alpha } = seq.tail else {
        return (matches!(decision, Nuclearity::Nuclear { n: 1, .. }), head(1));
    };
    let k = seq.head.len() as f64;
    let term = |x: f64, n: u32| (1.0 + (c * x.powf(alpha)).powi(2)).powi(-2 * n as i32);
    let partial = |n: u32| -> f64 { head(n) + (1..=INTEGRAL_TERMS).map(|j| term(k + j as f64, n)).sum::<f64>() };
    match *decision {
        Nuclearity::NotNuclear => {
            // Constant tail terms: the sum grows linearly in the number of terms for any N.
            let s = partial(1);
            (alpha == 0.0 && s >= INTEGRAL_TERMS as f64 * term(1.0, 1) * (1.0 - 1e-12), s)
        }
        Nuclearity::Nuclear { n, .. } => {
            let first = k + 1.0;
            let p = 4.0 * n as f64 * alpha;
            let s = partial(n);
            // Terms are at most (c x^alpha)^{-4N}; bound the tail by its integral past the first term.
            let upper = head(n) + term(first, n) + c.powf(-4.0 * n as f64) * first.powf(1.0 - p) / (p - 1.0);
            let mut agrees = p > 1.0 && s <= upper * (1.0 + 1e-12);
            if n > 1 {
                let m = n - 1;
                let q = 4.0 * m as f64 * alpha;
                let x0 = c.powf(-1.0 / alpha).max(first).ceil();
                // Past x0 the terms dominate (2 (c x^alpha)^2)^{-2M}, whose integral diverges for q <= 1.
                let coef = (2.0 * c * c).powf(-2.0 * m as f64);
                let prim = |x: f64| if (q - 1.0).abs() < 1e-12 { x.ln() } else { x.powf(1.0 - q) / (1.0 - q) };
                let last = k + INTEGRAL_TERMS as f64;
                let lower = if x0 < last { coef * (prim(last + 1.0) - prim(x0 + 1.0)) } else { 0.0 };
                agrees &= q <= 1.0 && partial(m) >= lower;
            }
            (agrees, s)
        }
    }
}

fn nuclearity(rec: &mut Recorder, seq: &EigSequence, expect: Option<Option<u32>>) {
    let d = hs_nuclearity(seq);
    let found = match d {
        Nuclearity::Nuclear { n, .. } => Some(n),
        Nuclearity::NotNuclear => None,
    };
    let ok = expect.is_none_or(|e| e == found);
    let mut ev = vec![("nuclear", bool_num(found.is_some()))];
    if let Nuclearity::Nuclear { n, head_sum } = d {
        ev.push(("n", n as f64));
        ev.push(("head_sum", head_sum));
    }
    rec.flag(
        "decision",
        ok,
        &ev,
        Some(format!("expected {:?}, found {:?}", expect.flatten(), found)),
    );
    let (agrees, partial) = integral_test(seq, &d);
    rec.flag(
        "integral_test",
        agrees,
        &[("partial_sum", partial)],
        Some("partial sums disagree with the decision".into()),
    );
}
