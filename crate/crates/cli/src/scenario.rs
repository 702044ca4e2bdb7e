//! Scenario files: named structure blocks plus the suites to run on them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use reflectpos::group_paths::{ConvSemigroup, GroupMeasure};
use reflectpos::gaussian::{AtomicPair, EigSequence, FiniteRep, RatioTail, Tail};
use reflectpos::os::RpSpace;
use reflectpos::positive::KernelFamily;
use reflectpos::symmetric::{FiniteGroup, SymSemigroup};
use reflectpos::{Mat, Subspace};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Per-check tolerance overrides, keyed by check id.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub structures: BTreeMap<String, Block>,
    pub suites: Vec<SuiteSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Block {
    Group(GroupSpec),
    Semigroup(SemigroupSpec),
    KernelFamily(KernelSpec),
    ConvSemigroup(ConvSpec),
    RpSpace(RpSpec),
    Fock(FockSpec),
    EigSequence(EigSpec),
    AtomicPair(AtomicSpec),
    FiniteRep(RepSpec),
}

impl Block {
    pub fn kind(&self) -> &'static str {
        match self {
            Block::Group(_) => "group",
            Block::Semigroup(_) => "semigroup",
            Block::KernelFamily(_) => "kernel-family",
            Block::ConvSemigroup(_) => "conv-semigroup",
            Block::RpSpace(_) => "rp-space",
            Block::Fock(_) => "fock",
            Block::EigSequence(_) => "eig-sequence",
            Block::AtomicPair(_) => "atomic-pair",
            Block::FiniteRep(_) => "finite-rep",
        }
    }
}

/// Exactly one of the fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default)]
    pub cyclic: Option<usize>,
    #[serde(default)]
    pub symmetric: Option<usize>,
    #[serde(default)]
    pub klein_four: bool,
    #[serde(default)]
    pub table: Option<Vec<Vec<usize>>>,
}

/// `integers`, or a group block with an involution and a subsemigroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemigroupSpec {
    #[serde(default)]
    pub integers: bool,
    #[serde(default)]
    pub group: Option<String>,
    #[serde(default)]
    pub tau: Option<Vec<usize>>,
    #[serde(default)]
    pub s: Option<Vec<usize>>,
}

/// Powers of `generator` over the integers, or one kernel per element of a
/// finite semigroup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default)]
    pub semigroup: Option<String>,
    #[serde(default)]
    pub generator: Option<Rows>,
    #[serde(default)]
    /// Keyed by element index, written as a JSON string.
    pub kernels: Option<BTreeMap<String, Rows>>,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvSpec {
    pub group: String,
    /// Involution for the Poisson semigroup.
    #[serde(default)]
    pub poisson: Option<usize>,
    /// Jump law of a compound Poisson semigroup.
    #[serde(default)]
    pub jump: Option<Vec<f64>>,
    pub dt: f64,
    /// Law of the starting point; Haar measure when absent.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

/// Subspaces are given by spanning vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpSpec {
    pub theta: Rows,
    pub e_plus: Rows,
    #[serde(default)]
    pub e_zero: Option<Rows>,
    /// Ambient operators to pass to the quotient.
    #[serde(default)]
    pub operators: BTreeMap<String, Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    pub d: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerLaw {
    pub c: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigSpec {
    #[serde(default)]
    pub head: Vec<f64>,
    /// `lambda_n = c n^alpha` past the head; finitely many eigenvalues when absent.
    #[serde(default)]
    pub tail: Option<PowerLaw>,
    /// Expected minimal `N`, or `null` for not nuclear.
    #[serde(default, deserialize_with = "present")]
    pub expect: Option<Option<u32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioLaw {
    pub c: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomicSpec {
    pub atoms: Vec<(f64, f64)>,
    #[serde(default = "yes")]
    pub off_atom_equal: bool,
    #[serde(default)]
    pub tail: Option<RatioLaw>,
    #[serde(default)]
    pub expect_equivalent: Option<bool>,
}

/// Distinguishes an explicit `null` from an absent field.
fn present<'de, D, T>(de: D) -> Result<Option<Option<T>>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Option::<T>::deserialize(de).map(Some)
}

fn yes() -> bool {
    true
}

/// `regular`, `trivial` of a dimension, or explicit real matrices per element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepSpec {
    pub group: String,
    #[serde(default)]
    pub regular: bool,
    #[serde(default)]
    pub trivial: Option<usize>,
    #[serde(default)]
    pub matrices: Option<Vec<Rows>>,
    #[serde(default)]
    pub expect_multiplicities: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSpec {
    pub p: i64,
    pub q: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "suite", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SuiteSpec {
    KernelAxioms {
        #[serde(default)]
        label: Option<String>,
        family: String,
    },
    WindowLaws {
        #[serde(default)]
        label: Option<String>,
        family: String,
        times: Vec<i64>,
        #[serde(default = "one")]
        shift: i64,
    },
    Reconstruction {
        #[serde(default)]
        label: Option<String>,
        family: String,
        times: Vec<i64>,
        #[serde(default = "four")]
        max_shift: usize,
    },
    ChainWindow {
        #[serde(default)]
        label: Option<String>,
        family: String,
        elements: Vec<i64>,
    },
    OsQuotient {
        #[serde(default)]
        label: Option<String>,
        space: String,
    },
    GroupPaths {
        #[serde(default)]
        label: Option<String>,
        semigroup: String,
        ticks: Vec<i64>,
        #[serde(default = "one")]
        shift: i64,
        /// Test function for the Feynman-Kac identity; defaults to `x -> x`.
        #[serde(default)]
        f: Option<Vec<f64>>,
        #[serde(default = "one")]
        fk_ticks: i64,
        /// Time at which the Poisson limit is compared with the average of the endpoints.
        #[serde(default = "twenty")]
        limit_time: f64,
    },
    Sampling {
        #[serde(default)]
        label: Option<String>,
        semigroup: String,
        ticks: Vec<i64>,
        samples: usize,
    },
    FockFunctor {
        #[serde(default)]
        label: Option<String>,
        fock: String,
        #[serde(default = "fifty")]
        pairs: usize,
    },
    Mehler {
        #[serde(default)]
        label: Option<String>,
        c: Vec<f64>,
        #[serde(default = "eight")]
        degree: usize,
        #[serde(default = "sixty_four")]
        quad_order: usize,
    },
    Nuclearity {
        #[serde(default)]
        label: Option<String>,
        sequence: String,
    },
    AtomicEquivalence {
        #[serde(default)]
        label: Option<String>,
        pair: String,
    },
    FiniteEquivalence {
        #[serde(default)]
        label: Option<String>,
        k: Rows,
        q: Rows,
        #[serde(default)]
        expect_equivalent: Option<bool>,
    },
    Representation {
        #[serde(default)]
        label: Option<String>,
        rep: String,
    },
    Vacuum {
        #[serde(default)]
        label: Option<String>,
        angles: Vec<AngleSpec>,
        #[serde(default)]
        conjugates: bool,
        bound: usize,
        #[serde(default, deserialize_with = "present")]
        expect_degree: Option<Option<usize>>,
    },
}

fn one() -> i64 {
    1
}
fn four() -> usize {
    4
}
fn eight() -> usize {
    8
}
fn fifty() -> usize {
    50
}
fn sixty_four() -> usize {
    64
}
fn twenty() -> f64 {
    20.0
}

/// Suite names with a one-line description, in the order `list-suites` prints them.
pub const SUITES: &[(&str, &str)] = &[
    ("kernel-axioms", "positivity, Markov property, semigroup law, nu-involutivity and symmetry of a kernel family"),
    ("window-laws", "Kolmogorov consistency, stationarity and reflection invariance of a cylinder window"),
    ("reconstruction", "reflection Gram, Markov identity, recovered shifts and multiplicativity of a symmetric window"),
    ("chain-window", "cylinder window along a chain of a finite symmetric semigroup"),
    ("os-quotient", "reflection positivity, quotient operators and Markov type of an explicit space"),
    ("group-paths", "semigroup law, pinned-path invariances, factorization, Feynman-Kac and the Poisson limit"),
    ("sampling", "Monte Carlo paths against the exact window, with seeded reproducibility"),
    ("fock-functor", "functoriality of second quantization, powers and exponential vectors"),
    ("mehler", "Hermite diagonal of the Mehler semigroup against Gauss-Hermite quadrature"),
    ("nuclearity", "minimal Hilbert-Schmidt exponent of an eigenvalue sequence"),
    ("atomic-equivalence", "equivalence of measures differing on countably many atoms"),
    ("finite-equivalence", "equivalence of centered gaussians with finite covariance matrices"),
    ("representation", "fixed vectors, isotypic multiplicities and weak mixing of a finite group representation"),
    ("vacuum", "minimal degree of a fixed vector in the symmetric powers of a torus representation"),
];

impl SuiteSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            SuiteSpec::KernelAxioms { .. } => "kernel-axioms",
            SuiteSpec::WindowLaws { .. } => "window-laws",
            SuiteSpec::Reconstruction { .. } => "reconstruction",
            SuiteSpec::ChainWindow { .. } => "chain-window",
            SuiteSpec::OsQuotient { .. } => "os-quotient",
            SuiteSpec::GroupPaths { .. } => "group-paths",
            SuiteSpec::Sampling { .. } => "sampling",
            SuiteSpec::FockFunctor { .. } => "fock-functor",
            SuiteSpec::Mehler { .. } => "mehler",
            SuiteSpec::Nuclearity { .. } => "nuclearity",
            SuiteSpec::AtomicEquivalence { .. } => "atomic-equivalence",
            SuiteSpec::FiniteEquivalence { .. } => "finite-equivalence",
            SuiteSpec::Representation { .. } => "representation",
            SuiteSpec::Vacuum { .. } => "vacuum",
        }
    }

    /// Prefix of the check ids this suite emits.
    pub fn label(&self) -> String {
        let label = match self {
            SuiteSpec::KernelAxioms { label, .. }
            | SuiteSpec::WindowLaws { label, .. }
            | SuiteSpec::Reconstruction { label, .. }
            | SuiteSpec::ChainWindow { label, .. }
            | SuiteSpec::OsQuotient { label, .. }
            | SuiteSpec::GroupPaths { label, .. }
            | SuiteSpec::Sampling { label, .. }
            | SuiteSpec::FockFunctor { label, .. }
            | SuiteSpec::Mehler { label, .. }
            | SuiteSpec::Nuclearity { label, .. }
            | SuiteSpec::AtomicEquivalence { label, .. }
            | SuiteSpec::FiniteEquivalence { label, .. }
            | SuiteSpec::Representation { label, .. }
            | SuiteSpec::Vacuum { label, .. } => label,
        };
        label.clone().unwrap_or_else(|| self.kind().to_string())
    }

    /// `(block name, expected kind)` for every block the suite refers to.
    fn references(&self) -> Vec<(&str, &'static str)> {
        match self {
            SuiteSpec::KernelAxioms { family, .. }
            | SuiteSpec::WindowLaws { family, .. }
            | SuiteSpec::Reconstruction { family, .. }
            | SuiteSpec::ChainWindow { family, .. } => vec![(family, "kernel-family")],
            SuiteSpec::OsQuotient { space, .. } => vec![(space, "rp-space")],
            SuiteSpec::GroupPaths { semigroup, .. } | SuiteSpec::Sampling { semigroup, .. } => {
                vec![(semigroup, "conv-semigroup")]
            }
            SuiteSpec::FockFunctor { fock, .. } => vec![(fock, "fock")],
            SuiteSpec::Nuclearity { sequence, .. } => vec![(sequence, "eig-sequence")],
            SuiteSpec::AtomicEquivalence { pair, .. } => vec![(pair, "atomic-pair")],
            SuiteSpec::Representation { rep, .. } => vec![(rep, "finite-rep")],
            SuiteSpec::Mehler { .. } | SuiteSpec::FiniteEquivalence { .. } | SuiteSpec::Vacuum { .. } => vec![],
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, SuiteSpec::Sampling { .. } | SuiteSpec::FockFunctor { .. })
    }
}

pub fn is_known_suite(name: &str) -> bool {
    SUITES.iter().any(|(s, _)| *s == name)
}

/// Parses a scenario, reporting the JSON path, line and column of the first error.
pub fn parse_scenario(text: &str) -> Result<Scenario, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Parse {
            line: inner.line(),
            column: inner.column(),
            field: path,
            message: inner.to_string(),
        }
    })?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text)
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

pub(crate) fn matrix(rows: &Rows, field: &str) -> Result<Mat, CliError> {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(invalid(field, "rows have different lengths"));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

/// Spanning vectors given as rows become matrix columns.
fn columns(rows: &Rows, field: &str) -> Result<Mat, CliError> {
    Ok(matrix(rows, field)?.transpose())
}

fn core(field: &str) -> impl Fn(reflectpos::Error) -> CliError + '_ {
    move |e| invalid(field, e.to_string())
}

/// Structure blocks resolved into library objects.
#[derive(Debug, Clone)]
pub struct Built {
    pub groups: BTreeMap<String, FiniteGroup>,
    pub semigroups: BTreeMap<String, SymSemigroup>,
    pub families: BTreeMap<String, (SymSemigroup, KernelFamily)>,
    pub conv: BTreeMap<String, (ConvSemigroup, GroupMeasure, Option<usize>)>,
    pub spaces: BTreeMap<String, (RpSpace, BTreeMap<String, Mat>)>,
    pub focks: BTreeMap<String, FockSpec>,
    pub sequences: BTreeMap<String, (EigSequence, Option<Option<u32>>)>,
    pub pairs: BTreeMap<String, (AtomicPair, Option<bool>)>,
    pub reps: BTreeMap<String, (FiniteRep, Option<Vec<usize>>)>,
}

fn group_from(spec: &GroupSpec, field: &str) -> Result<FiniteGroup, CliError> {
    let given = [spec.cyclic.is_some(), spec.symmetric.is_some(), spec.klein_four, spec.table.is_some()];
    if given.iter().filter(|g| **g).count() != 1 {
        return Err(invalid(field, "give exactly one of cyclic, symmetric, klein_four, table"));
    }
    if let Some(n) = spec.cyclic {
        if n == 0 {
            return Err(invalid(field, "cyclic group of order 0"));
        }
        return Ok(FiniteGroup::cyclic(n));
    }
    if let Some(k) = spec.symmetric {
        if !(1..=5).contains(&k) {
            return Err(invalid(field, "symmetric groups are supported up to S5"));
        }
        return Ok(FiniteGroup::symmetric(k));
    }
    if spec.klein_four {
        return Ok(FiniteGroup::klein_four());
    }
    FiniteGroup::from_table(spec.table.clone().unwrap_or_default()).map_err(core(field))
}

impl Scenario {
    /// Checks references, labels and seeds, and builds every block.
    pub fn build(&self) -> Result<Built, CliError> {
        if self.schema != SCHEMA_VERSION {
            return Err(invalid("schema", format!("unsupported schema version {}", self.schema)));
        }
        let mut labels = BTreeSet::new();
        for (i, suite) in self.suites.iter().enumerate() {
            let field = format!("suites[{i}]");
            if !labels.insert(suite.label()) {
                return Err(invalid(field, format!("duplicate suite label `{}`", suite.label())));
            }
            for (name, kind) in suite.references() {
                match self.structures.get(name) {
                    None => return Err(invalid(field, format!("unknown structure `{name}`"))),
                    Some(b) if b.kind() != kind => {
                        return Err(invalid(field, format!("`{name}` is a {}, expected a {kind}", b.kind())))
                    }
                    Some(_) => {}
                }
            }
            if suite.is_sampled() && self.seed.is_none() {
                return Err(invalid(field, format!("suite `{}` needs a seed", suite.kind())));
            }
        }

        let mut built = Built {
            groups: BTreeMap::new(),
            semigroups: BTreeMap::new(),
            families: BTreeMap::new(),
            conv: BTreeMap::new(),
            spaces: BTreeMap::new(),
            focks: BTreeMap::new(),
            sequences: BTreeMap::new(),
            pairs: BTreeMap::new(),
            reps: BTreeMap::new(),
        };
        // Groups first, then semigroups, then everything that refers to them.
        for (name, block) in &self.structures {
            if let Block::Group(spec) = block {
                let field = format!("structures.{name}");
                built.groups.insert(name.clone(), group_from(spec, &field)?);
            }
        }
        let group = |built: &Built, name: &str, field: &str| -> Result<FiniteGroup, CliError> {
            built
                .groups
                .get(name)
                .cloned()
                .ok_or_else(|| invalid(field, format!("`{name}` is not a group block")))
        };
        for (name, block) in &self.structures {
            if let Block::Semigroup(spec) = block {
                let field = format!("structures.{name}");
                let sym = if spec.integers {
                    if spec.group.is_some() {
                        return Err(invalid(field, "integers takes no group"));
                    }
                    SymSemigroup::integers()
                } else {
                    let gname = spec.group.as_deref().ok_or_else(|| invalid(&field, "missing group"))?;
                    let g = group(&built, gname, &field)?;
                    let tau = spec.tau.clone().ok_or_else(|| invalid(&field, "missing tau"))?;
                    let s = spec.s.clone().ok_or_else(|| invalid(&field, "missing s"))?;
                    SymSemigroup::finite(g, tau, &s).map_err(core(&field))?
                };
                built.semigroups.insert(name.clone(), sym);
            }
        }
        for (name, block) in &self.structures {
            let field = format!("structures.{name}");
            match block {
                Block::Group(_) | Block::Semigroup(_) => {}
                Block::KernelFamily(spec) => {
                    let sym = match &spec.semigroup {
                        None => SymSemigroup::integers(),
                        Some(s) => built
                            .semigroups
                            .get(s)
                            .cloned()
                            .ok_or_else(|| invalid(&field, format!("`{s}` is not a semigroup block")))?,
                    };
                    let family = match (&spec.generator, &spec.kernels) {
                        (Some(p), None) => KernelFamily::powers(matrix(p, &field)?, spec.nu.clone()),
                        (None, Some(table)) => {
                            let mut kernels = BTreeMap::new();
                            for (s, rows) in table {
                                let key: i64 = s
                                    .parse()
                                    .map_err(|_| invalid(&field, format!("kernel key `{s}` is not an element index")))?;
                                kernels.insert(key, matrix(rows, &field)?);
                            }
                            KernelFamily::table(kernels, spec.nu.clone())
                        }
                        _ => return Err(invalid(field, "give exactly one of generator, kernels")),
                    }
                    .map_err(core(&field))?;
                    built.families.insert(name.clone(), (sym, family));
                }
                Block::ConvSemigroup(spec) => {
                    let g = group(&built, &spec.group, &field)?;
                    let semi = match (spec.poisson, &spec.jump) {
                        (Some(x), None) => ConvSemigroup::poisson(g.clone(), x, spec.dt),
                        (None, Some(w)) => GroupMeasure::probability(g.clone(), w.clone())
                            .and_then(|mu| ConvSemigroup::exp(&mu, spec.dt)),
                        _ => return Err(invalid(field, "give exactly one of poisson, jump")),
                    }
                    .map_err(core(&field))?;
                    let initial = match &spec.initial {
                        None => GroupMeasure::haar(g),
                        Some(w) => GroupMeasure::probability(g, w.clone()).map_err(core(&field))?,
                    };
                    built.conv.insert(name.clone(), (semi, initial, spec.poisson));
                }
                Block::RpSpace(spec) => {
                    let theta = matrix(&spec.theta, &field)?;
                    let e_plus = Subspace::span(&columns(&spec.e_plus, &field)?);
                    let e_zero = match &spec.e_zero {
                        None => None,
                        Some(rows) => Some(Subspace::span(&columns(rows, &field)?)),
                    };
                    let rp = RpSpace::new(theta, e_plus, e_zero).map_err(core(&field))?;
                    let mut ops = BTreeMap::new();
                    for (op, rows) in &spec.operators {
                        ops.insert(op.clone(), matrix(rows, &format!("{field}.operators.{op}"))?);
                    }
                    built.spaces.insert(name.clone(), (rp, ops));
                }
                Block::Fock(spec) => {
                    reflectpos::fock::FockTrunc::new(spec.d, spec.n_max).map_err(core(&field))?;
                    built.focks.insert(name.clone(), spec.clone());
                }
                Block::EigSequence(spec) => {
                    let tail = match spec.tail {
                        None => Tail::NoTail,
                        Some(PowerLaw { c, alpha }) => Tail::Power { c, alpha },
                    };
                    let seq = EigSequence::new(spec.head.clone(), tail).map_err(core(&field))?;
                    built.sequences.insert(name.clone(), (seq, spec.expect));
                }
                Block::AtomicPair(spec) => {
                    let pair = AtomicPair {
                        atoms: spec.atoms.clone(),
                        off_atom_equal: spec.off_atom_equal,
                        tail: spec.tail.map(|t| RatioTail { c: t.c, beta: t.beta }),
                    };
                    built.pairs.insert(name.clone(), (pair, spec.expect_equivalent));
                }
                Block::FiniteRep(spec) => {
                    let g = group(&built, &spec.group, &field)?;
                    let given = [spec.regular, spec.trivial.is_some(), spec.matrices.is_some()];
                    if given.iter().filter(|x| **x).count() != 1 {
                        return Err(invalid(field, "give exactly one of regular, trivial, matrices"));
                    }
                    let rep = if spec.regular {
                        FiniteRep::regular(g)
                    } else if let Some(k) = spec.trivial {
                        FiniteRep::trivial(g, k)
                    } else {
                        let ms = spec
                            .matrices
                            .iter()
                            .flatten()
                            .map(|rows| matrix(rows, &field))
                            .collect::<Result<Vec<_>, _>>()?;
                        FiniteRep::from_real(g, ms).map_err(core(&field))?
                    };
                    built.reps.insert(name.clone(), (rep, spec.expect_multiplicities.clone()));
                }
            }
        }
        Ok(built)
    }
}
