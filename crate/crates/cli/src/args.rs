//! Per-subcommand parameter sets. Every experiment parameter is optional at
//! the clap layer so a flat TOML config can supply it; explicit flags win.
//! Unknown config keys are rejected.

use clap::{Args, ValueEnum};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

macro_rules! merge_fields {
    ($self:ident, $cfg:ident; $($f:ident),+ $(,)?) => {
        $( if $self.$f.is_none() { $self.$f = $cfg.$f; } )+
    };
}

/// Worst normalized exponential-sum magnitude per modulus.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct ExpsumScanArgs {
    /// Flat TOML parameter file; explicit flags override it.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Phase polynomial degree for random draws.
    #[arg(long)]
    pub degree: Option<u32>,
    /// Largest modulus scanned.
    #[arg(long)]
    pub qmax: Option<u64>,
    /// Random draws per modulus.
    #[arg(long)]
    pub trials: Option<u32>,
    /// Primitivity cap: gcd of the nonconstant coefficients with q stays at
    /// or below this.
    #[arg(long)]
    pub qcap: Option<u64>,
    /// Fixed monomial coefficients c0,c1,.. scanned instead of random draws.
    #[arg(long)]
    pub poly: Option<String>,
    /// RNG seed for random draws; required unless --poly is given.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fail with exit 2 when some worst magnitude exceeds C * q^(-1/degree).
    #[arg(long, value_name = "C")]
    pub assert_constant: Option<String>,
    /// Output path; stdout when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// json (default) or csv.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Run this subcommand's oracle checks and exit.
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl ExpsumScanArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; degree, qmax, trials, qcap, poly, seed, assert_constant, out, format);
        self
    }
}

/// Multiplicative complexity and fleeing report for a polynomial vector.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct PolyComplexityArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Components separated by ';', each a monomial coefficient list c0,c1,...
    #[arg(long)]
    pub poly: Option<String>,
    /// Cross-check against the brute modulus scan up to this bound.
    #[arg(long)]
    pub brute_qmax: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl PolyComplexityArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; poly, brute_qmax, out, format);
        self
    }
}

/// One-variable orbit polynomial with rescaling, complexity, and a fleeing
/// certificate from enumerated word-orbit points.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitBuildArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// shear, adjoint-shear, or so21; overrides gens/action/v.
    #[arg(long)]
    pub preset: Option<String>,
    /// Unipotent generators, matrices separated by '|', rows by ';'.
    #[arg(long)]
    pub gens: Option<String>,
    /// linear or adjoint.
    #[arg(long)]
    pub action: Option<String>,
    /// Base vector: coordinate list for linear, a matrix for adjoint.
    #[arg(long)]
    pub v: Option<String>,
    /// Word exponent range for the enumerated certificate points.
    #[arg(long)]
    pub lo: Option<i64>,
    #[arg(long)]
    pub hi: Option<i64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl OrbitBuildArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; preset, gens, action, v, lo, hi, out, format);
        self
    }
}

/// Depth and index certificate for the companion-conjugation orbit.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitCertifyArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Companion matrix dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Word depth cap for the span search.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Number of random companion samples for the identity check.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Coefficient bound for the random samples.
    #[arg(long)]
    pub bound: Option<i64>,
    /// RNG seed for the samples; required.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl OrbitCertifyArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; d, depth, samples, bound, seed, out, format);
        self
    }
}

/// Density-increment trace on a finite system.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct SystemIncrementArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Coordinate moduli m1,m2,...
    #[arg(long)]
    pub moduli: Option<String>,
    /// Rotation generators, vectors separated by '|'; standard basis when
    /// omitted.
    #[arg(long)]
    pub gens: Option<String>,
    /// Explicit member indices of B.
    #[arg(long)]
    pub set: Option<String>,
    /// Sample B of this cardinality instead; requires --seed.
    #[arg(long)]
    pub card: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Equidistribution modulus.
    #[arg(long)]
    pub q: Option<String>,
    /// Equidistribution slack, a rational like 1/4.
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl SystemIncrementArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; moduli, gens, set, card, seed, q, delta, out, format);
        self
    }
}

/// Uniform single-k recurrence experiment, or the unbounded-coefficient
/// counterexample in remark mode.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSarkozyArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub moduli: Option<String>,
    #[arg(long)]
    pub gens: Option<String>,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub card: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Family members separated by '|', components by ';'.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    /// Decay constant in the modulus bound.
    #[arg(long)]
    pub c: Option<String>,
    /// Cap on the solved threshold q0.
    #[arg(long)]
    pub q0cap: Option<u64>,
    /// Recurrence scan length; group exponent when omitted.
    #[arg(long)]
    pub nscan: Option<u64>,
    /// Remark mode: interval length m on Z/(m k0).
    #[arg(long)]
    pub remark_m: Option<u64>,
    /// Remark mode: shift coefficient bound k0.
    #[arg(long)]
    pub remark_k0: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl SystemSarkozyArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; moduli, gens, set, card, seed, family, eps, c, q0cap, nscan,
            remark_m, remark_k0, out, format);
        self
    }
}

/// Stagewise Bogolyubov iteration on a rank-2 system.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct SystemBogArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Two coordinate moduli m1,m2.
    #[arg(long)]
    pub moduli: Option<String>,
    #[arg(long)]
    pub gens: Option<String>,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub card: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Structured B: first coordinates divisible by this.
    #[arg(long)]
    pub xmod: Option<u64>,
    /// Structured B: second coordinates divisible by this.
    #[arg(long)]
    pub ymod: Option<u64>,
    /// Shift polynomial monomial coefficients, constant first.
    #[arg(long)]
    pub rcoeffs: Option<String>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub c: Option<String>,
    /// Cap when a consumed stage modulus is materialized.
    #[arg(long)]
    pub materialize_cap: Option<u64>,
    #[arg(long)]
    pub nscan: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl SystemBogArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; moduli, gens, set, card, seed, xmod, ymod, rcoeffs, eps, c,
            materialize_cap, nscan, out, format);
        self
    }
}

/// Quadratic-form image of a difference set with k-coverage.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct ScanQuadformArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// xy-z2, x2+y2-z2, or x2-y2-z2.
    #[arg(long)]
    pub form: Option<String>,
    /// Window half-width.
    #[arg(long)]
    pub l: Option<i64>,
    /// Fill density of the random window.
    #[arg(long)]
    pub density: Option<f64>,
    /// Fill range lower end; 0 when omitted.
    #[arg(long)]
    pub lo: Option<i64>,
    /// Fill range upper end; the half-width when omitted.
    #[arg(long)]
    pub hi: Option<i64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Image truncation bound M.
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long)]
    pub kmax: Option<u64>,
    /// Byte budget for the pair-value table.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Fail with exit 2 when no k at or below kmax covers.
    #[arg(long)]
    #[serde(default)]
    pub require_cover: bool,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl ScanQuadformArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; form, l, density, lo, hi, seed, m, kmax, budget, out, format);
        self.require_cover = self.require_cover || cfg.require_cover;
        self
    }
}

/// Shifted-polynomial image of a planar difference set with k-coverage.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct ScanBogArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Planar window half-width.
    #[arg(long)]
    pub l: Option<i64>,
    /// Structured E: x coordinates divisible by this.
    #[arg(long)]
    pub xmod: Option<u64>,
    /// Structured E: y coordinates divisible by this.
    #[arg(long)]
    pub ymod: Option<u64>,
    /// Shift polynomial monomial coefficients, constant first.
    #[arg(long)]
    pub rcoeffs: Option<String>,
    /// Image truncation bound M.
    #[arg(long)]
    pub m: Option<i64>,
    #[arg(long)]
    pub kmax: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl ScanBogArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; l, xmod, ymod, rcoeffs, m, kmax, out, format);
        self
    }
}

/// Bohr-set negative control for the two-variable linear form.
#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields, default)]
pub struct ScanBohrArgs {
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Frequency, a rational like 10946/17711.
    #[arg(long)]
    pub theta: Option<String>,
    /// Bohr radius, a rational below 1/8.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub l: Option<i64>,
    #[arg(long)]
    pub kmax: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    #[serde(skip)]
    pub selftest: bool,
}

impl ScanBohrArgs {
    pub fn merge(mut self, cfg: Self) -> Self {
        merge_fields!(self, cfg; theta, eps, l, kmax, out, format);
        self
    }
}
