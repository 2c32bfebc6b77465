//! Subcommand handlers: resolve parameters (config file first, explicit
//! flags winning), run the experiment, emit one JSON or CSV document, and
//! map failures to exit codes (1 usage, 2 verification).

use crate::args::*;
use crate::emit::{self, coverage_payload, envelope, rational_str, render_json, write_output, CoveragePayload};
use crate::parse;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use qrec_core::diffscan::{
    bohr_negative_control, diff_set, find_k_cover, poly_bog_scan, quadform_image,
    quadform_image_naive, QuadForm, Window, Window2, DEFAULT_MEMORY_BUDGET,
};
use qrec_core::expsum::{
    char_sum, hua_decay_scan, index_to_biguint, qbound, Character, HuaRow, DEFAULT_Q0_CAP,
};
use qrec_core::linalg::{rational_rank, snf, Index};
use qrec_core::orbits::{
    certify_companion_bounds, fleeing_certificate, orbit_poly, random_companion, so21_setup,
    word_orbit_points, CompanionMatrix, OrbitAction, OrbitSpec,
};
use qrec_core::linalg::IntMat;
use qrec_core::poly::{
    coeff_matrix, hyperplane_fleeing, mult_complexity, mult_complexity_brute,
    substitution_degree_cap, IntValuedPoly, PolyVec,
};
use qrec_core::systems::{
    bogolyubov_iterate, measure_increment, remark_counterexample, uniform_sarkozy_experiment,
    FamilyMember, FiniteSystem, IncrementStep, MeasSet, SystemsError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::path::Path;

pub enum CliError {
    Usage(String),
    Verification(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

pub type RunOutcome = Result<(), CliError>;

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn verif(m: impl Into<String>) -> CliError {
    CliError::Verification(m.into())
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required parameter --{flag}")))
}

fn load_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn resolve_format(
    f: Option<OutputFormat>,
    csv_ok: bool,
    cmd: &str,
) -> Result<OutputFormat, CliError> {
    let f = f.unwrap_or(OutputFormat::Json);
    if f == OutputFormat::Csv && !csv_ok {
        return Err(CliError::Usage(format!("{cmd} has no tabular form; use json")));
    }
    Ok(f)
}

fn primes_upto(n: u64) -> Vec<u64> {
    let mut sieve = vec![true; (n + 1).max(2) as usize];
    let mut out = Vec::new();
    for p in 2..=n {
        if sieve[p as usize] {
            out.push(p);
            let mut m = p * p;
            while m <= n {
                sieve[m as usize] = false;
                m += p;
            }
        }
    }
    out
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ExpsumParams {
    degree: u32,
    qmax: u64,
    trials: u32,
    qcap: u64,
    poly: Option<String>,
    seed: Option<u64>,
    assert_constant: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ExpsumRowPayload {
    q: u64,
    worst_magnitude: f64,
    q_prime: u64,
    worst_coeffs: Vec<u64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ExpsumPayload {
    rows: Vec<ExpsumRowPayload>,
    decay_bound_holds: Option<bool>,
}

pub fn expsum_scan(mut a: ExpsumScanArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_expsum();
    }
    let qmax = a.qmax.unwrap_or(2000);
    if qmax == 0 {
        return Err(usage("qmax must be positive"));
    }
    let trials = a.trials.unwrap_or(3);
    let qcap = a.qcap.unwrap_or(1);
    let (degree, rows) = match &a.poly {
        Some(spec) => {
            let coeffs = parse::parse_i64_list(spec).map_err(usage)?;
            let p = PolyVec::from_i64_monomials(&[&coeffs]);
            if p.degree() == 0 {
                return Err(usage("fixed polynomial must be nonconstant"));
            }
            let degree = a.degree.unwrap_or(p.degree() as u32);
            let rows: Vec<HuaRow> = (1..=qmax)
                .into_par_iter()
                .map(|q| {
                    let rep = char_sum(&Character::new(q, &[1]), &p);
                    let worst_coeffs = coeffs
                        .iter()
                        .skip(1)
                        .map(|c| c.rem_euclid(q as i64) as u64)
                        .collect();
                    HuaRow {
                        q,
                        worst_magnitude: rep.magnitude,
                        q_prime: rep.q_prime,
                        worst_coeffs,
                    }
                })
                .collect();
            (degree, rows)
        }
        None => {
            let degree = a.degree.unwrap_or(2);
            if degree == 0 {
                return Err(usage("degree must be positive"));
            }
            let seed = need(a.seed, "seed")?;
            (degree, hua_decay_scan(degree, qcap, qmax, trials, seed))
        }
    };
    let mut violation = None;
    let decay_bound_holds = match &a.assert_constant {
        Some(cs) => {
            let c = parse::parse_rational(cs)
                .map_err(usage)?
                .to_f64()
                .ok_or_else(|| usage("assert constant out of range"))?;
            for r in &rows {
                let bound = c * (r.q as f64).powf(-1.0 / degree as f64) + 1e-9;
                if r.worst_magnitude.to_f64() > bound {
                    violation = Some((r.q, r.worst_magnitude.to_f64(), bound));
                    break;
                }
            }
            Some(violation.is_none())
        }
        None => None,
    };
    let params = ExpsumParams {
        degree,
        qmax,
        trials,
        qcap,
        poly: a.poly.clone(),
        seed: a.seed,
        assert_constant: a.assert_constant.clone(),
    };
    let payload = ExpsumPayload {
        rows: rows
            .iter()
            .map(|r| ExpsumRowPayload {
                q: r.q,
                worst_magnitude: r.worst_magnitude.to_f64(),
                q_prime: r.q_prime,
                worst_coeffs: r.worst_coeffs.clone(),
            })
            .collect(),
        decay_bound_holds,
    };
    match resolve_format(a.format, true, "expsum scan")? {
        OutputFormat::Json => write_output(
            a.out.as_ref(),
            &render_json(&envelope("expsum-scan", params, payload))?,
        )?,
        OutputFormat::Csv => write_output(a.out.as_ref(), &emit::hua_csv(&rows))?,
    }
    if let Some((q, mag, bound)) = violation {
        return Err(verif(format!(
            "decay bound violated at q={q}: worst magnitude {mag} exceeds {bound}"
        )));
    }
    Ok(())
}

fn selftest_expsum() -> RunOutcome {
    let square = PolyVec::from_i64_monomials(&[&[0, 0, 1]]);
    for q in primes_upto(167).into_iter().filter(|q| *q % 2 == 1) {
        let rep = char_sum(&Character::new(q, &[1]), &square);
        let want = (q as f64).powf(-0.5);
        if (rep.magnitude.to_f64() - want).abs() > 1e-9 {
            return Err(verif(format!(
                "square-phase magnitude at q={q}: got {}, want {want}",
                rep.magnitude.to_f64()
            )));
        }
    }
    for row in hua_decay_scan(3, 1, 60, 2, 11) {
        let bound = 10.0 * (row.q as f64).powf(-1.0 / 3.0) + 1e-9;
        if row.worst_magnitude.to_f64() > bound {
            return Err(verif(format!(
                "cubic decay violated at q={}: {} exceeds {bound}",
                row.q,
                row.worst_magnitude.to_f64()
            )));
        }
    }
    let eps = BigRational::new(BigInt::one(), BigInt::from(10));
    let qb = qbound(2, 1, &BigUint::one(), &eps, &BigRational::one(), 100_000)
        .map_err(|e| verif(e.to_string()))?;
    if qb.q0 != 10_001 {
        return Err(verif(format!("threshold solver gave q0={}, want 10001", qb.q0)));
    }
    println!("selftest expsum scan: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PolyParams {
    poly: String,
    brute_qmax: Option<u64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PolyPayload {
    dim: usize,
    degree: usize,
    hyperplane_fleeing: bool,
    complexity: String,
    invariant_factors: Vec<String>,
    rank: usize,
    brute_value: Option<String>,
    brute_agrees: Option<bool>,
}

fn expected_brute(c: &Index, q_max: u64) -> BigUint {
    match c {
        Index::Infinite => BigUint::from(q_max),
        Index::Finite(dr) => (1..=q_max)
            .map(|q| dr.gcd(&BigUint::from(q)))
            .max()
            .unwrap(),
    }
}

pub fn poly_complexity(mut a: PolyComplexityArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_poly();
    }
    let spec = need(a.poly.clone(), "poly")?;
    let p = parse::parse_polyvec(&spec).map_err(usage)?;
    if p.degree() == 0 {
        return Err(usage("polynomial vector is constant"));
    }
    let cm = coeff_matrix(&p);
    let rank = rational_rank(&cm.mat);
    let invariant_factors: Vec<String> = snf(&cm.mat)
        .d
        .iter()
        .filter(|d| !d.is_zero())
        .map(|d| d.to_string())
        .collect();
    let complexity = mult_complexity(&p);
    let mut mismatch = None;
    let (brute_value, brute_agrees) = match a.brute_qmax {
        Some(0) => return Err(usage("brute qmax must be positive")),
        Some(qmax) => {
            let brute = mult_complexity_brute(&p, qmax);
            let want = expected_brute(&complexity, qmax);
            if brute != want {
                mismatch = Some((brute.clone(), want));
            }
            (Some(brute.to_string()), Some(mismatch.is_none()))
        }
        None => (None, None),
    };
    let params = PolyParams { poly: spec, brute_qmax: a.brute_qmax };
    let payload = PolyPayload {
        dim: p.dim(),
        degree: p.degree(),
        hyperplane_fleeing: hyperplane_fleeing(&p),
        complexity: complexity.to_string(),
        invariant_factors,
        rank,
        brute_value,
        brute_agrees,
    };
    resolve_format(a.format, false, "poly complexity")?;
    write_output(
        a.out.as_ref(),
        &render_json(&envelope("poly-complexity", params, payload))?,
    )?;
    if let Some((brute, want)) = mismatch {
        return Err(verif(format!(
            "brute modulus scan gives {brute}, derived value implies {want}"
        )));
    }
    Ok(())
}

fn selftest_poly() -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..40 {
        let r = rng.gen_range(1..=3usize);
        let dmax = rng.gen_range(1..=4usize);
        let comps: Vec<IntValuedPoly> = (0..r)
            .map(|_| {
                let coeffs: Vec<BigInt> =
                    (0..=dmax).map(|_| BigInt::from(rng.gen_range(-9..=9i64))).collect();
                IntValuedPoly::from_integer_monomial(&coeffs)
            })
            .collect();
        let p = PolyVec::new(comps);
        if p.degree() == 0 {
            continue;
        }
        let derived = mult_complexity(&p);
        let brute = mult_complexity_brute(&p, 60);
        let want = expected_brute(&derived, 60);
        if brute != want {
            return Err(verif(format!(
                "complexity oracle mismatch on case {case}: brute {brute}, derived implies {want}"
            )));
        }
    }
    println!("selftest poly complexity: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OrbitBuildParams {
    preset: Option<String>,
    gens: Option<String>,
    action: String,
    v: Option<String>,
    lo: i64,
    hi: i64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CertificatePayload {
    points: usize,
    diffs: usize,
    q: String,
    full_rank: bool,
    invariant_factors: Vec<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OrbitBuildPayload {
    action: String,
    generator_count: usize,
    acting_dim: usize,
    degree_cap: u64,
    substituted: Vec<String>,
    rescaled: Vec<String>,
    scale: String,
    degree: usize,
    complexity: String,
    certificate: CertificatePayload,
}

fn poly_strings(p: &PolyVec) -> Vec<String> {
    p.components()
        .iter()
        .map(|c| {
            c.monomial_coeffs()
                .iter()
                .map(|q| q.to_string())
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect()
}

fn factor_strings(factors: &[BigInt]) -> Vec<String> {
    factors.iter().map(|f| f.to_string()).collect()
}

fn build_spec(a: &OrbitBuildArgs) -> Result<OrbitSpec, CliError> {
    if let Some(p) = &a.preset {
        return match p.as_str() {
            "shear" => OrbitSpec::new_linear(
                vec![IntMat::from_i64(&[&[1, 1], &[0, 1]])],
                vec![BigInt::zero(), BigInt::one()],
            )
            .map_err(usage),
            "adjoint-shear" => OrbitSpec::new_adjoint(
                vec![IntMat::from_i64(&[&[1, 1], &[0, 1]])],
                IntMat::from_i64(&[&[1, -1], &[0, -1]]),
            )
            .map_err(usage),
            "so21" => {
                let data = so21_setup().map_err(usage)?;
                let [g1, g2] = data.gamma_gens;
                OrbitSpec::new_adjoint(vec![g1, g2], data.v0).map_err(usage)
            }
            other => Err(usage(format!(
                "unknown preset {other:?}; expected shear, adjoint-shear, or so21"
            ))),
        };
    }
    let gens = parse::parse_matrices(&need(a.gens.clone(), "gens")?).map_err(usage)?;
    let action = need(a.action.clone(), "action")?;
    let vspec = need(a.v.clone(), "v")?;
    match action.as_str() {
        "linear" => {
            OrbitSpec::new_linear(gens, parse::parse_bigint_list(&vspec).map_err(usage)?)
                .map_err(usage)
        }
        "adjoint" => OrbitSpec::new_adjoint(gens, parse::parse_matrix(&vspec).map_err(usage)?)
            .map_err(usage),
        other => Err(usage(format!("unknown action {other:?}; expected linear or adjoint"))),
    }
}

pub fn orbit_build(mut a: OrbitBuildArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_orbit_build();
    }
    let spec = build_spec(&a)?;
    let lo = a.lo.unwrap_or(-2);
    let hi = a.hi.unwrap_or(2);
    if lo > hi {
        return Err(usage("lo must not exceed hi"));
    }
    let out = orbit_poly(&spec).map_err(usage)?;
    let complexity = mult_complexity(&out.rescaled);
    let points = word_orbit_points(&spec, lo, hi);
    let cert = fleeing_certificate(&points).map_err(usage)?;
    let action = match spec.action() {
        OrbitAction::Linear => "linear",
        OrbitAction::Adjoint => "adjoint",
    };
    let params = OrbitBuildParams {
        preset: a.preset.clone(),
        gens: a.gens.clone(),
        action: action.to_string(),
        v: a.v.clone(),
        lo,
        hi,
    };
    let payload = OrbitBuildPayload {
        action: action.to_string(),
        generator_count: spec.generator_count(),
        acting_dim: spec.acting_dim(),
        degree_cap: substitution_degree_cap(spec.generator_count(), spec.acting_dim()),
        substituted: poly_strings(&out.substituted),
        rescaled: poly_strings(&out.rescaled),
        scale: out.scale.to_string(),
        degree: out.rescaled.degree(),
        complexity: complexity.to_string(),
        certificate: CertificatePayload {
            points: points.len(),
            diffs: cert.n,
            q: cert.q.to_string(),
            full_rank: cert.full_rank,
            invariant_factors: factor_strings(&cert.invariant_factors),
        },
    };
    resolve_format(a.format, false, "orbit build")?;
    write_output(
        a.out.as_ref(),
        &render_json(&envelope("orbit-build", params, payload))?,
    )?;
    Ok(())
}

fn selftest_orbit_build() -> RunOutcome {
    let shear = OrbitSpec::new_linear(
        vec![IntMat::from_i64(&[&[1, 1], &[0, 1]])],
        vec![BigInt::zero(), BigInt::one()],
    )
    .map_err(|e| verif(e.to_string()))?;
    let out = orbit_poly(&shear).map_err(|e| verif(e.to_string()))?;
    let first = out.rescaled.components()[0].integer_monomial();
    let second = out.rescaled.components()[1].integer_monomial();
    let want_first: Vec<BigInt> = [0, 0, 0, 216].iter().map(|&v| BigInt::from(v)).collect();
    if out.scale != BigInt::from(6)
        || first.as_deref() != Some(&want_first[..])
        || second.as_deref() != Some(&[BigInt::one()][..])
    {
        return Err(verif("shear orbit polynomial mismatch".to_string()));
    }
    let adj = OrbitSpec::new_adjoint(
        vec![IntMat::from_i64(&[&[1, 1], &[0, 1]])],
        IntMat::from_i64(&[&[1, -1], &[0, -1]]),
    )
    .map_err(|e| verif(e.to_string()))?;
    let out = orbit_poly(&adj).map_err(|e| verif(e.to_string()))?;
    let val = out.substituted.eval(&BigInt::from(2));
    if val != vec![BigInt::one(), BigInt::from(-33), BigInt::zero()] {
        return Err(verif(format!("adjoint orbit value mismatch: {val:?}")));
    }
    let data = so21_setup().map_err(|e| verif(e.to_string()))?;
    if data.v0_coords != [BigInt::from(4), BigInt::zero(), BigInt::from(-4)] {
        return Err(verif("so21 base coordinates mismatch".to_string()));
    }
    println!("selftest orbit build: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OrbitCertifyParams {
    d: usize,
    depth: usize,
    samples: usize,
    bound: i64,
    seed: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct OrbitCertifyPayload {
    trace_zero_dim: usize,
    stabilized_depth: usize,
    q: String,
    full_rank: bool,
    invariant_factors: Vec<String>,
}

pub fn orbit_certify(mut a: OrbitCertifyArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_orbit_certify();
    }
    let d = need(a.d, "d")?;
    if d < 2 {
        return Err(usage("d must be at least 2"));
    }
    let depth = a.depth.unwrap_or(4);
    let samples = a.samples.unwrap_or(8);
    let bound = a.bound.unwrap_or(50);
    if depth == 0 || samples == 0 || bound <= 0 {
        return Err(usage("depth, samples, and bound must be positive"));
    }
    let seed = need(a.seed, "seed")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mats: Vec<CompanionMatrix> =
        (0..samples).map(|_| random_companion(d, bound, &mut rng)).collect();
    let cert = certify_companion_bounds(d, depth, &mats).map_err(|e| verif(e.to_string()))?;
    let params = OrbitCertifyParams { d, depth, samples, bound, seed };
    let payload = OrbitCertifyPayload {
        trace_zero_dim: d * d - 1,
        stabilized_depth: cert.n,
        q: cert.q.to_string(),
        full_rank: cert.full_rank,
        invariant_factors: factor_strings(&cert.invariant_factors),
    };
    resolve_format(a.format, false, "orbit certify")?;
    write_output(
        a.out.as_ref(),
        &render_json(&envelope("orbit-certify", params, payload))?,
    )?;
    Ok(())
}

fn selftest_orbit_certify() -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mats: Vec<CompanionMatrix> = (0..6).map(|_| random_companion(2, 20, &mut rng)).collect();
    let cert = certify_companion_bounds(2, 4, &mats).map_err(|e| verif(e.to_string()))?;
    let two = match &cert.q {
        Index::Finite(q) => q == &BigUint::from(2u32),
        Index::Infinite => false,
    };
    let want: Vec<BigInt> = [1, 1, 2].iter().map(|&v| BigInt::from(v)).collect();
    if cert.n != 1 || !two || cert.invariant_factors != want {
        return Err(verif("dimension-2 certificate mismatch".to_string()));
    }
    let mats: Vec<CompanionMatrix> = (0..4).map(|_| random_companion(3, 20, &mut rng)).collect();
    let cert = certify_companion_bounds(3, 4, &mats).map_err(|e| verif(e.to_string()))?;
    let one = match &cert.q {
        Index::Finite(q) => q.is_one(),
        Index::Infinite => false,
    };
    if cert.n != 2 || !one {
        return Err(verif("dimension-3 certificate mismatch".to_string()));
    }
    println!("selftest orbit certify: ok");
    Ok(())
}

fn build_system(moduli: &Option<String>, gens: &Option<String>) -> Result<FiniteSystem, CliError> {
    let mspec = need(moduli.clone(), "moduli")?;
    let m = parse::parse_u64_list(&mspec).map_err(usage)?;
    let g = match gens {
        Some(s) => parse::parse_gens(s).map_err(usage)?,
        None => (0..m.len())
            .map(|i| (0..m.len()).map(|j| u64::from(i == j)).collect())
            .collect(),
    };
    FiniteSystem::new(m, g).map_err(usage)
}

fn build_set(
    sys: &FiniteSystem,
    set: &Option<String>,
    card: Option<u64>,
    seed: Option<u64>,
) -> Result<MeasSet, CliError> {
    match (set, card) {
        (Some(_), Some(_)) => Err(usage("give exactly one of --set and --card")),
        (Some(s), None) => {
            let idx = parse::parse_u64_list(s).map_err(usage)?;
            if idx.is_empty() {
                return Err(usage("set must be nonempty"));
            }
            if let Some(bad) = idx.iter().find(|i| **i >= sys.size()) {
                return Err(usage(format!(
                    "set index {bad} outside the group of size {}",
                    sys.size()
                )));
            }
            Ok(MeasSet::from_indices(sys.size(), idx))
        }
        (None, Some(c)) => {
            if c == 0 || c > sys.size() {
                return Err(usage("card must be in [1, group size]"));
            }
            let seed = need(seed, "seed")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(MeasSet::sample_exact(sys.size(), c, &mut rng))
        }
        (None, None) => Err(usage("give one of --set and --card")),
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct IncrementStepPayload {
    q: String,
    component_rep: u64,
    density: String,
}

fn steps_payload(steps: &[IncrementStep]) -> Vec<IncrementStepPayload> {
    steps
        .iter()
        .map(|s| IncrementStepPayload {
            q: s.q.to_string(),
            component_rep: s.component_rep,
            density: rational_str(&s.density),
        })
        .collect()
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct IncrementParams {
    moduli: String,
    gens: Option<String>,
    set: Option<String>,
    card: Option<u64>,
    seed: Option<u64>,
    q: String,
    delta: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct IncrementPayload {
    group_size: u64,
    cardinality: u64,
    initial_density: String,
    k: String,
    final_density: String,
    final_component_rep: u64,
    final_component_size: usize,
    steps: Vec<IncrementStepPayload>,
}

pub fn system_increment(mut a: SystemIncrementArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_system_increment();
    }
    let sys = build_system(&a.moduli, &a.gens)?;
    let b = build_set(&sys, &a.set, a.card, a.seed)?;
    let qspec = need(a.q.clone(), "q")?;
    let q = parse::parse_biguint(&qspec).map_err(usage)?;
    let dspec = need(a.delta.clone(), "delta")?;
    let delta = parse::parse_rational(&dspec).map_err(usage)?;
    let trace = measure_increment(&sys, &b, &q, &delta).map_err(usage)?;
    let params = IncrementParams {
        moduli: a.moduli.clone().unwrap(),
        gens: a.gens.clone(),
        set: a.set.clone(),
        card: a.card,
        seed: a.seed,
        q: qspec,
        delta: dspec,
    };
    let payload = IncrementPayload {
        group_size: sys.size(),
        cardinality: b.cardinality(),
        initial_density: rational_str(&trace.initial_density),
        k: trace.k.to_string(),
        final_density: rational_str(&trace.final_density),
        final_component_rep: trace.final_component.rep,
        final_component_size: trace.final_component.members.len(),
        steps: steps_payload(&trace.steps),
    };
    resolve_format(a.format, false, "system increment")?;
    write_output(
        a.out.as_ref(),
        &render_json(&envelope("system-increment", params, payload))?,
    )?;
    Ok(())
}

fn selftest_system_increment() -> RunOutcome {
    let sys = FiniteSystem::cyclic(12, 1).map_err(|e| verif(e.to_string()))?;
    let b = MeasSet::from_indices(12, (0..12).filter(|i| i % 2 == 0));
    let delta = BigRational::new(BigInt::one(), BigInt::from(4));
    let trace = measure_increment(&sys, &b, &BigUint::from(2u32), &delta)
        .map_err(|e| verif(e.to_string()))?;
    if trace.k != BigUint::from(2u32)
        || trace.steps.len() != 1
        || !trace.final_density.is_one()
    {
        return Err(verif("even-set increment trace mismatch".to_string()));
    }
    println!("selftest system increment: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RemarkParams {
    remark_m: u64,
    remark_k0: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RemarkShiftPayload {
    k: u64,
    a0: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RemarkPayload {
    mode: String,
    modulus: u64,
    b_cardinality: u64,
    shifts: Vec<RemarkShiftPayload>,
    expected_failure_reproduced: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SarkozyParams {
    moduli: String,
    gens: Option<String>,
    set: Option<String>,
    card: Option<u64>,
    seed: Option<u64>,
    family: String,
    eps: String,
    c: String,
    q0cap: u64,
    nscan: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct MemberOutcomePayload {
    member: usize,
    best_n: Option<i64>,
    best_measure: Option<String>,
    satisfied: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SarkozyPayload {
    mode: String,
    q0: u64,
    q: String,
    delta: String,
    k: String,
    initial_density: String,
    final_density: String,
    steps: Vec<IncrementStepPayload>,
    outcomes: Vec<MemberOutcomePayload>,
    success: bool,
}

pub fn system_sarkozy(mut a: SystemSarkozyArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_system_sarkozy();
    }
    if a.remark_m.is_some() || a.remark_k0.is_some() {
        let m = need(a.remark_m, "remark-m")?;
        let k0 = need(a.remark_k0, "remark-k0")?;
        if m == 0 || k0 == 0 {
            return Err(usage("remark parameters must be positive"));
        }
        let rep = remark_counterexample(m, k0).map_err(|e| match e {
            SystemsError::NoDisjointShift { .. } => verif(e.to_string()),
            other => usage(other),
        })?;
        let params = RemarkParams { remark_m: m, remark_k0: k0 };
        let payload = RemarkPayload {
            mode: "remark".to_string(),
            modulus: rep.modulus,
            b_cardinality: rep.b_card,
            shifts: rep
                .per_k
                .iter()
                .map(|(k, a0)| RemarkShiftPayload { k: *k, a0: *a0 })
                .collect(),
            expected_failure_reproduced: true,
        };
        resolve_format(a.format, false, "system sarkozy")?;
        write_output(
            a.out.as_ref(),
            &render_json(&envelope("system-sarkozy-remark", params, payload))?,
        )?;
        return Ok(());
    }
    let sys = build_system(&a.moduli, &a.gens)?;
    let b = build_set(&sys, &a.set, a.card, a.seed)?;
    let fam_spec = need(a.family.clone(), "family")?;
    let polys = parse::parse_polyvecs(&fam_spec).map_err(usage)?;
    let mut family = Vec::new();
    for (i, p) in polys.iter().enumerate() {
        let c = index_to_biguint(&mult_complexity(p))
            .ok_or_else(|| usage(format!("family member {i} has infinite complexity")))?;
        family.push(FamilyMember {
            poly: p.clone(),
            declared_degree: p.degree() as u32,
            declared_complexity: c,
        });
    }
    let eps_spec = need(a.eps.clone(), "eps")?;
    let eps = parse::parse_rational(&eps_spec).map_err(usage)?;
    let c_spec = a.c.clone().unwrap_or_else(|| "1".to_string());
    let c = parse::parse_rational(&c_spec).map_err(usage)?;
    let q0cap = a.q0cap.unwrap_or(DEFAULT_Q0_CAP);
    let nscan = a.nscan.unwrap_or_else(|| sys.exponent());
    let rep = uniform_sarkozy_experiment(&sys, &b, &family, &eps, &c, q0cap, nscan)
        .map_err(usage)?;
    let params = SarkozyParams {
        moduli: a.moduli.clone().unwrap(),
        gens: a.gens.clone(),
        set: a.set.clone(),
        card: a.card,
        seed: a.seed,
        family: fam_spec,
        eps: eps_spec,
        c: c_spec,
        q0cap,
        nscan,
    };
    let payload = SarkozyPayload {
        mode: "experiment".to_string(),
        q0: rep.q0,
        q: rep.q.to_string(),
        delta: rational_str(&rep.delta),
        k: rep.k.to_string(),
        initial_density: rational_str(&rep.trace.initial_density),
        final_density: rational_str(&rep.trace.final_density),
        steps: steps_payload(&rep.trace.steps),
        outcomes: rep
            .outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| MemberOutcomePayload {
                member: i,
                best_n: o.best.as_ref().map(|(n, _)| *n),
                best_measure: o.best.as_ref().map(|(_, m)| rational_str(m)),
                satisfied: o.satisfied,
            })
            .collect(),
        success: rep.success,
    };
    resolve_format(a.format, false, "system sarkozy")?;
    write_output(
        a.out.as_ref(),
        &render_json(&envelope("system-sarkozy", params, payload))?,
    )?;
    if !rep.success {
        let bad = rep.outcomes.iter().position(|o| !o.satisfied).unwrap_or(0);
        return Err(verif(format!(
            "family member {bad} found no positive recurrence at the uniform k"
        )));
    }
    Ok(())
}

fn selftest_system_sarkozy() -> RunOutcome {
    let rep = remark_counterexample(3, 4).map_err(|e| verif(e.to_string()))?;
    if rep.per_k != vec![(1, 4), (2, 2), (3, 2), (4, 1)] {
        return Err(verif(format!("remark shifts mismatch: {:?}", rep.per_k)));
    }
    let sys = FiniteSystem::cyclic(4099, 1).map_err(|e| verif(e.to_string()))?;
    let b = MeasSet::from_indices(4099, 0..2100);
    let family = vec![FamilyMember {
        poly: PolyVec::from_i64_monomials(&[&[0, 0, 1]]),
        declared_degree: 2,
        declared_complexity: BigUint::one(),
    }];
    let eps = BigRational::new(BigInt::one(), BigInt::from(2));
    let rep = uniform_sarkozy_experiment(&sys, &b, &family, &eps, &BigRational::one(), 5000, 4099)
        .map_err(|e| verif(e.to_string()))?;
    if rep.q0 != 4097 || !rep.k.is_one() || !rep.success {
        return Err(verif(format!(
            "prime-modulus run mismatch: q0={}, k={}, success={}",
            rep.q0, rep.k, rep.success
        )));
    }
    println!("selftest system sarkozy: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BogParams {
    moduli: String,
    gens: Option<String>,
    set: Option<String>,
    card: Option<u64>,
    seed: Option<u64>,
    xmod: Option<u64>,
    ymod: Option<u64>,
    rcoeffs: String,
    eps: String,
    c: String,
    materialize_cap: u64,
    nscan: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BogStagePayload {
    q0: String,
    q_mods: Vec<u64>,
    worst_ratio: String,
    passed: bool,
    component_rep: u64,
    density: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BogTargetPayload {
    target: u64,
    n: Option<i64>,
    measure: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BogPayload {
    shift_complexity: String,
    delta: String,
    boost_bound: usize,
    stage_count: usize,
    stages: Vec<BogStagePayload>,
    k: String,
    verification: Vec<BogTargetPayload>,
    success: bool,
}

pub fn system_bog(mut a: SystemBogArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_system_bog();
    }
    let sys = build_system(&a.moduli, &a.gens)?;
    if sys.rank() != 2 {
        return Err(usage("bog needs exactly two moduli"));
    }
    let structured = a.xmod.is_some() || a.ymod.is_some();
    let explicit = a.set.is_some() || a.card.is_some();
    if structured && explicit {
        return Err(usage("give either --xmod/--ymod or --set/--card, not both"));
    }
    let b = if structured {
        let xm = a.xmod.unwrap_or(1);
        let ym = a.ymod.unwrap_or(1);
        if xm == 0 || ym == 0 {
            return Err(usage("xmod and ymod must be positive"));
        }
        MeasSet::filter(&sys, |co| co[0] % xm == 0 && co[1] % ym == 0)
    } else {
        build_set(&sys, &a.set, a.card, a.seed)?
    };
    let rspec = need(a.rcoeffs.clone(), "rcoeffs")?;
    let rcoeffs = parse::parse_bigint_list(&rspec).map_err(usage)?;
    let eps_spec = need(a.eps.clone(), "eps")?;
    let eps = parse::parse_rational(&eps_spec).map_err(usage)?;
    let c_spec = a.c.clone().unwrap_or_else(|| "1".to_string());
    let c = parse::parse_rational(&c_spec).map_err(usage)?;
    let cap = a.materialize_cap.unwrap_or(DEFAULT_Q0_CAP);
    let nscan = a.nscan.unwrap_or_else(|| sys.exponent());
    let rep = bogolyubov_iterate(&sys, &b, &rcoeffs, &eps, &c, cap, nscan).map_err(|e| match e {
        SystemsError::StageOverflow { .. } => verif(e.to_string()),
        other => usage(other),
    })?;
    let params = BogParams {
        moduli: a.moduli.clone().unwrap(),
        gens: a.gens.clone(),
        set: a.set.clone(),
        card: a.card,
        seed: a.seed,
        xmod: a.xmod,
        ymod: a.ymod,
        rcoeffs: rspec,
        eps: eps_spec,
        c: c_spec,
        materialize_cap: cap,
        nscan,
    };
    let payload = BogPayload {
        shift_complexity: rep.r_d.to_string(),
        delta: rational_str(&rep.delta),
        boost_bound: rep.boost_bound,
        stage_count: rep.stages.len(),
        stages: rep
            .stages
            .iter()
            .map(|s| BogStagePayload {
                q0: s.q0.to_string(),
                q_mods: s.q_mods.clone(),
                worst_ratio: rational_str(&s.worst_ratio),
                passed: s.passed,
                component_rep: s.component_rep,
                density: rational_str(&s.density),
            })
            .collect(),
        k: rep.k.to_string(),
        verification: rep
            .verification
            .iter()
            .map(|(t, best)| BogTargetPayload {
                target: *t,
                n: best.as_ref().map(|(n, _)| *n),
                measure: best.as_ref().map(|(_, m)| rational_str(m)),
            })
            .collect(),
        success: rep.success,
    };
    resolve_format(a.format, false, "system bog")?;
    write_output(
        a.out.as_ref(),
        &render_json(&envelope("system-bog", params, payload))?,
    )?;
    if !rep.success {
        let bad = rep
            .verification
            .iter()
            .find(|(_, best)| best.is_none())
            .map(|(t, _)| *t)
            .unwrap_or(0);
        return Err(verif(format!(
            "residue target {bad} found no positive recurrence at the final k"
        )));
    }
    Ok(())
}

fn selftest_system_bog() -> RunOutcome {
    let eps = BigRational::new(BigInt::one(), BigInt::from(2));
    let one = BigRational::one();
    let rc: Vec<BigInt> = [0, 0, 1].iter().map(|&v| BigInt::from(v)).collect();
    let sys = FiniteSystem::grid(12, 12).map_err(|e| verif(e.to_string()))?;
    let full = MeasSet::full(sys.size());
    let rep = bogolyubov_iterate(&sys, &full, &rc, &eps, &one, 100_000, 12)
        .map_err(|e| verif(e.to_string()))?;
    if !rep.k.is_one() || !rep.success || rep.stages.len() != 1 {
        return Err(verif("full-grid iteration mismatch".to_string()));
    }
    let sys = FiniteSystem::grid(48, 48).map_err(|e| verif(e.to_string()))?;
    let b = MeasSet::filter(&sys, |co| co[0] % 4 == 0 && co[1] % 2 == 0);
    let rep = bogolyubov_iterate(&sys, &b, &rc, &eps, &one, 100_000, 48)
        .map_err(|e| verif(e.to_string()))?;
    let k_mod_4 = (&rep.k % BigUint::from(4u32)).is_zero();
    if !rep.success || !k_mod_4 || rep.stages.len() != 2 {
        return Err(verif("structured-grid iteration mismatch".to_string()));
    }
    println!("selftest system bog: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QuadformParams {
    form: String,
    l: i64,
    density: f64,
    lo: i64,
    hi: i64,
    seed: u64,
    m: i64,
    kmax: u64,
    budget: u64,
    require_cover: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QuadformPayload {
    window_cardinality: u64,
    window_density: f64,
    diff_count: usize,
    image_count: usize,
    coverage: CoveragePayload,
}

pub fn scan_quadform(mut a: ScanQuadformArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_scan_quadform();
    }
    let form_spec = need(a.form.clone(), "form")?;
    let form = QuadForm::parse(&form_spec)
        .ok_or_else(|| usage("unknown form; expected xy-z2, x2+y2-z2, or x2-y2-z2"))?;
    let l = a.l.unwrap_or(2000);
    let density = a.density.unwrap_or(0.3);
    if !(0.0..=1.0).contains(&density) {
        return Err(usage("density must lie in [0, 1]"));
    }
    let lo = a.lo.unwrap_or(0);
    let hi = a.hi.unwrap_or(l);
    let seed = need(a.seed, "seed")?;
    let m = a.m.unwrap_or(l);
    if m < 0 {
        return Err(usage("m must be nonnegative"));
    }
    let kmax = a.kmax.unwrap_or(8);
    let budget = a.budget.unwrap_or(DEFAULT_MEMORY_BUDGET);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = Window::random_density(l, lo, hi, density, &mut rng).map_err(usage)?;
    if b.cardinality() == 0 {
        return Err(usage("random window came out empty; raise density or widen the range"));
    }
    let d = diff_set(&b).map_err(usage)?;
    let image = quadform_image(&d, form, m, budget).map_err(usage)?;
    let cover = find_k_cover(&image, form.name(), m, kmax);
    let params = QuadformParams {
        form: form_spec,
        l,
        density,
        lo,
        hi,
        seed,
        m,
        kmax,
        budget,
        require_cover: a.require_cover,
    };
    let payload = QuadformPayload {
        window_cardinality: b.cardinality(),
        window_density: b.density(),
        diff_count: d.len(),
        image_count: image.len(),
        coverage: coverage_payload(&cover),
    };
    match resolve_format(a.format, true, "scan quadform")? {
        OutputFormat::Json => write_output(
            a.out.as_ref(),
            &render_json(&envelope("scan-quadform", params, payload))?,
        )?,
        OutputFormat::Csv => write_output(a.out.as_ref(), &emit::coverage_csv(&cover.per_k))?,
    }
    if a.require_cover && cover.covering_k.is_none() {
        return Err(verif(format!("no k at or below {kmax} covers [-{}, {}]", m / 2, m / 2)));
    }
    Ok(())
}

fn selftest_scan_quadform() -> RunOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for form in [QuadForm::XyMinusZ2, QuadForm::X2PlusY2MinusZ2, QuadForm::X2MinusY2MinusZ2] {
        let b = Window::random_density(60, 0, 60, 0.4, &mut rng).map_err(|e| verif(e.to_string()))?;
        let d = diff_set(&b).map_err(|e| verif(e.to_string()))?;
        let fast = quadform_image(&d, form, 150, DEFAULT_MEMORY_BUDGET)
            .map_err(|e| verif(e.to_string()))?;
        let slow = quadform_image_naive(&d, form, 150);
        if fast != slow {
            return Err(verif(format!("image mismatch for {}", form.name())));
        }
    }
    println!("selftest scan quadform: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ScanBogParams {
    l: i64,
    xmod: u64,
    ymod: u64,
    rcoeffs: String,
    m: i64,
    kmax: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ScanBogPayload {
    window_cardinality: u64,
    window_density: f64,
    image_count: usize,
    coverage: CoveragePayload,
}

pub fn scan_bog(mut a: ScanBogArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_scan_bog();
    }
    let l = a.l.unwrap_or(32);
    let xm = a.xmod.unwrap_or(1);
    let ym = a.ymod.unwrap_or(1);
    if xm == 0 || ym == 0 {
        return Err(usage("xmod and ymod must be positive"));
    }
    let rspec = a.rcoeffs.clone().unwrap_or_else(|| "0,0,1".to_string());
    let rcoeffs = parse::parse_i64_list(&rspec).map_err(usage)?;
    let m = a.m.unwrap_or(l);
    if m < 0 {
        return Err(usage("m must be nonnegative"));
    }
    let kmax = a.kmax.unwrap_or(8);
    let e = Window2::from_predicate(l, |x, y| {
        x.rem_euclid(xm as i64) == 0 && y.rem_euclid(ym as i64) == 0
    })
    .map_err(usage)?;
    let (image, cover) = poly_bog_scan(&e, &rcoeffs, m, kmax).map_err(usage)?;
    let params = ScanBogParams { l, xmod: xm, ymod: ym, rcoeffs: rspec, m, kmax };
    let payload = ScanBogPayload {
        window_cardinality: e.cardinality(),
        window_density: e.density(),
        image_count: image.len(),
        coverage: coverage_payload(&cover),
    };
    match resolve_format(a.format, true, "scan bog")? {
        OutputFormat::Json => write_output(
            a.out.as_ref(),
            &render_json(&envelope("scan-bog", params, payload))?,
        )?,
        OutputFormat::Csv => write_output(a.out.as_ref(), &emit::coverage_csv(&cover.per_k))?,
    }
    Ok(())
}

fn selftest_scan_bog() -> RunOutcome {
    let structured = Window2::from_predicate(32, |x, y| x.rem_euclid(4) == 0 && y.rem_euclid(2) == 0)
        .map_err(|e| verif(e.to_string()))?;
    let (_, cover) = poly_bog_scan(&structured, &[0, 0, 1], 48, 8).map_err(|e| verif(e.to_string()))?;
    if cover.covering_k != Some(4) {
        return Err(verif(format!("structured cover mismatch: {:?}", cover.covering_k)));
    }
    let full = Window2::full(32).map_err(|e| verif(e.to_string()))?;
    let (_, cover) = poly_bog_scan(&full, &[0, 0, 1], 48, 8).map_err(|e| verif(e.to_string()))?;
    if cover.covering_k != Some(1) {
        return Err(verif(format!("full cover mismatch: {:?}", cover.covering_k)));
    }
    println!("selftest scan bog: ok");
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BohrParams {
    theta: String,
    eps: String,
    l: i64,
    kmax: u64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct EscapePayload {
    k: u64,
    first_escape: Option<i64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BohrPayload {
    l: i64,
    bohr_cardinality: u64,
    bohr_density: f64,
    values_checked: u64,
    all_values_in_dilated: bool,
    rational_theta: bool,
    escapes: Vec<EscapePayload>,
    coverage: CoveragePayload,
}

pub fn scan_bohr(mut a: ScanBohrArgs) -> RunOutcome {
    if let Some(p) = a.config.take() {
        a = a.merge(load_config(&p)?);
    }
    if a.selftest {
        return selftest_scan_bohr();
    }
    let theta_spec = need(a.theta.clone(), "theta")?;
    let theta = parse::parse_rational(&theta_spec).map_err(usage)?;
    let eps_spec = a.eps.clone().unwrap_or_else(|| "1/10".to_string());
    let eps = parse::parse_rational(&eps_spec).map_err(usage)?;
    let l = a.l.unwrap_or(2000);
    let kmax = a.kmax.unwrap_or(10);
    let rep = bohr_negative_control(&theta, &eps, l, kmax).map_err(usage)?;
    let params = BohrParams { theta: theta_spec, eps: eps_spec, l, kmax };
    let payload = BohrPayload {
        l: rep.l,
        bohr_cardinality: rep.bohr_cardinality,
        bohr_density: rep.bohr_density,
        values_checked: rep.values_checked,
        all_values_in_dilated: rep.all_values_in_dilated,
        rational_theta: rep.rational_theta,
        escapes: rep
            .escapes
            .iter()
            .map(|(k, e)| EscapePayload { k: *k, first_escape: *e })
            .collect(),
        coverage: coverage_payload(&rep.coverage),
    };
    match resolve_format(a.format, true, "scan bohr")? {
        OutputFormat::Json => write_output(
            a.out.as_ref(),
            &render_json(&envelope("scan-bohr", params, payload))?,
        )?,
        OutputFormat::Csv => write_output(a.out.as_ref(), &emit::coverage_csv(&rep.coverage.per_k))?,
    }
    if !rep.all_values_in_dilated {
        return Err(verif("a structured value escaped the dilated Bohr set"));
    }
    if !rep.rational_theta {
        if let Some(k) = rep.coverage.covering_k {
            return Err(verif(format!(
                "coverage succeeded at k={k} despite an irrational-like theta"
            )));
        }
    }
    Ok(())
}

fn selftest_scan_bohr() -> RunOutcome {
    let golden = BigRational::new(BigInt::from(10946), BigInt::from(17711));
    let tenth = BigRational::new(BigInt::one(), BigInt::from(10));
    let rep = bohr_negative_control(&golden, &tenth, 400, 10).map_err(|e| verif(e.to_string()))?;
    let all_escape = rep.escapes.iter().all(|(_, e)| e.is_some());
    if !rep.all_values_in_dilated
        || rep.rational_theta
        || rep.coverage.covering_k.is_some()
        || !all_escape
    {
        return Err(verif("golden-convergent control mismatch".to_string()));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let rep = bohr_negative_control(&half, &tenth, 200, 4).map_err(|e| verif(e.to_string()))?;
    if !rep.rational_theta
        || rep.coverage.covering_k != Some(2)
        || rep.escapes[1].1.is_some()
        || !rep.all_values_in_dilated
    {
        return Err(verif("rational-theta control mismatch".to_string()));
    }
    println!("selftest scan bohr: ok");
    Ok(())
}
