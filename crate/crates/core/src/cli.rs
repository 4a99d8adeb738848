//! Commands behind the `star-lebesgue` binary.
//!
//! Every command returns an [`Outcome`]: a process exit code together with a
//! JSON report. Errors are reported as JSON too, so scripted callers never
//! have to scrape stderr.
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | `verify` ran and at least one check failed |
//! | 2 | unreadable or malformed input, invalid algebra, bad parameters |
//! | 3 | an input functional is not representable |

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{cyclic_group_table, symmetric_group_table, AlgebraFile, StarAlgebra};
use crate::decompose::{
    check_maximality, commutant_compression, commutant_contraction, commutant_spectral_projections,
    decompose_spaces, is_absolutely_continuous, is_singular, mutual_ac, DecompositionResult,
    MaximalityVerdict,
};
use crate::error::Error;
use crate::functional::{
    check_representable, leq_margin, random_representable, random_representable_with_support,
    Functional, RepresentabilityCertificate,
};
use crate::gns::{build_gns, GnsSpace};
use crate::DEFAULT_TOL;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_NOT_REPRESENTABLE: i32 = 3;

pub const BUILDERS: [&str; 4] = ["function", "matrix", "cyclic", "symmetric"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tolerance: f64,
    pub seed: u64,
    /// Report file for `decompose`, `verify` and `gns`; target directory for
    /// `generate`. Reports go to stdout when absent.
    pub output_path: Option<PathBuf>,
    pub pretty: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { tolerance: DEFAULT_TOL, seed: 0, output_path: None, pretty: false }
    }
}

impl RunConfig {
    pub fn new(tolerance: f64, seed: u64, output_path: Option<PathBuf>, pretty: bool) -> crate::Result<Self> {
        if !(tolerance > 0.0 && tolerance < 1e-2) {
            return Err(Error::InvalidTolerance(tolerance));
        }
        Ok(RunConfig { tolerance, seed, output_path, pretty })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { code: EXIT_OK, report }
    }

    /// Report text with a trailing newline.
    pub fn render(&self, pretty: bool) -> String {
        let mut text = if pretty {
            serde_json::to_string_pretty(&self.report)
        } else {
            serde_json::to_string(&self.report)
        }
        .expect("reports are plain JSON values");
        text.push('\n');
        text
    }

    /// Writes the report to `output_path`, or stdout.
    pub fn emit(&self, config: &RunConfig) -> std::io::Result<()> {
        let text = self.render(config.pretty);
        match &config.output_path {
            Some(path) => fs::write(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Debug)]
enum Failure {
    Io { path: PathBuf, message: String },
    Parse { path: PathBuf, field: String, line: usize, column: usize, message: String },
    Invalid { message: String, details: Value },
    NotRepresentable { which: &'static str, message: String, certificate: Option<Box<RepresentabilityCertificate>> },
}

impl Failure {
    fn from_error(which: &'static str, err: Error) -> Self {
        match err {
            Error::NotRepresentable(cert) => Failure::NotRepresentable {
                which,
                message: format!("{which} is not representable"),
                certificate: Some(cert),
            },
            e @ Error::IllDefinedRepresentation { .. } => {
                Failure::NotRepresentable { which, message: format!("{which}: {e}"), certificate: None }
            }
            e => Failure::Invalid { message: format!("{which}: {e}"), details: Value::Null },
        }
    }

    fn into_outcome(self, command: &str) -> Outcome {
        let (code, body) = match self {
            Failure::Io { path, message } => (
                EXIT_INVALID,
                json!({ "kind": "io", "path": path, "message": message }),
            ),
            Failure::Parse { path, field, line, column, message } => (
                EXIT_INVALID,
                json!({
                    "kind": "malformed_json",
                    "path": path,
                    "field": field,
                    "line": line,
                    "column": column,
                    "message": message,
                }),
            ),
            Failure::Invalid { message, details } => (
                EXIT_INVALID,
                json!({ "kind": "invalid_input", "message": message, "details": details }),
            ),
            Failure::NotRepresentable { which, message, certificate } => (
                EXIT_NOT_REPRESENTABLE,
                json!({
                    "kind": "not_representable",
                    "functional": which,
                    "message": message,
                    "certificate": certificate,
                }),
            ),
        };
        Outcome { code, report: json!({ "status": "error", "command": command, "error": body }) }
    }
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io { path: path.to_path_buf(), message: e.to_string() })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let parse_failure = |field: String, e: &serde_json::Error| Failure::Parse {
        path: path.to_path_buf(),
        field,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    let value = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| parse_failure(e.path().to_string(), e.inner()))?;
    de.end().map_err(|e| parse_failure(".".into(), &e))?;
    Ok(value)
}

fn load_algebra(path: &Path) -> Result<StarAlgebra, Failure> {
    let file: AlgebraFile = load_json(path)?;
    let alg = StarAlgebra::from_file(&file)
        .map_err(|e| Failure::Invalid { message: e.to_string(), details: Value::Null })?;
    let report = alg.validate();
    if !report.is_valid() {
        return Err(Failure::Invalid {
            message: format!("algebra axioms fail: {report}"),
            details: serde_json::to_value(&report).expect("serializable"),
        });
    }
    Ok(alg)
}

fn load_functional(path: &Path, alg: &StarAlgebra, which: &str) -> Result<Functional, Failure> {
    let f: Functional = load_json(path)?;
    if f.dim() != alg.dim() {
        return Err(Failure::Invalid {
            message: format!("{which}: expected {} values, found {}", alg.dim(), f.dim()),
            details: Value::Null,
        });
    }
    Ok(f)
}

fn gns_of(alg: &StarAlgebra, f: &Functional, which: &'static str, tol: f64) -> Result<GnsSpace, Failure> {
    build_gns(alg, f, tol).map_err(|e| Failure::from_error(which, e))
}

struct Inputs {
    alg: StarAlgebra,
    f: Functional,
    g: Functional,
    gns_f: GnsSpace,
    gns_g: GnsSpace,
}

fn load_pair(algebra: &Path, f_file: &Path, g_file: &Path, tol: f64) -> Result<Inputs, Failure> {
    let alg = load_algebra(algebra)?;
    let f = load_functional(f_file, &alg, "f")?;
    let g = load_functional(g_file, &alg, "g")?;
    let gns_f = gns_of(&alg, &f, "f", tol)?;
    let gns_g = gns_of(&alg, &g, "g", tol)?;
    Ok(Inputs { alg, f, g, gns_f, gns_g })
}

fn decompose_inputs(inp: &Inputs, tol: f64) -> Result<DecompositionResult, Failure> {
    decompose_spaces(&inp.alg, &inp.f, &inp.g, &inp.gns_f, &inp.gns_g, tol)
        .map_err(|e| Failure::from_error("decomposition", e))
}

pub fn cmd_decompose(algebra: &Path, f_file: &Path, g_file: &Path, config: &RunConfig) -> Outcome {
    let tol = config.tolerance;
    let run = || -> Result<Value, Failure> {
        let inp = load_pair(algebra, f_file, g_file, tol)?;
        let result = decompose_inputs(&inp, tol)?;
        Ok(json!({
            "status": "ok",
            "command": "decompose",
            "tolerance": tol,
            "dim": inp.alg.dim(),
            "result": result,
        }))
    };
    run().map_or_else(|e| e.into_outcome("decompose"), Outcome::ok)
}

/// One named entry of the `verify` report. A check passes only when its
/// condition holds and `residual <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub statement: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub passed: bool,
    /// Continuous quantity behind a yes/no verdict.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn new(name: &'static str, statement: &'static str, residual: f64, threshold: f64) -> Self {
        Check { name, statement, residual, threshold, passed: residual <= threshold, witness: None, detail: None }
    }

    /// Verdict checks count failed verdicts against a threshold of zero.
    fn verdicts(name: &'static str, statement: &'static str, verdicts: &[bool]) -> Self {
        let failed = verdicts.iter().filter(|&&v| !v).count();
        Check::new(name, statement, failed as f64, 0.0)
    }

    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    fn with_witness(mut self, witness: f64) -> Self {
        self.witness = Some(witness);
        self
    }

    fn requiring(mut self, condition: bool) -> Self {
        self.passed &= condition;
        self
    }

    fn errored(name: &'static str, statement: &'static str, err: impl std::fmt::Display) -> Self {
        Check::new(name, statement, f64::INFINITY, 0.0).with_detail(err.to_string())
    }
}

fn psd_shortfall(cert: &RepresentabilityCertificate) -> f64 {
    if cert.scale == 0.0 {
        0.0
    } else {
        (-cert.min_eigenvalue / cert.scale).max(0.0)
    }
}

/// Number of seeded commutant compressions tried by `verify`, on top of the
/// spectral projections of one random commutant element.
pub const CONTRACTIONS_PER_RUN: usize = 3;

/// Test functionals for the maximality check: multiples of the computed
/// absolutely continuous part and compressions of its vector by commutant
/// elements.
pub fn maximality_probes(gns_g: &GnsSpace, truth: &DecompositionResult, seed: u64, tol: f64) -> Vec<(String, Functional)> {
    let mut probes: Vec<(String, Functional)> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&t| (format!("{t} g_a"), truth.g_a.scale(t).expect("nonnegative")))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (j, p) in commutant_spectral_projections(gns_g, &mut rng, tol).iter().enumerate() {
        probes.push((format!("spectral projection {j}"), commutant_compression(gns_g, truth, p)));
    }
    for j in 0..CONTRACTIONS_PER_RUN {
        if let Some(w) = commutant_contraction(gns_g, &mut rng, tol) {
            probes.push((format!("contraction {j}"), commutant_compression(gns_g, truth, &w)));
        }
    }
    probes
}

fn verify_checks(inp: &Inputs, truth: &DecompositionResult, reported: &DecompositionResult, config: &RunConfig) -> Vec<Check> {
    let tol = config.tolerance;
    let alg = &inp.alg;
    let mut checks = Vec::new();

    for (name, gns, f) in [("gns_round_trip_f", &inp.gns_f, &inp.f), ("gns_round_trip_g", &inp.gns_g, &inp.g)] {
        checks.push(Check::new(name, "<pi(a) zeta, zeta> reproduces the functional", gns.round_trip_residual(f), tol));
    }
    for (name, gns) in [("homomorphism_f", &inp.gns_f), ("homomorphism_g", &inp.gns_g)] {
        let statement = "pi(ab) = pi(a) pi(b) and pi(a*) = pi(a)^H";
        checks.push(match gns.homomorphism_residual(alg) {
            Ok(r) => Check::new(name, statement, r, tol),
            Err(e) => Check::errored(name, statement, e),
        });
    }
    checks.push(Check::new(
        "orthogonal_projection",
        "P onto mul T is self-adjoint and idempotent",
        reported.certificate.projection_residual,
        tol,
    ));
    let additivity = {
        let gn = inp.g.norm();
        let diff = match reported.g_a.add(&reported.g_s) {
            Ok(sum) => sum.max_abs_diff(&inp.g),
            Err(_) => f64::INFINITY,
        };
        if gn == 0.0 { diff } else { diff / gn }
    };
    checks.push(Check::new("additivity", "g = g_a + g_s", additivity, tol));
    checks.push(Check::new(
        "invariance",
        "P commutes with pi_g(a) and mul T is pi_g-invariant",
        reported.certificate.invariance_residual,
        10.0 * tol,
    ));
    checks.push(Check::new(
        "multivalued_part_routes",
        "mul T equals the image of ker G_f in H_g",
        reported.certificate.multivalued_route_residual,
        10.0 * tol,
    ));

    let statement = "g_a is absolutely continuous with respect to f";
    checks.push(match is_absolutely_continuous(alg, &inp.f, &reported.g_a, tol) {
        Ok(v) => Check::verdicts("absolutely_continuous_part", statement, &[v.holds])
            .with_witness(v.residual),
        Err(e) => Check::errored("absolutely_continuous_part", statement, e),
    });
    let statement = "g_s and f are singular";
    checks.push(match is_singular(alg, &inp.f, &reported.g_s, tol) {
        Ok(v) => Check::verdicts("singular_part", statement, &[v.holds])
            .with_detail(format!("mul T has dimension {} of {}", v.mul_dim, v.space_dim)),
        Err(e) => Check::errored("singular_part", statement, e),
    });

    let statement = "g_a and g_s are representable";
    checks.push(
        match (check_representable(alg, &reported.g_a, tol), check_representable(alg, &reported.g_s, tol)) {
            (Ok(ca), Ok(cs)) => Check::new("parts_representable", statement, psd_shortfall(&ca).max(psd_shortfall(&cs)), tol)
                .requiring(ca.passes() && cs.passes()),
            (Err(e), _) | (_, Err(e)) => Check::errored("parts_representable", statement, e),
        },
    );
    let statement = "g_a <= g and g_s <= g";
    checks.push(match (leq_margin(alg, &reported.g_a, &inp.g), leq_margin(alg, &reported.g_s, &inp.g)) {
        (Ok(ma), Ok(ms)) => Check::new("parts_dominated", statement, (-ma).max(-ms).max(0.0), tol),
        (Err(e), _) | (_, Err(e)) => Check::errored("parts_dominated", statement, e),
    });

    let statement = "every h <= g with h absolutely continuous w.r.t. f satisfies h <= g_a";
    let mut worst = 0.0_f64;
    let mut applicable = 0;
    let mut skipped = 0;
    let mut failure: Option<String> = None;
    for (label, h) in maximality_probes(&inp.gns_g, truth, config.seed, tol) {
        match check_maximality(alg, &inp.f, &inp.g, reported, &h, tol) {
            Ok(MaximalityVerdict::Inapplicable { .. }) => skipped += 1,
            Ok(verdict) => {
                applicable += 1;
                if let (MaximalityVerdict::Violated { .. }, None) = (&verdict, &failure) {
                    failure = Some(label.clone());
                }
                let margin = leq_margin(alg, &h, &reported.g_a).unwrap_or(f64::NEG_INFINITY);
                worst = worst.max(-margin);
            }
            Err(e) => {
                worst = f64::INFINITY;
                failure.get_or_insert(format!("{label}: {e}"));
            }
        }
    }
    let mut detail = format!("{applicable} probes applied, {skipped} inapplicable");
    if let Some(label) = &failure {
        detail.push_str(&format!("; first violation at {label}"));
    }
    checks.push(Check::new("maximality", statement, worst.max(0.0), tol).requiring(failure.is_none()).with_detail(detail));

    match mutual_ac(alg, &inp.f, &inp.g, tol) {
        Ok(rec) => {
            checks.push(Check::verdicts(
                "mutual_absolute_continuity",
                "f_a and g_a are absolutely continuous with respect to each other",
                &[rec.fa_ll_ga.holds, rec.ga_ll_fa.holds],
            ));
            let ip = &rec.injective_part;
            checks.push(
                Check::new(
                    "injective_part",
                    "the part of T between the complements of ker T and mul T is an injective operator",
                    ip.single_valued_residual.max(ip.injectivity_residual),
                    10.0 * tol,
                )
                .with_detail(format!("ker T dimension {}, mul T dimension {}", ip.ker_dim, ip.mul_dim)),
            );
            checks.push(Check::new(
                "norm_identity",
                "f_a(a*a) = |(I - P_ker) Aa|^2 and g_a(a*a) = |(I - P_mul) Ba|^2",
                rec.norm_identity_residual,
                10.0 * tol,
            ));
        }
        Err(e) => {
            for name in ["mutual_absolute_continuity", "injective_part", "norm_identity"] {
                checks.push(Check::errored(name, "mutual absolute continuity battery", &e));
            }
        }
    }
    checks
}

pub fn cmd_verify(
    algebra: &Path,
    f_file: &Path,
    g_file: &Path,
    override_g_a: Option<&Path>,
    config: &RunConfig,
) -> Outcome {
    let tol = config.tolerance;
    let run = || -> Result<Outcome, Failure> {
        let inp = load_pair(algebra, f_file, g_file, tol)?;
        let truth = decompose_inputs(&inp, tol)?;
        let mut reported = truth.clone();
        if let Some(path) = override_g_a {
            reported.g_a = load_functional(path, &inp.alg, "override")?;
        }
        let checks = verify_checks(&inp, &truth, &reported, config);
        let failed = checks.iter().filter(|c| !c.passed).count();
        let report = json!({
            "status": if failed == 0 { "ok" } else { "failed" },
            "command": "verify",
            "tolerance": tol,
            "seed": config.seed,
            "overridden": override_g_a.is_some(),
            "passed": checks.len() - failed,
            "failed": failed,
            "checks": checks,
            "warnings": truth.certificate.warnings,
        });
        Ok(Outcome { code: if failed == 0 { EXIT_OK } else { EXIT_CHECK_FAILED }, report })
    };
    run().unwrap_or_else(|e| e.into_outcome("verify"))
}

pub fn cmd_gns(algebra: &Path, f_file: &Path, config: &RunConfig) -> Outcome {
    let tol = config.tolerance;
    let run = || -> Result<Value, Failure> {
        let alg = load_algebra(algebra)?;
        let f = load_functional(f_file, &alg, "f")?;
        let gns = gns_of(&alg, &f, "f", tol)?;
        let homomorphism = gns.homomorphism_residual(&alg).map_err(|e| Failure::from_error("f", e))?;
        Ok(json!({
            "status": "ok",
            "command": "gns",
            "tolerance": tol,
            "dim_h": gns.dim_h,
            "round_trip_residual": gns.round_trip_residual(&f),
            "homomorphism_residual": homomorphism,
            "gns": gns,
        }))
    };
    run().map_or_else(|e| e.into_outcome("gns"), Outcome::ok)
}

/// Builds one of the named algebras: `function n`, `matrix k`, `cyclic n`
/// (group algebra of ℤ/n) or `symmetric m` (group algebra of `S_m`, m ≤ 5).
pub fn build_named(builder: &str, param: usize) -> crate::Result<StarAlgebra> {
    match builder {
        "function" => StarAlgebra::function_algebra(param),
        "matrix" => StarAlgebra::matrix_algebra(param),
        "cyclic" => StarAlgebra::group_algebra(&cyclic_group_table(param)),
        "symmetric" if (1..=5).contains(&param) => StarAlgebra::group_algebra(&symmetric_group_table(param)),
        "symmetric" => Err(Error::InvalidAlgebra(format!("symmetric group degree must be in 1..=5, got {param}"))),
        other => Err(Error::InvalidAlgebra(format!(
            "unknown builder {other:?} (expected one of {})",
            BUILDERS.join(", ")
        ))),
    }
}

/// Writes `algebra.json` and `functional.json` into `config.output_path`
/// (default: the current directory). With `support = Some(i)` the
/// functional is confined to the left ideal generated by basis element `i`.
pub fn cmd_generate(builder: &str, param: usize, k: usize, support: Option<usize>, config: &RunConfig) -> Outcome {
    let run = || -> Result<Value, Failure> {
        let invalid = |e: Error| Failure::Invalid { message: e.to_string(), details: Value::Null };
        let alg = build_named(builder, param).map_err(invalid)?;
        let f = match support {
            Some(i) if i >= alg.dim() => {
                return Err(Failure::Invalid {
                    message: format!("support index {i} out of range for dimension {}", alg.dim()),
                    details: Value::Null,
                })
            }
            Some(i) => random_representable_with_support(&alg, k, &alg.basis_element(i), config.seed),
            None => random_representable(&alg, k, config.seed),
        }
        .map_err(invalid)?;
        let certificate = check_representable(&alg, &f, config.tolerance).map_err(invalid)?;

        let dir = config.output_path.clone().unwrap_or_else(|| PathBuf::from("."));
        let write = |name: &str, value: Value| -> Result<PathBuf, Failure> {
            let path = dir.join(name);
            let text = Outcome { code: EXIT_OK, report: value }.render(config.pretty);
            fs::write(&path, text).map_err(|e| Failure::Io { path: path.clone(), message: e.to_string() })?;
            Ok(path)
        };
        fs::create_dir_all(&dir).map_err(|e| Failure::Io { path: dir.clone(), message: e.to_string() })?;
        let algebra_path = write("algebra.json", serde_json::to_value(alg.to_file()).expect("serializable"))?;
        let functional_path = write("functional.json", serde_json::to_value(&f).expect("serializable"))?;
        Ok(json!({
            "status": "ok",
            "command": "generate",
            "builder": builder,
            "param": param,
            "k": k,
            "support": support,
            "seed": config.seed,
            "dim": alg.dim(),
            "algebra": algebra_path,
            "functional": functional_path,
            "valid": alg.validate().is_valid(),
            "certificate": certificate,
        }))
    };
    run().map_or_else(|e| e.into_outcome("generate"), Outcome::ok)
}
