#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;
use std::rc::Rc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use star_lebesgue::algebra::{cyclic_group_table, symmetric_group_table};
use star_lebesgue::functional::{random_representable, random_representable_with_support};
use star_lebesgue::{Element, Functional, StarAlgebra};

pub type C = Complex64;
pub type M = DMatrix<C>;

pub const TOL: f64 = 1e-9;

pub struct Instance {
    pub label: String,
    pub alg: Rc<StarAlgebra>,
    pub f: Functional,
    pub g: Functional,
}

pub struct NamedAlgebra {
    pub name: String,
    pub alg: Rc<StarAlgebra>,
    /// Elements used to confine random functionals to a left ideal.
    pub supports: Vec<Element>,
}

fn unit_vector(n: usize, entries: &[(usize, f64)]) -> Element {
    let mut v = vec![0.0; n];
    for &(i, x) in entries {
        v[i] += x;
    }
    Element::from_real(&v)
}

fn function_supports(n: usize) -> Vec<Element> {
    let mut out: Vec<Element> = (0..n).map(|i| Element::basis(n, i)).collect();
    if n > 2 {
        out.push(unit_vector(n, &(0..n / 2).map(|i| (i, 1.0)).collect::<Vec<_>>()));
    }
    out
}

fn matrix_supports(k: usize) -> Vec<Element> {
    let n = k * k;
    let mut out: Vec<Element> = (0..k).map(|i| Element::basis(n, i * k + i)).collect();
    if k > 2 {
        out.push(unit_vector(n, &[(0, 1.0), (k + 1, 1.0)]));
    }
    out
}

/// Averages over the cyclic subgroups `⟨g⟩`, `g ≠ e`, plus `(1 − g)/2` for
/// involutions: all self-adjoint idempotents.
fn group_supports(table: &[Vec<usize>]) -> Vec<Element> {
    let n = table.len();
    let e = 0;
    let mut out = Vec::new();
    for g in 1..n {
        let mut powers = vec![e];
        let mut x = g;
        while x != e {
            powers.push(x);
            x = table[x][g];
        }
        let w = 1.0 / powers.len() as f64;
        out.push(unit_vector(n, &powers.iter().map(|&p| (p, w)).collect::<Vec<_>>()));
        if powers.len() == 2 {
            out.push(unit_vector(n, &[(e, 0.5), (g, -0.5)]));
        }
    }
    out
}

fn summand_units(a1: &StarAlgebra, a2: &StarAlgebra) -> Vec<Element> {
    let (n1, n2) = (a1.dim(), a2.dim());
    let u1 = a1.unit().unwrap();
    let u2 = a2.unit().unwrap();
    let mut first = vec![C::new(0.0, 0.0); n1 + n2];
    let mut second = first.clone();
    first[..n1].copy_from_slice(u1.coeffs.as_slice());
    second[n1..].copy_from_slice(u2.coeffs.as_slice());
    vec![Element::from_coeffs(first), Element::from_coeffs(second)]
}

pub fn algebras() -> Vec<NamedAlgebra> {
    let mut out = Vec::new();
    let mut push = |name: String, alg: StarAlgebra, supports: Vec<Element>| {
        assert!(alg.validate().is_valid(), "{name} fails validation");
        out.push(NamedAlgebra { name, alg: Rc::new(alg), supports });
    };
    for n in 1..=8 {
        push(format!("C^{n}"), StarAlgebra::function_algebra(n).unwrap(), function_supports(n));
    }
    for k in 1..=3 {
        push(format!("M_{k}"), StarAlgebra::matrix_algebra(k).unwrap(), matrix_supports(k));
    }
    for n in 2..=4 {
        let t = cyclic_group_table(n);
        push(format!("C[Z{n}]"), StarAlgebra::group_algebra(&t).unwrap(), group_supports(&t));
    }
    let s3 = symmetric_group_table(3);
    push("C[S3]".into(), StarAlgebra::group_algebra(&s3).unwrap(), group_supports(&s3));

    let f2 = StarAlgebra::function_algebra(2).unwrap();
    let f3 = StarAlgebra::function_algebra(3).unwrap();
    let m2 = StarAlgebra::matrix_algebra(2).unwrap();
    let z2 = StarAlgebra::group_algebra(&cyclic_group_table(2)).unwrap();
    let z3 = StarAlgebra::group_algebra(&cyclic_group_table(3)).unwrap();
    for (name, a, b) in [("C^2+M_2", &f2, &m2), ("M_2+C[Z3]", &m2, &z3), ("C[Z2]+C^3", &z2, &f3)] {
        push(name.into(), StarAlgebra::direct_sum(a, b).unwrap(), summand_units(a, b));
    }
    out
}

pub const PER_ALGEBRA: usize = 30;

fn random_functional(a: &NamedAlgebra, supported: bool, rng: &mut ChaCha8Rng) -> Functional {
    let k = rng.random_range(1..=5);
    let seed = rng.random::<u64>();
    if supported {
        let s = &a.supports[rng.random_range(0..a.supports.len())];
        random_representable_with_support(&a.alg, k, s, seed).unwrap()
    } else {
        random_representable(&a.alg, k, seed).unwrap()
    }
}

/// Seeded corpus over all algebras of [`algebras`], mixing faithful,
/// rank-deficient and zero functionals.
pub fn corpus() -> Vec<Instance> {
    let mut out = Vec::new();
    for (ai, a) in algebras().iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + ai as u64);
        let n = a.alg.dim();
        for j in 0..PER_ALGEBRA {
            let (f, g) = match j % 6 {
                0 => (random_functional(a, false, &mut rng), random_functional(a, false, &mut rng)),
                1 | 4 => (random_functional(a, true, &mut rng), random_functional(a, false, &mut rng)),
                2 => (random_functional(a, false, &mut rng), random_functional(a, true, &mut rng)),
                3 => (random_functional(a, true, &mut rng), random_functional(a, true, &mut rng)),
                _ => match (j / 6) % 3 {
                    0 => (Functional::zero(n), random_functional(a, j % 2 == 0, &mut rng)),
                    1 => (random_functional(a, true, &mut rng), Functional::zero(n)),
                    _ => (Functional::zero(n), Functional::zero(n)),
                },
            };
            out.push(Instance { label: format!("{}#{j}", a.name), alg: a.alg.clone(), f, g });
        }
    }
    out
}

/// Orthogonal projector onto the column span of `x`, from its left singular
/// vectors above a relative cutoff of `1e-10`. The SVD comes from faer, whose
/// complex SVD is accurate on the rank-deficient inputs used here.
pub fn span_projector(x: &M) -> M {
    span_projector_scaled(x, 0.0)
}

/// As [`span_projector`], also discarding directions with singular value at
/// most `1e-10 · reference`.
pub fn span_projector_scaled(x: &M, reference: f64) -> M {
    let rows = x.nrows();
    if x.ncols() == 0 || rows == 0 {
        return M::zeros(rows, rows);
    }
    let xf = faer::Mat::<faer::c64>::from_fn(rows, x.ncols(), |i, j| faer::c64::new(x[(i, j)].re, x[(i, j)].im));
    let svd = xf.thin_svd().unwrap();
    let (u, s) = (svd.U(), svd.S().column_vector());
    let top = (0..s.nrows()).map(|i| s[i].re).fold(0.0_f64, f64::max);
    let mut p = M::zeros(rows, rows);
    for i in 0..s.nrows() {
        if top > 0.0 && s[i].re > 1e-10 * top.max(reference) {
            let v = M::from_fn(rows, 1, |r, _| C::new(u[(r, i)].re, u[(r, i)].im));
            p += &v * v.adjoint();
        }
    }
    p
}

/// Projector onto `{c : x c = 0}`.
pub fn null_projector(x: &M) -> M {
    let m = x.ncols();
    M::identity(m, m) - span_projector(&x.adjoint())
}

pub fn spectral_norm(m: &M) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> M {
    M::from_fn(rows, cols, |_, _| {
        let (a, b): (f64, f64) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        C::new(a, b)
    })
}

/// Spanning pairs `(X_j, A X_j + Y_j)` of a random relation whose domain,
/// kernel and multivalued part all have random dimensions.
pub fn random_relation(rng: &mut impl Rng) -> (M, M) {
    let h = rng.random_range(1..=12);
    let k = rng.random_range(1..=12);
    let m = rng.random_range(1..=14);
    let r1 = rng.random_range(0..=h.min(m));
    let r2 = rng.random_range(0..=k.min(m));
    let rank_a = rng.random_range(0..=h.min(k));
    let xs = random_matrix(h, r1, rng) * random_matrix(r1, m, rng);
    let a = random_matrix(k, rank_a, rng) * random_matrix(rank_a, h, rng);
    let ys = &a * &xs + random_matrix(k, r2, rng) * random_matrix(r2, m, rng);
    (xs, ys)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_star-lebesgue")
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_cli(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env_remove("STAR_LEBESGUE_TOL")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub struct Fixture {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub code: i32,
}

pub const FIXTURES: [Fixture; 5] = [
    Fixture { name: "two_point", args: &["decompose", "algebra.json", "f.json", "g.json"], code: 0 },
    Fixture { name: "matrix_vector_state", args: &["verify", "algebra.json", "f.json", "g.json"], code: 0 },
    Fixture { name: "not_representable", args: &["decompose", "algebra.json", "f.json", "g.json"], code: 3 },
    Fixture { name: "malformed", args: &["gns", "algebra.json", "f.json"], code: 2 },
    Fixture {
        name: "tampered",
        args: &["verify", "algebra.json", "f.json", "g.json", "--override", "g_a.json"],
        code: 1,
    },
];

fn json_close(a: &Value, b: &Value, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= 1e-12 * (1.0 + x.abs().max(y.abs())) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Array(xs), Value::Array(ys)) if xs.len() == ys.len() => xs
            .iter()
            .zip(ys)
            .enumerate()
            .try_for_each(|(i, (x, y))| json_close(x, y, &format!("{path}[{i}]"))),
        (Value::Object(xs), Value::Object(ys)) if xs.len() == ys.len() => xs.iter().try_for_each(|(k, x)| {
            ys.get(k)
                .ok_or_else(|| format!("{path}.{k}: missing"))
                .and_then(|y| json_close(x, y, &format!("{path}.{k}")))
        }),
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

/// Runs a fixture twice and compares with its golden report. With
/// `STAR_LEBESGUE_BLESS` set the golden file is rewritten instead.
pub fn check_fixture(fx: &Fixture) -> Result<Value, String> {
    let dir = fixtures_dir().join(fx.name);
    let first = run_cli(&dir, fx.args);
    let second = run_cli(&dir, fx.args);
    if first.code != fx.code {
        return Err(format!("exit code {} (expected {}): {}", first.code, fx.code, first.stderr.trim()));
    }
    if first.stdout != second.stdout || second.code != first.code {
        return Err("two runs differ".into());
    }
    let golden = dir.join("expected.json");
    if std::env::var_os("STAR_LEBESGUE_BLESS").is_some() {
        std::fs::write(&golden, &first.stdout).unwrap();
    }
    let expected: Value = serde_json::from_str(&std::fs::read_to_string(&golden).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let actual: Value = serde_json::from_str(&first.stdout).map_err(|e| format!("stdout is not JSON: {e}"))?;
    json_close(&actual, &expected, "$")?;
    Ok(actual)
}

/// Fixture-specific assertions on top of the golden comparison.
pub fn check_fixture_semantics(name: &str, report: &Value) -> Result<(), String> {
    let values = |v: &Value| -> Vec<(f64, f64)> {
        v["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()))
            .collect()
    };
    let close = |got: Vec<(f64, f64)>, want: &[f64]| {
        got.len() == want.len() && got.iter().zip(want).all(|(z, w)| (z.0 - w).abs() < 1e-12 && z.1.abs() < 1e-12)
    };
    let ok = match name {
        "two_point" => {
            close(values(&report["result"]["g_a"]), &[1.0, 0.0]) && close(values(&report["result"]["g_s"]), &[0.0, 1.0])
        }
        "matrix_vector_state" => report["failed"] == 0 && report["checks"].as_array().unwrap().len() >= 15,
        "not_representable" => {
            report["error"]["kind"] == "not_representable" && report["error"]["certificate"]["is_positive"] == false
        }
        "malformed" => report["error"]["kind"] == "malformed_json" && report["error"]["line"].as_u64().is_some(),
        "tampered" => report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .any(|c| (c["name"] == "maximality" || c["name"] == "additivity") && c["passed"] == false),
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!("{name}: report content does not match expectations"))
    }
}

/// `generate` writes identical files for identical seeds, a zero
/// functional for `k = 0`, and refuses unknown builders.
pub fn check_generate_contract() -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    let args = |out: &str| vec!["generate", "matrix", "2", "--k", "3", "--seed", "7", "--out", out].into_iter().map(String::from).collect::<Vec<_>>();
    for out in ["a", "b"] {
        let a = args(out);
        let r = run_cli(dir, &a.iter().map(String::as_str).collect::<Vec<_>>());
        if r.code != 0 {
            return Err(format!("generate failed: {}", r.stderr));
        }
    }
    for file in ["algebra.json", "functional.json"] {
        let x = std::fs::read(dir.join("a").join(file)).unwrap();
        let y = std::fs::read(dir.join("b").join(file)).unwrap();
        if x != y {
            return Err(format!("{file} differs between identical seeds"));
        }
    }
    let r = run_cli(dir, &["generate", "function", "3", "--k", "0", "--out", "z"]);
    let zero: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("z/functional.json")).unwrap()).unwrap();
    if r.code != 0 || zero["values"].as_array().unwrap().iter().any(|p| p[0] != 0.0 || p[1] != 0.0) {
        return Err("k = 0 does not give the zero functional".into());
    }
    if run_cli(dir, &["generate", "quaternion", "2"]).code != 2 {
        return Err("unknown builder not rejected with exit 2".into());
    }
    Ok(())
}
