//! Finite-dimensional *-algebras given by structure constants and an
//! involution matrix.
//!
//! An algebra with basis `b_0, …, b_{n−1}` stores the tensor
//! `mult[i][j][k]` with `b_i · b_j = Σ_k mult[i][j][k] b_k` and a matrix `S`
//! such that the coefficients of `a*` are `S · conj(coeffs(a))`. No unit is
//! assumed; when one exists it is recorded.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::{self, Pair};
use crate::linalg::{c, CMatrix, CVector};
use crate::C64;

/// An element of a [`StarAlgebra`], as coefficients over its basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub coeffs: CVector,
}

impl Element {
    pub fn zero(n: usize) -> Self {
        Element {
            coeffs: CVector::zeros(n),
        }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut e = Self::zero(n);
        e.coeffs[i] = c(1.0);
        e
    }

    pub fn from_coeffs(coeffs: Vec<C64>) -> Self {
        Element {
            coeffs: CVector::from_vec(coeffs),
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&x| c(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn scaled(&self, t: C64) -> Self {
        Element {
            coeffs: &self.coeffs * t,
        }
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        Element {
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        Element {
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl Mul<C64> for &Element {
    type Output = Element;
    fn mul(self, rhs: C64) -> Element {
        self.scaled(rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// `(b_i b_j) b_k ≠ b_i (b_j b_k)` in coefficient `l`; indices `[i, j, k, l]`.
    Associativity,
    /// `(b_i*)* ≠ b_i`; indices `[i]`.
    Involutivity,
    /// `(b_i b_j)* ≠ b_j* b_i*`; indices `[i, j]`.
    AntiMultiplicativity,
    /// `1 · b_i ≠ b_i`; indices `[i]`.
    UnitLeft,
    /// `b_i · 1 ≠ b_i`; indices `[i]`.
    UnitRight,
    /// `1* ≠ 1`; no indices.
    UnitSelfAdjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub indices: Vec<usize>,
    pub residual: f64,
}

/// Outcome of [`StarAlgebra::validate`]. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        write!(f, "{} violation(s)", self.violations.len())?;
        for v in self.violations.iter().take(5) {
            write!(f, "; {:?} at {:?} (residual {:.3e})", v.kind, v.indices, v.residual)?;
        }
        Ok(())
    }
}

/// A finite-dimensional complex *-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct StarAlgebra {
    dim: usize,
    labels: Vec<String>,
    /// Flattened `mult[i][j][k]` at `(i * n + j) * n + k`.
    mult: Vec<C64>,
    invol: CMatrix,
    unit: Option<CVector>,
    trace: Option<Vec<C64>>,
}

impl StarAlgebra {
    /// Assembles an algebra from raw data, checking shapes only. Use
    /// [`StarAlgebra::validate`] for the algebraic axioms.
    pub fn new(
        labels: Vec<String>,
        mult: Vec<C64>,
        invol: CMatrix,
        unit: Option<CVector>,
        trace: Option<Vec<C64>>,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidAlgebra("dimension must be positive".into()));
        }
        if mult.len() != n * n * n {
            return Err(Error::InvalidAlgebra(format!(
                "mult has {} entries, expected {}",
                mult.len(),
                n * n * n
            )));
        }
        if invol.shape() != (n, n) {
            return Err(Error::InvalidAlgebra(format!(
                "invol is {}x{}, expected {n}x{n}",
                invol.nrows(),
                invol.ncols()
            )));
        }
        if let Some(u) = &unit {
            check_len(n, u.len())?;
        }
        if let Some(t) = &trace {
            check_len(n, t.len())?;
        }
        Ok(StarAlgebra {
            dim: n,
            labels,
            mult,
            invol,
            unit,
            trace,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn invol_matrix(&self) -> &CMatrix {
        &self.invol
    }

    pub fn unit(&self) -> Option<Element> {
        self.unit.as_ref().map(|u| Element { coeffs: u.clone() })
    }

    /// Values of the canonical trace on the basis, when the builder recorded one.
    pub fn trace(&self) -> Option<&[C64]> {
        self.trace.as_deref()
    }

    #[inline]
    pub fn mult_entry(&self, i: usize, j: usize, k: usize) -> C64 {
        self.mult[(i * self.dim + j) * self.dim + k]
    }

    fn mult_row(&self, i: usize, j: usize) -> &[C64] {
        let start = (i * self.dim + j) * self.dim;
        &self.mult[start..start + self.dim]
    }

    pub fn basis_element(&self, i: usize) -> Element {
        Element::basis(self.dim, i)
    }

    fn check(&self, x: &Element) -> Result<()> {
        check_len(self.dim, x.len())
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        let n = self.dim;
        let mut out = CVector::zeros(n);
        for i in 0..n {
            let xi = x.coeffs[i];
            if xi == C64::ZERO {
                continue;
            }
            for j in 0..n {
                let w = xi * y.coeffs[j];
                if w == C64::ZERO {
                    continue;
                }
                for (k, m) in self.mult_row(i, j).iter().enumerate() {
                    out[k] += w * m;
                }
            }
        }
        Ok(Element { coeffs: out })
    }

    pub fn involution(&self, x: &Element) -> Result<Element> {
        self.check(x)?;
        Ok(Element {
            coeffs: &self.invol * x.coeffs.conjugate(),
        })
    }

    /// Matrix of `a ↦ b_i · a` on coefficient vectors.
    pub fn left_mult_matrix(&self, i: usize) -> CMatrix {
        let n = self.dim;
        CMatrix::from_fn(n, n, |k, j| self.mult_entry(i, j, k))
    }

    /// Matrix of `a ↦ x · a`.
    pub fn left_mult_by(&self, x: &Element) -> Result<CMatrix> {
        self.check(x)?;
        let n = self.dim;
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            if x.coeffs[i] != C64::ZERO {
                m += self.left_mult_matrix(i) * x.coeffs[i];
            }
        }
        Ok(m)
    }

    fn max_abs_entry(&self) -> f64 {
        self.mult.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }

    /// Checks associativity, involutivity, anti-multiplicativity and the unit
    /// axioms on basis elements. Tolerance: `1e-10 · (max |mult| + 1)`.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim;
        let tol = 1e-10 * (self.max_abs_entry() + 1.0);
        let mut violations = Vec::new();

        // (b_i b_j) b_k and b_i (b_j b_k), coefficient l
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut lhs = C64::ZERO;
                        let mut rhs = C64::ZERO;
                        for m in 0..n {
                            lhs += self.mult_entry(i, j, m) * self.mult_entry(m, k, l);
                            rhs += self.mult_entry(j, k, m) * self.mult_entry(i, m, l);
                        }
                        let residual = (lhs - rhs).norm();
                        if residual > tol {
                            violations.push(Violation {
                                kind: ViolationKind::Associativity,
                                indices: vec![i, j, k, l],
                                residual,
                            });
                        }
                    }
                }
            }
        }

        let twice = &self.invol * self.invol.conjugate();
        for i in 0..n {
            let mut col = twice.column(i).into_owned();
            col[i] -= c(1.0);
            let residual = col.norm();
            if residual > tol {
                violations.push(Violation {
                    kind: ViolationKind::Involutivity,
                    indices: vec![i],
                    residual,
                });
            }
        }

        let stars: Vec<Element> = (0..n)
            .map(|i| self.involution(&self.basis_element(i)).expect("dims"))
            .collect();
        for i in 0..n {
            for j in 0..n {
                let prod = Element::from_coeffs(self.mult_row(i, j).to_vec());
                let lhs = self.involution(&prod).expect("dims");
                let rhs = self.multiply(&stars[j], &stars[i]).expect("dims");
                let residual = (&lhs - &rhs).norm();
                if residual > tol {
                    violations.push(Violation {
                        kind: ViolationKind::AntiMultiplicativity,
                        indices: vec![i, j],
                        residual,
                    });
                }
            }
        }

        if let Some(unit) = self.unit() {
            for i in 0..n {
                let b = self.basis_element(i);
                let left = (&self.multiply(&unit, &b).expect("dims") - &b).norm();
                if left > tol {
                    violations.push(Violation {
                        kind: ViolationKind::UnitLeft,
                        indices: vec![i],
                        residual: left,
                    });
                }
                let right = (&self.multiply(&b, &unit).expect("dims") - &b).norm();
                if right > tol {
                    violations.push(Violation {
                        kind: ViolationKind::UnitRight,
                        indices: vec![i],
                        residual: right,
                    });
                }
            }
            let residual = (&self.involution(&unit).expect("dims") - &unit).norm();
            if residual > tol {
                violations.push(Violation {
                    kind: ViolationKind::UnitSelfAdjoint,
                    indices: vec![],
                    residual,
                });
            }
        }

        ValidationReport {
            tolerance: tol,
            violations,
        }
    }

    /// `ℂⁿ` with pointwise product; the basis consists of self-adjoint
    /// idempotents. The canonical trace is the counting measure.
    pub fn function_algebra(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidAlgebra("function algebra needs n >= 1".into()));
        }
        let mut mult = vec![C64::ZERO; n * n * n];
        for i in 0..n {
            mult[(i * n + i) * n + i] = c(1.0);
        }
        Self::new(
            (0..n).map(|i| format!("e{}", i + 1)).collect(),
            mult,
            CMatrix::identity(n, n),
            Some(CVector::from_element(n, c(1.0))),
            Some(vec![c(1.0); n]),
        )
    }

    /// `M_k(ℂ)` in the matrix-unit basis `E_ij` (index `i·k + j`), with
    /// `E_ij* = E_ji` and the usual trace.
    pub fn matrix_algebra(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidAlgebra("matrix algebra needs k >= 1".into()));
        }
        let n = k * k;
        let idx = |i: usize, j: usize| i * k + j;
        let mut mult = vec![C64::ZERO; n * n * n];
        let mut invol = CMatrix::zeros(n, n);
        let mut unit = CVector::zeros(n);
        let mut trace = vec![C64::ZERO; n];
        for i in 0..k {
            for j in 0..k {
                // E_ij E_jm = E_im
                for m in 0..k {
                    mult[(idx(i, j) * n + idx(j, m)) * n + idx(i, m)] = c(1.0);
                }
                invol[(idx(j, i), idx(i, j))] = c(1.0);
            }
            unit[idx(i, i)] = c(1.0);
            trace[idx(i, i)] = c(1.0);
        }
        let labels = (0..k)
            .flat_map(|i| (0..k).map(move |j| format!("E{}{}", i + 1, j + 1)))
            .collect();
        Self::new(labels, mult, invol, Some(unit), Some(trace))
    }

    /// Group algebra `ℂ[G]` of a finite group given by its Cayley table
    /// (`table[g][h] = g·h`), with `g* = g⁻¹`. The canonical trace is
    /// `τ(g) = [g = e]`.
    pub fn group_algebra(table: &[Vec<usize>]) -> Result<Self> {
        let n = table.len();
        let identity = validate_group_table(table)?;
        let inverse: Vec<usize> = (0..n)
            .map(|g| (0..n).find(|&h| table[g][h] == identity).expect("validated"))
            .collect();
        let mut mult = vec![C64::ZERO; n * n * n];
        let mut invol = CMatrix::zeros(n, n);
        for g in 0..n {
            for h in 0..n {
                mult[(g * n + h) * n + table[g][h]] = c(1.0);
            }
            invol[(inverse[g], g)] = c(1.0);
        }
        let mut unit = CVector::zeros(n);
        unit[identity] = c(1.0);
        let mut trace = vec![C64::ZERO; n];
        trace[identity] = c(1.0);
        Self::new(
            (0..n).map(|g| format!("g{g}")).collect(),
            mult,
            invol,
            Some(unit),
            Some(trace),
        )
    }

    /// Block direct sum. Unit and trace are kept when both summands carry one.
    pub fn direct_sum(a1: &StarAlgebra, a2: &StarAlgebra) -> Result<Self> {
        let (n1, n2) = (a1.dim, a2.dim);
        let n = n1 + n2;
        let mut mult = vec![C64::ZERO; n * n * n];
        for (alg, off) in [(a1, 0), (a2, n1)] {
            let m = alg.dim;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        mult[((i + off) * n + j + off) * n + k + off] = alg.mult_entry(i, j, k);
                    }
                }
            }
        }
        let mut invol = CMatrix::zeros(n, n);
        invol.view_mut((0, 0), (n1, n1)).copy_from(&a1.invol);
        invol.view_mut((n1, n1), (n2, n2)).copy_from(&a2.invol);
        let unit = match (&a1.unit, &a2.unit) {
            (Some(u1), Some(u2)) => Some(CVector::from_iterator(n, u1.iter().chain(u2.iter()).copied())),
            _ => None,
        };
        let trace = match (&a1.trace, &a2.trace) {
            (Some(t1), Some(t2)) => Some(t1.iter().chain(t2.iter()).copied().collect()),
            _ => None,
        };
        let labels = a1
            .labels
            .iter()
            .map(|l| format!("1:{l}"))
            .chain(a2.labels.iter().map(|l| format!("2:{l}")))
            .collect();
        Self::new(labels, mult, invol, unit, trace)
    }

    pub fn to_file(&self) -> AlgebraFile {
        let n = self.dim;
        AlgebraFile {
            dim: n,
            basis: self.labels.clone(),
            mult: (0..n)
                .map(|i| (0..n).map(|j| json::pairs(self.mult_row(i, j))).collect())
                .collect(),
            invol: json::matrix_to_rows(&self.invol),
            unit: self.unit.as_ref().map(|u| json::pairs(u.as_slice())),
            trace: self.trace.as_ref().map(|t| json::pairs(t)),
        }
    }

    pub fn from_file(file: &AlgebraFile) -> Result<Self> {
        let n = file.dim;
        let bad = |msg: String| Error::InvalidAlgebra(msg);
        if file.basis.len() != n {
            return Err(bad(format!("basis: expected {n} labels, found {}", file.basis.len())));
        }
        if file.mult.len() != n {
            return Err(bad(format!("mult: expected {n} slices, found {}", file.mult.len())));
        }
        let mut mult = Vec::with_capacity(n * n * n);
        for (i, slice) in file.mult.iter().enumerate() {
            if slice.len() != n {
                return Err(bad(format!("mult[{i}]: expected {n} rows, found {}", slice.len())));
            }
            for (j, row) in slice.iter().enumerate() {
                if row.len() != n {
                    return Err(bad(format!("mult[{i}][{j}]: expected {n} entries, found {}", row.len())));
                }
                mult.extend(row.iter().map(json::from_pair));
            }
        }
        if file.invol.len() != n || file.invol.iter().any(|r| r.len() != n) {
            return Err(bad(format!("invol: expected a {n}x{n} matrix")));
        }
        let invol = json::rows_to_matrix(&file.invol, n).map_err(bad)?;
        let unit = file
            .unit
            .as_ref()
            .map(|u| CVector::from_vec(json::from_pairs(u)));
        let trace = file.trace.as_ref().map(|t| json::from_pairs(t));
        Self::new(file.basis.clone(), mult, invol, unit, trace)
    }
}

/// JSON layout of an algebra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraFile {
    pub dim: usize,
    pub basis: Vec<String>,
    pub mult: Vec<Vec<Vec<Pair>>>,
    pub invol: Vec<Vec<Pair>>,
    pub unit: Option<Vec<Pair>>,
    pub trace: Option<Vec<Pair>>,
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Checks closure, associativity, identity and inverses; returns the
/// identity element.
pub fn validate_group_table(table: &[Vec<usize>]) -> Result<usize> {
    let n = table.len();
    let bad = |msg: String| Err(Error::InvalidGroupTable(msg));
    if n == 0 {
        return bad("empty table".into());
    }
    for (g, row) in table.iter().enumerate() {
        if row.len() != n {
            return bad(format!("row {g} has length {}, expected {n}", row.len()));
        }
        if let Some(&h) = row.iter().find(|&&h| h >= n) {
            return bad(format!("row {g} contains out-of-range element {h}"));
        }
    }
    let Some(e) = (0..n).find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g)) else {
        return bad("no identity element".into());
    };
    for g in 0..n {
        for h in 0..n {
            for k in 0..n {
                if table[table[g][h]][k] != table[g][table[h][k]] {
                    return bad(format!("not associative at ({g}, {h}, {k})"));
                }
            }
        }
        if !(0..n).any(|h| table[g][h] == e && table[h][g] == e) {
            return bad(format!("element {g} has no inverse"));
        }
    }
    Ok(e)
}

/// Cayley table of `ℤ/n`.
pub fn cyclic_group_table(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|g| (0..n).map(|h| (g + h) % n).collect()).collect()
}

/// Cayley table of the symmetric group `S_m`, elements in lexicographic
/// order of their one-line notation (the identity is element 0), with
/// `(σ·τ)(x) = σ(τ(x))`.
pub fn symmetric_group_table(m: usize) -> Vec<Vec<usize>> {
    let perms = permutations(m);
    let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
    perms
        .iter()
        .map(|s| {
            perms
                .iter()
                .map(|t| index(&t.iter().map(|&x| s[x]).collect()))
                .collect()
        })
        .collect()
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..m {
        for rest in permutations(m - 1) {
            let mut p = vec![first];
            p.extend(rest.into_iter().map(|x| if x >= first { x + 1 } else { x }));
            out.push(p);
        }
    }
    out
}
