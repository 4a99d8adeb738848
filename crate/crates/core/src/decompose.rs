//! Lebesgue decomposition `g = g_a + g_s` of a representable functional `g`
//! with respect to a representable functional `f`.
//!
//! With `(H_A, π_A, ζ_A)` and `(H_B, π_B, ζ_B)` the GNS triples of `f` and
//! `g`, the relation `T = {(Aa, Ba)}` has multivalued part
//! `M = {Ba : f(a*a) = 0}`. If `P` projects onto `M`, then
//!
//! ```text
//! g_a(a) = ⟨π_B(a)(I − P)ζ_B, (I − P)ζ_B⟩,   g_s(a) = ⟨π_B(a)Pζ_B, Pζ_B⟩.
//! ```
//!
//! `g_a` is absolutely continuous with respect to `f`, `g_s` and `f` are
//! mutually singular, and `g_a` dominates every `f`-absolutely continuous
//! `h ≤ g`. Each of these is checked numerically by the functions below.

use rand::Rng;
use serde::Serialize;

use crate::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::functional::{check_representable, leq, leq_margin, Functional, RepresentabilityCertificate};
use crate::gns::{build_gns, GnsSpace};
use crate::json;
use crate::linalg::{hermitian_eigen, null_basis, spectral_norm, CMatrix, CVector, Subspace};
use crate::relation::{InjectivePart, LinearRelation};
use crate::C64;

/// Verdict with a continuous witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcVerdict {
    pub holds: bool,
    /// Largest `sqrt(g(a*a)) / ‖Q_g‖` over unit `a` with `f(a*a) = 0`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularVerdict {
    pub holds: bool,
    /// `‖I − P_M‖` on `H_B`: 0 when `M` fills the space, 1 otherwise.
    pub residual: f64,
    pub mul_dim: usize,
    pub space_dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionCertificate {
    pub ac_check: AcVerdict,
    pub sing_check: SingularVerdict,
    pub invariance_residual: f64,
    pub projection_residual: f64,
    pub additivity_residual: f64,
    /// Distance between `mul T` and the image of `ker G_f` in `H_B`.
    pub multivalued_route_residual: f64,
    pub g_a_certificate: RepresentabilityCertificate,
    pub g_s_certificate: RepresentabilityCertificate,
    pub mutual_ac: Option<MutualAcRecord>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecompositionResult {
    pub g_a: Functional,
    pub g_s: Functional,
    /// Orthonormal basis of `M` in `H_B` coordinates.
    pub m_basis: Subspace,
    #[serde(with = "json::matrix_rows")]
    pub projection: CMatrix,
    /// `(I − P) ζ_B`.
    #[serde(with = "json::dvector")]
    pub ac_vector: CVector,
    /// `P ζ_B`.
    #[serde(with = "json::dvector")]
    pub singular_vector: CVector,
    pub certificate: DecompositionCertificate,
}

/// `T = {(Aa, Ba) : a ∈ A}`, spanned by the images of the basis.
pub fn build_t(gns_a: &GnsSpace, gns_b: &GnsSpace) -> Result<LinearRelation> {
    if gns_a.algebra_dim() != gns_b.algebra_dim() {
        return Err(Error::DimensionMismatch {
            expected: gns_a.algebra_dim(),
            found: gns_b.algebra_dim(),
        });
    }
    LinearRelation::from_columns(&gns_a.embed, &gns_b.embed)
}

/// `M` computed directly as `Q_B (ker G_f)`.
fn kernel_image(gns_a: &GnsSpace, gns_b: &GnsSpace, tol: f64) -> Subspace {
    let image = &gns_b.embed * &gns_a.kernel;
    let scale = spectral_norm(&gns_b.embed);
    Subspace::spanned_by(&image, tol * scale)
}

fn ac_witness(gns_a: &GnsSpace, gns_b: &GnsSpace) -> f64 {
    let scale = spectral_norm(&gns_b.embed);
    if scale == 0.0 {
        return 0.0;
    }
    spectral_norm(&(&gns_b.embed * &gns_a.kernel)) / scale
}

pub fn decompose(alg: &StarAlgebra, f: &Functional, g: &Functional, tol: f64) -> Result<DecompositionResult> {
    let gns_a = build_gns(alg, f, tol)?;
    let gns_b = build_gns(alg, g, tol)?;
    decompose_spaces(alg, f, g, &gns_a, &gns_b, tol)
}

/// Decomposition from prebuilt GNS spaces of `f` and `g`.
pub fn decompose_spaces(
    alg: &StarAlgebra,
    f: &Functional,
    g: &Functional,
    gns_a: &GnsSpace,
    gns_b: &GnsSpace,
    tol: f64,
) -> Result<DecompositionResult> {
    let t = build_t(gns_a, gns_b)?;
    let m = t.mul_part(tol);
    let route = m.distance(&kernel_image(gns_a, gns_b, tol));
    let projection = m.projector();
    let zeta = &gns_b.cyclic;
    let singular_vector = &projection * zeta;
    let ac_vector = zeta - &singular_vector;
    let g_a = gns_b.vector_functional(&ac_vector);
    let g_s = gns_b.vector_functional(&singular_vector);

    let additivity_residual = {
        let gn = g.norm();
        let diff = g_a.add(&g_s)?.max_abs_diff(g);
        if gn == 0.0 { diff } else { diff / gn }
    };
    let projection_residual = {
        let herm = (&projection - projection.adjoint()).norm();
        let idem = (&projection * &projection - &projection).norm();
        herm.max(idem)
    };

    let mut warnings: Vec<String> = gns_a
        .warnings
        .iter()
        .map(|w| format!("f: {w}"))
        .chain(gns_b.warnings.iter().map(|w| format!("g: {w}")))
        .collect();
    if route > 1e-6 {
        warnings.push(format!("multivalued part routes disagree (distance {route:.3e})"));
    }

    let mut result = DecompositionResult {
        g_a,
        g_s,
        m_basis: m,
        projection,
        ac_vector,
        singular_vector,
        certificate: DecompositionCertificate {
            ac_check: AcVerdict { holds: false, residual: f64::NAN },
            sing_check: SingularVerdict { holds: false, residual: f64::NAN, mul_dim: 0, space_dim: 0 },
            invariance_residual: 0.0,
            projection_residual,
            additivity_residual,
            multivalued_route_residual: route,
            g_a_certificate: check_representable(alg, &Functional::zero(alg.dim()), tol)?,
            g_s_certificate: check_representable(alg, &Functional::zero(alg.dim()), tol)?,
            mutual_ac: None,
            warnings,
        },
    };
    result.certificate.invariance_residual = check_invariance(gns_b, &result, tol);
    result.certificate.g_a_certificate = check_representable(alg, &result.g_a, tol)?;
    result.certificate.g_s_certificate = check_representable(alg, &result.g_s, tol)?;
    result.certificate.ac_check = is_absolutely_continuous(alg, f, &result.g_a, tol)?;
    result.certificate.sing_check = is_singular(alg, f, &result.g_s, tol)?;
    Ok(result)
}

/// `g ≪ f`, decided by `mul T = {0}`.
pub fn is_absolutely_continuous(alg: &StarAlgebra, f: &Functional, g: &Functional, tol: f64) -> Result<AcVerdict> {
    let gns_a = build_gns(alg, f, tol)?;
    let gns_b = build_gns(alg, g, tol)?;
    let m = build_t(&gns_a, &gns_b)?.mul_part(tol);
    Ok(AcVerdict { holds: m.dim() == 0, residual: ac_witness(&gns_a, &gns_b) })
}

/// `g ⊥ f`, decided by `mul T = H_B`.
pub fn is_singular(alg: &StarAlgebra, f: &Functional, g: &Functional, tol: f64) -> Result<SingularVerdict> {
    let gns_a = build_gns(alg, f, tol)?;
    let gns_b = build_gns(alg, g, tol)?;
    let m = build_t(&gns_a, &gns_b)?.mul_part(tol);
    let rest = CMatrix::identity(gns_b.dim_h, gns_b.dim_h) - m.projector();
    Ok(SingularVerdict {
        holds: m.dim() == gns_b.dim_h,
        residual: spectral_norm(&rest),
        mul_dim: m.dim(),
        space_dim: gns_b.dim_h,
    })
}

/// Largest residual among the identities `π(b_i) P ζ = P π(b_i) ζ`, its
/// `I − P` mirror, and
/// `(I − P) π(b_i) P = P π(b_i) (I − P) = 0`, relative to `max(1, ‖ζ_B‖)`.
pub fn check_invariance(gns_b: &GnsSpace, result: &DecompositionResult, _tol: f64) -> f64 {
    let r = gns_b.dim_h;
    let p = &result.projection;
    let ip = CMatrix::identity(r, r) - p;
    let zeta = &gns_b.cyclic;
    let pz = p * zeta;
    let ipz = &ip * zeta;
    let mut worst = 0.0_f64;
    for rep in &gns_b.rep {
        let rz = rep * zeta;
        let checks = [
            (rep * &pz - p * &rz).norm(),
            (rep * &ipz - &ip * &rz).norm(),
            (&ip * rep * p).norm(),
            (p * rep * &ip).norm(),
        ];
        worst = checks.iter().fold(worst, |acc, &x| acc.max(x));
    }
    worst / zeta.norm().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MaximalityVerdict {
    Holds,
    /// `h ≤ g` and `h ≪ f` but not `h ≤ g_a`; `margin` is the most negative
    /// relative eigenvalue of `G_{g_a} − G_h`.
    Violated { margin: f64 },
    /// The hypotheses on `h` fail, so there is nothing to check.
    Inapplicable { reason: String },
}

impl MaximalityVerdict {
    pub fn is_violation(&self) -> bool {
        matches!(self, MaximalityVerdict::Violated { .. })
    }
}

/// If `h ≤ g` and `h ≪ f`, checks `h ≤ g_a`.
pub fn check_maximality(
    alg: &StarAlgebra,
    f: &Functional,
    g: &Functional,
    result: &DecompositionResult,
    h: &Functional,
    tol: f64,
) -> Result<MaximalityVerdict> {
    if !check_representable(alg, h, tol)?.passes() {
        return Ok(MaximalityVerdict::Inapplicable { reason: "h is not representable".into() });
    }
    if !leq(alg, h, g, tol)? {
        return Ok(MaximalityVerdict::Inapplicable { reason: "h is not dominated by g".into() });
    }
    if !is_absolutely_continuous(alg, f, h, tol)?.holds {
        return Ok(MaximalityVerdict::Inapplicable { reason: "h is not absolutely continuous w.r.t. f".into() });
    }
    let margin = leq_margin(alg, h, &result.g_a)?;
    if margin >= -tol {
        Ok(MaximalityVerdict::Holds)
    } else {
        Ok(MaximalityVerdict::Violated { margin })
    }
}

/// Basis of the commutant `{W : W π(b_i) = π(b_i) W for all i}`.
pub fn commutant_basis(gns: &GnsSpace, tol: f64) -> Vec<CMatrix> {
    let r = gns.dim_h;
    if r == 0 {
        return Vec::new();
    }
    let id = CMatrix::identity(r, r);
    let rows = gns.rep.len() * r * r;
    let mut system = CMatrix::zeros(rows, r * r);
    let mut scale = 0.0_f64;
    for (i, rep) in gns.rep.iter().enumerate() {
        // vec(W R − R W) = (Rᵀ ⊗ I − I ⊗ R) vec(W), column-major
        let block = rep.transpose().kronecker(&id) - id.kronecker(rep);
        scale = scale.max(block.norm());
        system.view_mut((i * r * r, 0), (r * r, r * r)).copy_from(&block);
    }
    let null = null_basis(&system, tol * scale.max(1.0));
    null.column_iter()
        .map(|col| CMatrix::from_column_slice(r, r, col.as_slice()))
        .collect()
}

/// Spectral projections of a random Hermitian element of the commutant:
/// one for every eigenvalue cluster, in decreasing eigenvalue order. They
/// sum to the identity.
pub fn commutant_spectral_projections(gns: &GnsSpace, rng: &mut impl Rng, tol: f64) -> Vec<CMatrix> {
    let r = gns.dim_h;
    let basis = commutant_basis(gns, tol);
    if basis.is_empty() {
        return Vec::new();
    }
    let mut x = CMatrix::zeros(r, r);
    for w in &basis {
        let coef = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        x += w * coef;
    }
    let herm = &x + x.adjoint();
    let (values, vectors) = hermitian_eigen(&herm);
    let spread = values.first().unwrap_or(&0.0) - values.last().unwrap_or(&0.0);
    let gap = 1e-6 * spread.max(f64::MIN_POSITIVE);
    let mut projections = Vec::new();
    let mut start = 0;
    for j in 1..=values.len() {
        if j == values.len() || values[j - 1] - values[j] > gap {
            let v = vectors.columns(start, j - start);
            projections.push(&v * v.adjoint());
            start = j;
        }
    }
    projections
}

/// A random contraction in the commutant, normalized to spectral norm 1.
/// On the zero space this is the empty matrix.
pub fn commutant_contraction(gns: &GnsSpace, rng: &mut impl Rng, tol: f64) -> Option<CMatrix> {
    let r = gns.dim_h;
    if r == 0 {
        return Some(CMatrix::zeros(0, 0));
    }
    let basis = commutant_basis(gns, tol);
    let mut x = CMatrix::zeros(r, r);
    for w in &basis {
        x += w * C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
    }
    let norm = spectral_norm(&x);
    (norm > 0.0).then(|| x / C64::new(norm, 0.0))
}

/// `h(a) = ⟨π_B(a) W ξ, W ξ⟩` with `ξ = (I − P) ζ_B`: dominated by `g_a`
/// whenever `W` is a contraction commuting with `π_B`.
pub fn commutant_compression(gns_b: &GnsSpace, result: &DecompositionResult, w: &CMatrix) -> Functional {
    gns_b.vector_functional(&(w * &result.ac_vector))
}

/// Result of decomposing `f` and `g` against each other.
#[derive(Debug, Clone, Serialize)]
pub struct MutualAcRecord {
    pub f_a: Functional,
    pub g_a: Functional,
    pub fa_ll_ga: AcVerdict,
    pub ga_ll_fa: AcVerdict,
    pub injective_part: InjectivePart,
    /// `f_a(a*a) = ‖(I − P) Aa‖²` and `g_a(a*a) = ‖(I − Q) Ba‖²`, with `P`, `Q`
    /// the projections onto `ker T` and `mul T`; largest relative deviation.
    pub norm_identity_residual: f64,
}

impl MutualAcRecord {
    pub fn holds(&self, threshold: f64) -> bool {
        self.fa_ll_ga.holds && self.ga_ll_fa.holds && self.injective_part.holds(threshold)
    }
}

pub fn mutual_ac(alg: &StarAlgebra, f: &Functional, g: &Functional, tol: f64) -> Result<MutualAcRecord> {
    let g_a = decompose(alg, f, g, tol)?.g_a;
    let f_a = decompose(alg, g, f, tol)?.g_a;
    let fa_ll_ga = is_absolutely_continuous(alg, &g_a, &f_a, tol)?;
    let ga_ll_fa = is_absolutely_continuous(alg, &f_a, &g_a, tol)?;

    let gns_a = build_gns(alg, f, tol)?;
    let gns_b = build_gns(alg, g, tol)?;
    let t = build_t(&gns_a, &gns_b)?;
    let injective_part = t.injective_part(tol)?;

    let ia = CMatrix::identity(gns_a.dim_h, gns_a.dim_h) - t.ker_part(tol).projector();
    let ib = CMatrix::identity(gns_b.dim_h, gns_b.dim_h) - t.mul_part(tol).projector();
    let norm_identity_residual = form_deviation(alg, &f_a, &(&ia * &gns_a.embed))?
        .max(form_deviation(alg, &g_a, &(&ib * &gns_b.embed))?);

    Ok(MutualAcRecord { f_a, g_a, fa_ll_ga, ga_ll_fa, injective_part, norm_identity_residual })
}

/// `‖K_h − Xᴴ X‖ / max(1, ‖K_h‖)` where `K_h` is the Gram form of `h`.
fn form_deviation(alg: &StarAlgebra, h: &Functional, x: &CMatrix) -> Result<f64> {
    let k = crate::functional::gram(alg, h)?.form();
    let scale = k.norm().max(1.0);
    Ok((k - x.adjoint() * x).norm() / scale)
}

/// Classical Lebesgue decomposition of a measure `g` against `f` on a finite
/// set: `g_a = g · 1[f > 0]`, `g_s = g · 1[f = 0]`.
pub fn classical_oracle(weights_f: &[f64], weights_g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if weights_f.len() != weights_g.len() {
        return Err(Error::DimensionMismatch { expected: weights_f.len(), found: weights_g.len() });
    }
    for (index, &value) in weights_f.iter().chain(weights_g).enumerate() {
        if !(value >= 0.0) {
            return Err(Error::NegativeWeight { index: index % weights_f.len().max(1), value });
        }
    }
    Ok(weights_f
        .iter()
        .zip(weights_g)
        .map(|(&wf, &wg)| if wf > 0.0 { (wg, 0.0) } else { (0.0, wg) })
        .unzip())
}
