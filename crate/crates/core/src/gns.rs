//! Concrete GNS triples `(H_f, π_f, ζ_f)`.
//!
//! `H_f` is the quotient of the algebra by the kernel of the semi-inner
//! product `⟨a, b⟩ = f(b* a)`. With `K` the matrix of that form in
//! coefficient coordinates and `K = U₊ D₊ U₊ᴴ` its spectral factorization
//! above the rank cutoff, the embedding `Q = D₊^{1/2} U₊ᴴ` maps `a` to the
//! coordinates of its class, so `⟨Qa, Qb⟩ = f(b* a)`. Left multiplication
//! by `b_i` descends to `π(b_i) = Q L_i Q⁺` whenever `Q L_i` vanishes on the
//! kernel, and the cyclic vector is the Riesz representer of `Qa ↦ f(a)`.

use serde::Serialize;

use crate::algebra::{check_len, Element, StarAlgebra};
use crate::error::{Error, Result};
use crate::functional::{gram, Functional, GramMatrix, RepresentabilityCertificate};
use crate::json;
use crate::linalg::{range_basis, spectral_norm, CMatrix, CVector, PsdFactor};
use crate::C64;

/// Everything derived from one spectral factorization of the Gram form.
pub(crate) struct Coordinates {
    pub gram: GramMatrix,
    pub factor: PsdFactor,
    pub embed: CMatrix,
    pub rep: Vec<CMatrix>,
    pub rep_residuals: Vec<f64>,
    pub cyclic: CVector,
    pub certificate: RepresentabilityCertificate,
}

impl Coordinates {
    pub fn compute(alg: &StarAlgebra, f: &Functional, tol: f64) -> Result<Self> {
        let n = alg.dim();
        check_len(n, f.dim())?;
        let gram = gram(alg, f)?;
        let vnorm = f.norm();

        // f(b_i*) = conj f(b_i)
        let star_values = alg.invol_matrix().transpose() * CVector::from_column_slice(&f.values);
        let herm_residual = star_values
            .iter()
            .zip(&f.values)
            .fold(0.0_f64, |acc, (s, v)| acc.max((s - v.conj()).norm()));
        let is_hermitian = herm_residual <= tol * vnorm;

        let factor = PsdFactor::new(&gram.form(), tol);
        let is_positive = factor.min_eigenvalue() >= -tol * gram.scale;

        let values = CVector::from_column_slice(&f.values);
        let vanishes_on_kernel = factor
            .kernel
            .column_iter()
            .all(|x| x.iter().zip(values.iter()).map(|(a, v)| a * v).sum::<C64>().norm() <= tol * vnorm);

        let embed = factor.embedding();
        let right_inverse = factor.embedding_right_inverse();
        let cyclic = right_inverse.adjoint() * values.conjugate();
        let c_min = if vanishes_on_kernel {
            cyclic.norm_squared()
        } else {
            f64::INFINITY
        };

        let q_norm = embed.norm();
        let mut rep = Vec::with_capacity(n);
        let mut rep_residuals = Vec::with_capacity(n);
        let mut lambda = Vec::with_capacity(n);
        for i in 0..n {
            let ql = &embed * alg.left_mult_matrix(i);
            let residual = (&ql * &factor.kernel).norm();
            let threshold = tol * q_norm * alg.left_mult_matrix(i).norm();
            let r = &ql * &right_inverse;
            let norm = spectral_norm(&r);
            lambda.push(if residual <= threshold { norm * norm } else { f64::INFINITY });
            rep_residuals.push(residual);
            rep.push(r);
        }

        let certificate = RepresentabilityCertificate {
            is_positive,
            is_hermitian,
            vanishes_on_kernel,
            c_min,
            lambda,
            min_eigenvalue: factor.min_eigenvalue(),
            scale: gram.scale,
            rank: factor.rank(),
            borderline_rank: factor.borderline,
        };
        Ok(Coordinates {
            gram,
            factor,
            embed,
            rep,
            rep_residuals,
            cyclic,
            certificate,
        })
    }
}

/// A realized GNS triple.
#[derive(Debug, Clone, Serialize)]
pub struct GnsSpace {
    pub dim_h: usize,
    /// `r × n` map from coefficients of `a` to coordinates of `Aa`.
    #[serde(with = "json::matrix_rows")]
    pub embed: CMatrix,
    /// `rep[i] = π(b_i)`.
    #[serde(with = "json::matrix_list")]
    pub rep: Vec<CMatrix>,
    #[serde(with = "json::dvector")]
    pub cyclic: CVector,
    #[serde(skip)]
    pub source_gram: GramMatrix,
    /// Orthonormal basis (columns) of the kernel of the Gram form, in
    /// coefficient coordinates.
    #[serde(skip)]
    pub kernel: CMatrix,
    pub certificate: RepresentabilityCertificate,
    pub warnings: Vec<String>,
}

pub fn build_gns(alg: &StarAlgebra, f: &Functional, tol: f64) -> Result<GnsSpace> {
    let coords = Coordinates::compute(alg, f, tol)?;
    let cert = &coords.certificate;
    if cert.is_positive && cert.is_hermitian && cert.vanishes_on_kernel {
        if let Some(index) = cert.lambda.iter().position(|l| !l.is_finite()) {
            return Err(Error::IllDefinedRepresentation {
                index,
                residual: coords.rep_residuals[index],
            });
        }
    }
    if !cert.passes() {
        return Err(Error::NotRepresentable(Box::new(coords.certificate)));
    }

    let r = coords.factor.rank();
    let mut warnings = Vec::new();
    if coords.factor.borderline {
        warnings.push(format!(
            "rank decision unstable: an eigenvalue lies within a factor of 10 of the cutoff {:.3e}",
            coords.factor.cutoff
        ));
    }
    if r > 0 {
        let orbit = CMatrix::from_columns(
            &coords.rep.iter().map(|p| p * &coords.cyclic).collect::<Vec<_>>(),
        );
        let spread = range_basis(&orbit, tol * orbit.norm()).ncols();
        if spread < r {
            warnings.push(format!("cyclic vector spans only {spread} of {r} dimensions"));
        }
    }
    Ok(GnsSpace {
        dim_h: r,
        embed: coords.embed,
        rep: coords.rep,
        cyclic: coords.cyclic,
        source_gram: coords.gram,
        kernel: coords.factor.kernel,
        certificate: coords.certificate,
        warnings,
    })
}

impl GnsSpace {
    pub fn algebra_dim(&self) -> usize {
        self.rep.len()
    }

    /// `π(a) = Σ a_i π(b_i)`.
    pub fn represent(&self, a: &Element) -> Result<CMatrix> {
        check_len(self.algebra_dim(), a.len())?;
        let mut out = CMatrix::zeros(self.dim_h, self.dim_h);
        for (coef, r) in a.coeffs.iter().zip(&self.rep) {
            if *coef != C64::ZERO {
                out += r * *coef;
            }
        }
        Ok(out)
    }

    /// Coordinates of the class `Aa`.
    pub fn vector_of(&self, a: &Element) -> Result<CVector> {
        check_len(self.algebra_dim(), a.len())?;
        Ok(&self.embed * &a.coeffs)
    }

    /// `f(b_i) = ⟨π(b_i) ζ, ζ⟩`.
    pub fn reconstruct(&self) -> Functional {
        Functional::new(self.rep.iter().map(|r| self.cyclic.dotc(&(r * &self.cyclic))).collect())
    }

    /// Vector functional `a ↦ ⟨π(a) ξ, ξ⟩`.
    pub fn vector_functional(&self, xi: &CVector) -> Functional {
        Functional::new(self.rep.iter().map(|r| xi.dotc(&(r * xi))).collect())
    }

    /// Largest of `‖π(b_i b_j) − π(b_i)π(b_j)‖` and `‖π(b_i*) − π(b_i)ᴴ‖`
    /// (Frobenius), relative to `max(1, max_i ‖π(b_i)‖²)`.
    pub fn homomorphism_residual(&self, alg: &StarAlgebra) -> Result<f64> {
        check_len(alg.dim(), self.algebra_dim())?;
        let n = alg.dim();
        let mut worst = 0.0_f64;
        let mut scale = 1.0_f64;
        for i in 0..n {
            let bi = alg.basis_element(i);
            scale = scale.max(self.rep[i].norm_squared());
            let star = self.represent(&alg.involution(&bi)?)?;
            worst = worst.max((star - self.rep[i].adjoint()).norm());
            for j in 0..n {
                let prod = self.represent(&alg.multiply(&bi, &alg.basis_element(j))?)?;
                worst = worst.max((prod - &self.rep[i] * &self.rep[j]).norm());
            }
        }
        Ok(worst / scale)
    }

    /// Largest value deviation of [`Self::reconstruct`] from `f`, relative to
    /// `max(1, max |f(b_i)|)`.
    pub fn round_trip_residual(&self, f: &Functional) -> f64 {
        let scale = f.values.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
        self.reconstruct().max_abs_diff(f) / scale
    }
}
