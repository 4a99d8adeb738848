//! Linear relations between finite-dimensional Hilbert spaces `H` and `K`,
//! i.e. subspaces of `H ⊕ K` given by spanning pairs.
//!
//! All relations here are closed (finite dimension); [`LinearRelation::closure`]
//! exists so that call sites can name the step anyway.

use std::sync::OnceLock;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::json;
use crate::linalg::{svd_full_right, null_basis, CMatrix, CVector, Subspace};

/// Relative singular-value cutoff used to orthonormalize spanning families.
pub const SPAN_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LinearRelation {
    dim_h: usize,
    dim_k: usize,
    span: Vec<(CVector, CVector)>,
    /// Absolute singular-value floor, on top of the relative cutoff.
    floor: f64,
    basis: OnceLock<CMatrix>,
}

impl LinearRelation {
    pub fn new(dim_h: usize, dim_k: usize, span: Vec<(CVector, CVector)>) -> Result<Self> {
        for (h, k) in &span {
            if h.len() != dim_h {
                return Err(Error::DimensionMismatch { expected: dim_h, found: h.len() });
            }
            if k.len() != dim_k {
                return Err(Error::DimensionMismatch { expected: dim_k, found: k.len() });
            }
        }
        Ok(LinearRelation { dim_h, dim_k, span, floor: 0.0, basis: OnceLock::new() })
    }

    /// Relation spanned by the column pairs `(xs[:, j], ys[:, j])`.
    pub fn from_columns(xs: &CMatrix, ys: &CMatrix) -> Result<Self> {
        if xs.ncols() != ys.ncols() {
            return Err(Error::DimensionMismatch { expected: xs.ncols(), found: ys.ncols() });
        }
        let span = xs
            .column_iter()
            .zip(ys.column_iter())
            .map(|(x, y)| (x.into_owned(), y.into_owned()))
            .collect();
        Self::new(xs.nrows(), ys.nrows(), span)
    }

    /// Treats spanning directions with singular value at most `floor` as
    /// zero. Useful when the spanning pairs are projections of a larger
    /// family and may consist of rounding noise only.
    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self.basis = OnceLock::new();
        self
    }

    /// Graph `{(h, M h)}` of a `K × H` matrix.
    pub fn graph_of(matrix: &CMatrix) -> Self {
        let id = CMatrix::identity(matrix.ncols(), matrix.ncols());
        Self::from_columns(&id, matrix).expect("shapes agree")
    }

    pub fn dim_h(&self) -> usize {
        self.dim_h
    }

    pub fn dim_k(&self) -> usize {
        self.dim_k
    }

    pub fn span(&self) -> &[(CVector, CVector)] {
        &self.span
    }

    fn stacked(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim_h + self.dim_k, self.span.len());
        for (j, (h, k)) in self.span.iter().enumerate() {
            m.view_mut((0, j), (self.dim_h, 1)).copy_from(h);
            m.view_mut((self.dim_h, j), (self.dim_k, 1)).copy_from(k);
        }
        m
    }

    fn span_blocks(&self) -> (CMatrix, CMatrix) {
        let s = self.stacked();
        (
            s.rows(0, self.dim_h).into_owned(),
            s.rows(self.dim_h, self.dim_k).into_owned(),
        )
    }

    /// Orthonormal basis (columns) of the relation as a subspace of `H ⊕ K`.
    pub fn basis(&self) -> &CMatrix {
        self.basis.get_or_init(|| {
            let stacked = self.stacked();
            let (u, sigma, _) = svd_full_right(&stacked);
            let top = sigma.first().copied().unwrap_or(0.0);
            let keep = sigma
                .iter()
                .take_while(|&&s| s > SPAN_CUTOFF * top && s > self.floor && s > 0.0)
                .count();
            u.columns(0, keep).into_owned()
        })
    }

    pub fn dim(&self) -> usize {
        self.basis().ncols()
    }

    fn basis_blocks(&self) -> (CMatrix, CMatrix) {
        let b = self.basis();
        (
            b.rows(0, self.dim_h).into_owned(),
            b.rows(self.dim_h, self.dim_k).into_owned(),
        )
    }

    pub fn as_subspace(&self) -> Subspace {
        Subspace { ambient: self.dim_h + self.dim_k, basis: self.basis().clone() }
    }

    /// Projection distance between the two relations as subspaces of `H ⊕ K`.
    pub fn distance(&self, other: &LinearRelation) -> f64 {
        self.as_subspace().distance(&other.as_subspace())
    }

    /// Closure in `H ⊕ K`. Every subspace of a finite-dimensional space is
    /// closed, so this is the identity.
    pub fn closure(&self) -> LinearRelation {
        self.clone()
    }

    /// `mul T = {k : (0, k) ∈ T}`.
    pub fn mul_part(&self, tol: f64) -> Subspace {
        let closed = self.closure();
        let (bh, bk) = closed.basis_blocks();
        let null = null_basis(&bh, tol);
        Subspace::spanned_by(&(bk * null), 0.5)
    }

    /// `ker T = {h : (h, 0) ∈ T}`.
    pub fn ker_part(&self, tol: f64) -> Subspace {
        self.inverse().mul_part(tol)
    }

    /// `T⁻¹ = {(k, h) : (h, k) ∈ T}`.
    pub fn inverse(&self) -> LinearRelation {
        LinearRelation {
            dim_h: self.dim_k,
            dim_k: self.dim_h,
            span: self.span.iter().map(|(h, k)| (k.clone(), h.clone())).collect(),
            floor: self.floor,
            basis: OnceLock::new(),
        }
    }

    /// Regular part `{(h, (I − Q) k) : (h, k) ∈ T}`, `Q` the projection onto
    /// `mul T`, as an operator on `dom T`.
    pub fn regular_part(&self, tol: f64) -> Result<OperatorPart> {
        let closed = self.closure();
        let q = closed.mul_part(tol).projector();
        let (bh, bk) = closed.basis_blocks();
        let complement = CMatrix::identity(self.dim_k, self.dim_k) - &q;
        let op = operator_from_blocks(&bh, &(&complement * bk), tol);
        let (xs, ys) = closed.span_blocks();
        let scale = xs.norm().max(ys.norm());
        let residual = op.fit_residual(&xs, &(&complement * ys), scale);
        if residual > tol.sqrt() {
            return Err(Error::RelationConsistency(format!(
                "regular part does not reproduce the relation (residual {residual:.3e})"
            )));
        }
        Ok(OperatorPart { residual, ..op })
    }

    /// `S = {((I − P) h, (I − Q) k) : (h, k) ∈ T}` with `P`, `Q` the projections
    /// onto `ker T` and `mul T`. `S` is always the graph of an injective
    /// operator; the returned record carries the evidence.
    pub fn injective_part(&self, tol: f64) -> Result<InjectivePart> {
        let closed = self.closure();
        let p = closed.ker_part(tol).projector();
        let q = closed.mul_part(tol).projector();
        let ip = CMatrix::identity(self.dim_h, self.dim_h) - p;
        let iq = CMatrix::identity(self.dim_k, self.dim_k) - q;
        let (xs, ys) = closed.span_blocks();
        let (sx, sy) = (&ip * &xs, &iq * &ys);
        let scale = xs.norm().max(ys.norm());
        let relation = LinearRelation::from_columns(&sx, &sy)?.with_floor(SPAN_CUTOFF * scale);
        let mul_dim = relation.mul_part(tol).dim();
        let ker_dim = relation.ker_part(tol).dim();
        let single_valued_residual = fit_residual(&sx, &sy, tol, scale);
        let injectivity_residual = fit_residual(&sy, &sx, tol, scale);
        let (bh, bk) = relation.basis_blocks();
        let mut operator = operator_from_blocks(&bh, &bk, tol);
        operator.residual = single_valued_residual;
        Ok(InjectivePart {
            operator,
            relation,
            mul_dim,
            ker_dim,
            single_valued_residual,
            injectivity_residual,
        })
    }
}

impl PartialEq for LinearRelation {
    fn eq(&self, other: &Self) -> bool {
        self.dim_h == other.dim_h && self.dim_k == other.dim_k && self.span == other.span && self.floor == other.floor
    }
}

impl Serialize for LinearRelation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            dim_h: usize,
            dim_k: usize,
            span: Vec<[Vec<json::Pair>; 2]>,
        }
        Raw {
            dim_h: self.dim_h,
            dim_k: self.dim_k,
            span: self
                .span
                .iter()
                .map(|(h, k)| [json::pairs(h.as_slice()), json::pairs(k.as_slice())])
                .collect(),
        }
        .serialize(s)
    }
}

/// Part of `ys` not explained by a linear function of `xs`:
/// `‖Y (I − V Vᴴ)‖_F / scale`, with `V` spanning the right singular
/// directions of `X` above `tol · scale`.
pub fn fit_residual(xs: &CMatrix, ys: &CMatrix, tol: f64, scale: f64) -> f64 {
    if scale == 0.0 || ys.ncols() == 0 || ys.nrows() == 0 {
        return 0.0;
    }
    let (_, sigma, v) = svd_full_right(xs);
    let keep = sigma.iter().take_while(|&&s| s > tol * scale).count();
    let vk = v.columns(0, keep);
    let explained = ys * &vk * vk.adjoint();
    (ys - explained).norm() / scale
}

/// Builds the operator `bh c ↦ bk c` on `ran bh`, discarding directions whose
/// singular value is at most `tol`.
fn operator_from_blocks(bh: &CMatrix, bk: &CMatrix, tol: f64) -> OperatorPart {
    let (u, sigma, v) = svd_full_right(bh);
    let p = sigma.iter().take_while(|&&s| s > tol).count();
    let domain_basis = u.columns(0, p).into_owned();
    let mut matrix = bk * v.columns(0, p);
    for (j, s) in sigma.iter().take(p).enumerate() {
        matrix.column_mut(j).iter_mut().for_each(|z| *z /= *s);
    }
    OperatorPart {
        dim_h: bh.nrows(),
        dim_k: bk.nrows(),
        domain_basis,
        matrix,
        residual: 0.0,
    }
}

/// A single-valued linear operator from a subspace of `H` into `K`.
#[derive(Debug, Clone, Serialize)]
pub struct OperatorPart {
    pub dim_h: usize,
    pub dim_k: usize,
    /// Orthonormal basis (columns) of the domain.
    #[serde(with = "json::matrix_columns")]
    pub domain_basis: CMatrix,
    /// Images of the domain basis vectors (columns).
    #[serde(with = "json::matrix_columns")]
    pub matrix: CMatrix,
    /// How well the operator reproduces the spanning family it came from.
    pub residual: f64,
}

impl OperatorPart {
    pub fn domain_dim(&self) -> usize {
        self.domain_basis.ncols()
    }

    /// The operator extended by zero on the orthogonal complement of its
    /// domain, as a `K × H` matrix.
    pub fn full_matrix(&self) -> CMatrix {
        &self.matrix * self.domain_basis.adjoint()
    }

    pub fn apply(&self, h: &CVector) -> CVector {
        &self.matrix * (self.domain_basis.adjoint() * h)
    }

    pub fn graph(&self) -> LinearRelation {
        LinearRelation::from_columns(&self.domain_basis, &self.matrix).expect("shapes agree")
    }

    /// `(‖M xs − ys‖ + ‖xs off the domain‖) / scale`.
    fn fit_residual(&self, xs: &CMatrix, ys: &CMatrix, scale: f64) -> f64 {
        if scale == 0.0 {
            return 0.0;
        }
        let predicted = &self.matrix * (self.domain_basis.adjoint() * xs);
        let off_domain = xs - &self.domain_basis * (self.domain_basis.adjoint() * xs);
        ((predicted - ys).norm() + off_domain.norm()) / scale
    }
}

/// The operator `S` obtained by projecting a relation off both its kernel
/// and its multivalued part, with evidence that it is single-valued and
/// injective.
#[derive(Debug, Clone, Serialize)]
pub struct InjectivePart {
    pub operator: OperatorPart,
    #[serde(skip)]
    pub relation: LinearRelation,
    pub mul_dim: usize,
    pub ker_dim: usize,
    pub single_valued_residual: f64,
    pub injectivity_residual: f64,
}

impl InjectivePart {
    /// Single-valued and injective, with both residuals at most `threshold`.
    pub fn holds(&self, threshold: f64) -> bool {
        self.mul_dim == 0
            && self.ker_dim == 0
            && self.single_valued_residual <= threshold
            && self.injectivity_residual <= threshold
    }
}
