//! Dense complex linear algebra helpers: spectral factorizations of
//! positive semidefinite matrices, rank-revealing range/null space bases and
//! subspaces compared through their orthogonal projections.

use faer::{c64, Mat, Side};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::json;
use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Eigenvalues (descending) and matching orthonormal eigenvectors of the
/// Hermitian part of `m`. Each eigenvector is rotated so that its largest
/// entry is real and positive, which makes the output reproducible.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = to_faer(&herm)
        .self_adjoint_eigen(Side::Lower)
        .expect("eigendecomposition of a finite Hermitian matrix");
    let (s, u) = (eig.S().column_vector(), eig.U());
    // faer sorts ascending
    let values = (0..n).rev().map(|i| s[i].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, src) in (0..n).rev().enumerate() {
        let mut col = CVector::from_fn(n, |r, _| from_faer(u[(r, src)]));
        normalize_phase(&mut col);
        vectors.set_column(dst, &col);
    }
    (values, vectors)
}

fn to_faer(m: &CMatrix) -> Mat<c64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| {
        let z = m[(i, j)];
        c64::new(z.re, z.im)
    })
}

fn from_faer(z: c64) -> C64 {
    C64::new(z.re, z.im)
}

fn normalize_phase(v: &mut CVector) {
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in v.iter().enumerate() {
        // ties broken towards the first index, with some slack for rounding
        if z.norm() > best_abs * (1.0 + 1e-12) {
            best = i;
            best_abs = z.norm();
        }
    }
    if best_abs > 0.0 {
        let phase = v[best].conj() / best_abs;
        *v *= phase;
    }
}

/// Singular value decomposition with a full set of right singular vectors,
/// sorted by decreasing singular value. Returns `(U, sigma, V)` with
/// `U: rows × k`, `V: cols × cols`, where `k = min(rows, cols)` and columns of
/// `V` beyond `k` span the remaining null directions.
pub fn svd_full_right(x: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (rows, cols) = x.shape();
    if cols == 0 {
        return (CMatrix::zeros(rows, 0), Vec::new(), CMatrix::zeros(0, 0));
    }
    if rows == 0 {
        return (CMatrix::zeros(0, 0), Vec::new(), CMatrix::identity(cols, cols));
    }
    let (u, s, vf) = full_svd(x);
    let k = rows.min(cols);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re));
    order.extend(k..cols);
    let u_out = CMatrix::from_fn(rows, k, |r, j| from_faer(u[(r, order[j])]));
    let sigma = order[..k].iter().map(|&j| s[j].re).collect();
    let v = CMatrix::from_fn(cols, cols, |r, j| from_faer(vf[(r, order[j])]));
    (u_out, sigma, v)
}

/// Full SVD `(U, s, V)` of `x`. faer occasionally fails to converge on
/// sparse inputs; a failed attempt is retried on `W₁ x W₂` for fixed
/// pseudo-random unitaries, which has the same singular values.
fn full_svd(x: &CMatrix) -> (Mat<c64>, Vec<c64>, Mat<c64>) {
    let m = to_faer(x);
    let values = |s: faer::ColRef<'_, c64>| (0..s.nrows()).map(|i| s[i]).collect::<Vec<_>>();
    if let Ok(svd) = m.svd() {
        return (svd.U().to_owned(), values(svd.S().column_vector()), svd.V().to_owned());
    }
    for seed in 0..4 {
        let w1 = random_unitary(m.nrows(), 2 * seed);
        let w2 = random_unitary(m.ncols(), 2 * seed + 1);
        if let Ok(svd) = (&w1 * &m * &w2).svd() {
            // W₁ x W₂ = U S Vᴴ  ⇒  x = (W₁ᴴ U) S (W₂ V)ᴴ
            return (w1.adjoint() * svd.U(), values(svd.S().column_vector()), &w2 * svd.V());
        }
    }
    panic!("singular value decomposition did not converge on a finite {}x{} matrix", m.nrows(), m.ncols());
}

fn random_unitary(n: usize, seed: u64) -> Mat<c64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(n, n, |_, _| {
        let (re, im): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        c64::new(re, im)
    });
    g.qr().compute_Q()
}

/// Orthonormal basis of the column space of `x`, keeping singular directions
/// with `sigma > cutoff`.
pub fn range_basis(x: &CMatrix, cutoff: f64) -> CMatrix {
    let (u, sigma, _) = svd_full_right(x);
    let keep = sigma.iter().take_while(|&&s| s > cutoff).count();
    let mut out = u.columns(0, keep).into_owned();
    for mut col in out.column_iter_mut() {
        let mut owned = col.clone_owned();
        normalize_phase(&mut owned);
        col.copy_from(&owned);
    }
    out
}

/// Orthonormal basis of `{c : x c ≈ 0}`: right singular vectors with
/// `sigma <= cutoff`, including directions beyond the row count.
pub fn null_basis(x: &CMatrix, cutoff: f64) -> CMatrix {
    let (_, sigma, v) = svd_full_right(x);
    let cols = x.ncols();
    let keep = sigma.iter().take_while(|&&s| s > cutoff).count();
    v.columns(keep, cols - keep).into_owned()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let (_, sigma, _) = svd_full_right(m);
    sigma.first().copied().unwrap_or(0.0)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn vec_from_slice(values: &[C64]) -> CVector {
    CVector::from_column_slice(values)
}

/// Spectral factorization `K = U₊ D₊ U₊ᴴ` of a Hermitian positive
/// semidefinite matrix with an explicit rank cutoff.
#[derive(Debug, Clone)]
pub struct PsdFactor {
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// Retained eigenvalues (strictly above the cutoff).
    pub retained: Vec<f64>,
    /// Eigenvectors of the retained eigenvalues (`n × r`).
    pub range: CMatrix,
    /// Eigenvectors spanning the numerical kernel (`n × (n − r)`).
    pub kernel: CMatrix,
    /// The absolute cutoff that separated `retained` from the kernel.
    pub cutoff: f64,
    /// Some eigenvalue fell within a factor of ten of the cutoff.
    pub borderline: bool,
}

impl PsdFactor {
    pub fn new(k: &CMatrix, tol: f64) -> Self {
        let n = k.nrows();
        let (eigenvalues, vectors) = hermitian_eigen(k);
        let top = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
        let cutoff = tol * top;
        let r = if top == 0.0 {
            0
        } else {
            eigenvalues.iter().take_while(|&&d| d > cutoff).count()
        };
        let borderline = top > 0.0
            && eigenvalues
                .iter()
                .any(|&d| d >= cutoff / 10.0 && d <= cutoff * 10.0);
        PsdFactor {
            retained: eigenvalues[..r].to_vec(),
            range: vectors.columns(0, r).into_owned(),
            kernel: vectors.columns(r, n - r).into_owned(),
            eigenvalues,
            cutoff,
            borderline,
        }
    }

    pub fn rank(&self) -> usize {
        self.retained.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// `Q = D₊^{1/2} U₊ᴴ`, so that `QᴴQ ≈ K`.
    pub fn embedding(&self) -> CMatrix {
        let mut q = self.range.adjoint();
        for (i, d) in self.retained.iter().enumerate() {
            let s = d.sqrt();
            q.row_mut(i).iter_mut().for_each(|z| *z *= s);
        }
        q
    }

    /// Right inverse of [`Self::embedding`]: `U₊ D₊^{-1/2}`.
    pub fn embedding_right_inverse(&self) -> CMatrix {
        let mut p = self.range.clone();
        for (i, d) in self.retained.iter().enumerate() {
            let s = 1.0 / d.sqrt();
            p.column_mut(i).iter_mut().for_each(|z| *z *= s);
        }
        p
    }
}

/// A linear subspace of `ℂᵈ` stored as an orthonormal basis (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    pub ambient: usize,
    #[serde(with = "json::matrix_columns")]
    pub basis: CMatrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: CMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: CMatrix::identity(ambient, ambient),
        }
    }

    /// Orthonormalizes the columns of `spanning` (absolute cutoff on singular
    /// values).
    pub fn spanned_by(spanning: &CMatrix, cutoff: f64) -> Self {
        Subspace {
            ambient: spanning.nrows(),
            basis: range_basis(spanning, cutoff),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthogonal projection onto the subspace. The trivial and full cases
    /// are returned exactly.
    pub fn projector(&self) -> CMatrix {
        match self.dim() {
            0 => CMatrix::zeros(self.ambient, self.ambient),
            d if d == self.ambient => CMatrix::identity(self.ambient, self.ambient),
            _ => &self.basis * self.basis.adjoint(),
        }
    }

    /// Spectral-norm distance between the two orthogonal projections.
    pub fn distance(&self, other: &Subspace) -> f64 {
        assert_eq!(self.ambient, other.ambient, "subspaces of different spaces");
        let diff = self.projector() - other.projector();
        let (values, _) = hermitian_eigen(&diff);
        values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `‖(I − P) v‖` maximized over the columns of `vectors`.
    pub fn max_escape(&self, vectors: &CMatrix) -> f64 {
        let proj = self.projector();
        let rest = vectors - &proj * vectors;
        rest.column_iter().fold(0.0, |acc, col| acc.max(col.norm()))
    }
}
