//! Linear functionals given by their values on the basis: Gram matrices,
//! the Löwner order, and representability certificates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::algebra::{check_len, Element, StarAlgebra};
use crate::error::{Error, Result};
use crate::gns::Coordinates;
use crate::json;
use crate::linalg::{c, hermitian_eigen, max_abs, CMatrix, PsdFactor};
use crate::C64;

/// A linear functional, `values[i] = f(b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    #[serde(with = "json::complex_vec")]
    pub values: Vec<C64>,
}

impl Functional {
    pub fn new(values: Vec<C64>) -> Self {
        Functional { values }
    }

    pub fn zero(n: usize) -> Self {
        Functional {
            values: vec![C64::ZERO; n],
        }
    }

    pub fn from_real(values: &[f64]) -> Self {
        Functional {
            values: values.iter().map(|&x| c(x)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Euclidean norm of the value vector.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|z| *z == C64::ZERO)
    }

    pub fn evaluate(&self, a: &Element) -> Result<C64> {
        check_len(self.dim(), a.len())?;
        Ok(self.values.iter().zip(a.coeffs.iter()).map(|(v, x)| v * x).sum())
    }

    pub fn add(&self, other: &Functional) -> Result<Functional> {
        check_len(self.dim(), other.dim())?;
        Ok(Functional {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, t: f64) -> Result<Functional> {
        if !(t >= 0.0) {
            return Err(Error::NegativeScale(t));
        }
        Ok(Functional {
            values: self.values.iter().map(|z| z * t).collect(),
        })
    }

    /// Largest absolute difference of values.
    pub fn max_abs_diff(&self, other: &Functional) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).norm()))
    }
}

/// `G[i][j] = f(b_j* b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    #[serde(with = "json::matrix_rows")]
    pub entries: CMatrix,
    pub scale: f64,
}

impl GramMatrix {
    /// Matrix `K` of the semi-inner product in coefficient coordinates:
    /// `f(b* a) = bᴴ K a`. It is the transpose of `entries`.
    pub fn form(&self) -> CMatrix {
        self.entries.transpose()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs(&(&self.entries - self.entries.adjoint())) <= tol * self.scale.max(f64::MIN_POSITIVE)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.entries).0.last().copied().unwrap_or(0.0)
    }
}

pub fn gram(alg: &StarAlgebra, f: &Functional) -> Result<GramMatrix> {
    let n = alg.dim();
    check_len(n, f.dim())?;
    // prod[l][i] = f(b_l b_i)
    let prod = CMatrix::from_fn(n, n, |l, i| {
        (0..n).map(|k| alg.mult_entry(l, i, k) * f.values[k]).sum()
    });
    let entries = prod.transpose() * alg.invol_matrix();
    let scale = max_abs(&entries);
    Ok(GramMatrix { entries, scale })
}

/// Evidence for or against representability of a functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentabilityCertificate {
    pub is_positive: bool,
    pub is_hermitian: bool,
    /// `f` vanishes on the kernel of its Gram matrix; equivalent to a finite
    /// Cauchy–Schwarz constant.
    pub vanishes_on_kernel: bool,
    /// Smallest `C` with `|f(a)|² ≤ C f(a*a)`; `null` in JSON when infinite.
    #[serde(with = "json::extended_f64")]
    pub c_min: f64,
    /// `λ_i = ‖π(b_i)‖²`, the optimal constants in `f(x* b_i* b_i x) ≤ λ_i f(x* x)`.
    #[serde(with = "json::extended_f64_vec")]
    pub lambda: Vec<f64>,
    pub min_eigenvalue: f64,
    pub scale: f64,
    pub rank: usize,
    pub borderline_rank: bool,
}

impl RepresentabilityCertificate {
    pub fn passes(&self) -> bool {
        self.is_positive
            && self.is_hermitian
            && self.vanishes_on_kernel
            && self.c_min.is_finite()
            && self.lambda.iter().all(|l| l.is_finite())
    }
}

pub fn check_representable(
    alg: &StarAlgebra,
    f: &Functional,
    tol: f64,
) -> Result<RepresentabilityCertificate> {
    Ok(Coordinates::compute(alg, f, tol)?.certificate)
}

/// `h ≤ g` in the Löwner order of Gram matrices: `h(a*a) ≤ g(a*a)` for all `a`.
pub fn leq(alg: &StarAlgebra, h: &Functional, g: &Functional, tol: f64) -> Result<bool> {
    Ok(leq_margin(alg, h, g)? >= -tol)
}

/// Smallest eigenvalue of `G_g − G_h`, relative to the larger Gram scale.
/// Nonnegative (up to rounding) exactly when `h ≤ g`.
pub fn leq_margin(alg: &StarAlgebra, h: &Functional, g: &Functional) -> Result<f64> {
    let gh = gram(alg, h)?;
    let gg = gram(alg, g)?;
    let scale = gh.scale.max(gg.scale);
    if scale == 0.0 {
        return Ok(0.0);
    }
    let diff = &gg.entries - &gh.entries;
    let min = hermitian_eigen(&diff).0.last().copied().unwrap_or(0.0);
    Ok(min / scale)
}

/// `sup_a h(a*a) / x(a*a)`, or `None` when `h` charges a direction where `x`
/// vanishes (no multiple of `x` dominates `h`).
pub fn domination_ratio(
    alg: &StarAlgebra,
    h: &Functional,
    x: &Functional,
    tol: f64,
) -> Result<Option<f64>> {
    let fh = PsdFactor::new(&gram(alg, h)?.form(), tol);
    let fx = PsdFactor::new(&gram(alg, x)?.form(), tol);
    let qh = fh.embedding();
    if qh.nrows() == 0 {
        return Ok(Some(0.0));
    }
    let qh_norm = fh.max_eigenvalue().max(0.0).sqrt();
    let leak = crate::linalg::spectral_norm(&(&qh * &fx.kernel));
    if leak > tol * qh_norm {
        return Ok(None);
    }
    let ratio = crate::linalg::spectral_norm(&(&qh * fx.embedding_right_inverse()));
    Ok(Some(ratio * ratio))
}

/// `f(a) = Σ_j τ(x_j* a x_j)` for `k` seeded complex Gaussian elements `x_j`,
/// where `τ` is the algebra's canonical trace.
pub fn random_representable(alg: &StarAlgebra, k: usize, seed: u64) -> Result<Functional> {
    compressed_trace_functional(alg, k, None, seed)
}

/// As [`random_representable`] but with `x_j = y_j · support`, which confines
/// the functional to the left ideal generated by `support` and typically
/// makes its Gram matrix rank deficient.
pub fn random_representable_with_support(
    alg: &StarAlgebra,
    k: usize,
    support: &Element,
    seed: u64,
) -> Result<Functional> {
    check_len(alg.dim(), support.len())?;
    compressed_trace_functional(alg, k, Some(support), seed)
}

fn compressed_trace_functional(
    alg: &StarAlgebra,
    k: usize,
    support: Option<&Element>,
    seed: u64,
) -> Result<Functional> {
    let tau = alg.trace().ok_or(Error::MissingTrace)?;
    let n = alg.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![C64::ZERO; n];
    for _ in 0..k {
        let y = random_element(n, &mut rng);
        let x = match support {
            Some(s) => alg.multiply(&y, s)?,
            None => y,
        };
        let x_star = alg.involution(&x)?;
        for (i, value) in values.iter_mut().enumerate() {
            let bx = alg.multiply(&alg.basis_element(i), &x)?;
            let y = alg.multiply(&x_star, &bx)?;
            *value += y.coeffs.iter().zip(tau).map(|(a, t)| a * t).sum::<C64>();
        }
    }
    Ok(Functional { values })
}

/// Element with i.i.d. complex standard normal coefficients (`E|z|² = 1`).
pub fn random_element(n: usize, rng: &mut impl rand::Rng) -> Element {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Element::from_coeffs(
        (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re * s, im * s)
            })
            .collect(),
    )
}
