//! Latent semantic indexing: top-k left singular vectors of the
//! term-document matrix by seeded subspace iteration.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linalg::{orthonormalize_columns, symmetric_eigen, Matrix};
use super::SparseVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LsiConfig {
    /// Relative residual `‖AAᵀu − σ²u‖ / σ₁²` at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Extra block columns beyond `k`.
    pub oversample: usize,
    pub seed: u64,
}

impl Default for LsiConfig {
    fn default() -> Self {
        LsiConfig { tol: 1e-10, max_iter: 1000, oversample: 10, seed: 0x15c0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiModel {
    /// `V × k`, orthonormal columns.
    projection: Matrix,
    singular_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsiFitReport {
    pub iterations: usize,
    pub converged: bool,
    pub max_residual: f64,
}

impl LsiModel {
    pub fn k(&self) -> usize {
        self.singular_values.len()
    }

    pub fn dim(&self) -> usize {
        self.projection.rows()
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn projection(&self) -> &Matrix {
        &self.projection
    }

    /// `Uᵀv`.
    pub fn project(&self, v: &SparseVector) -> Vec<f64> {
        let k = self.k();
        let mut out = vec![0.0; k];
        for &(i, w) in v.entries() {
            for (o, &u) in out.iter_mut().zip(self.projection.row(i)) {
                *o += w * u;
            }
        }
        out
    }
}

/// Term-document matrix with one column per document.
struct TermDoc<'a> {
    docs: &'a [SparseVector],
    n_terms: usize,
}

impl TermDoc<'_> {
    /// `A X`, with `X` of shape `N × b`.
    fn mul(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.n_terms, x.cols());
        for (j, doc) in self.docs.iter().enumerate() {
            let xr = x.row(j);
            for &(i, w) in doc.entries() {
                for (o, &v) in out.row_mut(i).iter_mut().zip(xr) {
                    *o += w * v;
                }
            }
        }
        out
    }

    /// `Aᵀ Q`, with `Q` of shape `V × b`.
    fn mul_t(&self, q: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.docs.len(), q.cols());
        for (j, doc) in self.docs.iter().enumerate() {
            let row = out.row_mut(j);
            for &(i, w) in doc.entries() {
                for (o, &v) in row.iter_mut().zip(q.row(i)) {
                    *o += w * v;
                }
            }
        }
        out
    }
}

pub fn lsi_fit(docs: &[SparseVector], k: usize) -> Result<LsiModel> {
    lsi_fit_with(docs, k, &LsiConfig::default()).map(|(m, _)| m)
}

/// Fits the top-`k` left singular subspace. Requires `1 ≤ k ≤ min(V, N)`.
/// Non-convergence within `max_iter` logs a warning and returns the last
/// iterate.
pub fn lsi_fit_with(docs: &[SparseVector], k: usize, config: &LsiConfig) -> Result<(LsiModel, LsiFitReport)> {
    let n_docs = docs.len();
    let n_terms = docs.first().map(SparseVector::dim).unwrap_or(0);
    if docs.iter().any(|d| d.dim() != n_terms) {
        return Err(Error::Data("LSI input vectors have mixed dimensions".into()));
    }
    let rank_bound = n_terms.min(n_docs);
    if k == 0 || k > rank_bound {
        return Err(Error::Config(format!("LSI k = {k} outside 1..={rank_bound}")));
    }
    let a = TermDoc { docs, n_terms };
    let block = (k + config.oversample).min(rank_bound);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut q = Matrix::zeros(n_terms, block);
    for i in 0..n_terms {
        for j in 0..block {
            q[(i, j)] = StandardNormal.sample(&mut rng);
        }
    }
    orthonormalize_columns(&mut q);

    let mut report = LsiFitReport { iterations: 0, converged: false, max_residual: f64::INFINITY };
    let mut result = (Matrix::zeros(n_terms, k), vec![0.0; k]);
    for iter in 1..=config.max_iter {
        let mut p = a.mul_t(&q);
        orthonormalize_columns(&mut p);
        q = a.mul(&p);
        orthonormalize_columns(&mut q);

        // Rayleigh-Ritz on span(Q): eigenpairs of (QᵀA)(QᵀA)ᵀ
        let z = a.mul_t(&q); // N × b, = (QᵀA)ᵀ
        let small = z.transpose().matmul(&z);
        let (eigvals, w) = symmetric_eigen(&small);
        let u = q.matmul(&w);
        let sigma2: Vec<f64> = eigvals.iter().map(|&x| x.max(0.0)).collect();

        let aat_u = a.mul(&z.matmul(&w));
        let top = sigma2[0].max(f64::MIN_POSITIVE);
        let mut max_residual: f64 = 0.0;
        for c in 0..k {
            let r: f64 = (0..n_terms)
                .map(|i| {
                    let d = aat_u[(i, c)] - sigma2[c] * u[(i, c)];
                    d * d
                })
                .sum::<f64>()
                .sqrt();
            max_residual = max_residual.max(r / top);
        }
        report = LsiFitReport { iterations: iter, converged: max_residual <= config.tol || sigma2[0] == 0.0, max_residual };
        result = (u.truncate_cols(k), sigma2[..k].iter().map(|s| s.sqrt()).collect());
        if report.converged {
            break;
        }
    }
    if !report.converged {
        log::warn!(
            "LSI subspace iteration stopped after {} iterations, residual {:.3e} > {:.1e}",
            report.iterations,
            report.max_residual,
            config.tol
        );
    }
    let (mut projection, singular_values) = result;
    canonicalize_signs(&mut projection);
    Ok((LsiModel { projection, singular_values }, report))
}

/// Flips each column so its largest-magnitude entry is positive.
fn canonicalize_signs(m: &mut Matrix) {
    for j in 0..m.cols() {
        let mut best = (0.0f64, 0usize);
        for i in 0..m.rows() {
            if m[(i, j)].abs() > best.0 + 1e-12 {
                best = (m[(i, j)].abs(), i);
            }
        }
        if m[(best.1, j)] < 0.0 {
            for i in 0..m.rows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}
