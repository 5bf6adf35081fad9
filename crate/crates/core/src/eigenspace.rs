//! PCA eigenspace construction and projection.
//!
//! Training fits the basis through the small M x M Gram matrix of the
//! centered sample columns rather than the full N x N covariance: the
//! nonzero eigenvalues agree, and each small-side eigenvector `v` maps to a
//! full-dimension component `W v` (renormalized). With M samples of
//! dimension N and M much smaller than N this is the only practical route.

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::image::GrayImage;
use crate::linalg::{self, Matrix};

/// Eigenvalues below `RANK_TOL * lambda_max` are treated as zero; mapping
/// their eigenvectors through `W` would only normalize noise.
const RANK_TOL: f64 = 1e-10;

/// A fitted PCA basis: the sample mean plus an ordered orthonormal set of
/// principal components with their eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    /// Feature dimension.
    n: usize,
    /// Training sample count.
    m: usize,
}

/// A sample projected into the eigenspace, tagged with its class.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub coords: Vec<f64>,
    pub label: usize,
}

impl Eigenspace {
    /// Fits mean, components, and eigenvalues from training vectors. At
    /// most `max_components` components are retained when given; otherwise
    /// every component above the rank tolerance is kept.
    pub fn fit(samples: &[FeatureVector], max_components: Option<usize>) -> Result<Self> {
        let mean = compute_mean(samples)?;
        let w = center(samples, &mean)?;
        fit_pca(&w, mean, max_components)
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    /// Feature dimension the space was fitted on.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Training sample count the space was fitted on.
    pub fn train_count(&self) -> usize {
        self.m
    }

    /// Rebuilds an eigenspace from persisted parts, revalidating shape
    /// invariants.
    pub fn from_parts(
        mean: Vec<f64>,
        components: Vec<Vec<f64>>,
        eigenvalues: Vec<f64>,
        m: usize,
    ) -> Result<Self> {
        let n = mean.len();
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        if components.len() != eigenvalues.len() {
            return Err(Error::LengthMismatch {
                left: components.len(),
                right: eigenvalues.len(),
            });
        }
        for c in &components {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: c.len(),
                });
            }
        }
        Ok(Eigenspace {
            mean,
            components,
            eigenvalues,
            n,
            m,
        })
    }
}

/// Elementwise arithmetic mean of the sample vectors.
pub fn compute_mean(samples: &[FeatureVector]) -> Result<Vec<f64>> {
    let first = samples.first().ok_or(Error::EmptyInput)?;
    let n = first.len();
    let mut mean = vec![0.0f64; n];
    for s in samples {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: s.len(),
            });
        }
        for (acc, v) in mean.iter_mut().zip(&s.values) {
            *acc += v;
        }
    }
    let m = samples.len() as f64;
    for acc in &mut mean {
        *acc /= m;
    }
    Ok(mean)
}

/// Centers the samples and lays them out as the N x M data matrix whose
/// columns are the centered vectors.
pub fn center(samples: &[FeatureVector], mean: &[f64]) -> Result<Matrix> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = mean.len();
    let m = samples.len();
    let mut w = Matrix::zeros(n, m);
    for (col, s) in samples.iter().enumerate() {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: s.len(),
            });
        }
        for (row, (v, mu)) in s.values.iter().zip(mean).enumerate() {
            w.set(row, col, v - mu);
        }
    }
    Ok(w)
}

/// Builds the eigenspace from a centered N x M data matrix.
///
/// Eigendecomposes the M x M Gram matrix, maps each above-tolerance
/// eigenvector back through `W`, renormalizes, and canonicalizes signs so
/// repeated fits are bit-identical.
pub fn fit_pca(w: &Matrix, mean: Vec<f64>, max_components: Option<usize>) -> Result<Eigenspace> {
    let m = w.cols();
    let n = w.rows();
    if m < 2 {
        return Err(Error::TooFewSamples(m));
    }
    if mean.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: mean.len(),
        });
    }

    let gram = w.column_gram();
    let eig = linalg::symmetric_eigen(&gram)?;

    let lambda_max = eig.eigenvalues.first().copied().unwrap_or(0.0);
    if lambda_max <= 0.0 {
        return Err(Error::DegenerateData);
    }
    let tol = RANK_TOL * lambda_max;

    let cap = max_components.unwrap_or(m);
    let mut components = Vec::new();
    let mut eigenvalues = Vec::new();
    for (lambda, v) in eig.eigenvalues.iter().zip(&eig.eigenvectors) {
        if components.len() >= cap || *lambda <= tol {
            break;
        }
        let mut u = w.mul_vec(v)?;
        let norm = linalg::norm(&u);
        if norm == 0.0 {
            break;
        }
        for x in &mut u {
            *x /= norm;
        }
        linalg::canonicalize_sign(&mut u);
        components.push(u);
        eigenvalues.push(lambda.max(0.0));
    }
    if components.is_empty() {
        return Err(Error::DegenerateData);
    }

    Ok(Eigenspace {
        mean,
        components,
        eigenvalues,
        n,
        m,
    })
}

/// Projects a feature vector into the eigenspace: coordinate `j` is the dot
/// product of component `j` with the mean-centered input.
pub fn project(es: &Eigenspace, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != es.n {
        return Err(Error::DimensionMismatch {
            expected: es.n,
            actual: x.len(),
        });
    }
    let centered: Vec<f64> = x.iter().zip(&es.mean).map(|(v, mu)| v - mu).collect();
    Ok(es
        .components
        .iter()
        .map(|c| linalg::dot(c, &centered))
        .collect())
}

/// Reshapes the mean vector into a `w` x `h` image, clamped to `[0, 255]`.
pub fn mean_image(es: &Eigenspace, w: usize, h: usize) -> Result<GrayImage> {
    if w * h != es.n {
        return Err(Error::DimensionMismatch {
            expected: es.n,
            actual: w * h,
        });
    }
    reshape_clamped(&es.mean, w, h)
}

/// Renders component `index` as a displayable image: the component is
/// scaled by `3 * sqrt(lambda)` (capped so the deviation stays within half
/// the 8-bit range), added to the mean, reshaped to `w` x `h`, and clamped
/// to `[0, 255]`.
pub fn reconstruct_eigenface(
    es: &Eigenspace,
    index: usize,
    w: usize,
    h: usize,
) -> Result<GrayImage> {
    if index >= es.components.len() {
        return Err(Error::IndexOutOfRange {
            index,
            count: es.components.len(),
        });
    }
    if w * h != es.n {
        return Err(Error::DimensionMismatch {
            expected: es.n,
            actual: w * h,
        });
    }
    let component = &es.components[index];
    let mut scale = 3.0 * es.eigenvalues[index].sqrt();
    let peak = component.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())) * scale;
    if peak > 127.5 {
        scale *= 127.5 / peak;
    }
    let values: Vec<f64> = es
        .mean
        .iter()
        .zip(component)
        .map(|(mu, c)| mu + scale * c)
        .collect();
    reshape_clamped(&values, w, h)
}

fn reshape_clamped(values: &[f64], w: usize, h: usize) -> Result<GrayImage> {
    let pixels: Vec<f64> = values.iter().map(|&v| v.clamp(0.0, 255.0)).collect();
    GrayImage::new(w, h, pixels)
}
