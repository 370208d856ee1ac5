//! Two-dimensional linear discriminant projection of the 21-bit response
//! vectors, used to compare response populations (models, humans, random).
//!
//! The generalized eigenproblem `S_b w = λ S_w w` is solved by regularizing
//! and Cholesky-whitening the within-class scatter: with `S_w + λI = L Lᵀ`,
//! the symmetric matrix `L⁻¹ S_b L⁻ᵀ` has the same spectrum, and its top two
//! eigenvectors map back through `L⁻ᵀ`. The regularizer is
//! `λ = 1e-6 · trace(S_w)/21`, enough to keep the factorization well posed
//! on sparse binary data without visibly moving the axes.

use crate::catalog::TOTAL_ACTIONS;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LDA_DIMS: usize = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LdaError {
    #[error("discriminant analysis needs at least two classes, got {0}")]
    TooFewClasses(usize),
    #[error("class {0:?} has no vectors")]
    EmptyClass(String),
    #[error("within-class scatter factorization failed")]
    Degenerate,
}

/// One labeled population of response vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaInput {
    pub label: String,
    pub vectors: Vec<[f64; TOTAL_ACTIONS]>,
}

/// Axis-aligned description of a 2-sigma covariance ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    /// Semi-axes, 2 standard deviations along each principal direction.
    pub radii: [f64; 2],
    /// Rotation of the first principal direction, radians in (-pi, pi].
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaClass {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    pub mean: [f64; 2],
    pub ellipse: Ellipse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaProjection {
    /// The two discriminant axes in action space, unit length.
    pub axes: [Vec<f64>; 2],
    /// Eigenvalues (between/within separation) of the two axes.
    pub separation: [f64; 2],
    pub classes: Vec<LdaClass>,
}

fn class_scatter(vectors: &[[f64; TOTAL_ACTIONS]], mean: &DVector<f64>) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(TOTAL_ACTIONS, TOTAL_ACTIONS);
    for v in vectors {
        let d = DVector::from_row_slice(v) - mean;
        s += &d * d.transpose();
    }
    s
}

fn mean_vector(vectors: &[[f64; TOTAL_ACTIONS]]) -> DVector<f64> {
    let mut m = DVector::zeros(TOTAL_ACTIONS);
    for v in vectors {
        m += DVector::from_row_slice(v);
    }
    m / vectors.len() as f64
}

fn ellipse_of(points: &[[f64; 2]], mean: [f64; 2]) -> Ellipse {
    let n = points.len() as f64;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for p in points {
        let dx = p[0] - mean[0];
        let dy = p[1] - mean[1];
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let denom = (n - 1.0).max(1.0);
    let (sxx, syy, sxy) = (sxx / denom, syy / denom, sxy / denom);
    // Closed-form eigendecomposition of the 2x2 covariance.
    let tr = sxx + syy;
    let det = sxx * syy - sxy * sxy;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = (tr / 2.0 + disc).max(0.0);
    let l2 = (tr / 2.0 - disc).max(0.0);
    let angle = if sxy.abs() < 1e-15 && (sxx - syy).abs() < 1e-15 {
        0.0
    } else {
        0.5 * (2.0 * sxy).atan2(sxx - syy)
    };
    Ellipse { center: mean, radii: [2.0 * l1.sqrt(), 2.0 * l2.sqrt()], angle }
}

/// Fits the discriminant projection and projects every class into 2D.
pub fn lda_projection(classes: &[LdaInput]) -> Result<LdaProjection, LdaError> {
    if classes.len() < 2 {
        return Err(LdaError::TooFewClasses(classes.len()));
    }
    for c in classes {
        if c.vectors.is_empty() {
            return Err(LdaError::EmptyClass(c.label.clone()));
        }
    }
    let total: usize = classes.iter().map(|c| c.vectors.len()).sum();
    let mut global = DVector::zeros(TOTAL_ACTIONS);
    for c in classes {
        for v in &c.vectors {
            global += DVector::from_row_slice(v);
        }
    }
    global /= total as f64;

    let mut s_w = DMatrix::zeros(TOTAL_ACTIONS, TOTAL_ACTIONS);
    let mut s_b = DMatrix::zeros(TOTAL_ACTIONS, TOTAL_ACTIONS);
    for c in classes {
        let m_c = mean_vector(&c.vectors);
        s_w += class_scatter(&c.vectors, &m_c);
        let d = &m_c - &global;
        s_b += (&d * d.transpose()) * c.vectors.len() as f64;
    }

    let trace = s_w.trace();
    let lambda = if trace > 0.0 { 1e-6 * trace / TOTAL_ACTIONS as f64 } else { 1e-6 };
    let s_w_reg = s_w + DMatrix::identity(TOTAL_ACTIONS, TOTAL_ACTIONS) * lambda;
    let chol = s_w_reg.cholesky().ok_or(LdaError::Degenerate)?;
    let l = chol.l();

    // M = L^-1 S_b L^-T, symmetrized against rounding.
    let linv_sb = l.clone().solve_lower_triangular(&s_b).ok_or(LdaError::Degenerate)?;
    let m = l
        .clone()
        .solve_lower_triangular(&linv_sb.transpose())
        .ok_or(LdaError::Degenerate)?;
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();

    // Top two eigenpairs.
    let mut order: Vec<usize> = (0..TOTAL_ACTIONS).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(LDA_DIMS);
    let mut separation = [0.0; LDA_DIMS];
    let lt = l.transpose();
    for (k, &idx) in order.iter().take(LDA_DIMS).enumerate() {
        let u = eig.eigenvectors.column(idx).into_owned();
        // Solve L^T w = u to map back from the whitened space.
        let mut w = lt.solve_upper_triangular(&u).ok_or(LdaError::Degenerate)?;
        let norm = w.norm();
        if norm > 0.0 {
            w /= norm;
        }
        // Deterministic sign: largest-magnitude component positive.
        let dominant = w.iter().cloned().fold(0.0f64, |acc: f64, x| {
            if x.abs() > acc.abs() {
                x
            } else {
                acc
            }
        });
        if dominant < 0.0 {
            w = -w;
        }
        separation[k] = eig.eigenvalues[idx].max(0.0);
        axes.push(w.iter().cloned().collect());
    }

    let project = |v: &[f64; TOTAL_ACTIONS]| -> [f64; 2] {
        let d = DVector::from_row_slice(v) - &global;
        [
            DVector::from_row_slice(&axes[0]).dot(&d),
            DVector::from_row_slice(&axes[1]).dot(&d),
        ]
    };

    let classes_out = classes
        .iter()
        .map(|c| {
            let points: Vec<[f64; 2]> = c.vectors.iter().map(&project).collect();
            let n = points.len() as f64;
            let mean = [
                points.iter().map(|p| p[0]).sum::<f64>() / n,
                points.iter().map(|p| p[1]).sum::<f64>() / n,
            ];
            LdaClass {
                label: c.label.clone(),
                ellipse: ellipse_of(&points, mean),
                mean,
                points,
            }
        })
        .collect();

    Ok(LdaProjection {
        axes: [axes[0].clone(), axes[1].clone()],
        separation,
        classes: classes_out,
    })
}
