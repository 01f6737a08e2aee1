//! Principal component analysis for compressing response curves.
//!
//! Components come from a dense symmetric eigen-decomposition: of the
//! `N x N` covariance when `N <= n`, otherwise of the `n x n` Gram matrix of
//! the centred rows, whose eigenvectors map back to principal directions
//! through `Xc^T u / sqrt(lambda)`. Each component is signed so that its
//! largest-magnitude entry is positive.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Array1<f64>,
    /// `k x N`, orthonormal rows.
    components: Array2<f64>,
    explained_variance: Vec<f64>,
}

impl PcaModel {
    pub fn fit(y: ArrayView2<f64>, k: usize) -> Result<Self> {
        let (n, dim) = y.dim();
        if n < 2 {
            return Err(Error::InvalidArgument("PCA needs at least two rows".into()));
        }
        if k == 0 || k > n.min(dim) {
            return Err(Error::InvalidArgument(format!(
                "component count {k} outside 1..={}",
                n.min(dim)
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("PCA input is not finite".into()));
        }
        let mean = y.mean_axis(Axis(0)).expect("n >= 2");
        let centered = &y - &mean;
        let denom = (n - 1) as f64;

        let (mut components, explained_variance) = if dim <= n {
            let cov = centered.t().dot(&centered) / denom;
            let (values, vectors) = top_eigenpairs(&cov, k);
            let mut comps = Array2::zeros((k, dim));
            for (c, v) in vectors.iter().enumerate() {
                comps.row_mut(c).assign(&Array1::from(v.clone()));
            }
            (comps, values)
        } else {
            let gram = centered.dot(&centered.t());
            let (values, vectors) = top_eigenpairs(&gram, k);
            let scale_tol = values.first().copied().unwrap_or(0.0).max(1.0) * 1e-12;
            let mut comps = Array2::zeros((k, dim));
            for (c, (lambda, u)) in values.iter().zip(&vectors).enumerate() {
                if *lambda > scale_tol {
                    let u = Array1::from(u.clone());
                    let v = centered.t().dot(&u) / lambda.sqrt();
                    comps.row_mut(c).assign(&v);
                }
            }
            orthonormalize(&mut comps);
            (comps, values.iter().map(|l| l / denom).collect())
        };

        for mut row in components.rows_mut() {
            let pivot = row
                .iter()
                .copied()
                .enumerate()
                .fold((0, 0.0f64), |(bi, bv), (i, v)| if v.abs() > bv.abs() { (i, v) } else { (bi, bv) })
                .1;
            if pivot < 0.0 {
                row.mapv_inplace(|v| -v);
            }
        }

        Ok(PcaModel {
            mean,
            components,
            explained_variance: explained_variance.into_iter().map(|v| v.max(0.0)).collect(),
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &Array1<f64> {
        &self.mean
    }

    pub fn components(&self) -> &Array2<f64> {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Scores `(Y - mean) C^T`, `n x k`.
    pub fn transform(&self, y: ArrayView2<f64>) -> Result<Array2<f64>> {
        if y.ncols() != self.input_dim() {
            return Err(Error::dim("PCA transform", self.input_dim(), y.ncols()));
        }
        Ok((&y - &self.mean).dot(&self.components.t()))
    }

    /// Curves `S C + mean`, `n x N`.
    pub fn inverse(&self, scores: ArrayView2<f64>) -> Result<Array2<f64>> {
        if scores.ncols() != self.n_components() {
            return Err(Error::dim("PCA inverse", self.n_components(), scores.ncols()));
        }
        Ok(scores.dot(&self.components) + &self.mean)
    }

    pub fn inverse_one(&self, scores: &[f64], out: &mut [f64]) {
        out.copy_from_slice(self.mean.as_slice().expect("contiguous"));
        for (s, row) in scores.iter().zip(self.components.rows()) {
            for (o, c) in out.iter_mut().zip(row) {
                *o += s * c;
            }
        }
    }

    /// Mean over rows of the per-row RMSE between `y` and its projection
    /// back from `k` scores.
    pub fn reconstruction_rmse(&self, y: ArrayView2<f64>) -> Result<f64> {
        let back = self.inverse(self.transform(y)?.view())?;
        let n = y.nrows();
        if n == 0 {
            return Err(Error::EmptyInput("PCA reconstruction"));
        }
        let total: f64 = y
            .rows()
            .into_iter()
            .zip(back.rows())
            .map(|(a, b)| {
                let ss: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
                (ss / a.len() as f64).sqrt()
            })
            .sum();
        Ok(total / n as f64)
    }
}

/// Largest `k` eigenpairs of a symmetric matrix, eigenvalues descending.
fn top_eigenpairs(sym: &Array2<f64>, k: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let d = sym.nrows();
    let m = DMatrix::from_fn(d, d, |i, j| 0.5 * (sym[[i, j]] + sym[[j, i]]));
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(k)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect()))
        .unzip()
}

/// Modified Gram-Schmidt over the rows; zero rows are replaced by the first
/// unit axis vectors that are not already spanned.
fn orthonormalize(rows: &mut Array2<f64>) {
    let (k, dim) = rows.dim();
    let mut axis = 0;
    for i in 0..k {
        let mut attempt = rows.row(i).to_owned();
        loop {
            for j in 0..i {
                let prev = rows.row(j).to_owned();
                let proj = attempt.dot(&prev);
                attempt.scaled_add(-proj, &prev);
            }
            let norm = attempt.dot(&attempt).sqrt();
            if norm > 1e-8 {
                rows.row_mut(i).assign(&(attempt / norm));
                break;
            }
            attempt = Array1::zeros(dim);
            attempt[axis] = 1.0;
            axis += 1;
        }
    }
}
