use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Pca {
    pub mean: DVector<f64>,
    /// d0 x k, orthonormal columns in order of decreasing variance.
    pub basis: DMatrix<f64>,
    /// Variance captured by each column.
    pub variances: Vec<f64>,
}

impl Pca {
    pub fn project(&self, data: &DMatrix<f64>) -> DMatrix<f64> {
        let mut centered = data.clone();
        for mut row in centered.row_iter_mut() {
            row -= self.mean.transpose();
        }
        centered * &self.basis
    }
}

/// Centers the columns of `data` (n x d0) and projects onto the top `k`
/// eigenvectors of the sample covariance. Each basis vector is signed so that
/// its largest-magnitude entry is positive.
pub fn pca_reduce(data: &DMatrix<f64>, k: usize) -> Result<(DMatrix<f64>, Pca)> {
    let (n, d0) = data.shape();
    if k == 0 || k > n.min(d0) {
        return Err(Error::param(format!("k = {k} must lie in 1..={}", n.min(d0))));
    }
    let mean = data.row_mean().transpose();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.transpose() * &centered / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d0).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut basis = DMatrix::zeros(d0, k);
    let mut variances = Vec::with_capacity(k);
    for (j, &i) in order.iter().take(k).enumerate() {
        let mut col = eig.eigenvectors.column(i).clone_owned();
        let pivot = col.iter().cloned().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
        if pivot < 0.0 {
            col = -col;
        }
        basis.set_column(j, &col);
        variances.push(eig.eigenvalues[i].max(0.0));
    }
    let projected = &centered * &basis;
    Ok((
        projected,
        Pca {
            mean,
            basis,
            variances,
        },
    ))
}
