//! Thin wrapper over nalgebra's symmetric eigensolver.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Absolute tolerance used to group eigenvalues into eigenspaces.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Eigendecomposition `M = V diag(λ) Vᵀ` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        SymEigen { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Index ranges of eigenvalue clusters (consecutive values within `tol`
    /// of the cluster's first value).
    pub fn clusters(&self, tol: f64) -> Vec<std::ops::Range<usize>> {
        cluster_sorted(&self.values, tol)
    }

    /// `f(M) x` computed spectrally.
    pub fn apply_fn(&self, x: &DVector<f64>, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let coeffs = self.vectors.tr_mul(x);
        let scaled = DVector::from_iterator(
            coeffs.len(),
            coeffs.iter().zip(&self.values).map(|(c, &l)| c * f(l)),
        );
        &self.vectors * scaled
    }

    /// Column `j` of `f(M)`, i.e. `f(M) e_j`.
    pub fn apply_fn_to_basis(&self, j: usize, f: impl Fn(f64) -> f64) -> DVector<f64> {
        let n = self.dim();
        let scaled =
            DVector::from_iterator(n, (0..n).map(|k| self.vectors[(j, k)] * f(self.values[k])));
        &self.vectors * scaled
    }

    /// Dense `f(M)`.
    pub fn matrix_fn(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let s = f(self.values[k]);
            scaled.column_mut(k).scale_mut(s);
        }
        scaled * self.vectors.transpose()
    }
}

pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || (values[k] - values[start]).abs() >= tol {
            if start < k {
                out.push(start..k);
            }
            start = k;
        }
    }
    out
}

/// Distinct eigenvalues (cluster means) with multiplicities, ascending.
pub fn clustered_spectrum(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    cluster_sorted(values, tol)
        .into_iter()
        .map(|r| {
            let mean = values[r.clone()].iter().sum::<f64>() / r.len() as f64;
            (mean, r.len())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reconstructs_and_sorts() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 5.0]);
        let e = SymEigen::new(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        assert!((e.values[2] - 5.0).abs() < 1e-12);
        let back = e.matrix_fn(|x| x);
        assert!((back - m).abs().max() < 1e-12);
    }

    #[test]
    fn clustering() {
        let v = [0.0, 1e-10, 1.0, 1.0 + 5e-9, 2.0];
        let c = cluster_sorted(&v, CLUSTER_TOL);
        assert_eq!(c, vec![0..2, 2..4, 4..5]);
        let s = clustered_spectrum(&v, CLUSTER_TOL);
        assert_eq!(s.iter().map(|x| x.1).collect::<Vec<_>>(), vec![2, 2, 1]);
    }
}
