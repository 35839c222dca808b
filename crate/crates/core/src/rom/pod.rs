use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::Snapshot;

/// Leading left singular vectors of a snapshot matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PodBasis {
    /// `N_h x k`, orthonormal columns.
    pub v: DMatrix<f64>,
    /// Non-increasing.
    pub singular_values: Vec<f64>,
}

impl PodBasis {
    pub fn k(&self) -> usize {
        self.v.ncols()
    }

    pub fn n_h(&self) -> usize {
        self.v.nrows()
    }

    /// `V^T u`.
    pub fn project(&self, u: &[f64]) -> Vec<f64> {
        let u = DVector::from_column_slice(u);
        (self.v.tr_mul(&u)).iter().copied().collect()
    }

    /// `V c`.
    pub fn expand(&self, coeffs: &[f64]) -> Vec<f64> {
        let c = DVector::from_column_slice(coeffs);
        (&self.v * c).iter().copied().collect()
    }

    /// `||u - V V^T u||_2`.
    pub fn projection_error(&self, u: &[f64]) -> f64 {
        let back = self.expand(&self.project(u));
        u.iter()
            .zip(&back)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Columns stacked into an `N_h x n` matrix.
pub fn snapshot_matrix(columns: &[&[f64]]) -> Result<DMatrix<f64>> {
    let n_h = columns.first().map_or(0, |c| c.len());
    if columns.iter().any(|c| c.len() != n_h) {
        return Err(Error::InvalidParameter("snapshots differ in length".into()));
    }
    Ok(DMatrix::from_fn(n_h, columns.len(), |i, j| columns[j][i]))
}

/// POD basis of rank `k` from raw field vectors.
pub fn pod_basis_from_columns(columns: &[&[f64]], k: usize) -> Result<PodBasis> {
    if k == 0 {
        return Err(Error::InvalidParameter("POD rank must be positive".into()));
    }
    let n = columns.len();
    let m = snapshot_matrix(columns)?;
    let available = n.min(m.nrows());
    if k > available {
        return Err(Error::Rank {
            requested: k,
            available,
        });
    }
    let n_h = m.nrows();
    let svd = m.svd(true, false);
    let u = svd
        .u
        .ok_or_else(|| Error::InvalidParameter("SVD produced no left vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut v = DMatrix::zeros(n_h, k);
    let mut sv = Vec::with_capacity(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        let mut col = u.column(src).clone_owned();
        // fixed sign so bases are reproducible across platforms
        if col.sum() < 0.0 {
            col.neg_mut();
        }
        v.set_column(dst, &col);
        sv.push(svd.singular_values[src]);
    }
    Ok(PodBasis {
        v,
        singular_values: sv,
    })
}

/// POD basis of rank `k` from FOM snapshots.
pub fn compute_pod_basis(snapshots: &[Snapshot], k: usize) -> Result<PodBasis> {
    let cols: Vec<&[f64]> = snapshots.iter().map(|s| s.field.values.as_slice()).collect();
    pod_basis_from_columns(&cols, k)
}
