use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Multi-output ridge regression on standardised features with an
/// unpenalised intercept. The ridge strength is chosen by generalised
/// cross-validation.
#[derive(Clone, Debug, PartialEq)]
pub struct RidgeRegressor {
    pub mean_x: Vec<f64>,
    pub scale_x: Vec<f64>,
    /// `p x k`.
    pub weights: DMatrix<f64>,
    pub intercept: Vec<f64>,
    pub lambda: f64,
}

/// Ridge strengths tried, as multiples of the sample count.
fn lambda_grid() -> impl Iterator<Item = f64> {
    (0..=24).map(|i| 10f64.powf(-9.0 + 0.5 * i as f64))
}

impl RidgeRegressor {
    pub fn input_dim(&self) -> usize {
        self.mean_x.len()
    }

    pub fn output_dim(&self) -> usize {
        self.intercept.len()
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let z = DVector::from_iterator(
            x.len(),
            x.iter()
                .zip(&self.mean_x)
                .zip(&self.scale_x)
                .map(|((v, m), s)| (v - m) / s),
        );
        let out = self.weights.tr_mul(&z);
        out.iter().zip(&self.intercept).map(|(a, b)| a + b).collect()
    }

    /// The constant zero map.
    pub fn zero(input_dim: usize, output_dim: usize) -> Self {
        Self {
            mean_x: vec![0.0; input_dim],
            scale_x: vec![1.0; input_dim],
            weights: DMatrix::zeros(input_dim, output_dim),
            intercept: vec![0.0; output_dim],
            lambda: 0.0,
        }
    }
}

/// Mean Euclidean error `(1/n) sum ||y_i - f(x_i)||`.
pub fn mean_norm_loss(reg: &RidgeRegressor, x: &[Vec<f64>], y: &[Vec<f64>]) -> f64 {
    let n = x.len().max(1) as f64;
    x.iter()
        .zip(y)
        .map(|(xi, yi)| {
            reg.predict(xi)
                .iter()
                .zip(yi)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / n
}

pub fn fit_ridge(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<RidgeRegressor> {
    let n = x.len();
    if n == 0 || n != y.len() {
        return Err(Error::InsufficientData(format!(
            "ridge needs matching non-empty inputs ({} vs {})",
            n,
            y.len()
        )));
    }
    let p = x[0].len();
    let k = y[0].len();
    if x.iter().any(|r| r.len() != p) || y.iter().any(|r| r.len() != k) {
        return Err(Error::InvalidParameter("ragged regression data".into()));
    }
    let nf = n as f64;

    let mut mean_x = vec![0.0; p];
    for r in x {
        for (m, v) in mean_x.iter_mut().zip(r) {
            *m += v / nf;
        }
    }
    let mut scale_x = vec![0.0; p];
    for r in x {
        for ((s, v), m) in scale_x.iter_mut().zip(r).zip(&mean_x) {
            *s += (v - m) * (v - m) / nf;
        }
    }
    for s in &mut scale_x {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }
    let mut intercept = vec![0.0; k];
    for r in y {
        for (m, v) in intercept.iter_mut().zip(r) {
            *m += v / nf;
        }
    }

    let z = DMatrix::from_fn(n, p, |i, j| (x[i][j] - mean_x[j]) / scale_x[j]);
    let yc = DMatrix::from_fn(n, k, |i, j| y[i][j] - intercept[j]);

    let mut best = RidgeRegressor {
        mean_x: mean_x.clone(),
        scale_x: scale_x.clone(),
        weights: DMatrix::zeros(p, k),
        intercept: intercept.clone(),
        lambda: f64::INFINITY,
    };
    if n >= 2 && p > 0 {
        let svd = z.clone().svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let s = &svd.singular_values;
        let uty = u.tr_mul(&yc);
        let y_energy = yc.norm_squared();
        let proj_energy = uty.norm_squared();
        // one degree of freedom goes to the intercept
        let dof = nf - 1.0;
        let floor = if n <= p { 1e-3 } else { 0.0 };
        let mut best_score = f64::INFINITY;
        let mut best_lambda = None;
        for rel in lambda_grid().filter(|r| *r >= floor) {
            let lambda = rel * nf;
            let mut resid = y_energy - proj_energy;
            let mut trace = 0.0;
            for (i, si) in s.iter().enumerate() {
                let shrink = lambda / (si * si + lambda);
                resid += shrink * shrink * uty.row(i).norm_squared();
                trace += si * si / (si * si + lambda);
            }
            let denom = dof - trace;
            if denom <= 1e-9 * dof {
                continue;
            }
            let score = resid.max(0.0) / (denom * denom);
            if score < best_score {
                best_score = score;
                best_lambda = Some(lambda);
            }
        }
        let lambda = best_lambda.unwrap_or(1e3 * nf);
        let mut scaled = uty.clone();
        for (i, si) in s.iter().enumerate() {
            let f = si / (si * si + lambda);
            scaled.row_mut(i).scale_mut(f);
        }
        best.weights = vt.tr_mul(&scaled);
        best.lambda = lambda;
    }

    // the zero map belongs to the family; never return something worse
    let zero = RidgeRegressor::zero(p, k);
    if mean_norm_loss(&best, x, y) > mean_norm_loss(&zero, x, y) {
        return Ok(zero);
    }
    Ok(best)
}
