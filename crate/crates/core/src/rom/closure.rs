use crate::error::{Error, Result};

/// Per-node affine correction `a_i + b_i d_i / d_scale + c_i eta_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureModel {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d_scale: f64,
}

impl ClosureModel {
    pub fn zero(n_h: usize) -> Self {
        Self {
            a: vec![0.0; n_h],
            b: vec![0.0; n_h],
            c: vec![0.0; n_h],
            d_scale: 1.0,
        }
    }

    pub fn n_h(&self) -> usize {
        self.a.len()
    }

    pub fn apply(&self, d: &[f64], eta: &[f64]) -> Vec<f64> {
        (0..self.n_h())
            .map(|i| self.a[i] + self.b[i] * d[i] / self.d_scale + self.c[i] * eta[i])
            .collect()
    }

    fn params_mut(&mut self) -> [&mut Vec<f64>; 3] {
        [&mut self.a, &mut self.b, &mut self.c]
    }
}

/// `xi ||e||_2 + (1 - xi) ||e||_inf`.
pub fn mixed_norm(e: &[f64], xi: f64) -> f64 {
    let two = e.iter().map(|x| x * x).sum::<f64>().sqrt();
    let inf = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    xi * two + (1.0 - xi) * inf
}

/// Mean mixed norm of `target - closure` over samples.
pub fn mixed_loss(model: &ClosureModel, targets: &[Vec<f64>], d: &[Vec<f64>], eta: &[Vec<f64>], xi: f64) -> f64 {
    let n = targets.len().max(1) as f64;
    targets
        .iter()
        .zip(d)
        .zip(eta)
        .map(|((t, d), eta)| {
            let e: Vec<f64> = model.apply(d, eta).iter().zip(t).map(|(p, t)| t - p).collect();
            mixed_norm(&e, xi)
        })
        .sum::<f64>()
        / n
}

/// Per-node least squares with a tiny ridge so nodes with constant inputs
/// stay well posed.
fn least_squares(targets: &[Vec<f64>], d: &[Vec<f64>], eta: &[Vec<f64>], d_scale: f64) -> ClosureModel {
    let n_h = targets[0].len();
    let mut m = ClosureModel::zero(n_h);
    m.d_scale = d_scale;
    for i in 0..n_h {
        let mut ata = [[0.0f64; 3]; 3];
        let mut atb = [0.0f64; 3];
        for s in 0..targets.len() {
            let f = [1.0, d[s][i] / d_scale, eta[s][i]];
            for r in 0..3 {
                atb[r] += f[r] * targets[s][i];
                for c in 0..3 {
                    ata[r][c] += f[r] * f[c];
                }
            }
        }
        let trace = ata[0][0] + ata[1][1] + ata[2][2];
        for (r, row) in ata.iter_mut().enumerate() {
            row[r] += 1e-10 * trace.max(1.0);
        }
        let x = solve3(ata, atb);
        m.a[i] = x[0];
        m.b[i] = x[1];
        m.c[i] = x[2];
    }
    m
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap_or(col);
        a.swap(col, piv);
        b.swap(col, piv);
        if a[col][col] == 0.0 {
            continue;
        }
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            for c in col..3 {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        if a[r][r] == 0.0 {
            continue;
        }
        let s: f64 = (r + 1..3).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Samples per subgradient step.
const BATCH: usize = 8;

/// Fits the closure to residual fields.
///
/// Starts from the per-node least-squares fit, then runs `epochs` passes of
/// normalised mini-batch subgradient descent on the mixed loss. The best of
/// the zero map, the warm start and every epoch end is returned. With
/// `xi = 1` the objective is the 2-norm fit and the least-squares solution
/// is returned directly.
pub fn fit_closure(
    targets: &[Vec<f64>],
    d: &[Vec<f64>],
    eta: &[Vec<f64>],
    xi: f64,
    epochs: usize,
) -> Result<ClosureModel> {
    if targets.is_empty() {
        return Err(Error::InsufficientData("closure needs at least one residual".into()));
    }
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::InvalidParameter(format!("xi = {xi} outside [0, 1]")));
    }
    let n_h = targets[0].len();
    let n = targets.len();
    let d_scale = {
        let m = d.iter().flatten().sum::<f64>() / (n * n_h) as f64;
        if m > 0.0 {
            m
        } else {
            1.0
        }
    };
    let warm = least_squares(targets, d, eta, d_scale);
    if xi == 1.0 {
        return Ok(warm);
    }

    let mut zero = ClosureModel::zero(n_h);
    zero.d_scale = d_scale;
    let mut best_loss = mixed_loss(&zero, targets, d, eta, xi);
    let mut best = zero;
    let warm_loss = mixed_loss(&warm, targets, d, eta, xi);
    if warm_loss < best_loss {
        best_loss = warm_loss;
        best = warm.clone();
    }

    let scale = targets
        .iter()
        .map(|t| t.iter().fold(0.0f64, |m, x| m.max(x.abs())))
        .sum::<f64>()
        / n as f64;
    let step0 = 0.25 * scale;
    let mut model = warm;
    let mut grad = [vec![0.0; n_h], vec![0.0; n_h], vec![0.0; n_h]];
    let mut t = 0usize;
    for _ in 0..epochs {
        for batch in (0..n).collect::<Vec<_>>().chunks(BATCH) {
            for g in grad.iter_mut() {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            for &s in batch {
                let pred = model.apply(&d[s], &eta[s]);
                let e: Vec<f64> = targets[s].iter().zip(&pred).map(|(t, p)| t - p).collect();
                let norm = e.iter().map(|x| x * x).sum::<f64>().sqrt();
                let mut arg = 0;
                for (i, v) in e.iter().enumerate() {
                    if v.abs() > e[arg].abs() {
                        arg = i;
                    }
                }
                for i in 0..n_h {
                    let mut g = if norm > 0.0 { -xi * e[i] / norm } else { 0.0 };
                    if i == arg && e[arg] != 0.0 {
                        g -= (1.0 - xi) * e[arg].signum();
                    }
                    if g != 0.0 {
                        grad[0][i] += g;
                        grad[1][i] += g * d[s][i] / d_scale;
                        grad[2][i] += g * eta[s][i];
                    }
                }
            }
            let gnorm = grad.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
            if gnorm == 0.0 {
                continue;
            }
            let step = step0 / ((t + 1) as f64).sqrt() / gnorm;
            for (p, g) in model.params_mut().into_iter().zip(&grad) {
                for (pi, gi) in p.iter_mut().zip(g) {
                    *pi -= step * gi;
                }
            }
            t += 1;
        }
        let loss = mixed_loss(&model, targets, d, eta, xi);
        if loss < best_loss {
            best_loss = loss;
            best = model.clone();
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngStream;

    fn fixture(n: usize, n_h: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = RngStream::new(seed, "closure");
        let mut t = Vec::new();
        let mut d = Vec::new();
        let mut eta = Vec::new();
        for _ in 0..n {
            let di: Vec<f64> = (0..n_h).map(|_| rng.uniform_in(0.0, 0.2)).collect();
            let ei: Vec<f64> = (0..n_h).map(|_| if rng.uniform() < 0.2 { 1.0 } else { 0.0 }).collect();
            let ti = (0..n_h)
                .map(|i| 1e-5 * (0.5 - 8.0 * di[i] + 0.7 * ei[i]) + 2e-6 * rng.standard_normal())
                .collect();
            t.push(ti);
            d.push(di);
            eta.push(ei);
        }
        (t, d, eta)
    }

    #[test]
    fn zero_residuals_give_zero_map() {
        let (_, d, eta) = fixture(20, 30, 1);
        let t = vec![vec![0.0; 30]; 20];
        let m = fit_closure(&t, &d, &eta, 0.75, 10).unwrap();
        let out = m.apply(&d[0], &eta[0]);
        assert!(out.iter().map(|x| x * x).sum::<f64>().sqrt() < 1e-6);
    }

    #[test]
    fn pure_two_norm_is_least_squares() {
        let (t, d, eta) = fixture(40, 25, 2);
        let m = fit_closure(&t, &d, &eta, 1.0, 10).unwrap();
        // normal equations residual at each node
        for i in 0..25 {
            let mut g = [0.0; 3];
            for s in 0..40 {
                let f = [1.0, d[s][i] / m.d_scale, eta[s][i]];
                let r = t[s][i] - m.apply(&d[s], &eta[s])[i];
                for k in 0..3 {
                    g[k] += f[k] * r;
                }
            }
            assert!(g.iter().all(|v| v.abs() < 1e-12), "{g:?}");
        }
    }

    #[test]
    fn mixed_loss_not_worse_than_zero() {
        for seed in 0..5 {
            let (t, d, eta) = fixture(30, 40, seed);
            let m = fit_closure(&t, &d, &eta, 0.75, 10).unwrap();
            let zero = ClosureModel::zero(40);
            assert!(mixed_loss(&m, &t, &d, &eta, 0.75) <= mixed_loss(&zero, &t, &d, &eta, 0.75));
        }
    }

    #[test]
    fn solve3_matches_known_system() {
        let x = solve3([[2.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 4.0]], [3.0, 5.0, 5.0]);
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }
}
