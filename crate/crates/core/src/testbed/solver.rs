//! Vertex-centred finite volumes for
//! `-D lap C + V C / (C + K) = s (C_in - C) + f` with Robin boundaries
//! `-D dC/dn = tau (C - C_far)`.
//!
//! Boundary nodes own half control volumes (quarter at corners), which keeps
//! the matrix symmetric. The Michaelis-Menten term is lagged in a damped
//! Picard loop; each linear step is solved by Jacobi-preconditioned CG.

use crate::error::{Error, Result};
use crate::model::Grid;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub damping: f64,
    pub picard_tolerance: f64,
    pub max_picard: usize,
    pub cg_tolerance: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            damping: 0.7,
            picard_tolerance: 1e-8,
            max_picard: 200,
            cg_tolerance: 1e-10,
        }
    }
}

/// Fully assembled problem on a grid whose coordinates are scaled by `side`
/// metres.
#[derive(Clone, Debug)]
pub struct ReactionDiffusion {
    pub grid: Grid,
    pub side: f64,
    pub diffusion: f64,
    pub v_max: f64,
    pub half_saturation: f64,
    /// Robin coefficient times owned boundary length, per node.
    pub robin: Vec<f64>,
    /// Robin coefficient times owned boundary length times far-field value.
    pub robin_rhs: Vec<f64>,
    /// Vessel exchange coefficient per node (multiplies `C_in - C`).
    pub exchange: Vec<f64>,
    pub c_in: f64,
    /// Control-volume integrated forcing.
    pub forcing: Vec<f64>,
}

/// Which sides of the boundary a node lies on, with the length it owns on each.
pub fn boundary_lengths(grid: &Grid, k: usize) -> [(usize, f64); 4] {
    let (i, j) = (k % grid.nx, k / grid.nx);
    let h = grid.spacing;
    let along_y = |j: usize| {
        let mut l = 0.0;
        if j > 0 {
            l += h / 2.0;
        }
        if j < grid.ny - 1 {
            l += h / 2.0;
        }
        l
    };
    let along_x = |i: usize| {
        let mut l = 0.0;
        if i > 0 {
            l += h / 2.0;
        }
        if i < grid.nx - 1 {
            l += h / 2.0;
        }
        l
    };
    // sides: 0 = x=0, 1 = x=max, 2 = y=0, 3 = y=max
    [
        (0, if i == 0 { along_y(j) } else { 0.0 }),
        (1, if i == grid.nx - 1 { along_y(j) } else { 0.0 }),
        (2, if j == 0 { along_x(i) } else { 0.0 }),
        (3, if j == grid.ny - 1 { along_x(i) } else { 0.0 }),
    ]
}

impl ReactionDiffusion {
    /// Problem with a uniform far-field value and no extra forcing.
    #[allow(clippy::too_many_arguments)]
    pub fn uniform(
        grid: Grid,
        side: f64,
        diffusion: f64,
        v_max: f64,
        half_saturation: f64,
        tau: f64,
        far_field: f64,
        exchange: Vec<f64>,
        c_in: f64,
    ) -> Self {
        let mut robin = vec![0.0; grid.len()];
        let mut robin_rhs = vec![0.0; grid.len()];
        for k in 0..grid.len() {
            let len: f64 = boundary_lengths(&grid, k).iter().map(|s| s.1).sum();
            robin[k] = tau * len * side;
            robin_rhs[k] = robin[k] * far_field;
        }
        Self {
            forcing: vec![0.0; grid.len()],
            grid,
            side,
            diffusion,
            v_max,
            half_saturation,
            robin,
            robin_rhs,
            exchange,
            c_in,
        }
    }

    fn edge_weights(&self) -> (Vec<f64>, Vec<f64>) {
        let g = &self.grid;
        // face length over node distance; the scale `side` cancels in 2D
        let mut ex = vec![0.0; g.len()];
        let mut ey = vec![0.0; g.len()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.index(i, j);
                if i + 1 < g.nx {
                    let f = if j == 0 || j == g.ny - 1 { 0.5 } else { 1.0 };
                    ex[k] = self.diffusion * f;
                }
                if j + 1 < g.ny {
                    let f = if i == 0 || i == g.nx - 1 { 0.5 } else { 1.0 };
                    ey[k] = self.diffusion * f;
                }
            }
        }
        (ex, ey)
    }

    fn areas(&self) -> Vec<f64> {
        let s2 = self.side * self.side;
        self.grid.quadrature_weights().into_iter().map(|w| w * s2).collect()
    }

    /// Solves from the initial guess `start`.
    pub fn solve(&self, start: &[f64], settings: &SolverSettings) -> Result<Vec<f64>> {
        let n = self.grid.len();
        let (ex, ey) = self.edge_weights();
        let areas = self.areas();
        let op = Stencil {
            nx: self.grid.nx,
            ex: &ex,
            ey: &ey,
        };
        let mut base = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for k in 0..n {
            base[k] = op.degree(k) + self.robin[k] + self.exchange[k];
            rhs[k] = self.robin_rhs[k] + self.exchange[k] * self.c_in + self.forcing[k];
        }
        let rhs_norm = norm(&rhs).max(f64::MIN_POSITIVE);

        let mut c = start.to_vec();
        let mut diag = vec![0.0; n];
        let mut next = c.clone();
        let mut work = CgWork::new(n);
        let mut residual = f64::INFINITY;
        for it in 0..settings.max_picard {
            for k in 0..n {
                diag[k] = base[k] + self.consumption(areas[k], c[k]);
            }
            // relative residual of the nonlinear system at the current iterate
            op.apply(&diag, &c, &mut work.q);
            residual = work.q.iter().zip(&rhs).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                / rhs_norm;
            if residual < settings.picard_tolerance {
                return Ok(c);
            }
            if it + 1 == settings.max_picard {
                break;
            }
            conjugate_gradient(&op, &diag, &rhs, &mut next, settings.cg_tolerance, &mut work)?;
            for k in 0..n {
                c[k] += settings.damping * (next[k] - c[k]);
            }
        }
        Err(Error::Solver {
            iterations: settings.max_picard,
            residual,
        })
    }

    fn consumption(&self, area: f64, c: f64) -> f64 {
        if self.v_max == 0.0 {
            0.0
        } else {
            self.v_max * area / (c.max(0.0) + self.half_saturation)
        }
    }
}

struct Stencil<'a> {
    nx: usize,
    ex: &'a [f64],
    ey: &'a [f64],
}

impl Stencil<'_> {
    fn degree(&self, k: usize) -> f64 {
        let mut d = self.ex[k] + self.ey[k];
        if k % self.nx > 0 {
            d += self.ex[k - 1];
        }
        if k >= self.nx {
            d += self.ey[k - self.nx];
        }
        d
    }

    /// `out = diag * x - offdiag coupling`.
    fn apply(&self, diag: &[f64], x: &[f64], out: &mut [f64]) {
        let nx = self.nx;
        for k in 0..x.len() {
            let mut v = diag[k] * x[k];
            if k % nx + 1 < nx {
                v -= self.ex[k] * x[k + 1];
            }
            if k % nx > 0 {
                v -= self.ex[k - 1] * x[k - 1];
            }
            if k + nx < x.len() {
                v -= self.ey[k] * x[k + nx];
            }
            if k >= nx {
                v -= self.ey[k - nx] * x[k - nx];
            }
            out[k] = v;
        }
    }
}

struct CgWork {
    r: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    q: Vec<f64>,
}

impl CgWork {
    fn new(n: usize) -> Self {
        Self {
            r: vec![0.0; n],
            z: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned CG, warm-started from `x`.
fn conjugate_gradient(
    op: &Stencil<'_>,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    w: &mut CgWork,
) -> Result<()> {
    let n = b.len();
    let b_norm = norm(b).max(f64::MIN_POSITIVE);
    op.apply(diag, x, &mut w.q);
    for k in 0..n {
        w.r[k] = b[k] - w.q[k];
        w.z[k] = w.r[k] / diag[k];
    }
    w.p.copy_from_slice(&w.z);
    let mut rz = dot(&w.r, &w.z);
    let max_iter = 10 * n;
    for _ in 0..max_iter {
        if norm(&w.r) <= tol * b_norm {
            return Ok(());
        }
        op.apply(diag, &w.p, &mut w.q);
        let alpha = rz / dot(&w.p, &w.q);
        for k in 0..n {
            x[k] += alpha * w.p[k];
            w.r[k] -= alpha * w.q[k];
            w.z[k] = w.r[k] / diag[k];
        }
        let rz_next = dot(&w.r, &w.z);
        let beta = rz_next / rz;
        rz = rz_next;
        for k in 0..n {
            w.p[k] = w.z[k] + beta * w.p[k];
        }
    }
    Err(Error::Solver {
        iterations: max_iter,
        residual: norm(&w.r) / b_norm,
    })
}
