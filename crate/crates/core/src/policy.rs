//! Budget management: trend laws for surrogate quality and training time,
//! the training-size optimization and the sampling allocation that follows.
//!
//! The correlation law is `1 - rho^2(n) <= c1 n^-zeta + c2` and the training
//! cost law is `t(n) <= c3 n + c4`. Together they give a convex upper bound
//! on the estimator MSE as a function of the training size `n`, minimized by
//! golden-section search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::clip_rho;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    /// Input generation cost per sample.
    pub g: f64,
    /// FOM evaluation cost per sample.
    pub w0: f64,
    /// ROM evaluation cost per sample; zero for trained surrogates.
    #[serde(default)]
    pub w1: f64,
    #[serde(default = "default_unit")]
    pub unit: String,
}

fn default_unit() -> String {
    "cost units".into()
}

impl CostModel {
    pub fn new(g: f64, w0: f64) -> Result<Self> {
        let cost = Self {
            g,
            w0,
            w1: 0.0,
            unit: default_unit(),
        };
        cost.validate()?;
        Ok(cost)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0 && self.g.is_finite()) || !(self.w0 > 0.0 && self.w0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "costs must be positive and finite (g = {}, w0 = {})",
                self.g, self.w0
            )));
        }
        if self.w1 != 0.0 {
            return Err(Error::InvalidParameter(
                "ROM evaluation cost w1 must be 0 for a trained surrogate".into(),
            ));
        }
        Ok(())
    }

    /// Cost of one labelled FOM sample (generation plus solve).
    pub fn fom_sample(&self) -> f64 {
        self.g + self.w0
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            g: self.g * factor,
            w0: self.w0 * factor,
            w1: self.w1 * factor,
            unit: self.unit.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendCoefficients {
    pub zeta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

impl TrendCoefficients {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.zeta, self.c1, self.c2, self.c3, self.c4]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.zeta <= 0.0 || self.c1 < 0.0 || self.c2 < 0.0 || self.c3 < 0.0 || self.c4 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "trend coefficients must be finite with zeta > 0 and c1..c4 >= 0: {self:?}"
            )));
        }
        Ok(())
    }

    /// Modelled upper bound on `1 - rho^2(n)`.
    pub fn decorrelation(&self, n: f64) -> f64 {
        self.c1 * n.powf(-self.zeta) + self.c2
    }

    /// Modelled upper bound on the training cost `t(n)`.
    pub fn training_cost(&self, n: f64) -> f64 {
        self.c3 * n + self.c4
    }

    /// Largest training size the budget can pay for, `(p - c4) / (g + w0 + c3)`.
    pub fn n_max(&self, p: f64, cost: &CostModel) -> f64 {
        (p - self.c4) / (cost.g + cost.w0 + self.c3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationFit {
    pub zeta: f64,
    pub c1: f64,
    pub c2: f64,
    pub rss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingTimeFit {
    pub c3: f64,
    pub c4: f64,
    pub rss: f64,
}

/// Chosen training size and sampling allocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPolicy {
    pub n_star: usize,
    pub m0_star: usize,
    pub m1_star: usize,
    pub r: f64,
    pub rho: f64,
    pub lambda_star: f64,
    pub remaining_budget_after_training: f64,
    /// `m0 w0 + m1 g`; never above the remaining budget.
    pub committed_cost: f64,
    /// MSE of this allocation at the pre-estimated `rho` and `sigma0`.
    pub predicted_mse_bound: f64,
}

impl SamplingPolicy {
    pub fn leftover(&self) -> f64 {
        self.remaining_budget_after_training - self.committed_cost
    }
}

/// Least squares `y ~ c_a a + c_b` with `c_a, c_b >= 0`.
///
/// Two unknowns, so the optimum is either interior or on one of the faces
/// `c_a = 0`, `c_b = 0`; all candidates are enumerated.
fn nnls_line(a: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = a.len() as f64;
    let rss = |ca: f64, cb: f64| -> f64 {
        a.iter()
            .zip(y)
            .map(|(ai, yi)| {
                let r = ca * ai + cb - yi;
                r * r
            })
            .sum()
    };
    let am = a.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = a.iter().map(|v| (v - am) * (v - am)).sum();
    let sxy: f64 = a.iter().zip(y).map(|(v, w)| (v - am) * (w - ym)).sum();

    let mut candidates: Vec<(f64, f64)> = Vec::with_capacity(4);
    if sxx > 0.0 {
        let ca = sxy / sxx;
        let cb = ym - ca * am;
        if ca >= 0.0 && cb >= 0.0 {
            candidates.push((ca, cb));
        }
    }
    let saa: f64 = a.iter().map(|v| v * v).sum();
    if saa > 0.0 {
        let say: f64 = a.iter().zip(y).map(|(v, w)| v * w).sum();
        candidates.push(((say / saa).max(0.0), 0.0));
    }
    candidates.push((0.0, ym.max(0.0)));
    candidates
        .into_iter()
        .map(|(ca, cb)| (ca, cb, rss(ca, cb)))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .expect("at least one candidate")
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_section_minimize<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

fn distinct_count(mut xs: Vec<f64>) -> usize {
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.len()
}

const ZETA_GRID_MIN: f64 = 0.05;
const ZETA_GRID_MAX: f64 = 8.0;
const ZETA_GRID_POINTS: usize = 400;

/// Fits `1 - rho_j^2 ~ c1 n_j^-zeta + c2` with `c1, c2 >= 0`, `zeta > 0`.
///
/// For fixed `zeta` the model is linear, so `(c1, c2)` are profiled out by
/// constrained least squares; `zeta` is scanned on a log grid over
/// `[0.05, 8]` and refined by golden section around the best grid point.
pub fn fit_correlation_trend(points: &[(usize, f64)]) -> Result<CorrelationFit> {
    if points.len() < 3 || distinct_count(points.iter().map(|p| p.0 as f64).collect()) < 3 {
        return Err(Error::InsufficientData(
            "correlation trend needs at least 3 distinct training sizes".into(),
        ));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if let Some(bad) = pts.iter().find(|p| p.0 == 0 || !(p.1.abs() <= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "invalid correlation record (n = {}, rho = {})",
            bad.0, bad.1
        )));
    }
    let ns: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = pts.iter().map(|p| 1.0 - p.1 * p.1).collect();

    let y0 = ys[0];
    if ys.iter().all(|y| *y == y0) {
        return Ok(CorrelationFit {
            zeta: 1.0,
            c1: 0.0,
            c2: y0,
            rss: 0.0,
        });
    }

    // Basis scaled by the smallest n so it stays O(1) for large zeta.
    let n_ref = ns[0];
    let profile = |zeta: f64| -> (f64, f64, f64) {
        let a: Vec<f64> = ns.iter().map(|n| (n / n_ref).powf(-zeta)).collect();
        let (ca, cb, rss) = nnls_line(&a, &ys);
        (ca * n_ref.powf(zeta), cb, rss)
    };

    let ratio = (ZETA_GRID_MAX / ZETA_GRID_MIN).ln() / (ZETA_GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..ZETA_GRID_POINTS)
        .map(|i| ZETA_GRID_MIN * (ratio * i as f64).exp())
        .collect();
    let (best_i, _) = grid
        .iter()
        .enumerate()
        .map(|(i, z)| (i, profile(*z).2))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("non-empty grid");
    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    let refined = golden_section_minimize(|z| profile(z).2, lo, hi, 1e-12 * hi);

    let (mut zeta, mut fit) = (grid[best_i], profile(grid[best_i]));
    let at_refined = profile(refined);
    if at_refined.2 <= fit.2 {
        zeta = refined;
        fit = at_refined;
    }
    if fit.0 == 0.0 {
        // zeta is unidentifiable without a decaying term
        zeta = 1.0;
    }
    Ok(CorrelationFit {
        zeta,
        c1: fit.0,
        c2: fit.1,
        rss: fit.2,
    })
}

/// Least-squares line `t_j ~ c3 n_j + c4` with both coefficients kept `>= 0`.
pub fn fit_training_time_trend(points: &[(usize, f64)]) -> Result<TrainingTimeFit> {
    if points.len() < 2 || distinct_count(points.iter().map(|p| p.0 as f64).collect()) < 2 {
        return Err(Error::InsufficientData(
            "training-time trend needs at least 2 distinct training sizes".into(),
        ));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if let Some(bad) = pts.iter().find(|p| !(p.1 >= 0.0 && p.1.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "negative or non-finite training time {} at n = {}",
            bad.1, bad.0
        )));
    }
    let ns: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let ts: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (c3, c4, rss) = nnls_line(&ns, &ts);
    Ok(TrainingTimeFit { c3, c4, rss })
}

/// Upper bound on the estimator MSE after training on `n` samples:
/// `2 sigma0^2 (c1 w0 n^-zeta + c2 w0 + g) / (p - (g + w0 + c3) n - c4)`.
pub fn mse_upper_bound(
    n: f64,
    coeffs: &TrendCoefficients,
    p: f64,
    cost: &CostModel,
    sigma0: f64,
) -> Result<f64> {
    let n_max = coeffs.n_max(p, cost);
    if !(n > 0.0 && n < n_max) {
        return Err(Error::Domain(format!(
            "training size {n} outside (0, n_max = {n_max})"
        )));
    }
    Ok(bound_unchecked(n, coeffs, p, cost, sigma0))
}

fn bound_unchecked(n: f64, coeffs: &TrendCoefficients, p: f64, cost: &CostModel, sigma0: f64) -> f64 {
    let denom = p - (cost.g + cost.w0) * n - coeffs.c3 * n - coeffs.c4;
    let numer = coeffs.c1 * cost.w0 * n.powf(-coeffs.zeta) + coeffs.c2 * cost.w0 + cost.g;
    2.0 * sigma0 * sigma0 * numer / denom
}

/// Integer training size minimizing [`mse_upper_bound`] over
/// `[n_min, floor(n_max) - 1]`.
pub fn optimal_training_size(
    coeffs: &TrendCoefficients,
    p: f64,
    cost: &CostModel,
    sigma0: f64,
    n_min: usize,
) -> Result<usize> {
    coeffs.validate()?;
    cost.validate()?;
    let n_max = coeffs.n_max(p, cost);
    let n_min = n_min.max(1);
    if !(n_max.is_finite() && n_max > 1.0) || (n_max.floor() as i64 - 1) < n_min as i64 {
        return Err(Error::Budget(format!(
            "budget {p} admits no training size >= {n_min} (n_max = {n_max:.3})"
        )));
    }
    let hi_int = n_max.floor() as usize - 1;
    let eps = 1e-9 * n_max;
    let f = |n: f64| bound_unchecked(n, coeffs, p, cost, sigma0);
    let n_cont = golden_section_minimize(f, eps, n_max - eps, 1e-3);
    let lo = (n_cont.floor() as usize).clamp(n_min, hi_int);
    let hi = (n_cont.ceil() as usize).clamp(n_min, hi_int);
    if f(hi as f64) < f(lo as f64) {
        Ok(hi)
    } else {
        Ok(lo)
    }
}

/// Efficiency condition `w0 rho^2 > g (1 - rho^2)`.
pub fn efficiency_check(rho: f64, cost: &CostModel) -> bool {
    let rho2 = rho * rho;
    cost.w0 * rho2 > cost.g * (1.0 - rho2)
}

/// Sampling allocation after training on `n_star` samples at cost `t_n`.
///
/// `m0 = floor(remaining / (w0 + g r))`, `m1 = floor(r m0)` with
/// `r^2 = w0 rho^2 / (g (1 - rho^2))`, so `m0 w0 + m1 g <= remaining`.
#[allow(clippy::too_many_arguments)]
pub fn compute_policy(
    n_star: usize,
    rho_n: f64,
    sigma0: f64,
    sigma1: f64,
    p: f64,
    cost: &CostModel,
    t_n: f64,
) -> Result<SamplingPolicy> {
    let remaining = p - cost.fom_sample() * n_star as f64 - t_n;
    allocate_sampling(n_star, remaining, rho_n, sigma0, sigma1, cost)
}

/// As [`compute_policy`], starting from an explicit remaining budget.
pub fn allocate_sampling(
    n_star: usize,
    remaining: f64,
    rho_n: f64,
    sigma0: f64,
    sigma1: f64,
    cost: &CostModel,
) -> Result<SamplingPolicy> {
    cost.validate()?;
    if !efficiency_check(rho_n, cost) {
        return Err(Error::PolicyInapplicable(format!(
            "w0 rho^2 = {:.4e} does not exceed g (1 - rho^2) = {:.4e}",
            cost.w0 * rho_n * rho_n,
            cost.g * (1.0 - rho_n * rho_n)
        )));
    }
    if remaining <= cost.w0 + cost.g {
        return Err(Error::Budget(format!(
            "remaining budget {remaining} cannot pay for one FOM and ROM sample"
        )));
    }
    if sigma1 <= 0.0 {
        return Err(Error::DegenerateSurrogate(
            "surrogate QoI has zero variance".into(),
        ));
    }
    let rho = clip_rho(rho_n);
    let rho2 = rho * rho;
    let r = (cost.w0 * rho2 / (cost.g * (1.0 - rho2))).sqrt();
    let m0 = (remaining / (cost.w0 + cost.g * r)).floor();
    if m0 < 2.0 {
        return Err(Error::PolicyDegenerate(format!(
            "allocation gives m0 = {m0} (< 2) at r = {r:.3e}"
        )));
    }
    let mut m1 = (r * m0).floor();
    // Guard the floor against rounding pushing the cost over the budget.
    while m0 * cost.w0 + m1 * cost.g > remaining {
        m1 -= 1.0;
    }
    let m1 = m1.max(m0);
    let committed = m0 * cost.w0 + m1 * cost.g;
    let s02 = sigma0 * sigma0;
    let predicted = s02 / m0 - (1.0 / m0 - 1.0 / m1) * rho2 * s02;
    Ok(SamplingPolicy {
        n_star,
        m0_star: m0 as usize,
        m1_star: m1 as usize,
        r,
        rho,
        lambda_star: rho * sigma0 / sigma1,
        remaining_budget_after_training: remaining,
        committed_cost: committed,
        predicted_mse_bound: predicted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (TrendCoefficients, CostModel) {
        (
            TrendCoefficients {
                zeta: 1.0,
                c1: 10.0,
                c2: 0.01,
                c3: 0.5,
                c4: 10.0,
            },
            CostModel::new(1.0, 100.0).unwrap(),
        )
    }

    #[test]
    fn bound_fixture_value() {
        let (coeffs, cost) = fixture();
        // denominator 1e4 - 101*50 - 0.5*50 - 10 = 4915; numerator
        // 10*100/50 + 0.01*100 + 1 = 22
        let v = mse_upper_bound(50.0, &coeffs, 1e4, &cost, 1.0).unwrap();
        assert!((v - 2.0 * 22.0 / 4915.0).abs() < 1e-15);
    }

    #[test]
    fn bound_domain_and_pole() {
        let (coeffs, cost) = fixture();
        let n_max = coeffs.n_max(1e4, &cost);
        assert!(mse_upper_bound(0.0, &coeffs, 1e4, &cost, 1.0).is_err());
        assert!(mse_upper_bound(n_max, &coeffs, 1e4, &cost, 1.0).is_err());
        let near = mse_upper_bound(n_max - 1e-7, &coeffs, 1e4, &cost, 1.0).unwrap();
        let mid = mse_upper_bound(n_max / 2.0, &coeffs, 1e4, &cost, 1.0).unwrap();
        assert!(near > 1e6 * mid);
    }

    #[test]
    fn bound_is_increasing_without_decay_term() {
        let (mut coeffs, cost) = fixture();
        coeffs.c1 = 0.0;
        let n_max = coeffs.n_max(1e4, &cost);
        let mut prev = 0.0;
        for i in 1..100 {
            let v = mse_upper_bound(n_max * i as f64 / 100.0, &coeffs, 1e4, &cost, 1.0).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert_eq!(optimal_training_size(&coeffs, 1e4, &cost, 1.0, 11).unwrap(), 11);
    }

    #[test]
    fn optimal_size_matches_brute_force_on_fixture() {
        let (coeffs, cost) = fixture();
        let n = optimal_training_size(&coeffs, 1e4, &cost, 1.0, 1).unwrap();
        let hi = coeffs.n_max(1e4, &cost).floor() as usize - 1;
        let brute = (1..=hi)
            .min_by(|a, b| {
                let fa = mse_upper_bound(*a as f64, &coeffs, 1e4, &cost, 1.0).unwrap();
                let fb = mse_upper_bound(*b as f64, &coeffs, 1e4, &cost, 1.0).unwrap();
                fa.total_cmp(&fb)
            })
            .unwrap();
        assert!((n as i64 - brute as i64).abs() <= 1, "{n} vs {brute}");
    }

    #[test]
    fn optimal_size_grows_with_budget() {
        let (coeffs, cost) = fixture();
        let mut prev = 0;
        for k in 0..6 {
            let p = 1e4 * 2f64.powi(k);
            let n = optimal_training_size(&coeffs, p, &cost, 1.0, 1).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn optimal_size_rejects_tiny_budget() {
        let (coeffs, cost) = fixture();
        assert!(matches!(
            optimal_training_size(&coeffs, 500.0, &cost, 1.0, 10),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn efficiency_examples() {
        let cost = CostModel::new(1.0, 100.0).unwrap();
        assert!(!efficiency_check(0.0, &cost));
        assert!(efficiency_check(1.0, &cost));
        assert!(efficiency_check(0.5f64.sqrt(), &cost));
    }

    #[test]
    fn policy_example_allocation() {
        let cost = CostModel::new(1.0, 100.0).unwrap();
        let rho = 0.99f64.sqrt();
        let pol = allocate_sampling(10, 1e4, rho, 1.0, 1.0, &cost).unwrap();
        assert!((pol.r - 9900f64.sqrt()).abs() < 1e-9);
        assert_eq!(pol.m0_star, 50);
        assert_eq!(pol.m1_star, 4974);
        assert_eq!(pol.committed_cost, 9974.0);
        assert!(pol.committed_cost <= 1e4);
    }

    #[test]
    fn policy_lambda_and_errors() {
        let cost = CostModel::new(1.0, 100.0).unwrap();
        let pol = allocate_sampling(10, 1e4, 0.95, 2.0, 2.0, &cost).unwrap();
        assert!((pol.lambda_star - 0.95).abs() < 1e-15);
        assert!(matches!(
            allocate_sampling(10, 1e4, 0.05, 1.0, 1.0, &cost),
            Err(Error::PolicyInapplicable(_))
        ));
        assert!(matches!(
            allocate_sampling(10, 100.5, 0.9, 1.0, 1.0, &cost),
            Err(Error::Budget(_))
        ));
        // rho -> 1 sends r to infinity and m0 to zero
        assert!(matches!(
            allocate_sampling(10, 1e4, 1.0, 1.0, 1.0, &cost),
            Err(Error::PolicyDegenerate(_))
        ));
    }

    #[test]
    fn compute_policy_subtracts_training() {
        let cost = CostModel::new(1.0, 100.0).unwrap();
        let pol = compute_policy(20, 0.9, 1.0, 1.0, 1e4, &cost, 30.0).unwrap();
        assert_eq!(pol.remaining_budget_after_training, 1e4 - 101.0 * 20.0 - 30.0);
        assert!(pol.m1_star >= pol.m0_star);
    }

    #[test]
    fn trend_fit_recovers_planted_law() {
        let pts: Vec<(usize, f64)> = (0..6)
            .map(|j| {
                let n = 40 + 32 * j;
                let y = 5.0 * (n as f64).powf(-2.0) + 0.126;
                (n, (1.0 - y).sqrt())
            })
            .collect();
        let fit = fit_correlation_trend(&pts).unwrap();
        assert!((fit.zeta - 2.0).abs() / 2.0 < 0.05, "{fit:?}");
        assert!((fit.c1 - 5.0).abs() / 5.0 < 0.05, "{fit:?}");
        assert!((fit.c2 - 0.126).abs() / 0.126 < 0.05, "{fit:?}");
    }

    #[test]
    fn trend_fit_plateau_only() {
        let pts: Vec<(usize, f64)> = [40, 72, 104, 136]
            .iter()
            .map(|n| (*n, (1.0f64 - 0.003).sqrt()))
            .collect();
        let fit = fit_correlation_trend(&pts).unwrap();
        assert_eq!(fit.c1, 0.0);
        assert!((fit.c2 - 0.003).abs() < 1e-15);
    }

    #[test]
    fn trend_fit_needs_three_sizes() {
        assert!(matches!(
            fit_correlation_trend(&[(10, 0.9), (20, 0.95), (20, 0.96)]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn training_time_fits() {
        let pts: Vec<(usize, f64)> = (1..8).map(|i| (i * 10, 2.0 * (i * 10) as f64 + 30.0)).collect();
        let fit = fit_training_time_trend(&pts).unwrap();
        assert!((fit.c3 - 2.0).abs() < 1e-12 && (fit.c4 - 30.0).abs() < 1e-10);
        let flat: Vec<(usize, f64)> = (1..8).map(|i| (i * 10, 30.0)).collect();
        let fit = fit_training_time_trend(&flat).unwrap();
        assert!(fit.c3.abs() < 1e-14 && (fit.c4 - 30.0).abs() < 1e-12);
        // a decreasing trend clips the slope to zero
        let dec: Vec<(usize, f64)> = (1..8).map(|i| (i * 10, 100.0 - i as f64)).collect();
        let fit = fit_training_time_trend(&dec).unwrap();
        assert_eq!(fit.c3, 0.0);
        assert!(fit_training_time_trend(&[(10, 1.0)]).is_err());
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let x = golden_section_minimize(|x| (x - 1.234).powi(2), -10.0, 10.0, 1e-10);
        assert!((x - 1.234).abs() < 1e-9);
    }
}
