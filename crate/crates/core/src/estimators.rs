//! Monte Carlo and multi-fidelity estimators of `E[Q(u_FOM)]`, their
//! theoretical mean-squared errors and confidence intervals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, normal_quantile, sample_correlation, sample_moments, t_quantile};

/// Correlations are kept strictly inside (-1, 1) before any division.
pub const RHO_CLIP: f64 = 1.0 - 1e-9;

pub fn clip_rho(rho: f64) -> f64 {
    rho.clamp(-RHO_CLIP, RHO_CLIP)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    #[serde(rename = "MC-FOM")]
    McFom,
    #[serde(rename = "DL-MFMC")]
    DlMfmc,
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EstimatorKind::McFom => f.write_str("MC-FOM"),
            EstimatorKind::DlMfmc => f.write_str("DL-MFMC"),
        }
    }
}

/// QoI values on a shared multi-fidelity sampling layout.
///
/// `rom_values` covers all `m1` inputs; `fom_values` covers the first `m0` of
/// them, in the same order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QoiSamplePair {
    ids: Vec<u64>,
    fom_values: Vec<f64>,
    rom_values: Vec<f64>,
}

impl QoiSamplePair {
    pub fn new(ids: Vec<u64>, fom_values: Vec<f64>, rom_values: Vec<f64>) -> Result<Self> {
        if fom_values.len() > rom_values.len() {
            return Err(Error::InvalidParameter(format!(
                "m0 = {} exceeds m1 = {}",
                fom_values.len(),
                rom_values.len()
            )));
        }
        if ids.len() != rom_values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} input ids for {} ROM values",
                ids.len(),
                rom_values.len()
            )));
        }
        Ok(Self {
            ids,
            fom_values,
            rom_values,
        })
    }

    /// Pair with sequential ids, mostly for synthetic studies.
    pub fn from_values(fom_values: Vec<f64>, rom_values: Vec<f64>) -> Result<Self> {
        let ids = (0..rom_values.len() as u64).collect();
        Self::new(ids, fom_values, rom_values)
    }

    pub fn m0(&self) -> usize {
        self.fom_values.len()
    }

    pub fn m1(&self) -> usize {
        self.rom_values.len()
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn fom_values(&self) -> &[f64] {
        &self.fom_values
    }

    pub fn rom_values(&self) -> &[f64] {
        &self.rom_values
    }

    /// ROM values on the `m0` inputs that were also run through the FOM.
    pub fn shared_rom_values(&self) -> &[f64] {
        &self.rom_values[..self.fom_values.len()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: EstimatorKind,
    pub point: f64,
    /// Estimated variance of the estimator (squared standard error).
    pub variance_estimate: f64,
    pub half_width: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub confidence_level: f64,
    pub fom_samples: usize,
    pub rom_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coupling: Option<CouplingEstimates>,
    pub cost_ledger: BTreeMap<String, f64>,
}

/// Sample statistics backing a multi-fidelity estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingEstimates {
    pub rho: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub lambda: f64,
}

impl EstimateReport {
    fn symmetric(
        method: EstimatorKind,
        point: f64,
        variance_estimate: f64,
        quantile: f64,
        gamma: f64,
    ) -> Self {
        let half_width = quantile * variance_estimate.sqrt();
        Self {
            method,
            point,
            variance_estimate,
            half_width,
            ci_low: point - half_width,
            ci_high: point + half_width,
            confidence_level: gamma,
            fom_samples: 0,
            rom_samples: 0,
            coupling: None,
            cost_ledger: BTreeMap::new(),
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("confidence level {gamma} outside (0, 1)")))
    }
}

/// Plain Monte Carlo on FOM QoI values with a Student-t interval.
///
/// The t-quantile uses `N` degrees of freedom (not `N - 1`).
pub fn mc_fom_estimate(qoi_values: &[f64], gamma: f64) -> Result<EstimateReport> {
    check_gamma(gamma)?;
    let m = sample_moments(qoi_values)?;
    let n = qoi_values.len();
    let t = t_quantile((1.0 - gamma) / 2.0, n as u64)?;
    let mut report = EstimateReport::symmetric(
        EstimatorKind::McFom,
        m.mean,
        m.variance / n as f64,
        t,
        gamma,
    );
    report.fom_samples = n;
    Ok(report)
}

/// `mean(fom) + lambda * (mean(rom over m1) - mean(rom over m0))`.
pub fn mfmc_point_estimate(pair: &QoiSamplePair, lambda: f64) -> Result<f64> {
    if pair.m0() == 0 {
        return Err(Error::InsufficientData("no FOM samples (m0 = 0)".into()));
    }
    let fom_mean = mean(pair.fom_values());
    if lambda == 0.0 {
        return Ok(fom_mean);
    }
    let correction = mean(pair.rom_values()) - mean(pair.shared_rom_values());
    Ok(fom_mean + lambda * correction)
}

/// MSE of the two-level MFMC estimator for a fixed `lambda`.
pub fn mfmc_mse_theoretical(
    sigma0: f64,
    sigma1: f64,
    rho: f64,
    lambda: f64,
    m0: usize,
    m1: usize,
) -> Result<f64> {
    if m0 == 0 || m0 > m1 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m0 <= m1, got m0 = {m0}, m1 = {m1}"
        )));
    }
    let (m0, m1) = (m0 as f64, m1 as f64);
    Ok(sigma0 * sigma0 / m0
        + (1.0 / m0 - 1.0 / m1) * (lambda * lambda * sigma1 * sigma1 - 2.0 * lambda * rho * sigma1 * sigma0))
}

pub fn optimal_lambda(sigma0: f64, sigma1: f64, rho: f64) -> Result<f64> {
    if sigma1 <= 0.0 {
        return Err(Error::DegenerateSurrogate(
            "surrogate QoI has zero variance".into(),
        ));
    }
    Ok(rho * sigma0 / sigma1)
}

/// Closed-form MSE of the optimally allocated estimator after training on
/// `n` samples, with generation cost `g`, FOM cost `w0` and training cost
/// `t_of_n`.
#[allow(clippy::too_many_arguments)]
pub fn dl_mfmc_mse_given_n(
    n: f64,
    p: f64,
    g: f64,
    w0: f64,
    t_of_n: f64,
    rho_n: f64,
    sigma0: f64,
) -> Result<f64> {
    let remaining = p - (g + w0) * n - t_of_n;
    if remaining <= 0.0 {
        return Err(Error::Budget(format!(
            "training on n = {n} leaves no sampling budget ({remaining})"
        )));
    }
    let rho2 = rho_n * rho_n;
    if w0 * rho2 <= g * (1.0 - rho2) {
        return Err(Error::PolicyInapplicable(format!(
            "efficiency condition w0 rho^2 > g (1 - rho^2) fails for rho = {rho_n}"
        )));
    }
    let s = (w0 * (1.0 - rho2)).sqrt() + (g * rho2).sqrt();
    Ok(sigma0 * sigma0 / remaining * s * s)
}

/// Multi-fidelity estimate with the Gaussian interval.
///
/// `rho` and `sigma0` come from the `m0` shared FOM/ROM pairs, `sigma1` from
/// all `m1` ROM values; `lambda = rho sigma0 / sigma1`.
pub fn dl_mfmc_confidence_interval(pair: &QoiSamplePair, gamma: f64) -> Result<EstimateReport> {
    check_gamma(gamma)?;
    if pair.m0() < 2 {
        return Err(Error::InsufficientData(format!(
            "multi-fidelity interval needs m0 >= 2, got {}",
            pair.m0()
        )));
    }
    let fom = sample_moments(pair.fom_values())?;
    let rom = sample_moments(pair.rom_values())?;
    if rom.variance <= 0.0 {
        return Err(Error::DegenerateSurrogate(
            "surrogate QoI values are constant".into(),
        ));
    }
    let sigma0 = fom.std_dev();
    let sigma1 = rom.std_dev();
    let rho = if fom.variance > 0.0 {
        match sample_correlation(pair.fom_values(), pair.shared_rom_values()) {
            Ok(r) => clip_rho(r),
            // constant ROM on the shared subset: nothing to couple
            Err(Error::DegenerateVariance(_)) => 0.0,
            Err(e) => return Err(e),
        }
    } else {
        0.0
    };
    let lambda = optimal_lambda(sigma0, sigma1, rho)?;
    let point = mfmc_point_estimate(pair, lambda)?;
    estimate_from_parts(pair, point, sigma0, sigma1, rho, lambda, gamma)
}

/// Interval with a caller-chosen coupling; the variance term is the MSE
/// formula evaluated at the sample statistics.
pub fn mfmc_interval_with_lambda(
    pair: &QoiSamplePair,
    lambda: f64,
    gamma: f64,
) -> Result<EstimateReport> {
    check_gamma(gamma)?;
    if pair.m0() < 2 {
        return Err(Error::InsufficientData(format!(
            "multi-fidelity interval needs m0 >= 2, got {}",
            pair.m0()
        )));
    }
    let fom = sample_moments(pair.fom_values())?;
    let rom = sample_moments(pair.rom_values())?;
    let sigma0 = fom.std_dev();
    let sigma1 = rom.std_dev();
    let rho = if fom.variance > 0.0 && rom.variance > 0.0 {
        sample_correlation(pair.fom_values(), pair.shared_rom_values())
            .map(clip_rho)
            .unwrap_or(0.0)
    } else {
        0.0
    };
    let point = mfmc_point_estimate(pair, lambda)?;
    let var = mfmc_mse_theoretical(sigma0, sigma1, rho, lambda, pair.m0(), pair.m1())?;
    if var < 0.0 {
        return Err(Error::Domain(format!("negative variance estimate {var}")));
    }
    let z = normal_quantile((1.0 - gamma) / 2.0)?;
    let mut report = EstimateReport::symmetric(EstimatorKind::DlMfmc, point, var, z, gamma);
    report.fom_samples = pair.m0();
    report.rom_samples = pair.m1();
    report.coupling = Some(CouplingEstimates {
        rho,
        sigma0,
        sigma1,
        lambda,
    });
    Ok(report)
}

fn estimate_from_parts(
    pair: &QoiSamplePair,
    point: f64,
    sigma0: f64,
    sigma1: f64,
    rho: f64,
    lambda: f64,
    gamma: f64,
) -> Result<EstimateReport> {
    let (m0, m1) = (pair.m0() as f64, pair.m1() as f64);
    let s02 = sigma0 * sigma0;
    let var = s02 / m0 - (1.0 / m0 - 1.0 / m1) * rho * rho * s02;
    if var < 0.0 {
        return Err(Error::Domain(format!(
            "negative variance under the radical ({var:e})"
        )));
    }
    let z = normal_quantile((1.0 - gamma) / 2.0)?;
    let mut report = EstimateReport::symmetric(EstimatorKind::DlMfmc, point, var, z, gamma);
    report.fom_samples = pair.m0();
    report.rom_samples = pair.m1();
    report.coupling = Some(CouplingEstimates {
        rho,
        sigma0,
        sigma1,
        lambda,
    });
    Ok(report)
}
