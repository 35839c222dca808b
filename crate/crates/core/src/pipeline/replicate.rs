use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    dl_mfmc_confidence_interval, mc_fom_estimate, mfmc_interval_with_lambda,
    mfmc_mse_theoretical, EstimateReport, QoiSamplePair,
};
use crate::model::{ForwardModel, Surrogate};
use crate::stats::{sample_moments, RngStream};

use super::campaign::run_campaign;
use super::config::{CampaignConfig, ModelConfig};
use super::synthetic::{SyntheticModel, SyntheticSurrogate};

/// Smallest replication count the study accepts.
pub const MIN_REPLICATIONS: usize = 100;

/// Empirical behaviour of the estimators over repeated sampling phases.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicationSummary {
    pub replications: usize,
    pub gamma: f64,
    pub true_mean: f64,
    pub n_star: usize,
    pub m0: usize,
    pub m1: usize,
    /// Population correlation of the surrogate trained on `n_star` samples.
    pub rho: f64,
    pub sigma0: f64,
    /// Coupling used for the theoretical MSE; the forced value when given.
    pub lambda: f64,
    pub lambda_forced: Option<f64>,
    pub theoretical_mse: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub coverage: f64,
    pub mean_half_width: f64,
    pub mc_samples: usize,
    pub mc_theoretical_variance: f64,
    pub mc_empirical_variance: f64,
    pub mc_coverage: f64,
    pub mc_mean_half_width: f64,
}

impl ReplicationSummary {
    pub fn variance_ratio(&self) -> f64 {
        self.empirical_variance / self.theoretical_mse
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<(&str, String)> = vec![
            ("replications", self.replications.to_string()),
            ("gamma", self.gamma.to_string()),
            ("true mean", format!("{:.6}", self.true_mean)),
            ("n*", self.n_star.to_string()),
            ("m0 / m1", format!("{} / {}", self.m0, self.m1)),
            ("rho(n*)", format!("{:.6}", self.rho)),
            (
                "lambda",
                match self.lambda_forced {
                    Some(l) => format!("{l} (forced)"),
                    None => format!("{:.6} (estimated per run)", self.lambda),
                },
            ),
            ("theoretical mse", format!("{:.6e}", self.theoretical_mse)),
            ("empirical variance", format!("{:.6e}", self.empirical_variance)),
            ("variance ratio", format!("{:.4}", self.variance_ratio())),
            ("empirical mean", format!("{:.6}", self.empirical_mean)),
            ("coverage", format!("{:.4}", self.coverage)),
            ("mean half-width", format!("{:.6e}", self.mean_half_width)),
            ("mc samples", self.mc_samples.to_string()),
            ("mc theoretical variance", format!("{:.6e}", self.mc_theoretical_variance)),
            ("mc empirical variance", format!("{:.6e}", self.mc_empirical_variance)),
            ("mc coverage", format!("{:.4}", self.mc_coverage)),
            ("mc mean half-width", format!("{:.6e}", self.mc_mean_half_width)),
        ];
        rows.iter().map(|(k, v)| format!("{k:<26}{v}\n")).collect()
    }
}

struct Replicate {
    mfmc: EstimateReport,
    mc: EstimateReport,
}

fn replicate_once(
    model: &SyntheticModel,
    rom: &SyntheticSurrogate,
    config: &CampaignConfig,
    r: usize,
    m0: usize,
    m1: usize,
    mc_samples: usize,
    lambda: Option<f64>,
) -> Result<Replicate> {
    let mut rng = RngStream::new(config.seed, format!("replicate/{r}/mfmc-sample"));
    let mut fom = Vec::with_capacity(m0);
    let mut rom_values = Vec::with_capacity(m1);
    for i in 0..m1 {
        let mu = model.sample_parameters(&mut rng, i as u64);
        if i < m0 {
            fom.push(model.solve(&mu)?.values[0]);
        }
        rom_values.push(rom.evaluate(&mu)?.values[0]);
    }
    let pair = QoiSamplePair::from_values(fom, rom_values)?;
    let mfmc = match lambda {
        Some(l) => mfmc_interval_with_lambda(&pair, l, config.gamma)?,
        None => dl_mfmc_confidence_interval(&pair, config.gamma)?,
    };
    let mut rng = RngStream::new(config.seed, format!("replicate/{r}/baseline"));
    let mut values = Vec::with_capacity(mc_samples);
    for i in 0..mc_samples {
        let mu = model.sample_parameters(&mut rng, i as u64);
        values.push(model.solve(&mu)?.values[0]);
    }
    let mc = mc_fom_estimate(&values, config.gamma)?;
    Ok(Replicate { mfmc, mc })
}

/// Fixes the sampling policy with one pilot campaign on the synthetic
/// model, then repeats the sampling and estimation steps `replications`
/// times next to a plain Monte Carlo run at the same budget.
pub fn replication_study(
    config: &CampaignConfig,
    replications: usize,
    lambda: Option<f64>,
) -> Result<ReplicationSummary> {
    let ModelConfig::Synthetic(model) = &config.model else {
        return Err(Error::Config("replication studies run on the synthetic model".into()));
    };
    if replications < MIN_REPLICATIONS {
        return Err(Error::Config(format!(
            "replication study needs at least {MIN_REPLICATIONS} replications, got {replications}"
        )));
    }
    if let Some(l) = lambda {
        if !l.is_finite() {
            return Err(Error::Config(format!("forced lambda {l} is not finite")));
        }
    }
    let pilot = run_campaign(config)?;
    if let Some(reason) = &pilot.fallback {
        return Err(Error::Config(format!(
            "pilot campaign fell back to Monte Carlo ({reason}); nothing to replicate"
        )));
    }
    let policy = pilot.policy.expect("policy present without fallback");
    let (n_star, m0, m1) = (policy.n_star, policy.m0_star, policy.m1_star);
    let rho = model.rho(n_star);
    let rom = SyntheticSurrogate {
        mean: model.mean,
        sigma0: model.sigma0,
        rho,
    };
    let sigma0 = model.sigma0;
    let lambda_used = lambda.unwrap_or(rho);
    let theoretical_mse = mfmc_mse_theoretical(sigma0, sigma0, rho, lambda_used, m0, m1)?;
    let mc_samples = (config.budget / config.cost.fom_sample()).floor() as usize;

    let run = |r: usize| replicate_once(model, &rom, config, r, m0, m1, mc_samples, lambda);
    let reps: Vec<Replicate> = if config.workers > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(|| (0..replications).into_par_iter().map(run).collect::<Result<_>>())?
    } else {
        (0..replications).map(run).collect::<Result<_>>()?
    };

    let summarize = |pick: &dyn Fn(&Replicate) -> &EstimateReport| -> Result<(f64, f64, f64, f64)> {
        let points: Vec<f64> = reps.iter().map(|r| pick(r).point).collect();
        let m = sample_moments(&points)?;
        let covered = reps.iter().filter(|r| pick(r).contains(model.mean)).count();
        let width = reps.iter().map(|r| pick(r).half_width).sum::<f64>() / reps.len() as f64;
        Ok((m.mean, m.variance, covered as f64 / reps.len() as f64, width))
    };
    let (empirical_mean, empirical_variance, coverage, mean_half_width) = summarize(&|r| &r.mfmc)?;
    let (_, mc_empirical_variance, mc_coverage, mc_mean_half_width) = summarize(&|r| &r.mc)?;

    Ok(ReplicationSummary {
        replications,
        gamma: config.gamma,
        true_mean: model.mean,
        n_star,
        m0,
        m1,
        rho,
        sigma0,
        lambda: lambda_used,
        lambda_forced: lambda,
        theoretical_mse,
        empirical_mean,
        empirical_variance,
        coverage,
        mean_half_width,
        mc_samples,
        mc_theoretical_variance: sigma0 * sigma0 / mc_samples as f64,
        mc_empirical_variance,
        mc_coverage,
        mc_mean_half_width,
    })
}
