use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    clip_rho, dl_mfmc_confidence_interval, mc_fom_estimate, EstimateReport, QoiSamplePair,
};
use crate::model::{
    CostComponent, CostLedger, ForwardModel, MultiFidelityModel, ParameterSample, Provenance,
    QoiFunctional, Snapshot, SnapshotSet, Surrogate,
};
use crate::policy::{
    compute_policy, fit_correlation_trend, fit_training_time_trend, mse_upper_bound,
    optimal_training_size, CorrelationFit, SamplingPolicy, TrainingTimeFit, TrendCoefficients,
};
use crate::snapshot::snapshot_store_read;
use crate::stats::{sample_correlation, sample_moments, RngStream};
use crate::testbed::{OxygenModel, Qoi, QoiKind};

use super::config::{CampaignConfig, ModelConfig};

/// Id offsets keeping sample ids unique across phases.
const TRAIN_IDS: u64 = 0;
const SAMPLE_IDS: u64 = 1 << 32;
const FALLBACK_IDS: u64 = 2 << 32;
const BASELINE_IDS: u64 = 3 << 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    Fom,
    Rom,
}

impl Fidelity {
    pub fn as_str(&self) -> &'static str {
        match self {
            Fidelity::Fom => "fom",
            Fidelity::Rom => "rom",
        }
    }
}

/// One QoI value, as dumped to the sample CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QoiRecord {
    pub sample_id: u64,
    pub fidelity: Fidelity,
    pub qoi_value: f64,
}

/// Held-out correlation and declared training cost at one preliminary size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub n: usize,
    pub rho: f64,
    pub decorrelation: f64,
    pub training_cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub training_seconds: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    Campaign,
    Plan,
    Baseline,
    FitTrends,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub kind: ReportKind,
    pub config: CampaignConfig,
    #[serde(default)]
    pub trend_points: Vec<TrendPoint>,
    pub correlation_fit: Option<CorrelationFit>,
    pub training_fit: Option<TrainingTimeFit>,
    pub coefficients: Option<TrendCoefficients>,
    /// FOM QoI standard deviation over the preliminary samples.
    pub sigma0_preliminary: Option<f64>,
    /// Budget left for steps 5 onwards once preliminary training is paid.
    pub effective_budget: Option<f64>,
    pub n_star: Option<usize>,
    /// Trend-law MSE bound at `n_star`.
    pub mse_bound_at_n_star: Option<f64>,
    /// In-sample correlation of the final surrogate.
    pub rho_pre_estimate: Option<f64>,
    pub policy: Option<SamplingPolicy>,
    pub estimate: Option<EstimateReport>,
    pub baseline: Option<EstimateReport>,
    /// Why the multi-fidelity estimate was replaced by plain Monte Carlo.
    pub fallback: Option<String>,
    pub ledger: CostLedger,
    /// Wall-clock seconds per phase; only with `measure`.
    #[serde(default)]
    pub timings: Vec<(String, f64)>,
    #[serde(skip)]
    pub samples: Vec<QoiRecord>,
}

impl CampaignReport {
    fn new(kind: ReportKind, config: &CampaignConfig) -> Self {
        Self {
            kind,
            config: config.clone(),
            trend_points: Vec::new(),
            correlation_fit: None,
            training_fit: None,
            coefficients: None,
            sigma0_preliminary: None,
            effective_budget: None,
            n_star: None,
            mse_bound_at_n_star: None,
            rho_pre_estimate: None,
            policy: None,
            estimate: None,
            baseline: None,
            fallback: None,
            ledger: CostLedger::new(config.budget),
            timings: Vec::new(),
            samples: Vec::new(),
        }
    }

    pub fn fallback_taken(&self) -> bool {
        self.fallback.is_some()
    }
}

/// Runs one model with its QoI, in parallel when asked to.
struct Runner<'a, M> {
    model: &'a M,
    qoi: Qoi,
    config: &'a CampaignConfig,
    pool: Option<rayon::ThreadPool>,
    clock: Option<Instant>,
}

impl<'a, M: MultiFidelityModel> Runner<'a, M> {
    fn new(model: &'a M, qoi: Qoi, config: &'a CampaignConfig) -> Result<Self> {
        let pool = if config.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(config.workers)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Self {
            model,
            qoi,
            config,
            pool,
            clock: None,
        })
    }

    fn map<T, F>(&self, n: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        match &self.pool {
            Some(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
            None => (0..n).map(f).collect(),
        }
    }

    fn draw(&self, prefix: &str, offset: u64, range: std::ops::Range<usize>) -> Result<Vec<ParameterSample>> {
        let start = range.start;
        self.map(range.len(), |i| {
            let i = start + i;
            let mut rng = RngStream::new(self.config.seed, format!("{prefix}/{i}"));
            Ok(self.model.sample_parameters(&mut rng, offset + i as u64))
        })
    }

    fn solve_all(&self, samples: &[ParameterSample]) -> Result<Vec<Snapshot>> {
        self.map(samples.len(), |i| {
            let mu = &samples[i];
            self.model.validate(mu)?;
            Ok(Snapshot {
                field: self.model.solve(mu)?,
                sample: mu.clone(),
            })
        })
    }

    fn fom_qoi(&self, snapshots: &[Snapshot]) -> Vec<f64> {
        snapshots.iter().map(|s| self.qoi.evaluate(&s.field)).collect()
    }

    fn rom_qoi(&self, rom: &M::Rom, samples: &[ParameterSample]) -> Result<Vec<f64>> {
        self.map(samples.len(), |i| Ok(self.qoi.evaluate(&rom.evaluate(&samples[i])?)))
    }

    /// Draws and solves labelled FOM samples, charging `g + w0` each.
    fn labelled(
        &self,
        ledger: &mut CostLedger,
        prefix: &str,
        offset: u64,
        range: std::ops::Range<usize>,
    ) -> Result<Vec<Snapshot>> {
        let count = range.len();
        let cost = &self.config.cost;
        // refuse before computing anything the budget cannot cover
        let needed = cost.fom_sample() * count as f64;
        if ledger.total() + needed > ledger.budget() * (1.0 + 1e-12) {
            return Err(Error::BudgetExceeded {
                phase: prefix.to_string(),
                amount: needed,
                total: ledger.total() + needed,
                budget: ledger.budget(),
            });
        }
        let samples = self.draw(prefix, offset, range)?;
        ledger.charge_many(CostComponent::Generate, cost.g, count)?;
        let snapshots = self.solve_all(&samples)?;
        ledger.charge_many(CostComponent::Fom, cost.w0, count)?;
        Ok(snapshots)
    }

    fn start_clock(&mut self) {
        if self.config.measure {
            self.clock = Some(Instant::now());
        }
    }

    fn stop_clock(&mut self, report: &mut CampaignReport, phase: &str) {
        if let Some(t) = self.clock.take() {
            report.timings.push((phase.to_string(), t.elapsed().as_secs_f64()));
        }
    }
}

fn qoi_for(config: &CampaignConfig) -> Qoi {
    match &config.model {
        ModelConfig::Oxygen(m) => Qoi::new(config.qoi, m.constants.alpha_ox),
        ModelConfig::Synthetic(_) => Qoi::new(QoiKind::FieldMean, 1.0),
    }
}

fn oxygen_model(m: &OxygenModel, config: &CampaignConfig) -> OxygenModel {
    let mut m = m.clone();
    m.rom = config.rom;
    m
}

/// Correlation that tolerates constant samples (reported as no correlation).
fn robust_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    match sample_correlation(a, b) {
        Ok(r) => Ok(r),
        Err(Error::DegenerateVariance(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Output of steps 1 to 5.
struct Plan {
    training: Vec<Snapshot>,
    effective_budget: f64,
    n_star: usize,
}

/// Steps 3 and 4 on the first `n0` snapshots: held-out correlations at
/// each preliminary size, then both trend fits.
fn trend_points<M: MultiFidelityModel>(
    runner: &mut Runner<'_, M>,
    report: &mut CampaignReport,
    ledger: Option<&mut CostLedger>,
    snapshots: &[Snapshot],
    fom_qoi: &[f64],
) -> Result<TrendCoefficients> {
    let config = runner.config;
    let sizes = config.subset_sizes();
    let n_k = *sizes.last().expect("validated");
    let held_out: Vec<ParameterSample> = snapshots[n_k..].iter().map(|s| s.sample.clone()).collect();
    let held_fom = &fom_qoi[n_k..];
    let mut ledger = ledger;
    for &n in &sizes {
        let t = Instant::now();
        let rom = runner.model.train_surrogate(&snapshots[..n])?;
        let seconds = config.measure.then(|| t.elapsed().as_secs_f64());
        let training_cost = config.training_cost.cost(n);
        if let Some(l) = ledger.as_deref_mut() {
            l.charge(CostComponent::Train, training_cost)?;
        }
        let rho = clip_rho(robust_correlation(held_fom, &runner.rom_qoi(&rom, &held_out)?)?);
        report.trend_points.push(TrendPoint {
            n,
            rho,
            decorrelation: 1.0 - rho * rho,
            training_cost,
            training_seconds: seconds,
        });
    }
    let corr: Vec<(usize, f64)> = report.trend_points.iter().map(|p| (p.n, p.rho)).collect();
    let cost: Vec<(usize, f64)> = report
        .trend_points
        .iter()
        .map(|p| (p.n, p.training_cost))
        .collect();
    let cf = fit_correlation_trend(&corr)?;
    let tf = fit_training_time_trend(&cost)?;
    report.correlation_fit = Some(cf);
    report.training_fit = Some(tf);
    let coefficients = TrendCoefficients {
        zeta: cf.zeta,
        c1: cf.c1,
        c2: cf.c2,
        c3: tf.c3,
        c4: tf.c4,
    };
    report.coefficients = Some(coefficients);
    Ok(coefficients)
}

fn plan_steps<M: MultiFidelityModel>(
    runner: &mut Runner<'_, M>,
    report: &mut CampaignReport,
) -> Result<Plan> {
    let config = runner.config;
    let mut ledger = CostLedger::new(config.budget);

    runner.start_clock();
    ledger.enter_phase("preliminary");
    let training = runner.labelled(&mut ledger, "train", TRAIN_IDS, 0..config.n0)?;
    let fom_qoi = runner.fom_qoi(&training);
    runner.stop_clock(report, "preliminary");

    runner.start_clock();
    ledger.enter_phase("trends");
    let coefficients = trend_points(runner, report, Some(&mut ledger), &training, &fom_qoi)?;
    runner.stop_clock(report, "trends");

    let sigma0 = sample_moments(&fom_qoi)?.std_dev();
    report.sigma0_preliminary = Some(sigma0);
    let preliminary_training = ledger.component(CostComponent::Train);
    let effective_budget = config.budget - preliminary_training;
    report.effective_budget = Some(effective_budget);
    let n_star = optimal_training_size(
        &coefficients,
        effective_budget,
        &config.cost,
        sigma0,
        config.n0.max(2),
    )?;
    report.n_star = Some(n_star);
    report.mse_bound_at_n_star =
        mse_upper_bound(n_star as f64, &coefficients, effective_budget, &config.cost, sigma0).ok();
    report.ledger = ledger;
    Ok(Plan {
        training,
        effective_budget,
        n_star,
    })
}

fn push_records(report: &mut CampaignReport, ids: impl Iterator<Item = u64>, values: &[f64], fidelity: Fidelity) {
    report.samples.extend(ids.zip(values).map(|(sample_id, &qoi_value)| QoiRecord {
        sample_id,
        fidelity,
        qoi_value,
    }));
}

fn fallback<M: MultiFidelityModel>(
    runner: &mut Runner<'_, M>,
    report: &mut CampaignReport,
    reason: String,
) -> Result<()> {
    let config = runner.config;
    let n = (report.ledger.remaining() / config.cost.fom_sample()).floor().max(0.0) as usize;
    if n < 2 {
        return Err(Error::Budget(format!(
            "{reason}; remaining budget {} cannot fund a Monte Carlo fallback",
            report.ledger.remaining()
        )));
    }
    runner.start_clock();
    report.ledger.enter_phase("fallback");
    let snaps = runner.labelled(&mut report.ledger, "fallback", FALLBACK_IDS, 0..n)?;
    let values = runner.fom_qoi(&snaps);
    push_records(report, snaps.iter().map(|s| s.sample.id), &values, Fidelity::Fom);
    let mut estimate = mc_fom_estimate(&values, config.gamma)?;
    estimate.cost_ledger = report.ledger.as_map();
    report.estimate = Some(estimate);
    report.fallback = Some(reason);
    runner.stop_clock(report, "fallback");
    Ok(())
}

fn campaign_with<M: MultiFidelityModel>(model: &M, config: &CampaignConfig) -> Result<CampaignReport> {
    let mut report = CampaignReport::new(ReportKind::Campaign, config);
    let mut runner = Runner::new(model, qoi_for(config), config)?;
    let Plan {
        mut training,
        effective_budget,
        n_star,
    } = plan_steps(&mut runner, &mut report)?;
    let cost = &config.cost;

    runner.start_clock();
    report.ledger.enter_phase("augment");
    if n_star > training.len() {
        let extra = runner.labelled(&mut report.ledger, "train", TRAIN_IDS, training.len()..n_star)?;
        training.extend(extra);
    }
    training.truncate(n_star);
    runner.stop_clock(&mut report, "augment");

    runner.start_clock();
    report.ledger.enter_phase("final-training");
    let rom = model.train_surrogate(&training)?;
    let t_star = config.training_cost.cost(n_star);
    report.ledger.charge(CostComponent::Train, t_star)?;
    let train_fom = runner.fom_qoi(&training);
    let train_samples: Vec<ParameterSample> = training.iter().map(|s| s.sample.clone()).collect();
    let train_rom = runner.rom_qoi(&rom, &train_samples)?;
    let rho_pre = clip_rho(robust_correlation(&train_fom, &train_rom)?);
    let sigma0 = sample_moments(&train_fom)?.std_dev();
    let sigma1 = sample_moments(&train_rom)?.std_dev();
    report.rho_pre_estimate = Some(rho_pre);
    runner.stop_clock(&mut report, "final-training");

    let policy = match compute_policy(n_star, rho_pre, sigma0, sigma1, effective_budget, cost, t_star) {
        Ok(p) => p,
        Err(e @ (Error::PolicyInapplicable(_) | Error::PolicyDegenerate(_) | Error::DegenerateSurrogate(_))) => {
            fallback(&mut runner, &mut report, e.to_string())?;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let (m0, m1) = (policy.m0_star, policy.m1_star);
    report.policy = Some(policy);

    runner.start_clock();
    report.ledger.enter_phase("sampling");
    report.ledger.charge_many(CostComponent::Generate, cost.g, m1)?;
    report.ledger.charge_many(CostComponent::Fom, cost.w0, m0)?;
    let samples = runner.draw("mfmc-sample", SAMPLE_IDS, 0..m1)?;
    let fom_snaps = runner.solve_all(&samples[..m0])?;
    let fom = runner.fom_qoi(&fom_snaps);
    let rom_values = runner.rom_qoi(&rom, &samples)?;
    report.ledger.charge_many(CostComponent::Rom, cost.w1, m1)?;
    let ids: Vec<u64> = samples.iter().map(|s| s.id).collect();
    push_records(&mut report, ids.iter().copied(), &fom, Fidelity::Fom);
    push_records(&mut report, ids.iter().copied(), &rom_values, Fidelity::Rom);
    runner.stop_clock(&mut report, "sampling");

    let pair = QoiSamplePair::new(ids, fom, rom_values)?;
    let mut estimate = match dl_mfmc_confidence_interval(&pair, config.gamma) {
        Ok(e) => e,
        Err(e @ Error::DegenerateSurrogate(_)) => {
            fallback(&mut runner, &mut report, e.to_string())?;
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    estimate.cost_ledger = report.ledger.as_map();
    report.estimate = Some(estimate);
    Ok(report)
}

fn plan_with<M: MultiFidelityModel>(model: &M, config: &CampaignConfig) -> Result<(CampaignReport, Vec<Snapshot>)> {
    let mut report = CampaignReport::new(ReportKind::Plan, config);
    let mut runner = Runner::new(model, qoi_for(config), config)?;
    let plan = plan_steps(&mut runner, &mut report)?;
    Ok((report, plan.training))
}

fn baseline_with<M: MultiFidelityModel>(model: &M, config: &CampaignConfig) -> Result<CampaignReport> {
    let mut report = CampaignReport::new(ReportKind::Baseline, config);
    let mut runner = Runner::new(model, qoi_for(config), config)?;
    let per = config.cost.fom_sample();
    if config.budget < 2.0 * per {
        return Err(Error::Budget(format!(
            "budget {} is below two FOM samples (2 (g + w0) = {})",
            config.budget,
            2.0 * per
        )));
    }
    // guard the floor against p / (g + w0) landing just below an integer
    let n = ((config.budget / per) * (1.0 + 1e-12)).floor() as usize;
    runner.start_clock();
    report.ledger.enter_phase("baseline");
    let snaps = runner.labelled(&mut report.ledger, "baseline", BASELINE_IDS, 0..n)?;
    let values = runner.fom_qoi(&snaps);
    push_records(&mut report, snaps.iter().map(|s| s.sample.id), &values, Fidelity::Fom);
    let mut estimate = mc_fom_estimate(&values, config.gamma)?;
    estimate.cost_ledger = report.ledger.as_map();
    report.baseline = Some(estimate);
    runner.stop_clock(&mut report, "baseline");
    Ok(report)
}

fn fit_trends_with<M: MultiFidelityModel>(
    model: &M,
    config: &CampaignConfig,
    set: SnapshotSet,
) -> Result<CampaignReport> {
    let mut config = config.clone();
    config.n0 = set.len();
    config.validate_shape()?;
    let mut report = CampaignReport::new(ReportKind::FitTrends, &config);
    let mut records = set.records().to_vec();
    for r in &mut records {
        model.rehydrate(&mut r.sample)?;
        model.validate(&r.sample)?;
    }
    let mut runner = Runner::new(model, qoi_for(&config), &config)?;
    let fom_qoi = runner.fom_qoi(&records);
    report.sigma0_preliminary = Some(sample_moments(&fom_qoi)?.std_dev());
    trend_points(&mut runner, &mut report, None, &records, &fom_qoi)?;
    Ok(report)
}

macro_rules! dispatch {
    ($config:expr, $f:ident $(, $arg:expr)*) => {
        match &$config.model {
            ModelConfig::Oxygen(m) => $f(&oxygen_model(m, $config), $config $(, $arg)*),
            ModelConfig::Synthetic(m) => $f(m, $config $(, $arg)*),
        }
    };
}

/// Steps 1 to 9: preliminary samples, trend fits, optimal training size,
/// final surrogate, sampling policy and the multi-fidelity estimate. Falls
/// back to plain Monte Carlo on the remaining budget when the policy does
/// not apply.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignReport> {
    config.validate()?;
    dispatch!(config, campaign_with)
}

/// Steps 1 to 5 only; also returns the preliminary snapshots.
pub fn run_plan(config: &CampaignConfig) -> Result<(CampaignReport, SnapshotSet)> {
    config.validate()?;
    let (report, training) = dispatch!(config, plan_with)?;
    let provenance = Provenance {
        generator_seed: config.seed,
        solver_tag: match &config.model {
            ModelConfig::Oxygen(m) => m.solver_tag(),
            ModelConfig::Synthetic(m) => m.solver_tag(),
        },
    };
    Ok((report, SnapshotSet::from_records(training, provenance)?))
}

/// Plain Monte Carlo with `floor(p / (g + w0))` FOM samples.
pub fn run_mc_baseline(config: &CampaignConfig) -> Result<CampaignReport> {
    config.validate_shape()?;
    dispatch!(config, baseline_with)
}

/// Steps 3 and 4 on snapshots from disk; `n0` becomes the file's length.
pub fn fit_trends(config: &CampaignConfig, snapshots: &Path) -> Result<CampaignReport> {
    let set = snapshot_store_read(snapshots)?;
    dispatch!(config, fit_trends_with, set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::SyntheticModel;

    fn small() -> CampaignConfig {
        CampaignConfig::synthetic(2000.0, 40, 5)
    }

    #[test]
    fn synthetic_campaign_respects_budget() {
        let c = small();
        let r = run_campaign(&c).unwrap();
        assert!(r.fallback.is_none());
        let p = r.policy.as_ref().unwrap();
        let n = r.n_star.unwrap();
        assert!(n >= c.n0);
        let spent = n as f64 * c.cost.fom_sample()
            + c.training_cost.cost(n)
            + p.m0_star as f64 * c.cost.w0
            + p.m1_star as f64 * c.cost.g;
        assert!(spent <= c.budget);
        assert!(r.ledger.total() <= c.budget);
        let est = r.estimate.unwrap();
        assert_eq!(est.fom_samples, p.m0_star);
        assert_eq!(est.rom_samples, p.m1_star);
        assert!(est.half_width > 0.0);
    }

    #[test]
    fn campaign_is_deterministic_and_worker_independent() {
        let c = small();
        let a = serde_json::to_string(&run_campaign(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run_campaign(&c).unwrap()).unwrap();
        assert_eq!(a, b);
        let mut par = c.clone();
        par.workers = 3;
        let mut r = run_campaign(&par).unwrap();
        r.config.workers = 1;
        assert_eq!(serde_json::to_string(&r).unwrap(), a);
    }

    #[test]
    fn perfect_surrogate_falls_back() {
        let mut c = small();
        c.model = ModelConfig::Synthetic(SyntheticModel {
            c1: 0.0,
            c2: 0.0,
            ..SyntheticModel::default()
        });
        let r = run_campaign(&c).unwrap();
        assert!(r.fallback_taken());
        assert!((r.rho_pre_estimate.unwrap() - 1.0).abs() < 1e-8);
        let est = r.estimate.unwrap();
        assert_eq!(est.method, crate::estimators::EstimatorKind::McFom);
        assert!(r.ledger.total() <= c.budget);
    }

    #[test]
    fn weak_surrogate_falls_back() {
        let mut c = small();
        c.cost.g = 2.0;
        c.budget = 4000.0;
        c.model = ModelConfig::Synthetic(SyntheticModel {
            c1: 0.0,
            c2: 0.9,
            ..SyntheticModel::default()
        });
        let r = run_campaign(&c).unwrap();
        assert!(r.fallback.as_deref().unwrap().contains("inapplicable"));
    }

    #[test]
    fn baseline_sample_count_is_floored() {
        let mut c = small();
        c.budget = 100.0 * c.cost.fom_sample();
        let r = run_mc_baseline(&c).unwrap();
        assert_eq!(r.baseline.unwrap().fom_samples, 100);
        c.budget = 1.5 * c.cost.fom_sample();
        assert!(matches!(run_mc_baseline(&c), Err(Error::Budget(_))));
    }

    #[test]
    fn constant_qoi_baseline_has_zero_width() {
        let mut c = small();
        c.model = ModelConfig::Synthetic(SyntheticModel {
            sigma0: 1e-300,
            ..SyntheticModel::default()
        });
        let r = run_mc_baseline(&c).unwrap();
        assert_eq!(r.baseline.unwrap().half_width, 0.0);
    }

    #[test]
    fn plan_then_fit_trends_agree() {
        let c = small();
        let (plan, set) = run_plan(&c).unwrap();
        assert_eq!(set.len(), c.n0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.bin");
        crate::snapshot::snapshot_store_write(&set, &path).unwrap();
        let fit = fit_trends(&c, &path).unwrap();
        assert_eq!(fit.trend_points, plan.trend_points);
        assert_eq!(fit.coefficients, plan.coefficients);
    }
}
