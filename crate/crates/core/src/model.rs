//! Contracts between the estimator math and concrete solvers: parameter
//! samples, discrete fields, QoI functionals, forward models, surrogates and
//! the budget ledger.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::policy::CostModel;
use crate::stats::RngStream;
use crate::testbed::VascularLayout;

/// Uniform vertex-centred grid on `[0, (nx-1) h] x [0, (ny-1) h]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, spacing: f64) -> Self {
        Self { nx, ny, spacing }
    }

    /// Square grid with `n x n` nodes covering a domain of side `side`.
    pub fn square(n: usize, side: f64) -> Self {
        assert!(n >= 2, "grid needs at least 2 nodes per side");
        Self::new(n, n, side / (n - 1) as f64)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k % self.nx, k / self.nx);
        (i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn width(&self) -> f64 {
        (self.nx - 1) as f64 * self.spacing
    }

    pub fn height(&self) -> f64 {
        (self.ny - 1) as f64 * self.spacing
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Trapezoid quadrature weights; they sum to the domain area.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let h2 = self.spacing * self.spacing;
        let mut w = Vec::with_capacity(self.len());
        for j in 0..self.ny {
            let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
            for i in 0..self.nx {
                let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
                w.push(wx * wy * h2);
            }
        }
        w
    }

    pub fn to_csv(&self) -> String {
        format!(
            "nx,ny,spacing,width,height\n{},{},{:e},{:e},{:e}\n",
            self.nx,
            self.ny,
            self.spacing,
            self.width(),
            self.height()
        )
    }
}

/// Discrete field on a [`Grid`], stored row-major (x fastest).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSolution {
    pub values: Vec<f64>,
    pub grid: Grid,
}

impl FieldSolution {
    pub fn new(values: Vec<f64>, grid: Grid) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.ny
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite field value {v}")));
        }
        Ok(Self { values, grid })
    }

    pub fn constant(value: f64, grid: Grid) -> Self {
        Self {
            values: vec![value; grid.len()],
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// CSV with columns `i,j,x,y,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,x,y,value\n");
        for (k, v) in self.values.iter().enumerate() {
            let (x, y) = self.grid.coords(k);
            let _ = writeln!(
                out,
                "{},{},{:e},{:e},{:e}",
                k % self.grid.nx,
                k / self.grid.nx,
                x,
                y,
                v
            );
        }
        out
    }
}

/// One draw `mu` from the parameter distribution.
///
/// `physical` holds the scalar model parameters and `network_params` the
/// hyper-parameters of the vascular generator (empty for models without a
/// network). The layout itself is a runtime handle; it is regenerated from
/// `(stream_seed, stream_label)` when a sample is read back from disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParameterSample {
    pub id: u64,
    pub physical: Vec<f64>,
    #[serde(default)]
    pub network_params: Vec<f64>,
    pub stream_seed: u64,
    pub stream_label: String,
    #[serde(skip)]
    pub network: Option<Arc<VascularLayout>>,
}

impl PartialEq for ParameterSample {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.physical == other.physical
            && self.network_params == other.network_params
            && self.stream_seed == other.stream_seed
            && self.stream_label == other.stream_label
    }
}

impl ParameterSample {
    pub fn new(id: u64, physical: Vec<f64>, stream: &RngStream) -> Self {
        Self {
            id,
            physical,
            network_params: Vec::new(),
            stream_seed: stream.seed(),
            stream_label: stream.label().to_string(),
            network: None,
        }
    }
}

/// A labelled FOM run.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub sample: ParameterSample,
    pub field: FieldSolution,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator_seed: u64,
    pub solver_tag: String,
}

/// Ordered collection of FOM snapshots sharing one grid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SnapshotSet {
    records: Vec<Snapshot>,
    pub provenance: Provenance,
}

impl SnapshotSet {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            records: Vec::new(),
            provenance,
        }
    }

    pub fn push(&mut self, snapshot: Snapshot) -> Result<()> {
        if let Some(last) = self.records.last() {
            if snapshot.sample.id <= last.sample.id {
                return Err(Error::InvalidParameter(format!(
                    "snapshot ids must increase ({} after {})",
                    snapshot.sample.id, last.sample.id
                )));
            }
            if snapshot.field.grid != last.field.grid {
                return Err(Error::InvalidParameter(
                    "snapshots must share one grid".into(),
                ));
            }
            if snapshot.sample.physical.len() != last.sample.physical.len()
                || snapshot.sample.network_params.len() != last.sample.network_params.len()
            {
                return Err(Error::InvalidParameter(
                    "snapshots must share one parameter layout".into(),
                ));
            }
        }
        self.records.push(snapshot);
        Ok(())
    }

    pub fn from_records(records: Vec<Snapshot>, provenance: Provenance) -> Result<Self> {
        let mut set = Self::new(provenance);
        for r in records {
            set.push(r)?;
        }
        Ok(set)
    }

    pub fn records(&self) -> &[Snapshot] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [Snapshot] {
        &mut self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn grid(&self) -> Option<Grid> {
        self.records.first().map(|r| r.field.grid)
    }

    /// The first `n` snapshots.
    pub fn head(&self, n: usize) -> &[Snapshot] {
        &self.records[..n.min(self.records.len())]
    }
}

/// A scalar functional `Q` of a discrete field.
pub trait QoiFunctional: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, field: &FieldSolution) -> f64;
}

/// A deterministic high-fidelity solver over a sampled parameter space.
pub trait ForwardModel: Send + Sync {
    fn name(&self) -> &str;

    /// Version tag written into snapshot provenance.
    fn solver_tag(&self) -> String;

    fn grid(&self) -> Grid;

    /// Draws one parameter sample (the generation step, cost `g`).
    fn sample_parameters(&self, rng: &mut RngStream, id: u64) -> ParameterSample;

    /// Checks that `mu` lies in the model's parameter space.
    fn validate(&self, mu: &ParameterSample) -> Result<()>;

    /// Full-order solve (cost `w0`). Pure in `mu`.
    fn solve(&self, mu: &ParameterSample) -> Result<FieldSolution>;

    /// Restores runtime handles of a sample read back from disk.
    fn rehydrate(&self, _mu: &mut ParameterSample) -> Result<()> {
        Ok(())
    }
}

/// A trained low-fidelity approximation of a [`ForwardModel`].
pub trait Surrogate: Send + Sync {
    fn evaluate(&self, mu: &ParameterSample) -> Result<FieldSolution>;
}

/// Models that can train their own surrogate from FOM snapshots.
pub trait MultiFidelityModel: ForwardModel {
    type Rom: Surrogate;

    fn train_surrogate(&self, training: &[Snapshot]) -> Result<Self::Rom>;
}

/// Validates `mu`, solves, and charges `w0` to the ledger.
pub fn forward_model_solve<M: ForwardModel + ?Sized>(
    model: &M,
    mu: &ParameterSample,
    ledger: &mut CostLedger,
    cost: &CostModel,
) -> Result<FieldSolution> {
    model.validate(mu)?;
    let field = model.solve(mu)?;
    ledger.charge(CostComponent::Fom, cost.w0)?;
    Ok(field)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostComponent {
    Generate,
    Fom,
    Train,
    Rom,
}

impl CostComponent {
    pub const ALL: [CostComponent; 4] = [
        CostComponent::Generate,
        CostComponent::Fom,
        CostComponent::Train,
        CostComponent::Rom,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            CostComponent::Generate => "generate",
            CostComponent::Fom => "fom",
            CostComponent::Train => "train",
            CostComponent::Rom => "rom",
        }
    }
}

/// Declared-cost accounting against a total budget `p`.
///
/// A charge that would push the grand total above the budget is refused and
/// leaves the ledger untouched.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    budget: f64,
    components: BTreeMap<CostComponent, f64>,
    phases: Vec<(String, f64)>,
    #[serde(skip)]
    phase: String,
}

/// Relative slack absorbing floating-point accumulation in long charge runs.
const LEDGER_SLACK: f64 = 1e-12;

impl CostLedger {
    pub fn new(budget: f64) -> Self {
        Self {
            budget,
            components: CostComponent::ALL.iter().map(|c| (*c, 0.0)).collect(),
            phases: Vec::new(),
            phase: "init".into(),
        }
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    /// Starts attributing charges to `phase`.
    pub fn enter_phase(&mut self, phase: impl Into<String>) {
        self.phase = phase.into();
        if self.phases.last().map(|p| &p.0) != Some(&self.phase) {
            self.phases.push((self.phase.clone(), 0.0));
        }
    }

    pub fn charge(&mut self, component: CostComponent, amount: f64) -> Result<()> {
        if !(amount >= 0.0 && amount.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "cannot charge {amount} to {}",
                component.as_str()
            )));
        }
        let total = self.total() + amount;
        if total > self.budget * (1.0 + LEDGER_SLACK) {
            return Err(Error::BudgetExceeded {
                phase: self.phase.clone(),
                amount,
                total,
                budget: self.budget,
            });
        }
        *self.components.entry(component).or_insert(0.0) += amount;
        if self.phases.is_empty() {
            self.phases.push((self.phase.clone(), 0.0));
        }
        if let Some(last) = self.phases.last_mut() {
            last.1 += amount;
        }
        Ok(())
    }

    /// Charges `count` identical items, refusing the whole batch if it does
    /// not fit.
    pub fn charge_many(&mut self, component: CostComponent, unit: f64, count: usize) -> Result<()> {
        let amount = unit * count as f64;
        if self.total() + amount > self.budget * (1.0 + LEDGER_SLACK) {
            return Err(Error::BudgetExceeded {
                phase: self.phase.clone(),
                amount,
                total: self.total() + amount,
                budget: self.budget,
            });
        }
        for _ in 0..count {
            self.charge(component, unit)?;
        }
        Ok(())
    }

    pub fn component(&self, component: CostComponent) -> f64 {
        self.components.get(&component).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        CostComponent::ALL.iter().map(|c| self.component(*c)).sum()
    }

    pub fn remaining(&self) -> f64 {
        self.budget - self.total()
    }

    pub fn phases(&self) -> &[(String, f64)] {
        &self.phases
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        let mut m: BTreeMap<String, f64> = CostComponent::ALL
            .iter()
            .map(|c| (c.as_str().to_string(), self.component(*c)))
            .collect();
        m.insert("total".into(), self.total());
        m.insert("budget".into(), self.budget);
        m
    }
}
