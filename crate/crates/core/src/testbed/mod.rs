//! Steady 2D tissue-oxygen model with synthetic vascular sources.
//!
//! The layout lives on the unit square; the PDE is solved on that square
//! scaled to `side` metres. Vessels exchange oxygen with the tissue through
//! their wall at a fixed inlet concentration, tissue consumes it with
//! Michaelis-Menten kinetics, and the outer boundary relaxes towards a
//! far-field value.

pub mod network;
pub mod qoi;
pub mod solver;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use network::{
    deposit_length, extravascular_distance, generate_network, inlet_indicator, Segment,
    VascularLayout,
};
pub use qoi::{
    oer, qoi_avg_po2, qoi_delta_po2, qoi_tcp, survival_fraction, Qoi, QoiKind, RadiobiologyParams,
};
pub use solver::{ReactionDiffusion, SolverSettings};

use crate::error::{Error, Result};
use crate::model::{FieldSolution, ForwardModel, Grid, MultiFidelityModel, ParameterSample, Snapshot};
use crate::rom::{RomSettings, SurrogateModel};
use crate::stats::RngStream;

/// Fixed physical constants of the tissue problem (SI, concentrations in
/// mL O2 per mL).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TissueConstants {
    /// Diffusion coefficient (m^2/s).
    pub d_t: f64,
    /// Solubility ((mL O2/mL)/mmHg).
    pub alpha_ox: f64,
    /// Half-saturation pressure of consumption (mmHg).
    pub p_m50: f64,
    /// Vessel radius (m).
    pub radius: f64,
    /// Boundary conductivity (m/s).
    pub tau_o2: f64,
    /// Far-field concentration.
    pub c_0t: f64,
    /// Physical side of the square domain (m).
    pub side: f64,
    /// Slab thickness converting line sources to areal ones (m).
    pub thickness: f64,
}

impl Default for TissueConstants {
    fn default() -> Self {
        Self {
            d_t: 2.41e-9,
            alpha_ox: 3.89e-5,
            p_m50: 27.0,
            radius: 4e-6,
            tau_o2: 1e-5,
            c_0t: 1.5e-3,
            side: 1e-3,
            thickness: 0.15e-3,
        }
    }
}

/// Uniform sampling ranges `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParameterRanges {
    /// mL O2 / (cm^3 s)
    pub v_max: [f64; 2],
    /// mL O2 / mL blood
    pub c_in: [f64; 2],
    /// m/s
    pub p_o2: [f64; 2],
    /// 1/m
    pub density_sv: [f64; 2],
    pub seeds_fraction: [f64; 2],
}

impl Default for ParameterRanges {
    fn default() -> Self {
        Self {
            v_max: [0.40e-4, 2.40e-4],
            c_in: [2.25e-3, 3.75e-3],
            p_o2: [0.35e-4, 3.00e-4],
            density_sv: [5e3, 7e3],
            seeds_fraction: [0.0, 0.75],
        }
    }
}

impl ParameterRanges {
    fn all(&self) -> [(&'static str, [f64; 2]); 5] {
        [
            ("v_max", self.v_max),
            ("c_in", self.c_in),
            ("p_o2", self.p_o2),
            ("density_sv", self.density_sv),
            ("seeds_fraction", self.seeds_fraction),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in self.all() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
                return Err(Error::Config(format!("bad range for {name}: [{lo}, {hi}]")));
            }
        }
        if self.seeds_fraction[1] >= 1.0 {
            return Err(Error::Config("seeds_fraction must stay below 1".into()));
        }
        Ok(())
    }
}

/// One fully specified tissue solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TissueProblem {
    pub constants: TissueConstants,
    pub v_max: f64,
    pub p_o2: f64,
    pub c_in: f64,
    pub grid: Grid,
}

/// Solves the tissue problem around `layout`.
pub fn fom_solve(problem: &TissueProblem, layout: &VascularLayout) -> Result<FieldSolution> {
    fom_solve_with(problem, layout, &SolverSettings::default())
}

pub fn fom_solve_with(
    problem: &TissueProblem,
    layout: &VascularLayout,
    settings: &SolverSettings,
) -> Result<FieldSolution> {
    let c = &problem.constants;
    let grid = problem.grid;
    // wall exchange per metre of vessel, spread over the slab thickness
    let per_length = 2.0 * std::f64::consts::PI * c.radius * problem.p_o2 / c.thickness;
    let exchange = deposit_length(layout, &grid)
        .into_iter()
        .map(|l| per_length * l * c.side)
        .collect();
    // V_max is per cm^3; the model works per m^3 of tissue, same ratio
    let system = ReactionDiffusion::uniform(
        grid,
        c.side,
        c.d_t,
        problem.v_max,
        c.alpha_ox * c.p_m50,
        c.tau_o2,
        c.c_0t,
        exchange,
        problem.c_in,
    );
    let start = vec![c.c_0t.min(problem.c_in); grid.len()];
    let values = system.solve(&start, settings)?;
    FieldSolution::new(values, grid)
}

/// The oxygen testbed as a [`ForwardModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OxygenModel {
    pub constants: TissueConstants,
    pub ranges: ParameterRanges,
    /// Nodes per side.
    pub nodes: usize,
    #[serde(skip)]
    pub solver: SolverSettings,
    /// Surrogate settings; campaigns set these from their own config.
    #[serde(skip)]
    pub rom: RomSettings,
}

impl Default for OxygenModel {
    fn default() -> Self {
        Self {
            constants: TissueConstants::default(),
            ranges: ParameterRanges::default(),
            nodes: 40,
            solver: SolverSettings::default(),
            rom: RomSettings::default(),
        }
    }
}

/// Relative slack for range checks on values read back from text.
const RANGE_SLACK: f64 = 1e-12;

impl OxygenModel {
    pub fn unit_grid(&self) -> Grid {
        Grid::square(self.nodes, 1.0)
    }

    pub fn problem(&self, mu: &ParameterSample) -> TissueProblem {
        TissueProblem {
            constants: self.constants,
            v_max: mu.physical[0],
            c_in: mu.physical[1],
            p_o2: mu.physical[2],
            grid: self.unit_grid(),
        }
    }

    /// The sample's layout, regenerated from its stream if the handle is absent.
    pub fn layout(&self, mu: &ParameterSample) -> Result<Arc<VascularLayout>> {
        if let Some(l) = &mu.network {
            return Ok(l.clone());
        }
        if mu.network_params.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "sample {} carries no network parameters",
                mu.id
            )));
        }
        let mut rng = RngStream::new(mu.stream_seed, mu.stream_label.clone()).child("network");
        Ok(Arc::new(generate_network(
            mu.network_params[0],
            mu.network_params[1],
            &mut rng,
        )))
    }

    pub fn validate_config(&self) -> Result<()> {
        self.ranges.validate()?;
        if self.nodes < 3 {
            return Err(Error::Config("testbed needs at least 3 nodes per side".into()));
        }
        self.rom.validate()
    }
}

impl ForwardModel for OxygenModel {
    fn name(&self) -> &str {
        "oxygen"
    }

    fn solver_tag(&self) -> String {
        format!("oxygen-fv-picard/1 nodes={}", self.nodes)
    }

    fn grid(&self) -> Grid {
        self.unit_grid()
    }

    fn sample_parameters(&self, rng: &mut RngStream, id: u64) -> ParameterSample {
        let r = &self.ranges;
        let physical = vec![
            rng.uniform_in(r.v_max[0], r.v_max[1]),
            rng.uniform_in(r.c_in[0], r.c_in[1]),
            rng.uniform_in(r.p_o2[0], r.p_o2[1]),
        ];
        let density = rng.uniform_in(r.density_sv[0], r.density_sv[1]);
        let seeds = rng.uniform_in(r.seeds_fraction[0], r.seeds_fraction[1]);
        let layout = generate_network(density, seeds, &mut rng.child("network"));
        let mut mu = ParameterSample::new(id, physical, rng);
        mu.network_params = vec![density, seeds];
        mu.network = Some(Arc::new(layout));
        mu
    }

    fn validate(&self, mu: &ParameterSample) -> Result<()> {
        if mu.physical.len() != 3 || mu.network_params.len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "sample {} has {} physical and {} network values (expected 3 and 2)",
                mu.id,
                mu.physical.len(),
                mu.network_params.len()
            )));
        }
        let values = [
            mu.physical[0],
            mu.physical[1],
            mu.physical[2],
            mu.network_params[0],
            mu.network_params[1],
        ];
        for ((name, [lo, hi]), v) in self.ranges.all().iter().zip(values) {
            let slack = RANGE_SLACK * hi.abs().max(lo.abs());
            if !(v >= lo - slack && v <= hi + slack) {
                return Err(Error::InvalidParameter(format!(
                    "sample {}: {name} = {v} outside [{lo}, {hi}]",
                    mu.id
                )));
            }
        }
        Ok(())
    }

    fn solve(&self, mu: &ParameterSample) -> Result<FieldSolution> {
        let layout = self.layout(mu)?;
        fom_solve_with(&self.problem(mu), &layout, &self.solver)
    }

    fn rehydrate(&self, mu: &mut ParameterSample) -> Result<()> {
        if mu.network.is_none() {
            mu.network = Some(self.layout(mu)?);
        }
        Ok(())
    }
}

impl MultiFidelityModel for OxygenModel {
    type Rom = SurrogateModel;

    fn train_surrogate(&self, training: &[Snapshot]) -> Result<SurrogateModel> {
        SurrogateModel::train(self, training, &self.rom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QoiFunctional;

    fn corner_sample(model: &OxygenModel, mask: u32) -> ParameterSample {
        let r = model.ranges;
        let pick = |bit: u32, range: [f64; 2]| if mask & (1 << bit) != 0 { range[1] } else { range[0] };
        let mut mu = ParameterSample::new(
            mask as u64,
            vec![pick(0, r.v_max), pick(1, r.c_in), pick(2, r.p_o2)],
            &RngStream::new(77, format!("corner/{mask}")),
        );
        mu.network_params = vec![pick(3, r.density_sv), pick(4, r.seeds_fraction)];
        mu
    }

    #[test]
    fn constant_state_without_sinks_or_sources() {
        let grid = Grid::square(15, 1.0);
        let problem = TissueProblem {
            constants: TissueConstants {
                c_0t: 2e-3,
                ..Default::default()
            },
            v_max: 0.0,
            p_o2: 1e-4,
            c_in: 3e-3,
            grid,
        };
        let empty = VascularLayout {
            segments: vec![],
            inlets: vec![[0.5, 0.5]],
            density_sv: 5e3,
            seeds_fraction: 0.0,
        };
        let f = fom_solve(&problem, &empty).unwrap();
        for v in f.values {
            assert!((v - 2e-3).abs() < 1e-14);
        }
    }

    #[test]
    fn mirror_symmetric_layout_gives_symmetric_field() {
        let grid = Grid::square(40, 1.0);
        let seg = |x: f64| Segment {
            a: [x, 0.1],
            b: [x, 0.9],
        };
        let layout = VascularLayout {
            segments: vec![seg(0.3), seg(1.0 - 0.3)],
            inlets: vec![[0.3, 0.1], [0.7, 0.1]],
            density_sv: 5e3,
            seeds_fraction: 0.0,
        };
        let problem = TissueProblem {
            constants: TissueConstants::default(),
            v_max: 1.5e-4,
            p_o2: 2e-4,
            c_in: 3e-3,
            grid,
        };
        let f = fom_solve(&problem, &layout).unwrap();
        let scale = f.values.iter().cloned().fold(0.0, f64::max);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let a = f.values[grid.index(i, j)];
                let b = f.values[grid.index(grid.nx - 1 - i, j)];
                assert!((a - b).abs() <= 1e-8 * scale, "({i},{j}) {a} vs {b}");
            }
        }
    }

    #[test]
    fn every_range_corner_converges() {
        let model = OxygenModel::default();
        for mask in 0..32 {
            let mu = corner_sample(&model, mask);
            model.validate(&mu).unwrap();
            let f = model.solve(&mu).unwrap();
            let hi = mu.physical[1].max(model.constants.c_0t);
            assert!(f.values.iter().all(|&v| v >= -1e-12 && v <= hi + 1e-12));
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let model = OxygenModel::default();
        let mu = model.sample_parameters(&mut RngStream::new(5, "s/0"), 0);
        assert_eq!(model.solve(&mu).unwrap(), model.solve(&mu).unwrap());
    }

    #[test]
    fn rehydrated_sample_matches_original() {
        let model = OxygenModel::default();
        let mu = model.sample_parameters(&mut RngStream::new(5, "s/3"), 3);
        let mut bare = mu.clone();
        bare.network = None;
        model.rehydrate(&mut bare).unwrap();
        assert_eq!(bare.network.as_deref(), mu.network.as_deref());
    }

    #[test]
    fn out_of_range_sample_rejected() {
        let model = OxygenModel::default();
        let mut mu = corner_sample(&model, 0);
        mu.physical[0] = 1.0;
        assert!(matches!(model.validate(&mu), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn sampled_values_in_range() {
        let model = OxygenModel::default();
        let mut rng = RngStream::new(1, "draws");
        for id in 0..200 {
            let mu = model.sample_parameters(&mut rng, id);
            model.validate(&mu).unwrap();
        }
    }

    #[test]
    fn qoi_values_are_plausible() {
        let model = OxygenModel::default();
        let mu = model.sample_parameters(&mut RngStream::new(11, "s/1"), 1);
        let f = model.solve(&mu).unwrap();
        let avg = Qoi::new(QoiKind::AvgPo2, model.constants.alpha_ox).evaluate(&f);
        assert!(avg > 0.0 && avg < 100.0, "avg pO2 {avg}");
    }
}
