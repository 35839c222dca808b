//! Gaussian FOM/ROM pair with a planted correlation law, for fast campaign
//! and replication tests.
//!
//! A sample carries two independent standard normals `(z1, z2)`. The FOM
//! field is the single value `mean + sigma0 z1`; a surrogate trained on `n`
//! samples returns `mean + sigma0 (rho z1 + sqrt(1 - rho^2) z2)` with
//! `1 - rho(n)^2 = c1 n^-zeta + c2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    FieldSolution, ForwardModel, Grid, MultiFidelityModel, ParameterSample, Snapshot, Surrogate,
};
use crate::stats::RngStream;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticModel {
    pub mean: f64,
    pub sigma0: f64,
    pub zeta: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for SyntheticModel {
    fn default() -> Self {
        Self {
            mean: 30.0,
            sigma0: 4.0,
            zeta: 1.0,
            c1: 2.0,
            c2: 0.05,
        }
    }
}

impl SyntheticModel {
    /// Population correlation of a surrogate trained on `n` samples.
    pub fn rho(&self, n: usize) -> f64 {
        let decor = (self.c1 * (n.max(1) as f64).powf(-self.zeta) + self.c2).clamp(0.0, 1.0);
        (1.0 - decor).sqrt()
    }

    pub fn validate_config(&self) -> Result<()> {
        let ok = self.mean.is_finite()
            && self.sigma0 > 0.0
            && self.sigma0.is_finite()
            && self.zeta > 0.0
            && self.c1 >= 0.0
            && (0.0..1.0).contains(&self.c2);
        if !ok {
            return Err(Error::Config(format!("invalid synthetic model {self:?}")));
        }
        Ok(())
    }
}

fn single_node() -> Grid {
    Grid::new(1, 1, 1.0)
}

impl ForwardModel for SyntheticModel {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn solver_tag(&self) -> String {
        "synthetic-gaussian/1".into()
    }

    fn grid(&self) -> Grid {
        single_node()
    }

    fn sample_parameters(&self, rng: &mut RngStream, id: u64) -> ParameterSample {
        let z = vec![rng.standard_normal(), rng.standard_normal()];
        ParameterSample::new(id, z, rng)
    }

    fn validate(&self, mu: &ParameterSample) -> Result<()> {
        if mu.physical.len() != 2 || mu.physical.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "synthetic sample {} needs two finite normals",
                mu.id
            )));
        }
        Ok(())
    }

    fn solve(&self, mu: &ParameterSample) -> Result<FieldSolution> {
        Ok(FieldSolution::constant(self.mean + self.sigma0 * mu.physical[0], single_node()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSurrogate {
    pub mean: f64,
    pub sigma0: f64,
    pub rho: f64,
}

impl Surrogate for SyntheticSurrogate {
    fn evaluate(&self, mu: &ParameterSample) -> Result<FieldSolution> {
        let (z1, z2) = (mu.physical[0], mu.physical[1]);
        let v = self.mean + self.sigma0 * (self.rho * z1 + (1.0 - self.rho * self.rho).sqrt() * z2);
        Ok(FieldSolution::constant(v, single_node()))
    }
}

impl MultiFidelityModel for SyntheticModel {
    type Rom = SyntheticSurrogate;

    fn train_surrogate(&self, training: &[Snapshot]) -> Result<SyntheticSurrogate> {
        if training.is_empty() {
            return Err(Error::InsufficientData("surrogate needs at least one snapshot".into()));
        }
        Ok(SyntheticSurrogate {
            mean: self.mean,
            sigma0: self.sigma0,
            rho: self.rho(training.len()),
        })
    }
}
