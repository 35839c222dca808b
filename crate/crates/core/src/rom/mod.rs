//! POD surrogate: `u ~ V M_rb(mu) + M_c(d, eta)`.
//!
//! `M_rb` is a ridge map from physical and geometric features to POD
//! coefficients. `M_c` is a per-node affine correction driven by the
//! extravascular distance `d` and the inlet indicator `eta`, fitted to the
//! residual left by the frozen `M_rb`.

pub mod closure;
pub mod pod;
pub mod ridge;

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use closure::{fit_closure, mixed_loss, mixed_norm, ClosureModel};
pub use pod::{compute_pod_basis, pod_basis_from_columns, PodBasis};
pub use ridge::{fit_ridge, mean_norm_loss, RidgeRegressor};

use crate::error::{Error, Result};
use crate::model::{FieldSolution, ForwardModel, ParameterSample, Snapshot, Surrogate};
use crate::snapshot::{BinReader, BinWriter};
use crate::testbed::{extravascular_distance, inlet_indicator, OxygenModel};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RomSettings {
    /// POD modes.
    pub k: usize,
    /// Weight of the 2-norm in the closure loss.
    pub xi: f64,
    pub closure_epochs: usize,
}

impl Default for RomSettings {
    fn default() -> Self {
        Self {
            k: 10,
            xi: 0.75,
            closure_epochs: 10,
        }
    }
}

impl RomSettings {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("pod rank k must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.xi) {
            return Err(Error::Config(format!("xi = {} outside [0, 1]", self.xi)));
        }
        Ok(())
    }
}

/// Number of geometric summary features.
pub const GEOMETRY_FEATURES: usize = 13;
const HISTOGRAM_BINS: usize = 8;
/// Upper edge of the distance histogram, in domain sides.
const HISTOGRAM_RANGE: f64 = 0.25;

/// Node fields and feature vector the surrogate consumes for one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleInputs {
    pub features: Vec<f64>,
    pub d: Vec<f64>,
    pub eta: Vec<f64>,
}

/// Distance histogram (8 bins), mean and max distance, inlet node count and
/// inlet centroid.
pub fn geometry_features(d: &[f64], eta: &[f64], inlets: &[[f64; 2]]) -> [f64; GEOMETRY_FEATURES] {
    let mut f = [0.0; GEOMETRY_FEATURES];
    let n = d.len() as f64;
    let width = HISTOGRAM_RANGE / HISTOGRAM_BINS as f64;
    for &v in d {
        let bin = ((v / width) as usize).min(HISTOGRAM_BINS - 1);
        f[bin] += 1.0 / n;
    }
    f[8] = d.iter().sum::<f64>() / n;
    f[9] = d.iter().cloned().fold(0.0, f64::max);
    f[10] = eta.iter().sum();
    if !inlets.is_empty() {
        let m = inlets.len() as f64;
        f[11] = inlets.iter().map(|p| p[0]).sum::<f64>() / m;
        f[12] = inlets.iter().map(|p| p[1]).sum::<f64>() / m;
    }
    f
}

/// `[physical, geometry, geometry (x) physical]`.
pub fn feature_vector(physical: &[f64], geometry: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(physical.len() + geometry.len() * (1 + physical.len()));
    out.extend_from_slice(physical);
    out.extend_from_slice(geometry);
    for g in geometry {
        for p in physical {
            out.push(g * p);
        }
    }
    out
}

pub fn sample_inputs(model: &OxygenModel, mu: &ParameterSample) -> Result<SampleInputs> {
    let layout = model.layout(mu)?;
    let grid = model.unit_grid();
    let d = extravascular_distance(&layout, &grid);
    let eta = inlet_indicator(&layout, &grid);
    let geometry = geometry_features(&d, &eta, &layout.inlets);
    Ok(SampleInputs {
        features: feature_vector(&mu.physical, &geometry),
        d,
        eta,
    })
}

/// Fits `M_rb` on the projected snapshot coefficients.
pub fn train_coefficient_regressor(inputs: &[SampleInputs], snapshots: &[Snapshot], basis: &PodBasis) -> Result<RidgeRegressor> {
    let x: Vec<Vec<f64>> = inputs.iter().map(|s| s.features.clone()).collect();
    let y: Vec<Vec<f64>> = snapshots.iter().map(|s| basis.project(&s.field.values)).collect();
    fit_ridge(&x, &y)
}

/// Fits `M_c` on the residual left by the frozen coefficient map.
pub fn train_closure(
    inputs: &[SampleInputs],
    snapshots: &[Snapshot],
    basis: &PodBasis,
    coeff: &RidgeRegressor,
    xi: f64,
    epochs: usize,
) -> Result<ClosureModel> {
    let residuals: Vec<Vec<f64>> = inputs
        .iter()
        .zip(snapshots)
        .map(|(inp, s)| {
            let rb = basis.expand(&coeff.predict(&inp.features));
            s.field.values.iter().zip(&rb).map(|(u, r)| u - r).collect()
        })
        .collect();
    let d: Vec<Vec<f64>> = inputs.iter().map(|s| s.d.clone()).collect();
    let eta: Vec<Vec<f64>> = inputs.iter().map(|s| s.eta.clone()).collect();
    fit_closure(&residuals, &d, &eta, xi, epochs)
}

/// Trained surrogate of the oxygen testbed.
#[derive(Clone, Debug, PartialEq)]
pub struct SurrogateModel {
    pub model: OxygenModel,
    pub basis: PodBasis,
    pub coeff: RidgeRegressor,
    pub closure: ClosureModel,
    pub xi: f64,
    pub trained_on: usize,
    /// Declared training cost, filled in by the caller that charges it.
    pub training_cost: f64,
}

impl SurrogateModel {
    pub fn train(model: &OxygenModel, training: &[Snapshot], settings: &RomSettings) -> Result<Self> {
        settings.validate()?;
        if training.is_empty() {
            return Err(Error::InsufficientData("surrogate needs at least one snapshot".into()));
        }
        let inputs = training
            .iter()
            .map(|s| sample_inputs(model, &s.sample))
            .collect::<Result<Vec<_>>>()?;
        let basis = compute_pod_basis(training, settings.k.min(training.len()))?;
        let coeff = train_coefficient_regressor(&inputs, training, &basis)?;
        let closure = train_closure(&inputs, training, &basis, &coeff, settings.xi, settings.closure_epochs)?;
        Ok(Self {
            model: model.clone(),
            basis,
            coeff,
            closure,
            xi: settings.xi,
            trained_on: training.len(),
            training_cost: 0.0,
        })
    }

    /// Field from precomputed inputs.
    pub fn evaluate_inputs(&self, inputs: &SampleInputs) -> Vec<f64> {
        let mut u = self.basis.expand(&self.coeff.predict(&inputs.features));
        for (ui, ci) in u.iter_mut().zip(self.closure.apply(&inputs.d, &inputs.eta)) {
            *ui += ci;
        }
        u
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BinWriter::new(std::io::BufWriter::new(file), path);
        self.write_to(&mut w)?;
        w.finish()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BinReader::new(std::io::BufReader::new(file), path);
        Self::read_from(&mut r)
    }

    fn write_to<W: Write>(&self, w: &mut BinWriter<W>) -> Result<()> {
        w.bytes(ROM_MAGIC)?;
        w.u32(ROM_VERSION)?;
        w.u32(self.basis.n_h() as u32)?;
        w.u32(self.basis.k() as u32)?;
        w.u32(self.coeff.input_dim() as u32)?;
        let meta = serde_json::to_string(&RomMeta {
            model: self.model.clone(),
            xi: self.xi,
            trained_on: self.trained_on,
            training_cost: self.training_cost,
        })?;
        w.string(&meta)?;
        w.f64s(self.basis.v.as_slice())?;
        w.f64s(&self.basis.singular_values)?;
        w.f64s(&self.coeff.mean_x)?;
        w.f64s(&self.coeff.scale_x)?;
        w.f64s(self.coeff.weights.as_slice())?;
        w.f64s(&self.coeff.intercept)?;
        w.f64(self.coeff.lambda)?;
        w.f64s(&self.closure.a)?;
        w.f64s(&self.closure.b)?;
        w.f64s(&self.closure.c)?;
        w.f64(self.closure.d_scale)
    }

    fn read_from<R: Read>(r: &mut BinReader<R>) -> Result<Self> {
        r.magic(ROM_MAGIC)?;
        r.version(ROM_VERSION)?;
        let n_h = r.u32()? as usize;
        let k = r.u32()? as usize;
        let p = r.u32()? as usize;
        let meta: RomMeta = serde_json::from_str(&r.string()?).map_err(|e| r.corrupt(e.to_string()))?;
        let v = DMatrix::from_vec(n_h, k, r.f64s(n_h * k)?);
        let singular_values = r.f64s(k)?;
        let mean_x = r.f64s(p)?;
        let scale_x = r.f64s(p)?;
        let weights = DMatrix::from_vec(p, k, r.f64s(p * k)?);
        let intercept = r.f64s(k)?;
        let lambda = r.f64()?;
        let a = r.f64s(n_h)?;
        let b = r.f64s(n_h)?;
        let c = r.f64s(n_h)?;
        let d_scale = r.f64()?;
        Ok(Self {
            model: meta.model,
            basis: PodBasis { v, singular_values },
            coeff: RidgeRegressor {
                mean_x,
                scale_x,
                weights,
                intercept,
                lambda,
            },
            closure: ClosureModel { a, b, c, d_scale },
            xi: meta.xi,
            trained_on: meta.trained_on,
            training_cost: meta.training_cost,
        })
    }
}

const ROM_MAGIC: &[u8; 8] = b"MFUQROM\0";
const ROM_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct RomMeta {
    model: OxygenModel,
    xi: f64,
    trained_on: usize,
    training_cost: f64,
}

impl Surrogate for SurrogateModel {
    fn evaluate(&self, mu: &ParameterSample) -> Result<FieldSolution> {
        rom_evaluate(self, mu)
    }
}

/// `V M_rb(mu) + M_c(d, eta)` for an in-range sample.
pub fn rom_evaluate(model: &SurrogateModel, mu: &ParameterSample) -> Result<FieldSolution> {
    model.model.validate(mu)?;
    let inputs = sample_inputs(&model.model, mu)?;
    FieldSolution::new(model.evaluate_inputs(&inputs), model.model.unit_grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::QoiFunctional;
    use crate::stats::{sample_correlation, RngStream};
    use crate::testbed::{Qoi, QoiKind};

    fn small_model() -> OxygenModel {
        OxygenModel {
            nodes: 20,
            ..Default::default()
        }
    }

    fn snapshots(model: &OxygenModel, n: usize, label: &str) -> Vec<Snapshot> {
        (0..n)
            .map(|i| {
                let mu = model.sample_parameters(&mut RngStream::new(3, format!("{label}/{i}")), i as u64);
                let field = model.solve(&mu).unwrap();
                Snapshot { sample: mu, field }
            })
            .collect()
    }

    #[test]
    fn feature_layout() {
        let f = feature_vector(&[1.0, 2.0, 3.0], &[1.0; GEOMETRY_FEATURES]);
        assert_eq!(f.len(), 3 + 13 + 39);
        assert_eq!(&f[16..19], &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_closure_with_unit_coefficients_gives_first_mode() {
        let model = small_model();
        let train = snapshots(&model, 12, "t");
        let mut rom = SurrogateModel::train(&model, &train, &RomSettings::default()).unwrap();
        rom.closure = ClosureModel::zero(rom.basis.n_h());
        rom.coeff = RidgeRegressor::zero(rom.coeff.input_dim(), rom.basis.k());
        rom.coeff.intercept[0] = 1.0;
        let out = rom_evaluate(&rom, &train[0].sample).unwrap();
        for (i, v) in out.values.iter().enumerate() {
            assert_eq!(*v, rom.basis.v[(i, 0)]);
        }
    }

    #[test]
    fn frozen_coefficients_across_closure_training() {
        let model = small_model();
        let train = snapshots(&model, 15, "t");
        let inputs: Vec<_> = train.iter().map(|s| sample_inputs(&model, &s.sample).unwrap()).collect();
        let basis = compute_pod_basis(&train, 5).unwrap();
        let coeff = train_coefficient_regressor(&inputs, &train, &basis).unwrap();
        let before = coeff.clone();
        let _ = train_closure(&inputs, &train, &basis, &coeff, 0.75, 10).unwrap();
        assert_eq!(before.weights.as_slice(), coeff.weights.as_slice());
        assert_eq!(before.intercept, coeff.intercept);
    }

    #[test]
    fn surrogate_round_trips_through_file() {
        let model = small_model();
        let train = snapshots(&model, 10, "t");
        let mut rom = SurrogateModel::train(&model, &train, &RomSettings::default()).unwrap();
        rom.training_cost = 3.5;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rom.bin");
        rom.save(&path).unwrap();
        assert_eq!(SurrogateModel::load(&path).unwrap(), rom);
    }

    #[test]
    fn out_of_range_sample_rejected() {
        let model = small_model();
        let train = snapshots(&model, 6, "t");
        let rom = SurrogateModel::train(&model, &train, &RomSettings::default()).unwrap();
        let mut mu = train[0].sample.clone();
        mu.physical[2] = 1.0;
        assert!(rom_evaluate(&rom, &mu).is_err());
    }

    #[test]
    fn surrogate_tracks_fom_qoi() {
        let model = small_model();
        let train = snapshots(&model, 60, "t");
        let test = snapshots(&model, 40, "h");
        let rom = SurrogateModel::train(&model, &train, &RomSettings::default()).unwrap();
        let q = Qoi::new(QoiKind::AvgPo2, model.constants.alpha_ox);
        let fom: Vec<f64> = test.iter().map(|s| q.evaluate(&s.field)).collect();
        let lo: Vec<f64> = test
            .iter()
            .map(|s| q.evaluate(&rom_evaluate(&rom, &s.sample).unwrap()))
            .collect();
        let rho = sample_correlation(&fom, &lo).unwrap();
        assert!(rho > 0.8, "rho {rho}");
    }
}
