//! Scalar outputs of a tissue concentration field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FieldSolution, QoiFunctional};

/// Linear-quadratic survival with oxygen enhancement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiobiologyParams {
    /// Dose (Gy).
    pub dose: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub m: f64,
    /// keV/um
    pub a: f64,
    /// mmHg
    pub b: f64,
    pub clonogens: f64,
    /// keV/um
    pub let_value: f64,
}

impl Default for RadiobiologyParams {
    fn default() -> Self {
        Self {
            dose: 20.0,
            alpha: 0.178,
            beta: 0.0455,
            delta: 1.38,
            m: 2.81,
            a: 522.45,
            b: 1.24,
            clonogens: 1e8,
            let_value: 2.0,
        }
    }
}

impl RadiobiologyParams {
    /// Oxygen enhancement ratio in anoxia.
    pub fn oer_anoxic(&self) -> f64 {
        let l = self.let_value.powf(self.delta);
        (l + self.m * self.a) / (self.a + l)
    }
}

pub fn oer(po2: f64, params: &RadiobiologyParams) -> f64 {
    let p = po2.max(0.0);
    (params.b * params.oer_anoxic() + p) / (params.b + p)
}

pub fn survival_fraction(dose: f64, po2: f64, params: &RadiobiologyParams) -> f64 {
    let d = dose / oer(po2, params);
    (-params.alpha * d - params.beta * d * d).exp()
}

fn weighted_mean(field: &FieldSolution, f: impl Fn(f64) -> f64) -> f64 {
    let w = field.grid.quadrature_weights();
    let total: f64 = w.iter().sum();
    w.iter().zip(&field.values).map(|(w, c)| w * f(*c)).sum::<f64>() / total
}

/// Domain-averaged partial pressure (mmHg).
pub fn qoi_avg_po2(field: &FieldSolution, alpha_ox: f64) -> f64 {
    weighted_mean(field, |c| c / alpha_ox)
}

/// Spread between the highest and lowest nodal partial pressure (mmHg).
pub fn qoi_delta_po2(field: &FieldSolution, alpha_ox: f64) -> f64 {
    let (lo, hi) = field
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    (hi - lo) / alpha_ox
}

/// Tumour control probability with clonogens spread uniformly.
pub fn qoi_tcp(field: &FieldSolution, params: &RadiobiologyParams, alpha_ox: f64) -> f64 {
    let mean_sf = weighted_mean(field, |c| survival_fraction(params.dose, c / alpha_ox, params));
    (-params.clonogens * mean_sf).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QoiKind {
    AvgPo2,
    DeltaPo2,
    Tcp,
    /// Plain quadrature mean of the field, used by synthetic models.
    FieldMean,
}

impl QoiKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            QoiKind::AvgPo2 => "avg_po2",
            QoiKind::DeltaPo2 => "delta_po2",
            QoiKind::Tcp => "tcp",
            QoiKind::FieldMean => "field_mean",
        }
    }
}

impl std::str::FromStr for QoiKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg_po2" => Ok(QoiKind::AvgPo2),
            "delta_po2" => Ok(QoiKind::DeltaPo2),
            "tcp" => Ok(QoiKind::Tcp),
            "field_mean" => Ok(QoiKind::FieldMean),
            other => Err(Error::Config(format!(
                "unknown qoi `{other}` (expected avg_po2, delta_po2, tcp or field_mean)"
            ))),
        }
    }
}

impl std::fmt::Display for QoiKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A [`QoiKind`] bound to its physical constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Qoi {
    pub kind: QoiKind,
    pub alpha_ox: f64,
    pub radiobiology: RadiobiologyParams,
}

impl Qoi {
    pub fn new(kind: QoiKind, alpha_ox: f64) -> Self {
        Self {
            kind,
            alpha_ox,
            radiobiology: RadiobiologyParams::default(),
        }
    }
}

impl QoiFunctional for Qoi {
    fn name(&self) -> &str {
        self.kind.as_str()
    }

    fn evaluate(&self, field: &FieldSolution) -> f64 {
        match self.kind {
            QoiKind::AvgPo2 => qoi_avg_po2(field, self.alpha_ox),
            QoiKind::DeltaPo2 => qoi_delta_po2(field, self.alpha_ox),
            QoiKind::Tcp => qoi_tcp(field, &self.radiobiology, self.alpha_ox),
            QoiKind::FieldMean => weighted_mean(field, |c| c),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Grid;
    use crate::stats::RngStream;

    const ALPHA_OX: f64 = 3.89e-5;

    fn grid() -> Grid {
        Grid::square(9, 1.0)
    }

    fn random_field(seed: u64) -> FieldSolution {
        let mut rng = RngStream::new(seed, "field");
        let g = grid();
        let v = (0..g.len()).map(|_| ALPHA_OX * rng.uniform_in(0.0, 80.0)).collect();
        FieldSolution::new(v, g).unwrap()
    }

    #[test]
    fn constant_field_average() {
        let f = FieldSolution::constant(ALPHA_OX * 30.0, grid());
        assert!((qoi_avg_po2(&f, ALPHA_OX) - 30.0).abs() < 1e-12);
        assert_eq!(qoi_delta_po2(&f, ALPHA_OX), 0.0);
    }

    #[test]
    fn linear_field_average_is_endpoint_mean() {
        let g = grid();
        let v = (0..g.len()).map(|k| ALPHA_OX * (10.0 + 20.0 * g.coords(k).0)).collect();
        let f = FieldSolution::new(v, g).unwrap();
        assert!((qoi_avg_po2(&f, ALPHA_OX) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn average_matches_direct_sum() {
        let f = random_field(4);
        let g = f.grid;
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let wx = if i == 0 || i == g.nx - 1 { 0.5 } else { 1.0 };
                let wy = if j == 0 || j == g.ny - 1 { 0.5 } else { 1.0 };
                num += wx * wy * f.values[g.index(i, j)] / ALPHA_OX;
                den += wx * wy;
            }
        }
        assert!((qoi_avg_po2(&f, ALPHA_OX) - num / den).abs() < 1e-12 * (num / den));
    }

    #[test]
    fn delta_single_raised_node() {
        let mut f = FieldSolution::constant(ALPHA_OX * 12.0, grid());
        f.values[17] += ALPHA_OX * 5.0;
        assert!((qoi_delta_po2(&f, ALPHA_OX) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn delta_matches_scan() {
        let f = random_field(8);
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for v in &f.values {
            if *v < lo {
                lo = *v;
            }
            if *v > hi {
                hi = *v;
            }
        }
        assert_eq!(qoi_delta_po2(&f, ALPHA_OX), (hi - lo) / ALPHA_OX);
    }

    #[test]
    fn oer_reference_values() {
        let p = RadiobiologyParams::default();
        let l = 2f64.powf(1.38);
        let oer0 = (l + 2.81 * 522.45) / (522.45 + l);
        assert!((oer(0.0, &p) - oer0).abs() < 1e-15);
        assert!((oer(0.0, &p) - 2.8010278384191754).abs() < 1e-13);
        assert!((oer(1e6, &p) - 1.0).abs() < 1e-3);
        assert!((oer(p.b, &p) - (oer0 + 1.0) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn survival_reference_values() {
        let p = RadiobiologyParams::default();
        assert_eq!(survival_fraction(0.0, 30.0, &p), 1.0);
        let zero = RadiobiologyParams {
            alpha: 0.0,
            beta: 0.0,
            ..p
        };
        assert_eq!(survival_fraction(20.0, 30.0, &zero), 1.0);
        let oer30 = (1.24 * oer(0.0, &p) + 30.0) / (1.24 + 30.0);
        let d = 20.0 / oer30;
        let want = (-0.178 * d - 0.0455 * d * d).exp();
        assert!((survival_fraction(20.0, 30.0, &p) / want - 1.0).abs() < 1e-13);
    }

    #[test]
    fn tcp_closed_forms() {
        let p = RadiobiologyParams::default();
        let f = FieldSolution::constant(ALPHA_OX * 30.0, grid());
        let want = (-1e8 * survival_fraction(20.0, 30.0, &p)).exp();
        assert!((qoi_tcp(&f, &p, ALPHA_OX) - want).abs() < 1e-10);
        let lethal = RadiobiologyParams {
            alpha: f64::INFINITY,
            ..p
        };
        assert_eq!(qoi_tcp(&random_field(1), &lethal, ALPHA_OX), 1.0);
    }

    #[test]
    fn tcp_matches_double_loop() {
        let p = RadiobiologyParams::default();
        let f = random_field(2);
        let g = f.grid;
        let mut integral = 0.0;
        let h2 = g.spacing * g.spacing;
        for j in 0..g.ny {
            for i in 0..g.nx {
                let wx = if i == 0 || i == g.nx - 1 { 0.5 } else { 1.0 };
                let wy = if j == 0 || j == g.ny - 1 { 0.5 } else { 1.0 };
                let po2 = f.values[g.index(i, j)] / ALPHA_OX;
                let e = (p.b * oer(0.0, &p) + po2) / (p.b + po2);
                let dd = p.dose / e;
                let sf = (-p.alpha * dd - p.beta * dd * dd).exp();
                integral += wx * wy * h2 * (p.clonogens / g.area()) * sf;
            }
        }
        let want = (-integral).exp();
        assert!((qoi_tcp(&f, &p, ALPHA_OX) - want).abs() < 1e-12);
    }

    #[test]
    fn qoi_names_parse() {
        for k in [QoiKind::AvgPo2, QoiKind::DeltaPo2, QoiKind::Tcp, QoiKind::FieldMean] {
            assert_eq!(k.as_str().parse::<QoiKind>().unwrap(), k);
        }
        assert!("mean".parse::<QoiKind>().is_err());
    }
}
