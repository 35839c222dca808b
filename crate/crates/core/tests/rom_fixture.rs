//! Surrogate behaviour on the default oxygen fixture.

use std::sync::OnceLock;
use std::time::Instant;

use mfuq::model::{ForwardModel, MultiFidelityModel, QoiFunctional, Snapshot, Surrogate};
use mfuq::policy::fit_training_time_trend;
use mfuq::rom::{sample_inputs, ClosureModel, SurrogateModel};
use mfuq::stats::{sample_correlation, RngStream};
use mfuq::testbed::{OxygenModel, Qoi, QoiKind};

const SEEDS: u64 = 20;
const POOL: usize = 300;
const HELD_OUT: std::ops::Range<usize> = 200..300;

fn solve_pool(model: &OxygenModel, seed: u64, n: usize) -> Vec<Snapshot> {
    (0..n)
        .map(|i| {
            let mu = model.sample_parameters(&mut RngStream::new(seed, format!("rom/{i}")), i as u64);
            Snapshot {
                field: model.solve(&mu).unwrap(),
                sample: mu,
            }
        })
        .collect()
}

fn pools() -> &'static Vec<Vec<Snapshot>> {
    static POOLS: OnceLock<Vec<Vec<Snapshot>>> = OnceLock::new();
    POOLS.get_or_init(|| {
        let model = OxygenModel::default();
        (0..SEEDS).map(|s| solve_pool(&model, s, POOL)).collect()
    })
}

fn held_out_rho(model: &OxygenModel, rom: &SurrogateModel, held: &[Snapshot]) -> f64 {
    let q = Qoi::new(QoiKind::AvgPo2, model.constants.alpha_ox);
    let fom: Vec<f64> = held.iter().map(|s| q.evaluate(&s.field)).collect();
    let sur: Vec<f64> = held
        .iter()
        .map(|s| q.evaluate(&rom.evaluate(&s.sample).unwrap()))
        .collect();
    sample_correlation(&fom, &sur).unwrap()
}

fn max_error(rom: &SurrogateModel, model: &OxygenModel, s: &Snapshot) -> f64 {
    let u = rom.evaluate_inputs(&sample_inputs(model, &s.sample).unwrap());
    u.iter()
        .zip(&s.field.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn correlation_holds_up_with_more_training_data() {
    let model = OxygenModel::default();
    let mut worse = Vec::new();
    let mut at_200 = Vec::new();
    for (seed, pool) in pools().iter().enumerate() {
        let held = &pool[HELD_OUT];
        let r100 = held_out_rho(&model, &model.train_surrogate(&pool[..100]).unwrap(), held);
        let r200 = held_out_rho(&model, &model.train_surrogate(&pool[..200]).unwrap(), held);
        at_200.push(r200);
        if r200 < r100 - 0.02 {
            worse.push((seed, r100, r200));
        }
    }
    assert!(worse.is_empty(), "rho(200) fell below rho(100) - 0.02: {worse:?}");
    assert!(at_200.iter().all(|&r| r > 0.9), "rho(200) = {at_200:?}");
}

#[test]
fn closure_reduces_held_out_max_error() {
    let model = OxygenModel::default();
    let mut improved = 0;
    for pool in pools() {
        let rom = model.train_surrogate(&pool[..200]).unwrap();
        let mut bare = rom.clone();
        bare.closure = ClosureModel::zero(rom.basis.n_h());
        let held = &pool[HELD_OUT];
        let with: f64 = held.iter().map(|s| max_error(&rom, &model, s)).sum();
        let without: f64 = held.iter().map(|s| max_error(&bare, &model, s)).sum();
        if with <= without {
            improved += 1;
        }
    }
    assert!(improved * 5 >= 4 * SEEDS as usize, "closure helped in {improved} of {SEEDS} seeds");
}

#[test]
fn training_time_admits_a_linear_envelope() {
    let model = OxygenModel::default();
    let pool = solve_pool(&model, 99, 400);
    let points: Vec<(usize, f64)> = [50, 100, 200, 400]
        .iter()
        .map(|&n| {
            let t = Instant::now();
            model.train_surrogate(&pool[..n]).unwrap();
            (n, t.elapsed().as_secs_f64())
        })
        .collect();
    let fit = fit_training_time_trend(&points).unwrap();
    assert!(fit.c3 >= 0.0 && fit.c4 >= 0.0);
    assert!(points[3].1 > points[0].1, "{points:?}");
}
