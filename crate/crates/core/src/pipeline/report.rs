use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::EstimateReport;

use super::campaign::CampaignReport;

/// Files written for one report.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputPaths {
    pub json: PathBuf,
    pub summary: PathBuf,
    pub samples: PathBuf,
}

fn row(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key:<30}{value}");
}

fn estimate_rows(out: &mut String, title: &str, e: &EstimateReport) {
    let _ = writeln!(out, "\n[{title}]");
    row(out, "method", e.method);
    row(out, "point", format!("{:.6}", e.point));
    row(out, "half-width", format!("{:.6}", e.half_width));
    row(out, "interval", format!("[{:.6}, {:.6}]", e.ci_low, e.ci_high));
    row(out, "confidence", e.confidence_level);
    row(out, "fom / rom samples", format!("{} / {}", e.fom_samples, e.rom_samples));
    if let Some(c) = e.coupling {
        row(out, "rho / lambda", format!("{:.6} / {:.6}", c.rho, c.lambda));
        row(out, "sigma0 / sigma1", format!("{:.6} / {:.6}", c.sigma0, c.sigma1));
    }
}

/// Human-readable summary with aligned columns.
pub fn summary_text(report: &CampaignReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let kind = serde_json::to_value(report.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default();
    row(&mut out, "report", kind);
    row(&mut out, "qoi", c.qoi);
    row(&mut out, "budget", c.budget);
    row(&mut out, "g / w0", format!("{} / {} {}", c.cost.g, c.cost.w0, c.cost.unit));
    row(&mut out, "seed", c.seed);
    if !report.trend_points.is_empty() {
        let _ = writeln!(out, "\n[trend points]");
        let _ = writeln!(out, "{:>8}{:>14}{:>16}{:>14}", "n", "rho", "1 - rho^2", "t(n)");
        for p in &report.trend_points {
            let _ = writeln!(
                out,
                "{:>8}{:>14.6}{:>16.6e}{:>14.4}",
                p.n, p.rho, p.decorrelation, p.training_cost
            );
        }
    }
    if let Some(k) = report.coefficients {
        let _ = writeln!(out, "\n[trend fit]");
        row(&mut out, "zeta", format!("{:.6}", k.zeta));
        row(&mut out, "c1 / c2", format!("{:.6e} / {:.6e}", k.c1, k.c2));
        row(&mut out, "c3 / c4", format!("{:.6} / {:.6}", k.c3, k.c4));
    }
    if let Some(s) = report.sigma0_preliminary {
        row(&mut out, "sigma0 (preliminary)", format!("{s:.6}"));
    }
    if let Some(p) = report.effective_budget {
        row(&mut out, "effective budget", format!("{p:.4}"));
    }
    if let Some(n) = report.n_star {
        row(&mut out, "n*", n);
    }
    if let Some(b) = report.mse_bound_at_n_star {
        row(&mut out, "mse bound at n*", format!("{b:.6e}"));
    }
    if let Some(r) = report.rho_pre_estimate {
        row(&mut out, "rho(n*) in-sample", format!("{r:.6}"));
    }
    if let Some(p) = &report.policy {
        let _ = writeln!(out, "\n[policy]");
        row(&mut out, "m0* / m1*", format!("{} / {}", p.m0_star, p.m1_star));
        row(&mut out, "r", format!("{:.4}", p.r));
        row(&mut out, "lambda*", format!("{:.6}", p.lambda_star));
        row(&mut out, "predicted mse", format!("{:.6e}", p.predicted_mse_bound));
        row(&mut out, "leftover budget", format!("{:.4}", p.leftover()));
    }
    if let Some(reason) = &report.fallback {
        let _ = writeln!(out, "\n[fallback]");
        row(&mut out, "reason", reason);
    }
    if let Some(e) = &report.estimate {
        estimate_rows(&mut out, "estimate", e);
    }
    if let Some(e) = &report.baseline {
        estimate_rows(&mut out, "baseline", e);
    }
    let _ = writeln!(out, "\n[ledger]");
    for (k, v) in report.ledger.as_map() {
        row(&mut out, &k, format!("{v:.4}"));
    }
    for (phase, v) in report.ledger.phases() {
        row(&mut out, &format!("phase {phase}"), format!("{v:.4}"));
    }
    if !report.timings.is_empty() {
        let _ = writeln!(out, "\n[wall clock, s]");
        for (phase, s) in &report.timings {
            row(&mut out, phase, format!("{s:.3}"));
        }
    }
    out
}

/// QoI values as `sample_id,fidelity,qoi_value`.
pub fn samples_csv(report: &CampaignReport) -> String {
    let mut out = String::from("sample_id,fidelity,qoi_value\n");
    for r in &report.samples {
        let _ = writeln!(out, "{},{},{:e}", r.sample_id, r.fidelity.as_str(), r.qoi_value);
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `report.json`, `summary.txt` and `qoi_samples.csv` into `dir`.
pub fn write_outputs(report: &CampaignReport, dir: &Path) -> Result<OutputPaths> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = OutputPaths {
        json: dir.join("report.json"),
        summary: dir.join("summary.txt"),
        samples: dir.join("qoi_samples.csv"),
    };
    write(&paths.json, &serde_json::to_string_pretty(report)?)?;
    write(&paths.summary, &summary_text(report))?;
    write(&paths.samples, &samples_csv(report))?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_campaign, CampaignConfig};

    #[test]
    fn outputs_round_trip() {
        let r = run_campaign(&CampaignConfig::synthetic(1500.0, 30, 2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let paths = write_outputs(&r, dir.path()).unwrap();
        let back: CampaignReport =
            serde_json::from_str(&fs::read_to_string(&paths.json).unwrap()).unwrap();
        assert_eq!(back.estimate, r.estimate);
        assert_eq!(back.ledger.as_map(), r.ledger.as_map());
        assert_eq!(back.ledger.phases(), r.ledger.phases());
        let csv = fs::read_to_string(&paths.samples).unwrap();
        let p = r.policy.unwrap();
        assert_eq!(csv.lines().count(), 1 + p.m0_star + p.m1_star);
        let text = fs::read_to_string(&paths.summary).unwrap();
        assert!(text.contains("m0* / m1*"));
    }
}
