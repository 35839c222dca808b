//! Campaign orchestration.

mod campaign;
mod config;
mod replicate;
mod report;
mod synthetic;

pub use campaign::{
    fit_trends, run_campaign, run_mc_baseline, run_plan, CampaignReport, Fidelity, QoiRecord,
    ReportKind, TrendPoint,
};
pub use config::{CampaignConfig, ModelConfig, TrainingCostLaw};
pub use replicate::{replication_study, ReplicationSummary};
pub use report::{samples_csv, summary_text, write_outputs, OutputPaths};
pub use synthetic::{SyntheticModel, SyntheticSurrogate};
