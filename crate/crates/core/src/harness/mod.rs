//! Campaign orchestration: Bell-state curves, ensemble tables and their
//! reproducible artifacts.

pub mod campaign;
pub mod config;
pub mod output;

pub use campaign::{
    resolve_ensemble, run_bell_campaign, run_campaign, run_ensemble_campaign, CampaignResult, CellResult, PointResult,
    StateResult, Summary, MAX_ML_EXCLUSION,
};
pub use config::{default_n_grid, CampaignConfig, CampaignKind, Estimator};
pub use output::{write_outputs, OutputFiles};
