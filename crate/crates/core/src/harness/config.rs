//! Campaign configuration, readable from a JSON file with every field optional.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::MlConfig;
use crate::metrics::DEFAULT_D_THR;
use crate::pom::PomKind;
use crate::states::{EnsembleKind, EnsembleSpec};

/// Smallest admissible number of clicks per experiment.
pub const MIN_CLICKS: u64 = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CampaignKind {
    /// The four Bell states.
    #[default]
    Bell,
    /// `n_states` draws from `ensemble`.
    EnsembleAverage,
    /// The first draw from `ensemble`.
    SingleState,
}

impl CampaignKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CampaignKind::Bell => "bell",
            CampaignKind::EnsembleAverage => "ensemble_average",
            CampaignKind::SingleState => "single_state",
        }
    }
}

impl fmt::Display for CampaignKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CampaignKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "bell" => CampaignKind::Bell,
            "ensemble_average" | "ensemble" | "table" => CampaignKind::EnsembleAverage,
            "single_state" | "single" => CampaignKind::SingleState,
            other => return Err(Error::Config(format!("unknown campaign kind `{other}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// Linear inversion through the dual operators.
    Rd,
    /// Maximum likelihood.
    Ml,
}

impl Estimator {
    pub const ALL: [Estimator; 2] = [Estimator::Rd, Estimator::Ml];

    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Rd => "rd",
            Estimator::Ml => "ml",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rd" => Ok(Estimator::Rd),
            "ml" => Ok(Estimator::Ml),
            other => Err(Error::Config(format!("unknown estimator `{other}`"))),
        }
    }
}

/// `250, 500, …, 6000`
pub fn default_n_grid() -> Vec<u64> {
    (1..=24).map(|k| 250 * k).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub kind: CampaignKind,
    /// Required for ensemble and single-state campaigns.
    pub ensemble: Option<EnsembleSpec>,
    pub n_grid: Vec<u64>,
    pub runs_per_point: usize,
    pub n_states: usize,
    pub estimators: Vec<Estimator>,
    pub poms: Vec<PomKind>,
    pub d_thr: f64,
    pub master_seed: u64,
    pub ml: MlConfig,
    /// Also write per-run distances.
    pub raw_runs: bool,
    /// Purity and probability used to calibrate a biased ensemble that has
    /// no mean matrix.
    pub biased_target_purity: f64,
    pub biased_confidence: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            kind: CampaignKind::Bell,
            ensemble: None,
            n_grid: default_n_grid(),
            runs_per_point: 100,
            n_states: 100,
            estimators: Estimator::ALL.to_vec(),
            poms: PomKind::ALL.to_vec(),
            d_thr: DEFAULT_D_THR,
            master_seed: 0,
            ml: MlConfig::default(),
            raw_runs: false,
            biased_target_purity: 0.8,
            biased_confidence: 0.9,
        }
    }
}

impl CampaignConfig {
    pub fn bell(master_seed: u64) -> Self {
        CampaignConfig { master_seed, ..Default::default() }
    }

    pub fn ensemble(kind: EnsembleKind, n_states: usize, master_seed: u64) -> Self {
        CampaignConfig {
            kind: CampaignKind::EnsembleAverage,
            ensemble: Some(EnsembleSpec::new(kind, 0)),
            n_states,
            master_seed,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: CampaignConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_grid.len() < 3 {
            return Err(Error::Config("n_grid needs at least 3 points for a fit".into()));
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.n_grid[0] < MIN_CLICKS {
            return Err(Error::Config(format!("n_grid entries must be at least {MIN_CLICKS}")));
        }
        if self.runs_per_point == 0 {
            return Err(Error::Config("runs_per_point must be at least 1".into()));
        }
        if self.n_states == 0 {
            return Err(Error::Config("n_states must be at least 1".into()));
        }
        if self.estimators.is_empty() || self.poms.is_empty() {
            return Err(Error::Config("need at least one estimator and one POM".into()));
        }
        if has_duplicates(&self.estimators) || has_duplicates(&self.poms) {
            return Err(Error::Config("estimators and poms must not repeat".into()));
        }
        if !(self.d_thr > 0.0 && self.d_thr.is_finite()) {
            return Err(Error::Config("d_thr must be positive".into()));
        }
        self.ml.validate()?;
        match (self.kind, &self.ensemble) {
            (CampaignKind::Bell, _) => {}
            (_, None) => return Err(Error::Config(format!("a {} campaign needs an ensemble", self.kind))),
            (_, Some(spec)) => {
                let calibrated_later = spec.kind == EnsembleKind::BiasedMixed && spec.mean_matrix.is_none();
                if !calibrated_later {
                    spec.validate()?;
                }
            }
        }
        Ok(())
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items.iter().enumerate().any(|(i, a)| items[..i].contains(a))
}
