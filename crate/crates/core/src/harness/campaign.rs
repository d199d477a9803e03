//! Campaign execution: simulate, estimate, score, fit and aggregate.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CampaignConfig, CampaignKind, Estimator};
use crate::error::{Error, Result};
use crate::estimate::{ml_estimate, rd_estimate, Termination};
use crate::metrics::{eta, fit_power_law, n_to_threshold, trace_distance, EtaReport, MeanSd, PowerLawFit};
use crate::pom::{Pom, PomKind};
use crate::rng::{derive_seed, rng_from_seed};
use crate::simulate::{frequencies, simulate_clicks};
use crate::states::{bell_state, calibrate_biased_mean, BellState, DensityMatrix, EnsembleKind, EnsembleSpec};

/// Largest tolerated fraction of non-converged ML runs.
pub const MAX_ML_EXCLUSION: f64 = 0.01;

/// Stream tags separating the seed paths of state sampling, calibration and
/// click simulation.
const STATES_STREAM: u64 = 1;
const CALIBRATION_STREAM: u64 = 2;
const CLICKS_STREAM: u64 = 3;

/// Distances of all runs at one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub n: u64,
    pub d_avg: f64,
    pub d_sd: f64,
    /// Runs entering the average.
    pub runs: usize,
    /// ML runs dropped because they did not converge.
    pub excluded: usize,
    /// Runs whose RD estimate had a negative eigenvalue.
    pub unphysical: usize,
    /// Distance of every included run, in run order.
    pub distances: Vec<f64>,
}

/// One curve: a state, a measurement and an estimator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub pom: PomKind,
    pub estimator: Estimator,
    pub points: Vec<PointResult>,
    pub fit: PowerLawFit,
    pub n_thr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateResult {
    pub label: String,
    pub purity: f64,
    pub cells: Vec<CellResult>,
    /// Present for every estimator when both measurements were run.
    pub eta: BTreeMap<Estimator, EtaReport>,
}

impl StateResult {
    pub fn cell(&self, pom: PomKind, estimator: Estimator) -> Option<&CellResult> {
        self.cells.iter().find(|c| c.pom == pom && c.estimator == estimator)
    }
}

/// Sample statistics across states.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub campaign: CampaignKind,
    pub ensemble: String,
    pub n_states: usize,
    pub d_thr: f64,
    /// `n_thr[pom][estimator]`
    pub n_thr: BTreeMap<PomKind, BTreeMap<Estimator, MeanSd>>,
    /// `eta[estimator]`
    pub eta: BTreeMap<Estimator, MeanSd>,
    pub ml_runs: usize,
    pub ml_excluded: usize,
    pub ml_iterations_mean: f64,
    /// Over all RD runs with `N ≥ 1000`.
    pub rd_unphysical_fraction_n1000: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub config: CampaignConfig,
    /// The ensemble actually sampled, after calibration and seeding.
    pub ensemble: Option<EnsembleSpec>,
    pub states: Vec<StateResult>,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

/// Outcome of one simulated experiment.
#[derive(Clone, Copy, Debug)]
struct RunOutcome {
    rd_distance: f64,
    rd_physical: bool,
    /// `None` when ML did not converge.
    ml_distance: Option<f64>,
    ml_iterations: usize,
}

fn run_once(
    pom: &Pom,
    rho: &DensityMatrix,
    n: u64,
    seed: u64,
    cfg: &CampaignConfig,
    want_ml: bool,
) -> Result<RunOutcome> {
    let record = simulate_clicks(pom, rho, n, seed)?;
    let f = frequencies(&record)?;
    let rd = rd_estimate(pom, &f);
    let rd_distance = trace_distance(&rd.matrix, rho.hermitian());
    let (ml_distance, ml_iterations) = if !want_ml {
        (None, 0)
    } else if let Some(state) = rd.as_state() {
        // a permissible RD estimate reproduces the frequencies exactly and is
        // therefore the likelihood maximizer
        (Some(trace_distance(state.hermitian(), rho.hermitian())), 0)
    } else {
        let ml = ml_estimate(pom, &f, n, &cfg.ml, None)?;
        let d = match ml.termination {
            Termination::Converged => Some(trace_distance(ml.estimate.hermitian(), rho.hermitian())),
            Termination::Stalled | Termination::MaxIterations => None,
        };
        (d, ml.iterations)
    };
    Ok(RunOutcome { rd_distance, rd_physical: rd.physical, ml_distance, ml_iterations })
}

fn point(n: u64, distances: Vec<f64>, excluded: usize, unphysical: usize) -> PointResult {
    let stats = MeanSd::of(&distances);
    PointResult { n, d_avg: stats.mean, d_sd: stats.sd, runs: distances.len(), excluded, unphysical, distances }
}

fn cell(pom: PomKind, estimator: Estimator, points: Vec<PointResult>, d_thr: f64) -> Result<CellResult> {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.n as f64, p.d_avg)).collect();
    let fit = fit_power_law(&xy)?;
    let n_thr = n_to_threshold(&fit, d_thr)?;
    Ok(CellResult { pom, estimator, points, fit, n_thr })
}

struct StateRun {
    result: StateResult,
    ml_runs: usize,
    ml_excluded: usize,
    ml_iterations: usize,
    rd_runs_n1000: usize,
    rd_unphysical_n1000: usize,
}

/// The full per-state pipeline: every measurement, `N` and run.
fn run_state(
    label: String,
    rho: &DensityMatrix,
    state_index: u64,
    poms: &[Pom],
    cfg: &CampaignConfig,
) -> Result<StateRun> {
    let want_rd = cfg.estimators.contains(&Estimator::Rd);
    let want_ml = cfg.estimators.contains(&Estimator::Ml);
    let mut cells = Vec::new();
    let mut totals = (0, 0, 0, 0, 0);
    for pom in poms {
        let pom_index = PomKind::ALL.iter().position(|k| *k == pom.kind()).expect("known kind") as u64;
        let tasks: Vec<(usize, u64)> =
            (0..cfg.n_grid.len()).flat_map(|i| (0..cfg.runs_per_point as u64).map(move |r| (i, r))).collect();
        let outcomes: Vec<RunOutcome> = tasks
            .par_iter()
            .map(|&(i, run)| {
                let seed = derive_seed(cfg.master_seed, &[CLICKS_STREAM, state_index, pom_index, i as u64, run]);
                run_once(pom, rho, cfg.n_grid[i], seed, cfg, want_ml)
            })
            .collect::<Result<_>>()?;

        let mut rd_points = Vec::new();
        let mut ml_points = Vec::new();
        for (i, chunk) in outcomes.chunks(cfg.runs_per_point).enumerate() {
            let n = cfg.n_grid[i];
            let unphysical = chunk.iter().filter(|o| !o.rd_physical).count();
            if n >= 1000 {
                totals.3 += chunk.len();
                totals.4 += unphysical;
            }
            if want_rd {
                rd_points.push(point(n, chunk.iter().map(|o| o.rd_distance).collect(), 0, unphysical));
            }
            if want_ml {
                let kept: Vec<f64> = chunk.iter().filter_map(|o| o.ml_distance).collect();
                let excluded = chunk.len() - kept.len();
                totals.0 += chunk.len();
                totals.1 += excluded;
                totals.2 += chunk.iter().map(|o| o.ml_iterations).sum::<usize>();
                if kept.is_empty() {
                    return Err(Error::Campaign(format!(
                        "{label}: every ML run at N = {n} with the {} POM failed to converge",
                        pom.kind()
                    )));
                }
                ml_points.push(point(n, kept, excluded, unphysical));
            }
        }
        if want_rd {
            cells.push(cell(pom.kind(), Estimator::Rd, rd_points, cfg.d_thr)?);
        }
        if want_ml {
            cells.push(cell(pom.kind(), Estimator::Ml, ml_points, cfg.d_thr)?);
        }
    }

    let mut etas = BTreeMap::new();
    for &estimator in &cfg.estimators {
        let prod = cells.iter().find(|c| c.pom == PomKind::Product && c.estimator == estimator);
        let sic = cells.iter().find(|c| c.pom == PomKind::Sic && c.estimator == estimator);
        if let (Some(prod), Some(sic)) = (prod, sic) {
            etas.insert(estimator, eta(&prod.fit, &sic.fit, cfg.d_thr)?);
        }
    }
    Ok(StateRun {
        result: StateResult { label, purity: rho.purity(), cells, eta: etas },
        ml_runs: totals.0,
        ml_excluded: totals.1,
        ml_iterations: totals.2,
        rd_runs_n1000: totals.3,
        rd_unphysical_n1000: totals.4,
    })
}

fn summarize(cfg: &CampaignConfig, ensemble: &str, runs: &[StateRun]) -> Summary {
    let mut n_thr: BTreeMap<PomKind, BTreeMap<Estimator, MeanSd>> = BTreeMap::new();
    for &pom in &cfg.poms {
        for &estimator in &cfg.estimators {
            let values: Vec<f64> = runs.iter().filter_map(|r| r.result.cell(pom, estimator)).map(|c| c.n_thr).collect();
            n_thr.entry(pom).or_default().insert(estimator, MeanSd::of(&values));
        }
    }
    let mut etas = BTreeMap::new();
    for &estimator in &cfg.estimators {
        let values: Vec<f64> = runs.iter().filter_map(|r| r.result.eta.get(&estimator)).map(|e| e.eta).collect();
        if !values.is_empty() {
            etas.insert(estimator, MeanSd::of(&values));
        }
    }
    let ml_runs: usize = runs.iter().map(|r| r.ml_runs).sum();
    let ml_iterations: usize = runs.iter().map(|r| r.ml_iterations).sum();
    let rd_runs: usize = runs.iter().map(|r| r.rd_runs_n1000).sum();
    let rd_unphysical: usize = runs.iter().map(|r| r.rd_unphysical_n1000).sum();
    Summary {
        campaign: cfg.kind,
        ensemble: ensemble.to_string(),
        n_states: runs.len(),
        d_thr: cfg.d_thr,
        n_thr,
        eta: etas,
        ml_runs,
        ml_excluded: runs.iter().map(|r| r.ml_excluded).sum(),
        ml_iterations_mean: if ml_runs > 0 { ml_iterations as f64 / ml_runs as f64 } else { 0.0 },
        rd_unphysical_fraction_n1000: if rd_runs > 0 { rd_unphysical as f64 / rd_runs as f64 } else { f64::NAN },
    }
}

fn finish(
    cfg: &CampaignConfig,
    ensemble: Option<EnsembleSpec>,
    label: &str,
    runs: Vec<StateRun>,
) -> Result<CampaignResult> {
    let summary = summarize(cfg, label, &runs);
    let mut warnings = Vec::new();
    if summary.ml_excluded > 0 {
        let fraction = summary.ml_excluded as f64 / summary.ml_runs as f64;
        let message = format!(
            "{} of {} ML runs did not converge and were excluded ({:.3}%)",
            summary.ml_excluded,
            summary.ml_runs,
            100.0 * fraction
        );
        if fraction > MAX_ML_EXCLUSION {
            return Err(Error::Campaign(format!("{message}; the limit is {}%", 100.0 * MAX_ML_EXCLUSION)));
        }
        warnings.push(message);
    }
    Ok(CampaignResult {
        config: cfg.clone(),
        ensemble,
        states: runs.into_iter().map(|r| r.result).collect(),
        summary,
        warnings,
    })
}

fn build_poms(cfg: &CampaignConfig) -> Vec<Pom> {
    cfg.poms.iter().map(|&k| Pom::build(k)).collect()
}

/// Tomography of the four Bell states.
pub fn run_bell_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    if cfg.kind != CampaignKind::Bell {
        return Err(Error::Config(format!("expected a bell campaign, got {}", cfg.kind)));
    }
    let poms = build_poms(cfg);
    let runs = BellState::ALL
        .par_iter()
        .enumerate()
        .map(|(i, &b)| run_state(b.label().to_string(), &bell_state(b), i as u64, &poms, cfg))
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, None, "bell", runs)
}

/// The ensemble actually sampled: seeded from the master seed and, for a
/// biased ensemble without a mean matrix, calibrated.
pub fn resolve_ensemble(cfg: &CampaignConfig) -> Result<EnsembleSpec> {
    let mut spec =
        cfg.ensemble.clone().ok_or_else(|| Error::Config(format!("a {} campaign needs an ensemble", cfg.kind)))?;
    spec.seed = derive_seed(cfg.master_seed, &[STATES_STREAM]);
    if spec.kind == EnsembleKind::BiasedMixed && spec.mean_matrix.is_none() {
        let mut rng = rng_from_seed(derive_seed(cfg.master_seed, &[CALIBRATION_STREAM]));
        let mean = calibrate_biased_mean(cfg.biased_target_purity, cfg.biased_confidence, &mut rng)?;
        spec.rank = mean.rank();
        spec.mean_matrix = Some(mean);
    }
    spec.validate()?;
    Ok(spec)
}

/// Sample averages over `n_states` random states (or the first state only for
/// a single-state campaign).
pub fn run_ensemble_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    cfg.validate()?;
    let count = match cfg.kind {
        CampaignKind::EnsembleAverage => cfg.n_states,
        CampaignKind::SingleState => 1,
        CampaignKind::Bell => return Err(Error::Config("expected an ensemble campaign, got bell".into())),
    };
    let spec = resolve_ensemble(cfg)?;
    let poms = build_poms(cfg);
    let width = count.to_string().len().max(3);
    let runs = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let rho = spec.sample(i)?;
            run_state(format!("s{i:0width$}"), &rho, i, &poms, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, Some(spec.clone()), spec.kind.as_str(), runs)
}

/// Dispatches on the campaign kind.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    match cfg.kind {
        CampaignKind::Bell => run_bell_campaign(cfg),
        CampaignKind::EnsembleAverage | CampaignKind::SingleState => run_ensemble_campaign(cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: CampaignKind) -> CampaignConfig {
        CampaignConfig {
            kind,
            n_grid: vec![200, 400, 800, 1600],
            runs_per_point: 5,
            n_states: 3,
            master_seed: 11,
            ensemble: Some(EnsembleSpec::unbiased_mixed(0)),
            ..Default::default()
        }
    }

    #[test]
    fn bell_campaign_shape() {
        let res = run_bell_campaign(&small(CampaignKind::Bell)).unwrap();
        assert_eq!(res.states.len(), 4);
        for s in &res.states {
            assert_eq!(s.cells.len(), 4);
            assert_eq!(s.eta.len(), 2);
            for c in &s.cells {
                assert_eq!(c.points.len(), 4);
                for p in &c.points {
                    assert_eq!(p.runs + p.excluded, 5);
                    let mean = p.distances.iter().sum::<f64>() / p.runs as f64;
                    assert!((mean - p.d_avg).abs() < 1e-12);
                }
            }
        }
        assert_eq!(res.summary.ml_runs, 4 * 2 * 4 * 5);
    }

    #[test]
    fn ensemble_campaign_is_deterministic() {
        let cfg = small(CampaignKind::EnsembleAverage);
        let a = run_ensemble_campaign(&cfg).unwrap();
        let b = run_ensemble_campaign(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.states.len(), 3);
        assert_eq!(a.summary.n_thr[&PomKind::Sic][&Estimator::Ml].count, 3);
    }

    #[test]
    fn single_state_campaign() {
        let res = run_campaign(&small(CampaignKind::SingleState)).unwrap();
        assert_eq!(res.states.len(), 1);
    }

    #[test]
    fn single_pom_has_no_eta() {
        let cfg =
            CampaignConfig { poms: vec![PomKind::Sic], estimators: vec![Estimator::Rd], ..small(CampaignKind::Bell) };
        let res = run_bell_campaign(&cfg).unwrap();
        assert!(res.states.iter().all(|s| s.eta.is_empty() && s.cells.len() == 1));
        assert_eq!(res.summary.ml_runs, 0);
    }

    #[test]
    fn biased_ensemble_is_calibrated() {
        let cfg = CampaignConfig {
            ensemble: Some(EnsembleSpec::new(EnsembleKind::BiasedMixed, 0)),
            ..small(CampaignKind::EnsembleAverage)
        };
        let spec = resolve_ensemble(&cfg).unwrap();
        assert!(spec.mean_matrix.is_some());
    }

    #[test]
    fn wrong_kind_rejected() {
        assert!(run_bell_campaign(&small(CampaignKind::EnsembleAverage)).is_err());
        assert!(run_ensemble_campaign(&small(CampaignKind::Bell)).is_err());
    }
}
