//! State reconstruction from relative frequencies.
//!
//! Two estimators are provided: raw-data linear inversion through the dual
//! frame of the measurement, and maximum likelihood found by the
//! `ρ → (1+εG)ρ(1+εG)/tr(·)` iteration with a quadratic line search on `ε`.
//! The direction `G` is `R` itself or, by default, a conjugate combination of
//! the current and previous directions; either way the fixed point is `R = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{trace_norm, trace_of_product, Hermitian, Matrix4};
use crate::pom::{Pom, OUTCOMES};
use crate::simulate::FrequencyVector;
use crate::states::{DensityMatrix, POSITIVITY_TOL};

/// Halvings of the first trial step before the line search gives up.
const MAX_HALVINGS: u32 = 20;

/// Linear-inversion estimate; unit trace but possibly not positive.
#[derive(Clone, Copy, Debug)]
pub struct RdEstimate {
    pub matrix: Hermitian<4>,
    pub min_eig: f64,
    pub physical: bool,
}

impl RdEstimate {
    /// The estimate as a density matrix, when it is one.
    pub fn as_state(&self) -> Option<DensityMatrix> {
        if self.physical {
            DensityMatrix::new(self.matrix).ok()
        } else {
            None
        }
    }
}

/// `ρ_est = Σ_j f_j P_j`
pub fn rd_estimate(pom: &Pom, f: &FrequencyVector) -> RdEstimate {
    let matrix = Hermitian::symmetrized(pom.reconstruct(f.values()));
    let min_eig = matrix.min_eigenvalue();
    RdEstimate { matrix, min_eig, physical: min_eig >= -POSITIVITY_TOL }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MlConfig {
    /// Iteration stops once `tr|Rρ|` drops below this.
    pub stop_threshold: f64,
    pub max_iterations: usize,
    pub trial_epsilons: (f64, f64),
    pub epsilon_cap: f64,
    pub probability_floor: f64,
    /// Step along a conjugate combination of the current and previous `R`
    /// instead of `R` alone. Fixed point and stop rule are unchanged.
    pub conjugate: bool,
}

impl Default for MlConfig {
    fn default() -> Self {
        MlConfig {
            stop_threshold: 1e-8,
            max_iterations: 5000,
            trial_epsilons: (0.1, 0.5),
            epsilon_cap: 10.0,
            probability_floor: 1e-12,
            conjugate: true,
        }
    }
}

impl MlConfig {
    pub fn validate(&self) -> Result<()> {
        let (ea, eb) = self.trial_epsilons;
        let positive = [self.stop_threshold, ea, eb, self.epsilon_cap, self.probability_floor]
            .iter()
            .all(|&x| x > 0.0 && x.is_finite());
        if !positive || self.max_iterations == 0 {
            return Err(Error::Config("ML settings must be positive".into()));
        }
        if ea == eb {
            return Err(Error::Config("trial epsilons must differ".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// `tr|Rρ|` fell below the threshold.
    Converged,
    /// No step size increased the likelihood.
    Stalled,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct MlResult {
    pub estimate: DensityMatrix,
    pub iterations: usize,
    pub final_stop_metric: f64,
    /// Log-likelihood of the start and of every accepted iterate.
    pub loglik_trace: Vec<f64>,
    /// Step size `ε` of every accepted iteration.
    pub step_trace: Vec<f64>,
    pub termination: Termination,
    /// A probability was floored while its frequency was positive.
    pub floor_active: bool,
}

impl MlResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// `N Σ_j f_j log max(p_j, floor)`; terms with `f_j = 0` are exactly zero.
/// The flag reports whether flooring was needed for a positive frequency.
pub fn log_likelihood_with_floor(pom: &Pom, f: &FrequencyVector, n: u64, rho: &Matrix4, floor: f64) -> (f64, bool) {
    let p = pom.expectations(rho);
    let mut floored = false;
    let mut total = 0.0;
    for (fj, pj) in f.values().iter().zip(p.iter()) {
        if *fj == 0.0 {
            continue;
        }
        if *pj < floor {
            floored = true;
        }
        total += fj * pj.max(floor).ln();
    }
    (n as f64 * total, floored)
}

pub fn log_likelihood(pom: &Pom, f: &FrequencyVector, n: u64, rho: &DensityMatrix) -> f64 {
    log_likelihood_with_floor(pom, f, n, rho.matrix(), MlConfig::default().probability_floor).0
}

fn r_operator(pom: &Pom, f: &FrequencyVector, p: &[f64; OUTCOMES], floor: f64) -> (Matrix4, bool) {
    let mut r = Matrix4::identity().scale(-1.0);
    let mut floored = false;
    for j in 0..OUTCOMES {
        let fj = f.values()[j];
        if fj == 0.0 {
            continue;
        }
        if p[j] < floor {
            floored = true;
        }
        r += pom.outcomes()[j].matrix().scale(fj / p[j].max(floor));
    }
    (r, floored)
}

/// `R = Σ_j f_j Π_j / tr(ρΠ_j) − 1`, zero-frequency terms omitted.
pub fn ml_r_operator(pom: &Pom, f: &FrequencyVector, rho: &DensityMatrix) -> Hermitian<4> {
    let p = pom.expectations(rho.matrix());
    Hermitian::symmetrized(r_operator(pom, f, &p, MlConfig::default().probability_floor).0)
}

/// Likelihood along the ray `ε ↦ (1+εG)ρ(1+εG)/tr(·)`, measured relative to
/// `ε = 0`. Probabilities along the ray are quadratic in `ε`, so every
/// evaluation is exact up to rounding in the increment itself rather than in
/// the absolute log-likelihood.
struct Ray {
    n: f64,
    floor: f64,
    /// `(f_j, p_j, 2 tr(Gρ Π_j), tr(GρG Π_j))` for `f_j > 0`
    terms: Vec<(f64, f64, f64, f64)>,
    /// `tr(Gρ)`
    linear: f64,
    /// `tr(GρG)`
    quadratic: f64,
}

impl Ray {
    fn new(
        pom: &Pom,
        f: &FrequencyVector,
        n: u64,
        p: &[f64; OUTCOMES],
        g_rho: &Matrix4,
        g_rho_g: &Matrix4,
        floor: f64,
    ) -> Self {
        let terms = (0..OUTCOMES)
            .filter(|&j| f.values()[j] > 0.0)
            .map(|j| {
                let pi = pom.outcomes()[j].matrix();
                let a = 2.0 * trace_of_product(g_rho, pi).re;
                let b = trace_of_product(g_rho_g, pi).re;
                (f.values()[j], p[j], a, b)
            })
            .collect();
        Ray { n: n as f64, floor, terms, linear: g_rho.trace().re, quadratic: g_rho_g.trace().re }
    }

    fn normalization(&self, eps: f64) -> f64 {
        2.0 * eps * self.linear + eps * eps * self.quadratic
    }

    fn delta(&self, eps: f64) -> f64 {
        let norm_inc = self.normalization(eps);
        let log_norm = norm_inc.ln_1p();
        let mut total = 0.0;
        for &(fj, pj, a, b) in &self.terms {
            let inc = eps * a + eps * eps * b;
            let new_p = (pj + inc) / (1.0 + norm_inc);
            let term = if pj >= self.floor && new_p >= self.floor && pj + inc > 0.0 {
                (inc / pj).ln_1p() - log_norm
            } else {
                new_p.max(self.floor).ln() - pj.max(self.floor).ln()
            };
            total += fj * term;
        }
        self.n * total
    }

    /// Step size per the quadratic interpolation rule, with fallbacks.
    fn choose(&self, cfg: &MlConfig) -> Option<(f64, f64)> {
        let (ea, eb) = cfg.trial_epsilons;
        let la = self.delta(ea);
        let lb = self.delta(eb);

        // q(ε) = αε + βε² through (0, 0), (ea, la), (eb, lb)
        let beta = (la / ea - lb / eb) / (ea - eb);
        let alpha = la / ea - beta * ea;
        if beta < 0.0 && alpha > 0.0 {
            let eps = (-alpha / (2.0 * beta)).min(cfg.epsilon_cap);
            let gain = self.delta(eps);
            if gain > 0.0 {
                return Some((eps, gain));
            }
        }
        let (eps, gain) = if la >= lb { (ea, la) } else { (eb, lb) };
        if gain > 0.0 {
            return Some((eps, gain));
        }
        let mut eps = ea;
        for _ in 0..MAX_HALVINGS {
            eps *= 0.5;
            let gain = self.delta(eps);
            if gain > 0.0 {
                return Some((eps, gain));
            }
        }
        None
    }
}

/// Steps between forced restarts of the conjugate direction (the number of
/// real parameters of a two-qubit state).
const CONJUGATE_RESTART: usize = 30;

fn line_search(
    pom: &Pom,
    f: &FrequencyVector,
    n: u64,
    p: &[f64; OUTCOMES],
    rho: &DensityMatrix,
    direction: &Matrix4,
    cfg: &MlConfig,
) -> Option<(f64, f64, Matrix4, Matrix4)> {
    let g_rho = *direction * *rho.matrix();
    let g_rho_g = g_rho * *direction;
    let ray = Ray::new(pom, f, n, p, &g_rho, &g_rho_g, cfg.probability_floor);
    ray.choose(cfg).map(|(eps, gain)| (eps, gain, g_rho, g_rho_g))
}

/// Maximum-likelihood estimate starting from `start` (default: `1/4`).
pub fn ml_estimate(
    pom: &Pom,
    f: &FrequencyVector,
    n: u64,
    cfg: &MlConfig,
    start: Option<&DensityMatrix>,
) -> Result<MlResult> {
    ml_estimate_observed(pom, f, n, cfg, start, |_, _| {})
}

/// As [`ml_estimate`], calling `observer(k, ρ_k)` on every iterate including
/// the start.
pub fn ml_estimate_observed(
    pom: &Pom,
    f: &FrequencyVector,
    n: u64,
    cfg: &MlConfig,
    start: Option<&DensityMatrix>,
    mut observer: impl FnMut(usize, &DensityMatrix),
) -> Result<MlResult> {
    cfg.validate()?;
    let floor = cfg.probability_floor;
    let mut rho = start.copied().unwrap_or_else(DensityMatrix::maximally_mixed);
    let (l0, mut floor_active) = log_likelihood_with_floor(pom, f, n, rho.matrix(), floor);
    let mut loglik_trace = vec![l0];
    let mut step_trace = Vec::new();
    let mut iterations = 0;
    observer(0, &rho);

    // previous direction `G` and `tr(ρRR)` at the previous iterate
    let mut previous: Option<(Matrix4, Matrix4, f64)> = None;
    let (termination, metric) = loop {
        let p = pom.expectations(rho.matrix());
        let (r, floored) = r_operator(pom, f, &p, floor);
        floor_active |= floored;
        let r_rho = r * *rho.matrix();
        // the Frobenius norm bounds tr|Rρ| from below and is much cheaper
        let lower = r_rho.frobenius_norm();
        if lower < cfg.stop_threshold {
            let metric = trace_norm(&r_rho);
            if metric < cfg.stop_threshold {
                break (Termination::Converged, metric);
            }
        }
        if iterations >= cfg.max_iterations {
            break (Termination::MaxIterations, trace_norm(&r_rho));
        }
        let gradient_norm = trace_of_product(&r_rho, &r).re;
        let mut direction = r;
        if let (true, Some((prev_g, prev_r, prev_norm))) = (cfg.conjugate, previous.as_ref()) {
            // Polak–Ribière with restart, in the inner product Re tr(ρAB)
            let beta = (gradient_norm - trace_of_product(&r_rho, prev_r).re) / prev_norm;
            if beta > 0.0 && iterations % CONJUGATE_RESTART != 0 {
                let candidate = r + prev_g.scale(beta);
                if trace_of_product(&r_rho, &candidate).re > 0.0 {
                    direction = candidate;
                }
            }
        }
        let mut step = line_search(pom, f, n, &p, &rho, &direction, cfg);
        if step.is_none() && direction != r {
            direction = r;
            step = line_search(pom, f, n, &p, &rho, &direction, cfg);
        }
        let Some((eps, gain, g_rho, g_rho_g)) = step else {
            break (Termination::Stalled, trace_norm(&r_rho));
        };

        let next = *rho.matrix() + (g_rho + g_rho.adjoint()).scale(eps) + g_rho_g.scale(eps * eps);
        rho = DensityMatrix::from_positive(next);
        previous = Some((direction, r, gradient_norm));
        iterations += 1;
        let last = *loglik_trace.last().expect("non-empty");
        loglik_trace.push(last + gain);
        step_trace.push(eps);
        observer(iterations, &rho);
    };

    Ok(MlResult {
        estimate: rho,
        iterations,
        final_stop_metric: metric,
        loglik_trace,
        step_trace,
        termination,
        floor_active,
    })
}

impl MlResult {
    pub fn csv_header() -> [&'static str; 3] {
        ["iterations", "final_stop_metric", "termination"]
    }

    pub fn csv_row(&self) -> [String; 3] {
        let termination = match self.termination {
            Termination::Converged => "converged",
            Termination::Stalled => "stalled",
            Termination::MaxIterations => "max_iterations",
        };
        [self.iterations.to_string(), self.final_stop_metric.to_string(), termination.to_string()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::trace_distance;
    use crate::pom::{probabilities, product_pom, sic_pom, PomKind};
    use crate::simulate::{frequencies, simulate_clicks};
    use crate::states::{bell_state, BellState, EnsembleSpec};

    fn exact(pom: &Pom, rho: &DensityMatrix) -> FrequencyVector {
        FrequencyVector(probabilities(pom, rho))
    }

    #[test]
    fn rd_of_exact_probabilities_is_exact() {
        for kind in PomKind::ALL {
            let pom = Pom::build(kind);
            let mixed = DensityMatrix::maximally_mixed();
            let rd = rd_estimate(&pom, &exact(&pom, &mixed));
            assert!(rd.physical);
            assert!(rd.matrix.matrix().max_abs_diff(mixed.matrix()) < 1e-12);
            for k in 0..5 {
                let rho = EnsembleSpec::unbiased_mixed(9).sample(k).unwrap();
                let rd = rd_estimate(&pom, &exact(&pom, &rho));
                assert!(rd.matrix.matrix().max_abs_diff(rho.matrix()) < 1e-10);
                assert!((rd.matrix.trace() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn singlet_rd_estimates_mostly_unphysical() {
        let pom = product_pom();
        let rho = bell_state(BellState::PsiMinus);
        let unphysical = (0..100)
            .filter(|&seed| {
                let rec = simulate_clicks(&pom, &rho, 1000, seed).unwrap();
                !rd_estimate(&pom, &frequencies(&rec).unwrap()).physical
            })
            .count();
        assert!(unphysical > 90, "{unphysical}");
    }

    #[test]
    fn loglik_examples() {
        let pom = sic_pom();
        let mixed = DensityMatrix::maximally_mixed();
        let uniform = FrequencyVector([1.0 / 16.0; 16]);
        let l = log_likelihood(&pom, &uniform, 100, &mixed);
        assert!((l - 100.0 * (1.0f64 / 16.0).ln()).abs() < 1e-10);

        // Gibbs: f = p maximizes the likelihood
        let rho = EnsembleSpec::unbiased_mixed(2).sample(0).unwrap();
        let f = exact(&pom, &rho);
        let best = log_likelihood(&pom, &f, 50, &rho);
        for k in 1..10 {
            let other = EnsembleSpec::unbiased_mixed(2).sample(k).unwrap();
            assert!(log_likelihood(&pom, &f, 50, &other) < best);
        }
    }

    #[test]
    fn zero_frequency_cells_contribute_nothing() {
        let pom = product_pom();
        let singlet = bell_state(BellState::PsiMinus);
        let f = FrequencyVector(exact(&pom, &singlet).0.map(|x| if x < 1e-15 { 0.0 } else { x }));
        let (value, floored) =
            log_likelihood_with_floor(&pom, &f, 10, singlet.matrix(), MlConfig::default().probability_floor);
        // twelve cells at 1/12 each
        assert!((value - 10.0 * (1.0f64 / 12.0).ln()).abs() < 1e-12);
        assert!(!floored);
    }

    #[test]
    fn floor_flag_raised_for_positive_frequency_on_zero_probability() {
        let pom = product_pom();
        let singlet = bell_state(BellState::PsiMinus);
        let f = FrequencyVector([1.0 / 16.0; 16]);
        let (value, floored) = log_likelihood_with_floor(&pom, &f, 1, singlet.matrix(), 1e-12);
        assert!(floored);
        assert!(value.is_finite());
    }

    #[test]
    fn r_vanishes_at_stationary_point() {
        for kind in PomKind::ALL {
            let pom = Pom::build(kind);
            let rho = EnsembleSpec::unbiased_mixed(5).sample(1).unwrap();
            let r = ml_r_operator(&pom, &exact(&pom, &rho), &rho);
            assert!(r.matrix().max_abs() < 1e-10);
        }
    }

    #[test]
    fn r_at_maximally_mixed_has_closed_form() {
        let pom = sic_pom();
        let rec = simulate_clicks(&pom, &bell_state(BellState::PhiPlus), 300, 1).unwrap();
        let f = frequencies(&rec).unwrap();
        let r = ml_r_operator(&pom, &f, &DensityMatrix::maximally_mixed());
        let mut expected = Matrix4::identity().scale(-1.0);
        for j in 0..16 {
            expected += pom.outcomes()[j].matrix().scale(16.0 * f.0[j]);
        }
        assert!(r.matrix().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn zero_frequency_terms_omitted_from_r() {
        let pom = product_pom();
        let singlet = bell_state(BellState::PsiMinus);
        let f = exact(&pom, &singlet);
        // p_mm = 0 at the singlet; the omitted terms would otherwise blow up
        let r = ml_r_operator(&pom, &f, &singlet);
        assert!(r.matrix().is_finite());
        assert!(r.matrix().max_abs() < 1e3);
    }

    #[test]
    fn ml_recovers_state_from_noiseless_data() {
        for kind in PomKind::ALL {
            let pom = Pom::build(kind);
            for k in 0..5 {
                let rho = EnsembleSpec::unbiased_mixed(17).sample(k).unwrap();
                let res = ml_estimate(&pom, &exact(&pom, &rho), 1000, &MlConfig::default(), None).unwrap();
                assert!(res.converged(), "{:?}", res.termination);
                let d = trace_distance(res.estimate.hermitian(), rho.hermitian());
                assert!(d < 1e-6, "{d}");
            }
        }
    }

    #[test]
    fn fixed_point_exits_immediately() {
        let pom = sic_pom();
        let rho = EnsembleSpec::unbiased_mixed(3).sample(0).unwrap();
        let res = ml_estimate(&pom, &exact(&pom, &rho), 100, &MlConfig::default(), Some(&rho)).unwrap();
        assert_eq!(res.iterations, 0);
        assert!(res.converged());
    }

    #[test]
    fn ml_on_noisy_singlet_is_valid_and_close() {
        let pom = product_pom();
        let singlet = bell_state(BellState::PsiMinus);
        let mut total = 0.0;
        for seed in 0..20 {
            let rec = simulate_clicks(&pom, &singlet, 6000, seed).unwrap();
            let f = frequencies(&rec).unwrap();
            let res = ml_estimate(&pom, &f, 6000, &MlConfig::default(), None).unwrap();
            assert!(res.estimate.purity() <= 1.0 + 1e-12);
            assert!(res.estimate.hermitian().min_eigenvalue() >= -1e-10);
            total += trace_distance(res.estimate.hermitian(), singlet.hermitian());
        }
        let avg = total / 20.0;
        assert!((0.005..0.06).contains(&avg), "{avg}");
    }

    #[test]
    fn loglik_trace_matches_direct_evaluation() {
        let pom = sic_pom();
        let rec = simulate_clicks(&pom, &bell_state(BellState::PsiPlus), 2000, 4).unwrap();
        let f = frequencies(&rec).unwrap();
        let res = ml_estimate(&pom, &f, 2000, &MlConfig::default(), None).unwrap();
        assert!(res.loglik_trace.windows(2).all(|w| w[1] > w[0]));
        let direct = log_likelihood(&pom, &f, 2000, &res.estimate);
        let last = *res.loglik_trace.last().unwrap();
        assert!((direct - last).abs() < 1e-8 * direct.abs(), "{direct} vs {last}");
    }

    #[test]
    fn plain_and_conjugate_steps_reach_the_same_maximum() {
        let pom = sic_pom();
        let rho = EnsembleSpec::unbiased_mixed(9).sample(2).unwrap();
        let rec = simulate_clicks(&pom, &rho, 3000, 11).unwrap();
        let f = frequencies(&rec).unwrap();
        let plain_cfg = MlConfig { conjugate: false, max_iterations: 100_000, ..MlConfig::default() };
        let plain = ml_estimate(&pom, &f, 3000, &plain_cfg, None).unwrap();
        let fast = ml_estimate(&pom, &f, 3000, &MlConfig::default(), None).unwrap();
        assert!(plain.converged() && fast.converged());
        assert!(fast.iterations <= plain.iterations, "{} vs {}", fast.iterations, plain.iterations);
        assert!(trace_distance(plain.estimate.hermitian(), fast.estimate.hermitian()) < 1e-6);
        let (a, b) = (plain.loglik_trace.last().unwrap(), fast.loglik_trace.last().unwrap());
        assert!((a - b).abs() < 1e-8 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn invalid_config_rejected() {
        let pom = sic_pom();
        let f = FrequencyVector([1.0 / 16.0; 16]);
        let cfg = MlConfig { trial_epsilons: (0.3, 0.3), ..MlConfig::default() };
        assert!(ml_estimate(&pom, &f, 10, &cfg, None).is_err());
        let cfg = MlConfig { stop_threshold: 0.0, ..MlConfig::default() };
        assert!(ml_estimate(&pom, &f, 10, &cfg, None).is_err());
    }

    #[test]
    fn max_iterations_reported_not_raised() {
        let pom = product_pom();
        let rec = simulate_clicks(&pom, &bell_state(BellState::PsiMinus), 1000, 2).unwrap();
        let f = frequencies(&rec).unwrap();
        let cfg = MlConfig { max_iterations: 2, ..MlConfig::default() };
        let res = ml_estimate(&pom, &f, 1000, &cfg, None).unwrap();
        assert_eq!(res.termination, Termination::MaxIterations);
        assert_eq!(res.iterations, 2);
    }
}
