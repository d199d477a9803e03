//! Figures of merit: trace distance, power-law fits and the performance factor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Hermitian;

pub const DEFAULT_D_THR: f64 = 0.1;

/// `½ tr|ρ − σ|`. Unphysical inputs are allowed and may give values above 1.
pub fn trace_distance<const D: usize>(rho: &Hermitian<D>, sigma: &Hermitian<D>) -> f64 {
    0.5 * (*rho - *sigma).trace_norm()
}

/// `D(N) = a / N^c`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub a: f64,
    pub c: f64,
    pub n_points: usize,
    /// RMS residual of the fit in `ln D`.
    pub residual_rms: f64,
}

impl PowerLawFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.a * n.powf(-self.c)
    }
}

/// Ordinary least squares of `ln D` on `ln N`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    for &(n, d) in points {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Fit(format!("non-positive distance {d} at N = {n}")));
        }
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Fit(format!("non-positive N = {n}")));
        }
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("N values must be distinct".into()));
    }

    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit { a: intercept.exp(), c: -slope, n_points: points.len(), residual_rms: (ss / k).sqrt() })
}

/// `N = (a / D_thr)^{1/c}`
pub fn n_to_threshold(fit: &PowerLawFit, d_thr: f64) -> Result<f64> {
    if !(fit.c > 0.0) {
        return Err(Error::Fit(format!("exponent c = {} is not positive", fit.c)));
    }
    if !(d_thr > 0.0) {
        return Err(Error::Fit(format!("threshold {d_thr} is not positive")));
    }
    Ok((fit.a / d_thr).powf(1.0 / fit.c))
}

/// `η = N_prod / N_sic`; `η < 1` favors the product measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub eta: f64,
    pub n_prod_thr: f64,
    pub n_sic_thr: f64,
    pub d_thr: f64,
}

pub fn eta(prod: &PowerLawFit, sic: &PowerLawFit, d_thr: f64) -> Result<EtaReport> {
    let n_prod_thr = n_to_threshold(prod, d_thr)?;
    let n_sic_thr = n_to_threshold(sic, d_thr)?;
    Ok(EtaReport { eta: n_prod_thr / n_sic_thr, n_prod_thr, n_sic_thr, d_thr })
}

/// Mean and sample standard deviation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
    pub count: usize,
}

impl MeanSd {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return MeanSd::default();
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        MeanSd { mean, sd, count }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sd / (self.count as f64).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, Matrix4, ONE, ZERO};
    use crate::states::{bell_state, BellState, DensityMatrix};

    #[test]
    fn distance_examples() {
        let rho = bell_state(BellState::PsiMinus);
        assert_eq!(trace_distance(rho.hermitian(), rho.hermitian()), 0.0);
        let a = DensityMatrix::pure(&[ONE, ZERO, ZERO, ZERO]);
        let b = DensityMatrix::pure(&[ZERO, ONE, ZERO, ZERO]);
        assert!((trace_distance(a.hermitian(), b.hermitian()) - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed();
        assert!((trace_distance(rho.hermitian(), mixed.hermitian()) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn distance_of_unphysical_input_may_exceed_one() {
        let a = DensityMatrix::pure(&[ONE, ZERO, ZERO, ZERO]);
        let weird = Hermitian::new(Matrix4::diag([-0.5, 1.5, 0.0, 0.0])).unwrap();
        assert!(trace_distance(a.hermitian(), &weird) > 1.0);
        let _ = c(0.0, 0.0);
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|k| (k as f64 * 100.0, 2.0 * (k as f64 * 100.0).powf(-0.5))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-10);
        assert!((fit.c - 0.5).abs() < 1e-10);
        assert!(fit.residual_rms < 1e-12);
        assert_eq!(fit.n_points, 10);
    }

    #[test]
    fn fit_errors() {
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 0.0), (3.0, 0.1)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (1.0, 0.5), (3.0, 0.1)]).is_err());
    }

    #[test]
    fn threshold_examples() {
        let fit = PowerLawFit { a: 2.0, c: 0.5, n_points: 3, residual_rms: 0.0 };
        assert!((n_to_threshold(&fit, 0.1).unwrap() - 400.0).abs() < 1e-9);
        let fit = PowerLawFit { a: 1.0, c: 1.0, n_points: 3, residual_rms: 0.0 };
        assert!((n_to_threshold(&fit, 0.1).unwrap() - 10.0).abs() < 1e-12);
        let bad = PowerLawFit { c: -0.1, ..fit };
        assert!(n_to_threshold(&bad, 0.1).is_err());
        assert!(eta(&bad, &fit, 0.1).is_err());
    }

    #[test]
    fn identical_fits_give_unit_eta() {
        let fit = PowerLawFit { a: 1.7, c: 0.48, n_points: 24, residual_rms: 0.01 };
        let r = eta(&fit, &fit, DEFAULT_D_THR).unwrap();
        assert_eq!(r.eta, 1.0);
        assert!((r.eta - r.n_prod_thr / r.n_sic_thr).abs() < 1e-12);
    }

    #[test]
    fn mean_sd() {
        let m = MeanSd::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.sd - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((m.standard_error() - m.sd / 2.0).abs() < 1e-15);
    }
}
