//! Distance-versus-N curves for one random state, their power-law fits, the
//! number of pairs needed to reach D = 0.1, and the performance factor η.
//!
//! Run with `cargo run --release --example power_law_fit [runs]`.

use pairtomo::estimate::{ml_estimate, rd_estimate, MlConfig};
use pairtomo::harness::default_n_grid;
use pairtomo::metrics::{eta, fit_power_law, n_to_threshold, trace_distance, DEFAULT_D_THR};
use pairtomo::pom::{Pom, PomKind};
use pairtomo::rng::derive_seed;
use pairtomo::simulate::{frequencies, simulate_clicks};
use pairtomo::states::EnsembleSpec;

fn main() {
    let runs: u64 = std::env::args().nth(1).map_or(30, |s| s.parse().expect("runs"));
    let truth = EnsembleSpec::unbiased_mixed(5).sample(0).expect("state");
    let grid = default_n_grid();
    let mut fits = Vec::new();

    for kind in PomKind::ALL {
        let pom = Pom::build(kind);
        let mut rd_points = Vec::new();
        let mut ml_points = Vec::new();
        for (i, &n) in grid.iter().enumerate() {
            let (mut rd_sum, mut ml_sum) = (0.0, 0.0);
            for run in 0..runs {
                let record = simulate_clicks(&pom, &truth, n, derive_seed(9, &[i as u64, run])).expect("simulation");
                let f = frequencies(&record).expect("frequencies");
                rd_sum += trace_distance(&rd_estimate(&pom, &f).matrix, truth.hermitian());
                let ml = ml_estimate(&pom, &f, n, &MlConfig::default(), None).expect("ML");
                ml_sum += trace_distance(ml.estimate.hermitian(), truth.hermitian());
            }
            rd_points.push((n as f64, rd_sum / runs as f64));
            ml_points.push((n as f64, ml_sum / runs as f64));
        }
        for (name, points) in [("RD", rd_points), ("ML", ml_points)] {
            let fit = fit_power_law(&points).expect("fit");
            println!(
                "{kind:>8} {name}: D = {:.3} / N^{:.3} (rms {:.3}), N(D=0.1) = {:.0}",
                fit.a,
                fit.c,
                fit.residual_rms,
                n_to_threshold(&fit, DEFAULT_D_THR).expect("threshold")
            );
            fits.push(fit);
        }
    }
    let rd = eta(&fits[0], &fits[2], DEFAULT_D_THR).expect("eta");
    let ml = eta(&fits[1], &fits[3], DEFAULT_D_THR).expect("eta");
    println!("eta RD = {:.3}, eta ML = {:.3}", rd.eta, ml.eta);
}
