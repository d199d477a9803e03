//! One simulated experiment per measurement: click counts, the raw-data
//! estimate, the maximum-likelihood estimate and their distances to the truth.
//!
//! Run with `cargo run --release --example simulate_and_reconstruct [N] [seed]`.

use pairtomo::estimate::{ml_estimate, rd_estimate, MlConfig};
use pairtomo::metrics::trace_distance;
use pairtomo::pom::{Pom, PomKind};
use pairtomo::simulate::{frequencies, simulate_clicks};
use pairtomo::states::{bell_state, BellState};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().map_or(1000, |s| s.parse().expect("N"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let truth = bell_state(BellState::PsiMinus);

    for kind in PomKind::ALL {
        let pom = Pom::build(kind);
        let record = simulate_clicks(&pom, &truth, n, seed).expect("simulation");
        let f = frequencies(&record).expect("frequencies");
        println!("{kind} POM, N = {n}: counts {:?}", record.counts);

        let rd = rd_estimate(&pom, &f);
        println!(
            "  RD: min eigenvalue {:+.4}, physical {}, D = {:.4}",
            rd.min_eig,
            rd.physical,
            trace_distance(&rd.matrix, truth.hermitian())
        );

        let ml = ml_estimate(&pom, &f, n, &MlConfig::default(), None).expect("ML");
        println!(
            "  ML: {:?} after {} iterations, tr|Rρ| = {:.2e}, purity {:.4}, D = {:.4}\n",
            ml.termination,
            ml.iterations,
            ml.final_stop_metric,
            ml.estimate.purity(),
            trace_distance(ml.estimate.hermitian(), truth.hermitian())
        );
    }
}
