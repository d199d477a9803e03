//! Follows the maximum-likelihood iteration step by step, with and without
//! conjugate step directions.
//!
//! Run with `cargo run --release --example ml_convergence [N] [seed]`.

use pairtomo::estimate::{log_likelihood, ml_estimate_observed, ml_r_operator, MlConfig};
use pairtomo::linalg::trace_norm;
use pairtomo::pom::{Pom, PomKind};
use pairtomo::simulate::{frequencies, simulate_clicks};
use pairtomo::states::EnsembleSpec;

fn main() {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().map_or(2000, |s| s.parse().expect("N"));
    let seed: u64 = args.next().map_or(4, |s| s.parse().expect("seed"));
    let pom = Pom::build(PomKind::Sic);
    let truth = EnsembleSpec::pure(seed).sample(0).expect("state");
    let record = simulate_clicks(&pom, &truth, n, seed).expect("simulation");
    let f = frequencies(&record).expect("frequencies");

    for conjugate in [true, false] {
        let cfg = MlConfig { conjugate, ..MlConfig::default() };
        println!("conjugate directions: {conjugate}");
        println!("{:>6} {:>18} {:>12} {:>12}", "k", "log-likelihood", "tr|Rρ|", "min eig");
        let result = ml_estimate_observed(&pom, &f, n, &cfg, None, |k, rho| {
            if k.is_power_of_two() || k == 0 {
                let r = ml_r_operator(&pom, &f, rho);
                let metric = trace_norm(&(*r.matrix() * *rho.matrix()));
                println!(
                    "{k:>6} {:>18.10} {metric:>12.3e} {:>12.3e}",
                    log_likelihood(&pom, &f, n, rho),
                    rho.hermitian().min_eigenvalue()
                );
            }
        })
        .expect("ML");
        println!(
            "{:?} after {} iterations, final tr|Rρ| = {:.3e}\n",
            result.termination, result.iterations, result.final_stop_metric
        );
    }
}
