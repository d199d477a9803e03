//! Draws states from each random ensemble and summarizes their purity, and
//! calibrates the mean matrix of the biased ensemble.
//!
//! Run with `cargo run --release --example random_states [draws]`.

use pairtomo::metrics::MeanSd;
use pairtomo::rng::rng_from_seed;
use pairtomo::states::{calibrate_biased_mean, partial_trace, EnsembleSpec};

fn main() {
    let draws: u64 = std::env::args().nth(1).map_or(2000, |s| s.parse().expect("draw count"));
    let mean = calibrate_biased_mean(0.8, 0.9, &mut rng_from_seed(1)).expect("calibration");
    println!("biased mean scale s = {:.4}\n", mean.0[0][0].re);

    let ensembles = [
        ("unbiased_mixed", EnsembleSpec::unbiased_mixed(7)),
        ("biased_mixed", EnsembleSpec::biased_mixed(mean, 7)),
        ("pure", EnsembleSpec::pure(7)),
        ("max_entangled", EnsembleSpec::max_entangled(7)),
    ];
    println!("{:<16} {:>10} {:>10} {:>12} {:>16}", "ensemble", "purity", "sd", "P(>0.8)", "reduced purity");
    for (name, spec) in ensembles {
        let states: Vec<_> = (0..draws).map(|i| spec.sample(i).expect("valid ensemble")).collect();
        let purities: Vec<f64> = states.iter().map(|s| s.purity()).collect();
        let above = purities.iter().filter(|&&p| p > 0.8).count() as f64 / draws as f64;
        let reduced: Vec<f64> = states
            .iter()
            .map(|s| {
                let r = partial_trace(s, 0);
                (r * r).trace().re
            })
            .collect();
        let p = MeanSd::of(&purities);
        println!("{name:<16} {:>10.4} {:>10.4} {above:>12.3} {:>16.4}", p.mean, p.sd, MeanSd::of(&reduced).mean);
    }
}
