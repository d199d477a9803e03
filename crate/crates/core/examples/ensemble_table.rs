//! Sample averages of the pairs needed to reach D = 0.1 and of η over a
//! random ensemble, in the layout of a 2×2 table per ensemble.
//!
//! Run with `cargo run --release --example ensemble_table [ensemble] [states] [out_dir]`,
//! where `ensemble` is one of `unbiased_mixed`, `biased_mixed`, `pure`,
//! `max_entangled`.

use std::path::PathBuf;

use pairtomo::harness::{output, run_ensemble_campaign, CampaignConfig, Estimator};
use pairtomo::states::EnsembleKind;

fn main() {
    let mut args = std::env::args().skip(1);
    let kind: EnsembleKind = args.next().map_or(EnsembleKind::UnbiasedMixed, |s| s.parse().expect("ensemble"));
    let states: usize = args.next().map_or(10, |s| s.parse().expect("states"));
    let out = PathBuf::from(args.next().unwrap_or_else(|| format!("out/{kind}")));

    let result = run_ensemble_campaign(&CampaignConfig::ensemble(kind, states, 7)).expect("campaign");
    let s = &result.summary;
    println!("{kind}, {} states", s.n_states);
    println!("{:>8} {:>20} {:>20}", "", "RD", "ML");
    for (pom, cells) in &s.n_thr {
        let cell = |e: Estimator| cells.get(&e).map_or(String::new(), |m| format!("{:.0} ± {:.0}", m.mean, m.sd));
        println!("{:>8} {:>20} {:>20}", pom.to_string(), cell(Estimator::Rd), cell(Estimator::Ml));
    }
    let eta = |e: Estimator| s.eta.get(&e).map_or(String::new(), |m| format!("{:.2} ± {:.2}", m.mean, m.sd));
    println!("{:>8} {:>20} {:>20}", "eta", eta(Estimator::Rd), eta(Estimator::Ml));
    output::write_outputs(&result, &out, None).expect("write outputs");
    println!("wrote {}", out.display());
}
