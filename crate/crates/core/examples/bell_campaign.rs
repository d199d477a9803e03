//! The Bell-state campaign: distance curves, fits and η for the four Bell
//! states, written as CSV files.
//!
//! Run with `cargo run --release --example bell_campaign [out_dir] [runs]`.

use std::path::PathBuf;

use pairtomo::harness::{output, run_bell_campaign, CampaignConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out/bell".into()));
    let runs: usize = args.next().map_or(100, |s| s.parse().expect("runs"));
    let cfg = CampaignConfig { runs_per_point: runs, ..CampaignConfig::bell(42) };
    let result = run_bell_campaign(&cfg).expect("campaign");
    for state in &result.states {
        print!("{}:", state.label);
        for (estimator, e) in &state.eta {
            print!("  eta {estimator} = {:.3}", e.eta);
        }
        for cell in &state.cells {
            print!("  c[{} {}] = {:.3}", cell.pom, cell.estimator, cell.fit.c);
        }
        println!();
    }
    println!("RD estimates unphysical at N >= 1000: {:.1}%", 100.0 * result.summary.rd_unphysical_fraction_n1000);
    output::write_outputs(&result, &out, None).expect("write outputs");
    println!("wrote {}", out.display());
}
