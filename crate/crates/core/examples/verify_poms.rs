//! Builds both 16-outcome measurements and prints their verification tables.
//!
//! Run with `cargo run --example verify_poms`.

use pairtomo::pom::{verify_pom, Pom, PomKind};

fn main() {
    for kind in PomKind::ALL {
        let report = verify_pom(&Pom::build(kind));
        println!("{report}\n");
        assert!(report.passed(), "{kind} POM failed verification");
    }
}
