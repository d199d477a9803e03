//! The SIC fiducial and its Heisenberg–Weyl orbit: fiducial overlaps, the
//! ergodic identity and the common concurrence of all outcomes.
//!
//! Run with `cargo run --example sic_fiducial`.

use pairtomo::linalg::{Matrix4, C64};
use pairtomo::pom::{appleby_fiducial, hw_group};
use pairtomo::rng::rng_from_seed;
use pairtomo::states::concurrence_pure;
use rand::Rng as _;

fn main() {
    let hw = hw_group();
    let fid = appleby_fiducial();
    println!("fiducial: {fid:?}\n");

    println!("|<f|X^m Z^n|f>|^2 (expected 1/5 off the identity):");
    for m in 0..4 {
        let row: Vec<String> = (0..4)
            .map(|n| {
                let u = hw.displacement(m, n);
                let overlap: C64 = (0..4).map(|i| fid[i].conj() * u.apply(&fid)[i]).sum();
                format!("{:.12}", overlap.norm_sqr())
            })
            .collect();
        println!("  m={m}: {}", row.join("  "));
    }

    println!("\nconcurrence of each outcome ket (expected sqrt(2/5) = {:.12}):", 0.4f64.sqrt());
    for m in 0..4 {
        let row: Vec<String> =
            (0..4).map(|n| format!("{:.12}", concurrence_pure(&hw.displacement(m, n).apply(&fid)).unwrap())).collect();
        println!("  m={m}: {}", row.join("  "));
    }

    let mut rng = rng_from_seed(3);
    let f = Matrix4::from_rows(std::array::from_fn(|_| {
        std::array::from_fn(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }));
    let mut total = Matrix4::zeros();
    for m in 0..4 {
        for n in 0..4 {
            total += hw.act(m, n, &f);
        }
    }
    let expected = Matrix4::identity() * (f.trace() * 4.0);
    println!("\nergodic identity residual: {:.3e}", total.max_abs_diff(&expected));
}
