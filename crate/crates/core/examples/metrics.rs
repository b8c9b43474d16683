//! Threshold metrics: EER on a dev score set, HTER on an eval set at the
//! dev threshold, and DET curve points written as CSV.
//!
//! ```text
//! cargo run --example metrics
//! ```

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crossface::evalstats::{det_points, eer_threshold, hter, rates_at, write_det_csv, PairScoreSet};

fn draw(rng: &mut ChaCha8Rng, n_gen: usize, n_imp: usize) -> PairScoreSet {
    let g = Normal::new(1.0, 0.6).unwrap();
    let i = Normal::new(-1.0, 0.8).unwrap();
    let genuine: Vec<f64> = (0..n_gen).map(|_| g.sample(rng)).collect();
    let impostor: Vec<f64> = (0..n_imp).map(|_| i.sample(rng)).collect();
    PairScoreSet::from_parts(&genuine, &impostor).unwrap()
}

fn main() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dev = draw(&mut rng, 10, 90);
    let eval = draw(&mut rng, 10, 90);

    let eer = eer_threshold(&dev);
    println!("dev EER point: tau {:.4}, FAR {:.4}, FRR {:.4}", eer.tau, eer.far, eer.frr);
    let at = rates_at(&eval, eer.tau);
    println!("eval at dev tau: FAR {:.5}, FRR {:.5}, HTER {:.5}", at.far, at.frr, at.hter);
    println!("HTER(0.02222, 0.1) = {:.5}", hter(0.02222, 0.1));

    let mut csv = Vec::new();
    let points = det_points(&eval);
    write_det_csv(&mut csv, &points)?;
    println!("\n{} DET points; first lines:", points.len());
    for line in String::from_utf8(csv)?.lines().take(5) {
        println!("{line}");
    }
    Ok(())
}
