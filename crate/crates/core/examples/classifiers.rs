//! Trains the three pair classifiers on a toy two-class problem, with the
//! subject-fold grid search used by the experiment runner.
//!
//! ```text
//! cargo run --example classifiers
//! ```

use std::error::Error;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crossface::classify::{grid_points, grid_search, ClassifierKind, GridDensity, GridSpec, TrainPool};
use crossface::evalstats::{eer_threshold, PairScoreSet};
use crossface::Label;

fn main() -> Result<(), Box<dyn Error>> {
    // two overlapping Gaussian clouds, one genuine pair per three impostors
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..240 {
        let genuine = i % 4 == 0;
        let (center, spread) = if genuine { (0.8, 0.6) } else { (-0.8, 1.0) };
        rows.push((0..2).map(|_| center + spread * rng.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>());
        labels.push(if genuine { Label::Genuine } else { Label::Impostor });
    }
    let (train, test) = (0..180usize, 180..240usize);
    let pool = TrainPool::new(rows[train.clone()].iter().map(Vec::as_slice).collect(), labels[train].to_vec())?;
    let folds: Vec<Vec<usize>> = (0..3).map(|f| (0..pool.len()).filter(|i| i % 3 == f).collect()).collect();
    let spec = GridSpec::new(GridDensity::Coarse);

    for kind in ClassifierKind::TRAINABLE {
        let points = grid_points(kind, &spec);
        let outcome = grid_search(kind, &pool, &folds, &points, 7)?;
        let all: Vec<usize> = (0..pool.len()).collect();
        let model = pool.fit(kind, &all, &outcome.best, 7)?.into_model(&pool);
        let scores = PairScoreSet::new(test.clone().map(|i| (model.score(&rows[i]).unwrap(), labels[i])))?;
        println!(
            "{:<10} {:>3} grid points, best {} (CV EER {:.3}), held-out EER {:.3}",
            kind.label(),
            points.len(),
            outcome.best,
            outcome.mean_cv_eer,
            eer_threshold(&scores).hter
        );
    }
    Ok(())
}
