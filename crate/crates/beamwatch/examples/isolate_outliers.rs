//! Minimal isolation-forest demo: a Gaussian cloud with a few planted
//! outliers, scored and thresholded at a contamination rate.
//!
//! Usage: `cargo run --release --example isolate_outliers`

use beamwatch::forest::IsolationForestModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    // 500 inliers around the origin, 5 outliers far away.
    let mut points: Vec<Vec<f64>> = (0..500)
        .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let outliers: Vec<Vec<f64>> = (0..5)
        .map(|_| (0..2).map(|_| rng.gen_range(8.0..10.0)).collect())
        .collect();
    points.extend(outliers.clone());

    let tau = 0.01;
    let model = IsolationForestModel::fit(&points, 100, 256, tau, 42)?;
    println!(
        "fitted {} trees, psi {}, score threshold {:.4} (tau = {tau})\n",
        model.n_trees, model.psi, model.score_threshold
    );

    let mut flagged = 0;
    for (i, p) in points.iter().enumerate() {
        let d = model.decide(p)?;
        if d.anomalous {
            flagged += 1;
            let kind = if i >= 500 { "planted outlier" } else { "inlier" };
            println!(
                "point {i:>3} [{:>6.2}, {:>6.2}]  score {:.4}  f {:+.4}  <- {kind}",
                p[0], p[1], d.score, d.f_value
            );
        }
    }
    println!("\nflagged {flagged} of {} points", points.len());
    Ok(())
}
