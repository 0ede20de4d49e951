//! Small convergence-rate experiment on the circle: log-log fit of the
//! median Hausdorff error against ln n / n.

use tangent_recon::config::ExperimentConfig;
use tangent_recon::harness::{fit_rate, run_experiment};

fn main() -> tangent_recon::Result<()> {
    let config = ExperimentConfig {
        n_values: vec![250, 500, 1000, 2000],
        seeds: 10,
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&config)?;
    let rate = fit_rate(&records, 1)?;
    for p in &rate.points {
        println!("n = {:5}  median error {:.3e}  failures {}/{}", p.n, p.median_error, p.failures, p.runs);
    }
    println!(
        "slope {:.3} (predicted {}), r² {:.3}",
        rate.fit.slope, rate.predicted_slope, rate.fit.r_squared
    );
    Ok(())
}
