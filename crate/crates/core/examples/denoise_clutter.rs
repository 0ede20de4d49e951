//! Iterated slab denoising of a circle sample with 20% ambient outliers.

use tangent_recon::config::{ExperimentConfig, Pipeline};
use tangent_recon::harness::DenoisePlan;
use tangent_recon::models::{sample, ManifoldModel, SampleSpec};

fn main() -> tangent_recon::Result<()> {
    let model = ManifoldModel::circle(1.0, 2)?;
    let spec = SampleSpec::new(4000, 0.8, 3);
    let data = sample(&model, &spec)?;
    let config = ExperimentConfig {
        pipeline: Pipeline::TdcDelta { delta: 0.05 },
        ..ExperimentConfig::default()
    };
    let plan = DenoisePlan::for_config(&model, &data.points, &spec, &config)?;
    println!("κ = {:.1}, slab threshold t = {:.3}", plan.kappa, plan.slab.t);
    let outcome = plan.run(&data.points, Some(&data.labels), 1)?;
    for it in &outcome.diagnostics {
        println!(
            "pass {}  h = {:.4}  survivors {:5}  signal {:?}  outliers {:?}",
            it.k, it.h_k, it.survivors, it.true_positives, it.false_positives
        );
    }
    let far = outcome
        .survivors
        .iter()
        .filter(|&&i| model.distance(data.points.point(i)) > 0.1)
        .count();
    println!("survivors farther than 0.1 from the circle: {far}");
    Ok(())
}
