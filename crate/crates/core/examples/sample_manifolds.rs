//! Draws noisy samples from each model and writes them as CSV.

use tangent_recon::io::save_cloud;
use tangent_recon::models::{sample, ManifoldModel, SampleSpec};

fn main() -> tangent_recon::Result<()> {
    let models = [
        ("circle", ManifoldModel::circle(1.0, 2)?),
        ("sphere", ManifoldModel::sphere(1.0, 3)?),
        ("torus", ManifoldModel::torus(2.0, 0.5, 3)?),
    ];
    let dir = std::env::temp_dir();
    for (name, model) in &models {
        let data = sample(model, &SampleSpec::new(2000, 0.8, 1))?;
        let signal = data.signal_indices().len();
        let path = dir.join(format!("{name}_sample.csv"));
        save_cloud(&path, &data.points, Some(&data.labels))?;
        println!(
            "{name}: reach {:.2}, volume {:.2}, {signal} signal + {} outliers -> {}",
            model.reach(),
            model.volume(),
            data.points.len() - signal,
            path.display()
        );
    }
    Ok(())
}
