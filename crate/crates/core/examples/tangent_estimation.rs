//! Local PCA tangents on a clean circle sample, compared with the truth.

use tangent_recon::linalg::principal_angle;
use tangent_recon::models::{sample, ManifoldModel, SampleSpec};
use tangent_recon::tse::{default_bandwidth, estimate_tangents, TseParams};

fn main() -> tangent_recon::Result<()> {
    let model = ManifoldModel::circle(1.0, 2)?;
    for n in [500, 2000, 8000] {
        let data = sample(&model, &SampleSpec::new(n, 1.0, 7))?;
        let h = default_bandwidth(n, 1, model.volume())?;
        let field = estimate_tangents(&data.points, &TseParams::new(h, 1), None)?;
        let mut worst = 0.0f64;
        for (i, t) in field.iter() {
            let truth = model.tangent(&model.project(data.points.point(i))?)?;
            worst = worst.max(principal_angle(&truth, t)?);
        }
        println!(
            "n = {n:5}  h = {h:.4}  estimated {:5}  flagged {:5}  max angle {worst:.2e}",
            field.len(),
            field.flagged.len()
        );
    }
    Ok(())
}
