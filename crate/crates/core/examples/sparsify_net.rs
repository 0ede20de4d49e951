//! Farthest-point ε-nets at a few radii.

use tangent_recon::linalg::dist;
use tangent_recon::models::{sample, ManifoldModel, SampleSpec};
use tangent_recon::sparsify::farthest_point_sampling;

fn main() -> tangent_recon::Result<()> {
    let model = ManifoldModel::torus(2.0, 0.5, 3)?;
    let cloud = sample(&model, &SampleSpec::new(5000, 1.0, 2))?.points;
    for eps in [0.4, 0.2, 0.1] {
        let net = farthest_point_sampling(&cloud, eps, 0)?;
        let cover = cloud
            .iter()
            .map(|p| net.iter().map(|&i| dist(p, cloud.point(i))).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        println!("ε = {eps}: {} net points, covering radius {cover:.3}", net.len());
    }
    Ok(())
}
