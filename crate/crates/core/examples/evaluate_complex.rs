//! Complex from exact tangents on a grid sample of the sphere, then its
//! Hausdorff distance and manifoldness.

use tangent_recon::harness::hausdorff_to_model;
use tangent_recon::models::{sample, ManifoldModel, SampleSpec};
use tangent_recon::sparsify::farthest_point_sampling;
use tangent_recon::tdc::{build, manifoldness_report};

fn main() -> tangent_recon::Result<()> {
    let model = ManifoldModel::sphere(1.0, 3)?;
    let dense = sample(&model, &SampleSpec::new(20_000, 1.0, 4))?.points;
    let eps = 0.2;
    let net = dense.subset(&farthest_point_sampling(&dense, eps, 0)?);
    let tangents = net
        .iter()
        .map(|p| model.tangent(p))
        .collect::<tangent_recon::Result<Vec<_>>>()?;
    let out = build(&net, &tangents, 4.0 * eps)?;
    let report = manifoldness_report(&out.complex, 2)?;
    let hd = hausdorff_to_model(&out.complex, &model, 0.1 * eps)?;
    println!(
        "{} vertices, {} triangles, χ = {}, manifold {}, hausdorff {hd:.4}, inconsistencies {}",
        net.len(),
        out.complex.simplices(2).len(),
        report.euler_characteristic,
        report.passed,
        out.inconsistencies.len()
    );
    Ok(())
}
