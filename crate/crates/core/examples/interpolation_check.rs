//! Builds an interpolating manifold through perturbed anchors on the torus
//! and checks its differential, distance and reach bounds.

use tangent_recon::interp::{check_differential_bounds, verify_interpolation, InterpolationProblem};
use tangent_recon::models::ManifoldModel;

fn main() -> tangent_recon::Result<()> {
    let model = ManifoldModel::torus(2.0, 0.5, 3)?;
    let prob = InterpolationProblem::random(&model, 3, 0.4, 0.01, 0.03, 5)?;
    let diff = check_differential_bounds(&prob, 64, 1e-5 * prob.ell, 5)?;
    println!(
        "Jacobian {:.3}/{:.3}, inverse {:.3}/{:.3}, Hessian {:.3}/{:.3}",
        diff.max_jacobian_norm,
        diff.jacobian_bound,
        diff.max_inverse_norm,
        diff.inverse_bound,
        diff.max_hessian_norm,
        diff.hessian_bound
    );
    let r = verify_interpolation(&prob, 8, 5)?;
    println!(
        "anchor error {:.1e}, tangent angle {:.1e}, hausdorff {:.4} ≤ {:.4}, reach {:.3} ≥ {:.3}, passed {}",
        r.anchor_error_max, r.tangent_angle_max, r.hausdorff, r.hausdorff_bound, r.reach_estimate, r.reach_bound, r.passed
    );
    Ok(())
}
