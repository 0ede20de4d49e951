//! Monte Carlo checks of the geodesic, ball-projection and slab lemmas.

use tangent_recon::denoise::{verify_slab_lemma, DEFAULT_ANGLE_CONSTANT};
use tangent_recon::models::{verify_ball_projection, verify_geodesic_bounds, ManifoldModel};

fn main() -> tangent_recon::Result<()> {
    for model in [ManifoldModel::circle(1.0, 2)?, ManifoldModel::torus(2.0, 0.5, 3)?] {
        let geo = verify_geodesic_bounds(&model, 2000, 1);
        let ball = verify_ball_projection(&model, 2000, 5e-3, 1);
        let slab = verify_slab_lemma(&model, DEFAULT_ANGLE_CONSTANT, 2000, 1)?;
        println!(
            "d = {}: geodesic violations {}, ball-projection violations {}, slab violations {}",
            model.intrinsic_dim(),
            geo.violations,
            ball.violations,
            slab.violations()
        );
    }
    Ok(())
}
