//! End-to-end reconstruction of a circle from a clean sample.

use tangent_recon::config::ExperimentConfig;
use tangent_recon::harness::run_one;

fn main() -> tangent_recon::Result<()> {
    let config = ExperimentConfig::default();
    for n in [250, 1000, 4000] {
        let (complex, r) = run_one(&config, n, 0)?;
        println!(
            "n = {n:5}  ε = {:.4}  {} vertices  {} edges  hausdorff {:.2e}  single cycle {}",
            r.eps.unwrap_or(f64::NAN),
            r.vertices,
            r.edges,
            r.hausdorff_error.unwrap_or(f64::NAN),
            r.manifold
        );
        assert_eq!(complex.simplices(1).len(), r.edges);
    }
    Ok(())
}
