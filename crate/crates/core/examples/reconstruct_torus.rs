//! Torus reconstruction, writing the complex as OFF and listing the stars
//! that disagree.

use tangent_recon::config::ExperimentConfig;
use tangent_recon::harness::run_one;
use tangent_recon::models::ManifoldModel;
use tangent_recon::tdc::manifoldness_report;

fn main() -> tangent_recon::Result<()> {
    let config = ExperimentConfig {
        model: ManifoldModel::torus(2.0, 0.5, 3)?,
        ..ExperimentConfig::default()
    };
    let (complex, r) = run_one(&config, 4000, 0)?;
    let report = manifoldness_report(&complex, 2)?;
    let path = std::env::temp_dir().join("torus.off");
    std::fs::write(&path, complex.to_off())?;
    println!(
        "{} vertices, {} triangles, χ = {}, hausdorff {:.3}",
        r.vertices,
        r.triangles,
        report.euler_characteristic,
        r.hausdorff_error.unwrap_or(f64::NAN)
    );
    println!(
        "inconsistent star simplices {}, edges not in two triangles {}, bad links {} -> {}",
        r.inconsistencies,
        report.bad_edges.len(),
        report.bad_links.len(),
        path.display()
    );
    Ok(())
}
