//! Reads a flat `section.key = value` configuration, applies an override
//! and prints the normalized settings with their hash.

use tangent_recon::config::{parse_flat, ExperimentConfig};

const TEXT: &str = "
# torus with clutter
model.kind = torus
model.major = 2
model.minor = 0.5
model.ambient_dim = 3
sample.n = 1000, 2000, 4000
sample.beta = 0.8
pipeline.kind = tdc_plus
";

fn main() -> tangent_recon::Result<()> {
    let mut config = ExperimentConfig::default();
    config.apply(&parse_flat(TEXT)?)?;
    config.apply(&parse_flat("sample.seeds = 5")?)?;
    print!("{}", config.to_text());
    println!("hash {}", config.hash());
    Ok(())
}
