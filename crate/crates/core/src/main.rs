use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use tangent_recon::config::{parse_flat, ExperimentConfig};
use tangent_recon::harness::{
    fit_rate, hausdorff_to_model, run_experiment, run_one, write_rate_plot, DenoisePlan, RecordStore,
};
use tangent_recon::interp::{check_differential_bounds, verify_interpolation, InterpolationProblem};
use tangent_recon::io::{load_cloud, save_cloud, save_indices};
use tangent_recon::models::{sample, SampleSpec};
use tangent_recon::sparsify::farthest_point_sampling;
use tangent_recon::tdc::{manifoldness_report, SimplicialComplex};
use tangent_recon::tse::{default_bandwidth, estimate_tangents, TseParams};
use tangent_recon::Error;

/// Manifold reconstruction experiments: sampling, tangent estimation,
/// denoising, sparsification, tangential Delaunay reconstruction and
/// convergence-rate measurement.
///
/// Settings come from a flat `section.key = value` file (`--config`),
/// overridden by `--set section.key=value`. Exit codes: 0 success,
/// 1 failed check, 2 invalid configuration.
#[derive(Parser)]
#[command(name = "tdc", version)]
struct Cli {
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set sample.n=500,1000`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory (defaults to `output.dir`, itself defaulting to
    /// $TDC_OUTPUT_DIR or ./tdc-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Sample size (defaults to the first `sample.n`).
    #[arg(long)]
    n: Option<usize>,
    /// Seed (defaults to `sample.seed_base`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a labeled sample and write it as CSV.
    Sample(RunArgs),
    /// Estimate tangent spaces of a CSV cloud by local PCA.
    Tangents {
        #[arg(long)]
        input: PathBuf,
        /// Bandwidth (defaults to `(c ln n/(n − 1))^{1/d}` with `tse.c`).
        #[arg(long)]
        h: Option<f64>,
    },
    /// Run the configured slab-denoising schedule on a CSV cloud.
    Denoise {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Farthest-point subsample of a CSV cloud.
    Sparsify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        eps: f64,
    },
    /// Run the configured pipeline once and write the complex.
    Reconstruct(RunArgs),
    /// Hausdorff distance and manifoldness of a saved complex.
    Evaluate {
        #[arg(long)]
        complex: PathBuf,
        /// Fail unless the Hausdorff error is at most this.
        #[arg(long)]
        max_hausdorff: Option<f64>,
        /// Fail unless the complex passes the manifoldness checks.
        #[arg(long)]
        require_manifold: bool,
        /// Evaluation resolution (defaults to 1e-3 · diam(M)).
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Run every (n, seed) of the config, append the records and fit the
    /// convergence rate.
    Rate {
        /// Fail unless the fitted slope lies in `LO,HI`.
        #[arg(long, value_name = "LO,HI")]
        expect_slope: Option<String>,
    },
    /// Check the interpolation bounds on random anchor problems.
    InterpVerify {
        #[arg(long, default_value_t = 20)]
        problems: usize,
        #[arg(long, default_value_t = 3)]
        anchors: usize,
        #[arg(long, default_value_t = 0.4)]
        delta: f64,
        #[arg(long, default_value_t = 0.02)]
        eta: f64,
        #[arg(long, default_value_t = 0.03)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// A run that completed but whose requested check did not hold.
struct CheckFailed(String);

enum Failure {
    Check(CheckFailed),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(e.into())
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if !cli.set.is_empty() {
        cfg.apply(&parse_flat(&cli.set.join("\n"))?)?;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf, Failure> {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value)?)?;
    Ok(path)
}

fn spec_for(cfg: &ExperimentConfig, args: &RunArgs) -> SampleSpec {
    let mut spec = SampleSpec::new(
        args.n.unwrap_or(cfg.n_values[0]),
        cfg.beta,
        args.seed.unwrap_or(cfg.seed_base),
    );
    spec.k0 = cfg.k0;
    spec
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    let out = cfg.output_dir.clone();
    fs::create_dir_all(&out)?;
    let model = &cfg.model;
    let d = model.intrinsic_dim();
    match &cli.command {
        Command::Sample(args) => {
            let spec = spec_for(&cfg, args);
            let data = sample(model, &spec)?;
            let path = out.join("sample.csv");
            save_cloud(&path, &data.points, Some(&data.labels))?;
            println!("wrote {} points to {}", data.points.len(), path.display());
        }
        Command::Tangents { input, h } => {
            let (cloud, _) = load_cloud(input)?;
            let h = match h {
                Some(h) => *h,
                None => default_bandwidth(cloud.len(), d, cfg.bandwidth_constant())?,
            };
            let field = estimate_tangents(&cloud, &TseParams::new(h, d), None)?;
            let path = out.join("tangents.json");
            fs::write(&path, field.to_json()?)?;
            println!(
                "h = {h:.6}: {} estimates, {} flagged; wrote {}",
                field.len(),
                field.flagged.len(),
                path.display()
            );
        }
        Command::Denoise { input, seed } => {
            let (cloud, labels) = load_cloud(input)?;
            let spec = SampleSpec::new(cloud.len(), cfg.beta, *seed);
            let plan = DenoisePlan::for_config(model, &cloud, &spec, &cfg)?;
            let outcome = plan.run(&cloud, labels.as_deref(), d)?;
            save_indices(&out.join("survivors.csv"), &outcome.survivors)?;
            let kept = cloud.subset(&outcome.survivors);
            let kept_labels = labels.map(|l| outcome.survivors.iter().map(|&i| l[i]).collect::<Vec<_>>());
            save_cloud(&out.join("denoised.csv"), &kept, kept_labels.as_deref())?;
            write_json(
                &out,
                "denoise.json",
                &json!({
                    "bandwidths": plan.bandwidths,
                    "kappa": plan.kappa,
                    "k_hat": plan.k_hat,
                    "k1": plan.slab.k1,
                    "k2": plan.slab.k2,
                    "t": plan.slab.t,
                    "diagnostics": outcome.diagnostics,
                }),
            )?;
            println!("kept {} of {} points", outcome.survivors.len(), cloud.len());
        }
        Command::Sparsify { input, eps } => {
            let (cloud, labels) = load_cloud(input)?;
            let net = farthest_point_sampling(&cloud, *eps, 0)?;
            save_indices(&out.join("net_indices.csv"), &net)?;
            let net_labels = labels.map(|l| net.iter().map(|&i| l[i]).collect::<Vec<_>>());
            save_cloud(&out.join("net.csv"), &cloud.subset(&net), net_labels.as_deref())?;
            println!("kept {} of {} points at eps = {eps}", net.len(), cloud.len());
        }
        Command::Reconstruct(args) => {
            let spec = spec_for(&cfg, args);
            let (complex, record) = run_one(&cfg, spec.n, spec.seed)?;
            fs::write(out.join("complex.json"), complex.to_json()?)?;
            if d == 2 {
                fs::write(out.join("complex.off"), complex.to_off())?;
            }
            write_json(&out, "record.json", &serde_json::to_value(&record)?)?;
            match &record.failure {
                None => println!(
                    "{} vertices, {} edges, {} triangles; hausdorff {:.3e}; manifold {}",
                    record.vertices,
                    record.edges,
                    record.triangles,
                    record.hausdorff_error.unwrap_or(f64::NAN),
                    record.manifold
                ),
                Some(f) => println!("run failed: {f}"),
            }
        }
        Command::Evaluate {
            complex,
            max_hausdorff,
            require_manifold,
            resolution,
        } => {
            let c = SimplicialComplex::from_json(&fs::read_to_string(complex)?)?;
            let res = resolution.unwrap_or(1e-3 * model.diameter());
            let hd = hausdorff_to_model(&c, model, res)?;
            let report = manifoldness_report(&c, d)?;
            write_json(
                &out,
                "evaluation.json",
                &json!({"hausdorff": hd, "resolution": res, "manifoldness": report}),
            )?;
            println!(
                "hausdorff {hd:.6e} (resolution {res:.1e}); manifold {}; euler {}",
                report.passed, report.euler_characteristic
            );
            if let Some(max) = max_hausdorff {
                if hd > *max {
                    return Err(Failure::Check(CheckFailed(format!("hausdorff {hd:.3e} > {max:.3e}"))));
                }
            }
            if *require_manifold && !report.passed {
                return Err(Failure::Check(CheckFailed("complex is not a manifold".into())));
            }
        }
        Command::Rate { expect_slope } => {
            let bounds = expect_slope
                .as_deref()
                .map(parse_range)
                .transpose()?;
            let store = RecordStore::open(&out, &cfg)?;
            let records = run_experiment(&cfg)?;
            store.append(&records)?;
            let rate = fit_rate(&records, d)?;
            write_rate_plot(&out.join("rate_plot.csv"), &rate)?;
            write_json(&out, "rate_fit.json", &serde_json::to_value(&rate)?)?;
            for p in &rate.points {
                println!(
                    "n = {:6}  median error {:.4e}  failures {}/{}",
                    p.n, p.median_error, p.failures, p.runs
                );
            }
            println!(
                "slope {:.3} (predicted {:.3}), r² {:.3}",
                rate.fit.slope, rate.predicted_slope, rate.fit.r_squared
            );
            if let Some((lo, hi)) = bounds {
                if !(lo..=hi).contains(&rate.fit.slope) {
                    return Err(Failure::Check(CheckFailed(format!(
                        "slope {:.3} outside [{lo}, {hi}]",
                        rate.fit.slope
                    ))));
                }
            }
        }
        Command::InterpVerify {
            problems,
            anchors,
            delta,
            eta,
            theta,
            seed,
        } => {
            let mut failed = 0;
            let mut rows = Vec::new();
            for k in 0..*problems as u64 {
                let s = seed.wrapping_add(k);
                let prob = InterpolationProblem::random(model, *anchors, *delta, *eta, *theta, s)?;
                let diff = check_differential_bounds(&prob, 64, 1e-5 * prob.ell, s)?;
                let interp = verify_interpolation(&prob, 8, s)?;
                if !(diff.passed && interp.passed) {
                    failed += 1;
                }
                rows.push(json!({"seed": s, "differential": diff, "interpolation": interp}));
            }
            write_json(&out, "interp_verify.json", &serde_json::Value::Array(rows))?;
            println!("{} of {problems} problems passed every check", problems - failed);
            if failed > 0 {
                return Err(Failure::Check(CheckFailed(format!("{failed} problems violated a bound"))));
            }
        }
    }
    Ok(())
}

fn parse_range(s: &str) -> Result<(f64, f64), Error> {
    let bad = || Error::InvalidConfig(format!("expected LO,HI, got {s:?}"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(CheckFailed(msg))) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e @ (Error::InvalidConfig(_) | Error::ConfigHashMismatch { .. }))) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
