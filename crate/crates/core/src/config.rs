//! Experiment configuration in a flat `section.key = value` text format.
//!
//! ```text
//! # circle rate run
//! model.kind = circle
//! model.radius = 1
//! model.ambient_dim = 2
//! sample.n = 250, 500, 1000
//! sample.seeds = 20
//! pipeline.kind = tdc
//! tse.c = 6.283
//! ```
//!
//! Blank lines and `#` comments are ignored. Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::models::{ManifoldModel, ModelKind};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "TDC_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Pipeline {
    Tdc,
    TdcDelta { delta: f64 },
    TdcPlus,
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Tdc => "tdc",
            Pipeline::TdcDelta { .. } => "tdc_delta",
            Pipeline::TdcPlus => "tdc_plus",
        }
    }
}

/// Slab-denoising constants; `None` fields take their derived defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    /// Threshold factor; `None` calibrates it on a noise-free pilot sample.
    pub t: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// Bandwidth-schedule constant; `None` sizes it from the slab width
    /// (see `harness::auto_kappa`).
    pub kappa: Option<f64>,
    /// Angle-bound constant in the default `k1`.
    pub angle_constant: f64,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        DenoiseConfig {
            t: None,
            k1: None,
            k2: None,
            kappa: None,
            angle_constant: crate::denoise::DEFAULT_ANGLE_CONSTANT,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: ManifoldModel,
    pub n_values: Vec<usize>,
    pub beta: f64,
    pub seeds: usize,
    pub seed_base: u64,
    /// Outlier-ball radius; `None` means `diam(M) + ρ`.
    pub k0: Option<f64>,
    pub pipeline: Pipeline,
    /// Bandwidth constant `c` in `h = (c ln n/(n − 1))^{1/d}`; `None`
    /// means `vol(M)`.
    pub tse_c: Option<f64>,
    pub denoise: DenoiseConfig,
    /// Sparsification radius as a multiple of the final bandwidth.
    pub sparsify_c: f64,
    /// Star neighbor radius as a multiple of the sparsification radius.
    pub star_radius_factor: f64,
    /// Hausdorff evaluation resolution as a multiple of the sparsification
    /// radius.
    pub resolution_factor: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ManifoldModel::circle(1.0, 2).expect("valid circle"),
            n_values: vec![1000],
            beta: 1.0,
            seeds: 1,
            seed_base: 0,
            k0: None,
            pipeline: Pipeline::Tdc,
            tse_c: None,
            denoise: DenoiseConfig::default(),
            sparsify_c: 1.0,
            star_radius_factor: 4.0,
            resolution_factor: 0.1,
            output_dir: default_output_dir(),
        }
    }
}

/// `$TDC_OUTPUT_DIR` if set, else `./tdc-out`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("tdc-out"))
}

fn invalid<S: Into<String>>(msg: S) -> Error {
    Error::InvalidConfig(msg.into())
}

fn num(key: &str, value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| invalid(format!("{key}: expected a number, got {value:?}")))
}

fn int(key: &str, value: &str) -> Result<usize> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(format!("{key}: expected a nonnegative integer, got {value:?}")))
}

fn opt_num(key: &str, value: &str) -> Result<Option<f64>> {
    match value.trim() {
        "auto" | "" => Ok(None),
        v => num(key, v).map(Some),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".into(), |x| format!("{x:?}"))
}

/// Parses `key = value` lines into an ordered map.
pub fn parse_flat(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| invalid(format!("line {}: expected key = value", lineno + 1)))?;
        let key = k.trim();
        if !key.contains('.') {
            return Err(invalid(format!("line {}: key {key:?} lacks a section prefix", lineno + 1)));
        }
        if map.insert(key.to_string(), v.trim().to_string()).is_some() {
            return Err(invalid(format!("duplicate key {key}")));
        }
    }
    Ok(map)
}

impl ExperimentConfig {
    pub fn from_text(text: &str) -> Result<Self> {
        Self::from_map(&parse_flat(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    /// Builds a config from defaults overridden by `map`.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(map)?;
        Ok(cfg)
    }

    /// Applies overrides; model keys are resolved together.
    pub fn apply(&mut self, map: &BTreeMap<String, String>) -> Result<()> {
        let mut flat = self.to_map();
        for (k, v) in map {
            if !flat.contains_key(k) && !OPTIONAL_KEYS.contains(&k.as_str()) {
                return Err(invalid(format!("unknown key {k}")));
            }
            flat.insert(k.clone(), v.clone());
        }
        let get = |k: &str| flat.get(k).map(String::as_str).unwrap_or("");
        let ambient = int("model.ambient_dim", get("model.ambient_dim"))?;
        self.model = match get("model.kind") {
            "circle" => ManifoldModel::circle(num("model.radius", get("model.radius"))?, ambient),
            "sphere" => ManifoldModel::sphere(num("model.radius", get("model.radius"))?, ambient),
            "torus" => ManifoldModel::torus(
                num("model.major", get("model.major"))?,
                num("model.minor", get("model.minor"))?,
                ambient,
            ),
            other => return Err(invalid(format!("model.kind: unknown model {other:?}"))),
        }
        .map_err(|e| invalid(format!("model: {e}")))?;
        let mut n_values = get("sample.n")
            .split(',')
            .map(|s| int("sample.n", s))
            .collect::<Result<Vec<_>>>()?;
        n_values.sort_unstable();
        n_values.dedup();
        self.n_values = n_values;
        self.beta = num("sample.beta", get("sample.beta"))?;
        self.seeds = int("sample.seeds", get("sample.seeds"))?;
        self.seed_base = get("sample.seed_base")
            .parse()
            .map_err(|_| invalid("sample.seed_base: expected an integer"))?;
        self.k0 = opt_num("sample.k0", get("sample.k0"))?;
        self.pipeline = match get("pipeline.kind") {
            "tdc" => Pipeline::Tdc,
            "tdc_delta" => Pipeline::TdcDelta {
                delta: num("pipeline.delta", get("pipeline.delta"))?,
            },
            "tdc_plus" => Pipeline::TdcPlus,
            other => return Err(invalid(format!("pipeline.kind: unknown pipeline {other:?}"))),
        };
        self.tse_c = opt_num("tse.c", get("tse.c"))?;
        self.denoise = DenoiseConfig {
            t: opt_num("denoise.t", get("denoise.t"))?,
            k1: opt_num("denoise.k1", get("denoise.k1"))?,
            k2: opt_num("denoise.k2", get("denoise.k2"))?,
            kappa: opt_num("denoise.kappa", get("denoise.kappa"))?,
            angle_constant: num("denoise.angle_constant", get("denoise.angle_constant"))?,
        };
        self.sparsify_c = num("sparsify.c", get("sparsify.c"))?;
        self.star_radius_factor = num("tdc.radius_factor", get("tdc.radius_factor"))?;
        self.resolution_factor = num("eval.resolution_factor", get("eval.resolution_factor"))?;
        self.output_dir = PathBuf::from(get("output.dir"));
        self.validate()
    }

    /// Tangent-estimation bandwidth constant in effect.
    pub fn bandwidth_constant(&self) -> f64 {
        self.tse_c.unwrap_or_else(|| self.model.volume())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sparsify.c", self.sparsify_c),
            ("tdc.radius_factor", self.star_radius_factor),
            ("eval.resolution_factor", self.resolution_factor),
            ("denoise.angle_constant", self.denoise.angle_constant),
        ];
        for (k, v) in positive {
            if !(v > 0.0) {
                return Err(invalid(format!("{k} must be positive")));
            }
        }
        for (k, v) in [
            ("tse.c", self.tse_c),
            ("denoise.t", self.denoise.t),
            ("denoise.k1", self.denoise.k1),
            ("denoise.k2", self.denoise.k2),
            ("denoise.kappa", self.denoise.kappa),
            ("sample.k0", self.k0),
        ] {
            if v.is_some_and(|x| !(x > 0.0)) {
                return Err(invalid(format!("{k} must be positive")));
            }
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(invalid("sample.beta must lie in (0, 1]"));
        }
        if self.n_values.is_empty() || self.n_values[0] == 0 {
            return Err(invalid("sample.n must list positive sizes"));
        }
        if self.seeds == 0 {
            return Err(invalid("sample.seeds must be positive"));
        }
        if let Pipeline::TdcDelta { delta } = self.pipeline {
            if !(delta > 0.0) {
                return Err(invalid("pipeline.delta must be positive"));
            }
        }
        Ok(())
    }

    /// All keys with their current values.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match self.model.kind {
            ModelKind::Circle { radius } => {
                put("model.kind", "circle".into());
                put("model.radius", format!("{radius:?}"));
            }
            ModelKind::Sphere { radius } => {
                put("model.kind", "sphere".into());
                put("model.radius", format!("{radius:?}"));
            }
            ModelKind::Torus { major, minor } => {
                put("model.kind", "torus".into());
                put("model.major", format!("{major:?}"));
                put("model.minor", format!("{minor:?}"));
            }
        }
        put("model.ambient_dim", self.model.ambient_dim.to_string());
        put(
            "sample.n",
            self.n_values.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
        );
        put("sample.beta", format!("{:?}", self.beta));
        put("sample.seeds", self.seeds.to_string());
        put("sample.seed_base", self.seed_base.to_string());
        put("sample.k0", fmt_opt(self.k0));
        put("pipeline.kind", self.pipeline.name().into());
        if let Pipeline::TdcDelta { delta } = self.pipeline {
            put("pipeline.delta", format!("{delta:?}"));
        }
        put("tse.c", fmt_opt(self.tse_c));
        put("denoise.t", fmt_opt(self.denoise.t));
        put("denoise.k1", fmt_opt(self.denoise.k1));
        put("denoise.k2", fmt_opt(self.denoise.k2));
        put("denoise.kappa", fmt_opt(self.denoise.kappa));
        put("denoise.angle_constant", format!("{:?}", self.denoise.angle_constant));
        put("sparsify.c", format!("{:?}", self.sparsify_c));
        put("tdc.radius_factor", format!("{:?}", self.star_radius_factor));
        put("eval.resolution_factor", format!("{:?}", self.resolution_factor));
        put("output.dir", self.output_dir.display().to_string());
        m
    }

    pub fn to_text(&self) -> String {
        self.to_map()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// SHA-256 of every setting that affects results (the output directory
    /// is excluded).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in self.to_map() {
            if k != "output.dir" {
                h.update(format!("{k}={v}\n").as_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Keys that only some model kinds or pipelines carry.
const OPTIONAL_KEYS: [&str; 5] = [
    "model.kind",
    "model.radius",
    "model.major",
    "model.minor",
    "pipeline.delta",
];
