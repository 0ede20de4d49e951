//! End-to-end pipelines (TDC, TDCδ, TDC+), evaluation against the model,
//! experiment records and rate fitting.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{Label, PointCloud};
use crate::config::{ExperimentConfig, Pipeline};
use crate::denoise::{
    calibrate_threshold, denoise_passes, k_delta, k_hat, schedule, DenoiseOutcome, SlabSpec,
};
use crate::error::{precondition, Error, Result};
use crate::linalg::{dist2, dot, principal_angle, sub, Subspace};
use crate::models::{sample, LabeledCloud, ManifoldModel, SampleSpec};
use crate::sparsify::farthest_point_sampling;
use crate::spatial::GridIndex;
use crate::stats::{median, ols, LinearFit};
use crate::tdc::{build, manifoldness_report, Simplex, SimplicialComplex};
use crate::tse::{default_bandwidth, estimate_tangents, TseParams};

/// Seed offset of the noise-free pilot sample used for threshold
/// calibration.
const PILOT_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

/// One pipeline run. Optional fields are absent when they do not apply or
/// the run failed before producing them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config_hash: String,
    pub pipeline: String,
    pub seed: u64,
    pub n: usize,
    pub beta: f64,
    pub failure: Option<String>,
    pub hausdorff_error: Option<f64>,
    pub max_angle_error: Option<f64>,
    /// Tangent-estimation bandwidth of the reconstruction step.
    pub h: Option<f64>,
    pub eps: Option<f64>,
    pub vertices: usize,
    pub edges: usize,
    pub triangles: usize,
    pub manifold: bool,
    pub components: usize,
    pub euler_characteristic: i64,
    pub inconsistencies: usize,
    pub denoise_passes: Option<usize>,
    pub k_hat: Option<usize>,
    pub t: Option<f64>,
    pub kappa: Option<f64>,
    pub signal_total: Option<usize>,
    pub signal_kept: Option<usize>,
    pub outliers_total: Option<usize>,
    pub outliers_kept: Option<usize>,
    /// Outliers farther than the final `h²/ρ` from M.
    pub far_outliers_total: Option<usize>,
    pub far_outliers_kept: Option<usize>,
    pub wall_time_s: f64,
}

impl ExperimentRecord {
    fn new(config: &ExperimentConfig, pipeline: &str, spec: &SampleSpec) -> Self {
        ExperimentRecord {
            config_hash: config.hash(),
            pipeline: pipeline.to_string(),
            seed: spec.seed,
            n: spec.n,
            beta: spec.beta,
            failure: None,
            hausdorff_error: None,
            max_angle_error: None,
            h: None,
            eps: None,
            vertices: 0,
            edges: 0,
            triangles: 0,
            manifold: false,
            components: 0,
            euler_characteristic: 0,
            inconsistencies: 0,
            denoise_passes: None,
            k_hat: None,
            t: None,
            kappa: None,
            signal_total: None,
            signal_kept: None,
            outliers_total: None,
            outliers_kept: None,
            far_outliers_total: None,
            far_outliers_kept: None,
            wall_time_s: 0.0,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// Every signal point kept and every far outlier removed.
    pub fn denoise_exact(&self) -> bool {
        matches!(
            (self.signal_total, self.signal_kept, self.far_outliers_kept),
            (Some(a), Some(b), Some(0)) if a == b
        )
    }
}

// ---------------------------------------------------------------------------
// Distance from the model to a complex.

fn closest_on_segment(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(&ab, &ab);
    let t = if len2 > 0.0 {
        (dot(&sub(p, a), &ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q: Vec<f64> = a.iter().zip(&ab).map(|(x, y)| x + t * y).collect();
    dist2(p, &q)
}

/// Squared distance from `p` to triangle `abc` in any dimension (Voronoi
/// region walk on barycentric coordinates).
fn closest_on_triangle(p: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(&ab, &ap);
    let d2 = dot(&ac, &ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return dist2(p, a);
    }
    let bp = sub(p, b);
    let d3 = dot(&ab, &bp);
    let d4 = dot(&ac, &bp);
    if d3 >= 0.0 && d4 <= d3 {
        return dist2(p, b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return closest_on_segment(p, a, b);
    }
    let cp = sub(p, c);
    let d5 = dot(&ab, &cp);
    let d6 = dot(&ac, &cp);
    if d6 >= 0.0 && d5 <= d6 {
        return dist2(p, c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return closest_on_segment(p, a, c);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return closest_on_segment(p, b, c);
    }
    let denom = va + vb + vc;
    if denom <= 0.0 {
        // Degenerate triangle: fall back to its edges.
        return closest_on_segment(p, a, b)
            .min(closest_on_segment(p, a, c))
            .min(closest_on_segment(p, b, c));
    }
    let v = vb / denom;
    let w = vc / denom;
    let q: Vec<f64> = (0..p.len()).map(|k| a[k] + v * ab[k] + w * ac[k]).collect();
    dist2(p, &q)
}

/// Exact point-to-complex distances with a vertex grid index.
struct ComplexLocator<'a> {
    complex: &'a SimplicialComplex,
    index: GridIndex<'a>,
    incident: Vec<Vec<usize>>,
    simplices: Vec<Simplex>,
    max_edge: f64,
}

impl<'a> ComplexLocator<'a> {
    fn new(complex: &'a SimplicialComplex) -> Self {
        let v = &complex.vertices;
        let mut simplices: Vec<Simplex> = Vec::new();
        for k in 1..=complex.dim() {
            simplices.extend(complex.simplices(k).iter().cloned());
        }
        let mut incident = vec![Vec::new(); v.len()];
        let mut max_edge = 0.0f64;
        for (s_idx, s) in simplices.iter().enumerate() {
            for &i in s {
                incident[i].push(s_idx);
            }
        }
        for e in complex.simplices(1) {
            max_edge = max_edge.max(dist2(v.point(e[0]), v.point(e[1])).sqrt());
        }
        // Cell size near the typical spacing keeps queries local.
        let cell = if max_edge > 0.0 {
            max_edge
        } else {
            let c = v.centroid();
            v.iter().map(|p| dist2(p, &c).sqrt()).fold(0.0, f64::max).max(1e-9) / 8.0
        };
        ComplexLocator {
            complex,
            index: GridIndex::new(v, cell),
            incident,
            simplices,
            max_edge,
        }
    }

    fn distance(&self, p: &[f64]) -> f64 {
        let v = &self.complex.vertices;
        let mut r = self.index_cell();
        let nearest = loop {
            let hits = self.index.within(p, r);
            if let Some(best) = hits.iter().map(|&i| dist2(p, v.point(i))).reduce(f64::min) {
                break best.sqrt();
            }
            if r > 1e12 {
                break v.iter().map(|q| dist2(p, q)).fold(f64::INFINITY, f64::min).sqrt();
            }
            r *= 2.0;
        };
        if self.simplices.is_empty() {
            return nearest;
        }
        let mut best2 = nearest * nearest;
        let mut seen = std::collections::HashSet::new();
        for i in self.index.within(p, nearest + self.max_edge) {
            for &s in &self.incident[i] {
                if !seen.insert(s) {
                    continue;
                }
                let simplex = &self.simplices[s];
                let d2 = match simplex.len() {
                    2 => closest_on_segment(p, v.point(simplex[0]), v.point(simplex[1])),
                    3 => closest_on_triangle(
                        p,
                        v.point(simplex[0]),
                        v.point(simplex[1]),
                        v.point(simplex[2]),
                    ),
                    _ => continue,
                };
                best2 = best2.min(d2);
            }
        }
        best2.sqrt()
    }

    fn index_cell(&self) -> f64 {
        if self.max_edge > 0.0 {
            self.max_edge
        } else {
            1e-3
        }
    }
}

/// Largest distance from a point of a simplex to M, over barycentric grids
/// of spacing at most `resolution` (edge midpoints included).
fn complex_to_model(c: &SimplicialComplex, model: &ManifoldModel, resolution: f64) -> f64 {
    let v = &c.vertices;
    let vertex_max = v.iter().map(|p| model.distance(p)).fold(0.0, f64::max);
    let edge_max = c
        .simplices(1)
        .par_iter()
        .map(|e| {
            let (a, b) = (v.point(e[0]), v.point(e[1]));
            let len = dist2(a, b).sqrt();
            let mut k = ((len / resolution).ceil() as usize).max(2);
            k += k % 2;
            (0..=k)
                .map(|i| {
                    let t = i as f64 / k as f64;
                    let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
                    model.distance(&p)
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    let tri_max = c
        .simplices(2)
        .par_iter()
        .map(|t| {
            let (a, b, cc) = (v.point(t[0]), v.point(t[1]), v.point(t[2]));
            let longest = dist2(a, b).max(dist2(a, cc)).max(dist2(b, cc)).sqrt();
            let m = ((longest / resolution).ceil() as usize).max(2);
            let mut best = 0.0f64;
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let (s, u) = (i as f64 / m as f64, j as f64 / m as f64);
                    let p: Vec<f64> = (0..a.len())
                        .map(|k| a[k] + s * (b[k] - a[k]) + u * (cc[k] - a[k]))
                        .collect();
                    best = best.max(model.distance(&p));
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    vertex_max.max(edge_max).max(tri_max)
}

/// Largest distance from a point of M to the complex: a grid of M with
/// spacing `resolution`, then local pattern search around the worst grid
/// points to sharpen the maximum.
fn model_to_complex(c: &SimplicialComplex, model: &ManifoldModel, resolution: f64) -> Result<f64> {
    let locator = ComplexLocator::new(c);
    let grid = model.grid(resolution);
    let dists: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| locator.distance(grid.point(i)))
        .collect();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| dists[b].total_cmp(&dists[a]).then(a.cmp(&b)));
    let d = model.intrinsic_dim();
    let refined = order
        .par_iter()
        .take(16)
        .map(|&i| -> Result<f64> {
            let mut x = grid.point(i).to_vec();
            let mut best = dists[i];
            let mut step = resolution;
            while step > resolution / 128.0 {
                let mut moved = false;
                for k in 0..d {
                    for sign in [1.0, -1.0] {
                        let mut t = vec![0.0; d];
                        t[k] = sign * step;
                        let y = model.chart(&x, &t)?;
                        let dy = locator.distance(&y);
                        if dy > best {
                            best = dy;
                            x = y;
                            moved = true;
                        }
                    }
                }
                if !moved {
                    step /= 2.0;
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(refined.into_iter().fold(dists[order[0]], f64::max))
}

/// Symmetric Hausdorff distance between M and the geometric realization of
/// `c`, sampling both at spacing `resolution`.
pub fn hausdorff_to_model(c: &SimplicialComplex, model: &ManifoldModel, resolution: f64) -> Result<f64> {
    precondition(resolution > 0.0 && resolution.is_finite(), "resolution must be positive")?;
    if c.vertices.is_empty() {
        return Err(Error::Empty("complex has no vertices"));
    }
    if c.vertices.dim() != model.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: model.ambient_dim,
            found: c.vertices.dim(),
        });
    }
    Ok(complex_to_model(c, model, resolution).max(model_to_complex(c, model, resolution)?))
}

// ---------------------------------------------------------------------------
// Pipelines.

fn empty_complex(dim: usize, d: usize) -> SimplicialComplex {
    SimplicialComplex::from_top_simplices(PointCloud::new(dim), d, Vec::new())
}

/// Sparsify `cloud` at `eps`, build the complex on the net with the given
/// tangents (aligned with `cloud`) and fill the metric fields of `rec`.
fn reconstruct(
    model: &ManifoldModel,
    cloud: &PointCloud,
    tangents: &[Subspace],
    eps: f64,
    config: &ExperimentConfig,
    rec: &mut ExperimentRecord,
) -> Result<SimplicialComplex> {
    let d = model.intrinsic_dim();
    rec.eps = Some(eps);
    let net = farthest_point_sampling(cloud, eps, 0)?;
    let vertices = cloud.subset(&net);
    let t: Vec<Subspace> = net.iter().map(|&i| tangents[i].clone()).collect();
    let out = build(&vertices, &t, config.star_radius_factor * eps)?;
    let complex = out.complex;
    rec.inconsistencies = out.inconsistencies.len();
    rec.vertices = complex.simplices(0).len();
    rec.edges = complex.simplices(1).len();
    rec.triangles = complex.simplices(2).len();
    let report = manifoldness_report(&complex, d)?;
    rec.manifold = report.passed;
    rec.components = report.components;
    rec.euler_characteristic = report.euler_characteristic;
    let angles: Vec<f64> = vertices
        .iter()
        .zip(&t)
        .filter_map(|(p, est)| {
            let foot = model.project(p).ok()?;
            principal_angle(&model.tangent(&foot).ok()?, est).ok()
        })
        .collect();
    rec.max_angle_error = angles.into_iter().reduce(f64::max);
    rec.hausdorff_error = Some(hausdorff_to_model(&complex, model, config.resolution_factor * eps)?);
    Ok(complex)
}

/// Tangents at every point of `cloud` at bandwidth `h`, inheriting from the
/// nearest estimated point where a neighborhood is too small.
fn full_tangents(cloud: &PointCloud, h: f64, d: usize) -> Result<Vec<Subspace>> {
    let field = estimate_tangents(cloud, &TseParams::new(h, d), None)?;
    let all: Vec<usize> = (0..cloud.len()).collect();
    field.complete(cloud, &all)
}

fn finish(
    result: Result<SimplicialComplex>,
    model: &ManifoldModel,
    mut rec: ExperimentRecord,
    start: Instant,
) -> (SimplicialComplex, ExperimentRecord) {
    let complex = match result {
        Ok(c) => c,
        Err(e) => {
            rec.failure = Some(e.to_string());
            empty_complex(model.ambient_dim, model.intrinsic_dim())
        }
    };
    if rec.failure.is_none() && complex.is_trivial() {
        rec.failure = Some("complex has no simplices above dimension 0".into());
    }
    rec.wall_time_s = start.elapsed().as_secs_f64();
    (complex, rec)
}

/// Noise-free pipeline: sample, estimate tangents at `h = (c ln n/(n−1))^{1/d}`,
/// sparsify at `ε = c_s h`, build the tangential complex on the net.
pub fn run_tdc(
    model: &ManifoldModel,
    spec: &SampleSpec,
    config: &ExperimentConfig,
) -> Result<(SimplicialComplex, ExperimentRecord)> {
    precondition(spec.beta == 1.0, "run_tdc needs beta = 1; use run_tdc_delta or run_tdc_plus")?;
    let start = Instant::now();
    let mut rec = ExperimentRecord::new(config, "tdc", spec);
    let d = model.intrinsic_dim();
    let data = sample(model, spec)?;
    let result = (|| {
        precondition(spec.n >= d + 2, format!("n = {} is too small to triangulate", spec.n))?;
        let h = default_bandwidth(spec.n, d, config.bandwidth_constant())?;
        rec.h = Some(h);
        let tangents = full_tangents(&data.points, h, d)?;
        reconstruct(model, &data.points, &tangents, config.sparsify_c * h, config, &mut rec)
    })();
    Ok(finish(result, model, rec, start))
}

/// Slab widths from the model geometry unless overridden; `t` unset.
fn slab_geometry(model: &ManifoldModel, config: &ExperimentConfig) -> Result<SlabSpec> {
    let mut slab = SlabSpec::from_geometry(
        model.intrinsic_dim(),
        model.ambient_dim,
        model.reach(),
        config.denoise.angle_constant,
        0.0,
    )?;
    if let Some(k1) = config.denoise.k1 {
        slab.k1 = k1;
    }
    if let Some(k2) = config.denoise.k2 {
        slab.k2 = k2;
    }
    Ok(slab)
}

/// Configured `t`, or one calibrated at bandwidth `h_cal` on a noise-free
/// pilot of `⌈βn⌉` points.
fn threshold_for(
    model: &ManifoldModel,
    spec: &SampleSpec,
    config: &ExperimentConfig,
    slab: &SlabSpec,
    h_cal: f64,
) -> Result<f64> {
    if let Some(t) = config.denoise.t {
        return Ok(t);
    }
    let d = model.intrinsic_dim();
    let pilot_n = ((spec.beta * spec.n as f64).ceil() as usize).max(d + 2);
    let pilot = sample(model, &SampleSpec::new(pilot_n, 1.0, spec.seed ^ PILOT_SEED_SALT))?;
    calibrate_threshold(&pilot.points, &TseParams::new(h_cal, d), slab, spec.n)
}

/// Expected count of manifold points in a limit-bandwidth slab, in units of
/// `ln n`, targeted by the automatic `κ`.
pub const AUTO_KAPPA_SLAB_COUNT: f64 = 6.0;

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// `κ` such that a slab at `h_∞` holds about `AUTO_KAPPA_SLAB_COUNT · ln n`
/// points of a uniform sample: `κ ω_d k1^d ln n / vol(M)` of them.
pub fn auto_kappa(model: &ManifoldModel, slab: &SlabSpec) -> f64 {
    let d = model.intrinsic_dim();
    AUTO_KAPPA_SLAB_COUNT * model.volume() / (unit_ball_volume(d) * slab.k1.powi(d as i32))
}

fn denoise_counts(
    rec: &mut ExperimentRecord,
    model: &ManifoldModel,
    data: &LabeledCloud,
    survivors: &[usize],
    far_level: f64,
) {
    let labels = &data.labels;
    let kept: std::collections::HashSet<usize> = survivors.iter().copied().collect();
    let signal: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Signal).collect();
    let outliers: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == Label::Outlier).collect();
    let far: Vec<usize> = outliers
        .iter()
        .copied()
        .filter(|&i| model.distance(data.points.point(i)) > far_level)
        .collect();
    rec.signal_total = Some(signal.len());
    rec.signal_kept = Some(signal.iter().filter(|i| kept.contains(i)).count());
    rec.outliers_total = Some(outliers.len());
    rec.outliers_kept = Some(outliers.iter().filter(|i| kept.contains(i)).count());
    rec.far_outliers_total = Some(far.len());
    rec.far_outliers_kept = Some(far.iter().filter(|i| kept.contains(i)).count());
}

fn kappa_for(model: &ManifoldModel, config: &ExperimentConfig, slab: &SlabSpec) -> f64 {
    config.denoise.kappa.unwrap_or_else(|| auto_kappa(model, slab))
}

/// Runs the planned slab passes, then reconstructs from the
/// survivors with tangents re-estimated on them at the last bandwidth.
fn denoise_and_reconstruct(
    model: &ManifoldModel,
    data: &LabeledCloud,
    plan: &DenoisePlan,
    config: &ExperimentConfig,
    rec: &mut ExperimentRecord,
) -> Result<SimplicialComplex> {
    let d = model.intrinsic_dim();
    let h_last = plan.final_bandwidth();
    let outcome = plan.run(&data.points, Some(&data.labels), d)?;
    rec.denoise_passes = Some(outcome.diagnostics.len());
    denoise_counts(rec, model, data, &outcome.survivors, h_last * h_last / model.reach());
    precondition(
        outcome.survivors.len() >= d + 2,
        format!("only {} points survived denoising", outcome.survivors.len()),
    )?;
    let kept = data.points.subset(&outcome.survivors);
    rec.h = Some(h_last);
    let tangents = full_tangents(&kept, h_last, d)?;
    reconstruct(model, &kept, &tangents, config.sparsify_c * h_last, config, rec)
}

/// Bandwidths and slab constants of a clutter pipeline run.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoisePlan {
    pub bandwidths: Vec<f64>,
    pub slab: SlabSpec,
    pub kappa: f64,
    /// Oracle iteration count (TDC+ only).
    pub k_hat: Option<usize>,
}

impl DenoisePlan {
    pub fn final_bandwidth(&self) -> f64 {
        *self.bandwidths.last().expect("plans have at least one pass")
    }

    /// Passes at `h_0, …, h_{k_δ}`.
    pub fn fixed(model: &ManifoldModel, spec: &SampleSpec, delta: f64, config: &ExperimentConfig) -> Result<Self> {
        let d = model.intrinsic_dim();
        let k = k_delta(d, delta)?;
        let mut slab = slab_geometry(model, config)?;
        let kappa = kappa_for(model, config, &slab);
        let sched = schedule(spec.n, d, spec.beta, kappa, k)?;
        slab.t = threshold_for(model, spec, config, &slab, sched.h[k])?;
        Ok(DenoisePlan {
            bandwidths: sched.h,
            slab,
            kappa,
            k_hat: None,
        })
    }

    /// Passes at `h_0, …, h_k̂` then `h_∞`, with `k̂` from the true
    /// distances of `cloud` to M.
    pub fn oracle(
        model: &ManifoldModel,
        cloud: &PointCloud,
        spec: &SampleSpec,
        config: &ExperimentConfig,
    ) -> Result<Self> {
        let d = model.intrinsic_dim();
        let mut slab = slab_geometry(model, config)?;
        let kappa = kappa_for(model, config, &slab);
        let sched = schedule(spec.n, d, spec.beta, kappa, 0)?;
        let distances: Vec<f64> = cloud.iter().map(|p| model.distance(p)).collect();
        let kh = k_hat(&distances, &sched, model.reach())?;
        let mut bandwidths: Vec<f64> = (0..=kh).map(|k| sched.h_at(k)).collect();
        bandwidths.push(sched.h_infinity());
        slab.t = threshold_for(model, spec, config, &slab, sched.h_infinity())?;
        Ok(DenoisePlan {
            bandwidths,
            slab,
            kappa,
            k_hat: Some(kh),
        })
    }

    /// Plan for the configured clutter pipeline.
    pub fn for_config(
        model: &ManifoldModel,
        cloud: &PointCloud,
        spec: &SampleSpec,
        config: &ExperimentConfig,
    ) -> Result<Self> {
        match config.pipeline {
            Pipeline::TdcDelta { delta } => Self::fixed(model, spec, delta, config),
            Pipeline::TdcPlus => Self::oracle(model, cloud, spec, config),
            Pipeline::Tdc => Err(Error::Precondition("the tdc pipeline does not denoise".into())),
        }
    }

    pub fn run(&self, cloud: &PointCloud, labels: Option<&[Label]>, d: usize) -> Result<DenoiseOutcome> {
        denoise_passes(cloud, labels, &self.bandwidths, &self.slab, cloud.len(), |h| {
            TseParams::new(h, d)
        })
    }
}

fn run_clutter(
    model: &ManifoldModel,
    spec: &SampleSpec,
    config: &ExperimentConfig,
    name: &str,
    plan_fn: impl Fn(&PointCloud) -> Result<DenoisePlan>,
) -> Result<(SimplicialComplex, ExperimentRecord)> {
    let d = model.intrinsic_dim();
    let start = Instant::now();
    let mut rec = ExperimentRecord::new(config, name, spec);
    let data = sample(model, spec)?;
    let result = (|| {
        precondition(spec.n >= d + 2, format!("n = {} is too small to triangulate", spec.n))?;
        let plan = plan_fn(&data.points)?;
        rec.kappa = Some(plan.kappa);
        rec.t = Some(plan.slab.t);
        rec.k_hat = plan.k_hat;
        denoise_and_reconstruct(model, &data, &plan, config, &mut rec)
    })();
    Ok(finish(result, model, rec, start))
}

/// Clutter pipeline with a fixed number of passes: `h_0, …, h_{k_δ}`.
pub fn run_tdc_delta(
    model: &ManifoldModel,
    spec: &SampleSpec,
    delta: f64,
    config: &ExperimentConfig,
) -> Result<(SimplicialComplex, ExperimentRecord)> {
    precondition(spec.beta > 0.0 && spec.beta < 1.0, "run_tdc_delta needs 0 < beta < 1; use run_tdc")?;
    k_delta(model.intrinsic_dim(), delta)?;
    run_clutter(model, spec, config, "tdc_delta", |_| DenoisePlan::fixed(model, spec, delta, config))
}

/// Clutter pipeline with the oracle iteration count `k̂`: passes at
/// `h_0, …, h_k̂` then one at `h_∞`.
pub fn run_tdc_plus(
    model: &ManifoldModel,
    spec: &SampleSpec,
    config: &ExperimentConfig,
) -> Result<(SimplicialComplex, ExperimentRecord)> {
    run_clutter(model, spec, config, "tdc_plus", |cloud| DenoisePlan::oracle(model, cloud, spec, config))
}

/// Runs the configured pipeline on one `(n, seed)`.
pub fn run_one(config: &ExperimentConfig, n: usize, seed: u64) -> Result<(SimplicialComplex, ExperimentRecord)> {
    let mut spec = SampleSpec::new(n, config.beta, seed);
    spec.k0 = config.k0;
    match config.pipeline {
        Pipeline::Tdc => run_tdc(&config.model, &spec, config),
        Pipeline::TdcDelta { delta } => run_tdc_delta(&config.model, &spec, delta, config),
        Pipeline::TdcPlus => run_tdc_plus(&config.model, &spec, config),
    }
}

/// All `(n, seed)` runs of the config, in `(n, seed)` order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = config
        .n_values
        .iter()
        .flat_map(|&n| (0..config.seeds as u64).map(move |s| (n, config.seed_base + s)))
        .collect();
    jobs.par_iter()
        .map(|&(n, seed)| run_one(config, n, seed).map(|(_, r)| r))
        .collect()
}

// ---------------------------------------------------------------------------
// Rate fitting.

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: usize,
    /// `ln(ln(n−1)/(n−1))`.
    pub x: f64,
    /// `ln` of the median Hausdorff error over successful runs.
    pub y: f64,
    pub median_error: f64,
    pub runs: usize,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub fit: LinearFit,
    /// `2/d`.
    pub predicted_slope: f64,
    pub points: Vec<RatePoint>,
}

/// Least-squares fit of the log median error against `ln(ln(n−1)/(n−1))`.
/// Needs at least 4 distinct `n`, each with at least 10 runs.
pub fn fit_rate(records: &[ExperimentRecord], d: usize) -> Result<RateFit> {
    let mut by_n: BTreeMap<usize, Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        by_n.entry(r.n).or_default().push(r);
    }
    precondition(by_n.len() >= 4, format!("need at least 4 sample sizes, got {}", by_n.len()))?;
    let mut points = Vec::new();
    for (&n, runs) in &by_n {
        precondition(runs.len() >= 10, format!("n = {n} has only {} runs", runs.len()))?;
        precondition(n >= 3, "sample sizes must be at least 3")?;
        let errors: Vec<f64> = runs.iter().filter_map(|r| r.hausdorff_error).collect();
        let med = median(&errors)
            .filter(|m| *m > 0.0)
            .ok_or_else(|| Error::Degenerate(format!("n = {n} has no positive errors")))?;
        let nf = (n - 1) as f64;
        points.push(RatePoint {
            n,
            x: (nf.ln() / nf).ln(),
            y: med.ln(),
            median_error: med,
            runs: runs.len(),
            failures: runs.iter().filter(|r| !r.succeeded()).count(),
        });
    }
    let fit = ols(&points.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>())?;
    Ok(RateFit {
        fit,
        predicted_slope: 2.0 / d as f64,
        points,
    })
}

/// Plot data: one `n,x,y` row per sample size.
pub fn write_rate_plot(path: &Path, rate: &RateFit) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in &rate.points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Append-only record store.

#[derive(Serialize, Deserialize)]
struct Provenance {
    config_hash: String,
    config: BTreeMap<String, String>,
    crate_version: String,
}

/// Directory holding `records.csv` (table), `records.jsonl` (full records)
/// and `provenance.json` (config echo). Appending under a different config
/// hash is refused.
pub struct RecordStore {
    dir: PathBuf,
    hash: String,
}

impl RecordStore {
    pub const CSV: &'static str = "records.csv";
    pub const JSONL: &'static str = "records.jsonl";
    pub const PROVENANCE: &'static str = "provenance.json";

    pub fn open(dir: &Path, config: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let hash = config.hash();
        let prov_path = dir.join(Self::PROVENANCE);
        if prov_path.exists() {
            let prov: Provenance = serde_json::from_str(&fs::read_to_string(&prov_path)?)?;
            if prov.config_hash != hash {
                return Err(Error::ConfigHashMismatch {
                    expected: prov.config_hash,
                    found: hash,
                });
            }
        } else {
            let prov = Provenance {
                config_hash: hash.clone(),
                config: config.to_map(),
                crate_version: env!("CARGO_PKG_VERSION").to_string(),
            };
            fs::write(&prov_path, serde_json::to_string_pretty(&prov)?)?;
        }
        Ok(RecordStore {
            dir: dir.to_path_buf(),
            hash,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn append(&self, records: &[ExperimentRecord]) -> Result<()> {
        if let Some(bad) = records.iter().find(|r| r.config_hash != self.hash) {
            return Err(Error::ConfigHashMismatch {
                expected: self.hash.clone(),
                found: bad.config_hash.clone(),
            });
        }
        let csv_path = self.dir.join(Self::CSV);
        let fresh = !csv_path.exists();
        let file = OpenOptions::new().create(true).append(true).open(&csv_path)?;
        let mut w = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
        for r in records {
            w.serialize(r)?;
        }
        w.flush()?;
        let mut jsonl = OpenOptions::new()
            .create(true)
            .append(true)
            .open(self.dir.join(Self::JSONL))?;
        for r in records {
            writeln!(jsonl, "{}", serde_json::to_string(r)?)?;
        }
        Ok(())
    }

    /// Loads every record, asserting they all carry `expected_hash`.
    pub fn load(dir: &Path, expected_hash: &str) -> Result<Vec<ExperimentRecord>> {
        let file = fs::File::open(dir.join(Self::JSONL))?;
        let mut out = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let r: ExperimentRecord = serde_json::from_str(&line)?;
            if r.config_hash != expected_hash {
                return Err(Error::ConfigHashMismatch {
                    expected: expected_hash.to_string(),
                    found: r.config_hash,
                });
            }
            out.push(r);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn circle() -> ManifoldModel {
        ManifoldModel::circle(1.0, 2).unwrap()
    }

    fn polygon(k: usize) -> SimplicialComplex {
        let m = circle();
        let rows: Vec<Vec<f64>> = (0..k).map(|i| m.param_point(&[TAU * i as f64 / k as f64])).collect();
        let edges = (0..k).map(|i| vec![i, (i + 1) % k]).collect();
        SimplicialComplex::from_simplices(PointCloud::from_rows(&rows).unwrap(), edges).unwrap()
    }

    #[test]
    fn inscribed_polygon_gives_sagitta() {
        for k in [7, 12, 40] {
            let got = hausdorff_to_model(&polygon(k), &circle(), 1e-3).unwrap();
            assert_relative_eq!(got, 1.0 - (PI / k as f64).cos(), epsilon = 1e-9);
        }
    }

    #[test]
    fn dense_vertex_grid_is_within_two_resolutions() {
        let m = ManifoldModel::torus(2.0, 0.5, 3).unwrap();
        let res = 0.05;
        let c = SimplicialComplex::from_top_simplices(m.grid(res), 2, Vec::new());
        assert!(hausdorff_to_model(&c, &m, res).unwrap() <= 2.0 * res);
    }

    #[test]
    fn far_vertex_dominates() {
        let mut c = polygon(30);
        let mut v = c.vertices.clone();
        v.push(&[5.0, 0.0]);
        let simplices: Vec<Simplex> = c.simplices(1).to_vec();
        c = SimplicialComplex::from_simplices(v, simplices).unwrap();
        assert_relative_eq!(hausdorff_to_model(&c, &circle(), 1e-2).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn empty_complex_is_an_error() {
        let c = empty_complex(2, 1);
        assert!(hausdorff_to_model(&c, &circle(), 0.1).is_err());
    }

    #[test]
    fn triangle_distance_matches_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let pt = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> { (0..3).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let (a, b, c, p) = (pt(&mut rng), pt(&mut rng), pt(&mut rng), pt(&mut rng));
            let exact = closest_on_triangle(&p, &a, &b, &c);
            let m = 300;
            let mut brute = f64::INFINITY;
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let (s, u) = (i as f64 / m as f64, j as f64 / m as f64);
                    let q: Vec<f64> = (0..3).map(|k| a[k] + s * (b[k] - a[k]) + u * (c[k] - a[k])).collect();
                    brute = brute.min(dist2(&p, &q));
                }
            }
            assert!(exact <= brute + 1e-12);
            assert!(brute.sqrt() - exact.sqrt() < 0.02);
        }
    }

    fn circle_config() -> ExperimentConfig {
        ExperimentConfig::default()
    }

    #[test]
    fn circle_pipeline_reconstructs_a_cycle() {
        let cfg = circle_config();
        let (c, rec) = run_tdc(&circle(), &SampleSpec::new(2000, 1.0, 7), &cfg).unwrap();
        assert!(rec.succeeded(), "{rec:?}");
        assert!(rec.manifold, "{rec:?}");
        assert!(rec.hausdorff_error.unwrap() < 0.05);
        assert_eq!(c.euler_characteristic(), 0);
    }

    #[test]
    fn pipeline_is_deterministic() {
        let cfg = circle_config();
        let spec = SampleSpec::new(800, 1.0, 3);
        let (c1, mut r1) = run_tdc(&circle(), &spec, &cfg).unwrap();
        let (c2, mut r2) = run_tdc(&circle(), &spec, &cfg).unwrap();
        r1.wall_time_s = 0.0;
        r2.wall_time_s = 0.0;
        assert_eq!(r1, r2);
        assert_eq!(c1.content_hash(), c2.content_hash());
    }

    #[test]
    fn tiny_sample_is_a_recorded_failure() {
        let (c, rec) = run_tdc(&circle(), &SampleSpec::new(2, 1.0, 0), &circle_config()).unwrap();
        assert!(rec.failure.is_some());
        assert!(c.vertices.is_empty());
    }

    #[test]
    fn pipeline_preconditions() {
        let cfg = circle_config();
        assert!(run_tdc(&circle(), &SampleSpec::new(100, 0.8, 0), &cfg).is_err());
        assert!(run_tdc_delta(&circle(), &SampleSpec::new(100, 1.0, 0), 0.05, &cfg).is_err());
        assert!(run_tdc_delta(&circle(), &SampleSpec::new(100, 0.8, 0), 0.6, &cfg).is_err());
    }

    #[test]
    fn auto_kappa_targets_slab_count() {
        let m = circle();
        let cfg = ExperimentConfig::default();
        let slab = slab_geometry(&m, &cfg).unwrap();
        let kappa = auto_kappa(&m, &slab);
        // Expected count in a limit slab: βn · 2 k1 h_∞ / 2π with h_∞ = κ ln n/(βn).
        let n = 4000usize;
        let h = kappa * (n as f64).ln() / (n as f64);
        let count = n as f64 * 2.0 * slab.k1 * h / TAU;
        assert_relative_eq!(count / (n as f64).ln(), AUTO_KAPPA_SLAB_COUNT, epsilon = 1e-9);
        assert_relative_eq!(unit_ball_volume(2), PI, epsilon = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn clutter_pipelines_remove_far_outliers() {
        let cfg = circle_config();
        let spec = SampleSpec::new(1500, 0.8, 11);
        let (_, rec) = run_tdc_delta(&circle(), &spec, 0.05, &cfg).unwrap();
        assert!(rec.succeeded(), "{rec:?}");
        assert!(rec.denoise_exact(), "{rec:?}");
        assert_eq!(rec.denoise_passes, Some(k_delta(1, 0.05).unwrap() + 1));
        let (_, rec) = run_tdc_plus(&circle(), &spec, &cfg).unwrap();
        assert!(rec.denoise_exact(), "{rec:?}");
        assert_eq!(rec.denoise_passes, Some(rec.k_hat.unwrap() + 2));
    }

    #[test]
    fn outlier_free_tdc_plus_has_zero_k_hat() {
        let (_, rec) = run_tdc_plus(&circle(), &SampleSpec::new(800, 1.0, 2), &circle_config()).unwrap();
        assert_eq!(rec.k_hat, Some(0));
        assert_eq!(rec.signal_kept, rec.signal_total);
    }

    #[test]
    fn halving_resolution_is_stable() {
        let cfg = circle_config();
        let (c, _) = run_tdc(&circle(), &SampleSpec::new(600, 1.0, 5), &cfg).unwrap();
        let m = ManifoldModel::torus(2.0, 0.5, 3).unwrap();
        let torus_grid = SimplicialComplex::from_top_simplices(m.grid(0.2), 2, Vec::new());
        for (complex, model, res) in [(&c, circle(), 0.02), (&torus_grid, m, 0.1)] {
            let coarse = hausdorff_to_model(complex, &model, res).unwrap();
            let fine = hausdorff_to_model(complex, &model, res / 2.0).unwrap();
            assert!((coarse - fine).abs() <= 2.0 * res, "{coarse} vs {fine}");
        }
    }

    fn synthetic(n_values: &[usize], seeds: usize, d: usize, noise: impl Fn(usize, u64) -> f64) -> Vec<ExperimentRecord> {
        let cfg = ExperimentConfig::default();
        let mut out = Vec::new();
        for &n in n_values {
            for s in 0..seeds as u64 {
                let mut r = ExperimentRecord::new(&cfg, "tdc", &SampleSpec::new(n, 1.0, s));
                let nf = (n - 1) as f64;
                r.hausdorff_error = Some((nf.ln() / nf).powf(2.0 / d as f64) * noise(n, s));
                out.push(r);
            }
        }
        out
    }

    #[test]
    fn exact_power_law_is_recovered() {
        for d in [1, 2] {
            let recs = synthetic(&[250, 500, 1000, 2000], 10, d, |_, _| 1.0);
            let rate = fit_rate(&recs, d).unwrap();
            assert_relative_eq!(rate.fit.slope, 2.0 / d as f64, epsilon = 1e-9);
            assert_relative_eq!(rate.fit.r_squared, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn noisy_power_law_slope_within_tolerance() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let factors: Vec<f64> = (0..100).map(|_| rng.random_range(0.8..1.25)).collect();
        for d in [1, 2] {
            let recs = synthetic(&[250, 500, 1000, 2000, 4000], 20, d, |n, s| {
                let i = ([250, 500, 1000, 2000, 4000].iter().position(|&m| m == n).unwrap()) * 20 + s as usize;
                factors[i]
            });
            let rate = fit_rate(&recs, d).unwrap();
            assert!((rate.fit.slope - 2.0 / d as f64).abs() <= 0.15, "{}", rate.fit.slope);
        }
    }

    #[test]
    fn constant_errors_give_flat_slope() {
        let mut recs = synthetic(&[250, 500, 1000, 2000], 10, 1, |_, _| 1.0);
        recs.iter_mut().for_each(|r| r.hausdorff_error = Some(0.01));
        let rate = fit_rate(&recs, 1).unwrap();
        assert!(rate.fit.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_rate_preconditions() {
        assert!(fit_rate(&synthetic(&[250, 500, 1000], 10, 1, |_, _| 1.0), 1).is_err());
        assert!(fit_rate(&synthetic(&[250, 500, 1000, 2000], 9, 1, |_, _| 1.0), 1).is_err());
    }

    #[test]
    fn store_is_append_only_per_config() {
        let dir = std::env::temp_dir().join(format!("tdc-store-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let cfg = ExperimentConfig::default();
        let recs = synthetic(&[250], 2, 1, |_, _| 1.0);
        let store = RecordStore::open(&dir, &cfg).unwrap();
        store.append(&recs).unwrap();
        store.append(&recs).unwrap();
        assert_eq!(RecordStore::load(&dir, &cfg.hash()).unwrap().len(), 4);
        let csv_rows = fs::read_to_string(dir.join(RecordStore::CSV)).unwrap().lines().count();
        assert_eq!(csv_rows, 5);
        let other = ExperimentConfig {
            tse_c: Some(3.0),
            ..cfg.clone()
        };
        assert!(matches!(RecordStore::open(&dir, &other), Err(Error::ConfigHashMismatch { .. })));
        assert!(matches!(
            RecordStore::load(&dir, &other.hash()),
            Err(Error::ConfigHashMismatch { .. })
        ));
        fs::remove_dir_all(&dir).unwrap();
    }
}
