//! Analytic ground-truth manifolds (circle, torus, sphere) with samplers for
//! the noise-free and clutter models, exact projection and tangent oracles.
//!
//! Each model lives in the first two or three coordinates of `R^D`; the
//! remaining coordinates of every manifold point are zero.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{Label, PointCloud};
use crate::error::{precondition, Error, Result};
use crate::linalg::{dist, random_unit, Subspace};

/// Projection is refused within this distance of the medial axis.
pub const MEDIAL_AXIS_TOL: f64 = 1e-9;
/// Tangent queries accept points this close to the manifold.
pub const ON_MANIFOLD_TOL: f64 = 1e-9;

/// `α = 1 + 1/(4√2)`, the geodesic-to-chord comparison constant.
pub fn alpha() -> f64 {
    1.0 + 1.0 / (4.0 * 2f64.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Circle { radius: f64 },
    Torus { major: f64, minor: f64 },
    Sphere { radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldModel {
    pub kind: ModelKind,
    pub ambient_dim: usize,
}

impl ManifoldModel {
    pub fn circle(radius: f64, ambient_dim: usize) -> Result<Self> {
        precondition(radius > 0.0 && radius.is_finite(), "circle radius must be positive")?;
        precondition(ambient_dim >= 2, "circle needs D >= 2")?;
        Ok(ManifoldModel {
            kind: ModelKind::Circle { radius },
            ambient_dim,
        })
    }

    pub fn torus(major: f64, minor: f64, ambient_dim: usize) -> Result<Self> {
        precondition(
            minor > 0.0 && major > minor && major.is_finite(),
            "torus needs R > r > 0",
        )?;
        precondition(ambient_dim >= 3, "torus needs D >= 3")?;
        Ok(ManifoldModel {
            kind: ModelKind::Torus { major, minor },
            ambient_dim,
        })
    }

    pub fn sphere(radius: f64, ambient_dim: usize) -> Result<Self> {
        precondition(radius > 0.0 && radius.is_finite(), "sphere radius must be positive")?;
        precondition(ambient_dim >= 3, "sphere needs D >= 3")?;
        Ok(ManifoldModel {
            kind: ModelKind::Sphere { radius },
            ambient_dim,
        })
    }

    pub fn intrinsic_dim(&self) -> usize {
        match self.kind {
            ModelKind::Circle { .. } => 1,
            ModelKind::Torus { .. } | ModelKind::Sphere { .. } => 2,
        }
    }

    pub fn reach(&self) -> f64 {
        match self.kind {
            ModelKind::Circle { radius } | ModelKind::Sphere { radius } => radius,
            ModelKind::Torus { major, minor } => minor.min(major - minor),
        }
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            ModelKind::Circle { radius } | ModelKind::Sphere { radius } => 2.0 * radius,
            ModelKind::Torus { major, minor } => 2.0 * (major + minor),
        }
    }

    /// Length (d=1) or area (d=2).
    pub fn volume(&self) -> f64 {
        match self.kind {
            ModelKind::Circle { radius } => TAU * radius,
            ModelKind::Torus { major, minor } => TAU * TAU * major * minor,
            ModelKind::Sphere { radius } => 2.0 * TAU * radius * radius,
        }
    }

    /// Centroid of the uniform measure on M (the origin for all models).
    pub fn centroid(&self) -> Vec<f64> {
        vec![0.0; self.ambient_dim]
    }

    /// Default outlier-ball radius `diam(M) + ρ`.
    pub fn default_k0(&self) -> f64 {
        self.diameter() + self.reach()
    }

    fn embed(&self, head: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.ambient_dim];
        p[..head.len()].copy_from_slice(head);
        p
    }

    fn tail_norm2(&self, x: &[f64], from: usize) -> f64 {
        x[from..].iter().map(|c| c * c).sum()
    }

    /// Exact Euclidean distance from `x` to M, defined everywhere.
    pub fn distance(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.ambient_dim);
        match self.kind {
            ModelKind::Circle { radius } => {
                let rho = x[0].hypot(x[1]);
                ((rho - radius).powi(2) + self.tail_norm2(x, 2)).sqrt()
            }
            ModelKind::Sphere { radius } => {
                let rho = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                ((rho - radius).powi(2) + self.tail_norm2(x, 3)).sqrt()
            }
            ModelKind::Torus { major, minor } => {
                let s = (x[0].hypot(x[1]) - major).hypot(x[2]);
                ((s - minor).powi(2) + self.tail_norm2(x, 3)).sqrt()
            }
        }
    }

    /// Distance from `x` to the medial axis (the set of points with more than
    /// one nearest point on M).
    pub fn medial_axis_distance(&self, x: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Circle { .. } => x[0].hypot(x[1]),
            ModelKind::Sphere { .. } => (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt(),
            ModelKind::Torus { major, .. } => {
                let planar = x[0].hypot(x[1]);
                let core = (planar - major).hypot(x[2]);
                planar.min(core)
            }
        }
    }

    /// Unique nearest point of M to `x`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: x.len(),
            });
        }
        let m = self.medial_axis_distance(x);
        if m <= MEDIAL_AXIS_TOL {
            return Err(Error::MedialAxis { distance: m });
        }
        Ok(match self.kind {
            ModelKind::Circle { radius } => {
                let rho = x[0].hypot(x[1]);
                self.embed(&[radius * x[0] / rho, radius * x[1] / rho])
            }
            ModelKind::Sphere { radius } => {
                let rho = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let s = radius / rho;
                self.embed(&[s * x[0], s * x[1], s * x[2]])
            }
            ModelKind::Torus { major, minor } => {
                let planar = x[0].hypot(x[1]);
                let (cu, su) = (x[0] / planar, x[1] / planar);
                let a = planar - major;
                let s = a.hypot(x[2]);
                let (cv, sv) = (a / s, x[2] / s);
                let w = major + minor * cv;
                self.embed(&[w * cu, w * su, minor * sv])
            }
        })
    }

    /// Point of M at the given angles: `[θ]` for the circle, `[u, v]` for the
    /// torus (around the axis, around the tube), `[polar, azimuth]` for the
    /// sphere.
    pub fn param_point(&self, angles: &[f64]) -> Vec<f64> {
        match self.kind {
            ModelKind::Circle { radius } => {
                self.embed(&[radius * angles[0].cos(), radius * angles[0].sin()])
            }
            ModelKind::Torus { major, minor } => {
                let (u, v) = (angles[0], angles[1]);
                let w = major + minor * v.cos();
                self.embed(&[w * u.cos(), w * u.sin(), minor * v.sin()])
            }
            ModelKind::Sphere { radius } => {
                let (t, f) = (angles[0], angles[1]);
                self.embed(&[
                    radius * t.sin() * f.cos(),
                    radius * t.sin() * f.sin(),
                    radius * t.cos(),
                ])
            }
        }
    }

    /// Tangent space at a point of M.
    pub fn tangent(&self, p: &[f64]) -> Result<Subspace> {
        if p.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: p.len(),
            });
        }
        let off = self.distance(p);
        if off > ON_MANIFOLD_TOL {
            return Err(Error::OffManifold { distance: off });
        }
        let basis = match self.kind {
            ModelKind::Circle { .. } => {
                let rho = p[0].hypot(p[1]);
                vec![self.embed(&[-p[1] / rho, p[0] / rho])]
            }
            ModelKind::Torus { major, .. } => {
                let planar = p[0].hypot(p[1]);
                let (cu, su) = (p[0] / planar, p[1] / planar);
                let a = planar - major;
                let s = a.hypot(p[2]);
                let (cv, sv) = (a / s, p[2] / s);
                vec![self.embed(&[-su, cu, 0.0]), self.embed(&[-sv * cu, -sv * su, cv])]
            }
            ModelKind::Sphere { .. } => {
                let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
                let nrm = [p[0] / r, p[1] / r, p[2] / r];
                // Project the two canonical axes least aligned with the normal.
                let mut axes = [0usize, 1, 2];
                axes.sort_by(|&a, &b| nrm[a].abs().total_cmp(&nrm[b].abs()));
                axes[..2]
                    .iter()
                    .map(|&a| {
                        let mut e = [0.0; 3];
                        e[a] = 1.0;
                        let c = nrm[a];
                        self.embed(&[e[0] - c * nrm[0], e[1] - c * nrm[1], e[2] - c * nrm[2]])
                    })
                    .collect()
            }
        };
        Subspace::span(&basis)
    }

    /// Local chart at `p ∈ M`: `t ↦ π(p + B t)` with `B` the tangent basis.
    pub fn chart(&self, p: &[f64], t: &[f64]) -> Result<Vec<f64>> {
        let tangent = self.tangent(p)?;
        let mut x = p.to_vec();
        let offset = tangent.basis().mul_vec(t);
        x.iter_mut().zip(&offset).for_each(|(a, b)| *a += b);
        self.project(&x)
    }

    /// Uniform random point of M (surface measure).
    pub fn sample_on<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self.kind {
            ModelKind::Circle { .. } => self.param_point(&[rng.random_range(0.0..TAU)]),
            ModelKind::Sphere { radius } => {
                let u = random_unit(rng, 3);
                self.embed(&[radius * u[0], radius * u[1], radius * u[2]])
            }
            ModelKind::Torus { major, minor } => {
                let u = rng.random_range(0.0..TAU);
                let v = loop {
                    let v: f64 = rng.random_range(0.0..TAU);
                    let accept: f64 = rng.random();
                    if accept * (major + minor) <= major + minor * v.cos() {
                        break v;
                    }
                };
                self.param_point(&[u, v])
            }
        }
    }

    /// Points of M such that every point of M lies within `spacing` of one.
    pub fn grid(&self, spacing: f64) -> PointCloud {
        assert!(spacing > 0.0);
        let mut out = PointCloud::new(self.ambient_dim);
        match self.kind {
            ModelKind::Circle { radius } => {
                let k = ((TAU * radius / spacing).ceil() as usize).max(3);
                for i in 0..k {
                    out.push(&self.param_point(&[TAU * i as f64 / k as f64]));
                }
            }
            ModelKind::Torus { major, minor } => {
                let ku = ((TAU * (major + minor) / spacing).ceil() as usize).max(3);
                let kv = ((TAU * minor / spacing).ceil() as usize).max(3);
                for i in 0..ku {
                    for j in 0..kv {
                        out.push(&self.param_point(&[
                            TAU * i as f64 / ku as f64,
                            TAU * j as f64 / kv as f64,
                        ]));
                    }
                }
            }
            ModelKind::Sphere { radius } => {
                let rings = ((PI * radius / spacing).ceil() as usize).max(2);
                let dt = PI / rings as f64;
                for i in 0..rings {
                    let t = (i as f64 + 0.5) * dt;
                    let k = ((TAU * radius * t.sin() / spacing).ceil() as usize).max(1);
                    for j in 0..k {
                        out.push(&self.param_point(&[t, TAU * j as f64 / k as f64]));
                    }
                }
            }
        }
        out
    }
}

/// Manifold-side density. Only the uniform density is implemented; the enum
/// is the extension point for others.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    #[default]
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n: usize,
    pub beta: f64,
    #[serde(default)]
    pub density: Density,
    /// Outlier-ball radius; `None` means `diam(M) + ρ`.
    pub k0: Option<f64>,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(n: usize, beta: f64, seed: u64) -> Self {
        SampleSpec {
            n,
            beta,
            density: Density::Uniform,
            k0: None,
            seed,
        }
    }

    pub fn k0_for(&self, model: &ManifoldModel) -> f64 {
        self.k0.unwrap_or_else(|| model.default_k0())
    }

    pub fn validate(&self, model: &ManifoldModel) -> Result<()> {
        precondition(self.n >= 1, "sample size must be at least 1")?;
        precondition(
            self.beta > 0.0 && self.beta <= 1.0,
            "signal fraction beta must lie in (0, 1]",
        )?;
        let k0 = self.k0_for(model);
        precondition(
            k0 >= model.diameter() + model.reach(),
            format!("outlier radius K0 = {k0} is below diam(M) + reach"),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledCloud {
    pub points: PointCloud,
    pub labels: Vec<Label>,
    pub spec: SampleSpec,
}

impl LabeledCloud {
    pub fn signal_indices(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == Label::Signal)
            .collect()
    }
}

/// Draws `spec.n` independent points: with probability `beta` uniform on M,
/// otherwise uniform in the ball of radius `K0` around the centroid of M.
pub fn sample(model: &ManifoldModel, spec: &SampleSpec) -> Result<LabeledCloud> {
    spec.validate(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k0 = spec.k0_for(model);
    let center = model.centroid();
    let dim = model.ambient_dim;
    let mut points = PointCloud::with_capacity(dim, spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let signal = spec.beta >= 1.0 || rng.random::<f64>() < spec.beta;
        if signal {
            points.push(&model.sample_on(&mut rng));
            labels.push(Label::Signal);
        } else {
            let u = random_unit(&mut rng, dim);
            let radius = k0 * rng.random::<f64>().powf(1.0 / dim as f64);
            let p: Vec<f64> = u.iter().zip(&center).map(|(a, c)| c + radius * a).collect();
            points.push(&p);
            labels.push(Label::Outlier);
        }
    }
    Ok(LabeledCloud {
        points,
        labels,
        spec: spec.clone(),
    })
}

/// Random unit vector normal to M at `p`.
pub fn random_normal<R: Rng + ?Sized>(model: &ManifoldModel, p: &[f64], rng: &mut R) -> Vec<f64> {
    let t = model.tangent(p).expect("point on manifold");
    loop {
        let v = random_unit(rng, model.ambient_dim);
        let proj = t.project(&v);
        let w: Vec<f64> = v.iter().zip(&proj).map(|(a, b)| a - b).collect();
        if let Some(n) = crate::linalg::normalized(&w).filter(|_| crate::linalg::norm(&w) > 1e-3) {
            return n;
        }
    }
}

/// Sampled minimum of `‖q − p‖² / (2 d(q − p, T_p M))` over pairs of
/// manifold points. The infimum over all pairs equals the reach.
pub fn numerical_reach(model: &ManifoldModel, pairs: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = model.reach();
    let mut best = f64::INFINITY;
    for i in 0..pairs {
        let p = model.sample_on(&mut rng);
        // Alternate global pairs with close pairs, where the infimum lives.
        let q = if i % 2 == 0 {
            model.sample_on(&mut rng)
        } else {
            let t = model.tangent(&p).expect("on manifold");
            let step: Vec<f64> = random_unit(&mut rng, model.intrinsic_dim())
                .iter()
                .map(|c| c * rho * 0.25 * rng.random::<f64>())
                .collect();
            let x: Vec<f64> = p
                .iter()
                .zip(t.basis().mul_vec(&step))
                .map(|(a, b)| a + b)
                .collect();
            match model.project(&x) {
                Ok(q) => q,
                Err(_) => continue,
            }
        };
        let t = model.tangent(&p).expect("on manifold");
        let diff: Vec<f64> = q.iter().zip(&p).map(|(a, b)| a - b).collect();
        let normal = t.normal_norm(&diff);
        if normal <= 1e-12 {
            continue;
        }
        best = best.min(crate::linalg::dot(&diff, &diff) / (2.0 * normal));
    }
    best
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GeodesicReport {
    pub trials: usize,
    pub violations: usize,
    /// Minimum over trials of `d_M − ‖x−y‖`.
    pub min_lower_slack: f64,
    /// Minimum over trials of `α‖x−y‖ − d_M`.
    pub min_upper_slack: f64,
    /// Minimum over trials of `‖x−y‖ + α²‖x−y‖²/(2ρ) − d_M`.
    pub min_second_order_slack: f64,
}

/// Checks `‖x−y‖ ≤ d_M(x,y) ≤ α‖x−y‖` and the second-order upper bound on
/// random pairs with `‖x−y‖ ≤ ρ/4`, using closed-form geodesic distances.
///
/// Torus pairs are drawn on meridians and on the inner and outer equators,
/// which are geodesics with known arc length.
pub fn verify_geodesic_bounds(model: &ManifoldModel, trials: usize, seed: u64) -> GeodesicReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = model.reach();
    let a = alpha();
    let mut report = GeodesicReport {
        trials,
        violations: 0,
        min_lower_slack: f64::INFINITY,
        min_upper_slack: f64::INFINITY,
        min_second_order_slack: f64::INFINITY,
    };
    for _ in 0..trials {
        // A great circle (or geodesic circle) of radius `s` containing the pair.
        let (x, y, s, phi) = match model.kind {
            ModelKind::Circle { radius } => {
                let t0 = rng.random_range(0.0..TAU);
                let phi = rng.random_range(0.0..=max_angle(radius, rho));
                (
                    model.param_point(&[t0]),
                    model.param_point(&[t0 + phi]),
                    radius,
                    phi,
                )
            }
            ModelKind::Sphere { radius } => {
                let p = random_unit(&mut rng, 3);
                let mut w = random_unit(&mut rng, 3);
                let c = crate::linalg::dot(&w, &p);
                w.iter_mut().zip(&p).for_each(|(wi, pi)| *wi -= c * pi);
                let w = crate::linalg::normalized(&w).unwrap_or_else(|| vec![p[1], -p[0], 0.0]);
                let phi = rng.random_range(0.0..=max_angle(radius, rho));
                let q: Vec<f64> = (0..3)
                    .map(|k| radius * (phi.cos() * p[k] + phi.sin() * w[k]))
                    .collect();
                let p: Vec<f64> = p.iter().map(|c| c * radius).collect();
                (model.embed(&p), model.embed(&q), radius, phi)
            }
            ModelKind::Torus { major, minor } => {
                let u0 = rng.random_range(0.0..TAU);
                let v0 = rng.random_range(0.0..TAU);
                match rng.random_range(0..3) {
                    0 => {
                        let phi = rng.random_range(0.0..=max_angle(minor, rho));
                        (
                            model.param_point(&[u0, v0]),
                            model.param_point(&[u0, v0 + phi]),
                            minor,
                            phi,
                        )
                    }
                    k => {
                        let v = if k == 1 { 0.0 } else { PI };
                        let s = major + minor * v.cos();
                        let phi = rng.random_range(0.0..=max_angle(s, rho));
                        (
                            model.param_point(&[u0, v]),
                            model.param_point(&[u0 + phi, v]),
                            s,
                            phi,
                        )
                    }
                }
            }
        };
        let chord = dist(&x, &y);
        let geo = s * phi;
        let lower = geo - chord;
        let upper = a * chord - geo;
        let second = chord + a * a * chord * chord / (2.0 * rho) - geo;
        let tol = 1e-12 * s.max(1.0);
        if lower < -tol || upper < -tol || second < -tol || chord > rho / 4.0 + tol {
            report.violations += 1;
        }
        report.min_lower_slack = report.min_lower_slack.min(lower);
        report.min_upper_slack = report.min_upper_slack.min(upper);
        report.min_second_order_slack = report.min_second_order_slack.min(second);
    }
    report
}

/// Largest angle on a circle of radius `s` whose chord is at most `ρ/4`.
fn max_angle(s: f64, rho: f64) -> f64 {
    2.0 * (rho / (8.0 * s)).min(1.0).asin()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StandardnessRow {
    pub radius: f64,
    pub mean_mass: f64,
    pub min_mass: f64,
    pub max_mass: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StandardnessReport {
    pub rows: Vec<StandardnessRow>,
    /// `min_r min_p Q(B(p,r)) / r^d`.
    pub lower_constant: f64,
    /// `max_r max_p Q(B(p,r)) / r^d`.
    pub upper_constant: f64,
    /// Least-squares slope of `ln mean_mass` against `ln r`.
    pub log_slope: f64,
    pub passed: bool,
}

const STANDARDNESS_CENTERS: usize = 16;

/// Monte-Carlo estimate of the mass `Q(B(p, r))` the uniform distribution on
/// M gives to balls centered on M, for each `r` in the grid (`r ≤ ρ/4`).
/// `trials` reference points are drawn from Q and shared by all centers.
pub fn verify_standardness(
    model: &ManifoldModel,
    r_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<StandardnessReport> {
    precondition(!r_grid.is_empty(), "radius grid is empty")?;
    precondition(trials > 0, "need at least one Monte-Carlo point")?;
    let rho = model.reach();
    precondition(
        r_grid.iter().all(|&r| r > 0.0 && r <= rho / 4.0),
        "radii must lie in (0, reach/4]",
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reference = PointCloud::with_capacity(model.ambient_dim, trials);
    for _ in 0..trials {
        reference.push(&model.sample_on(&mut rng));
    }
    let centers: Vec<Vec<f64>> = (0..STANDARDNESS_CENTERS)
        .map(|_| model.sample_on(&mut rng))
        .collect();
    let r_max = r_grid.iter().cloned().fold(0.0, f64::max);
    let index = crate::spatial::GridIndex::new(&reference, r_max);
    let d = model.intrinsic_dim() as i32;
    let mut rows = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let masses: Vec<f64> = centers
            .iter()
            .map(|c| index.within(c, r).len() as f64 / trials as f64)
            .collect();
        rows.push(StandardnessRow {
            radius: r,
            mean_mass: masses.iter().sum::<f64>() / masses.len() as f64,
            min_mass: masses.iter().cloned().fold(f64::INFINITY, f64::min),
            max_mass: masses.iter().cloned().fold(0.0, f64::max),
        });
    }
    let lower_constant = rows
        .iter()
        .map(|row| row.min_mass / row.radius.powi(d))
        .fold(f64::INFINITY, f64::min);
    let upper_constant = rows
        .iter()
        .map(|row| row.max_mass / row.radius.powi(d))
        .fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|row| row.mean_mass > 0.0)
        .map(|row| (row.radius.ln(), row.mean_mass.ln()))
        .collect();
    let log_slope = if pts.len() >= 2 {
        crate::stats::ols(&pts).map(|f| f.slope).unwrap_or(f64::NAN)
    } else {
        f64::NAN
    };
    Ok(StandardnessReport {
        rows,
        lower_constant,
        upper_constant,
        log_slope,
        passed: lower_constant > 0.0 && upper_constant.is_finite(),
    })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct InclusionReport {
    pub trials: usize,
    pub checked_points: usize,
    pub violations: usize,
}

/// Ball-projection inclusions: for `x` with `Δ = d(x, M) ≤ h ≤ ρ/8`,
/// `B(π(x), r⁻) ∩ M ⊂ B(x, h) ∩ M ⊂ B(π(x), r⁺) ∩ M` with `r_h² = h² − Δ²`
/// and `r^± = (1 ± α²Δ/ρ) r_h`, checked on a dense grid of M.
pub fn verify_ball_projection(
    model: &ManifoldModel,
    trials: usize,
    grid_spacing: f64,
    seed: u64,
) -> InclusionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = model.reach();
    let a2 = alpha() * alpha();
    let grid = model.grid(grid_spacing);
    let index = crate::spatial::GridIndex::new(&grid, rho / 8.0);
    let mut report = InclusionReport {
        trials,
        ..Default::default()
    };
    for _ in 0..trials {
        let p = model.sample_on(&mut rng);
        let h = rng.random_range(0.0..=rho / 8.0);
        let delta = rng.random_range(0.0..=h);
        let nrm = random_normal(model, &p, &mut rng);
        let x: Vec<f64> = p.iter().zip(&nrm).map(|(a, b)| a + delta * b).collect();
        let r_h = (h * h - delta * delta).max(0.0).sqrt();
        let r_plus = (1.0 + a2 * delta / rho) * r_h;
        let r_minus = (1.0 - a2 * delta / rho) * r_h;
        let reach_r = h.max(r_plus) * 1.01;
        for i in index.within(&p, reach_r + h) {
            let z = grid.point(i);
            report.checked_points += 1;
            let in_x = dist(z, &x) <= h;
            let dz = dist(z, &p);
            if in_x && dz > r_plus * (1.0 + 1e-12) + 1e-15 {
                report.violations += 1;
            }
            if dz <= r_minus && !(dist(z, &x) <= h * (1.0 + 1e-12) + 1e-15) {
                report.violations += 1;
            }
        }
    }
    report
}

/// Normal-offset bound: with `h_k²/ρ ≤ h ≤ h_k ≤ ρ/(12α)`, `x` such that
/// `d(x, M) ≤ h/√2` and `π(x) = p`, and `z` with `‖z − x‖ ≤ h` and
/// `d(z, M) ≤ h_k²/ρ`, the component of `z − p` normal to `T_p M` is at most
/// `10 h_k²/ρ`.
pub fn verify_normal_offset(model: &ManifoldModel, trials: usize, seed: u64) -> InclusionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = model.reach();
    let mut report = InclusionReport {
        trials,
        ..Default::default()
    };
    let h_max = rho / (12.0 * alpha());
    for _ in 0..trials {
        let h_k = rng.random_range(0.0..=h_max);
        let h = rng.random_range(h_k * h_k / rho..=h_k);
        let p = model.sample_on(&mut rng);
        let t = model.tangent(&p).expect("on manifold");
        let nx = random_normal(model, &p, &mut rng);
        let off_x = h / 2f64.sqrt() * rng.random::<f64>();
        let x: Vec<f64> = p.iter().zip(&nx).map(|(a, b)| a + off_x * b).collect();
        // Candidate y near p on M, then z offset normally from y.
        let step: Vec<f64> = random_unit(&mut rng, model.intrinsic_dim())
            .iter()
            .map(|c| c * 2.0 * h * rng.random::<f64>())
            .collect();
        let Ok(y) = model.chart(&p, &step) else { continue };
        let ny = random_normal(model, &y, &mut rng);
        let off_z = h_k * h_k / rho * rng.random::<f64>();
        let z: Vec<f64> = y.iter().zip(&ny).map(|(a, b)| a + off_z * b).collect();
        if dist(&z, &x) > h {
            continue;
        }
        report.checked_points += 1;
        let zp: Vec<f64> = z.iter().zip(&p).map(|(a, b)| a - b).collect();
        if t.normal_norm(&zp) > 10.0 * h_k * h_k / rho * (1.0 + 1e-12) {
            report.violations += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::principal_angle;
    use approx::assert_abs_diff_eq;

    fn torus() -> ManifoldModel {
        ManifoldModel::torus(2.0, 0.5, 3).unwrap()
    }

    #[test]
    fn invariants_of_models() {
        let c = ManifoldModel::circle(1.5, 2).unwrap();
        assert_eq!((c.intrinsic_dim(), c.reach()), (1, 1.5));
        assert_eq!(torus().reach(), 0.5);
        assert_eq!(ManifoldModel::torus(1.0, 0.8, 3).unwrap().reach(), 0.19999999999999996);
        assert!(ManifoldModel::torus(0.5, 0.5, 3).is_err());
        assert!(ManifoldModel::sphere(1.0, 2).is_err());
    }

    #[test]
    fn diameters() {
        assert_eq!(ManifoldModel::circle(1.0, 2).unwrap().diameter(), 2.0);
        assert_eq!(torus().diameter(), 5.0);
        assert_eq!(ManifoldModel::sphere(3.0, 3).unwrap().diameter(), 6.0);
    }

    #[test]
    fn projection_examples() {
        let c = ManifoldModel::circle(1.0, 3).unwrap();
        assert_eq!(c.project(&[2.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        let p = c.param_point(&[0.7]);
        let q = c.project(&p).unwrap();
        assert!(dist(&p, &q) < 1e-15);
        assert!(matches!(c.project(&[0.0, 0.0, 1.0]), Err(Error::MedialAxis { .. })));

        let t = torus();
        let q = t.project(&[3.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(q[0], 2.5, epsilon = 1e-15);
        assert_eq!(&q[1..], &[0.0, 0.0]);
        assert!(matches!(t.project(&[2.0, 0.0, 0.0]), Err(Error::MedialAxis { .. })));
    }

    #[test]
    fn torus_projection_matches_grid_search() {
        let t = torus();
        let grid = t.grid(0.002);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let p = t.sample_on(&mut rng);
            let nrm = random_normal(&t, &p, &mut rng);
            let x: Vec<f64> = p.iter().zip(&nrm).map(|(a, b)| a + 0.3 * b).collect();
            let q = t.project(&x).unwrap();
            let (best, _) = grid
                .iter()
                .map(|g| (dist(g, &x), g))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap();
            assert!((dist(&q, &x) - best).abs() < 1e-5);
            assert!((dist(&q, &x) - t.distance(&x)).abs() < 1e-12);
            assert!(dist(&q, &x) <= best + 1e-12);
        }
    }

    #[test]
    fn tangent_examples() {
        let c = ManifoldModel::circle(1.0, 2).unwrap();
        let tc = c.tangent(&[1.0, 0.0]).unwrap();
        assert_eq!(principal_angle(&tc, &Subspace::span(&[[0.0, 1.0]]).unwrap()).unwrap(), 0.0);

        let s = ManifoldModel::sphere(1.0, 3).unwrap();
        let ts = s.tangent(&[0.0, 0.0, 1.0]).unwrap();
        assert!(principal_angle(&ts, &Subspace::canonical(3, 2)).unwrap() < 1e-15);

        let tt = torus().tangent(&[2.5, 0.0, 0.0]).unwrap();
        let e23 = Subspace::span(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert!(principal_angle(&tt, &e23).unwrap() < 1e-15);

        assert!(matches!(c.tangent(&[1.1, 0.0]), Err(Error::OffManifold { .. })));
    }

    #[test]
    fn tangent_matches_parametrization_partials() {
        let t = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let (u, v) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
            let h = 1e-6;
            let du: Vec<f64> = t
                .param_point(&[u + h, v])
                .iter()
                .zip(t.param_point(&[u - h, v]))
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let dv: Vec<f64> = t
                .param_point(&[u, v + h])
                .iter()
                .zip(t.param_point(&[u, v - h]))
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let fd = Subspace::span(&[du, dv]).unwrap();
            let exact = t.tangent(&t.param_point(&[u, v])).unwrap();
            assert!(principal_angle(&fd, &exact).unwrap() < 1e-8);
        }
    }

    #[test]
    fn noise_free_samples_lie_on_manifold() {
        for model in [ManifoldModel::circle(1.0, 3).unwrap(), torus(), ManifoldModel::sphere(2.0, 4).unwrap()] {
            let cloud = sample(&model, &SampleSpec::new(2000, 1.0, 4)).unwrap();
            assert!(cloud.labels.iter().all(|l| *l == Label::Signal));
            for p in cloud.points.iter() {
                assert!(model.distance(p) <= 1e-10);
                let q = model.project(p).unwrap();
                assert!(dist(p, &q) <= 1e-10);
            }
        }
    }

    #[test]
    fn circle_sampler_is_symmetric() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        let cloud = sample(&model, &SampleSpec::new(100_000, 1.0, 17)).unwrap();
        let right = cloud.points.iter().filter(|p| p[0] > 0.0).count() as f64 / 1e5;
        assert!((right - 0.5).abs() <= 0.01, "{right}");
    }

    #[test]
    fn torus_sampler_matches_area_element() {
        // Fraction of area on the outer half (cos v > 0) is 1/2 + r/(πR).
        let t = torus();
        let cloud = sample(&t, &SampleSpec::new(100_000, 1.0, 5)).unwrap();
        let outer = cloud.points.iter().filter(|p| p[0].hypot(p[1]) > 2.0).count() as f64 / 1e5;
        let expected = 0.5 + 0.5 / (PI * 2.0);
        assert!((outer - expected).abs() < 0.01, "{outer} vs {expected}");
    }

    #[test]
    fn mixture_label_fraction() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        let cloud = sample(&model, &SampleSpec::new(100_000, 0.8, 3)).unwrap();
        let frac = cloud.signal_indices().len() as f64 / 1e5;
        assert!((frac - 0.8).abs() <= 0.01);
        let k0 = model.default_k0();
        for (p, l) in cloud.points.iter().zip(&cloud.labels) {
            if *l == Label::Outlier {
                assert!(crate::linalg::norm(p) <= k0);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = SampleSpec::new(500, 0.7, 99);
        let a = sample(&torus(), &spec).unwrap();
        let b = sample(&torus(), &spec).unwrap();
        assert_eq!(a, b);
        let c = sample(&torus(), &SampleSpec::new(500, 0.7, 100)).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn sample_spec_validation() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        assert!(sample(&model, &SampleSpec::new(0, 1.0, 0)).is_err());
        assert!(sample(&model, &SampleSpec::new(5, 0.0, 0)).is_err());
        let mut spec = SampleSpec::new(5, 0.5, 0);
        spec.k0 = Some(2.5);
        assert!(sample(&model, &spec).is_err());
    }

    #[test]
    fn reach_is_not_undercut() {
        for model in [ManifoldModel::circle(1.0, 2).unwrap(), torus(), ManifoldModel::sphere(1.0, 3).unwrap()] {
            let est = numerical_reach(&model, 20_000, 1);
            assert!(est >= model.reach() - 0.01, "{est}");
            assert!(est <= model.reach() * 1.2, "sampled infimum {est} far above reach");
        }
    }

    #[test]
    fn grid_covers_manifold() {
        for model in [ManifoldModel::circle(1.0, 2).unwrap(), torus(), ManifoldModel::sphere(1.0, 3).unwrap()] {
            let spacing = 0.05;
            let grid = model.grid(spacing);
            let index = crate::spatial::GridIndex::new(&grid, spacing);
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            for _ in 0..2000 {
                let p = model.sample_on(&mut rng);
                assert!(!index.within(&p, spacing).is_empty());
            }
        }
    }

    #[test]
    fn geodesic_bounds_hold() {
        for model in [ManifoldModel::circle(1.0, 2).unwrap(), torus(), ManifoldModel::sphere(1.0, 3).unwrap()] {
            let report = verify_geodesic_bounds(&model, 10_000, 3);
            assert_eq!(report.violations, 0, "{report:?}");
            assert!(report.min_lower_slack >= -1e-12);
        }
    }

    #[test]
    fn standardness_circle_matches_arc_length() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        let report = verify_standardness(&model, &[0.1], 200_000, 4).unwrap();
        let exact = 2.0 * (0.05f64).asin() / PI;
        let se = (exact * (1.0 - exact) / 200_000.0).sqrt();
        assert!((report.rows[0].mean_mass - exact).abs() < 5.0 * se);
        assert!(report.passed);
    }

    #[test]
    fn standardness_torus_slope() {
        let radii: Vec<f64> = (0..5).map(|i| 0.02 + 0.02 * i as f64).collect();
        let report = verify_standardness(&torus(), &radii, 1_000_000, 6).unwrap();
        assert!((report.log_slope - 2.0).abs() <= 0.1, "{}", report.log_slope);
        assert!(report.passed);
    }

    #[test]
    fn ball_projection_inclusions() {
        for model in [ManifoldModel::circle(1.0, 2).unwrap(), torus()] {
            let report = verify_ball_projection(&model, 300, 0.005, 2);
            assert_eq!(report.violations, 0);
            assert!(report.checked_points > 0);
        }
    }

    #[test]
    fn normal_offset_bound() {
        for model in [ManifoldModel::circle(1.0, 3).unwrap(), torus()] {
            let report = verify_normal_offset(&model, 10_000, 5);
            assert_eq!(report.violations, 0);
            assert!(report.checked_points > 1000);
        }
    }
}
