//! Slab-counting outlier removal with a shrinking bandwidth schedule.
//!
//! A point survives one pass when the thin slab around it, aligned with its
//! estimated tangent space, holds at least `t ln(n − 1)` points of the
//! current cloud (itself included). Each pass re-estimates tangents on the
//! survivors at the next, smaller bandwidth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::{Label, PointCloud};
use crate::error::{precondition, Error, Result};
use crate::linalg::{random_unit, sub, Subspace};
use crate::models::{random_normal, ManifoldModel};
use crate::spatial::GridIndex;
use crate::tse::{estimate_tangents, TangentField, TseParams};

/// Slab half-widths `k1 h` (tangential) and `k2 h²` (normal), and the count
/// threshold factor `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlabSpec {
    pub k1: f64,
    pub k2: f64,
    pub t: f64,
}

/// Default angle-bound constant `K` in the slab width formula.
pub const DEFAULT_ANGLE_CONSTANT: f64 = 2.0;

impl SlabSpec {
    /// `k1 = 3/(4d + 8K√d)`, `k2 = 1/(4√(D−d)(ρ ∨ 1))`.
    pub fn from_geometry(d: usize, ambient: usize, rho: f64, big_k: f64, t: f64) -> Result<Self> {
        precondition(ambient > d && d >= 1, "slabs need 1 <= d < D")?;
        precondition(rho > 0.0 && big_k > 0.0, "slabs need reach > 0 and K > 0")?;
        let df = d as f64;
        let k1 = 3.0 / (4.0 * df + 8.0 * big_k * df.sqrt());
        let k2 = 1.0 / (4.0 * ((ambient - d) as f64).sqrt() * rho.max(1.0));
        Ok(SlabSpec { k1, k2, t })
    }

    pub fn validate(&self) -> Result<()> {
        precondition(
            self.k1 > 0.0 && self.k2 > 0.0 && self.t >= 0.0,
            "slab constants must be positive and t nonnegative",
        )
    }

    /// Radius of the smallest ball around the slab center containing it.
    pub fn bounding_radius(&self, h: f64) -> f64 {
        (self.k1 * h).hypot(self.k2 * h * h)
    }

    /// Count required to survive: `t ln(n − 1)`.
    pub fn threshold(&self, n_total: usize) -> f64 {
        self.t * ((n_total.max(2) - 1) as f64).ln()
    }
}

/// Inclusion radius factor `k3 = k2ρ/(2K) ∧ k1/2 ∧ √(ρ k1) ∧ √(ρ k2)`.
pub fn inclusion_factor(spec: &SlabSpec, rho: f64, big_k: f64) -> f64 {
    (spec.k2 * rho / (2.0 * big_k))
        .min(spec.k1 / 2.0)
        .min((rho * spec.k1).sqrt())
        .min((rho * spec.k2).sqrt())
}

/// Whether `y` lies in the closed slab at `x` along `t` with bandwidth `h`.
pub fn in_slab(x: &[f64], t: &Subspace, h: f64, spec: &SlabSpec, y: &[f64]) -> bool {
    let v = sub(y, x);
    let along = t.coords(&v);
    let along2: f64 = along.iter().map(|c| c * c).sum();
    let total2: f64 = v.iter().map(|c| c * c).sum();
    let normal2 = (total2 - along2).max(0.0);
    let a = spec.k1 * h;
    let b = spec.k2 * h * h;
    along2 <= a * a && normal2 <= b * b
}

/// Number of points of `cloud` in the slab of point `j` (itself included).
pub fn slab_count(
    cloud: &PointCloud,
    index: &GridIndex<'_>,
    tangent: &Subspace,
    j: usize,
    h: f64,
    spec: &SlabSpec,
) -> usize {
    let x = cloud.point(j);
    let mut count = 0;
    index.visit_candidates(x, spec.bounding_radius(h), |i| {
        if in_slab(x, tangent, h, spec, cloud.point(i)) {
            count += 1;
        }
    });
    count
}

fn slab_counts(cloud: &PointCloud, tangents: &[Subspace], h: f64, spec: &SlabSpec) -> Vec<usize> {
    let cell = spec.bounding_radius(h).max(1e-12);
    let index = GridIndex::new(cloud, cell);
    (0..cloud.len())
        .into_par_iter()
        .map(|j| slab_count(cloud, &index, &tangents[j], j, h, spec))
        .collect()
}

/// One denoising pass: indices `j` (into `cloud`) whose slab holds at least
/// `t ln(n_total − 1)` points. Indices without their own tangent estimate
/// use the nearest estimated point's.
pub fn sd_step(
    cloud: &PointCloud,
    tangents: &TangentField,
    h: f64,
    spec: &SlabSpec,
    n_total: usize,
) -> Result<Vec<usize>> {
    spec.validate()?;
    precondition(h > 0.0, "bandwidth must be positive")?;
    let all: Vec<usize> = (0..cloud.len()).collect();
    let t = tangents.complete(cloud, &all)?;
    let threshold = spec.threshold(n_total);
    let counts = slab_counts(cloud, &t, h, spec);
    Ok(all
        .into_iter()
        .filter(|&j| counts[j] as f64 >= threshold)
        .collect())
}

/// Exponents `γ_k` and bandwidths `h_k = (κ ln n / (β (n − 1)))^{γ_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub gamma: Vec<f64>,
    pub h: Vec<f64>,
    pub kappa: f64,
    pub beta: f64,
    pub n: usize,
    pub d: usize,
}

impl Schedule {
    /// `κ ln n / (β (n − 1))`.
    pub fn base(&self) -> f64 {
        base(self.n, self.beta, self.kappa)
    }

    /// Limit bandwidth `h_∞ = base^{1/d}`.
    pub fn h_infinity(&self) -> f64 {
        self.base().powf(1.0 / self.d as f64)
    }

    /// `h_k` for any `k`, extending the recurrence past the stored prefix.
    pub fn h_at(&self, k: usize) -> f64 {
        self.base().powf(gamma_at(self.d, k))
    }
}

fn base(n: usize, beta: f64, kappa: f64) -> f64 {
    let n = n as f64;
    kappa * n.ln() / (beta * (n - 1.0))
}

fn gamma_at(d: usize, k: usize) -> f64 {
    let df = d as f64;
    let mut g = 1.0 / (df + 1.0);
    for _ in 0..k {
        g = (2.0 * g + 1.0) / (df + 2.0);
    }
    g
}

/// Bandwidth schedule for `k = 0..=k_max`.
pub fn schedule(n: usize, d: usize, beta: f64, kappa: f64, k_max: usize) -> Result<Schedule> {
    precondition(n >= 3, "schedule needs n >= 3")?;
    precondition(d >= 1, "schedule needs d >= 1")?;
    precondition(beta > 0.0 && beta <= 1.0, "beta must lie in (0, 1]")?;
    precondition(kappa > 0.0, "kappa must be positive")?;
    let b = base(n, beta, kappa);
    let gamma: Vec<f64> = (0..=k_max).map(|k| gamma_at(d, k)).collect();
    let h = gamma.iter().map(|g| b.powf(*g)).collect();
    Ok(Schedule {
        gamma,
        h,
        kappa,
        beta,
        n,
        d,
    })
}

/// Smallest `k` with `γ_k ≥ 1/d − δ`, for `0 < δ < 1/(d(d+1))`.
pub fn k_delta(d: usize, delta: f64) -> Result<usize> {
    precondition(d >= 1, "k_delta needs d >= 1")?;
    let df = d as f64;
    if !(delta > 0.0 && delta < 1.0 / (df * (df + 1.0))) {
        return Err(Error::Precondition(format!(
            "delta = {delta} outside (0, 1/(d(d+1)))"
        )));
    }
    let target = 1.0 / df - delta;
    let mut g = 1.0 / (df + 1.0);
    let mut k = 0;
    while g < target {
        g = (2.0 * g + 1.0) / (df + 2.0);
        k += 1;
    }
    Ok(k)
}

/// Closed-form iteration count beyond which `γ_k ≥ 1/d − δ` is guaranteed:
/// `(ln(1/δ) − ln(d(d+1))) / (ln(d+2) − ln 2)`.
pub fn k_delta_bound(d: usize, delta: f64) -> f64 {
    let df = d as f64;
    ((1.0 / delta).ln() - (df * (df + 1.0)).ln()) / ((df + 2.0).ln() - 2f64.ln())
}

const K_HAT_LIMIT: usize = 10_000;

/// Data-driven iteration count: with `m` the smallest distance to M among
/// points farther than `h_∞²/ρ`, the smallest `k` with `h_k²/ρ < m`.
/// Zero when no point is that far. Uses true distances (an oracle quantity).
pub fn k_hat(distances: &[f64], schedule: &Schedule, rho: f64) -> Result<usize> {
    let floor = schedule.h_infinity().powi(2) / rho;
    k_hat_with(distances, floor, |k| schedule.h_at(k).powi(2) / rho)
}

/// [`k_hat`] against an arbitrary decreasing threshold sequence.
pub fn k_hat_with<F: Fn(usize) -> f64>(distances: &[f64], floor: f64, level: F) -> Result<usize> {
    let far = distances
        .iter()
        .copied()
        .filter(|&d| d > floor)
        .fold(f64::INFINITY, f64::min);
    if !far.is_finite() {
        return Ok(0);
    }
    (0..K_HAT_LIMIT)
        .find(|&k| level(k) < far)
        .ok_or_else(|| Error::Degenerate("bandwidth schedule does not decrease".into()))
}

/// Per-pass counts. `true_positives` are surviving signal points and
/// `false_positives` surviving outliers (both absent without labels).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    pub k: usize,
    pub h_k: f64,
    pub survivors: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_positives: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub false_positives: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct DenoiseOutcome {
    /// Surviving indices into the input cloud, ascending.
    pub survivors: Vec<usize>,
    pub diagnostics: Vec<IterationDiagnostics>,
    /// Tangent estimates of the last pass, indexed into `survivors` order
    /// before the last filtering (see [`DenoiseOutcome::final_tangents`]).
    last_pass: Option<(Vec<usize>, TangentField)>,
}

impl DenoiseOutcome {
    /// Tangent estimates used by the final pass, restricted to the final
    /// survivors and returned in survivor order.
    pub fn final_tangents(&self, cloud: &PointCloud) -> Result<Vec<Subspace>> {
        let (pool, field) = self
            .last_pass
            .as_ref()
            .ok_or(Error::Empty("denoising ran no pass"))?;
        let pool_cloud = cloud.subset(pool);
        let local: Vec<usize> = self
            .survivors
            .iter()
            .map(|s| pool.binary_search(s).expect("survivor came from the pool"))
            .collect();
        field.complete(&pool_cloud, &local)
    }
}

/// Runs one estimate-then-filter pass per bandwidth in `bandwidths`, each on
/// the survivors of the previous pass. `tse` maps a bandwidth to the tangent
/// estimation parameters of that pass.
pub fn denoise_passes<F: Fn(f64) -> TseParams>(
    cloud: &PointCloud,
    labels: Option<&[Label]>,
    bandwidths: &[f64],
    spec: &SlabSpec,
    n_total: usize,
    tse: F,
) -> Result<DenoiseOutcome> {
    spec.validate()?;
    if let Some(l) = labels {
        precondition(l.len() == cloud.len(), "labels must match the cloud")?;
    }
    let mut current: Vec<usize> = (0..cloud.len()).collect();
    let mut diagnostics = Vec::with_capacity(bandwidths.len());
    let mut last_pass = None;
    for (k, &h) in bandwidths.iter().enumerate() {
        if current.len() < 2 {
            break;
        }
        let pool = cloud.subset(&current);
        let field = estimate_tangents(&pool, &tse(h), None)?;
        if field.is_empty() {
            // Nothing has enough neighbors: every slab holds only its center.
            let keep = if spec.threshold(n_total) <= 1.0 { current.clone() } else { Vec::new() };
            last_pass = None;
            current = keep;
        } else {
            let kept = sd_step(&pool, &field, h, spec, n_total)?;
            let next: Vec<usize> = kept.iter().map(|&i| current[i]).collect();
            last_pass = Some((current.clone(), field));
            current = next;
        }
        let (tp, fp) = match labels {
            Some(l) => {
                let tp = current.iter().filter(|&&i| l[i] == Label::Signal).count();
                (Some(tp), Some(current.len() - tp))
            }
            None => (None, None),
        };
        diagnostics.push(IterationDiagnostics {
            k,
            h_k: h,
            survivors: current.len(),
            true_positives: tp,
            false_positives: fp,
        });
    }
    Ok(DenoiseOutcome {
        survivors: current,
        diagnostics,
        last_pass,
    })
}

/// Passes at `h_0, …, h_{k_iters}` of the schedule built from
/// `(n, d, beta, kappa)`, with `n` the cloud size.
pub fn iterative_denoise<F: Fn(f64) -> TseParams>(
    cloud: &PointCloud,
    labels: Option<&[Label]>,
    d: usize,
    beta: f64,
    kappa: f64,
    spec: &SlabSpec,
    k_iters: usize,
    tse: F,
) -> Result<(DenoiseOutcome, Schedule)> {
    let sched = schedule(cloud.len(), d, beta, kappa, k_iters)?;
    let out = denoise_passes(cloud, labels, &sched.h, spec, cloud.len(), tse)?;
    Ok((out, sched))
}

/// Threshold factor from a noise-free pilot cloud: half the 5th percentile
/// (nearest rank) of its slab counts at bandwidth `h`, over `ln(n_total − 1)`.
pub fn calibrate_threshold(
    pilot: &PointCloud,
    tse_params: &TseParams,
    spec: &SlabSpec,
    n_total: usize,
) -> Result<f64> {
    let h = tse_params.h;
    let field = estimate_tangents(pilot, tse_params, None)?;
    let all: Vec<usize> = (0..pilot.len()).collect();
    let t = field.complete(pilot, &all)?;
    let counts: Vec<f64> = slab_counts(pilot, &t, h, spec)
        .into_iter()
        .map(|c| c as f64)
        .collect();
    let p5 = crate::stats::percentile(&counts, 5.0).ok_or(Error::Empty("pilot cloud"))?;
    Ok(0.5 * p5 / ((n_total.max(3) - 1) as f64).ln())
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SlabLemmaReport {
    pub trials: usize,
    pub separation_violations: usize,
    pub tilted_separation_violations: usize,
    pub inclusion_violations: usize,
    pub probes: usize,
}

impl SlabLemmaReport {
    pub fn violations(&self) -> usize {
        self.separation_violations + self.tilted_separation_violations + self.inclusion_violations
    }
}

/// Monte-Carlo check of the slab/manifold geometry, with the slab constants
/// from [`SlabSpec::from_geometry`] and bandwidths `h ≤ min(1, ρ/8)`:
///
/// * `d(x, M) ≥ h/√2` ⇒ no point of M lies in `S(x, T, h)`, any `T`;
/// * `d(x, M) ≥ h²/ρ` and `∠(T_{π(x)}M, T) ≤ K h/ρ` ⇒ the same;
/// * `x, y ∈ M`, `‖x − y‖ ≤ k3 h` ⇒ `y ∈ S(x, T_x M, h)`.
///
/// Manifold points are probed on a local chart grid around `π(x)`.
pub fn verify_slab_lemma(
    model: &ManifoldModel,
    big_k: f64,
    trials: usize,
    seed: u64,
) -> Result<SlabLemmaReport> {
    let d = model.intrinsic_dim();
    let rho = model.reach();
    let spec = SlabSpec::from_geometry(d, model.ambient_dim, rho, big_k, 1.0)?;
    let k3 = inclusion_factor(&spec, rho, big_k);
    let h_max = (rho / 8.0).min(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SlabLemmaReport {
        trials,
        ..Default::default()
    };
    let side = 9usize;
    for _ in 0..trials {
        let h = rng.random_range(0.02 * h_max..=h_max);
        let p = model.sample_on(&mut rng);
        let tp = model.tangent(&p)?;
        let nrm = random_normal(model, &p, &mut rng);
        let reach_r = spec.bounding_radius(h) * 1.5;
        let probes = chart_grid(model, &p, reach_r, side, d);
        report.probes += probes.len();

        // Far center, arbitrary direction.
        let off = rng.random_range(h / 2f64.sqrt()..=2.0 * h);
        let x: Vec<f64> = p.iter().zip(&nrm).map(|(a, b)| a + off * b).collect();
        let t_any = random_subspace(&mut rng, model.ambient_dim, d);
        report.separation_violations += probes
            .iter()
            .filter(|z| in_slab(&x, &t_any, h, &spec, z))
            .count();

        // Near center, nearly tangent direction.
        let off = rng.random_range(h * h / rho..=h / 2f64.sqrt());
        let x: Vec<f64> = p.iter().zip(&nrm).map(|(a, b)| a + off * b).collect();
        let phi = (big_k * h / rho).min(1.0).asin() * rng.random::<f64>();
        let t_tilt = tilt(&tp, &nrm, phi);
        report.tilted_separation_violations += probes
            .iter()
            .filter(|z| in_slab(&x, &t_tilt, h, &spec, z))
            .count();

        // Nearby manifold points fall in the exact-tangent slab.
        let step: Vec<f64> = random_unit(&mut rng, d)
            .iter()
            .map(|c| c * k3 * h * rng.random::<f64>())
            .collect();
        if let Ok(y) = model.chart(&p, &step) {
            if crate::linalg::dist(&p, &y) <= k3 * h && !in_slab(&p, &tp, h, &spec, &y) {
                report.inclusion_violations += 1;
            }
        }
    }
    Ok(report)
}

fn chart_grid(model: &ManifoldModel, p: &[f64], r: f64, side: usize, d: usize) -> Vec<Vec<f64>> {
    let coord = |i: usize| -r + 2.0 * r * i as f64 / (side - 1) as f64;
    let mut out = Vec::new();
    if d == 1 {
        for i in 0..side {
            if let Ok(z) = model.chart(p, &[coord(i)]) {
                out.push(z);
            }
        }
    } else {
        for i in 0..side {
            for j in 0..side {
                if let Ok(z) = model.chart(p, &[coord(i), coord(j)]) {
                    out.push(z);
                }
            }
        }
    }
    out
}

fn random_subspace<R: Rng>(rng: &mut R, dim: usize, d: usize) -> Subspace {
    loop {
        let vs: Vec<Vec<f64>> = (0..d).map(|_| random_unit(rng, dim)).collect();
        if let Ok(s) = Subspace::span(&vs) {
            return s;
        }
    }
}

/// Rotates the first basis vector of `t` toward the unit normal `n` by `phi`.
fn tilt(t: &Subspace, n: &[f64], phi: f64) -> Subspace {
    let mut vs = t.basis_vectors();
    vs[0] = vs[0]
        .iter()
        .zip(n)
        .map(|(u, v)| phi.cos() * u + phi.sin() * v)
        .collect();
    Subspace::span(&vs).expect("tilted basis stays independent")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn x_axis() -> Subspace {
        Subspace::canonical(2, 1)
    }

    #[test]
    fn slab_membership_examples() {
        let spec = SlabSpec { k1: 0.5, k2: 0.25, t: 1.0 };
        let x = [0.3, -0.2];
        assert!(in_slab(&x, &x_axis(), 0.1, &spec, &x));
        assert!(in_slab(&[0.0, 0.0], &x_axis(), 0.1, &spec, &[0.04, 0.002]));
        assert!(!in_slab(&[0.0, 0.0], &x_axis(), 0.1, &spec, &[0.04, 0.004]));
    }

    #[test]
    fn lemma_constants() {
        let s = SlabSpec::from_geometry(1, 2, 1.0, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.k1, 3.0 / 20.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.k2, 0.25, epsilon = 1e-15);
        let s = SlabSpec::from_geometry(2, 3, 0.5, 2.0, 1.0).unwrap();
        assert_abs_diff_eq!(s.k1, 3.0 / (8.0 + 16.0 * 2f64.sqrt()), epsilon = 1e-15);
        assert_abs_diff_eq!(s.k2, 0.25, epsilon = 1e-15);
    }

    fn segment_with_outlier() -> PointCloud {
        let mut rows: Vec<[f64; 2]> = (0..30).map(|i| [0.01 * i as f64, 0.0]).collect();
        rows.push([0.15, 0.5]);
        PointCloud::from_rows(&rows).unwrap()
    }

    fn field_of(cloud: &PointCloud, t: Subspace) -> TangentField {
        TangentField {
            indices: (0..cloud.len()).collect(),
            subspaces: vec![t; cloud.len()],
            flagged: vec![],
        }
    }

    #[test]
    fn sd_step_examples() {
        let cloud = segment_with_outlier();
        let field = field_of(&cloud, x_axis());
        // t ln(n − 1) = 3 with n_total = 31.
        let spec = SlabSpec { k1: 0.5, k2: 1.0, t: 3.0 / 30f64.ln() };
        let kept = sd_step(&cloud, &field, 0.1, &spec, 31).unwrap();
        assert_eq!(kept, (0..30).collect::<Vec<_>>());
        assert_eq!(kept, sd_step_brute(&cloud, &field, 0.1, &spec, 31));

        let everyone = SlabSpec { t: 1.0 / 30f64.ln(), ..spec };
        assert_eq!(sd_step(&cloud, &field, 0.1, &everyone, 31).unwrap().len(), 31);

        let lonely = PointCloud::from_rows(&[[0.0, 0.0], [0.0, 3.0]]).unwrap();
        let two = SlabSpec { k1: 0.5, k2: 1.0, t: 2.0 / 30f64.ln() };
        let f = field_of(&lonely, x_axis());
        assert!(sd_step(&lonely, &f, 0.1, &two, 31).unwrap().is_empty());
    }

    pub(crate) fn sd_step_brute(
        cloud: &PointCloud,
        field: &TangentField,
        h: f64,
        spec: &SlabSpec,
        n_total: usize,
    ) -> Vec<usize> {
        let all: Vec<usize> = (0..cloud.len()).collect();
        let t = field.complete(cloud, &all).unwrap();
        let threshold = spec.threshold(n_total);
        all.into_iter()
            .filter(|&j| {
                let count = cloud
                    .iter()
                    .filter(|y| in_slab(cloud.point(j), &t[j], h, spec, y))
                    .count();
                count as f64 >= threshold
            })
            .collect()
    }

    #[test]
    fn schedule_examples() {
        let s = schedule(1000, 2, 1.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(s.gamma[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.gamma[1], 5.0 / 12.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.gamma[2], 11.0 / 24.0, epsilon = 1e-15);
        let s = schedule(1000, 1, 1.0, 1.0, 2).unwrap();
        assert_abs_diff_eq!(s.gamma[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.gamma[1], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.gamma[2], 7.0 / 9.0, epsilon = 1e-15);
        for d in 1..6 {
            let s = schedule(5000, d, 0.8, 1.0, 40).unwrap();
            let lim = 1.0 / d as f64;
            assert!(s.gamma[..10].windows(2).all(|w| w[0] < w[1]));
            assert!(s.gamma.windows(2).all(|w| w[0] <= w[1]));
            assert!(s.gamma.iter().all(|&g| g <= lim));
            assert!(s.h.windows(2).all(|w| w[0] >= w[1]));
            assert!((s.gamma[40] - lim).abs() < 1e-6);
        }
    }

    #[test]
    fn k_delta_examples() {
        assert_eq!(k_delta(2, 0.05).unwrap(), 2);
        // γ_0 = 1/d − 1/(d(d+1)), so k = 0 is never reached inside the range.
        assert_eq!(k_delta(2, 1.0 / 6.0 - 1e-9).unwrap(), 1);
        assert!(k_delta(2, 1.0 / 6.0).is_err());
        assert!(k_delta(2, 0.0).is_err());
        assert_eq!(k_delta(1, 0.05).unwrap(), 6);
        let mut last = 0;
        for i in (1..200).rev() {
            let delta = i as f64 / 200.0 / 6.0;
            let k = k_delta(2, delta).unwrap();
            assert!(k >= last);
            assert!(k as f64 <= k_delta_bound(2, delta).ceil().max(0.0) + 1.0);
            last = k;
        }
    }

    #[test]
    fn k_hat_examples() {
        let s = schedule(4000, 1, 0.8, 1.0, 3).unwrap();
        assert_eq!(k_hat(&[0.0; 10], &s, 1.0).unwrap(), 0);
        let levels = [0.3, 0.15, 0.1, 0.08];
        assert_eq!(k_hat_with(&[0.0, 0.2], 0.01, |k| levels[k]).unwrap(), 1);
        assert_eq!(k_hat_with(&[0.0, 0.5, 0.9], 0.01, |k| levels[k]).unwrap(), 0);
        let far = s.h[0].powi(2) * 2.0;
        assert_eq!(k_hat(&[0.0, far], &s, 1.0).unwrap(), 0);
    }

    #[test]
    fn zero_threshold_is_identity() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        let cloud = crate::models::sample(&model, &crate::models::SampleSpec::new(300, 0.7, 1)).unwrap();
        let spec = SlabSpec { k1: 0.15, k2: 0.25, t: 0.0 };
        let (out, _) = iterative_denoise(&cloud.points, Some(&cloud.labels), 1, 0.7, 1.0, &spec, 0, |h| {
            TseParams::new(h, 1)
        })
        .unwrap();
        assert_eq!(out.survivors, (0..300).collect::<Vec<_>>());
        assert_eq!(out.diagnostics.len(), 1);
        let d = &out.diagnostics[0];
        assert_eq!(d.true_positives.unwrap() + d.false_positives.unwrap(), 300);
    }

    #[test]
    fn slab_lemma_holds_on_models() {
        for model in [
            ManifoldModel::circle(1.0, 2).unwrap(),
            ManifoldModel::torus(2.0, 0.5, 3).unwrap(),
        ] {
            let r = verify_slab_lemma(&model, DEFAULT_ANGLE_CONSTANT, 2000, 4).unwrap();
            assert_eq!(r.violations(), 0, "{r:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn sd_step_matches_brute_force_and_is_monotone(
            seed in 0u64..10_000,
            n in 20usize..300,
            t in 0.0f64..2.0,
            dt in 0.0f64..1.0,
        ) {
            let model = ManifoldModel::circle(1.0, 2).unwrap();
            let cloud = crate::models::sample(&model, &crate::models::SampleSpec::new(n, 0.7, seed)).unwrap().points;
            let field = estimate_tangents(&cloud, &TseParams::new(0.3, 1), None).unwrap();
            prop_assume!(!field.is_empty());
            let spec = SlabSpec { k1: 0.5, k2: 1.0, t };
            let fast = sd_step(&cloud, &field, 0.3, &spec, n).unwrap();
            prop_assert_eq!(&fast, &sd_step_brute(&cloud, &field, 0.3, &spec, n));
            let stricter = SlabSpec { t: t + dt, ..spec };
            let fewer = sd_step(&cloud, &field, 0.3, &stricter, n).unwrap();
            prop_assert!(fewer.iter().all(|i| fast.binary_search(i).is_ok()));
        }

        #[test]
        fn slab_is_rigid_motion_invariant(
            x in prop::array::uniform2(-1.0f64..1.0),
            y in prop::array::uniform2(-1.0f64..1.0),
            angle in -3.0f64..3.0,
            shift in prop::array::uniform2(-3.0f64..3.0),
            h in 0.05f64..1.0,
        ) {
            let spec = SlabSpec { k1: 0.7, k2: 0.9, t: 1.0 };
            let t = Subspace::span(&[[1.0, 0.3]]).unwrap();
            let r = crate::linalg::Matrix::from_rows(&[[angle.cos(), -angle.sin()], [angle.sin(), angle.cos()]]);
            let m = |p: &[f64]| -> Vec<f64> {
                let q = r.mul_vec(p);
                vec![q[0] + shift[0], q[1] + shift[1]]
            };
            let before = in_slab(&x, &t, h, &spec, &y);
            let after = in_slab(&m(&x), &t.rotated(&r), h, &spec, &m(&y));
            // Exact ties on the boundary may flip under rounding.
            let v = sub(&y, &x);
            let a = t.tangential_norm(&v) - spec.k1 * h;
            let b = t.normal_norm(&v) - spec.k2 * h * h;
            prop_assume!(a.abs() > 1e-9 && b.abs() > 1e-9);
            prop_assert_eq!(before, after);
            let _ = dist(&x, &y);
        }
    }
}
