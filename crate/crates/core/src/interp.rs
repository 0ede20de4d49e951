//! Numerical realization of the interpolating diffeomorphism
//! `Φ(a) = a + Σ_j φ((a − π(p_j))/ℓ) [(R_j − I)(a − π(p_j)) + (p_j − π(p_j))]`
//! and checks of its differential bounds, anchor interpolation, tangent
//! matching, proximity and reach.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{precondition, Error, Result};
use crate::linalg::{
    axpy, dist, dist2, dot, norm, principal_angle, random_unit, scale, sub, subspace_rotation,
    Matrix, Subspace, SymMatrix,
};
use crate::models::{random_normal, ManifoldModel};
use crate::spatial::GridIndex;

/// First-order constant of the differential bounds.
pub const C1: f64 = 3.5;
/// Second-order constant of the differential bounds.
pub const C2: f64 = 28.0;
/// Reach-bound constants.
pub const REACH_C1: f64 = 11.0;
pub const REACH_C2: f64 = 252.0;
/// Allowance for finite-difference error in bound checks.
pub const FD_SLACK: f64 = 1.05;
/// Allowed gap between the sampled reach and its lower bound.
pub const REACH_TOL: f64 = 0.02;
pub const ANCHOR_TOL: f64 = 1e-9;
pub const TANGENT_TOL: f64 = 1e-5;

/// `exp(‖x‖²/(‖x‖² − 1))` inside the unit ball, 0 outside.
pub fn bump(x: &[f64]) -> f64 {
    let s = dot(x, x);
    if s < 1.0 {
        (s / (s - 1.0)).exp()
    } else {
        0.0
    }
}

#[derive(Clone, Debug)]
pub struct Anchor {
    pub point: Vec<f64>,
    pub tangent: Subspace,
}

#[derive(Clone, Debug)]
pub struct InterpolationProblem {
    pub model: ManifoldModel,
    pub anchors: Vec<Anchor>,
    pub eta: f64,
    pub theta: f64,
    pub delta: f64,
    pub ell: f64,
    feet: Vec<Vec<f64>>,
    rotations: Vec<Matrix>,
}

fn check_hypotheses(rho: f64, eta: f64, delta: f64, theta: f64) -> Result<()> {
    precondition(
        eta >= 0.0 && theta >= 0.0 && eta.is_finite() && theta.is_finite(),
        "eta and theta must be nonnegative",
    )?;
    precondition(18.0 * eta < delta, "need 18·eta < delta")?;
    precondition(delta <= rho, "need delta ≤ reach")?;
    precondition(theta <= PI / 64.0, "need theta ≤ π/64")
}

impl InterpolationProblem {
    /// Validates the hypotheses and precomputes feet `π(p_j)` and rotations
    /// `R_j` carrying `T_{π(p_j)}M` onto the anchor tangent.
    pub fn new(
        model: ManifoldModel,
        anchors: Vec<Anchor>,
        eta: f64,
        theta: f64,
        delta: f64,
    ) -> Result<Self> {
        check_hypotheses(model.reach(), eta, delta, theta)?;
        let d = model.intrinsic_dim();
        let mut feet = Vec::with_capacity(anchors.len());
        let mut rotations = Vec::with_capacity(anchors.len());
        for (j, a) in anchors.iter().enumerate() {
            precondition(
                a.tangent.dim() == d && a.tangent.ambient_dim() == model.ambient_dim,
                "anchor tangent has the wrong shape",
            )?;
            let off = model.distance(&a.point);
            if off > eta + 1e-12 {
                return Err(Error::Precondition(format!(
                    "anchor {j} is {off} from M, above eta = {eta}"
                )));
            }
            let foot = model.project(&a.point)?;
            let t = model.tangent(&foot)?;
            let angle = principal_angle(&t, &a.tangent)?;
            if angle > theta + 1e-12 {
                return Err(Error::Precondition(format!(
                    "anchor {j} tangent angle {angle} above theta = {theta}"
                )));
            }
            for (i, b) in anchors[..j].iter().enumerate() {
                if dist(&a.point, &b.point) < delta {
                    return Err(Error::Precondition(format!(
                        "anchors {i} and {j} are closer than delta"
                    )));
                }
            }
            rotations.push(subspace_rotation(&t, &a.tangent)?);
            feet.push(foot);
        }
        Ok(InterpolationProblem {
            model,
            anchors,
            eta,
            theta,
            delta,
            ell: delta / 3.0,
            feet,
            rotations,
        })
    }

    /// Random problem on `model`: anchor feet drawn uniformly and kept
    /// `δ + 2η` apart, each offset along a random normal by at most `η`, and
    /// tangent tilted towards a random normal by angle at most `θ`.
    pub fn random(
        model: &ManifoldModel,
        anchors: usize,
        delta: f64,
        eta: f64,
        theta: f64,
        seed: u64,
    ) -> Result<Self> {
        check_hypotheses(model.reach(), eta, delta, theta)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut feet: Vec<Vec<f64>> = Vec::new();
        let mut tries = 0;
        while feet.len() < anchors {
            tries += 1;
            if tries > 10_000 {
                return Err(Error::Degenerate(format!(
                    "could not place {anchors} anchors {delta} apart"
                )));
            }
            let x = model.sample_on(&mut rng);
            if feet.iter().all(|f| dist(f, &x) >= delta + 2.0 * eta) {
                feet.push(x);
            }
        }
        let list = feet
            .iter()
            .map(|foot| {
                let n = random_normal(model, foot, &mut rng);
                let mut point = foot.clone();
                axpy(&mut point, eta * rng.random::<f64>(), &n);
                let sine = theta * rng.random_range(0.5..=1.0);
                let tangent = tilt(&model.tangent(foot)?, &random_normal(model, foot, &mut rng), sine, &mut rng)?;
                Ok(Anchor { point, tangent })
            })
            .collect::<Result<Vec<_>>>()?;
        InterpolationProblem::new(*model, list, eta, theta, delta)
    }

    pub fn feet(&self) -> &[Vec<f64>] {
        &self.feet
    }

    /// The anchor whose kernel is nonzero at `a`, if any.
    fn active(&self, a: &[f64]) -> Result<Option<usize>> {
        let mut found = None;
        for (j, foot) in self.feet.iter().enumerate() {
            if dist2(a, foot) < self.ell * self.ell {
                if let Some(i) = found {
                    return Err(Error::Precondition(format!(
                        "kernels of anchors {i} and {j} overlap"
                    )));
                }
                found = Some(j);
            }
        }
        Ok(found)
    }

    /// `Φ_t(a) = a + t (Φ(a) − a)`.
    pub fn phi_t(&self, a: &[f64], t: f64) -> Result<Vec<f64>> {
        let Some(j) = self.active(a)? else {
            return Ok(a.to_vec());
        };
        let foot = &self.feet[j];
        let rel = sub(a, foot);
        let w = bump(&scale(&rel, 1.0 / self.ell));
        let mut psi = self.rotations[j].mul_vec(&rel);
        axpy(&mut psi, -1.0, &rel);
        axpy(&mut psi, 1.0, &sub(&self.anchors[j].point, foot));
        let mut out = a.to_vec();
        axpy(&mut out, t * w, &psi);
        Ok(out)
    }
}

/// Tilts `t` by rotating one random unit direction of it towards the unit
/// normal `n`, so that the principal angle (sine) equals `sine`.
fn tilt<R: Rng + ?Sized>(t: &Subspace, n: &[f64], sine: f64, rng: &mut R) -> Result<Subspace> {
    let basis = t.basis_vectors();
    let c = random_unit(rng, t.dim());
    let mut u = vec![0.0; t.ambient_dim()];
    for (ci, b) in c.iter().zip(&basis) {
        axpy(&mut u, *ci, b);
    }
    // Orthonormal completion of u inside T.
    let mut vectors = vec![u.clone()];
    for b in &basis {
        let mut w = b.clone();
        for v in &vectors {
            let p = dot(&w, v);
            axpy(&mut w, -p, v);
        }
        if norm(&w) > 1e-8 {
            vectors.push(scale(&w, 1.0 / norm(&w)));
        }
        if vectors.len() == t.dim() {
            break;
        }
    }
    let cosine = (1.0 - sine * sine).sqrt();
    let mut tilted = scale(&u, cosine);
    axpy(&mut tilted, sine, n);
    vectors[0] = tilted;
    Subspace::span(&vectors)
}

/// `Φ(a)`. Errors if two kernels are active at `a`, which the problem
/// hypotheses rule out.
pub fn phi_map(prob: &InterpolationProblem, a: &[f64]) -> Result<Vec<f64>> {
    prob.phi_t(a, 1.0)
}

/// Central-difference Jacobian of `Φ_t` at `a` (columns are partials).
fn fd_jacobian(prob: &InterpolationProblem, a: &[f64], t: f64, h: f64) -> Result<Matrix> {
    let dim = a.len();
    let mut cols = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut plus = a.to_vec();
        let mut minus = a.to_vec();
        plus[k] += h;
        minus[k] -= h;
        let fp = prob.phi_t(&plus, t)?;
        let fm = prob.phi_t(&minus, t)?;
        cols.push(fp.iter().zip(&fm).map(|(x, y)| (x - y) / (2.0 * h)).collect::<Vec<_>>());
    }
    Ok(Matrix::from_columns(&cols))
}

/// Second-difference Hessians, one symmetric `D×D` matrix per output
/// coordinate.
fn fd_hessians(prob: &InterpolationProblem, a: &[f64], h: f64) -> Result<Vec<SymMatrix>> {
    let dim = a.len();
    let eval = |steps: &[(usize, f64)]| {
        let mut x = a.to_vec();
        for &(k, s) in steps {
            x[k] += s;
        }
        phi_map(prob, &x)
    };
    let center = eval(&[])?;
    let mut h_out = vec![Matrix::zeros(dim, dim); dim];
    for k in 0..dim {
        for l in k..dim {
            let second: Vec<f64> = if k == l {
                let p = eval(&[(k, h)])?;
                let m = eval(&[(k, -h)])?;
                (0..dim).map(|i| (p[i] - 2.0 * center[i] + m[i]) / (h * h)).collect()
            } else {
                let pp = eval(&[(k, h), (l, h)])?;
                let pm = eval(&[(k, h), (l, -h)])?;
                let mp = eval(&[(k, -h), (l, h)])?;
                let mm = eval(&[(k, -h), (l, -h)])?;
                (0..dim).map(|i| (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h)).collect()
            };
            for (i, v) in second.into_iter().enumerate() {
                h_out[i][(k, l)] = v;
                h_out[i][(l, k)] = v;
            }
        }
    }
    Ok(h_out.into_iter().map(SymMatrix::new).collect())
}

/// `sup_{‖u‖=‖v‖=1} ‖B(u, v)‖` for the symmetric bilinear map with component
/// Hessians `hs`. Equals `sup_w ‖Σ w_i H_i‖_op`; maximized by alternating
/// between `w` and the dominant eigenvector, from several starts.
fn bilinear_op_norm(hs: &[SymMatrix]) -> f64 {
    let dim = hs.len();
    let combine = |w: &[f64]| {
        let mut m = Matrix::zeros(dim, dim);
        for (wi, h) in w.iter().zip(hs) {
            m = m.add(&h.matrix().scaled(*wi));
        }
        SymMatrix::new(m)
    };
    let apply = |v: &[f64]| -> Vec<f64> {
        hs.iter().map(|h| dot(v, &h.matrix().mul_vec(v))).collect()
    };
    let mut best = 0.0f64;
    for start in 0..dim {
        let mut w = vec![0.0; dim];
        w[start] = 1.0;
        let mut value = 0.0;
        for _ in 0..50 {
            let eig = combine(&w).eigen();
            let (idx, _) = eig
                .values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .expect("nonempty");
            let v = eig.vectors.column(idx);
            let bv = apply(&v);
            let nb = norm(&bv);
            if nb <= value * (1.0 + 1e-12) {
                value = value.max(nb);
                break;
            }
            value = nb;
            w = scale(&bv, 1.0 / nb);
        }
        best = best.max(value);
    }
    best
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundViolation {
    pub kind: String,
    pub point: Vec<f64>,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DifferentialReport {
    pub probes: usize,
    pub jacobian_bound: f64,
    pub inverse_bound: f64,
    pub hessian_bound: f64,
    pub max_jacobian_norm: f64,
    pub max_inverse_norm: f64,
    pub max_hessian_norm: f64,
    pub max_jacobian_ratio: f64,
    pub max_inverse_ratio: f64,
    pub max_hessian_ratio: f64,
    pub violations: Vec<BoundViolation>,
    pub passed: bool,
}

/// Probe points: uniform in balls of radius `1.05 ℓ` around random feet.
fn probe_points(prob: &InterpolationProblem, n_probe: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = prob.model.ambient_dim;
    (0..n_probe)
        .map(|_| {
            if prob.feet.is_empty() {
                return prob.model.sample_on(&mut rng);
            }
            let foot = &prob.feet[rng.random_range(0..prob.feet.len())];
            let r = 1.05 * prob.ell * rng.random::<f64>().powf(1.0 / dim as f64);
            let mut a = foot.clone();
            axpy(&mut a, r, &random_unit(&mut rng, dim));
            a
        })
        .collect()
}

/// Finite-difference check of `‖dΦ‖ ≤ 1 + C1(η/ℓ + θ)`,
/// `‖dΦ⁻¹‖ ≤ 1/(1 − C1(η/ℓ + θ))` and `‖d²Φ‖ ≤ C2(η/ℓ² + θ/ℓ)`, each with
/// slack [`FD_SLACK`]. `fd_step` is the first-order step; second
/// differences use `1e-3 ℓ`.
pub fn check_differential_bounds(
    prob: &InterpolationProblem,
    n_probe: usize,
    fd_step: f64,
    seed: u64,
) -> Result<DifferentialReport> {
    let ell = prob.ell;
    precondition(
        (1e-7 * ell..=1e-4 * ell).contains(&fd_step),
        "fd_step must lie in [1e-7, 1e-4]·ℓ",
    )?;
    let x = prob.eta / ell + prob.theta;
    let jacobian_bound = (1.0 + C1 * x) * FD_SLACK;
    let inverse_bound = if C1 * x < 1.0 {
        FD_SLACK / (1.0 - C1 * x)
    } else {
        f64::INFINITY
    };
    let hessian_bound = C2 * (prob.eta / (ell * ell) + prob.theta / ell) * FD_SLACK;
    let probes = probe_points(prob, n_probe, seed);
    let measured: Vec<(Vec<f64>, f64, f64, f64)> = probes
        .into_par_iter()
        .map(|a| {
            let j = fd_jacobian(prob, &a, 1.0, fd_step)?;
            let sv = j.singular_values();
            let big = sv.iter().copied().fold(0.0, f64::max);
            let small = sv.iter().copied().fold(f64::INFINITY, f64::min);
            let hess = bilinear_op_norm(&fd_hessians(prob, &a, 1e-3 * ell)?);
            Ok((a, big, 1.0 / small, hess))
        })
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    let (mut mj, mut mi, mut mh) = (0.0f64, 0.0f64, 0.0f64);
    for (a, big, inv, hess) in measured {
        mj = mj.max(big);
        mi = mi.max(inv);
        mh = mh.max(hess);
        for (kind, value, bound) in [
            ("jacobian", big, jacobian_bound),
            ("inverse", inv, inverse_bound),
            ("hessian", hess, hessian_bound),
        ] {
            // A zero second-order bound (η = θ = 0) tolerates FD noise only.
            let bound_eff = if kind == "hessian" { bound.max(1e-6 / ell) } else { bound };
            if value > bound_eff {
                violations.push(BoundViolation {
                    kind: kind.to_string(),
                    point: a.clone(),
                    value,
                    bound,
                });
            }
        }
    }
    let ratio = |v: f64, b: f64| if b > 0.0 { v / b } else { 0.0 };
    Ok(DifferentialReport {
        probes: n_probe,
        jacobian_bound,
        inverse_bound,
        hessian_bound,
        max_jacobian_norm: mj,
        max_inverse_norm: mi,
        max_hessian_norm: mh,
        max_jacobian_ratio: ratio(mj, jacobian_bound),
        max_inverse_ratio: ratio(mi, inverse_bound),
        max_hessian_ratio: ratio(mh, hessian_bound),
        passed: violations.is_empty(),
        violations,
    })
}

/// `ρ (1 − c1 x)² / (1 + c1 x + c2 y ρ)` with `x = η/δ + θ`,
/// `y = η/δ² + θ/δ`. Returns 0 once `c1 x ≥ 1`, where the bound is vacuous.
pub fn reach_lower_bound(rho: f64, eta: f64, delta: f64, theta: f64) -> Result<f64> {
    check_hypotheses(rho, eta, delta, theta)?;
    let x = eta / delta + theta;
    let y = eta / (delta * delta) + theta / delta;
    let a = REACH_C1 * x;
    if a >= 1.0 {
        return Ok(0.0);
    }
    Ok(rho * (1.0 - a).powi(2) / (1.0 + a + REACH_C2 * y * rho))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterpolationReport {
    pub grid_points: usize,
    pub grid_resolution: f64,
    pub anchor_error_max: f64,
    pub tangent_angle_max: f64,
    pub hausdorff: f64,
    pub hausdorff_bound: f64,
    pub reach_estimate: f64,
    pub reach_bound: f64,
    /// Minimum FD-Jacobian singular value of `Φ_t` at `t = 0, 0.5, 1`.
    pub isotopy_min_singular: Vec<f64>,
    pub anchors_ok: bool,
    pub tangents_ok: bool,
    pub hausdorff_ok: bool,
    pub reach_ok: bool,
    pub isotopy_ok: bool,
    pub passed: bool,
}

/// Span of the directional derivatives of `Φ` along `T_m M`.
fn image_tangent(prob: &InterpolationProblem, m: &[f64], h: f64) -> Result<Subspace> {
    let t = prob.model.tangent(m)?;
    let cols: Vec<Vec<f64>> = t
        .basis_vectors()
        .iter()
        .map(|b| {
            let mut plus = m.to_vec();
            let mut minus = m.to_vec();
            axpy(&mut plus, h, b);
            axpy(&mut minus, -h, b);
            let fp = phi_map(prob, &plus)?;
            let fm = phi_map(prob, &minus)?;
            Ok(fp.iter().zip(&fm).map(|(x, y)| (x - y) / (2.0 * h)).collect())
        })
        .collect::<Result<_>>()?;
    Subspace::span(&cols)
}

/// Checks anchor interpolation, tangent matching at anchors, proximity of
/// `Φ(M)` to `M` and the reach lower bound on a grid of `M` with spacing
/// `ℓ / dense_grid_size`, plus invertibility along the isotopy.
pub fn verify_interpolation(
    prob: &InterpolationProblem,
    dense_grid_size: usize,
    seed: u64,
) -> Result<InterpolationReport> {
    precondition(dense_grid_size > 0, "dense_grid_size must be positive")?;
    let ell = prob.ell;
    let h1 = 1e-5 * ell;
    let model = &prob.model;

    // (a) anchors, (b) tangents through a local chart.
    let mut anchor_error_max = 0.0f64;
    let mut tangent_angle_max = 0.0f64;
    for (j, foot) in prob.feet.iter().enumerate() {
        anchor_error_max = anchor_error_max.max(dist(&phi_map(prob, foot)?, &prob.anchors[j].point));
        let d = model.intrinsic_dim();
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let mut tp = vec![0.0; d];
                let mut tm = vec![0.0; d];
                tp[k] = h1;
                tm[k] = -h1;
                let fp = phi_map(prob, &model.chart(foot, &tp)?)?;
                let fm = phi_map(prob, &model.chart(foot, &tm)?)?;
                Ok(fp.iter().zip(&fm).map(|(x, y)| (x - y) / (2.0 * h1)).collect())
            })
            .collect::<Result<_>>()?;
        let angle = principal_angle(&Subspace::span(&cols)?, &prob.anchors[j].tangent)?;
        tangent_angle_max = tangent_angle_max.max(angle);
    }

    // (c) proximity on the grid.
    let resolution = ell / dense_grid_size as f64;
    let grid = model.grid(resolution);
    let image = grid.map(|m| phi_map(prob, m).expect("kernels disjoint"));
    let hausdorff_bound = prob.delta * prob.theta + prob.eta;
    let hausdorff = grid_hausdorff(&grid, &image, hausdorff_bound + resolution);

    // (d) sampled reach of the image.
    let reach_bound = reach_lower_bound(model.reach(), prob.eta, prob.delta, prob.theta)?;
    let reach_estimate = image_reach(prob, &grid, &image, seed)?;

    // Isotopy: Φ_t invertible at probe points.
    let probes = probe_points(prob, 64, seed ^ 0x5eed);
    let isotopy_min_singular = [0.0, 0.5, 1.0]
        .iter()
        .map(|&t| {
            probes.iter().try_fold(f64::INFINITY, |acc, a| {
                let j = fd_jacobian(prob, a, t, h1)?;
                Ok(j.singular_values().into_iter().fold(acc, f64::min))
            })
        })
        .collect::<Result<Vec<f64>>>()?;

    let anchors_ok = anchor_error_max <= ANCHOR_TOL;
    let tangents_ok = tangent_angle_max <= TANGENT_TOL;
    let hausdorff_ok = hausdorff <= hausdorff_bound + resolution;
    let reach_ok = reach_estimate >= reach_bound - REACH_TOL;
    let isotopy_ok = isotopy_min_singular.iter().all(|&s| s > 0.0);
    Ok(InterpolationReport {
        grid_points: grid.len(),
        grid_resolution: resolution,
        anchor_error_max,
        tangent_angle_max,
        hausdorff,
        hausdorff_bound,
        reach_estimate,
        reach_bound,
        isotopy_min_singular,
        anchors_ok,
        tangents_ok,
        hausdorff_ok,
        reach_ok,
        isotopy_ok,
        passed: anchors_ok && tangents_ok && hausdorff_ok && reach_ok && isotopy_ok,
    })
}

/// Symmetric Hausdorff distance between two clouds, searching neighbors
/// within `hint` first and falling back to brute force.
fn grid_hausdorff(a: &PointCloud, b: &PointCloud, hint: f64) -> f64 {
    let directed = |from: &PointCloud, to: &PointCloud| {
        let index = GridIndex::new(to, hint.max(1e-9));
        (0..from.len())
            .into_par_iter()
            .map(|i| {
                let p = from.point(i);
                let near = index.within(p, hint);
                let pool: Box<dyn Iterator<Item = usize>> = if near.is_empty() {
                    Box::new(0..to.len())
                } else {
                    Box::new(near.into_iter())
                };
                pool.map(|k| dist2(p, to.point(k))).fold(f64::INFINITY, f64::min)
            })
            .reduce(|| 0.0, f64::max)
            .sqrt()
    };
    directed(a, b).max(directed(b, a))
}

/// Minimum of `‖q − p‖² / (2 d(q − p, T_p))` over image pairs within
/// `2.2 reach(M)` of each other that involve a displaced point, plus a seeded
/// subsample of pairs between undisplaced points.
fn image_reach(
    prob: &InterpolationProblem,
    grid: &PointCloud,
    image: &PointCloud,
    seed: u64,
) -> Result<f64> {
    let h = 1e-5 * prob.ell;
    let radius = 2.2 * prob.model.reach();
    let moved: Vec<bool> = grid
        .iter()
        .map(|m| prob.feet.iter().any(|f| dist2(m, f) < prob.ell * prob.ell))
        .collect();
    let tangent = |i: usize| -> Result<Subspace> {
        if moved[i] {
            image_tangent(prob, grid.point(i), h)
        } else {
            prob.model.tangent(grid.point(i))
        }
    };
    let ratio = |p: usize, tp: &Subspace, q: usize| {
        let diff = sub(image.point(q), image.point(p));
        let normal = tp.normal_norm(&diff);
        if normal <= 1e-14 {
            f64::INFINITY
        } else {
            dot(&diff, &diff) / (2.0 * normal)
        }
    };
    let index = GridIndex::new(image, radius);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<usize> = (0..grid.len()).filter(|&i| moved[i]).collect();
    let still: Vec<usize> = (0..grid.len()).filter(|&i| !moved[i]).collect();
    let extra = 64.min(still.len());
    centers.extend((0..extra).map(|_| still[rng.random_range(0..still.len())]));
    let tangents: Vec<Subspace> = (0..grid.len())
        .into_par_iter()
        .map(tangent)
        .collect::<Result<_>>()?;
    let best = centers
        .par_iter()
        .map(|&m| {
            let mut best = f64::INFINITY;
            for q in index.within(image.point(m), radius) {
                if q == m {
                    continue;
                }
                best = best.min(ratio(m, &tangents[m], q));
                if moved[m] {
                    best = best.min(ratio(q, &tangents[q], m));
                }
            }
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}
