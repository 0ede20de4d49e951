//! Farthest-point sampling.

use rayon::prelude::*;

use crate::cloud::PointCloud;
use crate::error::{precondition, Error, Result};
use crate::linalg::dist2;

/// Size above which the distance update runs in parallel.
const PARALLEL_UPDATE: usize = 1 << 14;

/// Greedy farthest-point sampling from `start`: repeatedly adds the point
/// farthest from the current selection until every point of `cloud` is
/// within `eps` of it. Ties go to the lowest index.
///
/// Each added point was more than `eps` from every earlier pick, so the
/// result is `eps`-sparse, and it covers `cloud` at scale `eps`.
pub fn farthest_point_sampling(cloud: &PointCloud, eps: f64, start: usize) -> Result<Vec<usize>> {
    if cloud.is_empty() {
        return Err(Error::Empty("point cloud"));
    }
    precondition(eps > 0.0 && eps.is_finite(), "eps must be positive")?;
    precondition(start < cloud.len(), "start index out of range")?;
    let eps2 = eps * eps;
    let mut nearest: Vec<f64> = vec![f64::INFINITY; cloud.len()];
    let mut picked = vec![start];
    let mut last = start;
    loop {
        let q = cloud.point(last);
        let update = |(i, d): (usize, &mut f64)| {
            let di = dist2(cloud.point(i), q);
            if di < *d {
                *d = di;
            }
        };
        if cloud.len() >= PARALLEL_UPDATE {
            nearest.par_iter_mut().enumerate().for_each(update);
        } else {
            nearest.iter_mut().enumerate().for_each(update);
        }
        let (far, far_d) = nearest
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |best, (i, &d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            });
        if far_d <= eps2 {
            return Ok(picked);
        }
        picked.push(far);
        last = far;
    }
}
