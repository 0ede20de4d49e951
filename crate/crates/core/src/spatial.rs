//! Uniform grid bucketing for fixed-radius neighbor queries.
//!
//! Cells are keyed on at most the first three coordinates. Any point within
//! distance `r` of a query differs by at most `r` in each coordinate, so the
//! bucket scan returns a superset of the true neighbors; the exact test is the
//! same squared-distance comparison a brute-force scan uses, hence identical
//! results.

use std::collections::HashMap;

use crate::cloud::PointCloud;
use crate::linalg::dist2;

const KEY_DIMS: usize = 3;

type Key = [i64; KEY_DIMS];

pub struct GridIndex<'a> {
    cloud: &'a PointCloud,
    cell: f64,
    key_dims: usize,
    buckets: HashMap<Key, Vec<usize>>,
}

impl<'a> GridIndex<'a> {
    /// Builds the index with the given cell side (> 0).
    pub fn new(cloud: &'a PointCloud, cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell must be positive");
        let key_dims = cloud.dim().min(KEY_DIMS);
        let mut buckets: HashMap<Key, Vec<usize>> = HashMap::new();
        for (i, p) in cloud.iter().enumerate() {
            buckets.entry(key_of(p, cell, key_dims)).or_default().push(i);
        }
        GridIndex {
            cloud,
            cell,
            key_dims,
            buckets,
        }
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    /// Indices `i` with `‖p_i − q‖² ≤ r²`, ascending.
    pub fn within(&self, q: &[f64], r: f64) -> Vec<usize> {
        let r2 = r * r;
        let mut out = Vec::new();
        self.visit_candidates(q, r, |i| {
            if dist2(self.cloud.point(i), q) <= r2 {
                out.push(i);
            }
        });
        out.sort_unstable();
        out
    }

    /// Calls `f` for every index in the cells overlapping the box of half
    /// side `r` around `q`.
    pub fn visit_candidates<F: FnMut(usize)>(&self, q: &[f64], r: f64, mut f: F) {
        let span = (r / self.cell).ceil().max(0.0) as i64;
        let center = key_of(q, self.cell, self.key_dims);
        let cells_per_axis = (2 * span + 1) as u128;
        let total = cells_per_axis.pow(self.key_dims as u32);
        // A huge radius scans the buckets directly.
        if total > self.buckets.len() as u128 {
            let lo: Vec<i64> = (0..self.key_dims).map(|a| center[a] - span).collect();
            let hi: Vec<i64> = (0..self.key_dims).map(|a| center[a] + span).collect();
            for (key, ids) in &self.buckets {
                if (0..self.key_dims).all(|a| key[a] >= lo[a] && key[a] <= hi[a]) {
                    ids.iter().for_each(|&i| f(i));
                }
            }
            return;
        }
        let mut offset = [0i64; KEY_DIMS];
        for o in offset.iter_mut().take(self.key_dims) {
            *o = -span;
        }
        loop {
            let mut key = [0i64; KEY_DIMS];
            for a in 0..self.key_dims {
                key[a] = center[a] + offset[a];
            }
            if let Some(ids) = self.buckets.get(&key) {
                ids.iter().for_each(|&i| f(i));
            }
            let mut a = 0;
            loop {
                if a == self.key_dims {
                    return;
                }
                offset[a] += 1;
                if offset[a] <= span {
                    break;
                }
                offset[a] = -span;
                a += 1;
            }
        }
    }
}

fn key_of(p: &[f64], cell: f64, key_dims: usize) -> Key {
    let mut k = [0i64; KEY_DIMS];
    for a in 0..key_dims {
        k[a] = (p[a] / cell).floor() as i64;
    }
    k
}

/// Brute-force fixed-radius query, the reference for [`GridIndex::within`].
pub fn within_brute(cloud: &PointCloud, q: &[f64], r: f64) -> Vec<usize> {
    let r2 = r * r;
    cloud
        .iter()
        .enumerate()
        .filter(|(_, p)| dist2(p, q) <= r2)
        .map(|(i, _)| i)
        .collect()
}
