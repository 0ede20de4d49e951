//! Tangent-space estimation by local PCA.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{precondition, Error, Result};
use crate::linalg::{dist2, top_eigenspace, Matrix, Subspace, SymMatrix};
use crate::spatial::{within_brute, GridIndex};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborSearch {
    Brute,
    #[default]
    Grid,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TseParams {
    pub h: f64,
    pub d: usize,
    pub min_neighbors: usize,
    #[serde(default)]
    pub search: NeighborSearch,
}

impl TseParams {
    pub fn new(h: f64, d: usize) -> Self {
        TseParams {
            h,
            d,
            min_neighbors: 3,
            search: NeighborSearch::Grid,
        }
    }

    fn validate(&self, ambient: usize) -> Result<()> {
        precondition(self.h > 0.0 && self.h.is_finite(), "bandwidth must be positive")?;
        precondition(
            self.d >= 1 && self.d <= ambient,
            "intrinsic dimension must satisfy 1 <= d <= D",
        )
    }
}

/// Estimated tangent spaces at a set of point indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentField {
    pub indices: Vec<usize>,
    pub subspaces: Vec<Subspace>,
    /// Requested indices that had fewer than `min_neighbors` neighbors.
    pub flagged: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TangentEntry {
    index: usize,
    basis: Vec<Vec<f64>>,
}

impl TangentField {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Subspace> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|k| &self.subspaces[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Subspace)> {
        self.indices.iter().copied().zip(&self.subspaces)
    }

    /// Subspaces at every index of `wanted`, in order. An index without an
    /// estimate inherits the estimate of the nearest estimated point (lowest
    /// index on ties).
    pub fn complete(&self, cloud: &PointCloud, wanted: &[usize]) -> Result<Vec<Subspace>> {
        if self.is_empty() {
            return Err(Error::Empty("tangent field"));
        }
        Ok(wanted
            .iter()
            .map(|&j| match self.get(j) {
                Some(t) => t.clone(),
                None => {
                    let p = cloud.point(j);
                    let mut best = (f64::INFINITY, 0usize);
                    for (k, &i) in self.indices.iter().enumerate() {
                        let d = dist2(p, cloud.point(i));
                        if d < best.0 {
                            best = (d, k);
                        }
                    }
                    self.subspaces[best.1].clone()
                }
            })
            .collect())
    }

    pub fn to_json(&self) -> Result<String> {
        let entries: Vec<TangentEntry> = self
            .iter()
            .map(|(index, t)| TangentEntry {
                index,
                basis: t.basis_vectors(),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&entries)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut entries: Vec<TangentEntry> = serde_json::from_str(text)?;
        entries.sort_by_key(|e| e.index);
        let mut field = TangentField {
            indices: Vec::with_capacity(entries.len()),
            subspaces: Vec::with_capacity(entries.len()),
            flagged: Vec::new(),
        };
        for e in entries {
            let basis = Matrix::from_columns(&e.basis);
            field.indices.push(e.index);
            field.subspaces.push(Subspace::from_orthonormal(basis)?);
        }
        Ok(field)
    }
}

/// `(c ln n / (n − 1))^{1/d}`.
pub fn default_bandwidth(n: usize, d: usize, c: f64) -> Result<f64> {
    precondition(n >= 3, "bandwidth rule needs n >= 3")?;
    precondition(c > 0.0 && d >= 1, "bandwidth rule needs c > 0 and d >= 1")?;
    let n = n as f64;
    Ok((c * n.ln() / (n - 1.0)).powf(1.0 / d as f64))
}

/// Local covariance at point `j`: scatter of the points in the closed ball
/// `B(X_j, h)` other than `X_j`, about their own barycenter, divided by
/// `n − 1`. No neighbors gives the zero matrix.
pub fn local_covariance(cloud: &PointCloud, j: usize, h: f64) -> SymMatrix {
    let neighbors: Vec<usize> = within_brute(cloud, cloud.point(j), h)
        .into_iter()
        .filter(|&i| i != j)
        .collect();
    covariance_of(cloud, &neighbors)
}

fn covariance_of(cloud: &PointCloud, neighbors: &[usize]) -> SymMatrix {
    let dim = cloud.dim();
    let mut cov = Matrix::zeros(dim, dim);
    if neighbors.is_empty() {
        return SymMatrix::new(cov);
    }
    let mut bar = vec![0.0; dim];
    for &i in neighbors {
        crate::linalg::axpy(&mut bar, 1.0, cloud.point(i));
    }
    bar.iter_mut().for_each(|b| *b /= neighbors.len() as f64);
    let mut diff = vec![0.0; dim];
    for &i in neighbors {
        for (k, (p, b)) in cloud.point(i).iter().zip(&bar).enumerate() {
            diff[k] = p - b;
        }
        cov.add_outer(1.0, &diff, &diff);
    }
    let scale = 1.0 / (cloud.len().saturating_sub(1).max(1)) as f64;
    SymMatrix::new(cov.scaled(scale))
}

/// Local-PCA tangent estimates at `subset` (all points when `None`). Every
/// point of the cloud votes; the subset only selects where estimates are
/// produced.
pub fn estimate_tangents(
    cloud: &PointCloud,
    params: &TseParams,
    subset: Option<&[usize]>,
) -> Result<TangentField> {
    params.validate(cloud.dim())?;
    precondition(cloud.len() >= 2, "tangent estimation needs at least two points")?;
    let all: Vec<usize>;
    let wanted: &[usize] = match subset {
        Some(s) => s,
        None => {
            all = (0..cloud.len()).collect();
            &all
        }
    };
    if let Some(&bad) = wanted.iter().find(|&&j| j >= cloud.len()) {
        return Err(Error::Precondition(format!("index {bad} out of range")));
    }
    let grid = match params.search {
        NeighborSearch::Grid => Some(GridIndex::new(cloud, params.h)),
        NeighborSearch::Brute => None,
    };
    let results: Vec<Option<Subspace>> = wanted
        .par_iter()
        .map(|&j| {
            let p = cloud.point(j);
            let raw = match &grid {
                Some(g) => g.within(p, params.h),
                None => within_brute(cloud, p, params.h),
            };
            let neighbors: Vec<usize> = raw.into_iter().filter(|&i| i != j).collect();
            if neighbors.len() < params.min_neighbors.max(1) {
                return None;
            }
            let cov = covariance_of(cloud, &neighbors);
            Some(top_eigenspace(&cov, params.d).expect("d validated").0)
        })
        .collect();
    let mut order: Vec<usize> = (0..wanted.len()).collect();
    order.sort_by_key(|&k| wanted[k]);
    let mut field = TangentField {
        indices: Vec::new(),
        subspaces: Vec::new(),
        flagged: Vec::new(),
    };
    let mut last = None;
    for k in order {
        let j = wanted[k];
        if last == Some(j) {
            continue;
        }
        last = Some(j);
        match &results[k] {
            Some(t) => {
                field.indices.push(j);
                field.subspaces.push(t.clone());
            }
            None => field.flagged.push(j),
        }
    }
    Ok(field)
}
