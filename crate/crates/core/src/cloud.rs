//! Flat storage for point clouds in `R^D`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An ordered list of points in `R^D`, stored row-major in one buffer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "ambient dimension must be positive");
        PointCloud {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        assert!(dim > 0, "ambient dimension must be positive");
        PointCloud {
            dim,
            coords: Vec::with_capacity(dim * n),
        }
    }

    /// Builds a cloud from rows, rejecting ragged or non-finite input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("point cloud"))?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::Empty("point coordinates"));
        }
        let mut cloud = PointCloud::with_capacity(dim, rows.len());
        for row in rows {
            cloud.try_push(row.as_ref())?;
        }
        Ok(cloud)
    }

    /// Builds a cloud from a flat row-major buffer.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty("point coordinates"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: coords.len() % dim,
            });
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: bad / dim });
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn try_push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { point: self.len() });
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }

    /// Appends a point produced by trusted code (samplers, maps).
    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        debug_assert!(p.iter().all(|c| c.is_finite()));
        self.coords.extend_from_slice(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    /// Points at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        let mut out = PointCloud::with_capacity(self.dim, indices.len());
        for &i in indices {
            out.push(self.point(i));
        }
        out
    }

    pub fn map<F: FnMut(&[f64]) -> Vec<f64>>(&self, mut f: F) -> PointCloud {
        let mut out = PointCloud::with_capacity(self.dim, self.len());
        for p in self.iter() {
            out.push(&f(p));
        }
        out
    }

    pub fn centroid(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for p in self.iter() {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi;
            }
        }
        let n = self.len().max(1) as f64;
        c.iter_mut().for_each(|ci| *ci /= n);
        c
    }
}

/// Per-point ground-truth label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Signal,
    Outlier,
}

impl Label {
    pub fn as_bit(self) -> u8 {
        match self {
            Label::Signal => 1,
            Label::Outlier => 0,
        }
    }

    pub fn from_bit(bit: u8) -> Option<Label> {
        match bit {
            1 => Some(Label::Signal),
            0 => Some(Label::Outlier),
            _ => None,
        }
    }
}
