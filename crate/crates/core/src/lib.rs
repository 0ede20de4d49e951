//! Manifold reconstruction from random samples: local-PCA tangent
//! estimation, slab denoising, farthest-point sparsification and the
//! tangential Delaunay complex, with the numerical checks and experiment
//! harness used to measure convergence.

pub mod cloud;
pub mod config;
pub mod delaunay;
pub mod denoise;
pub mod error;
pub mod harness;
pub mod interp;
pub mod io;
pub mod linalg;
pub mod models;
pub mod sparsify;
pub mod spatial;
pub mod stats;
pub mod tdc;
pub mod tse;

pub use cloud::{Label, PointCloud};
pub use error::{Error, Result};
