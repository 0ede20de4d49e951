//! Small dense linear algebra: vectors as slices, row-major matrices, a
//! cyclic Jacobi eigensolver for symmetric matrices, and linear subspaces
//! with principal angles.
//!
//! Matrices in this crate are tiny (`D` is the ambient dimension, usually 2
//! or 3), so everything is written for clarity over blocking or SIMD.

use std::ops::{Index, IndexMut};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{precondition, Error, Result};

/// Orthonormality tolerance for subspace bases.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Symmetry tolerance enforced on [`SymMatrix`] construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

const JACOBI_MAX_SWEEPS: usize = 100;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

#[inline]
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[inline]
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[inline]
pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

/// Uniformly distributed unit vector in `R^dim`.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = normalized(&v) {
            return u;
        }
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.as_ref().len(), c, "ragged matrix rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row.as_ref());
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(cols: &[C]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |col| col.as_ref().len());
        Matrix::from_fn(r, c, |i, j| cols[j].as_ref()[i])
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len(), "tr_mul_vec shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, vi) in v.iter().enumerate() {
            axpy(&mut out, *vi, self.row(i));
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self += alpha * u vᵀ`
    pub fn add_outer(&mut self, alpha: f64, u: &[f64], v: &[f64]) {
        assert_eq!((self.rows, self.cols), (u.len(), v.len()));
        for (i, ui) in u.iter().enumerate() {
            let a = alpha * ui;
            for (j, vj) in v.iter().enumerate() {
                self.data[i * self.cols + j] += a * vj;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        self.singular_values().first().copied().unwrap_or(0.0)
    }

    /// Singular values in descending order (`min(rows, cols)` of them).
    pub fn singular_values(&self) -> Vec<f64> {
        let gram = if self.rows >= self.cols {
            self.transpose().matmul(self)
        } else {
            self.matmul(&self.transpose())
        };
        let eig = SymMatrix::new(gram).eigen();
        eig.values.iter().map(|l| l.max(0.0).sqrt()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|a| a.is_finite())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Real symmetric matrix. Construction symmetrizes the input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix(Matrix);

/// Eigenpairs of a symmetric matrix, eigenvalues descending, eigenvectors
/// stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymMatrix {
    pub fn new(m: Matrix) -> Self {
        assert_eq!(m.rows, m.cols, "symmetric matrix must be square");
        let n = m.rows;
        let sym = Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
        SymMatrix(sym)
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Matrix::zeros(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// Full eigendecomposition by cyclic Jacobi rotations.
    ///
    /// Ties in the spectrum are ordered by the diagonal position the
    /// rotations leave them in, which is deterministic.
    pub fn eigen(&self) -> SymEigen {
        let n = self.dim();
        let mut a = self.0.clone();
        let mut v = Matrix::identity(n);
        let scale = a.frobenius_norm();
        if scale > 0.0 {
            for _ in 0..JACOBI_MAX_SWEEPS {
                let mut off = 0.0;
                for p in 0..n {
                    for q in p + 1..n {
                        off += a[(p, q)] * a[(p, q)];
                    }
                }
                if off.sqrt() <= 1e-15 * scale {
                    break;
                }
                for p in 0..n {
                    for q in p + 1..n {
                        jacobi_rotate(&mut a, &mut v, p, q);
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
        let values = order.iter().map(|&i| a[(i, i)]).collect();
        let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
        SymEigen { values, vectors }
    }
}

fn jacobi_rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let n = a.rows;
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = c * akp - s * akq;
        a[(k, q)] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = c * apk - s * aqk;
        a[(q, k)] = s * apk + c * aqk;
    }
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

/// A `d`-dimensional linear subspace of `R^D`, held as a `D × d` matrix with
/// orthonormal columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    basis: Matrix,
}

impl Subspace {
    /// Wraps a basis that is already orthonormal to [`ORTHONORMAL_TOL`].
    pub fn from_orthonormal(basis: Matrix) -> Result<Self> {
        let d = basis.cols;
        precondition(d >= 1 && d <= basis.rows, "subspace needs 1 <= d <= D")?;
        let gram = basis.transpose().matmul(&basis);
        let err = gram.sub(&Matrix::identity(d)).max_abs();
        precondition(
            err <= ORTHONORMAL_TOL,
            format!("basis columns are not orthonormal (error {err:.2e})"),
        )?;
        Ok(Subspace { basis })
    }

    /// Span of the given vectors, orthonormalized by two passes of modified
    /// Gram-Schmidt. Fails if the vectors are (numerically) dependent.
    pub fn span<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Self> {
        let first = vectors.first().ok_or(Error::Empty("subspace spanning set"))?;
        let dim = first.as_ref().len();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let v = v.as_ref();
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            let mut w = v.to_vec();
            let scale = norm(v);
            for _ in 0..2 {
                for u in &q {
                    let c = dot(&w, u);
                    axpy(&mut w, -c, u);
                }
            }
            let n = norm(&w);
            if !(n > 1e-12 * scale.max(f64::MIN_POSITIVE)) {
                return Err(Error::Degenerate("spanning vectors are linearly dependent".into()));
            }
            q.push(scale_vec(w, 1.0 / n));
        }
        precondition(q.len() <= dim, "more spanning vectors than the ambient dimension")?;
        Ok(Subspace {
            basis: Matrix::from_columns(&q),
        })
    }

    /// Span of the first `d` canonical basis vectors of `R^D`.
    pub fn canonical(ambient: usize, d: usize) -> Self {
        assert!(d >= 1 && d <= ambient);
        Subspace {
            basis: Matrix::from_fn(ambient, d, |i, j| if i == j { 1.0 } else { 0.0 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.cols
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| self.basis.column(j)).collect()
    }

    /// Orthogonal projector `U Uᵀ`.
    pub fn projector(&self) -> Matrix {
        self.basis.matmul(&self.basis.transpose())
    }

    /// Coordinates of `v` in the basis (`Uᵀ v`).
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        self.basis.tr_mul_vec(v)
    }

    /// Orthogonal projection of `v` onto the subspace, in ambient coordinates.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        self.basis.mul_vec(&self.coords(v))
    }

    /// Norm of the tangential component of `v`.
    pub fn tangential_norm(&self, v: &[f64]) -> f64 {
        norm(&self.coords(v))
    }

    /// Norm of the component of `v` orthogonal to the subspace.
    pub fn normal_norm(&self, v: &[f64]) -> f64 {
        norm(&sub(v, &self.project(v)))
    }

    /// Image of the subspace under an orthogonal map.
    pub fn rotated(&self, r: &Matrix) -> Subspace {
        let b = r.matmul(&self.basis);
        Subspace::span(&(0..b.cols).map(|j| b.column(j)).collect::<Vec<_>>())
            .expect("orthogonal image of a basis stays independent")
    }

    /// Orthonormal basis of the orthogonal complement (empty when `d == D`).
    pub fn complement_basis(&self) -> Vec<Vec<f64>> {
        let dim = self.ambient_dim();
        let mut q = self.basis_vectors();
        let mut out = Vec::new();
        for e in 0..dim {
            let mut w = vec![0.0; dim];
            w[e] = 1.0;
            for _ in 0..2 {
                for u in &q {
                    let c = dot(&w, u);
                    axpy(&mut w, -c, u);
                }
            }
            let n = norm(&w);
            if n > 1e-6 {
                let w = scale_vec(w, 1.0 / n);
                q.push(w.clone());
                out.push(w);
            }
            if out.len() + self.dim() == dim {
                break;
            }
        }
        out
    }
}

fn scale_vec(mut v: Vec<f64>, s: f64) -> Vec<f64> {
    v.iter_mut().for_each(|x| *x *= s);
    v
}

fn check_same_shape(u: &Subspace, v: &Subspace) -> Result<()> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: u.ambient_dim(),
            found: v.ambient_dim(),
        });
    }
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// Principal angle `‖π_U − π_V‖_op` between equal-dimension subspaces.
///
/// This is the sine of the largest canonical angle; it lies in `[0, 1]`.
pub fn principal_angle(u: &Subspace, v: &Subspace) -> Result<f64> {
    check_same_shape(u, v)?;
    let diff = SymMatrix::new(u.projector().sub(&v.projector()));
    let eig = diff.eigen();
    let m = eig.values.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    Ok(m.clamp(0.0, 1.0))
}

/// Invariant subspace of the `d` largest eigenvalues, with those
/// eigenvalues in descending order.
pub fn top_eigenspace(s: &SymMatrix, d: usize) -> Result<(Subspace, Vec<f64>)> {
    precondition(d >= 1 && d <= s.dim(), "top_eigenspace needs 1 <= d <= D")?;
    let eig = s.eigen();
    let basis = Matrix::from_fn(s.dim(), d, |i, j| eig.vectors[(i, j)]);
    Ok((Subspace { basis }, eig.values[..d].to_vec()))
}

/// Paired principal vectors `(u_i, v_i)` with `cos` of the canonical angles.
struct PrincipalPairs {
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    cosines: Vec<f64>,
}

fn principal_pairs(u: &Subspace, v: &Subspace) -> PrincipalPairs {
    let d = u.dim();
    // SVD of M = Uᵀ V: right vectors from the eigenvectors of MᵀM.
    let m = u.basis.transpose().matmul(&v.basis);
    let eig = SymMatrix::new(m.transpose().matmul(&m)).eigen();
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(d);
    let mut right = Vec::with_capacity(d);
    for j in 0..d {
        let b = eig.vectors.column(j);
        let sigma = eig.values[j].max(0.0).sqrt().min(1.0);
        right.push(b.clone());
        let mb = m.mul_vec(&b);
        let a = if sigma > 1e-9 {
            let mut a = mb;
            for prev in &left {
                let c = dot(&a, prev);
                axpy(&mut a, -c, prev);
            }
            normalized(&a)
        } else {
            None
        };
        left.push(a.unwrap_or_default());
    }
    // Complete left vectors for canonical angles at pi/2.
    for j in 0..d {
        if !left[j].is_empty() {
            continue;
        }
        for e in 0..d {
            let mut w = vec![0.0; d];
            w[e] = 1.0;
            for _ in 0..2 {
                for prev in left.iter().filter(|x| !x.is_empty()) {
                    let c = dot(&w, prev);
                    axpy(&mut w, -c, prev);
                }
            }
            if let Some(w) = normalized(&w).filter(|_| norm(&w) > 1e-6) {
                left[j] = w;
                break;
            }
        }
    }
    let u_vecs: Vec<Vec<f64>> = left.iter().map(|a| u.basis.mul_vec(a)).collect();
    let v_vecs: Vec<Vec<f64>> = right.iter().map(|b| v.basis.mul_vec(b)).collect();
    // Orient each pair so that <u_i, v_i> = cos >= 0.
    let mut out_v = Vec::with_capacity(d);
    let mut out_c = Vec::with_capacity(d);
    for (ui, vi) in u_vecs.iter().zip(v_vecs) {
        let c = dot(ui, &vi);
        if c < 0.0 {
            out_v.push(scale(&vi, -1.0));
            out_c.push(-c);
        } else {
            out_v.push(vi);
            out_c.push(c);
        }
    }
    PrincipalPairs {
        u: u_vecs,
        v: out_v,
        cosines: out_c,
    }
}

/// Orthogonal map of `R^D` carrying `U` onto `V`.
///
/// Each principal pair `(u_i, v_i)` is rotated within its own plane; the map
/// is the identity on the orthogonal complement of `U + V`. Its distance to
/// the identity is `‖R − I‖_op = 2 sin(φ/2)` with `φ` the largest canonical
/// angle, the smallest achievable by any rotation taking `U` to `V`.
pub fn subspace_rotation(u: &Subspace, v: &Subspace) -> Result<Matrix> {
    check_same_shape(u, v)?;
    let dim = u.ambient_dim();
    let pairs = principal_pairs(u, v);
    let mut r = Matrix::identity(dim);
    for ((ui, vi), &c) in pairs.u.iter().zip(&pairs.v).zip(&pairs.cosines) {
        let mut w = vi.clone();
        axpy(&mut w, -c, ui);
        let s = norm(&w);
        if s <= 1e-15 {
            continue;
        }
        let w = scale(&w, 1.0 / s);
        let c = c.min(1.0);
        r.add_outer(c - 1.0, ui, ui);
        r.add_outer(c - 1.0, &w, &w);
        r.add_outer(s, &w, ui);
        r.add_outer(-s, ui, &w);
    }
    Ok(r)
}

/// Checks the block-perturbation angle bound: with `O = diag(B, 0) + E`,
/// `λ_min(B) ≥ 1 − e1`, `‖E‖_F ≤ e2` and `e1 + e2 ≤ 1/2`, the top-`d`
/// eigenspace of `O` is within angle `2 d e2` of the first `d` canonical
/// axes. Returns whether the bound holds for this instance.
pub fn perturbation_angle_bound_check(b: &SymMatrix, e: &SymMatrix) -> Result<bool> {
    let d = b.dim();
    let dim = e.dim();
    precondition(d >= 1 && d <= dim, "block B must be d x d with d <= D")?;
    let lambda_min = *b.eigen().values.last().expect("nonempty spectrum");
    let e1 = 1.0 - lambda_min;
    let e2 = e.matrix().frobenius_norm();
    precondition(
        e1 + e2 <= 0.5,
        format!("e1 + e2 = {:.4} exceeds 1/2", e1 + e2),
    )?;
    let mut o = e.matrix().clone();
    for i in 0..d {
        for j in 0..d {
            o[(i, j)] += b.matrix()[(i, j)];
        }
    }
    let (t, _) = top_eigenspace(&SymMatrix::new(o), d)?;
    let angle = principal_angle(&Subspace::canonical(dim, d), &t)?;
    Ok(angle <= 2.0 * d as f64 * e2)
}

/// Directed Hausdorff distance `max_{a∈A} min_{b∈B} ‖a − b‖`, brute force.
pub fn directed_hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    check_clouds(a, b)?;
    let mut worst = 0.0f64;
    for p in a.iter() {
        let mut best = f64::INFINITY;
        for q in b.iter() {
            let d2 = dist2(p, q);
            if d2 < best {
                best = d2;
            }
        }
        worst = worst.max(best);
    }
    Ok(worst.sqrt())
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    Ok(directed_hausdorff(a, b)?.max(directed_hausdorff(b, a)?))
}

fn check_clouds(a: &PointCloud, b: &PointCloud) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("Hausdorff distance operand"));
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}
