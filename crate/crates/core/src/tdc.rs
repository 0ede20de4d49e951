//! Tangential Delaunay complex for intrinsic dimension 1 or 2.
//!
//! Every vertex computes its star in the ambient Voronoi diagram restricted
//! to its own (estimated) affine tangent space. Restricted to that plane the
//! diagram is the power diagram of the projected neighbors, each lifted by
//! its squared normal offset. A top-dimensional simplex is kept
//! only when all of its vertices' stars contain it; the complex is then
//! closed under faces. Simplices claimed by some stars but not all are
//! reported as inconsistencies.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cloud::PointCloud;
use crate::delaunay::{star_1d, star_2d, Site};
use crate::error::{precondition, Error, Result};
use crate::linalg::{sub, Subspace};
use crate::spatial::GridIndex;
use crate::tse::TangentField;

/// A simplex as sorted vertex indices.
pub type Simplex = Vec<usize>;

/// Star of one vertex in its tangent space.
#[derive(Clone, Debug, PartialEq)]
pub struct StarResult {
    pub center: usize,
    pub star_simplices: Vec<Simplex>,
    pub neighbor_radius: f64,
    /// Neighbors whose projection coincided with the center or another
    /// neighbor.
    pub dropped: usize,
}

fn check_inputs(cloud: &PointCloud, tangents: &[Subspace], radius: f64) -> Result<usize> {
    precondition(radius > 0.0 && radius.is_finite(), "star radius must be positive")?;
    if tangents.len() != cloud.len() {
        return Err(Error::DimensionMismatch {
            expected: cloud.len(),
            found: tangents.len(),
        });
    }
    let d = tangents.first().map_or(1, Subspace::dim);
    precondition(d == 1 || d == 2, "stars are implemented for d in {1, 2}")?;
    precondition(
        tangents.iter().all(|t| t.dim() == d && t.ambient_dim() == cloud.dim()),
        "tangent spaces must share dimension d and ambient dimension D",
    )?;
    Ok(d)
}

fn star_with_index(
    cloud: &PointCloud,
    tangents: &[Subspace],
    index: &GridIndex<'_>,
    j: usize,
    radius: f64,
) -> StarResult {
    let p = cloud.point(j);
    let t = &tangents[j];
    let near: Vec<usize> = index.within(p, radius).into_iter().filter(|&i| i != j).collect();
    // Tangent coordinates and squared normal offset of each neighbor.
    let local = |i: usize| {
        let v = sub(cloud.point(i), p);
        let n = t.normal_norm(&v);
        (t.coords(&v), n * n)
    };
    let star = if t.dim() == 1 {
        let params: Vec<(usize, f64, f64)> = near
            .iter()
            .map(|&i| {
                let (c, w) = local(i);
                (i, c[0], w)
            })
            .collect();
        star_1d(j, &params)
    } else {
        let sites: Vec<Site> = near
            .iter()
            .map(|&i| {
                let (c, w) = local(i);
                Site::lifted(i, [c[0], c[1]], w)
            })
            .collect();
        star_2d(Site::new(j, [0.0, 0.0]), &sites)
    };
    StarResult {
        center: j,
        star_simplices: star.simplices,
        neighbor_radius: radius,
        dropped: star.dropped,
    }
}

/// Star of point `j` in the Voronoi diagram of the points within `radius`,
/// restricted to `p_j + T_j`.
pub fn tangent_star(
    cloud: &PointCloud,
    tangents: &[Subspace],
    j: usize,
    radius: f64,
) -> Result<StarResult> {
    check_inputs(cloud, tangents, radius)?;
    precondition(j < cloud.len(), "star center out of range")?;
    let index = GridIndex::new(cloud, radius);
    Ok(star_with_index(cloud, tangents, &index, j, radius))
}

/// A simplex that appears in some but not all of its vertices' stars.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inconsistency {
    pub simplex: Simplex,
    /// Vertices whose star contains the simplex.
    pub claimed_by: Vec<usize>,
    /// Vertices whose star lacks it.
    pub missing_from: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplicialComplex {
    pub vertices: PointCloud,
    /// `simplices[k]` holds the sorted `k`-simplices.
    simplices: Vec<Vec<Simplex>>,
}

/// Result of [`build`]: the complex and its construction diagnostics.
#[derive(Clone, Debug)]
pub struct BuildOutput {
    pub complex: SimplicialComplex,
    pub inconsistencies: Vec<Inconsistency>,
    pub dropped_neighbors: usize,
}

/// Builds the consistent tangential complex and its diagnostics.
pub fn build(cloud: &PointCloud, tangents: &[Subspace], radius: f64) -> Result<BuildOutput> {
    let d = check_inputs(cloud, tangents, radius)?;
    let index = GridIndex::new(cloud, radius);
    let stars: Vec<StarResult> = (0..cloud.len())
        .into_par_iter()
        .map(|j| star_with_index(cloud, tangents, &index, j, radius))
        .collect();
    let mut claims: HashMap<Simplex, Vec<usize>> = HashMap::new();
    for star in &stars {
        for s in &star.star_simplices {
            claims.entry(s.clone()).or_default().push(star.center);
        }
    }
    let mut top = Vec::new();
    let mut inconsistencies = Vec::new();
    for (simplex, mut by) in claims {
        if by.len() == d + 1 {
            top.push(simplex);
        } else {
            by.sort_unstable();
            let missing = simplex.iter().copied().filter(|v| !by.contains(v)).collect();
            inconsistencies.push(Inconsistency {
                simplex,
                claimed_by: by,
                missing_from: missing,
            });
        }
    }
    inconsistencies.sort_by(|a, b| a.simplex.cmp(&b.simplex));
    let complex = SimplicialComplex::from_top_simplices(cloud.clone(), d, top);
    Ok(BuildOutput {
        complex,
        inconsistencies,
        dropped_neighbors: stars.iter().map(|s| s.dropped).sum(),
    })
}

/// Consistent tangential complex of `cloud` with tangent field `field`.
pub fn build_complex(
    cloud: &PointCloud,
    field: &TangentField,
    radius: f64,
) -> Result<SimplicialComplex> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    Ok(build(cloud, &field.complete(cloud, &all)?, radius)?.complex)
}

/// Star simplices on which the vertices disagree.
pub fn inconsistencies(
    cloud: &PointCloud,
    field: &TangentField,
    radius: f64,
) -> Result<Vec<Inconsistency>> {
    let all: Vec<usize> = (0..cloud.len()).collect();
    Ok(build(cloud, &field.complete(cloud, &all)?, radius)?.inconsistencies)
}

impl SimplicialComplex {
    /// Closure under faces of the given `d`-simplices, plus every vertex.
    pub fn from_top_simplices(vertices: PointCloud, d: usize, top: Vec<Simplex>) -> Self {
        let mut simplices: Vec<Vec<Simplex>> = vec![Vec::new(); d + 1];
        simplices[0] = (0..vertices.len()).map(|v| vec![v]).collect();
        for mut s in top {
            s.sort_unstable();
            let k = s.len() - 1;
            simplices[k].push(s);
        }
        for k in (1..=d).rev() {
            let faces: Vec<Simplex> = simplices[k]
                .iter()
                .flat_map(|s| (0..s.len()).map(move |skip| {
                    s.iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect::<Vec<_>>()
                }))
                .collect();
            simplices[k - 1].extend(faces);
        }
        for level in &mut simplices {
            level.sort();
            level.dedup();
        }
        SimplicialComplex { vertices, simplices }
    }

    /// Builds a complex from explicit simplices of any dimension, closing
    /// under faces.
    pub fn from_simplices(vertices: PointCloud, simplices: Vec<Simplex>) -> Result<Self> {
        let d = simplices.iter().map(|s| s.len().saturating_sub(1)).max().unwrap_or(0);
        for s in &simplices {
            precondition(!s.is_empty(), "empty simplex")?;
            precondition(
                s.iter().all(|&v| v < vertices.len()),
                "simplex refers to a missing vertex",
            )?;
        }
        let mut by_dim: Vec<Vec<Simplex>> = vec![Vec::new(); d + 1];
        for s in simplices {
            let mut s = s;
            s.sort_unstable();
            s.dedup();
            by_dim[s.len() - 1].push(s);
        }
        let mut out = SimplicialComplex::from_top_simplices(vertices, d, by_dim.pop().unwrap_or_default());
        // Lower-dimensional maximal simplices and their faces.
        for level in by_dim.into_iter().rev() {
            for s in level {
                let k = s.len() - 1;
                let sub = SimplicialComplex::from_top_simplices(out.vertices.clone(), k, vec![s]);
                for (i, faces) in sub.simplices.into_iter().enumerate() {
                    out.simplices[i].extend(faces);
                }
            }
        }
        for level in &mut out.simplices {
            level.sort();
            level.dedup();
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn simplices(&self, k: usize) -> &[Simplex] {
        self.simplices.get(k).map_or(&[], |v| v.as_slice())
    }

    /// True when the complex has no simplex above dimension 0.
    pub fn is_trivial(&self) -> bool {
        self.simplices.iter().skip(1).all(Vec::is_empty)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices
            .iter()
            .enumerate()
            .map(|(k, s)| if k % 2 == 0 { s.len() as i64 } else { -(s.len() as i64) })
            .sum()
    }

    /// Number of connected components of the 1-skeleton (all vertices
    /// counted).
    pub fn components(&self) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        for e in self.simplices(1) {
            uf.union(e[0], e[1]);
        }
        uf.count()
    }

    /// Hex SHA-256 over vertex bit patterns and simplices.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.vertices.dim() as u64).to_le_bytes());
        for c in self.vertices.as_flat() {
            h.update(c.to_bits().to_le_bytes());
        }
        for (k, level) in self.simplices.iter().enumerate() {
            h.update((k as u64).to_le_bytes());
            for s in level {
                for v in s {
                    h.update((*v as u64).to_le_bytes());
                }
            }
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut simplices = BTreeMap::new();
        for (k, level) in self.simplices.iter().enumerate() {
            simplices.insert(k.to_string(), level.clone());
        }
        let doc = ComplexDoc {
            vertices: self.vertices.iter().map(<[f64]>::to_vec).collect(),
            simplices,
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ComplexDoc = serde_json::from_str(text)?;
        let vertices = PointCloud::from_rows(&doc.vertices)?;
        let all: Vec<Simplex> = doc.simplices.into_values().flatten().collect();
        SimplicialComplex::from_simplices(vertices, all)
    }

    /// OFF mesh: vertices padded or truncated to 3 coordinates, triangles as
    /// faces.
    pub fn to_off(&self) -> String {
        let tris = self.simplices(2);
        let mut out = String::new();
        let _ = writeln!(out, "OFF");
        let _ = writeln!(out, "{} {} 0", self.vertices.len(), tris.len());
        for p in self.vertices.iter() {
            let xyz: Vec<String> = (0..3)
                .map(|k| format!("{:?}", p.get(k).copied().unwrap_or(0.0)))
                .collect();
            let _ = writeln!(out, "{}", xyz.join(" "));
        }
        for t in tris {
            let _ = writeln!(out, "3 {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexDoc {
    vertices: Vec<Vec<f64>>,
    simplices: BTreeMap<String, Vec<Simplex>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn count(&mut self) -> usize {
        (0..self.parent.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// Necessary conditions for the complex to be a closed connected
/// `d`-manifold, with counterexamples.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifoldnessReport {
    pub d: usize,
    pub components: usize,
    pub euler_characteristic: i64,
    /// d = 1: vertices whose degree is not 2.
    pub bad_degree_vertices: Vec<usize>,
    /// d = 2: edges not in exactly two triangles.
    pub bad_edges: Vec<Simplex>,
    /// d = 2: vertices whose link is not a single cycle.
    pub bad_links: Vec<usize>,
    pub connected: bool,
    pub passed: bool,
}

pub fn manifoldness_report(c: &SimplicialComplex, d: usize) -> Result<ManifoldnessReport> {
    precondition(d == 1 || d == 2, "manifoldness checks need d in {1, 2}")?;
    let n = c.vertices.len();
    let components = c.components();
    let mut report = ManifoldnessReport {
        d,
        components,
        euler_characteristic: c.euler_characteristic(),
        connected: components == 1,
        ..Default::default()
    };
    if d == 1 {
        let mut degree = vec![0usize; n];
        for e in c.simplices(1) {
            degree[e[0]] += 1;
            degree[e[1]] += 1;
        }
        report.bad_degree_vertices = (0..n).filter(|&v| degree[v] != 2).collect();
        report.passed = n > 0
            && report.connected
            && report.bad_degree_vertices.is_empty()
            && c.simplices(2).is_empty();
        return Ok(report);
    }
    let tris = c.simplices(2);
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    let mut link: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for t in tris {
        let [a, b, cc] = [t[0], t[1], t[2]];
        for (u, v) in [(a, b), (a, cc), (b, cc)] {
            *edge_count.entry((u, v)).or_default() += 1;
        }
        link[a].push((b, cc));
        link[b].push((a, cc));
        link[cc].push((a, b));
    }
    report.bad_edges = c
        .simplices(1)
        .iter()
        .filter(|e| edge_count.get(&(e[0], e[1])).copied().unwrap_or(0) != 2)
        .cloned()
        .collect();
    report.bad_links = (0..n).filter(|&v| !is_single_cycle(&link[v])).collect();
    report.passed = n > 0
        && report.connected
        && report.bad_edges.is_empty()
        && report.bad_links.is_empty();
    Ok(report)
}

/// Whether the edge list forms exactly one cycle (of length ≥ 3).
fn is_single_cycle(edges: &[(usize, usize)]) -> bool {
    if edges.len() < 3 {
        return false;
    }
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    if adj.values().any(|nb| nb.len() != 2) || adj.len() != edges.len() {
        return false;
    }
    // Walk the cycle from any vertex and check it visits every vertex.
    let start = *adj.keys().min().expect("nonempty");
    let (mut prev, mut cur) = (start, adj[&start][0]);
    let mut steps = 1;
    while cur != start {
        let nb = &adj[&cur];
        let next = if nb[0] == prev { nb[1] } else { nb[0] };
        prev = cur;
        cur = next;
        steps += 1;
        if steps > adj.len() {
            return false;
        }
    }
    steps == adj.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{sample, ManifoldModel, SampleSpec};
    use crate::tse::{estimate_tangents, TseParams};
    use std::f64::consts::TAU;

    fn exact_tangents(model: &ManifoldModel, cloud: &PointCloud) -> Vec<Subspace> {
        cloud.iter().map(|p| model.tangent(p).unwrap()).collect()
    }

    #[test]
    fn star_1d_on_line() {
        let cloud = PointCloud::from_rows(&[[0.0, 0.0], [-0.2, 0.0], [0.3, 0.0], [0.5, 0.0]]).unwrap();
        let t = vec![Subspace::canonical(2, 1); 4];
        let s = tangent_star(&cloud, &t, 0, 1.0).unwrap();
        assert_eq!(s.star_simplices, vec![vec![0, 1], vec![0, 2]]);
    }

    #[test]
    fn coincident_projections_give_empty_star() {
        let cloud = PointCloud::from_rows(&[[0.0, 0.0], [0.0, 0.1], [0.0, -0.2]]).unwrap();
        let t = vec![Subspace::canonical(2, 1); 3];
        let s = tangent_star(&cloud, &t, 0, 1.0).unwrap();
        assert!(s.star_simplices.is_empty());
        assert_eq!(s.dropped, 2);
    }

    #[test]
    fn equilateral_triangle_on_circle() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        let rows: Vec<Vec<f64>> = (0..3).map(|i| model.param_point(&[TAU * i as f64 / 3.0])).collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let out = build(&cloud, &exact_tangents(&model, &cloud), 3.0).unwrap();
        assert_eq!(out.complex.simplices(1), &[vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert!(manifoldness_report(&out.complex, 1).unwrap().passed);
    }

    #[test]
    fn circle_with_estimated_tangents_is_one_cycle() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| model.param_point(&[TAU * (i as f64 + 0.2 * ((i * 7 % 5) as f64 / 5.0)) / 60.0]))
            .collect();
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let field = estimate_tangents(&cloud, &TseParams::new(0.25, 1), None).unwrap();
        let c = build_complex(&cloud, &field, 0.5).unwrap();
        assert_eq!(c.simplices(0).len(), c.simplices(1).len());
        let r = manifoldness_report(&c, 1).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(c.euler_characteristic(), 0);
    }

    #[test]
    fn torus_grid_with_exact_tangents_is_closed_surface() {
        let model = ManifoldModel::torus(2.0, 0.5, 3).unwrap();
        let (ku, kv) = (48, 16);
        let mut rows = Vec::new();
        for i in 0..ku {
            for j in 0..kv {
                // Offset alternate rings to avoid cocircular grid cells.
                let shift = if j % 2 == 0 { 0.0 } else { 0.5 };
                rows.push(model.param_point(&[
                    TAU * (i as f64 + shift) / ku as f64,
                    TAU * j as f64 / kv as f64,
                ]));
            }
        }
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let out = build(&cloud, &exact_tangents(&model, &cloud), 0.6).unwrap();
        let r = manifoldness_report(&out.complex, 2).unwrap();
        assert!(r.bad_edges.is_empty(), "{} bad edges, {} inconsistencies", r.bad_edges.len(), out.inconsistencies.len());
        assert_eq!(out.complex.euler_characteristic(), 0);
        assert!(r.passed);
    }

    #[test]
    fn well_sampled_circle_has_no_inconsistencies() {
        let model = ManifoldModel::circle(1.0, 2).unwrap();
        let mut clean = 0;
        for seed in 0..40 {
            let cloud = sample(&model, &SampleSpec::new(400, 1.0, seed)).unwrap().points;
            let field = TangentField {
                indices: (0..cloud.len()).collect(),
                subspaces: exact_tangents(&model, &cloud),
                flagged: vec![],
            };
            if inconsistencies(&cloud, &field, 0.3).unwrap().is_empty() {
                clean += 1;
            }
        }
        assert!(clean >= 38, "{clean}/40");
    }

    #[test]
    fn parallel_segments_disagree() {
        // Two dense parallel segments with steep, opposite tangents: each tangent
        // line runs straight into the other segment's Voronoi cells.
        let mut rows = Vec::new();
        for i in 0..20 {
            rows.push([0.05 * i as f64, 0.0]);
            rows.push([0.05 * i as f64 + 0.01, 0.05]);
        }
        let cloud = PointCloud::from_rows(&rows).unwrap();
        let t: Vec<Subspace> = (0..cloud.len())
            .map(|i| {
                let a = if i % 2 == 0 { 1.2 } else { -1.2 };
                Subspace::span(&[[f64::cos(a), f64::sin(a)]]).unwrap()
            })
            .collect();
        let out = build(&cloud, &t, 0.2).unwrap();
        assert!(!out.inconsistencies.is_empty());
    }

    #[test]
    fn lone_star_is_inconsistent() {
        let cloud = PointCloud::from_rows(&[[0.0, 0.0], [0.1, 0.0], [-0.1, 0.0]]).unwrap();
        // Only vertex 0 sees its neighbors; the others are given tangents
        // orthogonal to the line, so they project onto themselves.
        let t = vec![
            Subspace::canonical(2, 1),
            Subspace::span(&[[0.0, 1.0]]).unwrap(),
            Subspace::span(&[[0.0, 1.0]]).unwrap(),
        ];
        let out = build(&cloud, &t, 0.15).unwrap();
        assert_eq!(out.inconsistencies.len(), 2);
        assert!(out.complex.is_trivial());
        for inc in &out.inconsistencies {
            assert_eq!(inc.claimed_by, vec![0]);
        }
    }

    fn complex(n: usize, simplices: Vec<Simplex>) -> SimplicialComplex {
        let rows: Vec<[f64; 2]> = (0..n).map(|i| [i as f64, 0.0]).collect();
        SimplicialComplex::from_simplices(PointCloud::from_rows(&rows).unwrap(), simplices).unwrap()
    }

    #[test]
    fn euler_examples() {
        assert_eq!(complex(3, vec![vec![0, 1, 2]]).euler_characteristic(), 1);
        let cycle: Vec<Simplex> = (0..7).map(|i| vec![i, (i + 1) % 7]).collect();
        assert_eq!(complex(7, cycle).euler_characteristic(), 0);
        let tetra = vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]];
        let c = complex(4, tetra);
        assert_eq!(c.euler_characteristic(), 2);
        assert!(manifoldness_report(&c, 2).unwrap().passed);
    }

    #[test]
    fn manifoldness_examples() {
        let tri = complex(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]);
        assert!(manifoldness_report(&tri, 1).unwrap().passed);
        let path = complex(3, vec![vec![0, 1], vec![1, 2]]);
        let r = manifoldness_report(&path, 1).unwrap();
        assert!(!r.passed);
        assert_eq!(r.bad_degree_vertices, vec![0, 2]);
        let two = complex(6, vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4], vec![4, 5], vec![3, 5]]);
        let r = manifoldness_report(&two, 1).unwrap();
        assert!(!r.passed);
        assert_eq!(r.components, 2);
    }

    #[test]
    fn json_and_off_round_trip() {
        let tetra = vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]];
        let c = complex(4, tetra);
        let back = SimplicialComplex::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.content_hash(), c.content_hash());
        let off = c.to_off();
        assert!(off.starts_with("OFF\n4 4 0\n"));
    }

    #[test]
    fn complex_invariant_under_rigid_motion() {
        let model = ManifoldModel::torus(2.0, 0.5, 3).unwrap();
        let cloud = sample(&model, &SampleSpec::new(1500, 1.0, 7)).unwrap().points;
        let t = exact_tangents(&model, &cloud);
        let base = build(&cloud, &t, 0.45).unwrap();
        let a: f64 = 0.7;
        let r = crate::linalg::Matrix::from_rows(&[
            [a.cos(), -a.sin(), 0.0],
            [a.sin(), a.cos(), 0.0],
            [0.0, 0.0, 1.0],
        ]);
        let moved = cloud.map(|p| {
            let q = r.mul_vec(p);
            vec![q[0] + 3.0, q[1] - 1.0, q[2] + 0.25]
        });
        let t2: Vec<Subspace> = t.iter().map(|s| s.rotated(&r)).collect();
        let after = build(&moved, &t2, 0.45).unwrap();
        for k in 0..=2 {
            assert_eq!(base.complex.simplices(k), after.complex.simplices(k));
        }
    }

    #[test]
    fn every_simplex_is_in_all_vertex_stars() {
        let model = ManifoldModel::sphere(1.0, 3).unwrap();
        let cloud = sample(&model, &SampleSpec::new(600, 1.0, 3)).unwrap().points;
        let t = exact_tangents(&model, &cloud);
        let out = build(&cloud, &t, 0.5).unwrap();
        for s in out.complex.simplices(2) {
            for &v in s {
                let star = tangent_star(&cloud, &t, v, 0.5).unwrap();
                assert!(star.star_simplices.contains(s));
            }
        }
    }
}
