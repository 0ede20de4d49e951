//! Exact planar predicates and Delaunay stars in one and two dimensions.
//!
//! Orientation and in-circle signs come from adaptive exact arithmetic. An
//! exactly cocircular in-circle query is resolved by symbolically lifting
//! each point by an infinitesimal that shrinks with its global index, which
//! makes every triangulation built from the same index order consistent.
//!
//! Sites may carry a nonnegative lift `w`, turning the in-circle test into
//! the power test for `‖x − p‖² + w` (regular triangulations). With all
//! lifts zero the exact in-circle predicate is used; otherwise the lifted
//! heights `x² + y² + w` are rounded once and fed to the exact 3D
//! orientation predicate.

use robust::{incircle, orient2d, orient3d, Coord, Coord3D};

#[inline]
fn c(p: [f64; 2]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

/// Sign of the orientation of `(a, b, q)`: positive when counterclockwise.
#[inline]
pub fn orient(a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> f64 {
    orient2d(c(a), c(b), c(q))
}

/// A point of a planar configuration with the global index used for
/// tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site {
    pub index: usize,
    pub xy: [f64; 2],
    pub lift: f64,
}

impl Site {
    pub fn new(index: usize, xy: [f64; 2]) -> Self {
        Site { index, xy, lift: 0.0 }
    }

    pub fn lifted(index: usize, xy: [f64; 2], lift: f64) -> Self {
        Site { index, xy, lift }
    }

    fn height(&self) -> f64 {
        self.xy[0] * self.xy[0] + self.xy[1] * self.xy[1] + self.lift
    }

    fn c3(&self) -> Coord3D<f64> {
        Coord3D {
            x: self.xy[0],
            y: self.xy[1],
            z: self.height(),
        }
    }
}

/// Sign (−1, 0 or 1) of the in-circle (power) test of `d` against the circle
/// through `a, b, c`: for counterclockwise `a, b, c`, positive means inside.
///
/// Zero exact results are replaced by the sign of the first nonvanishing
/// coefficient of the perturbation polynomial, taken in ascending global
/// index; only when all four points are collinear can the result be zero.
pub fn incircle_sos(a: Site, b: Site, cc: Site, d: Site) -> i8 {
    let det = if a.lift == 0.0 && b.lift == 0.0 && cc.lift == 0.0 && d.lift == 0.0 {
        incircle(c(a.xy), c(b.xy), c(cc.xy), c(d.xy))
    } else {
        orient3d(a.c3(), b.c3(), cc.c3(), d.c3())
    };
    if det != 0.0 {
        return sign(det);
    }
    // Lifting row r by ε_r changes the determinant of the rows
    // [x, y, x² + y², 1] by ε_r times the cofactor of the lifted column.
    let rows = [a, b, cc, d];
    let cof = |r: usize| -> f64 {
        let others: Vec<[f64; 2]> = (0..4).filter(|&k| k != r).map(|k| rows[k].xy).collect();
        let o = orient(others[0], others[1], others[2]);
        if r.is_multiple_of(2) {
            o
        } else {
            -o
        }
    };
    let mut order = [0usize, 1, 2, 3];
    order.sort_by_key(|&r| rows[r].index);
    for r in order {
        let v = cof(r);
        if v != 0.0 {
            return sign(v);
        }
    }
    0
}

#[inline]
fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Outcome of a star computation: simplices given as sorted global indices,
/// each containing the center.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Star {
    pub simplices: Vec<Vec<usize>>,
    /// Neighbors dropped because they coincide with the center (or, in the
    /// plane, with an earlier neighbor).
    pub dropped: usize,
}

/// Star of `center` in the 1-dimensional regular triangulation of
/// `center ∪ others`, given as `(index, parameter, lift)` with the center
/// unlifted at parameter 0: on each side, the neighbor of least elevation
/// `(t² + w)/|t|` (the nearest one when unlifted).
pub fn star_1d(center: usize, others: &[(usize, f64, f64)]) -> Star {
    let mut left: Option<(usize, f64, f64)> = None;
    let mut right: Option<(usize, f64, f64)> = None;
    let mut dropped = 0;
    // `(z_i/|t_i|) < (z_j/|t_j|)` without division.
    let lower = |(i, ti, wi): (usize, f64, f64), (j, tj, wj): (usize, f64, f64)| {
        let (zi, zj) = (ti * ti + wi, tj * tj + wj);
        let (li, lj) = (zi * tj.abs(), zj * ti.abs());
        li < lj || (li == lj && i < j)
    };
    for &(i, t, w) in others {
        let side = if t == 0.0 {
            dropped += 1;
            continue;
        } else if t < 0.0 {
            &mut left
        } else {
            &mut right
        };
        if side.is_none_or(|best| lower((i, t, w), best)) {
            *side = Some((i, t, w));
        }
    }
    let simplices = [left, right]
        .into_iter()
        .flatten()
        .map(|(i, _, _)| sorted(vec![center, i]))
        .collect();
    Star { simplices, dropped }
}

/// Star of `center` (unlifted) in the planar regular triangulation of
/// `center ∪ others`, computed by walking around the center from its
/// neighbor of least elevation `(r² + w)/r` (the nearest one when all
/// lifts are zero).
pub fn star_2d(center: Site, others: &[Site]) -> Star {
    let mut dropped = 0;
    // Drop neighbors coinciding with the center, and all but the lowest of
    // neighbors sharing a position: their power cells are empty.
    let mut pts: Vec<Site> = Vec::with_capacity(others.len());
    {
        let mut sorted_pts: Vec<Site> = others.to_vec();
        sorted_pts.sort_by(|p, q| {
            p.xy[0]
                .total_cmp(&q.xy[0])
                .then(p.xy[1].total_cmp(&q.xy[1]))
                .then(p.lift.total_cmp(&q.lift))
                .then(p.index.cmp(&q.index))
        });
        let mut prev: Option<[f64; 2]> = None;
        for s in sorted_pts {
            if s.xy == center.xy || prev == Some(s.xy) {
                dropped += 1;
                continue;
            }
            prev = Some(s.xy);
            pts.push(s);
        }
        pts.sort_by_key(|s| s.index);
    }
    if pts.len() < 2 {
        return Star {
            simplices: Vec::new(),
            dropped,
        };
    }
    // Squared elevation z²/r² of the lifted neighbor seen from the center.
    let elevation = |s: &Site| {
        let dx = s.xy[0] - center.xy[0];
        let dy = s.xy[1] - center.xy[1];
        let r2 = dx * dx + dy * dy;
        let z = r2 + s.lift;
        z * z / r2
    };
    let start = (0..pts.len())
        .min_by(|&i, &j| {
            elevation(&pts[i])
                .total_cmp(&elevation(&pts[j]))
                .then(pts[i].index.cmp(&pts[j].index))
        })
        .expect("nonempty");
    let mut triangles = Vec::new();
    let mut current = start;
    let mut closed = false;
    for _ in 0..=pts.len() {
        match next_around(center, &pts, current, true) {
            Some(b) => {
                triangles.push(sorted(vec![center.index, pts[current].index, pts[b].index]));
                if b == start {
                    closed = true;
                    break;
                }
                current = b;
            }
            None => break,
        }
    }
    if !closed {
        current = start;
        for _ in 0..=pts.len() {
            match next_around(center, &pts, current, false) {
                Some(b) => {
                    triangles.push(sorted(vec![center.index, pts[b].index, pts[current].index]));
                    current = b;
                }
                None => break,
            }
        }
    }
    triangles.sort();
    triangles.dedup();
    Star {
        simplices: triangles,
        dropped,
    }
}

/// Third vertex of the Delaunay triangle on the left (`ccw`) or right side
/// of the directed edge `center → pts[a]`.
fn next_around(center: Site, pts: &[Site], a: usize, ccw: bool) -> Option<usize> {
    let pa = pts[a];
    let mut best: Option<usize> = None;
    for (q, s) in pts.iter().enumerate() {
        if q == a {
            continue;
        }
        let o = orient(center.xy, pa.xy, s.xy);
        let side_ok = if ccw { o > 0.0 } else { o < 0.0 };
        if !side_ok {
            continue;
        }
        best = Some(match best {
            None => q,
            Some(b) => {
                let inside = if ccw {
                    incircle_sos(center, pa, pts[b], *s)
                } else {
                    incircle_sos(center, pts[b], pa, *s)
                };
                if inside > 0 {
                    q
                } else {
                    b
                }
            }
        });
    }
    best
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Planar Delaunay triangulation as the union of all vertex stars. With
/// symbolic perturbation the stars agree, so this is a triangulation.
pub fn triangulate(points: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let sites: Vec<Site> = points
        .iter()
        .enumerate()
        .map(|(index, &xy)| Site::new(index, xy))
        .collect();
    let mut tris: Vec<[usize; 3]> = Vec::new();
    for (i, s) in sites.iter().enumerate() {
        let others: Vec<Site> = sites
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, s)| *s)
            .collect();
        for t in star_2d(*s, &others).simplices {
            tris.push([t[0], t[1], t[2]]);
        }
    }
    tris.sort_unstable();
    tris.dedup();
    tris
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn site(index: usize, x: f64, y: f64) -> Site {
        Site::new(index, [x, y])
    }

    /// In-circle sign from the 4×4 lifted determinant, expanded exactly on
    /// small integers.
    fn det4_sign(p: [[i64; 2]; 4]) -> i64 {
        let rows: Vec<[i128; 4]> = p
            .iter()
            .map(|q| {
                let (x, y) = (q[0] as i128, q[1] as i128);
                [x, y, x * x + y * y, 1]
            })
            .collect();
        fn det3(m: [[i128; 3]; 3]) -> i128 {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        let mut det = 0i128;
        for col in 0..4 {
            let minor: Vec<[i128; 3]> = (1..4)
                .map(|r| {
                    let v: Vec<i128> = (0..4).filter(|&k| k != col).map(|k| rows[r][k]).collect();
                    [v[0], v[1], v[2]]
                })
                .collect();
            let m = det3([minor[0], minor[1], minor[2]]);
            let term = rows[0][col] * m;
            det += if col % 2 == 0 { term } else { -term };
        }
        det.signum() as i64
    }

    proptest! {
        #[test]
        fn incircle_matches_lifted_determinant(coords in prop::array::uniform8(-20i64..20)) {
            let p = [
                [coords[0], coords[1]],
                [coords[2], coords[3]],
                [coords[4], coords[5]],
                [coords[6], coords[7]],
            ];
            let f = |q: [i64; 2]| [q[0] as f64, q[1] as f64];
            let exact = incircle(c(f(p[0])), c(f(p[1])), c(f(p[2])), c(f(p[3])));
            prop_assert_eq!(sign(exact) as i64, det4_sign(p));
        }
    }

    #[test]
    fn cocircular_square_is_resolved_consistently() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let tris = triangulate(&sq);
        assert_eq!(tris.len(), 2);
        // Either diagonal is acceptable; stars must agree.
        let diag02 = tris.iter().all(|t| t.contains(&0) && t.contains(&2));
        let diag13 = tris.iter().all(|t| t.contains(&1) && t.contains(&3));
        assert!(diag02 ^ diag13);
        let a = site(0, 0.0, 0.0);
        let b = site(1, 1.0, 0.0);
        let cc = site(2, 1.0, 1.0);
        let d = site(3, 0.0, 1.0);
        assert_ne!(incircle_sos(a, b, cc, d), 0);
    }

    #[test]
    fn star_1d_examples() {
        let s = star_1d(5, &[(1, -0.2, 0.0), (2, 0.3, 0.0), (3, 0.7, 0.0), (4, -0.9, 0.0)]);
        assert_eq!(s.simplices, vec![vec![1, 5], vec![2, 5]]);
        // A high neighbor is hidden behind a farther low one.
        let s = star_1d(5, &[(1, -0.2, 0.0), (2, 0.3, 0.5), (3, 0.7, 0.0)]);
        assert_eq!(s.simplices, vec![vec![1, 5], vec![3, 5]]);
        let s = star_1d(0, &[(1, 0.0, 0.0), (2, 0.0, 0.0)]);
        assert!(s.simplices.is_empty());
        assert_eq!(s.dropped, 2);
    }

    #[test]
    fn star_of_interior_point() {
        let center = site(0, 0.0, 0.0);
        let others = [site(1, 1.0, -0.5), site(2, -0.2, 1.1), site(3, -1.0, -0.7)];
        let star = star_2d(center, &others);
        assert_eq!(star.simplices, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3]]);
        for t in &star.simplices {
            assert!(circumcircle_empty(&[[0.0, 0.0], [1.0, -0.5], [-0.2, 1.1], [-1.0, -0.7]], t));
        }
    }

    #[test]
    fn coincident_neighbors_give_empty_star() {
        let center = site(0, 0.5, 0.5);
        let star = star_2d(center, &[site(1, 0.5, 0.5), site(2, 0.5, 0.5)]);
        assert!(star.simplices.is_empty());
        assert_eq!(star.dropped, 2);
    }

    fn circumcircle_empty(points: &[[f64; 2]], t: &[usize]) -> bool {
        let (mut a, mut b, cc) = (points[t[0]], points[t[1]], points[t[2]]);
        if orient(a, b, cc) < 0.0 {
            std::mem::swap(&mut a, &mut b);
        }
        points
            .iter()
            .enumerate()
            .filter(|(i, _)| !t.contains(i))
            .all(|(_, &q)| incircle(c(a), c(b), c(cc), c(q)) <= 0.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn triangulation_has_empty_circumcircles(
            raw in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 3..13)
        ) {
            let tris = triangulate(&raw);
            for t in &tris {
                prop_assert!(circumcircle_empty(&raw, t));
            }
            // Euler count for a triangulated point set in general position.
            let hull = hull_size(&raw);
            if hull >= 3 {
                prop_assert_eq!(tris.len(), 2 * raw.len() - 2 - hull);
            }
        }

        #[test]
        fn integer_grids_never_crash(w in 2usize..6, h in 2usize..6) {
            let pts: Vec<[f64; 2]> = (0..w * h).map(|i| [(i % w) as f64, (i / w) as f64]).collect();
            let tris = triangulate(&pts);
            prop_assert_eq!(tris.len(), 2 * (w - 1) * (h - 1));
            for t in &tris {
                prop_assert!(circumcircle_empty(&pts, t));
            }
        }
    }

    /// Lower-hull faces of the lifted points incident to point 0, by brute
    /// force over all triangles.
    fn lifted_star_brute(sites: &[Site]) -> Vec<Vec<usize>> {
        let n = sites.len();
        let mut out = Vec::new();
        for i in 1..n {
            for j in (i + 1)..n {
                let (mut a, mut b) = (sites[i], sites[j]);
                let o = orient(sites[0].xy, a.xy, b.xy);
                if o == 0.0 {
                    continue;
                }
                if o < 0.0 {
                    std::mem::swap(&mut a, &mut b);
                }
                let empty = (1..n)
                    .filter(|&k| k != i && k != j)
                    .all(|k| orient3d(sites[0].c3(), a.c3(), b.c3(), sites[k].c3()) < 0.0);
                if empty {
                    out.push(sorted(vec![0, i, j]));
                }
            }
        }
        out.sort();
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn lifted_star_matches_lower_hull(
            raw in prop::collection::vec((prop::array::uniform2(-1.0f64..1.0), 0.0f64..0.3), 3..12)
        ) {
            let mut sites = vec![Site::new(0, [0.0, 0.0])];
            sites.extend(raw.iter().enumerate().map(|(i, &(xy, w))| Site::lifted(i + 1, xy, w)));
            let star = star_2d(sites[0], &sites[1..]);
            prop_assert_eq!(star.simplices, lifted_star_brute(&sites));
        }
    }

    fn hull_size(points: &[[f64; 2]]) -> usize {
        // Points that are vertices (not interior or on edges) of the hull.
        let n = points.len();
        (0..n)
            .filter(|&i| {
                (0..n).any(|j| {
                    j != i
                        && (0..n).all(|k| k == i || k == j || orient(points[i], points[j], points[k]) > 0.0)
                })
            })
            .count()
    }
}
