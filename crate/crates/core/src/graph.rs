//! The finite upper half-plane `H_q`, its spheres `S_r`, and the Cayley graphs
//! `Γ_q(H_q, H_q × S_r)`.

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ExtElement, FieldCtx};
use crate::linalg::{clustered_spectrum, SymEigen, CLUSTER_TOL};

/// `z = x + y√δ` with `y ≠ 0`, identified with the affine matrix `[[y, x], [0, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Point {
    pub x: u64,
    pub y: u64,
}

impl Point {
    pub const fn new(x: u64, y: u64) -> Self {
        Point { x, y }
    }

    /// The base point `√δ` (the identity of `Aff(q)`).
    pub const BASE: Point = Point { x: 0, y: 1 };

    /// `I(z) = y`.
    pub fn imag(self) -> u64 {
        self.y
    }

    pub fn as_ext(self) -> ExtElement {
        ExtElement::new(self.x, self.y)
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Vertex order: `(y, x)` lexicographic.
impl Ord for Point {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

/// All `q(q − 1)` points in vertex order.
pub fn points(ctx: &FieldCtx) -> Vec<Point> {
    let q = ctx.q();
    (1..q)
        .flat_map(|y| (0..q).map(move |x| Point::new(x, y)))
        .collect()
}

pub fn vertex_index(ctx: &FieldCtx, p: Point) -> usize {
    ((p.y - 1) * ctx.q() + p.x) as usize
}

pub fn vertex_count(ctx: &FieldCtx) -> usize {
    (ctx.q() * (ctx.q() - 1)) as usize
}

/// Pseudo-distance `N(z − w) / (I(z) I(w))`.
pub fn distance(ctx: &FieldCtx, z: Point, w: Point) -> u64 {
    let diff = ctx.ext_sub(z.as_ext(), w.as_ext());
    let denom = ctx.mul(z.y, w.y);
    ctx.mul(
        ctx.ext_norm(diff),
        ctx.inv(denom).expect("points have y ≠ 0"),
    )
}

/// `S_r = {(x, y) : x² = r y + δ (y − 1)², y ≠ 0}`, sorted by `(y, x)`.
pub fn sphere(ctx: &FieldCtx, r: u64) -> Vec<Point> {
    let r = r % ctx.q();
    let d = ctx.delta();
    points(ctx)
        .into_iter()
        .filter(|p| {
            let ym1 = ctx.sub(p.y, 1);
            let rhs = ctx.add(ctx.mul(r, p.y), ctx.mul(d, ctx.mul(ym1, ym1)));
            ctx.mul(p.x, p.x) == rhs
        })
        .collect()
}

/// Right action `z · s` of an affine group element on a point.
pub fn act(ctx: &FieldCtx, z: Point, s: Point) -> Point {
    Point::new(ctx.add(ctx.mul(z.y, s.x), z.x), ctx.mul(z.y, s.y))
}

/// Inverse in `Aff(q)`: `[[y, x], [0, 1]]⁻¹ = [[1/y, −x/y], [0, 1]]`.
pub fn affine_inverse(ctx: &FieldCtx, s: Point) -> Point {
    let yi = ctx.inv(s.y).expect("y ≠ 0");
    Point::new(ctx.neg(ctx.mul(s.x, yi)), yi)
}

/// Left translation `z ↦ g z = a z + b` by the affine element `g = (a, b)`.
pub fn translate(ctx: &FieldCtx, a: u64, b: u64, z: Point) -> Point {
    Point::new(ctx.add(ctx.mul(a, z.x), b), ctx.mul(a, z.y))
}

pub fn is_regular_radius(ctx: &FieldCtx, r: u64) -> bool {
    let r = r % ctx.q();
    r != 0 && r != ctx.four_delta()
}

/// Regular radii in increasing order.
pub fn regular_radii(ctx: &FieldCtx) -> Vec<u64> {
    (0..ctx.q())
        .filter(|&r| is_regular_radius(ctx, r))
        .collect()
}

/// Vertices grouped by their distance to the base point `√δ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitDecomposition {
    pub orbits: BTreeMap<u64, Vec<usize>>,
}

impl OrbitDecomposition {
    pub fn sizes(&self) -> BTreeMap<u64, usize> {
        self.orbits.iter().map(|(&r, v)| (r, v.len())).collect()
    }

    pub fn size(&self, r: u64) -> usize {
        self.orbits.get(&r).map_or(0, Vec::len)
    }
}

pub fn orbit_decomposition(ctx: &FieldCtx) -> OrbitDecomposition {
    let mut orbits: BTreeMap<u64, Vec<usize>> = (0..ctx.q()).map(|r| (r, Vec::new())).collect();
    for (i, p) in points(ctx).into_iter().enumerate() {
        orbits
            .get_mut(&distance(ctx, p, Point::BASE))
            .expect("every radius is a key")
            .push(i);
    }
    OrbitDecomposition { orbits }
}

/// A built Cayley graph with dense adjacency.
#[derive(Debug, Clone)]
pub struct UhpGraph {
    ctx: FieldCtx,
    r_s: u64,
    points: Vec<Point>,
    neighbors: Vec<Vec<usize>>,
    adjacency: DMatrix<f64>,
}

/// Builds `Γ_q(H_q, H_q × S_{r_s})`: `z ~ z·s` for `s ∈ S_{r_s}`.
pub fn build_graph(ctx: &FieldCtx, r_s: u64) -> Result<UhpGraph> {
    let q = ctx.q();
    let r_s = r_s % q;
    if !is_regular_radius(ctx, r_s) {
        return Err(Error::DegenerateRadius {
            r: r_s,
            four_delta: ctx.four_delta(),
        });
    }
    let gens = sphere(ctx, r_s);
    for &s in &gens {
        let s_inv = affine_inverse(ctx, s);
        if !gens.contains(&s_inv) {
            return Err(Error::Internal(format!(
                "S_{r_s} is not closed under inversion: ({}, {}) has inverse ({}, {})",
                s.x, s.y, s_inv.x, s_inv.y
            )));
        }
    }

    let pts = points(ctx);
    let n = pts.len();
    let mut adjacency = DMatrix::zeros(n, n);
    let mut neighbors = Vec::with_capacity(n);
    for (i, &z) in pts.iter().enumerate() {
        let mut row: Vec<usize> = gens
            .iter()
            .map(|&s| vertex_index(ctx, act(ctx, z, s)))
            .collect();
        row.sort_unstable();
        for &j in &row {
            adjacency[(i, j)] += 1.0;
        }
        neighbors.push(row);
    }

    if adjacency != adjacency.transpose() {
        return Err(Error::Internal("adjacency matrix is not symmetric".into()));
    }
    if (0..n).any(|i| adjacency[(i, i)] != 0.0) {
        return Err(Error::Internal("graph has a loop".into()));
    }
    if neighbors.iter().any(|row| row.len() as u64 != q + 1) {
        return Err(Error::Internal("graph is not (q+1)-regular".into()));
    }

    let g = UhpGraph {
        ctx: ctx.clone(),
        r_s,
        points: pts,
        neighbors,
        adjacency,
    };
    if !g.is_connected() {
        return Err(Error::Internal(format!(
            "graph for r_s = {r_s} is disconnected"
        )));
    }
    Ok(g)
}

impl UhpGraph {
    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn q(&self) -> u64 {
        self.ctx.q()
    }

    pub fn r_s(&self) -> u64 {
        self.r_s
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn index_of(&self, p: Point) -> usize {
        vertex_index(&self.ctx, p)
    }

    pub fn base_index(&self) -> usize {
        self.index_of(Point::BASE)
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn degree(&self) -> usize {
        (self.q() + 1) as usize
    }

    /// Undirected edge list `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }

    /// Combinatorial Laplacian `(q + 1) I − A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.vertex_count();
        DMatrix::identity(n, n) * (self.q() + 1) as f64 - &self.adjacency
    }

    /// Adjacency eigenvalues, descending.
    pub fn adjacency_eigenvalues(&self) -> Vec<f64> {
        let mut v = SymEigen::new(&self.adjacency).values;
        v.reverse();
        v
    }

    /// Distinct adjacency eigenvalues with multiplicities, descending.
    pub fn adjacency_spectrum(&self) -> Vec<(f64, usize)> {
        let mut s = clustered_spectrum(&SymEigen::new(&self.adjacency).values, CLUSTER_TOL);
        s.reverse();
        s
    }

    /// Distance from every vertex to `p`.
    pub fn radii_from(&self, p: Point) -> Vec<u64> {
        self.points
            .iter()
            .map(|&z| distance(&self.ctx, z, p))
            .collect()
    }
}

pub fn laplacian(g: &UhpGraph) -> DMatrix<f64> {
    g.laplacian()
}

/// Outcome of the Ramanujan bound check `|λ| ≤ 2√q` on nontrivial eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RamanujanReport {
    pub q: u64,
    pub r_s: u64,
    pub bound: f64,
    pub max_nontrivial: f64,
    pub holds: bool,
}

pub fn ramanujan_check(g: &UhpGraph) -> RamanujanReport {
    let k = (g.q() + 1) as f64;
    let bound = 2.0 * (g.q() as f64).sqrt();
    let max_nontrivial = g
        .adjacency_eigenvalues()
        .into_iter()
        .filter(|l| (l.abs() - k).abs() > CLUSTER_TOL)
        .fold(0.0f64, |m, l| m.max(l.abs()));
    RamanujanReport {
        q: g.q(),
        r_s: g.r_s(),
        bound,
        max_nontrivial,
        holds: max_nontrivial <= bound + 1e-9,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(q: u64) -> FieldCtx {
        FieldCtx::new(q).unwrap()
    }

    #[test]
    fn sphere_examples_q3() {
        let c = ctx(3);
        assert_eq!(
            sphere(&c, 1),
            vec![
                Point::new(1, 1),
                Point::new(2, 1),
                Point::new(1, 2),
                Point::new(2, 2)
            ]
        );
        assert_eq!(sphere(&c, 0), vec![Point::new(0, 1)]);
        assert_eq!(sphere(&c, 2), vec![Point::new(0, 2)]);
    }

    #[test]
    fn sphere_sizes() {
        for q in [3u64, 5, 7, 13] {
            let c = ctx(q);
            for r in 0..q {
                let expected = if is_regular_radius(&c, r) { q + 1 } else { 1 };
                assert_eq!(sphere(&c, r).len() as u64, expected, "q={q} r={r}");
            }
        }
    }

    #[test]
    fn distance_examples() {
        let c = ctx(3);
        assert_eq!(distance(&c, Point::new(1, 1), Point::new(0, 1)), 1);
        assert_eq!(distance(&c, Point::new(0, 2), Point::new(0, 1)), 2);
        for p in points(&c) {
            assert_eq!(distance(&c, p, p), 0);
        }
    }

    #[test]
    fn octahedron() {
        let c = ctx(3);
        let g = build_graph(&c, 1).unwrap();
        assert_eq!(g.vertex_count(), 6);
        let base = g.base_index();
        let anti = g.index_of(Point::new(0, 2));
        for j in 0..6 {
            let expected = if j == base || j == anti { 0.0 } else { 1.0 };
            assert_eq!(g.adjacency()[(base, j)], expected);
        }
        let lap = SymEigen::new(&g.laplacian()).values;
        let expected = [0.0, 4.0, 4.0, 4.0, 6.0, 6.0];
        for (a, b) in lap.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let eigs = g.adjacency_eigenvalues();
        let expected = [4.0, 0.0, 0.0, 0.0, -2.0, -2.0];
        for (a, b) in eigs.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_radii_rejected() {
        let c = ctx(3);
        assert_eq!(
            build_graph(&c, 0).unwrap_err(),
            Error::DegenerateRadius {
                r: 0,
                four_delta: 2
            }
        );
        assert!(build_graph(&c, 2).is_err());
        let msg = build_graph(&ctx(5), 3).unwrap_err().to_string();
        assert!(msg.contains("0") && msg.contains("4δ = 3"), "{msg}");
    }

    #[test]
    fn q5_graph_and_laplacian() {
        let c = ctx(5);
        let g = build_graph(&c, 1).unwrap();
        assert_eq!(g.vertex_count(), 20);
        assert!(g.is_connected());
        let lap = g.laplacian();
        let ones = nalgebra::DVector::from_element(20, 1.0);
        assert!((&lap * ones).amax() < 1e-14);
        let vals = SymEigen::new(&lap).values;
        assert!(vals[0].abs() < 1e-10);
        assert!(vals[1] > 1e-6);
    }

    #[test]
    fn adjacency_iff_distance() {
        for q in [3u64, 5, 7] {
            let c = ctx(q);
            for r in regular_radii(&c) {
                let g = build_graph(&c, r).unwrap();
                for (i, &z) in g.points().iter().enumerate() {
                    for (j, &w) in g.points().iter().enumerate() {
                        let adj = g.adjacency()[(i, j)] == 1.0;
                        assert_eq!(adj, distance(&c, z, w) == r);
                    }
                }
            }
        }
    }

    #[test]
    fn rows_are_permutations() {
        let c = ctx(7);
        let g = build_graph(&c, 2).unwrap();
        let mut first: Vec<f64> = g.adjacency().row(0).iter().copied().collect();
        first.sort_by(f64::total_cmp);
        for i in 1..g.vertex_count() {
            let mut row: Vec<f64> = g.adjacency().row(i).iter().copied().collect();
            row.sort_by(f64::total_cmp);
            assert_eq!(row, first);
        }
    }

    #[test]
    fn orbit_sizes() {
        let sizes = orbit_decomposition(&ctx(3)).sizes();
        assert_eq!(sizes, BTreeMap::from([(0, 1), (1, 4), (2, 1)]));
        let sizes = orbit_decomposition(&ctx(5)).sizes();
        assert_eq!(
            sizes,
            BTreeMap::from([(0, 1), (1, 6), (2, 6), (3, 1), (4, 6)])
        );
        for q in [7u64, 11, 13] {
            let c = ctx(q);
            let o = orbit_decomposition(&c);
            assert_eq!(o.sizes().values().sum::<usize>() as u64, q * (q - 1));
            let pts = points(&c);
            for (r, members) in &o.orbits {
                let mut from_sphere: Vec<usize> = sphere(&c, *r)
                    .into_iter()
                    .map(|p| vertex_index(&c, p))
                    .collect();
                from_sphere.sort_unstable();
                assert_eq!(&from_sphere, members);
                assert!(members
                    .iter()
                    .all(|&i| distance(&c, pts[i], Point::BASE) == *r));
            }
        }
    }

    #[test]
    fn ramanujan_small() {
        let c = ctx(5);
        for r in regular_radii(&c) {
            let rep = ramanujan_check(&build_graph(&c, r).unwrap());
            assert!(rep.holds, "{rep:?}");
        }
    }
}
