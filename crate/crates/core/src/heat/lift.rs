//! Lift of the `H_q` graph to `GL(2, F_q)` and the method-of-images average.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::HeatOracle;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::FieldCtx;
use crate::graph::{build_graph, distance, Point};
use crate::linalg::SymEigen;

/// `[[a, b], [c, d]]`; ordered lexicographically by `(a, b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupMatrix {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl GroupMatrix {
    pub const IDENTITY: GroupMatrix = GroupMatrix {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };

    pub fn det(self, ctx: &FieldCtx) -> u64 {
        ctx.sub(ctx.mul(self.a, self.d), ctx.mul(self.b, self.c))
    }

    pub fn mul(self, ctx: &FieldCtx, o: GroupMatrix) -> GroupMatrix {
        GroupMatrix {
            a: ctx.add(ctx.mul(self.a, o.a), ctx.mul(self.b, o.c)),
            b: ctx.add(ctx.mul(self.a, o.b), ctx.mul(self.b, o.d)),
            c: ctx.add(ctx.mul(self.c, o.a), ctx.mul(self.d, o.c)),
            d: ctx.add(ctx.mul(self.c, o.b), ctx.mul(self.d, o.d)),
        }
    }

    pub fn inverse(self, ctx: &FieldCtx) -> Option<GroupMatrix> {
        let di = ctx.inv(self.det(ctx))?;
        Some(GroupMatrix {
            a: ctx.mul(self.d, di),
            b: ctx.mul(ctx.neg(self.b), di),
            c: ctx.mul(ctx.neg(self.c), di),
            d: ctx.mul(self.a, di),
        })
    }

    /// `(a√δ + b) / (c√δ + d)`.
    pub fn project(self, ctx: &FieldCtx) -> Point {
        let num = ctx.ext(self.b, self.a);
        let den = ctx.ext(self.d, self.c);
        let z = ctx.ext_mul(num, ctx.ext_inv(den).expect("c√δ + d ≠ 0"));
        Point::new(z.a, z.b)
    }

    /// Coset representative `[[y, x], [0, 1]]` of the point `x + y√δ`.
    pub fn representative(p: Point) -> GroupMatrix {
        GroupMatrix {
            a: p.y,
            b: p.x,
            c: 0,
            d: 1,
        }
    }
}

/// `GL(2, F_q)` with the lifted sphere `S_GL = π⁻¹(S_{r_s})`.
#[derive(Debug, Clone)]
pub struct GroupGraph {
    ctx: FieldCtx,
    r_s: u64,
    elements: Vec<GroupMatrix>,
    lookup: Vec<u32>,
    stabilizer: Vec<usize>,
    in_sphere: Vec<bool>,
}

impl GroupGraph {
    pub fn new(ctx: &FieldCtx, r_s: u64) -> Result<Self> {
        let q = ctx.q();
        if q > 5 {
            return Err(Error::InvalidParameter(format!(
                "the group lift is limited to q ∈ {{3, 5}} (got {q})"
            )));
        }
        let mut elements = Vec::new();
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    for d in 0..q {
                        let m = GroupMatrix { a, b, c, d };
                        if m.det(ctx) != 0 {
                            elements.push(m);
                        }
                    }
                }
            }
        }
        let mut lookup = vec![u32::MAX; (q * q * q * q) as usize];
        for (i, m) in elements.iter().enumerate() {
            lookup[(((m.a * q + m.b) * q + m.c) * q + m.d) as usize] = i as u32;
        }
        let delta = ctx.delta();
        let stabilizer = elements
            .iter()
            .enumerate()
            .filter(|(_, m)| m.d == m.a && m.b == ctx.mul(delta, m.c))
            .map(|(i, _)| i)
            .collect();
        let in_sphere = elements
            .iter()
            .map(|m| distance(ctx, m.project(ctx), Point::BASE) == r_s % q)
            .collect();
        Ok(GroupGraph {
            ctx: ctx.clone(),
            r_s,
            elements,
            lookup,
            stabilizer,
            in_sphere,
        })
    }

    pub fn r_s(&self) -> u64 {
        self.r_s
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupMatrix] {
        &self.elements
    }

    pub fn index_of(&self, m: GroupMatrix) -> usize {
        let q = self.ctx.q();
        self.lookup[(((m.a * q + m.b) * q + m.c) * q + m.d) as usize] as usize
    }

    /// `K = {[[a, δb], [b, a]]}`.
    pub fn stabilizer(&self) -> &[usize] {
        &self.stabilizer
    }

    pub fn sphere_size(&self) -> usize {
        self.in_sphere.iter().filter(|&&s| s).count()
    }

    pub fn sphere_is_inverse_closed(&self) -> bool {
        self.elements.iter().enumerate().all(|(i, m)| {
            let inv = m.inverse(&self.ctx).expect("invertible");
            self.in_sphere[i] == self.in_sphere[self.index_of(inv)]
        })
    }

    /// Number of distinct points `π(g)`.
    pub fn coset_count(&self) -> usize {
        let mut pts: Vec<Point> = self.elements.iter().map(|m| m.project(&self.ctx)).collect();
        pts.sort();
        pts.dedup();
        pts.len()
    }

    /// `A[g, h] = 1` iff `g⁻¹h ∈ S_GL`.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.order();
        let inverses: Vec<GroupMatrix> = self
            .elements
            .iter()
            .map(|m| m.inverse(&self.ctx).expect("invertible"))
            .collect();
        DMatrix::from_fn(n, n, |i, j| {
            let k = self.index_of(inverses[i].mul(&self.ctx, self.elements[j]));
            if self.in_sphere[k] {
                1.0
            } else {
                0.0
            }
        })
    }

    /// `(q+1) I − A_GL / |K|`.
    pub fn normalized_laplacian(&self, adjacency: &DMatrix<f64>) -> DMatrix<f64> {
        let n = self.order();
        let k = self.stabilizer.len() as f64;
        DMatrix::identity(n, n) * (self.ctx.q() + 1) as f64 - adjacency / k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOfImagesReport {
    pub q: u64,
    pub r_s: u64,
    pub group_order: usize,
    pub stabilizer_order: usize,
    pub coset_count: usize,
    pub sphere_size: usize,
    pub sphere_inverse_closed: bool,
    /// Least-squares `c` in `A_GL (f∘π) = c (A_H f)∘π`; equals `|K|` when the
    /// lift intertwines.
    pub intertwining_factor: f64,
    pub intertwining_residual: f64,
    pub t_grid: Vec<f64>,
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passes: bool,
}

pub const LIFT_TOL: f64 = 1e-8;

/// Compares `(1/|K|) Σ_k E_GL(t; g_z k)` with the `H_q` oracle kernel at every
/// point `z` and time in `t_grid`.
pub fn method_of_images_check(
    ctx: &FieldCtx,
    r_s: u64,
    t_grid: &[f64],
) -> Result<MethodOfImagesReport> {
    method_of_images_check_with(ctx, r_s, t_grid, Exec::default())
}

pub fn method_of_images_check_with(
    ctx: &FieldCtx,
    r_s: u64,
    t_grid: &[f64],
    exec: Exec,
) -> Result<MethodOfImagesReport> {
    let h = build_graph(ctx, r_s)?;
    let gg = GroupGraph::new(ctx, r_s)?;
    let n_g = gg.order();
    let a_gl = gg.adjacency();

    // probe the intertwining with a non-radial test function
    let f: Vec<f64> = (0..h.vertex_count())
        .map(|i| ((i * i + 3 * i + 1) % 7) as f64 - 3.0)
        .collect();
    let lifted = DVector::from_iterator(
        n_g,
        gg.elements().iter().map(|m| f[h.index_of(m.project(ctx))]),
    );
    let lhs = &a_gl * lifted;
    let af = h.adjacency() * DVector::from_column_slice(&f);
    let rhs = DVector::from_iterator(
        n_g,
        gg.elements().iter().map(|m| af[h.index_of(m.project(ctx))]),
    );
    let intertwining_factor = lhs.dot(&rhs) / rhs.dot(&rhs);
    let intertwining_residual = (&lhs - &rhs * intertwining_factor).abs().max();

    let eig = SymEigen::new(&gg.normalized_laplacian(&a_gl));
    let id = gg.index_of(GroupMatrix::IDENTITY);
    let oracle = HeatOracle::new(&h);
    let k_elems: Vec<GroupMatrix> = gg.stabilizer().iter().map(|&i| gg.elements()[i]).collect();

    let deviations: Vec<Result<f64>> = exec.map(t_grid, |&t| {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Domain(format!("time must be nonnegative (got {t})")));
        }
        let e_gl = eig.apply_fn_to_basis(id, |l| (-l * t).exp()) * n_g as f64;
        let e_h = oracle.kernel(t, Point::BASE)?;
        let e_h = e_h.by_vertex.expect("oracle fills vertices");
        let worst = h
            .points()
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let g = GroupMatrix::representative(z);
                let avg = k_elems
                    .iter()
                    .map(|&k| e_gl[gg.index_of(g.mul(ctx, k))])
                    .sum::<f64>()
                    / k_elems.len() as f64;
                (avg - e_h[i]).abs()
            })
            .fold(0.0, f64::max);
        Ok(worst)
    });
    let deviations: Vec<f64> = deviations.into_iter().collect::<Result<_>>()?;
    let max_deviation = deviations.iter().copied().fold(0.0, f64::max);
    let sphere_inverse_closed = gg.sphere_is_inverse_closed();

    Ok(MethodOfImagesReport {
        q: ctx.q(),
        r_s,
        group_order: n_g,
        stabilizer_order: gg.stabilizer().len(),
        coset_count: gg.coset_count(),
        sphere_size: gg.sphere_size(),
        sphere_inverse_closed,
        intertwining_factor,
        intertwining_residual,
        t_grid: t_grid.to_vec(),
        deviations,
        max_deviation,
        tolerance: LIFT_TOL,
        passes: sphere_inverse_closed && max_deviation <= LIFT_TOL,
    })
}
