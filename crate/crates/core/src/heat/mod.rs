//! The heat kernel `E(t; r)` of the combinatorial Laplacian.
//!
//! [`heat_kernel_spectral`] sums the spherical expansion
//! `Σ_i d_i e^{−λ_i t} ω_i(r)`; [`HeatOracle`] exponentiates `Δ` directly.

pub mod lift;

pub use lift::{method_of_images_check, GroupGraph, GroupMatrix, MethodOfImagesReport};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::{distance, laplacian, translate, Point, UhpGraph};
use crate::linalg::SymEigen;
use crate::spherical::{table_radii, SphericalTable, ORBIT_CONSTANCY_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatParams {
    pub q: u64,
    pub delta: u64,
    pub r_s: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatKernelResult {
    pub t: f64,
    /// Same order as [`SphericalTable::radii`].
    pub radii: Vec<u64>,
    pub orbit_sizes: Vec<usize>,
    pub by_radius: Vec<f64>,
    /// Per-vertex values in graph vertex order (oracle path only).
    pub by_vertex: Option<Vec<f64>>,
    pub params: HeatParams,
}

impl HeatKernelResult {
    pub fn value(&self, r: u64) -> f64 {
        let k = self
            .radii
            .iter()
            .position(|&x| x == r % self.params.q)
            .expect("radius in 0..q");
        self.by_radius[k]
    }

    /// `(1/(q(q−1))) Σ_x E(t; x)`.
    pub fn mean(&self) -> f64 {
        let n: usize = self.orbit_sizes.iter().sum();
        self.orbit_sizes
            .iter()
            .zip(&self.by_radius)
            .map(|(&m, e)| m as f64 * e)
            .sum::<f64>()
            / n as f64
    }

    pub fn min(&self) -> f64 {
        self.by_radius.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &HeatKernelResult) -> f64 {
        self.radii
            .iter()
            .map(|&r| (self.value(r) - other.value(r)).abs())
            .fold(0.0, f64::max)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be nonnegative (got {t})")));
    }
    Ok(())
}

pub fn heat_kernel_spectral(table: &SphericalTable, t: f64) -> Result<HeatKernelResult> {
    check_time(t)?;
    let by_radius = (0..table.radii.len())
        .map(|k| {
            table
                .rows
                .iter()
                .map(|row| {
                    row.multiplicity as f64 * (-row.laplace_eigenvalue * t).exp() * row.values[k]
                })
                .sum()
        })
        .collect();
    Ok(HeatKernelResult {
        t,
        radii: table.radii.clone(),
        orbit_sizes: table.orbit_sizes.clone(),
        by_radius,
        by_vertex: None,
        params: HeatParams {
            q: table.q,
            delta: table.delta,
            r_s: table.r_s,
        },
    })
}

pub fn heat_kernel_spectral_grid(
    table: &SphericalTable,
    ts: &[f64],
    exec: Exec,
) -> Result<Vec<HeatKernelResult>> {
    exec.map(ts, |&t| heat_kernel_spectral(table, t))
        .into_iter()
        .collect()
}

/// Eigendecomposition of `Δ`, computed once and shared across times.
#[derive(Debug, Clone)]
pub struct HeatOracle {
    eig: SymEigen,
    points: Vec<Point>,
    radii: Vec<u64>,
    orbit_sizes: Vec<usize>,
    params: HeatParams,
    ctx: crate::field::FieldCtx,
}

impl HeatOracle {
    pub fn new(g: &UhpGraph) -> Self {
        let ctx = g.ctx().clone();
        let radii = table_radii(&ctx);
        let orbit_sizes = radii
            .iter()
            .map(|&r| crate::graph::sphere(&ctx, r).len())
            .collect();
        HeatOracle {
            eig: SymEigen::new(&laplacian(g)),
            points: g.points().to_vec(),
            radii,
            orbit_sizes,
            params: HeatParams {
                q: g.q(),
                delta: ctx.delta(),
                r_s: g.r_s(),
            },
            ctx,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.points.len()
    }

    /// Laplacian eigenvalues, ascending.
    pub fn laplacian_eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    /// Smallest nonzero Laplacian eigenvalue.
    pub fn spectral_gap(&self) -> f64 {
        self.eig
            .values
            .iter()
            .copied()
            .find(|&l| l > 1e-8)
            .unwrap_or(0.0)
    }

    /// `exp(−tΔ)` as a dense matrix.
    pub fn propagator(&self, t: f64) -> Result<DMatrix<f64>> {
        check_time(t)?;
        Ok(self.eig.matrix_fn(|l| (-l * t).exp()))
    }

    /// `q(q−1) exp(−tΔ) 1_base`, read off per radius around `base`.
    pub fn kernel(&self, t: f64, base: Point) -> Result<HeatKernelResult> {
        check_time(t)?;
        let n = self.vertex_count();
        let b = self
            .points
            .binary_search(&base)
            .map_err(|_| Error::InvalidParameter(format!("{base:?} is not a point of H_q")))?;
        let col = self.eig.apply_fn_to_basis(b, |l| (-l * t).exp()) * n as f64;
        self.assemble(t, base, col.as_slice())
    }

    /// `q(q−1) exp(−tΔ) f` read per radius around the base point; `f` must
    /// be radial about `base` for the result to be meaningful.
    fn assemble(&self, t: f64, base: Point, v: &[f64]) -> Result<HeatKernelResult> {
        let k_of = |p: Point| {
            let r = distance(&self.ctx, p, base);
            self.radii
                .iter()
                .position(|&x| x == r)
                .expect("radius in table")
        };
        let mut lo = vec![f64::INFINITY; self.radii.len()];
        let mut hi = vec![f64::NEG_INFINITY; self.radii.len()];
        for (p, &e) in self.points.iter().zip(v) {
            let k = k_of(*p);
            lo[k] = lo[k].min(e);
            hi[k] = hi[k].max(e);
        }
        let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        if let Some(k) =
            (0..self.radii.len()).find(|&k| hi[k] - lo[k] > ORBIT_CONSTANCY_TOL * scale)
        {
            return Err(Error::Internal(format!(
                "oracle heat kernel is not constant on the orbit r = {} (spread {:e})",
                self.radii[k],
                hi[k] - lo[k]
            )));
        }
        let by_radius = (0..self.radii.len())
            .map(|k| {
                let idx = self
                    .points
                    .iter()
                    .position(|&p| k_of(p) == k)
                    .expect("orbits are nonempty");
                v[idx]
            })
            .collect();
        Ok(HeatKernelResult {
            t,
            radii: self.radii.clone(),
            orbit_sizes: self.orbit_sizes.clone(),
            by_radius,
            by_vertex: Some(v.to_vec()),
            params: self.params,
        })
    }

    pub fn kernel_grid(&self, ts: &[f64], exec: Exec) -> Result<Vec<HeatKernelResult>> {
        exec.map(ts, |&t| self.kernel(t, Point::BASE))
            .into_iter()
            .collect()
    }
}

pub fn heat_kernel_oracle(g: &UhpGraph, t: f64, base: Point) -> Result<HeatKernelResult> {
    HeatOracle::new(g).kernel(t, base)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConditionReport {
    pub t_grid: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `max((q+1)·2·t·max|f|, 1e−8)` per time.
    pub tolerances: Vec<f64>,
    /// Residuals do not increase as `t` decreases over the second half of the grid.
    pub monotone_tail: bool,
    pub passes: bool,
}

/// `|(1/(q(q−1))) Σ_x E(t; x) f(x) − f(base)|` for each `t`.
pub fn initial_condition_check(
    g: &UhpGraph,
    f: &[f64],
    t_grid: &[f64],
) -> Result<InitialConditionReport> {
    initial_condition_check_with(&HeatOracle::new(g), g, f, t_grid)
}

pub fn initial_condition_check_with(
    oracle: &HeatOracle,
    g: &UhpGraph,
    f: &[f64],
    t_grid: &[f64],
) -> Result<InitialConditionReport> {
    let n = g.vertex_count();
    if f.len() != n {
        return Err(Error::InvalidParameter(format!(
            "test function has {} entries, expected {n}",
            f.len()
        )));
    }
    let fmax = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let fv = DVector::from_column_slice(f);
    let base = g.base_index();
    let mut residuals = Vec::with_capacity(t_grid.len());
    let mut tolerances = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        check_time(t)?;
        // Σ_x E(t; x) f(x) / n = (exp(−tΔ) f)(base) by symmetry of Δ
        let pf = oracle.eig.apply_fn(&fv, |l| (-l * t).exp());
        residuals.push((pf[base] - f[base]).abs());
        tolerances.push(((g.q() + 1) as f64 * 2.0 * t * fmax).max(1e-8));
    }
    let half = t_grid.len() / 2;
    let monotone_tail = residuals[half..].windows(2).all(|w| w[1] <= w[0] + 1e-15);
    let passes = residuals.iter().zip(&tolerances).all(|(r, tol)| r <= tol);
    Ok(InitialConditionReport {
        t_grid: t_grid.to_vec(),
        residuals,
        tolerances,
        monotone_tail,
        passes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierReport {
    pub t: f64,
    pub recovered: Vec<f64>,
    pub expected: Vec<f64>,
    pub max_deviation: f64,
}

/// `a_i = (d_i/(q(q−1))) Σ_r |S_r| E(t; r) ω_i(r)` for a given kernel.
pub fn fourier_coefficients(table: &SphericalTable, kernel: &HeatKernelResult) -> Vec<f64> {
    let n = table.vertex_count() as f64;
    table
        .rows
        .iter()
        .map(|row| {
            let s: f64 = table
                .radii
                .iter()
                .zip(&table.orbit_sizes)
                .zip(&row.values)
                .map(|((&r, &m), w)| m as f64 * kernel.value(r) * w)
                .sum();
            row.multiplicity as f64 * s / n
        })
        .collect()
}

pub fn fourier_coefficient_check(table: &SphericalTable, t: f64) -> Result<FourierReport> {
    let kernel = heat_kernel_spectral(table, t)?;
    Ok(fourier_report(table, &kernel))
}

pub fn fourier_report(table: &SphericalTable, kernel: &HeatKernelResult) -> FourierReport {
    let recovered = fourier_coefficients(table, kernel);
    let expected: Vec<f64> = table
        .rows
        .iter()
        .map(|row| row.multiplicity as f64 * (-row.laplace_eigenvalue * kernel.t).exp())
        .collect();
    let max_deviation = recovered
        .iter()
        .zip(&expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    FourierReport {
        t: kernel.t,
        recovered,
        expected,
        max_deviation,
    }
}

/// `‖exp(−(s+t)Δ) − exp(−sΔ) exp(−tΔ)‖_max`.
pub fn semigroup_residual(oracle: &HeatOracle, s: f64, t: f64) -> Result<f64> {
    let lhs = oracle.propagator(s + t)?;
    let rhs = oracle.propagator(s)? * oracle.propagator(t)?;
    Ok((lhs - rhs).abs().max())
}

/// `max |E(t; g·x, g·y) − E(t; x, y)|` over all affine maps `z ↦ az + b` and
/// all vertex pairs.
pub fn left_invariance_residual(g: &UhpGraph, oracle: &HeatOracle, t: f64) -> Result<f64> {
    let ctx = g.ctx();
    let m = oracle.propagator(t)?;
    let n = g.vertex_count();
    let mut worst: f64 = 0.0;
    for a in 1..ctx.q() {
        for b in 0..ctx.q() {
            let perm: Vec<usize> = g
                .points()
                .iter()
                .map(|&z| g.index_of(translate(ctx, a, b, z)))
                .collect();
            for x in 0..n {
                for y in 0..n {
                    worst = worst.max((m[(perm[x], perm[y])] - m[(x, y)]).abs());
                }
            }
        }
    }
    Ok(worst * n as f64)
}

/// `max_r |E(t; r) − 1|` against the bound `q(q−1) e^{−λ₁ t}`.
pub fn long_time_bound(kernel: &HeatKernelResult, spectral_gap: f64) -> (f64, f64) {
    let n: usize = kernel.orbit_sizes.iter().sum();
    let dev = kernel
        .by_radius
        .iter()
        .map(|e| (e - 1.0).abs())
        .fold(0.0, f64::max);
    (dev, n as f64 * (-spectral_gap * kernel.t).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldCtx;
    use crate::graph::build_graph;
    use crate::spherical::radial_eigenbasis;

    fn setup(q: u64, r_s: u64) -> (UhpGraph, SphericalTable) {
        let ctx = FieldCtx::new(q).unwrap();
        let g = build_graph(&ctx, r_s).unwrap();
        let t = radial_eigenbasis(&g).unwrap();
        (g, t)
    }

    fn closed_form_q3(t: f64) -> [f64; 3] {
        let (a, b) = ((-4.0 * t).exp(), (-6.0 * t).exp());
        [1.0 + 3.0 * a + 2.0 * b, 1.0 - b, 1.0 - 3.0 * a + 2.0 * b]
    }

    #[test]
    fn q3_closed_form() {
        let (_, table) = setup(3, 1);
        for t in [0.0, 0.5, 1.0, 5.0] {
            let e = heat_kernel_spectral(&table, t).unwrap();
            let cf = closed_form_q3(t);
            for r in 0..3u64 {
                assert!((e.value(r) - cf[r as usize]).abs() < 1e-12, "t={t} r={r}");
            }
        }
        let e = heat_kernel_spectral(&table, 2f64.ln() / 6.0).unwrap();
        assert!((e.value(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_time_rejected() {
        let (g, table) = setup(3, 1);
        assert!(matches!(
            heat_kernel_spectral(&table, -1.0),
            Err(Error::Domain(_))
        ));
        assert!(heat_kernel_oracle(&g, -0.5, Point::BASE).is_err());
    }

    #[test]
    fn delta_at_time_zero() {
        for q in [3u64, 5, 7] {
            let (g, table) = setup(q, 1);
            let n = (q * (q - 1)) as f64;
            for e in [
                heat_kernel_spectral(&table, 0.0).unwrap(),
                heat_kernel_oracle(&g, 0.0, Point::BASE).unwrap(),
            ] {
                assert!((e.value(0) - n).abs() < 1e-9);
                for &r in &e.radii[1..] {
                    assert!(e.value(r).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn oracle_matches_spectral() {
        for q in [3u64, 5, 7] {
            let ctx = FieldCtx::new(q).unwrap();
            for r_s in crate::graph::regular_radii(&ctx) {
                let (g, table) = setup(q, r_s);
                let oracle = HeatOracle::new(&g);
                for t in [0.0, 0.01, 0.1, 1.0, 10.0] {
                    let a = heat_kernel_spectral(&table, t).unwrap();
                    let b = oracle.kernel(t, Point::BASE).unwrap();
                    assert!(a.max_abs_diff(&b) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn oracle_at_other_base_point() {
        let (g, table) = setup(5, 1);
        let a = heat_kernel_spectral(&table, 0.7).unwrap();
        let b = heat_kernel_oracle(&g, 0.7, Point::new(3, 2)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
    }

    #[test]
    fn long_time_limit() {
        let (g, _) = setup(3, 1);
        let e = heat_kernel_oracle(&g, 50.0, Point::BASE).unwrap();
        assert!(e.by_radius.iter().all(|v| (v - 1.0).abs() < 1e-10));
        let oracle = HeatOracle::new(&g);
        assert!((oracle.spectral_gap() - 4.0).abs() < 1e-10);
        for t in [0.1, 1.0, 3.0] {
            let (dev, bound) = long_time_bound(&oracle.kernel(t, Point::BASE).unwrap(), 4.0);
            assert!(dev <= bound);
        }
    }

    #[test]
    fn initial_condition() {
        let (g, _) = setup(3, 1);
        let ts = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
        let ones = vec![1.0; 6];
        let rep = initial_condition_check(&g, &ones, &ts).unwrap();
        assert!(rep.residuals.iter().all(|&r| r < 1e-12));

        let mut ind = vec![0.0; 6];
        ind[g.base_index()] = 1.0;
        let rep = initial_condition_check(&g, &ind, &ts).unwrap();
        for (&t, &r) in ts.iter().zip(&rep.residuals) {
            let cf = closed_form_q3(t);
            assert!((r - (cf[0] / 6.0 - 1.0).abs()).abs() < 1e-12);
        }
        assert!(rep.residuals[4] <= 3e-5);
        assert!(rep.monotone_tail && rep.passes);
    }

    #[test]
    fn fourier_coefficients_q3() {
        let (g, table) = setup(3, 1);
        let rep = fourier_coefficient_check(&table, 1.0).unwrap();
        let expected = [1.0, 3.0 * (-4.0f64).exp(), 2.0 * (-6.0f64).exp()];
        for (a, b) in rep.recovered.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        let rep0 = fourier_coefficient_check(&table, 0.0).unwrap();
        assert_eq!(rep0.expected, vec![1.0, 3.0, 2.0]);
        assert!(rep0.max_deviation < 1e-12);
        let oracle = heat_kernel_oracle(&g, 1.0, Point::BASE).unwrap();
        assert!(fourier_report(&table, &oracle).max_deviation < 1e-10);
    }

    #[test]
    fn semigroup_and_left_invariance() {
        for q in [3u64, 5] {
            let (g, _) = setup(q, 1);
            let o = HeatOracle::new(&g);
            assert!(semigroup_residual(&o, 0.3, 0.7).unwrap() < 1e-10);
        }
        let (g, _) = setup(3, 1);
        let o = HeatOracle::new(&g);
        assert!(left_invariance_residual(&g, &o, 0.4).unwrap() < 1e-10);
    }

    #[test]
    fn grids_agree_across_exec_paths() {
        let (g, table) = setup(7, 1);
        let ts = [0.0, 0.1, 1.0, 2.5];
        let a = heat_kernel_spectral_grid(&table, &ts, Exec::Sequential).unwrap();
        let b = heat_kernel_spectral_grid(&table, &ts, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let o = HeatOracle::new(&g);
        assert_eq!(
            o.kernel_grid(&ts, Exec::Sequential).unwrap(),
            o.kernel_grid(&ts, Exec::Parallel).unwrap()
        );
    }
}
