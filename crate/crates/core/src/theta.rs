//! Finite theta function for `H_q` and the classical Jacobi theta series.
//!
//! Indices `l, m` live in `Z/(q²−1)`, read as exponents of `ζ`. Under that
//! reading `F_q^×` is the multiples of `q+1`, `U` the multiples of `q−1`, and
//! `V(r) ⊂ F_q^×` is pulled back through `m ↦ ζ^m`.
//!
//! [`ThetaMode::Verbatim`] evaluates the double exponential sum exactly as
//! written, with radius-dependent exponents. [`ThetaMode::Reconciled`] regroups
//! the spherical expansion of the heat kernel by character, with the table's
//! Laplacian eigenvalues as exponents, and agrees with
//! [`crate::heat::heat_kernel_spectral`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characters::{root_of_unity, MultChar, NonDecompChar};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::field::FieldCtx;
use crate::graph::{self, build_graph, Point};
use crate::heat::HeatOracle;
use crate::spherical::{
    cuspidal_spherical, principal_spherical, radial_eigenbasis, reconcile, MatchReport,
    SphericalTable,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaIndexSets {
    pub r: u64,
    /// `{ m : N(ζ^m) = 1 }`.
    pub u_idx: Vec<u64>,
    /// `{ y ∈ F_q^× : x² = ry + δ(y−1)² for some x }`.
    pub v_r: Vec<u64>,
    /// `{ m : ζ^m ∈ V(r) }`.
    pub v_idx: Vec<u64>,
    /// `{ m : Tr(ζ^m) − (r+1)/(r−1) is a nonzero square }`.
    pub o_r: Vec<u64>,
    /// `{ m ∈ U : Tr(ζ^m) = (r+1)/(r−1) }`; these carry `ε = 0` in the
    /// character sum but a phase of `−1` in the exponential form.
    pub zero_trace_u: Vec<u64>,
    /// Size of the whole index group.
    pub n_idx: u64,
}

impl ThetaIndexSets {
    pub fn chi_o(&self, m: u64) -> bool {
        self.o_r.binary_search(&m).is_ok()
    }

    pub fn chi_n(&self, m: u64) -> bool {
        m < self.n_idx
    }

    pub fn in_u(&self, m: u64) -> bool {
        self.u_idx.binary_search(&m).is_ok()
    }

    pub fn in_v(&self, m: u64) -> bool {
        self.v_idx.binary_search(&m).is_ok()
    }
}

pub fn index_sets(ctx: &FieldCtx, r: u64) -> Result<ThetaIndexSets> {
    let q = ctx.q();
    let r = r % q;
    let c = ctx.mul(
        ctx.add(r, 1),
        ctx.inv(ctx.sub(r, 1)).ok_or(Error::SingularRadius(r))?,
    );
    let order = ctx.ext_order();
    let v_r: Vec<u64> = (1..q)
        .filter(|&y| {
            let rhs = ctx.add(ctx.mul(r, y), ctx.mul(ctx.delta(), ctx.mul(y - 1, y - 1)));
            rhs == 0 || ctx.is_square(rhs)
        })
        .collect();
    let mut u_idx = Vec::new();
    let mut v_idx = Vec::new();
    let mut o_r = Vec::new();
    let mut zero_trace_u = Vec::new();
    for m in 0..order {
        let z = ctx.zeta_pow(m);
        if ctx.ext_norm(z) == 1 {
            u_idx.push(m);
        }
        if z.b == 0 && v_r.contains(&z.a) {
            v_idx.push(m);
        }
        let d = ctx.sub(ctx.ext_trace(z), c);
        if d != 0 && ctx.is_square(d) {
            o_r.push(m);
        }
        if d == 0 && ctx.ext_norm(z) == 1 {
            zero_trace_u.push(m);
        }
    }
    Ok(ThetaIndexSets {
        r,
        u_idx,
        v_r,
        v_idx,
        o_r,
        zero_trace_u,
        n_idx: order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThetaMode {
    Verbatim,
    Reconciled,
}

/// `e^{πi(χ_O(m) + χ_N(m))}`, which is `±1` since `χ_N ≡ 1`.
fn sign_phase(sets: &ThetaIndexSets, m: u64) -> Complex64 {
    let k = u64::from(sets.chi_o(m)) + u64::from(sets.chi_n(m));
    root_of_unity(k, 2)
}

/// `λ^p_l(r) = Σ_{m∈V(r)} e^{2πi lm/(q−1)}`.
pub fn principal_exponent(ctx: &FieldCtx, sets: &ThetaIndexSets, l: u64) -> Complex64 {
    let n = ctx.q() - 1;
    sets.v_idx
        .iter()
        .map(|&m| root_of_unity(l % n * (m % n) % n, n))
        .sum()
}

/// `λ^c_l(r) = Σ_{m∈U} e^{2πi((χ_O + χ_N)/2 + lm/(q²−1))}`.
pub fn cuspidal_exponent(ctx: &FieldCtx, sets: &ThetaIndexSets, l: u64) -> Complex64 {
    let n = ctx.ext_order();
    sets.u_idx
        .iter()
        .map(|&m| sign_phase(sets, m) * root_of_unity(l % n * m % n, n))
        .sum()
}

/// Terms of the verbatim double sum plus a check that every phase prefactor
/// was `±1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbatimTheta {
    pub value: Complex64,
    pub terms: usize,
    pub phase_two_valued: bool,
}

pub fn finite_theta_verbatim(ctx: &FieldCtx, r: u64, t: f64) -> Result<VerbatimTheta> {
    check_time(t)?;
    let sets = index_sets(ctx, r)?;
    let q = ctx.q();
    let order = ctx.ext_order();
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0;
    let mut phase_two_valued = true;
    for l in 0..order {
        let base_l = l % (q + 1) == 0;
        let lc = cuspidal_exponent(ctx, &sets, l);
        let alpha = if base_l {
            principal_exponent(ctx, &sets, l) + lc
        } else {
            lc
        };
        let decay = (-alpha * t).exp();
        for &m in &sets.u_idx {
            let (included, mult) = if base_l {
                (sets.in_v(m), (q + 2) % order)
            } else {
                (!sets.in_v(m), 1)
            };
            if !included {
                continue;
            }
            let sign = sign_phase(&sets, m);
            phase_two_valued &= sign.im == 0.0 && sign.re.abs() == 1.0;
            let k = (l * m % order) * mult % order;
            value += decay * sign * root_of_unity(k, order);
            terms += 1;
        }
    }
    Ok(VerbatimTheta {
        value: value / (q + 1) as f64,
        terms,
        phase_two_valued,
    })
}

/// Character-indexed regrouping of the spherical expansion.
#[derive(Debug, Clone)]
pub struct ReconciledTheta {
    ctx: FieldCtx,
    table: SphericalTable,
    /// `(character, row, weight)`; weight = row multiplicity / characters on that row.
    principal: Vec<(MultChar, usize, f64)>,
    cuspidal: Vec<(NonDecompChar, usize, f64)>,
}

impl ReconciledTheta {
    pub fn new(ctx: &FieldCtx, table: &SphericalTable) -> Result<Self> {
        let report = reconcile(ctx, table)?;
        Self::from_report(ctx, table, &report)
    }

    pub fn from_report(
        ctx: &FieldCtx,
        table: &SphericalTable,
        report: &MatchReport,
    ) -> Result<Self> {
        if !report.is_complete() {
            return Err(Error::Reconciliation(format!(
                "closed forms do not cover the table: {}",
                report.unmatched.join("; ")
            )));
        }
        let q = ctx.q();
        let mut principal = Vec::new();
        for j in 0..q - 1 {
            let row = report.principal_row(j).expect("complete report");
            principal.push((MultChar { j }, row, 0.0));
        }
        let mut cuspidal = Vec::new();
        for j in 1..=q {
            let c = NonDecompChar { j };
            if !c.is_valid_cuspidal(ctx) {
                continue;
            }
            let rep = j.min(q + 1 - j);
            let row = report.cuspidal_row(rep).expect("complete report");
            cuspidal.push((c, row, 0.0));
        }
        let mut count = vec![0usize; table.rows.len()];
        for &(_, row, _) in &principal {
            count[row] += 1;
        }
        for &(_, row, _) in &cuspidal {
            count[row] += 1;
        }
        let weight = |row: usize| table.rows[row].multiplicity as f64 / count[row] as f64;
        for e in principal.iter_mut() {
            e.2 = weight(e.1);
        }
        for e in cuspidal.iter_mut() {
            e.2 = weight(e.1);
        }
        Ok(ReconciledTheta {
            ctx: ctx.clone(),
            table: table.clone(),
            principal,
            cuspidal,
        })
    }

    /// `(E^p(t; r), E^c(t; r))`.
    pub fn parts(&self, r: u64, t: f64) -> Result<(Complex64, Complex64)> {
        check_time(t)?;
        let mut ep = Complex64::new(0.0, 0.0);
        for &(beta, row, w) in &self.principal {
            let lam = self.table.rows[row].laplace_eigenvalue;
            ep += w * (-lam * t).exp() * principal_spherical(&self.ctx, beta, r);
        }
        let mut ec = Complex64::new(0.0, 0.0);
        for &(nu, row, w) in &self.cuspidal {
            let lam = self.table.rows[row].laplace_eigenvalue;
            ec += w * (-lam * t).exp() * cuspidal_spherical(&self.ctx, nu, r)?;
        }
        Ok((ep, ec))
    }

    pub fn value(&self, r: u64, t: f64) -> Result<Complex64> {
        let (p, c) = self.parts(r, t)?;
        Ok(p + c)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Domain(format!("time must be nonnegative (got {t})")));
    }
    Ok(())
}

pub fn finite_theta(
    ctx: &FieldCtx,
    table: &SphericalTable,
    r: u64,
    t: f64,
    mode: ThetaMode,
) -> Result<Complex64> {
    match mode {
        ThetaMode::Verbatim => finite_theta_verbatim(ctx, r, t).map(|v| v.value),
        ThetaMode::Reconciled => ReconciledTheta::new(ctx, table)?.value(r, t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTheta {
    pub value: Complex64,
    /// `2 e^{−πt n_max²} / (1 − e^{−πt})`.
    pub truncation_bound: f64,
}

/// `θ(z, it) = Σ_{|n| ≤ n_max} e^{−πn²t + 2πinz}`.
pub fn classical_theta(z: Complex64, t: f64, n_max: u32) -> Result<ClassicalTheta> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Domain(format!("t must be positive (got {t})")));
    }
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let mut value = Complex64::new(0.0, 0.0);
    // sum smallest terms first
    for n in (1..=i64::from(n_max)).rev() {
        let nf = n as f64;
        let decay = (-PI * nf * nf * t).exp();
        let w = Complex64::new(0.0, 2.0 * PI * nf) * z;
        value += decay * (w.exp() + (-w).exp());
    }
    value += 1.0;
    let nm = f64::from(n_max);
    Ok(ClassicalTheta {
        value,
        truncation_bound: 2.0 * (-PI * t * nm * nm).exp() / (1.0 - (-PI * t).exp()),
    })
}

/// Relative residual of `∂θ/∂t = (1/4π) ∂²θ/∂z²` by central differences.
pub fn classical_heat_identity_residual(z: f64, t: f64, h: f64, n_max: u32) -> Result<f64> {
    let th = |z: f64, t: f64| classical_theta(Complex64::new(z, 0.0), t, n_max).map(|v| v.value);
    let dt = (th(z, t + h)? - th(z, t - h)?) / (2.0 * h);
    let dzz = (th(z + h, t)? - th(z, t)? * 2.0 + th(z - h, t)?) / (h * h);
    Ok((dt - dzz / (4.0 * PI)).norm() / dt.norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaRow {
    pub r: u64,
    pub t: f64,
    pub oracle: f64,
    pub reconciled: f64,
    pub reconciled_imag: f64,
    pub verbatim: Complex64,
    pub verbatim_deviation: f64,
    pub zero_trace_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub q: u64,
    pub delta: u64,
    pub r_s: u64,
    pub rows: Vec<ThetaRow>,
    pub max_reconciled_deviation: f64,
    pub max_verbatim_deviation: f64,
    pub phase_two_valued: bool,
    pub tolerance: f64,
    pub passes: bool,
}

pub const THETA_TOL: f64 = 1e-9;

/// For every regular radius `r ≠ 1` and time: the oracle kernel, the
/// reconciled theta value and the verbatim value with its deviation.
pub fn theta_consistency_report(ctx: &FieldCtx, r_s: u64, t_grid: &[f64]) -> Result<ThetaReport> {
    theta_consistency_report_with(ctx, r_s, t_grid, Exec::default())
}

pub fn theta_consistency_report_with(
    ctx: &FieldCtx,
    r_s: u64,
    t_grid: &[f64],
    exec: Exec,
) -> Result<ThetaReport> {
    let g = build_graph(ctx, r_s)?;
    let table = radial_eigenbasis(&g)?;
    let rec = ReconciledTheta::new(ctx, &table)?;
    let oracle = HeatOracle::new(&g);
    let cells: Vec<(u64, f64)> = graph::regular_radii(ctx)
        .into_iter()
        .filter(|&r| r != 1)
        .flat_map(|r| t_grid.iter().map(move |&t| (r, t)))
        .collect();
    let results: Vec<Result<(ThetaRow, bool)>> = exec.map(&cells, |&(r, t)| {
        let e = oracle.kernel(t, Point::BASE)?.value(r);
        let c = rec.value(r, t)?;
        let v = finite_theta_verbatim(ctx, r, t)?;
        let zero = index_sets(ctx, r)?.zero_trace_u.len();
        Ok((
            ThetaRow {
                r,
                t,
                oracle: e,
                reconciled: c.re,
                reconciled_imag: c.im,
                verbatim: v.value,
                verbatim_deviation: (v.value - e).norm(),
                zero_trace_terms: zero,
            },
            v.phase_two_valued,
        ))
    });
    let mut rows = Vec::with_capacity(cells.len());
    let mut phase_two_valued = true;
    for res in results {
        let (row, ok) = res?;
        phase_two_valued &= ok;
        rows.push(row);
    }
    let max_reconciled_deviation = rows
        .iter()
        .map(|row| {
            (row.reconciled - row.oracle)
                .abs()
                .max(row.reconciled_imag.abs())
        })
        .fold(0.0, f64::max);
    let max_verbatim_deviation = rows
        .iter()
        .map(|row| row.verbatim_deviation)
        .fold(0.0, f64::max);
    Ok(ThetaReport {
        q: ctx.q(),
        delta: ctx.delta(),
        r_s,
        rows,
        max_reconciled_deviation,
        max_verbatim_deviation,
        phase_two_valued,
        tolerance: THETA_TOL,
        passes: max_reconciled_deviation <= THETA_TOL && phase_two_valued,
    })
}
