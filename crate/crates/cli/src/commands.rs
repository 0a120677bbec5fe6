use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use fuhp_core::field::ExtElement;
use fuhp_core::graph::{
    build_graph, is_regular_radius, orbit_decomposition, ramanujan_check, regular_radii,
    vertex_count, Point, RamanujanReport,
};
use fuhp_core::heat::{heat_kernel_spectral_grid, HeatOracle};
use fuhp_core::spherical::{radial_eigenbasis_with, reconcile, MatchReport, TableInvariants};
use fuhp_core::theta::{classical_theta, theta_consistency_report_with};
use fuhp_core::verify::{run_battery, CheckResult, VerifyOptions};
use fuhp_core::{Complex64, Exec, FieldCtx, VERSION};
use serde::Serialize;

use crate::args::{
    ClassicalArgs, Cli, Command, Format, GraphArgs, HeatArgs, InfoArgs, OutputArgs, TextFormat,
    ThetaArgs, VerifyArgs,
};
use crate::output::{fmt_f64, to_json, CsvTable, Document, RunConfig};

pub const MAX_Q_ENV: &str = "FUHP_MAX_Q";
pub const DEFAULT_MAX_Q: u64 = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    VerifyFailed,
}

pub fn max_q() -> Result<u64> {
    match std::env::var(MAX_Q_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .with_context(|| format!("{MAX_Q_ENV}={s} is not a non-negative integer")),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_MAX_Q),
        Err(e) => Err(e.into()),
    }
}

pub fn resolve_field(q: u64, delta: &str, max_q: u64) -> Result<FieldCtx> {
    let ctx = match delta {
        "auto" => FieldCtx::new(q)?,
        d => {
            let d: u64 = d
                .parse()
                .with_context(|| format!("--delta must be `auto` or a residue (got `{d}`)"))?;
            FieldCtx::with_delta(q, d)?
        }
    };
    if q > max_q {
        bail!("q = {q} exceeds the size cap {max_q}; raise {MAX_Q_ENV} to allow it");
    }
    Ok(ctx)
}

pub fn resolve_radii(ctx: &FieldCtx, r_s: &str) -> Result<Vec<u64>> {
    if r_s == "all-regular" {
        return Ok(regular_radii(ctx));
    }
    let r: u64 = r_s
        .parse()
        .with_context(|| format!("--r-s must be a radius or `all-regular` (got `{r_s}`)"))?;
    if r >= ctx.q() {
        bail!("r_s = {r} is not a residue mod {}", ctx.q());
    }
    if !is_regular_radius(ctx, r) {
        bail!(
            "r_s = {r} is degenerate: the radii 0 and 4δ = {} have one-point spheres",
            ctx.four_delta()
        );
    }
    Ok(vec![r])
}

pub fn validate_times(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        bail!("--t needs at least one time");
    }
    if let Some(t) = ts.iter().find(|t| !t.is_finite() || **t < 0.0) {
        bail!("times must be finite and non-negative (got {t})");
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<Status> {
    let exec = if cli.sequential {
        Exec::Sequential
    } else {
        Exec::default()
    };
    let cap = max_q()?;
    match cli.command {
        Command::Info(a) => info(&a, cap),
        Command::Graph(a) => graph(&a, cap),
        Command::Spectrum(a) => spectrum(&a, cap),
        Command::Spherical(a) => spherical(&a, cap, exec),
        Command::Heat(a) => heat(&a, cap, exec),
        Command::Theta(a) => theta(&a, cap, exec),
        Command::Verify(a) => verify(&a, cap, exec),
        Command::ClassicalTheta(a) => classical(&a),
    }
}

fn write_text(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn emit<T: Serialize>(
    config: RunConfig,
    data: T,
    table: CsvTable,
    out: &OutputArgs,
) -> Result<Status> {
    let text = match out.format {
        Format::Json => to_json(&Document {
            config,
            version: VERSION.to_string(),
            data,
        })?,
        Format::Csv => table.with_config(&config, VERSION)?.to_csv_string()?,
    };
    write_text(out.out.as_deref(), &text)?;
    Ok(Status::Success)
}

fn config(
    command: &str,
    ctx: &FieldCtx,
    delta: &str,
    r_s: &str,
    radii: &[u64],
    format: Format,
) -> RunConfig {
    RunConfig {
        command: command.into(),
        q: vec![ctx.q()],
        delta_requested: delta.into(),
        delta: vec![ctx.delta()],
        r_s_requested: r_s.into(),
        r_s: radii.to_vec(),
        t_grid: Vec::new(),
        format: format.name().into(),
        mode: None,
        include_lift: false,
    }
}

fn ascending(radii: &[u64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..radii.len()).collect();
    idx.sort_by_key(|&k| radii[k]);
    idx
}

#[derive(Debug, Serialize)]
struct InfoData {
    q: u64,
    delta: u64,
    base_generator: u64,
    ext_generator: ExtElement,
    ext_order: u64,
    four_delta: u64,
    vertex_count: usize,
    degree: u64,
    degenerate_radii: Vec<u64>,
    regular_radii: Vec<u64>,
    orbit_sizes: BTreeMap<u64, usize>,
}

fn info(a: &InfoArgs, cap: u64) -> Result<Status> {
    let ctx = resolve_field(a.field.q, &a.field.delta, cap)?;
    let orbit_sizes = orbit_decomposition(&ctx).sizes();
    let data = InfoData {
        q: ctx.q(),
        delta: ctx.delta(),
        base_generator: ctx.g(),
        ext_generator: ctx.zeta(),
        ext_order: ctx.ext_order(),
        four_delta: ctx.four_delta(),
        vertex_count: vertex_count(&ctx),
        degree: ctx.q() + 1,
        degenerate_radii: vec![0, ctx.four_delta()],
        regular_radii: regular_radii(&ctx),
        orbit_sizes,
    };
    let mut table = CsvTable::new(["r", "orbit_size", "regular"]);
    for (&r, &n) in &data.orbit_sizes {
        table.push(vec![
            r.to_string(),
            n.to_string(),
            is_regular_radius(&ctx, r).to_string(),
        ]);
    }
    let cfg = config("info", &ctx, &a.field.delta, "", &[], a.output.format);
    emit(cfg, data, table, &a.output)
}

#[derive(Debug, Serialize)]
struct GraphData {
    r_s: u64,
    vertex_count: usize,
    degree: usize,
    connected: bool,
    edge_count: usize,
    vertices: Vec<Point>,
    edges: Vec<(usize, usize)>,
}

fn graph(a: &GraphArgs, cap: u64) -> Result<Status> {
    let ctx = resolve_field(a.field.q, &a.field.delta, cap)?;
    let radii = resolve_radii(&ctx, &a.r_s)?;
    let mut data = Vec::new();
    let mut table = CsvTable::new(["i", "j", "x_i", "y_i", "x_j", "y_j", "r_s"]);
    for &r_s in &radii {
        let g = build_graph(&ctx, r_s)?;
        let edges = g.edges();
        for &(i, j) in &edges {
            let (p, w) = (g.points()[i], g.points()[j]);
            table.push(
                [i as u64, j as u64, p.x, p.y, w.x, w.y, r_s]
                    .iter()
                    .map(u64::to_string)
                    .collect(),
            );
        }
        data.push(GraphData {
            r_s,
            vertex_count: g.vertex_count(),
            degree: g.degree(),
            connected: g.is_connected(),
            edge_count: edges.len(),
            vertices: g.points().to_vec(),
            edges,
        });
    }
    let cfg = config(
        "graph",
        &ctx,
        &a.field.delta,
        &a.r_s,
        &radii,
        a.output.format,
    );
    emit(cfg, data, table, &a.output)
}

#[derive(Debug, Serialize)]
struct Eigenspace {
    eigenvalue: f64,
    multiplicity: usize,
    laplacian_eigenvalue: f64,
}

#[derive(Debug, Serialize)]
struct SpectrumData {
    r_s: u64,
    adjacency_eigenvalues: Vec<f64>,
    distinct: Vec<Eigenspace>,
    ramanujan: RamanujanReport,
}

fn spectrum(a: &GraphArgs, cap: u64) -> Result<Status> {
    let ctx = resolve_field(a.field.q, &a.field.delta, cap)?;
    let radii = resolve_radii(&ctx, &a.r_s)?;
    let k = (ctx.q() + 1) as f64;
    let mut data = Vec::new();
    let mut table = CsvTable::new(["eigenvalue", "multiplicity", "laplacian_eigenvalue", "r_s"]);
    for &r_s in &radii {
        let g = build_graph(&ctx, r_s)?;
        let distinct: Vec<Eigenspace> = g
            .adjacency_spectrum()
            .into_iter()
            .map(|(eigenvalue, multiplicity)| Eigenspace {
                eigenvalue,
                multiplicity,
                laplacian_eigenvalue: k - eigenvalue,
            })
            .collect();
        for e in &distinct {
            table.push(vec![
                fmt_f64(e.eigenvalue),
                e.multiplicity.to_string(),
                fmt_f64(e.laplacian_eigenvalue),
                r_s.to_string(),
            ]);
        }
        data.push(SpectrumData {
            r_s,
            adjacency_eigenvalues: g.adjacency_eigenvalues(),
            distinct,
            ramanujan: ramanujan_check(&g),
        });
    }
    let cfg = config(
        "spectrum",
        &ctx,
        &a.field.delta,
        &a.r_s,
        &radii,
        a.output.format,
    );
    emit(cfg, data, table, &a.output)
}

#[derive(Debug, Serialize)]
struct SphericalRowOut {
    index: usize,
    multiplicity: usize,
    adjacency_eigenvalue: f64,
    laplace_eigenvalue: f64,
    characters: Vec<String>,
    omega: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct SphericalData {
    r_s: u64,
    radii: Vec<u64>,
    orbit_sizes: Vec<usize>,
    distinct_adjacency_eigenvalues: usize,
    rows: Vec<SphericalRowOut>,
    invariants: TableInvariants,
    reconciliation: MatchReport,
}

fn character_labels(report: &MatchReport, rows: usize) -> Vec<Vec<String>> {
    let mut labels = vec![Vec::new(); rows];
    for (prefix, matches) in [("beta", &report.principal), ("nu", &report.cuspidal)] {
        for m in matches {
            if let Some(row) = m.row {
                labels[row].push(format!("{prefix}_{}", m.index));
            }
        }
    }
    labels
}

fn spherical(a: &GraphArgs, cap: u64, exec: Exec) -> Result<Status> {
    let ctx = resolve_field(a.field.q, &a.field.delta, cap)?;
    let radii = resolve_radii(&ctx, &a.r_s)?;
    let mut data = Vec::new();
    let mut header: Vec<String> = [
        "row",
        "multiplicity",
        "adjacency_eigenvalue",
        "laplace_eigenvalue",
        "characters",
    ]
    .map(String::from)
    .to_vec();
    let mut sorted_radii: Vec<u64> = (0..ctx.q()).collect();
    sorted_radii.sort_unstable();
    header.extend(sorted_radii.iter().map(|r| format!("omega_r{r}")));
    header.push("r_s".into());
    let mut table = CsvTable::new(header);
    for &r_s in &radii {
        let table_r = radial_eigenbasis_with(&build_graph(&ctx, r_s)?, exec)?;
        let report = reconcile(&ctx, &table_r)?;
        let order = ascending(&table_r.radii);
        let labels = character_labels(&report, table_r.rows.len());
        let rows: Vec<SphericalRowOut> = table_r
            .rows
            .iter()
            .enumerate()
            .map(|(index, row)| SphericalRowOut {
                index,
                multiplicity: row.multiplicity,
                adjacency_eigenvalue: row.adjacency_eigenvalue,
                laplace_eigenvalue: row.laplace_eigenvalue,
                characters: labels[index].clone(),
                omega: order.iter().map(|&k| row.values[k]).collect(),
            })
            .collect();
        for row in &rows {
            let mut rec = vec![
                row.index.to_string(),
                row.multiplicity.to_string(),
                fmt_f64(row.adjacency_eigenvalue),
                fmt_f64(row.laplace_eigenvalue),
                row.characters.join(";"),
            ];
            rec.extend(row.omega.iter().map(|&v| fmt_f64(v)));
            rec.push(r_s.to_string());
            table.push(rec);
        }
        data.push(SphericalData {
            r_s,
            radii: order.iter().map(|&k| table_r.radii[k]).collect(),
            orbit_sizes: order.iter().map(|&k| table_r.orbit_sizes[k]).collect(),
            distinct_adjacency_eigenvalues: table_r.distinct_adjacency_eigenvalues,
            rows,
            invariants: table_r.invariants(),
            reconciliation: report,
        });
    }
    let cfg = config(
        "spherical",
        &ctx,
        &a.field.delta,
        &a.r_s,
        &radii,
        a.output.format,
    );
    emit(cfg, data, table, &a.output)
}

#[derive(Debug, Serialize)]
struct HeatPoint {
    t: f64,
    values: Vec<f64>,
    mean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle_max_deviation: Option<f64>,
}

#[derive(Debug, Serialize)]
struct HeatData {
    r_s: u64,
    radii: Vec<u64>,
    orbit_sizes: Vec<usize>,
    series: Vec<HeatPoint>,
}

fn heat(a: &HeatArgs, cap: u64, exec: Exec) -> Result<Status> {
    let g_args = &a.graph;
    let ctx = resolve_field(g_args.field.q, &g_args.field.delta, cap)?;
    let radii = resolve_radii(&ctx, &g_args.r_s)?;
    validate_times(&a.t)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..ctx.q()).map(|r| format!("E_r{r}")));
    if a.check_oracle {
        header.push("oracle_max_deviation".into());
    }
    header.push("r_s".into());
    let mut table = CsvTable::new(header);
    let mut data = Vec::new();
    for &r_s in &radii {
        let g = build_graph(&ctx, r_s)?;
        let tab = radial_eigenbasis_with(&g, exec)?;
        let kernels = heat_kernel_spectral_grid(&tab, &a.t, exec)?;
        let oracle = if a.check_oracle {
            Some(HeatOracle::new(&g).kernel_grid(&a.t, exec)?)
        } else {
            None
        };
        let order = ascending(&tab.radii);
        let series: Vec<HeatPoint> = kernels
            .iter()
            .enumerate()
            .map(|(k, e)| HeatPoint {
                t: e.t,
                values: order.iter().map(|&i| e.by_radius[i]).collect(),
                mean: e.mean(),
                oracle_max_deviation: oracle.as_ref().map(|o| e.max_abs_diff(&o[k])),
            })
            .collect();
        for p in &series {
            let mut rec = vec![fmt_f64(p.t)];
            rec.extend(p.values.iter().map(|&v| fmt_f64(v)));
            if let Some(d) = p.oracle_max_deviation {
                rec.push(fmt_f64(d));
            }
            rec.push(r_s.to_string());
            table.push(rec);
        }
        data.push(HeatData {
            r_s,
            radii: order.iter().map(|&i| tab.radii[i]).collect(),
            orbit_sizes: order.iter().map(|&i| tab.orbit_sizes[i]).collect(),
            series,
        });
    }
    let mut cfg = config(
        "heat",
        &ctx,
        &g_args.field.delta,
        &g_args.r_s,
        &radii,
        g_args.output.format,
    );
    cfg.t_grid = a.t.clone();
    emit(cfg, data, table, &g_args.output)
}

#[derive(Debug, Serialize)]
struct ThetaRowOut {
    r: u64,
    t: f64,
    oracle: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconciled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconciled_imag: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verbatim: Option<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verbatim_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_trace_terms: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ThetaData {
    r_s: u64,
    rows: Vec<ThetaRowOut>,
    tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_reconciled_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reconciled_passes: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_verbatim_deviation: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_two_valued: Option<bool>,
}

fn theta(a: &ThetaArgs, cap: u64, exec: Exec) -> Result<Status> {
    let g_args = &a.graph;
    let ctx = resolve_field(g_args.field.q, &g_args.field.delta, cap)?;
    let radii = resolve_radii(&ctx, &g_args.r_s)?;
    validate_times(&a.t)?;
    let (rec, verb) = (a.mode.reconciled(), a.mode.verbatim());
    let mut header: Vec<&str> = vec!["r", "t", "oracle"];
    if rec {
        header.extend(["reconciled", "reconciled_imag"]);
    }
    if verb {
        header.extend([
            "verbatim_re",
            "verbatim_im",
            "verbatim_deviation",
            "zero_trace_terms",
        ]);
    }
    header.push("r_s");
    let mut table = CsvTable::new(header);
    let mut data = Vec::new();
    for &r_s in &radii {
        let report = theta_consistency_report_with(&ctx, r_s, &a.t, exec)?;
        let rows: Vec<ThetaRowOut> = report
            .rows
            .iter()
            .map(|row| ThetaRowOut {
                r: row.r,
                t: row.t,
                oracle: row.oracle,
                reconciled: rec.then_some(row.reconciled),
                reconciled_imag: rec.then_some(row.reconciled_imag),
                verbatim: verb.then_some(row.verbatim),
                verbatim_deviation: verb.then_some(row.verbatim_deviation),
                zero_trace_terms: verb.then_some(row.zero_trace_terms),
            })
            .collect();
        for row in &rows {
            let mut cells = vec![row.r.to_string(), fmt_f64(row.t), fmt_f64(row.oracle)];
            if let (Some(re), Some(im)) = (row.reconciled, row.reconciled_imag) {
                cells.extend([fmt_f64(re), fmt_f64(im)]);
            }
            if let (Some(v), Some(d), Some(z)) =
                (row.verbatim, row.verbatim_deviation, row.zero_trace_terms)
            {
                cells.extend([fmt_f64(v.re), fmt_f64(v.im), fmt_f64(d), z.to_string()]);
            }
            cells.push(r_s.to_string());
            table.push(cells);
        }
        data.push(ThetaData {
            r_s,
            rows,
            tolerance: report.tolerance,
            max_reconciled_deviation: rec.then_some(report.max_reconciled_deviation),
            reconciled_passes: rec.then_some(report.passes),
            max_verbatim_deviation: verb.then_some(report.max_verbatim_deviation),
            phase_two_valued: verb.then_some(report.phase_two_valued),
        });
    }
    let mut cfg = config(
        "theta",
        &ctx,
        &g_args.field.delta,
        &g_args.r_s,
        &radii,
        g_args.output.format,
    );
    cfg.t_grid = a.t.clone();
    cfg.mode = Some(a.mode.name().into());
    emit(cfg, data, table, &g_args.output)
}

#[derive(Debug, Serialize)]
struct VerifyData {
    passed: bool,
    check_count: usize,
    failure_count: usize,
    finding_count: usize,
    checks: Vec<CheckResult>,
}

fn opt_cell(v: Option<u64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn verify(a: &VerifyArgs, cap: u64, exec: Exec) -> Result<Status> {
    let ctxs =
        a.q.iter()
            .map(|&q| resolve_field(q, "auto", cap))
            .collect::<Result<Vec<_>>>()?;
    let summary = run_battery(
        &a.q,
        VerifyOptions {
            include_lift: a.include_lift,
            exec,
        },
    )?;
    let passed = summary.passed();
    let failures = summary.failures();
    let finding_count = summary.findings().len();
    for f in &failures {
        eprintln!(
            "FAIL {} q={} r_s={} value={:e} tolerance={:e}",
            f.name,
            opt_cell(f.q),
            opt_cell(f.r_s),
            f.value,
            f.tolerance
        );
    }
    eprintln!(
        "verify: {} checks, {} failures, {} findings",
        summary.checks.len(),
        failures.len(),
        finding_count
    );
    let mut table = CsvTable::new([
        "name",
        "q",
        "r_s",
        "passed",
        "finding",
        "value",
        "tolerance",
    ]);
    for c in &summary.checks {
        table.push(vec![
            c.name.clone(),
            opt_cell(c.q),
            opt_cell(c.r_s),
            c.passed.to_string(),
            c.finding.to_string(),
            fmt_f64(c.value),
            fmt_f64(c.tolerance),
        ]);
    }
    let data = VerifyData {
        passed,
        check_count: summary.checks.len(),
        failure_count: failures.len(),
        finding_count,
        checks: summary.checks.clone(),
    };
    let cfg = RunConfig {
        command: "verify".into(),
        q: a.q.clone(),
        delta_requested: "auto".into(),
        delta: ctxs.iter().map(FieldCtx::delta).collect(),
        r_s_requested: "all-regular".into(),
        r_s: Vec::new(),
        t_grid: Vec::new(),
        format: a.output.format.name().into(),
        mode: None,
        include_lift: a.include_lift,
    };
    emit(cfg, data, table, &a.output)?;
    Ok(if passed {
        Status::Success
    } else {
        Status::VerifyFailed
    })
}

#[derive(Debug, Serialize)]
struct ClassicalData {
    z: Complex64,
    t: f64,
    n_max: u32,
    value: Complex64,
    truncation_bound: f64,
}

fn classical(a: &ClassicalArgs) -> Result<Status> {
    let z = Complex64::new(a.z, a.z_imag);
    let th = classical_theta(z, a.t, a.n_max)?;
    let text = match a.format {
        TextFormat::Text => {
            let sign = if th.value.im.is_sign_negative() {
                '-'
            } else {
                '+'
            };
            format!(
                "z = {} {} {}i\nt = {}\nn_max = {}\ntheta = {:.16} {sign} {:.16}i\ntruncation_bound = {:e}\n",
                a.z,
                if a.z_imag.is_sign_negative() { '-' } else { '+' },
                a.z_imag.abs(),
                a.t,
                a.n_max,
                th.value.re,
                th.value.im.abs(),
                th.truncation_bound
            )
        }
        TextFormat::Json => to_json(&Document {
            config: RunConfig {
                command: "classical-theta".into(),
                q: Vec::new(),
                delta_requested: String::new(),
                delta: Vec::new(),
                r_s_requested: String::new(),
                r_s: Vec::new(),
                t_grid: vec![a.t],
                format: "json".into(),
                mode: None,
                include_lift: false,
            },
            version: VERSION.to_string(),
            data: ClassicalData {
                z,
                t: a.t,
                n_max: a.n_max,
                value: th.value,
                truncation_bound: th.truncation_bound,
            },
        })?,
    };
    write_text(a.out.as_deref(), &text)?;
    Ok(Status::Success)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_delta_is_smallest_nonsquare() {
        assert_eq!(resolve_field(3, "auto", 101).unwrap().delta(), 2);
        assert_eq!(resolve_field(7, "auto", 101).unwrap().delta(), 3);
        assert_eq!(resolve_field(5, "3", 101).unwrap().delta(), 3);
    }

    #[test]
    fn rejects_bad_fields() {
        let msg = resolve_field(4, "auto", 101).unwrap_err().to_string();
        assert!(msg.contains("q must be an odd prime"), "{msg}");
        assert!(resolve_field(5, "4", 101).is_err());
        assert!(resolve_field(5, "x", 101).is_err());
        assert!(resolve_field(13, "auto", 11).is_err());
    }

    #[test]
    fn radii_resolution() {
        let ctx = FieldCtx::new(5).unwrap();
        assert_eq!(
            resolve_radii(&ctx, "all-regular").unwrap(),
            regular_radii(&ctx)
        );
        assert_eq!(resolve_radii(&ctx, "1").unwrap(), vec![1]);
        assert!(resolve_radii(&ctx, "0").is_err());
        assert!(resolve_radii(&ctx, &ctx.four_delta().to_string()).is_err());
        assert!(resolve_radii(&ctx, "5").is_err());
    }

    #[test]
    fn time_validation() {
        assert!(validate_times(&[0.0, 1.0]).is_ok());
        assert!(validate_times(&[]).is_err());
        assert!(validate_times(&[-1.0]).is_err());
        assert!(validate_times(&[f64::NAN]).is_err());
    }

    #[test]
    fn ascending_permutation() {
        assert_eq!(ascending(&[0, 4, 1, 2, 3]), vec![0, 2, 3, 4, 1]);
    }
}
