//! Cross-checks against computations that share no code with the library's
//! spectral machinery.

use fuhp_core::field::FieldCtx;
use fuhp_core::graph::{build_graph, regular_radii, Point};
use fuhp_core::heat::{heat_kernel_oracle, heat_kernel_spectral};
use fuhp_core::spherical::{match_formulas_to_oracle, radial_eigenbasis};

/// Adjacency straight from the definition: vertices `(x, y)`, `y ≠ 0`, joined
/// when `((x−x')² − δ(y−y')²) / (y y') = r_s`.
fn brute_adjacency(q: i64, delta: i64, r_s: i64) -> (Vec<(i64, i64)>, Vec<Vec<f64>>) {
    let md = |a: i64| a.rem_euclid(q);
    let inv = |a: i64| (1..q).find(|b| md(a * b) == 1).unwrap();
    let pts: Vec<(i64, i64)> = (1..q).flat_map(|y| (0..q).map(move |x| (x, y))).collect();
    let n = pts.len();
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let (x, y) = pts[i];
            let (u, v) = pts[j];
            let d = md((md((x - u) * (x - u)) - delta * md((y - v) * (y - v))) * inv(md(y * v)));
            if d == r_s {
                a[i][j] = 1.0;
            }
        }
    }
    (pts, a)
}

/// `n · exp(−tΔ) e_base` by a Taylor series in scaled form, squared back up.
fn taylor_kernel(a: &[Vec<f64>], degree: f64, t: f64, base: usize) -> Vec<f64> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            l[i][j] = if i == j { degree } else { 0.0 } - a[i][j];
        }
    }
    let squarings = 10;
    let h = t / f64::from(1 << squarings);
    // exp(−hΔ) ≈ Σ_k (−hΔ)^k / k!
    let mut term: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut sum = term.clone();
    for k in 1..30 {
        let next: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|m| term[i][m] * l[m][j]).sum::<f64>() * (-h / k as f64))
                    .collect()
            })
            .collect();
        term = next;
        for i in 0..n {
            for j in 0..n {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|m| sum[i][m] * sum[m][j]).sum())
                    .collect()
            })
            .collect();
    }
    (0..n).map(|i| sum[i][base] * n as f64).collect()
}

#[test]
fn graph_matches_definition() {
    for q in [3u64, 5, 7] {
        let ctx = FieldCtx::new(q).unwrap();
        for r_s in regular_radii(&ctx) {
            let g = build_graph(&ctx, r_s).unwrap();
            let (pts, a) = brute_adjacency(q as i64, ctx.delta() as i64, r_s as i64);
            for (i, &(x, y)) in pts.iter().enumerate() {
                let gi = g.index_of(Point::new(x as u64, y as u64));
                for (j, &(u, v)) in pts.iter().enumerate() {
                    let gj = g.index_of(Point::new(u as u64, v as u64));
                    assert_eq!(g.adjacency()[(gi, gj)], a[i][j]);
                }
            }
        }
    }
}

#[test]
fn heat_kernel_matches_taylor_series() {
    for (q, r_s) in [(3u64, 1u64), (5, 1), (5, 2), (7, 3)] {
        let ctx = FieldCtx::new(q).unwrap();
        let g = build_graph(&ctx, r_s).unwrap();
        let table = radial_eigenbasis(&g).unwrap();
        let (pts, a) = brute_adjacency(q as i64, ctx.delta() as i64, r_s as i64);
        let base = pts.iter().position(|&p| p == (0, 1)).unwrap();
        for t in [0.05, 0.5, 2.0] {
            let series = taylor_kernel(&a, (q + 1) as f64, t, base);
            let spectral = heat_kernel_spectral(&table, t).unwrap();
            let oracle = heat_kernel_oracle(&g, t, Point::BASE).unwrap();
            for (i, &(x, y)) in pts.iter().enumerate() {
                let p = Point::new(x as u64, y as u64);
                let r = fuhp_core::graph::distance(&ctx, p, Point::BASE);
                assert!((series[i] - spectral.value(r)).abs() < 1e-9, "q={q} t={t}");
                let v = oracle.by_vertex.as_ref().unwrap()[g.index_of(p)];
                assert!((series[i] - v).abs() < 1e-9);
            }
        }
    }
}

/// At `q = 3` the quotient over radii `(0, 1, 2)` is `[[0,4,0],[1,2,1],[0,4,0]]`;
/// diagonalising it by hand gives the closed form used here.
#[test]
fn q3_kernel_closed_form_and_half_life() {
    let ctx = FieldCtx::new(3).unwrap();
    let table = radial_eigenbasis(&build_graph(&ctx, 1).unwrap()).unwrap();
    let t = 2f64.ln() / 6.0;
    let e = heat_kernel_spectral(&table, t).unwrap();
    assert!((e.value(1) - 0.5).abs() < 1e-14);
    let t0 = heat_kernel_spectral(&table, 0.0).unwrap();
    assert_eq!(t0.radii, vec![0, 2, 1]);
    assert!((t0.value(0) - 6.0).abs() < 1e-13);
}

#[test]
fn closed_forms_reconcile_over_many_fields() {
    for q in [3u64, 5, 7, 11, 13] {
        let ctx = FieldCtx::new(q).unwrap();
        for r_s in regular_radii(&ctx) {
            let rep = match_formulas_to_oracle(&ctx, r_s).unwrap();
            assert!(rep.max_deviation() < 1e-9, "q={q} r_s={r_s}");
        }
    }
    // a non-default non-square changes the geometry but not the agreement
    let ctx = FieldCtx::with_delta(7, 5).unwrap();
    for r_s in regular_radii(&ctx) {
        assert!(match_formulas_to_oracle(&ctx, r_s).unwrap().is_complete());
    }
}
