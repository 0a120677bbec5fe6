//! Multiplicative characters of `F_q^×`, of the norm-one subgroup `U`, and of
//! `F_q(√δ)^×`, all indexed through the generators fixed by [`FieldCtx`].

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ExtElement, FieldCtx};

/// `exp(2πi k / n)`, exact at quarter turns.
pub fn root_of_unity(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    if (4 * k).is_multiple_of(n) {
        return match 4 * k / n {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    let (s, c) = (TAU * k as f64 / n as f64).sin_cos();
    Complex64::new(c, s)
}

/// `β_j(g^m) = exp(2πi jm / (q − 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultChar {
    pub j: u64,
}

/// `ν_j(ζ^m) = exp(2πi jm / (q² − 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NonDecompChar {
    pub j: u64,
}

impl MultChar {
    pub fn eval(self, ctx: &FieldCtx, a: u64) -> Result<Complex64> {
        beta(ctx, self.j, a)
    }

    /// `β(−1) = ±1`.
    pub fn at_minus_one(self, ctx: &FieldCtx) -> Complex64 {
        beta(ctx, self.j, ctx.q() - 1).expect("−1 ≠ 0")
    }

    /// Index of the inverse character.
    pub fn inverse(self, ctx: &FieldCtx) -> MultChar {
        let n = ctx.q() - 1;
        MultChar {
            j: (n - self.j % n) % n,
        }
    }
}

impl NonDecompChar {
    pub fn eval(self, ctx: &FieldCtx, u: ExtElement) -> Result<Complex64> {
        nu(ctx, self.j, u)
    }

    /// Whether `ν ≠ ν⁻¹` on `U`, the condition for a cuspidal spherical function.
    pub fn is_valid_cuspidal(self, ctx: &FieldCtx) -> bool {
        !is_self_inverse_on_u(ctx, self.j)
    }

    /// Restriction of `ν_j` to `U` only depends on `j mod (q + 1)`.
    pub fn u_class(self, ctx: &FieldCtx) -> u64 {
        self.j % (ctx.q() + 1)
    }
}

pub fn beta(ctx: &FieldCtx, j: u64, a: u64) -> Result<Complex64> {
    let m = ctx
        .dlog(a)
        .ok_or_else(|| Error::Domain("β is not defined at 0".into()))?;
    let n = ctx.q() - 1;
    Ok(root_of_unity((j % n) * m, n))
}

/// `ν_j` on all of `F_q(√δ)^×`.
pub fn nu_ext(ctx: &FieldCtx, j: u64, z: ExtElement) -> Result<Complex64> {
    let m = ctx
        .dlog_ext(z)
        .ok_or_else(|| Error::Domain("ν is not defined at 0".into()))?;
    let n = ctx.ext_order();
    Ok(root_of_unity((j % n) * m, n))
}

/// `ν_j` restricted to the norm-one subgroup.
pub fn nu(ctx: &FieldCtx, j: u64, u: ExtElement) -> Result<Complex64> {
    if ctx.ext_norm(u) != 1 {
        return Err(Error::Domain(format!(
            "({} + {}√δ) has norm {} ≠ 1",
            u.a,
            u.b,
            ctx.ext_norm(u)
        )));
    }
    nu_ext(ctx, j, u)
}

/// Sign character of `U`: `+1` on squares of `U`, `−1` otherwise.
pub fn nu0(ctx: &FieldCtx, u: ExtElement) -> Result<i8> {
    let k = ctx
        .u_index(u)
        .ok_or_else(|| Error::Domain(format!("({} + {}√δ) is not in U", u.a, u.b)))?;
    Ok(if k % 2 == 0 { 1 } else { -1 })
}

/// `ν_j² = 1` on `U`, i.e. `(q − 1) j ∈ {0, (q² − 1)/2} mod q² − 1`.
pub fn is_self_inverse_on_u(ctx: &FieldCtx, j: u64) -> bool {
    let n = ctx.ext_order();
    let v = (ctx.q() - 1) * (j % n) % n;
    v == 0 || 2 * v == n
}

/// One representative index `j ∈ 1..=q` per class `{ν, ν⁻¹}` of valid
/// cuspidal characters (the smaller index of each pair).
pub fn cuspidal_classes(ctx: &FieldCtx) -> Vec<NonDecompChar> {
    let m = ctx.q() + 1;
    (1..m)
        .filter(|&j| !is_self_inverse_on_u(ctx, j) && j < m - j)
        .map(|j| NonDecompChar { j })
        .collect()
}

/// One representative per class `{β, β⁻¹}` (smaller index kept).
pub fn principal_classes(ctx: &FieldCtx) -> Vec<MultChar> {
    let n = ctx.q() - 1;
    (0..n)
        .filter(|&j| j <= (n - j) % n)
        .map(|j| MultChar { j })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub q: u64,
    /// Largest deviation of `Σ_a β_j(a) conj(β_k(a))` from `(q − 1) [j = k]`.
    pub base_residual: f64,
    /// Largest deviation of `Σ_u ν_j(u) conj(ν_k(u))` from `(q + 1) [j = k]`.
    pub unit_residual: f64,
    /// Largest `| |χ(x)| − 1 |` seen.
    pub magnitude_residual: f64,
    pub max_residual: f64,
}

impl OrthogonalityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_residual <= tol
    }
}

pub fn character_orthogonality_check(ctx: &FieldCtx) -> OrthogonalityReport {
    let q = ctx.q();
    let mut magnitude: f64 = 0.0;

    let base_table: Vec<Vec<Complex64>> = (0..q - 1)
        .map(|j| (1..q).map(|a| beta(ctx, j, a).expect("a ≠ 0")).collect())
        .collect();
    let u = ctx.norm_one_subgroup();
    let unit_table: Vec<Vec<Complex64>> = (0..=q)
        .map(|j| u.iter().map(|&x| nu(ctx, j, x).expect("x ∈ U")).collect())
        .collect();

    let residual = |table: &[Vec<Complex64>], order: f64, magnitude: &mut f64| {
        let mut worst: f64 = 0.0;
        for (j, row_j) in table.iter().enumerate() {
            for v in row_j {
                *magnitude = magnitude.max((v.norm() - 1.0).abs());
            }
            for (k, row_k) in table.iter().enumerate() {
                let s: Complex64 = row_j.iter().zip(row_k).map(|(a, b)| a * b.conj()).sum();
                let expected = if j == k { order } else { 0.0 };
                worst = worst.max((s - expected).norm());
            }
        }
        worst
    };
    let base_residual = residual(&base_table, (q - 1) as f64, &mut magnitude);
    let unit_residual = residual(&unit_table, (q + 1) as f64, &mut magnitude);
    OrthogonalityReport {
        q,
        base_residual,
        unit_residual,
        magnitude_residual: magnitude,
        max_residual: base_residual.max(unit_residual).max(magnitude),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn beta_examples() {
        let c3 = FieldCtx::new(3).unwrap();
        assert!(close(beta(&c3, 1, 2).unwrap(), Complex64::new(-1.0, 0.0)));
        let c5 = FieldCtx::new(5).unwrap();
        assert!(close(beta(&c5, 0, 3).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(beta(&c5, 2, 4).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(matches!(beta(&c5, 1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn nu_examples() {
        let c3 = FieldCtx::new(3).unwrap();
        let one = ExtElement::ONE;
        for j in 0..8 {
            assert!(close(nu(&c3, j, one).unwrap(), Complex64::new(1.0, 0.0)));
        }
        let gen_u = c3.zeta_pow(2);
        assert!(close(nu(&c3, 1, gen_u).unwrap(), Complex64::new(0.0, 1.0)));
        for u in c3.norm_one_subgroup() {
            assert!(close(nu(&c3, 8, u).unwrap(), Complex64::new(1.0, 0.0)));
        }
        assert!(matches!(nu(&c3, 1, c3.zeta()), Err(Error::Domain(_))));
    }

    #[test]
    fn nu0_examples() {
        let c3 = FieldCtx::new(3).unwrap();
        let gen_u = c3.zeta_pow(2);
        assert_eq!(nu0(&c3, ExtElement::ONE).unwrap(), 1);
        assert_eq!(nu0(&c3, gen_u).unwrap(), -1);
        assert_eq!(nu0(&c3, c3.ext_mul(gen_u, gen_u)).unwrap(), 1);
        assert!(nu0(&c3, c3.zeta()).is_err());
    }

    #[test]
    fn nu0_is_the_order_two_character_of_u() {
        for q in [3u64, 5, 7, 13] {
            let c = FieldCtx::new(q).unwrap();
            let half = q.div_ceil(2);
            for (k, &u) in c.norm_one_subgroup().iter().enumerate() {
                let s = nu0(&c, u).unwrap();
                assert_eq!(s as i64, if k % 2 == 0 { 1 } else { -1 });
                // ν₀ = ν_{(q+1)/2} on U
                assert!(close(
                    nu(&c, half, u).unwrap(),
                    Complex64::new(s as f64, 0.0)
                ));
            }
        }
    }

    #[test]
    fn beta_is_multiplicative() {
        for q in [3u64, 5, 7] {
            let c = FieldCtx::new(q).unwrap();
            for j in 0..q - 1 {
                for a in 1..q {
                    for b in 1..q {
                        let lhs = beta(&c, j, c.mul(a, b)).unwrap();
                        let rhs = beta(&c, j, a).unwrap() * beta(&c, j, b).unwrap();
                        assert!(close(lhs, rhs));
                    }
                }
            }
        }
    }

    #[test]
    fn nu_restricted_to_base_field_is_a_beta() {
        for q in [3u64, 5, 7] {
            let c = FieldCtx::new(q).unwrap();
            for j in 0..c.ext_order() {
                let found = (0..q - 1).any(|jp| {
                    (1..q).all(|a| {
                        close(
                            nu_ext(&c, j, c.ext_from_base(a)).unwrap(),
                            beta(&c, jp, a).unwrap(),
                        )
                    })
                });
                assert!(found, "q={q} j={j}");
            }
        }
    }

    #[test]
    fn self_inverse_predicate_matches_definition() {
        for q in [3u64, 5, 7, 13] {
            let c = FieldCtx::new(q).unwrap();
            let u = c.norm_one_subgroup();
            for j in 0..c.ext_order() {
                let squared_trivial = u
                    .iter()
                    .all(|&x| close(nu(&c, j, x).unwrap().powu(2), Complex64::new(1.0, 0.0)));
                assert_eq!(is_self_inverse_on_u(&c, j), squared_trivial);
            }
        }
    }

    #[test]
    fn class_counts_add_up_to_q() {
        for q in [3u64, 5, 7, 11, 13] {
            let c = FieldCtx::new(q).unwrap();
            let p = principal_classes(&c).len() as u64;
            let k = cuspidal_classes(&c).len() as u64;
            assert_eq!(p, q.div_ceil(2));
            assert_eq!(k, (q - 1) / 2);
        }
    }

    #[test]
    fn orthogonality() {
        for q in [3u64, 5, 7] {
            let rep = character_orthogonality_check(&FieldCtx::new(q).unwrap());
            assert!(rep.passes(1e-12), "{rep:?}");
        }
    }
}
