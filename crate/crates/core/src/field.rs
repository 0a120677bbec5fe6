//! Arithmetic in `F_q` (q an odd prime) and in the quadratic extension
//! `F_q(√δ)`, with deterministic generators and discrete-log tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest modulus the lookup tables are built for (`q²` entries each).
pub const MAX_MODULUS: u64 = 4093;

const NO_LOG: u32 = u32::MAX;

/// `a + b√δ` with `a, b` residues mod q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtElement {
    pub a: u64,
    pub b: u64,
}

impl ExtElement {
    pub const ONE: ExtElement = ExtElement { a: 1, b: 0 };

    pub const fn new(a: u64, b: u64) -> Self {
        ExtElement { a, b }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn check_modulus(q: u64) -> Result<()> {
    if q < 3 || q.is_multiple_of(2) || !is_prime(q) {
        return Err(Error::InvalidParameter(format!(
            "q must be an odd prime (got {q})"
        )));
    }
    if q > MAX_MODULUS {
        return Err(Error::InvalidParameter(format!(
            "q = {q} exceeds the supported maximum {MAX_MODULUS}"
        )));
    }
    Ok(())
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % q;
        }
        base = base * base % q;
        exp >>= 1;
    }
    acc
}

fn squares(q: u64) -> Vec<bool> {
    let mut sq = vec![false; q as usize];
    for x in 0..q {
        sq[(x * x % q) as usize] = true;
    }
    sq
}

/// Smallest positive residue that is not a square mod `q`.
pub fn find_nonsquare(q: u64) -> Result<u64> {
    check_modulus(q)?;
    let sq = squares(q);
    Ok((1..q)
        .find(|&a| !sq[a as usize])
        .expect("an odd prime field has non-squares"))
}

/// Smallest generator of `F_q^×`.
pub fn base_generator(q: u64) -> Result<u64> {
    check_modulus(q)?;
    let order = q - 1;
    let factors = prime_factors(order);
    Ok((2..q)
        .find(|&g| factors.iter().all(|p| pow_mod(g, order / p, q) != 1))
        .expect("F_q^× is cyclic"))
}

fn ext_mul_raw(q: u64, delta: u64, z: ExtElement, w: ExtElement) -> ExtElement {
    ExtElement {
        a: (z.a * w.a + delta * (z.b * w.b % q)) % q,
        b: (z.a * w.b + z.b * w.a) % q,
    }
}

fn ext_pow_raw(q: u64, delta: u64, mut z: ExtElement, mut exp: u64) -> ExtElement {
    let mut acc = ExtElement::ONE;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ext_mul_raw(q, delta, acc, z);
        }
        z = ext_mul_raw(q, delta, z, z);
        exp >>= 1;
    }
    acc
}

/// Lexicographically smallest `(a, b)` of multiplicative order `q² − 1` in
/// `F_q(√δ)`.
pub fn ext_generator(q: u64, delta: u64) -> Result<ExtElement> {
    check_modulus(q)?;
    let order = q * q - 1;
    let factors = prime_factors(order);
    for a in 0..q {
        for b in 0..q {
            let z = ExtElement { a, b };
            if z.is_zero() {
                continue;
            }
            if factors
                .iter()
                .all(|p| ext_pow_raw(q, delta, z, order / p) != ExtElement::ONE)
            {
                return Ok(z);
            }
        }
    }
    Err(Error::InvalidParameter(format!(
        "{delta} is a square mod {q}; F_q(√δ) is not a field"
    )))
}

/// Which multiplicative group a generator is requested for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Base,
    Extension,
}

/// Arithmetic context for `F_q` and `F_q(√δ)`.
///
/// Immutable after construction; all lookups are table-driven.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    q: u64,
    delta: u64,
    g: u64,
    zeta: ExtElement,
    is_square: Vec<bool>,
    dlog_q: Vec<u32>,
    exp_q: Vec<u64>,
    dlog_q2: Vec<u32>,
    exp_q2: Vec<ExtElement>,
}

impl FieldCtx {
    /// Context with δ the smallest non-square.
    pub fn new(q: u64) -> Result<Self> {
        let delta = find_nonsquare(q)?;
        Self::with_delta(q, delta)
    }

    pub fn with_delta(q: u64, delta: u64) -> Result<Self> {
        check_modulus(q)?;
        let is_square = squares(q);
        if delta == 0 || delta >= q || is_square[delta as usize] {
            return Err(Error::InvalidParameter(format!(
                "δ = {delta} is not a non-square residue mod {q}"
            )));
        }
        let g = base_generator(q)?;
        let zeta = ext_generator(q, delta)?;

        let mut dlog_q = vec![NO_LOG; q as usize];
        let mut exp_q = Vec::with_capacity((q - 1) as usize);
        let mut x = 1;
        for k in 0..q - 1 {
            dlog_q[x as usize] = k as u32;
            exp_q.push(x);
            x = x * g % q;
        }

        let order2 = q * q - 1;
        let mut dlog_q2 = vec![NO_LOG; (q * q) as usize];
        let mut exp_q2 = Vec::with_capacity(order2 as usize);
        let mut z = ExtElement::ONE;
        for k in 0..order2 {
            dlog_q2[(z.a * q + z.b) as usize] = k as u32;
            exp_q2.push(z);
            z = ext_mul_raw(q, delta, z, zeta);
        }

        let ctx = FieldCtx {
            q,
            delta,
            g,
            zeta,
            is_square,
            dlog_q,
            exp_q,
            dlog_q2,
            exp_q2,
        };
        debug_assert!(ctx.dlog_q[1..].iter().all(|&k| k != NO_LOG));
        Ok(ctx)
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn delta(&self) -> u64 {
        self.delta
    }

    /// Generator of `F_q^×`.
    pub fn g(&self) -> u64 {
        self.g
    }

    /// Generator of `F_q(√δ)^×`.
    pub fn zeta(&self) -> ExtElement {
        self.zeta
    }

    pub fn find_generator(&self, which: Which) -> ExtElement {
        match which {
            Which::Base => ExtElement::new(self.g, 0),
            Which::Extension => self.zeta,
        }
    }

    /// `4δ mod q`, the radius of the point `−√δ`.
    pub fn four_delta(&self) -> u64 {
        4 * self.delta % self.q
    }

    /// Order of `F_q(√δ)^×`.
    pub fn ext_order(&self) -> u64 {
        self.q * self.q - 1
    }

    // ---- base field ----

    pub fn reduce(&self, a: i64) -> u64 {
        a.rem_euclid(self.q as i64) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.q
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.q - b % self.q) % self.q
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.q
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.q - a % self.q) % self.q
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.q;
        (a != 0).then(|| pow_mod(a, self.q - 2, self.q))
    }

    pub fn is_square(&self, a: u64) -> bool {
        self.is_square[(a % self.q) as usize]
    }

    /// Exponent of `a` with respect to [`FieldCtx::g`]; `None` for zero.
    pub fn dlog(&self, a: u64) -> Option<u64> {
        let k = self.dlog_q[(a % self.q) as usize];
        (k != NO_LOG).then_some(k as u64)
    }

    pub fn g_pow(&self, k: u64) -> u64 {
        self.exp_q[(k % (self.q - 1)) as usize]
    }

    /// The quadratic character ε, with ε(0) = 0.
    pub fn quadratic_character(&self, a: u64) -> i8 {
        let a = a % self.q;
        if a == 0 {
            0
        } else if self.is_square[a as usize] {
            1
        } else {
            -1
        }
    }

    // ---- extension field ----

    pub fn ext(&self, a: u64, b: u64) -> ExtElement {
        ExtElement::new(a % self.q, b % self.q)
    }

    pub fn ext_from_base(&self, a: u64) -> ExtElement {
        self.ext(a, 0)
    }

    pub fn ext_add(&self, z: ExtElement, w: ExtElement) -> ExtElement {
        ExtElement::new(self.add(z.a, w.a), self.add(z.b, w.b))
    }

    pub fn ext_sub(&self, z: ExtElement, w: ExtElement) -> ExtElement {
        ExtElement::new(self.sub(z.a, w.a), self.sub(z.b, w.b))
    }

    pub fn ext_neg(&self, z: ExtElement) -> ExtElement {
        ExtElement::new(self.neg(z.a), self.neg(z.b))
    }

    pub fn ext_mul(&self, z: ExtElement, w: ExtElement) -> ExtElement {
        ext_mul_raw(self.q, self.delta, z, w)
    }

    pub fn ext_pow(&self, z: ExtElement, exp: u64) -> ExtElement {
        ext_pow_raw(self.q, self.delta, z, exp)
    }

    /// Galois conjugate `a − b√δ`.
    pub fn ext_conj(&self, z: ExtElement) -> ExtElement {
        ExtElement::new(z.a, self.neg(z.b))
    }

    /// `N(a + b√δ) = a² − δb²`.
    pub fn ext_norm(&self, z: ExtElement) -> u64 {
        self.sub(
            z.a * z.a % self.q,
            self.delta * (z.b * z.b % self.q) % self.q,
        )
    }

    /// `Tr(a + b√δ) = 2a`.
    pub fn ext_trace(&self, z: ExtElement) -> u64 {
        2 * z.a % self.q
    }

    pub fn ext_inv(&self, z: ExtElement) -> Option<ExtElement> {
        let n_inv = self.inv(self.ext_norm(z))?;
        let c = self.ext_conj(z);
        Some(ExtElement::new(c.a * n_inv % self.q, c.b * n_inv % self.q))
    }

    /// Exponent of `z` with respect to [`FieldCtx::zeta`]; `None` for zero.
    pub fn dlog_ext(&self, z: ExtElement) -> Option<u64> {
        let k = self.dlog_q2[((z.a % self.q) * self.q + z.b % self.q) as usize];
        (k != NO_LOG).then_some(k as u64)
    }

    /// `ζ^k`.
    pub fn zeta_pow(&self, k: u64) -> ExtElement {
        self.exp_q2[(k % self.ext_order()) as usize]
    }

    /// The norm-one subgroup `U`, listed as powers of its generator `ζ^(q−1)`.
    pub fn norm_one_subgroup(&self) -> Vec<ExtElement> {
        (0..=self.q)
            .map(|k| self.zeta_pow(k * (self.q - 1)))
            .collect()
    }

    /// Position of `u` in [`FieldCtx::norm_one_subgroup`], if `N(u) = 1`.
    pub fn u_index(&self, u: ExtElement) -> Option<u64> {
        let k = self.dlog_ext(u)?;
        (k % (self.q - 1) == 0).then(|| k / (self.q - 1))
    }
}
