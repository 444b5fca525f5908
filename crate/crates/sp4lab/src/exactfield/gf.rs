//! Finite fields F_q in a polynomial basis over F_p.
//!
//! An element is stored as its index `c_0 + c_1 p + ... + c_{f-1} p^{f-1}`, where
//! `c_0 + c_1 x + ...` is its residue modulo the stored irreducible polynomial.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::FieldError;

/// Stored irreducible polynomials for the non-prime residue fields, low degree first.
const IRREDUCIBLES: &[(u32, u32, &[u8])] = &[
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (3, 2, &[1, 0, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (5, 2, &[2, 4, 1]),
];

/// Largest supported prime for equal characteristic (tables are indexed by `u8`).
pub const MAX_GF_PRIME: u32 = 251;

/// Addition and multiplication tables of F_q.
#[derive(Debug)]
pub struct Gf {
    pub p: u32,
    pub f: u32,
    pub q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>,
    trace: Vec<u8>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn stored_irreducible(p: u32, f: u32) -> Option<&'static [u8]> {
    IRREDUCIBLES
        .iter()
        .find(|(pp, ff, _)| *pp == p && *ff == f)
        .map(|(_, _, m)| *m)
}

impl Gf {
    fn build(p: u32, f: u32) -> Result<Gf, FieldError> {
        if !is_prime(p as u64) {
            return Err(FieldError::NotPrime(p as u64));
        }
        if p > MAX_GF_PRIME {
            return Err(FieldError::Unsupported(format!("F_{p}: prime too large")));
        }
        let modulus: Vec<u8> = if f == 1 {
            vec![0, 1]
        } else {
            stored_irreducible(p, f)
                .ok_or_else(|| FieldError::Unsupported(format!("no stored irreducible for q = {p}^{f}")))?
                .to_vec()
        };
        let q = (p as usize).pow(f);
        if q > 256 {
            return Err(FieldError::Unsupported(format!("q = {q} exceeds 256")));
        }
        let digits = |mut a: usize| -> Vec<u32> {
            (0..f)
                .map(|_| {
                    let d = (a % p as usize) as u32;
                    a /= p as usize;
                    d
                })
                .collect()
        };
        let index = |ds: &[u32]| -> u8 {
            ds.iter().rev().fold(0usize, |acc, &d| acc * p as usize + d as usize) as u8
        };
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        for a in 0..q {
            let da = digits(a);
            for b in 0..q {
                let db = digits(b);
                let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = index(&s);
                // schoolbook product, then reduce by the monic modulus
                let mut prod = vec![0u32; 2 * f as usize];
                for (i, x) in da.iter().enumerate() {
                    for (j, y) in db.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                for deg in (f as usize..2 * f as usize).rev() {
                    let c = prod[deg];
                    if c != 0 {
                        for (k, &m) in modulus.iter().enumerate().take(f as usize) {
                            let t = deg - f as usize + k;
                            prod[t] = (prod[t] + (p - c) * m as u32) % p;
                        }
                        prod[deg] = 0;
                    }
                }
                mul[a * q + b] = index(&prod[..f as usize]);
            }
        }
        let mut neg = vec![0u8; q];
        let mut inv = vec![0u8; q];
        for a in 0..q {
            for b in 0..q {
                if add[a * q + b] == 0 {
                    neg[a] = b as u8;
                }
                if mul[a * q + b] == 1 {
                    inv[a] = b as u8;
                }
            }
        }
        for a in 1..q {
            if mul[a * q + inv[a] as usize] != 1 {
                return Err(FieldError::Unsupported(format!("stored modulus for q = {q} is reducible")));
            }
        }
        let mut gf = Gf { p, f, q, add, mul, neg, inv, trace: vec![0; q] };
        for a in 0..q {
            let mut acc = 0u8;
            let mut pw = a as u8;
            for _ in 0..f {
                acc = gf.add(acc, pw);
                pw = gf.pow(pw, p as u64);
            }
            gf.trace[a] = acc;
        }
        Ok(gf)
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }
    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }
    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }
    /// Inverse of a nonzero element.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0, "inverse of zero in F_q");
        self.inv[a as usize]
    }
    pub fn pow(&self, a: u8, mut e: u64) -> u8 {
        let (mut base, mut acc) = (a, 1u8);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
    /// Absolute trace to F_p, returned as an integer in `[0, p)`.
    #[inline]
    pub fn trace(&self, a: u8) -> u32 {
        self.trace[a as usize] as u32
    }
    /// Image of an integer under Z -> F_p -> F_q.
    pub fn from_int(&self, n: i64) -> u8 {
        n.rem_euclid(self.p as i64) as u8
    }
}

/// Shared table for F_{p^f}; built once per process.
pub fn gf(p: u32, f: u32) -> Result<&'static Gf, FieldError> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), &'static Gf>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(g) = guard.get(&(p, f)) {
        return Ok(g);
    }
    let g: &'static Gf = Box::leak(Box::new(Gf::build(p, f)?));
    guard.insert((p, f), g);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_axioms_small_tables() {
        for (p, f) in [(2, 1), (3, 1), (2, 2), (2, 3), (3, 2), (2, 4), (5, 2), (3, 3)] {
            let g = gf(p, f).unwrap();
            for a in 0..g.q as u8 {
                assert_eq!(g.add(a, 0), a);
                assert_eq!(g.mul(a, 1), a);
                assert_eq!(g.add(a, g.neg(a)), 0);
                if a != 0 {
                    assert_eq!(g.mul(a, g.inv(a)), 1);
                }
                for b in 0..g.q as u8 {
                    assert_eq!(g.mul(a, b), g.mul(b, a));
                    for c in 0..g.q as u8 {
                        let lhs = g.mul(a, g.add(b, c));
                        let rhs = g.add(g.mul(a, b), g.mul(a, c));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn f4_uses_x2_plus_x_plus_1() {
        let g = gf(2, 2).unwrap();
        // x is index 2, x^2 = x + 1 is index 3
        assert_eq!(g.mul(2, 2), 3);
        assert_eq!(g.trace(2), 1);
        assert_eq!(g.trace(1), 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(gf(4, 1), Err(FieldError::NotPrime(4))));
        assert!(gf(7, 2).is_err());
    }
}
