//! Exact arithmetic in a global model of a non-archimedean local field.
//!
//! Mixed characteristic `Q_p` is modelled by Q with the p-adic valuation, equal
//! characteristic `F_q((t))` by F_q(t) with the t-adic valuation. The uniformizer
//! is `p`, resp. `t`, and `|x| = q^{-v(x)}`.

pub mod gf;
pub mod poly;
pub mod rat;
pub mod ratfn;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gf::Gf;
pub use poly::Poly;
pub use rat::QElem;
pub use ratfn::TElem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("mixed characteristic requires residue degree 1, got f = {0}")]
    MixedResidueDegree(u32),
    #[error("unsupported field: {0}")]
    Unsupported(String),
    #[error("cannot parse field spec {0:?} (expected Q<p> or F<q>((t)))")]
    BadSpec(String),
    #[error("element is not integral (valuation {0})")]
    NotIntegral(i32),
    #[error("v0 undefined in characteristic 2")]
    CharTwo,
    #[error("cannot parse element {0:?}")]
    BadElement(String),
    #[error("residue level {0} too large for this field")]
    LevelTooLarge(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    MixedChar,
    EqualChar,
}

/// A local field `Q_p` or `F_q((t))` together with its residue-field tables.
#[derive(Clone, Copy)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub p: u32,
    pub f: u32,
    pub q: u64,
    gf: &'static Gf,
}

impl PartialEq for FieldSpec {
    fn eq(&self, o: &FieldSpec) -> bool {
        self.kind == o.kind && self.p == o.p && self.f == o.f
    }
}
impl Eq for FieldSpec {}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Largest prime accepted in mixed characteristic.
pub const MAX_MIXED_PRIME: u32 = 65521;

pub fn make_field(kind: FieldKind, p: u32, f: u32) -> Result<FieldSpec, FieldError> {
    if !gf::is_prime(p as u64) {
        return Err(FieldError::NotPrime(p as u64));
    }
    if f == 0 {
        return Err(FieldError::Unsupported("residue degree must be at least 1".into()));
    }
    match kind {
        FieldKind::MixedChar => {
            if f != 1 {
                return Err(FieldError::MixedResidueDegree(f));
            }
            if p > MAX_MIXED_PRIME {
                return Err(FieldError::Unsupported(format!("p = {p} too large")));
            }
            // the residue field F_p is only tabulated for small p
            let table = if p <= gf::MAX_GF_PRIME { gf::gf(p, 1)? } else { gf::gf(2, 1)? };
            Ok(FieldSpec { kind, p, f, q: p as u64, gf: table })
        }
        FieldKind::EqualChar => {
            let table = gf::gf(p, f)?;
            Ok(FieldSpec { kind, p, f, q: table.q as u64, gf: table })
        }
    }
}

impl std::str::FromStr for FieldSpec {
    type Err = FieldError;
    /// `Q<p>` or `F<q>((t))`, case-sensitive.
    fn from_str(s: &str) -> Result<FieldSpec, FieldError> {
        let bad = || FieldError::BadSpec(s.to_string());
        let digits = |d: &str| -> Result<u64, FieldError> {
            if d.is_empty() || !d.bytes().all(|b| b.is_ascii_digit()) || d.starts_with('0') {
                return Err(bad());
            }
            d.parse::<u64>().map_err(|_| bad())
        };
        if let Some(rest) = s.strip_prefix('Q') {
            let p = digits(rest)?;
            let p32 = u32::try_from(p).map_err(|_| bad())?;
            return make_field(FieldKind::MixedChar, p32, 1);
        }
        if let Some(rest) = s.strip_prefix('F').and_then(|r| r.strip_suffix("((t))")) {
            let q = digits(rest)?;
            let (p, f) = prime_power(q).ok_or(FieldError::NotPrime(q))?;
            return make_field(FieldKind::EqualChar, p, f);
        }
        Err(bad())
    }
}

fn prime_power(q: u64) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let mut p = 2u64;
    while p * p <= q && q % p != 0 {
        p += 1;
    }
    if q % p != 0 {
        p = q;
    }
    let (mut r, mut f) = (q, 0u32);
    while r % p == 0 {
        r /= p;
        f += 1;
    }
    (r == 1 && gf::is_prime(p)).then_some((p as u32, f))
}

/// Element of `O / π^n O`, stored by its canonical digit code: the integer in
/// `[0, p^n)` (mixed characteristic) or `sum c_k q^k` for the truncated
/// polynomial `sum c_k t^k` (equal characteristic, `c_k` an F_q index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueElem {
    pub level: u32,
    pub code: u64,
}

impl FieldSpec {
    pub fn name(&self) -> String {
        match self.kind {
            FieldKind::MixedChar => format!("Q{}", self.p),
            FieldKind::EqualChar => format!("F{}((t))", self.q),
        }
    }
    pub fn gf(&self) -> &'static Gf {
        self.gf
    }
    /// Characteristic of F itself (0 for `Q_p`).
    pub fn characteristic(&self) -> u32 {
        match self.kind {
            FieldKind::MixedChar => 0,
            FieldKind::EqualChar => self.p,
        }
    }
    pub fn is_char_two(&self) -> bool {
        self.kind == FieldKind::EqualChar && self.p == 2
    }

    pub fn zero(&self) -> FieldElem {
        match self.kind {
            FieldKind::MixedChar => FieldElem::Q(QElem::zero(self.p)),
            FieldKind::EqualChar => FieldElem::T(TElem::zero(self.gf)),
        }
    }
    pub fn one(&self) -> FieldElem {
        self.int(1)
    }
    /// Image of an integer.
    pub fn int(&self, n: i64) -> FieldElem {
        match self.kind {
            FieldKind::MixedChar => FieldElem::Q(QElem::from_i128(self.p, n as i128)),
            FieldKind::EqualChar => {
                FieldElem::T(TElem::from_poly(self.gf, Poly::constant(self.gf.from_int(n))))
            }
        }
    }
    /// `π^k`.
    pub fn pi_pow(&self, k: i32) -> FieldElem {
        match self.kind {
            FieldKind::MixedChar => FieldElem::Q(QElem::pi_pow(self.p, k)),
            FieldKind::EqualChar => FieldElem::T(TElem::t_pow(self.gf, k)),
        }
    }
    pub fn pi(&self) -> FieldElem {
        self.pi_pow(1)
    }
    /// Constant lift of a residue-field element (an F_q index).
    pub fn residue_const(&self, c: u64) -> FieldElem {
        self.sigma(&ResidueElem { level: 1, code: c })
    }

    /// Valuation of 2; fails in equal characteristic 2.
    pub fn two_valuation(&self) -> Result<u32, FieldError> {
        if self.is_char_two() {
            return Err(FieldError::CharTwo);
        }
        Ok(if self.kind == FieldKind::MixedChar && self.p == 2 { 1 } else { 0 })
    }

    /// `q^n`, the size of `O/π^n O`.
    pub fn ring_size(&self, n: u32) -> Result<u64, FieldError> {
        self.q.checked_pow(n).ok_or(FieldError::LevelTooLarge(n))
    }

    pub fn residue(&self, level: u32, code: u64) -> ResidueElem {
        debug_assert!(self.ring_size(level).map(|s| code < s).unwrap_or(true));
        ResidueElem { level, code }
    }

    fn digits(&self, r: &ResidueElem) -> Poly {
        let mut c = Vec::with_capacity(r.level as usize);
        let mut x = r.code;
        for _ in 0..r.level {
            c.push((x % self.q) as u8);
            x /= self.q;
        }
        Poly::from_coeffs(&c)
    }
    fn code_of_poly(&self, p: &Poly, level: u32) -> u64 {
        (0..level as usize).rev().fold(0u64, |acc, k| acc * self.q + p.coeff(k) as u64)
    }

    /// Canonical section: the digit integer, resp. the truncated polynomial.
    pub fn sigma(&self, r: &ResidueElem) -> FieldElem {
        match self.kind {
            FieldKind::MixedChar => FieldElem::Q(QElem::from_i128(self.p, r.code as i128)),
            FieldKind::EqualChar => FieldElem::T(TElem::from_poly(self.gf, self.digits(r))),
        }
    }

    /// Reduction `O -> O/π^n O`.
    pub fn reduce(&self, x: &FieldElem, n: u32) -> Result<ResidueElem, FieldError> {
        self.ring_size(n)?;
        if let Some(v) = x.valuation() {
            if v < 0 {
                return Err(FieldError::NotIntegral(v));
            }
        }
        match x {
            FieldElem::Q(a) => {
                let r = a.reduce_mod(n).ok_or(FieldError::NotIntegral(a.valuation().unwrap_or(0)))?;
                Ok(ResidueElem { level: n, code: r.to_u64().expect("residue fits the ring size") })
            }
            FieldElem::T(a) => {
                let e = a.expansion(n as usize).ok_or(FieldError::NotIntegral(a.valuation().unwrap_or(0)))?;
                Ok(ResidueElem { level: n, code: self.code_of_poly(&e, n) })
            }
        }
    }

    pub fn res_add(&self, a: &ResidueElem, b: &ResidueElem) -> ResidueElem {
        debug_assert_eq!(a.level, b.level);
        match self.kind {
            FieldKind::MixedChar => {
                let m = self.q.pow(a.level) as u128;
                ResidueElem { level: a.level, code: ((a.code as u128 + b.code as u128) % m) as u64 }
            }
            FieldKind::EqualChar => {
                let s = self.digits(a).add(&self.digits(b), self.gf);
                ResidueElem { level: a.level, code: self.code_of_poly(&s, a.level) }
            }
        }
    }
    pub fn res_neg(&self, a: &ResidueElem) -> ResidueElem {
        match self.kind {
            FieldKind::MixedChar => {
                let m = self.q.pow(a.level);
                ResidueElem { level: a.level, code: (m - a.code) % m }
            }
            FieldKind::EqualChar => {
                let s = self.digits(a).neg(self.gf);
                ResidueElem { level: a.level, code: self.code_of_poly(&s, a.level) }
            }
        }
    }
    pub fn res_sub(&self, a: &ResidueElem, b: &ResidueElem) -> ResidueElem {
        self.res_add(a, &self.res_neg(b))
    }
    pub fn res_mul(&self, a: &ResidueElem, b: &ResidueElem) -> ResidueElem {
        debug_assert_eq!(a.level, b.level);
        match self.kind {
            FieldKind::MixedChar => {
                let m = self.q.pow(a.level) as u128;
                ResidueElem { level: a.level, code: ((a.code as u128 * b.code as u128) % m) as u64 }
            }
            FieldKind::EqualChar => {
                let s = self.digits(a).mul(&self.digits(b), self.gf);
                ResidueElem { level: a.level, code: self.code_of_poly(&s.truncate(a.level as usize), a.level) }
            }
        }
    }
    /// `π^k ε` in `O/π^n O` for a residue-field element ε.
    pub fn res_pi_times(&self, level: u32, k: u32, eps: u64) -> ResidueElem {
        if k >= level {
            return ResidueElem { level, code: 0 };
        }
        ResidueElem { level, code: eps * self.q.pow(k) }
    }
    /// Valuation of a residue class (`level` for zero).
    pub fn res_valuation(&self, r: &ResidueElem) -> u32 {
        if r.code == 0 {
            return r.level;
        }
        match self.kind {
            FieldKind::MixedChar => {
                let (mut c, mut v) = (r.code, 0);
                while c % self.q == 0 {
                    c /= self.q;
                    v += 1;
                }
                v
            }
            FieldKind::EqualChar => self.digits(r).order().unwrap_or(r.level as usize) as u32,
        }
    }
    /// Reduction of a residue class to a lower level.
    pub fn res_truncate(&self, r: &ResidueElem, level: u32) -> ResidueElem {
        ResidueElem { level, code: r.code % self.q.pow(level.min(r.level)) }
    }

    /// Residue-field arithmetic on indices.
    pub fn ff_mul(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            FieldKind::MixedChar => (a * b) % self.q,
            FieldKind::EqualChar => self.gf.mul(a as u8, b as u8) as u64,
        }
    }
    pub fn ff_add(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            FieldKind::MixedChar => (a + b) % self.q,
            FieldKind::EqualChar => self.gf.add(a as u8, b as u8) as u64,
        }
    }
    pub fn ff_sub(&self, a: u64, b: u64) -> u64 {
        match self.kind {
            FieldKind::MixedChar => (a + self.q - b) % self.q,
            FieldKind::EqualChar => self.gf.sub(a as u8, b as u8) as u64,
        }
    }
    pub fn ff_inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero residue");
        match self.kind {
            FieldKind::MixedChar => {
                let p = self.q as i128;
                let mut e = (p - 2) as u32;
                let (mut base, mut acc) = (a as i128 % p, 1i128);
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * base % p;
                    }
                    base = base * base % p;
                    e >>= 1;
                }
                acc as u64
            }
            FieldKind::EqualChar => self.gf.inv(a as u8) as u64,
        }
    }
    /// Image of the integer 2 in the residue field (nonzero unless p = 2).
    pub fn ff_int(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }

    /// Parse an element: rationals `a/b` in mixed characteristic; in equal
    /// characteristic sums of terms `c`, `t`, `t^e`, `c*t^e` (c an F_q index,
    /// e possibly negative), optionally `(num)/(den)`.
    pub fn parse_elem(&self, s: &str) -> Result<FieldElem, FieldError> {
        let bad = || FieldError::BadElement(s.to_string());
        let s = s.trim();
        match self.kind {
            FieldKind::MixedChar => {
                let (n, d) = match s.split_once('/') {
                    Some((n, d)) => (n.trim(), d.trim()),
                    None => (s, "1"),
                };
                let n: BigInt = n.parse().map_err(|_| bad())?;
                let d: BigInt = d.parse().map_err(|_| bad())?;
                if d == BigInt::from(0) {
                    return Err(bad());
                }
                Ok(FieldElem::Q(QElem::from_bigrational(self.p, &BigRational::new(n, d))))
            }
            FieldKind::EqualChar => {
                if let Some((n, d)) = split_ratio(s) {
                    let n = self.parse_laurent(n).ok_or_else(bad)?;
                    let d = self.parse_laurent(d).ok_or_else(bad)?;
                    return n.checked_div(&d).ok_or_else(bad);
                }
                self.parse_laurent(s).ok_or_else(bad)
            }
        }
    }

    fn parse_laurent(&self, s: &str) -> Option<FieldElem> {
        let s = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut acc = self.zero();
        for term in s.split('+') {
            let term = term.trim();
            if term.is_empty() {
                return None;
            }
            let (coef, pow) = if let Some((c, rest)) = term.split_once('*') {
                (c.trim().parse::<u64>().ok()?, parse_t_power(rest.trim())?)
            } else if term.starts_with('t') {
                (1, parse_t_power(term)?)
            } else {
                (term.parse::<u64>().ok()?, 0)
            };
            if coef >= self.q {
                return None;
            }
            acc = &acc + &(&self.residue_const(coef) * &self.pi_pow(pow));
        }
        Some(acc)
    }
}

fn split_ratio(s: &str) -> Option<(&str, &str)> {
    let idx = s.find(")/(")?;
    Some((&s[..idx + 1], &s[idx + 2..]))
}

fn parse_t_power(s: &str) -> Option<i32> {
    if s == "t" {
        return Some(1);
    }
    s.strip_prefix("t^")?.parse().ok()
}

/// Element of F (rational number or rational function) with exact valuation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FieldElem {
    Q(QElem),
    T(TElem),
}

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        match self {
            FieldElem::Q(a) => a.is_zero(),
            FieldElem::T(a) => a.is_zero(),
        }
    }
    /// Valuation; `None` stands for `+∞`.
    pub fn valuation(&self) -> Option<i32> {
        match self {
            FieldElem::Q(a) => a.valuation(),
            FieldElem::T(a) => a.valuation(),
        }
    }
    /// `(v, log_q |x|)`; the norm exponent is `-v` and `None` encodes `|0| = 0`.
    pub fn valuation_and_norm(&self) -> (Option<i32>, Option<i32>) {
        let v = self.valuation();
        (v, v.map(|v| -v))
    }
    pub fn is_integral(&self) -> bool {
        self.valuation().map_or(true, |v| v >= 0)
    }
    pub fn is_unit(&self) -> bool {
        self.valuation() == Some(0)
    }
    pub fn inv(&self) -> Option<FieldElem> {
        match self {
            FieldElem::Q(a) => a.inv().map(FieldElem::Q),
            FieldElem::T(a) => a.inv().map(FieldElem::T),
        }
    }
    pub fn checked_div(&self, o: &FieldElem) -> Option<FieldElem> {
        o.inv().map(|i| self * &i)
    }
    pub fn square(&self) -> FieldElem {
        self * self
    }
    /// `v(self - o) >= k`.
    pub fn congruent(&self, o: &FieldElem, k: i32) -> bool {
        (self - o).valuation().map_or(true, |v| v >= k)
    }
    pub fn to_f64(&self) -> Option<f64> {
        match self {
            FieldElem::Q(a) => Some(a.to_f64()),
            FieldElem::T(_) => None,
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldElem::Q(a) => write!(f, "{a}"),
            FieldElem::T(a) => write!(f, "{a}"),
        }
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl<'a> $tr<&'a FieldElem> for &'a FieldElem {
            type Output = FieldElem;
            fn $m(self, o: &'a FieldElem) -> FieldElem {
                match (self, o) {
                    (FieldElem::Q(a), FieldElem::Q(b)) => FieldElem::Q(a.$m(b)),
                    (FieldElem::T(a), FieldElem::T(b)) => FieldElem::T(a.$m(b)),
                    _ => panic!("mixed field kinds in arithmetic"),
                }
            }
        }
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                (&self).$m(&o)
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        match self {
            FieldElem::Q(a) => FieldElem::Q(a.neg()),
            FieldElem::T(a) => FieldElem::T(a.neg()),
        }
    }
}
impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        -&self
    }
}

/// Minimum of valuations with `None` as `+∞`.
pub fn vmin(a: Option<i32>, b: Option<i32>) -> Option<i32> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}
