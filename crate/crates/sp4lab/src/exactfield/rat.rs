//! Rationals in valuation form `p^v * n / d` with `p ∤ n`, `p ∤ d`, `d > 0`.
//!
//! Small unit parts live in `i128`; anything that overflows moves to `BigRational`
//! and is shrunk back when it fits again, so the representation stays canonical.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Unit {
    Small(i128, i128),
    Big(Box<(BigInt, BigInt)>),
}

/// Element of Q with its p-adic valuation exposed.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QElem {
    p: u32,
    v: i32,
    unit: Unit,
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

fn pow_i128(p: u32, e: u32) -> Option<i128> {
    (p as i128).checked_pow(e)
}

impl QElem {
    pub fn zero(p: u32) -> QElem {
        QElem { p, v: 0, unit: Unit::Small(0, 1) }
    }
    pub fn one(p: u32) -> QElem {
        QElem { p, v: 0, unit: Unit::Small(1, 1) }
    }
    /// `p^k`.
    pub fn pi_pow(p: u32, k: i32) -> QElem {
        QElem { p, v: k, unit: Unit::Small(1, 1) }
    }
    pub fn prime(&self) -> u32 {
        self.p
    }
    pub fn from_i128(p: u32, n: i128) -> QElem {
        Self::from_frac(p, n, 1)
    }
    /// `n / d` for `d != 0`.
    pub fn from_frac(p: u32, n: i128, d: i128) -> QElem {
        assert!(d != 0, "zero denominator");
        Self::normalize_small(p, 0, n, d).unwrap_or_else(|| {
            Self::normalize_big(p, 0, BigInt::from(n), BigInt::from(d))
        })
    }
    pub fn from_bigrational(p: u32, r: &BigRational) -> QElem {
        Self::normalize_big(p, 0, r.numer().clone(), r.denom().clone())
    }

    fn normalize_small(p: u32, mut v: i32, mut n: i128, mut d: i128) -> Option<QElem> {
        if n == 0 {
            return Some(QElem::zero(p));
        }
        if d < 0 {
            n = n.checked_neg()?;
            d = d.checked_neg()?;
        }
        let pp = p as i128;
        while n % pp == 0 {
            n /= pp;
            v += 1;
        }
        while d % pp == 0 {
            d /= pp;
            v -= 1;
        }
        let g = gcd_i128(n, d);
        Some(QElem { p, v, unit: Unit::Small(n / g, d / g) })
    }

    fn normalize_big(p: u32, mut v: i32, mut n: BigInt, mut d: BigInt) -> QElem {
        if n.is_zero() {
            return QElem::zero(p);
        }
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        let pp = BigInt::from(p);
        loop {
            let (q, r) = n.div_rem(&pp);
            if !r.is_zero() {
                break;
            }
            n = q;
            v += 1;
        }
        loop {
            let (q, r) = d.div_rem(&pp);
            if !r.is_zero() {
                break;
            }
            d = q;
            v -= 1;
        }
        let g = n.gcd(&d);
        if !g.is_one() {
            n /= &g;
            d /= &g;
        }
        match (n.to_i128(), d.to_i128()) {
            (Some(a), Some(b)) => QElem { p, v, unit: Unit::Small(a, b) },
            _ => QElem { p, v, unit: Unit::Big(Box::new((n, d))) },
        }
    }

    fn big_parts(&self) -> (BigInt, BigInt) {
        match &self.unit {
            Unit::Small(n, d) => (BigInt::from(*n), BigInt::from(*d)),
            Unit::Big(b) => (b.0.clone(), b.1.clone()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.unit, Unit::Small(0, _))
    }
    /// Valuation, `None` for zero.
    pub fn valuation(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            Some(self.v)
        }
    }

    pub fn neg(&self) -> QElem {
        let unit = match &self.unit {
            Unit::Small(n, d) => match n.checked_neg() {
                Some(m) => Unit::Small(m, *d),
                None => return Self::normalize_big(self.p, self.v, -BigInt::from(*n), BigInt::from(*d)),
            },
            Unit::Big(b) => Unit::Big(Box::new((-b.0.clone(), b.1.clone()))),
        };
        QElem { p: self.p, v: self.v, unit }
    }

    pub fn mul(&self, o: &QElem) -> QElem {
        debug_assert_eq!(self.p, o.p);
        if self.is_zero() || o.is_zero() {
            return QElem::zero(self.p);
        }
        let v = self.v + o.v;
        if let (Unit::Small(n1, d1), Unit::Small(n2, d2)) = (&self.unit, &o.unit) {
            let g1 = gcd_i128(*n1, *d2);
            let g2 = gcd_i128(*n2, *d1);
            let n = (n1 / g1).checked_mul(n2 / g2);
            let d = (d1 / g2).checked_mul(d2 / g1);
            if let (Some(n), Some(d)) = (n, d) {
                return QElem { p: self.p, v, unit: Unit::Small(n, d) };
            }
        }
        let (n1, d1) = self.big_parts();
        let (n2, d2) = o.big_parts();
        Self::normalize_big(self.p, v, n1 * n2, d1 * d2)
    }

    pub fn add(&self, o: &QElem) -> QElem {
        debug_assert_eq!(self.p, o.p);
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.v <= o.v { (self, o) } else { (o, self) };
        let delta = (hi.v - lo.v) as u32;
        if let (Unit::Small(n1, d1), Unit::Small(n2, d2)) = (&lo.unit, &hi.unit) {
            let attempt = || -> Option<QElem> {
                let pd = pow_i128(self.p, delta)?;
                let a = n1.checked_mul(*d2)?;
                let b = n2.checked_mul(*d1)?.checked_mul(pd)?;
                let n = a.checked_add(b)?;
                let d = d1.checked_mul(*d2)?;
                Self::normalize_small(self.p, lo.v, n, d)
            };
            if let Some(r) = attempt() {
                return r;
            }
        }
        let (n1, d1) = lo.big_parts();
        let (n2, d2) = hi.big_parts();
        let pd = num_traits::pow(BigInt::from(self.p), delta as usize);
        Self::normalize_big(self.p, lo.v, &n1 * &d2 + n2 * d1.clone() * pd, d1 * d2)
    }

    pub fn sub(&self, o: &QElem) -> QElem {
        self.add(&o.neg())
    }

    pub fn inv(&self) -> Option<QElem> {
        if self.is_zero() {
            return None;
        }
        Some(match &self.unit {
            Unit::Small(n, d) => match Self::normalize_small(self.p, -self.v, *d, *n) {
                Some(r) => r,
                None => Self::normalize_big(self.p, -self.v, BigInt::from(*d), BigInt::from(*n)),
            },
            Unit::Big(b) => Self::normalize_big(self.p, -self.v, b.1.clone(), b.0.clone()),
        })
    }

    /// Exact value as a `BigRational`.
    pub fn to_bigrational(&self) -> BigRational {
        let (n, d) = self.big_parts();
        let pk = num_traits::pow(BigInt::from(self.p), self.v.unsigned_abs() as usize);
        if self.v >= 0 {
            BigRational::new(n * pk, d)
        } else {
            BigRational::new(n, d * pk)
        }
    }

    /// Residue modulo `p^n` as an integer in `[0, p^n)`; requires valuation ≥ 0.
    pub fn reduce_mod(&self, n: u32) -> Option<BigInt> {
        let modulus = num_traits::pow(BigInt::from(self.p), n as usize);
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.v < 0 {
            return None;
        }
        if self.v as u32 >= n {
            return Some(BigInt::zero());
        }
        let (num, den) = self.big_parts();
        let inv = modinv(&den.mod_floor(&modulus), &modulus)?;
        let pk = num_traits::pow(BigInt::from(self.p), self.v as usize);
        Some((num * inv * pk).mod_floor(&modulus))
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.to_bigrational();
        r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
    }
}

fn modinv(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

impl std::fmt::Display for QElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let r = self.to_bigrational();
        if r.denom().is_one() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_form() {
        let x = QElem::from_frac(3, 18, 5);
        assert_eq!(x.valuation(), Some(2));
        assert_eq!(QElem::from_i128(2, 8).valuation(), Some(3));
        assert_eq!(QElem::zero(5).valuation(), None);
    }

    #[test]
    fn overflow_moves_to_big_and_back() {
        let x = QElem::from_i128(7, i128::MAX / 3);
        let y = x.mul(&x).mul(&x);
        let z = y.mul(&x.inv().unwrap()).mul(&x.inv().unwrap());
        assert_eq!(z, x);
        let s = x.add(&x.neg());
        assert!(s.is_zero());
    }

    #[test]
    fn reduction() {
        let x = QElem::from_i128(3, 5);
        assert_eq!(x.reduce_mod(1).unwrap(), BigInt::from(2));
        let half = QElem::from_frac(3, 1, 2);
        assert_eq!(half.reduce_mod(2).unwrap(), BigInt::from(5));
        assert!(QElem::from_frac(3, 1, 3).reduce_mod(1).is_none());
    }
}
