//! Dense polynomials over F_q, coefficients low degree first, trailing zeros trimmed.

use smallvec::SmallVec;

use super::gf::Gf;

pub type Coeffs = SmallVec<[u8; 16]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly(pub Coeffs);

impl Poly {
    pub fn zero() -> Poly {
        Poly(Coeffs::new())
    }
    pub fn one() -> Poly {
        Poly(smallvec::smallvec![1])
    }
    pub fn constant(c: u8) -> Poly {
        let mut p = Poly(smallvec::smallvec![c]);
        p.trim();
        p
    }
    pub fn from_coeffs(c: &[u8]) -> Poly {
        let mut p = Poly(Coeffs::from_slice(c));
        p.trim();
        p
    }
    fn trim(&mut self) {
        while self.0.last() == Some(&0) {
            self.0.pop();
        }
    }
    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0] == 1
    }
    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }
    pub fn coeff(&self, k: usize) -> u8 {
        self.0.get(k).copied().unwrap_or(0)
    }
    pub fn lead(&self) -> u8 {
        self.0.last().copied().unwrap_or(0)
    }
    /// Number of leading zero coefficients at t = 0 (the t-adic order); `None` for zero.
    pub fn order(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0)
    }
    /// Divide by t^k, assuming the low k coefficients vanish.
    pub fn shift_down(&self, k: usize) -> Poly {
        Poly(Coeffs::from_slice(&self.0[k.min(self.0.len())..]))
    }
    /// Multiply by t^k.
    pub fn shift_up(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = Coeffs::with_capacity(self.0.len() + k);
        c.extend(std::iter::repeat(0).take(k));
        c.extend_from_slice(&self.0);
        Poly(c)
    }
    pub fn truncate(&self, n: usize) -> Poly {
        let mut p = Poly(Coeffs::from_slice(&self.0[..n.min(self.0.len())]));
        p.trim();
        p
    }

    pub fn add(&self, other: &Poly, gf: &Gf) -> Poly {
        let (long, short) = if self.0.len() >= other.0.len() { (self, other) } else { (other, self) };
        let mut c = long.0.clone();
        for (i, &b) in short.0.iter().enumerate() {
            c[i] = gf.add(c[i], b);
        }
        let mut p = Poly(c);
        p.trim();
        p
    }
    pub fn neg(&self, gf: &Gf) -> Poly {
        Poly(self.0.iter().map(|&c| gf.neg(c)).collect())
    }
    pub fn sub(&self, other: &Poly, gf: &Gf) -> Poly {
        self.add(&other.neg(gf), gf)
    }
    pub fn scale(&self, s: u8, gf: &Gf) -> Poly {
        if s == 0 {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|&c| gf.mul(c, s)).collect())
    }
    pub fn mul(&self, other: &Poly, gf: &Gf) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut c: Coeffs = smallvec::smallvec![0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                c[i + j] = gf.add(c[i + j], gf.mul(a, b));
            }
        }
        let mut p = Poly(c);
        p.trim();
        p
    }
    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Poly, gf: &Gf) -> (Poly, Poly) {
        let dd = d.degree().expect("polynomial division by zero");
        let inv_lead = gf.inv(d.lead());
        let mut r = self.0.clone();
        if r.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut qc: Coeffs = smallvec::smallvec![0; r.len() - dd];
        for k in (dd..r.len()).rev() {
            let c = gf.mul(r[k], inv_lead);
            if c == 0 {
                continue;
            }
            qc[k - dd] = c;
            for (i, &di) in d.0.iter().enumerate() {
                let idx = k - dd + i;
                r[idx] = gf.sub(r[idx], gf.mul(c, di));
            }
        }
        let mut q = Poly(qc);
        q.trim();
        let mut rem = Poly(r);
        rem.trim();
        (q, rem)
    }
    pub fn gcd(&self, other: &Poly, gf: &Gf) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b, gf);
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let s = gf.inv(a.lead());
        a.scale(s, gf)
    }
    /// Power series inverse modulo t^n; requires a nonzero constant term.
    pub fn inv_series(&self, n: usize, gf: &Gf) -> Poly {
        let c0 = self.coeff(0);
        assert!(c0 != 0, "series inverse needs a unit constant term");
        let ic = gf.inv(c0);
        let mut out: Coeffs = smallvec::smallvec![0; n];
        for k in 0..n {
            // out_k = ic * (delta_k0 - sum_{i=1..k} a_i out_{k-i})
            let mut acc = if k == 0 { 1 } else { 0 };
            for i in 1..=k {
                acc = gf.sub(acc, gf.mul(self.coeff(i), out[k - i]));
            }
            out[k] = gf.mul(ic, acc);
        }
        let mut p = Poly(out);
        p.trim();
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::gf::gf;

    #[test]
    fn divrem_reconstructs() {
        let g = gf(3, 1).unwrap();
        let a = Poly::from_coeffs(&[1, 2, 0, 1, 2]);
        let d = Poly::from_coeffs(&[2, 1, 1]);
        let (q, r) = a.divrem(&d, g);
        assert_eq!(q.mul(&d, g).add(&r, g), a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn series_inverse() {
        let g = gf(2, 2).unwrap();
        let a = Poly::from_coeffs(&[3, 1, 2]);
        let inv = a.inv_series(6, g);
        assert_eq!(a.mul(&inv, g).truncate(6), Poly::one());
    }

    #[test]
    fn gcd_is_monic_common_factor() {
        let g = gf(5, 1).unwrap();
        let f1 = Poly::from_coeffs(&[1, 1]);
        let f2 = Poly::from_coeffs(&[2, 0, 1]);
        let f3 = Poly::from_coeffs(&[3, 1]);
        let a = f1.mul(&f2, g);
        let b = f1.mul(&f3, g).scale(3, g);
        assert_eq!(a.gcd(&b, g), f1);
    }
}
