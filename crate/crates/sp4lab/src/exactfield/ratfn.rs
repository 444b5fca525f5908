//! Rational functions over F_q in the form `t^v * n(t) / d(t)` with
//! `n(0) != 0`, `d(0) = 1` and `gcd(n, d) = 1`.

use super::gf::Gf;
use super::poly::Poly;

#[derive(Clone)]
pub struct TElem {
    gf: &'static Gf,
    v: i32,
    num: Poly,
    den: Poly,
}

impl std::fmt::Debug for TElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TElem({self})")
    }
}

impl PartialEq for TElem {
    fn eq(&self, o: &TElem) -> bool {
        std::ptr::eq(self.gf, o.gf) && self.v == o.v && self.num == o.num && self.den == o.den
    }
}
impl Eq for TElem {}

impl std::hash::Hash for TElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.v.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

impl TElem {
    pub fn zero(gf: &'static Gf) -> TElem {
        TElem { gf, v: 0, num: Poly::zero(), den: Poly::one() }
    }
    pub fn one(gf: &'static Gf) -> TElem {
        TElem { gf, v: 0, num: Poly::one(), den: Poly::one() }
    }
    pub fn t_pow(gf: &'static Gf, k: i32) -> TElem {
        TElem { gf, v: k, num: Poly::one(), den: Poly::one() }
    }
    pub fn gf(&self) -> &'static Gf {
        self.gf
    }
    pub fn from_poly(gf: &'static Gf, p: Poly) -> TElem {
        Self::normalize(gf, 0, p, Poly::one())
    }
    /// `n / d` for nonzero `d`.
    pub fn from_ratio(gf: &'static Gf, n: Poly, d: Poly) -> TElem {
        assert!(!d.is_zero(), "zero denominator");
        Self::normalize(gf, 0, n, d)
    }

    fn normalize(gf: &'static Gf, mut v: i32, mut num: Poly, mut den: Poly) -> TElem {
        if num.is_zero() {
            return TElem::zero(gf);
        }
        let on = num.order().unwrap_or(0);
        if on > 0 {
            num = num.shift_down(on);
            v += on as i32;
        }
        let od = den.order().unwrap_or(0);
        if od > 0 {
            den = den.shift_down(od);
            v -= od as i32;
        }
        if !den.is_one() {
            if den.degree() != Some(0) {
                let g = num.gcd(&den, gf);
                if g.degree() != Some(0) {
                    num = num.divrem(&g, gf).0;
                    den = den.divrem(&g, gf).0;
                }
            }
            let c = gf.inv(den.coeff(0));
            if c != 1 {
                num = num.scale(c, gf);
                den = den.scale(c, gf);
            }
        }
        TElem { gf, v, num, den }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    pub fn valuation(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            Some(self.v)
        }
    }
    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }
    pub fn numerator(&self) -> &Poly {
        &self.num
    }
    pub fn denominator(&self) -> &Poly {
        &self.den
    }
    pub fn shift(&self) -> i32 {
        self.v
    }

    pub fn neg(&self) -> TElem {
        TElem { gf: self.gf, v: self.v, num: self.num.neg(self.gf), den: self.den.clone() }
    }

    pub fn mul(&self, o: &TElem) -> TElem {
        if self.is_zero() || o.is_zero() {
            return TElem::zero(self.gf);
        }
        let gf = self.gf;
        let num = self.num.mul(&o.num, gf);
        if self.den.is_one() && o.den.is_one() {
            return TElem { gf, v: self.v + o.v, num, den: Poly::one() };
        }
        Self::normalize(gf, self.v + o.v, num, self.den.mul(&o.den, gf))
    }

    pub fn add(&self, o: &TElem) -> TElem {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let gf = self.gf;
        let (lo, hi) = if self.v <= o.v { (self, o) } else { (o, self) };
        let delta = (hi.v - lo.v) as usize;
        if lo.den.is_one() && hi.den.is_one() {
            let num = lo.num.add(&hi.num.shift_up(delta), gf);
            if delta > 0 {
                return TElem { gf, v: lo.v, num, den: Poly::one() };
            }
            return Self::normalize(gf, lo.v, num, Poly::one());
        }
        if lo.den == hi.den {
            let num = lo.num.add(&hi.num.shift_up(delta), gf);
            return Self::normalize(gf, lo.v, num, lo.den.clone());
        }
        let num = lo.num.mul(&hi.den, gf).add(&hi.num.mul(&lo.den, gf).shift_up(delta), gf);
        Self::normalize(gf, lo.v, num, lo.den.mul(&hi.den, gf))
    }

    pub fn sub(&self, o: &TElem) -> TElem {
        self.add(&o.neg())
    }

    pub fn inv(&self) -> Option<TElem> {
        if self.is_zero() {
            return None;
        }
        Some(Self::normalize(self.gf, -self.v, self.den.clone(), self.num.clone()))
    }

    /// Coefficients of the t-adic expansion in degrees `0..n`; requires valuation ≥ 0.
    pub fn expansion(&self, n: usize) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if self.v < 0 {
            return None;
        }
        let v = self.v as usize;
        if v >= n {
            return Some(Poly::zero());
        }
        let body = if self.den.is_one() {
            self.num.truncate(n - v)
        } else {
            self.num.mul(&self.den.inv_series(n - v, self.gf), self.gf).truncate(n - v)
        };
        Some(body.shift_up(v))
    }
}

impl std::fmt::Display for TElem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let term = |c: u8, e: i64| -> String {
            match (c, e) {
                (_, 0) => format!("{c}"),
                (1, 1) => "t".into(),
                (1, e) => format!("t^{e}"),
                (c, 1) => format!("{c}*t"),
                (c, e) => format!("{c}*t^{e}"),
            }
        };
        let render = |p: &Poly, shift: i64| -> String {
            let parts: Vec<String> = p
                .0
                .iter()
                .enumerate()
                .filter(|(_, &c)| c != 0)
                .map(|(k, &c)| term(c, k as i64 + shift))
                .collect();
            parts.join("+")
        };
        if self.den.is_one() {
            write!(f, "{}", render(&self.num, self.v as i64))
        } else {
            write!(f, "({})/({})", render(&self.num, self.v as i64), render(&self.den, 0))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::gf::gf;

    #[test]
    fn laurent_valuation() {
        let g = gf(3, 1).unwrap();
        // t^{-2}(1+t)
        let x = TElem::t_pow(g, -2).mul(&TElem::from_poly(g, Poly::from_coeffs(&[1, 1])));
        assert_eq!(x.valuation(), Some(-2));
    }

    #[test]
    fn rational_cancellation() {
        let g = gf(2, 2).unwrap();
        let a = TElem::from_poly(g, Poly::from_coeffs(&[1, 3]));
        let b = TElem::from_poly(g, Poly::from_coeffs(&[2, 0, 1]));
        let r = a.mul(&b).mul(&b.inv().unwrap());
        assert_eq!(r, a);
        let s = a.add(&b.inv().unwrap()).sub(&b.inv().unwrap());
        assert_eq!(s, a);
        assert!(r.is_laurent());
    }

    #[test]
    fn expansion_of_inverse() {
        let g = gf(2, 1).unwrap();
        let one_plus_t = TElem::from_poly(g, Poly::from_coeffs(&[1, 1]));
        let inv = one_plus_t.inv().unwrap();
        assert_eq!(inv.expansion(4).unwrap(), Poly::from_coeffs(&[1, 1, 1, 1]));
    }
}
