//! The group `Sp_4(F)` for the skew form `J`, its norms and Cartan invariants,
//! named generators, and membership in `K = Sp_4(O)` and its subgroups.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactfield::{vmin, FieldElem, FieldSpec};

/// Index pairs `(r1, r2)` with `r1 < r2`, in lexicographic order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Dense 4×4 matrix over F.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat4(pub [[FieldElem; 4]; 4]);

impl Mat4 {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> FieldElem) -> Mat4 {
        Mat4(std::array::from_fn(|r| std::array::from_fn(|c| f(r, c))))
    }
    pub fn zero(k: &FieldSpec) -> Mat4 {
        Mat4::from_fn(|_, _| k.zero())
    }
    pub fn identity(k: &FieldSpec) -> Mat4 {
        Mat4::from_fn(|r, c| if r == c { k.one() } else { k.zero() })
    }
    pub fn diag(k: &FieldSpec, d: [FieldElem; 4]) -> Mat4 {
        let mut m = Mat4::zero(k);
        for (i, x) in d.into_iter().enumerate() {
            m.0[i][i] = x;
        }
        m
    }
    /// `diag(π^{e0}, π^{e1}, π^{e2}, π^{e3})`.
    pub fn pi_diag(k: &FieldSpec, e: [i32; 4]) -> Mat4 {
        Mat4::diag(k, e.map(|x| k.pi_pow(x)))
    }
    /// Matrix from integer entries.
    pub fn from_ints(k: &FieldSpec, a: [[i64; 4]; 4]) -> Mat4 {
        Mat4::from_fn(|r, c| k.int(a[r][c]))
    }
    pub fn get(&self, r: usize, c: usize) -> &FieldElem {
        &self.0[r][c]
    }
    pub fn set(&mut self, r: usize, c: usize, x: FieldElem) {
        self.0[r][c] = x;
    }
    pub fn mul(&self, o: &Mat4) -> Mat4 {
        Mat4::from_fn(|r, c| {
            let mut acc: Option<FieldElem> = None;
            for k in 0..4 {
                let (a, b) = (&self.0[r][k], &o.0[k][c]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                let t = a * b;
                acc = Some(match acc {
                    None => t,
                    Some(s) => &s + &t,
                });
            }
            acc.unwrap_or_else(|| {
                let z = &self.0[r][0];
                z - z
            })
        })
    }
    pub fn transpose(&self) -> Mat4 {
        Mat4::from_fn(|r, c| self.0[c][r].clone())
    }
    pub fn neg(&self) -> Mat4 {
        Mat4::from_fn(|r, c| -&self.0[r][c])
    }
    pub fn sub(&self, o: &Mat4) -> Mat4 {
        Mat4::from_fn(|r, c| &self.0[r][c] - &o.0[r][c])
    }
    pub fn scale(&self, s: &FieldElem) -> Mat4 {
        Mat4::from_fn(|r, c| &self.0[r][c] * s)
    }
    /// 2×2 minor on rows `rr` and columns `cc`.
    pub fn minor(&self, rr: (usize, usize), cc: (usize, usize)) -> FieldElem {
        let m = &self.0;
        &(&m[rr.0][cc.0] * &m[rr.1][cc.1]) - &(&m[rr.0][cc.1] * &m[rr.1][cc.0])
    }
    /// Minimum entry valuation (`None` for the zero matrix).
    pub fn min_entry_valuation(&self) -> Option<i32> {
        self.0.iter().flatten().fold(None, |acc, x| vmin(acc, x.valuation()))
    }
    /// Minimum valuation over all 36 2×2 minors.
    pub fn min_minor_valuation(&self) -> Option<i32> {
        let mut acc = None;
        for rr in PAIRS {
            for cc in PAIRS {
                acc = vmin(acc, self.minor(rr, cc).valuation());
            }
        }
        acc
    }
    /// `log_q ‖m‖`.
    pub fn norm_exp(&self) -> Option<i32> {
        self.min_entry_valuation().map(|v| -v)
    }
    /// `log_q ‖Λ² m‖`.
    pub fn wedge_norm_exp(&self) -> Option<i32> {
        self.min_minor_valuation().map(|v| -v)
    }
    pub fn is_integral(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_integral())
    }
    pub fn is_zero(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_zero())
    }
    /// Entries as strings, row-major.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.0.iter().map(|row| row.iter().map(|x| x.to_string()).collect()).collect()
    }
    /// Determinant by cofactor expansion along 2×2 minors.
    pub fn det(&self) -> FieldElem {
        // Laplace expansion over complementary row pairs (0,1) | (2,3)
        let mut acc: Option<FieldElem> = None;
        for (idx, cc) in PAIRS.iter().enumerate() {
            let comp = PAIRS[5 - idx];
            let sign = match idx {
                0 | 2 | 3 | 5 => 1,
                _ => -1,
            };
            let t = &self.minor((0, 1), *cc) * &self.minor((2, 3), comp);
            let t = if sign < 0 { -t } else { t };
            acc = Some(match acc {
                None => t,
                Some(s) => &s + &t,
            });
        }
        acc.expect("six terms")
    }
}

/// The fixed skew form.
pub fn j_form(k: &FieldSpec) -> Mat4 {
    Mat4::from_ints(k, [[0, 0, 0, 1], [0, 0, 1, 0], [0, -1, 0, 0], [-1, 0, 0, 0]])
}

/// Element of `Sp_4(F)`; `certified` records that `ᵗg J g = J` was checked exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub m: Mat4,
    pub certified: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Sp4Error {
    #[error("not symplectic: entry ({row},{col}) of tgJg - J is {value}")]
    NotSymplectic { row: usize, col: usize, value: String },
    #[error("invalid generator parameter: {0}")]
    BadParameter(String),
    #[error("internal soundness failure: computed invariants ({i},{j}) are not dominant")]
    Soundness { i: i32, j: i32 },
    #[error("zero matrix has no Cartan invariants")]
    ZeroMatrix,
}

/// `ᵗm J m = J` checked entry by entry.
pub fn symplectic_check(k: &FieldSpec, m: Mat4) -> Result<GroupElement, Sp4Error> {
    let j = j_form(k);
    let form = m.transpose().mul(&j).mul(&m);
    for r in 0..4 {
        for c in 0..4 {
            let d = form.get(r, c) - j.get(r, c);
            if !d.is_zero() {
                return Err(Sp4Error::NotSymplectic { row: r + 1, col: c + 1, value: d.to_string() });
            }
        }
    }
    Ok(GroupElement { m, certified: true })
}

impl GroupElement {
    /// Wrap a matrix that is symplectic by construction (checked in debug builds).
    pub fn trusted(k: &FieldSpec, m: Mat4) -> GroupElement {
        debug_assert!(symplectic_check(k, m.clone()).is_ok(), "trusted matrix is not symplectic");
        GroupElement { m, certified: true }
    }
    pub fn identity(k: &FieldSpec) -> GroupElement {
        GroupElement { m: Mat4::identity(k), certified: true }
    }
    pub fn mul(&self, o: &GroupElement) -> GroupElement {
        GroupElement { m: self.m.mul(&o.m), certified: self.certified && o.certified }
    }
    /// `g^{-1} = -J ᵗg J`.
    pub fn inverse(&self, k: &FieldSpec) -> GroupElement {
        let j = j_form(k);
        GroupElement { m: j.mul(&self.m.transpose()).mul(&j).neg(), certified: self.certified }
    }
}

/// Cartan pair `(i, j)` with `i ≥ j ≥ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CartanPair {
    pub i: i32,
    pub j: i32,
}

impl CartanPair {
    pub fn new(i: i32, j: i32) -> CartanPair {
        CartanPair { i, j }
    }
    pub fn length(&self) -> i32 {
        self.i + self.j
    }
    pub fn in_lambda(&self) -> bool {
        self.i >= self.j && self.j >= 0
    }
}

impl std::fmt::Display for CartanPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Cartan invariants as read off from `‖g‖ = q^i` and `‖Λ²g‖ = q^{i+j}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CartanInfo {
    pub pair: CartanPair,
    pub norm_exp: i32,
    pub wedge_norm_exp: i32,
    pub length: i32,
}

/// Cartan invariants of any matrix, without the dominance assertion.
pub fn raw_invariants(m: &Mat4) -> Result<(i32, i32), Sp4Error> {
    let i = m.norm_exp().ok_or(Sp4Error::ZeroMatrix)?;
    let s = m.wedge_norm_exp().ok_or(Sp4Error::ZeroMatrix)?;
    Ok((i, s - i))
}

pub fn cartan_invariants(g: &GroupElement) -> Result<CartanInfo, Sp4Error> {
    let (i, j) = raw_invariants(&g.m)?;
    let pair = CartanPair { i, j };
    if g.certified && !pair.in_lambda() {
        return Err(Sp4Error::Soundness { i, j });
    }
    Ok(CartanInfo { pair, norm_exp: i, wedge_norm_exp: i + j, length: i + j })
}

/// `D(i,j) = diag(π^{-i}, π^{-j}, π^{j}, π^{i})`.
pub fn d_matrix(k: &FieldSpec, i: i32, j: i32) -> GroupElement {
    GroupElement { m: Mat4::pi_diag(k, [-i, -j, j, i]), certified: true }
}

/// 2×2 matrix over F, row-major.
pub type Mat2 = [[FieldElem; 2]; 2];

fn det2(a: &Mat2) -> FieldElem {
    &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0])
}

#[derive(Clone, Debug)]
pub enum Generator {
    J,
    D(i32, i32),
    W21,
    W32,
    Mu21(FieldElem),
    Mu32(FieldElem),
    Mu31(FieldElem),
    Mu41(FieldElem),
    DiagEF(FieldElem, FieldElem),
    K1Embed(Mat2),
    K2Embed(Mat2),
}

fn need_integral(x: &FieldElem, what: &str) -> Result<(), Sp4Error> {
    if x.is_integral() {
        Ok(())
    } else {
        Err(Sp4Error::BadParameter(format!("{what} must lie in O, got {x}")))
    }
}

/// `μ21(a)`, `μ32(a)`, `μ31(a)`, `μ41(a)` without parameter checks.
pub fn mu(k: &FieldSpec, which: u8, a: &FieldElem) -> Mat4 {
    let mut m = Mat4::identity(k);
    match which {
        21 => {
            m.set(1, 0, a.clone());
            m.set(3, 2, -a);
        }
        32 => m.set(2, 1, a.clone()),
        31 => {
            m.set(2, 0, a.clone());
            m.set(3, 1, a.clone());
        }
        41 => m.set(3, 0, a.clone()),
        _ => panic!("unknown root element {which}"),
    }
    m
}

pub fn w21(k: &FieldSpec) -> Mat4 {
    Mat4::from_ints(k, [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
}

pub fn w32(k: &FieldSpec) -> Mat4 {
    Mat4::from_ints(k, [[1, 0, 0, 0], [0, 0, 1, 0], [0, -1, 0, 0], [0, 0, 0, 1]])
}

/// `diag(e, f, f^{-1}, e^{-1})`; `e`, `f` nonzero.
pub fn diag_ef(k: &FieldSpec, e: &FieldElem, f: &FieldElem) -> Mat4 {
    Mat4::diag(k, [e.clone(), f.clone(), f.inv().expect("f != 0"), e.inv().expect("e != 0")])
}

/// `diag(A, Q ᵗA^{-1} Q)` for invertible `A`.
pub fn k1_embed(k: &FieldSpec, a: &Mat2) -> Mat4 {
    let d = det2(a).inv().expect("A invertible");
    // ᵗA^{-1} = (1/det) [[a11, -a10], [-a01, a00]]; conjugating by Q reverses both indices
    let tinv = [[&a[1][1] * &d, -(&a[1][0] * &d)], [-(&a[0][1] * &d), &a[0][0] * &d]];
    let mut m = Mat4::zero(k);
    for r in 0..2 {
        for c in 0..2 {
            m.set(r, c, a[r][c].clone());
            m.set(2 + r, 2 + c, tinv[1 - r][1 - c].clone());
        }
    }
    m
}

/// `diag(1, B, 1)`.
pub fn k2_embed(k: &FieldSpec, b: &Mat2) -> Mat4 {
    let mut m = Mat4::identity(k);
    for r in 0..2 {
        for c in 0..2 {
            m.set(1 + r, 1 + c, b[r][c].clone());
        }
    }
    m
}

/// Build a named generator, validating its parameters.
pub fn generator(k: &FieldSpec, g: &Generator) -> Result<GroupElement, Sp4Error> {
    let m = match g {
        Generator::J => j_form(k),
        Generator::D(i, j) => return Ok(d_matrix(k, *i, *j)),
        Generator::W21 => w21(k),
        Generator::W32 => w32(k),
        Generator::Mu21(a) | Generator::Mu32(a) | Generator::Mu31(a) | Generator::Mu41(a) => {
            need_integral(a, "root parameter")?;
            let which = match g {
                Generator::Mu21(_) => 21,
                Generator::Mu32(_) => 32,
                Generator::Mu31(_) => 31,
                _ => 41,
            };
            mu(k, which, a)
        }
        Generator::DiagEF(e, f) => {
            if !e.is_unit() || !f.is_unit() {
                return Err(Sp4Error::BadParameter("diagEF needs units e, f".into()));
            }
            diag_ef(k, e, f)
        }
        Generator::K1Embed(a) => {
            a.iter().flatten().try_for_each(|x| need_integral(x, "A entry"))?;
            if !det2(a).is_unit() {
                return Err(Sp4Error::BadParameter("A must lie in GL2(O)".into()));
            }
            k1_embed(k, a)
        }
        Generator::K2Embed(b) => {
            b.iter().flatten().try_for_each(|x| need_integral(x, "B entry"))?;
            if det2(b) != k.one() {
                return Err(Sp4Error::BadParameter("B must lie in SL2(O)".into()));
            }
            k2_embed(k, b)
        }
    };
    symplectic_check(k, m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubgroupTag {
    K,
    K1,
    K2,
    B1,
    B2,
    Blow,
}

fn zero_outside(m: &Mat4, keep: impl Fn(usize, usize) -> bool) -> bool {
    (0..4).all(|r| (0..4).all(|c| keep(r, c) || m.get(r, c).is_zero()))
}

fn in_pi_o(x: &FieldElem) -> bool {
    x.valuation().map_or(true, |v| v >= 1)
}

/// Membership of a certified element in `K` or one of the named subgroups.
pub fn subgroup_membership(k: &FieldSpec, g: &GroupElement, tag: SubgroupTag) -> bool {
    if !g.certified || !g.m.is_integral() {
        return false;
    }
    let m = &g.m;
    let block_k1 = || zero_outside(m, |r, c| (r < 2) == (c < 2));
    let block_k2 = || {
        zero_outside(m, |r, c| (r == c) || ((1..3).contains(&r) && (1..3).contains(&c)))
            && *m.get(0, 0) == k.one()
            && *m.get(3, 3) == k.one()
    };
    match tag {
        SubgroupTag::K => true,
        SubgroupTag::K1 => block_k1(),
        SubgroupTag::K2 => block_k2(),
        SubgroupTag::B1 => {
            block_k1() && m.get(0, 0).is_unit() && m.get(1, 1).is_unit() && in_pi_o(m.get(0, 1))
        }
        SubgroupTag::B2 => {
            block_k1() && m.get(0, 0).is_unit() && m.get(1, 1).is_unit() && in_pi_o(m.get(1, 0))
        }
        SubgroupTag::Blow => zero_outside(m, |r, c| r >= c) && (0..4).all(|r| m.get(r, r).is_unit()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q3() -> FieldSpec {
        "Q3".parse().unwrap()
    }

    #[test]
    fn generator_examples() {
        let k = q3();
        let w = generator(&k, &Generator::W21).unwrap();
        assert_eq!(w.mul(&w).m, Mat4::identity(&k));
        let d = generator(&k, &Generator::D(2, 1)).unwrap();
        assert_eq!(d.m, Mat4::pi_diag(&k, [-2, -1, 1, 2]));
        for a in [k.zero(), k.one(), k.pi()] {
            let lhs = generator(&k, &Generator::Mu41(a.clone())).unwrap();
            let ww = w21(&k);
            assert_eq!(lhs.m, ww.mul(&mu(&k, 32, &a)).mul(&ww));
        }
        assert!(generator(&k, &Generator::Mu21(k.pi_pow(-1))).is_err());
    }

    #[test]
    fn symplectic_check_examples() {
        let k = q3();
        assert!(symplectic_check(&k, j_form(&k)).is_ok());
        assert!(symplectic_check(&k, Mat4::identity(&k)).is_ok());
        let bad = Mat4::diag(&k, [k.pi(), k.one(), k.one(), k.pi()]);
        assert!(matches!(symplectic_check(&k, bad), Err(Sp4Error::NotSymplectic { .. })));
    }

    #[test]
    fn cartan_examples() {
        let k = q3();
        let c = cartan_invariants(&d_matrix(&k, 3, 1)).unwrap();
        assert_eq!((c.pair, c.norm_exp, c.wedge_norm_exp, c.length), (CartanPair::new(3, 1), 3, 4, 4));
        let c = cartan_invariants(&GroupElement::identity(&k)).unwrap();
        assert_eq!((c.pair, c.length), (CartanPair::new(0, 0), 0));
    }

    #[test]
    fn membership_examples() {
        let k = q3();
        let w = generator(&k, &Generator::W21).unwrap();
        assert!(subgroup_membership(&k, &w, SubgroupTag::K1));
        assert!(subgroup_membership(&k, &w, SubgroupTag::K));
        let w = generator(&k, &Generator::W32).unwrap();
        assert!(subgroup_membership(&k, &w, SubgroupTag::K2));
        assert!(!subgroup_membership(&k, &d_matrix(&k, 1, 0), SubgroupTag::K));
    }

    #[test]
    fn determinant_of_symplectic_is_one() {
        let k = q3();
        let g = w21(&k).mul(&mu(&k, 31, &k.int(2))).mul(&w32(&k));
        assert_eq!(g.det(), k.one());
    }

    /// Elementary divisor valuations by Smith elimination with minimal-valuation pivots.
    fn snf_valuations(m: &Mat4) -> Vec<i32> {
        let mut a: Vec<Vec<FieldElem>> = m.0.iter().map(|r| r.to_vec()).collect();
        let mut out = Vec::new();
        let mut n = 4;
        while n > 0 {
            let mut best: Option<(i32, usize, usize)> = None;
            for r in 0..n {
                for c in 0..n {
                    if let Some(v) = a[r][c].valuation() {
                        if best.map_or(true, |b| v < b.0) {
                            best = Some((v, r, c));
                        }
                    }
                }
            }
            let (v, r, c) = best.expect("invertible");
            out.push(v);
            a.swap(r, n - 1);
            for row in a.iter_mut() {
                row.swap(c, n - 1);
            }
            let piv = a[n - 1][n - 1].inv().unwrap();
            for r in 0..n - 1 {
                let f = &a[r][n - 1] * &piv;
                for c in 0..n {
                    let t = &f * &a[n - 1][c];
                    a[r][c] = &a[r][c] - &t;
                }
            }
            n -= 1;
        }
        out.sort();
        out
    }

    fn sample_elements(k: &FieldSpec) -> Vec<GroupElement> {
        let gens = [
            w21(k),
            w32(k),
            mu(k, 21, &k.pi_pow(-1)),
            mu(k, 32, &k.pi_pow(-3)),
            mu(k, 31, &k.pi_pow(-2)),
            mu(k, 41, &k.int(5)),
            d_matrix(k, 3, 1).m,
            d_matrix(k, 1, 1).m,
        ];
        let mut out = vec![GroupElement::identity(k)];
        for a in &gens {
            for b in &gens {
                for c in &gens {
                    out.push(GroupElement::trusted(k, a.mul(b).mul(c)));
                }
            }
        }
        out
    }

    #[test]
    fn cartan_matches_smith_oracle() {
        for k in [q3(), "F2((t))".parse().unwrap()] {
            let g = GroupElement::trusted(&k, mu(&k, 31, &k.pi_pow(-2)));
            assert_eq!(cartan_invariants(&g).unwrap().pair, CartanPair::new(2, 2));
            for g in sample_elements(&k) {
                let c = cartan_invariants(&g).unwrap().pair;
                let d = snf_valuations(&g.m);
                assert_eq!((c.i, c.j), (-d[0], -d[1]), "{:?}", g.m.to_strings());
            }
        }
    }

    #[test]
    fn d_round_trip() {
        let k = q3();
        for i in 0..=6 {
            for j in 0..=i {
                let c = cartan_invariants(&d_matrix(&k, i, j)).unwrap();
                assert_eq!(c.pair, CartanPair::new(i, j));
            }
        }
    }

    #[test]
    fn inverse_and_subadditivity() {
        let k = q3();
        let els = sample_elements(&k);
        for g in els.iter().step_by(7) {
            assert_eq!(g.mul(&g.inverse(&k)).m, Mat4::identity(&k));
            for h in els.iter().step_by(37) {
                let (a, b) = (cartan_invariants(g).unwrap(), cartan_invariants(h).unwrap());
                let c = cartan_invariants(&g.mul(h)).unwrap();
                assert!(c.norm_exp <= a.norm_exp + b.norm_exp);
                assert!(c.length <= a.length + b.length);
            }
        }
    }

    #[test]
    fn root_element_identities() {
        for k in [q3(), "Q2".parse().unwrap(), "F4((t))".parse().unwrap()] {
            for a in [k.one(), k.pi(), k.int(2) + k.pi_pow(2), k.int(-1)] {
                let lhs = mu(&k, 31, &a);
                let rhs = mu(&k, 21, &-&a)
                    .mul(&mu(&k, 32, &k.one()))
                    .mul(&mu(&k, 21, &a))
                    .mul(&mu(&k, 32, &k.int(-1)))
                    .mul(&mu(&k, 41, &-a.square()));
                assert_eq!(lhs, rhs);
                let w = w21(&k);
                assert_eq!(mu(&k, 41, &a), w.mul(&mu(&k, 32, &a)).mul(&w));
            }
        }
    }

    #[test]
    fn borel_normal_form() {
        let k = q3();
        let (a, b, c, d) = (k.int(2), k.pi(), k.int(-4), k.pi_pow(2));
        let (e, f) = (k.int(2), k.int(5));
        let u = Mat4(std::array::from_fn(|r| {
            std::array::from_fn(|col| match (r, col) {
                _ if r == col => k.one(),
                (1, 0) => a.clone(),
                (2, 0) => c.clone(),
                (2, 1) => b.clone(),
                (3, 0) => d.clone(),
                (3, 1) => &c - &(&a * &b),
                (3, 2) => -&a,
                _ => k.zero(),
            })
        }));
        let lhs = u.mul(&diag_ef(&k, &e, &f));
        let rhs = mu(&k, 21, &a)
            .mul(&mu(&k, 32, &b))
            .mul(&mu(&k, 31, &c))
            .mul(&mu(&k, 41, &(&(&a * &c) + &d)))
            .mul(&diag_ef(&k, &e, &f));
        assert!(symplectic_check(&k, lhs.clone()).is_ok());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn embeddings_are_symplectic() {
        let k = q3();
        let a: Mat2 = [[k.int(2), k.pi()], [k.int(1), k.int(1)]];
        assert!(generator(&k, &Generator::K1Embed(a.clone())).is_ok());
        let b: Mat2 = [[k.int(1), k.int(4)], [k.zero(), k.int(1)]];
        let g = generator(&k, &Generator::K2Embed(b)).unwrap();
        assert!(subgroup_membership(&k, &g, SubgroupTag::K2));
        let g = generator(&k, &Generator::K1Embed(a)).unwrap();
        assert!(subgroup_membership(&k, &g, SubgroupTag::K1));
        assert!(subgroup_membership(&k, &g, SubgroupTag::B1));
        assert!(!subgroup_membership(&k, &g, SubgroupTag::B2));
    }
}
