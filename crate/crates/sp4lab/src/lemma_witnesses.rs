//! Explicit matrices of the five move lemmas, built exactly over F for a given
//! residue tuple, together with the printed products they are compared against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::exactfield::{FieldElem, FieldError, FieldSpec, ResidueElem};
use crate::sp4::{raw_invariants, symplectic_check, CartanPair, GroupElement, Mat4};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LemmaId {
    #[serde(rename = "SPHER01")]
    Spher01,
    #[serde(rename = "SPHER1M1")]
    Spher1M1,
    #[serde(rename = "NONSPHER01")]
    NonSpher01,
    #[serde(rename = "NONSPHER1M1")]
    NonSpher1M1,
    #[serde(rename = "CHAR2_02")]
    Char2_02,
}

impl LemmaId {
    pub const ALL: [LemmaId; 5] =
        [LemmaId::Spher01, LemmaId::Spher1M1, LemmaId::NonSpher01, LemmaId::NonSpher1M1, LemmaId::Char2_02];

    pub fn name(&self) -> &'static str {
        match self {
            LemmaId::Spher01 => "SPHER01",
            LemmaId::Spher1M1 => "SPHER1M1",
            LemmaId::NonSpher01 => "NONSPHER01",
            LemmaId::NonSpher1M1 => "NONSPHER1M1",
            LemmaId::Char2_02 => "CHAR2_02",
        }
    }
    /// Lemmas whose proof defines `k₁`.
    pub fn has_k1(&self) -> bool {
        matches!(self, LemmaId::NonSpher01 | LemmaId::NonSpher1M1 | LemmaId::Char2_02)
    }
    /// The (0,1)-type lemmas share the `m`, `n₁` matrices.
    pub fn is_zero_one(&self) -> bool {
        matches!(self, LemmaId::Spher01 | LemmaId::NonSpher01)
    }
    pub fn is_one_minus_one(&self) -> bool {
        matches!(self, LemmaId::Spher1M1 | LemmaId::NonSpher1M1)
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = String;
    fn from_str(s: &str) -> Result<LemmaId, String> {
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown lemma id {s:?} (expected one of SPHER01, SPHER1M1, NONSPHER01, NONSPHER1M1, CHAR2_02)"))
    }
}

/// Deliberate formula corruptions used to check that the suites can fail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mutation {
    #[serde(rename = "minor-sign-flip")]
    MinorSignFlip,
    #[serde(rename = "d-exponent")]
    DExponent,
    #[serde(rename = "drop-eps1")]
    DropEps1,
    #[serde(rename = "wrong-n1")]
    WrongN1,
    #[serde(rename = "minor-rows")]
    MinorRows,
}

impl Mutation {
    pub const ALL: [Mutation; 5] =
        [Mutation::MinorSignFlip, Mutation::DExponent, Mutation::DropEps1, Mutation::WrongN1, Mutation::MinorRows];
    pub fn name(&self) -> &'static str {
        match self {
            Mutation::MinorSignFlip => "minor-sign-flip",
            Mutation::DExponent => "d-exponent",
            Mutation::DropEps1 => "drop-eps1",
            Mutation::WrongN1 => "wrong-n1",
            Mutation::MinorRows => "minor-rows",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutation {
    type Err = String;
    fn from_str(s: &str) -> Result<Mutation, String> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown mutation {s:?}"))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("{lemma}: hypothesis fails: {detail}")]
    Hypothesis { lemma: LemmaId, detail: String },
    #[error("{lemma}: lemma requires {need}, but {field} does not qualify")]
    Characteristic { lemma: LemmaId, need: &'static str, field: String },
    #[error("{lemma}: {detail}")]
    BadTuple { lemma: LemmaId, detail: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A lemma applied at a cell, with the congruence level `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellParams {
    pub lemma: LemmaId,
    pub i: i32,
    pub j: i32,
    pub k: u32,
}

/// Integers derived from the cell: `m`, the residue level, `v₀`, `ε₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Derived {
    pub m: i32,
    pub depth: u32,
    pub v0: u32,
    /// The nonzero ε value whose scaled product the proof displays.
    pub eps_designated: u64,
}

/// Residue tuple `(a, b, x, ε)`; `y` is derived.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tuple {
    pub a: u64,
    pub b: u64,
    pub x: u64,
    pub eps: u64,
}

fn hyp(lemma: LemmaId, detail: String) -> WitnessError {
    WitnessError::Hypothesis { lemma, detail }
}

/// Checks the lemma hypotheses and computes the derived integers.
pub fn derive(field: &FieldSpec, c: &CellParams, mutation: Option<Mutation>) -> Result<Derived, WitnessError> {
    let CellParams { lemma, i, j, k } = *c;
    let ki = k as i32;
    let m = (i + j).div_euclid(2);
    let (depth, v0, eps_designated) = match lemma {
        LemmaId::Spher01 | LemmaId::NonSpher01 => {
            let v0 = field.two_valuation().map_err(|_| WitnessError::Characteristic {
                lemma,
                need: "characteristic different from 2",
                field: field.name(),
            })?;
            if j < 0 || i < j {
                return Err(hyp(lemma, format!("({i},{j}) is not in Λ")));
            }
            let need = if lemma == LemmaId::NonSpher01 && k > 0 { 2 * ki + v0 as i32 } else { v0 as i32 + 1 };
            if i - j < need {
                let what = if lemma == LemmaId::NonSpher01 && k > 0 { "2k+v₀" } else { "v₀+1" };
                return Err(hyp(lemma, format!("i−j = {} < {what} = {need}", i - j)));
            }
            let n1 = 2 * m - 2 * j - v0 as i32;
            if n1 < 1 {
                return Err(hyp(lemma, format!("n₁ = {n1} < 1")));
            }
            let eps0 = if v0 == 0 { field.ff_inv(field.ff_int(2)) } else { 1 };
            (n1 as u32, v0, if lemma == LemmaId::NonSpher01 { eps0 } else { 1 })
        }
        LemmaId::Spher1M1 | LemmaId::NonSpher1M1 => {
            let jmin = if lemma == LemmaId::NonSpher1M1 && k > 0 { 2 * ki + 2 } else { 2 };
            if j < jmin {
                let what = if jmin == 2 { "2".to_string() } else { format!("2k+2 = {jmin}") };
                return Err(hyp(lemma, format!("j = {j} < {what}")));
            }
            let imin = if lemma == LemmaId::NonSpher1M1 { j - 1 } else { j };
            if i < imin {
                return Err(hyp(lemma, format!("i = {i} < {}", if imin == j { "j" } else { "j−1" })));
            }
            ((j - 1) as u32, 0, 1)
        }
        LemmaId::Char2_02 => {
            if !field.is_char_two() {
                return Err(WitnessError::Characteristic { lemma, need: "characteristic 2", field: field.name() });
            }
            if j < 0 || i < j {
                return Err(hyp(lemma, format!("({i},{j}) is not in Λ")));
            }
            let need = if k > 0 { 4 * ki + 2 } else { 2 };
            if i - j < need {
                return Err(hyp(lemma, format!("i−j = {} < {need}", i - j)));
            }
            ((m - j - 1) as u32, 0, 1)
        }
    };
    let depth = if mutation == Some(Mutation::WrongN1) { depth + 1 } else { depth };
    field.ring_size(depth)?;
    Ok(Derived { m, depth, v0, eps_designated })
}

/// Every matrix of one instance of a move lemma.
#[derive(Clone, Debug)]
pub struct LemmaWitness {
    pub lemma: LemmaId,
    pub field: FieldSpec,
    pub cell: CartanPair,
    pub k_level: u32,
    pub derived: Derived,
    pub a: ResidueElem,
    pub b: ResidueElem,
    pub x: ResidueElem,
    pub y: ResidueElem,
    pub eps: u64,
    /// Lifts `σ(a), σ(b), σ(x), σ(y)`.
    pub lifts: [FieldElem; 4],
    pub beta_inv: GroupElement,
    pub alpha_mat: GroupElement,
    /// `β(a,b)^{-1} α(x,y)` recomputed from the two factors.
    pub product: Mat4,
    /// Printed displays paired with the same quantity recomputed from factors.
    pub displays: Vec<(&'static str, Mat4, Mat4)>,
    pub k1: Option<GroupElement>,
    /// `k₁` with every term that vanishes mod `π^k` removed.
    pub k1_target: Option<Mat4>,
    /// Exponents of the diagonal scaling and the recomputed scaled product.
    pub scaled: Option<([i32; 4], Mat4)>,
    pub eps1: Option<FieldElem>,
    pub a1: Option<FieldElem>,
    pub expected_cell: Option<CartanPair>,
    pub mutation: Option<Mutation>,
}

fn dominant(i: i32, j: i32) -> CartanPair {
    CartanPair::new(i.max(j), i.min(j))
}

fn certify(k: &FieldSpec, m: Mat4) -> GroupElement {
    match symplectic_check(k, m.clone()) {
        Ok(g) => g,
        Err(_) => GroupElement { m, certified: false },
    }
}

/// Builds the witness for one tuple.
pub fn build_witness(
    field: &FieldSpec,
    c: &CellParams,
    t: &Tuple,
    mutation: Option<Mutation>,
) -> Result<LemmaWitness, WitnessError> {
    let d = derive(field, c, mutation)?;
    let lemma = c.lemma;
    let size = field.ring_size(d.depth)?;
    for (name, v) in [("a", t.a), ("b", t.b), ("x", t.x)] {
        if v >= size {
            return Err(WitnessError::BadTuple { lemma, detail: format!("{name} = {v} is not a residue mod π^{}", d.depth) });
        }
    }
    if t.eps >= field.q {
        return Err(WitnessError::BadTuple { lemma, detail: format!("ε = {} is not in F_{}", t.eps, field.q) });
    }
    let (a, b, x) = (field.residue(d.depth, t.a), field.residue(d.depth, t.b), field.residue(d.depth, t.x));
    if c.k > 0 && lemma.has_k1() {
        let kk = c.k.min(d.depth);
        for (name, r) in [("a", &a), ("x", &x)] {
            if field.res_valuation(r) < kk {
                return Err(WitnessError::BadTuple { lemma, detail: format!("{name} must lie in π^{}", c.k) });
            }
        }
        if lemma != LemmaId::NonSpher1M1 && field.res_valuation(&b) < (2 * c.k).min(d.depth) {
            return Err(WitnessError::BadTuple { lemma, detail: format!("b must lie in π^{}", 2 * c.k) });
        }
    }
    let y = if d.depth == 0 {
        if t.eps != 0 {
            return Err(WitnessError::BadTuple { lemma, detail: "residue level 0 admits only ε = 0".into() });
        }
        field.residue(0, 0)
    } else {
        let shift = field.res_pi_times(d.depth, d.depth - 1, t.eps);
        field.res_add(&field.res_add(&field.res_mul(&a, &x), &b), &shift)
    };
    assemble(field, c, &d, a, b, x, y, t.eps, mutation)
}

/// Witness with an arbitrary `y` (only the `β`/`α` part is meaningful; `ε` is reported as 0).
pub fn build_witness_free_y(
    field: &FieldSpec,
    c: &CellParams,
    a: u64,
    b: u64,
    x: u64,
    y: u64,
    mutation: Option<Mutation>,
) -> Result<LemmaWitness, WitnessError> {
    let d = derive(field, c, mutation)?;
    let r = |v| field.residue(d.depth, v);
    assemble(field, c, &d, r(a), r(b), r(x), r(y), 0, mutation)
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    k: &FieldSpec,
    c: &CellParams,
    d: &Derived,
    a: ResidueElem,
    b: ResidueElem,
    x: ResidueElem,
    y: ResidueElem,
    eps: u64,
    mutation: Option<Mutation>,
) -> Result<LemmaWitness, WitnessError> {
    let (i, j, m) = (c.i, c.j, d.m);
    let (sa, sb, sx, sy) = (k.sigma(&a), k.sigma(&b), k.sigma(&x), k.sigma(&y));
    let z = || k.zero();
    let o = || k.one();
    let p = |e: i32| k.pi_pow(e);
    let two = k.int(2);
    let e_diff = &(&sy - &(&sa * &sx)) - &sb;

    let mut displays = Vec::new();
    let mut k1 = None;
    let mut k1_target = None;
    let mut scaled_printed: Option<([i32; 4], Mat4)> = None;
    let mut eps1 = None;
    let mut a1_out = None;
    let lemma = c.lemma;
    let designated = eps == d.eps_designated;

    let (beta_inv, alpha_mat, expected) = match lemma {
        LemmaId::Spher01 | LemmaId::NonSpher01 => {
            let s = &sa + &sx;
            let dl = Mat4::pi_diag(k, [m, i - m + j, -i + m - j, -m]);
            let ub = Mat4([
                [o(), z(), z(), z()],
                [z(), o(), z(), z()],
                [sa.clone(), o(), o(), z()],
                [&sa.square() - &(&two * &sb), sa.clone(), z(), o()],
            ]);
            let ua = Mat4([
                [o(), z(), z(), z()],
                [z(), o(), z(), z()],
                [sx.clone(), z(), o(), z()],
                [&sx.square() + &(&two * &sy), sx.clone(), z(), o()],
            ]);
            let dr = Mat4::pi_diag(k, [-m + j, -m + j, m - j, m - j]);
            let middle = Mat4([
                [o(), z(), z(), z()],
                [z(), o(), z(), z()],
                [s.clone(), o(), o(), z()],
                [&(&(&sa.square() - &(&two * &sb)) + &sx.square()) + &(&two * &sy), s.clone(), z(), o()],
            ]);
            displays.push(("beta_inv*alpha", Mat4::zero(k), dl.mul(&middle).mul(&dr)));
            let expected = if eps == 0 { CartanPair::new(i, j) } else { CartanPair::new(i, j + 1) };
            if lemma == LemmaId::NonSpher01 {
                let e1 = &(&two * &p(-2 * m + 2 * j + 1)) * &e_diff;
                let merged = Mat4([
                    [p(j), z(), z(), z()],
                    [z(), p(i - 2 * m + 2 * j), z(), z()],
                    [&p(-i) * &s, p(-i), p(-i + 2 * m - 2 * j), z()],
                    [&(&p(-2 * m + j) * &s.square()) + &(&p(-j - 1) * &e1), &p(-2 * m + j) * &s, z(), p(-j)],
                ]);
                displays.push(("beta_inv*alpha (k1 display)", Mat4::zero(k), merged));
                let build_k1 = |s: &FieldElem| {
                    Mat4([
                        [z(), z(), o(), z()],
                        [z(), z(), -(&p(i - 2 * m + j) * s), o()],
                        [-o(), z(), -(&p(i - 2 * m + 3 * j + 1) * s), p(2 * j + 1)],
                        [-(&p(i - 2 * m + j) * s), -o(), p(2 * i - 2 * m + 2 * j), z()],
                    ])
                };
                k1 = Some(build_k1(&s));
                k1_target = Some(build_k1(&z()));
                let g1 = Mat4([
                    [&p(-i) * &s, p(-i), p(-i + 2 * m - 2 * j), z()],
                    [&p(-j - 1) * &e1, z(), -(&p(-j) * &s), p(-j)],
                    [&p(j) * &(&e1 - &o()), z(), -(&p(j + 1) * &s), p(j + 1)],
                    [z(), z(), p(i), z()],
                ]);
                displays.push(("k1*beta_inv*alpha", Mat4::zero(k), g1));
                if eps == 0 {
                    let printed = Mat4([
                        [s.clone(), o(), p(2 * m - 2 * j), z()],
                        [&p(-1) * &e1, z(), -&s, o()],
                        [&e1 - &o(), z(), -(&p(1) * &s), p(1)],
                        [z(), z(), o(), z()],
                    ]);
                    scaled_printed = Some(([i, j, -j, -i], printed));
                } else if designated {
                    let printed = Mat4([
                        [s.clone(), o(), p(2 * m - 2 * j), z()],
                        [e1.clone(), z(), -(&p(1) * &s), p(1)],
                        [&p(-1) * &(&e1 - &o()), z(), -&s, o()],
                        [z(), z(), o(), z()],
                    ]);
                    scaled_printed = Some(([i, j + 1, -j - 1, -i], printed));
                }
                eps1 = Some(e1);
            }
            (dl.mul(&ub), ua.mul(&dr), Some(expected))
        }
        LemmaId::Spher1M1 | LemmaId::NonSpher1M1 => {
            let a1 = &o() + &(&p(1) * &sa);
            let dl = Mat4::pi_diag(k, [i, 0, 0, -i]);
            let ub = Mat4([
                [o(), z(), z(), z()],
                [a1.clone(), o(), z(), z()],
                [z(), z(), o(), z()],
                [-(&p(1) * &sb), z(), -&a1, o()],
            ]);
            let ua = Mat4([
                [o(), z(), z(), z()],
                [z(), o(), z(), z()],
                [sx.clone(), z(), o(), z()],
                [&(&p(1) * &sy) + &sx, sx.clone(), z(), o()],
            ]);
            let dr = Mat4::pi_diag(k, [-j, 0, 0, j]);
            let middle = Mat4([
                [o(), z(), z(), z()],
                [a1.clone(), o(), z(), z()],
                [sx.clone(), z(), o(), z()],
                [&p(1) * &e_diff, sx.clone(), -&a1, o()],
            ]);
            displays.push(("beta_inv*alpha", Mat4::zero(k), dl.mul(&middle).mul(&dr)));
            let expected = if eps == 0 { dominant(i, j) } else { dominant(i + 1, j - 1) };
            if lemma == LemmaId::NonSpher1M1 {
                let e1 = &p(-j + 2) * &e_diff;
                let a1inv = a1.inv().expect("1+πσ(a) is a unit");
                let a1inv2 = a1inv.square();
                let merged = Mat4([
                    [p(i - j), z(), z(), z()],
                    [&p(-j) * &a1, o(), z(), z()],
                    [&p(-j) * &sx, z(), o(), z()],
                    [&p(-i - 1) * &e1, &p(-i) * &sx, -(&p(-i) * &a1), p(-i + j)],
                ]);
                displays.push(("beta_inv*alpha (k1 display)", Mat4::zero(k), merged));
                let drop = mutation == Some(Mutation::DropEps1);
                let build_k1 = |a1: &FieldElem, a1inv: &FieldElem, sx: &FieldElem, e1: &FieldElem| {
                    let a1inv2 = a1inv.square();
                    let e1_32 = if drop { z() } else { &(&p(j - 1) * &a1inv2) * e1 };
                    let e1_42 = if drop { o() } else { &o() - e1 };
                    Mat4([
                        [z(), z(), z(), o()],
                        [z(), o(), z(), -(&p(i - j + 1) * a1)],
                        [z(), -&(&e1_32 + &(a1inv * sx)), o(), &p(i) * a1inv],
                        [-o(), &(&(&p(i) * a1inv) * &e1_42) - &(&p(i - j + 1) * sx), &p(i - j + 1) * a1, p(2 * i - j + 1)],
                    ])
                };
                k1 = Some(build_k1(&a1, &a1inv, &sx, &e1));
                k1_target = Some(build_k1(&o(), &o(), &z(), &z()));
                let one_m = &o() - &e1;
                let g1 = Mat4([
                    [&p(-i - 1) * &e1, &p(-i) * &sx, -(&p(-i) * &a1), p(-i + j)],
                    [&(&p(-j) * &a1) * &one_m, &o() - &(&(&p(-j + 1) * &a1) * &sx), &p(-j + 1) * &a1.square(), -(&p(1) * &a1)],
                    [z(), -(&(&p(j - 1) * &a1inv2) * &e1), z(), &p(j) * &a1inv],
                    [z(), &(&p(i) * &a1inv) * &one_m, z(), p(i + 1)],
                ]);
                displays.push(("k1*beta_inv*alpha", Mat4::zero(k), g1));
                if eps == 0 {
                    let printed = Mat4([
                        [&p(-1) * &e1, sx.clone(), -&a1, p(j)],
                        [&a1 * &one_m, &p(j) - &(&(&p(1) * &a1) * &sx), &p(1) * &a1.square(), -(&p(j + 1) * &a1)],
                        [z(), -(&(&p(-1) * &a1inv2) * &e1), z(), a1inv.clone()],
                        [z(), &a1inv * &one_m, z(), p(1)],
                    ]);
                    scaled_printed = Some(([i, j, -j, -i], printed));
                } else if designated {
                    let printed = Mat4([
                        [e1.clone(), &p(1) * &sx, -(&p(1) * &a1), p(j + 1)],
                        [&(&p(-1) * &a1) * &one_m, &p(j - 1) - &(&a1 * &sx), a1.square(), -(&p(j) * &a1)],
                        [z(), -(&a1inv2 * &e1), z(), &p(1) * &a1inv],
                        [z(), &(&p(-1) * &a1inv) * &one_m, z(), o()],
                    ]);
                    scaled_printed = Some(([i + 1, j - 1, -j + 1, -i - 1], printed));
                }
                eps1 = Some(e1);
                a1_out = Some(a1.clone());
            }
            (dl.mul(&ub), ua.mul(&dr), Some(expected))
        }
        LemmaId::Char2_02 => {
            let aa = &o() + &(&p(1) * &sa);
            let aa2 = aa.square();
            let aa2inv = aa2.inv().expect("unit");
            let xy = &sx + &(&p(1) * &sy);
            let u = &(&p(1) * &sb) + &xy;
            let beta_inv = Mat4([
                [p(m), z(), z(), z()],
                [z(), p(i - m + j), z(), z()],
                [&p(-i + m - j + 1) * &sb, &p(-i + m - j) * &aa2, p(-i + m - j), z()],
                [z(), &p(-m + 1) * &sb, z(), p(-m)],
            ]);
            let alpha = Mat4([
                [p(-m + j), z(), z(), z()],
                [z(), p(-m + j), z(), z()],
                [&p(-m + j) * &xy, z(), p(m - j), z()],
                [&p(-m + j) * &sx.square(), &p(-m + j) * &xy, z(), p(m - j)],
            ]);
            let merged = Mat4([
                [p(j), z(), z(), z()],
                [z(), p(i - 2 * m + 2 * j), z(), z()],
                [&p(-i) * &u, &p(-i) * &aa2, p(-i + 2 * m - 2 * j), z()],
                [&p(-2 * m + j) * &sx.square(), &p(-2 * m + j) * &u, z(), p(-j)],
            ]);
            displays.push(("beta_inv*alpha", Mat4::zero(k), merged));
            let a1 = &u * &aa2inv;
            let e1 = &p(-m + j + 2) * &(&(&sy + &(&sa * &sx)) + &sb);
            let build_k1 = |a1: &FieldElem, aa2inv: &FieldElem| {
                Mat4([
                    [z(), z(), o(), z()],
                    [z(), z(), &p(i - 2 * m + j) * a1, o()],
                    [o(), z(), &p(i - 2 * m + 3 * j + 2) * a1, p(2 * j + 2)],
                    [&p(i - 2 * m + j) * a1, o(), &p(2 * i - 2 * m + 2 * j) * aa2inv, z()],
                ])
            };
            k1 = Some(build_k1(&a1, &aa2inv));
            k1_target = Some(build_k1(&z(), &o()));
            let e1sq = &e1.square() * &aa2inv;
            let g1 = Mat4([
                [&(&p(-i) * &a1) * &aa2, &p(-i) * &aa2, p(-i + 2 * m - 2 * j), z()],
                [&p(-j - 2) * &e1sq, z(), &p(-j) * &a1, p(-j)],
                [&(&p(j) * &e1sq) + &p(j), z(), &p(j + 2) * &a1, p(j + 2)],
                [z(), z(), &p(i) * &aa2inv, z()],
            ]);
            displays.push(("k1*beta_inv*alpha", Mat4::zero(k), g1));
            if eps == 0 {
                let printed = Mat4([
                    [&a1 * &aa2, aa2.clone(), p(2 * m - 2 * j), z()],
                    [&p(-2) * &e1sq, z(), a1.clone(), o()],
                    [&e1sq + &o(), z(), &p(2) * &a1, p(2)],
                    [z(), z(), aa2inv.clone(), z()],
                ]);
                scaled_printed = Some(([i, j, -j, -i], printed));
            } else if designated {
                let printed = Mat4([
                    [&a1 * &aa2, aa2.clone(), p(2 * m - 2 * j), z()],
                    [e1sq.clone(), z(), &p(2) * &a1, p(2)],
                    [&p(-2) * &(&e1sq + &o()), z(), a1.clone(), o()],
                    [z(), z(), aa2inv.clone(), z()],
                ]);
                scaled_printed = Some(([i, j + 2, -j - 2, -i], printed));
            }
            let expected = match eps {
                0 => Some(CartanPair::new(i, j)),
                1 => Some(CartanPair::new(i, j + 2)),
                _ => None,
            };
            eps1 = Some(e1);
            a1_out = Some(a1);
            (beta_inv, alpha, expected)
        }
    };

    let mut alpha_mat = alpha_mat;
    if mutation == Some(Mutation::MinorSignFlip) {
        let v = -alpha_mat.get(3, 0);
        alpha_mat.set(3, 0, v);
    }
    let beta_inv = certify(k, beta_inv);
    let alpha_mat = certify(k, alpha_mat);
    let product = beta_inv.m.mul(&alpha_mat.m);
    let k1 = k1.map(|m| certify(k, m));

    // fill in the recomputed side of each display
    let g1 = k1.as_ref().map(|k1| k1.m.mul(&product));
    for entry in displays.iter_mut() {
        entry.1 = if entry.0 == "k1*beta_inv*alpha" { g1.clone().expect("k1 present") } else { product.clone() };
    }
    let scaled = match (scaled_printed, g1.as_ref()) {
        (Some((mut e, printed)), Some(g1)) => {
            if mutation == Some(Mutation::DExponent) {
                e[1] += 1;
                e[2] -= 1;
            }
            let recomputed = Mat4::pi_diag(k, e).mul(g1);
            displays.push(("D*k1*beta_inv*alpha", recomputed.clone(), printed));
            Some((e, recomputed))
        }
        _ => None,
    };

    Ok(LemmaWitness {
        lemma,
        field: *k,
        cell: CartanPair::new(i, j),
        k_level: c.k,
        derived: *d,
        a,
        b,
        x,
        y,
        eps,
        lifts: [sa, sb, sx, sy],
        beta_inv,
        alpha_mat,
        product,
        displays,
        k1,
        k1_target,
        scaled,
        eps1,
        a1: a1_out,
        expected_cell: expected,
        mutation,
    })
}

/// Outcome of all per-tuple checks on a witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    pub observed_cell: CartanPair,
    pub expected_cell: Option<CartanPair>,
    pub failures: Vec<String>,
}

impl WitnessCheck {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

impl LemmaWitness {
    pub fn params(&self) -> CellParams {
        CellParams { lemma: self.lemma, i: self.cell.i, j: self.cell.j, k: self.k_level }
    }

    /// `σ(y) − σ(a)σ(x) − σ(b)`.
    pub fn e_diff(&self) -> FieldElem {
        let [sa, sb, sx, sy] = &self.lifts;
        &(sy - &(sa * sx)) - sb
    }

    /// Whether the mod-`π^k` congruence of `k₁` applies to this tuple.
    pub fn congruence_applies(&self) -> bool {
        self.k_level > 0 && self.k1.is_some()
    }

    /// Cell check, `k₁ ∈ K`, scaled product in `K`, congruence and printed displays.
    pub fn check(&self) -> WitnessCheck {
        let k = &self.field;
        let mut failures = Vec::new();
        let observed = match raw_invariants(&self.product) {
            Ok((i, j)) => CartanPair::new(i, j),
            Err(e) => {
                failures.push(e.to_string());
                CartanPair::new(i32::MIN, i32::MIN)
            }
        };
        if let Some(exp) = self.expected_cell {
            if exp != observed {
                failures.push(format!("cell {observed} != expected {exp}"));
            }
        }
        if !self.beta_inv.certified {
            failures.push("beta_inv is not symplectic".into());
        }
        if !self.alpha_mat.certified {
            failures.push("alpha is not symplectic".into());
        }
        for (name, recomputed, printed) in &self.displays {
            if recomputed != printed {
                failures.push(format!("printed {name} differs from the product of its factors"));
            }
        }
        if let Some(k1) = &self.k1 {
            if !k1.certified || !k1.m.is_integral() {
                failures.push("k1 not in K".into());
            }
        }
        if let Some((_, s)) = &self.scaled {
            if !s.is_integral() {
                failures.push("scaled product not in K".into());
            }
        }
        if self.congruence_applies() {
            if let (Some(k1), Some(t)) = (&self.k1, &self.k1_target) {
                let d = k1.m.sub(t);
                let bad = d.0.iter().flatten().any(|x| x.valuation().is_some_and(|v| v < self.k_level as i32));
                if bad {
                    failures.push(format!("k1 not congruent to its target mod π^{}", self.k_level));
                }
            }
        }
        if self.lemma == LemmaId::Char2_02 {
            if let (Some(e1), Some(a1)) = (&self.eps1, &self.a1) {
                let _ = a1;
                let [sa, ..] = &self.lifts;
                let aa = &k.one() + &(&k.pi() * sa);
                let w = &(&e1.square() * &aa.square().inv().expect("unit")) + &k.one();
                let need = match self.eps {
                    0 => e1.valuation().map_or(true, |v| v >= 1),
                    1 => w.valuation().map_or(true, |v| v >= 2),
                    _ => true,
                };
                if !need {
                    failures.push("|ε₁| bound fails".into());
                }
            }
        }
        WitnessCheck { observed_cell: observed, expected_cell: self.expected_cell, failures }
    }

    /// `ε₁ mod π` against its stated value (`ε₀^{-1}ε`, resp. `ε`).
    pub fn eps1_reduction_ok(&self) -> Option<bool> {
        let e1 = self.eps1.as_ref()?;
        if self.derived.depth == 0 {
            return None;
        }
        let k = &self.field;
        let r = k.reduce(e1, 1).ok()?.code;
        let want = match self.lemma {
            LemmaId::NonSpher01 => k.ff_mul(k.ff_inv(self.derived.eps_designated), self.eps),
            LemmaId::NonSpher1M1 => self.eps,
            _ => return None,
        };
        Some(r == want)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let check = self.check();
        json!({
            "lemma": self.lemma,
            "field": self.field.name(),
            "cell": self.cell,
            "k_level": self.k_level,
            "m": self.derived.m,
            "depth": self.derived.depth,
            "v0": self.derived.v0,
            "a": self.a.code, "b": self.b.code, "x": self.x.code, "y": self.y.code,
            "eps": self.eps,
            "beta_inv": self.beta_inv.m.to_strings(),
            "alpha": self.alpha_mat.m.to_strings(),
            "product": self.product.to_strings(),
            "k1": self.k1.as_ref().map(|g| g.m.to_strings()),
            "k1_target_mod_pi_k": self.k1_target.as_ref().map(|t| truncated_strings(&self.field, t, self.k_level)),
            "scaled": self.scaled.as_ref().map(|(e, m)| json!({"diag_exponents": e, "matrix": m.to_strings()})),
            "eps1": self.eps1.as_ref().map(|e| e.to_string()),
            "a1": self.a1.as_ref().map(|e| e.to_string()),
            "expected_cell": self.expected_cell,
            "observed_cell": check.observed_cell,
            "checks_failed": check.failures,
            "mutation": self.mutation,
        })
    }
}

/// Entries with terms of valuation ≥ `k` shown as 0 (exact otherwise).
fn truncated_strings(k: &FieldSpec, m: &Mat4, level: u32) -> Vec<Vec<String>> {
    let _ = k;
    m.0.iter()
        .map(|row| {
            row.iter()
                .map(|x| match x.valuation() {
                    Some(v) if level == 0 || v < level as i32 => x.to_string(),
                    _ => "0".into(),
                })
                .collect()
        })
        .collect()
}
