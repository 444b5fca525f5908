//! `K = (K₁K₂)^{30}`: alternating `K₁`/`K₂` factorizations of elements of `K`.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::haar::{enumerate_sp4_fq, lift_symplectic, sample_k};
use super::report::VerificationReport;
use super::{task_rng, VerifyError};
use crate::par::par_map;
use crate::exactfield::{FieldElem, FieldSpec};
use crate::sp4::{diag_ef, mu, subgroup_membership, w21, w32, GroupElement, Mat4, SubgroupTag};

pub const GENERATION_BOUND: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Tag {
    K1,
    K2,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum Route {
    /// `g = b₁ w b₂` with `b₁, b₂` lower triangular in `K`.
    Bwb { w: String },
    /// `g = w · L · w₀ · b · w₀^{-1}` from a big-cell factorization of `w^{-1}g`.
    Fallback { w: String },
}

#[derive(Clone, Debug)]
pub struct FactorList {
    pub factors: Vec<(Tag, GroupElement)>,
    pub block_count: usize,
    pub route: Route,
}

impl FactorList {
    pub fn product(&self, k: &FieldSpec) -> Mat4 {
        self.factors.iter().fold(Mat4::identity(k), |acc, (_, g)| acc.mul(&g.m))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "factors": self.factors.iter().map(|(t, g)| json!({"tag": t, "matrix": g.m.to_strings()})).collect::<Vec<_>>(),
            "block_count": self.block_count,
            "route": self.route,
        })
    }
}

/// Merges adjacent factors of equal tag and drops identities.
struct Word {
    k: FieldSpec,
    stack: Vec<(Tag, Mat4)>,
}

impl Word {
    fn new(k: &FieldSpec) -> Word {
        Word { k: *k, stack: Vec::new() }
    }
    fn push(&mut self, tag: Tag, m: Mat4) {
        let id = Mat4::identity(&self.k);
        if m == id {
            return;
        }
        match self.stack.last_mut() {
            Some((t, top)) if *t == tag => {
                *top = top.mul(&m);
                if *top == id {
                    self.stack.pop();
                }
            }
            _ => self.stack.push((tag, m)),
        }
    }
    fn extend(&mut self, w: Word) {
        for (t, m) in w.stack {
            self.push(t, m);
        }
    }
    fn block_count(&self) -> usize {
        let lead = matches!(self.stack.first(), Some((Tag::K2, _))) as usize;
        (self.stack.len() + lead).div_ceil(2)
    }
}

fn mu41_word(w: &mut Word, k: &FieldSpec, a: &FieldElem) {
    // μ41(a) = w21 μ32(a) w21
    w.push(Tag::K1, w21(k));
    w.push(Tag::K2, mu(k, 32, a));
    w.push(Tag::K1, w21(k));
}

/// Factors of a lower-triangular element of `K` through the root elements and the torus.
fn borel_word(k: &FieldSpec, b: &Mat4) -> Result<Word, VerifyError> {
    let (e, f) = (b.get(0, 0).clone(), b.get(1, 1).clone());
    if !e.is_unit() || !f.is_unit() {
        return Err(VerifyError::Precondition("Borel factor with non-unit diagonal".into()));
    }
    let d = diag_ef(k, &e, &f);
    let dinv = diag_ef(k, &e.inv().expect("unit"), &f.inv().expect("unit"));
    let l = b.mul(&dinv);
    let (a, bb, c, dd) = (l.get(1, 0).clone(), l.get(2, 1).clone(), l.get(2, 0).clone(), l.get(3, 0).clone());
    let mut w = Word::new(k);
    w.push(Tag::K1, mu(k, 21, &a));
    w.push(Tag::K2, mu(k, 32, &bb));
    // μ31(c) = μ21(−c) μ32(1) μ21(c) μ32(−1) μ41(−c²)
    if !c.is_zero() {
        w.push(Tag::K1, mu(k, 21, &-&c));
        w.push(Tag::K2, mu(k, 32, &k.one()));
        w.push(Tag::K1, mu(k, 21, &c));
        w.push(Tag::K2, mu(k, 32, &-&k.one()));
        mu41_word(&mut w, k, &-&c.square());
    }
    let p41 = &(&a * &c) + &dd;
    if !p41.is_zero() {
        mu41_word(&mut w, k, &p41);
    }
    w.push(Tag::K1, d);
    Ok(w)
}

/// The eight Weyl elements as shortest words in `w21 ∈ K₁`, `w32 ∈ K₂`.
fn weyl_elements(k: &FieldSpec) -> Vec<(String, Vec<Tag>, Mat4)> {
    let gens = [(Tag::K1, "w21", w21(k)), (Tag::K2, "w32", w32(k))];
    let pattern = |m: &Mat4| -> Vec<bool> { m.0.iter().flatten().map(|x| !x.is_zero()).collect() };
    let mut out: Vec<(String, Vec<Tag>, Mat4)> = vec![("1".into(), vec![], Mat4::identity(k))];
    let mut frontier = out.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (name, tags, m) in &frontier {
            for (t, gname, g) in &gens {
                let nm = m.mul(g);
                if out.iter().all(|(_, _, o)| pattern(o) != pattern(&nm)) {
                    let nn = if name == "1" { gname.to_string() } else { format!("{name}·{gname}") };
                    let mut nt = tags.clone();
                    nt.push(*t);
                    out.push((nn.clone(), nt.clone(), nm.clone()));
                    next.push((nn, nt, nm));
                }
            }
        }
        frontier = next;
    }
    out
}

fn weyl_word(k: &FieldSpec, tags: &[Tag], inverse: bool) -> Word {
    let mut w = Word::new(k);
    let letters: Vec<(Tag, Mat4)> = tags
        .iter()
        .map(|t| match t {
            Tag::K1 => (Tag::K1, w21(k)),
            Tag::K2 => (Tag::K2, w32(k)),
        })
        .collect();
    if inverse {
        for (t, m) in letters.into_iter().rev() {
            let inv = GroupElement::trusted(k, m).inverse(k).m;
            w.push(t, inv);
        }
    } else {
        for (t, m) in letters {
            w.push(t, m);
        }
    }
    w
}

/// `A = L·U`, `L` unit lower triangular, `U` upper triangular with unit pivots.
fn doolittle(k: &FieldSpec, a: &Mat4) -> Option<(Mat4, Mat4)> {
    let mut l = Mat4::identity(k);
    let mut u = Mat4::zero(k);
    for i in 0..4 {
        for j in i..4 {
            let mut s = a.get(i, j).clone();
            for kk in 0..i {
                s = &s - &(l.get(i, kk) * u.get(kk, j));
            }
            u.set(i, j, s);
        }
        let piv = u.get(i, i);
        if !piv.is_unit() {
            return None;
        }
        let pinv = piv.inv().expect("unit");
        for j in i + 1..4 {
            let mut s = a.get(j, i).clone();
            for kk in 0..i {
                s = &s - &(l.get(j, kk) * u.get(kk, i));
            }
            l.set(j, i, &s * &pinv);
        }
    }
    Some((l, u))
}

/// Index reversal `r ↦ 3 − r` on rows and columns.
fn reverse(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|r, c| m.get(3 - r, 3 - c).clone())
}

fn is_lower(m: &Mat4) -> bool {
    (0..4).all(|r| (r + 1..4).all(|c| m.get(r, c).is_zero()))
}

fn try_bwb(k: &FieldSpec, g: &Mat4, w: &Mat4, tags: &[Tag]) -> Result<Option<Word>, VerifyError> {
    let winv = GroupElement::trusted(k, w.clone()).inverse(k).m;
    let m = winv.mul(g);
    // w^{-1}g = u·b with u upper unipotent, b lower
    let Some((lp, up)) = doolittle(k, &reverse(&m)) else { return Ok(None) };
    let (u, b) = (reverse(&lp), reverse(&up));
    let b1 = w.mul(&u).mul(&winv);
    if !is_lower(&b1) || !b1.is_integral() || !b.is_integral() {
        return Ok(None);
    }
    let mut word = borel_word(k, &b1)?;
    word.extend(weyl_word(k, tags, false));
    word.extend(borel_word(k, &b)?);
    Ok(Some(word))
}

fn try_fallback(k: &FieldSpec, g: &Mat4, w: &Mat4, tags: &[Tag], w0: &(Vec<Tag>, Mat4)) -> Result<Option<Word>, VerifyError> {
    let winv = GroupElement::trusted(k, w.clone()).inverse(k).m;
    let m = winv.mul(g);
    let Some((l, u)) = doolittle(k, &m) else { return Ok(None) };
    let w0inv = GroupElement::trusted(k, w0.1.clone()).inverse(k).m;
    let bp = w0inv.mul(&u).mul(&w0.1);
    if !is_lower(&bp) || !l.is_integral() || !bp.is_integral() {
        return Ok(None);
    }
    let mut word = weyl_word(k, tags, false);
    word.extend(borel_word(k, &l)?);
    word.extend(weyl_word(k, &w0.0, false));
    word.extend(borel_word(k, &bp)?);
    word.extend(weyl_word(k, &w0.0, true));
    Ok(Some(word))
}

/// Alternating `K₁`/`K₂` factorization of `g ∈ K`, shortest over the Weyl elements;
/// the route through `K = BWB` is preferred and the fallback is reported when it fails.
pub fn decompose_k1k2(k: &FieldSpec, g: &GroupElement) -> Result<FactorList, VerifyError> {
    if !subgroup_membership(k, g, SubgroupTag::K) {
        return Err(VerifyError::Precondition("element is not in K".into()));
    }
    let ws = weyl_elements(k);
    let mut best: Option<(Word, Route)> = None;
    for (name, tags, w) in &ws {
        if let Some(word) = try_bwb(k, &g.m, w, tags)? {
            if best.as_ref().is_none_or(|(b, _)| word.block_count() < b.block_count()) {
                best = Some((word, Route::Bwb { w: name.clone() }));
            }
        }
    }
    if best.is_none() {
        let w0 = ws.iter().max_by_key(|(_, t, _)| t.len()).map(|(_, t, m)| (t.clone(), m.clone())).expect("W");
        for (name, tags, w) in &ws {
            if let Some(word) = try_fallback(k, &g.m, w, tags, &w0)? {
                if best.as_ref().is_none_or(|(b, _)| word.block_count() < b.block_count()) {
                    best = Some((word, Route::Fallback { w: name.clone() }));
                }
            }
        }
    }
    let (word, route) = best.ok_or_else(|| VerifyError::Precondition("no Weyl translate admits a unit-pivot factorization".into()))?;
    let block_count = word.block_count();
    let factors = word.stack.into_iter().map(|(t, m)| (t, GroupElement::trusted(k, m))).collect();
    Ok(FactorList { factors, block_count, route })
}

/// Reconstruction, subgroup membership, alternation and the bound for one element.
pub fn check_factor_list(k: &FieldSpec, g: &GroupElement, f: &FactorList) -> Vec<String> {
    let mut out = Vec::new();
    if f.product(k) != g.m {
        out.push("product of factors differs from the input".into());
    }
    for (idx, (t, h)) in f.factors.iter().enumerate() {
        let tag = match t {
            Tag::K1 => SubgroupTag::K1,
            Tag::K2 => SubgroupTag::K2,
        };
        if !subgroup_membership(k, h, tag) {
            out.push(format!("factor {idx} is not in {t:?}"));
        }
        if idx > 0 && f.factors[idx - 1].0 == *t {
            out.push(format!("factors {} and {idx} share a tag", idx - 1));
        }
    }
    if f.block_count > GENERATION_BOUND {
        out.push(format!("block_count {} > {GENERATION_BOUND}", f.block_count));
    }
    out
}

/// Source of elements for the generation check.
#[derive(Clone, Copy, Debug)]
pub enum Sweep {
    /// Lifts of every element of `Sp₄(F_q)`.
    Residue,
    /// `n` uniform classes of `Sp₄(O/π^d)` with `d` cycling through `1..=max_depth`.
    Random { n: u64, max_depth: u32, seed: u64 },
}

/// Decomposes every element of the sweep and checks each factor list.
pub fn verify_generation(k: &FieldSpec, sweep: Sweep, threads: usize) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let (elems, params, seed) = match sweep {
        Sweep::Residue => {
            let all: Vec<GroupElement> = enumerate_sp4_fq(k).iter().map(|g| lift_symplectic(k, g)).collect();
            (all, json!({"field": k.name(), "sweep": "residue"}), None)
        }
        Sweep::Random { n, max_depth, seed } => {
            let mut rng = task_rng(seed, &format!("decompose:{}", k.name()));
            let all = (0..n).map(|t| sample_k(k, 1 + (t % max_depth as u64) as u32, &mut rng)).collect();
            (all, json!({"field": k.name(), "sweep": "random", "n": n, "max_depth": max_depth}), Some(seed))
        }
    };
    let mut rep = VerificationReport::new("decompose", params, seed);
    rep.cases_total = elems.len() as u64;
    let results = par_map(&elems, threads, |g| decompose_k1k2(k, g).map(|f| (check_factor_list(k, g, &f), f)));
    let (mut bwb, mut fallback, mut max_blocks) = (0u64, 0u64, 0usize);
    let mut hist: BTreeMap<String, u64> = BTreeMap::new();
    for (idx, r) in results.into_iter().enumerate() {
        rep.cases_run += 1;
        match r {
            Ok((fails, f)) => {
                match f.route {
                    Route::Bwb { .. } => bwb += 1,
                    Route::Fallback { .. } => fallback += 1,
                }
                max_blocks = max_blocks.max(f.block_count);
                *hist.entry(f.block_count.to_string()).or_default() += 1;
                for e in fails {
                    rep.counterexample(json!({"index": idx, "element": elems[idx].m.to_strings(), "observed": e, "expected": "exact product, alternating tags, block_count <= 30"}));
                }
            }
            Err(e) => rep.counterexample(json!({"index": idx, "element": elems[idx].m.to_strings(), "observed": e.to_string()})),
        }
    }
    rep.margin("bwb_route", bwb);
    rep.margin("fallback_route", fallback);
    rep.margin("max_block_count", max_blocks);
    rep.margin("block_count_bound", GENERATION_BOUND);
    rep.margin("block_count_histogram", json!(hist));
    Ok(rep.finish(start))
}
