//! Weyl-chamber moves, path planning to and along the diagonal `i = 2j`, and
//! the exponent ledger of the summed decay bounds.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::lemma_witnesses::LemmaId;
use crate::sp4::CartanPair;

#[derive(Debug, Error, PartialEq)]
pub enum ZigzagError {
    #[error("start ({0},{1}) is not in Λ")]
    NotInLambda(i32, i32),
    #[error("blocked at ({i},{j}): move {delta} needs {hypothesis}")]
    Blocked { i: i32, j: i32, delta: Delta, hypothesis: String },
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Delta {
    #[serde(rename = "(0,1)")]
    ZeroOne,
    #[serde(rename = "(1,-1)")]
    OneMinusOne,
    #[serde(rename = "(0,2)")]
    ZeroTwo,
}

impl Delta {
    pub fn vector(&self) -> (i32, i32) {
        match self {
            Delta::ZeroOne => (0, 1),
            Delta::OneMinusOne => (1, -1),
            Delta::ZeroTwo => (0, 2),
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.vector();
        write!(f, "({a},{b})")
    }
}

/// Characteristic regime; `level = None` is the spherical case.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "regime")]
pub enum Regime {
    #[serde(rename = "char-ne-2")]
    CharNe2 { v0: u32, level: Option<u32> },
    #[serde(rename = "char-2")]
    Char2 { level: Option<u32> },
}

impl Regime {
    pub fn is_char_two(&self) -> bool {
        matches!(self, Regime::Char2 { .. })
    }

    /// `None` when `delta` is legal at `(i, j)`, else the violated hypothesis.
    pub fn blocking(&self, delta: Delta, c: CartanPair) -> Option<String> {
        let (i, j) = (c.i, c.j);
        let need = |ok: bool, h: String| if ok { None } else { Some(h) };
        match (*self, delta) {
            (Regime::CharNe2 { v0, level }, Delta::ZeroOne) => {
                let m = match level {
                    None => v0 as i32 + 1,
                    Some(k) => 2 * k as i32 + v0 as i32,
                };
                need(i - j >= m && c.in_lambda(), format!("i−j ≥ {m}"))
            }
            (Regime::Char2 { .. }, Delta::ZeroOne) => Some("characteristic ≠ 2".into()),
            (Regime::CharNe2 { .. }, Delta::ZeroTwo) => Some("characteristic 2".into()),
            (Regime::Char2 { level }, Delta::ZeroTwo) => {
                let m = level.map_or(2, |k| 4 * k as i32 + 2);
                need(i - j >= m && c.in_lambda(), format!("i−j ≥ {m}"))
            }
            (Regime::CharNe2 { level, .. } | Regime::Char2 { level }, Delta::OneMinusOne) => {
                let m = level.map_or(2, |k| 2 * k as i32 + 2);
                let shape = c.in_lambda() || (level.is_some() && i == j - 1 && i >= 0);
                need(j >= m && shape, format!("j ≥ {m}"))
            }
        }
    }

    pub fn lemma(&self, delta: Delta) -> LemmaId {
        match (self, delta) {
            (Regime::CharNe2 { level: None, .. }, Delta::ZeroOne) => LemmaId::Spher01,
            (Regime::CharNe2 { .. }, Delta::ZeroOne) => LemmaId::NonSpher01,
            (Regime::CharNe2 { level: None, .. } | Regime::Char2 { level: None }, Delta::OneMinusOne) => LemmaId::Spher1M1,
            (_, Delta::OneMinusOne) => LemmaId::NonSpher1M1,
            _ => LemmaId::Char2_02,
        }
    }

    fn strips(&self) -> (i32, i32) {
        if self.is_char_two() {
            (4, 8)
        } else {
            (3, 4)
        }
    }
}

/// One step; `reversed` moves go against `delta` and the lemma applies at `base`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Move {
    pub delta: Delta,
    pub lemma: LemmaId,
    pub from: CartanPair,
    pub to: CartanPair,
    pub base: CartanPair,
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZigzagPath {
    pub regime: Regime,
    pub cells: Vec<CartanPair>,
    pub moves: Vec<Move>,
    /// Composite step `(2j,j) → (2j+2,j+1)` or `(2j,j) → (2j+4,j+2)` at the endpoint.
    pub diagonal_step: Vec<Move>,
    /// Case label of the last approach phase (`"i-2j=2"`, `"odd k=0"`, ...).
    pub case: String,
    /// Odd-`i` step in odd characteristic: every `k ∈ {0,1}` that worked.
    pub legal_k: Vec<u32>,
}

impl ZigzagPath {
    pub fn endpoint(&self) -> CartanPair {
        *self.cells.last().expect("nonempty")
    }
    pub fn all_moves(&self) -> impl Iterator<Item = &Move> {
        self.moves.iter().chain(&self.diagonal_step)
    }
}

fn cp(i: i32, j: i32) -> CartanPair {
    CartanPair::new(i, j)
}

struct Builder {
    regime: Regime,
    cells: Vec<CartanPair>,
    moves: Vec<Move>,
}

impl Builder {
    fn at(&self) -> CartanPair {
        *self.cells.last().expect("nonempty")
    }
    fn step(&mut self, delta: Delta, reversed: bool) -> Result<(), ZigzagError> {
        let from = self.at();
        let (di, dj) = delta.vector();
        let to = if reversed { cp(from.i - di, from.j - dj) } else { cp(from.i + di, from.j + dj) };
        let base = if reversed { to } else { from };
        if let Some(h) = self.regime.blocking(delta, base) {
            return Err(ZigzagError::Blocked { i: base.i, j: base.j, delta, hypothesis: h });
        }
        self.moves.push(Move { delta, lemma: self.regime.lemma(delta), from, to, base, reversed });
        self.cells.push(to);
        Ok(())
    }
    fn go(&mut self, delta: Delta, times: i32) -> Result<(), ZigzagError> {
        (0..times).try_for_each(|_| self.step(delta, false))
    }
}

/// The composite diagonal step from `(2j, j)`.
pub fn diagonal_template(regime: Regime, j: i32) -> Result<Vec<Move>, ZigzagError> {
    let mut b = Builder { regime, cells: vec![cp(2 * j, j)], moves: vec![] };
    use Delta::*;
    let seq: &[Delta] = if regime.is_char_two() {
        &[OneMinusOne, OneMinusOne, ZeroTwo, OneMinusOne, ZeroTwo, OneMinusOne, ZeroTwo]
    } else {
        &[OneMinusOne, ZeroOne, OneMinusOne, ZeroOne, ZeroOne]
    };
    for &d in seq {
        b.step(d, false)?;
    }
    Ok(b.moves)
}

/// Plans `start → diagonal` and attaches one diagonal step at the endpoint.
/// Starts near the walls where the strip moves are blocked fall back to a
/// shortest legal path in the move graph.
pub fn plan_path(start: CartanPair, regime: Regime) -> Result<ZigzagPath, ZigzagError> {
    if !start.in_lambda() {
        return Err(ZigzagError::NotInLambda(start.i, start.j));
    }
    match strip_path(start, regime) {
        Err(e @ ZigzagError::Blocked { .. }) => graph_path(start, regime).ok_or(e),
        r => r,
    }
}

/// Legal moves out of `c` in either direction: `(delta, reversed, target)`.
pub fn neighbours(regime: Regime, c: CartanPair) -> Vec<(Delta, bool, CartanPair)> {
    let deltas: &[Delta] = if regime.is_char_two() { &[Delta::ZeroTwo, Delta::OneMinusOne] } else { &[Delta::ZeroOne, Delta::OneMinusOne] };
    let mut out = vec![];
    for &d in deltas {
        let (di, dj) = d.vector();
        let fwd = cp(c.i + di, c.j + dj);
        if fwd.in_lambda() && regime.blocking(d, c).is_none() {
            out.push((d, false, fwd));
        }
        let back = cp(c.i - di, c.j - dj);
        if back.in_lambda() && regime.blocking(d, back).is_none() {
            out.push((d, true, back));
        }
    }
    out
}

/// Breadth-first search for the nearest diagonal cell whose template is legal,
/// within `i ≤ start.i + 16`.
pub fn graph_path(start: CartanPair, regime: Regime) -> Option<ZigzagPath> {
    let imax = start.i.max(2 * start.j) + 16;
    let mut prev: HashMap<(i32, i32), (CartanPair, Delta, bool)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    let mut seen = HashSet::from([(start.i, start.j)]);
    while let Some(c) = queue.pop_front() {
        if c.i == 2 * c.j {
            if let Ok(diagonal_step) = diagonal_template(regime, c.j) {
                let mut steps = vec![];
                let mut at = c;
                while at != start {
                    let (p, d, r) = prev[&(at.i, at.j)];
                    steps.push((p, d, r, at));
                    at = p;
                }
                steps.reverse();
                let mut cells = vec![start];
                let mut moves = vec![];
                for (from, delta, reversed, to) in steps {
                    let base = if reversed { to } else { from };
                    moves.push(Move { delta, lemma: regime.lemma(delta), from, to, base, reversed });
                    cells.push(to);
                }
                return Some(ZigzagPath { regime, cells, moves, diagonal_step, case: "graph-search".into(), legal_k: vec![] });
            }
        }
        for (d, r, n) in neighbours(regime, c) {
            if n.i <= imax && seen.insert((n.i, n.j)) {
                prev.insert((n.i, n.j), (c, d, r));
                queue.push_back(n);
            }
        }
    }
    None
}

fn strip_path(start: CartanPair, regime: Regime) -> Result<ZigzagPath, ZigzagError> {
    let mut b = Builder { regime, cells: vec![start], moves: vec![] };
    let (i, j) = (start.i, start.j);
    let mut case = String::new();
    let mut legal_k = vec![];
    if 2 * j > i {
        b.go(Delta::OneMinusOne, (2 * j - i + 2) / 3)?;
    }
    if regime.is_char_two() {
        let c = b.at();
        if c.i - 2 * c.j == 4 && c == start {
            case = "i-2j=4".into();
        }
        b.go(Delta::ZeroTwo, 2 * ((c.i - 2 * c.j) / 4).max(0) / 2)?;
        let c = b.at();
        let r = c.i - 2 * c.j;
        match r {
            1 => {
                b.step(Delta::OneMinusOne, false)?;
                b.step(Delta::ZeroTwo, false)?;
            }
            2 => {
                b.go(Delta::OneMinusOne, 2)?;
                b.go(Delta::ZeroTwo, 2)?;
            }
            3 => b.step(Delta::OneMinusOne, true)?,
            _ => {}
        }
        if case.is_empty() {
            case = format!("i-2j={r}");
        }
    } else {
        let c = b.at();
        if c.i >= 2 * c.j {
            b.go(Delta::ZeroOne, c.i / 2 - c.j)?;
        }
        let c = b.at();
        if c.i % 2 == 0 {
            b.go(Delta::ZeroOne, c.i / 2 - c.j)?;
            case = "even".into();
        } else {
            let (s3, s4) = regime.strips();
            debug_assert!((0..=s3).contains(&(c.i - 2 * c.j)));
            let mut chosen: Option<Builder> = None;
            for k in 0..=1 {
                let mut t = Builder { regime, cells: b.cells.clone(), moves: b.moves.clone() };
                let in_strip = |e: CartanPair, d: Delta| {
                    if (0..=s4).contains(&(e.i - 2 * e.j)) {
                        Ok(())
                    } else {
                        Err(ZigzagError::Blocked { i: e.i, j: e.j, delta: d, hypothesis: format!("target cell in S_{s4}") })
                    }
                };
                let ok = (|| {
                    t.go(Delta::ZeroOne, k)?;
                    in_strip(t.at(), Delta::ZeroOne)?;
                    t.step(Delta::OneMinusOne, false)?;
                    let e = t.at();
                    in_strip(e, Delta::OneMinusOne)?;
                    t.go(Delta::ZeroOne, e.i / 2 - e.j)
                })();
                if ok.is_ok() {
                    legal_k.push(k as u32);
                    chosen.get_or_insert(t);
                } else if k == 1 && chosen.is_none() {
                    ok?;
                }
            }
            b = chosen.expect("some k");
            case = format!("odd k={}", legal_k[0]);
        }
    }
    let end = b.at();
    debug_assert_eq!(end.i, 2 * end.j);
    let diagonal_step = diagonal_template(regime, end.j)?;
    Ok(ZigzagPath { regime, cells: b.cells, moves: b.moves, diagonal_step, case, legal_k })
}

/// Re-evaluates every hypothesis of `path` from scratch; returns the problems.
pub fn recheck(path: &ZigzagPath) -> Vec<String> {
    let mut errs = vec![];
    let (_, s_out) = path.regime.strips();
    if path.cells.first().is_none_or(|c| !c.in_lambda()) {
        errs.push("start not in Λ".into());
    }
    if path.cells.len() != path.moves.len() + 1 {
        errs.push("cell/move count mismatch".into());
    }
    let parity = path.cells[0].length().rem_euclid(2);
    let mut prev = path.cells[0];
    for (t, m) in path.moves.iter().chain(&path.diagonal_step).enumerate() {
        let (di, dj) = m.delta.vector();
        let s = if m.reversed { -1 } else { 1 };
        if t < path.moves.len() && (m.from != prev || m.to != path.cells[t + 1]) {
            errs.push(format!("move {t} detached from the cell list"));
        }
        if t == path.moves.len() && m.from != prev {
            errs.push("diagonal step does not start at the endpoint".into());
        }
        if m.to.i - m.from.i != s * di || m.to.j - m.from.j != s * dj {
            errs.push(format!("move {t}: cells differ by the wrong vector"));
        }
        let base = if m.reversed { m.to } else { m.from };
        if let Some(h) = path.regime.blocking(m.delta, base) {
            errs.push(format!("move {t} {} at ({},{}) needs {h}", m.delta, base.i, base.j));
        }
        if !m.to.in_lambda() {
            errs.push(format!("cell ({},{}) not in Λ", m.to.i, m.to.j));
        }
        if path.regime.is_char_two() && m.to.length().rem_euclid(2) != parity {
            errs.push(format!("parity of i+j changes at ({},{})", m.to.i, m.to.j));
        }
        // strip discipline once the approach has entered the strip
        let entered = path.moves[..t.min(path.moves.len())].iter().any(|x| (0..=s_out).contains(&(x.to.i - 2 * x.to.j)));
        if path.case != "graph-search" && entered && t > 0 && !(0..=s_out).contains(&(m.to.i - 2 * m.to.j)) && m.to.i < 2 * m.to.j {
            errs.push(format!("cell ({},{}) leaves S_{s_out}", m.to.i, m.to.j));
        }
        prev = m.to;
    }
    let e = path.endpoint();
    if e.i != 2 * e.j {
        errs.push("endpoint is off the diagonal".into());
    }
    errs
}

/// Decay parameters of the ledger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LedgerParams {
    pub alpha: f64,
    pub h: u32,
    pub beta: f64,
    pub c: f64,
}

impl LedgerParams {
    pub fn check(&self, regime: &Regime) -> Result<(), ZigzagError> {
        let (a, h, b) = (self.alpha, self.h as f64, self.beta);
        if !(a > 0.0) {
            return Err(ZigzagError::Inadmissible(format!("α > 0 (got {a})")));
        }
        if self.h == 0 {
            return Err(ZigzagError::Inadmissible("h ≥ 1".into()));
        }
        if b < 0.0 {
            return Err(ZigzagError::Inadmissible(format!("β ≥ 0 (got {b})")));
        }
        let (lim, name) = if regime.is_char_two() { (a / (4.0 * h), "β < α/(4h)") } else { (a / (2.0 * h), "β < α/(2h)") };
        if b >= lim {
            return Err(ZigzagError::Inadmissible(format!("{name} = {lim} (got β = {b})")));
        }
        Ok(())
    }

    /// Decay rate `t` of the aggregate bound `e^{2C − t·i}`.
    pub fn rate(&self, regime: &Regime) -> f64 {
        let ah = self.alpha / self.h as f64;
        if regime.is_char_two() {
            ah / 2.0 - 2.0 * self.beta
        } else {
            ah - 2.0 * self.beta
        }
    }

    /// Coefficients `(const, coef_i, coef_j)` of the exponent of a move (unit `C′`).
    pub fn coefficients(&self, delta: Delta) -> (f64, f64, f64) {
        let ah = self.alpha / self.h as f64;
        let b = self.beta;
        let c2 = 2.0 * self.c;
        match delta {
            Delta::ZeroOne => (c2, -(2.0 * ah - 2.0 * b), 2.0 * ah),
            Delta::OneMinusOne => (c2, b, -(2.0 * ah - b)),
            Delta::ZeroTwo => (c2, -(ah - 2.0 * b), ah),
        }
    }

    pub fn exponent(&self, delta: Delta, at: CartanPair) -> f64 {
        let (k, a, b) = self.coefficients(delta);
        k + a * at.i as f64 + b * at.j as f64
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LedgerTotals {
    pub terms: Vec<f64>,
    pub approach: f64,
    pub diagonal_tail: f64,
    pub total: f64,
    pub closed_form: f64,
    pub ratio: f64,
    pub rate: f64,
}

/// Sums the approach terms plus the whole diagonal tail from the endpoint.
/// Template step `m` sits at `(2(j+ms), j+ms)`, so each template move contributes
/// a geometric series in `m`.
pub fn bound_ledger(path: &ZigzagPath, p: &LedgerParams) -> Result<LedgerTotals, ZigzagError> {
    p.check(&path.regime)?;
    let terms: Vec<f64> = path.moves.iter().map(|m| p.exponent(m.delta, m.base)).collect();
    let approach: f64 = terms.iter().map(|e| e.exp()).sum();
    let s = if path.regime.is_char_two() { 2.0 } else { 1.0 };
    let diagonal_tail: f64 = path
        .diagonal_step
        .iter()
        .map(|m| {
            let (_, ci, cj) = p.coefficients(m.delta);
            let slope = (2.0 * ci + cj) * s;
            debug_assert!(slope < 0.0);
            p.exponent(m.delta, m.base).exp() / (1.0 - slope.exp())
        })
        .sum();
    let total = approach + diagonal_tail;
    let rate = p.rate(&path.regime);
    let start = path.cells[0];
    let closed_form = (2.0 * p.c - rate * start.i as f64).exp();
    Ok(LedgerTotals { terms, approach, diagonal_tail, total, closed_form, ratio: total / closed_form, rate })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub params: LedgerParams,
    pub rate: f64,
    pub c_hat: f64,
    pub argmax: CartanPair,
    pub starts: u64,
    pub blocked: u64,
    pub recheck_failures: u64,
    /// Ratio sup over starts with `i ≥ L`, for `L` = 0, 50, 100, ...
    pub tail_sup: BTreeMap<i32, f64>,
    pub monotone: bool,
}

/// `Ĉ = sup total/closed-form` over starts with `i+j ≤ max_len`, plus the
/// monotonicity of totals along the canonical families `(i,0)` (fixed parity of
/// `i`) and `(2j,j)`.
pub fn sweep(regime: Regime, p: &LedgerParams, max_len: i32) -> Result<SweepResult, ZigzagError> {
    p.check(&regime)?;
    let mut out = SweepResult {
        params: *p,
        rate: p.rate(&regime),
        c_hat: 0.0,
        argmax: cp(0, 0),
        starts: 0,
        blocked: 0,
        recheck_failures: 0,
        tail_sup: BTreeMap::new(),
        monotone: true,
    };
    let mut axis: HashMap<i32, f64> = HashMap::new();
    let mut diag: HashMap<i32, f64> = HashMap::new();
    for len in 0..=max_len {
        for j in 0..=len / 2 {
            let c = cp(len - j, j);
            out.starts += 1;
            let path = match plan_path(c, regime) {
                Ok(path) => path,
                Err(ZigzagError::Blocked { .. }) => {
                    out.blocked += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            if !recheck(&path).is_empty() {
                out.recheck_failures += 1;
            }
            let l = bound_ledger(&path, p)?;
            if l.ratio > out.c_hat {
                out.c_hat = l.ratio;
                out.argmax = c;
            }
            let bucket = (c.i / 50) * 50;
            for b in (0..=bucket).step_by(50) {
                let e = out.tail_sup.entry(b).or_insert(0.0);
                *e = e.max(l.ratio);
            }
            if j == 0 {
                axis.insert(c.i, l.total);
            }
            if c.i == 2 * j {
                diag.insert(j, l.total);
            }
        }
    }
    let decreasing = |m: &HashMap<i32, f64>, step: i32| {
        m.iter().all(|(&x, &v)| m.get(&(x + step)).is_none_or(|&w| w <= v * (1.0 + 1e-12)))
    };
    out.monotone = decreasing(&axis, 2) && decreasing(&diag, 1);
    Ok(out)
}

/// Connected components of the move graph (legal moves, both directions) on
/// `cells`, keyed by a representative.
pub fn components(regime: Regime, cells: &[CartanPair]) -> Vec<Vec<CartanPair>> {
    let set: HashSet<(i32, i32)> = cells.iter().map(|c| (c.i, c.j)).collect();
    let deltas: &[Delta] = if regime.is_char_two() { &[Delta::ZeroTwo, Delta::OneMinusOne] } else { &[Delta::ZeroOne, Delta::OneMinusOne] };
    let mut seen = HashSet::new();
    let mut comps = vec![];
    for c in cells {
        if !seen.insert((c.i, c.j)) {
            continue;
        }
        let mut comp = vec![*c];
        let mut queue = VecDeque::from([*c]);
        while let Some(x) = queue.pop_front() {
            for &d in deltas {
                let (di, dj) = d.vector();
                for (base, nb) in [(x, cp(x.i + di, x.j + dj)), (cp(x.i - di, x.j - dj), cp(x.i - di, x.j - dj))] {
                    if set.contains(&(nb.i, nb.j)) && regime.blocking(d, base).is_none() && seen.insert((nb.i, nb.j)) {
                        comp.push(nb);
                        queue.push_back(nb);
                    }
                }
            }
        }
        comps.push(comp);
    }
    comps
}

/// Reachability on `Λ ∩ {i ≤ imax}`: components of the full move graph that meet
/// the cells away from the walls (`j ≥ 4`, `i − j ≥ margin`).
pub fn reachability(regime: Regime, imax: i32, margin: i32) -> Value {
    let all: Vec<CartanPair> = (0..=imax).flat_map(|i| (0..=i).map(move |j| cp(i, j))).collect();
    let interior = |c: &CartanPair| c.j >= 4 && c.i - c.j >= margin;
    let comps: Vec<Vec<CartanPair>> =
        components(regime, &all).into_iter().filter(|c| c.iter().any(interior)).collect();
    let parity_pure = comps.iter().all(|c| c.iter().all(|x| x.length() % 2 == c[0].length() % 2));
    json!({"cells": all.iter().filter(|c| interior(c)).count(), "components": comps.len(), "parity_pure": parity_pure,
           "sizes": comps.iter().map(Vec::len).collect::<Vec<_>>()})
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPH: Regime = Regime::CharNe2 { v0: 0, level: None };
    const CH2: Regime = Regime::Char2 { level: None };

    fn cells(p: &ZigzagPath) -> Vec<(i32, i32)> {
        p.cells.iter().map(|c| (c.i, c.j)).collect()
    }

    #[test]
    fn odd_char_example() {
        let p = plan_path(cp(9, 2), SPH).unwrap();
        assert_eq!(cells(&p), vec![(9, 2), (9, 3), (9, 4), (10, 3), (10, 4), (10, 5)]);
        assert!(recheck(&p).is_empty(), "{:?}", recheck(&p));
        assert_eq!(p.legal_k, vec![0]);
        let d = plan_path(cp(6, 3), SPH).unwrap();
        assert_eq!(d.moves.len(), 0);
        assert_eq!(d.diagonal_step.last().unwrap().to, cp(8, 4));
    }

    #[test]
    fn char2_case_split() {
        // i−2j = 2: (2j+2,j) → (2j+4,j−2) → (2j+4,j+2), through (2j+3,j−1)
        let p = plan_path(cp(8, 3), CH2).unwrap();
        assert_eq!(cells(&p), vec![(8, 3), (9, 2), (10, 1), (10, 3), (10, 5)]);
        let p = plan_path(cp(9, 4), CH2).unwrap();
        assert_eq!(cells(&p), vec![(9, 4), (10, 3), (10, 5)]);
        let p = plan_path(cp(11, 4), CH2).unwrap();
        assert_eq!(cells(&p), vec![(11, 4), (10, 5)]);
        assert!(p.moves[0].reversed);
        assert_eq!(p.moves[0].base, cp(10, 5));
        let p = plan_path(cp(12, 4), CH2).unwrap();
        assert_eq!(cells(&p), vec![(12, 4), (12, 6)]);
        assert_eq!(p.case, "i-2j=4");
        for c in [(8, 3), (9, 4), (11, 4), (12, 4), (40, 3), (20, 17)] {
            let p = plan_path(cp(c.0, c.1), CH2).unwrap();
            assert!(recheck(&p).is_empty(), "{c:?}: {:?}", recheck(&p));
        }
    }

    #[test]
    fn single_term_example() {
        let p = LedgerParams { alpha: 0.7, h: 1, beta: 0.1, c: 0.0 };
        assert!((p.exponent(Delta::ZeroOne, cp(9, 4)) + 5.2).abs() < 1e-12);
    }

    #[test]
    fn blocked_and_outside() {
        assert_eq!(plan_path(cp(2, 3), SPH), Err(ZigzagError::NotInLambda(2, 3)));
        assert!(matches!(plan_path(cp(1, 1), SPH), Err(ZigzagError::Blocked { .. })));
        let p = plan_path(cp(2, 1), SPH).unwrap();
        assert_eq!(p.case, "graph-search");
        assert!(recheck(&p).is_empty());
        assert!(matches!(plan_path(cp(2, 1), CH2), Err(ZigzagError::Blocked { .. })));
        let q2 = Regime::CharNe2 { v0: 1, level: None };
        assert!(q2.blocking(Delta::ZeroOne, cp(3, 2)).is_some());
        assert!(q2.blocking(Delta::ZeroOne, cp(4, 2)).is_none());
    }

    #[test]
    fn inadmissible_parameters() {
        let p = LedgerParams { alpha: 0.7, h: 1, beta: 0.2, c: 0.0 };
        let path = plan_path(cp(9, 4), CH2).unwrap();
        assert!(matches!(bound_ledger(&path, &p), Err(ZigzagError::Inadmissible(_))));
    }

    #[test]
    fn diagonal_tail_is_decreasing() {
        let p = LedgerParams { alpha: 0.7, h: 1, beta: 0.1, c: 0.0 };
        let r: Vec<f64> = (2..20).map(|j| bound_ledger(&plan_path(cp(2 * j, j), SPH).unwrap(), &p).unwrap().ratio).collect();
        assert!(r.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn reachability_and_parity() {
        let r = reachability(SPH, 40, 5);
        assert_eq!(r["components"], 1);
        let r = reachability(CH2, 40, 5);
        assert_eq!(r["components"], 2);
        assert_eq!(r["parity_pure"], true);
    }

    #[test]
    fn small_sweep_is_bounded() {
        for regime in [SPH, CH2, Regime::CharNe2 { v0: 1, level: Some(1) }] {
            let p = LedgerParams { alpha: 0.7, h: 1, beta: 0.0, c: 0.0 };
            let s = sweep(regime, &p, 60).unwrap();
            assert_eq!(s.recheck_failures, 0);
            assert!(s.c_hat.is_finite() && s.c_hat > 0.0);
            assert!(s.monotone);
        }
    }
}
