//! Parity volumes `α(g)`, `β(g)`: Haar mass of `k ∈ K` with `‖gk₁ ∧ gk₂‖` in
//! `q^{2Z}`, resp. `q^{2Z+1}`, bracketed by what depth `n` decides.

use std::time::Instant;

use num_rational::Ratio;
use serde_json::{json, Value};

use super::haar::{enumerate_k, sample_k};
use super::report::{Mode, VerificationReport};
use super::{task_rng, VerifyError};
use crate::exactfield::{vmin, FieldSpec};
use crate::par::par_map;
use crate::sp4::{cartan_invariants, GroupElement, Mat4, PAIRS};

/// Valuation of `gk e₁ ∧ gk e₂` (minimum over the six row pairs).
pub fn wedge_valuation(g: &Mat4, k: &Mat4) -> Option<i32> {
    let cols: Vec<Vec<_>> = (0..4)
        .map(|r| {
            (0..2)
                .map(|c| {
                    let mut acc = g.get(r, 0) * k.get(0, c);
                    for t in 1..4 {
                        acc = &acc + &(g.get(r, t) * k.get(t, c));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    PAIRS.iter().fold(None, |acc, &(a, b)| {
        let m = &(&cols[a][0] * &cols[b][1]) - &(&cols[a][1] * &cols[b][0]);
        vmin(acc, m.valuation())
    })
}

/// Whether the class of `k` mod `π^n` pins the valuation `w`: a change of `k` by
/// `π^n` moves the wedge by at most `‖Λ²g‖ q^{-n} = q^{i+j-n}`.
pub fn decided(w: Option<i32>, n: u32, ij: i32) -> bool {
    w.is_some_and(|w| w < n as i32 - ij)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParityVolumes {
    pub depth: u32,
    pub total: u64,
    pub even: u64,
    pub odd: u64,
    pub undecided: u64,
    /// Elements whose first-two-column wedge vanishes mod π.
    pub degenerate: u64,
}

impl ParityVolumes {
    fn frac(&self, a: u64) -> Ratio<u64> {
        Ratio::new(a, self.total)
    }
    pub fn alpha(&self) -> (Ratio<u64>, Ratio<u64>) {
        (self.frac(self.even), Ratio::from_integer(1) - self.frac(self.odd))
    }
    pub fn beta(&self) -> (Ratio<u64>, Ratio<u64>) {
        (self.frac(self.odd), Ratio::from_integer(1) - self.frac(self.even))
    }
    pub fn decided_mass(&self) -> Ratio<u64> {
        self.frac(self.even + self.odd)
    }
    /// Binomial 95% radius on the decided masses (sampled runs).
    pub fn radius(&self) -> f64 {
        let p = (self.even as f64 / self.total as f64).max(self.odd as f64 / self.total as f64);
        1.96 * (p * (1.0 - p) / self.total as f64).sqrt()
    }
}

fn rat(r: Ratio<u64>) -> Value {
    json!({"exact": format!("{}/{}", r.numer(), r.denom()), "value": *r.numer() as f64 / *r.denom() as f64})
}

/// Wedge valuations of `g·k` for `k` over `Sp₄(O/π^n)` or a sample of it.
pub fn wedge_valuations(k: &FieldSpec, g: &GroupElement, depth: u32, mode: &Mode, threads: usize) -> Vec<Option<i32>> {
    let ks: Vec<GroupElement> = match mode {
        Mode::Exhaustive => enumerate_k(k, depth),
        Mode::Sample { n, seed } => {
            let mut rng = task_rng(*seed, &format!("parity:{}:{depth}", k.name()));
            (0..*n).map(|_| sample_k(k, depth, &mut rng)).collect()
        }
    };
    par_map(&ks, threads, |h| wedge_valuation(&g.m, &h.m))
}

/// Tallies valuations at depth `n` (the valuations may come from a finer sample).
pub fn tally(ws: &[Option<i32>], n: u32, ij: i32) -> ParityVolumes {
    let mut p = ParityVolumes { depth: n, total: ws.len() as u64, even: 0, odd: 0, undecided: 0, degenerate: 0 };
    for &w in ws {
        if w.is_none_or(|w| w > -ij) {
            p.degenerate += 1;
        }
        if decided(w, n, ij) {
            if w.expect("decided").rem_euclid(2) == 0 {
                p.even += 1;
            } else {
                p.odd += 1;
            }
        } else {
            p.undecided += 1;
        }
    }
    p
}

/// Parity-volume intervals for `g` at depth `n`, with the checks that must hold
/// for any run: decided masses sum to at most 1 and the endpoints pair up to 1.
pub fn parity_volumes(
    k: &FieldSpec,
    g: &GroupElement,
    depth: u32,
    mode: Mode,
    threads: usize,
) -> Result<(ParityVolumes, VerificationReport), VerifyError> {
    let start = Instant::now();
    if !k.is_char_two() {
        return Err(VerifyError::Precondition(format!("parity volumes need characteristic 2, got {}", k.name())));
    }
    if depth == 0 {
        return Err(VerifyError::Precondition("depth must be at least 1".into()));
    }
    let info = cartan_invariants(g)?;
    let ij = info.pair.i + info.pair.j;
    let mut rep = VerificationReport::new(
        "parity",
        json!({"field": k.name(), "g": g.m.to_strings(), "cell": info.pair, "depth": depth, "mode": mode}),
        mode.seed(),
    );
    let ws = wedge_valuations(k, g, depth, &mode, threads);
    let p = tally(&ws, depth, ij);
    rep.cases_total = p.total;
    rep.cases_run = p.total;
    let (alo, ahi) = p.alpha();
    let (blo, bhi) = p.beta();
    if p.even + p.odd > p.total {
        rep.counterexample(json!({"observed": "decided masses exceed 1"}));
    }
    if alo + bhi != Ratio::from_integer(1) || ahi + blo != Ratio::from_integer(1) {
        rep.counterexample(json!({"observed": "interval endpoints do not pair to 1"}));
    }
    rep.margin("alpha_interval", json!([rat(alo), rat(ahi)]));
    rep.margin("beta_interval", json!([rat(blo), rat(bhi)]));
    rep.margin("decided_mass", rat(p.decided_mass()));
    rep.margin("undecided", p.undecided);
    rep.margin("degenerate", p.degenerate);
    rep.margin("decidable_everywhere_from_depth", 3 * info.pair.i + info.pair.j + 1);
    if matches!(mode, Mode::Sample { .. }) {
        rep.margin("binomial_radius_95", p.radius());
        let series: Vec<Value> = (1..=depth).map(|n| rat(tally(&ws, n, ij).decided_mass())).collect();
        let monotone = (1..depth as usize).all(|t| {
            let a = tally(&ws, t as u32, ij).decided_mass();
            let b = tally(&ws, t as u32 + 1, ij).decided_mass();
            a <= b
        });
        if !monotone {
            rep.counterexample(json!({"observed": "decided mass decreases under refinement", "series": series}));
        }
        rep.margin("decided_mass_by_depth", series);
    }
    if p.even + p.odd == 0 {
        rep.margin("note", "depth too small to decide any case");
    }
    Ok((p, rep.finish(start)))
}
