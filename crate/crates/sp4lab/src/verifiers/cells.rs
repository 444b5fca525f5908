//! Cartan-cell claims of the move lemmas over all (or sampled) residue tuples.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde_json::{json, Value};

use super::report::{Mode, VerificationReport};
use super::{task_rng, VerifyError, MAX_EVALUATIONS};
use crate::exactfield::{FieldKind, FieldSpec};
use crate::lemma_witnesses::{build_witness, derive, CellParams, Derived, LemmaId, Mutation, Tuple};
use crate::par::par_map;

/// Codes of `π^k (O/π^n)` inside `O/π^n`.
pub fn multiples(field: &FieldSpec, depth: u32, k: u32) -> Vec<u64> {
    if k >= depth {
        return vec![0];
    }
    let step = field.q.pow(k);
    (0..field.q.pow(depth - k)).map(|t| t * step).collect()
}

/// Valuation exponent required of `b` by the congruence layer.
pub(crate) fn b_exponent(c: &CellParams) -> u32 {
    match c.lemma {
        LemmaId::NonSpher01 | LemmaId::Char2_02 if c.k > 0 => 2 * c.k,
        _ => 0,
    }
}

pub(crate) fn a_exponent(c: &CellParams) -> u32 {
    if c.lemma.has_k1() {
        c.k
    } else {
        0
    }
}

/// ε values enumerated for a lemma.
pub fn eps_domain(field: &FieldSpec, c: &CellParams, d: &Derived) -> Vec<u64> {
    if d.depth == 0 {
        return vec![0];
    }
    match c.lemma {
        LemmaId::NonSpher01 | LemmaId::NonSpher1M1 => vec![0, d.eps_designated],
        _ => (0..field.q).collect(),
    }
}

/// Classes of `b ∈ π^{b_exp}(O/π^n)` on which every matrix of the witness agrees,
/// as `(representative, size)`. The matrices see `b` only through
/// `σ(y) − σ(a)σ(x) − σ(b)` (`+` in characteristic 2), which is constant in equal
/// characteristic and takes two values (carry or not) in mixed characteristic.
pub fn b_fibers(field: &FieldSpec, depth: u32, a: u64, x: u64, eps: u64, b_exp: u32) -> Vec<(u64, u64)> {
    if depth == 0 || b_exp >= depth {
        return vec![(0, 1)];
    }
    let nb = field.q.pow(depth - b_exp);
    match field.kind {
        FieldKind::EqualChar => vec![(0, nb)],
        FieldKind::MixedChar => {
            let size = field.q.pow(depth) as u128;
            let t = (a as u128 * x as u128 + field.q.pow(depth - 1) as u128 * eps as u128) % size;
            if t == 0 {
                return vec![(0, nb)];
            }
            let step = field.q.pow(b_exp) as u128;
            let no_carry = ((size - t).div_ceil(step)) as u64;
            let mut v = vec![(0, no_carry)];
            if nb > no_carry {
                v.push(((step as u64) * no_carry, nb - no_carry));
            }
            v
        }
    }
}

/// Class representatives for SPHER01: `s = σ(a)+σ(x)` normalized to `π^v`
/// (`v < 2(m−j)`) or `0`, crossed with every ε.
pub fn spher01_class_reps(field: &FieldSpec, c: &CellParams, d: &Derived) -> Vec<Tuple> {
    let t = d.m - c.j;
    let mut ax: Vec<(u64, u64)> = vec![(0, 0)];
    for v in 0..(2 * t) as u32 {
        if v < d.depth {
            ax.push((0, field.q.pow(v)));
        } else if d.v0 == 1 && v == d.depth {
            let h = 1u64 << (d.depth - 1);
            ax.push((h, h));
        }
    }
    let mut out = Vec::new();
    for (a, x) in ax {
        for eps in 0..field.q {
            out.push(Tuple { a, b: 0, x, eps });
        }
    }
    out
}

fn params_json(field: &FieldSpec, c: &CellParams, mode: &Mode, mutation: Option<Mutation>) -> Value {
    json!({
        "lemma": c.lemma,
        "field": field.name(),
        "i": c.i,
        "j": c.j,
        "k": c.k,
        "mode": match mode { Mode::Exhaustive => "exhaustive".to_string(), Mode::Sample { n, .. } => format!("sample({n})") },
        "mutation": mutation.map(|m| m.name()),
    })
}

/// Evaluation items `(tuple, multiplicity)` of the b-fiber enumeration.
pub fn fiber_items(field: &FieldSpec, c: &CellParams, d: &Derived) -> Vec<(Tuple, u64)> {
    let ax = multiples(field, d.depth, a_exponent(c));
    let eps = eps_domain(field, c, d);
    let bexp = b_exponent(c);
    let mut items = Vec::new();
    for &a in &ax {
        for &x in &ax {
            for &e in &eps {
                for (b, mult) in b_fibers(field, d.depth, a, x, e, bexp) {
                    items.push((Tuple { a, b, x, eps: e }, mult));
                }
            }
        }
    }
    items
}

/// Uniform tuples from the domain of `c` (ranges and `π^k` memberships respected).
pub fn sample_tuples(field: &FieldSpec, c: &CellParams, d: &Derived, n: u64, rng: &mut impl Rng) -> Vec<Tuple> {
    let (ea, eb) = (a_exponent(c), b_exponent(c));
    let mut pick = |e: u32| -> u64 {
        let cnt = multiples_count(field, d.depth, e);
        rng.gen_range(0..cnt) * if e >= d.depth { 0 } else { field.q.pow(e) }
    };
    let mut items = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let (a, b, x) = (pick(ea), pick(eb), pick(ea));
        items.push(Tuple { a, b, x, eps: 0 });
    }
    let eps = eps_domain(field, c, d);
    for t in items.iter_mut() {
        t.eps = eps[rng.gen_range(0..eps.len())];
    }
    items
}

/// Upper bound on the number of b-fiber evaluations.
fn fiber_estimate(field: &FieldSpec, c: &CellParams, d: &Derived) -> u64 {
    let ax = multiples_count(field, d.depth, a_exponent(c));
    let per = if field.kind == FieldKind::MixedChar { 2 } else { 1 };
    ax.saturating_mul(ax).saturating_mul(eps_domain(field, c, d).len() as u64 * per)
}

fn multiples_count(field: &FieldSpec, depth: u32, k: u32) -> u64 {
    if k >= depth {
        1
    } else {
        field.q.saturating_pow(depth - k)
    }
}

fn domain_size(field: &FieldSpec, c: &CellParams, d: &Derived) -> u64 {
    let ax = multiples_count(field, d.depth, a_exponent(c));
    let b = multiples_count(field, d.depth, b_exponent(c));
    ax.saturating_mul(ax).saturating_mul(b).saturating_mul(eps_domain(field, c, d).len() as u64)
}

struct Outcome {
    tuple: Tuple,
    mult: u64,
    failures: Vec<String>,
    observed: String,
    expected: Option<String>,
    y: u64,
}

fn evaluate(field: &FieldSpec, c: &CellParams, items: &[(Tuple, u64)], mutation: Option<Mutation>, threads: usize) -> Result<Vec<Outcome>, VerifyError> {
    let results = par_map(items, threads, |(t, mult)| {
        build_witness(field, c, t, mutation).map(|w| {
            let chk = w.check();
            Outcome {
                tuple: *t,
                mult: *mult,
                failures: chk.failures,
                observed: chk.observed_cell.to_string(),
                expected: chk.expected_cell.map(|e| e.to_string()),
                y: w.y.code,
            }
        })
    });
    results.into_iter().map(|r| r.map_err(VerifyError::from)).collect()
}

/// Exhaustive or sampled check of one lemma at one cell.
pub fn verify_cell_lemma(
    field: &FieldSpec,
    c: &CellParams,
    mode: Mode,
    mutation: Option<Mutation>,
    threads: usize,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let d = derive(field, c, mutation)?;
    let mut rep = VerificationReport::new(format!("verify:{}", c.lemma), params_json(field, c, &mode, mutation), mode.seed());
    let total = domain_size(field, c, &d);
    rep.cases_total = total;
    let (items, reduction): (Vec<(Tuple, u64)>, &str) = match mode {
        Mode::Exhaustive => {
            let est = fiber_estimate(field, c, &d);
            if c.lemma == LemmaId::Spher01 && est > 20_000 {
                let reps = spher01_class_reps(field, c, &d);
                (reps.into_iter().map(|t| (t, 0)).collect(), "spher01-classes")
            } else if est > MAX_EVALUATIONS {
                return Err(VerifyError::Budget { needed: est, limit: MAX_EVALUATIONS });
            } else {
                (fiber_items(field, c, &d), "b-fibers")
            }
        }
        Mode::Sample { n, seed } => {
            let mut rng = task_rng(seed, &format!("verify:{}:{}:{}:{}:{}", c.lemma, field.name(), c.i, c.j, c.k));
            let items = sample_tuples(field, c, &d, n, &mut rng).into_iter().map(|t| (t, 1)).collect();
            (items, "sample")
        }
    };
    if items.len() as u64 > MAX_EVALUATIONS {
        return Err(VerifyError::Budget { needed: items.len() as u64, limit: MAX_EVALUATIONS });
    }
    rep.margin("reduction", reduction);
    rep.margin("evaluations", items.len() as u64);
    rep.margin("depth", d.depth);
    rep.margin("m", d.m);
    let outcomes = evaluate(field, c, &items, mutation, threads)?;
    let mut other_eps: BTreeMap<String, u64> = BTreeMap::new();
    let mut cells: BTreeMap<String, u64> = BTreeMap::new();
    let mut run = 0u64;
    for o in outcomes {
        run += o.mult;
        *cells.entry(o.observed.clone()).or_default() += o.mult.max(1);
        if o.expected.is_none() {
            *other_eps.entry(o.observed.clone()).or_default() += o.mult.max(1);
        }
        if !o.failures.is_empty() {
            rep.counterexample(json!({
                "a": o.tuple.a, "b": o.tuple.b, "x": o.tuple.x, "y": o.y, "eps": o.tuple.eps,
                "observed": o.observed, "expected": o.expected, "failures": o.failures,
            }));
        }
    }
    rep.cases_run = match (mode, reduction) {
        (Mode::Exhaustive, "spher01-classes") => total,
        _ => run,
    };
    rep.margin("observed_cells", serde_json::to_value(&cells).expect("map"));
    if !other_eps.is_empty() {
        rep.margin("observed_cells_unpinned_eps", serde_json::to_value(&other_eps).expect("map"));
    }
    Ok(rep.finish(start))
}

/// Exhaustive b-fiber run of SPHER01 regardless of size, for cross-checking the class reduction.
pub fn spher01_fiber_run(field: &FieldSpec, c: &CellParams, threads: usize) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let d = derive(field, c, None)?;
    let items = fiber_items(field, c, &d);
    let mut rep = VerificationReport::new("verify:SPHER01:fibers", params_json(field, c, &Mode::Exhaustive, None), None);
    rep.cases_total = domain_size(field, c, &d);
    for o in evaluate(field, c, &items, None, threads)? {
        rep.cases_run += o.mult;
        if !o.failures.is_empty() {
            rep.counterexample(json!({"a": o.tuple.a, "b": o.tuple.b, "x": o.tuple.x, "eps": o.tuple.eps, "failures": o.failures}));
        }
    }
    rep.margin("evaluations", items.len() as u64);
    Ok(rep.finish(start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lemma_witnesses::LemmaWitness;
    use std::collections::HashMap;

    fn f(s: &str) -> FieldSpec {
        s.parse().unwrap()
    }

    fn key(w: &LemmaWitness) -> String {
        format!("{:?}|{:?}|{:?}", w.product.to_strings(), w.k1.as_ref().map(|k| k.m.to_strings()), w.check().failures)
    }

    /// Fibers agree with enumerating every b.
    #[test]
    fn fibers_match_direct_enumeration() {
        let cases = [
            ("Q3", CellParams { lemma: LemmaId::Spher1M1, i: 4, j: 3, k: 0 }),
            ("Q3", CellParams { lemma: LemmaId::NonSpher01, i: 3, j: 1, k: 0 }),
            ("Q2", CellParams { lemma: LemmaId::Spher01, i: 5, j: 1, k: 0 }),
            ("F3((t))", CellParams { lemma: LemmaId::Spher1M1, i: 3, j: 3, k: 0 }),
            ("Q5", CellParams { lemma: LemmaId::NonSpher01, i: 6, j: 2, k: 1 }),
            ("F2((t))", CellParams { lemma: LemmaId::Char2_02, i: 7, j: 1, k: 0 }),
        ];
        for (name, c) in cases {
            let k = f(name);
            let d = derive(&k, &c, None).unwrap();
            let ax = multiples(&k, d.depth, a_exponent(&c));
            let bs = multiples(&k, d.depth, b_exponent(&c));
            for &a in ax.iter().step_by(2) {
                for &x in ax.iter().step_by(3) {
                    for e in eps_domain(&k, &c, &d) {
                        let mut direct: HashMap<String, u64> = HashMap::new();
                        for &b in &bs {
                            let w = build_witness(&k, &c, &Tuple { a, b, x, eps: e }, None).unwrap();
                            *direct.entry(key(&w)).or_default() += 1;
                        }
                        let mut fib: HashMap<String, u64> = HashMap::new();
                        for (b, mult) in b_fibers(&k, d.depth, a, x, e, b_exponent(&c)) {
                            let w = build_witness(&k, &c, &Tuple { a, b, x, eps: e }, None).unwrap();
                            *fib.entry(key(&w)).or_default() += mult;
                        }
                        assert_eq!(direct, fib, "{name} {c:?} a={a} x={x} eps={e}");
                    }
                }
            }
        }
    }

    #[test]
    fn spec_examples() {
        let k = f("Q3");
        let r = verify_cell_lemma(&k, &CellParams { lemma: LemmaId::Spher01, i: 3, j: 1, k: 0 }, Mode::Exhaustive, None, 2).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        assert_eq!(r.cases_total, 3u64.pow(7));
        let k = f("F3((t))");
        let r = verify_cell_lemma(&k, &CellParams { lemma: LemmaId::Spher1M1, i: 4, j: 3, k: 0 }, Mode::Exhaustive, None, 2).unwrap();
        assert!(r.passed(), "{}", r.to_text());
        let cells = &r.margins["observed_cells"];
        assert_eq!(cells.as_object().unwrap().keys().collect::<Vec<_>>(), vec!["(4,3)", "(5,2)"]);
        let k = f("Q5");
        let r = verify_cell_lemma(&k, &CellParams { lemma: LemmaId::NonSpher1M1, i: 3, j: 4, k: 1 }, Mode::Exhaustive, None, 2).unwrap();
        assert!(r.passed(), "{}", r.to_text());
    }

    #[test]
    fn class_reduction_agrees_with_fibers() {
        for (name, i, j) in [("Q3", 5, 1), ("Q5", 3, 0), ("Q5", 4, 1), ("Q2", 6, 1), ("Q2", 5, 0)] {
            let k = f(name);
            let c = CellParams { lemma: LemmaId::Spher01, i, j, k: 0 };
            let d = derive(&k, &c, None).unwrap();
            let reps = spher01_class_reps(&k, &c, &d);
            for t in &reps {
                assert!(build_witness(&k, &c, t, None).unwrap().check().ok());
            }
            let r = spher01_fiber_run(&k, &c, 2).unwrap();
            assert!(r.passed(), "{}", r.to_text());
        }
    }

    #[test]
    fn sampled_mode_is_deterministic() {
        let k = f("Q3");
        let c = CellParams { lemma: LemmaId::Spher01, i: 8, j: 0, k: 0 };
        let a = verify_cell_lemma(&k, &c, Mode::Sample { n: 50, seed: 7 }, None, 1).unwrap();
        let b = verify_cell_lemma(&k, &c, Mode::Sample { n: 50, seed: 7 }, None, 4).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
        assert!(a.passed());
    }
}
