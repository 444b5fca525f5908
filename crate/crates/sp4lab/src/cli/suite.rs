//! Suite profiles: task manifests, parameter grids and the summary record.

use serde_json::json;

use super::{fft_report, fourier_norm_report, type_report, zigzag_report, Ctx, Output};
use crate::exactfield::FieldSpec;
use crate::fourier::{FftPlan, SpaceSpec};
use crate::lemma_witnesses::{derive, CellParams, LemmaId, Mutation};
use crate::par::par_map;
use crate::sp4::d_matrix;
use crate::verifiers::averaging::{configured, verify_averaging};
use crate::verifiers::cells::verify_cell_lemma;
use crate::verifiers::decompose::{verify_generation, Sweep};
use crate::verifiers::identities::verify_witness_identities;
use crate::verifiers::parity::parity_volumes;
use crate::verifiers::report::{Mode, Status, VerificationReport};
use crate::zigzag::{LedgerParams, Regime};

#[derive(Clone, Debug)]
pub enum TaskKind {
    Identities { field: String, cell: CellParams, n: u64 },
    Cell { field: String, cell: CellParams, sample: Option<u64> },
    Decompose { field: String, random: Option<(u64, u32)> },
    Averaging { group: String, trials: u64 },
    Parity { field: String, cell: (i32, i32), depth: u32, sample: Option<u64> },
    FourierNorm { field: String, h: u32, space: SpaceSpec, search: Option<u64> },
    Fft { field: String, h: u32, n: u32, k: u32, space: SpaceSpec, random: u64, ascent: u64 },
    TypeConst { space: SpaceSpec, p: f64, vectors: usize, trials: u64 },
    Zigzag { regime: Regime, params: LedgerParams, grid: i32 },
}

/// A suite entry; `covers` names the claims it exercises.
#[derive(Clone, Debug)]
pub struct Task {
    pub id: String,
    pub covers: Vec<String>,
    pub kind: TaskKind,
}

/// Claims that every profile must reach.
pub const CLAIMS: [&str; 13] = [
    "SPHER01",
    "SPHER1M1",
    "NONSPHER01",
    "NONSPHER1M1",
    "CHAR2_02",
    "generation",
    "averaging",
    "parity",
    "transform-norm",
    "fft-lemma",
    "fft-k-variant",
    "type-constant",
    "zigzag",
];

fn field(s: &str) -> FieldSpec {
    s.parse().expect("suite field")
}

fn valid(f: &str, c: &CellParams) -> bool {
    derive(&field(f), c, None).is_ok()
}

fn cell_task(f: &str, c: CellParams) -> Task {
    Task {
        id: format!("verify:{}:{f}:({},{}):k{}", c.lemma, c.i, c.j, c.k),
        covers: vec![c.lemma.to_string()],
        kind: TaskKind::Cell { field: f.into(), cell: c, sample: None },
    }
}

fn ident_task(f: &str, c: CellParams, n: u64) -> Task {
    Task {
        id: format!("identities:{}:{f}:({},{}):k{}", c.lemma, c.i, c.j, c.k),
        covers: vec![c.lemma.to_string()],
        kind: TaskKind::Identities { field: f.into(), cell: c, n },
    }
}

/// Exhaustive spherical and characteristic-2 cells.
pub fn cell_grid() -> Vec<(String, CellParams)> {
    let mut out = vec![];
    for f in ["Q3", "Q5"] {
        for i in 0..=8 {
            for j in 0..=(8 - i).min(i) {
                let c = CellParams { lemma: LemmaId::Spher01, i, j, k: 0 };
                if valid(f, &c) {
                    out.push((f.to_string(), c));
                }
            }
        }
    }
    for f in ["Q3", "F2((t))", "F4((t))"] {
        for j in 2..=4 {
            for i in j..=8 {
                out.push((f.to_string(), CellParams { lemma: LemmaId::Spher1M1, i, j, k: 0 }));
            }
        }
    }
    for f in ["F2((t))", "F4((t))"] {
        for d in 2..=6 {
            for j in 0..=2 {
                out.push((f.to_string(), CellParams { lemma: LemmaId::Char2_02, i: j + d, j, k: 0 }));
            }
        }
    }
    out
}

/// Non-spherical cells at levels 1 and 2 on the smallest admissible cells.
pub fn nonspherical_grid() -> Vec<(String, CellParams)> {
    let mut out = vec![];
    let fields = ["Q2", "Q3", "Q5", "F2((t))", "F3((t))", "F4((t))", "F5((t))"];
    for k in 1..=2u32 {
        let ki = k as i32;
        for f in fields {
            let fs = field(f);
            let mut cells = vec![];
            if let Ok(v0) = fs.two_valuation() {
                for j in 0..=1 {
                    for extra in 0..=1 {
                        cells.push(CellParams { lemma: LemmaId::NonSpher01, i: j + 2 * ki + v0 as i32 + extra, j, k });
                    }
                }
            }
            let j = 2 * ki + 2;
            cells.push(CellParams { lemma: LemmaId::NonSpher1M1, i: j - 1, j, k });
            cells.push(CellParams { lemma: LemmaId::NonSpher1M1, i: j, j, k });
            if fs.is_char_two() {
                for j in 0..=1 {
                    cells.push(CellParams { lemma: LemmaId::Char2_02, i: j + 4 * ki + 2, j, k });
                }
            }
            out.extend(cells.into_iter().filter(|c| valid(f, c)).map(|c| (f.to_string(), c)));
        }
    }
    out
}

/// One identity-layer cell per lemma and field family.
pub fn identity_grid() -> Vec<(String, CellParams)> {
    let c = |l, i, j, k| CellParams { lemma: l, i, j, k };
    vec![
        ("Q3".into(), c(LemmaId::Spher01, 4, 1, 0)),
        ("Q5".into(), c(LemmaId::Spher01, 6, 2, 0)),
        ("Q3".into(), c(LemmaId::Spher1M1, 3, 3, 0)),
        ("F4((t))".into(), c(LemmaId::Spher1M1, 6, 4, 0)),
        ("Q3".into(), c(LemmaId::NonSpher01, 6, 2, 1)),
        ("Q5".into(), c(LemmaId::NonSpher1M1, 3, 4, 1)),
        ("F2((t))".into(), c(LemmaId::NonSpher1M1, 7, 4, 1)),
        ("F2((t))".into(), c(LemmaId::Char2_02, 8, 2, 1)),
        ("F4((t))".into(), c(LemmaId::Char2_02, 7, 2, 0)),
    ]
}

/// `(field, h, n, k)` for the FFT-lemma grid; `(n, k) = (2, 1)` is excluded
/// because it needs `n ≥ 2k+1`.
pub fn fft_grid() -> Vec<(String, u32, u32, u32)> {
    let mut out = vec![];
    for f in ["Q2", "Q3"] {
        for n in 2..=3 {
            for k in 0..=1 {
                if n > 2 * k {
                    out.push((f.to_string(), 1, n, k));
                }
            }
        }
    }
    out
}

/// Ledger parameter grid; β is 0 or 90% of the admissible limit.
pub fn ledger_grid(regime: Regime) -> Vec<LedgerParams> {
    let mut out = vec![];
    for alpha in [0.3, 0.7] {
        for h in [1u32, 2] {
            let lim = if regime.is_char_two() { alpha / (4.0 * h as f64) } else { alpha / (2.0 * h as f64) };
            for beta in [0.0, 0.9 * lim] {
                out.push(LedgerParams { alpha, h, beta, c: 0.0 });
            }
        }
    }
    out
}

fn sp(s: &str) -> SpaceSpec {
    s.parse().expect("suite space")
}

fn common(tasks: &mut Vec<Task>, full: bool) {
    let t = |id: String, covers: &[&str], kind| Task { id, covers: covers.iter().map(|s| s.to_string()).collect(), kind };
    let (trials, rand_n) = if full { (1000, 1000) } else { (200, 100) };
    tasks.push(t("decompose:F2((t)):residue".into(), &["generation"], TaskKind::Decompose { field: "F2((t))".into(), random: None }));
    for f in if full { vec!["Q2", "Q3"] } else { vec!["Q3"] } {
        tasks.push(t(format!("decompose:{f}:random"), &["generation"], TaskKind::Decompose { field: f.into(), random: Some((rand_n, 3)) }));
    }
    for g in ["S3", "D4"] {
        tasks.push(t(format!("averaging:{g}"), &["averaging"], TaskKind::Averaging { group: g.into(), trials }));
    }
    tasks.push(t("parity:F2((t)):(0,0):d1".into(), &["parity"], TaskKind::Parity { field: "F2((t))".into(), cell: (0, 0), depth: 1, sample: None }));
    tasks.push(t(
        "parity:F2((t)):(1,0):d5".into(),
        &["parity"],
        TaskKind::Parity { field: "F2((t))".into(), cell: (1, 0), depth: 5, sample: Some(if full { 2000 } else { 300 }) },
    ));
    let norm_grid: Vec<(&str, u32, &str)> = if full {
        let mut v = vec![];
        for f in ["Q2", "Q3"] {
            for h in [1, 2] {
                for d in ["l2:1", "l2:2", "l2:4"] {
                    v.push((f, h, d));
                }
            }
        }
        v
    } else {
        vec![("Q2", 1, "l2:2"), ("Q3", 2, "l2:1")]
    };
    for (f, h, d) in norm_grid {
        tasks.push(t(format!("fourier-norm:{f}:h{h}:{d}"), &["transform-norm"], TaskKind::FourierNorm { field: f.into(), h, space: sp(d), search: None }));
    }
    tasks.push(t(
        "fourier-norm:Q3:h1:l1.5:2".into(),
        &["transform-norm"],
        TaskKind::FourierNorm { field: "Q3".into(), h: 1, space: sp("l1.5:2"), search: Some(if full { 4000 } else { 800 }) },
    ));
    let fgrid = if full { fft_grid() } else { vec![("Q2".into(), 1, 2, 0), ("Q2".into(), 1, 3, 1)] };
    for (f, h, n, k) in fgrid {
        for space in ["l2:1", "l1.5:3"] {
            let covers: &[&str] = if k == 0 { &["fft-lemma"] } else { &["fft-k-variant"] };
            let (random, ascent) = if full { (10_000, 5000) } else { (300, 500) };
            tasks.push(t(
                format!("fft:{f}:h{h}:n{n}:k{k}:{space}"),
                covers,
                TaskKind::Fft { field: f.clone(), h, n, k, space: sp(space), random, ascent },
            ));
        }
    }
    tasks.push(t("type-const:l2:3".into(), &["type-constant"], TaskKind::TypeConst { space: sp("l2:3"), p: 2.0, vectors: 6, trials: 50 }));
    tasks.push(t("type-const:l1.5:3".into(), &["type-constant"], TaskKind::TypeConst { space: sp("l1.5:3"), p: 1.5, vectors: 6, trials: 50 }));
    let regimes = [Regime::CharNe2 { v0: 0, level: None }, Regime::CharNe2 { v0: 1, level: None }, Regime::Char2 { level: None }];
    for regime in regimes {
        let grid = if full { 300 } else { 80 };
        let params = if full { ledger_grid(regime) } else { vec![ledger_grid(regime)[5]] };
        for p in params {
            let name = match regime {
                Regime::CharNe2 { v0, .. } => format!("char-ne-2:v0={v0}"),
                Regime::Char2 { .. } => "char-2".into(),
            };
            tasks.push(t(
                format!("zigzag:{name}:a{}:h{}:b{:.4}", p.alpha, p.h, p.beta),
                &["zigzag"],
                TaskKind::Zigzag { regime, params: p, grid },
            ));
        }
    }
}

/// Task list of a profile, sorted by id.
pub fn manifest(profile: &str) -> Option<Vec<Task>> {
    let mut tasks = vec![];
    match profile {
        "quick" => {
            for (f, c) in identity_grid() {
                tasks.push(ident_task(&f, c, 200));
            }
            let c = |l, i, j, k| CellParams { lemma: l, i, j, k };
            for (f, cell) in [
                ("Q3", c(LemmaId::Spher01, 3, 1, 0)),
                ("Q3", c(LemmaId::Spher1M1, 4, 3, 0)),
                ("F2((t))", c(LemmaId::Char2_02, 7, 1, 0)),
                ("Q5", c(LemmaId::NonSpher01, 6, 2, 1)),
                ("Q3", c(LemmaId::NonSpher1M1, 3, 4, 1)),
            ] {
                tasks.push(cell_task(f, cell));
            }
            common(&mut tasks, false);
        }
        "full" => {
            for (f, c) in identity_grid() {
                tasks.push(ident_task(&f, c, 1000));
            }
            for (f, c) in cell_grid().into_iter().chain(nonspherical_grid()) {
                tasks.push(cell_task(&f, c));
            }
            common(&mut tasks, true);
        }
        _ => return None,
    }
    tasks.sort_by(|a, b| a.id.cmp(&b.id));
    Some(tasks)
}

fn failed(id: &str, msg: String) -> VerificationReport {
    let mut r = VerificationReport::new(id, json!({}), None);
    r.counterexample(json!({"error": msg}));
    r
}

/// Runs one task; errors become violated reports.
pub fn run_task(task: &Task, seed: u64, mutation: Option<Mutation>, threads: usize) -> VerificationReport {
    let res: Result<VerificationReport, String> = (|| match &task.kind {
        TaskKind::Identities { field: f, cell, n } => {
            verify_witness_identities(&field(f), cell, *n, seed, mutation, threads).map_err(|e| e.to_string())
        }
        TaskKind::Cell { field: f, cell, sample } => {
            let mode = sample.map_or(Mode::Exhaustive, |n| Mode::Sample { n, seed });
            verify_cell_lemma(&field(f), cell, mode, mutation, threads).map_err(|e| e.to_string())
        }
        TaskKind::Decompose { field: f, random } => {
            let s = match random {
                None => Sweep::Residue,
                Some((n, max_depth)) => Sweep::Random { n: *n, max_depth: *max_depth, seed },
            };
            verify_generation(&field(f), s, threads).map_err(|e| e.to_string())
        }
        TaskKind::Averaging { group, trials } => {
            let (g, subs, n) = configured(group).ok_or_else(|| format!("unknown group {group}"))?;
            verify_averaging(&g, &subs, n, *trials, seed).map_err(|e| e.to_string())
        }
        TaskKind::Parity { field: f, cell, depth, sample } => {
            let k = field(f);
            let mode = sample.map_or(Mode::Exhaustive, |n| Mode::Sample { n, seed });
            parity_volumes(&k, &d_matrix(&k, cell.0, cell.1), *depth, mode, threads).map(|p| p.1).map_err(|e| e.to_string())
        }
        TaskKind::FourierNorm { field: f, h, space, search } => fourier_norm_report(&field(f), *h, space, *search, seed),
        TaskKind::Fft { field: f, h, n, k, space, random, ascent } => {
            fft_report(&field(f), *h, *n, *k, 1, space, FftPlan { random: *random, ascent_iters: *ascent, seed })
        }
        TaskKind::TypeConst { space, p, vectors, trials } => type_report(space, *p, *vectors, *trials, seed),
        TaskKind::Zigzag { regime, params, grid } => zigzag_report(*regime, params, *grid),
    })();
    let mut r = res.unwrap_or_else(|e| failed(&task.id, e));
    r.task = task.id.clone();
    r
}

/// All task reports in manifest order, then a summary record.
pub fn run_suite(tasks: &[Task], ctx: &Ctx, mutation: Option<Mutation>) -> Vec<Output> {
    let reports = par_map(tasks, ctx.threads, |t| run_task(t, ctx.seed, mutation, 1));
    let count = |s: Status| reports.iter().filter(|r| r.status == s).count();
    let ok = count(Status::Pass) == reports.len();
    let summary = json!({
        "summary": {
            "status": if ok { "pass" } else { "violated" },
            "seed": ctx.seed,
            "mutation": mutation,
            "tasks": reports.len(),
            "passed": count(Status::Pass),
            "violated": count(Status::Violated),
            "undecided": count(Status::Undecided),
            "failing_tasks": reports.iter().filter(|r| r.status != Status::Pass).map(|r| r.task.clone()).collect::<Vec<_>>(),
        }
    });
    let mut out: Vec<Output> = reports.into_iter().map(Output::Report).collect();
    out.push(Output::Value { value: summary, ok });
    out
}
