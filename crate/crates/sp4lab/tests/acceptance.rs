//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Ratio;
use serde_json::Value;

use sp4lab::cli::suite::{cell_grid, fft_grid, identity_grid, ledger_grid, nonspherical_grid};
use sp4lab::cli::{fft_report, fourier_norm_report};
use sp4lab::exactfield::FieldSpec;
use sp4lab::fourier::{fft_k_instance, transform_norm, FftPlan, FourierError, SpaceSpec, Strategy};
use sp4lab::lemma_witnesses::{LemmaId, Mutation};
use sp4lab::sp4::{d_matrix, CartanPair, GroupElement};
use sp4lab::verifiers::averaging::{configured, verify_averaging};
use sp4lab::verifiers::cells::verify_cell_lemma;
use sp4lab::verifiers::decompose::{verify_generation, Sweep};
use sp4lab::verifiers::haar::enumerate_sp4_fq;
use sp4lab::verifiers::identities::verify_witness_identities;
use sp4lab::verifiers::parity::{parity_volumes, tally, wedge_valuations};
use sp4lab::verifiers::report::{Mode, VerificationReport};
use sp4lab::zigzag::{bound_ledger, components, plan_path, sweep, Regime, ZigzagError, ZigzagPath};

const THREADS: usize = 1;
const SEED: u64 = 42;

type Outcome = Result<String, String>;

fn field(s: &str) -> FieldSpec {
    s.parse().expect("field")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn passed(r: &VerificationReport, what: &str) -> Result<(), String> {
    ensure(r.passed() && r.counterexamples.is_empty(), || format!("{what}: {}", r.to_json_line()))
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sp4lab").chain(args.iter().copied());
    let code = sp4lab::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).expect("utf8"))
}

fn c1_cells() -> Outcome {
    let start = Instant::now();
    let grid = cell_grid();
    let mut per: BTreeSet<String> = BTreeSet::new();
    for (f, c) in &grid {
        let k = field(f);
        let r = verify_cell_lemma(&k, c, Mode::Exhaustive, None, THREADS).map_err(|e| format!("{f} {c:?}: {e}"))?;
        passed(&r, &format!("{f} {c:?}"))?;
        per.insert(format!("{}:{f}", c.lemma));
    }
    // the grid reaches every requested lemma/field pair
    for want in ["SPHER01:Q3", "SPHER01:Q5", "SPHER1M1:Q3", "SPHER1M1:F2((t))", "SPHER1M1:F4((t))", "CHAR2_02:F2((t))", "CHAR2_02:F4((t))"] {
        ensure(per.contains(want), || format!("grid misses {want}"))?;
    }
    for (_, c) in grid.iter().filter(|(_, c)| c.lemma == LemmaId::Char2_02) {
        ensure((2..=6).contains(&(c.i - c.j)), || format!("CHAR2_02 cell out of range {c:?}"))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("cell suites took {t:?}"))?;
    Ok(format!("{} cells exhaustive in {:.1}s", grid.len(), t.as_secs_f64()))
}

fn c2_nonspherical() -> Outcome {
    let grid = nonspherical_grid();
    let mut qs = BTreeSet::new();
    let mut below_diag = false;
    for (f, c) in &grid {
        let k = field(f);
        let r = verify_cell_lemma(&k, c, Mode::Exhaustive, None, THREADS).map_err(|e| format!("{f} {c:?}: {e}"))?;
        passed(&r, &format!("{f} {c:?}"))?;
        qs.insert((k.q, c.k));
        below_diag |= c.lemma == LemmaId::NonSpher1M1 && c.i == c.j - 1;
    }
    for q in 2..=5u64 {
        for lvl in 1..=2u32 {
            ensure(qs.contains(&(q, lvl)), || format!("no cell for q={q}, k={lvl}"))?;
        }
    }
    ensure(below_diag, || "no i=j-1 cell".into())?;
    Ok(format!("{} cells, q in 2..=5, k in {{1,2}}", grid.len()))
}

fn c3_identities() -> Outcome {
    let mut lemmas = BTreeSet::new();
    for (f, c) in identity_grid() {
        let r = verify_witness_identities(&field(&f), &c, 1000, SEED, None, THREADS).map_err(|e| e.to_string())?;
        passed(&r, &format!("identities {f} {c:?}"))?;
        ensure(r.cases_run >= 1000, || format!("{f} {c:?}: only {} tuples", r.cases_run))?;
        lemmas.insert(c.lemma.to_string());
    }
    ensure(lemmas.len() == 5, || format!("lemmas covered: {lemmas:?}"))?;
    let (code, _) = cli(&["suite", "quick", "--seed", "42"]);
    ensure(code == 0, || format!("clean quick suite exited {code}"))?;
    let names = ["minor-sign-flip", "d-exponent", "drop-eps1", "wrong-n1", "minor-rows"];
    for m in names {
        let mu: Mutation = m.parse().map_err(|e| format!("{m}: {e:?}"))?;
        let (code, _) = cli(&["suite", "quick", "--seed", "42", "--mutation", m]);
        ensure(code == 1, || format!("mutation {m} exited {code}"))?;
        // the identity layer alone already sees each mutation somewhere
        let caught = identity_grid().iter().any(|(f, c)| {
            verify_witness_identities(&field(f), c, 200, SEED, Some(mu), THREADS).map_or(true, |r| !r.passed())
        });
        ensure(caught, || format!("identity layer misses {m}"))?;
    }
    Ok("9 cells x 1000 tuples; 5/5 mutations exit 1".into())
}

fn c4_generation() -> Outcome {
    let k = field("F2((t))");
    let all = enumerate_sp4_fq(&k);
    ensure(all.len() == 720, || format!("|Sp4(F2)| = {}", all.len()))?;
    let distinct: BTreeSet<_> = all.iter().collect();
    ensure(distinct.len() == 720, || "duplicate residue elements".into())?;
    let mut worst = 0u64;
    let mut runs = vec![("F2((t)) residue", verify_generation(&k, Sweep::Residue, THREADS))];
    for (f, s) in [("Q2", 7u64), ("Q3", 8)] {
        runs.push((f, verify_generation(&field(f), Sweep::Random { n: 1000, max_depth: 3, seed: s }, THREADS)));
    }
    for (name, r) in runs {
        let r = r.map_err(|e| format!("{name}: {e}"))?;
        passed(&r, name)?;
        let b = r.margins["max_block_count"].as_u64().unwrap_or(u64::MAX);
        ensure(b <= 30, || format!("{name}: block count {b}"))?;
        worst = worst.max(b);
    }
    Ok(format!("720 residue + 2x1000 random lifts, max block count {worst}"))
}

fn c5_averaging() -> Outcome {
    let mut notes = vec![];
    for g in ["S3", "D4"] {
        let (grp, subs, n) = configured(g).ok_or("unconfigured group")?;
        let r = verify_averaging(&grp, &subs, n, 1000, SEED).map_err(|e| e.to_string())?;
        passed(&r, g)?;
        notes.push(format!("{g} max ratio {:.4}", r.margins["max_ratio"].as_f64().unwrap_or(f64::NAN)));
    }
    Ok(notes.join(", "))
}

/// Largest singular value of `(1/N)[exp(2πi ab/N)]` on `Z/N`, `N = q^h`.
fn dft_norm_oracle(q: u64, h: u32) -> f64 {
    let n = q.pow(h) as usize;
    let m = DMatrix::from_fn(n, n, |a, b| {
        Complex64::from_polar(1.0, std::f64::consts::TAU * ((a * b) % n) as f64 / n as f64) / n as f64
    });
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

fn c6_fourier() -> Outcome {
    for q in [2u64, 3] {
        let k = field(&format!("Q{q}"));
        for h in [1u32, 2] {
            let oracle = dft_norm_oracle(q, h);
            let want = (q as f64).powf(-(h as f64) / 2.0);
            ensure((oracle - want).abs() < 1e-9, || format!("oracle {oracle} vs {want}"))?;
            for d in [1usize, 2, 4] {
                let b = transform_norm(&k, h, &SpaceSpec::hilbert(d), Strategy::Exact).map_err(|e| e.to_string())?;
                ensure((b.lower - want).abs() < 1e-9 && (b.upper - want).abs() < 1e-9, || {
                    format!("Q{q} h{h} d{d}: [{}, {}] vs {want}", b.lower, b.upper)
                })?;
            }
        }
    }
    let r = fourier_norm_report(&field("Q3"), 1, &"l1.5:2".parse().map_err(|e| format!("{e:?}"))?, Some(2000), SEED)?;
    passed(&r, "l1.5 bracket")?;
    match fft_k_instance(&field("Q2"), 1, 2, 1, 1, 1.0) {
        Err(FourierError::Precondition(_)) => {}
        other => return Err(format!("(n,k)=(2,1) not rejected: {:?}", other.map(|i| i.label))),
    }
    let mut worst = 0.0f64;
    let mut worst_k = 0.0f64;
    let mut count = 0;
    for (f, h, n, lvl) in fft_grid() {
        ensure(!(n == 2 && lvl == 1), || "grid contains (2,1)".into())?;
        for space in ["l2:1", "l1.5:2"] {
            let sp: SpaceSpec = space.parse().map_err(|e| format!("{e:?}"))?;
            let plan = FftPlan { random: 10_000, ascent_iters: 5000, seed: SEED };
            let r = fft_report(&field(&f), h, n, lvl, 1, &sp, plan)?;
            let label = format!("fft {f} n{n} k{lvl} {space}");
            passed(&r, &label)?;
            let m = r.margins["max_ratio"].as_f64().unwrap_or(f64::INFINITY);
            ensure(m <= 1.0 + 1e-8, || format!("{label}: ratio {m}"))?;
            if let Some(e) = r.margins.get("exact_ratio").and_then(Value::as_f64) {
                ensure(e <= 1.0 + 1e-8, || format!("{label}: exact ratio {e}"))?;
                worst = worst.max(e);
            }
            if lvl > 0 {
                let e = r.margins["k_identity_rel_error"].as_f64().unwrap_or(f64::INFINITY);
                ensure(e <= 1e-12, || format!("{label}: k identity {e}"))?;
                worst_k = worst_k.max(e);
            }
            worst = worst.max(m);
            count += 1;
        }
    }
    Ok(format!("norms q^(-h/2) to 1e-9; {count} FFT runs, max ratio {worst:.6}; k identity {worst_k:.1e}"))
}

/// Independent legality check: each move shifts by its vector, stays in Λ and
/// is not blocked at its base.
fn legal(path: &ZigzagPath, regime: Regime) -> Result<(), String> {
    let mut at = path.cells[0];
    for m in path.all_moves() {
        let (di, dj) = m.delta.vector();
        let s = if m.reversed { -1 } else { 1 };
        ensure(m.from == at, || format!("{:?}: move starts at {:?}", path.cells[0], m.from))?;
        ensure(m.to == CartanPair::new(m.from.i + s * di, m.from.j + s * dj), || format!("bad vector {m:?}"))?;
        ensure(m.base == if m.reversed { m.to } else { m.from }, || format!("bad base {m:?}"))?;
        ensure(m.to.in_lambda() && m.from.in_lambda(), || format!("leaves the chamber {m:?}"))?;
        ensure(regime.blocking(m.delta, m.base).is_none(), || format!("blocked move {m:?}"))?;
        at = m.to;
    }
    let e = path.endpoint();
    ensure(e.i == 2 * e.j, || format!("endpoint {e:?} off the diagonal"))?;
    if regime.is_char_two() {
        let p0 = path.cells[0].length().rem_euclid(2);
        ensure(path.all_moves().all(|m| m.to.length().rem_euclid(2) == p0), || "parity changes".into())?;
    }
    Ok(())
}

fn c7_zigzag() -> Outcome {
    let start = Instant::now();
    let regimes = [Regime::CharNe2 { v0: 0, level: None }, Regime::CharNe2 { v0: 1, level: None }, Regime::Char2 { level: None }];
    let mut notes = vec![];
    for regime in regimes {
        // blocked starts: exactly those whose move-graph component never leaves the walls
        let box_cells: Vec<CartanPair> = (0..=40).flat_map(|i| (0..=i).map(move |j| CartanPair::new(i, j))).collect();
        let comps = components(regime, &box_cells);
        let trapped = |c: CartanPair| {
            let comp = comps.iter().find(|x| x.contains(&c)).expect("covered");
            !comp.iter().any(|x| x.j >= 4 && x.i - x.j >= 5)
        };
        let mut blocked = vec![];
        for len in 0..=300 {
            for j in 0..=len / 2 {
                let c = CartanPair::new(len - j, j);
                match plan_path(c, regime) {
                    Ok(p) => {
                        legal(&p, regime)?;
                        if c.i <= 20 {
                            ensure(!trapped(c), || format!("{c:?} planned but trapped"))?;
                        }
                    }
                    Err(ZigzagError::Blocked { .. }) => {
                        ensure(c.i <= 20 && trapped(c), || format!("{c:?} blocked but reachable"))?;
                        blocked.push(format!("({},{})", c.i, c.j));
                    }
                    Err(e) => return Err(format!("{c:?}: {e}")),
                }
            }
        }
        let mut rates = vec![];
        let mut c_max = 0.0f64;
        for p in ledger_grid(regime) {
            let s = sweep(regime, &p, 300).map_err(|e| e.to_string())?;
            ensure(s.recheck_failures == 0, || format!("{regime:?}: {} recheck failures", s.recheck_failures))?;
            ensure(s.c_hat.is_finite() && s.c_hat > 0.0, || format!("{regime:?}: c_hat {}", s.c_hat))?;
            ensure(s.monotone, || format!("{regime:?} {p:?}: totals not monotone"))?;
            ensure(s.rate > 0.0 && (s.rate - p.rate(&regime)).abs() < 1e-15, || "rate not surfaced".into())?;
            rates.push(format!("{:.4}", s.rate));
            c_max = c_max.max(s.c_hat);
        }
        // ledger total against a brute-force sum of the diagonal tail
        let p = ledger_grid(regime)[5];
        let path = plan_path(CartanPair::new(57, 11), regime).map_err(|e| e.to_string())?;
        let l = bound_ledger(&path, &p).map_err(|e| e.to_string())?;
        let s = if regime.is_char_two() { 2 } else { 1 };
        let mut tail = 0.0;
        for m in 0..20_000 {
            for mv in &path.diagonal_step {
                tail += p.exponent(mv.delta, CartanPair::new(mv.base.i + 2 * m * s, mv.base.j + m * s)).exp();
            }
        }
        let approach: f64 = path.moves.iter().map(|mv| p.exponent(mv.delta, mv.base).exp()).sum();
        let total = approach + tail;
        ensure((total - l.total).abs() <= 1e-9 * total, || format!("ledger {} vs brute force {total}", l.total))?;
        notes.push(format!("{regime:?}: blocked {} rates [{}] c_hat<={c_max:.2}", blocked.join(" "), rates.join(",")));
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("zigzag took {t:?}"))?;
    Ok(format!("{:.1}s; {}", t.as_secs_f64(), notes.join("; ")))
}

fn c8_parity() -> Outcome {
    let k = field("F2((t))");
    let id = GroupElement::identity(&k);
    let (p, r) = parity_volumes(&k, &id, 1, Mode::Exhaustive, THREADS).map_err(|e| e.to_string())?;
    passed(&r, "identity depth 1")?;
    ensure(p.total == 720, || format!("total {}", p.total))?;
    ensure(p.decided_mass() <= Ratio::from_integer(1), || "decided mass above 1".into())?;
    // oracle: residue matrices whose first two columns are dependent mod 2
    let degenerate = enumerate_sp4_fq(&k)
        .iter()
        .filter(|m| {
            (0..4).all(|r| (r + 1..4).all(|s| (m[r][0] * m[s][1] + m[r][1] * m[s][0]) % 2 == 0))
        })
        .count() as u64;
    ensure(p.degenerate == degenerate && p.undecided == degenerate, || {
        format!("undecided {} degenerate {} oracle {degenerate}", p.undecided, p.degenerate)
    })?;
    let one = Ratio::from_integer(1);
    for (cell, n) in [((1, 0), 2000u64), ((2, 1), 2000)] {
        let g = d_matrix(&k, cell.0, cell.1);
        let mode = Mode::Sample { n, seed: SEED };
        let (p, r) = parity_volumes(&k, &g, 5, mode.clone(), THREADS).map_err(|e| e.to_string())?;
        passed(&r, &format!("D{cell:?} depth 5"))?;
        let ws = wedge_valuations(&k, &g, 5, &mode, THREADS);
        let ij = cell.0 + cell.1;
        let masses: Vec<_> = (1..=5).map(|d| tally(&ws, d, ij).decided_mass()).collect();
        ensure(masses.windows(2).all(|w| w[0] <= w[1]), || format!("D{cell:?}: {masses:?}"))?;
        let ((alo, ahi), (blo, bhi)) = (p.alpha(), p.beta());
        ensure(alo + bhi == one && ahi + blo == one, || format!("D{cell:?}: endpoints do not pair"))?;
        ensure(p.decided_mass() <= one, || "decided mass above 1".into())?;
    }
    Ok(format!("depth 1: undecided = degenerate = {degenerate}; depth-5 samples monotone, endpoints pair to 1"))
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("elapsed_ms");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

fn normalized(out: &str) -> Result<String, String> {
    let mut lines = vec![];
    for l in out.lines() {
        let mut v: Value = serde_json::from_str(l).map_err(|e| format!("bad json line: {e}"))?;
        strip_timing(&mut v);
        lines.push(v.to_string());
    }
    Ok(lines.join("\n"))
}

fn c9_determinism() -> Outcome {
    let (c1, a) = cli(&["--format", "json", "suite", "quick", "--seed", "42"]);
    let (c2, b) = cli(&["--format", "json", "suite", "quick", "--seed", "42"]);
    ensure(c1 == 0 && c2 == 0, || format!("exit codes {c1} {c2}"))?;
    let (na, nb) = (normalized(&a)?, normalized(&b)?);
    ensure(na == nb, || "reports differ between runs".into())?;
    ensure(a.contains("elapsed_ms"), || "timing field missing".into())?;
    Ok(format!("{} report lines byte-identical", na.lines().count()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("cell lemmas, spherical and char-2 suites", c1_cells),
        ("non-spherical layers", c2_nonspherical),
        ("identity layer and mutations", c3_identities),
        ("generation by K1 and K2", c4_generation),
        ("averaging on S3 and D4", c5_averaging),
        ("transform norm and FFT lemma", c6_fourier),
        ("zigzag planner and ledger", c7_zigzag),
        ("parity volumes", c8_parity),
        ("determinism", c9_determinism),
    ];
    let mut failures = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("criterion {} [{name}]: PASS ({t:.1}s) {detail}", n + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {} [{name}]: FAIL ({t:.1}s) {why}", n + 1);
            }
        }
    }
    println!("acceptance: {}/9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
