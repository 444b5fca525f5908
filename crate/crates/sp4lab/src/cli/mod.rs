//! Command-line front end. Every command writes JSON Lines (or a text rendering)
//! and returns an exit code: 0 pass, 1 violation, 2 usage or configuration error.

pub mod suite;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::exactfield::FieldSpec;
use crate::fourier::{self, FftPlan, SpaceSpec, Strategy};
use crate::lemma_witnesses::{build_witness, CellParams, LemmaId, Mutation, Tuple};
use crate::par::resolve_threads;
use crate::sp4::{cartan_invariants, d_matrix, symplectic_check, Mat4};
use crate::verifiers::decompose::{verify_generation, Sweep};
use crate::verifiers::identities::verify_witness_identities;
use crate::verifiers::cells::verify_cell_lemma;
use crate::verifiers::parity::parity_volumes;
use crate::verifiers::report::{Mode, Status, VerificationReport};
use crate::zigzag::{self, LedgerParams, Regime};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "sp4lab", version, about = "Exact verification toolkit for Sp4 over non-archimedean local fields")]
pub struct Cli {
    /// Local field: Qp or Fq((t))
    #[arg(long, global = true)]
    pub field: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "SP4LAB_THREADS")]
    pub threads: Option<usize>,
    /// Write the report stream here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value file with the same keys as the global flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

fn parse_pair(s: &str) -> Result<(i32, i32), String> {
    let (a, b) = s.trim_matches(|c| c == '(' || c == ')').split_once(',').ok_or_else(|| format!("expected i,j, got {s:?}"))?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Residue,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RegimeKind {
    #[value(name = "char-ne-2")]
    CharNe2,
    #[value(name = "char-2")]
    Char2,
}

#[derive(Args, Debug, Clone)]
pub struct RegimeArgs {
    /// Defaults to the regime of --field
    #[arg(long, value_enum)]
    pub regime: Option<RegimeKind>,
    /// v(2); defaults to the value for --field
    #[arg(long)]
    pub v0: Option<u32>,
    /// Congruence level of the non-spherical lemmas (spherical when absent)
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Residue field and valuation data of --field
    FieldInfo,
    /// Cartan pair of a symplectic matrix
    Cartan {
        /// Rows separated by ';', entries by ','
        #[arg(long, conflicts_with = "d")]
        matrix: Option<String>,
        /// Use D(i,j)
        #[arg(long, value_parser = parse_pair)]
        d: Option<(i32, i32)>,
    },
    /// Build and check one lemma witness
    Witness {
        lemma: LemmaId,
        #[arg(long, value_parser = parse_pair)]
        cell: (i32, i32),
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 0)]
        a: u64,
        #[arg(long, default_value_t = 0)]
        b: u64,
        #[arg(long, default_value_t = 0)]
        x: u64,
        #[arg(long, default_value_t = 0)]
        eps: u64,
        #[arg(long)]
        mutation: Option<Mutation>,
    },
    /// Verify a lemma at a cell (exhaustive unless --sample or --identities)
    Verify {
        lemma: LemmaId,
        #[arg(long, value_parser = parse_pair)]
        cell: (i32, i32),
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long)]
        sample: Option<u64>,
        /// Run the identity layer on this many sampled tuples
        #[arg(long)]
        identities: Option<u64>,
        #[arg(long)]
        mutation: Option<Mutation>,
    },
    /// K1/K2 factorization of residue lifts or random elements of K
    Decompose {
        #[arg(long, value_enum, default_value = "residue")]
        sweep: SweepKind,
        #[arg(long, default_value_t = 1000)]
        n: u64,
        #[arg(long, default_value_t = 3)]
        max_depth: u32,
    },
    /// Parity volumes of D(i,j) at depth n
    Parity {
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        cell: (i32, i32),
        #[arg(long, default_value_t = 1)]
        depth: u32,
        #[arg(long)]
        sample: Option<u64>,
    },
    /// Norm of the finite Fourier transform tensored with l<p>:<d>
    FourierNorm {
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long, default_value = "l2:1")]
        space: SpaceSpec,
        /// Ascent iterations for the lower bound
        #[arg(long)]
        search: Option<u64>,
    },
    /// FFT-lemma inequality (k = 0) or its k-variant
    FftCheck {
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 1)]
        eps0: u64,
        #[arg(long, default_value = "l2:1")]
        space: SpaceSpec,
        #[arg(long, default_value_t = 1000)]
        random: u64,
        #[arg(long, default_value_t = 2000)]
        ascent: u64,
    },
    /// Type-p constant estimate of l<p>:<d>
    TypeConst {
        #[arg(long, default_value = "l2:2")]
        space: SpaceSpec,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 4)]
        vectors: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Weyl-chamber paths and the exponent ledger
    Zigzag {
        #[command(subcommand)]
        action: ZigzagAction,
    },
    /// Run a suite profile (quick or full)
    Suite {
        profile: String,
        #[arg(long)]
        mutation: Option<Mutation>,
    },
}

#[derive(Subcommand, Debug)]
pub enum ZigzagAction {
    Plan {
        #[arg(long, value_parser = parse_pair)]
        start: (i32, i32),
        #[command(flatten)]
        regime: RegimeArgs,
    },
    Bound {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        h: u32,
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long = "C", default_value_t = 0.0)]
        c: f64,
        /// Starts with i+j ≤ grid
        #[arg(long, default_value_t = 300)]
        grid: i32,
        #[command(flatten)]
        regime: RegimeArgs,
    },
}

/// Resolved global settings.
#[derive(Clone, Debug)]
pub struct Ctx {
    pub field: FieldSpec,
    pub format: Format,
    pub seed: u64,
    pub threads: usize,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 42;

/// `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = vec![];
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let k = k.trim().trim_start_matches("--").to_string();
        if !["field", "format", "seed", "threads", "out"].contains(&k.as_str()) {
            return Err(format!("config line {}: unknown key {k:?}", n + 1));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

fn resolve(cli: &Cli) -> Result<Ctx, String> {
    let mut field = "Q3".to_string();
    let mut format = Format::Json;
    let mut seed = DEFAULT_SEED;
    let mut threads = None;
    let mut out = None;
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        for (k, v) in parse_config(&text)? {
            match k.as_str() {
                "field" => field = v,
                "format" => format = Format::from_str(&v, true).map_err(|e| format!("config format: {e}"))?,
                "seed" => seed = v.parse().map_err(|e| format!("config seed: {e}"))?,
                "threads" => threads = Some(v.parse::<usize>().map_err(|e| format!("config threads: {e}"))?),
                _ => out = Some(PathBuf::from(v)),
            }
        }
    }
    if let Some(f) = &cli.field {
        field = f.clone();
    }
    let field: FieldSpec = field.parse().map_err(|e| format!("--field {field:?}: {e}"))?;
    Ok(Ctx {
        field,
        format: cli.format.unwrap_or(format),
        seed: cli.seed.unwrap_or(seed),
        threads: resolve_threads(cli.threads.or(threads)),
        out: cli.out.clone().or(out),
    })
}

/// One output record.
#[derive(Clone, Debug)]
pub enum Output {
    Report(VerificationReport),
    Value { value: Value, ok: bool },
}

impl Output {
    fn ok(&self) -> bool {
        match self {
            Output::Report(r) => r.status == Status::Pass,
            Output::Value { ok, .. } => *ok,
        }
    }
    pub fn render(&self, f: Format) -> String {
        match (self, f) {
            (Output::Report(r), Format::Json) => r.to_json_line(),
            (Output::Report(r), Format::Text) => r.to_text(),
            (Output::Value { value, .. }, Format::Json) => value.to_string(),
            (Output::Value { value, .. }, Format::Text) => serde_json::to_string_pretty(value).expect("json"),
        }
    }
}

fn regime_of(field: &FieldSpec, a: &RegimeArgs) -> Regime {
    let char2 = match a.regime {
        Some(RegimeKind::Char2) => true,
        Some(RegimeKind::CharNe2) => false,
        None => field.is_char_two(),
    };
    if char2 {
        Regime::Char2 { level: a.level }
    } else {
        Regime::CharNe2 { v0: a.v0.unwrap_or_else(|| field.two_valuation().unwrap_or(0)), level: a.level }
    }
}

fn parse_matrix(field: &FieldSpec, s: &str) -> Result<Mat4, String> {
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != 4 {
        return Err(format!("expected 4 rows, got {}", rows.len()));
    }
    let mut m = Mat4::zero(field);
    for (r, row) in rows.iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        if cols.len() != 4 {
            return Err(format!("row {r}: expected 4 entries, got {}", cols.len()));
        }
        for (c, e) in cols.iter().enumerate() {
            m.set(r, c, field.parse_elem(e).map_err(|e| e.to_string())?);
        }
    }
    Ok(m)
}

/// Runs one command; `Err` is a usage/configuration error.
pub fn execute(cmd: &Command, ctx: &Ctx) -> Result<Vec<Output>, String> {
    let k = &ctx.field;
    let err = |e: &dyn std::fmt::Display| e.to_string();
    let out = match cmd {
        Command::FieldInfo => vec![Output::Value {
            value: json!({
                "field": k.name(), "p": k.p, "f": k.f, "q": k.q, "characteristic": k.characteristic(),
                "v0": k.two_valuation().ok(), "char_two": k.is_char_two(),
            }),
            ok: true,
        }],
        Command::Cartan { matrix, d } => {
            let g = match (matrix, d) {
                (Some(s), _) => symplectic_check(k, parse_matrix(k, s)?).map_err(|e| err(&e))?,
                (None, Some((i, j))) => d_matrix(k, *i, *j),
                (None, None) => return Err("cartan needs --matrix or --d".into()),
            };
            let info = cartan_invariants(&g).map_err(|e| err(&e))?;
            vec![Output::Value { value: json!({"field": k.name(), "cartan": info}), ok: true }]
        }
        Command::Witness { lemma, cell, k: lvl, a, b, x, eps, mutation } => {
            let c = CellParams { lemma: *lemma, i: cell.0, j: cell.1, k: *lvl };
            let w = build_witness(k, &c, &Tuple { a: *a, b: *b, x: *x, eps: *eps }, *mutation).map_err(|e| err(&e))?;
            let chk = w.check();
            let ok = chk.ok();
            vec![Output::Value {
                value: json!({"witness": w.to_json(), "failures": chk.failures, "observed_cell": chk.observed_cell.to_string()}),
                ok,
            }]
        }
        Command::Verify { lemma, cell, k: lvl, sample, identities, mutation } => {
            let c = CellParams { lemma: *lemma, i: cell.0, j: cell.1, k: *lvl };
            let r = match (identities, sample) {
                (Some(n), _) => verify_witness_identities(k, &c, *n, ctx.seed, *mutation, ctx.threads),
                (None, Some(n)) => verify_cell_lemma(k, &c, Mode::Sample { n: *n, seed: ctx.seed }, *mutation, ctx.threads),
                (None, None) => verify_cell_lemma(k, &c, Mode::Exhaustive, *mutation, ctx.threads),
            };
            vec![Output::Report(r.map_err(|e| err(&e))?)]
        }
        Command::Decompose { sweep, n, max_depth } => {
            let s = match sweep {
                SweepKind::Residue => Sweep::Residue,
                SweepKind::Random => Sweep::Random { n: *n, max_depth: *max_depth, seed: ctx.seed },
            };
            vec![Output::Report(verify_generation(k, s, ctx.threads).map_err(|e| err(&e))?)]
        }
        Command::Parity { cell, depth, sample } => {
            let g = d_matrix(k, cell.0, cell.1);
            let mode = sample.map_or(Mode::Exhaustive, |n| Mode::Sample { n, seed: ctx.seed });
            vec![Output::Report(parity_volumes(k, &g, *depth, mode, ctx.threads).map_err(|e| err(&e))?.1)]
        }
        Command::FourierNorm { h, space, search } => vec![Output::Report(fourier_norm_report(k, *h, space, *search, ctx.seed)?)],
        Command::FftCheck { h, n, k: lvl, eps0, space, random, ascent } => {
            let plan = FftPlan { random: *random, ascent_iters: *ascent, seed: ctx.seed };
            vec![Output::Report(fft_report(k, *h, *n, *lvl, *eps0, space, plan)?)]
        }
        Command::TypeConst { space, p, vectors, trials } => {
            vec![Output::Report(type_report(space, *p, *vectors, *trials, ctx.seed)?)]
        }
        Command::Zigzag { action: ZigzagAction::Plan { start, regime } } => {
            let regime = regime_of(k, regime);
            let path = zigzag::plan_path(crate::sp4::CartanPair::new(start.0, start.1), regime).map_err(|e| err(&e))?;
            let problems = zigzag::recheck(&path);
            vec![Output::Value { value: json!({"path": path, "recheck": problems}), ok: problems.is_empty() }]
        }
        Command::Zigzag { action: ZigzagAction::Bound { alpha, h, beta, c, grid, regime } } => {
            let regime = regime_of(k, regime);
            let p = LedgerParams { alpha: *alpha, h: *h, beta: *beta, c: *c };
            vec![Output::Report(zigzag_report(regime, &p, *grid)?)]
        }
        Command::Suite { profile, mutation } => {
            let tasks = suite::manifest(profile).ok_or_else(|| format!("unknown suite profile {profile:?} (expected quick or full)"))?;
            suite::run_suite(&tasks, ctx, *mutation)
        }
    };
    Ok(out)
}

/// Transform-norm bracket as a report; Hilbert runs are compared with `q^{-h/2}`.
pub fn fourier_norm_report(k: &FieldSpec, h: u32, space: &SpaceSpec, search: Option<u64>, seed: u64) -> Result<VerificationReport, String> {
    let start = std::time::Instant::now();
    let strategy = match search {
        Some(iters) => Strategy::Search { iters, seed },
        None => Strategy::Exact,
    };
    let b = fourier::transform_norm(k, h, space, strategy).map_err(|e| e.to_string())?;
    let mut rep = VerificationReport::new(
        "fourier-norm",
        json!({"field": k.name(), "h": h, "space": space.to_string(), "search": search}),
        search.map(|_| seed),
    );
    rep.cases_total = 1;
    rep.cases_run = 1;
    if b.lower > b.upper * (1.0 + 1e-9) {
        rep.counterexample(json!({"observed": "lower bound exceeds upper bound", "lower": b.lower, "upper": b.upper}));
    }
    if space.is_hilbert() && b.certificate == "svd" {
        let want = (k.q as f64).powf(-(h as f64) / 2.0);
        rep.margin("expected", want);
        if (b.lower - want).abs() > 1e-9 {
            rep.counterexample(json!({"observed": b.lower, "expected": want}));
        }
    }
    rep.margin("lower", b.lower);
    rep.margin("upper", b.upper);
    rep.margin("alpha", b.alpha());
    rep.margin("certificate", b.certificate);
    rep.margin("witness", b.witness.clone());
    Ok(rep.finish(start))
}

/// FFT-lemma report; for `k ≥ 1` the rewriting identity is checked as well.
pub fn fft_report(k: &FieldSpec, h: u32, n: u32, lvl: u32, eps0: u64, space: &SpaceSpec, plan: FftPlan) -> Result<VerificationReport, String> {
    let mut rep = fourier::check_fft_lemma(k, h, n, lvl, eps0, space, plan).map_err(|e| e.to_string())?;
    if lvl > 0 {
        let e = fourier::k_variant_identity_error(k, h, n, lvl, eps0, space, 20, plan.seed).map_err(|e| e.to_string())?;
        rep.margin("k_identity_rel_error", e);
        if e > 1e-12 {
            rep.counterexample(json!({"observed": "rewriting identity mismatch", "rel_error": e}));
        }
    }
    Ok(rep)
}

/// Type-constant estimate; the Hilbert ratio at `p = 2` must be exactly 1.
pub fn type_report(space: &SpaceSpec, p: f64, vectors: usize, trials: u64, seed: u64) -> Result<VerificationReport, String> {
    let start = std::time::Instant::now();
    let s = fourier::estimate_type_constant(space, p, vectors, trials, seed).map_err(|e| e.to_string())?;
    let mut rep = VerificationReport::new(
        "type-const",
        json!({"space": space.to_string(), "p": p, "vectors": vectors, "trials": trials}),
        Some(seed),
    );
    rep.cases_total = trials;
    rep.cases_run = trials;
    if space.is_hilbert() && p == 2.0 && (s.max_ratio - 1.0).abs() > 1e-9 {
        rep.counterexample(json!({"observed": s.max_ratio, "expected": 1.0}));
    }
    rep.margin("max_ratio", s.max_ratio);
    rep.margin("mean_ratio", s.mean_ratio);
    rep.margin("exact_signs", s.exact_signs);
    Ok(rep.finish(start))
}

/// Ledger sweep plus the reachability/parity check of the move graph.
pub fn zigzag_report(regime: Regime, p: &LedgerParams, grid: i32) -> Result<VerificationReport, String> {
    let start = std::time::Instant::now();
    let s = zigzag::sweep(regime, p, grid).map_err(|e| e.to_string())?;
    let mut rep = VerificationReport::new("zigzag-bound", json!({"regime": regime, "ledger": p, "grid": grid}), None);
    rep.cases_total = s.starts;
    rep.cases_run = s.starts - s.blocked;
    if s.recheck_failures > 0 {
        rep.counterexample(json!({"observed": "illegal planner output", "count": s.recheck_failures}));
    }
    if !s.c_hat.is_finite() {
        rep.counterexample(json!({"observed": "unbounded ledger constant"}));
    }
    if !s.monotone {
        rep.counterexample(json!({"observed": "ledger totals not decreasing along canonical starts"}));
    }
    let reach = zigzag::reachability(regime, 40, 5);
    let want = if regime.is_char_two() { 2 } else { 1 };
    if reach["components"] != want || reach["parity_pure"] != regime.is_char_two() {
        rep.counterexample(json!({"observed": "move graph components", "reachability": reach}));
    }
    rep.margin("rate_t", s.rate);
    rep.margin("c_hat", s.c_hat);
    rep.margin("c_hat_argmax", s.argmax.to_string());
    rep.margin("c_hat_by_min_i", serde_json::to_value(&s.tail_sup).expect("map"));
    rep.margin("blocked_starts", s.blocked);
    rep.margin("reachability", reach);
    Ok(rep.finish(start))
}

fn emit(outputs: &[Output], ctx: &Ctx, stdout: &mut dyn Write) -> Result<(), String> {
    let mut text = String::new();
    for o in outputs {
        text.push_str(&o.render(ctx.format));
        text.push('\n');
    }
    match &ctx.out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    let result = resolve(&cli).and_then(|ctx| execute(&cli.command, &ctx).map(|o| (ctx, o)));
    match result {
        Ok((ctx, outputs)) => {
            if let Err(e) = emit(&outputs, &ctx, stdout) {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_USAGE;
            }
            if outputs.iter().all(Output::ok) {
                EXIT_PASS
            } else {
                EXIT_VIOLATION
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = vec![];
        let mut err = vec![];
        let mut full = vec!["sp4lab"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn config_keys() {
        let c = parse_config("# x\nfield = F2((t))\nseed=7\n").unwrap();
        assert_eq!(c, vec![("field".into(), "F2((t))".into()), ("seed".into(), "7".into())]);
        assert!(parse_config("colour=red").is_err());
        assert!(parse_config("nonsense").is_err());
    }

    #[test]
    fn field_info_and_cartan() {
        let (code, out, _) = call(&["field-info", "--field", "Q2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["v0"], 1);
        let (code, out, _) = call(&["cartan", "--d", "3,1", "--field", "F2((t))"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["cartan"]["pair"]["i"], 3);
        let (code, out, _) = call(&["cartan", "--matrix", "0,0,0,1;0,0,1,0;0,-1,0,0;-1,0,0,0"]);
        assert_eq!(code, 0, "{out}");
        let (code, _, err) = call(&["cartan", "--matrix", "2,0,0,0;0,1,0,0;0,0,1,0;0,0,0,1"]);
        assert_eq!(code, 2, "{err}");
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["field-info", "--field", "Q4"]).0, 2);
        assert_eq!(call(&["suite", "nonexistent"]).0, 2);
        assert_eq!(call(&["verify", "SPHER01", "--cell", "1,1"]).0, 2);
        assert_eq!(call(&["type-const", "--p", "0.5"]).0, 2);
        assert_eq!(call(&["suite", "quick", "--mutation", "nope"]).0, 2);
    }

    #[test]
    fn verify_and_mutation_exit_codes() {
        let (code, out, _) = call(&["verify", "SPHER01", "--cell", "3,1"]);
        assert_eq!(code, 0, "{out}");
        let (code, _, _) = call(&["verify", "SPHER01", "--cell", "4,1", "--identities", "50", "--mutation", "minor-sign-flip"]);
        assert_eq!(code, 1);
    }

    #[test]
    fn zigzag_commands() {
        let (code, out, _) = call(&["zigzag", "plan", "--start", "9,2", "--v0", "0"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["path"]["cells"].as_array().unwrap().len(), 6);
        let (code, _, _) = call(&["zigzag", "bound", "--alpha", "0.7", "--beta", "0.1", "--grid", "40"]);
        assert_eq!(code, 0);
        let (code, _, err) = call(&["zigzag", "bound", "--alpha", "0.7", "--beta", "0.5", "--grid", "40"]);
        assert_eq!(code, 2, "{err}");
        assert!(err.contains("β < α/(2h)"));
    }

    #[test]
    fn text_format_and_out_file() {
        let dir = std::env::temp_dir().join(format!("sp4lab-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cfg = dir.join("cfg.txt");
        let out = dir.join("out.jsonl");
        std::fs::write(&cfg, format!("field=F2((t))\nformat=text\nout={}\n", out.display())).unwrap();
        let (code, stdout, _) = call(&["field-info", "--config", cfg.to_str().unwrap(), "--format", "json"]);
        assert_eq!(code, 0);
        assert!(stdout.is_empty());
        let v: Value = serde_json::from_str(std::fs::read_to_string(&out).unwrap().trim()).unwrap();
        assert_eq!(v["field"], "F2((t))");
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
