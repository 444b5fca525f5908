//! Finite-ring Fourier operator `T_{O/π^h} ⊗ 1_E`, the FFT-lemma inequalities
//! and the type-constant estimator. Norms on `ℓ²(O/π^h, E)` and on the dual side
//! are expectation-normalized.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::exactfield::{FieldKind, FieldSpec};
use crate::verifiers::report::VerificationReport;
use crate::verifiers::task_rng;

#[derive(Debug, Error, PartialEq)]
pub enum FourierError {
    #[error("bad space spec {0:?}: expected l<p>:<d> with p ≥ 1, d ≥ 1")]
    BadSpace(String),
    #[error("p = {0} < 1")]
    BadExponent(f64),
    #[error("ring O/π^{n} with q = {q} is too large for dense tables")]
    TooLarge { q: u64, n: u32 },
    #[error("{0}")]
    Precondition(String),
}

/// `ℓ_p^d` over C; `p = 2` is the Hilbert case.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpaceSpec {
    pub p: f64,
    pub d: usize,
}

impl SpaceSpec {
    pub fn hilbert(d: usize) -> SpaceSpec {
        SpaceSpec { p: 2.0, d }
    }
    pub fn is_hilbert(&self) -> bool {
        self.p == 2.0
    }
    pub fn norm(&self, v: &[Complex64]) -> f64 {
        if self.is_hilbert() {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        } else {
            v.iter().map(|z| z.norm().powf(self.p)).sum::<f64>().powf(1.0 / self.p)
        }
    }
    /// Upper bound for `‖T_{O/π^h} ⊗ 1_E‖` by interpolation with the `p = 1`
    /// (or `p = ∞`) bound 1 and the Hilbert value `q^{-h/2}`.
    pub fn transform_upper(&self, q: u64, h: u32) -> f64 {
        let qh = (q as f64).powi(h as i32);
        if self.p <= 2.0 {
            qh.powf(-(1.0 - 1.0 / self.p))
        } else {
            qh.powf(-1.0 / self.p)
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = FourierError;
    fn from_str(s: &str) -> Result<SpaceSpec, FourierError> {
        let bad = || FourierError::BadSpace(s.to_string());
        let (p, d) = if let Some(rest) = s.strip_prefix("hilbert:") {
            (2.0, rest)
        } else {
            let rest = s.strip_prefix('l').ok_or_else(bad)?;
            let (p, d) = rest.split_once(':').ok_or_else(bad)?;
            (p.parse::<f64>().map_err(|_| bad())?, d)
        };
        let d: usize = d.parse().map_err(|_| bad())?;
        if !(p >= 1.0) || !p.is_finite() || d == 0 {
            return Err(bad());
        }
        Ok(SpaceSpec { p, d })
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}:{}", self.p, self.d)
    }
}

/// `O/π^n` with dense addition and multiplication tables on residue codes.
#[derive(Clone, Debug)]
pub struct Ring {
    pub field: FieldSpec,
    pub n: u32,
    pub size: usize,
    add: Vec<u32>,
    mul: Vec<u32>,
}

impl Ring {
    pub fn new(field: &FieldSpec, n: u32) -> Result<Ring, FourierError> {
        let size = field.ring_size(n).ok().filter(|&s| s <= 4096).ok_or(FourierError::TooLarge { q: field.q, n })? as usize;
        let r = |c: usize| field.residue(n, c as u64);
        let mut add = vec![0; size * size];
        let mut mul = vec![0; size * size];
        for a in 0..size {
            for b in 0..size {
                add[a * size + b] = field.res_add(&r(a), &r(b)).code as u32;
                mul[a * size + b] = field.res_mul(&r(a), &r(b)).code as u32;
            }
        }
        Ok(Ring { field: *field, n, size, add, mul })
    }
    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.size + b] as usize
    }
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.size + b] as usize
    }
    /// Code of `π^k·c` for `c < q^{n-k}`.
    pub fn shift(&self, c: usize, k: u32) -> usize {
        c * (self.field.q as usize).pow(k)
    }
    /// Codes of `π^k (O/π^n)`.
    pub fn ideal(&self, k: u32) -> Vec<usize> {
        if k >= self.n {
            return vec![0];
        }
        (0..(self.field.q as usize).pow(self.n - k)).map(|c| self.shift(c, k)).collect()
    }
    /// Additive character `ψ` with `ψ` nontrivial on `π^{n-1}O/π^n`.
    pub fn psi(&self, c: usize) -> Complex64 {
        let k = &self.field;
        let phase = match k.kind {
            FieldKind::MixedChar => c as f64 / self.size as f64,
            FieldKind::EqualChar => {
                let top = if self.n == 0 { 0 } else { c / (k.q as usize).pow(self.n - 1) };
                k.gf().trace(top as u8) as f64 / k.p as f64
            }
        };
        Complex64::from_polar(1.0, TAU * phase)
    }
}

/// `χ_b(a) = ψ(ab)` for all `a, b ∈ O/π^n`.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub ring: Ring,
    pub values: Vec<Complex64>,
}

impl CharacterTable {
    pub fn new(field: &FieldSpec, n: u32) -> Result<CharacterTable, FourierError> {
        if n == 0 {
            return Err(FourierError::Precondition("level n must be at least 1".into()));
        }
        let ring = Ring::new(field, n)?;
        let s = ring.size;
        let values = (0..s * s).map(|t| ring.psi(ring.mul(t / s, t % s))).collect();
        Ok(CharacterTable { ring, values })
    }
    pub fn chi(&self, b: usize, a: usize) -> Complex64 {
        self.values[b * self.ring.size + a]
    }
    /// `max |Σ_a χ_b(a) χ̄_{b'}(a) − |R|·[b = b']|`.
    pub fn orthogonality_error(&self) -> f64 {
        let s = self.ring.size;
        let mut worst = 0.0f64;
        for b in 0..s {
            for b2 in 0..s {
                let sum: Complex64 = (0..s).map(|a| self.chi(b, a) * self.chi(b2, a).conj()).sum();
                let want = if b == b2 { s as f64 } else { 0.0 };
                worst = worst.max((sum - want).norm());
            }
        }
        worst
    }
}

/// Vector-valued function on an index set, stored row-major (`len × d`).
fn apply_t(ct: &CharacterTable, f: &[Complex64], d: usize) -> Vec<Complex64> {
    let s = ct.ring.size;
    let mut out = vec![Complex64::new(0.0, 0.0); s * d];
    for b in 0..s {
        for a in 0..s {
            let c = ct.chi(b, a) / s as f64;
            for i in 0..d {
                out[b * d + i] += c * f[a * d + i];
            }
        }
    }
    out
}

/// `(E_t ‖v_t‖²)^{1/2}` over the rows of a `len × d` block.
fn l2_of(space: &SpaceSpec, v: &[Complex64]) -> f64 {
    let rows = v.len() / space.d;
    (v.chunks(space.d).map(|r| space.norm(r).powi(2)).sum::<f64>() / rows as f64).sqrt()
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    let r = (-2.0 * u.ln()).sqrt();
    Complex64::new(r * (TAU * v).cos(), r * (TAU * v).sin()) / 2f64.sqrt()
}

#[derive(Clone, Copy, Debug)]
pub enum Strategy {
    Exact,
    Search { iters: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    /// `svd` when lower = upper is a computed singular value, else `bracket`.
    pub certificate: &'static str,
    pub witness: String,
    pub converged: bool,
}

impl NormBracket {
    /// `α = −log(upper)`.
    pub fn alpha(&self) -> f64 {
        -self.upper.ln()
    }
}

fn largest_singular_value(m: DMatrix<Complex64>) -> f64 {
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Ratio `‖(T⊗1)f‖ / ‖f‖`.
fn t_ratio(ct: &CharacterTable, space: &SpaceSpec, f: &[Complex64]) -> f64 {
    let tf = apply_t(ct, f, space.d);
    l2_of(space, &tf) / l2_of(space, f)
}

/// Hill climbing on random coordinates from `start`.
fn ascend(eval: &dyn Fn(&[Complex64]) -> f64, start: Vec<Complex64>, iters: u64, rng: &mut impl Rng) -> (f64, Vec<Complex64>) {
    let mut best = start;
    let mut val = eval(&best);
    let scale = (best.iter().map(|z| z.norm_sqr()).sum::<f64>() / best.len() as f64).sqrt().max(1e-3);
    let mut step = 0.5 * scale;
    for t in 0..iters {
        let i = rng.gen_range(0..best.len());
        let old = best[i];
        best[i] += gaussian(rng) * step;
        let v = eval(&best);
        if v > val {
            val = v;
        } else {
            best[i] = old;
        }
        if t % 200 == 199 {
            step *= 0.8;
        }
    }
    (val, best)
}

/// Norm of `T_{O/π^h} ⊗ 1_E`: exact singular value in the Hilbert case, else
/// `[witness/search lower bound, interpolation upper bound]`.
pub fn transform_norm(field: &FieldSpec, h: u32, space: &SpaceSpec, strategy: Strategy) -> Result<NormBracket, FourierError> {
    let ct = CharacterTable::new(field, h)?;
    let s = ct.ring.size;
    let d = space.d;
    let upper = space.transform_upper(field.q, h);
    if space.is_hilbert() {
        if let Strategy::Exact = strategy {
            let m = DMatrix::from_fn(s * d, s * d, |r, c| {
                if r % d == c % d {
                    ct.chi(r / d, c / d) / s as f64
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let sv = largest_singular_value(m);
            return Ok(NormBracket { lower: sv, upper: sv, certificate: "svd", witness: "singular vector".into(), converged: true });
        }
    }
    // witnesses: f = e_{a mod d}, f = δ₀ e₀
    let mut lower = 0.0f64;
    let mut witness = String::new();
    let mut f = vec![Complex64::new(0.0, 0.0); s * d];
    for a in 0..s {
        f[a * d + a % d] = Complex64::new(1.0, 0.0);
    }
    let r = t_ratio(&ct, space, &f);
    if r > lower {
        lower = r;
        witness = "f(a) = e_{a mod d}".into();
    }
    let mut g = vec![Complex64::new(0.0, 0.0); s * d];
    g[0] = Complex64::new(1.0, 0.0);
    let r = t_ratio(&ct, space, &g);
    if r > lower {
        lower = r;
        witness = "f = δ₀ e₀".into();
    }
    if let Strategy::Search { iters, seed } = strategy {
        let mut rng = task_rng(seed, &format!("transform:{}:{h}:{space}", field.name()));
        let eval = |v: &[Complex64]| t_ratio(&ct, space, v);
        let starts = 8;
        for _ in 0..starts {
            let v0: Vec<Complex64> = (0..s * d).map(|_| gaussian(&mut rng)).collect();
            let (v, _) = ascend(&eval, v0, iters / starts, &mut rng);
            if v > lower {
                lower = v;
                witness = "random start + ascent".into();
            }
        }
    }
    let upper = if space.is_hilbert() { upper.max(lower) } else { upper };
    Ok(NormBracket { lower, upper, certificate: "bracket", witness, converged: lower <= upper * (1.0 + 1e-9) })
}

/// Sparse linear map `ξ ↦ (Σ_c w_{rc} ξ_c)_r`; LHS of the FFT lemma is
/// `E_r ‖(Vξ)_r‖²` and RHS is `coef · E_c ‖ξ_c‖²`.
#[derive(Clone, Debug)]
pub struct FftInstance {
    pub rows: Vec<Vec<(u32, Complex64)>>,
    pub ncols: usize,
    pub rhs_coef: f64,
    pub label: String,
}

impl FftInstance {
    pub fn lhs(&self, space: &SpaceSpec, xi: &[Complex64]) -> f64 {
        let d = space.d;
        let mut buf = vec![Complex64::new(0.0, 0.0); d];
        let mut acc = 0.0;
        for row in &self.rows {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for &(c, w) in row {
                let c = c as usize * d;
                for i in 0..d {
                    buf[i] += w * xi[c + i];
                }
            }
            acc += space.norm(&buf).powi(2);
        }
        acc / self.rows.len() as f64
    }
    pub fn mean_sq(&self, space: &SpaceSpec, xi: &[Complex64]) -> f64 {
        xi.chunks(space.d).map(|r| space.norm(r).powi(2)).sum::<f64>() / self.ncols as f64
    }
    /// `LHS / RHS`.
    pub fn ratio(&self, space: &SpaceSpec, xi: &[Complex64]) -> f64 {
        self.lhs(space, xi) / (self.rhs_coef * self.mean_sq(space, xi))
    }
    /// Hilbert case: `sup_ξ LHS / E‖ξ‖² = (#cols/#rows)·σ_max(V)²`.
    pub fn exact_hilbert_sup(&self) -> f64 {
        let m = DMatrix::from_fn(self.rows.len(), self.ncols, |_, _| Complex64::new(0.0, 0.0));
        let mut m = m;
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, w) in row {
                m[(r, c as usize)] += w;
            }
        }
        let sv = largest_singular_value(m);
        self.ncols as f64 / self.rows.len() as f64 * sv * sv
    }
}

/// Character `χ_c(ε) = ψ₁(cε)` of the residue field.
pub fn residue_character(field: &FieldSpec, c: u64) -> Result<impl Fn(u64) -> Complex64, FourierError> {
    let ct = CharacterTable::new(field, 1)?;
    Ok(move |e: u64| ct.chi(c as usize, e as usize))
}

/// `C₂ = (Σ_{χ≠1} |f_χ|)²` for `f = qδ_{ε₀} − qδ₀`, with `f_χ = χ̄(ε₀) − 1`.
/// Returns `(C₂ from the formula, C₂ from the direct expansion of f)`.
pub fn c2_constant(field: &FieldSpec, eps0: u64) -> Result<(f64, f64), FourierError> {
    let ct = CharacterTable::new(field, 1)?;
    let q = field.q as usize;
    let formula: f64 = (1..q).map(|c| (ct.chi(c, eps0 as usize).conj() - 1.0).norm()).sum();
    let direct: f64 = (1..q)
        .map(|c| {
            let coeff: Complex64 = (0..q)
                .map(|e| {
                    let f = if e == eps0 as usize { q as f64 } else if e == 0 { -(q as f64) } else { 0.0 };
                    ct.chi(c, e).conj() * f
                })
                .sum::<Complex64>()
                / q as f64;
            coeff.norm()
        })
        .sum();
    Ok((formula * formula, direct * direct))
}

/// Plain lemma: `E_{a,b} ‖E_{x,ε} χ(ε) ξ_{x, ax+b+π^{n−1}ε}‖² ≤ q^{2h−2} e^{−2(n/h−1)α} E‖ξ‖²`.
pub fn fft_instance(field: &FieldSpec, h: u32, n: u32, alpha: f64, chi_c: u64) -> Result<FftInstance, FourierError> {
    let ring = Ring::new(field, n)?;
    let chi = residue_character(field, chi_c)?;
    let (s, q) = (ring.size, field.q as usize);
    let top = (q).pow(n - 1);
    let w = 1.0 / (s * q) as f64;
    let mut rows = Vec::with_capacity(s * s);
    for a in 0..s {
        for b in 0..s {
            let mut row = Vec::with_capacity(s * q);
            for x in 0..s {
                let axb = ring.add(ring.mul(a, x), b);
                for e in 0..q {
                    let y = ring.add(axb, e * top);
                    row.push(((x * s + y) as u32, chi(e as u64) * w));
                }
            }
            rows.push(row);
        }
    }
    let coef = (q as f64).powi(2 * h as i32 - 2) * (-2.0 * (n as f64 / h as f64 - 1.0) * alpha).exp();
    Ok(FftInstance { rows, ncols: s * s, rhs_coef: coef, label: format!("k=0 chi={chi_c}") })
}

/// `k`-variant: `E_{a∈π^k, b∈π^{2k}} ‖E_x ξ_{x,ax+b+π^{n−1}ε₀} − E_x ξ_{x,ax+b}‖²
/// ≤ C₂ q^{2h−2} e^{−2((n−2k)/h−1)α} E_{x∈π^k, y∈π^{2k}} ‖ξ_{x,y}‖²`.
pub fn fft_k_instance(field: &FieldSpec, h: u32, n: u32, k: u32, eps0: u64, alpha: f64) -> Result<FftInstance, FourierError> {
    if eps0 == 0 || eps0 >= field.q {
        return Err(FourierError::Precondition(format!("ε₀ = {eps0} is not in F*")));
    }
    if n < 2 * k + 1 {
        return Err(FourierError::Precondition(format!(
            "k = {k} needs n ≥ 2k+1 = {} so that π^(n−1)ε₀ lies in π^(2k)O/π^n; got n = {n}",
            2 * k + 1
        )));
    }
    let ring = Ring::new(field, n)?;
    let q = field.q as usize;
    let xs = ring.ideal(k);
    let bs = ring.ideal(2 * k);
    let ystep = q.pow(2 * k);
    let ny = bs.len();
    let col = |xi: usize, y: usize| (xi * ny + y / ystep) as u32;
    let shift = eps0 as usize * q.pow(n - 1);
    let w = 1.0 / xs.len() as f64;
    let mut rows = Vec::with_capacity(xs.len() * bs.len());
    for &a in &xs {
        for &b in &bs {
            let mut row = Vec::with_capacity(2 * xs.len());
            for (xi, &x) in xs.iter().enumerate() {
                let axb = ring.add(ring.mul(a, x), b);
                row.push((col(xi, ring.add(axb, shift)), Complex64::new(w, 0.0)));
                row.push((col(xi, axb), Complex64::new(-w, 0.0)));
            }
            rows.push(row);
        }
    }
    let (c2, _) = c2_constant(field, eps0)?;
    let coef = c2 * (q as f64).powi(2 * h as i32 - 2) * (-2.0 * ((n - 2 * k) as f64 / h as f64 - 1.0) * alpha).exp();
    Ok(FftInstance { rows, ncols: xs.len() * ny, rhs_coef: coef, label: format!("k={k} eps0={eps0}") })
}

/// The averaged family `ξ'_{x₁,y₁} = E_{z∈π^{n−2k}O/π^{n−k}} ξ_{π^k(s(x₁)+z), π^{2k}y₁}` on
/// `(O/π^{n−2k})²`, for `ξ` indexed as in [`fft_k_instance`].
pub fn averaged_family(field: &FieldSpec, n: u32, k: u32, xi: &[Complex64], d: usize) -> Vec<Complex64> {
    let q = field.q as usize;
    let m = q.pow(n - 2 * k);
    let nx = q.pow(n - k);
    let ny = m;
    let zs = q.pow(k);
    let mut out = vec![Complex64::new(0.0, 0.0); m * m * d];
    for x1 in 0..m {
        for y1 in 0..m {
            for t in 0..zs {
                // π^k(s(x₁)+z) has index s(x₁)+z in π^k O/π^n
                let xi_idx = x1 + t * m;
                debug_assert!(xi_idx < nx);
                let src = (xi_idx * ny + y1) * d;
                for i in 0..d {
                    out[(x1 * m + y1) * d + i] += xi[src + i] / zs as f64;
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct FftPlan {
    pub random: u64,
    pub ascent_iters: u64,
    pub seed: u64,
}

/// Runs the FFT lemma (`k = 0`, every nontrivial `χ`) or its `k`-variant on
/// `space`, with `α = −log` of the transform upper bound.
pub fn check_fft_lemma(
    field: &FieldSpec,
    h: u32,
    n: u32,
    k: u32,
    eps0: u64,
    space: &SpaceSpec,
    plan: FftPlan,
) -> Result<VerificationReport, FourierError> {
    let start = Instant::now();
    if n == 0 || h == 0 {
        return Err(FourierError::Precondition("h and n must be at least 1".into()));
    }
    let bracket = transform_norm(field, h, space, Strategy::Exact)?;
    let alpha = bracket.alpha();
    let instances = if k == 0 {
        (1..field.q).map(|c| fft_instance(field, h, n, alpha, c)).collect::<Result<Vec<_>, _>>()?
    } else {
        vec![fft_k_instance(field, h, n, k, eps0, alpha)?]
    };
    let mut rep = VerificationReport::new(
        "fft-check",
        json!({"field": field.name(), "h": h, "n": n, "k": k, "eps0": eps0, "space": space.to_string(),
               "random": plan.random, "ascent_iters": plan.ascent_iters}),
        Some(plan.seed),
    );
    let slack = 1.0 + 1e-8;
    let mut max_ratio = 0.0f64;
    let mut exact_ratio = None;
    let mut rng = task_rng(plan.seed, &format!("fft:{}:{h}:{n}:{k}:{space}", field.name()));
    for inst in &instances {
        if space.is_hilbert() {
            let r = inst.exact_hilbert_sup() / inst.rhs_coef;
            exact_ratio = Some(exact_ratio.unwrap_or(0.0f64).max(r));
            rep.cases_total += 1;
            rep.cases_run += 1;
            if r > slack {
                rep.counterexample(json!({"instance": inst.label, "kind": "exact", "ratio": r}));
            }
        }
        let len = inst.ncols * space.d;
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        let per = plan.random / instances.len() as u64;
        for t in 0..per {
            let xi: Vec<Complex64> = if t % 2 == 0 {
                (0..len).map(|_| gaussian(&mut rng)).collect()
            } else {
                // sparse family: a few large entries
                let mut v = vec![Complex64::new(0.0, 0.0); len];
                for _ in 0..1 + t % 5 {
                    v[rng.gen_range(0..len)] = gaussian(&mut rng) * 10.0;
                }
                v
            };
            let r = inst.ratio(space, &xi);
            rep.cases_total += 1;
            rep.cases_run += 1;
            if r > slack {
                rep.counterexample(json!({"instance": inst.label, "kind": "random", "trial": t, "ratio": r}));
            }
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, xi));
            }
        }
        if let Some((r0, xi)) = best {
            max_ratio = max_ratio.max(r0);
            if plan.ascent_iters > 0 {
                let eval = |v: &[Complex64]| inst.ratio(space, v);
                let (r, xi_best) = ascend(&eval, xi, plan.ascent_iters, &mut rng);
                rep.cases_total += 1;
                rep.cases_run += 1;
                max_ratio = max_ratio.max(r);
                if r > slack {
                    let fam: Vec<[f64; 2]> = xi_best.iter().map(|z| [z.re, z.im]).collect();
                    rep.counterexample(json!({"instance": inst.label, "kind": "ascent", "ratio": r, "family": fam}));
                }
            }
        }
    }
    rep.margin("alpha", alpha);
    rep.margin("transform_upper", bracket.upper);
    rep.margin("rhs_coef", instances.iter().map(|i| i.rhs_coef).fold(0.0, f64::max));
    rep.margin("max_ratio", max_ratio);
    if let Some(r) = exact_ratio {
        rep.margin("exact_ratio", r);
    }
    if k > 0 {
        let (c2, c2d) = c2_constant(field, eps0)?;
        rep.margin("C2", c2);
        rep.margin("C2_direct", c2d);
    }
    Ok(rep.finish(start))
}

/// `|LHS_k(ξ) − LHS_0(ξ')|` relative to `LHS_k(ξ)`, for random families.
pub fn k_variant_identity_error(
    field: &FieldSpec,
    h: u32,
    n: u32,
    k: u32,
    eps0: u64,
    space: &SpaceSpec,
    trials: u64,
    seed: u64,
) -> Result<f64, FourierError> {
    let big = fft_k_instance(field, h, n, k, eps0, 1.0)?;
    let small = fft_k_instance(field, h, n - 2 * k, 0, eps0, 1.0)?;
    let mut rng = task_rng(seed, &format!("k-identity:{}:{n}:{k}", field.name()));
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let xi: Vec<Complex64> = (0..big.ncols * space.d).map(|_| gaussian(&mut rng)).collect();
        let xi1 = averaged_family(field, n, k, &xi, space.d);
        let l = big.lhs(space, &xi);
        let l1 = small.lhs(space, &xi1);
        worst = worst.max((l - l1).abs() / l.abs().max(1e-300));
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeStats {
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub exact_signs: bool,
}

/// `(E_ε ‖Σ ε_i x_i‖²)^{1/2} / (Σ ‖x_i‖^p)^{1/p}` over random real families in `space`.
pub fn estimate_type_constant(space: &SpaceSpec, p: f64, n_vectors: usize, trials: u64, seed: u64) -> Result<TypeStats, FourierError> {
    if p < 1.0 || p.is_nan() {
        return Err(FourierError::BadExponent(p));
    }
    let mut rng = task_rng(seed, &format!("type:{space}:{p}:{n_vectors}"));
    let exact = n_vectors <= 12;
    let (mut max_ratio, mut sum) = (0.0f64, 0.0);
    for _ in 0..trials.max(1) {
        let xs: Vec<Vec<Complex64>> =
            (0..n_vectors).map(|_| (0..space.d).map(|_| Complex64::new(gaussian(&mut rng).re, 0.0)).collect()).collect();
        let r = type_ratio(space, p, &xs, exact, &mut rng);
        max_ratio = max_ratio.max(r);
        sum += r;
    }
    Ok(TypeStats { max_ratio, mean_ratio: sum / trials.max(1) as f64, exact_signs: exact })
}

/// The type ratio of one family (exact sign average when `exact`).
pub fn type_ratio(space: &SpaceSpec, p: f64, xs: &[Vec<Complex64>], exact: bool, rng: &mut impl Rng) -> f64 {
    let n = xs.len();
    let d = space.d;
    let signed = |mask: u64| -> f64 {
        let v: Vec<Complex64> =
            (0..d).map(|i| (0..n).map(|t| if mask >> t & 1 == 1 { -xs[t][i] } else { xs[t][i] }).sum()).collect();
        space.norm(&v).powi(2)
    };
    let e2 = if exact {
        (0..1u64 << n).map(signed).sum::<f64>() / (1u64 << n) as f64
    } else {
        let m = 4096;
        (0..m).map(|_| signed(rng.gen::<u64>() & ((1u64 << n.min(63)) - 1))).sum::<f64>() / m as f64
    };
    let den = xs.iter().map(|x| space.norm(x).powf(p)).sum::<f64>().powf(1.0 / p);
    e2.sqrt() / den
}
