use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use sp4lab::cli::suite::identity_grid;
use sp4lab::exactfield::{FieldElem, FieldSpec};
use sp4lab::fourier::{c2_constant, transform_norm, type_ratio, CharacterTable, SpaceSpec, Strategy};
use sp4lab::lemma_witnesses::{build_witness, derive};
use sp4lab::sp4::{cartan_invariants, d_matrix, symplectic_check, CartanPair, GroupElement};
use sp4lab::verifiers::cells::sample_tuples;
use sp4lab::verifiers::decompose::{check_factor_list, decompose_k1k2};
use sp4lab::verifiers::haar::sample_k;
use sp4lab::verifiers::parity::{tally, wedge_valuations};
use sp4lab::verifiers::report::{Mode, Status, VerificationReport};
use sp4lab::zigzag::{bound_ledger, plan_path, recheck, LedgerParams, Regime};

const FIELDS: [&str; 6] = ["Q2", "Q3", "Q5", "F2((t))", "F3((t))", "F4((t))"];

fn field(s: &str) -> FieldSpec {
    s.parse().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `Σ_t c_t π^{e+t}` with residue digits `c_t`.
fn elem(k: &FieldSpec, e: i32, digits: &[u64]) -> FieldElem {
    digits.iter().enumerate().fold(k.zero(), |acc, (t, &c)| acc + k.residue_const(c % k.q) * k.pi_pow(e + t as i32))
}

fn any_elem(k: &FieldSpec, e: i32, num: &[u64], den: &[u64]) -> FieldElem {
    let n = elem(k, e, num);
    let d = elem(k, 0, den);
    n.checked_div(&d).unwrap_or(n)
}

fn regime(r: u8) -> Regime {
    match r % 3 {
        0 => Regime::CharNe2 { v0: 0, level: None },
        1 => Regime::CharNe2 { v0: 1, level: None },
        _ => Regime::Char2 { level: None },
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn valuation_is_multiplicative_and_ultrametric(
        f in 0..FIELDS.len(),
        (e1, e2) in (-4i32..5, -4i32..5),
        n1 in prop::collection::vec(0u64..5, 1..4),
        n2 in prop::collection::vec(0u64..5, 1..4),
        den in prop::collection::vec(0u64..5, 1..3),
    ) {
        let k = field(FIELDS[f]);
        let x = any_elem(&k, e1, &n1, &den);
        let y = elem(&k, e2, &n2);
        if let (Some(vx), Some(vy)) = (x.valuation(), y.valuation()) {
            prop_assert_eq!((&x * &y).valuation(), Some(vx + vy));
            let s = &x + &y;
            match s.valuation() {
                None => prop_assert_eq!(vx, vy),
                Some(vs) => {
                    prop_assert!(vs >= vx.min(vy));
                    if vx != vy {
                        prop_assert_eq!(vs, vx.min(vy));
                    }
                }
            }
        }
    }

    #[test]
    fn section_then_reduce_is_identity(f in 0..FIELDS.len(), n in 1u32..5, code in any::<u64>()) {
        let k = field(FIELDS[f]);
        let r = k.residue(n, code % k.ring_size(n).unwrap());
        let s = k.sigma(&r);
        prop_assert_eq!(k.reduce(&s, n).unwrap(), r);
        if let Some(v) = s.valuation() {
            prop_assert!(v >= 0);
        }
    }

    #[test]
    fn diagonal_cells(f in 0..FIELDS.len(), i in 0i32..7, j in 0i32..7) {
        prop_assume!(j <= i);
        let k = field(FIELDS[f]);
        let info = cartan_invariants(&d_matrix(&k, i, j)).unwrap();
        prop_assert_eq!(info.pair, CartanPair::new(i, j));
        prop_assert_eq!(info.length, i + j);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn cartan_pair_is_bi_k_invariant(f in 0..FIELDS.len(), i in 0i32..5, j in 0i32..5, seed in any::<u64>()) {
        prop_assume!(j <= i);
        let k = field(FIELDS[f]);
        let mut r = rng(seed);
        let a = sample_k(&k, 2, &mut r);
        let b = sample_k(&k, 2, &mut r);
        prop_assert!(symplectic_check(&k, a.m.clone()).is_ok());
        let g = d_matrix(&k, i, j);
        let kgk = a.mul(&g).mul(&b);
        let info = cartan_invariants(&kgk).unwrap();
        prop_assert_eq!(info.pair, CartanPair::new(i, j));
        prop_assert!(info.pair.in_lambda());
        prop_assert_eq!(cartan_invariants(&kgk.inverse(&k)).unwrap().pair, info.pair);
    }

    #[test]
    fn length_is_subadditive(f in 0..FIELDS.len(), c1 in (0i32..4, 0i32..4), c2 in (0i32..4, 0i32..4), seed in any::<u64>()) {
        prop_assume!(c1.1 <= c1.0 && c2.1 <= c2.0);
        let k = field(FIELDS[f]);
        let mut r = rng(seed);
        let g = sample_k(&k, 1, &mut r).mul(&d_matrix(&k, c1.0, c1.1));
        let h = d_matrix(&k, c2.0, c2.1).mul(&sample_k(&k, 1, &mut r));
        let l = cartan_invariants(&g.mul(&h)).unwrap().length;
        prop_assert!(l <= c1.0 + c1.1 + c2.0 + c2.1);
    }

    #[test]
    fn factor_lists_reconstruct(q in prop::sample::select(vec!["Q2", "Q3", "F2((t))"]), depth in 1u32..4, seed in any::<u64>()) {
        let k = field(q);
        let g = sample_k(&k, depth, &mut rng(seed));
        let f = decompose_k1k2(&k, &g).unwrap();
        prop_assert!(check_factor_list(&k, &g, &f).is_empty());
        prop_assert_eq!(f.product(&k), g.m);
        prop_assert!(f.block_count <= 30);
    }

    #[test]
    fn witnesses_land_in_expected_cell(idx in 0usize..9, seed in any::<u64>()) {
        let (f, c) = identity_grid()[idx].clone();
        let k = field(&f);
        let d = derive(&k, &c, None).unwrap();
        for t in sample_tuples(&k, &c, &d, 3, &mut rng(seed)) {
            let w = build_witness(&k, &c, &t, None).unwrap();
            let chk = w.check();
            prop_assert!(chk.ok(), "{} {:?} {:?}: {:?}", f, c, t, chk.failures);
        }
    }

    #[test]
    fn parity_decided_mass_grows_with_depth(i in 0i32..3, j in 0i32..3, seed in any::<u64>()) {
        prop_assume!(j <= i);
        let k = field("F2((t))");
        let g = d_matrix(&k, i, j);
        let ws = wedge_valuations(&k, &g, 5, &Mode::Sample { n: 100, seed }, 1);
        let m: Vec<_> = (1..=6).map(|n| tally(&ws, n, i + j).decided_mass()).collect();
        prop_assert!(m.windows(2).all(|w| w[0] <= w[1]), "{:?}", m);
        for n in 1..=6 {
            let p = tally(&ws, n, i + j);
            prop_assert_eq!(p.even + p.odd + p.undecided, p.total);
        }
    }

    #[test]
    fn reports_merge_associatively(parts in prop::collection::vec((0u64..50, 0u64..50, any::<bool>()), 3)) {
        let mk = |(t, r, bad): (u64, u64, bool)| {
            let mut rep = VerificationReport::new("t", json!({}), None);
            rep.cases_total = t;
            rep.cases_run = r;
            if bad {
                rep.counterexample(json!({"t": t}));
            }
            rep
        };
        let [a, b, c] = [mk(parts[0]), mk(parts[1]), mk(parts[2])];
        let mut left = a.clone();
        left.merge(b.clone());
        left.merge(c.clone());
        let mut bc = b;
        bc.merge(c);
        let mut right = a;
        right.merge(bc);
        prop_assert_eq!(left.to_json_line(), right.to_json_line());
        prop_assert_eq!(left.status == Status::Violated, parts.iter().any(|p| p.2));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn characters_are_orthogonal(f in prop::sample::select(vec!["Q2", "Q3", "Q5", "F2((t))", "F3((t))", "F4((t))", "F5((t))"]), n in 1u32..4) {
        let k = field(f);
        prop_assume!(k.q.pow(n) <= 125);
        let ct = CharacterTable::new(&k, n).unwrap();
        prop_assert!(ct.orthogonality_error() < 1e-10);
    }

    #[test]
    fn hilbert_norm_is_dimension_free(f in prop::sample::select(vec!["Q2", "Q3", "F2((t))", "F3((t))", "F4((t))"]), h in 1u32..3, d in prop::sample::select(vec![1usize, 2, 4, 8])) {
        let k = field(f);
        prop_assume!(k.q.pow(h) * d as u64 <= 128);
        let b = transform_norm(&k, h, &SpaceSpec::hilbert(d), Strategy::Exact).unwrap();
        let want = (k.q as f64).powf(-(h as f64) / 2.0);
        prop_assert!((b.lower - want).abs() < 1e-9 && (b.upper - want).abs() < 1e-9);
    }

    #[test]
    fn space_spec_roundtrip(p in 1.0f64..8.0, d in 1usize..64) {
        let text = format!("l{}:{}", p, d);
        let s: SpaceSpec = text.parse().unwrap();
        let back: SpaceSpec = s.to_string().parse().unwrap();
        prop_assert_eq!(back.p, p);
        prop_assert_eq!(back.d, d);
        let below = format!("l{}:{}", p - 1.5, d);
        prop_assert_eq!(below.parse::<SpaceSpec>().is_err(), p - 1.5 < 1.0);
        let empty = format!("l{}:0", p);
        prop_assert!(empty.parse::<SpaceSpec>().is_err());
        let h: SpaceSpec = format!("hilbert:{}", d).parse().unwrap();
        prop_assert!(h.is_hilbert() && h.d == d);
    }

    #[test]
    fn hilbert_type_ratio_is_one(d in 1usize..6, n in 1usize..8, seed in any::<u64>()) {
        use rand::Rng;
        let mut r = rng(seed);
        let xs: Vec<Vec<num_complex::Complex64>> = (0..n)
            .map(|_| (0..d).map(|_| num_complex::Complex64::new(r.gen_range(-1.0..1.0), 0.0)).collect())
            .collect();
        prop_assume!(xs.iter().flatten().any(|z| z.re != 0.0));
        let ratio = type_ratio(&SpaceSpec::hilbert(d), 2.0, &xs, true, &mut r);
        prop_assert!((ratio - 1.0).abs() < 1e-9, "{}", ratio);
    }

    #[test]
    fn c2_bound_and_direct_match(f in prop::sample::select(vec!["Q2", "Q3", "Q5", "F2((t))", "F4((t))", "F5((t))"]), e in 1u64..5) {
        let k = field(f);
        let eps0 = 1 + (e - 1) % (k.q - 1);
        let (c2, direct) = c2_constant(&k, eps0).unwrap();
        prop_assert!((c2 - direct).abs() < 1e-9 * c2.max(1.0));
        prop_assert!(c2 <= (2.0 * (k.q as f64 - 1.0)).powi(2) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 512, ..ProptestConfig::default() })]

    #[test]
    fn planner_output_is_legal(r in any::<u8>(), i in 0i32..300, j in 0i32..150) {
        prop_assume!(j <= i && i + j <= 300);
        let regime = regime(r);
        if let Ok(path) = plan_path(CartanPair::new(i, j), regime) {
            prop_assert!(recheck(&path).is_empty(), "{:?}", recheck(&path));
            prop_assert!(path.cells.iter().all(|c| c.in_lambda()));
            if regime.is_char_two() {
                let p0 = (i + j).rem_euclid(2);
                prop_assert!(path.all_moves().all(|m| m.to.length().rem_euclid(2) == p0));
            }
        } else {
            prop_assert!(i <= 2);
        }
    }

    #[test]
    fn ledger_totals_positive_and_decreasing(r in any::<u8>(), i in 6i32..200, alpha in 0.05f64..1.5, h in 1u32..3, frac in 0.0f64..0.95) {
        let regime = regime(r);
        let lim = if regime.is_char_two() { alpha / (4.0 * h as f64) } else { alpha / (2.0 * h as f64) };
        let p = LedgerParams { alpha, h, beta: frac * lim, c: 0.0 };
        let at = |i: i32| bound_ledger(&plan_path(CartanPair::new(i, 0), regime).unwrap(), &p).unwrap();
        let (a, b) = (at(i), at(i + 2));
        prop_assert!(a.total > 0.0 && a.total.is_finite() && a.ratio.is_finite());
        prop_assert!(b.total <= a.total * (1.0 + 1e-12));
        prop_assert!(p.rate(&regime) > 0.0);
    }
}

#[test]
fn identity_is_certified() {
    for f in FIELDS {
        let k = field(f);
        let e = GroupElement::identity(&k);
        assert!(symplectic_check(&k, e.m.clone()).is_ok());
    }
}
