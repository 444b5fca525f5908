//! The averaging lemma `‖x‖ ≤ 2nN max_i ‖x − y_i‖` on finite groups with a
//! unitary representation and no invariant vector.

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use serde_json::json;

use super::report::VerificationReport;
use super::{task_rng, VerifyError};

type Key = [i64; 4];

fn key(m: &Matrix2<f64>) -> Key {
    [m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]].map(|x| (x * 1e9).round() as i64)
}

/// A finite subgroup of `O(2)` given by generators; indices refer to `elements`.
#[derive(Clone, Debug)]
pub struct FiniteGroup {
    pub name: String,
    pub elements: Vec<Matrix2<f64>>,
    index: HashMap<Key, usize>,
}

impl FiniteGroup {
    pub fn generated(name: &str, gens: &[Matrix2<f64>]) -> FiniteGroup {
        let mut elements = vec![Matrix2::identity()];
        let mut index = HashMap::from([(key(&Matrix2::identity()), 0)]);
        let mut frontier = vec![Matrix2::identity()];
        while let Some(g) = frontier.pop() {
            for s in gens {
                let h = g * s;
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(key(&h)) {
                    e.insert(elements.len());
                    elements.push(h);
                    frontier.push(h);
                }
            }
        }
        FiniteGroup { name: name.into(), elements, index }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    fn idx(&self, m: &Matrix2<f64>) -> usize {
        self.index[&key(m)]
    }

    /// Indices of the subgroup generated by `gens`.
    pub fn subgroup(&self, gens: &[Matrix2<f64>]) -> Vec<usize> {
        FiniteGroup::generated("", gens).elements.iter().map(|m| self.idx(m)).collect()
    }

    /// `(1/|H|) Σ_{h∈H} τ(h)`.
    pub fn average(&self, h: &[usize]) -> Matrix2<f64> {
        h.iter().map(|&i| self.elements[i]).sum::<Matrix2<f64>>() / h.len() as f64
    }

    /// Elements of `(K₁K₂…K_n)^N`.
    pub fn product_set(&self, subs: &[Vec<usize>], n: usize) -> BTreeSet<usize> {
        let mut set = BTreeSet::from([0usize]);
        for _ in 0..n {
            for h in subs {
                let mut next = BTreeSet::new();
                for &a in &set {
                    for &b in h {
                        next.insert(self.idx(&(self.elements[a] * self.elements[b])));
                    }
                }
                set = next;
            }
        }
        set
    }

    /// Smallest `N` with `(K₁…K_n)^N = K`, up to `limit`.
    pub fn coverage_exponent(&self, subs: &[Vec<usize>], limit: usize) -> Option<usize> {
        (1..=limit).find(|&n| self.product_set(subs, n).len() == self.order())
    }
}

fn rot(theta: f64) -> Matrix2<f64> {
    Matrix2::new(theta.cos(), -theta.sin(), theta.sin(), theta.cos())
}

/// Matrix of a permutation of `{0,1,2}` on the sum-zero plane, in an orthonormal basis.
fn s3_standard(perm: [usize; 3]) -> Matrix2<f64> {
    let u = [
        [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0],
        [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()],
    ];
    let act = |v: &[f64; 3]| -> [f64; 3] {
        let mut w = [0.0; 3];
        for (i, &p) in perm.iter().enumerate() {
            w[p] = v[i];
        }
        w
    };
    Matrix2::from_fn(|r, c| {
        let w = act(&u[c]);
        (0..3).map(|t| u[r][t] * w[t]).sum()
    })
}

/// `(group, [K₁, K₂] generators, N)` for the two configured cases.
pub fn configured(name: &str) -> Option<(FiniteGroup, Vec<Vec<Matrix2<f64>>>, usize)> {
    match name {
        "S3" => {
            let t = s3_standard([1, 0, 2]);
            let c = s3_standard([1, 2, 0]);
            Some((FiniteGroup::generated("S3", &[t, c]), vec![vec![t], vec![c]], 2))
        }
        "D4" => {
            let r = rot(std::f64::consts::FRAC_PI_2);
            let s = Matrix2::new(1.0, 0.0, 0.0, -1.0);
            Some((FiniteGroup::generated("D4", &[r, s]), vec![vec![s], vec![s * r]], 2))
        }
        _ => None,
    }
}

/// Box–Muller standard normal.
fn standard_normal(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Random trials of the averaging inequality with `y_i` the `K_i`-average of `x`
/// and with `y_i` a random `K_i`-invariant vector.
pub fn verify_averaging(
    group: &FiniteGroup,
    sub_gens: &[Vec<Matrix2<f64>>],
    n_cov: usize,
    trials: u64,
    seed: u64,
) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let mut rep = VerificationReport::new(
        format!("averaging:{}", group.name),
        json!({"group": group.name, "order": group.order(), "subgroups": sub_gens.len(), "N": n_cov, "trials": trials}),
        Some(seed),
    );
    let subs: Vec<Vec<usize>> = sub_gens.iter().map(|g| group.subgroup(g)).collect();
    let all: Vec<usize> = (0..group.order()).collect();
    let proj_norm = group.average(&all).norm();
    if proj_norm > 1e-12 {
        return Err(VerifyError::Precondition(format!("representation has invariant vectors (‖P‖ = {proj_norm:e})")));
    }
    let covered = group.product_set(&subs, n_cov).len();
    if covered != group.order() {
        return Err(VerifyError::Precondition(format!("(K₁…K_n)^{n_cov} covers {covered} of {} elements", group.order())));
    }
    let n_min = group.coverage_exponent(&subs, n_cov).expect("covered at n_cov");
    let bound = 2.0 * sub_gens.len() as f64 * n_cov as f64;
    let projs: Vec<Matrix2<f64>> = subs.iter().map(|h| group.average(h)).collect();
    let mut rng = task_rng(seed, &format!("averaging:{}", group.name));
    let mut max_ratio = 0.0f64;
    rep.cases_total = 2 * trials + 1;
    // x = 0
    rep.cases_run += 1;
    for t in 0..trials {
        let x = Vector2::new(standard_normal(&mut rng), standard_normal(&mut rng)) * rng.gen_range(0.1..10.0);
        for kind in ["average", "random-invariant"] {
            let ys: Vec<Vector2<f64>> = projs
                .iter()
                .map(|p| match kind {
                    "average" => p * x,
                    _ => p * Vector2::new(standard_normal(&mut rng), standard_normal(&mut rng)) * 3.0,
                })
                .collect();
            let dist = ys.iter().map(|y| (x - y).norm()).fold(0.0, f64::max);
            let ratio = x.norm() / dist;
            max_ratio = max_ratio.max(ratio);
            rep.cases_run += 1;
            if x.norm() > bound * dist * (1.0 + 1e-12) {
                rep.counterexample(json!({"trial": t, "kind": kind, "x": [x[0], x[1]], "norm_x": x.norm(), "rhs": bound * dist}));
            }
        }
    }
    rep.margin("invariant_projector_norm", proj_norm);
    rep.margin("coverage_n_min", n_min);
    rep.margin("bound_2nN", bound);
    rep.margin("max_ratio", max_ratio);
    Ok(rep.finish(start))
}
