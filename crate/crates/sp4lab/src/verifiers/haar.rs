//! `Sp₄(F_q)` enumeration, symplectic lifts to `Sp₄(O)` and uniform sampling of
//! `K/K(n) = Sp₄(O/π^n)`.

use rand::Rng;

use crate::exactfield::{FieldElem, FieldSpec};
use crate::sp4::{diag_ef, mu, GroupElement, Mat4};

/// Matrix over the residue field, row-major, entries as `F_q` indices.
pub type FqMat = [[u64; 4]; 4];
type FqVec = [u64; 4];

fn omega_fq(k: &FieldSpec, u: &FqVec, v: &FqVec) -> u64 {
    let plus = k.ff_add(k.ff_mul(u[0], v[3]), k.ff_mul(u[1], v[2]));
    let minus = k.ff_add(k.ff_mul(u[2], v[1]), k.ff_mul(u[3], v[0]));
    k.ff_sub(plus, minus)
}

fn all_vectors(q: u64) -> Vec<FqVec> {
    (0..q.pow(4)).map(|mut c| std::array::from_fn(|_| {
        let d = c % q;
        c /= q;
        d
    })).collect()
}

fn from_columns(c: [&FqVec; 4]) -> FqMat {
    std::array::from_fn(|r| std::array::from_fn(|col| c[col][r]))
}

/// Order of `Sp₄(F_q)`: `q⁴(q²−1)(q⁴−1)`.
pub fn sp4_fq_order(q: u64) -> u64 {
    q.pow(4) * (q * q - 1) * (q.pow(4) - 1)
}

/// Every element of `Sp₄(F_q)`, built column by column from symplectic bases.
pub fn enumerate_sp4_fq(k: &FieldSpec) -> Vec<FqMat> {
    let vs = all_vectors(k.q);
    let mut out = Vec::with_capacity(sp4_fq_order(k.q) as usize);
    for c1 in vs.iter().skip(1) {
        for c4 in vs.iter().filter(|v| omega_fq(k, c1, v) == 1) {
            let perp: Vec<&FqVec> = vs.iter().filter(|v| omega_fq(k, c1, v) == 0 && omega_fq(k, v, c4) == 0).collect();
            for c2 in perp.iter().filter(|v| ***v != [0; 4]) {
                for c3 in perp.iter().filter(|v| omega_fq(k, c2, v) == 1) {
                    out.push(from_columns([c1, c2, c3, c4]));
                }
            }
        }
    }
    out
}

/// Uniform element of `Sp₄(F_q)` by rejection on each column.
pub fn sample_sp4_fq(k: &FieldSpec, rng: &mut impl Rng) -> FqMat {
    let q = k.q;
    let mut draw = |ok: &dyn Fn(&FqVec) -> bool| loop {
        let v: FqVec = std::array::from_fn(|_| rng.gen_range(0..q));
        if ok(&v) {
            return v;
        }
    };
    let c1 = draw(&|v| *v != [0; 4]);
    let c4 = draw(&|v| omega_fq(k, &c1, v) == 1);
    let c2 = draw(&|v| *v != [0; 4] && omega_fq(k, &c1, v) == 0 && omega_fq(k, v, &c4) == 0);
    let c3 = draw(&|v| omega_fq(k, &c1, v) == 0 && omega_fq(k, v, &c4) == 0 && omega_fq(k, &c2, v) == 1);
    from_columns([&c1, &c2, &c3, &c4])
}

fn omega(u: &[FieldElem; 4], v: &[FieldElem; 4]) -> FieldElem {
    &(&(&u[0] * &v[3]) + &(&u[1] * &v[2])) - &(&(&u[2] * &v[1]) + &(&u[3] * &v[0]))
}

fn axpy(a: &FieldElem, x: &[FieldElem; 4], y: &[FieldElem; 4]) -> [FieldElem; 4] {
    std::array::from_fn(|r| &(a * &x[r]) + &y[r])
}

/// Symplectic lift of `ḡ ∈ Sp₄(F_q)`: entrywise section, then symplectic
/// Gram–Schmidt on the columns (all divisions are by units `≡ 1 mod π`).
pub fn lift_symplectic(k: &FieldSpec, g: &FqMat) -> GroupElement {
    let col = |c: usize| -> [FieldElem; 4] { std::array::from_fn(|r| k.residue_const(g[r][c])) };
    let c1 = col(0);
    let n = omega(&c1, &col(3)).inv().expect("unit pairing");
    let c4: [FieldElem; 4] = std::array::from_fn(|r| &col(3)[r] * &n);
    let proj = |v: [FieldElem; 4]| {
        let a = omega(&c4, &v);
        let b = -&omega(&c1, &v);
        axpy(&b, &c4, &axpy(&a, &c1, &v))
    };
    let c2 = proj(col(1));
    let c3p = proj(col(2));
    let n = omega(&c2, &c3p).inv().expect("unit pairing");
    let c3: [FieldElem; 4] = std::array::from_fn(|r| &c3p[r] * &n);
    let cols = [c1, c2, c3, c4];
    GroupElement::trusted(k, Mat4::from_fn(|r, c| cols[c][r].clone()))
}

/// The ten generators of `K(m)/K(m+1)` for parameters `t ∈ F_q^{10}`.
fn kernel_element(k: &FieldSpec, m: u32, t: &[u64; 10]) -> Mat4 {
    let pm = k.pi_pow(m as i32);
    let mut g = Mat4::identity(k);
    for (idx, which) in [21u8, 32, 31, 41].into_iter().enumerate() {
        let lo = &pm * &k.residue_const(t[idx]);
        let hi = &pm * &k.residue_const(t[4 + idx]);
        g = g.mul(&mu(k, which, &lo)).mul(&mu(k, which, &hi).transpose());
    }
    let e = &k.one() + &(&pm * &k.residue_const(t[8]));
    let f = &k.one() + &(&pm * &k.residue_const(t[9]));
    g.mul(&diag_ef(k, &e, &f))
}

/// Representative of a uniform class in `Sp₄(O/π^n)`: uniform base point, then a
/// uniform kick in each congruence layer.
pub fn sample_k(k: &FieldSpec, depth: u32, rng: &mut impl Rng) -> GroupElement {
    let base = sample_sp4_fq(k, rng);
    let mut g = lift_symplectic(k, &base).m;
    for m in 1..depth {
        let t: [u64; 10] = std::array::from_fn(|_| rng.gen_range(0..k.q));
        g = g.mul(&kernel_element(k, m, &t));
    }
    GroupElement::trusted(k, g)
}

/// Representatives of all of `Sp₄(O/π^n)`, built on top of the lifted base points.
pub fn enumerate_k(k: &FieldSpec, depth: u32) -> Vec<GroupElement> {
    let mut layer: Vec<Mat4> = enumerate_sp4_fq(k).iter().map(|g| lift_symplectic(k, g).m).collect();
    for m in 1..depth {
        let kicks: Vec<Mat4> = (0..k.q.pow(10))
            .map(|mut c| {
                let t: [u64; 10] = std::array::from_fn(|_| {
                    let d = c % k.q;
                    c /= k.q;
                    d
                });
                kernel_element(k, m, &t)
            })
            .collect();
        layer = layer.iter().flat_map(|g| kicks.iter().map(move |h| g.mul(h))).collect();
    }
    layer.into_iter().map(|m| GroupElement::trusted(k, m)).collect()
}

/// Entrywise reduction modulo `π^n` as residue codes.
pub fn reduce_mat(k: &FieldSpec, g: &Mat4, n: u32) -> Vec<u64> {
    g.0.iter().flatten().map(|x| k.reduce(x, n).expect("integral").code).collect()
}
