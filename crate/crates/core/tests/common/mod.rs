//! Helpers shared by the integration tests.
#![allow(dead_code)]

use arithlat::lattice::{self, EnumerationLimits, LatticeElement, LatticeSpec};
use arithlat::liealg::cayley;
use arithlat::qfield::Embedding;
use arithlat::{FieldElement, FieldMatrix, Q};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn rat(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn fe_rat(n: i64, d: i64) -> FieldElement {
    FieldElement::from_rational(rat(n, d))
}

pub fn random_element<R: Rng>(rng: &mut R, bound: i64, max_den: i64) -> FieldElement {
    FieldElement::new(std::array::from_fn(|_| rat(rng.gen_range(-bound..=bound), rng.gen_range(1..=max_den))))
}

pub fn random_integral<R: Rng>(rng: &mut R, bound: i64) -> FieldElement {
    FieldElement::from_ints(std::array::from_fn(|_| rng.gen_range(-bound..=bound)))
}

/// Cayley transform of a random rational antisymmetric matrix.
pub fn random_rotation<R: Rng>(rng: &mut R, n: usize) -> FieldMatrix {
    let mut s = FieldMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = fe_rat(rng.gen_range(-6..=6), rng.gen_range(1..=4));
            s.set(i, j, v.clone());
            s.set(j, i, -v);
        }
    }
    cayley(&s).expect("I + S is invertible for antisymmetric S")
}

/// Haar-random element of SO(n).
pub fn haar_rotation<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// Symmetric traceless block-diagonal basis of `𝔭₁` for `X_{n−1} × R`.
fn p1_basis(n: usize) -> Vec<DMatrix<f64>> {
    let mut out = Vec::new();
    for k in 1..n {
        let mut h = DMatrix::zeros(n, n);
        for i in 0..k {
            h[(i, i)] = 1.0;
        }
        h[(k, k)] = -(k as f64);
        out.push(h);
    }
    for i in 0..n - 1 {
        for j in i + 1..n - 1 {
            let mut f = DMatrix::zeros(n, n);
            f[(i, j)] = 1.0;
            f[(j, i)] = 1.0;
            out.push(f);
        }
    }
    out
}

/// Sign of `det(Ad(k)|𝔭₁)` where `k` is the orthogonal polar factor of the
/// `+` embedding of `a`.
pub fn orientation_oracle(a: &FieldMatrix) -> bool {
    let m = a.embed(Embedding::Plus);
    let n = m.nrows();
    let svd = m.svd(true, true);
    let k = svd.u.unwrap() * svd.v_t.unwrap();
    let basis = p1_basis(n);
    let d = basis.len();
    let mut ad = DMatrix::<f64>::zeros(d, d);
    for (j, b) in basis.iter().enumerate() {
        let img = &k * b * k.transpose();
        for (i, c) in basis.iter().enumerate() {
            ad[(i, j)] = img.dot(c) / c.dot(c);
        }
    }
    let det = ad.determinant();
    assert!(det.abs() > 1e-6, "degenerate adjoint action");
    det > 0.0
}

/// Certified block-diagonal elements of `Γ_n`: products of `B_n′` generators
/// built from short members of `Γ_{n−1}` and of determinant-one sign
/// diagonals.
pub fn block_diagonal_members<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<FieldMatrix> {
    let spec = LatticeSpec::new(n).unwrap();
    let small = LatticeSpec::new(n - 1).unwrap();
    let limits = if n - 1 == 2 { EnumerationLimits::new(3, 5.0) } else { EnumerationLimits::new(2, 3.0) };
    let blocks = lattice::enumerate_members(&small, limits).unwrap().members;
    assert!(blocks.len() > 4);
    let mut signs = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() % 2 == 0 {
            let d: Vec<FieldElement> =
                (0..n).map(|i| FieldElement::from_int(if mask >> i & 1 == 1 { -1 } else { 1 })).collect();
            signs.push(FieldMatrix::diag(&d));
        }
    }
    (0..count)
        .map(|_| {
            let h = &blocks[rng.gen_range(0..blocks.len())];
            let b = lattice::b_generator(&spec, h, rng.gen_range(-2..=2)).unwrap();
            let s = &signs[rng.gen_range(0..signs.len())];
            let g = b.matrix() * s;
            LatticeElement::certify(g, &spec).unwrap().into_matrix()
        })
        .collect()
}
