//! Rational computations in `sl_n = 𝔨 ⊕ 𝔭`: brackets, the action of `𝔨`
//! on `Λᵏ𝔭`, invariant forms, and the transversality of `Ad(k)𝔞` to `𝔭₁`.
//!
//! `𝔭` carries the orthogonal basis
//! `h_k = E₁₁ + … + E_kk − k·E_{k+1,k+1}` (`1 ≤ k < n`) followed by
//! `f_ij = E_ij + E_ji` (`i < j`, lexicographic). Under `⟨A, B⟩ = Tr(AB)`
//! these have squared norms `k(k+1)` and `2`; the orthonormal basis is
//! obtained by dividing by the square roots, which are never formed.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::json;

use crate::linalg::FieldMatrix;
use crate::qfield::FieldElement;
use crate::report::{Report, Status};
use crate::{Error, Result, Q};

/// Largest wedge space handled by [`invariant_forms`].
pub const MAX_WEDGE_DIM: usize = 5000;

fn q(v: i64) -> Q {
    Q::from_integer(BigInt::from(v))
}

/// A trace-zero `n × n` rational matrix.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LieVector {
    n: usize,
    data: Vec<Q>,
}

impl LieVector {
    pub fn new(n: usize, data: Vec<Q>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!("{} entries for n = {n}", data.len())));
        }
        let tr = (0..n).fold(Q::zero(), |acc, i| acc + &data[i * n + i]);
        if !tr.is_zero() {
            return Err(Error::Domain(format!("trace {tr} is not zero")));
        }
        Ok(LieVector { n, data })
    }

    pub fn zero(n: usize) -> Self {
        LieVector { n, data: vec![Q::zero(); n * n] }
    }

    /// `E_ij` for `i ≠ j` (zero-based).
    pub fn unit(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::Domain("E_ii is not traceless".into()));
        }
        let mut v = Self::zero(n);
        v.data[i * n + j] = Q::one();
        Ok(v)
    }

    /// `E_{1n} − E_{n1}`.
    pub fn u_rot(n: usize) -> Self {
        let mut v = Self::zero(n);
        v.data[n - 1] = Q::one();
        v.data[(n - 1) * n] = -Q::one();
        v
    }

    /// `E₁₁ − E_nn`.
    pub fn h_vec(n: usize) -> Self {
        let mut v = Self::zero(n);
        v.data[0] = Q::one();
        v.data[n * n - 1] = -Q::one();
        v
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Q {
        &self.data[i * self.n + j]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..self.n).all(|i| (0..=i).all(|j| *self.get(i, j) == -self.get(j, i)))
    }

    pub fn scale(&self, s: &Q) -> Self {
        LieVector { n: self.n, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        LieVector { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    fn matmul(&self, other: &Self) -> Vec<Q> {
        let n = self.n;
        let mut out = vec![Q::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = &self.data[i * n + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = &other.data[k * n + j];
                    if !b.is_zero() {
                        out[i * n + j] += a * b;
                    }
                }
            }
        }
        out
    }

    /// The inner product `Tr(AB)`.
    pub fn trace_form(&self, other: &Self) -> Q {
        let n = self.n;
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(Q::zero(), |acc, (i, j)| {
            acc + self.get(i, j) * other.get(j, i)
        })
    }

    pub fn from_field_matrix(m: &FieldMatrix) -> Result<Self> {
        if !m.is_square() || !m.is_rational() {
            return Err(Error::Domain("expected a square rational matrix".into()));
        }
        let data = m.entries().iter().map(|e| e.coord(0).clone()).collect();
        Self::new(m.rows(), data)
    }

    pub fn to_field_matrix(&self) -> FieldMatrix {
        let data = self.data.iter().map(|v| FieldElement::from_rational(v.clone())).collect();
        FieldMatrix::from_vec(self.n, self.n, data).expect("n² entries")
    }
}

impl fmt::Display for LieVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `[X, Y] = XY − YX`.
pub fn ad(x: &LieVector, y: &LieVector) -> Result<LieVector> {
    if x.n != y.n {
        return Err(Error::Shape(format!("sl_{} vs sl_{}", x.n, y.n)));
    }
    let xy = x.matmul(y);
    let yx = y.matmul(x);
    Ok(LieVector { n: x.n, data: xy.into_iter().zip(yx).map(|(a, b)| a - b).collect() })
}

/// Bases of `𝔨` and `𝔭` for `sl_n`.
#[derive(Clone, Debug)]
pub struct CartanPieces {
    n: usize,
    k_basis: Vec<LieVector>,
    p_basis: Vec<LieVector>,
    p_norms: Vec<Q>,
    p_labels: Vec<String>,
}

impl CartanPieces {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("sl_{n} is trivial")));
        }
        let mut k_basis = Vec::new();
        let mut p_basis = Vec::new();
        let mut p_norms = Vec::new();
        let mut p_labels = Vec::new();
        for k in 1..n {
            let mut h = LieVector::zero(n);
            for i in 0..k {
                h.data[i * n + i] = Q::one();
            }
            h.data[k * n + k] = q(-(k as i64));
            p_basis.push(h);
            p_norms.push(q((k * (k + 1)) as i64));
            p_labels.push(format!("h{k}"));
        }
        for i in 0..n {
            for j in i + 1..n {
                let eij = LieVector::unit(n, i, j)?;
                let eji = LieVector::unit(n, j, i)?;
                p_basis.push(eij.add(&eji));
                p_norms.push(q(2));
                p_labels.push(format!("f{}{}", i + 1, j + 1));
                k_basis.push(eij.sub(&eji));
            }
        }
        Ok(CartanPieces { n, k_basis, p_basis, p_norms, p_labels })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_basis(&self) -> &[LieVector] {
        &self.k_basis
    }

    pub fn p_basis(&self) -> &[LieVector] {
        &self.p_basis
    }

    pub fn p_dim(&self) -> usize {
        self.p_basis.len()
    }

    /// Squared norms `Tr(b·b)` of the `𝔭` basis.
    pub fn p_norms(&self) -> &[Q] {
        &self.p_norms
    }

    pub fn p_label(&self, i: usize) -> &str {
        &self.p_labels[i]
    }

    /// Index of `f_ij` (zero-based, `i < j`).
    pub fn f_index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let before: usize = (0..i).map(|r| self.n - 1 - r).sum();
        self.n - 1 + before + (j - i - 1)
    }

    /// Coordinates of a symmetric traceless matrix in the `𝔭` basis.
    pub fn p_coords(&self, a: &LieVector) -> Result<Vec<Q>> {
        if !a.is_symmetric() {
            return Err(Error::Domain("matrix is not symmetric".into()));
        }
        let n = self.n;
        let mut out = Vec::with_capacity(self.p_dim());
        let mut prefix = Q::zero();
        for k in 1..n {
            prefix += a.get(k - 1, k - 1);
            let num = &prefix - a.get(k, k) * q(k as i64);
            out.push(num / &self.p_norms[k - 1]);
        }
        for i in 0..n {
            for j in i + 1..n {
                out.push(a.get(i, j).clone());
            }
        }
        Ok(out)
    }

    pub fn from_p_coords(&self, c: &[Q]) -> LieVector {
        let mut out = LieVector::zero(self.n);
        for (b, ci) in self.p_basis.iter().zip(c) {
            if !ci.is_zero() {
                out = out.add(&b.scale(ci));
            }
        }
        out
    }

    /// `ad(X)` restricted to `𝔭`, as a matrix on the `𝔭` basis
    /// (column `j` holds the coordinates of `[X, b_j]`).
    pub fn ad_on_p(&self, x: &LieVector) -> Result<Vec<Vec<Q>>> {
        let mut cols = Vec::with_capacity(self.p_dim());
        for b in &self.p_basis {
            let img = ad(x, b)?;
            if !img.is_symmetric() {
                return Err(Error::Domain("ad(X) does not preserve 𝔭".into()));
            }
            cols.push(self.p_coords(&img)?);
        }
        Ok(cols)
    }

    /// `𝔭₁ = { A ∈ 𝔭 : [A, u] = 0 }`: the `h_k` and the `f_ij` with `j < n`.
    pub fn p1_indices(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.n - 1).collect();
        for i in 0..self.n - 1 {
            for j in i + 1..self.n - 1 {
                out.push(self.f_index(i, j));
            }
        }
        out
    }
}

/// Lexicographic basis of `Λᵏ` of a `d`-dimensional space.
#[derive(Clone, Debug)]
pub struct WedgeBasis {
    d: usize,
    k: usize,
    subsets: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

impl WedgeBasis {
    pub fn new(d: usize, k: usize) -> Self {
        let mut subsets = Vec::with_capacity(binomial(d, k));
        let mut cur = Vec::with_capacity(k);
        fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in start..d {
                if d - i < k - cur.len() {
                    break;
                }
                cur.push(i);
                rec(i + 1, d, k, cur, out);
                cur.pop();
            }
        }
        rec(0, d, k, &mut cur, &mut subsets);
        let index = subsets.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        WedgeBasis { d, k, subsets, index }
    }

    /// Dimension of the underlying space.
    pub fn space_dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subset(&self, i: usize) -> &[usize] {
        &self.subsets[i]
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        self.index.get(s).copied()
    }
}

/// Sorts `idx` in place; returns the sign of the permutation, or `None`
/// if an index repeats.
fn normalise(idx: &mut [usize]) -> Option<i32> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// An element of `Λᵏ𝔭`, stored on sorted index tuples.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct WedgeVector {
    degree: usize,
    terms: BTreeMap<Vec<usize>, Q>,
}

impl WedgeVector {
    pub fn zero(degree: usize) -> Self {
        WedgeVector { degree, terms: BTreeMap::new() }
    }

    /// `b_{i₁} ∧ … ∧ b_{i_k}` in any order; repeated indices give zero.
    pub fn basis(idx: &[usize]) -> Self {
        let mut out = Self::zero(idx.len());
        out.add_term(idx.to_vec(), Q::one());
        out
    }

    /// `v₁ ∧ … ∧ v_k` for vectors given in coordinates.
    pub fn wedge(vectors: &[Vec<Q>]) -> Self {
        let mut out = Self::zero(vectors.len());
        let supports: Vec<Vec<(usize, &Q)>> =
            vectors.iter().map(|v| v.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect()).collect();
        fn rec(
            pos: usize,
            supports: &[Vec<(usize, &Q)>],
            idx: &mut Vec<usize>,
            coef: Q,
            out: &mut WedgeVector,
        ) {
            if pos == supports.len() {
                out.add_term(idx.clone(), coef);
                return;
            }
            for &(i, c) in &supports[pos] {
                if idx.contains(&i) {
                    continue;
                }
                idx.push(i);
                rec(pos + 1, supports, idx, &coef * c, out);
                idx.pop();
            }
        }
        rec(0, &supports, &mut Vec::new(), Q::one(), &mut out);
        out
    }

    fn add_term(&mut self, mut idx: Vec<usize>, c: Q) {
        let Some(sign) = normalise(&mut idx) else { return };
        let c = if sign < 0 { -c } else { c };
        match self.terms.entry(idx) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient on the sorted tuple `idx`.
    pub fn coefficient(&self, idx: &[usize]) -> Q {
        self.terms.get(idx).cloned().unwrap_or_else(Q::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Q)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &WedgeVector) -> WedgeVector {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> WedgeVector {
        if s.is_zero() {
            return Self::zero(self.degree);
        }
        WedgeVector { degree: self.degree, terms: self.terms.iter().map(|(k, v)| (k.clone(), v * s)).collect() }
    }

    /// Dense coordinates on `basis`.
    pub fn to_coords(&self, basis: &WedgeBasis) -> Vec<Q> {
        let mut out = vec![Q::zero(); basis.len()];
        for (k, v) in &self.terms {
            out[basis.index_of(k).expect("tuple in basis")] = v.clone();
        }
        out
    }

    pub fn from_coords(basis: &WedgeBasis, c: &[Q]) -> Self {
        let mut out = Self::zero(basis.k);
        for (i, v) in c.iter().enumerate() {
            if !v.is_zero() {
                out.terms.insert(basis.subsets[i].clone(), v.clone());
            }
        }
        out
    }

    /// Derivation action `Σᵢ v₁ ∧ … ∧ A·vᵢ ∧ … ∧ v_k` of a matrix on `𝔭`
    /// given by its columns.
    pub fn derive(&self, ad_cols: &[Vec<Q>]) -> WedgeVector {
        let mut out = Self::zero(self.degree);
        for (idx, c) in &self.terms {
            for s in 0..idx.len() {
                for (j, a) in ad_cols[idx[s]].iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let mut new = idx.clone();
                    new[s] = j;
                    out.add_term(new, c * a);
                }
            }
        }
        out
    }

    /// Multiplicative action `A·v₁ ∧ … ∧ A·v_k`.
    pub fn exterior_power(&self, ad_cols: &[Vec<Q>]) -> WedgeVector {
        let mut out = Self::zero(self.degree);
        for (idx, c) in &self.terms {
            let vecs: Vec<Vec<Q>> = idx.iter().map(|&i| ad_cols[i].clone()).collect();
            out = out.add(&WedgeVector::wedge(&vecs).scale(c));
        }
        out
    }
}

/// A sparse matrix on a wedge basis, stored by columns.
#[derive(Clone, Debug)]
pub struct WedgeMap {
    pub basis: WedgeBasis,
    pub columns: Vec<BTreeMap<usize, Q>>,
}

impl WedgeMap {
    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.basis.len()];
        for (j, vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            for (i, a) in &self.columns[j] {
                out[*i] += a * vj;
            }
        }
        out
    }

    pub fn trace(&self) -> Q {
        self.columns.iter().enumerate().fold(Q::zero(), |acc, (j, c)| acc + c.get(&j).cloned().unwrap_or_else(Q::zero))
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(BTreeMap::is_empty)
    }

    pub fn to_field_matrix(&self) -> FieldMatrix {
        let d = self.basis.len();
        let mut m = FieldMatrix::zeros(d, d);
        for (j, col) in self.columns.iter().enumerate() {
            for (i, a) in col {
                m.set(*i, j, FieldElement::from_rational(a.clone()));
            }
        }
        m
    }
}

/// The derivation extension of `ad(X)` to `Λᵏ𝔭`.
pub fn wedge_ad(pieces: &CartanPieces, x: &LieVector, k: usize) -> Result<WedgeMap> {
    let ad_cols = pieces.ad_on_p(x)?;
    let basis = WedgeBasis::new(pieces.p_dim(), k);
    let columns = (0..basis.len())
        .into_par_iter()
        .map(|j| {
            let img = WedgeVector::basis(basis.subset(j)).derive(&ad_cols);
            img.terms.iter().map(|(t, v)| (basis.index_of(t).expect("tuple in basis"), v.clone())).collect()
        })
        .collect();
    Ok(WedgeMap { basis, columns })
}

/// Kernel of a sparse rational system, in reduced-echelon normal form
/// (one vector per free column, with a 1 there).
pub fn sparse_kernel(rows: Vec<BTreeMap<usize, Q>>, cols: usize) -> Vec<Vec<Q>> {
    let mut pivots: BTreeMap<usize, BTreeMap<usize, Q>> = BTreeMap::new();
    for mut row in rows {
        while let Some(lead) = row.keys().find(|c| pivots.contains_key(c)).copied() {
            let factor = row.remove(&lead).expect("lead present");
            for (c, v) in &pivots[&lead] {
                if *c == lead {
                    continue;
                }
                let e = row.entry(*c).or_insert_with(Q::zero);
                *e -= &factor * v;
                if e.is_zero() {
                    row.remove(c);
                }
            }
        }
        let Some((&lead, lv)) = row.iter().next() else { continue };
        let inv = lv.recip();
        let row: BTreeMap<usize, Q> = row.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        // keep the echelon reduced: clear `lead` from existing pivot rows
        for prow in pivots.values_mut() {
            if let Some(f) = prow.remove(&lead) {
                for (c, v) in &row {
                    if *c == lead {
                        continue;
                    }
                    let e = prow.entry(*c).or_insert_with(Q::zero);
                    *e -= &f * v;
                    if e.is_zero() {
                        prow.remove(c);
                    }
                }
            }
        }
        pivots.insert(lead, row);
    }
    let mut out = Vec::new();
    for free in 0..cols {
        if pivots.contains_key(&free) {
            continue;
        }
        let mut v = vec![Q::zero(); cols];
        v[free] = Q::one();
        for (p, row) in &pivots {
            if let Some(a) = row.get(&free) {
                v[*p] = -a.clone();
            }
        }
        out.push(v);
    }
    out
}

/// Basis of the `𝔨`-invariant elements of `Λᵏ𝔭` (forms are identified with
/// vectors through the trace form, under which `ad(𝔨)` is skew).
pub fn invariant_forms(n: usize, k: usize) -> Result<Vec<WedgeVector>> {
    let pieces = CartanPieces::new(n)?;
    let size = binomial(pieces.p_dim(), k);
    if size > MAX_WEDGE_DIM {
        return Err(Error::Size(format!("dim Λ^{k}𝔭 = {size} exceeds {MAX_WEDGE_DIM}")));
    }
    let maps = pieces.k_basis().par_iter().map(|x| wedge_ad(&pieces, x, k)).collect::<Result<Vec<_>>>()?;
    let basis = WedgeBasis::new(pieces.p_dim(), k);
    let mut rows: Vec<BTreeMap<usize, Q>> = Vec::new();
    for m in &maps {
        let mut by_row: Vec<BTreeMap<usize, Q>> = vec![BTreeMap::new(); basis.len()];
        for (j, col) in m.columns.iter().enumerate() {
            for (i, a) in col {
                by_row[*i].insert(j, a.clone());
            }
        }
        rows.extend(by_row.into_iter().filter(|r| !r.is_empty()));
    }
    Ok(sparse_kernel(rows, basis.len()).iter().map(|v| WedgeVector::from_coords(&basis, v)).collect())
}

/// Index tuple of `f_{1n} ∧ f_{2n} ∧ … ∧ f_{(n−1)n}`, the normal directions
/// of `X_{n−1} × R`.
pub fn normal_tuple(pieces: &CartanPieces) -> Vec<usize> {
    let n = pieces.n();
    let mut t: Vec<usize> = (0..n - 1).map(|i| pieces.f_index(i, n - 1)).collect();
    t.sort_unstable();
    t
}

/// Checks that each form is `𝔨`-invariant and has zero coefficient on the
/// normal tuple. Invariance is re-checked with [`WedgeVector::derive`],
/// independently of the matrices used to find the forms.
pub fn check_normal_coefficients(n: usize, forms: &[WedgeVector]) -> Result<Report> {
    let started = Instant::now();
    let pieces = CartanPieces::new(n)?;
    let normal = normal_tuple(&pieces);
    let ad_cols = pieces.k_basis().iter().map(|x| pieces.ad_on_p(x)).collect::<Result<Vec<_>>>()?;
    for (i, form) in forms.iter().enumerate() {
        let coef = form.coefficient(&normal);
        let invariant = ad_cols.iter().all(|a| form.derive(a).is_zero());
        if !coef.is_zero() || !invariant {
            let terms: Vec<String> = form.terms().take(12).map(|(k, v)| format!("{v}·{k:?}")).collect();
            return Ok(Report::new("normal_coefficient_vanishes", Status::Fail)
                .with_witness(json!({
                    "form_index": i,
                    "normal_coefficient": coef.to_string(),
                    "invariant": invariant,
                    "terms": terms,
                }))
                .with_params(json!({ "n": n }))
                .timed(started));
        }
    }
    Ok(Report::new("normal_coefficient_vanishes", Status::Pass)
        .with_witness(json!({ "invariant_forms": forms.len(), "normal_tuple": normal }))
        .with_params(json!({ "n": n }))
        .timed(started))
}

/// For every `𝔨`-invariant `(n−1)`-form, the coefficient on
/// `e*_{1n} ∧ … ∧ e*_{(n−1)n}` is zero.
pub fn normal_coefficient_vanishes(n: usize) -> Result<Report> {
    let started = Instant::now();
    let forms = invariant_forms(n, n - 1)?;
    let mut report = check_normal_coefficients(n, &forms)?;
    let v0 = v0_analysis(n)?;
    if let Some(w) = report.witness.as_mut() {
        w["v0"] = v0.to_json();
    }
    Ok(report.timed(started))
}

/// The two actions of `ad(u_rot)` on
/// `V₀ = span{ v₁ = f_{1n} ∧ … ∧ f_{(n−1)n}, v₂ = H ∧ f₁₂ ∧ … ∧ f_{1(n−1)} }`.
/// Matrices list the image of `vᵢ` in row `i`.
#[derive(Clone, Debug)]
pub struct V0Analysis {
    pub n: usize,
    /// `ad(u)f_{1n} = a·H`.
    pub a: Q,
    /// `ad(u)H = b·f_{1n}`.
    pub b: Q,
    /// Whether the derivation action maps `V₀` into itself.
    pub derivation_invariant: bool,
    pub derivation_matrix: Option<[[Q; 2]; 2]>,
    /// Number of terms of each derivation image outside `V₀`.
    pub derivation_leak: [usize; 2],
    /// Same data for `Λ^{n−1}(ad u)`, i.e. `ad(u)` applied to every factor.
    pub exterior_power_invariant: bool,
    pub exterior_power_matrix: Option<[[Q; 2]; 2]>,
}

impl V0Analysis {
    /// `[[0, a], [(−1)ⁿ·b, 0]]`.
    pub fn expected_matrix(&self) -> [[Q; 2]; 2] {
        let sign = if self.n.is_multiple_of(2) { Q::one() } else { -Q::one() };
        [[Q::zero(), self.a.clone()], [&self.b * sign, Q::zero()]]
    }

    pub fn derivation_pattern_holds(&self) -> bool {
        self.derivation_matrix.as_ref() == Some(&self.expected_matrix())
    }

    pub fn exterior_power_pattern_holds(&self) -> bool {
        self.exterior_power_matrix.as_ref() == Some(&self.expected_matrix())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &[[Q; 2]; 2]| m.iter().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>();
        json!({
            "n": self.n,
            "a": self.a.to_string(),
            "b": self.b.to_string(),
            "expected_matrix": mat(&self.expected_matrix()),
            "derivation_invariant": self.derivation_invariant,
            "derivation_matrix": self.derivation_matrix.as_ref().map(mat),
            "derivation_terms_outside_v0": self.derivation_leak,
            "exterior_power_invariant": self.exterior_power_invariant,
            "exterior_power_matrix": self.exterior_power_matrix.as_ref().map(mat),
        })
    }
}

/// Writes `w` as `α·v₁ + β·v₂` if possible; otherwise counts leftover terms.
fn decompose_in(w: &WedgeVector, v1: &WedgeVector, v2: &WedgeVector) -> std::result::Result<[Q; 2], usize> {
    // v₁ has a single term; v₂'s terms are disjoint from it
    let (k1, c1) = v1.terms().next().expect("nonzero");
    let alpha = w.coefficient(k1) / c1;
    let (k2, c2) = v2.terms().next().expect("nonzero");
    let beta = w.coefficient(k2) / c2;
    let rest = w.add(&v1.scale(&-alpha.clone())).add(&v2.scale(&-beta.clone()));
    if rest.is_zero() {
        Ok([alpha, beta])
    } else {
        Err(rest.terms.len())
    }
}

pub fn v0_analysis(n: usize) -> Result<V0Analysis> {
    if n < 3 {
        return Err(Error::Domain("V₀ needs n ≥ 3".into()));
    }
    let pieces = CartanPieces::new(n)?;
    let d = pieces.p_dim();
    let e = |i: usize| {
        let mut v = vec![Q::zero(); d];
        v[i] = Q::one();
        v
    };
    let normal: Vec<Vec<Q>> = (0..n - 1).map(|i| e(pieces.f_index(i, n - 1))).collect();
    let v1 = WedgeVector::wedge(&normal);
    let mut second = vec![pieces.p_coords(&LieVector::h_vec(n))?];
    second.extend((1..n - 1).map(|i| e(pieces.f_index(0, i))));
    let v2 = WedgeVector::wedge(&second);

    let ad_cols = pieces.ad_on_p(&LieVector::u_rot(n))?;
    let images_d = [v1.derive(&ad_cols), v2.derive(&ad_cols)];
    let images_e = [v1.exterior_power(&ad_cols), v2.exterior_power(&ad_cols)];
    let dec_d: Vec<_> = images_d.iter().map(|w| decompose_in(w, &v1, &v2)).collect();
    let dec_e: Vec<_> = images_e.iter().map(|w| decompose_in(w, &v1, &v2)).collect();
    let to_matrix = |dec: &[std::result::Result<[Q; 2], usize>]| match (&dec[0], &dec[1]) {
        (Ok(r0), Ok(r1)) => Some([r0.clone(), r1.clone()]),
        _ => None,
    };
    let (a, b) = ad_constants(n)?;
    let leak = |r: &std::result::Result<[Q; 2], usize>| r.as_ref().err().copied().unwrap_or(0);
    Ok(V0Analysis {
        n,
        a,
        b,
        derivation_invariant: dec_d.iter().all(|r| r.is_ok()),
        derivation_matrix: to_matrix(&dec_d),
        derivation_leak: [leak(&dec_d[0]), leak(&dec_d[1])],
        exterior_power_invariant: dec_e.iter().all(|r| r.is_ok()),
        exterior_power_matrix: to_matrix(&dec_e),
    })
}

/// `x = c·y` for a scalar `c`, if so.
fn multiple_of(x: &LieVector, y: &LieVector) -> Option<Q> {
    let pos = (0..y.data.len()).find(|&p| !y.data[p].is_zero())?;
    let c = &x.data[pos] / &y.data[pos];
    (x == &y.scale(&c)).then_some(c)
}

/// `(a, b)` with `ad(u)f_{1n} = a·H` and `ad(u)H = b·f_{1n}`.
pub fn ad_constants(n: usize) -> Result<(Q, Q)> {
    let u = LieVector::u_rot(n);
    let h = LieVector::h_vec(n);
    let f1n = LieVector::unit(n, 0, n - 1)?.add(&LieVector::unit(n, n - 1, 0)?);
    let a = multiple_of(&ad(&u, &f1n)?, &h).ok_or_else(|| Error::Internal("ad(u)f_1n ∉ span(H)".into()))?;
    let b = multiple_of(&ad(&u, &h)?, &f1n).ok_or_else(|| Error::Internal("ad(u)H ∉ span(f_1n)".into()))?;
    Ok((a, b))
}

/// The four `ad(u_rot)` relations with `u_rot = E_{1n} − E_{n1}`:
/// `ad(u)f_in = f_1i`, `ad(u)f_1i = −f_in` (`1 < i < n`), `ad(u)f_1n = a·H`
/// and `ad(u)H = b·f_1n` with `a, b ≠ 0`.
pub fn ad_relations(n: usize) -> Result<Report> {
    let started = Instant::now();
    if n < 3 {
        return Err(Error::Domain("relations need n ≥ 3".into()));
    }
    let u = LieVector::u_rot(n);
    let f = |i: usize, j: usize| -> Result<LieVector> { Ok(LieVector::unit(n, i, j)?.add(&LieVector::unit(n, j, i)?)) };
    let h = LieVector::h_vec(n);
    let mut failures = Vec::new();
    for i in 1..n - 1 {
        if ad(&u, &f(i, n - 1)?)? != f(0, i)? {
            failures.push(format!("ad(u) f_{}{} != f_1{}", i + 1, n, i + 1));
        }
        if ad(&u, &f(0, i)?)? != f(i, n - 1)?.scale(&-Q::one()) {
            failures.push(format!("ad(u) f_1{} != -f_{}{}", i + 1, i + 1, n));
        }
    }
    let a = multiple_of(&ad(&u, &f(0, n - 1)?)?, &h).filter(|c| !c.is_zero());
    let b = multiple_of(&ad(&u, &h)?, &f(0, n - 1)?).filter(|c| !c.is_zero());
    if a.is_none() {
        failures.push(format!("ad(u) f_1{n} is not a nonzero multiple of H"));
    }
    if b.is_none() {
        failures.push(format!("ad(u) H is not a nonzero multiple of f_1{n}"));
    }
    let params = json!({ "n": n });
    let report = if failures.is_empty() {
        Report::new("ad_relations", Status::Pass).with_witness(json!({
            "a": a.map(|v| v.to_string()),
            "b": b.map(|v| v.to_string()),
        }))
    } else {
        Report::new("ad_relations", Status::Fail).with_witness(json!({ "failures": failures }))
    };
    Ok(report.with_params(params).timed(started))
}

fn require_orthogonal(k: &FieldMatrix) -> Result<()> {
    if !k.is_square() || !k.is_rational() {
        return Err(Error::Domain("expected a square rational matrix".into()));
    }
    if !(&k.transpose() * k).is_identity() {
        return Err(Error::Domain("matrix is not orthogonal".into()));
    }
    Ok(())
}

/// `k·u·k⁻¹` for `u = diag(1, …, 1, −(n−1))`, computed directly and from
/// the block formula
/// `[[I − n·O₁₂O₁₂ᵗ, −n·O₂₂O₁₂], [−n·O₂₂O₁₂ᵗ, 1 − n·O₂₂²]]`
/// where `(O₁₂; O₂₂)` is the last column of `k`. The two must agree.
pub fn conjugated_singular_vector(k: &FieldMatrix) -> Result<FieldMatrix> {
    require_orthogonal(k)?;
    let n = k.rows();
    let u = crate::intersection::u_sing(n);
    let direct = &(k * &u) * &k.transpose();
    let nn = FieldElement::from_int(n as i64);
    let mut closed = FieldMatrix::zeros(n, n);
    let o22 = k.get(n - 1, n - 1);
    for i in 0..n {
        for j in 0..n {
            let v = match (i == n - 1, j == n - 1) {
                (false, false) => {
                    let id = if i == j { FieldElement::one() } else { FieldElement::zero() };
                    &id - &(&nn * &(k.get(i, n - 1) * k.get(j, n - 1)))
                }
                (false, true) => -(&nn * &(o22 * k.get(i, n - 1))),
                (true, false) => -(&nn * &(o22 * k.get(j, n - 1))),
                (true, true) => &FieldElement::one() - &(&nn * &(o22 * o22)),
            };
            closed.set(i, j, v);
        }
    }
    if direct != closed {
        return Err(Error::Internal(format!("closed form disagrees with kuk⁻¹:\n{direct}\nvs\n{closed}")));
    }
    Ok(direct)
}

/// Whether `Ad(k)𝔞 ∩ 𝔭₁ = 0`, from the kernel of `[Ad(k)𝔞 | −𝔭₁]` in `𝔭`
/// coordinates.
pub fn transversality_check(k: &FieldMatrix) -> Result<bool> {
    Ok(transversal_intersection_dim(k)? == 0)
}

/// `dim(Ad(k)𝔞 ∩ 𝔭₁)`.
pub fn transversal_intersection_dim(k: &FieldMatrix) -> Result<usize> {
    require_orthogonal(k)?;
    let n = k.rows();
    let pieces = CartanPieces::new(n)?;
    let d = pieces.p_dim();
    let kt = k.transpose();
    let mut cols: Vec<Vec<Q>> = Vec::new();
    for h in &pieces.p_basis()[..n - 1] {
        let moved = &(k * &h.to_field_matrix()) * &kt;
        cols.push(pieces.p_coords(&LieVector::from_field_matrix(&moved)?)?);
    }
    for i in pieces.p1_indices() {
        let mut v = vec![Q::zero(); d];
        v[i] = -Q::one();
        cols.push(v);
    }
    let mut m = FieldMatrix::zeros(d, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for (i, v) in c.iter().enumerate() {
            m.set(i, j, FieldElement::from_rational(v.clone()));
        }
    }
    // both families are independent, so the kernel has the dimension of
    // the intersection
    Ok(m.kernel().len())
}

/// Cayley transform `(I − S)(I + S)⁻¹` of an antisymmetric rational `S`;
/// a rational rotation.
pub fn cayley(s: &FieldMatrix) -> Result<FieldMatrix> {
    if !s.is_square() || !s.is_rational() || s.transpose() != -s {
        return Err(Error::Domain("expected an antisymmetric rational matrix".into()));
    }
    let id = FieldMatrix::identity(s.rows());
    Ok(&(&id - s) * &(&id + s).inverse()?)
}

/// The root spaces `𝔤_ij = ⟨E_ij⟩`: `[H, E_ij] = (H_ii − H_jj)·E_ij` for
/// diagonal `H`.
pub fn root_value(h: &LieVector, i: usize, j: usize) -> Result<Q> {
    let e = LieVector::unit(h.n(), i, j)?;
    let br = ad(h, &e)?;
    let c = br.get(i, j).clone();
    if br != e.scale(&c) {
        return Err(Error::Domain("H is not diagonal".into()));
    }
    Ok(c)
}
