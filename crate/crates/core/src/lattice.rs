//! The lattice `Γ_n = { g ∈ SL_n(Z[⁴√2]) : τ(gᵀ)·D_n·g = D_n }` and its
//! distinguished subgroups.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{FieldMatrix, MatrixJson};
use crate::modring::{self, ModMatrix, Modulus};
use crate::qfield::{self, complex_embedding, u0_pow, Embedding, FieldElement};
use crate::{Error, Result};

/// Congruence levels are rational-integer moduli.
pub type CongruenceLevel = Modulus;

/// Default number of partial columns an enumeration may visit.
pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Largest coefficient box accepted by [`enumerate_members`].
pub const MAX_COEFF_BOX: i64 = 12;

/// The dimension `n` together with the form `D_n = diag(−1, √2, …, √2)`.
///
/// `n = 2` is accepted because `Γ₂` supplies the upper-left blocks of
/// `B₃′`; the geometric statements need `n ≥ 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeSpec {
    n: usize,
    form: FieldMatrix,
}

impl LatticeSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("lattice dimension must be at least 2, got {n}")));
        }
        let mut diag = vec![FieldElement::sqrt2(); n];
        diag[0] = FieldElement::from_int(-1);
        Ok(LatticeSpec { n, form: FieldMatrix::diag(&diag) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn form(&self) -> &FieldMatrix {
        &self.form
    }

    /// The form of the `(n−1)`-dimensional lattice, for block elements.
    pub fn smaller(&self) -> Result<LatticeSpec> {
        LatticeSpec::new(self.n - 1)
    }

    /// `τ(aᵀ)·D·b`.
    fn hermitian(&self, a: &FieldMatrix, b: &FieldMatrix) -> FieldMatrix {
        &(&a.transpose().tau() * &self.form) * b
    }
}

/// Whether `g` has integral entries, determinant one and preserves `D_n`.
pub fn is_member(g: &FieldMatrix, spec: &LatticeSpec) -> Result<bool> {
    if g.rows() != spec.n || g.cols() != spec.n {
        return Err(Error::Shape(format!("expected {0}×{0}, got {1}×{2}", spec.n, g.rows(), g.cols())));
    }
    Ok(g.is_integral() && g.det()?.is_one() && spec.hermitian(g, g) == spec.form)
}

/// A matrix together with the outcome of its membership check.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeElement {
    matrix: FieldMatrix,
    certified: bool,
}

impl LatticeElement {
    /// Runs [`is_member`]; fails with a domain error if `g ∉ Γ_n`.
    pub fn certify(g: FieldMatrix, spec: &LatticeSpec) -> Result<Self> {
        if is_member(&g, spec)? {
            Ok(LatticeElement { matrix: g, certified: true })
        } else {
            Err(Error::Domain(format!("matrix is not in Γ_{}:\n{g}", spec.n)))
        }
    }

    /// Wraps a matrix without checking it.
    pub fn uncertified(g: FieldMatrix) -> Self {
        LatticeElement { matrix: g, certified: false }
    }

    pub fn identity(spec: &LatticeSpec) -> Self {
        LatticeElement { matrix: FieldMatrix::identity(spec.n), certified: true }
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> FieldMatrix {
        self.matrix
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    pub fn mul(&self, other: &LatticeElement, spec: &LatticeSpec) -> Result<LatticeElement> {
        LatticeElement::certify(self.matrix.try_mul(&other.matrix)?, spec)
    }

    /// `g⁻¹ = D⁻¹·τ(gᵀ)·D`, certified afresh.
    pub fn inverse(&self, spec: &LatticeSpec) -> Result<LatticeElement> {
        let d_inv = spec.form.inverse()?;
        let inv = &(&d_inv * &self.matrix.transpose().tau()) * &spec.form;
        LatticeElement::certify(inv, spec)
    }

    pub fn to_json(&self) -> LatticeElementJson {
        LatticeElementJson { matrix: self.matrix.to_json(), certified: self.certified }
    }
}

/// Matrix JSON plus `{"certified": bool}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeElementJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    #[serde(default)]
    pub certified: bool,
}

/// `diag(u₀^{k₁}, …, u₀^{kₙ})` with `Σ kᵢ = 0`, an element of `A_n′`.
pub fn a_generator(spec: &LatticeSpec, exponents: &[i64]) -> Result<LatticeElement> {
    if exponents.len() != spec.n {
        return Err(Error::Shape(format!("need {} exponents, got {}", spec.n, exponents.len())));
    }
    if exponents.iter().sum::<i64>() != 0 {
        return Err(Error::Domain(format!("exponents {exponents:?} do not sum to zero")));
    }
    let diag: Vec<FieldElement> = exponents.iter().map(|&k| u0_pow(k)).collect();
    LatticeElement::certify(FieldMatrix::diag(&diag), spec)
}

/// The element of `B_n′` with upper-left block `u₀^{−k}·h` and lower-right
/// entry `u₀^{k(n−1)}`.
///
/// Scaling the block by `u₀^{−k}` and the corner by `u₀^{k(n−1)}` is the
/// exponent convention whose determinant is one.
pub fn b_generator(spec: &LatticeSpec, h: &LatticeElement, k: i64) -> Result<LatticeElement> {
    let small = spec.smaller()?;
    if !is_member(h.matrix(), &small)? {
        return Err(Error::Domain(format!("block is not in Γ_{}", small.n())));
    }
    let block = h.matrix().scale(&u0_pow(-k));
    let corner = FieldMatrix::diag(&[u0_pow(k * (spec.n as i64 - 1))]);
    LatticeElement::certify(FieldMatrix::block_diag(&block, &corner), spec)
}

/// Entry-wise reduction mod `m`.
pub fn reduce_matrix(g: &FieldMatrix, m: CongruenceLevel) -> Result<ModMatrix> {
    if !g.is_square() {
        return Err(Error::Shape("congruence reduction needs a square matrix".into()));
    }
    let entries = g.entries().iter().map(|e| modring::reduce(e, m)).collect::<Result<Vec<_>>>()?;
    ModMatrix::from_entries(g.rows(), m, entries)
}

/// Membership in `Γ(m) = Γ ∩ ker(φ_m)`.
pub fn in_congruence_kernel(g: &FieldMatrix, m: CongruenceLevel) -> Result<bool> {
    Ok(reduce_matrix(g, m)?.is_identity())
}

/// `d(o, g·o) = sqrt(Σ (log σᵢ)²)` for the singular values `σᵢ` of the
/// `+` embedding of `g`.
///
/// Singular values below one are taken as reciprocals of those of the
/// exact inverse, which f64 resolves far better than the small end of
/// `g`'s own spectrum. The Killing-form metric differs from this one by a
/// constant factor.
pub fn symmetric_space_distance(g: &FieldMatrix) -> Result<f64> {
    if !g.is_square() {
        return Err(Error::Shape("distance needs a square matrix".into()));
    }
    let inv = g.inverse()?;
    let big = singular_values(&g.embed(Embedding::Plus))?;
    let small = singular_values(&inv.embed(Embedding::Plus))?;
    let n = big.len();
    let mut acc = 0.0;
    for i in 0..n {
        let s = if big[i] >= 1.0 { big[i] } else { 1.0 / small[n - 1 - i] };
        acc += s.ln().powi(2);
    }
    Ok(acc.sqrt())
}

/// Singular values in decreasing order.
fn singular_values(g: &DMatrix<f64>) -> Result<Vec<f64>> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precision("matrix embedding is not finite".into()));
    }
    let mut sv: Vec<f64> = g.clone().svd(false, false).singular_values.iter().copied().collect();
    if sv.iter().any(|s| s.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) || !s.is_finite()) {
        return Err(Error::Precision(format!("singular values {sv:?} cannot be resolved")));
    }
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    Ok(sv)
}

/// [`symmetric_space_distance`] for a real matrix.
pub fn real_distance(g: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(g)?.iter().map(|s| s.ln().powi(2)).sum::<f64>().sqrt())
}

/// Search bounds for [`enumerate_members`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumerationLimits {
    /// Every coordinate of every entry lies in `[−B, B]`.
    pub coeff_box: i64,
    /// Keep members with `d(o, g·o) < D`.
    pub distance_cap: f64,
    pub node_budget: u64,
}

impl EnumerationLimits {
    pub fn new(coeff_box: i64, distance_cap: f64) -> Self {
        EnumerationLimits { coeff_box, distance_cap, node_budget: DEFAULT_NODE_BUDGET }
    }
}

#[derive(Clone, Debug)]
pub struct Enumeration {
    pub members: Vec<LatticeElement>,
    /// Set when the node budget ran out; `members` is then partial.
    pub budget_exhausted: bool,
    pub nodes_visited: u64,
    pub entry_candidates: usize,
}

#[derive(Clone, Debug)]
struct Entry {
    value: FieldElement,
    /// `τ(y)·y`, exact.
    rel_norm: FieldElement,
    plus: f64,
    minus: f64,
    cplx: Complex64,
    cplx_sq: f64,
}

#[derive(Clone, Debug)]
struct Column {
    entries: Vec<usize>,
}

struct Search<'a> {
    spec: &'a LatticeSpec,
    entries: Vec<Entry>,
    weights: Vec<f64>,
    budget: u64,
    nodes: u64,
    exhausted: bool,
}

const SLACK: f64 = 1e-7;

impl Search<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
        }
        !self.exhausted
    }

    /// All columns `v` with `τ(v)ᵀ·D·v = D_jj` whose entries are
    /// candidates. Under `x ↦ i·⁴√2` that relation becomes
    /// `|v₁|² + √2·Σ|vᵢ|² = |φ(D_jj)|`, a positive-definite bound that
    /// prunes the search.
    fn columns(&mut self, target: &FieldElement, complex_target: f64) -> Vec<Column> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        self.extend_column(0, 0.0, target, complex_target, &mut stack, &mut out);
        out
    }

    fn extend_column(
        &mut self,
        pos: usize,
        partial: f64,
        target: &FieldElement,
        complex_target: f64,
        stack: &mut Vec<usize>,
        out: &mut Vec<Column>,
    ) {
        if pos == self.spec.n {
            if (partial - complex_target).abs() > SLACK * (1.0 + complex_target) {
                return;
            }
            let mut q = FieldElement::zero();
            for (i, &e) in stack.iter().enumerate() {
                q = &q + &(self.spec.form().get(i, i) * &self.entries[e].rel_norm);
            }
            if &q == target {
                out.push(Column { entries: stack.clone() });
            }
            return;
        }
        let w = self.weights[pos];
        for idx in 0..self.entries.len() {
            let next = partial + w * self.entries[idx].cplx_sq;
            if next > complex_target + SLACK * (1.0 + complex_target) {
                break; // sorted by cplx_sq
            }
            if pos + 1 == self.spec.n && (next - complex_target).abs() > SLACK * (1.0 + complex_target) {
                continue;
            }
            if !self.tick() {
                return;
            }
            stack.push(idx);
            self.extend_column(pos + 1, next, target, complex_target, stack, out);
            stack.pop();
            if self.exhausted {
                return;
            }
        }
    }

    /// Numeric screen, then exact check, of `τ(a)ᵀ·D·b = 0`.
    fn orthogonal(&self, a: &Column, b: &Column) -> bool {
        let mut cplx = Complex64::new(0.0, 0.0);
        let mut real = 0.0;
        for i in 0..self.spec.n {
            let (ea, eb) = (&self.entries[a.entries[i]], &self.entries[b.entries[i]]);
            let w = if i == 0 { -1.0 } else { -std::f64::consts::SQRT_2 };
            cplx += ea.cplx.conj() * eb.cplx * w;
            let wr = if i == 0 { -1.0 } else { std::f64::consts::SQRT_2 };
            real += ea.minus * eb.plus * wr;
        }
        if cplx.norm() > 1e-6 || real.abs() > 1e-6 * (1.0 + real.abs()) {
            return false;
        }
        let mut acc = FieldElement::zero();
        for i in 0..self.spec.n {
            let (ea, eb) = (&self.entries[a.entries[i]], &self.entries[b.entries[i]]);
            acc = &acc + &(self.spec.form().get(i, i) * &(&ea.value.tau() * &eb.value));
        }
        acc.is_zero()
    }
}

/// All members of `Γ_n` with entry coordinates in `[−B, B]` and distance
/// below the cap.
///
/// Entries are screened against bounds on all of their embeddings: under
/// `+` they are bounded by `e^D`, under `−` by `√2·e^D` (from
/// `τ(g)ᵀ = D·g⁻¹·D⁻¹`), and under the complex pair by the definite form
/// the relation turns into there. Columns are built from screened entries,
/// then assembled into pairwise-orthogonal frames and checked exactly.
pub fn enumerate_members(spec: &LatticeSpec, limits: EnumerationLimits) -> Result<Enumeration> {
    let b = limits.coeff_box;
    if !(0..=MAX_COEFF_BOX).contains(&b) {
        return Err(Error::Size(format!("coefficient box must lie in 0..={MAX_COEFF_BOX}, got {b}")));
    }
    if !(limits.distance_cap.is_finite() && limits.distance_cap > 0.0) {
        return Err(Error::InvalidInput("distance cap must be positive and finite".into()));
    }
    let plus_bound = limits.distance_cap.exp();
    let minus_bound = std::f64::consts::SQRT_2 * plus_bound;
    let complex_sq_bound = std::f64::consts::SQRT_2;

    let mut entries = Vec::new();
    for c0 in -b..=b {
        for c1 in -b..=b {
            for c2 in -b..=b {
                for c3 in -b..=b {
                    let value = FieldElement::from_ints([c0, c1, c2, c3]);
                    let plus = Embedding::Plus.eval(&value);
                    let minus = Embedding::Minus.eval(&value);
                    let cplx = complex_embedding(&value);
                    let cplx_sq = cplx.norm_sqr();
                    if plus.abs() > plus_bound * (1.0 + SLACK)
                        || minus.abs() > minus_bound * (1.0 + SLACK)
                        || cplx_sq > complex_sq_bound + SLACK
                    {
                        continue;
                    }
                    let rel_norm = value.relative_norm();
                    entries.push(Entry { value, rel_norm, plus, minus, cplx, cplx_sq });
                }
            }
        }
    }
    entries.sort_by(|a, b| a.cplx_sq.partial_cmp(&b.cplx_sq).unwrap_or(Ordering::Equal));
    let entry_candidates = entries.len();

    let n = spec.n;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut weights = vec![sqrt2; n];
    weights[0] = 1.0;
    let mut search = Search { spec, entries, weights, budget: limits.node_budget, nodes: 0, exhausted: false };

    let first_cols = search.columns(&FieldElement::from_int(-1), 1.0);
    let other_cols = if search.exhausted { Vec::new() } else { search.columns(&FieldElement::sqrt2(), sqrt2) };

    let mut members = Vec::new();
    let mut chosen: Vec<&Column> = Vec::with_capacity(n);
    for first in &first_cols {
        if search.exhausted {
            break;
        }
        chosen.push(first);
        assemble(&mut search, &other_cols, &mut chosen, limits.distance_cap, &mut members);
        chosen.pop();
    }
    let mut keyed: Vec<(String, LatticeElement)> =
        members.into_iter().map(|m: LatticeElement| (m.matrix().to_string(), m)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(Enumeration {
        members: keyed.into_iter().map(|(_, m)| m).collect(),
        budget_exhausted: search.exhausted,
        nodes_visited: search.nodes,
        entry_candidates,
    })
}

fn assemble<'c>(
    search: &mut Search<'_>,
    pool: &'c [Column],
    chosen: &mut Vec<&'c Column>,
    cap: f64,
    out: &mut Vec<LatticeElement>,
) {
    let n = search.spec.n;
    if chosen.len() == n {
        let mut g = FieldMatrix::zeros(n, n);
        for (j, col) in chosen.iter().enumerate() {
            for i in 0..n {
                g.set(i, j, search.entries[col.entries[i]].value.clone());
            }
        }
        if g.det().map(|d| d.is_one()).unwrap_or(false) {
            if let Ok(d) = symmetric_space_distance(&g) {
                if d < cap {
                    if let Ok(el) = LatticeElement::certify(g, search.spec) {
                        out.push(el);
                    }
                }
            }
        }
        return;
    }
    for col in pool {
        if !search.tick() {
            return;
        }
        if chosen.iter().all(|c| search.orthogonal(c, col)) {
            chosen.push(col);
            assemble(search, pool, chosen, cap, out);
            chosen.pop();
        }
        if search.exhausted {
            return;
        }
    }
}

/// Numeric value of `u₀` under the `+` embedding.
pub fn u0_value() -> f64 {
    Embedding::Plus.eval(&qfield::u0())
}
