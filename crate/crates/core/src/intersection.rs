//! Intersections of the two cycles: the linear system
//! `a·t = γtγ⁻¹·a, a·u = u·a`, its solutions over `L` and over `Z/m`, the
//! sign criterion and double-coset bookkeeping.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet, VecDeque};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::lattice::{LatticeElement, LatticeSpec};
use crate::linalg::FieldMatrix;
use crate::modring::{self, ModElement, ModMatrix, Modulus};
use crate::qfield::{self, Embedding, FieldElement};
use crate::{Error, Result, Q};

/// Kernel modules larger than this are not scanned.
pub const MAX_KERNEL_SCAN: u64 = 1_000_000;

/// `u = diag(1, …, 1, −(n−1))`, the singular direction of `X_{n−1} × R`.
pub fn u_sing(n: usize) -> FieldMatrix {
    let mut d = vec![FieldElement::one(); n];
    d[n - 1] = FieldElement::from_int(-(n as i64 - 1));
    FieldMatrix::diag(&d)
}

/// Coefficients (constant term first) of `det(λ − A)`, by Faddeev–LeVerrier.
pub fn characteristic_polynomial(a: &FieldMatrix) -> Result<Vec<FieldElement>> {
    if !a.is_square() {
        return Err(Error::Shape("characteristic polynomial needs a square matrix".into()));
    }
    let n = a.rows();
    let mut coeffs = vec![FieldElement::zero(); n + 1];
    coeffs[n] = FieldElement::one();
    let mut m = FieldMatrix::zeros(n, n);
    for k in 1..=n {
        m = &(a * &m) + &FieldMatrix::identity(n).scale(&coeffs[n - k + 1]);
        let am = a * &m;
        let mut tr = FieldElement::zero();
        for i in 0..n {
            tr += am.get(i, i);
        }
        coeffs[n - k] = -tr.scale(&Q::new(BigInt::one(), BigInt::from(k)));
    }
    Ok(coeffs)
}

fn trim(p: &mut Vec<FieldElement>) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_rem(a: &[FieldElement], b: &[FieldElement]) -> Result<Vec<FieldElement>> {
    let mut r = a.to_vec();
    trim(&mut r);
    let lead_inv = b.last().ok_or_else(|| Error::Internal("empty divisor".into()))?.inv()?;
    while r.len() >= b.len() && !(r.len() == 1 && r[0].is_zero()) {
        let q = r.last().unwrap() * &lead_inv;
        let shift = r.len() - b.len();
        for (i, bi) in b.iter().enumerate() {
            r[shift + i] = &r[shift + i] - &(&q * bi);
        }
        r.pop();
        if r.is_empty() {
            r.push(FieldElement::zero());
        }
        trim(&mut r);
    }
    Ok(r)
}

/// Degree of `gcd(p, q)` over `L`.
pub fn poly_gcd_degree(p: &[FieldElement], q: &[FieldElement]) -> Result<usize> {
    let mut a = p.to_vec();
    let mut b = q.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = poly_rem(&a, &b)?;
        a = b;
        b = r;
    }
    Ok(a.len() - 1)
}

/// A matrix `t` whose characteristic polynomial is squarefree, i.e. with
/// distinct eigenvalues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusDirection {
    t: FieldMatrix,
}

impl TorusDirection {
    pub fn new(t: FieldMatrix) -> Result<Self> {
        let chi = characteristic_polynomial(&t)?;
        let deriv: Vec<FieldElement> =
            chi.iter().enumerate().skip(1).map(|(i, c)| c.scale(&Q::from_integer(BigInt::from(i)))).collect();
        if poly_gcd_degree(&chi, &deriv)? != 0 {
            return Err(Error::InvalidInput("torus direction has a repeated eigenvalue".into()));
        }
        Ok(TorusDirection { t })
    }

    pub fn matrix(&self) -> &FieldMatrix {
        &self.t
    }
}

/// `k₀ = (1/3)·[[2,−2,1],[2,1,−2],[1,2,2]]`, a rational rotation whose last
/// row and column have no zero entry.
pub fn k0() -> FieldMatrix {
    FieldMatrix::from_int_rows(&[&[2, -2, 1], &[2, 1, -2], &[1, 2, 2]])
        .scale(&FieldElement::from_rational(Q::new(BigInt::one(), BigInt::from(3))))
}

/// The default direction for `n = 3`: `k₀·diag(1,2,3)·k₀⁻¹`.
pub fn default_torus_direction() -> TorusDirection {
    let k = k0();
    let d = FieldMatrix::diag(&[FieldElement::from_int(1), FieldElement::from_int(2), FieldElement::from_int(3)]);
    TorusDirection::new(&(&k * &d) * &k.transpose()).expect("distinct eigenvalues")
}

/// The system `a·t − γtγ⁻¹·a = 0, a·u − u·a = 0` in the `n²` entries of
/// `a` (entry `a_pq` is unknown `p·n + q`).
#[derive(Clone, Debug)]
pub struct StarSystem {
    gamma: FieldMatrix,
    t: FieldMatrix,
    u: FieldMatrix,
    matrix: FieldMatrix,
}

impl StarSystem {
    pub fn n(&self) -> usize {
        self.gamma.rows()
    }

    pub fn gamma(&self) -> &FieldMatrix {
        &self.gamma
    }

    pub fn t(&self) -> &FieldMatrix {
        &self.t
    }

    pub fn u(&self) -> &FieldMatrix {
        &self.u
    }

    /// The `2n² × n²` coefficient matrix.
    pub fn matrix(&self) -> &FieldMatrix {
        &self.matrix
    }

    /// Kernel basis (RREF-normalised), reshaped to `n × n`.
    pub fn solution_basis(&self) -> Vec<FieldMatrix> {
        let n = self.n();
        self.matrix.kernel().iter().map(|v| FieldMatrix::reshape(v, n, n).expect("n² entries")).collect()
    }

    pub fn is_solution(&self, a: &FieldMatrix) -> bool {
        (&(a * &self.t) - &(&self.conjugated_t() * a)).is_zero() && a.commutes_with(&self.u)
    }

    fn conjugated_t(&self) -> FieldMatrix {
        let inv = self.gamma.inverse().expect("γ invertible");
        &(&self.gamma * &self.t) * &inv
    }
}

pub fn build_star_system(gamma: &FieldMatrix, t: &TorusDirection) -> Result<StarSystem> {
    let n = gamma.rows();
    if !gamma.is_square() || t.matrix().rows() != n {
        return Err(Error::Shape(format!("γ is {}×{}, t is {}×{}", n, gamma.cols(), t.t.rows(), t.t.cols())));
    }
    let s = &(gamma * t.matrix()) * &gamma.inverse()?;
    let u = u_sing(n);
    let nn = n * n;
    let mut m = FieldMatrix::zeros(2 * nn, nn);
    for (block, (right, left)) in [(t.matrix(), &s), (&u, &u)].into_iter().enumerate() {
        for i in 0..n {
            for j in 0..n {
                let row = block * nn + i * n + j;
                for k in 0..n {
                    // (a·right)_ij − (left·a)_ij
                    let c = m.get(row, i * n + k) + right.get(k, j);
                    m.set(row, i * n + k, c);
                    let c = m.get(row, k * n + j) - left.get(i, k);
                    m.set(row, k * n + j, c);
                }
            }
        }
    }
    Ok(StarSystem { gamma: gamma.clone(), t: t.matrix().clone(), u, matrix: m })
}

pub fn solution_dimension(sys: &StarSystem) -> usize {
    sys.matrix.cols() - sys.matrix.rank()
}

/// Result of [`solvable_mod`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModSolvability {
    pub modulus: Modulus,
    pub solvable: bool,
    /// Entries of a solution `a` mod `m`, row-major, four coordinates each.
    pub witness: Option<Vec<[u64; 4]>>,
    /// `"rational_kernel"` or `"module_scan"`.
    pub found_by: Option<String>,
    /// Per-row factors used to clear denominators of the system.
    pub clearing_factors: Vec<String>,
    pub kernel_cardinality: Option<u64>,
}

/// Coordinates of the product `c·a` as a 4×4 matrix acting on the
/// coordinates of `a`.
fn multiplication_block(c: &FieldElement) -> [[Q; 4]; 4] {
    let mut out: [[Q; 4]; 4] = Default::default();
    let mut basis = FieldElement::one();
    for l in 0..4 {
        let prod = c * &basis;
        for (r, row) in out.iter_mut().enumerate() {
            row[l] = prod.coord(r).clone();
        }
        basis = &basis * &FieldElement::root();
    }
    out
}

/// The system over `Z`, each `L`-row expanded to four integer rows and
/// multiplied by the lcm of its denominators.
fn integer_system(sys: &StarSystem) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let a = &sys.matrix;
    let mut rows = Vec::with_capacity(4 * a.rows());
    let mut factors = Vec::with_capacity(a.rows());
    for r in 0..a.rows() {
        let blocks: Vec<_> = (0..a.cols()).map(|c| multiplication_block(a.get(r, c))).collect();
        let mut f = BigInt::one();
        for b in &blocks {
            for row in b {
                for q in row {
                    f = f.lcm(q.denom());
                }
            }
        }
        for sub in 0..4 {
            let mut row = Vec::with_capacity(4 * a.cols());
            for b in &blocks {
                for q in &b[sub] {
                    row.push((q * &Q::from_integer(f.clone())).to_integer());
                }
            }
            rows.push(row);
        }
        factors.push(f);
    }
    (rows, factors)
}

fn reduce_rows(rows: &[Vec<BigInt>], m: Modulus) -> Vec<Vec<i64>> {
    let mm = BigInt::from(m.get());
    rows.iter()
        .map(|r| r.iter().map(|v| v.mod_floor(&mm).to_i64().expect("reduced below m")).collect())
        .collect()
}

/// Scales `a` to a primitive integral matrix and returns its coordinates.
fn primitive_integral(a: &FieldMatrix) -> Vec<BigInt> {
    let mut den = BigInt::one();
    for e in a.entries() {
        den = den.lcm(&e.denominator_lcm());
    }
    let mut coords: Vec<BigInt> = a
        .entries()
        .iter()
        .flat_map(|e| e.coords().iter().map(|q| (q * &Q::from_integer(den.clone())).to_integer()).collect::<Vec<_>>())
        .collect();
    let g = coords.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in &mut coords {
            *c = &*c / &g;
        }
    }
    coords
}

fn mod_matrix_from_coords(n: usize, coords: &[u64], m: Modulus) -> ModMatrix {
    let entries = coords.chunks(4).map(|c| ModElement { c: [c[0], c[1], c[2], c[3]], m }).collect();
    ModMatrix::from_entries(n, m, entries).expect("n² entries")
}

/// Whether the system has a solution `a` mod `m` (with `det a` a unit when
/// `require_invertible`; otherwise a nonzero solution, since `a = 0` always
/// solves).
///
/// Lifts of the rational solutions are tried first. Only when none of them
/// works is the full kernel module over `Z/m` computed and scanned.
pub fn solvable_mod(sys: &StarSystem, m: Modulus, require_invertible: bool) -> Result<ModSolvability> {
    let n = sys.n();
    let (int_rows, factors) = integer_system(sys);
    let rows = reduce_rows(&int_rows, m);
    let clearing_factors = factors.iter().map(|f| f.to_string()).collect();
    let mm = BigInt::from(m.get());

    let accept = |coords: &[u64]| -> bool {
        if modring::apply_mod(&rows, coords, m).iter().any(|&v| v != 0) {
            return false;
        }
        if require_invertible {
            mod_matrix_from_coords(n, coords, m).det().is_invertible()
        } else {
            coords.iter().any(|&c| c != 0)
        }
    };
    let done = |coords: Vec<u64>, how: &str, card: Option<u64>, factors: Vec<String>| ModSolvability {
        modulus: m,
        solvable: true,
        witness: Some(coords.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect()),
        found_by: Some(how.to_string()),
        clearing_factors: factors,
        kernel_cardinality: card,
    };

    let mut candidates = sys.solution_basis();
    candidates.push(FieldMatrix::identity(n));
    for cand in &candidates {
        let coords: Vec<u64> =
            primitive_integral(cand).iter().map(|c| c.mod_floor(&mm).to_u64().expect("reduced below m")).collect();
        if accept(&coords) {
            return Ok(done(coords, "rational_kernel", None, clearing_factors));
        }
    }

    let kernel = modring::solve_linear_mod(&rows, 4 * n * n, m)?;
    let card = kernel.cardinality_bound();
    if !require_invertible {
        let witness = kernel.generators.first().cloned();
        return Ok(match witness {
            Some(g) => done(g, "module_scan", card, clearing_factors),
            None => ModSolvability {
                modulus: m,
                solvable: false,
                witness: None,
                found_by: None,
                clearing_factors,
                kernel_cardinality: card,
            },
        });
    }
    match card {
        Some(c) if c <= MAX_KERNEL_SCAN => {}
        _ => {
            return Err(Error::Size(format!(
                "kernel module mod {m} has more than {MAX_KERNEL_SCAN} elements ({})",
                card.map_or("overflow".to_string(), |c| c.to_string())
            )))
        }
    }
    for v in kernel.elements(4 * n * n) {
        if accept(&v) {
            return Ok(done(v, "module_scan", card, clearing_factors));
        }
    }
    Ok(ModSolvability {
        modulus: m,
        solvable: false,
        witness: None,
        found_by: None,
        clearing_factors,
        kernel_cardinality: card,
    })
}

/// For block-diagonal `ā` with `det ā = 1`: whether `ā` preserves the
/// orientation of `X_{n−1} × R`. That holds for even `n`, and for odd `n`
/// exactly when the lower-right entry is positive.
pub fn orientation_preserving(a_bar: &FieldMatrix, spec: &LatticeSpec) -> Result<bool> {
    let n = spec.n();
    if a_bar.rows() != n || a_bar.cols() != n {
        return Err(Error::Shape(format!("expected {n}×{n}")));
    }
    if !a_bar.commutes_with(&u_sing(n)) {
        return Err(Error::Domain("matrix does not commute with u".into()));
    }
    if !a_bar.det()?.is_one() {
        return Err(Error::Domain("determinant is not 1".into()));
    }
    Ok(n.is_multiple_of(2) || Embedding::Plus.sign(a_bar.get(n - 1, n - 1)) == Ordering::Greater)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub stage: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl Stage {
    fn pass(stage: &str, witness: Option<Value>) -> Self {
        Stage { stage: stage.into(), status: "pass".into(), witness, reason: None }
    }

    fn fail(stage: &str, reason: String) -> Self {
        Stage { stage: stage.into(), status: "unresolved".into(), witness: None, reason: Some(reason) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignOutcome {
    SamePositive { a_bar: FieldMatrix, b_bar: FieldMatrix },
    Unresolved { stage: String, reason: String },
}

#[derive(Clone, Debug)]
pub struct SignCriterion {
    pub outcome: SignOutcome,
    pub stages: Vec<Stage>,
}

impl SignCriterion {
    pub fn is_same_positive(&self) -> bool {
        matches!(self.outcome, SignOutcome::SamePositive { .. })
    }

    pub fn to_json(&self) -> Value {
        let outcome = match &self.outcome {
            SignOutcome::SamePositive { a_bar, b_bar } => json!({
                "result": "same_positive",
                "a_bar": a_bar.to_json(),
                "b_bar": b_bar.to_json(),
            }),
            SignOutcome::Unresolved { stage, reason } => json!({
                "result": "unresolved",
                "stage": stage,
                "reason": reason,
            }),
        };
        json!({ "outcome": outcome, "stages": self.stages })
    }
}

/// Solves the system over `L`, normalises the solution to `det ā = 1` via
/// an `n`-th root of `det a`, sets `b̄ = ā⁻¹γ` and re-checks
/// `γ = ā·b̄`, `b̄t = tb̄`, `āu = uā`, `det ā = 1` and the orientation of `ā`.
/// The first stage that cannot be completed is reported as unresolved.
pub fn sign_criterion(
    gamma: &FieldMatrix,
    t: &TorusDirection,
    spec: &LatticeSpec,
    denom_bound: u64,
) -> Result<SignCriterion> {
    let n = spec.n();
    let mut stages = Vec::new();
    let unresolved = |mut stages: Vec<Stage>, stage: &str, reason: String| {
        stages.push(Stage::fail(stage, reason.clone()));
        SignCriterion { outcome: SignOutcome::Unresolved { stage: stage.into(), reason }, stages }
    };

    let sys = build_star_system(gamma, t)?;
    let basis = sys.solution_basis();
    if basis.len() != 1 {
        return Ok(unresolved(stages, "kernel dimension", format!("solution space has dimension {}", basis.len())));
    }
    let a = basis.into_iter().next().unwrap();
    stages.push(Stage::pass("kernel dimension", Some(json!({ "dimension": 1, "generator": a.to_json() }))));

    let det_a = a.det()?;
    if det_a.is_zero() {
        return Ok(unresolved(stages, "invertible generator", "generator is singular".into()));
    }
    stages.push(Stage::pass("invertible generator", Some(json!({ "det": det_a.to_string() }))));

    let Some(c) = qfield::is_mth_power(&det_a, n as u32, denom_bound)? else {
        return Ok(unresolved(
            stages,
            "nth root",
            format!("no c with c^{n} = {det_a} and denominators at most {denom_bound}"),
        ));
    };
    stages.push(Stage::pass("nth root", Some(json!({ "c": c.to_string() }))));

    let a_bar = a.scale(&c.inv()?);
    let b_bar = &a_bar.inverse()? * gamma;
    let checks: [(&str, bool); 4] = [
        ("gamma = a_bar b_bar", &(&a_bar * &b_bar) == gamma),
        ("b_bar t = t b_bar", b_bar.commutes_with(t.matrix())),
        ("a_bar u = u a_bar", a_bar.commutes_with(sys.u())),
        ("det a_bar = 1", a_bar.det()?.is_one()),
    ];
    for (name, ok) in checks {
        if !ok {
            return Ok(unresolved(stages, name, "exact check failed".into()));
        }
        stages.push(Stage::pass(name, None));
    }
    if !orientation_preserving(&a_bar, spec)? {
        return Ok(unresolved(
            stages,
            "orientation",
            format!("lower-right entry {} is negative", a_bar.get(n - 1, n - 1)),
        ));
    }
    stages.push(Stage::pass("orientation", Some(json!({ "z": a_bar.get(n - 1, n - 1).to_string() }))));
    Ok(SignCriterion { outcome: SignOutcome::SamePositive { a_bar, b_bar }, stages })
}

/// `π₁(H)·γ·π₁(T)`, given by a representative and generators of both sides.
#[derive(Clone, Debug)]
pub struct DoubleCoset {
    pub representative: LatticeElement,
    pub left: Vec<LatticeElement>,
    pub right: Vec<LatticeElement>,
}

impl DoubleCoset {
    pub fn new(representative: LatticeElement, left: Vec<LatticeElement>, right: Vec<LatticeElement>) -> Result<Self> {
        if !representative.is_certified() || left.iter().chain(&right).any(|g| !g.is_certified()) {
            return Err(Error::Domain("double coset data must be certified lattice elements".into()));
        }
        Ok(DoubleCoset { representative, left, right })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CosetMatch {
    /// `γ₂ = h·γ₁·t`, checked by exact multiplication.
    Yes { h: FieldMatrix, t: FieldMatrix },
    Unknown,
}

/// Every product of at most `len` generators and their inverses.
fn words(gens: &[LatticeElement], spec: &LatticeSpec, len: usize, budget: &mut u64) -> Result<Vec<FieldMatrix>> {
    let mut alphabet = Vec::with_capacity(2 * gens.len());
    for g in gens {
        alphabet.push(g.matrix().clone());
        alphabet.push(g.inverse(spec)?.into_matrix());
    }
    let id = FieldMatrix::identity(spec.n());
    let mut seen = HashSet::from([id.clone()]);
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([(id, 0usize)]);
    while let Some((w, depth)) = queue.pop_front() {
        if depth == len {
            continue;
        }
        for a in &alphabet {
            if *budget == 0 {
                return Err(Error::Size("word budget exhausted".into()));
            }
            *budget -= 1;
            let next = &w * a;
            if seen.insert(next.clone()) {
                out.push(next.clone());
                queue.push_back((next, depth + 1));
            }
        }
    }
    Ok(out)
}

/// Searches for `h` and `t` of word length at most `len` with
/// `γ₂ = h·γ₁·t`, using `d1`'s generators on both sides. Candidates
/// `h·γ₁` and `γ₂·t⁻¹` are matched through a hash map; a hit is only
/// reported after an exact multiplicative check.
pub fn same_double_coset(
    d1: &DoubleCoset,
    d2: &DoubleCoset,
    spec: &LatticeSpec,
    len: usize,
    budget: u64,
) -> Result<CosetMatch> {
    let mut budget = budget;
    let g1 = d1.representative.matrix();
    let g2 = d2.representative.matrix();
    let lefts = words(&d1.left, spec, len, &mut budget)?;
    let rights = words(&d1.right, spec, len, &mut budget)?;
    let mut table: HashMap<FieldMatrix, usize> = HashMap::with_capacity(lefts.len());
    for (i, h) in lefts.iter().enumerate() {
        table.entry(h * g1).or_insert(i);
    }
    for t in &rights {
        let t_inv = LatticeElement::certify(t.clone(), spec)?.inverse(spec)?.into_matrix();
        if let Some(&i) = table.get(&(g2 * &t_inv)) {
            let h = &lefts[i];
            if &(&(h * g1) * t) == g2 {
                return Ok(CosetMatch::Yes { h: h.clone(), t: t.clone() });
            }
        }
    }
    Ok(CosetMatch::Unknown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{a_generator, b_generator};
    use crate::qfield::{u0, u0_pow};

    fn spec3() -> LatticeSpec {
        LatticeSpec::new(3).unwrap()
    }

    fn diag_t() -> TorusDirection {
        TorusDirection::new(FieldMatrix::diag(&[
            FieldElement::from_int(1),
            FieldElement::from_int(2),
            FieldElement::from_int(3),
        ]))
        .unwrap()
    }

    fn md(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    /// `γ = a₀·b₀` with `a₀ = b_generator(I₂, 1)` and `b₀` the
    /// `k₀`-conjugate of `diag(u₀, u₀⁻¹, 1)`, which commutes with the
    /// default `t`.
    fn constructed_gamma() -> (FieldMatrix, FieldMatrix, FieldMatrix) {
        let s = spec3();
        let a0 = b_generator(&s, &LatticeElement::identity(&LatticeSpec::new(2).unwrap()), 1).unwrap().into_matrix();
        let k = k0();
        let b0 = &(&k * &FieldMatrix::diag(&[u0(), u0_pow(-1), FieldElement::one()])) * &k.transpose();
        (&a0 * &b0, a0, b0)
    }

    #[test]
    fn singular_vector_commutant() {
        for n in 3..=5 {
            let u = u_sing(n);
            let mut tr = FieldElement::zero();
            for i in 0..n {
                tr += u.get(i, i);
            }
            assert!(tr.is_zero());
            // {a : a·u = u·a} has dimension (n−1)² + 1
            let sys = build_star_system(&FieldMatrix::identity(n), &TorusDirection { t: FieldMatrix::zeros(n, n) })
                .unwrap();
            assert_eq!(solution_dimension(&sys), (n - 1) * (n - 1) + 1);
        }
    }

    #[test]
    fn characteristic_polynomial_of_diagonal() {
        let chi = characteristic_polynomial(diag_t().matrix()).unwrap();
        let expected: Vec<_> = [-6, 11, -6, 1].iter().map(|&v| FieldElement::from_int(v)).collect();
        assert_eq!(chi, expected);
        let rep = FieldMatrix::diag(&[FieldElement::one(), FieldElement::one(), FieldElement::from_int(3)]);
        assert!(matches!(TorusDirection::new(rep), Err(Error::InvalidInput(_))));
        assert!(TorusDirection::new(default_torus_direction().matrix().clone()).is_ok());
    }

    #[test]
    fn star_system_dimensions() {
        let id = FieldMatrix::identity(3);
        let sys = build_star_system(&id, &diag_t()).unwrap();
        assert_eq!(sys.matrix().rows(), 18);
        assert_eq!(solution_dimension(&sys), 3);
        for a in sys.solution_basis() {
            assert!(sys.is_solution(&a));
            assert!((0..3).all(|i| (0..3).all(|j| i == j || a.get(i, j).is_zero())));
        }
        let sys = build_star_system(&id, &default_torus_direction()).unwrap();
        let basis = sys.solution_basis();
        assert_eq!(basis.len(), 1);
        assert!(basis[0].is_identity());
    }

    #[test]
    fn kernel_is_equivariant() {
        let (_, a0, _) = constructed_gamma();
        let t = default_torus_direction();
        let base = build_star_system(&FieldMatrix::identity(3), &t).unwrap().solution_basis();
        let moved = build_star_system(&a0, &t).unwrap();
        assert_eq!(solution_dimension(&moved), base.len());
        for v in &base {
            assert!(moved.is_solution(&(&a0 * v)));
        }
    }

    #[test]
    fn sign_criterion_on_constructed_instance() {
        let (gamma, a0, b0) = constructed_gamma();
        let res = sign_criterion(&gamma, &default_torus_direction(), &spec3(), 100).unwrap();
        match &res.outcome {
            SignOutcome::SamePositive { a_bar, b_bar } => {
                assert_eq!(a_bar, &a0);
                assert_eq!(b_bar, &b0);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(res.stages.len(), 8);
    }

    #[test]
    fn sign_criterion_identity_and_degenerate() {
        let id = FieldMatrix::identity(3);
        let res = sign_criterion(&id, &default_torus_direction(), &spec3(), 10).unwrap();
        assert!(res.is_same_positive());
        let res = sign_criterion(&id, &diag_t(), &spec3(), 10).unwrap();
        match res.outcome {
            SignOutcome::Unresolved { stage, .. } => assert_eq!(stage, "kernel dimension"),
            other => panic!("unexpected {other:?}"),
        }
        let text = serde_json::to_string(&res.stages).unwrap();
        assert!(text.contains("\"reason\""));
    }

    #[test]
    fn orientation_examples() {
        let s = spec3();
        let m = |a: FieldElement, b: FieldElement, z: FieldElement| FieldMatrix::diag(&[a, b, z]);
        let a = m(u0_pow(-1), FieldElement::one(), u0());
        assert!(orientation_preserving(&a, &s).unwrap());
        let a = m(-u0_pow(-1), FieldElement::one(), -u0());
        assert!(!orientation_preserving(&a, &s).unwrap());
        let s4 = LatticeSpec::new(4).unwrap();
        let a = FieldMatrix::diag(&[-u0_pow(-1), FieldElement::one(), FieldElement::one(), -u0()]);
        assert!(orientation_preserving(&a, &s4).unwrap());
        assert!(matches!(orientation_preserving(&k0(), &s), Err(Error::Domain(_))));
    }

    #[test]
    fn mod_solvability() {
        let t = default_torus_direction();
        let sys = build_star_system(&FieldMatrix::identity(3), &t).unwrap();
        for m in [2, 3, 4] {
            let r = solvable_mod(&sys, md(m), true).unwrap();
            assert!(r.solvable, "m = {m}");
            assert_eq!(r.found_by.as_deref(), Some("rational_kernel"));
        }
        let (gamma, _, _) = constructed_gamma();
        let sys = build_star_system(&gamma, &t).unwrap();
        assert!(solvable_mod(&sys, md(4), true).unwrap().solvable);
    }

    #[test]
    fn mod_solvability_needs_scan() {
        // γ = P swaps the last two coordinates, so γtγ⁻¹ = diag(1,3,2) and
        // the solutions over L are the multiples of E₁₁.
        let p = FieldMatrix::from_int_rows(&[&[1, 0, 0], &[0, 0, 1], &[0, -1, 0]]);
        let sys = build_star_system(&p, &diag_t()).unwrap();
        assert_eq!(solution_dimension(&sys), 1);
        // Mod 3 the entries a₂₃, a₃₂ are free as well and
        // det = −a₁₁·a₂₃·a₃₂ can be a unit.
        let r = solvable_mod(&sys, md(3), true).unwrap();
        assert!(r.solvable);
        assert_eq!(r.found_by.as_deref(), Some("module_scan"));
        let w = r.witness.unwrap();
        let a = mod_matrix_from_coords(3, &w.concat(), md(3));
        assert!(a.det().is_invertible());
        // Mod 4 only a₁₁ and 2·a₂₁ survive, so every solution is singular.
        let r = solvable_mod(&sys, md(4), true).unwrap();
        assert!(!r.solvable);
        assert_eq!(r.kernel_cardinality, Some(4096));
        assert!(solvable_mod(&sys, md(4), false).unwrap().solvable);
    }

    #[test]
    fn double_cosets() {
        let s = spec3();
        let left = vec![b_generator(&s, &LatticeElement::identity(&LatticeSpec::new(2).unwrap()), 1).unwrap()];
        let right = vec![a_generator(&s, &[1, -1, 0]).unwrap()];
        let g1 = LatticeElement::identity(&s);
        let d1 = DoubleCoset::new(g1.clone(), left.clone(), right.clone()).unwrap();
        assert_eq!(
            same_double_coset(&d1, &d1, &s, 2, 10_000).unwrap(),
            CosetMatch::Yes { h: FieldMatrix::identity(3), t: FieldMatrix::identity(3) }
        );
        let g2 = left[0].mul(&g1, &s).unwrap();
        let d2 = DoubleCoset::new(g2, left.clone(), right.clone()).unwrap();
        assert!(matches!(same_double_coset(&d1, &d2, &s, 1, 10_000).unwrap(), CosetMatch::Yes { .. }));
        let p = LatticeElement::certify(FieldMatrix::from_int_rows(&[&[1, 0, 0], &[0, 0, 1], &[0, -1, 0]]), &s).unwrap();
        let d3 = DoubleCoset::new(p, left.clone(), right.clone()).unwrap();
        assert_eq!(same_double_coset(&d1, &d3, &s, 2, 10_000).unwrap(), CosetMatch::Unknown);
        assert!(matches!(same_double_coset(&d1, &d3, &s, 3, 5), Err(Error::Size(_))));
    }
}
