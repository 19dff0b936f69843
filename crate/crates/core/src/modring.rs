//! The finite rings `R_m = Z[x]/(x⁴ − 2, m)`.
//!
//! Congruence levels are rational-integer moduli `m` (typically `pᵏ`):
//! `O_L/(m)` surjects onto every `O_L/𝔭ᵏ` with `𝔭 | m`, so an obstruction at
//! a prime-ideal level shows up at a suitable rational level.

use std::collections::BTreeSet;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qfield::FieldElement;
use crate::{Error, Result};

/// Largest modulus for which squares are enumerated exhaustively.
pub const MAX_SQUARE_MODULUS: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl Modulus {
    pub fn new(m: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Domain(format!("modulus must be at least 2, got {m}")));
        }
        if m > u32::MAX as u64 {
            return Err(Error::Domain(format!("modulus {m} too large")));
        }
        Ok(Modulus(m))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    fn reduce_int(self, v: &BigInt) -> u64 {
        v.mod_floor(&BigInt::from(self.0)).to_u64().expect("residue fits")
    }

    fn reduce_i128(self, v: i128) -> u64 {
        v.rem_euclid(self.0 as i128) as u64
    }
}

impl TryFrom<u64> for Modulus {
    type Error = Error;
    fn try_from(m: u64) -> Result<Self> {
        Modulus::new(m)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `c0 + c1·x + c2·x² + c3·x³` with `cᵢ ∈ [0, m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModElement {
    pub c: [u64; 4],
    pub m: Modulus,
}

impl ModElement {
    pub fn new(c: [i64; 4], m: Modulus) -> Self {
        ModElement { c: c.map(|v| m.reduce_i128(v as i128)), m }
    }

    pub fn zero(m: Modulus) -> Self {
        ModElement { c: [0; 4], m }
    }

    pub fn one(m: Modulus) -> Self {
        ModElement::new([1, 0, 0, 0], m)
    }

    pub fn minus_one(m: Modulus) -> Self {
        ModElement::new([-1, 0, 0, 0], m)
    }

    pub fn is_zero(&self) -> bool {
        self.c == [0; 4]
    }

    /// Image of `τ: x ↦ −x`.
    pub fn tau(&self) -> Self {
        ModElement::new([self.c[0] as i64, -(self.c[1] as i64), self.c[2] as i64, -(self.c[3] as i64)], self.m)
    }

    /// Canonical lift to `Z[x]` with coordinates in `[0, m)`.
    pub fn lift(&self) -> FieldElement {
        FieldElement::from_ints(self.c.map(|v| v as i64))
    }

    /// Matrix of multiplication by `self` on the basis `1, x, x², x³`;
    /// column `j` holds the coordinates of `self·xʲ`.
    pub fn multiplication_matrix(&self) -> [[u64; 4]; 4] {
        let mut out = [[0u64; 4]; 4];
        let mut col = *self;
        let x = ModElement::new([0, 1, 0, 0], self.m);
        for j in 0..4 {
            for i in 0..4 {
                out[i][j] = col.c[i];
            }
            col = col * x;
        }
        out
    }

    /// Invertibility in `R_m`: multiplication by `self` must be a bijection
    /// of `(Z/m)⁴`, i.e. its determinant is a unit mod `m`.
    pub fn is_invertible(&self) -> bool {
        let mm = self.multiplication_matrix();
        let rows: Vec<Vec<BigInt>> = mm.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
        let det = int_det(&rows);
        det.mod_floor(&BigInt::from(self.m.0)).gcd(&BigInt::from(self.m.0)) == BigInt::from(1)
    }
}

impl fmt::Display for ModElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} (mod {})", self.c[0], self.c[1], self.c[2], self.c[3], self.m)
    }
}

impl Add for ModElement {
    type Output = ModElement;
    fn add(self, rhs: ModElement) -> ModElement {
        assert_eq!(self.m, rhs.m, "modulus mismatch");
        let m = self.m.0;
        ModElement { c: [0, 1, 2, 3].map(|i| (self.c[i] + rhs.c[i]) % m), m: self.m }
    }
}

impl Neg for ModElement {
    type Output = ModElement;
    fn neg(self) -> ModElement {
        let m = self.m.0;
        ModElement { c: self.c.map(|v| (m - v) % m), m: self.m }
    }
}

impl Sub for ModElement {
    type Output = ModElement;
    fn sub(self, rhs: ModElement) -> ModElement {
        self + (-rhs)
    }
}

impl Mul for ModElement {
    type Output = ModElement;
    fn mul(self, rhs: ModElement) -> ModElement {
        assert_eq!(self.m, rhs.m, "modulus mismatch");
        let m = self.m.0 as u128;
        let mut p = [0u128; 7];
        for i in 0..4 {
            for j in 0..4 {
                p[i + j] = (p[i + j] + self.c[i] as u128 * rhs.c[j] as u128) % m;
            }
        }
        let c = [(p[0] + 2 * p[4]) % m, (p[1] + 2 * p[5]) % m, (p[2] + 2 * p[6]) % m, p[3]];
        ModElement { c: c.map(|v| v as u64), m: self.m }
    }
}

/// Coordinate-wise reduction `Z[x] → R_m`.
pub fn reduce(r: &FieldElement, m: Modulus) -> Result<ModElement> {
    let coords = r.integer_coords().ok_or_else(|| Error::Domain(format!("{r} is not integral")))?;
    Ok(ModElement { c: coords.each_ref().map(|v| m.reduce_int(v)), m })
}

/// Every element of `R_m`, in lexicographic coordinate order.
pub fn all_elements(m: Modulus) -> impl Iterator<Item = ModElement> {
    let mv = m.0;
    (0..mv.pow(4)).map(move |idx| {
        let c = [idx / (mv * mv * mv), (idx / (mv * mv)) % mv, (idx / mv) % mv, idx % mv];
        ModElement { c, m }
    })
}

/// The set `{ e² : e ∈ R_m }`, by exhaustive enumeration of all `m⁴`
/// elements.
pub fn all_squares(m: Modulus) -> Result<BTreeSet<ModElement>> {
    if m.0 > MAX_SQUARE_MODULUS {
        return Err(Error::Size(format!(
            "exhaustive square enumeration needs m ≤ {MAX_SQUARE_MODULUS}, got {m}"
        )));
    }
    let mv = m.0;
    let squares = (0..mv)
        .into_par_iter()
        .map(|c0| {
            let mut part = BTreeSet::new();
            for rest in 0..mv * mv * mv {
                let e = ModElement { c: [c0, rest / (mv * mv), (rest / mv) % mv, rest % mv], m };
                part.insert(e * e);
            }
            part
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    Ok(squares)
}

pub fn is_square(e: &ModElement) -> Result<bool> {
    Ok(all_squares(e.m)?.contains(e))
}

/// Whether `−1` is missing from `{ uᵏ mod m : k ∈ Z }`.
///
/// The orbit of an invertible element is a finite cyclic group, so walking
/// `u, u², …` until it returns to `1` covers negative exponents too.
pub fn no_power_hits_minus_one(u: &FieldElement, m: Modulus) -> Result<bool> {
    let e = reduce(u, m)?;
    if !e.is_invertible() {
        return Err(Error::Domain(format!("{u} is not invertible mod {m}")));
    }
    Ok(!power_orbit(&e).contains(&ModElement::minus_one(m)))
}

/// `[1, e, e², …]` up to (excluding) the first return to `1`.
pub fn power_orbit(e: &ModElement) -> Vec<ModElement> {
    let one = ModElement::one(e.m);
    let mut orbit = vec![one];
    let mut cur = *e;
    while cur != one {
        orbit.push(cur);
        cur = cur * *e;
    }
    orbit
}

/// Square matrix over `R_m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModMatrix {
    n: usize,
    m: Modulus,
    data: Vec<ModElement>,
}

impl ModMatrix {
    pub fn identity(n: usize, m: Modulus) -> Self {
        let mut data = vec![ModElement::zero(m); n * n];
        for i in 0..n {
            data[i * n + i] = ModElement::one(m);
        }
        ModMatrix { n, m, data }
    }

    pub fn from_entries(n: usize, m: Modulus, data: Vec<ModElement>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if data.iter().any(|e| e.m != m) {
            return Err(Error::Domain("entries with mixed moduli".into()));
        }
        Ok(ModMatrix { n, m, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> ModElement {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[ModElement] {
        &self.data
    }

    pub fn mul(&self, rhs: &ModMatrix) -> ModMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let mut data = vec![ModElement::zero(self.m); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] = data[i * n + j] + a * rhs.get(k, j);
                }
            }
        }
        ModMatrix { n, m: self.m, data }
    }

    /// Division-free cofactor expansion; `R_m` is not a domain.
    pub fn det(&self) -> ModElement {
        fn minor_det(mat: &ModMatrix, rows: &[usize], cols: &[usize]) -> ModElement {
            if rows.len() == 1 {
                return mat.get(rows[0], cols[0]);
            }
            let mut acc = ModElement::zero(mat.m);
            for (idx, &c) in cols.iter().enumerate() {
                let a = mat.get(rows[0], c);
                if a.is_zero() {
                    continue;
                }
                let rest: Vec<usize> = cols.iter().copied().filter(|&cc| cc != c).collect();
                let term = a * minor_det(mat, &rows[1..], &rest);
                acc = if idx % 2 == 0 { acc + term } else { acc - term };
            }
            acc
        }
        if self.n == 0 {
            return ModElement::one(self.m);
        }
        let idx: Vec<usize> = (0..self.n).collect();
        minor_det(self, &idx, &idx)
    }

    pub fn is_identity(&self) -> bool {
        *self == ModMatrix::identity(self.n, self.m)
    }
}

/// Integer determinant by Bareiss elimination.
fn int_det(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    let mut a = rows.to_vec();
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[k][k] * &a[i][j] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        return BigInt::from(1);
    }
    &a[n - 1][n - 1] * sign
}

/// Generators of `{ v ∈ (Z/m)ᶜ : A·v = 0 }` with their additive orders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModKernel {
    pub modulus: Modulus,
    pub generators: Vec<Vec<u64>>,
    pub orders: Vec<u64>,
}

impl ModKernel {
    /// Upper bound on the number of elements (the product of the orders).
    pub fn cardinality_bound(&self) -> Option<u64> {
        self.orders.iter().try_fold(1u64, |acc, &o| acc.checked_mul(o))
    }

    pub fn is_trivial(&self) -> bool {
        self.generators.is_empty()
    }

    /// Every combination `Σ cᵢ·gᵢ` with `0 ≤ cᵢ < ordᵢ`, in mixed-radix
    /// order (the zero vector first).
    pub fn elements(&self, len: usize) -> impl Iterator<Item = Vec<u64>> + '_ {
        let total = self.cardinality_bound().unwrap_or(u64::MAX);
        let m = self.modulus.get();
        (0..total).map(move |mut idx| {
            let mut v = vec![0u64; len];
            for (g, &ord) in self.generators.iter().zip(&self.orders) {
                let coef = idx % ord;
                idx /= ord;
                if coef != 0 {
                    for (vi, gi) in v.iter_mut().zip(g) {
                        *vi = ((*vi as u128 + coef as u128 * *gi as u128) % m as u128) as u64;
                    }
                }
            }
            v
        })
    }
}

/// Kernel of `A` over `Z/m`.
///
/// `A` is lifted to `Z` and brought to diagonal form `U·A·V = D` by
/// unimodular row and column operations (Euclidean steps on
/// representatives, reduced mod `m` as they go). Then `A·v = 0` iff
/// `dᵢ·(V⁻¹v)ᵢ = 0`, so the kernel is generated by `(m/gᵢ)·V[:, i]` of
/// order `gᵢ = gcd(dᵢ, m)`.
pub fn solve_linear_mod(a: &[Vec<i64>], cols: usize, m: Modulus) -> Result<ModKernel> {
    let mm = m.get() as i128;
    let rows = a.len();
    let mut w: Vec<Vec<i128>> = Vec::with_capacity(rows);
    for row in a {
        if row.len() != cols {
            return Err(Error::Shape(format!("row of length {} in a {cols}-column system", row.len())));
        }
        w.push(row.iter().map(|&v| (v as i128).rem_euclid(mm)).collect());
    }
    let mut v: Vec<Vec<i128>> = (0..cols).map(|i| (0..cols).map(|j| i128::from(i == j)).collect()).collect();
    let col_op = |w: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, dst: usize, src: usize, q: i128| {
        // column dst -= q · column src
        for row in w.iter_mut() {
            row[dst] = (row[dst] - q * row[src]).rem_euclid(mm);
        }
        for row in v.iter_mut() {
            row[dst] = (row[dst] - q * row[src]).rem_euclid(mm);
        }
    };
    let swap_cols = |w: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, a: usize, b: usize| {
        for row in w.iter_mut() {
            row.swap(a, b);
        }
        for row in v.iter_mut() {
            row.swap(a, b);
        }
    };

    let mut diag = vec![0i128; cols];
    let mut t = 0;
    while t < rows.min(cols) {
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| w[i][j] != 0)
            .min_by_key(|&(i, j)| w[i][j]);
        let Some((pi, pj)) = pivot else { break };
        w.swap(t, pi);
        swap_cols(&mut w, &mut v, t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if w[i][t] != 0 {
                    let q = w[i][t] / w[t][t];
                    for j in t..cols {
                        w[i][j] = (w[i][j] - q * w[t][j]).rem_euclid(mm);
                    }
                    if w[i][t] != 0 {
                        w.swap(t, i);
                        clean = false;
                    }
                }
            }
            for j in t + 1..cols {
                if w[t][j] != 0 {
                    let q = w[t][j] / w[t][t];
                    col_op(&mut w, &mut v, j, t, q);
                    if w[t][j] != 0 {
                        swap_cols(&mut w, &mut v, t, j);
                        clean = false;
                    }
                }
            }
            if clean {
                break;
            }
        }
        diag[t] = w[t][t];
        t += 1;
    }

    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for (i, &d) in diag.iter().enumerate() {
        let g = d.gcd(&mm);
        if g == 1 {
            continue;
        }
        let scale = mm / g;
        generators.push((0..cols).map(|r| (scale * v[r][i]).rem_euclid(mm) as u64).collect());
        orders.push(g as u64);
    }
    Ok(ModKernel { modulus: m, generators, orders })
}

/// `A·v mod m`.
pub fn apply_mod(a: &[Vec<i64>], v: &[u64], m: Modulus) -> Vec<u64> {
    let mm = m.get() as i128;
    a.iter()
        .map(|row| {
            row.iter().zip(v).fold(0i128, |acc, (&x, &y)| (acc + (x as i128) * (y as i128)).rem_euclid(mm)) as u64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfield::u0;

    fn md(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    #[test]
    fn modulus_guard() {
        assert!(Modulus::new(1).is_err());
        assert!(Modulus::new(0).is_err());
        assert_eq!(md(4).get(), 4);
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(reduce(&u0(), md(4)).unwrap().c, [3, 2, 2, 2]);
        assert_eq!(reduce(&(&u0() * &u0()), md(4)).unwrap(), ModElement::one(md(4)));
        assert_eq!(reduce(&FieldElement::from_int(-1), md(4)).unwrap().c, [3, 0, 0, 0]);
        let half: FieldElement = "1/2 0 0 0".parse().unwrap();
        assert!(matches!(reduce(&half, md(4)), Err(Error::Domain(_))));
    }

    #[test]
    fn lift_round_trip() {
        for e in all_elements(md(3)) {
            assert_eq!(reduce(&e.lift(), md(3)).unwrap(), e);
        }
    }

    #[test]
    fn squares_mod_four() {
        let m = md(4);
        let sq = all_squares(m).unwrap();
        assert!(!sq.contains(&ModElement::minus_one(m)));
        assert!(!sq.contains(&ModElement::new([2, 0, 1, 0], m)));
        assert!(!sq.contains(&ModElement::new([-2, 0, -1, 0], m)));
        assert!(sq.contains(&ModElement::new([1, 2, 1, 0], m)));
        assert!(is_square(&ModElement::one(m)).unwrap());
        assert!(!is_square(&ModElement::new([3, 0, 0, 0], m)).unwrap());
        assert!(matches!(all_squares(md(65)), Err(Error::Size(_))));
    }

    #[test]
    fn squares_are_tau_stable() {
        for m in [2, 3, 4, 8] {
            let sq = all_squares(md(m)).unwrap();
            assert!(sq.iter().all(|e| sq.contains(&e.tau())), "m = {m}");
        }
    }

    #[test]
    fn power_orbits() {
        assert!(no_power_hits_minus_one(&u0(), md(4)).unwrap());
        assert!(!no_power_hits_minus_one(&FieldElement::from_int(-1), md(4)).unwrap());
        assert!(no_power_hits_minus_one(&FieldElement::one(), md(4)).unwrap());
        assert!(matches!(no_power_hits_minus_one(&FieldElement::from_int(2), md(4)), Err(Error::Domain(_))));
        assert_eq!(power_orbit(&reduce(&u0(), md(4)).unwrap()).len(), 2);
    }

    #[test]
    fn invertibility() {
        let m = md(4);
        assert!(ModElement::one(m).is_invertible());
        assert!(!ModElement::new([2, 0, 0, 0], m).is_invertible());
        // x is not invertible mod 2 since x⁴ = 2 ≡ 0
        assert!(!ModElement::new([0, 1, 0, 0], md(2)).is_invertible());
        assert!(ModElement::new([0, 1, 0, 0], md(3)).is_invertible());
    }

    #[test]
    fn kernel_identity_and_diagonal() {
        let id = vec![vec![1, 0], vec![0, 1]];
        assert!(solve_linear_mod(&id, 2, md(4)).unwrap().is_trivial());
        let two = vec![vec![2, 0], vec![0, 2]];
        let k = solve_linear_mod(&two, 2, md(4)).unwrap();
        assert_eq!(k.orders, vec![2, 2]);
        let mut gens = k.generators.clone();
        gens.sort();
        assert_eq!(gens, vec![vec![0, 2], vec![2, 0]]);
    }

    #[test]
    fn kernel_of_wide_system() {
        // x + y + z = 0 mod 5: free module of rank 2
        let k = solve_linear_mod(&[vec![1, 1, 1]], 3, md(5)).unwrap();
        assert_eq!(k.orders, vec![5, 5]);
        assert_eq!(k.elements(3).count(), 25);
        for v in k.elements(3) {
            assert_eq!(apply_mod(&[vec![1, 1, 1]], &v, md(5)), vec![0]);
        }
    }

    #[test]
    fn mod_matrix_det() {
        let m = md(4);
        let u = reduce(&u0(), m).unwrap();
        let ui = reduce(&u0().tau(), m).unwrap();
        let one = ModElement::one(m);
        let z = ModElement::zero(m);
        let d = ModMatrix::from_entries(3, m, vec![u, z, z, z, ui, z, z, z, one]).unwrap();
        assert_eq!(d.det(), one);
        assert!(ModMatrix::identity(3, m).is_identity());
    }
}
