//! Dense exact matrices over `L = Q[⁴√2]`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::qfield::FieldElement;
use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FieldMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

impl FieldMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FieldMatrix { rows, cols, data: vec![FieldElement::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::one());
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<FieldElement>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{rows}×{cols} matrix needs {} entries, got {}", rows * cols, data.len())));
        }
        Ok(FieldMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(FieldMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// Integer matrix shorthand.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| FieldElement::from_int(v)).collect()).collect())
            .expect("rectangular literal")
    }

    pub fn diag(entries: &[FieldElement]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    /// Column vector.
    pub fn column(entries: Vec<FieldElement>) -> Self {
        FieldMatrix { rows: entries.len(), cols: 1, data: entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: FieldElement) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[FieldElement] {
        &self.data
    }

    pub fn row_vecs(&self) -> Vec<Vec<FieldElement>> {
        self.data.chunks(self.cols.max(1)).map(<[_]>::to_vec).collect()
    }

    pub fn map(&self, f: impl Fn(&FieldElement) -> FieldElement) -> Self {
        FieldMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Entry-wise `τ`.
    pub fn tau(&self) -> Self {
        self.map(FieldElement::tau)
    }

    pub fn scale(&self, s: &FieldElement) -> Self {
        self.map(|e| e * s)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(FieldElement::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(FieldElement::is_integral)
    }

    pub fn is_rational(&self) -> bool {
        self.data.iter().all(FieldElement::is_rational)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn commutes_with(&self, other: &FieldMatrix) -> bool {
        (self * other) == (other * self)
    }

    /// Row-major flattening into a column vector.
    pub fn flatten(&self) -> FieldMatrix {
        FieldMatrix::column(self.data.clone())
    }

    /// Inverse of [`FieldMatrix::flatten`].
    pub fn reshape(v: &FieldMatrix, rows: usize, cols: usize) -> Result<Self> {
        Self::from_vec(rows, cols, v.data.clone())
    }

    pub fn try_mul(&self, rhs: &FieldMatrix) -> Result<FieldMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}×{} by {}×{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::Shape(format!("expected a square matrix, got {}×{}", self.rows, self.cols)))
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<FieldElement> {
        self.require_square()?;
        let n = self.rows;
        if n == 0 {
            return Ok(FieldElement::one());
        }
        let mut a = self.row_vecs();
        let mut negate = false;
        let mut prev = FieldElement::one();
        for k in 0..n {
            let pivot = (k..n).filter(|&i| !a[i][k].is_zero()).min_by_key(|&i| a[i][k].height());
            let Some(p) = pivot else { return Ok(FieldElement::zero()) };
            if p != k {
                a.swap(p, k);
                negate = !negate;
            }
            let prev_inv = prev.inv()?;
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &(&a[k][k] * &a[i][j]) - &(&a[i][k] * &a[k][j]);
                    a[i][j] = &v * &prev_inv;
                }
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        Ok(if negate { -d } else { d })
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (FieldMatrix, Vec<usize>) {
        let mut a = self.row_vecs();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let pivot = (r..self.rows).filter(|&i| !a[i][c].is_zero()).min_by_key(|&i| a[i][c].height());
            let Some(p) = pivot else { continue };
            a.swap(r, p);
            let inv = a[r][c].inv().expect("nonzero pivot");
            for j in c..self.cols {
                a[r][j] = &a[r][j] * &inv;
            }
            for i in 0..self.rows {
                if i == r || a[i][c].is_zero() {
                    continue;
                }
                let f = a[i][c].clone();
                for j in c..self.cols {
                    if !a[r][j].is_zero() {
                        let v = &a[i][j] - &(&f * &a[r][j]);
                        a[i][j] = v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        let m = FieldMatrix::from_rows(a).unwrap_or_else(|_| FieldMatrix::zeros(self.rows, self.cols));
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, one column vector per free column of
    /// the reduced echelon form. The output is canonical.
    pub fn kernel(&self) -> Vec<FieldMatrix> {
        let (r, pivots) = self.rref();
        let mut basis = Vec::new();
        for free in (0..self.cols).filter(|c| !pivots.contains(c)) {
            let mut v = vec![FieldElement::zero(); self.cols];
            v[free] = FieldElement::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free);
            }
            basis.push(FieldMatrix::column(v));
        }
        basis
    }

    /// Gauss–Jordan inverse.
    pub fn inverse(&self) -> Result<FieldMatrix> {
        self.require_square()?;
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, FieldElement::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular);
        }
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, r.get(i, n + j).clone());
            }
        }
        Ok(out)
    }

    /// Matrix of `f64` images under an embedding.
    pub fn embed(&self, emb: crate::qfield::Embedding) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| emb.eval(self.get(i, j)))
    }

    /// Block-diagonal sum.
    pub fn block_diag(a: &FieldMatrix, b: &FieldMatrix) -> FieldMatrix {
        let mut out = Self::zeros(a.rows + b.rows, a.cols + b.cols);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.set(i, j, a.get(i, j).clone());
            }
        }
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(a.rows + i, a.cols + j, b.get(i, j).clone());
            }
        }
        out
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            n: self.rows,
            entries: self.row_vecs().into_iter().map(|r| r.iter().map(ToString::to_string).collect()).collect(),
        }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        if j.entries.len() != j.n || j.entries.iter().any(|r| r.len() != j.n) {
            return Err(Error::Parse(format!("matrix JSON must hold {0} rows of {0} entries", j.n)));
        }
        let rows = j
            .entries
            .iter()
            .map(|r| r.iter().map(|s| s.parse()).collect::<Result<Vec<FieldElement>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

/// `{"n": int, "entries": [["p0/q0 p1/q1 p2/q2 p3/q3", ...], ...]}`,
/// row-major, one field-element string per entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<String>>,
}

impl Serialize for FieldMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        FieldMatrix::from_json(&j).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for FieldMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.row_vecs() {
            let cells: Vec<String> = row.iter().map(|e| format!("[{e}]")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl<'a> Mul<&'a FieldMatrix> for &'a FieldMatrix {
    type Output = FieldMatrix;
    fn mul(self, rhs: &FieldMatrix) -> FieldMatrix {
        self.try_mul(rhs).expect("matrix shapes must agree")
    }
}

impl<'a> Add<&'a FieldMatrix> for &'a FieldMatrix {
    type Output = FieldMatrix;
    fn add(self, rhs: &FieldMatrix) -> FieldMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        FieldMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl<'a> Sub<&'a FieldMatrix> for &'a FieldMatrix {
    type Output = FieldMatrix;
    fn sub(self, rhs: &FieldMatrix) -> FieldMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        FieldMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Neg for &FieldMatrix {
    type Output = FieldMatrix;
    fn neg(self) -> FieldMatrix {
        self.map(|e| -e)
    }
}
