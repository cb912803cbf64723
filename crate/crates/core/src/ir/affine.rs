use std::collections::HashMap;

use crate::ir::IrError;
use crate::rational::{gcd_u128, Rational};

/// A row of an affine map: `(column, coefficient)` pairs with strictly
/// increasing columns and no zero coefficients.
pub type SparseRow = Vec<(usize, Rational)>;

/// `x ↦ W·x + b` over exact rationals.
///
/// Rows are stored sparsely; an absent entry is zero. The representation is
/// canonical, so two maps compare equal iff they are the same function.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineMap {
    cols: usize,
    rows: Vec<SparseRow>,
    bias: Vec<Rational>,
}

/// Sorts, merges duplicate columns and drops zeros.
pub fn normalize_row(mut row: SparseRow) -> SparseRow {
    row.sort_by_key(|(c, _)| *c);
    let mut out: SparseRow = Vec::with_capacity(row.len());
    for (c, v) in row {
        match out.last_mut() {
            Some((lc, lv)) if *lc == c => *lv += v,
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

/// Dot product of a sparse row with a dense vector.
pub fn dot(row: &[(usize, Rational)], x: &[Rational]) -> Rational {
    // Accumulate an unreduced i128 fraction and reduce once at the end.
    let (mut n, mut d) = (0i128, 1i128);
    for (i, (c, w)) in row.iter().enumerate() {
        let xv = &x[*c];
        if xv.is_zero() {
            continue;
        }
        let step = match (w.small_parts(), xv.small_parts()) {
            (Some((wn, wd)), Some((xn, xd))) => add_fraction(n, d, wn as i128 * xn as i128, wd as i128 * xd as i128),
            _ => None,
        };
        match step {
            Some((sn, sd)) => (n, d) = (sn, sd),
            None => return dot_slow(Rational::from_ratio_i128(n, d), &row[i..], x),
        }
    }
    Rational::from_ratio_i128(n, d)
}

fn add_fraction(n: i128, d: i128, tn: i128, td: i128) -> Option<(i128, i128)> {
    if td == d {
        return Some((n.checked_add(tn)?, d));
    }
    let g = if d & (d - 1) == 0 && td & (td - 1) == 0 {
        d.min(td)
    } else {
        gcd_u128(d as u128, td as u128) as i128
    };
    let (fd, ft) = (td / g, d / g);
    let l = d.checked_mul(fd)?;
    Some((n.checked_mul(fd)?.checked_add(tn.checked_mul(ft)?)?, l))
}

fn dot_slow(mut acc: Rational, row: &[(usize, Rational)], x: &[Rational]) -> Rational {
    for (c, w) in row {
        let xv = &x[*c];
        if !xv.is_zero() {
            acc += w * xv;
        }
    }
    acc
}

/// `λ·row`.
pub fn scale_row(row: &[(usize, Rational)], lambda: &Rational) -> SparseRow {
    if lambda.is_zero() {
        return Vec::new();
    }
    row.iter().map(|(c, v)| (*c, v * lambda)).collect()
}

/// `a + λ·b`.
pub fn axpy_row(a: &[(usize, Rational)], lambda: &Rational, b: &[(usize, Rational)]) -> SparseRow {
    let mut out: SparseRow = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j >= b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i >= a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, lambda * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + lambda * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out.retain(|(_, v)| !v.is_zero());
    out
}

impl AffineMap {
    /// Builds a map from sparse rows; rows are normalized.
    pub fn from_sparse(cols: usize, rows: Vec<SparseRow>, bias: Vec<Rational>) -> Result<Self, IrError> {
        if rows.len() != bias.len() {
            return Err(IrError::DimensionMismatch {
                context: "affine map bias length",
                expected: rows.len(),
                found: bias.len(),
            });
        }
        let rows: Vec<SparseRow> = rows.into_iter().map(normalize_row).collect();
        if let Some(bad) = rows.iter().flatten().find(|(c, _)| *c >= cols) {
            return Err(IrError::DimensionMismatch {
                context: "affine map column index",
                expected: cols,
                found: bad.0 + 1,
            });
        }
        Ok(AffineMap { cols, rows, bias })
    }

    /// Builds a map from a dense `rows × cols` matrix.
    pub fn from_dense(cols: usize, matrix: Vec<Vec<Rational>>, bias: Vec<Rational>) -> Result<Self, IrError> {
        let mut rows = Vec::with_capacity(matrix.len());
        for r in matrix {
            if r.len() != cols {
                return Err(IrError::DimensionMismatch {
                    context: "affine map row length",
                    expected: cols,
                    found: r.len(),
                });
            }
            rows.push(r.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect());
        }
        Self::from_sparse(cols, rows, bias)
    }

    /// Integer convenience constructor, mostly for tests and fixtures.
    pub fn from_ints(matrix: &[&[i64]], bias: &[i64]) -> Result<Self, IrError> {
        let cols = matrix.first().map_or(0, |r| r.len());
        let m = matrix
            .iter()
            .map(|r| r.iter().map(|&v| Rational::from(v)).collect())
            .collect();
        Self::from_dense(cols, m, bias.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            cols: n,
            rows: (0..n).map(|i| vec![(i, Rational::one())]).collect(),
            bias: vec![Rational::zero(); n],
        }
    }

    /// `x ↦ (x[indices[0]], x[indices[1]], …)`.
    pub fn selection(cols: usize, indices: &[usize]) -> Result<Self, IrError> {
        let rows = indices.iter().map(|&i| vec![(i, Rational::one())]).collect();
        Self::from_sparse(cols, rows, vec![Rational::zero(); indices.len()])
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        AffineMap {
            cols,
            rows: vec![Vec::new(); rows],
            bias: vec![Rational::zero(); rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[(usize, Rational)] {
        &self.rows[i]
    }

    pub fn sparse_rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn bias(&self) -> &[Rational] {
        &self.bias
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        match self.rows[r].binary_search_by_key(&c, |(k, _)| *k) {
            Ok(i) => self.rows[r][i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![Rational::zero(); self.cols];
                for (c, v) in r {
                    d[*c] = v.clone();
                }
                d
            })
            .collect()
    }

    pub fn into_parts(self) -> (usize, Vec<SparseRow>, Vec<Rational>) {
        (self.cols, self.rows, self.bias)
    }

    /// `W·x + b`.
    pub fn apply(&self, x: &[Rational]) -> Result<Vec<Rational>, IrError> {
        if x.len() != self.cols {
            return Err(IrError::DimensionMismatch {
                context: "affine map input",
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .zip(&self.bias)
            .map(|(r, b)| dot(r, x) + b)
            .collect()
    }

    pub fn apply_row(&self, i: usize, x: &[Rational]) -> Rational {
        dot(&self.rows[i], x) + &self.bias[i]
    }

    /// `outer ∘ self`: first `self`, then `outer`.
    pub fn then(&self, outer: &AffineMap) -> Result<AffineMap, IrError> {
        if outer.cols != self.rows() {
            return Err(IrError::DimensionMismatch {
                context: "affine composition",
                expected: outer.cols,
                found: self.rows(),
            });
        }
        let mut rows = Vec::with_capacity(outer.rows());
        let mut bias = Vec::with_capacity(outer.rows());
        for (orow, ob) in outer.rows.iter().zip(&outer.bias) {
            let mut acc: HashMap<usize, Rational> = HashMap::new();
            let mut b = ob.clone();
            for (k, w) in orow {
                for (c, v) in &self.rows[*k] {
                    *acc.entry(*c).or_insert_with(Rational::zero) += w * v;
                }
                if !self.bias[*k].is_zero() {
                    b += w * &self.bias[*k];
                }
            }
            rows.push(acc.into_iter().collect());
            bias.push(b);
        }
        Self::from_sparse(self.cols, rows, bias)
    }

    /// `λ·(W·x + b)`.
    pub fn scaled(&self, lambda: &Rational) -> AffineMap {
        AffineMap {
            cols: self.cols,
            rows: self.rows.iter().map(|r| scale_row(r, lambda)).collect(),
            bias: self.bias.iter().map(|b| b * lambda).collect(),
        }
    }

    /// Rows of `self` followed by rows of `other`; both read the same input.
    pub fn stack(&self, other: &AffineMap) -> Result<AffineMap, IrError> {
        if self.cols != other.cols {
            return Err(IrError::DimensionMismatch {
                context: "affine stack",
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut out = self.clone();
        out.rows.extend(other.rows.iter().cloned());
        out.bias.extend(other.bias.iter().cloned());
        Ok(out)
    }

    /// Block-diagonal map acting on the concatenated inputs.
    pub fn block_diag(maps: &[&AffineMap]) -> AffineMap {
        let cols = maps.iter().map(|m| m.cols).sum();
        let mut rows = Vec::new();
        let mut bias = Vec::new();
        let mut offset = 0;
        for m in maps {
            for (r, b) in m.rows.iter().zip(&m.bias) {
                rows.push(r.iter().map(|(c, v)| (c + offset, v.clone())).collect());
                bias.push(b.clone());
            }
            offset += m.cols;
        }
        AffineMap { cols, rows, bias }
    }

    /// Keeps only the listed rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> AffineMap {
        AffineMap {
            cols: self.cols,
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
            bias: keep.iter().map(|&i| self.bias[i].clone()).collect(),
        }
    }

    /// Iterator over every stored weight and bias.
    pub fn coefficients(&self) -> impl Iterator<Item = &Rational> {
        self.rows.iter().flat_map(|r| r.iter().map(|(_, v)| v)).chain(self.bias.iter())
    }
}
