//! Lower-triangular CSR storage and right-hand sides.
//!
//! [`LowerCsr`] keeps, for every row, the off-diagonal entries in strictly
//! increasing column order followed by the diagonal entry, which must be
//! nonzero. That layout is what the level scheduler, the rewriting engine and
//! the solvers rely on.

use crate::error::{Error, Result};

/// One coordinate-format entry, 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooEntry {
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

/// How [`extract_lower`] treats rows with a missing or zero diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiagPolicy {
    /// Fail with [`Error::ZeroDiagonal`] naming the offending row.
    #[default]
    RequireNonzero,
    /// Insert 1.0 where the diagonal is structurally or numerically zero.
    SubstituteOne,
}

/// Sparse lower-triangular matrix in CSR layout with a dense nonzero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerCsr {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
}

impl LowerCsr {
    /// Builds from per-row sorted entries. Callers must uphold the layout
    /// invariants; [`validate`](Self::validate) checks them.
    pub(crate) fn from_parts(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        vals: Vec<f64>,
    ) -> Self {
        LowerCsr {
            n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[f64] {
        &self.vals
    }

    /// Number of stored entries in row `i`, diagonal included.
    pub fn row_nnz(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    /// Column indices and values of row `i`, diagonal last.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    /// Diagonal value of row `i`.
    pub fn diag(&self, i: usize) -> f64 {
        self.vals[self.row_ptr[i + 1] - 1]
    }

    /// Off-diagonal column indices and values of row `i`.
    pub fn off_diag(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1] - 1;
        (&self.col_idx[lo..hi], &self.vals[lo..hi])
    }

    /// Checks every structural invariant of the layout.
    pub fn validate(&self) -> Result<()> {
        if self.row_ptr.len() != self.n + 1 || self.row_ptr[0] != 0 {
            return Err(Error::Internal("row_ptr shape".into()));
        }
        if self.row_ptr[self.n] != self.vals.len() || self.col_idx.len() != self.vals.len() {
            return Err(Error::Internal("row_ptr does not cover storage".into()));
        }
        for i in 0..self.n {
            if self.row_ptr[i + 1] <= self.row_ptr[i] {
                return Err(Error::Internal(format!("row {i} is empty")));
            }
            let (cols, vals) = self.row(i);
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Internal(format!("row {i} columns not increasing")));
                }
            }
            let last = *cols.last().unwrap();
            if last != i {
                return Err(Error::Internal(format!("row {i} missing diagonal")));
            }
            if vals[vals.len() - 1] == 0.0 {
                return Err(Error::ZeroDiagonal { row: i });
            }
            for (&c, &v) in cols.iter().zip(vals) {
                if c > i {
                    return Err(Error::Internal(format!("row {i} has upper entry {c}")));
                }
                if c != i && v == 0.0 {
                    return Err(Error::Internal(format!("row {i} stores zero at {c}")));
                }
            }
        }
        Ok(())
    }

    /// Dense infinity-norm residual `‖L·x − b‖∞`.
    pub fn residual_inf(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (i, bi) in b.iter().enumerate().take(self.n) {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            worst = worst.max((acc - bi).abs());
        }
        worst
    }
}

/// Dense right-hand side vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    values: Vec<f64>,
}

impl Rhs {
    pub fn new(values: Vec<f64>) -> Self {
        Rhs { values }
    }

    /// Parses one decimal value per line; the count must equal `n`.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut values = Vec::with_capacity(n);
        for (idx, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("invalid value {t:?}"),
            })?;
            values.push(v);
        }
        if values.len() != n {
            return Err(Error::RhsLength {
                got: values.len(),
                expected: n,
            });
        }
        Ok(Rhs { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl std::ops::Index<usize> for Rhs {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Filters coordinate entries down to the lower triangle (diagonal included),
/// sums duplicates and builds the CSR system.
///
/// Off-diagonal entries that sum to exactly 0.0 are dropped so that stored
/// structure and arithmetic structure coincide. The diagonal is governed by
/// `diag_policy`.
pub fn extract_lower(entries: &[CooEntry], n: usize, diag_policy: DiagPolicy) -> Result<LowerCsr> {
    let mut kept: Vec<CooEntry> = entries.iter().copied().filter(|e| e.row >= e.col).collect();
    kept.sort_by_key(|e| (e.row, e.col));

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);

    let mut cursor = 0usize;
    for i in 0..n {
        let start = cursor;
        while cursor < kept.len() && kept[cursor].row == i {
            cursor += 1;
        }
        let mut diag = 0.0f64;
        let mut has_diag = false;
        let mut k = start;
        while k < cursor {
            let col = kept[k].col;
            let mut sum = 0.0;
            while k < cursor && kept[k].col == col {
                sum += kept[k].value;
                k += 1;
            }
            if col == i {
                diag = sum;
                has_diag = true;
            } else if sum != 0.0 {
                col_idx.push(col);
                vals.push(sum);
            }
        }
        if !has_diag || diag == 0.0 {
            match diag_policy {
                DiagPolicy::RequireNonzero => return Err(Error::ZeroDiagonal { row: i }),
                DiagPolicy::SubstituteOne => diag = 1.0,
            }
        }
        col_idx.push(i);
        vals.push(diag);
        row_ptr.push(vals.len());
    }

    let out = LowerCsr::from_parts(n, row_ptr, col_idx, vals);
    out.validate()?;
    Ok(out)
}

/// Right-hand side with `b[i]` equal to the stored row sum, so the exact
/// solution of `Lx = b` is the all-ones vector.
pub fn default_rhs(matrix: &LowerCsr) -> Rhs {
    let values = (0..matrix.n())
        .map(|i| matrix.row(i).1.iter().sum())
        .collect();
    Rhs::new(values)
}
