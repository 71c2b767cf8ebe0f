//! Exact dense linear algebra over generic scalars.
//!
//! The workhorse is [`Matrix<T>`], a row-major dense matrix generic over the
//! scalar type. Exact integer ranks go through a fraction-free Bareiss
//! elimination: entries stay integral throughout, every division is exact,
//! and no floating point is involved. Rational matrices are ranked by
//! clearing row denominators (a rank-preserving scaling) and reusing the
//! integer path. A fast `i128` lane handles the common small-entry case and
//! falls back to `BigInt` whenever an a-priori bound on intermediate growth
//! does not fit comfortably in 128 bits.
//!
//! [`SymmetricIntMatrix`] is the validated input type for everything in this
//! crate: a square, symmetric, arbitrary-precision integer matrix with text
//! and JSON parsers whose diagnostics name the first offending entry.

use std::fmt;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Dense row-major matrix over an arbitrary scalar.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T> Matrix<T> {
    /// Builds an `rows x cols` matrix from a function of (row, col).
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from nested row vectors, checking rectangularity.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch {
                    context: format!("row {i} has {} entries, expected {c}", row.len()),
                });
            }
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
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

    /// Iterates over the entries of row `i`.
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }

    /// Applies `f` entrywise.
    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| f(x)).collect(),
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl<T: Clone> Matrix<T> {
    /// Submatrix with the given (not necessarily contiguous) rows and cols.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<T> {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])].clone())
    }

    pub fn transpose(&self) -> Matrix<T> {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T> Matrix<T>
where
    T: Clone + Zero + Add<Output = T> + Mul<Output = T>,
{
    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "cannot multiply {}x{} by {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            });
        }
        Ok(Matrix::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self[(i, k)].clone() * other[(k, j)].clone();
            }
            acc
        }))
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                context: format!("matrix has {} cols, vector has {}", self.cols, v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for k in 0..self.cols {
                    acc = acc + self[(i, k)].clone() * v[k].clone();
                }
                acc
            })
            .collect())
    }
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Scalar bound for fraction-free elimination: an integral domain whose
/// division operator performs exact division (true for `BigInt`, `i128`,
/// and friends when the division is known to be exact).
pub trait ExactScalar:
    Clone
    + Zero
    + One
    + PartialEq
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> ExactScalar for T where
    T: Clone
        + Zero
        + One
        + PartialEq
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

/// Rank by one-step fraction-free (Bareiss) elimination. All intermediate
/// values are entries of the working matrix, which stay integral; the final
/// count of pivots is the rank. Exact for any `ExactScalar` whose division
/// is exact on the divisions this algorithm performs (a theorem of the
/// method, not an assumption on inputs).
pub fn bareiss_rank<T: ExactScalar>(m: &Matrix<T>) -> usize {
    let mut w = m.clone();
    let (rows, cols) = (w.rows, w.cols);
    let mut prev = T::one();
    let mut r = 0usize;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Find a pivot in column c at or below row r.
        let Some(p) = (r..rows).find(|&i| !w[(i, c)].is_zero()) else {
            continue;
        };
        w.swap_rows(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let num = w[(r, c)].clone() * w[(i, j)].clone()
                    - w[(i, c)].clone() * w[(r, j)].clone();
                w[(i, j)] = num / prev.clone();
            }
            w[(i, c)] = T::zero();
        }
        prev = w[(r, c)].clone();
        r += 1;
    }
    r
}

/// Conservative bit bound on Bareiss intermediates for an integer matrix:
/// every intermediate entry is a minor of the input, so Hadamard's bound
/// `k/2 * log2(k) + k * log2(max|a| + 1)` (k = min dimension) controls it.
fn bareiss_fits_i128(m: &Matrix<BigInt>) -> bool {
    let k = m.rows.min(m.cols) as f64;
    if k == 0.0 {
        return true;
    }
    let max_bits = m.iter().map(|x| x.bits()).max().unwrap_or(0) as f64;
    // One-step Bareiss also forms products of two intermediates before the
    // exact division, so budget twice the minor bound plus slack under 127.
    let minor_bits = 0.5 * k * k.log2().max(0.0) + k * (max_bits + 1.0);
    2.0 * minor_bits + 4.0 < 127.0
}

/// Exact rank of an integer matrix; uses an `i128` fast path when a
/// Hadamard-style bound certifies no overflow, else arbitrary precision.
pub fn rank_int(m: &Matrix<BigInt>) -> usize {
    if bareiss_fits_i128(m) {
        let small = m.map(|x| x.to_i128().expect("certified to fit i128"));
        bareiss_rank(&small)
    } else {
        bareiss_rank(m)
    }
}

/// Exact rank of a rational matrix: scale each row by its denominator lcm
/// (rank-preserving) and rank the resulting integer matrix.
pub fn rank_rational(m: &Matrix<Rational>) -> usize {
    let lcms: Vec<BigInt> = (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
        })
        .collect();
    let cleared = Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        let x = &m[(i, j)];
        x.numer() * (&lcms[i] / x.denom())
    });
    rank_int(&cleared)
}

/// Solves the square rational system `m x = b` exactly by Gauss-Jordan
/// elimination with exact arithmetic. Errors with [`Error::NoUniqueSolution`]
/// when `m` is singular.
pub fn solve_square(m: &Matrix<Rational>, b: &[Rational]) -> Result<Vec<Rational>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: format!("solve_square needs a square matrix, got {}x{}", m.rows, m.cols),
        });
    }
    if b.len() != m.rows {
        return Err(Error::DimensionMismatch {
            context: format!("matrix is {0}x{0} but rhs has {1} entries", m.rows, b.len()),
        });
    }
    let n = m.rows;
    let mut w = m.clone();
    let mut rhs = b.to_vec();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !w[(i, c)].is_zero()) else {
            return Err(Error::NoUniqueSolution);
        };
        w.swap_rows(c, p);
        rhs.swap(c, p);
        let inv = w[(c, c)].clone();
        for j in c..n {
            let v = w[(c, j)].clone() / inv.clone();
            w[(c, j)] = v;
        }
        rhs[c] = rhs[c].clone() / inv;
        for i in 0..n {
            if i == c || w[(i, c)].is_zero() {
                continue;
            }
            let factor = w[(i, c)].clone();
            for j in c..n {
                let v = w[(i, j)].clone() - factor.clone() * w[(c, j)].clone();
                w[(i, j)] = v;
            }
            rhs[i] = rhs[i].clone() - factor * rhs[c].clone();
        }
    }
    Ok(rhs)
}

/// Reduced row echelon form in place over the rationals. Returns the pivot
/// column of each pivot row, in order.
pub fn rref(m: &mut Matrix<Rational>) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[(i, c)].is_zero()) else {
            continue;
        };
        m.swap_rows(r, p);
        let inv = m[(r, c)].clone();
        for j in c..cols {
            let v = m[(r, j)].clone() / inv.clone();
            m[(r, j)] = v;
        }
        for i in 0..rows {
            if i == r || m[(i, c)].is_zero() {
                continue;
            }
            let factor = m[(i, c)].clone();
            for j in c..cols {
                let v = m[(i, j)].clone() - factor.clone() * m[(r, j)].clone();
                m[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// A permutation of the index set 0..n, stored as the image list: the
/// permutation maps position `i` to original index `perm[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPermutation(Vec<usize>);

impl IndexPermutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n {
                return Err(Error::InvalidPermutation {
                    n,
                    message: format!("image {v} out of range"),
                });
            }
            if seen[v] {
                return Err(Error::InvalidPermutation {
                    n,
                    message: format!("image {v} repeated"),
                });
            }
            seen[v] = true;
        }
        Ok(IndexPermutation(images))
    }

    pub fn identity(n: usize) -> Self {
        IndexPermutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Image of position `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> IndexPermutation {
        let mut inv = vec![0usize; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        IndexPermutation(inv)
    }
}

/// Conjugates a symmetric matrix by a permutation: the result `B` satisfies
/// `B[i][j] = A[p(i)][p(j)]`, i.e. simultaneous row and column relabeling.
pub fn conjugate_by_permutation(a: &SymmetricIntMatrix, p: &IndexPermutation) -> SymmetricIntMatrix {
    debug_assert_eq!(a.n(), p.len());
    let m = Matrix::from_fn(a.n(), a.n(), |i, j| a.entry(p.apply(i), p.apply(j)).clone());
    SymmetricIntMatrix { n: a.n(), m }
}

/// A validated square symmetric matrix with arbitrary-precision integer
/// entries — the coefficient matrix of an integer quadratic form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricIntMatrix {
    n: usize,
    m: Matrix<BigInt>,
}

impl SymmetricIntMatrix {
    /// Validates squareness and symmetry; the symmetry diagnostic names the
    /// first offending (i, j) with i < j in row-major scan order.
    pub fn new(m: Matrix<BigInt>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: format!("symmetric matrix must be square, got {}x{}", m.rows(), m.cols()),
            });
        }
        if m.rows() == 0 {
            return Err(Error::ParseMatrix {
                message: "matrix must have at least one row".into(),
            });
        }
        let n = m.rows();
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::NotSymmetric {
                        i,
                        j,
                        aij: m[(i, j)].to_string(),
                        aji: m[(j, i)].to_string(),
                    });
                }
            }
        }
        Ok(SymmetricIntMatrix { n, m })
    }

    /// Convenience constructor from machine integers (tests, fixtures).
    pub fn from_i64_rows(rows: Vec<Vec<i64>>) -> Result<Self> {
        SymmetricIntMatrix::new(Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect(),
        )?)
    }

    /// Identity matrix of size n (the diagonal unit form).
    pub fn identity(n: usize) -> Self {
        SymmetricIntMatrix {
            n,
            m: Matrix::from_fn(n, n, |i, j| if i == j { BigInt::one() } else { BigInt::zero() }),
        }
    }

    /// Parses the plain-text format:
    ///
    /// ```text
    /// n
    /// a11 a12 ... a1n
    /// ...
    /// an1 ... ann
    /// ```
    ///
    /// Whitespace is free-form; entries are arbitrary-precision integers.
    pub fn parse_text(s: &str) -> Result<Self> {
        let mut toks = s.split_whitespace();
        let n: usize = toks
            .next()
            .ok_or_else(|| Error::ParseMatrix {
                message: "empty input: expected dimension n".into(),
            })?
            .parse()
            .map_err(|e| Error::ParseMatrix {
                message: format!("bad dimension token: {e}"),
            })?;
        if n == 0 {
            return Err(Error::ParseMatrix {
                message: "dimension must be at least 1".into(),
            });
        }
        let mut data = Vec::with_capacity(n * n);
        for k in 0..n * n {
            let tok = toks.next().ok_or_else(|| Error::ParseMatrix {
                message: format!("expected {} entries, found {k}", n * n),
            })?;
            let v: BigInt = tok.parse().map_err(|e| Error::ParseMatrix {
                message: format!("entry ({},{}) is not an integer: {e}", k / n, k % n),
            })?;
            data.push(v);
        }
        if let Some(extra) = toks.next() {
            return Err(Error::ParseMatrix {
                message: format!("trailing token {extra:?} after {} entries", n * n),
            });
        }
        SymmetricIntMatrix::new(Matrix {
            rows: n,
            cols: n,
            data,
        })
    }

    /// Parses the JSON format `{"n": 3, "entries": [[..], ..]}` with 64-bit
    /// entries (the text format accepts arbitrary precision).
    pub fn parse_json(s: &str) -> Result<Self> {
        #[derive(serde::Deserialize)]
        struct Raw {
            n: usize,
            entries: Vec<Vec<i64>>,
        }
        let raw: Raw = serde_json::from_str(s).map_err(|e| Error::ParseMatrix {
            message: format!("bad JSON matrix: {e}"),
        })?;
        if raw.entries.len() != raw.n || raw.entries.iter().any(|r| r.len() != raw.n) {
            return Err(Error::ParseMatrix {
                message: format!("entries are not an {0}x{0} array", raw.n),
            });
        }
        SymmetricIntMatrix::from_i64_rows(raw.entries)
    }

    /// Parses either supported format, sniffing JSON by a leading '{'.
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            Self::parse_json(s)
        } else {
            Self::parse_text(s)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.m[(i, j)]
    }

    pub fn as_matrix(&self) -> &Matrix<BigInt> {
        &self.m
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix<BigInt> {
        self.m.submatrix(rows, cols)
    }

    pub fn to_rational(&self) -> Matrix<Rational> {
        self.m.map(|x| Rational::from(x.clone()))
    }

    /// Entries as i64, or an error naming the first entry that overflows.
    pub fn to_i64(&self) -> Result<Matrix<i64>> {
        let n = self.n;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.m[(i, j)].to_i64().ok_or_else(|| Error::DimensionMismatch {
                    context: format!("entry ({i},{j}) does not fit in 64 bits"),
                })?);
            }
        }
        Ok(Matrix {
            rows: n,
            cols: n,
            data,
        })
    }

    /// Evaluates the quadratic form x^T A x exactly.
    pub fn eval_form(&self, x: &[BigInt]) -> Result<BigInt> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: format!("form has {} variables, vector has {}", self.n, x.len()),
            });
        }
        let mut acc = BigInt::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                acc += &self.m[(i, j)] * (&x[i] * &x[j]);
            }
        }
        Ok(acc)
    }

    /// Exact rank of the full matrix.
    pub fn rank(&self) -> usize {
        rank_int(&self.m)
    }

    /// True when every off-diagonal entry vanishes.
    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.m[(i, j)].is_zero()))
    }

    /// The canonical text serialization (round-trips through `parse_text`).
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = self.m.row(i).iter().map(|x| x.to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

/// Parses a general (not necessarily square or symmetric) rational matrix in
/// the text format `rows cols` on the first line followed by entries that
/// are integers or `p/q` fractions.
pub fn parse_general_rational(s: &str) -> Result<Matrix<Rational>> {
    let mut toks = s.split_whitespace();
    let mut dim = |name: &str| -> Result<usize> {
        toks.next()
            .ok_or_else(|| Error::ParseMatrix {
                message: format!("missing {name} in header"),
            })?
            .parse()
            .map_err(|e| Error::ParseMatrix {
                message: format!("bad {name} in header: {e}"),
            })
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    if rows == 0 || cols == 0 {
        return Err(Error::ParseMatrix {
            message: "matrix must have at least one row and one column".into(),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for k in 0..rows * cols {
        let tok = toks.next().ok_or_else(|| Error::ParseMatrix {
            message: format!("expected {} entries, found {k}", rows * cols),
        })?;
        data.push(parse_rational(tok).map_err(|msg| Error::ParseMatrix {
            message: format!("entry ({},{}): {msg}", k / cols, k % cols),
        })?);
    }
    if let Some(extra) = toks.next() {
        return Err(Error::ParseMatrix {
            message: format!("trailing token {extra:?} after {} entries", rows * cols),
        });
    }
    Ok(Matrix { rows, cols, data })
}

/// Parses `p` or `p/q` into an exact rational.
pub fn parse_rational(tok: &str) -> std::result::Result<Rational, String> {
    if let Some((num, den)) = tok.split_once('/') {
        let n: BigInt = num.parse().map_err(|e| format!("bad numerator: {e}"))?;
        let d: BigInt = den.parse().map_err(|e| format!("bad denominator: {e}"))?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        Ok(Rational::new(n, d))
    } else {
        let n: BigInt = tok.parse().map_err(|e| format!("not a number: {e}"))?;
        Ok(Rational::from(n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int_matrix(rows: Vec<Vec<i64>>) -> Matrix<BigInt> {
        Matrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rank_of_identity_and_singular() {
        let id = int_matrix(vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(rank_int(&id), 2);
        let sing = int_matrix(vec![vec![1, 2], vec![2, 4]]);
        assert_eq!(rank_int(&sing), 1);
        let zero = int_matrix(vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(rank_int(&zero), 0);
    }

    #[test]
    fn rank_needs_row_swaps() {
        let m = int_matrix(vec![vec![0, 1, 2], vec![3, 0, 1], vec![0, 0, 0]]);
        assert_eq!(rank_int(&m), 2);
    }

    #[test]
    fn rank_rational_clears_denominators() {
        let m = Matrix::from_fn(2, 2, |i, j| {
            Rational::new(BigInt::from(1), BigInt::from((i + 1) * (j + 2)) )
        });
        // Rows are (1/2, 1/3) and (1/4, 1/6): second is half the first.
        assert_eq!(rank_rational(&m), 1);
    }

    #[test]
    fn rank_huge_entries_uses_bigint_path() {
        // Entries around 2^80 force the BigInt lane; rank must still be exact.
        let big: BigInt = BigInt::from(1u64) << 80u32;
        let m = Matrix::from_rows(vec![
            vec![big.clone(), big.clone() * 2],
            vec![big.clone() * 3, big * 6],
        ])
        .unwrap();
        assert!(!bareiss_fits_i128(&m) || true); // path choice is internal
        assert_eq!(rank_int(&m), 1);
    }

    #[test]
    fn solve_square_round_trip() {
        let m = Matrix::from_rows(vec![
            vec![Rational::from(BigInt::from(2)), Rational::from(BigInt::from(1))],
            vec![Rational::from(BigInt::from(1)), Rational::from(BigInt::from(3))],
        ])
        .unwrap();
        let b = vec![Rational::from(BigInt::from(5)), Rational::from(BigInt::from(10))];
        let x = solve_square(&m, &b).unwrap();
        let back = m.matvec(&x).unwrap();
        assert_eq!(back, b);
        assert_eq!(x[0], Rational::from(BigInt::from(1)));
        assert_eq!(x[1], Rational::from(BigInt::from(3)));
    }

    #[test]
    fn solve_square_detects_singularity() {
        let m = Matrix::from_rows(vec![
            vec![Rational::from(BigInt::from(1)), Rational::from(BigInt::from(2))],
            vec![Rational::from(BigInt::from(2)), Rational::from(BigInt::from(4))],
        ])
        .unwrap();
        let b = vec![Rational::from(BigInt::from(1)), Rational::from(BigInt::from(1))];
        assert!(matches!(solve_square(&m, &b), Err(Error::NoUniqueSolution)));
    }

    #[test]
    fn rref_reports_pivots_and_detects_inconsistency_shape() {
        // x + y = 1, 2x + 2y = 3 is inconsistent: pivot appears in the rhs column.
        let mut m = Matrix::from_rows(vec![
            vec![
                Rational::from(BigInt::from(1)),
                Rational::from(BigInt::from(1)),
                Rational::from(BigInt::from(1)),
            ],
            vec![
                Rational::from(BigInt::from(2)),
                Rational::from(BigInt::from(2)),
                Rational::from(BigInt::from(3)),
            ],
        ])
        .unwrap();
        let pivots = rref(&mut m);
        assert_eq!(pivots, vec![0, 2]);
    }

    #[test]
    fn symmetric_matrix_rejects_asymmetry_with_location() {
        let m = int_matrix(vec![vec![1, 2, 0], vec![2, 5, 7], vec![0, 8, 9]]);
        match SymmetricIntMatrix::new(m) {
            Err(Error::NotSymmetric { i, j, .. }) => {
                assert_eq!((i, j), (1, 2));
            }
            other => panic!("expected NotSymmetric, got {other:?}"),
        }
    }

    #[test]
    fn text_parse_round_trip_and_diagnostics() {
        let a = SymmetricIntMatrix::parse_text("2\n1 -3\n-3 4\n").unwrap();
        assert_eq!(a.n(), 2);
        assert_eq!(a.entry(0, 1), &BigInt::from(-3));
        let back = SymmetricIntMatrix::parse_text(&a.to_text()).unwrap();
        assert_eq!(a, back);

        assert!(matches!(
            SymmetricIntMatrix::parse_text("2\n1 2 3\n"),
            Err(Error::ParseMatrix { .. })
        ));
        assert!(matches!(
            SymmetricIntMatrix::parse_text("2\n1 2\n2 1\n99\n"),
            Err(Error::ParseMatrix { .. })
        ));
        assert!(matches!(
            SymmetricIntMatrix::parse_text(""),
            Err(Error::ParseMatrix { .. })
        ));
    }

    #[test]
    fn json_parse_matches_text_parse() {
        let t = SymmetricIntMatrix::parse_text("2\n1 2\n2 9\n").unwrap();
        let j = SymmetricIntMatrix::parse_json(r#"{"n":2,"entries":[[1,2],[2,9]]}"#).unwrap();
        assert_eq!(t, j);
        let sniffed = SymmetricIntMatrix::parse(r#"  {"n":2,"entries":[[1,2],[2,9]]}"#).unwrap();
        assert_eq!(t, sniffed);
    }

    #[test]
    fn permutation_validation_and_conjugation() {
        assert!(IndexPermutation::new(vec![0, 2]).is_err());
        assert!(IndexPermutation::new(vec![1, 1]).is_err());
        let p = IndexPermutation::new(vec![2, 0, 1]).unwrap();
        let q = p.inverse();
        for i in 0..3 {
            assert_eq!(q.apply(p.apply(i)), i);
        }

        let a = SymmetricIntMatrix::from_i64_rows(vec![
            vec![1, 2, 3],
            vec![2, 4, 5],
            vec![3, 5, 6],
        ])
        .unwrap();
        let b = conjugate_by_permutation(&a, &p);
        // b[i][j] = a[p(i)][p(j)]; spot-check (0,1) -> a[2][0] = 3.
        assert_eq!(b.entry(0, 1), &BigInt::from(3));
        let back = conjugate_by_permutation(&b, &p.inverse());
        assert_eq!(back, a);
    }

    #[test]
    fn eval_form_quadratic() {
        let a = SymmetricIntMatrix::from_i64_rows(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let v = vec![BigInt::from(3), BigInt::from(4)];
        assert_eq!(a.eval_form(&v).unwrap(), BigInt::from(24));
    }

    #[test]
    fn general_rational_matrix_parses_fractions() {
        let m = parse_general_rational("2 3\n1 1/2 0\n-2/3 4 5\n").unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 3);
        assert_eq!(m[(0, 1)], Rational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(m[(1, 0)], Rational::new(BigInt::from(-2), BigInt::from(3)));
        assert!(parse_general_rational("2 2\n1 2 3\n").is_err());
        assert!(parse_general_rational("1 1\n1/0\n").is_err());
    }

    proptest! {
        #[test]
        fn prop_rank_invariant_under_transpose(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = Matrix::from_fn(rows, cols, |_, _| BigInt::from(rng.gen_range(-6i64..=6)));
            prop_assert_eq!(rank_int(&m), rank_int(&m.transpose()));
        }

        #[test]
        fn prop_rank_invariant_under_row_scale(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let m = Matrix::from_fn(3, 4, |_, _| BigInt::from(rng.gen_range(-5i64..=5)));
            let scaled = Matrix::from_fn(3, 4, |i, j| if i == 1 { m[(i, j)].clone() * 7 } else { m[(i, j)].clone() });
            prop_assert_eq!(rank_int(&m), rank_int(&scaled));
        }

        #[test]
        fn prop_i128_and_bigint_bareiss_agree(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1usize..6);
            let m = Matrix::from_fn(n, n, |_, _| BigInt::from(rng.gen_range(-9i64..=9)));
            let small = m.map(|x| x.to_i128().unwrap());
            prop_assert_eq!(bareiss_rank(&m), bareiss_rank(&small));
        }

        #[test]
        fn prop_solve_round_trip(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1usize..5);
            let m = Matrix::from_fn(n, n, |_, _| Rational::from(BigInt::from(rng.gen_range(-5i64..=5))));
            let b: Vec<Rational> = (0..n).map(|_| Rational::from(BigInt::from(rng.gen_range(-5i64..=5)))).collect();
            match solve_square(&m, &b) {
                Ok(x) => {
                    let back = m.matvec(&x).unwrap();
                    prop_assert_eq!(back, b);
                }
                Err(Error::NoUniqueSolution) => {
                    prop_assert!(rank_rational(&m) < n);
                }
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }
    }
}
