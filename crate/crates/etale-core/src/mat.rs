//! Dense matrices over Z/n and the Howell normal form.
//!
//! Z/n is not a field, so Gaussian elimination alone cannot decide membership
//! in a row span: over Z/4 the single row (2, 1) spans a set containing
//! (0, 2) = 2 * (2, 1), which no echelon reduction against (2, 1) detects.
//! The Howell form repairs this by adjoining, for each row with pivot d, the
//! annihilator multiple (n/d) * row, reduced and absorbed until the form is
//! closed under the operation. Reduction against a Howell basis then decides
//! membership, and equality of Howell bases decides equality of row spans.
//!
//! All transformations are compositions of invertible row operations, so the
//! engine can track a square invertible certificate P with P * pad(M) = H.
//! Everything here is deterministic: no hashing, no randomness.

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::arith::{canonical_associate, unit_combination, unit_normalizer};
use crate::error::{Error, Result};

/// Dense row-major matrix over Z/n. Entries are kept reduced to [0, n).
///
/// The ordering is lexicographic on (n, rows, cols, entries); it carries no
/// mathematical meaning and exists so matrices can key ordered sets.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct ZnMatrix {
    n: u64,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl ZnMatrix {
    /// Build a matrix from raw entries, reducing them mod n.
    ///
    /// - requires n >= 2 and data.len() == rows * cols.
    pub fn new(n: u64, rows: usize, cols: usize, data: Vec<u64>) -> Result<ZnMatrix> {
        if n < 2 {
            return Err(Error::InvalidInput(String::from("modulus must be at least 2")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(String::from(
                "matrix data length does not match rows * cols",
            )));
        }
        let data = data.into_iter().map(|v| v % n).collect();
        Ok(ZnMatrix { n, rows, cols, data })
    }

    /// Build a matrix from a list of equal-length rows.
    pub fn from_rows(n: u64, cols: usize, rows: &[Vec<u64>]) -> Result<ZnMatrix> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch(String::from(
                    "row length does not match column count",
                )));
            }
            data.extend_from_slice(r);
        }
        ZnMatrix::new(n, rows.len(), cols, data)
    }

    /// The all-zero matrix of the given shape.
    pub fn zero(n: u64, rows: usize, cols: usize) -> ZnMatrix {
        debug_assert!(n >= 2);
        ZnMatrix { n, rows, cols, data: vec![0; rows * cols] }
    }

    /// The identity matrix of the given size.
    pub fn identity(n: u64, size: usize) -> ZnMatrix {
        let mut m = ZnMatrix::zero(n, size, size);
        for i in 0..size {
            m.data[i * size + i] = 1;
        }
        m
    }

    /// Modulus n.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at (i, j).
    pub fn get(&self, i: usize, j: usize) -> u64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    /// Set entry at (i, j), reducing mod n.
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v % self.n;
    }

    /// Row i as a slice.
    pub fn row(&self, i: usize) -> &[u64] {
        debug_assert!(i < self.rows);
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// All rows as owned vectors.
    pub fn row_vecs(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// True when every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    /// Transpose.
    pub fn transpose(&self) -> ZnMatrix {
        let mut out = ZnMatrix::zero(self.n, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j);
            }
        }
        out
    }

    /// Entrywise sum.
    ///
    /// - requires equal shapes and moduli.
    pub fn add(&self, other: &ZnMatrix) -> Result<ZnMatrix> {
        self.check_same_shape(other)?;
        let n = self.n;
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| (a + b) % n)
            .collect();
        Ok(ZnMatrix { n, rows: self.rows, cols: self.cols, data })
    }

    /// Entrywise difference.
    pub fn sub(&self, other: &ZnMatrix) -> Result<ZnMatrix> {
        self.check_same_shape(other)?;
        let n = self.n;
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| (a + n - b) % n)
            .collect();
        Ok(ZnMatrix { n, rows: self.rows, cols: self.cols, data })
    }

    /// Entrywise negation.
    pub fn neg(&self) -> ZnMatrix {
        let n = self.n;
        let data = self.data.iter().map(|&a| (n - a) % n).collect();
        ZnMatrix { n, rows: self.rows, cols: self.cols, data }
    }

    /// Scalar multiple.
    pub fn scalar_mul(&self, c: u64) -> ZnMatrix {
        let n = self.n;
        let c = c % n;
        let data = self
            .data
            .iter()
            .map(|&a| ((a as u128 * c as u128) % n as u128) as u64)
            .collect();
        ZnMatrix { n, rows: self.rows, cols: self.cols, data }
    }

    /// Matrix product self * other.
    ///
    /// - requires self.cols == other.rows and equal moduli.
    pub fn mul(&self, other: &ZnMatrix) -> Result<ZnMatrix> {
        if self.n != other.n {
            return Err(Error::ModulusMismatch { left: self.n, right: other.n });
        }
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(String::from(
                "inner dimensions do not match in matrix product",
            )));
        }
        let n = self.n as u128;
        let mut out = ZnMatrix::zero(self.n, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                let a = a as u128;
                for j in 0..other.cols {
                    let b = other.get(k, j) as u128;
                    if b == 0 {
                        continue;
                    }
                    let cur = out.data[i * other.cols + j] as u128;
                    out.data[i * other.cols + j] = ((cur + a * b) % n) as u64;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: v * self.
    ///
    /// - requires v.len() == self.rows.
    pub fn act_on_row(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(String::from(
                "vector length does not match row count in v * M",
            )));
        }
        let n = self.n as u128;
        let mut out = vec![0u64; self.cols];
        for (i, &c) in v.iter().enumerate() {
            let c = (c % self.n) as u128;
            if c == 0 {
                continue;
            }
            for j in 0..self.cols {
                let cur = out[j] as u128;
                out[j] = ((cur + c * self.get(i, j) as u128) % n) as u64;
            }
        }
        Ok(out)
    }

    /// Stack other below self.
    ///
    /// - requires equal column counts and moduli.
    pub fn vstack(&self, other: &ZnMatrix) -> Result<ZnMatrix> {
        if self.n != other.n {
            return Err(Error::ModulusMismatch { left: self.n, right: other.n });
        }
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(String::from(
                "column counts differ in vertical stack",
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(ZnMatrix { n: self.n, rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Place other to the right of self.
    ///
    /// - requires equal row counts and moduli.
    pub fn hstack(&self, other: &ZnMatrix) -> Result<ZnMatrix> {
        if self.n != other.n {
            return Err(Error::ModulusMismatch { left: self.n, right: other.n });
        }
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(String::from(
                "row counts differ in horizontal stack",
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(ZnMatrix { n: self.n, rows: self.rows, cols, data })
    }

    /// Keep the columns in [lo, hi).
    pub fn column_block(&self, lo: usize, hi: usize) -> ZnMatrix {
        debug_assert!(lo <= hi && hi <= self.cols);
        let cols = hi - lo;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[lo..hi]);
        }
        ZnMatrix { n: self.n, rows: self.rows, cols, data }
    }

    fn check_same_shape(&self, other: &ZnMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ModulusMismatch { left: self.n, right: other.n });
        }
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(String::from(
                "matrix shapes differ",
            )));
        }
        Ok(())
    }

    /// Howell normal form H together with an invertible certificate P.
    ///
    /// - returns (H, P) with P square and invertible over Z/n and
    ///   P * pad(M) = H, where pad(M) is M extended by zero rows to H's
    ///   height.
    /// - H has at least self.rows rows; extra all-zero rows appear only
    ///   when the canonical form needs more rows than M has, and never more
    ///   than max(self.rows, self.cols) in total.
    /// - H is in Howell form: pivots on strictly increasing columns, each
    ///   pivot the canonical divisor gcd(pivot, n), entries above a pivot
    ///   reduced below it, zero rows at the bottom, and the row span closed
    ///   under the annihilator expansion (n/d) * row.
    /// - the row span of H equals the row span of M.
    pub fn howell_form(&self) -> (ZnMatrix, ZnMatrix) {
        let mut eng = HowellEngine::new(self.n, self.cols, self.row_vecs(), true);
        eng.run();
        let (h_rows, p_rows) = eng.finish();
        let height = h_rows.len();
        let h = ZnMatrix::from_rows(self.n, self.cols, &h_rows)
            .expect("internal rows have uniform width");
        let p_rows = p_rows.expect("transform was requested");
        let p = ZnMatrix::from_rows(self.n, height, &p_rows)
            .expect("internal transform rows have uniform width");
        (h, p)
    }

    /// The nonzero rows of the Howell form: a canonical basis of the row
    /// span. Two matrices have equal row spans exactly when their Howell
    /// bases are equal entry for entry.
    pub fn howell_basis(&self) -> ZnMatrix {
        RowSpan::from_matrix(self).into_basis()
    }

    /// A basis of the left kernel { x : x * self = 0 }, as rows of length
    /// self.rows. Every solution is a Z/n-combination of the returned rows.
    pub fn left_kernel(&self) -> ZnMatrix {
        // Howell of the augmented matrix [M | I]. A row (u | x) of the form
        // satisfies u = x * M by construction; rows whose left block is zero
        // read off exactly the kernel, and the Howell property makes the
        // collection complete: any kernel vector x gives (0 | x) in the
        // span, and reduction of (0 | x) against the form can only use rows
        // with zero left block.
        let aug = self
            .hstack(&ZnMatrix::identity(self.n, self.rows))
            .expect("augmentation shapes agree");
        let basis = aug.howell_basis();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        for i in 0..basis.rows() {
            let r = basis.row(i);
            if r[..self.cols].iter().all(|&v| v == 0) {
                rows.push(r[self.cols..].to_vec());
            }
        }
        ZnMatrix::from_rows(self.n, self.rows, &rows).expect("kernel rows have uniform width")
    }

    /// A basis of the right kernel { x : self * x = 0 }, as rows of length
    /// self.cols (each row is a solution vector read as a column).
    pub fn right_kernel(&self) -> ZnMatrix {
        self.transpose().left_kernel()
    }

    /// Solve x * self = b for a row vector x, if possible.
    pub fn solve_left(&self, b: &[u64]) -> Option<Vec<u64>> {
        if b.len() != self.cols {
            return None;
        }
        // Reduce (b | 0) against the Howell form of [M | I]. Each reduction
        // step subtracts a multiple of a row (u | x) with u = x * M, so the
        // running value stays of the shape (b - z * M | -z). If the left
        // block reaches zero the accumulated right block is -z with
        // z * M = b. Only rows with pivots in the left block ever fire, so
        // the loop below stops scanning at self.cols.
        let aug = self
            .clone()
            .hstack(&ZnMatrix::identity(self.n, self.rows))
            .expect("augmentation shapes agree");
        let span = RowSpan::from_matrix(&aug);
        let mut w = vec![0u64; self.cols + self.rows];
        w[..self.cols].copy_from_slice(b);
        for k in 0..self.cols {
            w[k] %= self.n;
        }
        span.reduce_in_place(&mut w, self.cols);
        if w[..self.cols].iter().any(|&v| v != 0) {
            return None;
        }
        let x: Vec<u64> = w[self.cols..].iter().map(|&v| (self.n - v) % self.n).collect();
        debug_assert_eq!(
            self.act_on_row(&x).expect("solution length matches"),
            b.iter().map(|&v| v % self.n).collect::<Vec<_>>(),
            "solve_left certificate must reproduce the right-hand side"
        );
        Some(x)
    }

    /// Solve self * x = b for a column vector x (given and returned as a
    /// plain vector), if possible.
    pub fn solve_right(&self, b: &[u64]) -> Option<Vec<u64>> {
        self.transpose().solve_left(b)
    }
}

/// Solve A * x = b in the column convention, returning a particular
/// solution together with a basis of the solution space of A * x = 0.
///
/// - returns None when no solution exists.
pub fn solve_linear(a: &ZnMatrix, b: &[u64]) -> Option<(Vec<u64>, ZnMatrix)> {
    let x0 = a.solve_right(b)?;
    Some((x0, a.right_kernel()))
}

/// Canonical basis of the sum of two row spans.
pub fn span_union(a: &ZnMatrix, b: &ZnMatrix) -> Result<ZnMatrix> {
    Ok(a.vstack(b)?.howell_basis())
}

/// Canonical basis of the intersection of two row spans.
pub fn span_intersection(a: &ZnMatrix, b: &ZnMatrix) -> Result<ZnMatrix> {
    // Pairs (y, z) with y * A + z * B = 0 parameterize the intersection as
    // y * A = -z * B; run y over a kernel basis of the stacked matrix.
    let stacked = a.vstack(b)?;
    let ker = stacked.left_kernel();
    let mut rows = Vec::new();
    for i in 0..ker.rows() {
        let y = &ker.row(i)[..a.rows()];
        rows.push(a.act_on_row(y)?);
    }
    Ok(ZnMatrix::from_rows(a.n(), a.cols(), &rows)?.howell_basis())
}

/// A row span with its cached Howell basis and pivot structure, supporting
/// membership tests, canonical coset representatives, and expression of a
/// member in terms of the basis.
#[derive(Clone, Debug)]
pub struct RowSpan {
    basis: ZnMatrix,
    // (row index in basis, pivot column, pivot value), sorted by column.
    pivots: Vec<(usize, usize, u64)>,
}

impl RowSpan {
    /// Compute the span of the rows of m.
    pub fn from_matrix(m: &ZnMatrix) -> RowSpan {
        let mut eng = HowellEngine::new(m.n(), m.cols(), m.row_vecs(), false);
        eng.run();
        let (h_rows, _) = eng.finish();
        let nonzero: Vec<Vec<u64>> = h_rows
            .into_iter()
            .filter(|r| r.iter().any(|&v| v != 0))
            .collect();
        let basis = ZnMatrix::from_rows(m.n(), m.cols(), &nonzero)
            .expect("basis rows have uniform width");
        let mut pivots = Vec::with_capacity(basis.rows());
        for i in 0..basis.rows() {
            let r = basis.row(i);
            let j = r.iter().position(|&v| v != 0).expect("basis rows are nonzero");
            pivots.push((i, j, r[j]));
        }
        RowSpan { basis, pivots }
    }

    /// Modulus.
    pub fn n(&self) -> u64 {
        self.basis.n()
    }

    /// Ambient vector length.
    pub fn cols(&self) -> usize {
        self.basis.cols()
    }

    /// The canonical (Howell) basis. May have zero rows.
    pub fn basis(&self) -> &ZnMatrix {
        &self.basis
    }

    /// Consume into the basis matrix.
    pub fn into_basis(self) -> ZnMatrix {
        self.basis
    }

    /// Number of basis rows.
    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    /// The number of elements of the span, as a u128.
    ///
    /// - panics if the count overflows u128 (far beyond the intended desk
    ///   scale).
    pub fn size(&self) -> u128 {
        let n = self.basis.n() as u128;
        let mut size: u128 = 1;
        for &(_, _, d) in &self.pivots {
            size = size
                .checked_mul(n / d as u128)
                .expect("span size overflows u128");
        }
        size
    }

    /// Reduce v in place against all pivots on columns < col_limit. After
    /// the call, every entry of v on a pivot column < col_limit is reduced
    /// below that pivot.
    fn reduce_in_place(&self, v: &mut [u64], col_limit: usize) {
        let n = self.basis.n();
        for &(i, j, d) in &self.pivots {
            if j >= col_limit {
                break;
            }
            let q = v[j] / d;
            if q == 0 {
                continue;
            }
            let row = self.basis.row(i);
            for (vk, &rk) in v.iter_mut().zip(row.iter()) {
                let sub = (q as u128 * rk as u128) % n as u128;
                *vk = ((*vk as u128 + n as u128 - sub) % n as u128) as u64;
            }
        }
    }

    /// Canonical coset representative of v modulo the span. Two vectors are
    /// congruent modulo the span exactly when their representatives are
    /// equal.
    pub fn canonical_rep(&self, v: &[u64]) -> Vec<u64> {
        debug_assert_eq!(v.len(), self.basis.cols());
        let n = self.basis.n();
        let mut w: Vec<u64> = v.iter().map(|&x| x % n).collect();
        self.reduce_in_place(&mut w, self.basis.cols());
        w
    }

    /// Membership test: is v in the span?
    pub fn contains(&self, v: &[u64]) -> bool {
        self.canonical_rep(v).iter().all(|&x| x == 0)
    }

    /// Express v as a combination of the basis rows, if v lies in the span.
    pub fn express(&self, v: &[u64]) -> Option<Vec<u64>> {
        debug_assert_eq!(v.len(), self.basis.cols());
        let n = self.basis.n();
        let mut w: Vec<u64> = v.iter().map(|&x| x % n).collect();
        let mut coeffs = vec![0u64; self.basis.rows()];
        for &(i, j, d) in &self.pivots {
            let q = w[j] / d;
            coeffs[i] = q;
            if q == 0 {
                continue;
            }
            let row = self.basis.row(i);
            for (wk, &rk) in w.iter_mut().zip(row.iter()) {
                let sub = (q as u128 * rk as u128) % n as u128;
                *wk = ((*wk as u128 + n as u128 - sub) % n as u128) as u64;
            }
        }
        if w.iter().all(|&x| x == 0) {
            Some(coeffs)
        } else {
            None
        }
    }
}

// The in-place Howell reduction. Rows are Vec<u64> of uniform width; the
// optional transform mirrors every operation on an identity-seeded square
// matrix, so it stays invertible by construction. The working matrix grows
// by zero rows only when a materialized expansion row needs a slot and no
// zero row is free; with reuse the height never exceeds max(rows, cols).
struct HowellEngine {
    n: u64,
    cols: usize,
    work: Vec<Vec<u64>>,
    p: Option<Vec<Vec<u64>>>,
    // pivot column -> row index holding that pivot
    pivot_at: BTreeMap<usize, usize>,
}

impl HowellEngine {
    fn new(n: u64, cols: usize, rows: Vec<Vec<u64>>, track_p: bool) -> HowellEngine {
        debug_assert!(n >= 2);
        let height = rows.len();
        let mut work = rows;
        for r in work.iter_mut() {
            debug_assert_eq!(r.len(), cols);
            for v in r.iter_mut() {
                *v %= n;
            }
        }
        let p = if track_p {
            let mut id = vec![vec![0u64; height]; height];
            for (i, row) in id.iter_mut().enumerate() {
                row[i] = 1;
            }
            Some(id)
        } else {
            None
        };
        HowellEngine { n, cols, work, p, pivot_at: BTreeMap::new() }
    }

    fn height(&self) -> usize {
        self.work.len()
    }

    // row t -= q * row s, applied to work and transform alike.
    fn row_sub_mul(&mut self, t: usize, s: usize, q: u64) {
        debug_assert_ne!(t, s);
        let n = self.n as u128;
        let q = (q as u128) % n;
        if q == 0 {
            return;
        }
        let (src, dst) = borrow_two(&mut self.work, s, t);
        for (d, &v) in dst.iter_mut().zip(src.iter()) {
            *d = ((*d as u128 + (n - q % n) * v as u128 % n) % n) as u64;
        }
        if let Some(p) = self.p.as_mut() {
            let (src, dst) = borrow_two(p, s, t);
            for (d, &v) in dst.iter_mut().zip(src.iter()) {
                *d = ((*d as u128 + (n - q % n) * v as u128 % n) % n) as u64;
            }
        }
    }

    // row t <- x * row t + y * row s with x a unit, applied to work and
    // transform alike. Invertible since x is a unit.
    fn row_unit_combine(&mut self, t: usize, s: usize, x: u64, y: u64) {
        debug_assert_ne!(t, s);
        let n = self.n as u128;
        let x = (x as u128) % n;
        let y = (y as u128) % n;
        let (src, dst) = borrow_two(&mut self.work, s, t);
        for (d, &v) in dst.iter_mut().zip(src.iter()) {
            *d = ((x * *d as u128 + y * v as u128) % n) as u64;
        }
        if let Some(p) = self.p.as_mut() {
            let (src, dst) = borrow_two(p, s, t);
            for (d, &v) in dst.iter_mut().zip(src.iter()) {
                *d = ((x * *d as u128 + y * v as u128) % n) as u64;
            }
        }
    }

    // row t <- u * row t for a unit u.
    fn row_unit_scale(&mut self, t: usize, u: u64) {
        let n = self.n as u128;
        let u = (u as u128) % n;
        if u == 1 {
            return;
        }
        for d in self.work[t].iter_mut() {
            *d = ((u * *d as u128) % n) as u64;
        }
        if let Some(p) = self.p.as_mut() {
            for d in p[t].iter_mut() {
                *d = ((u * *d as u128) % n) as u64;
            }
        }
    }

    fn row_swap(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        self.work.swap(a, b);
        if let Some(p) = self.p.as_mut() {
            p.swap(a, b);
        }
    }

    // row t <- x * row t + y * w where w is a virtual row carried with its
    // transform shadow wp. Invertible whenever w is a combination of rows
    // other than t, which the expansion cascade guarantees.
    fn row_unit_combine_virtual(&mut self, t: usize, x: u64, y: u64, w: &[u64], wp: Option<&[u64]>) {
        let n = self.n as u128;
        let x = (x as u128) % n;
        let y = (y as u128) % n;
        for (d, &v) in self.work[t].iter_mut().zip(w.iter()) {
            *d = ((x * *d as u128 + y * v as u128) % n) as u64;
        }
        if let Some(p) = self.p.as_mut() {
            let wp = wp.expect("transform shadow present when tracking");
            for (d, &v) in p[t].iter_mut().zip(wp.iter()) {
                *d = ((x * *d as u128 + y * v as u128) % n) as u64;
            }
        }
    }

    fn run(&mut self) {
        // Alternate echelon maintenance and annihilator expansion until a
        // full pass changes nothing. Each expansion that alters the matrix
        // strictly shrinks some pivot in the divisor order or claims a new
        // pivot column, so the loop terminates.
        loop {
            self.echelonize();
            self.normalize_and_reduce_above();
            if !self.expand_once() {
                break;
            }
        }
        self.sort_rows();
    }

    // Bring the working matrix to echelon shape (pivot columns strictly
    // increasing in the pivot map; non-pivot rows zero), using invertible
    // operations only.
    fn echelonize(&mut self) {
        self.pivot_at.clear();
        let height = self.height();
        let mut used = vec![false; height];
        for col in 0..self.cols {
            // Collect rows, not yet pivots, with a nonzero entry here.
            let mut acc: Option<usize> = None;
            for r in 0..height {
                if used[r] || self.work[r][col] == 0 {
                    continue;
                }
                match acc {
                    None => acc = Some(r),
                    Some(a) => {
                        // Fold row r into the accumulator with a unit-scaled
                        // Bezout combination, then clear row r's entry.
                        let va = self.work[a][col];
                        let vr = self.work[r][col];
                        let (g, x, y) = unit_combination(va, vr, self.n);
                        self.row_unit_combine(a, r, x, y);
                        debug_assert_eq!(self.work[a][col], g);
                        let q = self.work[r][col] / g;
                        self.row_sub_mul(r, a, q);
                        debug_assert_eq!(self.work[r][col], 0);
                    }
                }
            }
            if let Some(a) = acc {
                used[a] = true;
                self.pivot_at.insert(col, a);
            }
        }
        debug_assert!(
            (0..height).all(|r| used[r] || self.work[r].iter().all(|&v| v == 0)),
            "rows without a pivot must be zero after echelon"
        );
    }

    // Scale pivots to the canonical divisor gcd(pivot, n) and reduce every
    // entry above a pivot below that pivot.
    fn normalize_and_reduce_above(&mut self) {
        let pivots: Vec<(usize, usize)> =
            self.pivot_at.iter().map(|(&c, &r)| (c, r)).collect();
        for &(col, row) in &pivots {
            let v = self.work[row][col];
            let u = unit_normalizer(v, self.n);
            self.row_unit_scale(row, u);
            debug_assert_eq!(self.work[row][col], canonical_associate(v, self.n));
        }
        // Reduce above-pivot entries: rows with an earlier pivot column may
        // have large entries on later pivot columns.
        for &(col, row) in &pivots {
            let d = self.work[row][col];
            for &(col2, row2) in &pivots {
                if col2 >= col {
                    break;
                }
                let _ = col2;
                let q = self.work[row2][col] / d;
                self.row_sub_mul(row2, row, q);
            }
        }
    }

    // One pass of annihilator expansions over all current pivot rows.
    // Returns true when the matrix changed.
    fn expand_once(&mut self) -> bool {
        let mut changed = false;
        let track = self.p.is_some();
        let snapshot: Vec<(usize, usize)> =
            self.pivot_at.iter().map(|(&c, &r)| (c, r)).collect();
        for &(col, row) in &snapshot {
            // The pivot row may have shrunk since the snapshot; use the
            // live value.
            let d = self.work[row][col];
            debug_assert_ne!(d, 0);
            // Pivots are canonical divisors of n at this point: the
            // normalization pass ran just before, and in-pass improvements
            // install gcds with n.
            debug_assert_eq!(self.n % d, 0);
            let mult = self.n / d;
            // Virtual expansion row w = (n/d) * row, with transform shadow.
            let n128 = self.n as u128;
            let mut w: Vec<u64> = self.work[row]
                .iter()
                .map(|&v| ((mult as u128 * v as u128) % n128) as u64)
                .collect();
            let mut wp: Option<Vec<u64>> = if track {
                Some(
                    self.p.as_ref().expect("tracking")[row]
                        .iter()
                        .map(|&v| ((mult as u128 * v as u128) % n128) as u64)
                        .collect(),
                )
            } else {
                None
            };
            debug_assert_eq!(w[col], 0, "annihilator multiple kills the pivot");
            // Cascade w to the right, reducing against existing pivots,
            // improving them when they fail to divide, and materializing a
            // new pivot row if w survives past every pivot column.
            loop {
                let jw = match w.iter().position(|&v| v != 0) {
                    Some(j) => j,
                    None => break,
                };
                debug_assert!(jw > col);
                match self.pivot_at.get(&jw).copied() {
                    Some(t) => {
                        let dt = self.work[t][jw];
                        if w[jw] % dt != 0 {
                            // Improve pivot t: combine it with the virtual
                            // row. w never involves row t at this point, so
                            // the operation is invertible on the matrix.
                            let (g, x, y) = unit_combination(dt, w[jw], self.n);
                            self.row_unit_combine_virtual(t, x, y, &w, wp.as_deref());
                            debug_assert_eq!(self.work[t][jw], g);
                            changed = true;
                        }
                        let dt = self.work[t][jw];
                        let q = w[jw] / dt;
                        // Virtual update of w against the (possibly new)
                        // pivot row.
                        for (wk, &rk) in w.iter_mut().zip(self.work[t].iter()) {
                            let sub = (q as u128 * rk as u128) % n128;
                            *wk = ((*wk as u128 + n128 - sub) % n128) as u64;
                        }
                        if let Some(wp) = wp.as_mut() {
                            let p = self.p.as_ref().expect("tracking");
                            for (wk, &rk) in wp.iter_mut().zip(p[t].iter()) {
                                let sub = (q as u128 * rk as u128) % n128;
                                *wk = ((*wk as u128 + n128 - sub) % n128) as u64;
                            }
                        }
                        debug_assert_eq!(w[jw], 0);
                    }
                    None => {
                        // New pivot column: materialize w into a zero row,
                        // growing the matrix only when none is free. The
                        // operation is row_z += w, an elementary addition of
                        // a combination of other rows, so the transform row
                        // accumulates wp rather than being replaced: a
                        // reused zero row carries the operations that
                        // cleared it, and a pushed row keeps its identity
                        // diagonal.
                        let z = self.find_or_add_zero_row();
                        if let Some(wp) = wp.as_mut() {
                            // Keep shadow length in sync with any growth.
                            let height = self.height();
                            wp.resize(height, 0);
                        }
                        self.work[z].copy_from_slice(&w);
                        if let Some(p) = self.p.as_mut() {
                            let wp = wp.as_ref().expect("tracking");
                            let n128 = self.n as u128;
                            for (d, &v) in p[z].iter_mut().zip(wp.iter()) {
                                *d = ((*d as u128 + v as u128) % n128) as u64;
                            }
                        }
                        self.pivot_at.insert(jw, z);
                        changed = true;
                        break;
                    }
                }
            }
        }
        changed
    }

    // Find a zero row not registered as a pivot, or append one. Appending
    // extends the transform by an identity row and column, preserving both
    // invertibility and P * pad(M) = work.
    fn find_or_add_zero_row(&mut self) -> usize {
        let pivot_rows: BTreeSet<usize> = self.pivot_at.values().copied().collect();
        for r in 0..self.height() {
            if !pivot_rows.contains(&r) && self.work[r].iter().all(|&v| v == 0) {
                return r;
            }
        }
        self.work.push(vec![0u64; self.cols]);
        if let Some(p) = self.p.as_mut() {
            let height = self.work.len();
            for row in p.iter_mut() {
                row.push(0);
            }
            let mut new_row = vec![0u64; height];
            new_row[height - 1] = 1;
            p.push(new_row);
        }
        self.work.len() - 1
    }

    // Sort pivot rows to the top by pivot column, zero rows after.
    fn sort_rows(&mut self) {
        let order: Vec<usize> = self.pivot_at.values().copied().collect();
        let height = self.height();
        let mut perm: Vec<usize> = order.clone();
        for r in 0..height {
            if !perm.contains(&r) {
                perm.push(r);
            }
        }
        // Apply the permutation by swaps: place perm[k] at position k.
        let mut cur: Vec<usize> = (0..height).collect();
        for k in 0..height {
            let want = perm[k];
            let at = cur.iter().position(|&x| x == want).expect("permutation entry");
            if at != k {
                self.row_swap(k, at);
                cur.swap(k, at);
            }
        }
        // Rebuild the pivot map against the new positions: pivot columns in
        // ascending order now sit in rows 0, 1, 2, ...
        let mut new_map = BTreeMap::new();
        for (k, (&col, _)) in self.pivot_at.iter().enumerate() {
            new_map.insert(col, k);
        }
        self.pivot_at = new_map;
    }

    fn finish(self) -> (Vec<Vec<u64>>, Option<Vec<Vec<u64>>>) {
        (self.work, self.p)
    }
}

// Borrow rows s (shared) and t (mutable) from the same matrix.
fn borrow_two(rows: &mut [Vec<u64>], s: usize, t: usize) -> (&[u64], &mut Vec<u64>) {
    debug_assert_ne!(s, t);
    if s < t {
        let (a, b) = rows.split_at_mut(t);
        (&a[s], &mut b[0])
    } else {
        let (a, b) = rows.split_at_mut(s);
        (&b[0], &mut a[t])
    }
}

/// Invariant factors of the cokernel Λ^g / rowspan(R), as an ascending
/// divisibility chain with trivial factors dropped. A free rank is reported
/// as repeated factors n.
pub fn cokernel_invariant_factors(relations: &ZnMatrix, gens: usize) -> Vec<u64> {
    let n = relations.n();
    debug_assert_eq!(relations.cols(), gens);
    let mut work = relations.row_vecs();
    let rows = work.len();
    let mut diag: Vec<u64> = Vec::new();
    let mut top = 0usize;
    let mut left = 0usize;
    // Diagonalize with row and column gcd operations. No transform is
    // needed, only the diagonal.
    while top < rows && left < gens {
        // Find any nonzero entry in the remaining block.
        let mut found = None;
        'scan: for i in top..rows {
            for j in left..gens {
                if work[i][j] != 0 {
                    found = Some((i, j));
                    break 'scan;
                }
            }
        }
        let (pi, pj) = match found {
            Some(p) => p,
            None => break,
        };
        work.swap(top, pi);
        for row in work.iter_mut() {
            row.swap(left, pj);
        }
        // Clear column and row at (top, left); column operations can
        // reintroduce entries below, so iterate until both are clear.
        loop {
            let mut dirty = false;
            for i in top + 1..rows {
                if work[i][left] == 0 {
                    continue;
                }
                let a = work[top][left];
                let b = work[i][left];
                let (g, x, y) = unit_combination(a, b, n);
                // row top <- x * top + y * i, then clear row i.
                let combined: Vec<u64> = work[top]
                    .iter()
                    .zip(work[i].iter())
                    .map(|(&p, &q)| {
                        ((x as u128 * p as u128 + y as u128 * q as u128) % n as u128) as u64
                    })
                    .collect();
                work[top] = combined;
                debug_assert_eq!(work[top][left], g);
                let q = work[i][left] / g;
                for k in 0..gens {
                    let sub = (q as u128 * work[top][k] as u128) % n as u128;
                    work[i][k] = ((work[i][k] as u128 + n as u128 - sub) % n as u128) as u64;
                }
                dirty = true;
            }
            for j in left + 1..gens {
                if work[top][j] == 0 {
                    continue;
                }
                let a = work[top][left];
                let b = work[top][j];
                let (g, x, y) = unit_combination(a, b, n);
                // col left <- x * left + y * j, then clear col j.
                for row in work.iter_mut() {
                    let p = row[left];
                    let q = row[j];
                    row[left] =
                        ((x as u128 * p as u128 + y as u128 * q as u128) % n as u128) as u64;
                }
                debug_assert_eq!(work[top][left], g);
                let q = work[top][j] / g;
                for row in work.iter_mut() {
                    let sub = (q as u128 * row[left] as u128) % n as u128;
                    row[j] = ((row[j] as u128 + n as u128 - sub) % n as u128) as u64;
                }
                dirty = true;
            }
            if !dirty {
                break;
            }
        }
        diag.push(canonical_associate(work[top][left], n));
        top += 1;
        left += 1;
    }
    // Enforce the divisibility chain d_1 | d_2 | ... on the diagonal: for a
    // violating pair replace (a, b) by (gcd(a, b, n), canonical of a*b/gcd).
    // This preserves the multiset of elementary divisors of the cokernel.
    loop {
        let mut fixed = true;
        for i in 0..diag.len() {
            for j in i + 1..diag.len() {
                if diag[j] % diag[i] != 0 {
                    let a = diag[i];
                    let b = diag[j];
                    let g = crate::arith::gcd(crate::arith::gcd(a, b), n);
                    let l = ((a as u128 * b as u128 / g as u128) % n as u128) as u64;
                    diag[i] = g;
                    diag[j] = canonical_associate(l, n);
                    fixed = false;
                }
            }
        }
        if fixed {
            break;
        }
    }
    // Diagonal entry d presents Λ/(d): trivial for d = 1, free Z/n for
    // d = 0, and Z/d otherwise (d divides n after normalization). Columns
    // never reached by the diagonal are free.
    let mut factors: Vec<u64> = Vec::new();
    for &d in &diag {
        if d == 1 {
            continue;
        }
        factors.push(if d == 0 { n } else { d });
    }
    for _ in diag.len()..gens {
        factors.push(n);
    }
    factors.sort_unstable();
    // Ascending divisibility chain: after the fix pass every pair divides,
    // so plain sort orders the chain.
    debug_assert!(factors.windows(2).all(|w| w[1] % w[0] == 0));
    factors
}
