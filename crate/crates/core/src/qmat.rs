//! Small dense complex linear algebra.
//!
//! Everything in the crate is at most 8x8 on the operator side, so matrices
//! are plain row-major `Vec<Complex64>` with explicit shapes. Basis orders
//! used throughout:
//!
//! * atom: `(|g>, |e>)`
//! * apparatus fiber: `(|0>, |1>)`
//! * `kron(a, b)`: the left factor is the slower-varying index, so
//!   atom (x) apparatus is ordered `(g0, g1, e0, e1)`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default tolerance for exact-algebra checks.
pub const TOLERANCE: f64 = 1e-12;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Real-valued matrix from row-major entries. Panics on a length mismatch.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "from_real: wrong entry count");
        Self {
            rows,
            cols,
            data: entries.iter().map(|&x| re(x)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(self.mismatch("matmul", other));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> ComplexMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Kronecker product; `self` is the slower-varying factor.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            self.get(i / other.rows, j / other.cols) * other.get(i % other.rows, j % other.cols)
        })
    }

    pub fn trace(&self) -> Result<Complex64> {
        self.require_square("trace")?;
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// Traces out subsystem `which` of a square matrix acting on
    /// `dims[0] (x) dims[1] (x) ...` (first factor slowest).
    pub fn partial_trace(&self, dims: &[usize], which: usize) -> Result<ComplexMatrix> {
        self.require_square("partial_trace")?;
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != self.rows || which >= dims.len() {
            return Err(Error::FactorizationMismatch {
                dims: dims.to_vec(),
                rows: self.rows,
            });
        }
        let inner: usize = dims[which + 1..].iter().product();
        let traced = dims[which];
        let outer: usize = dims[..which].iter().product();
        let kept = outer * inner;
        // index = (o * traced + k) * inner + n
        Ok(Self::from_fn(kept, kept, |i, j| {
            let (oi, ni) = (i / inner, i % inner);
            let (oj, nj) = (j / inner, j % inner);
            (0..traced)
                .map(|k| {
                    self.get(
                        (oi * traced + k) * inner + ni,
                        (oj * traced + k) * inner + nj,
                    )
                })
                .sum()
        }))
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn try_add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with("add", other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with("sub", other, |a, b| a - b)
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.matmul(other)?.try_sub(&other.matmul(self)?)
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.matmul(other)?.try_add(&other.matmul(self)?)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> Result<f64> {
        if self.shape() != other.shape() {
            return Err(self.mismatch("max_abs_diff", other));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        self.max_abs_diff(other).is_ok_and(|d| d <= tol)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0_f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn require_hermitian(&self, tol: f64) -> Result<()> {
        self.require_square("hermitian check")?;
        let deviation = self.hermitian_deviation();
        if deviation > tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    /// Max deviation of `M^dag M` from the identity (isometry defect).
    pub fn isometry_defect(&self) -> f64 {
        let gram = &self.adjoint() * self;
        gram.max_abs_diff(&Self::identity(self.cols))
            .unwrap_or(f64::INFINITY)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && self.isometry_defect() <= tol && self.adjoint().isometry_defect() <= tol
    }

    /// Copies the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> ComplexMatrix {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "block out of range"
        );
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    /// Assembles a matrix from a grid of blocks. Blocks in one grid row must
    /// share a row count, blocks in one grid column a column count.
    pub fn from_blocks(grid: &[Vec<ComplexMatrix>]) -> Result<ComplexMatrix> {
        let row_heights: Vec<usize> = grid
            .iter()
            .map(|row| row.first().map_or(0, |b| b.rows))
            .collect();
        let col_widths: Vec<usize> = grid
            .first()
            .map(|row| row.iter().map(|b| b.cols).collect())
            .unwrap_or_default();
        for (bi, row) in grid.iter().enumerate() {
            if row.len() != col_widths.len() {
                return Err(Error::InvalidShape("ragged block grid".into()));
            }
            for (bj, b) in row.iter().enumerate() {
                if b.rows != row_heights[bi] || b.cols != col_widths[bj] {
                    return Err(Error::InvalidShape(format!(
                        "block ({bi},{bj}) is {}x{}, expected {}x{}",
                        b.rows, b.cols, row_heights[bi], col_widths[bj]
                    )));
                }
            }
        }
        let rows: usize = row_heights.iter().sum();
        let cols: usize = col_widths.iter().sum();
        let mut out = Self::zeros(rows.max(1), cols.max(1));
        let mut r0 = 0;
        for (bi, row) in grid.iter().enumerate() {
            let mut c0 = 0;
            for (bj, b) in row.iter().enumerate() {
                for i in 0..b.rows {
                    for j in 0..b.cols {
                        out[(r0 + i, c0 + j)] = b.get(i, j);
                    }
                }
                c0 += col_widths[bj];
            }
            r0 += row_heights[bi];
        }
        Ok(out)
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// Cyclic Jacobi on the real symmetric embedding `[[A, -B], [B, A]]` of
    /// `A + iB`; every eigenvalue of the embedding appears twice, so every
    /// other value is kept. Meant for the small matrices used here.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian(1e-9)?;
        let n = self.rows;
        let m = 2 * n;
        let mut a = vec![0.0_f64; m * m];
        for i in 0..n {
            for j in 0..n {
                let z = self.get(i, j);
                a[i * m + j] = z.re;
                a[(i + n) * m + j + n] = z.re;
                a[i * m + j + n] = -z.im;
                a[(i + n) * m + j] = z.im;
            }
        }
        for _sweep in 0..100 {
            let off: f64 = (0..m)
                .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i * m + j] * a[i * m + j])
                .sum();
            if off < 1e-30 {
                break;
            }
            for p in 0..m {
                for q in p + 1..m {
                    let apq = a[p * m + q];
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let cs = 1.0 / (t * t + 1.0).sqrt();
                    let sn = t * cs;
                    for k in 0..m {
                        let akp = a[k * m + p];
                        let akq = a[k * m + q];
                        a[k * m + p] = cs * akp - sn * akq;
                        a[k * m + q] = sn * akp + cs * akq;
                    }
                    for k in 0..m {
                        let apk = a[p * m + k];
                        let aqk = a[q * m + k];
                        a[p * m + k] = cs * apk - sn * aqk;
                        a[q * m + k] = sn * apk + cs * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..m).map(|i| a[i * m + i]).collect();
        eig.sort_by(|x, y| x.total_cmp(y));
        Ok(eig.into_iter().step_by(2).collect())
    }

    fn zip_with(
        &self,
        op: &'static str,
        other: &ComplexMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexMatrix> {
        if self.shape() != other.shape() {
            return Err(self.mismatch(op, other));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    fn mismatch(&self, op: &'static str, other: &ComplexMatrix) -> Error {
        Error::DimensionMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }

    fn require_square(&self, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op,
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of range"
        );
        &mut self.data[i * self.cols + j]
    }
}

// Operator sugar for internal code where shapes are fixed by construction.
// Mismatches are programming errors and panic with both shapes.

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-ONE)
    }
}

impl Mul<Complex64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, s: Complex64) -> ComplexMatrix {
        self.scale(s)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, s: f64) -> ComplexMatrix {
        self.scale(re(s))
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.get(i, j);
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// State vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket {
    amplitudes: Vec<Complex64>,
}

impl Ket {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidShape("ket dimension must be positive".into()));
        }
        Ok(Self { amplitudes })
    }

    /// Basis vector `|index>` of dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dim {dim}"
        );
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// `None` for the zero vector.
    pub fn normalized(&self) -> Option<Ket> {
        let n = self.norm();
        (n > 0.0).then(|| Ket {
            amplitudes: self.amplitudes.iter().map(|a| a / n).collect(),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner: dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self><other|`.
    pub fn outer(&self, other: &Ket) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), other.dim(), |i, j| {
            self.amplitudes[i] * other.amplitudes[j].conj()
        })
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.outer(self)
    }

    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), 1, |i, _| self.amplitudes[i])
    }

    pub fn apply(op: &ComplexMatrix, ket: &Ket) -> Result<Ket> {
        let col = op.matmul(&ket.as_column())?;
        Ok(Ket {
            amplitudes: col.entries().to_vec(),
        })
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        let mut amplitudes = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amplitudes.push(a * b);
            }
        }
        Ket { amplitudes }
    }

    /// `<self|X|self>`.
    pub fn expectation(&self, x: &ComplexMatrix) -> Result<Complex64> {
        let xv = Ket::apply(x, self)?;
        Ok(self.inner(&xv))
    }
}
