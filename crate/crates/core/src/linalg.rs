//! Dense complex matrices and the handful of linear-algebra routines the
//! coherence computations need: products, adjoints, Kronecker products,
//! a Hermitian eigenvalue solver and the induced `1 -> 1` norm.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used for every matrix entry.
pub type ComplexScalar = Complex64;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Builds a finite complex scalar.
pub fn scalar(re: f64, im: f64) -> Result<ComplexScalar> {
    if re.is_finite() && im.is_finite() {
        Ok(Complex64::new(re, im))
    } else {
        Err(Error::NonFinite { row: 0, col: 0 })
    }
}

/// Numerical tolerance, `0 < eps < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance(f64);

impl Tolerance {
    /// Default tolerance for exact inputs.
    pub const DEFAULT: Tolerance = Tolerance(1e-10);
    /// Tolerance for inputs given to four printed decimal digits.
    pub const PRINTED: Tolerance = Tolerance(5e-4);

    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps < 1.0 {
            Ok(Tolerance(eps))
        } else {
            Err(Error::OutOfRange(format!("tolerance must lie in (0, 1), got {eps}")))
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::DimensionMismatch(format!("matrix must be at least 1x1, got {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite { row: k / cols, col: k % cols });
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Self::new(n, m, rows.into_iter().flatten().collect())
    }

    /// Builds a real matrix from nested rows.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |i, j| if i == j { ONE } else { ZERO })
    }

    /// Diagonal matrix with the given real entries.
    pub fn diagonal(entries: &[f64]) -> Self {
        let d = entries.len();
        Self::from_fn(d, d, |i, j| if i == j { Complex64::new(entries[i], 0.0) } else { ZERO })
    }

    /// Matrix unit `|i><j|` of size `d x d`.
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m[(i, j)] = ONE;
        m
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        ComplexMatrix { rows, cols, data }
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

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        mat_product(self, other)
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        adjoint(self)
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &ComplexMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(ComplexMatrix::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, c: Complex64) -> ComplexMatrix {
        ComplexMatrix::from_raw(self.rows, self.cols, self.data.iter().map(|&z| z * c).collect())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |a_ij - conj(a_ji)|`; infinite for non-square input.
    pub fn hermiticity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        ComplexMatrix::from_fn(r, c, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.rows).map(move |i| self[(i, j)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn mat_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = vec![ZERO; a.rows * b.cols];
    for i in 0..a.rows {
        let row = &mut out[i * b.cols..(i + 1) * b.cols];
        for k in 0..a.cols {
            let aik = a.data[i * a.cols + k];
            if aik == ZERO {
                continue;
            }
            let brow = &b.data[k * b.cols..(k + 1) * b.cols];
            for (o, &bkj) in row.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(ComplexMatrix::from_raw(a.rows, b.cols, out))
}

/// Conjugate transpose.
pub fn adjoint(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols, a.rows, |i, j| a[(j, i)].conj())
}

/// `a · b · a†`, the congruence used by every Kraus application.
pub(crate) fn sandwich(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let ab = mat_product(a, b).expect("sandwich: inner dimensions");
    let mut out = vec![ZERO; a.rows * a.rows];
    for i in 0..a.rows {
        for j in 0..a.rows {
            let mut s = ZERO;
            for k in 0..a.cols {
                s += ab.data[i * ab.cols + k] * a.data[j * a.cols + k].conj();
            }
            out[i * a.rows + j] = s;
        }
    }
    ComplexMatrix::from_raw(a.rows, a.rows, out)
}

/// Eigenvalues of a Hermitian matrix in descending order.
///
/// Cyclic complex Jacobi: each rotation first removes the phase of the
/// pivot `h_pq` and then applies the real symmetric Jacobi rotation, so
/// the iterate stays Hermitian with a real diagonal. Sweeps stop once the
/// off-diagonal Frobenius norm drops below `tol.eps()` (scaled by the
/// matrix norm when that exceeds one), and fail after `100 d²` sweeps.
pub fn hermitian_eigenvalues(h: &ComplexMatrix, tol: Tolerance) -> Result<Vec<f64>> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch(format!("eigenvalues need a square matrix, got {}x{}", h.rows, h.cols)));
    }
    let residual = h.hermiticity_residual();
    if residual > tol.eps() {
        return Err(Error::NotHermitian { residual });
    }
    let n = h.rows;
    if n == 2 {
        // closed form; the qubit searches call this in their inner loop
        let (p, q) = (h.data[0].re, h.data[3].re);
        let mean = 0.5 * (p + q);
        let radius = (0.5 * (p - q)).hypot(h.data[1].norm());
        return Ok(vec![mean + radius, mean - radius]);
    }
    let mut a = h.data.clone();
    for i in 0..n {
        a[i * n + i] = Complex64::new(a[i * n + i].re, 0.0);
    }
    let threshold = tol.eps() * h.frobenius_norm().max(1.0);
    let off_norm = |a: &[Complex64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let max_sweeps = 100 * n * n;
    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off < threshold {
            break;
        }
        if sweeps >= max_sweeps {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let pc = phase.conj();
                // A <- A J
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = akp * c - akq * pc * s;
                    a[k * n + q] = akp * s + akq * pc * c;
                }
                // A <- J† A
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = apk * c - aqk * phase * s;
                    a[q * n + k] = apk * s + aqk * phase * c;
                }
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = Complex64::new(app - t * r, 0.0);
                a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Induced `1 -> 1` norm: the largest column sum of entry moduli.
pub fn one_to_one_norm(m: &ComplexMatrix) -> f64 {
    (0..m.cols).map(|j| m.column(j).map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `max |(m† m - I)_ij|`; infinite for non-square input.
pub fn unitarity_residual(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let g = mat_product(&m.adjoint(), m).expect("square");
    g.sub(&ComplexMatrix::identity(m.rows)).expect("same shape").max_abs()
}

pub fn is_unitary(m: &ComplexMatrix, tol: Tolerance) -> bool {
    unitarity_residual(m) <= tol.eps()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::from_rows(vec![vec![ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), ZERO]]).unwrap()
    }

    fn hadamard() -> ComplexMatrix {
        let h = FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap()
    }

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= eps
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(ComplexMatrix::new(2, 2, vec![ZERO; 3]).is_err());
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert_eq!(ComplexMatrix::new(1, 2, vec![ZERO, c(f64::NAN, 0.0)]), Err(Error::NonFinite { row: 0, col: 1 }));
        assert!(scalar(f64::INFINITY, 0.0).is_err());
        assert!(Tolerance::new(0.0).is_err());
        assert!(Tolerance::new(1.0).is_err());
    }

    #[test]
    fn products() {
        let x = pauli_x();
        assert_eq!(ComplexMatrix::identity(2).mul(&x).unwrap(), x);
        assert_eq!(x.mul(&x).unwrap(), ComplexMatrix::identity(2));
        let h = hadamard();
        assert!(close(&h.mul(&h).unwrap(), &ComplexMatrix::identity(2), 1e-15));
        let wide = ComplexMatrix::zeros(2, 3);
        assert!(matches!(wide.mul(&wide), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn adjoints() {
        let s = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 5.0]]).unwrap();
        assert_eq!(s.adjoint(), s);
        assert_eq!(pauli_y().adjoint(), pauli_y());
        let raise = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let lower = ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(raise.adjoint(), lower);
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let e = hermitian_eigenvalues(&ComplexMatrix::identity(3), Tolerance::DEFAULT).unwrap();
        assert_eq!(e, vec![1.0, 1.0, 1.0]);
        let e = hermitian_eigenvalues(&pauli_x(), Tolerance::DEFAULT).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], -1.0, epsilon = 1e-14);
        let e = hermitian_eigenvalues(&pauli_y(), Tolerance::DEFAULT).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e[1], -1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_of_printed_state() {
        // trace 1, det = 0.7063*0.2937 - |0.4338 - 0.1360i|^2
        let rho = ComplexMatrix::from_rows(vec![
            vec![c(0.7063, 0.0), c(0.4338, -0.1360)],
            vec![c(0.4338, 0.1360), c(0.2937, 0.0)],
        ])
        .unwrap();
        let det = 0.7063 * 0.2937 - (0.4338f64.powi(2) + 0.1360f64.powi(2));
        let disc = (1.0 - 4.0 * det).sqrt();
        let e = hermitian_eigenvalues(&rho, Tolerance::DEFAULT).unwrap();
        assert_abs_diff_eq!(e[0], (1.0 + disc) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], (1.0 - disc) / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[0], 0.99924, epsilon = 1e-5);
        assert_abs_diff_eq!(e[1], 0.00076, epsilon = 1e-5);
    }

    #[test]
    fn eigenvalues_of_complex_3x3() {
        // Characteristic polynomial of [[2, i, 0], [-i, 2, 1], [0, 1, 3]]
        // evaluated at each eigenvalue must vanish.
        let m = ComplexMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(0.0, 1.0), ZERO],
            vec![c(0.0, -1.0), c(2.0, 0.0), c(1.0, 0.0)],
            vec![ZERO, c(1.0, 0.0), c(3.0, 0.0)],
        ])
        .unwrap();
        let e = hermitian_eigenvalues(&m, Tolerance::DEFAULT).unwrap();
        for &x in &e {
            let p = (2.0 - x) * ((2.0 - x) * (3.0 - x) - 1.0) - (3.0 - x);
            assert_abs_diff_eq!(p, 0.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(e.iter().sum::<f64>(), 7.0, epsilon = 1e-12);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&m, Tolerance::DEFAULT), Err(Error::NotHermitian { .. })));
        assert!(hermitian_eigenvalues(&ComplexMatrix::zeros(2, 3), Tolerance::DEFAULT).is_err());
    }

    #[test]
    fn norms_and_unitarity() {
        assert_eq!(one_to_one_norm(&ComplexMatrix::identity(4)), 1.0);
        assert_abs_diff_eq!(one_to_one_norm(&hadamard()), 2f64.sqrt(), epsilon = 1e-15);
        assert!(is_unitary(&hadamard(), Tolerance::DEFAULT));
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.5]]).unwrap();
        assert!(!is_unitary(&m, Tolerance::DEFAULT));
        assert!(!is_unitary(&ComplexMatrix::zeros(2, 3), Tolerance::DEFAULT));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let a = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let b = ComplexMatrix::diagonal(&[0.0, 1.0]);
        assert_eq!(a.kron(&b), ComplexMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0]));
    }
}
