//! Quantum states: validated density matrices, pure states, and the
//! parametrizations the optimizers walk over.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix, Tolerance, ONE, ZERO};

/// A density matrix: Hermitian, unit trace, positive semidefinite.
///
/// The tolerance it was validated under is kept with the state; it also
/// bounds how negative a spectral value may be before entropy
/// computations reject the state.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
    tol: Tolerance,
}

impl DensityMatrix {
    /// Validates `mat` under the default tolerance.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, Tolerance::DEFAULT)
    }

    pub fn with_tolerance(mat: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState(format!(
                "density matrix must be square, got {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let herm = mat.hermiticity_residual();
        if herm > tol.eps() {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > tol.eps() {
            return Err(Error::InvalidState(format!("trace {:.12} differs from 1", tr.re)));
        }
        let min_eig = hermitian_eigenvalues(&mat, tol)?.last().copied().unwrap_or(0.0);
        if min_eig < -tol.eps() {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(DensityMatrix { mat, tol })
    }

    /// Wraps a matrix that is a state by construction.
    pub(crate) fn trusted(mat: ComplexMatrix, tol: Tolerance) -> Self {
        debug_assert!(mat.is_square());
        DensityMatrix { mat, tol }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// `I / d`.
    pub fn maximally_mixed(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::OutOfRange("dimension must be positive".into()));
        }
        Ok(Self::trusted(ComplexMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0)), Tolerance::DEFAULT))
    }

    /// `λ·self + (1 − λ)·other`, for `λ ∈ [0, 1]`.
    pub fn mix(&self, lambda: f64, other: &DensityMatrix) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::OutOfRange(format!("mixing weight {lambda} outside [0, 1]")));
        }
        let m = self.mat.scale(Complex64::new(lambda, 0.0)).add(&other.mat.scale(Complex64::new(1.0 - lambda, 0.0)))?;
        let tol = if self.tol.eps() >= other.tol.eps() { self.tol } else { other.tol };
        Ok(Self::trusted(m, tol))
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty state vector".into()));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > Tolerance::DEFAULT.eps() {
            return Err(Error::InvalidState(format!("state vector has norm {norm}")));
        }
        Ok(PureState { amplitudes })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `|ψ><ψ|`.
    pub fn to_density(&self) -> DensityMatrix {
        let d = self.dim();
        let a = &self.amplitudes;
        DensityMatrix::trusted(ComplexMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj()), Tolerance::DEFAULT)
    }
}

/// Relative phases of a maximally coherent state, with `θ₀ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    thetas: Vec<f64>,
}

impl PhaseVector {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::OutOfRange("phase vector must be nonempty".into()));
        }
        if thetas[0] != 0.0 {
            return Err(Error::OutOfRange(format!("first phase must be 0, got {}", thetas[0])));
        }
        if let Some(t) = thetas.iter().find(|t| !(0.0..TAU).contains(*t)) {
            return Err(Error::OutOfRange(format!("phase {t} outside [0, 2π)")));
        }
        Ok(PhaseVector { thetas })
    }

    pub fn zeros(d: usize) -> Self {
        PhaseVector { thetas: vec![0.0; d.max(1)] }
    }

    /// Builds a phase vector from the `d − 1` free angles, wrapping each
    /// into `[0, 2π)`.
    pub fn from_free(free: &[f64]) -> Self {
        let mut thetas = Vec::with_capacity(free.len() + 1);
        thetas.push(0.0);
        thetas.extend(free.iter().map(|t| {
            let w = t.rem_euclid(TAU);
            if w >= TAU {
                0.0
            } else {
                w
            }
        }));
        PhaseVector { thetas }
    }

    pub fn dim(&self) -> usize {
        self.thetas.len()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

/// An arbitrary nonzero `d x d` matrix `A`, standing for the state
/// `AA† / tr(AA†)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateFactor {
    dim: usize,
    entries: Vec<Complex64>,
}

impl StateFactor {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "state factor of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().all(|z| *z == ZERO) {
            return Err(Error::InvalidState("state factor is all zero".into()));
        }
        Ok(StateFactor { dim, entries })
    }

    pub fn from_matrix(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch("state factor must be square".into()));
        }
        Self::new(a.rows(), a.entries().to_vec())
    }

    /// Reads `2 d²` reals as interleaved `(re, im)` pairs.
    pub fn from_params(dim: usize, params: &[f64]) -> Result<Self> {
        if params.len() != 2 * dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {} parameters, got {}",
                2 * dim * dim,
                params.len()
            )));
        }
        Self::new(dim, params.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
    }

    pub fn to_params(&self) -> Vec<f64> {
        self.entries.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// `|i><i|` in dimension `d`.
pub fn basis_state(i: usize, d: usize) -> Result<DensityMatrix> {
    if i >= d {
        return Err(Error::OutOfRange(format!("basis index {i} out of range for dimension {d}")));
    }
    Ok(DensityMatrix::trusted(ComplexMatrix::unit(d, i, i), Tolerance::DEFAULT))
}

/// `(1/√d) Σ_k e^{iθ_k} |k>`.
pub fn max_coherent_state(phases: &PhaseVector) -> PureState {
    let amp = 1.0 / (phases.dim() as f64).sqrt();
    PureState { amplitudes: phases.thetas.iter().map(|&t| Complex64::from_polar(amp, t)).collect() }
}

/// Qubit state `(I + xσx + yσy + zσz) / 2`.
pub fn bloch_to_density(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    let r2 = x * x + y * y + z * z;
    if !r2.is_finite() || r2 > 1.0 + 1e-12 {
        return Err(Error::OutOfRange(format!("Bloch vector ({x}, {y}, {z}) outside the unit ball")));
    }
    let m = ComplexMatrix::from_rows(vec![
        vec![Complex64::new((1.0 + z) / 2.0, 0.0), Complex64::new(x / 2.0, -y / 2.0)],
        vec![Complex64::new(x / 2.0, y / 2.0), Complex64::new((1.0 - z) / 2.0, 0.0)],
    ])?;
    Ok(DensityMatrix::trusted(m, Tolerance::DEFAULT))
}

/// Pauli expectations `(tr ρσx, tr ρσy, tr ρσz)` of a qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<(f64, f64, f64)> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch(format!("Bloch vector needs a qubit, got dimension {}", rho.dim())));
    }
    let m = rho.matrix();
    let off = m[(1, 0)];
    Ok((2.0 * off.re, 2.0 * off.im, (m[(0, 0)] - m[(1, 1)]).re))
}

/// `AA† / tr(AA†)`.
pub fn density_from_factor(a: &StateFactor) -> DensityMatrix {
    DensityMatrix::trusted(normalized_gram(a.dim, &a.entries), Tolerance::DEFAULT)
}

/// `AA† / tr(AA†)` over raw row-major entries. Returns the zero matrix
/// when `A = 0`; callers that need a state must rule that out first.
pub(crate) fn normalized_gram(d: usize, a: &[Complex64]) -> ComplexMatrix {
    let mut out = vec![ZERO; d * d];
    let mut tr = 0.0;
    for i in 0..d {
        for j in i..d {
            let mut s = ZERO;
            for k in 0..d {
                s += a[i * d + k] * a[j * d + k].conj();
            }
            if i == j {
                s.im = 0.0;
                tr += s.re;
            }
            out[i * d + j] = s;
            out[j * d + i] = s.conj();
        }
    }
    if tr > 0.0 {
        let inv = 1.0 / tr;
        out.iter_mut().for_each(|z| *z *= inv);
    }
    ComplexMatrix::from_raw(d, d, out)
}

/// A lower-triangular factor `L` with `LL† = ρ`.
///
/// Pivots below `1e-14` are treated as zero, which keeps the recursion
/// valid on rank-deficient states.
pub fn factor_of(rho: &DensityMatrix) -> StateFactor {
    let d = rho.dim();
    let m = rho.matrix();
    let mut l = vec![ZERO; d * d];
    for j in 0..d {
        let pivot = m[(j, j)].re - (0..j).map(|k| l[j * d + k].norm_sqr()).sum::<f64>();
        if pivot <= 1e-14 {
            continue;
        }
        let ljj = pivot.sqrt();
        l[j * d + j] = Complex64::new(ljj, 0.0);
        for i in j + 1..d {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k].conj();
            }
            l[i * d + j] = s / ljj;
        }
    }
    StateFactor { dim: d, entries: l }
}

/// Kronecker product of two states.
pub fn tensor_state(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let tol = if a.tol.eps() >= b.tol.eps() { a.tol } else { b.tol };
    DensityMatrix::trusted(a.mat.kron(&b.mat), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, eps: f64) -> bool {
        a.sub(b).unwrap().max_abs() <= eps
    }

    #[test]
    fn basis_states() {
        assert_eq!(basis_state(0, 2).unwrap().matrix(), &ComplexMatrix::diagonal(&[1.0, 0.0]));
        assert_eq!(basis_state(2, 3).unwrap().matrix(), &ComplexMatrix::diagonal(&[0.0, 0.0, 1.0]));
        assert!(matches!(basis_state(3, 3), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn max_coherent_amplitudes() {
        let h = 1.0 / 2f64.sqrt();
        let plus = max_coherent_state(&PhaseVector::new(vec![0.0, 0.0]).unwrap());
        assert_abs_diff_eq!(plus.amplitudes()[1].re, h, epsilon = 1e-15);
        let minus = max_coherent_state(&PhaseVector::new(vec![0.0, PI]).unwrap());
        assert_abs_diff_eq!(minus.amplitudes()[1].re, -h, epsilon = 1e-15);
        assert_abs_diff_eq!(minus.amplitudes()[1].im, 0.0, epsilon = 1e-15);
        assert!(PureState::new(minus.amplitudes().to_vec()).is_ok());
    }

    #[test]
    fn phase_vector_validation() {
        assert!(PhaseVector::new(vec![0.1, 0.0]).is_err());
        assert!(PhaseVector::new(vec![0.0, TAU]).is_err());
        assert!(PhaseVector::new(vec![]).is_err());
        let p = PhaseVector::from_free(&[-0.5, 7.0]);
        assert_abs_diff_eq!(p.thetas()[1], TAU - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.thetas()[2], 7.0 - TAU, epsilon = 1e-15);
        assert!(PhaseVector::new(p.thetas().to_vec()).is_ok());
    }

    #[test]
    fn bloch_construction() {
        assert!(close(bloch_to_density(0.0, 0.0, 1.0).unwrap().matrix(), &ComplexMatrix::diagonal(&[1.0, 0.0]), 0.0));
        let plus = bloch_to_density(1.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(plus.matrix()[(0, 1)].re, 0.5);
        assert!(bloch_to_density(1.0, 0.1, 0.0).is_err());
        let rho = bloch_to_density(0.3, -0.4, 0.5).unwrap();
        assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
        let (x, y, z) = bloch_vector(&rho).unwrap();
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-12);
        assert_abs_diff_eq!(y, -0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(z, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn factor_parametrization() {
        let mixed = density_from_factor(&StateFactor::from_matrix(&ComplexMatrix::identity(3)).unwrap());
        assert!(close(mixed.matrix(), DensityMatrix::maximally_mixed(3).unwrap().matrix(), 1e-15));
        let p0 = density_from_factor(&StateFactor::from_matrix(&ComplexMatrix::unit(2, 0, 0)).unwrap());
        assert_eq!(p0.matrix(), &ComplexMatrix::diagonal(&[1.0, 0.0]));
        let ones = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let plus = density_from_factor(&StateFactor::from_matrix(&ones).unwrap());
        assert!(close(plus.matrix(), &ones.scale(Complex64::new(0.5, 0.0)), 1e-15));
        assert!(StateFactor::new(2, vec![ZERO; 4]).is_err());
        assert!(StateFactor::from_params(2, &[1.0; 7]).is_err());
    }

    #[test]
    fn factor_of_reconstructs_states() {
        let psi = max_coherent_state(&PhaseVector::new(vec![0.0, 1.0, 2.5]).unwrap()).to_density();
        let back = density_from_factor(&factor_of(&psi));
        assert!(close(back.matrix(), psi.matrix(), 1e-12));
        let e2 = basis_state(2, 4).unwrap();
        assert_eq!(density_from_factor(&factor_of(&e2)).matrix(), e2.matrix());
    }

    #[test]
    fn tensor_products() {
        let a = basis_state(0, 2).unwrap();
        let b = basis_state(1, 2).unwrap();
        assert_eq!(tensor_state(&a, &b).matrix(), &ComplexMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0]));
        let one = DensityMatrix::new(ComplexMatrix::identity(1)).unwrap();
        let rho = bloch_to_density(0.2, 0.1, -0.3).unwrap();
        assert_eq!(tensor_state(&rho, &one), rho);
    }

    #[test]
    fn validation_catches_bad_states() {
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[1.5, -0.5])).is_err());
        let non_herm = ComplexMatrix::from_real_rows(&[&[0.5, 0.1], &[0.0, 0.5]]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::zeros(2, 3)).is_err());
    }
}
