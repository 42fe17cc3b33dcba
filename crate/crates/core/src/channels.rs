//! Kraus-represented channels and the free-operation predicates.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_unitary, sandwich, unitarity_residual, ComplexMatrix, Tolerance, ZERO};
use crate::states::{basis_state, DensityMatrix};

/// A CPTP map `ρ ↦ Σ K ρ K†`, certified by `Σ K†K = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    tol: Tolerance,
}

impl KrausChannel {
    /// Checks shapes and completeness under `tol`.
    pub fn new(kraus: Vec<ComplexMatrix>, tol: Tolerance) -> Result<Self> {
        let first =
            kraus.first().ok_or_else(|| Error::Malformed("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = (first.rows(), first.cols());
        if let Some((n, k)) = kraus.iter().enumerate().find(|(_, k)| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator {n} is {}x{}, expected {dim_out}x{dim_in}",
                k.rows(),
                k.cols()
            )));
        }
        let residual = completeness_residual(&kraus);
        if residual > tol.eps() {
            return Err(Error::Incomplete { residual, tol: tol.eps() });
        }
        Ok(KrausChannel { dim_in, dim_out, kraus, tol })
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel { dim_in: d, dim_out: d, kraus: vec![ComplexMatrix::identity(d)], tol: Tolerance::DEFAULT }
    }

    /// The completely dephasing map `Δ`, Kraus operators `|i><i|`.
    pub fn dephasing(d: usize) -> Self {
        KrausChannel {
            dim_in: d,
            dim_out: d,
            kraus: (0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect(),
            tol: Tolerance::DEFAULT,
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn is_square(&self) -> bool {
        self.dim_in == self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(&self.kraus)
    }

    /// `Σ K X K†` for an arbitrary operator `X`.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "channel acts on dimension {}, operator is {}x{}",
                self.dim_in,
                x.rows(),
                x.cols()
            )));
        }
        Ok(self.apply_unchecked(x))
    }

    pub(crate) fn apply_unchecked(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = vec![ZERO; self.dim_out * self.dim_out];
        for k in &self.kraus {
            let term = sandwich(k, x);
            acc.iter_mut().zip(term.entries()).for_each(|(a, t)| *a += t);
        }
        ComplexMatrix::from_raw(self.dim_out, self.dim_out, acc)
    }

    /// Heisenberg-picture map `X ↦ Σ K† X K`.
    pub fn adjoint_apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = vec![ZERO; self.dim_in * self.dim_in];
        for k in &self.kraus {
            let term = sandwich(&k.adjoint(), x);
            acc.iter_mut().zip(term.entries()).for_each(|(a, t)| *a += t);
        }
        ComplexMatrix::from_raw(self.dim_in, self.dim_in, acc)
    }

    /// `Σ K ρ K†`. The output inherits the looser of the state and
    /// channel tolerances.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.matrix())?;
        let tol = if self.tol.eps() >= rho.tolerance().eps() { self.tol } else { rho.tolerance() };
        Ok(DensityMatrix::trusted(out, tol))
    }

    /// `Φ ⊗ id_extra`, Kraus operators `K ⊗ I`.
    pub fn tensor_with_identity(&self, extra_dim: usize) -> Result<Self> {
        if extra_dim == 0 {
            return Err(Error::OutOfRange("extra dimension must be at least 1".into()));
        }
        let id = ComplexMatrix::identity(extra_dim);
        Ok(KrausChannel {
            dim_in: self.dim_in * extra_dim,
            dim_out: self.dim_out * extra_dim,
            kraus: self.kraus.iter().map(|k| k.kron(&id)).collect(),
            tol: self.tol,
        })
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &KrausChannel) -> Result<Self> {
        if self.dim_out != other.dim_in {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose: output dimension {} vs input dimension {}",
                self.dim_out, other.dim_in
            )));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for b in &other.kraus {
            for a in &self.kraus {
                kraus.push(b.mul(a)?);
            }
        }
        let tol = if self.tol.eps() >= other.tol.eps() { self.tol } else { other.tol };
        Ok(KrausChannel { dim_in: self.dim_in, dim_out: other.dim_out, kraus, tol })
    }

    /// The channel with each Kraus operator replaced by its adjoint. For a
    /// unitary channel this is the inverse.
    pub fn adjoint_kraus(&self) -> Result<Self> {
        KrausChannel::new(self.kraus.iter().map(ComplexMatrix::adjoint).collect(), self.tol)
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("expected a square channel, got {} -> {}", self.dim_in, self.dim_out)))
        }
    }
}

/// `max |(Σ K†K − I)_ij|`.
pub fn completeness_residual(kraus: &[ComplexMatrix]) -> f64 {
    let Some(first) = kraus.first() else {
        return f64::INFINITY;
    };
    let d = first.cols();
    let mut acc = ComplexMatrix::zeros(d, d);
    for k in kraus {
        match k.adjoint().mul(k).and_then(|g| acc.add(&g)) {
            Ok(sum) => acc = sum,
            Err(_) => return f64::INFINITY,
        }
    }
    acc.sub(&ComplexMatrix::identity(d)).map_or(f64::INFINITY, |r| r.max_abs())
}

/// Single-Kraus channel `{U}`.
pub fn unitary_channel(u: &ComplexMatrix, tol: Tolerance) -> Result<KrausChannel> {
    if !u.is_square() || !is_unitary(u, tol) {
        return Err(Error::NotUnitary { residual: unitarity_residual(u) });
    }
    Ok(KrausChannel { dim_in: u.rows(), dim_out: u.rows(), kraus: vec![u.clone()], tol })
}

/// Keeps the diagonal of `ρ`.
pub fn dephase(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let m = rho.matrix();
    DensityMatrix::trusted(
        ComplexMatrix::from_fn(d, d, |i, j| if i == j { Complex64::new(m[(i, i)].re, 0.0) } else { ZERO }),
        rho.tolerance(),
    )
}

/// Outcome of a membership test: the verdict and the largest offending
/// entry modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassCheck {
    pub member: bool,
    pub violation: f64,
}

impl ClassCheck {
    fn from_violation(violation: f64, tol: Tolerance) -> Self {
        ClassCheck { member: violation <= tol.eps(), violation }
    }
}

fn max_off_diagonal(m: &ComplexMatrix) -> f64 {
    let d = m.rows();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn max_diagonal(m: &ComplexMatrix) -> f64 {
    (0..m.rows()).map(|i| m[(i, i)].norm()).fold(0.0, f64::max)
}

/// `Φ(I) ⊂ I`, checked on the basis projectors: the incoherent set is
/// their convex hull and `Φ` is affine on it.
pub fn is_mio(phi: &KrausChannel, tol: Tolerance) -> Result<ClassCheck> {
    phi.require_square()?;
    let d = phi.dim_in;
    let violation = (0..d)
        .into_par_iter()
        .map(|i| {
            let img = phi.apply_unchecked(basis_state(i, d).expect("index in range").matrix());
            max_off_diagonal(&img)
        })
        .reduce(|| 0.0, f64::max);
    Ok(ClassCheck::from_violation(violation, tol))
}

/// `[Δ, Φ] = 0`, checked on the matrix units `|i><j|`: `Φ(|i><i|)` must be
/// diagonal and `Φ(|i><j|)` must have zero diagonal for `i ≠ j`.
pub fn is_dio(phi: &KrausChannel, tol: Tolerance) -> Result<ClassCheck> {
    phi.require_square()?;
    let d = phi.dim_in;
    let violation = (0..d * d)
        .into_par_iter()
        .map(|ij| {
            let (i, j) = (ij / d, ij % d);
            let img = phi.apply_unchecked(&ComplexMatrix::unit(d, i, j));
            if i == j {
                max_off_diagonal(&img)
            } else {
                max_diagonal(&img)
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(ClassCheck::from_violation(violation, tol))
}

/// Whether every given Kraus operator maps basis states to multiples of
/// basis states (at most one entry above `tol` per column). This is a
/// property of the decomposition at hand, not of the channel: a `false`
/// does not rule out some other incoherent decomposition.
pub fn has_incoherent_kraus(phi: &KrausChannel, tol: Tolerance) -> ClassCheck {
    let mut violation: f64 = 0.0;
    for k in &phi.kraus {
        for j in 0..k.cols() {
            let mut mods: Vec<f64> = k.column(j).map(|z| z.norm()).collect();
            mods.sort_by(|a, b| b.total_cmp(a));
            if let Some(&second) = mods.get(1) {
                violation = violation.max(second);
            }
        }
    }
    ClassCheck::from_violation(violation, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelClassReport {
    pub is_mio: bool,
    pub is_dio: bool,
    pub has_incoherent_kraus: bool,
    pub mio_violation: f64,
    pub dio_violation: f64,
    pub incoherent_kraus_violation: f64,
}

pub fn classify(phi: &KrausChannel, tol: Tolerance) -> Result<ChannelClassReport> {
    let mio = is_mio(phi, tol)?;
    let dio = is_dio(phi, tol)?;
    let io = has_incoherent_kraus(phi, tol);
    Ok(ChannelClassReport {
        is_mio: mio.member,
        is_dio: dio.member,
        has_incoherent_kraus: io.member,
        mio_violation: mio.violation,
        dio_violation: dio.violation,
        incoherent_kraus_violation: io.violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::c_l1;
    use crate::states::{bloch_to_density, max_coherent_state, PhaseVector};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn hadamard() -> ComplexMatrix {
        let h = FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[h, h], &[h, -h]]).unwrap()
    }

    #[test]
    fn identity_and_hadamard_application() {
        let rho = bloch_to_density(0.1, 0.2, 0.3).unwrap();
        assert_eq!(KrausChannel::identity(2).apply(&rho).unwrap(), rho);
        let h = unitary_channel(&hadamard(), Tolerance::DEFAULT).unwrap();
        let out = h.apply(&basis_state(0, 2).unwrap()).unwrap();
        let plus = max_coherent_state(&PhaseVector::zeros(2)).to_density();
        assert!(out.matrix().sub(plus.matrix()).unwrap().max_abs() < 1e-15);
        assert!(h.apply(&basis_state(0, 3).unwrap()).is_err());
    }

    #[test]
    fn unitary_channel_rejects_non_unitary() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.5]]).unwrap();
        assert!(matches!(unitary_channel(&m, Tolerance::DEFAULT), Err(Error::NotUnitary { .. })));
        assert_eq!(
            unitary_channel(&ComplexMatrix::identity(3), Tolerance::DEFAULT).unwrap(),
            KrausChannel::identity(3)
        );
    }

    #[test]
    fn dephasing() {
        let diag = DensityMatrix::new(ComplexMatrix::diagonal(&[0.2, 0.8])).unwrap();
        assert_eq!(dephase(&diag), diag);
        let plus = max_coherent_state(&PhaseVector::zeros(2)).to_density();
        let half = ComplexMatrix::diagonal(&[0.5, 0.5]);
        assert!(dephase(&plus).matrix().sub(&half).unwrap().max_abs() < 1e-15);
        assert_eq!(dephase(&dephase(&plus)), dephase(&plus));
        assert_eq!(c_l1(&dephase(&plus)), 0.0);
    }

    #[test]
    fn completeness_is_enforced() {
        let two = ComplexMatrix::identity(2).scale(Complex64::new(2f64.sqrt(), 0.0));
        match KrausChannel::new(vec![two], Tolerance::DEFAULT) {
            Err(Error::Incomplete { residual, .. }) => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        assert!(KrausChannel::new(vec![], Tolerance::DEFAULT).is_err());
        let mixed = vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(3, 3)];
        assert!(matches!(KrausChannel::new(mixed, Tolerance::DEFAULT), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn tensoring_with_identity() {
        let h = unitary_channel(&hadamard(), Tolerance::DEFAULT).unwrap();
        assert_eq!(h.tensor_with_identity(1).unwrap(), h);
        assert_eq!(KrausChannel::identity(3).tensor_with_identity(2).unwrap(), KrausChannel::identity(6));
        assert!(h.tensor_with_identity(2).unwrap().completeness_residual() < 1e-15);
        assert!(h.tensor_with_identity(0).is_err());
    }

    #[test]
    fn composition() {
        let h = unitary_channel(&hadamard(), Tolerance::DEFAULT).unwrap();
        let hh = h.then(&h).unwrap();
        let rho = bloch_to_density(0.3, 0.1, -0.2).unwrap();
        let out = hh.apply(&rho).unwrap();
        assert!(out.matrix().sub(rho.matrix()).unwrap().max_abs() < 1e-15);
        assert!(h.then(&KrausChannel::identity(3)).is_err());
    }

    #[test]
    fn class_predicates_on_simple_channels() {
        let tol = Tolerance::DEFAULT;
        let delta = KrausChannel::dephasing(3);
        assert!(is_mio(&delta, tol).unwrap().member);
        assert!(is_dio(&delta, tol).unwrap().member);
        assert!(has_incoherent_kraus(&delta, tol).member);

        assert!(is_dio(&KrausChannel::identity(4), tol).unwrap().member);

        let h = unitary_channel(&hadamard(), tol).unwrap();
        let mio = is_mio(&h, tol).unwrap();
        assert!(!mio.member);
        assert!((mio.violation - 0.5).abs() < 1e-15);
        assert!(!is_dio(&h, tol).unwrap().member);
        assert!(!has_incoherent_kraus(&h, tol).member);

        let perm = ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]).unwrap();
        let report = classify(&unitary_channel(&perm, tol).unwrap(), tol).unwrap();
        assert!(report.is_mio && report.is_dio && report.has_incoherent_kraus);
    }

    #[test]
    fn non_square_channels_are_rejected_by_class_tests() {
        let iso = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let phi = KrausChannel::new(vec![iso], Tolerance::DEFAULT).unwrap();
        assert!(is_mio(&phi, Tolerance::DEFAULT).is_err());
        assert!(is_dio(&phi, Tolerance::DEFAULT).is_err());
    }
}
