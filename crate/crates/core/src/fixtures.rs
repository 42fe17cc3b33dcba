//! Reference channels, unitaries and states with known power values.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance, ZERO};
use crate::states::{max_coherent_state, DensityMatrix, PhaseVector};

/// A dephasing-covariant channel on `C⁴` that raises the l1 coherence of
/// states supported on the first two levels by a factor `2/√3`.
///
/// Entries are built from exact surds, so completeness holds to rounding.
pub fn fixture_dio_counterexample() -> KrausChannel {
    let q = 1.0 / (2.0 * 3f64.sqrt());
    let h = 0.5;
    let s2 = FRAC_1_SQRT_2;
    let s6 = 1.0 / 6f64.sqrt();
    let t6 = 6f64.sqrt() / 3.0;
    let m1: [[f64; 4]; 4] = [[0.0, h, 0.0, 0.0], [q, 0.0, 0.0, 0.0], [-q, 0.0, 0.0, 0.0], [q, 0.0, 0.0, 0.0]];
    let m2: [[f64; 4]; 4] = [[q, 0.0, s2, s6], [0.0, h, 0.0, 0.0], [q, 0.0, 0.0, 0.0], [q, 0.0, 0.0, 0.0]];
    let m3: [[f64; 4]; 4] = [[q, 0.0, -s2, s6], [q, 0.0, 0.0, 0.0], [0.0, h, 0.0, 0.0], [-q, 0.0, 0.0, 0.0]];
    let m4: [[f64; 4]; 4] = [[q, 0.0, 0.0, -t6], [-q, 0.0, 0.0, 0.0], [-q, 0.0, 0.0, 0.0], [0.0, h, 0.0, 0.0]];
    let kraus =
        [m1, m2, m3, m4].iter().map(|m| ComplexMatrix::from_fn(4, 4, |i, j| Complex64::new(m[i][j], 0.0))).collect();
    KrausChannel::new(kraus, Tolerance::new(1e-12).expect("valid")).expect("exact surds are complete")
}

/// `[[1/2, r, 0, 0], [r, 1/2, 0, 0], 0, 0]` for `0 < r ≤ 1/2`.
pub fn fixture_prop2_state(rho12: f64) -> Result<DensityMatrix> {
    if !(rho12 > 0.0 && rho12 <= 0.5) {
        return Err(Error::OutOfRange(format!(
            "off-diagonal entry {rho12} must lie in (0, 1/2] for the state to be positive"
        )));
    }
    let mut m = ComplexMatrix::zeros(4, 4);
    m[(0, 0)] = Complex64::new(0.5, 0.0);
    m[(1, 1)] = Complex64::new(0.5, 0.0);
    m[(0, 1)] = Complex64::new(rho12, 0.0);
    m[(1, 0)] = Complex64::new(rho12, 0.0);
    DensityMatrix::new(m)
}

/// The four-decimal qubit unitary `U₀` and state `ρ₀` whose relative-entropy
/// de-cohering power over all states exceeds the value over maximally
/// coherent inputs.
///
/// `U₀[1][1]` has real part `+0.0868`. With `-0.0868` the rows are not
/// orthogonal (‖U†U − I‖ ≈ 0.09), while `+0.0868` is unitary to 9e-5,
/// consistent with four printed digits.
pub fn fixture_u0_rho0() -> (ComplexMatrix, DensityMatrix) {
    let c = Complex64::new;
    let u0 = ComplexMatrix::from_rows(vec![
        vec![c(0.5645, 0.6351), c(0.4141, 0.3264)],
        vec![c(-0.1452, 0.5069), c(0.0868, -0.8452)],
    ])
    .expect("2x2");
    let rho0 = ComplexMatrix::from_rows(vec![
        vec![c(0.7063, 0.0), c(0.4338, -0.1360)],
        vec![c(0.4338, 0.1360), c(0.2937, 0.0)],
    ])
    .expect("2x2");
    let rho0 = DensityMatrix::with_tolerance(rho0, Tolerance::PRINTED).expect("printed state is valid");
    (u0, rho0)
}

/// Channel with Kraus operators `|Ψ><i|`, `Ψ` the uniform-phase maximally
/// coherent state: every input is sent to `|Ψ><Ψ|`.
pub fn fixture_coherence_preserving_channel(d: usize) -> Result<KrausChannel> {
    if d < 2 {
        return Err(Error::OutOfRange(format!("dimension must be at least 2, got {d}")));
    }
    let psi = max_coherent_state(&PhaseVector::zeros(d));
    let amps = psi.amplitudes();
    let kraus = (0..d).map(|i| ComplexMatrix::from_fn(d, d, |r, c| if c == i { amps[r] } else { ZERO })).collect();
    KrausChannel::new(kraus, Tolerance::new(1e-12).expect("valid"))
}

/// `|+><+|`.
pub fn plus_state() -> DensityMatrix {
    max_coherent_state(&PhaseVector::zeros(2)).to_density()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{has_incoherent_kraus, is_dio, is_mio};
    use crate::linalg::{is_unitary, unitarity_residual};
    use crate::measures::c_l1;
    use crate::states::basis_state;

    #[test]
    fn counterexample_is_complete_and_dio() {
        let phi = fixture_dio_counterexample();
        assert!(phi.completeness_residual() <= 1e-12);
        let dio = is_dio(&phi, Tolerance::DEFAULT).unwrap();
        assert!(dio.member && dio.violation <= 1e-12);
        assert!(is_mio(&phi, Tolerance::DEFAULT).unwrap().member);
        // column 0 of M2 has three nonzero entries
        let io = has_incoherent_kraus(&phi, Tolerance::DEFAULT);
        assert!(!io.member);
        assert!((io.violation - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn prop2_state_amplification() {
        let phi = fixture_dio_counterexample();
        for r in [0.1, 0.3, 0.5] {
            let rho = fixture_prop2_state(r).unwrap();
            assert!((c_l1(&rho) - 2.0 * r).abs() < 1e-15);
            let out = phi.apply(&rho).unwrap();
            assert!((c_l1(&out) - 4.0 * r / 3f64.sqrt()).abs() < 1e-12);
        }
        assert!(fixture_prop2_state(0.51).is_err());
        assert!(fixture_prop2_state(0.0).is_err());
    }

    #[test]
    fn printed_fixtures() {
        let (u0, rho0) = fixture_u0_rho0();
        assert!(is_unitary(&u0, Tolerance::PRINTED));
        assert!(unitarity_residual(&u0) < 1e-4);
        assert!((rho0.matrix().trace().re - 1.0).abs() < 5e-4);
        assert!((rho0.matrix()[(0, 0)].re - 0.7063).abs() < 1e-15);
    }

    #[test]
    fn coherence_preserving_channel() {
        for d in 2..=5 {
            let phi = fixture_coherence_preserving_channel(d).unwrap();
            assert!(phi.completeness_residual() <= 1e-12);
            let out = phi.apply(&basis_state(0, d).unwrap()).unwrap();
            let psi = max_coherent_state(&PhaseVector::zeros(d)).to_density();
            assert!(out.matrix().sub(psi.matrix()).unwrap().max_abs() < 1e-15);
        }
        assert!(fixture_coherence_preserving_channel(1).is_err());
    }
}
