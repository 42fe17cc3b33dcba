//! Random unitaries, states and channels for sweeps and property tests.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::linalg::{ComplexMatrix, Tolerance, ZERO};
use crate::states::{normalized_gram, DensityMatrix, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `rows x cols` matrix with orthonormal columns (`rows ≥ cols`), from
/// Gram–Schmidt on a complex Gaussian matrix.
fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    assert!(rows >= cols);
    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    while columns.len() < cols {
        let mut v: Vec<Complex64> = (0..rows).map(|_| gaussian(rng)).collect();
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for q in &columns {
                let proj: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                v.iter_mut().zip(q).for_each(|(x, a)| *x -= proj * a);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        columns.push(v);
    }
    ComplexMatrix::from_fn(rows, cols, |i, j| columns[j][i])
}

/// Haar-distributed `d x d` unitary.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    random_isometry(d, d, rng)
}

/// Uniformly distributed pure state.
pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let v: Vec<Complex64> = (0..d).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    PureState::new(v.into_iter().map(|z| z / norm).collect()).expect("normalized")
}

/// Full-rank state from the Ginibre ensemble.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let a: Vec<Complex64> = (0..d * d).map(|_| gaussian(rng)).collect();
    DensityMatrix::trusted(normalized_gram(d, &a), Tolerance::DEFAULT)
}

/// Channel with `rank` Kraus operators, cut from a random isometry
/// `C^d -> C^(d·rank)`.
pub fn random_channel<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> KrausChannel {
    let v = random_isometry(d * rank, d, rng);
    let kraus = (0..rank).map(|n| ComplexMatrix::from_fn(d, d, |i, j| v[(n * d + i, j)])).collect();
    KrausChannel::new(kraus, Tolerance::new(1e-9).expect("valid")).expect("isometry is complete")
}

/// A maximally incoherent channel that is not simply dephasing: with
/// random weight `p` it measures in the reference basis after a random
/// channel, otherwise it applies a random phased permutation.
pub fn random_mio_channel<R: Rng + ?Sized>(d: usize, rng: &mut R) -> KrausChannel {
    let rank = rng.random_range(1..=3);
    let inner = random_channel(d, rank, rng);
    let p: f64 = rng.random_range(0.1..0.9);
    let mut kraus = Vec::new();
    for k in inner.kraus() {
        for j in 0..d {
            kraus.push(ComplexMatrix::from_fn(d, d, |r, c| if r == j { k[(r, c)] * p.sqrt() } else { ZERO }));
        }
    }
    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(rng);
    let phases: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    kraus.push(ComplexMatrix::from_fn(d, d, |r, c| {
        if perm[c] == r {
            Complex64::from_polar((1.0 - p).sqrt(), phases[c])
        } else {
            ZERO
        }
    }));
    KrausChannel::new(kraus, Tolerance::new(1e-9).expect("valid")).expect("complete by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::is_mio;
    use crate::linalg::{is_unitary, unitarity_residual};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in 1..=8 {
            let u = random_unitary(d, &mut rng);
            assert!(unitarity_residual(&u) < 1e-13, "d = {d}");
            assert!(is_unitary(&u.adjoint(), Tolerance::DEFAULT));
        }
    }

    #[test]
    fn random_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 2..=5 {
            let rho = random_density(d, &mut rng);
            assert!(DensityMatrix::new(rho.matrix().clone()).is_ok());
            for rank in 1..=4 {
                assert!(random_channel(d, rank, &mut rng).completeness_residual() < 1e-13);
            }
            let mio = random_mio_channel(d, &mut rng);
            assert!(mio.completeness_residual() < 1e-13);
            assert!(is_mio(&mio, Tolerance::DEFAULT).unwrap().member);
        }
    }
}
