//! Coherence quantifiers and the entropies behind them. All logarithms
//! are base 2.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::states::DensityMatrix;

/// Which coherence quantifier a power functional uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoherenceMeasure {
    L1,
    #[serde(rename = "rel-ent")]
    RelativeEntropy,
}

impl CoherenceMeasure {
    /// Largest value the measure takes in dimension `d`.
    pub fn max_value(self, d: usize) -> f64 {
        match self {
            CoherenceMeasure::L1 => d as f64 - 1.0,
            CoherenceMeasure::RelativeEntropy => (d as f64).log2(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoherenceMeasure::L1 => "l1",
            CoherenceMeasure::RelativeEntropy => "rel-ent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::OutOfRange(format!("probability {p} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::OutOfRange(format!("probabilities sum to {total}")));
        }
        Ok(ProbabilityVector { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// `-Σ p log₂ p` with `0 log 0 = 0`, over any nonnegative weights.
pub(crate) fn entropy_bits(weights: &[f64]) -> f64 {
    weights.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

pub fn shannon_entropy(p: &ProbabilityVector) -> f64 {
    entropy_bits(&p.probs)
}

/// `H(x) = -x log₂ x - (1 - x) log₂(1 - x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("binary entropy argument {x} outside [0, 1]")));
    }
    Ok(entropy_bits(&[x, 1.0 - x]))
}

/// Spectrum of a state, with eigenvalues in `[-tol, 0)` clamped to zero.
pub fn clamped_spectrum(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let tol = rho.tolerance();
    let mut eig = hermitian_eigenvalues(rho.matrix(), tol)?;
    for e in &mut eig {
        if *e < 0.0 {
            if *e < -tol.eps() {
                return Err(Error::InvalidState(format!("negative eigenvalue {e:.3e}")));
            }
            *e = 0.0;
        }
    }
    Ok(eig)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_bits(&clamped_spectrum(rho)?))
}

/// Sum of off-diagonal moduli.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let d = rho.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += m[(i, j)].norm();
            }
        }
    }
    s
}

/// `S(Δ(ρ)) - S(ρ)`.
pub fn c_rel_ent(rho: &DensityMatrix) -> Result<f64> {
    let m = rho.matrix();
    let d = rho.dim();
    // A diagonal state has the same spectrum as its dephasing.
    if (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)].norm() == 0.0)) {
        return Ok(0.0);
    }
    let pops: Vec<f64> = (0..d).map(|i| m[(i, i)].re.max(0.0)).collect();
    Ok((entropy_bits(&pops) - von_neumann_entropy(rho)?).max(0.0))
}

pub fn coherence(measure: CoherenceMeasure, rho: &DensityMatrix) -> Result<f64> {
    match measure {
        CoherenceMeasure::L1 => Ok(c_l1(rho)),
        CoherenceMeasure::RelativeEntropy => c_rel_ent(rho),
    }
}
