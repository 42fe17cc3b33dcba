//! Cohering and de-cohering powers of channels.
//!
//! The cohering power is a maximum of a convex function over the simplex of
//! incoherent states, so it is evaluated exactly on the basis projectors.
//! The de-cohering power is a search over the phases of maximally coherent
//! states, and the two generalized powers are multi-start local searches
//! over all states. Searches report what they found, which is a lower bound
//! on the true supremum.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::fixtures::{fixture_prop2_state, fixture_u0_rho0};
use crate::linalg::{one_to_one_norm, unitarity_residual, ComplexMatrix, Tolerance};
use crate::measures::{binary_entropy, coherence, entropy_bits, CoherenceMeasure};
use crate::optimize::{maximize_multistart, LocalOptions};
use crate::states::{
    basis_state, density_from_factor, factor_of, max_coherent_state, normalized_gram, DensityMatrix, PhaseVector,
    StateFactor,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Random starts, on top of the structured seeds.
    pub starts: usize,
    /// Iteration budget per local search.
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { starts: 64, max_iters: 2000, step_tol: 1e-9, value_tol: 1e-9, seed: 0 }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts == 0 {
            return Err(Error::OutOfRange("at least one start is required".into()));
        }
        if !(self.step_tol > 0.0 && self.value_tol > 0.0) {
            return Err(Error::OutOfRange("optimizer tolerances must be positive".into()));
        }
        Ok(())
    }

    fn local(&self) -> LocalOptions {
        LocalOptions { max_iters: self.max_iters, step_tol: self.step_tol, value_tol: self.value_tol }
    }

    /// Independent generator for random start `index`; the first `k`
    /// starts are the same for any configuration with at least `k`.
    fn start_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerKind {
    Cohering,
    GenCohering,
    Decohering,
    GenDecohering,
}

impl PowerKind {
    pub fn name(self) -> &'static str {
        match self {
            PowerKind::Cohering => "cohering",
            PowerKind::GenCohering => "gen-cohering",
            PowerKind::Decohering => "decohering",
            PowerKind::GenDecohering => "gen-decohering",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerReport {
    pub value: f64,
    pub witness: DensityMatrix,
    pub measure: CoherenceMeasure,
    pub kind: PowerKind,
    pub converged: bool,
    pub starts_used: usize,
    /// Index of the winning start (structured seeds come first).
    pub best_start: usize,
    /// Local-search iterations spent by the winning start.
    pub iterations: usize,
}

fn require_square(phi: &KrausChannel) -> Result<usize> {
    if phi.is_square() {
        Ok(phi.dim_in())
    } else {
        Err(Error::DimensionMismatch(format!(
            "power functionals need a square channel, got {} -> {}",
            phi.dim_in(),
            phi.dim_out()
        )))
    }
}

/// `max_i C(Φ(|i><i|))`, lowest index on ties.
pub fn cohering_power(phi: &KrausChannel, measure: CoherenceMeasure) -> Result<PowerReport> {
    let d = require_square(phi)?;
    let mut best: Option<(f64, DensityMatrix)> = None;
    for i in 0..d {
        let e = basis_state(i, d)?;
        let v = coherence(measure, &phi.apply(&e)?)?;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            best = Some((v, e));
        }
    }
    let (value, witness) = best.expect("dimension is positive");
    Ok(PowerReport {
        value,
        witness,
        measure,
        kind: PowerKind::Cohering,
        converged: true,
        starts_used: d,
        best_start: 0,
        iterations: 0,
    })
}

fn require_unitary(u: &ComplexMatrix, tol: Tolerance) -> Result<()> {
    let residual = unitarity_residual(u);
    if residual > tol.eps() {
        Err(Error::NotUnitary { residual })
    } else {
        Ok(())
    }
}

/// `‖U‖²_{1→1} − 1`.
pub fn unitary_cohering_power_l1(u: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    require_unitary(u, tol)?;
    Ok(one_to_one_norm(u).powi(2) - 1.0)
}

/// Largest Shannon entropy of the squared column moduli.
pub fn unitary_cohering_power_rel(u: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    require_unitary(u, tol)?;
    Ok((0..u.cols()).map(|j| entropy_bits(&u.column(j).map(|z| z.norm_sqr()).collect::<Vec<_>>())).fold(0.0, f64::max))
}

fn qubit_moduli(u: &ComplexMatrix, tol: Tolerance) -> Result<(f64, f64)> {
    if u.rows() != 2 || u.cols() != 2 {
        return Err(Error::DimensionMismatch(format!("expected a qubit unitary, got {}x{}", u.rows(), u.cols())));
    }
    require_unitary(u, tol)?;
    Ok((u[(0, 0)].norm(), u[(0, 1)].norm()))
}

/// `1 − ||a|² − |b|²|` with `a = U₀₀`, `b = U₀₁`.
pub fn qubit_unitary_decohering_l1(u: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    let (a, b) = qubit_moduli(u, tol)?;
    Ok(1.0 - (a * a - b * b).abs())
}

/// `1 − H(1/2 + |ab|)`.
pub fn qubit_unitary_decohering_rel(u: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    let (a, b) = qubit_moduli(u, tol)?;
    Ok(1.0 - binary_entropy((0.5 + a * b).min(1.0))?)
}

/// `C(Φ(ρ))` on the factor parametrization `ρ = AA†/tr(AA†)`.
fn state_from_params(d: usize, params: &[f64]) -> Option<DensityMatrix> {
    let a: Vec<Complex64> = params.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
    let m = normalized_gram(d, &a);
    if m.trace().re > 0.0 {
        Some(DensityMatrix::trusted(m, Tolerance::DEFAULT))
    } else {
        None
    }
}

fn eval_gain(phi: &KrausChannel, measure: CoherenceMeasure, rho: &DensityMatrix, kind: PowerKind) -> f64 {
    let out = phi.apply(rho).and_then(|o| coherence(measure, &o));
    let inp = coherence(measure, rho);
    match (out, inp, kind) {
        (Ok(o), Ok(i), PowerKind::GenCohering) => o - i,
        (Ok(o), Ok(i), PowerKind::GenDecohering) => i - o,
        _ => f64::NAN,
    }
}

/// Structured seeds shared by both generalized searches: basis states,
/// Fourier-phase maximally coherent states, normalized adjoint images
/// `Φ†(|i><i|)`, and reference witnesses of matching dimension.
fn structured_seeds(phi: &KrausChannel) -> Vec<DensityMatrix> {
    let d = phi.dim_in();
    let mut seeds: Vec<DensityMatrix> = (0..d).map(|i| basis_state(i, d).expect("in range")).collect();
    for m in 1..d {
        let free: Vec<f64> = (1..d).map(|k| TAU * ((m * k) % d) as f64 / d as f64).collect();
        seeds.push(max_coherent_state(&PhaseVector::from_free(&free)).to_density());
    }
    seeds.push(max_coherent_state(&PhaseVector::zeros(d)).to_density());
    for i in 0..d {
        let img = phi.adjoint_apply(&ComplexMatrix::unit(d, i, i));
        let tr = img.trace().re;
        if tr > 1e-12 {
            seeds.push(DensityMatrix::trusted(img.scale(Complex64::new(1.0 / tr, 0.0)), Tolerance::DEFAULT));
        }
    }
    match d {
        2 => seeds.push(fixture_u0_rho0().1),
        4 => seeds.push(fixture_prop2_state(0.5).expect("valid")),
        _ => {}
    }
    seeds
}

const FACTOR_STEP: f64 = 0.25;

fn random_factor_params(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..2 * d * d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn generalized_power(
    phi: &KrausChannel,
    measure: CoherenceMeasure,
    cfg: &OptimizerConfig,
    kind: PowerKind,
    extra_seeds: Vec<DensityMatrix>,
) -> Result<PowerReport> {
    let d = require_square(phi)?;
    cfg.validate()?;
    let mut starts: Vec<(Vec<f64>, f64)> = structured_seeds(phi)
        .into_iter()
        .chain(extra_seeds)
        .map(|s| (factor_of(&s).to_params(), FACTOR_STEP))
        .collect();
    for k in 0..cfg.starts {
        starts.push((random_factor_params(d, &mut cfg.start_rng(k)), FACTOR_STEP));
    }
    let objective = |p: &[f64]| match state_from_params(d, p) {
        Some(rho) => eval_gain(phi, measure, &rho, kind),
        None => f64::NAN,
    };
    let result = maximize_multistart(&objective, &starts, cfg.local());
    let witness = density_from_factor(&StateFactor::from_params(d, &result.best.x)?);
    let value = eval_gain(phi, measure, &witness, kind);
    Ok(PowerReport {
        value,
        witness,
        measure,
        kind,
        converged: result.best.converged,
        starts_used: starts.len(),
        best_start: result.best_index,
        iterations: result.best.iters,
    })
}

/// `max_ρ C(Φ(ρ)) − C(ρ)`, searched from the basis states (so never below
/// the cohering power), structured seeds, and `cfg.starts` random states.
pub fn generalized_cohering_power(
    phi: &KrausChannel,
    measure: CoherenceMeasure,
    cfg: &OptimizerConfig,
) -> Result<PowerReport> {
    generalized_power(phi, measure, cfg, PowerKind::GenCohering, Vec::new())
}

/// `C_max − min_θ C(Φ(|ψ_θ><ψ_θ|))` over maximally coherent `ψ_θ`.
///
/// The `d − 1` free phases are first scanned on a grid (64 points for a
/// qubit, otherwise up to 32 per axis and at most 4096 points); the best
/// `cfg.starts` grid points and `cfg.starts` random phase vectors are then
/// refined locally.
pub fn decohering_power(phi: &KrausChannel, measure: CoherenceMeasure, cfg: &OptimizerConfig) -> Result<PowerReport> {
    let d = require_square(phi)?;
    cfg.validate()?;
    let c_max = measure.max_value(d);
    let free = d - 1;
    let output_coherence = |angles: &[f64]| -> f64 {
        let psi = max_coherent_state(&PhaseVector::from_free(angles)).to_density();
        phi.apply(&psi).and_then(|o| coherence(measure, &o)).unwrap_or(f64::NAN)
    };
    if free == 0 {
        let witness = max_coherent_state(&PhaseVector::zeros(1)).to_density();
        let value = c_max - output_coherence(&[]);
        return Ok(PowerReport {
            value,
            witness,
            measure,
            kind: PowerKind::Decohering,
            converged: true,
            starts_used: 1,
            best_start: 0,
            iterations: 0,
        });
    }

    let per_axis = if d == 2 { 64 } else { grid_per_axis(free) };
    let total = per_axis.pow(free as u32);
    let spacing = TAU / per_axis as f64;
    let grid_point = |mut idx: usize| -> Vec<f64> {
        let mut angles = vec![0.0; free];
        for a in angles.iter_mut() {
            *a = spacing * (idx % per_axis) as f64;
            idx /= per_axis;
        }
        angles
    };
    let mut scanned: Vec<(usize, f64)> = (0..total).map(|i| (i, output_coherence(&grid_point(i)))).collect();
    scanned.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut starts: Vec<(Vec<f64>, f64)> =
        scanned.iter().take(cfg.starts).map(|&(i, _)| (grid_point(i), spacing / 2.0)).collect();
    for k in 0..cfg.starts {
        let mut rng = cfg.start_rng(k);
        starts.push(((0..free).map(|_| rng.random_range(0.0..TAU)).collect(), PI / 8.0));
    }
    let neg_output = |angles: &[f64]| -output_coherence(angles);
    let result = maximize_multistart(&neg_output, &starts, cfg.local());
    let phases = PhaseVector::from_free(&result.best.x);
    let witness = max_coherent_state(&phases).to_density();
    let value = c_max - coherence(measure, &phi.apply(&witness)?)?;
    Ok(PowerReport {
        value,
        witness,
        measure,
        kind: PowerKind::Decohering,
        converged: result.best.converged,
        starts_used: starts.len(),
        best_start: result.best_index,
        iterations: result.best.iters,
    })
}

/// Largest `n ≤ 32` with `n^free ≤ 4096`.
fn grid_per_axis(free: usize) -> usize {
    (1..=32usize).rev().find(|n| n.checked_pow(free as u32).is_some_and(|t| t <= 4096)).unwrap_or(1)
}

/// `max_ρ C(ρ) − C(Φ(ρ))`. Besides the generalized-cohering seeds, the
/// search starts from the witness of [`decohering_power`], so the result
/// is never below it.
pub fn generalized_decohering_power(
    phi: &KrausChannel,
    measure: CoherenceMeasure,
    cfg: &OptimizerConfig,
) -> Result<PowerReport> {
    let on_maximally_coherent = decohering_power(phi, measure, cfg)?;
    let mut report =
        generalized_power(phi, measure, cfg, PowerKind::GenDecohering, vec![on_maximally_coherent.witness.clone()])?;
    if report.value < on_maximally_coherent.value {
        // the seed is exact; the factor round trip can lose a few ulps
        report.value = on_maximally_coherent.value;
        report.witness = on_maximally_coherent.witness;
    }
    Ok(report)
}

/// Signed margin of an inequality check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub holds: bool,
    pub slack: f64,
}

impl InequalityCheck {
    fn from_slack(slack: f64) -> Self {
        InequalityCheck { holds: slack >= -1e-9, slack }
    }
}

/// `C_l1(U) ≥ max{C_r(U), 2^{C_r(U)} − 1}` for a unitary.
pub fn check_l1_vs_rel_inequality(u: &ComplexMatrix, tol: Tolerance) -> Result<InequalityCheck> {
    let l1 = unitary_cohering_power_l1(u, tol)?;
    let rel = unitary_cohering_power_rel(u, tol)?;
    Ok(InequalityCheck::from_slack(l1 - rel.max(rel.exp2() - 1.0)))
}

/// The same comparison for an arbitrary channel, using the exact cohering
/// powers. Whether it always holds is not known; this only reports.
pub fn probe_l1_vs_rel_inequality(phi: &KrausChannel) -> Result<InequalityCheck> {
    let l1 = cohering_power(phi, CoherenceMeasure::L1)?.value;
    let rel = cohering_power(phi, CoherenceMeasure::RelativeEntropy)?.value;
    Ok(InequalityCheck::from_slack(l1 - rel.max(rel.exp2() - 1.0)))
}

/// `H(x) + H(1/2 + √(x(1−x))) − 1`.
pub fn lemma_entropy_inequality(x: f64) -> Result<f64> {
    let hx = binary_entropy(x)?;
    let t = (0.5 + (x * (1.0 - x)).max(0.0).sqrt()).min(1.0);
    Ok(hx + binary_entropy(t)? - 1.0)
}

/// Cohering minus de-cohering power of a qubit unitary from the closed
/// forms.
pub fn qubit_c_ge_d_check(u: &ComplexMatrix, measure: CoherenceMeasure, tol: Tolerance) -> Result<InequalityCheck> {
    let slack = match measure {
        CoherenceMeasure::L1 => {
            let (a, b) = qubit_moduli(u, tol)?;
            2.0 * a * b - qubit_unitary_decohering_l1(u, tol)?
        }
        CoherenceMeasure::RelativeEntropy => {
            qubit_moduli(u, tol)?;
            unitary_cohering_power_rel(u, tol)? - qubit_unitary_decohering_rel(u, tol)?
        }
    };
    Ok(InequalityCheck::from_slack(slack))
}

/// `(1/√2)(|0><0| + |1><1| + |0><1| − |1><0|) + Σ_{k≥2} |k><k|` in
/// dimension `d ≥ 3`.
pub fn dim_counterexample_unitary(d: usize) -> Result<ComplexMatrix> {
    if d < 3 {
        return Err(Error::OutOfRange(format!("dimension must be at least 3, got {d}")));
    }
    let mut u = ComplexMatrix::identity(d);
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    u[(0, 0)] = h;
    u[(1, 1)] = h;
    u[(0, 1)] = h;
    u[(1, 0)] = -h;
    Ok(u)
}

/// `(2 − √2)(2 − (2 − √2)/d)`.
pub fn dim_counterexample_decohering_l1(d: usize) -> f64 {
    let g = 2.0 - 2f64.sqrt();
    g * (2.0 - g / d as f64)
}

/// Numerical membership probe for channels that never lower coherence:
/// the generalized de-cohering search finds no gain above `tol`.
pub fn ndo_probe(
    phi: &KrausChannel,
    measure: CoherenceMeasure,
    cfg: &OptimizerConfig,
    tol: f64,
) -> Result<(bool, PowerReport)> {
    let report = generalized_decohering_power(phi, measure, cfg)?;
    Ok((report.value <= tol, report))
}
