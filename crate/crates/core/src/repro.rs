//! Reproduction harness: every reference claim as a list of numeric checks.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{is_dio, unitary_channel, KrausChannel};
use crate::error::{Error, Result};
use crate::fixtures::{
    fixture_coherence_preserving_channel, fixture_dio_counterexample, fixture_prop2_state, fixture_u0_rho0, plus_state,
};
use crate::linalg::{ComplexMatrix, Tolerance};
use crate::measures::{c_l1, c_rel_ent, CoherenceMeasure};
use crate::powers::{
    check_l1_vs_rel_inequality, cohering_power, decohering_power, dim_counterexample_decohering_l1,
    dim_counterexample_unitary, generalized_cohering_power, generalized_decohering_power, lemma_entropy_inequality,
    qubit_c_ge_d_check, qubit_unitary_decohering_l1, qubit_unitary_decohering_rel, OptimizerConfig,
};
use crate::random::{random_channel, random_mio_channel, random_unitary};
use crate::states::tensor_state;

/// Ids accepted by [`reproduce`], in report order.
pub const PROP_IDS: [&str; 11] = ["1", "2", "4", "5", "6", "v-l1", "v-rel", "eq16", "eq26", "lemma", "nio-r"];

const EXACT: f64 = 1e-9;
const PRINTED: f64 = 5e-4;
const OPTIMIZER: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// `|computed − expected| ≤ tolerance`
    Equal,
    /// `computed ≥ expected − tolerance`
    AtLeast,
    /// `computed ≤ expected + tolerance`
    AtMost,
    /// `computed > expected`, strictly
    Exceeds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub relation: Relation,
    pub expected: f64,
    /// Where the expected value comes from: `exact`, `printed`, `closed form`
    /// or `bound`.
    pub source: &'static str,
    pub computed: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn new(
        name: impl Into<String>,
        relation: Relation,
        expected: f64,
        source: &'static str,
        computed: f64,
        tolerance: f64,
    ) -> Self {
        let pass = match relation {
            Relation::Equal => (computed - expected).abs() <= tolerance,
            Relation::AtLeast => computed >= expected - tolerance,
            Relation::AtMost => computed <= expected + tolerance,
            Relation::Exceeds => computed > expected,
        };
        Check { name: name.into(), relation, expected, source, computed, tolerance, pass }
    }

    fn equal(name: impl Into<String>, expected: f64, source: &'static str, computed: f64, tolerance: f64) -> Self {
        Self::new(name, Relation::Equal, expected, source, computed, tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproReport {
    pub id: &'static str,
    pub description: &'static str,
    pub checks: Vec<Check>,
    pub pass: bool,
    pub wall_time_ms: f64,
}

/// Optimizer settings plus the number of random instances per sampled check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproConfig {
    pub optimizer: OptimizerConfig,
    pub samples: usize,
}

impl Default for ReproConfig {
    fn default() -> Self {
        ReproConfig { optimizer: OptimizerConfig::default(), samples: 10 }
    }
}

impl ReproConfig {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.optimizer.seed);
        rng.set_stream(stream);
        rng
    }
}

fn describe(id: &str) -> Option<&'static str> {
    Some(match id {
        "1" => "qubit channels: generalized l1 cohering power equals the cohering power; qubit MIO cannot raise l1 coherence",
        "2" => "a DIO channel on C^4 raises l1 coherence by 2/sqrt(3); the gain doubles on C^4 (x) C^2 with |+><+|",
        "4" => "qubit unitaries: de-cohering closed forms and D^(U) = C^(U^dagger), both measures",
        "5" => "de-cohering over maximally coherent inputs can fall well short of the generalized value; NDO example",
        "6" => "printed qubit unitary U0 and state rho0: relative-entropy de-cohering gap",
        "v-l1" => "l1: C >= D for qubit unitaries, reversed by a block rotation for d = 3, 4",
        "v-rel" => "relative entropy: C >= D for qubit unitaries",
        "eq16" => "unitaries: C_l1 >= max{C_r, 2^C_r - 1}",
        "eq26" => "qubit unitaries: D^_l1 = C^_l1 = C_l1 >= D_l1",
        "lemma" => "H(x) + H(1/2 + sqrt(x(1-x))) >= 1 with equality only at 0, 1/2, 1",
        "nio-r" => "MIO channels never raise relative-entropy coherence",
        _ => return None,
    })
}

fn unitary(u: &ComplexMatrix) -> KrausChannel {
    unitary_channel(u, Tolerance::DEFAULT).expect("Haar sample is unitary")
}

fn prop1(cfg: &ReproConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(1);
    let mut checks = Vec::new();
    let (mut worst, mut worst_mio): (f64, f64) = (0.0, 0.0);
    for i in 0..cfg.samples {
        let phi = random_channel(2, 1 + i % 4, &mut rng);
        let exact = cohering_power(&phi, CoherenceMeasure::L1)?.value;
        let gen = generalized_cohering_power(&phi, CoherenceMeasure::L1, &cfg.optimizer)?.value;
        worst = worst.max((gen - exact).abs());
        let mio = random_mio_channel(2, &mut rng);
        worst_mio = worst_mio.max(generalized_cohering_power(&mio, CoherenceMeasure::L1, &cfg.optimizer)?.value);
    }
    checks.push(Check::equal("max |C^_l1 - C_l1| over random channels", 0.0, "exact", worst, OPTIMIZER));
    checks.push(Check::new("max C^_l1 over random qubit MIO", Relation::AtMost, 0.0, "exact", worst_mio, OPTIMIZER));
    Ok(checks)
}

fn prop2(_: &ReproConfig) -> Result<Vec<Check>> {
    let phi = fixture_dio_counterexample();
    let dio = is_dio(&phi, Tolerance::DEFAULT)?;
    let mut checks = vec![Check::new("DIO violation", Relation::AtMost, 0.0, "exact", dio.violation, 1e-12)];
    for r in [0.1, 0.3, 0.5] {
        let rho = fixture_prop2_state(r)?;
        let out = c_l1(&phi.apply(&rho)?);
        checks.push(Check::equal(format!("C_l1(phi(rho)) at rho12 = {r}"), 4.0 * r / 3f64.sqrt(), "exact", out, EXACT));
        checks.push(Check::new(
            format!("gain over C_l1(rho) = {}", 2.0 * r),
            Relation::Exceeds,
            0.0,
            "bound",
            out - c_l1(&rho),
            0.0,
        ));
    }
    let rho = fixture_prop2_state(0.3)?;
    let sigma = plus_state();
    let gain4 = c_l1(&phi.apply(&rho)?) - c_l1(&rho);
    let rho8 = tensor_state(&rho, &sigma);
    let gain8 = c_l1(&phi.tensor_with_identity(2)?.apply(&rho8)?) - c_l1(&rho8);
    checks.push(Check::equal(
        "gain of phi (x) id on rho (x) |+><+|",
        gain4 * (c_l1(&sigma) + 1.0),
        "exact",
        gain8,
        EXACT,
    ));
    checks.push(Check::new("gain increase over d = 4", Relation::Exceeds, 0.0, "bound", gain8 - gain4, 0.0));
    Ok(checks)
}

fn prop4(cfg: &ReproConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(4);
    let tol = Tolerance::DEFAULT;
    let mut closed = [0.0f64; 2];
    let mut dual = [0.0f64; 2];
    for _ in 0..cfg.samples {
        let u = random_unitary(2, &mut rng);
        let (phi, adj) = (unitary(&u), unitary(&u.adjoint()));
        for (k, (measure, formula)) in [
            (CoherenceMeasure::L1, qubit_unitary_decohering_l1(&u, tol)?),
            (CoherenceMeasure::RelativeEntropy, qubit_unitary_decohering_rel(&u, tol)?),
        ]
        .into_iter()
        .enumerate()
        {
            let d = decohering_power(&phi, measure, &cfg.optimizer)?.value;
            closed[k] = closed[k].max((d - formula).abs());
            let d_hat = generalized_decohering_power(&phi, measure, &cfg.optimizer)?.value;
            let c_hat = generalized_cohering_power(&adj, measure, &cfg.optimizer)?.value;
            dual[k] = dual[k].max((d_hat - c_hat).abs());
        }
    }
    Ok(vec![
        Check::equal("max |D_l1 - (1 - ||a|^2 - |b|^2|)|", 0.0, "closed form", closed[0], 1e-6),
        Check::equal("max |D_r - (1 - H(1/2 + |ab|))|", 0.0, "closed form", closed[1], 1e-6),
        Check::equal("max |D^_l1(U) - C^_l1(U^dagger)|", 0.0, "exact", dual[0], OPTIMIZER),
        Check::equal("max |D^_r(U) - C^_r(U^dagger)|", 0.0, "exact", dual[1], OPTIMIZER),
    ])
}

fn prop5(cfg: &ReproConfig) -> Result<Vec<Check>> {
    // a real rotation by t: D_l1 = 1 - cos 2t while D^_l1 = C_l1 = sin 2t
    let t: f64 = 0.3;
    let u = ComplexMatrix::from_real_rows(&[&[t.cos(), t.sin()], &[-t.sin(), t.cos()]])?;
    let phi = unitary(&u);
    let d = decohering_power(&phi, CoherenceMeasure::L1, &cfg.optimizer)?.value;
    let d_hat = generalized_decohering_power(&phi, CoherenceMeasure::L1, &cfg.optimizer)?.value;
    let ndo = fixture_coherence_preserving_channel(3)?;
    let ndo_l1 = generalized_decohering_power(&ndo, CoherenceMeasure::L1, &cfg.optimizer)?.value;
    Ok(vec![
        Check::equal("D_l1 of rotation by 0.3", 1.0 - (2.0 * t).cos(), "closed form", d, 1e-6),
        Check::equal("D^_l1 of rotation by 0.3", (2.0 * t).sin(), "closed form", d_hat, OPTIMIZER),
        Check::new("D^_l1 - D_l1", Relation::AtLeast, 0.1, "bound", d_hat - d, 0.0),
        Check::new("D^_l1 of the coherence-preserving channel, d = 3", Relation::AtMost, 0.0, "exact", ndo_l1, 1e-6),
    ])
}

fn prop6(cfg: &ReproConfig) -> Result<Vec<Check>> {
    let (u0, rho0) = fixture_u0_rho0();
    let phi = unitary_channel(&u0, Tolerance::PRINTED)?;
    let d_r = qubit_unitary_decohering_rel(&u0, Tolerance::PRINTED)?;
    let drop = c_rel_ent(&rho0)? - c_rel_ent(&phi.apply(&rho0)?)?;
    let d_hat = generalized_decohering_power(&phi, CoherenceMeasure::RelativeEntropy, &cfg.optimizer)?.value;
    Ok(vec![
        Check::equal("D_r(U0)", 0.7053, "printed", d_r, PRINTED),
        Check::equal("C_r(rho0) - C_r(U0 rho0 U0^dagger)", 0.8327, "printed", drop, 1e-3),
        Check::new("D^_r(U0)", Relation::AtLeast, 0.8327, "printed", d_hat, 1e-3),
    ])
}

fn min_slack<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(f64::INFINITY, |m, s| s.map(|s| m.min(s)))
}

fn qubit_c_vs_d(cfg: &ReproConfig, stream: u64, measure: CoherenceMeasure) -> Result<Check> {
    let mut rng = cfg.rng(stream);
    let n = 100 * cfg.samples;
    let slack = min_slack(
        (0..n).map(|_| qubit_c_ge_d_check(&random_unitary(2, &mut rng), measure, Tolerance::DEFAULT).map(|c| c.slack)),
    )?;
    Ok(Check::new(format!("min C - D over {n} qubit unitaries"), Relation::AtLeast, 0.0, "bound", slack, EXACT))
}

fn v_l1(cfg: &ReproConfig) -> Result<Vec<Check>> {
    let mut checks = vec![qubit_c_vs_d(cfg, 7, CoherenceMeasure::L1)?];
    for d in [3, 4] {
        let phi = unitary(&dim_counterexample_unitary(d)?);
        let c = cohering_power(&phi, CoherenceMeasure::L1)?.value;
        let dv = decohering_power(&phi, CoherenceMeasure::L1, &cfg.optimizer)?.value;
        checks.push(Check::equal(format!("C_l1 of block rotation, d = {d}"), 1.0, "exact", c, EXACT));
        checks.push(Check::equal(
            format!("D_l1 of block rotation, d = {d}"),
            dim_counterexample_decohering_l1(d),
            "closed form",
            dv,
            OPTIMIZER,
        ));
    }
    Ok(checks)
}

fn v_rel(cfg: &ReproConfig) -> Result<Vec<Check>> {
    Ok(vec![qubit_c_vs_d(cfg, 8, CoherenceMeasure::RelativeEntropy)?])
}

fn eq16(cfg: &ReproConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(16);
    (2..=6)
        .map(|d| {
            let n = 10 * cfg.samples;
            let slack = min_slack((0..n).map(|_| {
                check_l1_vs_rel_inequality(&random_unitary(d, &mut rng), Tolerance::DEFAULT).map(|c| c.slack)
            }))?;
            Ok(Check::new(
                format!("min slack over {n} unitaries, d = {d}"),
                Relation::AtLeast,
                0.0,
                "bound",
                slack,
                EXACT,
            ))
        })
        .collect()
}

fn eq26(cfg: &ReproConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(26);
    let (mut d_vs_c, mut ch_vs_c) = (0.0f64, 0.0f64);
    let mut slack = f64::INFINITY;
    for _ in 0..cfg.samples {
        let u = random_unitary(2, &mut rng);
        let phi = unitary(&u);
        let c = cohering_power(&phi, CoherenceMeasure::L1)?.value;
        let c_hat = generalized_cohering_power(&phi, CoherenceMeasure::L1, &cfg.optimizer)?.value;
        let d_hat = generalized_decohering_power(&phi, CoherenceMeasure::L1, &cfg.optimizer)?.value;
        d_vs_c = d_vs_c.max((d_hat - c_hat).abs());
        ch_vs_c = ch_vs_c.max((c_hat - c).abs());
        slack = slack.min(c - qubit_unitary_decohering_l1(&u, Tolerance::DEFAULT)?);
    }
    Ok(vec![
        Check::equal("max |D^_l1 - C^_l1|", 0.0, "exact", d_vs_c, OPTIMIZER),
        Check::equal("max |C^_l1 - C_l1|", 0.0, "exact", ch_vs_c, OPTIMIZER),
        Check::new("min C_l1 - D_l1", Relation::AtLeast, 0.0, "bound", slack, EXACT),
    ])
}

/// Minimum of the lemma margin on `n` evenly spaced points of `[0, 1]`,
/// and the points that are local minima of the sampled margin.
pub fn lemma_scan(n: usize) -> Result<(f64, Vec<f64>)> {
    if n < 2 {
        return Err(Error::OutOfRange(format!("grid needs at least 2 points, got {n}")));
    }
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let m = xs.iter().map(|&x| lemma_entropy_inequality(x)).collect::<Result<Vec<_>>>()?;
    let min = m.iter().copied().fold(f64::INFINITY, f64::min);
    let zeros =
        (0..n).filter(|&i| (i == 0 || m[i] <= m[i - 1]) && (i == n - 1 || m[i] <= m[i + 1])).map(|i| xs[i]).collect();
    Ok((min, zeros))
}

fn lemma(_: &ReproConfig) -> Result<Vec<Check>> {
    let n = 10_001;
    let (min, zeros) = lemma_scan(n)?;
    let h = 1.0 / (n - 1) as f64;
    let mut checks = vec![Check::new("min margin", Relation::AtLeast, 0.0, "bound", min, 1e-12)];
    checks.push(Check::equal("number of equality points", 3.0, "exact", zeros.len() as f64, 0.0));
    for (z, x) in [0.0, 0.5, 1.0].into_iter().zip(zeros) {
        checks.push(Check::equal(format!("equality point near {z}"), z, "exact", x, h));
    }
    Ok(checks)
}

fn nio_r(cfg: &ReproConfig) -> Result<Vec<Check>> {
    let mut rng = cfg.rng(10);
    let mut channels = vec![fixture_dio_counterexample()];
    channels.extend((0..cfg.samples).map(|i| random_mio_channel(2 + i % 3, &mut rng)));
    let worst = channels
        .iter()
        .map(|phi| generalized_cohering_power(phi, CoherenceMeasure::RelativeEntropy, &cfg.optimizer).map(|r| r.value))
        .try_fold(f64::NEG_INFINITY, |m, v| v.map(|v| m.max(v)))?;
    Ok(vec![Check::new(
        format!("max C^_r over {} MIO channels", channels.len()),
        Relation::AtMost,
        0.0,
        "exact",
        worst,
        OPTIMIZER,
    )])
}

/// Runs one claim. Unknown ids are an [`Error::OutOfRange`].
pub fn reproduce(id: &str, cfg: &ReproConfig) -> Result<ReproReport> {
    cfg.optimizer.validate()?;
    let idx = PROP_IDS
        .iter()
        .position(|p| *p == id)
        .ok_or_else(|| Error::OutOfRange(format!("unknown claim '{id}', expected one of {}", PROP_IDS.join(", "))))?;
    let id = PROP_IDS[idx];
    let run: fn(&ReproConfig) -> Result<Vec<Check>> = match id {
        "1" => prop1,
        "2" => prop2,
        "4" => prop4,
        "5" => prop5,
        "6" => prop6,
        "v-l1" => v_l1,
        "v-rel" => v_rel,
        "eq16" => eq16,
        "eq26" => eq26,
        "lemma" => lemma,
        _ => nio_r,
    };
    let start = Instant::now();
    let checks = run(cfg)?;
    Ok(ReproReport {
        id,
        description: describe(id).expect("listed id"),
        pass: checks.iter().all(|c| c.pass),
        checks,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// All claims, run concurrently and reported in [`PROP_IDS`] order.
pub fn reproduce_all(cfg: &ReproConfig) -> Result<Vec<ReproReport>> {
    PROP_IDS.par_iter().map(|id| reproduce(id, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_relations() {
        assert!(Check::equal("", 1.0, "exact", 1.0 + 5e-10, EXACT).pass);
        assert!(!Check::equal("", 1.0, "exact", 1.0 + 2e-9, EXACT).pass);
        assert!(Check::new("", Relation::AtLeast, 0.0, "bound", -5e-10, EXACT).pass);
        assert!(!Check::new("", Relation::AtMost, 0.0, "exact", 2e-4, OPTIMIZER).pass);
        assert!(!Check::new("", Relation::Exceeds, 0.0, "bound", 0.0, 0.0).pass);
    }

    #[test]
    fn exact_claims_pass() {
        let cfg = ReproConfig::default();
        for id in ["2", "lemma", "v-rel", "eq16"] {
            let r = reproduce(id, &cfg).unwrap();
            assert!(r.pass, "{r:#?}");
        }
        let r = reproduce("2", &cfg).unwrap();
        assert!((r.checks[3].computed - 0.692820323).abs() < 1e-8);
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(reproduce("3", &ReproConfig::default()), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn lemma_scan_zeros() {
        let (min, zeros) = lemma_scan(101).unwrap();
        assert!(min.abs() < 1e-12);
        assert_eq!(zeros, vec![0.0, 0.5, 1.0]);
        assert!(lemma_scan(1).is_err());
    }
}
