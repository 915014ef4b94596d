//! Sixfold coincidence counting and the path from raw counts to witness
//! values with error bars.
//!
//! # Sampling contract
//!
//! Counts are drawn with ChaCha20 (`rand_chacha::ChaCha20Rng`, 20 rounds)
//! seeded by `seed_from_u64(seed)`. Setting number `s` of a protocol uses
//! stream `s` (`set_stream(s)`), so settings can be sampled in any order or
//! in parallel. Each event takes one `next_u64()`, mapped to
//! `u = (x >> 11)·2⁻⁵³ ∈ [0, 1)`, and lands in the first bin whose
//! cumulative probability (bins in index order, normalized by the total)
//! exceeds `u`.
//!
//! # Error model
//!
//! Per setting the multinomial plug-in variance of `Σ_b w(b) f(b)`,
//! `Σ_{b<c} f(b) f(c) (w(b) − w(c))²/N`, with `f` the observed frequencies. Settings are
//! independent, so variances add.

use crate::optics::{four_photon_fusion, NoiseModel, OpticsError};
use crate::qalgebra::{
    conjugate_local, expectation, gates, AlgebraError, MixedState, Observable,
};
use crate::witness::{MeasurementSetting, WitnessPlan, WitnessReport, N_OUTCOMES, N_QUBITS};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

/// Default events per setting.
pub const DEFAULT_EVENTS: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountingError {
    #[error("n_events must be at least 1")]
    NoEvents,

    #[error("every recorded event carries sign 0")]
    AllZeroSign,

    #[error("expected {expected} entries, got {found}")]
    Length { expected: usize, found: usize },

    #[error("fringe scan needs a 4-qubit state, got {0} qubits")]
    FringeArity(usize),

    #[error("fringe scan needs at least 2 points")]
    FringePoints,

    #[error("visibility {0} is outside [0, 1]")]
    Visibility(f64),

    #[error("visibility {target} not reachable (range {lo}..{hi})")]
    Unreachable { target: f64, lo: f64, hi: f64 },

    #[error(transparent)]
    Algebra(#[from] AlgebraError),

    #[error(transparent)]
    Optics(#[from] OpticsError),

    #[error(transparent)]
    Witness(#[from] crate::witness::WitnessError),
}

pub type Result<T> = std::result::Result<T, CountingError>;

/// Born probabilities of the 64 joint outcomes of `setting` on `rho`.
pub fn outcome_distribution(rho: &MixedState, setting: &MeasurementSetting) -> std::result::Result<Vec<f64>, AlgebraError> {
    if rho.n_qubits() != N_QUBITS {
        return Err(AlgebraError::DimensionMismatch { expected: N_OUTCOMES, found: rho.dim() });
    }
    let mut m = rho.matrix().clone();
    for (k, o) in setting.locals().iter().enumerate() {
        if *o != crate::witness::LocalObservable::Z {
            conjugate_local(&mut m, N_QUBITS, k + 1, &o.rotation());
        }
    }
    // round-off can leave diagonal entries at -1e-17
    Ok((0..N_OUTCOMES).map(|b| m[(b, b)].re.max(0.0)).collect())
}

/// Counts of one setting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountRecord {
    #[serde(serialize_with = "ser_setting")]
    pub setting: MeasurementSetting,
    pub counts: Vec<u64>,
    pub n_events: u64,
    pub seed: u64,
    pub stream: u64,
}

fn ser_setting<S: serde::Serializer>(s: &MeasurementSetting, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(s.label())
}

impl CountRecord {
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n_events as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws `n_events` outcomes from `probabilities` on the given stream.
pub fn sample_distribution(probabilities: &[f64], n_events: u64, seed: u64, stream: u64) -> Result<Vec<u64>> {
    if n_events == 0 {
        return Err(CountingError::NoEvents);
    }
    let total: f64 = probabilities.iter().sum();
    let mut acc = 0.0;
    let cumulative: Vec<f64> = probabilities
        .iter()
        .map(|p| {
            acc += p / total;
            acc
        })
        .collect();
    let last = probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(probabilities.len() - 1);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut counts = vec![0u64; probabilities.len()];
    for _ in 0..n_events {
        let u = uniform(&mut rng);
        let bin = cumulative.partition_point(|&c| c <= u).min(last);
        counts[bin] += 1;
    }
    Ok(counts)
}

/// Multinomial draw of `n_events` outcomes of `setting` on `rho`, stream 0.
pub fn sample_counts(rho: &MixedState, setting: &MeasurementSetting, n_events: u64, seed: u64) -> Result<CountRecord> {
    sample_counts_on_stream(rho, setting, n_events, seed, 0)
}

pub fn sample_counts_on_stream(
    rho: &MixedState,
    setting: &MeasurementSetting,
    n_events: u64,
    seed: u64,
    stream: u64,
) -> Result<CountRecord> {
    let probs = outcome_distribution(rho, setting)?;
    let counts = sample_distribution(&probs, n_events, seed, stream)?;
    Ok(CountRecord { setting: setting.clone(), counts, n_events, seed, stream })
}

/// Mean with its standard error.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct EstimatedValue {
    pub mean: f64,
    pub stderr: f64,
}

/// Signed average over events whose outcome has a nonzero sign.
pub fn parity_expectation(record: &CountRecord, signs: &[i8]) -> Result<EstimatedValue> {
    if signs.len() != record.counts.len() {
        return Err(CountingError::Length { expected: record.counts.len(), found: signs.len() });
    }
    let (mut n, mut sum, mut sum_sq) = (0u64, 0.0, 0.0);
    for (&c, &s) in record.counts.iter().zip(signs) {
        if s != 0 && c > 0 {
            n += c;
            sum += s as f64 * c as f64;
            sum_sq += (s as f64).powi(2) * c as f64;
        }
    }
    if n == 0 {
        return Err(CountingError::AllZeroSign);
    }
    let n = n as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(EstimatedValue { mean, stderr: (var / n).sqrt() })
}

/// `Σ_b w(b) f(b)` with its multinomial plug-in error.
pub fn weighted_estimate(record: &CountRecord, weights: &[f64]) -> Result<EstimatedValue> {
    if weights.len() != record.counts.len() {
        return Err(CountingError::Length { expected: record.counts.len(), found: weights.len() });
    }
    let f = record.frequencies();
    let mean: f64 = weights.iter().zip(&f).map(|(w, f)| w * f).sum();
    // pairwise form Σ f_b f_c (w_b − w_c)²/2: exactly zero when every
    // recorded outcome carries the same weight
    let occupied: Vec<(f64, f64)> = weights.iter().zip(&f).filter(|(_, f)| **f > 0.0).map(|(w, f)| (*w, *f)).collect();
    let mut spread = 0.0;
    for (i, &(wi, fi)) in occupied.iter().enumerate() {
        for &(wj, fj) in &occupied[i + 1..] {
            spread += fi * fj * (wi - wj).powi(2);
        }
    }
    let var = spread / record.n_events as f64;
    Ok(EstimatedValue { mean, stderr: var.sqrt() })
}

/// A state and a plan with the exact distributions precomputed, for
/// repeated sampling.
#[derive(Clone, Debug)]
pub struct PreparedProtocol {
    plan: WitnessPlan,
    distributions: Vec<Vec<f64>>,
}

/// Sampled counts and the resulting report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProtocolRun {
    pub report: WitnessReport,
    pub records: Vec<CountRecord>,
    pub estimates: Vec<EstimatedValue>,
}

impl PreparedProtocol {
    pub fn new(rho: &MixedState, plan: &WitnessPlan) -> Result<Self> {
        let distributions = plan
            .terms()
            .par_iter()
            .map(|t| outcome_distribution(rho, &t.setting))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Self { plan: plan.clone(), distributions })
    }

    pub fn plan(&self) -> &WitnessPlan {
        &self.plan
    }

    pub fn distributions(&self) -> &[Vec<f64>] {
        &self.distributions
    }

    /// Exact value, zero error.
    pub fn analytic(&self) -> Result<WitnessReport> {
        let value = self.plan.combine(&self.distributions)?;
        Ok(WitnessReport::new(self.plan.kind(), value, 0.0))
    }

    /// Samples every setting on its own stream and combines.
    pub fn sample(&self, n_events: u64, seed: u64) -> Result<ProtocolRun> {
        let records = self
            .plan
            .terms()
            .par_iter()
            .zip(&self.distributions)
            .enumerate()
            .map(|(s, (term, probs))| {
                let counts = sample_distribution(probs, n_events, seed, s as u64)?;
                Ok(CountRecord { setting: term.setting.clone(), counts, n_events, seed, stream: s as u64 })
            })
            .collect::<Result<Vec<_>>>()?;
        let estimates = self
            .plan
            .terms()
            .iter()
            .zip(&records)
            .map(|(t, r)| weighted_estimate(r, &t.weights))
            .collect::<Result<Vec<_>>>()?;
        let value = self.plan.constant() + estimates.iter().map(|e| e.mean).sum::<f64>();
        let stderr = estimates.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt();
        Ok(ProtocolRun { report: WitnessReport::new(self.plan.kind(), value, stderr), records, estimates })
    }
}

/// Samples every setting of `plan` on `rho` and evaluates the witness.
pub fn run_protocol(rho: &MixedState, plan: &WitnessPlan, n_events: u64, seed: u64) -> Result<ProtocolRun> {
    PreparedProtocol::new(rho, plan)?.sample(n_events, seed)
}

/// `⟨M_φ^⊗4⟩` at `n_points` equally spaced `φ ∈ [0, π]`.
pub fn fringe_scan(rho4: &MixedState, n_points: usize) -> Result<Vec<(f64, f64)>> {
    if rho4.n_qubits() != 4 {
        return Err(CountingError::FringeArity(rho4.n_qubits()));
    }
    if n_points < 2 {
        return Err(CountingError::FringePoints);
    }
    (0..n_points)
        .map(|i| {
            let phi = PI * i as f64 / (n_points - 1) as f64;
            let m = Observable::single(&gates::xy_plane(phi), "M")?.power(4)?;
            Ok((phi, expectation(rho4, &m)?))
        })
        .collect()
}

/// `(P_max − P_min)/(P_max + P_min)` on `P = (1 + ⟨M_φ^⊗4⟩)/2`.
pub fn fringe_visibility(fringe: &[(f64, f64)]) -> f64 {
    let p: Vec<f64> = fringe.iter().map(|&(_, e)| (1.0 + e) / 2.0).collect();
    let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = p.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min <= 0.0 {
        0.0
    } else {
        (max - min) / (max + min)
    }
}

/// Points used for visibilities; a multiple of 8 plus one hits every
/// extremum of `cos 4φ` on `[0, π]`.
pub const FRINGE_POINTS: usize = 33;

/// Fourfold fringe visibility of a single fusion with overlap `v` on pairs
/// drawn from `pairs`.
pub fn fusion_visibility(pairs: &NoiseModel, overlap: f64) -> Result<f64> {
    let rho = four_photon_fusion(pairs, overlap)?.state;
    Ok(fringe_visibility(&fringe_scan(&rho, FRINGE_POINTS)?))
}

/// Fusion overlap whose fourfold fringe on `pairs` has visibility `target`.
pub fn calibrate_overlap(target: f64, pairs: &NoiseModel) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(CountingError::Visibility(target));
    }
    let (lo_v, hi_v) = (fusion_visibility(pairs, 0.0)?, fusion_visibility(pairs, 1.0)?);
    if target < lo_v - 1e-12 || target > hi_v + 1e-12 {
        return Err(CountingError::Unreachable { target, lo: lo_v, hi: hi_v });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if fusion_visibility(pairs, mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `setting_label,outcome_bits,count`, one line per outcome.
pub fn counts_csv(records: &[CountRecord]) -> String {
    let mut out = String::from("setting_label,outcome_bits,count\n");
    for r in records {
        for (b, c) in r.counts.iter().enumerate() {
            let _ = writeln!(out, "{},{:06b},{}", r.setting.label(), b, c);
        }
    }
    out
}

/// `phi_radians,expectation`.
pub fn fringe_csv(fringe: &[(f64, f64)]) -> String {
    let mut out = String::from("phi_radians,expectation\n");
    for (phi, e) in fringe {
        let _ = writeln!(out, "{phi:.12},{e:.12}");
    }
    out
}
