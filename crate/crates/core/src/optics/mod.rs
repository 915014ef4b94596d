//! Polarization-qubit model of the three-pair fusion experiment.
//!
//! Photons are labelled by spatial mode `1..=6`, and mode `k` is qubit `k` of
//! the register. Three sources each emit `|Φ⁺⟩` into a mode pair, wave
//! plates act on single modes, and polarizing beam splitters fuse pairs of
//! modes. Conditioning on one photon per output turns a PBS into the parity
//! filter `|HH⟩⟨HH| + |VV⟩⟨VV|`.
//!
//! Two imperfections are modelled on top of that:
//!
//! * imperfect pair sources, as a Bell-diagonal mixture fixed by the two
//!   measured pair visibilities (see [`epr_pair`]);
//! * partial distinguishability at each fusion, as a mixture of coherent
//!   fusion and incoherent parity filtering (see [`pbs_fusion`]).
//!
//! Multi-pair emission needs photon-number states and lives in [`fock`].

pub mod fock;

use crate::qalgebra::{gates, tensor, AlgebraError, MixedState, PureState};
use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Number of detected spatial modes.
pub const N_MODES: usize = 6;

/// Success probabilities at or below this count as an empty post-selection.
pub const EMPTY_POSTSELECTION: f64 = 1e-15;

/// Largest pair amplitude accepted by the higher-order model.
pub const MAX_PAIR_AMPLITUDE: f64 = 0.3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitRange { name: &'static str, value: f64 },

    #[error("pair amplitude {0} is outside [0, {MAX_PAIR_AMPLITUDE}]")]
    PairAmplitude(f64),

    #[error("mode {mode} out of range 1..={n}")]
    ModeOutOfRange { mode: usize, n: usize },

    #[error("fusion needs two distinct modes, got ({0}, {0})")]
    SameMode(usize),

    #[error("empty post-selection: no amplitude survives the fusion of modes {a} and {b}")]
    EmptyPostSelection { a: usize, b: usize },

    #[error("inconsistent wiring: {0}")]
    Wiring(String),

    #[error("{fusions} fusions but {overlaps} overlap values")]
    OverlapCount { fusions: usize, overlaps: usize },

    #[error("unknown preset {0:?} (expected ghz6 or cluster6)")]
    UnknownPreset(String),

    #[error("unknown wave plate kind {0:?} (expected HWP or QWP)")]
    UnknownWaveplate(String),

    #[error("only post-selected (sixfold-coincidence) operation is modelled")]
    PostselectRequired,

    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, OpticsError>;

fn unit_range(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(OpticsError::OutOfUnitRange { name, value })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveplateKind {
    #[serde(rename = "HWP")]
    Half,
    #[serde(rename = "QWP")]
    Quarter,
}

impl FromStr for WaveplateKind {
    type Err = OpticsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HWP" | "hwp" => Ok(WaveplateKind::Half),
            "QWP" | "qwp" => Ok(WaveplateKind::Quarter),
            other => Err(OpticsError::UnknownWaveplate(other.to_string())),
        }
    }
}

/// Jones matrix of a wave plate with its fast axis at `deg` degrees.
///
/// `HWP(θ) = [[cos 2θ, sin 2θ], [sin 2θ, −cos 2θ]]`, so `HWP(22.5°)` is the
/// Hadamard gate and `HWP(0°) = σ_z`. The QWP global phase `e^{−iπ/4}` is
/// dropped.
pub fn waveplate_unitary(kind: WaveplateKind, deg: f64) -> Matrix2<C64> {
    let t = deg.to_radians();
    match kind {
        WaveplateKind::Half => {
            let (s, c) = (2.0 * t).sin_cos();
            Matrix2::new(C64::from(c), C64::from(s), C64::from(s), C64::from(-c))
        }
        WaveplateKind::Quarter => {
            let (s, c) = t.sin_cos();
            let off = C64::new(1.0, -1.0) * s * c;
            Matrix2::new(C64::new(c * c, s * s), off, off, C64::new(s * s, c * c))
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveplate {
    pub mode: usize,
    pub kind: WaveplateKind,
    pub deg: f64,
}

/// Imperfection knobs. All ideal by default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    /// Pair visibility in the H/V basis, `⟨ZZ⟩`.
    #[serde(rename = "v_hv")]
    pub pair_visibility_hv: f64,
    /// Pair visibility in the +/− basis, `⟨XX⟩`.
    #[serde(rename = "v_pm")]
    pub pair_visibility_pm: f64,
    /// Overlap `v` per fusion, in fusion order. Empty means all ones.
    #[serde(rename = "overlap")]
    pub fusion_overlap: Vec<f64>,
    /// Per-source pair amplitude, only used by [`fock::higher_order_coincidences`].
    #[serde(rename = "lambda")]
    pub pair_amplitude: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::ideal()
    }
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self { pair_visibility_hv: 1.0, pair_visibility_pm: 1.0, fusion_overlap: Vec::new(), pair_amplitude: 0.0 }
    }

    /// Pair visibilities of the reported source (93 % H/V, 91 % +/−) and the
    /// given fusion overlaps.
    pub fn reported_sources(overlaps: [f64; 2]) -> Self {
        Self { pair_visibility_hv: 0.93, pair_visibility_pm: 0.91, fusion_overlap: overlaps.to_vec(), pair_amplitude: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        unit_range("v_hv", self.pair_visibility_hv)?;
        unit_range("v_pm", self.pair_visibility_pm)?;
        for &v in &self.fusion_overlap {
            unit_range("overlap", v)?;
        }
        if !(0.0..=MAX_PAIR_AMPLITUDE).contains(&self.pair_amplitude) {
            return Err(OpticsError::PairAmplitude(self.pair_amplitude));
        }
        Ok(())
    }

    /// Overlap for fusion number `k` (0-based).
    pub fn overlap(&self, k: usize) -> f64 {
        self.fusion_overlap.get(k).copied().unwrap_or(1.0)
    }
}

/// Noisy `|Φ⁺⟩` source.
///
/// The ideal pair goes through a phase flip with probability
/// `(1 − v_pm)/2` and a bit flip with probability `(1 − v_hv)/2`. The
/// result is Bell-diagonal with `⟨ZZ⟩ = v_hv`, `⟨XX⟩ = v_pm` and
/// `⟨YY⟩ = −v_hv·v_pm`.
pub fn epr_pair(noise: &NoiseModel) -> Result<MixedState> {
    let v_hv = unit_range("v_hv", noise.pair_visibility_hv)?;
    let v_pm = unit_range("v_pm", noise.pair_visibility_pm)?;
    let phi = PureState::superposition(&[(C64::ONE, "HH"), (C64::ONE, "VV")])?;
    let mut rho = phi.to_density();
    let flip = |rho: &MixedState, u: Matrix2<C64>, prob: f64| -> Result<MixedState> {
        let mut flipped = rho.clone();
        flipped.conjugate_local(1, &u)?;
        Ok(MixedState::mixture(&[(1.0 - prob, rho), (prob, &flipped)])?)
    };
    rho = flip(&rho, gates::sigma_z(), (1.0 - v_pm) / 2.0)?;
    rho = flip(&rho, gates::sigma_x(), (1.0 - v_hv) / 2.0)?;
    Ok(rho)
}

/// Post-selected output of a fusion.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionOutcome {
    pub state: MixedState,
    pub success_probability: f64,
}

/// PBS fusion of modes `a` and `b` with photon overlap `v`.
///
/// Output `∝ v·KρK + (1 − v)(P_HH ρ P_HH + P_VV ρ P_VV)` with
/// `K = P_HH + P_VV` on `(a, b)`. Both branches have the same trace, so the
/// success probability does not depend on `v`.
pub fn pbs_fusion(state: &MixedState, a: usize, b: usize, overlap: f64) -> Result<FusionOutcome> {
    let n = state.n_qubits();
    for m in [a, b] {
        if m == 0 || m > n {
            return Err(OpticsError::ModeOutOfRange { mode: m, n });
        }
    }
    if a == b {
        return Err(OpticsError::SameMode(a));
    }
    let v = unit_range("overlap", overlap)?;
    let (ma, mb) = (crate::qalgebra::qubit_mask(n, a), crate::qalgebra::qubit_mask(n, b));
    // 0 = both H, 1 = both V, 2 = rejected
    let class = |i: usize| match (i & ma != 0, i & mb != 0) {
        (false, false) => 0u8,
        (true, true) => 1,
        _ => 2,
    };
    let d = state.dim();
    let classes: Vec<u8> = (0..d).map(class).collect();
    let src = state.matrix();
    let mut out = src.clone();
    let mut trace = 0.0;
    for i in 0..d {
        for j in 0..d {
            let (ci, cj) = (classes[i], classes[j]);
            out[(i, j)] = if ci == 2 || cj == 2 {
                C64::ZERO
            } else if ci == cj {
                src[(i, j)]
            } else {
                src[(i, j)] * v
            };
        }
        if classes[i] != 2 {
            trace += src[(i, i)].re;
        }
    }
    if trace <= EMPTY_POSTSELECTION {
        return Err(OpticsError::EmptyPostSelection { a, b });
    }
    let state = MixedState::new(out)?.normalize()?;
    Ok(FusionOutcome { state, success_probability: trace })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Ghz6,
    Cluster6,
}

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Ghz6 => "ghz6",
            Preset::Cluster6 => "cluster6",
        }
    }
}

impl FromStr for Preset {
    type Err = OpticsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghz6" => Ok(Preset::Ghz6),
            "cluster6" => Ok(Preset::Cluster6),
            other => Err(OpticsError::UnknownPreset(other.to_string())),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sources, wave plates and fusions of one run, applied in that order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetupConfig {
    pub sources: Vec<(usize, usize)>,
    pub waveplates: Vec<Waveplate>,
    pub fusions: Vec<(usize, usize)>,
    pub postselect: bool,
}

impl SetupConfig {
    /// Pairs on modes 1-2, 3-4, 5-6 fused at (2,3) and (4,5).
    ///
    /// For the GHZ preset the mode-4 wave plate is left out altogether:
    /// `HWP(0°) = σ_z` would turn the middle pair into `|Φ⁻⟩`, and the
    /// nominal 0° setting is read as "no rotation".
    pub fn preset(p: Preset) -> Self {
        let waveplates = match p {
            Preset::Ghz6 => Vec::new(),
            Preset::Cluster6 => vec![Waveplate { mode: 4, kind: WaveplateKind::Half, deg: 22.5 }],
        };
        Self { sources: vec![(1, 2), (3, 4), (5, 6)], waveplates, fusions: vec![(2, 3), (4, 5)], postselect: true }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.postselect {
            return Err(OpticsError::PostselectRequired);
        }
        let in_range = |m: usize| {
            if m == 0 || m > N_MODES {
                Err(OpticsError::ModeOutOfRange { mode: m, n: N_MODES })
            } else {
                Ok(())
            }
        };
        let mut seen = [false; N_MODES];
        for &(a, b) in &self.sources {
            in_range(a)?;
            in_range(b)?;
            if a == b {
                return Err(OpticsError::Wiring(format!("source emits twice into mode {a}")));
            }
            for m in [a, b] {
                if std::mem::replace(&mut seen[m - 1], true) {
                    return Err(OpticsError::Wiring(format!("mode {m} is fed by two sources")));
                }
            }
        }
        if let Some(m) = seen.iter().position(|s| !s) {
            return Err(OpticsError::Wiring(format!("mode {} has no source; all {N_MODES} modes must be detected", m + 1)));
        }
        for w in &self.waveplates {
            in_range(w.mode)?;
        }
        let mut fused = [false; N_MODES];
        for &(a, b) in &self.fusions {
            in_range(a)?;
            in_range(b)?;
            if a == b {
                return Err(OpticsError::SameMode(a));
            }
            for m in [a, b] {
                if std::mem::replace(&mut fused[m - 1], true) {
                    return Err(OpticsError::Wiring(format!("mode {m} enters two fusions")));
                }
            }
        }
        Ok(())
    }

    fn check_overlaps(&self, noise: &NoiseModel) -> Result<()> {
        let k = noise.fusion_overlap.len();
        if k != 0 && k != self.fusions.len() {
            return Err(OpticsError::OverlapCount { fusions: self.fusions.len(), overlaps: k });
        }
        Ok(())
    }
}

/// Runs sources → wave plates → fusions → post-selection.
///
/// The success probability is the product of the conditional fusion traces.
pub fn build_setup(config: &SetupConfig, noise: &NoiseModel) -> Result<FusionOutcome> {
    config.validate()?;
    noise.validate()?;
    config.check_overlaps(noise)?;

    let pair = epr_pair(noise)?;
    let product = tensor(&vec![pair; config.sources.len()])?;
    // qubit order of `product` is source-major; map it back onto modes
    let emitted: Vec<usize> = config.sources.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut order = vec![0; N_MODES];
    for (slot, &mode) in emitted.iter().enumerate() {
        order[mode - 1] = slot + 1;
    }
    let mut state = product.permute_qubits(&order)?;

    for w in &config.waveplates {
        state.conjugate_local(w.mode, &waveplate_unitary(w.kind, w.deg))?;
    }
    let mut probability = 1.0;
    for (k, &(a, b)) in config.fusions.iter().enumerate() {
        let out = pbs_fusion(&state, a, b, noise.overlap(k))?;
        probability *= out.success_probability;
        state = out.state;
    }
    Ok(FusionOutcome { state, success_probability: probability })
}

/// Two pairs on modes 1-2 and 3-4 fused at (2, 3): the four-photon state
/// whose fringes witness a single fusion.
pub fn four_photon_fusion(noise: &NoiseModel, overlap: f64) -> Result<FusionOutcome> {
    let pair = epr_pair(noise)?;
    let product = tensor(&[pair.clone(), pair])?;
    pbs_fusion(&product, 2, 3, overlap)
}
