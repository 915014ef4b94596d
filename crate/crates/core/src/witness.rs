//! Entanglement witnesses for `|G₆⟩` and `|C₆⟩` and their decomposition
//! into local measurement settings.
//!
//! A [`WitnessPlan`] carries the dense 64×64 witness and a linear combiner:
//! one weight per outcome for each setting, plus a constant. The value is
//! `constant + Σ_s Σ_b w_s(b) p_s(b)`, where `p_s` is the outcome
//! distribution of setting `s`. Outcome `b` follows the basis convention
//! (qubit 1 most significant, eigenvalue `+1 ↦ 0`).

use crate::counting::outcome_distribution;
use crate::graphs::{cluster6_flipped_state, cluster6_state, ghz6_state, stabilizers_of_c6, StabilizerSet};
use crate::qalgebra::random::random_density_matrix;
use crate::qalgebra::{
    expectation, gates, min_eigenvalue, tensor, AlgebraError, CMatrix, MixedState, Observable, Pauli,
    PauliString, PureState, EIGEN_TOL,
};
use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Number of qubits every witness here acts on.
pub const N_QUBITS: usize = 6;
/// Outcomes per setting.
pub const N_OUTCOMES: usize = 1 << N_QUBITS;

/// Tolerance of the combiner-vs-matrix oracle in [`validate_witness`].
pub const ORACLE_TOL: f64 = 1e-9;
/// Random states used by the oracle check.
pub const ORACLE_STATES: usize = 100;
const ORACLE_SEED: u64 = 0x5eed_0001;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WitnessError {
    #[error("M(n) index {0} outside -2..=3")]
    MIndex(i8),

    #[error("setting needs {N_QUBITS} local observables, got {0}")]
    SettingLength(usize),

    #[error("unknown local observable {0:?}")]
    UnknownLocal(String),

    #[error("unknown witness {0:?} (expected ghz or cluster)")]
    UnknownWitness(String),

    #[error("setting {setting}: expected {N_OUTCOMES} weights, got {found}")]
    WeightCount { setting: String, found: usize },

    #[error("expected {expected} outcome distributions, got {found}")]
    DistributionCount { expected: usize, found: usize },

    #[error("witness is positive on the whole white-noise family ({at_zero} at p=0, {at_one} at p=1)")]
    NoSignChange { at_zero: f64, at_one: f64 },

    #[error("generator {0} is not measurable in either cluster setting")]
    Unmeasurable(String),

    #[error("expected 3 generators per setting, got {first} and {second}")]
    Partition { first: usize, second: usize },

    #[error("check {check} failed: {value:e}")]
    CheckFailed { check: &'static str, value: f64 },

    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, WitnessError>;

/// Single-qubit observable of a measurement setting.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum LocalObservable {
    Z,
    X,
    /// `M(n) = cos(nπ/6) σ_x + sin(nπ/6) σ_y`, `n ∈ {−2, …, 3}`.
    M(i8),
}

impl LocalObservable {
    pub fn m(n: i8) -> Result<Self> {
        if (-2..=3).contains(&n) {
            Ok(Self::M(n))
        } else {
            Err(WitnessError::MIndex(n))
        }
    }

    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            Self::Z => gates::sigma_z(),
            Self::X => gates::sigma_x(),
            Self::M(n) => gates::xy_plane(n as f64 * PI / 6.0),
        }
    }

    /// `U` with `U O U† = σ_z`: measuring `Z` after `U` reads out the
    /// eigenbasis of `O`, `+1` eigenvector first.
    pub fn rotation(self) -> Matrix2<C64> {
        match self {
            Self::Z => gates::identity(),
            Self::X => gates::hadamard(),
            Self::M(n) => {
                let phase = Matrix2::new(
                    C64::ONE,
                    C64::ZERO,
                    C64::ZERO,
                    C64::from_polar(1.0, -(n as f64) * PI / 6.0),
                );
                gates::hadamard() * phase
            }
        }
    }

    /// Pauli letter measured by this observable, if it is one.
    pub fn pauli(self) -> Option<Pauli> {
        match self {
            Self::Z => Some(Pauli::Z),
            Self::X | Self::M(0) => Some(Pauli::X),
            Self::M(_) => None,
        }
    }
}

impl fmt::Display for LocalObservable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Z => write!(f, "Z"),
            Self::X => write!(f, "X"),
            Self::M(n) => write!(f, "M({n})"),
        }
    }
}

impl FromStr for LocalObservable {
    type Err = WitnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Z" | "z" => Ok(Self::Z),
            "X" | "x" => Ok(Self::X),
            _ => {
                let inner = s
                    .strip_prefix("M(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| WitnessError::UnknownLocal(s.to_string()))?;
                let n: i8 = inner.parse().map_err(|_| WitnessError::UnknownLocal(s.to_string()))?;
                Self::m(n)
            }
        }
    }
}

/// One local observable per photon.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MeasurementSetting {
    locals: Vec<LocalObservable>,
    label: String,
}

impl MeasurementSetting {
    pub fn new(locals: Vec<LocalObservable>, label: impl Into<String>) -> Result<Self> {
        if locals.len() != N_QUBITS {
            return Err(WitnessError::SettingLength(locals.len()));
        }
        Ok(Self { locals, label: label.into() })
    }

    /// `first^⊗3 ⊗ second^⊗3`, labelled like `Z3M(1)3`.
    pub fn triples(first: LocalObservable, second: LocalObservable) -> Self {
        let label = if first == second { format!("{first}6") } else { format!("{first}3{second}3") };
        Self { locals: vec![first, first, first, second, second, second], label }
    }

    pub fn locals(&self) -> &[LocalObservable] {
        &self.locals
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Dense `⊗_k O_k`.
    pub fn observable(&self) -> Observable {
        let parts: Vec<Observable> = self
            .locals
            .iter()
            .map(|o| Observable::single(&o.matrix(), o.to_string()).expect("local observables are Hermitian"))
            .collect();
        tensor(&parts).expect("six qubits").with_label(self.label.clone())
    }

    /// Projector onto outcome `b`, `U† |b⟩⟨b| U` with `U = ⊗_k U_k`.
    pub fn outcome_projector(&self, b: usize) -> CMatrix {
        let mut vec = vec![C64::ONE];
        for (k, o) in self.locals.iter().enumerate() {
            let bit = (b >> (N_QUBITS - 1 - k)) & 1;
            let u = o.rotation();
            // column of U† = conjugated row of U
            let col = [u[(bit, 0)].conj(), u[(bit, 1)].conj()];
            vec = vec.iter().flat_map(|x| [x * col[0], x * col[1]]).collect();
        }
        let v = nalgebra::DVector::from_vec(vec);
        &v * v.adjoint()
    }

    /// Value of a Pauli string on outcome `b`, or `None` if the string is
    /// not diagonal in this setting.
    pub fn pauli_value(&self, p: &PauliString, b: usize) -> Option<f64> {
        let mut value = p.sign();
        for (k, (&letter, local)) in p.letters().iter().zip(&self.locals).enumerate() {
            if letter == Pauli::I {
                continue;
            }
            if local.pauli() != Some(letter) {
                return None;
            }
            value *= eigen_sign(b, k + 1);
        }
        Some(value)
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// `±1` eigenvalue recorded on 1-based `qubit` in outcome `b`.
pub fn eigen_sign(b: usize, qubit: usize) -> f64 {
    if (b >> (N_QUBITS - qubit)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Product of the eigenvalues on `qubits`.
pub fn parity(b: usize, qubits: &[usize]) -> f64 {
    qubits.iter().map(|&q| eigen_sign(b, q)).product()
}

/// Which witness a plan or report refers to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WitnessKind {
    #[serde(rename = "W_G")]
    Ghz,
    #[serde(rename = "W_C_tilde")]
    Cluster,
}

impl WitnessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ghz => "W_G",
            Self::Cluster => "W_C_tilde",
        }
    }

    /// True when `1/2 − ⟨W⟩` is the fidelity itself rather than a lower bound.
    pub fn fidelity_is_exact(self) -> bool {
        matches!(self, Self::Ghz)
    }

    pub fn target_state(self) -> PureState {
        match self {
            Self::Ghz => ghz6_state(),
            Self::Cluster => cluster6_state(),
        }
    }

    pub fn plan(self) -> WitnessPlan {
        match self {
            Self::Ghz => ghz_witness_plan(),
            Self::Cluster => cluster_witness_plan(),
        }
    }
}

impl fmt::Display for WitnessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for WitnessKind {
    type Err = WitnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghz" | "W_G" => Ok(Self::Ghz),
            "cluster" | "W_C_tilde" => Ok(Self::Cluster),
            other => Err(WitnessError::UnknownWitness(other.to_string())),
        }
    }
}

/// A setting and the weight of each of its outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct SettingTerm {
    pub setting: MeasurementSetting,
    pub weights: Vec<f64>,
}

impl SettingTerm {
    pub fn from_fn(setting: MeasurementSetting, w: impl Fn(usize) -> f64) -> Self {
        Self { setting, weights: (0..N_OUTCOMES).map(w).collect() }
    }

    /// `Σ_b w(b) p(b)`.
    pub fn apply(&self, probabilities: &[f64]) -> f64 {
        self.weights.iter().zip(probabilities).map(|(w, p)| w * p).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessPlan {
    kind: WitnessKind,
    observable: Observable,
    constant: f64,
    terms: Vec<SettingTerm>,
}

impl WitnessPlan {
    pub fn from_parts(kind: WitnessKind, observable: Observable, constant: f64, terms: Vec<SettingTerm>) -> Result<Self> {
        if observable.n_qubits() != N_QUBITS {
            return Err(AlgebraError::DimensionMismatch { expected: N_OUTCOMES, found: observable.dim() }.into());
        }
        for t in &terms {
            if t.weights.len() != N_OUTCOMES {
                return Err(WitnessError::WeightCount { setting: t.setting.label.clone(), found: t.weights.len() });
            }
        }
        Ok(Self { kind, observable, constant, terms })
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn observable(&self) -> &Observable {
        &self.observable
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[SettingTerm] {
        &self.terms
    }

    pub fn settings(&self) -> impl Iterator<Item = &MeasurementSetting> {
        self.terms.iter().map(|t| &t.setting)
    }

    pub fn target_state(&self) -> PureState {
        self.kind.target_state()
    }

    /// `I/2 − |target⟩⟨target|`, the projector witness the plan is compared to.
    pub fn reference_witness(&self) -> Observable {
        projector_witness(&self.target_state(), "W_ref")
    }

    /// Witness value from one outcome distribution per setting.
    pub fn combine(&self, distributions: &[Vec<f64>]) -> Result<f64> {
        if distributions.len() != self.terms.len() {
            return Err(WitnessError::DistributionCount { expected: self.terms.len(), found: distributions.len() });
        }
        Ok(self.constant + self.terms.iter().zip(distributions).map(|(t, p)| t.apply(p)).sum::<f64>())
    }

    /// Combiner applied to the exact outcome distributions of `rho`.
    pub fn evaluate_exact(&self, rho: &MixedState) -> Result<f64> {
        let dists = self
            .terms
            .iter()
            .map(|t| outcome_distribution(rho, &t.setting))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        self.combine(&dists)
    }

    /// The dense operator the combiner measures,
    /// `constant·I + Σ_s Σ_b w_s(b) Π_s(b)`.
    pub fn decomposition_matrix(&self) -> CMatrix {
        let mut m = CMatrix::identity(N_OUTCOMES, N_OUTCOMES) * C64::from(self.constant);
        for t in &self.terms {
            for (b, &w) in t.weights.iter().enumerate() {
                if w != 0.0 {
                    m += t.setting.outcome_projector(b) * C64::from(w);
                }
            }
        }
        m
    }
}

fn projector_witness(psi: &PureState, label: &str) -> Observable {
    let id = Observable::identity(psi.n_qubits()).expect("small register");
    Observable::linear_combination(&[(0.5, &id), (-1.0, &psi.projector("P"))], label).expect("same dimension")
}

/// `W_G = I/2 − |G₆⟩⟨G₆|` measured in seven settings: `Z^⊗6` and
/// `M(n)^⊗6` for `n = −2, …, 3`.
pub fn ghz_witness_plan() -> WitnessPlan {
    let mut terms = vec![SettingTerm::from_fn(MeasurementSetting::triples(LocalObservable::Z, LocalObservable::Z), |b| {
        if b == 0 || b == N_OUTCOMES - 1 {
            -0.5
        } else {
            0.0
        }
    })];
    let all: Vec<usize> = (1..=N_QUBITS).collect();
    for n in -2i8..=3 {
        let m = LocalObservable::M(n);
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        terms.push(SettingTerm::from_fn(MeasurementSetting::triples(m, m), |b| -sign * parity(b, &all) / 12.0));
    }
    let observable = projector_witness(&ghz6_state(), "W_G");
    WitnessPlan::from_parts(WitnessKind::Ghz, observable, 0.5, terms).expect("well-formed")
}

/// `(|H⟩⟨H|)^⊗6 + (|V⟩⟨V|)^⊗6)/2 + (1/12) Σ_n (−1)^n M(n)^⊗6`, built from
/// tensor powers without going through a plan.
pub fn ghz_projector_decomposition() -> CMatrix {
    let d = N_OUTCOMES;
    let mut m = CMatrix::zeros(d, d);
    m[(0, 0)] = C64::from(0.5);
    m[(d - 1, d - 1)] = C64::from(0.5);
    for n in -2i8..=3 {
        let local = Observable::single(&LocalObservable::M(n).matrix(), "M").expect("Hermitian");
        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        m += local.power(N_QUBITS).expect("six qubits").matrix() * C64::from(sign / 12.0);
    }
    m
}

const TRIPLE_A: [usize; 3] = [1, 2, 3];
const TRIPLE_B: [usize; 3] = [4, 5, 6];

/// `+1` on `VVV`, `−1` on `HHH`, `0` otherwise: the Z-basis value of
/// `A₁ = |VVV⟩⟨VVV| − |HHH⟩⟨HHH|`.
fn a1_value(b: usize, triple: &[usize; 3]) -> f64 {
    let bits: Vec<f64> = triple.iter().map(|&q| eigen_sign(b, q)).collect();
    if bits.iter().all(|&s| s < 0.0) {
        1.0
    } else if bits.iter().all(|&s| s > 0.0) {
        -1.0
    } else {
        0.0
    }
}

/// Z-basis value of `A₀ = I − |HHH⟩⟨HHH| − |VVV⟩⟨VVV|`.
fn a0_value(b: usize, triple: &[usize; 3]) -> f64 {
    let first = eigen_sign(b, triple[0]);
    if triple.iter().all(|&q| eigen_sign(b, q) == first) {
        0.0
    } else {
        1.0
    }
}

/// `Π (1 + g(b))/2` over generators diagonal in `setting`.
fn joint_indicator(setting: &MeasurementSetting, gens: &[PauliString], b: usize) -> f64 {
    gens.iter()
        .map(|g| (1.0 + setting.pauli_value(g, b).expect("partitioned by measurability")) / 2.0)
        .product()
}

/// `W̃_C = I/2 − |C₆⟩⟨C₆| + |C̃₆⟩⟨C̃₆|` in six settings.
///
/// Expanded as `3/2 − P_A − P_B − (I⊗A₀ + A₀⊗I)/2 − (A₁⊗B₁ + B₁⊗A₁)`,
/// with `P_A`, `P_B` the joint +1 projectors of the two stabilizer triples
/// and `B₁ = (M(1)^⊗3 + M(−1)^⊗3)/(2√3)`.
pub fn cluster_witness_plan() -> WitnessPlan {
    cluster_witness_plan_from(&stabilizers_of_c6()).expect("the c6 generators split 3 + 3")
}

/// Same plan for any generator order of the `|C₆⟩` stabilizers.
pub fn cluster_witness_plan_from(stabilizers: &StabilizerSet) -> Result<WitnessPlan> {
    use LocalObservable::{M, X, Z};
    let zx = MeasurementSetting::triples(Z, X);
    let xz = MeasurementSetting::triples(X, Z);
    let (mut on_zx, mut on_xz) = (Vec::new(), Vec::new());
    for g in stabilizers.generators() {
        if zx.pauli_value(g, 0).is_some() {
            on_zx.push(g.clone());
        } else if xz.pauli_value(g, 0).is_some() {
            on_xz.push(g.clone());
        } else {
            return Err(WitnessError::Unmeasurable(g.to_string()));
        }
    }
    if on_zx.len() != 3 || on_xz.len() != 3 {
        return Err(WitnessError::Partition { first: on_zx.len(), second: on_xz.len() });
    }

    let scale = 1.0 / (2.0 * 3f64.sqrt());
    let mut terms = vec![
        SettingTerm::from_fn(zx.clone(), |b| -joint_indicator(&zx, &on_zx, b) - 0.5 * a0_value(b, &TRIPLE_A)),
        SettingTerm::from_fn(xz.clone(), |b| -joint_indicator(&xz, &on_xz, b) - 0.5 * a0_value(b, &TRIPLE_B)),
    ];
    for n in [1, -1] {
        terms.push(SettingTerm::from_fn(MeasurementSetting::triples(Z, M(n)), |b| {
            -scale * a1_value(b, &TRIPLE_A) * parity(b, &TRIPLE_B)
        }));
    }
    for n in [1, -1] {
        terms.push(SettingTerm::from_fn(MeasurementSetting::triples(M(n), Z), |b| {
            -scale * parity(b, &TRIPLE_A) * a1_value(b, &TRIPLE_B)
        }));
    }

    let c = cluster6_state();
    let ct = cluster6_flipped_state();
    let id = Observable::identity(N_QUBITS)?;
    let observable = Observable::linear_combination(
        &[(0.5, &id), (-1.0, &c.projector("C")), (1.0, &ct.projector("Ct"))],
        "W_C_tilde",
    )?;
    WitnessPlan::from_parts(WitnessKind::Cluster, observable, 1.5, terms)
}

/// The Methods-form operator assembled from dense pieces: stabilizer
/// projectors, `A₀`, `A₁` and `B₁` as matrices.
pub fn cluster_methods_operator() -> Observable {
    let gens = stabilizers_of_c6();
    let id6 = CMatrix::identity(N_OUTCOMES, N_OUTCOMES);
    let half = C64::from(0.5);
    let project = |idx: [usize; 3]| {
        idx.iter().fold(id6.clone(), |acc, &i| {
            acc * ((gens.generators()[i].matrix() + &id6) * half)
        })
    };
    let p_a = project([0, 2, 4]);
    let p_b = project([1, 3, 5]);

    let id3 = CMatrix::identity(8, 8);
    let mut a0 = id3.clone();
    a0[(0, 0)] = C64::ZERO;
    a0[(7, 7)] = C64::ZERO;
    let mut a1 = CMatrix::zeros(8, 8);
    a1[(0, 0)] = -C64::ONE;
    a1[(7, 7)] = C64::ONE;
    let m3 = |n: i8| {
        Observable::single(&LocalObservable::M(n).matrix(), "M")
            .and_then(|o| o.power(3))
            .expect("three qubits")
            .matrix()
            .clone()
    };
    let b1 = (m3(1) + m3(-1)) * C64::from(1.0 / (2.0 * 3f64.sqrt()));

    let m = id6 * C64::from(1.5)
        - p_a
        - p_b
        - (id3.kronecker(&a0) + a0.kronecker(&id3)) * half
        - (a1.kronecker(&b1) + b1.kronecker(&a1));
    Observable::new(m, "W_C_tilde_methods").expect("Hermitian by construction")
}

/// `F = 1/2 − ⟨W⟩`: equal to the fidelity for `W_G`, a lower bound for `W̃_C`.
pub fn fidelity_from_witness(_kind: WitnessKind, value: f64) -> f64 {
    0.5 - value
}

/// Witness value on `ρ(p) = p·target + (1 − p)·I/64`.
pub fn white_noise_value(plan: &WitnessPlan, target: &MixedState, p: f64) -> Result<f64> {
    let at_target = expectation(target, plan.observable())?;
    let at_mixed = plan.observable().matrix().trace().re / N_OUTCOMES as f64;
    Ok(p * at_target + (1.0 - p) * at_mixed)
}

/// Smallest `p` with `Tr(W ρ(p)) ≤ 0`, by bisection to `1e−9`.
pub fn noise_threshold(plan: &WitnessPlan, target: &MixedState) -> Result<f64> {
    let f = |p: f64| white_noise_value(plan, target, p);
    let (f0, f1) = (f(0.0)?, f(1.0)?);
    if f0.signum() == f1.signum() {
        return Err(WitnessError::NoSignChange { at_zero: f0, at_one: f1 });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if f(mid)?.signum() == f0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of [`validate_witness`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessDiagnostics {
    pub witness: WitnessKind,
    /// `min eig(W − (I/2 − |target⟩⟨target|))`.
    pub dominance_min_eigenvalue: f64,
    /// Largest `|combined(ρ) − Tr(Wρ)|` over the random states.
    pub oracle_residual: f64,
    /// Largest squared Schmidt coefficient of the target over all bipartitions.
    pub max_schmidt_sq: f64,
}

/// Checks (a) `W ⪰ I/2 − |target⟩⟨target|`, (b) the combiner against the
/// dense trace on random mixed states, (c) that the target's overlap with
/// biseparable pure states is at most 1/2.
pub fn validate_witness(plan: &WitnessPlan) -> Result<WitnessDiagnostics> {
    let diff = plan.observable().sub(&plan.reference_witness())?;
    let dominance = min_eigenvalue(&diff)?;
    if dominance < -EIGEN_TOL {
        return Err(WitnessError::CheckFailed { check: "dominance", value: dominance });
    }

    let mut rng = ChaCha20Rng::seed_from_u64(ORACLE_SEED);
    let mut residual: f64 = 0.0;
    for k in 0..ORACLE_STATES {
        let rank = 1 + k % N_OUTCOMES;
        let rho = random_density_matrix(&mut rng, N_QUBITS, rank);
        let exact = expectation(&rho, plan.observable())?;
        residual = residual.max((plan.evaluate_exact(&rho)? - exact).abs());
    }
    if residual > ORACLE_TOL {
        return Err(WitnessError::CheckFailed { check: "oracle", value: residual });
    }

    let schmidt = max_schmidt_sq(&plan.target_state());
    if schmidt > 0.5 + EIGEN_TOL {
        return Err(WitnessError::CheckFailed { check: "schmidt", value: schmidt });
    }
    Ok(WitnessDiagnostics {
        witness: plan.kind(),
        dominance_min_eigenvalue: dominance,
        oracle_residual: residual,
        max_schmidt_sq: schmidt,
    })
}

/// Largest squared Schmidt coefficient of `psi` across the bipartition
/// `subset | complement`, with `subset` a bit mask over qubits (bit `k − 1`
/// for qubit `k`).
pub fn schmidt_sq(psi: &PureState, subset: usize) -> f64 {
    let n = psi.n_qubits();
    let left: Vec<usize> = (1..=n).filter(|q| subset & (1 << (q - 1)) != 0).collect();
    let right: Vec<usize> = (1..=n).filter(|q| subset & (1 << (q - 1)) == 0).collect();
    let gather = |i: usize, qubits: &[usize]| {
        qubits
            .iter()
            .enumerate()
            .map(|(k, &q)| ((i >> (n - q)) & 1) << (qubits.len() - 1 - k))
            .sum::<usize>()
    };
    let mut m = CMatrix::zeros(1 << left.len(), 1 << right.len());
    for (i, a) in psi.amplitudes().iter().enumerate() {
        m[(gather(i, &left), gather(i, &right))] = *a;
    }
    let s = m.singular_values();
    s.iter().fold(0.0f64, |acc, &x| acc.max(x * x))
}

/// [`schmidt_sq`] maximized over all `2^(n−1) − 1` bipartitions.
pub fn max_schmidt_sq(psi: &PureState) -> f64 {
    let n = psi.n_qubits();
    // subsets not containing the last qubit enumerate each cut once
    (1..(1usize << (n - 1))).map(|s| schmidt_sq(psi, s)).fold(0.0, f64::max)
}

/// Witness value with its statistical error and the derived verdicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub schema: u32,
    pub witness: WitnessKind,
    pub value: f64,
    pub stderr: f64,
    pub fidelity_bound: f64,
    pub genuine_multipartite: bool,
    /// `−value/stderr`; `null` when the error is zero.
    pub sigmas_below_zero: Option<f64>,
}

impl WitnessReport {
    pub fn new(kind: WitnessKind, value: f64, stderr: f64) -> Self {
        Self {
            schema: 1,
            witness: kind,
            value,
            stderr,
            fidelity_bound: fidelity_from_witness(kind, value),
            genuine_multipartite: value < 0.0,
            sigmas_below_zero: (stderr > 0.0).then(|| -value / stderr),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qalgebra::EXACT_TOL;

    #[test]
    fn local_observables_are_involutions() {
        for o in [LocalObservable::Z, LocalObservable::X]
            .into_iter()
            .chain((-2..=3).map(LocalObservable::M))
        {
            let m = o.matrix();
            assert!((m * m - gates::identity()).camax() < EXACT_TOL, "{o}");
            assert!((m.trace()).norm() < EXACT_TOL);
            let u = o.rotation();
            assert!((u * m * u.adjoint() - gates::sigma_z()).camax() < EXACT_TOL, "{o}");
        }
        assert!(LocalObservable::m(4).is_err());
        assert_eq!("M(-2)".parse::<LocalObservable>().unwrap(), LocalObservable::M(-2));
        assert!("M(x)".parse::<LocalObservable>().is_err());
    }

    #[test]
    fn setting_labels() {
        use LocalObservable::*;
        assert_eq!(MeasurementSetting::triples(Z, M(-1)).label(), "Z3M(-1)3");
        assert_eq!(MeasurementSetting::triples(Z, Z).label(), "Z6");
        assert!(MeasurementSetting::new(vec![Z; 5], "x").is_err());
    }

    #[test]
    fn outcome_projectors_resolve_identity() {
        let s = MeasurementSetting::triples(LocalObservable::M(1), LocalObservable::X);
        let sum = (0..N_OUTCOMES).fold(CMatrix::zeros(64, 64), |acc, b| acc + s.outcome_projector(b));
        assert!((sum - CMatrix::identity(64, 64)).camax() < EXACT_TOL);
        // Σ_b (±1) Π(b) reproduces the setting's product observable
        let all: Vec<usize> = (1..=6).collect();
        let signed = (0..N_OUTCOMES).fold(CMatrix::zeros(64, 64), |acc, b| {
            acc + s.outcome_projector(b) * C64::from(parity(b, &all))
        });
        assert!((signed - s.observable().matrix()).camax() < EXACT_TOL);
    }

    #[test]
    fn ghz_plan_reassembles_witness() {
        let plan = ghz_witness_plan();
        assert_eq!(plan.terms().len(), 7);
        let diff = (plan.decomposition_matrix() - plan.observable().matrix()).camax();
        assert!(diff < EXACT_TOL, "{diff:e}");
        let proj = ghz6_state().projector("G");
        assert!((ghz_projector_decomposition() - proj.matrix()).camax() < EXACT_TOL);
    }

    #[test]
    fn cluster_plan_reassembles_witness() {
        let plan = cluster_witness_plan();
        assert_eq!(plan.terms().len(), 6);
        let diff = (plan.decomposition_matrix() - plan.observable().matrix()).camax();
        assert!(diff < EXACT_TOL, "{diff:e}");
        let methods = cluster_methods_operator();
        assert!(methods.max_abs_diff(plan.observable()).unwrap() < EXACT_TOL);
    }

    #[test]
    fn plan_values_on_named_states() {
        let g = ghz_witness_plan();
        assert!((g.evaluate_exact(&ghz6_state().to_density()).unwrap() + 0.5).abs() < EXACT_TOL);
        let mixed = MixedState::maximally_mixed(6).unwrap();
        assert!((g.evaluate_exact(&mixed).unwrap() - (0.5 - 1.0 / 64.0)).abs() < EXACT_TOL);

        let c = cluster_witness_plan();
        assert!((c.evaluate_exact(&cluster6_state().to_density()).unwrap() + 0.5).abs() < EXACT_TOL);
        assert!((c.evaluate_exact(&cluster6_flipped_state().to_density()).unwrap() - 1.5).abs() < EXACT_TOL);
        for p in [0.0, 0.3, 0.5, 0.8] {
            let rho = MixedState::white_noise_mixture(&cluster6_state().to_density(), p);
            assert!((c.evaluate_exact(&rho).unwrap() - (0.5 - p)).abs() < EXACT_TOL);
        }
    }

    #[test]
    fn ghz_m_settings_have_alternating_sign() {
        let g = ghz6_state();
        for n in -2i8..=3 {
            let m = LocalObservable::M(n);
            let e = expectation(&g, &MeasurementSetting::triples(m, m).observable()).unwrap();
            let expected = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            assert!((e - expected).abs() < EXACT_TOL, "n={n}: {e}");
        }
    }

    #[test]
    fn thresholds() {
        let c = cluster_witness_plan();
        let p = noise_threshold(&c, &cluster6_state().to_density()).unwrap();
        assert!((p - 0.5).abs() < 1e-9);
        let g = ghz_witness_plan();
        let p = noise_threshold(&g, &ghz6_state().to_density()).unwrap();
        assert!((p - 31.0 / 63.0).abs() < 1e-9);
        let err = noise_threshold(&g, &MixedState::maximally_mixed(6).unwrap()).unwrap_err();
        assert!(matches!(err, WitnessError::NoSignChange { .. }));
    }

    #[test]
    fn fidelity_bookkeeping() {
        assert!((fidelity_from_witness(WitnessKind::Ghz, -0.093) - 0.593).abs() < EXACT_TOL);
        assert!((fidelity_from_witness(WitnessKind::Cluster, -0.095) - 0.595).abs() < EXACT_TOL);
        assert!(WitnessKind::Ghz.fidelity_is_exact() && !WitnessKind::Cluster.fidelity_is_exact());
        assert_eq!(fidelity_from_witness(WitnessKind::Ghz, -0.5), 1.0);
    }

    #[test]
    fn both_plans_validate() {
        let g = validate_witness(&ghz_witness_plan()).unwrap();
        assert!((g.max_schmidt_sq - 0.5).abs() < EXACT_TOL);
        assert!(g.dominance_min_eigenvalue.abs() < EIGEN_TOL);
        let c = validate_witness(&cluster_witness_plan()).unwrap();
        assert!(c.dominance_min_eigenvalue >= -EIGEN_TOL);
        assert!(c.oracle_residual <= ORACLE_TOL);
    }

    #[test]
    fn corrupted_combiner_fails_validation() {
        let plan = cluster_witness_plan();
        let mut terms = plan.terms().to_vec();
        terms[2].weights.iter_mut().for_each(|w| *w = -*w);
        let bad = WitnessPlan::from_parts(plan.kind(), plan.observable().clone(), plan.constant(), terms).unwrap();
        match validate_witness(&bad) {
            Err(WitnessError::CheckFailed { check: "oracle", value }) => assert!(value > 1e-3, "{value}"),
            other => panic!("expected oracle failure, got {other:?}"),
        }
    }

    #[test]
    fn plan_ignores_generator_order_within_triples() {
        let base = cluster_witness_plan();
        let gens = stabilizers_of_c6().generators().to_vec();
        // every permutation keeping the odd/even split, and a global reversal
        let orders: [[usize; 6]; 4] = [[4, 1, 2, 3, 0, 5], [2, 5, 0, 3, 4, 1], [0, 3, 4, 1, 2, 5], [5, 4, 3, 2, 1, 0]];
        for order in orders {
            let set = StabilizerSet::new(order.iter().map(|&i| gens[i].clone()).collect()).unwrap();
            let plan = cluster_witness_plan_from(&set).unwrap();
            assert_eq!(plan.terms(), base.terms(), "{order:?}");
        }
    }

    #[test]
    fn report_fields() {
        let r = WitnessReport::new(WitnessKind::Ghz, -0.093, 0.025);
        assert!(r.genuine_multipartite);
        assert!((r.fidelity_bound - 0.593).abs() < EXACT_TOL);
        assert!((r.sigmas_below_zero.unwrap() - 3.72).abs() < EXACT_TOL);
        let zero = WitnessReport::new(WitnessKind::Cluster, 0.1, 0.0);
        assert!(!zero.genuine_multipartite && zero.sigmas_below_zero.is_none());
    }
}
