//! Graphs and the graph states they define.
//!
//! A graph on `n` vertices denotes the state obtained by preparing every
//! vertex in `|+⟩` and applying a controlled-phase gate along every edge. Its
//! stabilizer generators are `X_v ∏_{w ∈ N(v)} Z_w`.

use crate::qalgebra::{
    self, expectation, gates, AlgebraError, CMatrix, Observable, Pauli, PauliString, PureState,
    EIGEN_TOL, MAX_QUBITS,
};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph must have between 1 and {MAX_QUBITS} vertices, got {0}")]
    VertexCount(usize),

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("edge ({a}, {b}) references a vertex outside 1..={n}")]
    VertexOutOfRange { a: usize, b: usize, n: usize },

    #[error("unknown graph name {0:?} (expected star6, linear6, y6 or c6_graph)")]
    UnknownName(String),

    #[error("unsupported graph schema version {0}")]
    Schema(u32),

    #[error("stabilizer generators {0} and {1} do not commute")]
    NonCommuting(String, String),

    #[error("generators act on {found} qubits, expected {expected}")]
    GeneratorLength { expected: usize, found: usize },

    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Simple undirected graph on vertices `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    #[serde(default = "schema_v1")]
    schema: u32,
    n: usize,
    edges: Vec<[usize; 2]>,
}

fn schema_v1() -> u32 {
    1
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(j: GraphJson) -> Result<Self> {
        if j.schema != 1 {
            return Err(GraphError::Schema(j.schema));
        }
        Graph::new(j.n, j.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson { schema: 1, n: g.n, edges: g.edges.iter().map(|&(a, b)| [a, b]).collect() }
    }
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(GraphError::VertexCount(n));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == 0 || b == 0 || a > n || b > n {
                return Err(GraphError::VertexOutOfRange { a, b, n });
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(GraphError::DuplicateEdge(e.0, e.1));
            }
        }
        Ok(Self { n, edges: set })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, [])
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| match v {
                _ if a == v => Some(b),
                _ if b == v => Some(a),
                _ => None,
            })
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "G(n={}; ", self.n)?;
        for (k, (a, b)) in self.edges.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}-{b}")?;
        }
        write!(f, ")")
    }
}

/// `|+⟩^⊗n` followed by one controlled-phase per edge.
///
/// Controlled-phase gates are diagonal, so the amplitude of basis state `x`
/// is `2^{-n/2} (−1)^{#edges with both endpoints set in x}`.
pub fn graph_to_state(g: &Graph) -> Result<PureState> {
    let n = g.n;
    let dim = 1usize << n;
    let scale = (dim as f64).sqrt().recip();
    let masks: Vec<usize> = g
        .edges
        .iter()
        .map(|&(a, b)| qalgebra::qubit_mask(n, a) | qalgebra::qubit_mask(n, b))
        .collect();
    let amps = (0..dim)
        .map(|x| {
            let flips = masks.iter().filter(|&&m| x & m == m).count();
            C64::from(if flips % 2 == 0 { scale } else { -scale })
        })
        .collect();
    Ok(PureState::new(amps)?)
}

/// Commuting set of signed Pauli strings on a common register.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerSet {
    generators: Vec<PauliString>,
}

impl StabilizerSet {
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        let n = generators.first().map(PauliString::len).unwrap_or(0);
        for g in &generators {
            if g.len() != n {
                return Err(GraphError::GeneratorLength { expected: n, found: g.len() });
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for b in &generators[i + 1..] {
                if !a.commutes_with(b) {
                    return Err(GraphError::NonCommuting(a.to_string(), b.to_string()));
                }
            }
        }
        Ok(Self { generators })
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn n_qubits(&self) -> usize {
        self.generators.first().map(PauliString::len).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `∏ (g + I)/2`, the projector onto the joint +1 eigenspace.
    pub fn joint_projector(&self) -> Result<Observable> {
        let n = self.n_qubits();
        let d = 1usize << n;
        let mut p = CMatrix::identity(d, d);
        for g in &self.generators {
            let half = (g.matrix() + CMatrix::identity(d, d)).unscale(2.0);
            p *= half;
        }
        let label = self.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(",");
        Ok(Observable::new(p, format!("P[{label}]"))?)
    }

    /// Dimension of the joint +1 eigenspace (trace of the projector).
    pub fn stabilized_dimension(&self) -> Result<usize> {
        let t = self.joint_projector()?.matrix().trace().re;
        Ok(t.round() as usize)
    }

    /// All generators have expectation +1 within `tol`.
    pub fn stabilizes(&self, psi: &PureState, tol: f64) -> Result<bool> {
        for g in &self.generators {
            if (expectation(psi, &g.to_observable())? - 1.0).abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Whether `p` lies in the group generated by this set, by brute-force
    /// enumeration of all `2^k` products.
    pub fn group_contains(&self, p: &PauliString) -> bool {
        let k = self.generators.len();
        (0u32..1 << k).any(|mask| {
            let mut acc = PauliString::identity(p.len()).expect("nonempty");
            for (i, g) in self.generators.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    acc = acc.product(g).expect("generators commute");
                }
            }
            acc == *p
        })
    }
}

/// `X_v ∏_{w ∈ N(v)} Z_w` for every vertex, in vertex order.
pub fn stabilizer_generators(g: &Graph) -> StabilizerSet {
    let gens = (1..=g.n)
        .map(|v| {
            let mut letters = vec![Pauli::I; g.n];
            letters[v - 1] = Pauli::X;
            for w in g.neighbors(v) {
                letters[w - 1] = Pauli::Z;
            }
            PauliString::new(letters, false).expect("valid graph has 1..=12 vertices")
        })
        .collect();
    StabilizerSet::new(gens).expect("graph-state generators commute")
}

/// Conjugates a Pauli string by Hadamards on the listed (1-based) qubits:
/// `X ↔ Z`, `Y ↦ −Y`.
pub fn hadamard_conjugate(p: &PauliString, hadamard_on: &BTreeSet<usize>) -> PauliString {
    let mut negative = p.sign() < 0.0;
    let letters = p
        .letters()
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            if !hadamard_on.contains(&(k + 1)) {
                return l;
            }
            match l {
                Pauli::X => Pauli::Z,
                Pauli::Z => Pauli::X,
                Pauli::Y => {
                    negative = !negative;
                    Pauli::Y
                }
                Pauli::I => Pauli::I,
            }
        })
        .collect();
    PauliString::new(letters, negative).expect("same length as input")
}

/// Hadamard set that maps the `c6_graph` state onto `|C₆⟩`.
pub const C6_HADAMARDS: [usize; 4] = [1, 3, 4, 6];

/// Stabilizers of `|C₆⟩ = (|HHHHHH⟩ + |HHHVVV⟩ + |VVVHHH⟩ − |VVVVVV⟩)/2`.
///
/// `g_v` is the `c6_graph` generator of vertex `v` conjugated by Hadamards
/// on qubits 1, 3, 4, 6. The odd-indexed generators are then all diagonal in
/// `Z⊗Z⊗Z⊗X⊗X⊗X` and the even-indexed ones in `X⊗X⊗X⊗Z⊗Z⊗Z`:
///
/// ```text
/// g1 = ZZIIII   g2 = XXXIZI
/// g3 = IZZIII   g4 = IIIZZI
/// g5 = IZIXXX   g6 = IIIIZZ
/// ```
pub fn stabilizers_of_c6() -> StabilizerSet {
    let hs: BTreeSet<usize> = C6_HADAMARDS.into_iter().collect();
    let graph = named_graph(NamedGraph::C6Graph);
    let gens = stabilizer_generators(&graph)
        .generators()
        .iter()
        .map(|g| hadamard_conjugate(g, &hs))
        .collect();
    StabilizerSet::new(gens).expect("conjugation preserves commutation")
}

/// `(⊗_{v ∈ hadamard_on} H) |G⟩ = e^{iθ} |ψ⟩` within [`EIGEN_TOL`].
pub fn lu_hadamard_equivalent(psi: &PureState, g: &Graph, hadamard_on: &BTreeSet<usize>) -> Result<bool> {
    if psi.n_qubits() != g.n {
        return Err(AlgebraError::DimensionMismatch { expected: 1 << g.n, found: psi.dim() }.into());
    }
    let mut state = graph_to_state(g)?;
    let h = gates::hadamard();
    for &q in hadamard_on {
        state.apply_local(q, &h)?;
    }
    Ok(psi.equals_up_to_phase(&state, EIGEN_TOL)?)
}

/// Every graph on `n ≤ 6` vertices whose state, after Hadamards on
/// `hadamard_on`, equals `psi` up to phase.
pub fn find_graphs_matching(psi: &PureState, hadamard_on: &BTreeSet<usize>) -> Result<Vec<Graph>> {
    let n = psi.n_qubits();
    if n > 6 {
        return Err(GraphError::VertexCount(n));
    }
    let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    let mut found = Vec::new();
    for mask in 0u32..1 << pairs.len() {
        let edges = pairs.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &e)| e);
        let g = Graph::new(n, edges)?;
        if lu_hadamard_equivalent(psi, &g, hadamard_on)? {
            found.push(g);
        }
    }
    Ok(found)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum NamedGraph {
    /// Star with root 1 and leaves 2..6.
    Star6,
    /// Path 1-2-3-4-5-6.
    Linear6,
    /// Path 1-2-3-4-5 with an extra leaf 6 on vertex 3. The exact Y shape of
    /// the original optical recipe is not available; this is a convention.
    Y6,
    /// The graph of `|C₆⟩` under Hadamards on 1, 3, 4, 6: two stars of
    /// three vertices (roots 2 and 5) joined at their roots.
    C6Graph,
}

impl NamedGraph {
    pub const ALL: [NamedGraph; 4] = [NamedGraph::Star6, NamedGraph::Linear6, NamedGraph::Y6, NamedGraph::C6Graph];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedGraph::Star6 => "star6",
            NamedGraph::Linear6 => "linear6",
            NamedGraph::Y6 => "y6",
            NamedGraph::C6Graph => "c6_graph",
        }
    }
}

impl FromStr for NamedGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self> {
        NamedGraph::ALL
            .into_iter()
            .find(|g| g.as_str() == s)
            .ok_or_else(|| GraphError::UnknownName(s.to_string()))
    }
}

impl fmt::Display for NamedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn named_graph(name: NamedGraph) -> Graph {
    let edges: &[(usize, usize)] = match name {
        NamedGraph::Star6 => &[(1, 2), (1, 3), (1, 4), (1, 5), (1, 6)],
        NamedGraph::Linear6 => &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 6)],
        NamedGraph::Y6 => &[(1, 2), (2, 3), (3, 4), (4, 5), (3, 6)],
        NamedGraph::C6Graph => &[(1, 2), (2, 3), (2, 5), (4, 5), (5, 6)],
    };
    Graph::new(6, edges.iter().copied()).expect("named graphs are valid")
}

/// Looks a graph up by its string name.
pub fn named_graph_by_str(name: &str) -> Result<Graph> {
    Ok(named_graph(name.parse()?))
}

/// `|G₆⟩ = (|HHHHHH⟩ + |VVVVVV⟩)/√2`.
pub fn ghz6_state() -> PureState {
    PureState::superposition(&[(C64::ONE, "HHHHHH"), (C64::ONE, "VVVVVV")]).expect("valid labels")
}

/// `|C₆⟩ = (|HHHHHH⟩ + |HHHVVV⟩ + |VVVHHH⟩ − |VVVVVV⟩)/2`.
pub fn cluster6_state() -> PureState {
    PureState::superposition(&[
        (C64::ONE, "HHHHHH"),
        (C64::ONE, "HHHVVV"),
        (C64::ONE, "VVVHHH"),
        (-C64::ONE, "VVVVVV"),
    ])
    .expect("valid labels")
}

/// `|C̃₆⟩ = (−|HHHHHH⟩ + |HHHVVV⟩ + |VVVHHH⟩ + |VVVVVV⟩)/2`.
pub fn cluster6_flipped_state() -> PureState {
    PureState::superposition(&[
        (-C64::ONE, "HHHHHH"),
        (C64::ONE, "HHHVVV"),
        (C64::ONE, "VVVHHH"),
        (C64::ONE, "VVVVVV"),
    ])
    .expect("valid labels")
}

/// Entrywise `max |[g_i, g_j]|` over all generator pairs, via dense matrices.
pub fn max_commutator_norm(set: &StabilizerSet) -> Result<f64> {
    let obs: Vec<Observable> = set.generators().iter().map(PauliString::to_observable).collect();
    let mut worst = 0.0_f64;
    for (i, a) in obs.iter().enumerate() {
        for b in &obs[i + 1..] {
            worst = worst.max(a.commutator_norm(b)?);
        }
    }
    Ok(worst)
}
