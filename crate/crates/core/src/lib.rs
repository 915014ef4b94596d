//! Simulation and entanglement-witness analysis for six-photon graph-state
//! experiments built from polarization-entangled photon pairs.
//!
//! - [`qalgebra`]: dense states, observables and the linear algebra behind them.
//! - [`graphs`]: graphs, graph states and stabilizer generators.
//! - [`optics`]: pair sources, wave plates, PBS fusion and imperfection models.
//! - [`witness`]: the GHZ and cluster witnesses and their local decompositions.
//! - [`counting`]: coincidence sampling and the estimation pipeline.

pub mod counting;
pub mod graphs;
pub mod optics;
pub mod qalgebra;
pub mod witness;
