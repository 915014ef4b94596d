//! Random states for property tests and oracle sweeps.

use super::{MixedState, PureState, CMatrix};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state on `n` qubits.
pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PureState {
    let amps = (0..1usize << n).map(|_| gaussian(rng)).collect();
    PureState::new(amps).and_then(PureState::normalize).expect("nonzero Gaussian vector")
}

/// Product of independent Haar-random single-qubit states.
pub fn random_product_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> PureState {
    let mut amps = vec![C64::ONE];
    for _ in 0..n {
        let q = random_pure_state(rng, 1);
        let (a, b) = (q.amplitudes()[0], q.amplitudes()[1]);
        amps = amps.iter().flat_map(|x| [x * a, x * b]).collect();
    }
    PureState::new(amps).expect("power-of-two length")
}

/// `G G† / Tr(G G†)` with `G` a `2^n × rank` complex Ginibre matrix.
pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> MixedState {
    let d = 1usize << n;
    let g = CMatrix::from_fn(d, rank.max(1), |_, _| gaussian(rng));
    let mut rho = &g * g.adjoint();
    // exact Hermitian symmetry after the product
    for i in 0..d {
        for j in i + 1..d {
            let avg = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
        rho[(i, i)] = C64::from(rho[(i, i)].re);
    }
    MixedState::new(rho).and_then(MixedState::normalize).expect("Ginibre product is Hermitian and nonzero")
}
