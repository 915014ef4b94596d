//! Multi-pair emission at the photon-number level.
//!
//! Each source is a two-mode squeezer on its mode pair: the `n`-pair term
//! is `λ^n (a_H† b_H† + a_V† b_V†)^n / n!` acting on vacuum, with `λ` the
//! pair amplitude. Sixfold coincidences need at least three pairs, so the
//! state is truncated to three and four pairs in total; the four-pair terms
//! are the leading source of wrong-polarization coincidences and enter with
//! relative probability `O(λ²)`.
//!
//! States are kept as polynomials in creation operators over the twelve
//! (spatial mode, polarization) modes, so linear optics is a substitution of
//! each creation operator by a linear form. Detection is by threshold
//! detectors behind a polarization analyzer on every output: an event
//! registers a sixfold coincidence for every way of picking one fired
//! detector per output.

use super::{waveplate_unitary, OpticsError, Preset, Result, SetupConfig, MAX_PAIR_AMPLITUDE, N_MODES};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;

const N_FOCK: usize = 2 * N_MODES;
const PRUNE: f64 = 1e-14;

/// Outcomes are indexed like basis states: qubit 1 most significant,
/// `H ↦ 0`, `V ↦ 1`.
pub const N_OUTCOMES: usize = 1 << N_MODES;

type Occupation = [u8; N_FOCK];

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Pol {
    H = 0,
    V = 1,
}

fn fock_index(spatial: usize, pol: Pol) -> usize {
    2 * (spatial - 1) + pol as usize
}

/// `Σ c_m ∏_k (a_k†)^{m_k}` applied to vacuum, without factorial
/// normalization in the coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
struct Polynomial {
    terms: BTreeMap<Occupation, C64>,
}

impl Polynomial {
    fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert([0; N_FOCK], C64::ONE);
        Self { terms }
    }

    fn add_term(&mut self, occ: Occupation, c: C64) {
        *self.terms.entry(occ).or_insert(C64::ZERO) += c;
    }

    fn add_scaled(&mut self, other: &Polynomial, s: C64) {
        for (occ, c) in &other.terms {
            self.add_term(*occ, c * s);
        }
    }

    fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Polynomial::default();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut occ = *a;
                for k in 0..N_FOCK {
                    occ[k] += b[k];
                }
                out.add_term(occ, ca * cb);
            }
        }
        out
    }

    fn mul_linear(&self, form: &[(usize, C64)]) -> Polynomial {
        let mut out = Polynomial::default();
        for (occ, c) in &self.terms {
            for &(k, ck) in form {
                let mut o = *occ;
                o[k] += 1;
                out.add_term(o, c * ck);
            }
        }
        out
    }

    /// Replaces every `a_j†` by `Σ_k map[j] = Σ_k c_k a_k†`.
    fn substitute(&self, map: &[Vec<(usize, C64)>]) -> Polynomial {
        let mut out = Polynomial::default();
        for (occ, c) in &self.terms {
            let mut expanded = Polynomial::default();
            expanded.add_term([0; N_FOCK], *c);
            for (j, &count) in occ.iter().enumerate() {
                for _ in 0..count {
                    expanded = expanded.mul_linear(&map[j]);
                }
            }
            out.add_scaled(&expanded, C64::ONE);
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE);
    }

    /// `|⟨m|ψ⟩|² = |c_m|² ∏ m_k!` for every Fock state in the expansion.
    fn fock_probabilities(&self) -> impl Iterator<Item = (&Occupation, f64)> {
        self.terms.iter().map(|(occ, c)| {
            let fact: f64 = occ.iter().map(|&m| (1..=m as u32).product::<u32>() as f64).product();
            (occ, c.norm_sqr() * fact)
        })
    }
}

fn identity_map() -> Vec<Vec<(usize, C64)>> {
    (0..N_FOCK).map(|k| vec![(k, C64::ONE)]).collect()
}

/// `n`-pair term of a source, `(a_H† b_H† + a_V† b_V†)^n / n!`.
fn source_term(a: usize, b: usize, n: u32) -> Polynomial {
    let mut p = Polynomial::vacuum();
    for k in 1..=n {
        let mut next = Polynomial::default();
        for pol in [Pol::H, Pol::V] {
            let (ia, ib) = (fock_index(a, pol), fock_index(b, pol));
            for (occ, c) in &p.terms {
                let mut o = *occ;
                o[ia] += 1;
                o[ib] += 1;
                next.add_term(o, c / k as f64);
            }
        }
        p = next;
    }
    p
}

/// All `(n_1, …, n_s)` with `Σ n_i = total`.
fn emission_patterns(sources: usize, total: u32) -> Vec<Vec<u32>> {
    if sources == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            emission_patterns(sources - 1, total - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn emitted_state(config: &SetupConfig, lambda: f64) -> Polynomial {
    let min_pairs = (N_MODES / 2) as u32;
    let mut state = Polynomial::default();
    let totals: &[u32] = if lambda > 0.0 { &[min_pairs, min_pairs + 1] } else { &[min_pairs] };
    for &total in totals {
        // amplitudes relative to the three-pair order
        let weight = lambda.powi((total - min_pairs) as i32);
        for pattern in emission_patterns(config.sources.len(), total) {
            let term = config
                .sources
                .iter()
                .zip(&pattern)
                .fold(Polynomial::vacuum(), |acc, (&(a, b), &n)| acc.mul(&source_term(a, b, n)));
            state.add_scaled(&term, C64::from(weight));
        }
    }
    state
}

fn propagate(config: &SetupConfig, mut state: Polynomial) -> Polynomial {
    for w in &config.waveplates {
        let u = waveplate_unitary(w.kind, w.deg);
        let (h, v) = (fock_index(w.mode, Pol::H), fock_index(w.mode, Pol::V));
        let mut map = identity_map();
        map[h] = vec![(h, u[(0, 0)]), (v, u[(1, 0)])];
        map[v] = vec![(h, u[(0, 1)]), (v, u[(1, 1)])];
        state = state.substitute(&map);
    }
    for &(a, b) in &config.fusions {
        // H is transmitted and keeps its mode label, V is reflected into the other port
        let mut map = identity_map();
        map[fock_index(a, Pol::V)] = vec![(fock_index(b, Pol::V), C64::ONE)];
        map[fock_index(b, Pol::V)] = vec![(fock_index(a, Pol::V), C64::ONE)];
        state = state.substitute(&map);
    }
    state
}

/// Adds `weight` to every outcome compatible with the fired detectors.
fn register(occ: &Occupation, weight: f64, dist: &mut [f64]) {
    let mut outcomes = vec![0usize];
    for m in 1..=N_MODES {
        let fired_h = occ[fock_index(m, Pol::H)] > 0;
        let fired_v = occ[fock_index(m, Pol::V)] > 0;
        let bit = 1 << (N_MODES - m);
        outcomes = match (fired_h, fired_v) {
            (false, false) => return,
            (true, false) => outcomes,
            (false, true) => outcomes.into_iter().map(|o| o | bit).collect(),
            (true, true) => outcomes.into_iter().flat_map(|o| [o, o | bit]).collect(),
        };
    }
    for o in outcomes {
        dist[o] += weight;
    }
}

/// Normalized H/V-basis sixfold-coincidence distribution of `config` with
/// up to four emitted pairs.
pub fn higher_order_coincidences_for(config: &SetupConfig, lambda: f64) -> Result<Vec<f64>> {
    if !(0.0..=MAX_PAIR_AMPLITUDE).contains(&lambda) {
        return Err(OpticsError::PairAmplitude(lambda));
    }
    config.validate()?;
    let out = propagate(config, emitted_state(config, lambda));
    let mut dist = vec![0.0; N_OUTCOMES];
    for (occ, p) in out.fock_probabilities() {
        register(occ, p, &mut dist);
    }
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        let (a, b) = config.fusions.first().copied().unwrap_or((0, 0));
        return Err(OpticsError::EmptyPostSelection { a, b });
    }
    dist.iter_mut().for_each(|p| *p /= total);
    Ok(dist)
}

pub fn higher_order_coincidences(lambda: f64, preset: Preset) -> Result<Vec<f64>> {
    higher_order_coincidences_for(&SetupConfig::preset(preset), lambda)
}

/// Probability mass outside the all-H and all-V outcomes.
pub fn off_ghz_weight(dist: &[f64]) -> f64 {
    1.0 - dist[0] - dist[N_OUTCOMES - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_enumeration() {
        assert_eq!(emission_patterns(3, 3).len(), 10);
        assert_eq!(emission_patterns(3, 4).len(), 15);
        assert!(emission_patterns(3, 4).iter().all(|p| p.iter().sum::<u32>() == 4));
    }

    #[test]
    fn single_pair_term_has_unit_fock_amplitudes() {
        // (a_H b_H + a_V b_V)^2 / 2 = |2,0;2,0⟩ + |1,1;1,1⟩ + |0,2;0,2⟩
        let p = source_term(1, 2, 2);
        let probs: Vec<f64> = p.fock_probabilities().map(|(_, q)| q).collect();
        assert_eq!(probs.len(), 3);
        assert!(probs.iter().all(|q| (q - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_lambda_is_ideal() {
        let d = higher_order_coincidences(0.0, Preset::Ghz6).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[63] - 0.5).abs() < 1e-12);
        let c = higher_order_coincidences(0.0, Preset::Cluster6).unwrap();
        for idx in [0b000000, 0b000111, 0b111000, 0b111111] {
            assert!((c[idx] - 0.25).abs() < 1e-12, "{idx:06b}: {}", c[idx]);
        }
    }

    #[test]
    fn rejects_out_of_range_lambda() {
        assert_eq!(higher_order_coincidences(0.31, Preset::Ghz6), Err(OpticsError::PairAmplitude(0.31)));
        assert!(higher_order_coincidences(-0.01, Preset::Ghz6).is_err());
        assert!(higher_order_coincidences(f64::NAN, Preset::Ghz6).is_err());
    }

    #[test]
    fn distribution_is_normalized() {
        for preset in [Preset::Ghz6, Preset::Cluster6] {
            let d = higher_order_coincidences(0.1, preset).unwrap();
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(d.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn ghz_distribution_is_hv_symmetric() {
        // the Hadamard plate of the cluster preset breaks this symmetry
        let d = higher_order_coincidences(0.1, Preset::Ghz6).unwrap();
        for x in 0..64 {
            assert!((d[x] - d[63 - x]).abs() < 1e-12, "{x:06b}");
        }
    }
}
