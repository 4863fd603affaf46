//! Seeded generators for test states and scripts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::circuit::{Circuit, Gate};
use crate::dense::{DensityMatrix, StateVector};
use crate::error::Result;
use crate::pauli::PauliOperator;

pub fn rng_from_seed(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn random_state(rng: &mut impl Rng, num_qubits: usize) -> Result<StateVector> {
    let amps: Vec<Complex64> = (0..1usize << num_qubits).map(|_| gaussian(rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
}

/// Full-rank mixed state `G G† / tr(G G†)` from a Ginibre matrix `G`.
pub fn random_density(rng: &mut impl Rng, num_qubits: usize) -> Result<DensityMatrix> {
    let dim = 1usize << num_qubits;
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    DensityMatrix::new(rho / tr)
}

/// [`random_density`] converted to its Pauli expansion.
pub fn random_secret(rng: &mut impl Rng, num_qubits: usize) -> Result<PauliOperator> {
    PauliOperator::from_dense(random_density(rng, num_qubits)?.matrix())
}

/// Uniform draw from {H, S, Sdg, X, Y, Z, CNOT, CZ}; two-qubit kinds need
/// `num_qubits ≥ 2`.
pub fn random_clifford_gate(rng: &mut impl Rng, num_qubits: usize) -> Gate {
    let kinds = if num_qubits >= 2 { 8 } else { 6 };
    let q = rng.random_range(0..num_qubits);
    match rng.random_range(0..kinds) {
        0 => Gate::H(q),
        1 => Gate::S(q),
        2 => Gate::Sdg(q),
        3 => Gate::X(q),
        4 => Gate::Y(q),
        5 => Gate::Z(q),
        k => {
            let mut r = rng.random_range(0..num_qubits - 1);
            if r >= q {
                r += 1;
            }
            if k == 6 {
                Gate::cnot(q, r)
            } else {
                Gate::Cz(q, r)
            }
        }
    }
}

pub fn random_clifford_circuit(rng: &mut impl Rng, num_qubits: usize, len: usize) -> Circuit {
    let gates: Vec<Gate> = (0..len).map(|_| random_clifford_gate(rng, num_qubits)).collect();
    Circuit::from_gates(num_qubits, gates).expect("generated gates are in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_draws_repeat() {
        let a = random_state(&mut rng_from_seed(7), 3).unwrap();
        let b = random_state(&mut rng_from_seed(7), 3).unwrap();
        assert_eq!(a, b);
        assert!((a.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_secret_is_a_density_operator() {
        let op = random_secret(&mut rng_from_seed(1), 2).unwrap();
        assert!((op.trace().re - 1.0).abs() < 1e-12);
        assert!(op.is_hermitian(1e-12));
    }

    #[test]
    fn clifford_scripts_stay_in_range() {
        let mut rng = rng_from_seed(3);
        for len in 0..10 {
            let c = random_clifford_circuit(&mut rng, 3, len);
            assert_eq!(c.len(), len);
            assert!(c.gates().iter().all(|g| g.is_clifford()));
        }
    }
}
