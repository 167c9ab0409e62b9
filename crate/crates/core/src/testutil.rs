//! Shared helpers for unit tests.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pauli::{Pauli, PauliString};
use crate::statevector::StateVector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_pauli_string(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    let factors: Vec<_> = (0..n)
        .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)])
        .collect();
    PauliString::from_factors(&factors)
}

pub fn rand_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let amps: Vec<_> = (0..1usize << n)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let mut s = StateVector::from_amplitudes(amps).unwrap();
    s.normalize();
    s
}

pub fn rand_params(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-3.0..3.0)).collect()
}

pub fn assert_mat_close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) {
    assert_eq!(a.shape(), b.shape());
    let err = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(err <= tol, "matrices differ by {err} > {tol}");
}

pub fn assert_state_close(a: &StateVector, b: &StateVector, tol: f64) {
    let err = a.distance(b);
    assert!(err <= tol, "states differ by {err} > {tol}");
}
