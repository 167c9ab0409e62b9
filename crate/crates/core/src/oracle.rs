//! Exact-diagonalization reference: spectra, exact evolution, exact Green's
//! and spectral functions, and the MAE metric.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{config_err, contract_err, dim_err};
use crate::greens::{
    lehmann_series, lehmann_spectral, mode_operator, GreenMethod, GreensSeries, LehmannWeights, SpectralData,
};
use crate::linalg::hermitian_eigen;
use crate::math::cis;
use crate::pauli::{HubbardModel, PauliSum};
use crate::statevector::StateVector;
use crate::Result;

/// Largest register the dense oracle accepts.
pub const MAX_ORACLE_QUBITS: usize = 14;

/// Energies closer than this are treated as one multiplet.
pub const DEGENERACY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    n_qubits: usize,
    energies: Vec<f64>,
    /// Eigenvectors as columns.
    vectors: DMatrix<Complex64>,
}

impl EigenDecomposition {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn vectors(&self) -> &DMatrix<Complex64> {
        &self.vectors
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Eigenvector `n` as a state.
    pub fn state(&self, n: usize) -> Result<StateVector> {
        if n >= self.dim() {
            return Err(dim_err!("eigenstate {n} of {}", self.dim()));
        }
        StateVector::from_amplitudes(self.vectors.column(n).iter().copied().collect())
    }

    /// Size of the lowest multiplet.
    pub fn ground_degeneracy(&self) -> usize {
        let e0 = self.energies[0];
        self.energies.iter().take_while(|e| *e - e0 < DEGENERACY_TOL).count()
    }

    /// Largest `||H v_n - E_n v_n||`.
    pub fn max_residual(&self, h: &PauliSum) -> f64 {
        let hd = h.dense();
        (0..self.dim())
            .map(|n| {
                let v = self.vectors.column(n);
                (&hd * v - v * Complex64::new(self.energies[n], 0.0)).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Lowest eigenvalues restricted to states with `n` particles.
    pub fn sector_energies(&self, particles: u32) -> Vec<f64> {
        (0..self.dim())
            .filter(|&m| {
                let col = self.vectors.column(m);
                let weight: f64 = col
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| b.count_ones() == particles)
                    .map(|(_, a)| a.norm_sqr())
                    .sum();
                weight > 0.5
            })
            .map(|m| self.energies[m])
            .collect()
    }
}

/// Full dense eigendecomposition of a Hermitian Pauli sum.
pub fn diagonalize(hamiltonian: &PauliSum) -> Result<EigenDecomposition> {
    let n = hamiltonian.n_qubits();
    if n > MAX_ORACLE_QUBITS {
        return Err(config_err!(
            "exact diagonalization is capped at {MAX_ORACLE_QUBITS} qubits, got {n}"
        ));
    }
    if !hamiltonian.is_hermitian(1e-12) {
        return Err(contract_err!("Hamiltonian is not Hermitian"));
    }
    let (energies, vectors) = hermitian_eigen(&hamiltonian.dense());
    Ok(EigenDecomposition {
        n_qubits: n,
        energies,
        vectors,
    })
}

/// `sum_n e^{-i E_n t} <v_n|psi> v_n`.
pub fn exact_evolve(dec: &EigenDecomposition, state: &StateVector, t: f64) -> Result<StateVector> {
    if state.n_qubits() != dec.n_qubits {
        return Err(dim_err!(
            "{}-qubit state for a {}-qubit decomposition",
            state.n_qubits(),
            dec.n_qubits
        ));
    }
    let psi = DVector::from_column_slice(state.amplitudes());
    let mut coeffs = dec.vectors.adjoint() * psi;
    for (c, e) in coeffs.iter_mut().zip(&dec.energies) {
        *c *= cis(-e * t);
    }
    StateVector::from_amplitudes((&dec.vectors * coeffs).iter().copied().collect())
}

fn weights_from_states(dec: &EigenDecomposition, mode: &PauliSum, refs: &[usize]) -> Result<LehmannWeights> {
    if mode.n_qubits() != dec.n_qubits {
        return Err(dim_err!("mode operator size differs from the Hamiltonian"));
    }
    let dim = dec.dim();
    let vdag = dec.vectors.adjoint();
    let mode_dag = mode.adjoint();
    let mut particle = alloc::vec![0.0; dim];
    let mut hole = alloc::vec![0.0; dim];
    let share = 1.0 / refs.len() as f64;
    for &m in refs {
        let g = dec.state(m)?;
        let up = vdag.clone() * DVector::from_column_slice(g.apply_sum(&mode_dag)?.amplitudes());
        let down = vdag.clone() * DVector::from_column_slice(g.apply_sum(mode)?.amplitudes());
        for n in 0..dim {
            particle[n] += share * up[n].norm_sqr();
            hole[n] += share * down[n].norm_sqr();
        }
    }
    let keep = |w: &[f64]| -> Vec<(f64, f64)> {
        w.iter()
            .zip(&dec.energies)
            .filter(|(w, _)| **w > 1e-14)
            .map(|(w, e)| (*e, *w))
            .collect()
    };
    Ok(LehmannWeights {
        ground_energy: dec.energies[refs[0]],
        particle: keep(&particle),
        hole: keep(&hole),
    })
}

/// Lehmann weights of `mode` on the ground state. A degenerate ground
/// multiplet is averaged over, the zero-temperature limit of the thermal
/// ensemble.
pub fn lehmann_weights(dec: &EigenDecomposition, mode: &PauliSum) -> Result<LehmannWeights> {
    let refs: Vec<usize> = (0..dec.ground_degeneracy()).collect();
    weights_from_states(dec, mode, &refs)
}

/// Lehmann weights with eigenstate `m` as the reference state.
pub fn eigenstate_weights(dec: &EigenDecomposition, mode: &PauliSum, m: usize) -> Result<LehmannWeights> {
    weights_from_states(dec, mode, &[m])
}

/// Exact `G^R_k(t)` from the Lehmann sum.
pub fn exact_green(model: &HubbardModel, k: f64, times: &[f64]) -> Result<GreensSeries> {
    let dec = diagonalize(&model.qubit_hamiltonian()?)?;
    exact_green_from(&dec, model, k, times)
}

/// As [`exact_green`] with a precomputed decomposition.
pub fn exact_green_from(dec: &EigenDecomposition, model: &HubbardModel, k: f64, times: &[f64]) -> Result<GreensSeries> {
    let w = lehmann_weights(dec, &mode_operator(model, k)?)?;
    Ok(GreensSeries {
        k,
        hopping: model.hopping,
        interaction: model.interaction,
        times: times.to_vec(),
        values: lehmann_series(&w, times)?,
        method: GreenMethod::Exact,
    })
}

/// Exact `G^R_k(t)` by evolving `c^dag|G>` and `|G>` in time,
/// `-i(<G|e^{iHt} c e^{-iHt} c^dag|G> + <G|c^dag e^{iHt} c e^{-iHt}|G>)`.
/// Needs a non-degenerate ground state.
pub fn exact_green_dynamics(
    dec: &EigenDecomposition,
    model: &HubbardModel,
    k: f64,
    times: &[f64],
) -> Result<GreensSeries> {
    if dec.ground_degeneracy() != 1 {
        return Err(contract_err!("time-domain path needs a non-degenerate ground state"));
    }
    let c = mode_operator(model, k)?;
    let cdag = c.adjoint();
    let g = dec.state(0)?;
    let cdag_g = g.apply_sum(&cdag)?;
    let c_g = g.apply_sum(&c)?;
    let values = times
        .iter()
        .map(|&t| {
            let ug = exact_evolve(dec, &g, t)?;
            let u_cdag_g = exact_evolve(dec, &cdag_g, t)?;
            let u_c_g = exact_evolve(dec, &c_g, t)?;
            let particle = ug.matrix_element(&c, &u_cdag_g)?;
            let hole = u_c_g.matrix_element(&c, &ug)?;
            Ok(Complex64::new(0.0, -1.0) * (particle + hole))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GreensSeries {
        k,
        hopping: model.hopping,
        interaction: model.interaction,
        times: times.to_vec(),
        values,
        method: GreenMethod::Exact,
    })
}

/// Exact spectral function from the Lehmann sum.
pub fn exact_spectral(model: &HubbardModel, k: f64, eta: f64, omegas: &[f64]) -> Result<SpectralData> {
    let dec = diagonalize(&model.qubit_hamiltonian()?)?;
    lehmann_spectral(&lehmann_weights(&dec, &mode_operator(model, k)?)?, eta, omegas)
}

/// `(1/N) sum |a - b|` over a shared grid.
pub fn mae(a: &SpectralData, b: &SpectralData) -> Result<f64> {
    if a.omegas.len() != b.omegas.len() || a.omegas.iter().zip(&b.omegas).any(|(x, y)| (x - y).abs() > 1e-12) {
        return Err(dim_err!("spectra are sampled on different frequency grids"));
    }
    if a.values.is_empty() {
        return Err(dim_err!("empty spectra"));
    }
    let total: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(total / a.values.len() as f64)
}
