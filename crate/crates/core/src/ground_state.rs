//! Variational ground-state search (VQE), subspace search for excited
//! states (SSVQE, weighted and identical-weight variants) and transition
//! amplitudes between the resulting approximate eigenstates.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{config_err, dim_err};
use crate::greens::LehmannWeights;
use crate::linalg::hermitian_eigen;
use crate::math::FRAC_1_SQRT_2;
use crate::optimize::{minimize, OptimizerConfig};
use crate::pauli::PauliSum;
use crate::statevector::{expectation, Ansatz, StateVector};
use crate::Result;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ORTHO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct VqeResult {
    pub theta: Vec<f64>,
    pub energy: f64,
    /// False when no start met the tolerance; `theta` is the best point seen.
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SsvqeResult {
    pub theta: Vec<f64>,
    pub n_qubits: usize,
    /// Computational-basis indices of the input states.
    pub inputs: Vec<usize>,
    /// Ascending for the identical-weight variant; in input order for the
    /// weighted one (ascending once the optimizer has converged).
    pub energies: Vec<f64>,
    /// Columns are the subspace eigenvectors in the input basis.
    pub eigvecs: DMatrix<Complex64>,
    /// `<psi_i|U^dag H U|psi_j>`.
    pub subspace_h: DMatrix<Complex64>,
    pub converged: bool,
    /// Final cost.
    pub cost: f64,
}

impl SsvqeResult {
    /// `|E'_m> = sum_j V_{j m} U(theta)|psi_j>`.
    pub fn eigenstate(&self, ansatz: &Ansatz, m: usize) -> Result<StateVector> {
        if m >= self.inputs.len() {
            return Err(dim_err!("eigenstate {m} of {}", self.inputs.len()));
        }
        let mut out = StateVector::zero_state(self.n_qubits)?.scaled(Complex64::new(0.0, 0.0));
        for (j, &b) in self.inputs.iter().enumerate() {
            let s = ansatz
                .circuit()
                .apply(&self.theta, &StateVector::basis(self.n_qubits, b)?)?;
            out.axpy(self.eigvecs[(j, m)], &s);
        }
        Ok(out)
    }
}

fn check_ansatz(h: &PauliSum, ansatz: &Ansatz) -> Result<()> {
    if h.n_qubits() != ansatz.n_qubits() {
        return Err(dim_err!(
            "{}-qubit Hamiltonian with a {}-qubit ansatz",
            h.n_qubits(),
            ansatz.n_qubits()
        ));
    }
    if !h.is_hermitian(1e-12) {
        return Err(config_err!("Hamiltonian is not Hermitian"));
    }
    Ok(())
}

fn initial_point(n: usize, config: &OptimizerConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed0f_u64);
    (0..n)
        .map(|_| rng.random_range(-config.init_scale..=config.init_scale))
        .collect()
}

/// `sum_j w_j <psi_j|U^dag H U|psi_j>` and its gradient
/// `sum_j w_j 2 Re<d_i psi_j|H|psi_j>`.
fn weighted_cost(
    h: &PauliSum,
    ansatz: &Ansatz,
    refs: &[StateVector],
    weights: &[f64],
    theta: &[f64],
    gradient: bool,
) -> Result<(f64, Vec<f64>)> {
    let mut cost = 0.0;
    let mut grad = vec![0.0; if gradient { theta.len() } else { 0 }];
    for (r, &w) in refs.iter().zip(weights) {
        if gradient {
            let (psi, derivs) = ansatz.circuit().derivative_states(theta, r)?;
            let hpsi = psi.apply_sum(h)?;
            cost += w * psi.inner(&hpsi).re;
            for (g, d) in grad.iter_mut().zip(&derivs) {
                *g += 2.0 * w * d.inner(&hpsi).re;
            }
        } else {
            let psi = ansatz.circuit().apply(theta, r)?;
            cost += w * expectation(&psi, h)?.re;
        }
    }
    Ok((cost, grad))
}

fn optimize_cost(
    h: &PauliSum,
    ansatz: &Ansatz,
    refs: &[StateVector],
    weights: &[f64],
    config: &OptimizerConfig,
) -> Result<crate::optimize::OptimizeResult> {
    config.validate()?;
    let n = ansatz.parameter_count();
    let x0 = initial_point(n, config);
    // Simulation errors cannot occur once the dimensions have been checked,
    // so the closures map them to +inf rather than threading a Result.
    weighted_cost(h, ansatz, refs, weights, &x0, false)?;
    let mut f = |x: &[f64]| weighted_cost(h, ansatz, refs, weights, x, false).map_or(f64::INFINITY, |r| r.0);
    let mut fg = |x: &[f64]| {
        weighted_cost(h, ansatz, refs, weights, x, true).unwrap_or_else(|_| (f64::INFINITY, vec![0.0; x.len()]))
    };
    minimize(&mut f, Some(&mut fg), &x0, config)
}

/// Minimizes `<ref|U^dag H U|ref>`.
pub fn vqe_minimize(
    hamiltonian: &PauliSum,
    ansatz: &Ansatz,
    reference: &StateVector,
    config: &OptimizerConfig,
) -> Result<VqeResult> {
    check_ansatz(hamiltonian, ansatz)?;
    let refs = [reference.clone()];
    let r = optimize_cost(hamiltonian, ansatz, &refs, &[1.0], config)?;
    let psi = ansatz.circuit().apply(&r.x, reference)?;
    Ok(VqeResult {
        energy: expectation(&psi, hamiltonian)?.re,
        theta: r.x,
        converged: r.converged,
        iterations: r.iterations,
        evaluations: r.evaluations,
    })
}

fn basis_inputs(n_qubits: usize, inputs: &[usize]) -> Result<Vec<StateVector>> {
    if inputs.is_empty() {
        return Err(config_err!("no input states"));
    }
    for (a, x) in inputs.iter().enumerate() {
        if inputs[..a].contains(x) {
            return Err(config_err!("input state {x} listed twice"));
        }
    }
    inputs.iter().map(|&b| StateVector::basis(n_qubits, b)).collect()
}

fn subspace_matrix(h: &PauliSum, ansatz: &Ansatz, theta: &[f64], refs: &[StateVector]) -> Result<DMatrix<Complex64>> {
    let states: Vec<StateVector> = refs
        .iter()
        .map(|r| ansatz.circuit().apply(theta, r))
        .collect::<Result<_>>()?;
    let hs: Vec<StateVector> = states.iter().map(|s| s.apply_sum(h)).collect::<Result<_>>()?;
    let k = refs.len();
    Ok(DMatrix::from_fn(k, k, |i, j| states[i].inner(&hs[j])))
}

/// Default weights `K, K-1, ..., 1`.
pub fn default_weights(k: usize) -> Vec<f64> {
    (0..k).map(|j| (k - j) as f64).collect()
}

/// Weighted subspace search: input `j` is driven towards the `j`-th
/// eigenstate. `weights` must be strictly decreasing and positive.
pub fn ssvqe_weighted(
    hamiltonian: &PauliSum,
    ansatz: &Ansatz,
    inputs: &[usize],
    weights: &[f64],
    config: &OptimizerConfig,
) -> Result<SsvqeResult> {
    check_ansatz(hamiltonian, ansatz)?;
    if weights.len() != inputs.len() {
        return Err(config_err!("{} weights for {} inputs", weights.len(), inputs.len()));
    }
    if weights.windows(2).any(|w| !(w[0] > w[1])) || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(config_err!("weights must be positive and strictly decreasing"));
    }
    let refs = basis_inputs(ansatz.n_qubits(), inputs)?;
    let r = optimize_cost(hamiltonian, ansatz, &refs, weights, config)?;
    let sub = subspace_matrix(hamiltonian, ansatz, &r.x, &refs)?;
    let k = inputs.len();
    Ok(SsvqeResult {
        energies: (0..k).map(|j| sub[(j, j)].re).collect(),
        eigvecs: DMatrix::identity(k, k),
        subspace_h: sub,
        theta: r.x,
        n_qubits: ansatz.n_qubits(),
        inputs: inputs.to_vec(),
        converged: r.converged,
        cost: r.value,
    })
}

/// Identical-weight subspace search followed by diagonalization of the
/// Hamiltonian projected on the optimized subspace.
pub fn ssvqe_identical(
    hamiltonian: &PauliSum,
    ansatz: &Ansatz,
    inputs: &[usize],
    config: &OptimizerConfig,
) -> Result<SsvqeResult> {
    check_ansatz(hamiltonian, ansatz)?;
    let refs = basis_inputs(ansatz.n_qubits(), inputs)?;
    let weights = vec![1.0; refs.len()];
    let r = optimize_cost(hamiltonian, ansatz, &refs, &weights, config)?;
    let sub = subspace_matrix(hamiltonian, ansatz, &r.x, &refs)?;
    let (energies, eigvecs) = hermitian_eigen(&sub);
    Ok(SsvqeResult {
        energies,
        eigvecs,
        subspace_h: sub,
        theta: r.x,
        n_qubits: ansatz.n_qubits(),
        inputs: inputs.to_vec(),
        converged: r.converged,
        cost: r.value,
    })
}

/// `<a|X|b>` for Hermitian `X` from expectation values on the four
/// superpositions `(a +- b)/sqrt2` and `(a +- i b)/sqrt2`, each prepared by
/// running the circuit on the superposed inputs.
fn hermitian_transition(
    ansatz: &Ansatz,
    theta: &[f64],
    bra: &StateVector,
    ket: &StateVector,
    x: &PauliSum,
) -> Result<Complex64> {
    let ev = |phase: Complex64| -> Result<f64> {
        let mut s = bra.scaled(Complex64::new(FRAC_1_SQRT_2, 0.0));
        s.axpy(phase * FRAC_1_SQRT_2, ket);
        let psi = ansatz.circuit().apply(theta, &s)?;
        Ok(expectation(&psi, x)?.re)
    };
    let re = 0.5 * (ev(Complex64::new(1.0, 0.0))? - ev(Complex64::new(-1.0, 0.0))?);
    let im = 0.5 * (ev(-I)? - ev(I)?);
    Ok(Complex64::new(re, im))
}

/// `<bra|U^dag(theta) obs U(theta)|ket>` assembled from superposition
/// expectation values of the Hermitian parts `A = (O + O^dag)/2` and
/// `B = (O - O^dag)/2i`. Identical inputs give a plain expectation value.
pub fn transition_amplitude_superposition(
    ansatz: &Ansatz,
    theta: &[f64],
    bra: &StateVector,
    ket: &StateVector,
    obs: &PauliSum,
) -> Result<Complex64> {
    if obs.n_qubits() != ansatz.n_qubits() || bra.n_qubits() != ansatz.n_qubits() || ket.n_qubits() != ansatz.n_qubits()
    {
        return Err(dim_err!("transition amplitude operands disagree on the qubit count"));
    }
    let (a, b) = obs.hermitian_parts();
    if bra.distance(ket) < ORTHO_TOL {
        let psi = ansatz.circuit().apply(theta, ket)?;
        return Ok(Complex64::new(expectation(&psi, &a)?.re, expectation(&psi, &b)?.re));
    }
    if bra.inner(ket).norm() > ORTHO_TOL {
        return Err(config_err!("input states are not orthogonal"));
    }
    Ok(hermitian_transition(ansatz, theta, bra, ket, &a)? + I * hermitian_transition(ansatz, theta, bra, ket, &b)?)
}

/// `C_{mn} = sum V*_{j'' m} V_{j' n} <psi_j''|U^dag obs U|psi_j'>`, i.e.
/// `<E'_m|obs|E'_n>`.
pub fn transition_matrix(result: &SsvqeResult, ansatz: &Ansatz, obs: &PauliSum) -> Result<DMatrix<Complex64>> {
    if result.theta.len() != ansatz.parameter_count() || result.n_qubits != ansatz.n_qubits() {
        return Err(dim_err!("SSVQE result does not belong to this ansatz"));
    }
    let refs = basis_inputs(result.n_qubits, &result.inputs)?;
    let k = refs.len();
    if result.eigvecs.nrows() != k || result.eigvecs.ncols() != k {
        return Err(dim_err!("eigenvector matrix is not {k}x{k}"));
    }
    let mut raw = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            raw[(i, j)] = transition_amplitude_superposition(ansatz, &result.theta, &refs[i], &refs[j], obs)?;
        }
    }
    Ok(result.eigvecs.adjoint() * raw * &result.eigvecs)
}

/// Lehmann weights from one SSVQE run whose inputs contain the ground
/// state input `ground_input` together with one neighbouring particle
/// sector. The ground state is the subspace eigenvector with the largest
/// weight on that input; every other eigenvector contributes
/// `|<G|c|E_m>|^2` to the particle side and `|<E_m|c|G>|^2` to the hole side.
pub fn ssvqe_lehmann(
    result: &SsvqeResult,
    ansatz: &Ansatz,
    mode: &PauliSum,
    ground_input: usize,
) -> Result<LehmannWeights> {
    let g = result
        .inputs
        .iter()
        .position(|&b| b == ground_input)
        .ok_or_else(|| config_err!("ground input {ground_input} is not among the inputs"))?;
    let k = result.inputs.len();
    let m0 = (0..k)
        .max_by(|&a, &b| {
            result.eigvecs[(g, a)]
                .norm_sqr()
                .total_cmp(&result.eigvecs[(g, b)].norm_sqr())
        })
        .expect("nonempty");
    let c = transition_matrix(result, ansatz, mode)?;
    let mut w = LehmannWeights {
        ground_energy: result.energies[m0],
        ..LehmannWeights::default()
    };
    for m in (0..k).filter(|&m| m != m0) {
        w.particle.push((result.energies[m], c[(m0, m)].norm_sqr()));
        w.hole.push((result.energies[m], c[(m, m0)].norm_sqr()));
    }
    Ok(w)
}

/// Particle side of `particle_run` and hole side of `hole_run`; the ground
/// energy is their mean.
pub fn combine_sectors(particle_run: &LehmannWeights, hole_run: &LehmannWeights) -> LehmannWeights {
    LehmannWeights {
        ground_energy: 0.5 * (particle_run.ground_energy + hole_run.ground_energy),
        particle: particle_run.particle.clone(),
        hole: hole_run.hole.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::mode_operator;
    use crate::math::{sqrt, PI};
    use crate::optimize::Method;
    use crate::oracle::{diagonalize, lehmann_weights};
    use crate::pauli::{HubbardModel, PauliString};
    use crate::statevector::{AnsatzKind, Circuit, Gate};
    use crate::testutil::{assert_mat_close, rand_params, rand_pauli_string, rand_state, rng};

    fn gradient_config() -> OptimizerConfig {
        OptimizerConfig {
            method: Method::GradientLineSearch,
            max_iterations: 2000,
            tolerance: 1e-13,
            gradient_tolerance: 1e-9,
            restarts: 4,
            seed: 7,
            init_scale: PI,
        }
    }

    fn label(s: &str) -> usize {
        usize::from_str_radix(s, 2).unwrap()
    }

    fn single_ry() -> Ansatz {
        let c = Circuit::new(1, 1, vec![Gate::ry(1, 0, 0).unwrap()]).unwrap();
        Ansatz::custom(AnsatzKind::HardwareEfficient { depth: 0 }, c)
    }

    fn z() -> PauliSum {
        PauliSum::from_string(Complex64::new(1.0, 0.0), PauliString::from_label("Z").unwrap())
    }

    #[test]
    fn vqe_single_qubit() {
        let r = vqe_minimize(
            &z(),
            &single_ry(),
            &StateVector::zero_state(1).unwrap(),
            &gradient_config(),
        )
        .unwrap();
        assert!((r.energy + 1.0).abs() < 1e-10);
        let nm = OptimizerConfig {
            init_scale: 1.0,
            ..OptimizerConfig::default()
        };
        let r = vqe_minimize(&z(), &single_ry(), &StateVector::zero_state(1).unwrap(), &nm).unwrap();
        assert!((r.energy + 1.0).abs() < 1e-8);
    }

    #[test]
    fn vqe_two_site_hubbard() {
        for (u, exact) in [(3.0, -4.0), (6.0, -(6.0 + sqrt(52.0)) / 2.0)] {
            let h = HubbardModel::two_site(u).qubit_hamiltonian().unwrap();
            let ansatz = Ansatz::hardware_efficient(4, 4).unwrap();
            let r = vqe_minimize(&h, &ansatz, &StateVector::zero_state(4).unwrap(), &gradient_config()).unwrap();
            assert!((r.energy - exact).abs() < 1e-6, "U = {u}: {}", r.energy);
            assert!(r.energy >= exact - 1e-12);
        }
    }

    #[test]
    fn vqe_dimension_mismatch() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let r = vqe_minimize(
            &h,
            &single_ry(),
            &StateVector::zero_state(1).unwrap(),
            &gradient_config(),
        );
        assert!(matches!(r, Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn weighted_toy() {
        let r = ssvqe_weighted(&z(), &single_ry(), &[0, 1], &[2.0, 1.0], &gradient_config()).unwrap();
        assert!((r.energies[0] + 1.0).abs() < 1e-10 && (r.energies[1] - 1.0).abs() < 1e-10);
        let s0 = r.eigenstate(&single_ry(), 0).unwrap();
        assert!(s0.fidelity(&StateVector::basis(1, 1).unwrap()) > 1.0 - 1e-10);
        assert!(matches!(
            ssvqe_weighted(&z(), &single_ry(), &[0, 1], &[1.0, 1.0], &gradient_config()),
            Err(crate::Error::Config(_))
        ));
        assert!(ssvqe_weighted(&z(), &single_ry(), &[0, 0], &[2.0, 1.0], &gradient_config()).is_err());
    }

    #[test]
    fn weighted_single_input_is_vqe() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let ansatz = Ansatz::hardware_efficient(4, 2).unwrap();
        let a = ssvqe_weighted(&h, &ansatz, &[0], &[1.0], &gradient_config()).unwrap();
        let b = vqe_minimize(&h, &ansatz, &StateVector::zero_state(4).unwrap(), &gradient_config()).unwrap();
        assert_eq!(a.theta, b.theta);
        assert!((a.energies[0] - b.energy).abs() < 1e-12);
    }

    fn one_particle() -> Vec<usize> {
        ["0001", "0010", "0100", "1000"].iter().map(|s| label(s)).collect()
    }

    fn three_particle() -> Vec<usize> {
        ["0111", "1011", "1101", "1110"].iter().map(|s| label(s)).collect()
    }

    fn assert_spectrum(got: &[f64], expect: &[f64], tol: f64) {
        let mut g = got.to_vec();
        g.sort_by(f64::total_cmp);
        assert_eq!(g.len(), expect.len());
        for (a, b) in g.iter().zip(expect) {
            assert!((a - b).abs() < tol, "{g:?} vs {expect:?}");
        }
    }

    #[test]
    fn weighted_one_particle_sector() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let ansatz = Ansatz::symmetry_preserving(4, 4).unwrap();
        let r = ssvqe_weighted(&h, &ansatz, &one_particle(), &default_weights(4), &gradient_config()).unwrap();
        assert_spectrum(&r.energies, &[-2.5, -2.5, -0.5, -0.5], 1e-4);
        assert!(r.energies.windows(2).all(|w| w[0] <= w[1] + 1e-6));
    }

    fn check_result_invariants(r: &SsvqeResult) {
        let k = r.inputs.len();
        assert_mat_close(&r.subspace_h, &r.subspace_h.adjoint(), 1e-10);
        assert_mat_close(&(r.eigvecs.adjoint() * &r.eigvecs), &DMatrix::identity(k, k), 1e-10);
        let e = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            k,
            r.energies.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        assert_mat_close(&(&r.subspace_h * &r.eigvecs), &(&r.eigvecs * e), 1e-8);
    }

    #[test]
    fn identical_sectors_match_oracle() {
        for u in [3.0, 6.0] {
            let model = HubbardModel::two_site(u);
            let h = model.qubit_hamiltonian().unwrap();
            let dec = diagonalize(&h).unwrap();
            let ansatz = Ansatz::symmetry_preserving(4, 4).unwrap();
            let one = ssvqe_identical(&h, &ansatz, &one_particle(), &gradient_config()).unwrap();
            let three = ssvqe_identical(&h, &ansatz, &three_particle(), &gradient_config()).unwrap();
            assert_spectrum(&one.energies, &dec.sector_energies(1), 1e-4);
            assert_spectrum(&three.energies, &dec.sector_energies(1), 1e-4);
            check_result_invariants(&one);
            assert!((one.cost - one.energies.iter().sum::<f64>()).abs() < 1e-10);
            assert!((one.cost - one.subspace_h.trace().re).abs() < 1e-10);
        }
    }

    #[test]
    fn ssvqe_lehmann_reproduces_oracle_weights() {
        for u in [3.0, 6.0] {
            let model = HubbardModel::two_site(u);
            let h = model.qubit_hamiltonian().unwrap();
            let dec = diagonalize(&h).unwrap();
            let ansatz = Ansatz::symmetry_preserving(4, 6).unwrap();
            let ground = label("0011");
            let mut particle_inputs = vec![ground];
            particle_inputs.extend(three_particle());
            let mut hole_inputs = vec![ground];
            hole_inputs.extend(one_particle());
            let p = ssvqe_identical(&h, &ansatz, &particle_inputs, &gradient_config()).unwrap();
            let q = ssvqe_identical(&h, &ansatz, &hole_inputs, &gradient_config()).unwrap();
            check_result_invariants(&p);
            assert!((p.energies[0] - dec.ground_energy()).abs() < 1e-4, "{:?}", p.energies);
            for k in [0.0, PI] {
                let c = mode_operator(&model, k).unwrap();
                let w = combine_sectors(
                    &ssvqe_lehmann(&p, &ansatz, &c, ground).unwrap(),
                    &ssvqe_lehmann(&q, &ansatz, &c, ground).unwrap(),
                );
                let got = w.poles(1e-6, 1e-3);
                let expect = lehmann_weights(&dec, &c).unwrap().poles(1e-6, 1e-3);
                assert_eq!(got.len(), expect.len(), "{got:?} vs {expect:?}");
                for (a, b) in got.iter().zip(&expect) {
                    assert!(
                        (a.0 - b.0).abs() < 1e-3 && (a.1 - b.1).abs() < 1e-3,
                        "{got:?} vs {expect:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn transition_matrix_special_cases() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let ansatz = Ansatz::symmetry_preserving(4, 4).unwrap();
        let r = ssvqe_identical(&h, &ansatz, &one_particle(), &gradient_config()).unwrap();
        let id = PauliSum::from_string(Complex64::new(1.0, 0.0), PauliString::identity(4));
        assert_mat_close(
            &transition_matrix(&r, &ansatz, &id).unwrap(),
            &DMatrix::identity(4, 4),
            1e-10,
        );
        let hm = transition_matrix(&r, &ansatz, &h).unwrap();
        let e = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            4,
            r.energies.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        assert_mat_close(&hm, &e, 1e-8);
    }

    #[test]
    fn selection_rule() {
        let model = HubbardModel::two_site(3.0);
        let h = model.qubit_hamiltonian().unwrap();
        let ansatz = Ansatz::symmetry_preserving(4, 2).unwrap();
        let mut r = rng(5);
        let theta = rand_params(&mut r, ansatz.parameter_count());
        let g = StateVector::basis(4, label("0011")).unwrap();
        let c = mode_operator(&model, PI).unwrap();
        let x = transition_amplitude_superposition(&ansatz, &theta, &g, &g, &c).unwrap();
        assert!(x.norm() < 1e-12);
        let e = transition_amplitude_superposition(&ansatz, &theta, &g, &g, &h).unwrap();
        let psi = ansatz.circuit().apply(&theta, &g).unwrap();
        assert!((e - expectation(&psi, &h).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn superposition_protocol_equals_inner_product() {
        let ansatz = Ansatz::hardware_efficient(2, 2).unwrap();
        let mut r = rng(11);
        for _ in 0..200 {
            let theta = rand_params(&mut r, ansatz.parameter_count());
            let i = r.random_range(0..4usize);
            let j = (i + r.random_range(1..4usize)) % 4;
            let bra = StateVector::basis(2, i).unwrap();
            let ket = StateVector::basis(2, j).unwrap();
            let obs = PauliSum::from_terms(
                2,
                (0..3).map(|_| {
                    (
                        Complex64::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)),
                        rand_pauli_string(&mut r, 2),
                    )
                }),
            )
            .unwrap();
            let got = transition_amplitude_superposition(&ansatz, &theta, &bra, &ket, &obs).unwrap();
            let a = ansatz.circuit().apply(&theta, &bra).unwrap();
            let b = ansatz.circuit().apply(&theta, &ket).unwrap();
            assert!((got - a.matrix_element(&obs, &b).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn non_orthogonal_inputs_rejected() {
        let ansatz = Ansatz::hardware_efficient(2, 1).unwrap();
        let mut r = rng(13);
        let a = rand_state(&mut r, 2);
        let b = rand_state(&mut r, 2);
        let obs = PauliSum::from_string(Complex64::new(1.0, 0.0), PauliString::from_label("XZ").unwrap());
        let theta = vec![0.0; ansatz.parameter_count()];
        assert!(matches!(
            transition_amplitude_superposition(&ansatz, &theta, &a, &b, &obs),
            Err(crate::Error::Config(_))
        ));
    }
}
