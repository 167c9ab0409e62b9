//! McLachlan variational real-time evolution.
//!
//! For every branch `|psi_l> = U(theta)|ref_l>` the equations of motion
//! `M theta_dot = V` use
//! `M_ij = (1/L) sum_l Re<d_i psi_l|d_j psi_l>` and
//! `V_i = (1/L) sum_l Im<d_i psi_l|H|psi_l>`,
//! a sign that makes an ansatz containing the exact solution reproduce
//! `exp(-iHt)`. One parameter vector drives all branches, so the learned
//! unitary approximates the evolution on their span.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{config_err, contract_err, dim_err};
use crate::linalg::lstsq;
use crate::pauli::PauliSum;
use crate::statevector::{build_branch_state, Ansatz, Gate, StateVector};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    Analytic,
    /// Central differences with the given parameter step.
    FiniteDifference {
        step: f64,
    },
}

/// Replaces every measured constituent of M and V by the mean of `shots`
/// draws of a +/-1 outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShotNoise {
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqsConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Singular values of M below this are discarded.
    pub svd_cutoff: f64,
    pub derivative_mode: DerivativeMode,
    pub shot_noise: Option<ShotNoise>,
    /// Keep M and V of every step in the trajectory.
    pub record_matrices: bool,
    /// Compute the smallest eigenvalue of M at every step.
    pub check_m: bool,
}

impl Default for VqsConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_max: 10.0,
            svd_cutoff: 1e-8,
            derivative_mode: DerivativeMode::Analytic,
            shot_noise: None,
            record_matrices: false,
            check_m: false,
        }
    }
}

impl VqsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(config_err!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_max >= 0.0) || !self.t_max.is_finite() {
            return Err(config_err!("t_max must be non-negative, got {}", self.t_max));
        }
        if !(self.svd_cutoff >= 0.0) {
            return Err(config_err!("svd_cutoff must be non-negative"));
        }
        if let DerivativeMode::FiniteDifference { step } = self.derivative_mode {
            if !(step > 0.0) {
                return Err(config_err!("finite-difference step must be positive"));
            }
            if self.shot_noise.is_some() {
                return Err(config_err!("shot noise needs analytic derivatives"));
            }
        }
        if let Some(n) = self.shot_noise {
            if n.shots == 0 {
                return Err(config_err!("shot noise needs at least one shot"));
            }
        }
        Ok(())
    }

    /// Number of Euler steps, `round(t_max / dt)`.
    pub fn n_steps(&self) -> usize {
        libm::round(self.t_max / self.dt) as usize
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps()).map(|n| n as f64 * self.dt).collect()
    }
}

/// Per-step record, evaluated at `theta(t_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// `||M theta_dot - V||`.
    pub residual: f64,
    /// Number of singular values kept.
    pub rank: usize,
    /// McLachlan distance of the joint branch state.
    pub delta2: f64,
    /// Two-branch cross term; `None` for other branch counts.
    pub delta12: Option<f64>,
    pub m_min_eigenvalue: Option<f64>,
    pub m: Option<DMatrix<f64>>,
    pub v: Option<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqsTrajectory {
    pub times: Vec<f64>,
    /// `theta` at every time, starting from zero.
    pub thetas: Vec<Vec<f64>>,
    /// One entry per Euler step.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl VqsTrajectory {
    /// `t, theta_0.., residual, delta2, delta12` rows. The last time has no
    /// step record and leaves the diagnostic columns empty.
    pub fn write_csv<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        let n = self.thetas.first().map_or(0, Vec::len);
        write!(w, "t")?;
        for i in 0..n {
            write!(w, ",theta_{i}")?;
        }
        writeln!(w, ",residual,delta2,delta12")?;
        for (step, (t, theta)) in self.times.iter().zip(&self.thetas).enumerate() {
            write!(w, "{t:.10}")?;
            for x in theta {
                write!(w, ",{x:.17e}")?;
            }
            match self.diagnostics.get(step) {
                Some(d) => {
                    write!(w, ",{:.17e},{:.17e},", d.residual, d.delta2)?;
                    if let Some(x) = d.delta12 {
                        write!(w, "{x:.17e}")?;
                    }
                    writeln!(w)?;
                }
                None => writeln!(w, ",,,")?,
            }
        }
        Ok(())
    }
}

/// Least-squares `theta_dot` of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct VqsStep {
    pub theta_dot: DVector<f64>,
    pub residual: f64,
    pub rank: usize,
}

/// Solves `M theta_dot = V` through the SVD, discarding singular values
/// below `svd_cutoff`.
pub fn vqs_step(m: &DMatrix<f64>, v: &DVector<f64>, svd_cutoff: f64) -> Result<VqsStep> {
    if m.nrows() != m.ncols() || m.nrows() != v.len() {
        return Err(dim_err!(
            "M is {}x{} but V has {} entries",
            m.nrows(),
            m.ncols(),
            v.len()
        ));
    }
    let (theta_dot, rank) = lstsq(m, v, svd_cutoff);
    let residual = (m * &theta_dot - v).norm();
    Ok(VqsStep {
        theta_dot,
        residual,
        rank,
    })
}

/// Per-branch data at one parameter point.
struct BranchData {
    psi: StateVector,
    derivs: Vec<StateVector>,
    /// `(g_k, piece_k)` per parameter; only kept for shot noise.
    pieces: Option<Vec<Vec<(Complex64, StateVector)>>>,
}

fn branch_data(
    ansatz: &Ansatz,
    theta: &[f64],
    reference: &StateVector,
    mode: DerivativeMode,
    keep_pieces: bool,
) -> Result<BranchData> {
    let circuit = ansatz.circuit();
    match mode {
        DerivativeMode::Analytic => {
            let (psi, pieces) = circuit.derivative_pieces(theta, reference)?;
            let mut derivs = Vec::with_capacity(pieces.len());
            for (i, ps) in pieces.iter().enumerate() {
                if ps.is_empty() {
                    return Err(config_err!("parameter {i} does not appear in the circuit"));
                }
                let mut d = psi.scaled(ZERO);
                for (g, p) in ps {
                    d.axpy(*g, p);
                }
                derivs.push(d);
            }
            Ok(BranchData {
                psi,
                derivs,
                pieces: keep_pieces.then_some(pieces),
            })
        }
        DerivativeMode::FiniteDifference { step } => {
            let (psi, derivs) = circuit.finite_difference_states(theta, reference, step)?;
            Ok(BranchData {
                psi,
                derivs,
                pieces: None,
            })
        }
    }
}

fn check_branches(ansatz: &Ansatz, branches: &[StateVector], h: &PauliSum) -> Result<()> {
    if branches.is_empty() {
        return Err(contract_err!("at least one branch state is required"));
    }
    let n = ansatz.n_qubits();
    if h.n_qubits() != n {
        return Err(dim_err!("{}-qubit Hamiltonian with a {n}-qubit ansatz", h.n_qubits()));
    }
    if let Some(b) = branches.iter().find(|b| b.n_qubits() != n) {
        return Err(dim_err!("{}-qubit branch with a {n}-qubit ansatz", b.n_qubits()));
    }
    Ok(())
}

/// Mean of `shots` +/-1 draws with expectation `x`.
fn sample_mean(rng: &mut ChaCha8Rng, x: f64, shots: u64) -> f64 {
    let p = ((1.0 + x.clamp(-1.0, 1.0)) / 2.0).clamp(0.0, 1.0);
    let ups = Binomial::new(shots, p).expect("valid probability").sample(rng);
    (2.0 * ups as f64 - shots as f64) / shots as f64
}

fn entry_rng(noise: &ShotNoise, step: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed ^ (step as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

fn mv_from_data(
    data: &[BranchData],
    h: &PauliSum,
    noise: Option<(&ShotNoise, usize)>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = data[0].derivs.len();
    let l = data.len() as f64;
    let mut m = DMatrix::zeros(n, n);
    let mut v = DVector::zeros(n);
    match noise {
        None => {
            for b in data {
                let hpsi = b.psi.apply_sum(h)?;
                for i in 0..n {
                    for j in i..n {
                        let x = b.derivs[i].inner(&b.derivs[j]).re / l;
                        m[(i, j)] += x;
                        if i != j {
                            m[(j, i)] += x;
                        }
                    }
                    v[i] += b.derivs[i].inner(&hpsi).im / l;
                }
            }
        }
        Some((noise, step)) => {
            let terms: Vec<_> = h.terms().map(|(c, p)| (c.re, *p)).collect();
            for (bi, b) in data.iter().enumerate() {
                let pieces = b.pieces.as_ref().expect("pieces kept for shot noise");
                let coeff = |g: Complex64| g.im;
                let base = (bi as u64) << 40;
                for i in 0..n {
                    for j in i..n {
                        let mut rng = entry_rng(noise, step, base | (i * n + j) as u64);
                        let mut x = 0.0;
                        for (gk, pk) in &pieces[i] {
                            for (gl, pl) in &pieces[j] {
                                let exact = pk.inner(pl).re;
                                x += coeff(*gk) * coeff(*gl) * sample_mean(&mut rng, exact, noise.shots);
                            }
                        }
                        m[(i, j)] += x / l;
                        if i != j {
                            m[(j, i)] += x / l;
                        }
                    }
                    let mut rng = entry_rng(noise, step, base | (1 << 39) | i as u64);
                    let mut x = 0.0;
                    for (gk, pk) in &pieces[i] {
                        for (c, p) in &terms {
                            let exact = pk.pauli_matrix_element(p, &b.psi)?.re;
                            x -= coeff(*gk) * c * sample_mean(&mut rng, exact, noise.shots);
                        }
                    }
                    v[i] += x / l;
                }
            }
        }
    }
    Ok((m, v))
}

/// Branch-averaged McLachlan `(M, V)` at `theta`. With shot noise, `step`
/// selects the deterministic random stream.
pub fn assemble_mv(
    ansatz: &Ansatz,
    theta: &[f64],
    branches: &[StateVector],
    hamiltonian: &PauliSum,
    mode: DerivativeMode,
    noise: Option<(&ShotNoise, usize)>,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_branches(ansatz, branches, hamiltonian)?;
    if noise.is_some() && mode != DerivativeMode::Analytic {
        return Err(config_err!("shot noise needs analytic derivatives"));
    }
    let data = branches
        .iter()
        .map(|r| branch_data(ansatz, theta, r, mode, noise.is_some()))
        .collect::<Result<Vec<_>>>()?;
    mv_from_data(&data, hamiltonian, noise)
}

/// McLachlan distances of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Delta2 {
    /// `<dPsi|dPsi> - |<dPsi|Psi>|^2` of the joint branch state.
    pub total: f64,
    pub per_branch: Vec<f64>,
    /// `(1/4)|<d psi_1|psi_1> - <d psi_2|psi_2>|^2` for two branches.
    pub delta12: Option<f64>,
    /// `total - mean(per_branch) - delta12`, zero up to round-off.
    pub identity_residual: Option<f64>,
}

fn delta2_from_data(data: &[BranchData], theta_dot: &[f64], h: &PauliSum) -> Result<Delta2> {
    let mut deltas = Vec::with_capacity(data.len());
    let mut per_branch = Vec::with_capacity(data.len());
    let mut overlaps = Vec::with_capacity(data.len());
    for b in data {
        let mut d = b.psi.apply_sum(h)?.scaled(-I);
        for (td, dk) in theta_dot.iter().zip(&b.derivs) {
            d.axpy(Complex64::new(-td, 0.0), dk);
        }
        let x = d.inner(&b.psi);
        per_branch.push(d.inner(&d).re - x.norm_sqr());
        overlaps.push(x);
        deltas.push(d);
    }
    let psis: Vec<StateVector> = data.iter().map(|b| b.psi.clone()).collect();
    let ones = vec![Complex64::new(1.0, 0.0); data.len()];
    let joint_delta = build_branch_state(&deltas, &ones)?;
    let joint_psi = build_branch_state(&psis, &ones)?;
    let total = joint_delta.inner(&joint_delta).re - joint_delta.inner(&joint_psi).norm_sqr();
    let (delta12, identity_residual) = if data.len() == 2 {
        let d12 = 0.25 * (overlaps[0] - overlaps[1]).norm_sqr();
        let mean = 0.5 * (per_branch[0] + per_branch[1]);
        (Some(d12), Some(total - mean - d12))
    } else {
        (None, None)
    };
    Ok(Delta2 {
        total,
        per_branch,
        delta12,
        identity_residual,
    })
}

/// `Delta^2` of the step `theta -> theta + theta_dot dt` for the joint
/// state and each branch, with the two-branch decomposition.
pub fn diagnostics_delta2(
    ansatz: &Ansatz,
    theta: &[f64],
    theta_dot: &[f64],
    branches: &[StateVector],
    hamiltonian: &PauliSum,
) -> Result<Delta2> {
    check_branches(ansatz, branches, hamiltonian)?;
    if theta_dot.len() != ansatz.parameter_count() {
        return Err(dim_err!(
            "theta_dot has {} entries for {} parameters",
            theta_dot.len(),
            ansatz.parameter_count()
        ));
    }
    let data = branches
        .iter()
        .map(|r| branch_data(ansatz, theta, r, DerivativeMode::Analytic, false))
        .collect::<Result<Vec<_>>>()?;
    delta2_from_data(&data, theta_dot, hamiltonian)
}

/// Forward-Euler McLachlan trajectory from `theta = 0`.
///
/// The identity part of `hamiltonian` only produces a global phase and is
/// dropped before assembling V. Every branch must be left unchanged by the
/// ansatz at `theta = 0`.
pub fn integrate(
    ansatz: &Ansatz,
    branches: &[StateVector],
    hamiltonian: &PauliSum,
    config: &VqsConfig,
) -> Result<VqsTrajectory> {
    integrate_with(ansatz, branches, hamiltonian, config, |_, _, _, _| Ok(()))
}

/// As [`integrate`], calling `observer(step, t, theta, branch states)` at
/// every time point including the last.
pub fn integrate_with<F>(
    ansatz: &Ansatz,
    branches: &[StateVector],
    hamiltonian: &PauliSum,
    config: &VqsConfig,
    mut observer: F,
) -> Result<VqsTrajectory>
where
    F: FnMut(usize, f64, &[f64], &[StateVector]) -> Result<()>,
{
    config.validate()?;
    check_branches(ansatz, branches, hamiltonian)?;
    let h = hamiltonian.without_identity();
    let n_params = ansatz.parameter_count();
    let mut theta = vec![0.0; n_params];
    for (l, b) in branches.iter().enumerate() {
        let start = ansatz.circuit().apply(&theta, b)?;
        if start.distance(b) > 1e-12 {
            return Err(contract_err!(
                "ansatz at zero parameters changes branch {l}; VQS needs U(0) = I"
            ));
        }
    }
    let n_steps = config.n_steps();
    let times = config.times();
    let mut thetas = Vec::with_capacity(n_steps + 1);
    let mut diagnostics = Vec::with_capacity(n_steps);
    let keep_pieces = config.shot_noise.is_some();
    for (step, &t) in times.iter().enumerate() {
        if step == n_steps {
            let states = branches
                .iter()
                .map(|b| ansatz.circuit().apply(&theta, b))
                .collect::<Result<Vec<_>>>()?;
            observer(step, t, &theta, &states)?;
            thetas.push(theta.clone());
            break;
        }
        let data = branches
            .iter()
            .map(|b| branch_data(ansatz, &theta, b, config.derivative_mode, keep_pieces))
            .collect::<Result<Vec<_>>>()?;
        let states: Vec<StateVector> = data.iter().map(|d| d.psi.clone()).collect();
        observer(step, t, &theta, &states)?;
        let noise = config.shot_noise.as_ref().map(|n| (n, step));
        let (m, v) = mv_from_data(&data, &h, noise)?;
        let sol = vqs_step(&m, &v, config.svd_cutoff)?;
        if sol.theta_dot.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalAbort {
                step,
                reason: String::from("non-finite theta_dot"),
            });
        }
        let theta_dot: Vec<f64> = sol.theta_dot.iter().copied().collect();
        let d2 = delta2_from_data(&data, &theta_dot, &h)?;
        let m_min_eigenvalue = config.check_m.then(|| {
            let eig = nalgebra::SymmetricEigen::new(m.clone());
            eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        });
        diagnostics.push(StepDiagnostics {
            residual: sol.residual,
            rank: sol.rank,
            delta2: d2.total,
            delta12: d2.delta12,
            m_min_eigenvalue,
            m: config.record_matrices.then(|| m.clone()),
            v: config.record_matrices.then(|| v.clone()),
        });
        thetas.push(theta.clone());
        for (x, d) in theta.iter_mut().zip(&theta_dot) {
            *x += d * config.dt;
        }
    }
    Ok(VqsTrajectory {
        times,
        thetas,
        diagnostics,
    })
}

/// First-order product formula `(prod_m exp(-i c_m P_m t/n_d))^{n_d}` in
/// canonical term order. The identity term contributes its exact phase.
pub fn trotter_evolve(hamiltonian: &PauliSum, state: &StateVector, t: f64, n_d: usize) -> Result<StateVector> {
    if n_d == 0 {
        return Err(config_err!("Trotter depth must be at least 1"));
    }
    if !hamiltonian.is_hermitian(1e-12) {
        return Err(contract_err!("Trotter evolution needs a Hermitian Hamiltonian"));
    }
    if hamiltonian.n_qubits() != state.n_qubits() {
        return Err(dim_err!(
            "{}-qubit Hamiltonian on a {}-qubit state",
            hamiltonian.n_qubits(),
            state.n_qubits()
        ));
    }
    let tau = t / n_d as f64;
    let gates: Vec<Gate> = hamiltonian
        .non_identity_terms()
        .into_iter()
        .map(|(c, p)| Gate::Rotation {
            pauli: p,
            param: None,
            coeff: 0.0,
            offset: -c.re * tau,
        })
        .collect();
    let mut out = state.clone();
    for _ in 0..n_d {
        for g in &gates {
            out = crate::statevector::apply_gate(&out, g, None)?;
        }
    }
    let phase = crate::math::cis(-hamiltonian.identity_coefficient().re * t);
    Ok(out.scaled(phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin};
    use crate::pauli::{HubbardModel, PauliString};
    use crate::statevector::{prepare_ansatz_state, AnsatzKind, Circuit};
    use crate::testutil::{rand_params, rand_state, rng};
    use rand::Rng;

    fn ps(label: &str) -> PauliString {
        PauliString::from_label(label).unwrap()
    }

    fn single_rotation(label: &str) -> Ansatz {
        let c = Circuit::new(label.len(), 1, vec![Gate::rotation(ps(label), 0, 1.0)]).unwrap();
        Ansatz::custom(AnsatzKind::VariationalHamiltonian { depth: 1, n_terms: 1 }, c)
    }

    fn exact(h: &PauliSum, s: &StateVector, t: f64) -> StateVector {
        let dec = crate::oracle::diagonalize(h).unwrap();
        crate::oracle::exact_evolve(&dec, s, t).unwrap()
    }

    #[test]
    fn single_qubit_x_case() {
        let a = single_rotation("X");
        let h = PauliSum::from_string(Complex64::new(1.0, 0.0), ps("X"));
        let zero = StateVector::zero_state(1).unwrap();
        let (m, v) = assemble_mv(
            &a,
            &[0.0],
            core::slice::from_ref(&zero),
            &h,
            DerivativeMode::Analytic,
            None,
        )
        .unwrap();
        assert!((m[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((v[0] + 1.0).abs() < 1e-15);
        let config = VqsConfig {
            dt: 0.01,
            t_max: 2.0,
            ..VqsConfig::default()
        };
        let traj = integrate(&a, core::slice::from_ref(&zero), &h, &config).unwrap();
        let theta = traj.thetas.last().unwrap();
        let psi = prepare_ansatz_state(&a, theta, &zero).unwrap();
        let target =
            StateVector::from_amplitudes(vec![Complex64::new(cos(2.0), 0.0), Complex64::new(0.0, -sin(2.0))]).unwrap();
        assert!(psi.distance(&target) < 1e-12);
    }

    #[test]
    fn stationary_branch() {
        let a = single_rotation("X");
        let h = PauliSum::from_string(Complex64::new(1.0, 0.0), ps("Z"));
        let zero = StateVector::zero_state(1).unwrap();
        let (m, v) = assemble_mv(&a, &[0.0], &[zero], &h, DerivativeMode::Analytic, None).unwrap();
        assert!(v[0].abs() < 1e-15);
        let step = vqs_step(&m, &v, 1e-8).unwrap();
        assert!(step.theta_dot[0].abs() < 1e-15);
    }

    #[test]
    fn averaging_is_idempotent() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let a = Ansatz::variational_hamiltonian(&h, 2).unwrap();
        let mut r = rng(41);
        let theta = rand_params(&mut r, a.parameter_count());
        let b = rand_state(&mut r, 4);
        let one = assemble_mv(
            &a,
            &theta,
            core::slice::from_ref(&b),
            &h,
            DerivativeMode::Analytic,
            None,
        )
        .unwrap();
        let two = assemble_mv(&a, &theta, &[b.clone(), b], &h, DerivativeMode::Analytic, None).unwrap();
        assert!((one.0 - two.0).norm() < 1e-14);
        assert!((one.1 - two.1).norm() < 1e-14);
        assert!(assemble_mv(&a, &theta, &[], &h, DerivativeMode::Analytic, None).is_err());
    }

    #[test]
    fn step_solves() {
        let m = DMatrix::identity(3, 3);
        let v = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert!((vqs_step(&m, &v, 1e-8).unwrap().theta_dot - &v).norm() < 1e-15);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e-12]));
        let v = DVector::from_vec(vec![1.0, 1.0]);
        let s = vqs_step(&m, &v, 1e-8).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.theta_dot[0] - 1.0).abs() < 1e-15 && s.theta_dot[1] == 0.0);
        let mut r = rng(43);
        for _ in 0..20 {
            let b = DMatrix::from_fn(6, 6, |_, _| r.random::<f64>() - 0.5);
            let m = &b * b.transpose() + DMatrix::identity(6, 6) * 0.1;
            let w = DVector::from_fn(6, |_, _| r.random::<f64>() - 0.5);
            let s = vqs_step(&m, &(&m * &w), 1e-8).unwrap();
            assert!((s.theta_dot - w).norm() < 1e-8);
        }
        assert!(vqs_step(&DMatrix::identity(2, 2), &DVector::zeros(3), 1e-8).is_err());
    }

    #[test]
    fn rank_deficient_metric_at_zero() {
        // every layer of the VHA has the same tangent at theta = 0
        let h = HubbardModel::two_site(3.0)
            .qubit_hamiltonian()
            .unwrap()
            .without_identity();
        let a = Ansatz::variational_hamiltonian(&h, 8).unwrap();
        let dec = crate::oracle::diagonalize(&h).unwrap();
        let g = dec.state(0).unwrap();
        let theta = vec![0.0; a.parameter_count()];
        for branches in [vec![g.clone()], vec![g.apply_pauli(&ps("ZZXI")).unwrap()]] {
            let (m, v) = assemble_mv(&a, &theta, &branches, &h, DerivativeMode::Analytic, None).unwrap();
            let s = vqs_step(&m, &v, 1e-8).unwrap();
            assert!(s.rank < a.parameter_count());
            assert!(s.residual < 1e-10 * v.norm().max(1.0), "residual {}", s.residual);
        }
    }

    #[test]
    fn single_term_hamiltonian_is_exact() {
        let h = PauliSum::from_string(Complex64::new(0.7, 0.0), ps("XZY"));
        let a = Ansatz::variational_hamiltonian(&h, 1).unwrap();
        let mut r = rng(47);
        let s = rand_state(&mut r, 3);
        let config = VqsConfig {
            dt: 0.05,
            t_max: 5.0,
            ..VqsConfig::default()
        };
        let traj = integrate_with(&a, core::slice::from_ref(&s), &h, &config, |_, t, _, states| {
            let f = states[0].fidelity(&exact(&h, &s, t));
            assert!(f > 1.0 - 1e-10, "fidelity {f} at t = {t}");
            Ok(())
        })
        .unwrap();
        assert_eq!(traj.thetas.len(), 101);
    }

    #[test]
    fn commuting_manifold_tracks_exact_dynamics() {
        // every term commutes, so one layer holds the exact solution
        let h = PauliSum::from_terms(
            2,
            [
                (Complex64::new(0.8, 0.0), ps("XX")),
                (Complex64::new(-0.3, 0.0), ps("YY")),
                (Complex64::new(0.5, 0.0), ps("ZZ")),
                (Complex64::new(1.5, 0.0), ps("II")),
            ],
        )
        .unwrap();
        let a = Ansatz::variational_hamiltonian(&h, 1).unwrap();
        let mut r = rng(53);
        let branches = [rand_state(&mut r, 2), rand_state(&mut r, 2)];
        let config = VqsConfig {
            dt: 0.02,
            t_max: 4.0,
            check_m: true,
            ..VqsConfig::default()
        };
        let traj = integrate_with(&a, &branches, &h, &config, |_, t, _, states| {
            for (s, b) in states.iter().zip(&branches) {
                assert!(s.fidelity(&exact(&h, b, t)) > 1.0 - 1e-8);
            }
            Ok(())
        })
        .unwrap();
        for d in &traj.diagnostics {
            assert!(d.delta2.abs() < 1e-10);
            assert!(d.m_min_eigenvalue.unwrap() > -1e-10);
        }
    }

    #[test]
    fn euler_error_is_second_order_per_step() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let a = Ansatz::variational_hamiltonian(&h, 1).unwrap();
        let mut r = rng(59);
        let s = rand_state(&mut r, 4);
        let theta = rand_params(&mut r, a.parameter_count());
        let h0 = h.without_identity();
        // local error of one Euler step against a fine reference
        let flow = |dt: f64, n: usize| {
            let mut th = theta.clone();
            for _ in 0..n {
                let (m, v) =
                    assemble_mv(&a, &th, core::slice::from_ref(&s), &h0, DerivativeMode::Analytic, None).unwrap();
                let d = vqs_step(&m, &v, 1e-8).unwrap().theta_dot;
                th.iter_mut().zip(d.iter()).for_each(|(x, y)| *x += y * dt);
            }
            prepare_ansatz_state(&a, &th, &s).unwrap()
        };
        let reference = flow(1e-4, 400);
        let e1 = flow(0.04, 1).distance(&reference);
        let e2 = flow(0.02, 2).distance(&reference);
        // halving the step over a fixed interval halves the global error
        let ratio = e1 / e2;
        assert!(ratio > 1.7 && ratio < 2.3, "ratio {ratio}");
    }

    #[test]
    fn delta2_decomposition_on_random_instances() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let a = Ansatz::variational_hamiltonian(&h, 2).unwrap();
        let mut r = rng(61);
        for _ in 0..100 {
            let theta = rand_params(&mut r, a.parameter_count());
            let theta_dot = rand_params(&mut r, a.parameter_count());
            let b = [rand_state(&mut r, 4), rand_state(&mut r, 4)];
            let d = diagnostics_delta2(&a, &theta, &theta_dot, &b, &h).unwrap();
            assert!(d.identity_residual.unwrap().abs() < 1e-10);
            assert!(d.delta12.unwrap() >= 0.0);
            let same = diagnostics_delta2(&a, &theta, &theta_dot, &[b[0].clone(), b[0].clone()], &h).unwrap();
            assert!(same.delta12.unwrap() < 1e-24);
        }
    }

    #[test]
    fn shot_noise_converges() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let a = Ansatz::variational_hamiltonian(&h, 1).unwrap();
        let mut r = rng(67);
        let theta = rand_params(&mut r, a.parameter_count());
        let b = [rand_state(&mut r, 4)];
        let exact = assemble_mv(&a, &theta, &b, &h, DerivativeMode::Analytic, None).unwrap();
        let shots = 1_000_000;
        let noise = ShotNoise { shots, seed: 9 };
        let noisy = assemble_mv(&a, &theta, &b, &h, DerivativeMode::Analytic, Some((&noise, 0))).unwrap();
        let again = assemble_mv(&a, &theta, &b, &h, DerivativeMode::Analytic, Some((&noise, 0))).unwrap();
        assert_eq!(noisy, again);
        let bound = 3.0 / libm::sqrt(shots as f64);
        assert!((&noisy.0 - &exact.0).amax() < bound);
        // V sums one draw per Hamiltonian term weighted by c_m
        let v_bound = bound * h.l1_norm();
        assert!((&noisy.1 - &exact.1).amax() < v_bound);
        assert!(noisy.0 != exact.0);
    }

    #[test]
    fn trotter_cases() {
        let mut r = rng(71);
        let s = rand_state(&mut r, 2);
        let commuting = PauliSum::from_terms(
            2,
            [
                (Complex64::new(0.8, 0.0), ps("XX")),
                (Complex64::new(0.5, 0.0), ps("ZZ")),
                (Complex64::new(0.25, 0.0), ps("II")),
            ],
        )
        .unwrap();
        let e = exact(&commuting, &s, 3.0);
        assert!(trotter_evolve(&commuting, &s, 3.0, 1).unwrap().distance(&e) < 1e-12);
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let s4 = rand_state(&mut r, 4);
        let e = exact(&h, &s4, 1.0);
        let err4 = trotter_evolve(&h, &s4, 1.0, 4).unwrap().distance(&e);
        let err16 = trotter_evolve(&h, &s4, 1.0, 16).unwrap().distance(&e);
        let ratio = err4 / err16;
        assert!(ratio > 3.5 && ratio < 4.5, "ratio {ratio}");
        assert!(trotter_evolve(&h, &s4, 1.0, 0).is_err());
    }

    #[test]
    fn vha_step_matches_trotter_step() {
        let h = HubbardModel::two_site(3.0).qubit_hamiltonian().unwrap();
        let a = Ansatz::variational_hamiltonian(&h, 1).unwrap();
        let dt = 0.13;
        let theta: Vec<f64> = h.non_identity_terms().iter().map(|(c, _)| -c.re * dt).collect();
        let mut r = rng(73);
        let s = rand_state(&mut r, 4);
        let vha = prepare_ansatz_state(&a, &theta, &s).unwrap();
        let trot = trotter_evolve(&h.without_identity(), &s, dt, 1).unwrap();
        assert!(vha.distance(&trot) < 1e-14);
    }

    #[test]
    fn rejects_ansatz_not_identity_at_zero() {
        let a = Ansatz::hardware_efficient(2, 1).unwrap();
        let h = PauliSum::from_string(Complex64::new(1.0, 0.0), ps("XX"));
        let s = StateVector::from_amplitudes(vec![Complex64::new(0.5, 0.0); 4]).unwrap();
        assert!(matches!(
            integrate(&a, &[s], &h, &VqsConfig::default()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn config_validation_and_csv() {
        let bad = VqsConfig {
            dt: 0.0,
            ..VqsConfig::default()
        };
        assert!(bad.validate().is_err());
        let fd_noise = VqsConfig {
            derivative_mode: DerivativeMode::FiniteDifference { step: 1e-4 },
            shot_noise: Some(ShotNoise { shots: 10, seed: 0 }),
            ..VqsConfig::default()
        };
        assert!(fd_noise.validate().is_err());
        let a = single_rotation("X");
        let h = PauliSum::from_string(Complex64::new(1.0, 0.0), ps("X"));
        let config = VqsConfig {
            dt: 0.5,
            t_max: 1.0,
            ..VqsConfig::default()
        };
        let traj = integrate(&a, &[StateVector::zero_state(1).unwrap()], &h, &config).unwrap();
        let mut out = String::new();
        traj.write_csv(&mut out).unwrap();
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], "t,theta_0,residual,delta2,delta12");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with(",,,"));
    }
}
