//! Retarded Green's functions, spectral functions and linear response.
//!
//! With `c_k = sum_i lambda_i P_i` after the Jordan-Wigner mapping,
//!
//! `G(t) = -i sum_ij lambda_i conj(lambda_j) (A_ij(t) + conj(A_ij(t)))`,
//! `A_ij(t) = <U G|P_i|U P_j G>`,
//!
//! where `U` approximates `exp(-iHt)`. The first term is the particle
//! contribution `<G|U^dag c U c^dag|G>`; the hole contribution
//! `<G|c^dag U^dag c U|G>` is its conjugate term by term, so one evolution of
//! the pair `{|G>, P_j|G>}` per `j` yields both.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{config_err, contract_err, dim_err};
use crate::math::{cis, exp, PI};
use crate::oracle::{exact_evolve, EigenDecomposition};
use crate::pauli::{jordan_wigner, momentum_mode, HubbardModel, PauliString, PauliSum, Spin};
use crate::statevector::{build_branch_state, Ansatz, StateVector};
use crate::vqs::{integrate_with, trotter_evolve, VqsConfig, VqsTrajectory};
use crate::Result;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Half-width of the default frequency grid.
pub const DEFAULT_OMEGA_MAX: f64 = 5.0;
/// The default grid has `2 * DEFAULT_N_OMEGA + 1` points.
pub const DEFAULT_N_OMEGA: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GreenMethod {
    Vqs,
    Trotter,
    Exact,
}

impl GreenMethod {
    pub fn name(self) -> &'static str {
        match self {
            GreenMethod::Vqs => "vqs",
            GreenMethod::Trotter => "trotter",
            GreenMethod::Exact => "exact",
        }
    }
}

/// Sampled `G^R_k(t)` with `Theta(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensSeries {
    pub k: f64,
    pub hopping: f64,
    pub interaction: f64,
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub method: GreenMethod,
}

impl GreensSeries {
    /// Uniform spacing of the time grid.
    pub fn dt(&self) -> Result<f64> {
        uniform_step(&self.times)
    }

    /// `t,re_G,im_G` rows.
    pub fn write_csv<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        writeln!(w, "t,re_G,im_G")?;
        for (t, g) in self.times.iter().zip(&self.values) {
            writeln!(w, "{t:.10},{:.17e},{:.17e}", g.re, g.im)?;
        }
        Ok(())
    }
}

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Err(dim_err!("a time series needs at least two samples"));
    }
    if times[0].abs() > 1e-12 {
        return Err(contract_err!("time series must start at t = 0"));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(contract_err!("time grid must increase"));
    }
    for (n, t) in times.iter().enumerate() {
        if (t - n as f64 * dt).abs() > 1e-9 * (1.0 + t.abs()) {
            return Err(contract_err!("time grid is not uniform at sample {n}"));
        }
    }
    Ok(dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralSource {
    Fourier,
    Lehmann,
    LehmannFiniteT { beta: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub eta: f64,
    pub source: SpectralSource,
}

impl SpectralData {
    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        self.omegas
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(w, a)| 0.5 * (w[1] - w[0]) * (a[0] + a[1]))
            .sum()
    }

    /// Grid points that are strict local maxima above `min_height`.
    pub fn peaks(&self, min_height: f64) -> Vec<f64> {
        let v = &self.values;
        (1..v.len().saturating_sub(1))
            .filter(|&n| v[n] > v[n - 1] && v[n] >= v[n + 1] && v[n] > min_height)
            .map(|n| self.omegas[n])
            .collect()
    }

    /// `omega,A` rows.
    pub fn write_csv<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        writeln!(w, "omega,A")?;
        for (o, a) in self.omegas.iter().zip(&self.values) {
            writeln!(w, "{o:.10},{a:.17e}")?;
        }
        Ok(())
    }
}

/// `n_points` evenly spaced frequencies on `[lo, hi]`.
pub fn omega_grid(lo: f64, hi: f64, n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 || !(hi > lo) {
        return Err(config_err!("frequency grid needs hi > lo and two points"));
    }
    let step = (hi - lo) / (n_points - 1) as f64;
    Ok((0..n_points).map(|n| lo + n as f64 * step).collect())
}

/// 10001 points on `[-5, 5]`.
pub fn default_omega_grid() -> Vec<f64> {
    omega_grid(-DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_MAX, 2 * DEFAULT_N_OMEGA + 1).expect("valid")
}

fn check_eta(eta: f64) -> Result<()> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(config_err!("eta must be positive, got {eta}"));
    }
    Ok(())
}

/// Jordan-Wigner image of `c_{k, up}`.
pub fn mode_operator(model: &HubbardModel, k: f64) -> Result<PauliSum> {
    jordan_wigner(&momentum_mode(model, k, Spin::Up)?, model.n_qubits())
}

/// `<Psi|X_a P|Psi> + i <Psi|Y_a P|Psi>` for a two-branch state
/// `(|0>_a|a> + |1>_a|b>)/sqrt(2)` with the ancilla on the highest qubit.
/// Equals `<a|P|b>`.
pub fn amplitude_hadamard(branch: &StateVector, p: &PauliString) -> Result<Complex64> {
    let n = p.n_qubits();
    if branch.n_qubits() != n + 1 {
        return Err(dim_err!(
            "{}-qubit branch state for a {n}-qubit observable",
            branch.n_qubits()
        ));
    }
    let half = 1usize << n;
    let amps = branch.amplitudes();
    let w0: f64 = amps[..half].iter().map(|a| a.norm_sqr()).sum();
    let w1: f64 = amps[half..].iter().map(|a| a.norm_sqr()).sum();
    if (w0 - 0.5).abs() > 1e-10 || (w1 - 0.5).abs() > 1e-10 {
        return Err(contract_err!(
            "ancilla branches carry weights {w0} and {w1}, expected 1/2 each"
        ));
    }
    let xa = p.tensor(&PauliString::from_label("X")?)?;
    let ya = p.tensor(&PauliString::from_label("Y")?)?;
    let re = branch.pauli_matrix_element(&xa, branch)?;
    let im = branch.pauli_matrix_element(&ya, branch)?;
    Ok(re + I * im)
}

/// Hadamard-test amplitude `<G|U^dag P_i U P_j|G>` built from the ansatz.
pub fn amplitude_hadamard_circuit(
    ansatz: &Ansatz,
    theta: &[f64],
    ground: &StateVector,
    p_j: &PauliString,
    p_i: &PauliString,
) -> Result<Complex64> {
    let a = ansatz.circuit().apply(theta, ground)?;
    let b = ansatz.circuit().apply(theta, &ground.apply_pauli(p_j)?)?;
    amplitude_hadamard(&build_branch_state(&[a, b], &[ONE, ONE])?, p_i)
}

/// How `A_ij` is read off the evolved states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudePath {
    /// Inner product of the two evolved branches.
    Direct,
    /// Simulated Hadamard test on the ancilla-augmented state.
    Hadamard,
    /// Both, failing if they differ by more than `1e-10`.
    Checked,
}

fn amplitude(a: &StateVector, b: &StateVector, p: &PauliString, path: AmplitudePath) -> Result<Complex64> {
    let direct = || a.pauli_matrix_element(p, b);
    let hadamard = || amplitude_hadamard(&build_branch_state(&[a.clone(), b.clone()], &[ONE, ONE])?, p);
    match path {
        AmplitudePath::Direct => direct(),
        AmplitudePath::Hadamard => hadamard(),
        AmplitudePath::Checked => {
            let (x, y) = (direct()?, hadamard()?);
            if (x - y).norm() > 1e-10 {
                return Err(contract_err!("Hadamard amplitude {y} differs from inner product {x}"));
            }
            Ok(x)
        }
    }
}

/// Time evolution used to build `A_ij(t)`.
#[derive(Debug, Clone, Copy)]
pub enum Propagator<'a> {
    Exact(&'a EigenDecomposition),
    /// First-order product formula with `n_d` steps over the whole time `t`.
    Trotter {
        hamiltonian: &'a PauliSum,
        n_d: usize,
    },
    Vqs {
        ansatz: &'a Ansatz,
        hamiltonian: &'a PauliSum,
        config: &'a VqsConfig,
    },
}

impl Propagator<'_> {
    fn method(&self) -> GreenMethod {
        match self {
            Propagator::Exact(_) => GreenMethod::Exact,
            Propagator::Trotter { .. } => GreenMethod::Trotter,
            Propagator::Vqs { .. } => GreenMethod::Vqs,
        }
    }
}

/// Amplitudes of one branch pair: `values[t][i] = <U G|P_i|U P_j G>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnAmplitudes {
    pub times: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    pub trajectory: Option<VqsTrajectory>,
}

/// Evolves `{|G>, P_j|G>}` and records `<U G|P_i|U P_j G>` for every `P_i`.
/// The VQS propagator uses its own time grid and ignores `times`.
pub fn column_amplitudes(
    propagator: &Propagator<'_>,
    ground: &StateVector,
    p_j: &PauliString,
    p_is: &[PauliString],
    times: &[f64],
    path: AmplitudePath,
) -> Result<ColumnAmplitudes> {
    let pj_ground = ground.apply_pauli(p_j)?;
    let row = |a: &StateVector, b: &StateVector| -> Result<Vec<Complex64>> {
        p_is.iter().map(|p| amplitude(a, b, p, path)).collect()
    };
    match propagator {
        Propagator::Exact(dec) => {
            let values = times
                .iter()
                .map(|&t| row(&exact_evolve(dec, ground, t)?, &exact_evolve(dec, &pj_ground, t)?))
                .collect::<Result<_>>()?;
            Ok(ColumnAmplitudes {
                times: times.to_vec(),
                values,
                trajectory: None,
            })
        }
        Propagator::Trotter { hamiltonian, n_d } => {
            let values = times
                .iter()
                .map(|&t| {
                    row(
                        &trotter_evolve(hamiltonian, ground, t, *n_d)?,
                        &trotter_evolve(hamiltonian, &pj_ground, t, *n_d)?,
                    )
                })
                .collect::<Result<_>>()?;
            Ok(ColumnAmplitudes {
                times: times.to_vec(),
                values,
                trajectory: None,
            })
        }
        Propagator::Vqs {
            ansatz,
            hamiltonian,
            config,
        } => {
            let mut values = Vec::with_capacity(config.n_steps() + 1);
            let branches = [ground.clone(), pj_ground];
            let trajectory = integrate_with(ansatz, &branches, hamiltonian, config, |_, _, _, states| {
                values.push(row(&states[0], &states[1])?);
                Ok(())
            })?;
            Ok(ColumnAmplitudes {
                times: trajectory.times.clone(),
                values,
                trajectory: Some(trajectory),
            })
        }
    }
}

/// All columns from a single VQS run over the `1 + N` branches
/// `{|G>, P_1|G>, ..., P_N|G>}`. Returns `[j][t][i]` amplitudes.
pub fn joint_vqs_amplitudes(
    ansatz: &Ansatz,
    hamiltonian: &PauliSum,
    config: &VqsConfig,
    ground: &StateVector,
    p_js: &[PauliString],
    p_is: &[PauliString],
    path: AmplitudePath,
) -> Result<(Vec<Vec<Vec<Complex64>>>, VqsTrajectory)> {
    let mut branches = vec![ground.clone()];
    for p in p_js {
        branches.push(ground.apply_pauli(p)?);
    }
    let mut values = vec![Vec::new(); p_js.len()];
    let trajectory = integrate_with(ansatz, &branches, hamiltonian, config, |_, _, _, states| {
        for (j, col) in values.iter_mut().enumerate() {
            let r = p_is
                .iter()
                .map(|p| amplitude(&states[0], &states[j + 1], p, path))
                .collect::<Result<Vec<_>>>()?;
            col.push(r);
        }
        Ok(())
    })?;
    Ok((values, trajectory))
}

/// `G(t)` from per-column amplitudes, `columns[j][t][i]`, of the mode
/// expansion `c = sum_i lambda_i P_i`.
pub fn green_from_amplitudes(lambdas: &[Complex64], columns: &[Vec<Vec<Complex64>>]) -> Result<Vec<Complex64>> {
    if columns.len() != lambdas.len() {
        return Err(dim_err!("{} columns for {} mode terms", columns.len(), lambdas.len()));
    }
    let n_t = columns.first().map_or(0, Vec::len);
    if columns.iter().any(|c| c.len() != n_t) {
        return Err(dim_err!("columns have different time grids"));
    }
    let mut out = vec![ZERO; n_t];
    for (j, col) in columns.iter().enumerate() {
        for (t, row) in col.iter().enumerate() {
            if row.len() != lambdas.len() {
                return Err(dim_err!("amplitude row has {} entries", row.len()));
            }
            for (i, a) in row.iter().enumerate() {
                out[t] += lambdas[i] * lambdas[j].conj() * (a + a.conj());
            }
        }
    }
    out.iter_mut().for_each(|g| *g *= -I);
    Ok(out)
}

/// Options of the VQS Green's function run.
#[derive(Debug, Clone, PartialEq)]
pub struct VqsGreenConfig {
    pub vqs: VqsConfig,
    /// One trajectory per mode term (pairs) or a single joint trajectory.
    pub joint: bool,
    pub amplitude: AmplitudePath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VqsGreenResult {
    pub series: GreensSeries,
    pub trajectories: Vec<VqsTrajectory>,
}

/// VQS Green's function of `c_{k, up}` from a prepared ground state.
pub fn green_realtime_vqs(
    model: &HubbardModel,
    k: f64,
    ground: &StateVector,
    ansatz: &Ansatz,
    config: &VqsGreenConfig,
) -> Result<VqsGreenResult> {
    let h = model.qubit_hamiltonian()?;
    let c = mode_operator(model, k)?;
    let (lambdas, strings): (Vec<Complex64>, Vec<PauliString>) = c.terms().map(|(l, p)| (l, *p)).unzip();
    let (columns, trajectories) = if config.joint {
        let (cols, traj) = joint_vqs_amplitudes(ansatz, &h, &config.vqs, ground, &strings, &strings, config.amplitude)?;
        (cols, vec![traj])
    } else {
        let prop = Propagator::Vqs {
            ansatz,
            hamiltonian: &h,
            config: &config.vqs,
        };
        let mut cols = Vec::with_capacity(strings.len());
        let mut trajs = Vec::with_capacity(strings.len());
        for p_j in &strings {
            let col = column_amplitudes(&prop, ground, p_j, &strings, &[], config.amplitude)?;
            cols.push(col.values);
            trajs.push(col.trajectory.expect("vqs run"));
        }
        (cols, trajs)
    };
    let values = green_from_amplitudes(&lambdas, &columns)?;
    Ok(VqsGreenResult {
        series: GreensSeries {
            k,
            hopping: model.hopping,
            interaction: model.interaction,
            times: config.vqs.times(),
            values,
            method: GreenMethod::Vqs,
        },
        trajectories,
    })
}

/// Green's function of `c_{k, up}` with an exact or Trotter propagator.
pub fn green_realtime(
    model: &HubbardModel,
    k: f64,
    ground: &StateVector,
    propagator: &Propagator<'_>,
    times: &[f64],
) -> Result<GreensSeries> {
    let c = mode_operator(model, k)?;
    let (lambdas, strings): (Vec<Complex64>, Vec<PauliString>) = c.terms().map(|(l, p)| (l, *p)).unzip();
    let mut columns = Vec::with_capacity(strings.len());
    let mut grid = times.to_vec();
    for p_j in &strings {
        let col = column_amplitudes(propagator, ground, p_j, &strings, times, AmplitudePath::Direct)?;
        grid = col.times;
        columns.push(col.values);
    }
    Ok(GreensSeries {
        k,
        hopping: model.hopping,
        interaction: model.interaction,
        times: grid,
        values: green_from_amplitudes(&lambdas, &columns)?,
        method: propagator.method(),
    })
}

/// Quadrature of the damped transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FourierRule {
    /// Half weight on the `t = 0` and last samples.
    Trapezoid,
    /// `sum_n G(n dt) e^{i omega n dt} dt` over all samples.
    LeftRiemann,
}

/// `A(omega) = -Im G~(omega) / pi` with
/// `G~(omega) = sum_n w_n G(t_n) e^{(i omega - eta) t_n} dt`.
pub fn spectral_from_realtime(
    series: &GreensSeries,
    eta: f64,
    omegas: &[f64],
    rule: FourierRule,
) -> Result<SpectralData> {
    check_eta(eta)?;
    let dt = series.dt()?;
    if series.values.len() != series.times.len() {
        return Err(dim_err!(
            "series has {} values for {} times",
            series.values.len(),
            series.times.len()
        ));
    }
    let n = series.times.len();
    let weighted: Vec<Complex64> = series
        .times
        .iter()
        .zip(&series.values)
        .enumerate()
        .map(|(idx, (t, g))| {
            let w = match rule {
                FourierRule::Trapezoid if idx == 0 || idx == n - 1 => 0.5,
                _ => 1.0,
            };
            g * (w * dt * exp(-eta * t))
        })
        .collect();
    let values = omegas
        .iter()
        .map(|&w| {
            let g: Complex64 = series.times.iter().zip(&weighted).map(|(t, x)| x * cis(w * t)).sum();
            -g.im / PI
        })
        .collect();
    Ok(SpectralData {
        omegas: omegas.to_vec(),
        values,
        eta,
        source: SpectralSource::Fourier,
    })
}

/// Largest step, `pi / e_max`, that resolves frequencies up to `e_max`.
pub fn aliasing_limit(e_max: f64) -> f64 {
    PI / e_max
}

/// Poles and weights of the Lehmann sum.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LehmannWeights {
    pub ground_energy: f64,
    /// `(E_n, |<E_n|c^dag|G>|^2)`.
    pub particle: Vec<(f64, f64)>,
    /// `(E_n, |<E_n|c|G>|^2)`.
    pub hole: Vec<(f64, f64)>,
}

impl LehmannWeights {
    fn validate(&self) -> Result<()> {
        for &(e, w) in self.particle.iter().chain(&self.hole) {
            if w < 0.0 || !w.is_finite() || !e.is_finite() {
                return Err(contract_err!("invalid Lehmann weight {w} at energy {e}"));
            }
        }
        Ok(())
    }

    /// Excitation frequencies `E_n - E_G` (particle) and `E_G - E_n` (hole)
    /// with total weight per frequency; poles closer than `merge_tol` are
    /// combined and weights below `min_weight` dropped.
    pub fn poles(&self, min_weight: f64, merge_tol: f64) -> Vec<(f64, f64)> {
        let mut raw: Vec<(f64, f64)> = self
            .particle
            .iter()
            .map(|&(e, w)| (e - self.ground_energy, w))
            .chain(self.hole.iter().map(|&(e, w)| (self.ground_energy - e, w)))
            .collect();
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (x, w) in raw {
            match merged.last_mut() {
                Some(last) if (x - last.0).abs() < merge_tol => {
                    let total = last.1 + w;
                    if total > 0.0 {
                        last.0 = (last.0 * last.1 + x * w) / total;
                    }
                    last.1 = total;
                }
                _ => merged.push((x, w)),
            }
        }
        merged.retain(|&(_, w)| w >= min_weight);
        merged
    }

    pub fn total_weight(&self) -> f64 {
        self.particle.iter().chain(&self.hole).map(|p| p.1).sum()
    }
}

fn lorentzian(x: f64, eta: f64) -> f64 {
    eta / (PI * (x * x + eta * eta))
}

/// `A(omega) = -(1/pi) Im sum_n [w+_n / (omega + E_G - E_n + i eta)
/// + w-_n / (omega - E_G + E_n + i eta)]`.
pub fn lehmann_spectral(weights: &LehmannWeights, eta: f64, omegas: &[f64]) -> Result<SpectralData> {
    check_eta(eta)?;
    weights.validate()?;
    let eg = weights.ground_energy;
    let values = omegas
        .iter()
        .map(|&w| {
            let p: f64 = weights
                .particle
                .iter()
                .map(|&(e, x)| x * lorentzian(w + eg - e, eta))
                .sum();
            let h: f64 = weights.hole.iter().map(|&(e, x)| x * lorentzian(w - eg + e, eta)).sum();
            p + h
        })
        .collect();
    Ok(SpectralData {
        omegas: omegas.to_vec(),
        values,
        eta,
        source: SpectralSource::Lehmann,
    })
}

/// `G(t) = -i sum_n [w+_n e^{-i(E_n - E_G)t} + w-_n e^{i(E_n - E_G)t}]`.
pub fn lehmann_series(weights: &LehmannWeights, times: &[f64]) -> Result<Vec<Complex64>> {
    weights.validate()?;
    let eg = weights.ground_energy;
    Ok(times
        .iter()
        .map(|&t| {
            let p: Complex64 = weights.particle.iter().map(|&(e, w)| cis(-(e - eg) * t) * w).sum();
            let h: Complex64 = weights.hole.iter().map(|&(e, w)| cis((e - eg) * t) * w).sum();
            -I * (p + h)
        })
        .collect())
}

/// Boltzmann-weighted spectrum over the `k_trunc` lowest eigenstates:
/// `A(omega) = (1/Z) sum_{m,n < K} e^{-beta E_m} [|<n|c^dag|m>|^2 L(omega + E_m - E_n)
/// + |<n|c|m>|^2 L(omega - E_m + E_n)]` with Lorentzians of width `eta`.
pub fn lehmann_finite_t(
    dec: &EigenDecomposition,
    mode: &PauliSum,
    beta: f64,
    eta: f64,
    omegas: &[f64],
    k_trunc: usize,
) -> Result<SpectralData> {
    check_eta(eta)?;
    if !(beta >= 0.0) {
        return Err(config_err!("beta must be non-negative, got {beta}"));
    }
    let dim = dec.dim();
    if k_trunc == 0 || k_trunc > dim {
        return Err(config_err!("truncation K = {k_trunc} outside 1..={dim}"));
    }
    let energies = dec.energies();
    let e0 = energies[0];
    let boltzmann: Vec<f64> = energies[..k_trunc].iter().map(|e| exp(-beta * (e - e0))).collect();
    let z: f64 = boltzmann.iter().sum();
    let mode_dag = mode.adjoint();
    // (frequency, weight) of every transition
    let mut lines: Vec<(f64, f64)> = Vec::new();
    let states: Vec<StateVector> = (0..k_trunc).map(|m| dec.state(m)).collect::<Result<_>>()?;
    for m in 0..k_trunc {
        let cdag_m = states[m].apply_sum(&mode_dag)?;
        let c_m = states[m].apply_sum(mode)?;
        for n in 0..k_trunc {
            let wp = states[n].inner(&cdag_m).norm_sqr() * boltzmann[m] / z;
            let wh = states[n].inner(&c_m).norm_sqr() * boltzmann[m] / z;
            if wp > 1e-300 {
                lines.push((energies[n] - energies[m], wp));
            }
            if wh > 1e-300 {
                lines.push((energies[m] - energies[n], wh));
            }
        }
    }
    let values = omegas
        .iter()
        .map(|&w| lines.iter().map(|&(x, wt)| wt * lorentzian(w - x, eta)).sum())
        .collect();
    Ok(SpectralData {
        omegas: omegas.to_vec(),
        values,
        eta,
        source: SpectralSource::LehmannFiniteT { beta },
    })
}

/// `phi_BA(tau) = i <[B(tau), A(0)]>` with `B(tau) = U^dag B U`, from the
/// branch pairs `{|psi>, P_j|psi>}` of the terms of `A`.
pub fn response_function(
    a: &PauliSum,
    b: &PauliSum,
    state: &StateVector,
    propagator: &Propagator<'_>,
    times: &[f64],
) -> Result<Vec<Complex64>> {
    for (name, op) in [("A", a), ("B", b)] {
        if !op.is_hermitian(1e-12) {
            return Err(contract_err!("response operator {name} is not Hermitian"));
        }
    }
    let (b_coeffs, b_strings): (Vec<f64>, Vec<PauliString>) = b.terms().map(|(c, p)| (c.re, *p)).unzip();
    let mut out: Vec<Complex64> = Vec::new();
    for (aj, p_j) in a.terms() {
        let col = column_amplitudes(propagator, state, p_j, &b_strings, times, AmplitudePath::Direct)?;
        if out.is_empty() {
            out = vec![ZERO; col.values.len()];
        }
        for (t, row) in col.values.iter().enumerate() {
            for (bi, z) in b_coeffs.iter().zip(row) {
                out[t] += I * (z - z.conj()) * (bi * aj.re);
            }
        }
    }
    if out.is_empty() {
        let n = match propagator {
            Propagator::Vqs { config, .. } => config.n_steps() + 1,
            _ => times.len(),
        };
        out = vec![ZERO; n];
    }
    Ok(out)
}

/// Mean of the spectrum over eigenstates `0..k`, each weighted equally,
/// used as the infinite-temperature reference.
pub fn eigenstate_average_spectrum(
    dec: &EigenDecomposition,
    mode: &PauliSum,
    eta: f64,
    omegas: &[f64],
    k: usize,
) -> Result<SpectralData> {
    let mut acc = vec![0.0; omegas.len()];
    for m in 0..k {
        let w = crate::oracle::eigenstate_weights(dec, mode, m)?;
        let s = lehmann_spectral(&w, eta, omegas)?;
        acc.iter_mut().zip(&s.values).for_each(|(a, v)| *a += v / k as f64);
    }
    Ok(SpectralData {
        omegas: omegas.to_vec(),
        values: acc,
        eta,
        source: SpectralSource::LehmannFiniteT { beta: 0.0 },
    })
}

/// Name of the spectral source as written to metadata.
pub fn source_name(source: &SpectralSource) -> String {
    match source {
        SpectralSource::Fourier => String::from("fourier"),
        SpectralSource::Lehmann => String::from("lehmann"),
        SpectralSource::LehmannFiniteT { beta } => alloc::format!("lehmann_finite_t(beta={beta})"),
    }
}
