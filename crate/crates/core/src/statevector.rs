//! Dense statevector simulation of parametrized Pauli-rotation circuits.
//!
//! A [`Gate::Rotation`] realizes `exp(i (coeff * theta + offset) P)`; every
//! other gate is fixed. Derivatives with respect to a parameter are exact:
//! `d/dtheta exp(i a theta P) = i a P exp(i a theta P)`, so the derivative
//! state is a sum of circuits with `i a P` inserted after each gate that
//! carries the parameter. Global phases are kept exactly.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{config_err, contract_err, dim_err};
use crate::math::{cis, cos, sin, sqrt, FRAC_1_SQRT_2, PI};
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::Result;

/// Largest register simulated.
pub const MAX_SIM_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `2^n` complex amplitudes; basis index bit `q` is qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SIM_QUBITS {
            return Err(dim_err!("cannot simulate {n_qubits} qubits"));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(dim_err!("basis index {index} out of range for {n_qubits} qubits"));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Ok(Self { n_qubits, amps })
    }

    /// Basis state from a ket label written most-significant qubit first,
    /// e.g. `"0011"` has qubits 0 and 1 set.
    pub fn from_ket_label(label: &str) -> Result<Self> {
        let n = label.len();
        let mut index = 0usize;
        for (pos, ch) in label.chars().enumerate() {
            let bit = match ch {
                '0' => 0,
                '1' => 1,
                _ => return Err(config_err!("bad ket label {label:?}")),
            };
            index |= bit << (n - 1 - pos);
        }
        Self::basis(n, index)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(dim_err!("amplitude count {dim} is not a power of two"));
        }
        let n_qubits = dim.trailing_zeros() as usize;
        if n_qubits > MAX_SIM_QUBITS {
            return Err(dim_err!("cannot simulate {n_qubits} qubits"));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.amps.iter().map(|a| a.norm_sqr()).sum())
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// `|<self|other>|^2` for normalized states.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Euclidean distance `||self - other||`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        sqrt(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum())
    }

    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            n_qubits: self.n_qubits,
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self += factor * other`.
    pub fn axpy(&mut self, factor: Complex64, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += factor * b;
        }
    }

    fn check_qubits(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(dim_err!(
                "operator on {n} qubits applied to a {}-qubit state",
                self.n_qubits
            ));
        }
        Ok(())
    }

    /// `P|self>`.
    pub fn apply_pauli(&self, p: &PauliString) -> Result<StateVector> {
        self.check_qubits(p.n_qubits())?;
        let mut out = self.clone();
        kernel_pauli(&mut out.amps, p, 0);
        Ok(out)
    }

    /// `O|self>` for a Pauli sum (not normalized).
    pub fn apply_sum(&self, op: &PauliSum) -> Result<StateVector> {
        self.check_qubits(op.n_qubits())?;
        let mut out = vec![ZERO; self.dim()];
        op.apply_to(&self.amps, &mut out)?;
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// `<self|P|other>`.
    pub fn pauli_matrix_element(&self, p: &PauliString, other: &StateVector) -> Result<Complex64> {
        self.check_qubits(p.n_qubits())?;
        other.check_qubits(p.n_qubits())?;
        let mut total = ZERO;
        for (b, &a) in other.amps.iter().enumerate() {
            let (phase, b2) = p.apply_to_basis(b);
            total += self.amps[b2].conj() * phase * a;
        }
        Ok(total)
    }

    /// `<self|O|other>`.
    pub fn matrix_element(&self, op: &PauliSum, other: &StateVector) -> Result<Complex64> {
        let mut total = ZERO;
        for (c, p) in op.terms() {
            total += c * self.pauli_matrix_element(p, other)?;
        }
        Ok(total)
    }

    /// Writes `index, re, im` lines.
    pub fn write_csv<W: fmt::Write>(&self, w: &mut W) -> fmt::Result {
        writeln!(w, "index,re,im")?;
        for (i, a) in self.amps.iter().enumerate() {
            writeln!(w, "{i},{:.17e},{:.17e}", a.re, a.im)?;
        }
        Ok(())
    }
}

/// `<psi|obs|psi>`.
pub fn expectation(state: &StateVector, obs: &PauliSum) -> Result<Complex64> {
    state.matrix_element(obs, state)
}

fn active(b: usize, ctrl: u64) -> bool {
    (b as u64) & ctrl == ctrl
}

/// `P` on the subspace where all `ctrl` qubits are 1.
fn kernel_pauli(amps: &mut [Complex64], p: &PauliString, ctrl: u64) {
    let x = p.x_mask() as usize;
    if x == 0 {
        for (b, a) in amps.iter_mut().enumerate() {
            if active(b, ctrl) {
                *a *= p.apply_to_basis(b).0;
            }
        }
        return;
    }
    let top = 1usize << (63 - (x as u64).leading_zeros());
    for b in 0..amps.len() {
        if b & top != 0 || !active(b, ctrl) {
            continue;
        }
        let b2 = b ^ x;
        let (ph0, _) = p.apply_to_basis(b);
        let (ph1, _) = p.apply_to_basis(b2);
        let a0 = amps[b];
        let a1 = amps[b2];
        amps[b2] = ph0 * a0;
        amps[b] = ph1 * a1;
    }
}

/// `exp(i angle P) = cos(angle) + i sin(angle) P` on the controlled subspace.
fn kernel_rotation(amps: &mut [Complex64], p: &PauliString, angle: f64, ctrl: u64) {
    let (c, s) = (cos(angle), sin(angle));
    let is = I * s;
    let x = p.x_mask() as usize;
    if x == 0 {
        let plus = cis(angle);
        let minus = cis(-angle);
        for (b, a) in amps.iter_mut().enumerate() {
            if active(b, ctrl) {
                let (ph, _) = p.apply_to_basis(b);
                *a *= if ph.re > 0.0 { plus } else { minus };
            }
        }
        return;
    }
    let top = 1usize << (63 - (x as u64).leading_zeros());
    for b in 0..amps.len() {
        if b & top != 0 || !active(b, ctrl) {
            continue;
        }
        let b2 = b ^ x;
        let (ph0, _) = p.apply_to_basis(b);
        let (ph1, _) = p.apply_to_basis(b2);
        let a0 = amps[b];
        let a1 = amps[b2];
        amps[b] = a0 * c + is * ph1 * a1;
        amps[b2] = a1 * c + is * ph0 * a0;
    }
}

fn kernel_hadamard(amps: &mut [Complex64], q: usize, ctrl: u64) {
    let bit = 1usize << q;
    for b in 0..amps.len() {
        if b & bit != 0 || !active(b, ctrl) {
            continue;
        }
        let a0 = amps[b];
        let a1 = amps[b | bit];
        amps[b] = (a0 + a1) * FRAC_1_SQRT_2;
        amps[b | bit] = (a0 - a1) * FRAC_1_SQRT_2;
    }
}

/// Circuit element.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(i (coeff * theta[param] + offset) P)`; a fixed rotation when
    /// `param` is `None`.
    Rotation {
        pauli: PauliString,
        param: Option<usize>,
        coeff: f64,
        offset: f64,
    },
    /// Fixed Pauli string.
    Pauli(PauliString),
    Hadamard(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    Cz(usize, usize),
    /// Inner gate applied when `control` is 1.
    Controlled {
        control: usize,
        gate: Box<Gate>,
    },
}

impl Gate {
    /// Parametrized rotation `exp(i coeff theta P)`.
    pub fn rotation(pauli: PauliString, param: usize, coeff: f64) -> Self {
        Gate::Rotation {
            pauli,
            param: Some(param),
            coeff,
            offset: 0.0,
        }
    }

    /// `R_Y(theta) = exp(i theta Y / 2)` on `qubit`.
    pub fn ry(n_qubits: usize, qubit: usize, param: usize) -> Result<Self> {
        Ok(Self::rotation(
            PauliString::single(n_qubits, qubit, Pauli::Y)?,
            param,
            0.5,
        ))
    }

    /// `R_Z(theta) = exp(i theta Z / 2)` on `qubit`.
    pub fn rz(n_qubits: usize, qubit: usize, param: usize) -> Result<Self> {
        Ok(Self::rotation(
            PauliString::single(n_qubits, qubit, Pauli::Z)?,
            param,
            0.5,
        ))
    }

    pub fn x(n_qubits: usize, qubit: usize) -> Result<Self> {
        Ok(Gate::Pauli(PauliString::single(n_qubits, qubit, Pauli::X)?))
    }

    /// Parameter driving this gate, looking through controls.
    pub fn param(&self) -> Option<usize> {
        match self {
            Gate::Rotation { param, .. } => *param,
            Gate::Controlled { gate, .. } => gate.param(),
            _ => None,
        }
    }

    /// Returns `(coeff, P, control mask)` for parametrized rotations.
    fn generator(&self, ctrl: u64) -> Option<(f64, PauliString, u64)> {
        match self {
            Gate::Rotation {
                pauli,
                param: Some(_),
                coeff,
                ..
            } => Some((*coeff, *pauli, ctrl)),
            Gate::Controlled { control, gate } => gate.generator(ctrl | 1u64 << control),
            _ => None,
        }
    }

    fn qubits(&self) -> u64 {
        match self {
            Gate::Rotation { pauli, .. } | Gate::Pauli(pauli) => pauli.support(),
            Gate::Hadamard(q) => 1u64 << q,
            Gate::Cnot { control, target } => 1u64 << control | 1u64 << target,
            Gate::Cz(a, b) => 1u64 << a | 1u64 << b,
            Gate::Controlled { control, gate } => 1u64 << control | gate.qubits(),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let check = |q: usize| {
            if q >= n_qubits {
                Err(dim_err!("gate touches qubit {q} of a {n_qubits}-qubit register"))
            } else {
                Ok(())
            }
        };
        match self {
            Gate::Rotation { pauli, .. } | Gate::Pauli(pauli) => {
                if pauli.n_qubits() != n_qubits {
                    return Err(dim_err!(
                        "{}-qubit Pauli string in a {n_qubits}-qubit circuit",
                        pauli.n_qubits()
                    ));
                }
            }
            Gate::Hadamard(q) => check(*q)?,
            Gate::Cnot { control, target } => {
                check(*control)?;
                check(*target)?;
                if control == target {
                    return Err(config_err!("CNOT control equals target"));
                }
            }
            Gate::Cz(a, b) => {
                check(*a)?;
                check(*b)?;
                if a == b {
                    return Err(config_err!("CZ on a single qubit"));
                }
            }
            Gate::Controlled { control, gate } => {
                check(*control)?;
                gate.validate(n_qubits)?;
                if gate.qubits() >> control & 1 == 1 {
                    return Err(config_err!("control qubit {control} is also a target"));
                }
            }
        }
        Ok(())
    }

    fn apply_masked(&self, amps: &mut [Complex64], params: &[f64], ctrl: u64) {
        match self {
            Gate::Rotation {
                pauli,
                param,
                coeff,
                offset,
            } => {
                let theta = param.map_or(0.0, |i| params[i]);
                kernel_rotation(amps, pauli, coeff * theta + offset, ctrl);
            }
            Gate::Pauli(p) => kernel_pauli(amps, p, ctrl),
            Gate::Hadamard(q) => kernel_hadamard(amps, *q, ctrl),
            Gate::Cnot { control, target } => {
                let n = amps.len().trailing_zeros() as usize;
                let p = PauliString::single(n, *target, Pauli::X).expect("validated");
                kernel_pauli(amps, &p, ctrl | 1u64 << control);
            }
            Gate::Cz(a, b) => {
                let n = amps.len().trailing_zeros() as usize;
                let p = PauliString::single(n, *b, Pauli::Z).expect("validated");
                kernel_pauli(amps, &p, ctrl | 1u64 << a);
            }
            Gate::Controlled { control, gate } => gate.apply_masked(amps, params, ctrl | 1u64 << control),
        }
    }
}

/// Applies one gate; `theta` must be given exactly when the gate is
/// parametrized.
pub fn apply_gate(state: &StateVector, gate: &Gate, theta: Option<f64>) -> Result<StateVector> {
    gate.validate(state.n_qubits)?;
    let params = match (gate.param(), theta) {
        (Some(i), Some(t)) => {
            let mut p = vec![0.0; i + 1];
            p[i] = t;
            p
        }
        (None, None) => Vec::new(),
        (Some(_), None) => return Err(contract_err!("parametrized gate needs a parameter value")),
        (None, Some(_)) => return Err(contract_err!("fixed gate given a parameter value")),
    };
    let mut out = state.clone();
    gate.apply_masked(&mut out.amps, &params, 0);
    Ok(out)
}

/// Ordered gate program with `n_params` real parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, n_params: usize, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_SIM_QUBITS {
            return Err(dim_err!("cannot simulate {n_qubits} qubits"));
        }
        for g in &gates {
            g.validate(n_qubits)?;
            if let Some(i) = g.param() {
                if i >= n_params {
                    return Err(config_err!("gate uses parameter {i} of {n_params}"));
                }
            }
        }
        Ok(Self {
            n_qubits,
            n_params,
            gates,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn check(&self, theta: &[f64], reference: &StateVector) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(dim_err!(
                "{} parameters given to a circuit with {}",
                theta.len(),
                self.n_params
            ));
        }
        reference.check_qubits(self.n_qubits)
    }

    /// `U(theta)|reference>`.
    pub fn apply(&self, theta: &[f64], reference: &StateVector) -> Result<StateVector> {
        self.check(theta, reference)?;
        let mut out = reference.clone();
        self.run(&mut out.amps, theta, 0..self.gates.len());
        Ok(out)
    }

    fn run(&self, amps: &mut [Complex64], theta: &[f64], range: core::ops::Range<usize>) {
        for g in &self.gates[range] {
            g.apply_masked(amps, theta, 0);
        }
    }

    /// Indices of gates driven by parameter `i`.
    pub fn occurrences(&self, i: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.param() == Some(i))
            .map(|(k, _)| k)
            .collect()
    }

    /// `sum_i |g_{k,i}|^2` per parameter `k`, expanding each control
    /// projector into Pauli strings.
    pub fn derivative_weights(&self) -> Vec<f64> {
        let mut w = vec![0.0; self.n_params];
        for g in &self.gates {
            if let (Some(i), Some((coeff, _, ctrl))) = (g.param(), g.generator(0)) {
                w[i] += coeff * coeff / (1u64 << ctrl.count_ones()) as f64;
            }
        }
        w
    }

    /// Unit-norm pieces of the derivative: `d_i psi = sum_k g_k |piece_k>`
    /// with `|piece_k> = U_{>k} P_k U_{<=k} |reference>` and `g_k = i coeff_k`
    /// (controlled rotations use the projected generator).
    pub fn derivative_pieces(&self, theta: &[f64], reference: &StateVector) -> Result<(StateVector, DerivativePieces)> {
        self.check(theta, reference)?;
        let mut pieces: DerivativePieces = vec![Vec::new(); self.n_params];
        let mut state = reference.clone();
        for (k, g) in self.gates.iter().enumerate() {
            g.apply_masked(&mut state.amps, theta, 0);
            if let (Some(i), Some((coeff, pauli, ctrl))) = (g.param(), g.generator(0)) {
                let mut d = state.clone();
                if ctrl != 0 {
                    // projector onto the control subspace times P
                    for (b, a) in d.amps.iter_mut().enumerate() {
                        if !active(b, ctrl) {
                            *a = ZERO;
                        }
                    }
                }
                kernel_pauli(&mut d.amps, &pauli, ctrl);
                self.run(&mut d.amps, theta, k + 1..self.gates.len());
                pieces[i].push((I * coeff, d));
            }
        }
        Ok((state, pieces))
    }

    /// `U(theta)|ref>` and every `d psi / d theta_i`.
    pub fn derivative_states(&self, theta: &[f64], reference: &StateVector) -> Result<(StateVector, Vec<StateVector>)> {
        let (state, pieces) = self.derivative_pieces(theta, reference)?;
        let mut derivs = Vec::with_capacity(self.n_params);
        for (i, ps) in pieces.into_iter().enumerate() {
            if ps.is_empty() {
                return Err(config_err!("parameter {i} does not appear in the circuit"));
            }
            let mut d = StateVector {
                n_qubits: self.n_qubits,
                amps: vec![ZERO; state.dim()],
            };
            for (g, piece) in &ps {
                d.axpy(*g, piece);
            }
            derivs.push(d);
        }
        Ok((state, derivs))
    }

    /// Central finite-difference derivatives with step `step`.
    pub fn finite_difference_states(
        &self,
        theta: &[f64],
        reference: &StateVector,
        step: f64,
    ) -> Result<(StateVector, Vec<StateVector>)> {
        let state = self.apply(theta, reference)?;
        let mut derivs = Vec::with_capacity(self.n_params);
        let mut shifted = theta.to_vec();
        for i in 0..self.n_params {
            shifted[i] = theta[i] + step;
            let plus = self.apply(&shifted, reference)?;
            shifted[i] = theta[i] - step;
            let mut d = self.apply(&shifted, reference)?;
            shifted[i] = theta[i];
            d.amps
                .iter_mut()
                .zip(&plus.amps)
                .for_each(|(m, p)| *m = (p - *m) / (2.0 * step));
            derivs.push(d);
        }
        Ok((state, derivs))
    }
}

/// Per parameter, the `(g_k, |piece_k>)` terms of its derivative.
pub type DerivativePieces = Vec<Vec<(Complex64, StateVector)>>;

/// Ansatz family.
#[derive(Debug, Clone, PartialEq)]
pub enum AnsatzKind {
    /// Layers of `R_Y`, `R_Z` on every qubit followed by a CZ ladder, plus a
    /// final rotation layer.
    HardwareEfficient { depth: usize },
    /// `prod_d prod_m exp(i theta_m^(d) P_m)` over the non-identity
    /// Hamiltonian terms in canonical order.
    VariationalHamiltonian { depth: usize, n_terms: usize },
    /// Brick layers of particle-number-conserving two-qubit `A` gates.
    SymmetryPreserving { layers: usize },
    /// Ancilla register in uniform superposition selecting branch
    /// preparations, followed by an inner ansatz on the system.
    AncillaAugmented {
        n_ancilla: usize,
        branches: Vec<PauliString>,
        inner: Box<AnsatzKind>,
    },
}

/// Parametrized circuit of a known family.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    kind: AnsatzKind,
    circuit: Circuit,
}

impl Ansatz {
    pub fn kind(&self) -> &AnsatzKind {
        &self.kind
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn n_qubits(&self) -> usize {
        self.circuit.n_qubits
    }

    pub fn parameter_count(&self) -> usize {
        self.circuit.n_params
    }

    /// Wraps an arbitrary circuit; reported as a variational Hamiltonian
    /// ansatz only through the dedicated constructor.
    pub fn custom(kind: AnsatzKind, circuit: Circuit) -> Self {
        Self { kind, circuit }
    }

    pub fn hardware_efficient(n_qubits: usize, depth: usize) -> Result<Self> {
        let mut gates = Vec::new();
        let mut p = 0;
        for layer in 0..=depth {
            for q in 0..n_qubits {
                gates.push(Gate::ry(n_qubits, q, p)?);
                p += 1;
            }
            for q in 0..n_qubits {
                gates.push(Gate::rz(n_qubits, q, p)?);
                p += 1;
            }
            if layer < depth {
                for q in 0..n_qubits.saturating_sub(1) {
                    gates.push(Gate::Cz(q, q + 1));
                }
            }
        }
        Ok(Self {
            kind: AnsatzKind::HardwareEfficient { depth },
            circuit: Circuit::new(n_qubits, p, gates)?,
        })
    }

    pub fn variational_hamiltonian(hamiltonian: &PauliSum, depth: usize) -> Result<Self> {
        let terms = hamiltonian.non_identity_terms();
        if terms.is_empty() {
            return Err(config_err!("Hamiltonian has no non-identity terms"));
        }
        if depth == 0 {
            return Err(config_err!("ansatz depth must be at least 1"));
        }
        let n_terms = terms.len();
        let mut gates = Vec::with_capacity(n_terms * depth);
        for d in 0..depth {
            for (m, (_, p)) in terms.iter().enumerate() {
                gates.push(Gate::rotation(*p, d * n_terms + m, 1.0));
            }
        }
        Ok(Self {
            kind: AnsatzKind::VariationalHamiltonian { depth, n_terms },
            circuit: Circuit::new(hamiltonian.n_qubits(), n_terms * depth, gates)?,
        })
    }

    /// Each layer applies `A` gates on pairs `(0,1), (2,3), ...` and then
    /// `(1,2), (3,4), ...`. The lower-index qubit of a pair is the upper wire.
    pub fn symmetry_preserving(n_qubits: usize, layers: usize) -> Result<Self> {
        if n_qubits < 2 {
            return Err(config_err!("symmetry-preserving ansatz needs two qubits"));
        }
        let mut gates = Vec::new();
        let mut p = 0;
        for _ in 0..layers {
            for start in [0, 1] {
                let mut a = start;
                while a + 1 < n_qubits {
                    a_gate(&mut gates, n_qubits, a, a + 1, p, p + 1)?;
                    p += 2;
                    a += 2;
                }
            }
        }
        Ok(Self {
            kind: AnsatzKind::SymmetryPreserving { layers },
            circuit: Circuit::new(n_qubits, p, gates)?,
        })
    }

    /// `|Psi(theta)> = 2^{-a/2} sum_l |l>_a (x) U(theta) P_l |ref>` where the
    /// ancillas sit above the system qubits and the reference carries
    /// ancillas in `|0>`. The branch count must be a power of two.
    pub fn ancilla_augmented(inner: &Ansatz, branches: &[PauliString]) -> Result<Self> {
        let l = branches.len();
        if l == 0 || !l.is_power_of_two() {
            return Err(config_err!("branch count {l} must be a power of two"));
        }
        let n_sys = inner.n_qubits();
        if branches.iter().any(|b| b.n_qubits() != n_sys) {
            return Err(dim_err!("branch preparation size differs from the system"));
        }
        let n_anc = l.trailing_zeros() as usize;
        let n = n_sys + n_anc;
        let mut gates = Vec::new();
        for a in 0..n_anc {
            gates.push(Gate::Hadamard(n_sys + a));
        }
        for (idx, b) in branches.iter().enumerate() {
            if b.is_identity() {
                continue;
            }
            let flips: Vec<usize> = (0..n_anc).filter(|a| idx >> a & 1 == 0).collect();
            for &a in &flips {
                gates.push(Gate::x(n, n_sys + a)?);
            }
            let mut g = Gate::Pauli(b.widen(n)?);
            for a in 0..n_anc {
                g = Gate::Controlled {
                    control: n_sys + a,
                    gate: Box::new(g),
                };
            }
            gates.push(g);
            for &a in &flips {
                gates.push(Gate::x(n, n_sys + a)?);
            }
        }
        for g in inner.circuit.gates() {
            gates.push(widen_gate(g, n)?);
        }
        Ok(Self {
            kind: AnsatzKind::AncillaAugmented {
                n_ancilla: n_anc,
                branches: branches.to_vec(),
                inner: Box::new(inner.kind.clone()),
            },
            circuit: Circuit::new(n, inner.parameter_count(), gates)?,
        })
    }
}

fn widen_gate(g: &Gate, n: usize) -> Result<Gate> {
    Ok(match g {
        Gate::Rotation {
            pauli,
            param,
            coeff,
            offset,
        } => Gate::Rotation {
            pauli: pauli.widen(n)?,
            param: *param,
            coeff: *coeff,
            offset: *offset,
        },
        Gate::Pauli(p) => Gate::Pauli(p.widen(n)?),
        Gate::Controlled { control, gate } => Gate::Controlled {
            control: *control,
            gate: Box::new(widen_gate(gate, n)?),
        },
        other => other.clone(),
    })
}

/// Two-qubit number-conserving block
/// `CNOT(b->a) R(theta,phi)^dag(b) CNOT(a->b) R(theta,phi)(b) CNOT(b->a)`
/// (time order left to right) with `R = R_Y(theta + pi/2) R_Z(phi + pi)`.
fn a_gate(gates: &mut Vec<Gate>, n: usize, a: usize, b: usize, theta: usize, phi: usize) -> Result<()> {
    let y = PauliString::single(n, b, Pauli::Y)?;
    let z = PauliString::single(n, b, Pauli::Z)?;
    let rot = |pauli, param, coeff: f64, offset| Gate::Rotation {
        pauli,
        param: Some(param),
        coeff,
        offset,
    };
    gates.push(Gate::Cnot { control: b, target: a });
    // R^dag = R_Z(phi + pi)^dag R_Y(theta + pi/2)^dag
    gates.push(rot(y, theta, -0.5, -PI / 4.0));
    gates.push(rot(z, phi, -0.5, -PI / 2.0));
    gates.push(Gate::Cnot { control: a, target: b });
    gates.push(rot(z, phi, 0.5, PI / 2.0));
    gates.push(rot(y, theta, 0.5, PI / 4.0));
    gates.push(Gate::Cnot { control: b, target: a });
    Ok(())
}

/// `U(theta)|reference>`.
pub fn prepare_ansatz_state(ansatz: &Ansatz, theta: &[f64], reference: &StateVector) -> Result<StateVector> {
    ansatz.circuit.apply(theta, reference)
}

/// Exact `d|psi(theta)>/d theta_i` (not normalized).
pub fn derivative_state(ansatz: &Ansatz, theta: &[f64], reference: &StateVector, i: usize) -> Result<StateVector> {
    let circuit = &ansatz.circuit;
    circuit.check(theta, reference)?;
    let occ = circuit.occurrences(i);
    if occ.is_empty() {
        return Err(config_err!("parameter {i} does not appear in the circuit"));
    }
    let mut total = StateVector {
        n_qubits: circuit.n_qubits,
        amps: vec![ZERO; reference.dim()],
    };
    for k in occ {
        let (coeff, pauli, ctrl) = circuit.gates[k].generator(0).expect("parametrized");
        let mut d = reference.clone();
        circuit.run(&mut d.amps, theta, 0..k + 1);
        for (b, a) in d.amps.iter_mut().enumerate() {
            if !active(b, ctrl) {
                *a = ZERO;
            }
        }
        kernel_pauli(&mut d.amps, &pauli, ctrl);
        circuit.run(&mut d.amps, theta, k + 1..circuit.gates.len());
        total.axpy(I * coeff, &d);
    }
    Ok(total)
}

/// `L^{-1/2} sum_l phase_l |l>_a (x) |branch_l>` on `ceil(log2 L) + n` qubits
/// with the ancillas above the system qubits.
pub fn build_branch_state(branches: &[StateVector], phases: &[Complex64]) -> Result<StateVector> {
    let l = branches.len();
    if l == 0 {
        return Err(contract_err!("no branches given"));
    }
    if phases.len() != l {
        return Err(dim_err!("{} phases for {l} branches", phases.len()));
    }
    let n = branches[0].n_qubits;
    if branches.iter().any(|b| b.n_qubits != n) {
        return Err(dim_err!("branches have inconsistent sizes"));
    }
    let n_anc = if l == 1 {
        0
    } else {
        (usize::BITS - (l - 1).leading_zeros()) as usize
    };
    if n + n_anc > MAX_SIM_QUBITS {
        return Err(dim_err!("branch state exceeds the simulator size"));
    }
    let dim = 1usize << n;
    let norm = 1.0 / sqrt(l as f64);
    let mut amps = vec![ZERO; dim << n_anc];
    for (idx, (b, ph)) in branches.iter().zip(phases).enumerate() {
        for (s, a) in b.amps.iter().enumerate() {
            amps[idx * dim + s] = a * ph * norm;
        }
    }
    Ok(StateVector {
        n_qubits: n + n_anc,
        amps,
    })
}
