//! Experiment configuration files.
//!
//! A config is a TOML document with a top-level `task`, `seed` and `output`
//! and one table per concern. Every table has defaults, so a minimal file
//! only names the task and the model. Unknown keys are rejected.
//!
//! ```toml
//! task = "vqs-green"
//! seed = 0
//! output = "out/vqs-spectra"
//! k_over_pi = [0.0, 1.0]
//!
//! [model]
//! sites = 2
//! geometry = "chain"
//! hopping = 1.0
//! interaction = 3.0
//! shift = true
//!
//! [ansatz]
//! kind = "variational-hamiltonian"
//! depth = 8
//!
//! [vqs]
//! dt = 0.1
//! t_max = 30.0
//!
//! [spectral]
//! eta = 0.2
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use greenfn_core::greens::{AmplitudePath, FourierRule};
use greenfn_core::optimize::{Method, OptimizerConfig};
use greenfn_core::pauli::{Geometry, HubbardModel, PauliSum};
use greenfn_core::resource::ErrorBudget;
use greenfn_core::statevector::Ansatz;
use greenfn_core::vqs::{DerivativeMode, ShotNoise, VqsConfig};

use crate::RunError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Vqe,
    SsvqeGreen,
    VqsGreen,
    TrotterGreen,
    ExactGreen,
    Spectral,
    MaeSweep,
    Resources,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Vqe => "vqe",
            Task::SsvqeGreen => "ssvqe-green",
            Task::VqsGreen => "vqs-green",
            Task::TrotterGreen => "trotter-green",
            Task::ExactGreen => "exact-green",
            Task::Spectral => "spectral",
            Task::MaeSweep => "mae-sweep",
            Task::Resources => "resources",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    /// Momenta in units of pi.
    #[serde(default = "default_k")]
    pub k_over_pi: Vec<f64>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub ground: GroundSection,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub vqs: VqsSection,
    #[serde(default)]
    pub spectral: SpectralSection,
    #[serde(default)]
    pub ssvqe: SsvqeSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub resources: ResourcesSection,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

fn default_k() -> Vec<f64> {
    vec![0.0, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryName {
    Chain,
    Ring,
    Square,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub sites: usize,
    pub geometry: GeometryName,
    pub hopping: f64,
    pub interaction: f64,
    /// Subtract `U/2` per orbital so that half filling is particle-hole
    /// symmetric.
    pub shift: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            sites: 2,
            geometry: GeometryName::Chain,
            hopping: 1.0,
            interaction: 3.0,
            shift: true,
        }
    }
}

impl ModelSection {
    pub fn model(&self) -> HubbardModel {
        HubbardModel {
            n_sites: self.sites,
            geometry: match self.geometry {
                GeometryName::Chain => Geometry::Chain { periodic: false },
                GeometryName::Ring => Geometry::Chain { periodic: true },
                GeometryName::Square => Geometry::Square,
            },
            hopping: self.hopping,
            interaction: self.interaction,
            particle_hole_shift: self.shift,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundMethod {
    /// Lowest eigenvector from exact diagonalization.
    Exact,
    /// VQE with a hardware-efficient ansatz from `|0...0>`.
    Vqe,
}

/// How the ground state fed to the time evolution is prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundSection {
    pub method: GroundMethod,
    /// Hardware-efficient depth used by VQE.
    pub depth: usize,
}

impl Default for GroundSection {
    fn default() -> Self {
        Self {
            method: GroundMethod::Vqe,
            depth: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnsatzName {
    HardwareEfficient,
    VariationalHamiltonian,
    SymmetryPreserving,
}

/// Circuit family of the task. For `trotter-green` the depth is the number
/// of product-formula steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzSection {
    pub kind: AnsatzName,
    pub depth: usize,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self {
            kind: AnsatzName::VariationalHamiltonian,
            depth: 8,
        }
    }
}

impl AnsatzSection {
    pub fn build(&self, hamiltonian: &PauliSum) -> greenfn_core::Result<Ansatz> {
        build_ansatz(self.kind, self.depth, hamiltonian)
    }
}

pub fn build_ansatz(kind: AnsatzName, depth: usize, hamiltonian: &PauliSum) -> greenfn_core::Result<Ansatz> {
    let n = hamiltonian.n_qubits();
    match kind {
        AnsatzName::HardwareEfficient => Ansatz::hardware_efficient(n, depth),
        AnsatzName::VariationalHamiltonian => Ansatz::variational_hamiltonian(hamiltonian, depth),
        AnsatzName::SymmetryPreserving => Ansatz::symmetry_preserving(n, depth),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    NelderMead,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub method: MethodName,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub gradient_tolerance: f64,
    pub restarts: usize,
    pub init_scale: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        Self {
            method: MethodName::Gradient,
            max_iterations: 2000,
            tolerance: 1e-13,
            gradient_tolerance: 1e-9,
            restarts: 4,
            init_scale: std::f64::consts::PI,
        }
    }
}

impl OptimizerSection {
    pub fn config(&self, seed: u64) -> OptimizerConfig {
        OptimizerConfig {
            method: match self.method {
                MethodName::NelderMead => Method::NelderMead,
                MethodName::Gradient => Method::GradientLineSearch,
            },
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            gradient_tolerance: self.gradient_tolerance,
            restarts: self.restarts,
            seed,
            init_scale: self.init_scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeName {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeName {
    Direct,
    Hadamard,
    Checked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VqsSection {
    pub dt: f64,
    pub t_max: f64,
    pub svd_cutoff: f64,
    pub derivative_mode: DerivativeName,
    pub fd_step: f64,
    /// Shots per measured constituent of M and V; absent means exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    /// Evolve all branches in one trajectory instead of one per mode term.
    pub joint: bool,
    pub amplitude: AmplitudeName,
    /// Write per-step M and V diagnostics.
    pub check_m: bool,
}

impl Default for VqsSection {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_max: 30.0,
            svd_cutoff: 1e-8,
            derivative_mode: DerivativeName::Analytic,
            fd_step: 1e-6,
            shots: None,
            joint: false,
            amplitude: AmplitudeName::Direct,
            check_m: false,
        }
    }
}

impl VqsSection {
    pub fn config(&self, seed: u64) -> VqsConfig {
        VqsConfig {
            dt: self.dt,
            t_max: self.t_max,
            svd_cutoff: self.svd_cutoff,
            derivative_mode: match self.derivative_mode {
                DerivativeName::Analytic => DerivativeMode::Analytic,
                DerivativeName::FiniteDifference => DerivativeMode::FiniteDifference { step: self.fd_step },
            },
            shot_noise: self.shots.map(|shots| ShotNoise { shots, seed }),
            record_matrices: false,
            check_m: self.check_m,
        }
    }

    pub fn amplitude_path(&self) -> AmplitudePath {
        match self.amplitude {
            AmplitudeName::Direct => AmplitudePath::Direct,
            AmplitudeName::Hadamard => AmplitudePath::Hadamard,
            AmplitudeName::Checked => AmplitudePath::Checked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    Trapezoid,
    LeftRiemann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSection {
    pub eta: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    pub rule: RuleName,
    /// Window and step of the exact real-time reference.
    pub exact_t_max: f64,
    pub exact_dt: f64,
    /// Inverse temperature for the `spectral` task; absent means zero
    /// temperature.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Eigenstates kept in the thermal sum; absent keeps all.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_trunc: Option<usize>,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            eta: 0.2,
            omega_min: -5.0,
            omega_max: 5.0,
            n_omega: 10001,
            rule: RuleName::Trapezoid,
            exact_t_max: 100.0,
            exact_dt: 0.1,
            beta: None,
            k_trunc: None,
        }
    }
}

impl SpectralSection {
    pub fn omegas(&self) -> greenfn_core::Result<Vec<f64>> {
        greenfn_core::greens::omega_grid(self.omega_min, self.omega_max, self.n_omega)
    }

    pub fn rule(&self) -> FourierRule {
        match self.rule {
            RuleName::Trapezoid => FourierRule::Trapezoid,
            RuleName::LeftRiemann => FourierRule::LeftRiemann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsvqeVariant {
    Weighted,
    Identical,
}

/// Inputs are ket labels with qubit 0 rightmost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SsvqeSection {
    pub variant: SsvqeVariant,
    pub layers: usize,
    pub ground_input: String,
    /// `N + 1` particle inputs.
    pub particle_inputs: Vec<String>,
    /// `N - 1` particle inputs.
    pub hole_inputs: Vec<String>,
}

impl Default for SsvqeSection {
    fn default() -> Self {
        Self {
            variant: SsvqeVariant::Identical,
            layers: 6,
            ground_input: "0011".into(),
            particle_inputs: ["0111", "1011", "1101", "1110"].map(String::from).to_vec(),
            hole_inputs: ["0001", "0010", "0100", "1000"].map(String::from).to_vec(),
        }
    }
}

/// Ket label (qubit 0 rightmost) to basis index.
pub fn parse_ket(label: &str, n_qubits: usize) -> Result<usize, RunError> {
    if label.len() != n_qubits || !label.chars().all(|c| c == '0' || c == '1') {
        return Err(RunError::Config(format!(
            "`{label}` is not a {n_qubits}-qubit ket label"
        )));
    }
    Ok(usize::from_str_radix(label, 2).expect("binary digits"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub depths: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            depths: (4..=10).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResourcesSection {
    pub n_site: u64,
    pub n_d: u64,
    pub alpha: f64,
    pub b_norm: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub delta_m: f64,
    pub delta_v: f64,
    pub delta_i: f64,
    pub t: f64,
    pub eps_a: f64,
    pub eps_i: f64,
    pub eps_m: f64,
    pub eps: f64,
    pub eps_s: f64,
    pub n_theta: u64,
    pub n_derivative_terms: u64,
    pub n_h: u64,
    pub n_k: u64,
    pub e_min: f64,
    pub e_max: f64,
    /// Fixed time step for the fixed-step error estimate.
    pub dt: f64,
}

impl Default for ResourcesSection {
    fn default() -> Self {
        let b = ErrorBudget::default();
        Self {
            n_site: 25,
            n_d: 1,
            alpha: b.alpha,
            b_norm: b.b_norm,
            delta2: b.delta2,
            delta3: b.delta3,
            delta_m: b.delta_m,
            delta_v: b.delta_v,
            delta_i: b.delta_i,
            t: b.t,
            eps_a: b.eps_a,
            eps_i: b.eps_i,
            eps_m: b.eps_m,
            eps: b.eps,
            eps_s: b.eps_s,
            n_theta: b.n_theta,
            n_derivative_terms: b.n_d,
            n_h: b.n_h,
            n_k: b.n_k,
            e_min: b.e_min,
            e_max: b.e_max,
            dt: 0.1,
        }
    }
}

impl ResourcesSection {
    pub fn budget(&self) -> ErrorBudget {
        ErrorBudget {
            alpha: self.alpha,
            b_norm: self.b_norm,
            delta2: self.delta2,
            delta3: self.delta3,
            delta_m: self.delta_m,
            delta_v: self.delta_v,
            delta_i: self.delta_i,
            t: self.t,
            eps_a: self.eps_a,
            eps_i: self.eps_i,
            eps_m: self.eps_m,
            eps: self.eps,
            eps_s: self.eps_s,
            n_theta: self.n_theta,
            n_d: self.n_derivative_terms,
            n_h: self.n_h,
            n_k: self.n_k,
            e_min: self.e_min,
            e_max: self.e_max,
        }
    }
}

impl ExperimentConfig {
    pub fn new(task: Task) -> Self {
        Self {
            task,
            seed: 0,
            output: default_output(),
            k_over_pi: default_k(),
            model: ModelSection::default(),
            ground: GroundSection::default(),
            ansatz: AnsatzSection::default(),
            optimizer: OptimizerSection::default(),
            vqs: VqsSection::default(),
            spectral: SpectralSection::default(),
            ssvqe: SsvqeSection::default(),
            sweep: SweepSection::default(),
            resources: ResourcesSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        let c: Self = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn momenta(&self) -> Vec<f64> {
        self.k_over_pi.iter().map(|k| k * std::f64::consts::PI).collect()
    }

    /// Checks the fields the chosen task reads.
    pub fn validate(&self) -> Result<(), RunError> {
        let cfg = |m: String| Err(RunError::Config(m));
        if self.task != Task::Resources {
            self.model.model().validate()?;
        }
        let needs_k = matches!(
            self.task,
            Task::SsvqeGreen | Task::VqsGreen | Task::TrotterGreen | Task::ExactGreen | Task::Spectral | Task::MaeSweep
        );
        if needs_k {
            if self.k_over_pi.is_empty() {
                return cfg("task needs at least one momentum in `k_over_pi`".into());
            }
            if self.model.geometry == GeometryName::Square {
                return cfg("momentum-resolved tasks need a chain or ring geometry".into());
            }
        }
        let s = &self.spectral;
        if needs_k && self.task != Task::ExactGreen {
            if !(s.eta > 0.0) {
                return cfg(format!("spectral.eta must be positive, got {}", s.eta));
            }
            s.omegas()?;
            if !(s.exact_dt > 0.0 && s.exact_t_max > 0.0) {
                return cfg("spectral.exact_dt and spectral.exact_t_max must be positive".into());
            }
        }
        if let Some(b) = s.beta {
            if !(b >= 0.0) {
                return cfg(format!("spectral.beta must be non-negative, got {b}"));
            }
        }
        match self.task {
            Task::VqsGreen | Task::MaeSweep => self.vqs.config(self.seed).validate()?,
            Task::TrotterGreen if self.ansatz.depth == 0 => return cfg("Trotter depth must be positive".into()),
            _ => {}
        }
        if matches!(
            self.task,
            Task::Vqe | Task::SsvqeGreen | Task::VqsGreen | Task::MaeSweep
        ) {
            self.optimizer.config(self.seed).validate()?;
        }
        if self.task == Task::MaeSweep && self.sweep.depths.is_empty() {
            return cfg("sweep.depths is empty".into());
        }
        if self.task == Task::SsvqeGreen {
            let n = self.model.model().n_qubits();
            parse_ket(&self.ssvqe.ground_input, n)?;
            for l in self.ssvqe.particle_inputs.iter().chain(&self.ssvqe.hole_inputs) {
                parse_ket(l, n)?;
            }
        }
        if self.task == Task::Resources {
            self.resources.budget().validate()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let c = ExperimentConfig::from_toml("task = \"exact-green\"\n").unwrap();
        assert_eq!(c.model, ModelSection::default());
        assert_eq!(c.k_over_pi, vec![0.0, 1.0]);
    }

    #[test]
    fn round_trip() {
        let mut c = ExperimentConfig::new(Task::VqsGreen);
        c.vqs.shots = Some(1000);
        c.spectral.beta = Some(2.0);
        let again = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
        assert_eq!(again.to_toml(), c.to_toml());
    }

    #[test]
    fn unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::from_toml("task = \"vqe\"\nfoo = 1\n"),
            Err(RunError::Config(_))
        ));
        assert!(ExperimentConfig::from_toml("task = \"vqs-green\"\n[vqs]\ndt = -0.1\n").is_err());
        assert!(ExperimentConfig::from_toml("task = \"spectral\"\n[spectral]\neta = 0.0\n").is_err());
        assert!(ExperimentConfig::from_toml("task = \"nope\"\n").is_err());
        let square = "task = \"exact-green\"\n[model]\nsites = 4\ngeometry = \"square\"\n";
        assert!(ExperimentConfig::from_toml(square).is_err());
    }

    #[test]
    fn ket_labels() {
        assert_eq!(parse_ket("0011", 4).unwrap(), 3);
        assert_eq!(parse_ket("1000", 4).unwrap(), 8);
        assert!(parse_ket("012", 3).is_err());
        assert!(parse_ket("01", 4).is_err());
    }
}
