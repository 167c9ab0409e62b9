//! Canonical configurations: the spectra, depth sweep, resource table and
//! the 4-site ring run.

use crate::config::{AnsatzName, ExperimentConfig, GeometryName, GroundMethod, Task};
use crate::RunError;

/// Names accepted by [`targets`].
pub const TARGETS: &[&str] = &[
    "vqs-spectra",
    "ssvqe-spectra",
    "depth-sweep",
    "resources",
    "shallow",
    "ring",
];

fn two_site(task: Task, u: f64, tag: &str) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(task);
    c.model.interaction = u;
    c.output = format!("out/{tag}").into();
    c
}

/// The runs behind one reproduction target, each with its own output
/// subdirectory.
pub fn targets(name: &str) -> Result<Vec<ExperimentConfig>, RunError> {
    let runs = match name {
        "vqs-spectra" => {
            let mut a = two_site(Task::VqsGreen, 3.0, "vqs-spectra/u3");
            a.vqs.dt = 0.1;
            let mut b = two_site(Task::VqsGreen, 6.0, "vqs-spectra/u6");
            b.vqs.dt = 0.03;
            vec![a, b]
        }
        "ssvqe-spectra" => vec![
            two_site(Task::SsvqeGreen, 3.0, "ssvqe-spectra/u3"),
            two_site(Task::SsvqeGreen, 6.0, "ssvqe-spectra/u6"),
        ],
        "depth-sweep" => {
            let mut c = two_site(Task::MaeSweep, 3.0, "depth-sweep");
            c.k_over_pi = vec![1.0];
            vec![c]
        }
        "resources" => {
            let mut c = ExperimentConfig::new(Task::Resources);
            c.output = "out/resources".into();
            vec![c]
        }
        "shallow" => {
            let mut c = two_site(Task::VqsGreen, 3.0, "shallow");
            c.ansatz.depth = 4;
            vec![c]
        }
        "ring" => {
            let mut c = ExperimentConfig::new(Task::VqsGreen);
            c.output = "out/ring".into();
            c.model.sites = 4;
            c.model.geometry = GeometryName::Ring;
            c.model.interaction = 6.0;
            c.ground.method = GroundMethod::Exact;
            c.ansatz.kind = AnsatzName::VariationalHamiltonian;
            c.ansatz.depth = 16;
            c.vqs.dt = 0.03;
            c.spectral.eta = 0.4;
            c.k_over_pi = vec![0.0];
            vec![c]
        }
        other => {
            return Err(RunError::Config(format!(
                "unknown reproduction target `{other}`; expected one of {}",
                TARGETS.join(", ")
            )))
        }
    };
    for r in &runs {
        r.validate()?;
    }
    Ok(runs)
}
