//! Writing a run to disk.

use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::config::ExperimentConfig;
use crate::tasks::RunOutput;
use crate::RunError;

/// Writes every artifact plus `summary.json` and `manifest.json` into `dir`
/// and returns the written paths.
pub fn write_run(
    dir: &Path,
    config: &ExperimentConfig,
    output: &RunOutput,
    started: SystemTime,
    wall: Duration,
) -> Result<Vec<PathBuf>, RunError> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for a in &output.artifacts {
        let p = dir.join(&a.name);
        std::fs::write(&p, &a.contents)?;
        written.push(p);
    }
    let summary = dir.join("summary.json");
    std::fs::write(&summary, serde_json::to_string_pretty(&output.summary).expect("json"))?;
    written.push(summary);

    let manifest = json!({
        "task": config.task.name(),
        "seed": config.seed,
        "config": config,
        "versions": {
            "greenfn": env!("CARGO_PKG_VERSION"),
        },
        "started_unix": started.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "wall_seconds": wall.as_secs_f64(),
        "outputs": output.artifacts.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(),
    });
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("json"))?;
    written.push(path);
    Ok(written)
}

/// Runs `config` and stores the result in `dir`.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<RunOutput, RunError> {
    let started = SystemTime::now();
    let clock = std::time::Instant::now();
    let out = crate::tasks::run(config)?;
    write_run(dir, config, &out, started, clock.elapsed())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Task;
    use crate::tasks::Artifact;

    #[test]
    fn writes_artifacts_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = RunOutput {
            artifacts: vec![Artifact {
                name: "a.csv".into(),
                contents: "x\n1\n".into(),
            }],
            summary: json!({ "ok": true }),
        };
        let cfg = ExperimentConfig::new(Task::Resources);
        let paths = write_run(dir.path(), &cfg, &out, SystemTime::now(), Duration::from_millis(5)).unwrap();
        assert_eq!(paths.len(), 3);
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "x\n1\n");
        let m: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["task"], "resources");
        assert_eq!(m["outputs"][0], "a.csv");
    }
}
