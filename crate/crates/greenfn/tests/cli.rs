use std::path::Path;
use std::process::Command;

fn greenfn(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_greenfn")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bad_configs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "a.toml", "task = \"vqe\"\ncolour = 3\n");
    let out = greenfn(&["run", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    let bad_eta = write_config(dir.path(), "b.toml", "task = \"spectral\"\n[spectral]\neta = -1.0\n");
    assert_eq!(greenfn(&["run", "--config", &bad_eta]).status.code(), Some(2));

    let missing = dir.path().join("missing.toml");
    assert_eq!(
        greenfn(&["run", "--config", missing.to_str().unwrap()]).status.code(),
        Some(2)
    );

    assert_eq!(greenfn(&["reproduce", "nope"]).status.code(), Some(2));
}

#[test]
fn vqs_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.toml",
        "task = \"vqs-green\"\nseed = 11\nk_over_pi = [1.0]\n[model]\ninteraction = 3.0\n[ansatz]\ndepth = 2\n[vqs]\nt_max = 2.0\n[spectral]\nn_omega = 101\nexact_t_max = 10.0\n",
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for o in [&a, &b] {
        let out = greenfn(&["run", "--config", &cfg, "--out", o.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let manifest = json(&a.join("manifest.json"));
    let outputs = manifest["outputs"].as_array().unwrap();
    assert!(outputs.iter().any(|o| o == "green_vqs_k1.000pi.csv"));
    for name in outputs {
        let name = name.as_str().unwrap();
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name} differs between runs"
        );
    }
    assert_eq!(manifest["seed"], 11);
    assert_eq!(manifest["config"]["vqs"]["t_max"], 2.0);
}

#[test]
fn subcommand_overrides_task_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "r.toml", "task = \"vqe\"\n");
    let o = dir.path().join("res");
    let out = greenfn(&[
        "resources",
        "--config",
        &cfg,
        "--out",
        o.to_str().unwrap(),
        "--seed",
        "4",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&o.join("resources.json"));
    assert_eq!(r["gate_counts"]["n_single"], 655);
    assert_eq!(r["gate_counts"]["n_two"], 1005);
    assert_eq!(r["full_depth"]["quoted_n_two_consistent"], false);
    let m = json(&o.join("manifest.json"));
    assert_eq!(m["task"], "resources");
    assert_eq!(m["seed"], 4);
}

#[test]
fn exact_green_starts_at_minus_i() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "e.toml",
        "task = \"exact-green\"\n[model]\ninteraction = 6.0\n[spectral]\nexact_t_max = 5.0\n",
    );
    let o = dir.path().join("e");
    assert!(greenfn(&["run", "--config", &cfg, "--out", o.to_str().unwrap()])
        .status
        .success());
    let s = json(&o.join("summary.json"));
    for k in s["k"].as_array().unwrap() {
        let g0 = k["g0"].as_array().unwrap();
        assert!(g0[0].as_f64().unwrap().abs() < 1e-12);
        assert!((g0[1].as_f64().unwrap() + 1.0).abs() < 1e-12);
    }
    let csv = std::fs::read_to_string(o.join("green_exact_k0.000pi.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 51);
}

#[test]
fn written_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = greenfn::ExperimentConfig::new(greenfn::Task::SsvqeGreen);
    c.model.interaction = 6.0;
    c.ssvqe.layers = 3;
    let p = write_config(dir.path(), "c.toml", &c.to_toml());
    assert_eq!(greenfn::ExperimentConfig::load(Path::new(&p)).unwrap(), c);
}
