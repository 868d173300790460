//! End-to-end CLI behavior: subcommands, exit codes, output files.

use std::path::PathBuf;
use std::process::Command;

fn pflab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pflab"))
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const TINY_RUN: &str = r#"
    [scenario]
    name = "gauge_check"

    [matter]
    kind = "atom"
    n_points = 101
    spacing = 0.4

    [bath]
    omega_min = 0.1
    omega_max = 0.1
    n_modes = 1

    [truncation]
    scheme = "per_mode"
    cutoff = 10
    certify_cutoff = 14

    [sweep]
    lambda_grid = [0.0, 0.05]

    [strategies]
    list = ["exact"]
"#;

#[test]
fn list_scenarios_prints_the_seven_names() {
    let out = pflab().arg("list-scenarios").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let names: Vec<&str> = text.lines().collect();
    assert_eq!(
        names,
        vec![
            "mode_occupation",
            "energy_vs_modes",
            "density_diff_vs_modes",
            "density_diff_vs_lambda",
            "h2_dissociation",
            "ring_density",
            "gauge_check",
        ]
    );
}

#[test]
fn validate_accepts_every_shipped_config() {
    let dir = configs_dir();
    let mut entries: Vec<_> = std::fs::read_dir(&dir)
        .expect("configs directory present")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    entries.sort();
    assert!(entries.len() >= 7, "expected the shipped config set");
    for path in entries {
        let out = pflab().args(["validate", "--config"]).arg(&path).output().unwrap();
        assert!(
            out.status.success(),
            "validate failed for {}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn validate_rejects_unknown_keys_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, TINY_RUN.replace("lambda_grid", "lamda_grid")).unwrap();
    let out = pflab().args(["validate", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("lamda_grid"), "diagnostic names the key: {err}");
}

#[test]
fn run_writes_outputs_and_respects_overwrite_policy() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY_RUN).unwrap();
    let out_dir = dir.path().join("results");

    let out = pflab()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .args(["--threads", "2"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "run failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let listing: Vec<_> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(listing.iter().any(|f| f.ends_with(".csv")), "table written: {listing:?}");
    assert!(listing.iter().any(|f| f.ends_with(".meta.json")), "metadata written");
    assert!(
        listing.iter().all(|f| !f.ends_with(".tmp")),
        "no partial files remain: {listing:?}"
    );

    // A second run without --overwrite refuses to clobber the table.
    let again = pflab()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(again.status.code(), Some(1));

    let forced = pflab()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(&out_dir)
        .arg("--overwrite")
        .output()
        .unwrap();
    assert!(forced.status.success());
}

#[test]
fn full_scale_reference_bath_is_a_capacity_refusal() {
    // The 250-mode exact atom on the reference grid overflows any budget;
    // the refusal reports the computed dimension and exits 3.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    std::fs::write(
        &cfg,
        r#"
        [scenario]
        name = "density_diff_vs_lambda"

        [matter]
        kind = "atom"
        n_points = 3000
        spacing = 0.0707

        [bath]
        omega_min = 0.01
        omega_max = 0.5
        n_modes = 250

        [truncation]
        scheme = "total_excitation"
        cutoff = 3

        [sweep]
        lambda_grid = [0.05]

        [strategies]
        list = ["exact", "nrqed_ave"]
        "#,
    )
    .unwrap();
    let out = pflab()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--scale", "full", "--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    // C(253, 3) photon blocks times 3000 grid points.
    assert!(err.contains("8001378000"), "refusal carries the dimension: {err}");
}

#[test]
fn certify_prints_a_cutoff_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(&cfg, TINY_RUN.replace("cutoff = 10", "cutoff = 12")).unwrap();
    let out = pflab().args(["certify", "--config"]).arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "certify failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("cutoff,energy"));
    assert!(text.contains("certified true"), "{text}");
}
