//! End-to-end runs of the `pinnlab` binary on tiny configurations.

use std::path::Path;
use std::process::{Command, Output};

const TRAIN_TOML: &str = r#"
[problem]
L = 0.1
N = 1.0
family = "xsin"

[model]
kind = "qpinn"
params = 100
depth_c = 1
seed = 3

[training]
epochs = 20
n_points = 16
batches = 2
eval_every = 10
seed = 3

[reference]
nx = 65
dt = 1e-3
save_every = 50
"#;

const MATRIX_TOML: &str = r#"
[problem]
L = 0.1
N = 1.0
family = "xsin"

[training]
eval_every = 10

[reference]
nx = 65
dt = 1e-3
save_every = 50

[matrix]
L = [0.1]
N = [1.0]
params = [100]
points = [16]
seeds = [0]
cpinn_epochs = 20
qpinn_epochs = 20
cpinn_depths = [1, 2]
qpinn_depth_c = [1]
"#;

fn pinnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinnlab")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = pinnlab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn train_then_inspect_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, TRAIN_TOML).unwrap();
    let out = dir.path().join("out");
    let cache = dir.path().join("cache");
    ok(&["train", "--config", p(&cfg), "--out", p(&out), "--cache", p(&cache)]);

    let csv = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("epoch,loss_train"));
    assert_eq!(lines.count(), 21);
    let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
    assert!(summary.contains("\"epochs_completed\": 20"), "{summary}");
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);

    let ckpt = out.join("checkpoint.json");
    let probe = dir.path().join("probe.csv");
    ok(&[
        "probe",
        "--checkpoint",
        p(&ckpt),
        "--resolution",
        "5",
        "--out",
        p(&probe),
    ]);
    let probe = std::fs::read_to_string(probe).unwrap();
    assert_eq!(probe.lines().count(), 26);

    let land = dir.path().join("land.csv");
    ok(&[
        "landscape",
        "--checkpoint",
        p(&ckpt),
        "--config",
        p(&cfg),
        "--i",
        "0",
        "--j",
        "5",
        "--half-width",
        "0.5",
        "--resolution",
        "3",
        "--out",
        p(&land),
        "--cache",
        p(&cache),
    ]);
    let land = std::fs::read_to_string(land).unwrap();
    assert_eq!(land.lines().next(), Some("theta_i,theta_j,mse"));
    assert_eq!(land.lines().count(), 10);
}

#[test]
fn reference_exports_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, TRAIN_TOML).unwrap();
    let csv = dir.path().join("u.csv");
    let printed = ok(&[
        "reference",
        "--config",
        p(&cfg),
        "--cache",
        p(dir.path()),
        "--csv",
        p(&csv),
    ]);
    assert!(printed.trim().ends_with(".ref"));
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,x,u"));
    // 1000 steps saved every 50 plus the initial row, 65 nodes each
    assert_eq!(text.lines().count(), 1 + 21 * 65);
}

#[test]
fn experiment_ratios_and_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("matrix.toml");
    std::fs::write(&cfg, MATRIX_TOML).unwrap();
    let out = dir.path().join("exp");
    let printed = ok(&[
        "experiment",
        "--config",
        p(&cfg),
        "--out",
        p(&out),
        "--parallelism",
        "2",
    ]);
    assert!(printed.contains("2 cells, 3 training runs"), "{printed}");
    for name in [
        "candidates.csv",
        "representatives.csv",
        "curves.csv",
        "mse_ratio.csv",
        "epoch_ratio.csv",
        "success.csv",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let before = std::fs::read(out.join("epoch_ratio.csv")).unwrap();
    ok(&["ratios", "--dir", p(&out)]);
    assert_eq!(std::fs::read(out.join("epoch_ratio.csv")).unwrap(), before);
    let printed = ok(&["success", "--dir", p(&out), "--threshold", "10"]);
    assert!(printed.contains("1/1"), "{printed}");
}

#[test]
fn bad_inputs_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        "[problem]\nL = 0.1\nN = 1.0\nfamily = \"xsin\"\n[model]\nwidth = 3\n",
    )
    .unwrap();
    let out = pinnlab(&["train", "--config", p(&cfg), "--out", p(dir.path())]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));

    let missing = pinnlab(&["ratios", "--dir", p(&dir.path().join("nope"))]);
    assert!(!missing.status.success());

    std::fs::write(&cfg, TRAIN_TOML).unwrap();
    let no_matrix = pinnlab(&["experiment", "--config", p(&cfg), "--out", p(dir.path())]);
    assert!(String::from_utf8_lossy(&no_matrix.stderr).contains("[matrix]"));
}
