use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn topkm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topkm"))
        .args(args)
        .output()
        .expect("spawn topkm")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = r#"
id = "small"
algorithm = "lucb_km"
k = 1
m = 2
epsilon = 0.1
delta = 0.1
scheme = "kl"
runs = 6
base_seed = 3
parallelism = 2

[instance]
generator = "linear"
n = 5
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&topkm(&["--help"])), 0);
    assert_eq!(code(&topkm(&["--version"])), 0);
}

#[test]
fn bad_arguments_exit_one() {
    assert_eq!(code(&topkm(&["run"])), 1);
    assert_eq!(code(&topkm(&["frobnicate"])), 1);
    let out = topkm(&["preset", "--name", "fig9", "--out", "x"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn invalid_config_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("k = 1", "k = 3"));
    let out = topkm(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("k"));
}

#[test]
fn missing_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let out = topkm(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn run_then_aggregate_reproduces_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = topkm(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let runs = fs::read_to_string(out_dir.join("runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 7);
    assert!(runs.starts_with("experiment_id,algorithm,"));

    let again = dir.path().join("again.csv");
    let out = topkm(&[
        "aggregate",
        "--in",
        out_dir.join("runs.csv").to_str().unwrap(),
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(
        fs::read(out_dir.join("summary.csv")).unwrap(),
        fs::read(&again).unwrap()
    );
}

#[test]
fn parallelism_does_not_change_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut tables = Vec::new();
    for width in ["1", "3"] {
        let out_dir = dir.path().join(width);
        let out = topkm(&[
            "run",
            "--config",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--parallelism",
            width,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        tables.push(fs::read(out_dir.join("runs.csv")).unwrap());
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn single_run_groups_warn() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("runs = 6", "runs = 1"));
    let out = topkm(&["run", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn preset_dry_run_writes_configs_only() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    for (name, full, expected) in [("fig1", false, 6), ("fig1", true, 10), ("fig2", false, 10), ("fig3", false, 6)] {
        let out_dir = format!("{root}/{name}-{full}");
        let mut args = vec!["preset", "--name", name, "--out", &out_dir, "--dry-run", "--scale", "0.05"];
        if full {
            args.push("--full");
        }
        let out = topkm(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let configs = fs::read_dir(format!("{out_dir}/configs")).unwrap().count();
        assert_eq!(configs, expected, "{name} full={full}");
        assert!(!Path::new(&out_dir).join("runs.csv").exists());
    }
    let text = fs::read_to_string(format!("{root}/fig3-false/configs/fig3-k10.toml"));
    assert!(text.is_ok_and(|t| t.contains("runs = 5")));
}

#[test]
fn lower_bound_instance_and_hardness() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("lb.txt");
    let out = topkm(&[
        "lb-instance", "--n", "6", "--m", "2", "--k", "1", "--eps", "0.1", "--set", "3", "4",
        "--out", inst.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&inst).unwrap();
    assert!(text.contains("kind = finite"));

    let out = topkm(&[
        "hardness", "--instance", inst.to_str().unwrap(), "--k", "1", "--m", "2", "--eps", "0.1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("n = 6\nhardness = "));
    assert_eq!(stdout.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count(), 6);

    // too many raised arms is a usage error
    let out = topkm(&["lb-instance", "--n", "6", "--m", "2", "--k", "1", "--eps", "0.1", "--set", "1", "2", "3"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}
