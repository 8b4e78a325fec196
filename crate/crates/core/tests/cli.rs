use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"
[lattice]
n = 12
kappa = [1.0]

[wave]
m = 1
omega = 6.0
modes = 64

[solver]
tol_step = 1e-14

[solver.seed]
kind = "cosine"
mode = 2

[simulate]
t_final = 0.5
dt = 1e-3
sample_every = 100
"#;

fn dnls(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dnls-tw"));
    cmd.args(args).env_remove("DNLS_TW_OUT");
    if let Some(dir) = env_out {
        cmd.env("DNLS_TW_OUT", dir);
    }
    cmd.output().unwrap()
}

fn only_file(dir: &Path, suffix: &str) -> std::path::PathBuf {
    let mut hits: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(suffix))
        .collect();
    assert_eq!(hits.len(), 1, "{suffix} in {}", dir.display());
    hits.pop().unwrap()
}

#[test]
fn embedded_config_reproduces_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let toml_path = tmp.path().join("run.toml");
    std::fs::write(&toml_path, CONFIG).unwrap();
    let first = tmp.path().join("first");
    let out = dnls(
        &[
            "simulate",
            toml_path.to_str().unwrap(),
            "--omega",
            "7.5",
            "--out",
            first.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(only_file(&first, ".json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["wave"]["omega"], serde_json::json!(7.5));
    let json_path = tmp.path().join("effective.json");
    std::fs::write(&json_path, serde_json::to_string(&doc["config"]).unwrap()).unwrap();

    let second = tmp.path().join("second");
    let out = dnls(
        &[
            "simulate",
            json_path.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for suffix in [".csv", ".json"] {
        let a = only_file(&first, suffix);
        let b = only_file(&second, suffix);
        assert_eq!(a.file_name(), b.file_name());
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}

#[test]
fn output_directory_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("run.toml");
    std::fs::write(&path, CONFIG).unwrap();
    let env_dir = tmp.path().join("from_env");
    let out = dnls(&["band", path.to_str().unwrap()], Some(&env_dir));
    assert!(out.status.success());
    only_file(&env_dir, ".csv");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 2);
}

#[test]
fn exit_codes_for_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("o");
    let out_dir = out_dir.to_str().unwrap();
    assert_eq!(dnls(&["--help"], None).status.code(), Some(0));
    assert_eq!(dnls(&["frobnicate"], None).status.code(), Some(1));
    assert_eq!(
        dnls(&["solve", "/nonexistent.toml", "--out", out_dir], None)
            .status
            .code(),
        Some(1)
    );

    let path = tmp.path().join("bad.toml");
    std::fs::write(&path, CONFIG.replace("omega = 6.0", "omega = 6.0\ntypo = 1")).unwrap();
    let out = dnls(&["solve", path.to_str().unwrap(), "--out", out_dir], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo"));

    let path = tmp.path().join("run.toml");
    std::fs::write(&path, CONFIG).unwrap();
    let out = dnls(
        &["solve", path.to_str().unwrap(), "--q", "1.2", "--out", out_dir],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    let capped = tmp.path().join("capped.toml");
    std::fs::write(
        &capped,
        CONFIG.replace("tol_step = 1e-14", "tol_step = 1e-14\nmax_iter = 3"),
    )
    .unwrap();
    let out = dnls(&["solve", capped.to_str().unwrap(), "--out", out_dir], None);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
