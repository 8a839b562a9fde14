use std::fs;
use std::path::Path;
use std::process::Command;

fn hjhomog() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hjhomog"))
}

fn status(args: &[&str]) -> i32 {
    hjhomog().args(args).output().unwrap().status.code().unwrap()
}

const DISCRETE: &str = r#"{
    "engine": "discrete",
    "graph": {"preset": "flat_torus", "k": 2},
    "initial": {"kind": "cone", "center": [0.0, 0.0]},
    "eps_list": [0.5, 0.25, 0.125],
    "T": 1.0
}"#;

const CONTINUOUS: &str = r#"{
    "engine": "continuous",
    "model": {"preset": "pendulum"},
    "initial": {"kind": "cone", "center": [0.5]},
    "eps_list": [0.5, 0.25],
    "T": 0.5,
    "n": 256
}"#;

#[test]
fn empty_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    fs::write(&cfg, "").unwrap();
    assert_eq!(status(&["homogenize", "--config", cfg.to_str().unwrap()]), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(status(&["no-such-command"]), 2);
    assert_eq!(status(&["discrete-alpha", "--graph", "not_a_graph", "--p", "0"]), 2);
    assert_eq!(status(&["alpha"]), 2);
    assert_eq!(status(&["accept", "--only", "A99"]), 2);
}

#[test]
fn selected_criteria_pass() {
    assert_eq!(status(&["accept", "--only", "A6,A9"]), 0);
    assert_eq!(status(&["accept", "--only", "A3", "--alpha-oracle-offset", "0.5"]), 0);
}

#[test]
fn tampered_oracle_exits_one() {
    assert_eq!(status(&["accept", "--only", "A2", "--alpha-oracle-offset", "0.5"]), 1);
}

#[test]
fn graph_subcommands_succeed() {
    assert_eq!(status(&["discrete-alpha", "--graph", "circle", "--p", "0.5"]), 0);
    assert_eq!(
        status(&["stable-norm", "--graph", "hedlund:4:0.2", "--h", "1,0,0", "--m", "1,2"]),
        0
    );
    assert_eq!(
        status(&["cover-convergence", "--graph", "circle_with_fin:4", "--torsion"]),
        0
    );
}

fn run_study(config: &str, threads: &str, out: &Path) {
    let cfg = out.with_extension("json");
    fs::write(&cfg, config).unwrap();
    let st = hjhomog()
        .args([
            "homogenize",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
}

fn deterministic_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timing.csv")
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    for (name, cfg) in [("discrete", DISCRETE), ("continuous", CONTINUOUS)] {
        let one = dir.path().join(format!("{name}_1"));
        let four = dir.path().join(format!("{name}_4"));
        run_study(cfg, "1", &one);
        run_study(cfg, "4", &four);
        let (a, b) = (deterministic_files(&one), deterministic_files(&four));
        assert!(a.iter().any(|(f, _)| f == "report.csv"));
        assert_eq!(a, b, "{name} outputs differ between thread counts");
    }
}
