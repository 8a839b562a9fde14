//! Runs a convergence study from a JSON configuration and writes the report files.
//!
//! `cargo run --release --example convergence_study -- [config.json] [out_dir]`

use std::path::PathBuf;

use hj_homog::harness::{run_convergence_study, ExperimentConfig};

const DEFAULT: &str = r#"{
    "engine": "continuous",
    "model": {"preset": "pendulum"},
    "initial": {"kind": "cone", "center": [0.5]},
    "eps_list": [0.25, 0.125, 0.0625],
    "T": 1.0
}"#;

fn main() -> hj_homog::Result<()> {
    let mut args = std::env::args().skip(1);
    let mut cfg = match args.next() {
        Some(path) => ExperimentConfig::load(path.as_ref())?,
        None => ExperimentConfig::from_json(DEFAULT)?,
    };
    cfg.out_dir = Some(
        args.next()
            .map(PathBuf::from)
            .unwrap_or_else(|| std::env::temp_dir().join("hjhomog-study")),
    );
    let report = run_convergence_study(&cfg)?;
    for r in &report.rows {
        println!("eps {:<8} sup error {:.5}  ({:.2}s)", r.eps, r.sup_error, r.runtime_s);
    }
    println!(
        "fitted slope {:?}, non-increasing {}",
        report.slope, report.non_increasing
    );
    println!("reports in {}", cfg.out_dir.unwrap().display());
    Ok(())
}
