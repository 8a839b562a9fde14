use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::discrete_weakkam::{cover_homogenize, HomogenizeOptions, NodeError};
use crate::effective::{alpha_table, default_p_grid, AlphaRoute, AlphaTable, BetaTable, MinmaxOptions};
use crate::hj_grid::{hopf_lax_effective, solve_oscillatory, BoxField, PeriodicGrid, ValueField};
use crate::lattice::LatticeBox;
use crate::models::TonelliModel;
use crate::{Error, Result};

use super::config::{Engine, ExperimentConfig, InitialData};

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub eps: f64,
    pub sup_error: f64,
    pub runtime_s: f64,
    /// Error message when this run failed.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub engine: Engine,
    /// Sorted by `eps` descending.
    pub rows: Vec<ReportRow>,
    /// Least-squares slope of `log sup_error` against `log eps`.
    pub slope: Option<f64>,
    pub non_increasing: bool,
    pub all_ran: bool,
    #[serde(skip)]
    pub nodes: Vec<Vec<NodeError>>,
    #[serde(skip)]
    pub alpha: Option<AlphaTable>,
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn fit_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `α` table for a continuous model: quadrature oracle when available,
/// min-max otherwise.
pub fn continuous_alpha_table(model: &TonelliModel) -> Result<AlphaTable> {
    if model.dim() == 1 {
        let grid = LatticeBox::symmetric(1, 4.0, 161)?;
        match alpha_table(model, &grid, &AlphaRoute::Oracle1d) {
            Err(Error::UnsupportedModel(_)) => {}
            other => return other,
        }
    }
    let route = AlphaRoute::Minmax {
        n: 64,
        options: MinmaxOptions::with_iterations(4000),
    };
    alpha_table(model, &default_p_grid(model.dim()), &route)
}

/// Slope half-width on which `β` is resolved by the table: 90% of the
/// smallest one-sided edge slope of `α` along the axes through the centre.
fn resolved_slope(alpha: &AlphaTable) -> f64 {
    let g = alpha.grid();
    let counts = g.counts();
    let mid: Vec<usize> = counts.iter().map(|c| c / 2).collect();
    let mut hw = f64::INFINITY;
    for axis in 0..g.dim() {
        let at = |i: usize| {
            let mut m = mid.clone();
            m[axis] = i;
            alpha.values()[g.flat_index(&m)]
        };
        let last = counts[axis] - 1;
        let left = (at(0) - at(1)) / g.step();
        let right = (at(last) - at(last - 1)) / g.step();
        hw = hw.min(left.abs()).min(right.abs());
    }
    0.9 * hw
}

/// Runtime and per-node errors of one `ε`, or the error that stopped it.
type EpsRun = Result<(f64, Vec<NodeError>)>;

/// Homogenized solution of the continuous problem by the Hopf-Lax formula.
pub struct ContinuousReference {
    field: BoxField,
    beta: BetaTable,
    t: f64,
    step: f64,
}

impl ContinuousReference {
    pub fn new(alpha: &AlphaTable, initial: &InitialData, t: f64) -> Result<Self> {
        let d = alpha.grid().dim();
        let step = if d == 1 { 1.0 / 256.0 } else { 1.0 / 32.0 };
        let hs = step / t;
        let hw = resolved_slope(alpha);
        let m = (hw / hs).floor() as usize;
        let slopes = LatticeBox::new(vec![-(m as f64) * hs; d], hs, vec![2 * m + 1; d])?;
        let beta = BetaTable::from_alpha(alpha, slopes)?;
        let half = ((1.0 + t * hw) / step).ceil() as usize + 4;
        let lattice = LatticeBox::new(vec![-(half as f64) * step; d], step, vec![2 * half + 1; d])?;
        if matches!(initial, InitialData::Affine { .. }) {
            return Err(Error::Input("affine data is not periodic on the torus".into()));
        }
        let field = BoxField::from_fn(lattice, |y| initial.eval_periodic(y).unwrap_or(f64::NAN))?;
        Ok(Self { field, beta, t, step })
    }

    /// Report points: the reference lattice restricted to `[0, 1)^d`.
    pub fn report_points(&self) -> Vec<Vec<f64>> {
        let d = self.field.lattice().dim();
        let per = (1.0 / self.step).round() as usize;
        let total = per.pow(d as u32);
        (0..total)
            .map(|i| {
                let mut rest = i;
                let mut y = vec![0.0; d];
                for a in (0..d).rev() {
                    y[a] = (rest % per) as f64 * self.step;
                    rest /= per;
                }
                y
            })
            .collect()
    }

    pub fn eval(&self, y: &[f64]) -> Result<f64> {
        Ok(hopf_lax_effective(&self.field, &self.beta, y, self.t)?.value)
    }
}

fn continuous_runs(cfg: &ExperimentConfig) -> Result<(AlphaTable, Vec<EpsRun>)> {
    let model = cfg.model.as_ref().expect("validated").build()?;
    let alpha = continuous_alpha_table(&model)?;
    let reference = ContinuousReference::new(&alpha, &cfg.initial, cfg.t)?;
    let points = reference.report_points();
    let refs = points
        .par_iter()
        .map(|y| reference.eval(y))
        .collect::<Result<Vec<f64>>>()?;
    let grid = PeriodicGrid::new(model.dim(), cfg.n)?;
    let f = ValueField::from_fn(grid, 0.0, |y| cfg.initial.eval_periodic(y).unwrap_or(f64::NAN))?;
    let runs = cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            let start = Instant::now();
            let sol = solve_oscillatory(&f, &model, eps, cfg.t, cfg.dt)?;
            let nodes = points
                .iter()
                .zip(&refs)
                .map(|(y, &u)| {
                    let v = sol.field.interpolate(y);
                    NodeError {
                        y: y.clone(),
                        value: v,
                        reference: u,
                        error: (v - u).abs(),
                    }
                })
                .collect();
            Ok((start.elapsed().as_secs_f64(), nodes))
        })
        .collect();
    Ok((alpha, runs))
}

fn discrete_runs(cfg: &ExperimentConfig) -> Result<Vec<EpsRun>> {
    let base = cfg.graph.as_ref().expect("validated").build()?;
    if cfg.initial.dim() != base.k() {
        return Err(Error::Input("initial data dimension differs from k".into()));
    }
    let f = |y: &[f64]| cfg.initial.eval(y);
    Ok(cfg
        .eps_list
        .par_iter()
        .map(|&eps| {
            let start = Instant::now();
            let mut runs = cover_homogenize(&base, &f, &[eps], cfg.t, &HomogenizeOptions::default())?;
            let run = runs.pop().expect("one run per eps");
            Ok((start.elapsed().as_secs_f64(), run.nodes))
        })
        .collect())
}

/// Runs every `ε` of the configuration against the homogenized reference and
/// writes the report files when `out_dir` is set.
pub fn run_convergence_study(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    cfg.validate()?;
    let (alpha, runs) = match cfg.engine {
        Engine::Continuous => {
            let (a, r) = continuous_runs(cfg)?;
            (Some(a), r)
        }
        Engine::Discrete => (None, discrete_runs(cfg)?),
    };
    let mut rows = Vec::with_capacity(runs.len());
    let mut nodes = Vec::with_capacity(runs.len());
    for (&eps, run) in cfg.eps_list.iter().zip(runs) {
        match run {
            Ok((runtime_s, n)) => {
                let sup_error = n.iter().map(|e| e.error).fold(0.0, f64::max);
                rows.push(ReportRow {
                    eps,
                    sup_error,
                    runtime_s,
                    failure: None,
                });
                nodes.push(n);
            }
            Err(e) => {
                rows.push(ReportRow {
                    eps,
                    sup_error: f64::NAN,
                    runtime_s: 0.0,
                    failure: Some(e.to_string()),
                });
                nodes.push(Vec::new());
            }
        }
    }
    let all_ran = rows.iter().all(|r| r.failure.is_none());
    let non_increasing = all_ran && rows.windows(2).all(|w| w[1].sup_error <= w[0].sup_error);
    let slope = fit_log_slope(&rows.iter().map(|r| (r.eps, r.sup_error)).collect::<Vec<_>>());
    let report = ConvergenceReport {
        engine: cfg.engine,
        rows,
        slope,
        non_increasing,
        all_ran,
        nodes,
        alpha,
    };
    if let Some(dir) = &cfg.out_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

/// Writes `report.csv` (`eps,sup_error,status`), `errors_<i>.csv` per run,
/// `alpha.csv` and `timing.csv`. All but `timing.csv` are deterministic.
pub fn write_report(report: &ConvergenceReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut out = BufWriter::new(File::create(dir.join("report.csv"))?);
    writeln!(out, "eps,sup_error,status")?;
    for r in &report.rows {
        let status = r
            .failure
            .as_deref()
            .map_or("ok".to_string(), |m| format!("error: {}", csv_field(m)));
        writeln!(out, "{:.16e},{:.16e},{status}", r.eps, r.sup_error)?;
    }
    out.flush()?;
    let mut timing = BufWriter::new(File::create(dir.join("timing.csv"))?);
    writeln!(timing, "eps,runtime_s")?;
    for r in &report.rows {
        writeln!(timing, "{:.16e},{:.6}", r.eps, r.runtime_s)?;
    }
    timing.flush()?;
    for (i, nodes) in report.nodes.iter().enumerate() {
        let mut f = BufWriter::new(File::create(dir.join(format!("errors_{i}.csv")))?);
        let d = nodes.first().map_or(0, |n| n.y.len());
        let cols: String = (0..d).map(|k| format!("y{k},")).collect();
        writeln!(f, "{cols}value,reference,error")?;
        for n in nodes {
            let y: String = n.y.iter().map(|c| format!("{c:.16e},")).collect();
            writeln!(f, "{y}{:.16e},{:.16e},{:.16e}", n.value, n.reference, n.error)?;
        }
        f.flush()?;
    }
    if let Some(a) = &report.alpha {
        a.write_csv(BufWriter::new(File::create(dir.join("alpha.csv"))?))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{GraphSpec, ModelSpec};

    fn discrete(data: InitialData) -> ExperimentConfig {
        ExperimentConfig {
            engine: Engine::Discrete,
            model: None,
            graph: Some(GraphSpec::Circle),
            initial: data,
            eps_list: vec![0.5, 0.25, 0.125, 0.0625],
            t: 1.0,
            dt: 0.01,
            n: 256,
            out_dir: None,
            seed: 0,
        }
    }

    #[test]
    fn slope_fit() {
        let pts = [(0.5, 0.2), (0.25, 0.1), (0.125, 0.05)];
        assert!((fit_log_slope(&pts).unwrap() - 1.0).abs() < 1e-12);
        assert!(fit_log_slope(&[(0.5, 0.0)]).is_none());
    }

    #[test]
    fn flat_model_has_no_oscillation() {
        let cfg = ExperimentConfig {
            engine: Engine::Continuous,
            model: Some(ModelSpec {
                preset: "flat".into(),
                amplitude: 1.0,
                dim: 1,
            }),
            graph: None,
            initial: InitialData::Cone { center: vec![0.5] },
            eps_list: vec![0.25, 0.125],
            t: 0.5,
            dt: 0.01,
            n: 512,
            out_dir: None,
            seed: 0,
        };
        let r = run_convergence_study(&cfg).unwrap();
        assert!(r.all_ran);
        assert_eq!(r.rows[0].sup_error, r.rows[1].sup_error);
        assert!(r.rows[0].sup_error < 5e-3, "{:?}", r.rows);
    }

    #[test]
    fn discrete_cone_decreases() {
        let r = run_convergence_study(&discrete(InitialData::Cone { center: vec![0.0] })).unwrap();
        assert!(r.non_increasing, "{:?}", r.rows);
        let slope = r.slope.unwrap();
        assert!(slope > 0.0);
    }

    #[test]
    fn report_files_are_consistent() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = discrete(InitialData::Cone { center: vec![0.1] });
        cfg.out_dir = Some(dir.path().to_path_buf());
        let r = run_convergence_study(&cfg).unwrap();
        let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
        for (i, line) in report.lines().skip(1).enumerate() {
            let sup: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            let errs = fs::read_to_string(dir.path().join(format!("errors_{i}.csv"))).unwrap();
            let max = errs
                .lines()
                .skip(1)
                .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
                .fold(0.0, f64::max);
            assert_eq!(sup, max);
            assert_eq!(sup, r.rows[i].sup_error);
        }
    }

    #[test]
    fn failures_are_recorded() {
        let mut cfg = discrete(InitialData::Cone { center: vec![0.0] });
        cfg.t = 0.3;
        let r = run_convergence_study(&cfg).unwrap();
        assert!(!r.all_ran);
        assert!(r.rows[0].failure.is_some());
    }
}
