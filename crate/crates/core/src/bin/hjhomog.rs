use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hj_homog::cover::{stable_norm_estimate, torsion_collapse_check, verify_space_convergence, SpaceOptions};
use hj_homog::discrete_weakkam::{alpha_discrete, discrete_corrector};
use hj_homog::effective::{cell_corrector, BetaTable, CellOptions, HomologyVector};
use hj_homog::harness::{
    continuous_alpha_table, run_acceptance_suite, run_convergence_study, AcceptanceOptions, Engine, ExperimentConfig,
    GraphSpec, ModelSpec,
};
use hj_homog::hj_grid::PeriodicGrid;
use hj_homog::lattice::LatticeBox;
use hj_homog::models::{check_tonelli, TonelliModel};
use hj_homog::Error;

#[derive(Parser)]
#[command(
    name = "hjhomog",
    version,
    about = "Homogenization of Hamilton-Jacobi equations on tori and graph covers"
)]
struct Cli {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (results go to stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model preset: flat, pendulum or aniso2d.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    amplitude: f64,
}

#[derive(Args, Clone)]
struct GraphArgs {
    /// circle, flat_torus:K, circle_with_fin:ORDER, hedlund:N:DELTA or a graph file path.
    #[arg(long)]
    graph: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Convexity and superlinearity scan of a model.
    TonelliCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
    /// Effective Hamiltonian table.
    Alpha {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Conjugate of the effective Hamiltonian on a slope lattice.
    Beta {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 3.0)]
        half_width: f64,
        #[arg(long, default_value_t = 61)]
        count: usize,
    },
    /// Cell corrector at one P.
    Cell {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 512)]
        n: usize,
    },
    /// Convergence study of the configured experiment.
    Homogenize {
        /// Force the graph-cover engine.
        #[arg(long)]
        discrete: bool,
    },
    /// Discrete effective Hamiltonian and corrector on a graph.
    DiscreteAlpha {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Stable norm estimate of an integer class.
    StableNorm {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        h: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        m: Vec<i64>,
    },
    /// Quasi-isometry constants of the rescaled cover, or torsion collapse.
    CoverConvergence {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.25,0.125")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 4000)]
        pairs: usize,
        /// Measure fiber collapse of the torsion coordinates instead.
        #[arg(long)]
        torsion: bool,
    },
    /// Runs the acceptance criteria.
    Accept {
        /// Comma-separated criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        /// Shift applied to the oracle values of the pendulum check.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha_oracle_offset: f64,
    },
}

enum Failure {
    Usage(String),
    Run(Error),
    Criterion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Input(_) | Error::Json(_) | Error::Parse { .. } => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Run(e.into())
    }
}

type Outcome = std::result::Result<(), Failure>;

struct Ctx {
    config: Option<ExperimentConfig>,
    out: Option<PathBuf>,
    seed: Option<u64>,
}

impl Ctx {
    fn model(&self, args: &ModelArgs) -> Result<TonelliModel, Failure> {
        let spec = match (&args.model, &self.config) {
            (Some(preset), _) => ModelSpec {
                preset: preset.clone(),
                amplitude: args.amplitude,
                dim: args.dim,
            },
            (None, Some(cfg)) if cfg.model.is_some() => cfg.model.clone().unwrap(),
            _ => {
                return Err(Failure::Usage(
                    "no model given (--model or a config with a model)".into(),
                ))
            }
        };
        Ok(spec.build()?)
    }

    fn graph(&self, args: &GraphArgs) -> Result<GraphSpec, Failure> {
        match (&args.graph, &self.config) {
            (Some(s), _) => parse_graph(s),
            (None, Some(cfg)) if cfg.graph.is_some() => Ok(cfg.graph.clone().unwrap()),
            _ => Err(Failure::Usage(
                "no graph given (--graph or a config with a graph)".into(),
            )),
        }
    }

    fn emit(&self, name: &str, write: impl FnOnce(&mut dyn Write) -> hj_homog::Result<()>) -> Outcome {
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let mut f = BufWriter::new(File::create(dir.join(name))?);
                write(&mut f)?;
                f.flush()?;
                eprintln!("wrote {}", dir.join(name).display());
            }
            None => write(&mut io::stdout().lock())?,
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, name: &str, value: &T) -> Outcome {
        self.emit(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            writeln!(w)?;
            Ok(())
        })
    }
}

fn parse_graph(s: &str) -> Result<GraphSpec, Failure> {
    let bad = || Failure::Usage(format!("cannot parse graph spec '{s}'"));
    let parts: Vec<&str> = s.split(':').collect();
    Ok(match parts.as_slice() {
        ["circle"] => GraphSpec::Circle,
        ["flat_torus", k] => GraphSpec::FlatTorus {
            k: k.parse().map_err(|_| bad())?,
        },
        ["circle_with_fin", o] => GraphSpec::CircleWithFin {
            order: o.parse().map_err(|_| bad())?,
        },
        ["hedlund", n, d] => GraphSpec::Hedlund {
            n: n.parse().map_err(|_| bad())?,
            delta: d.parse().map_err(|_| bad())?,
        },
        _ if Path::new(s).exists() => GraphSpec::File { path: s.into() },
        _ => return Err(bad()),
    })
}

fn run(cli: Cli) -> Outcome {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let config = cli
        .config
        .as_deref()
        .map(ExperimentConfig::load)
        .transpose()
        .map_err(|e| Failure::Usage(format!("config: {e}")))?;
    let ctx = Ctx {
        config,
        out: cli.out,
        seed: cli.seed,
    };
    match cli.command {
        Command::TonelliCheck { model, samples } => {
            let report = check_tonelli(&ctx.model(&model)?, samples)?;
            ctx.emit_json("tonelli.json", &report)?;
            if !report.passed() {
                return Err(Failure::Criterion("model is not Tonelli on the sample set".into()));
            }
        }
        Command::Alpha { model } => {
            let table = continuous_alpha_table(&ctx.model(&model)?)?;
            ctx.emit("alpha.csv", |w| table.write_csv(w))?;
        }
        Command::Beta {
            model,
            half_width,
            count,
        } => {
            let m = ctx.model(&model)?;
            let table = continuous_alpha_table(&m)?;
            let beta = BetaTable::from_alpha(&table, LatticeBox::symmetric(m.dim(), half_width, count)?)?;
            ctx.emit("beta.csv", |w| beta.write_csv(w))?;
        }
        Command::Cell { model, p, n } => {
            let m = ctx.model(&model)?;
            if p.len() != m.dim() {
                return Err(Failure::Usage(format!("--p needs {} components", m.dim())));
            }
            let table = continuous_alpha_table(&m)?;
            let alpha = table
                .grid()
                .snap(&p)
                .map(|i| table.values()[i])
                .ok_or_else(|| Failure::Usage("P is not a node of the alpha lattice".into()))?;
            let cell = cell_corrector(&m, &p, alpha, PeriodicGrid::new(m.dim(), n)?, &CellOptions::default())?;
            eprintln!(
                "alpha = {alpha:.10}, residual = {:.3e}, converged = {} after {} steps",
                cell.residual, cell.converged, cell.steps
            );
            ctx.emit("cell.csv", |w| cell.field.write_csv(w))?;
        }
        Command::Homogenize { discrete } => {
            let mut cfg = ctx
                .config
                .clone()
                .ok_or_else(|| Failure::Usage("homogenize needs --config".into()))?;
            if discrete {
                cfg.engine = Engine::Discrete;
            }
            if let Some(out) = &ctx.out {
                cfg.out_dir = Some(out.clone());
            }
            if let Some(seed) = ctx.seed {
                cfg.seed = seed;
            }
            let report = run_convergence_study(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).map_err(Error::from)?);
            if !report.non_increasing {
                eprintln!("warning: sup errors are not non-increasing in eps");
            }
            if !report.all_ran {
                return Err(Failure::Criterion("some eps runs failed".into()));
            }
        }
        Command::DiscreteAlpha { graph, p, tol } => {
            let base = ctx.graph(&graph)?.build()?;
            let a = alpha_discrete(&base, &p, tol)?;
            let u = discrete_corrector(&base, &a)?;
            #[derive(Serialize)]
            struct Out<'a> {
                alpha: &'a hj_homog::discrete_weakkam::DiscreteAlphaResult,
                corrector: &'a [f64],
                min_slack: f64,
            }
            ctx.emit_json(
                "discrete_alpha.json",
                &Out {
                    alpha: &a,
                    corrector: &u.u,
                    min_slack: u.min_slack(),
                },
            )?;
        }
        Command::StableNorm { graph, h, m } => {
            let base = ctx.graph(&graph)?.build()?;
            let est = stable_norm_estimate(&base, &HomologyVector::new(h)?, &m)?;
            ctx.emit_json("stable_norm.json", &est)?;
        }
        Command::CoverConvergence {
            graph,
            eps,
            pairs,
            torsion,
        } => {
            let base = ctx.graph(&graph)?.build()?;
            if torsion {
                ctx.emit_json("torsion.json", &torsion_collapse_check(&base, &eps)?)?;
            } else {
                let opts = SpaceOptions {
                    pairs,
                    seed: ctx.seed.unwrap_or(0),
                    ..SpaceOptions::default()
                };
                let s = verify_space_convergence(&base, &eps, &opts)?;
                ctx.emit_json("space_convergence.json", &s)?;
                if !s.c_stable || s.rows.iter().any(|r| !r.fiber_bound) {
                    return Err(Failure::Criterion("quasi-isometry constants not stable".into()));
                }
            }
        }
        Command::Accept {
            only,
            alpha_oracle_offset,
        } => {
            let summary = run_acceptance_suite(&AcceptanceOptions {
                alpha_oracle_offset,
                only,
            })?;
            println!("{summary}");
            if let Some(dir) = &ctx.out {
                fs::create_dir_all(dir)?;
                let text = serde_json::to_string_pretty(&summary).map_err(Error::from)?;
                fs::write(dir.join("acceptance.json"), text)?;
            }
            if !summary.all_passed() {
                return Err(Failure::Criterion("acceptance criteria failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Criterion(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(1)
        }
    }
}
