use std::fmt;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{
    hedlund_model, stable_norm_estimate, torsion_collapse_check, tube_changes, verify_space_convergence, GraphComplex,
    SpaceOptions,
};
use crate::discrete_weakkam::{
    alpha_bruteforce, alpha_discrete, alpha_karp, cover_homogenize, discrete_corrector, random_graph, HomogenizeOptions,
};
use crate::effective::{alpha_1d_oracle_fn, alpha_large_t, alpha_minmax, HomologyVector, MinmaxOptions};
use crate::hj_grid::{lax_oleinik_step, solve_cauchy, solve_oscillatory, PeriodicGrid, ValueField};
use crate::lattice::LatticeBox;
use crate::models::{double_conjugate, legendre_inverse, TonelliModel};
use crate::{Error, Result};

use super::config::{Engine, ExperimentConfig, InitialData, ModelSpec};
use super::study::{continuous_alpha_table, run_convergence_study};

const HARD_CAP: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, Default)]
pub struct AcceptanceOptions {
    /// Added to every oracle value `A2` compares against (fault injection).
    pub alpha_oracle_offset: f64,
    /// Criterion ids to run; all when `None`.
    pub only: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub runtime_s: f64,
    pub budget_s: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} [{:.1}s / {:.0}s] {}: {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.runtime_s,
            self.budget_s,
            self.title,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceSummary {
    pub results: Vec<CriterionResult>,
}

impl AcceptanceSummary {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, id: &str) -> Option<&CriterionResult> {
        self.results.iter().find(|r| r.id == id)
    }
}

impl fmt::Display for AcceptanceSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.results {
            writeln!(f, "{r}")?;
        }
        let passed = self.results.iter().filter(|r| r.passed).count();
        write!(f, "{passed}/{} criteria passed", self.results.len())
    }
}

type Check = fn(&AcceptanceOptions) -> Result<(bool, String)>;

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget_s: f64,
    check: Check,
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: "A1",
        title: "flat torus effective Hamiltonian",
        budget_s: 60.0,
        check: a1,
    },
    Criterion {
        id: "A2",
        title: "pendulum flat piece",
        budget_s: 120.0,
        check: a2,
    },
    Criterion {
        id: "A3",
        title: "discrete alpha exactness",
        budget_s: 30.0,
        check: a3,
    },
    Criterion {
        id: "A4",
        title: "Hedlund stable norm",
        budget_s: 120.0,
        check: a4,
    },
    Criterion {
        id: "A5",
        title: "space convergence",
        budget_s: 60.0,
        check: a5,
    },
    Criterion {
        id: "A6",
        title: "torsion collapse",
        budget_s: 10.0,
        check: a6,
    },
    Criterion {
        id: "A7",
        title: "continuous homogenization",
        budget_s: 300.0,
        check: a7,
    },
    Criterion {
        id: "A8",
        title: "discrete homogenization",
        budget_s: 180.0,
        check: a8,
    },
    Criterion {
        id: "A9",
        title: "semigroup properties",
        budget_s: 10.0,
        check: a9,
    },
    Criterion {
        id: "A10",
        title: "duality round trip",
        budget_s: 10.0,
        check: a10,
    },
];

/// Ids of all criteria, in order.
pub fn criterion_ids() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.id).collect()
}

fn run_one(c: &Criterion, opts: &AcceptanceOptions) -> CriterionResult {
    let (tx, rx) = mpsc::channel();
    let check = c.check;
    let o = opts.clone();
    let start = Instant::now();
    thread::spawn(move || {
        let _ = tx.send(check(&o));
    });
    let (mut passed, detail) = match rx.recv_timeout(HARD_CAP) {
        Ok(Ok((p, d))) => (p, d),
        Ok(Err(e)) => (false, format!("error: {e}")),
        Err(mpsc::RecvTimeoutError::Timeout) => (false, format!("exceeded the {}s hard cap", HARD_CAP.as_secs())),
        Err(mpsc::RecvTimeoutError::Disconnected) => (false, "check panicked".into()),
    };
    let runtime_s = start.elapsed().as_secs_f64();
    let mut detail = detail;
    if runtime_s > c.budget_s {
        passed = false;
        detail.push_str(&format!("; over budget ({runtime_s:.1}s > {}s)", c.budget_s));
    }
    CriterionResult {
        id: c.id.into(),
        title: c.title.into(),
        passed,
        detail,
        runtime_s,
        budget_s: c.budget_s,
    }
}

/// Runs the selected criteria one after another, each on its own thread
/// under a hard time cap.
pub fn run_acceptance_suite(opts: &AcceptanceOptions) -> Result<AcceptanceSummary> {
    if let Some(only) = &opts.only {
        if let Some(bad) = only.iter().find(|id| !CRITERIA.iter().any(|c| c.id == id.as_str())) {
            return Err(Error::Input(format!("unknown criterion {bad}")));
        }
    }
    let results = CRITERIA
        .iter()
        .filter(|c| opts.only.as_ref().is_none_or(|o| o.iter().any(|id| id == c.id)))
        .map(|c| run_one(c, opts))
        .collect();
    Ok(AcceptanceSummary { results })
}

fn both_routes(model: &TonelliModel, p: f64, lt_n: usize, lt_t: f64, mm_n: usize) -> Result<(f64, f64)> {
    let lt = alpha_large_t(model, &[p], lt_t, 0.01, PeriodicGrid::new(1, lt_n)?)?.alpha;
    let mm = alpha_minmax(model, &[p], PeriodicGrid::new(1, mm_n)?, &MinmaxOptions::default())?.alpha;
    Ok((lt, mm))
}

fn a1(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let model = TonelliModel::flat(1);
    let ps = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let rows = ps
        .par_iter()
        .map(|&p| both_routes(&model, p, 256, 20.0, 256))
        .collect::<Result<Vec<_>>>()?;
    let worst = ps
        .iter()
        .zip(&rows)
        .map(|(p, (lt, mm))| (lt - p * p / 2.0).abs().max((mm - p * p / 2.0).abs()))
        .fold(0.0, f64::max);
    Ok((worst <= 0.02, format!("max |alpha - P^2/2| = {worst:.4} (tol 0.02)")))
}

fn a2(opts: &AcceptanceOptions) -> Result<(bool, String)> {
    let model = TonelliModel::pendulum(1.0);
    let u = |x: f64| model.potential_at(&[x]).unwrap_or(f64::NAN);
    let ps = [0.0, 0.5, 2.0, 4.0];
    let rows = ps
        .par_iter()
        .map(|&p| {
            let (lt, mm) = both_routes(&model, p, 512, 100.0, 256)?;
            Ok((lt, mm, alpha_1d_oracle_fn(u, p)? + opts.alpha_oracle_offset))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_u = (0..4096)
        .map(|i| u(i as f64 / 4096.0))
        .fold(f64::NEG_INFINITY, f64::max);
    let flat = (rows[0].0 - max_u).abs().max((rows[0].1 - max_u).abs());
    let worst = rows
        .iter()
        .map(|(lt, mm, o)| (lt - o).abs().max((mm - o).abs()))
        .fold(0.0, f64::max);
    Ok((
        flat <= 0.02 && worst <= 0.02,
        format!("|alpha(0) - max U| = {flat:.4}, max |alpha - oracle| = {worst:.4} (tol 0.02)"),
    ))
}

fn a3(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let mut worst_karp: f64 = 0.0;
    let mut karp_graphs = 0;
    for s in 0..50u64 {
        let (nv, k, extra, unit) = (
            1 + (s % 8) as usize,
            1 + (s % 2) as usize,
            (s % 10) as usize,
            s % 3 == 0,
        );
        let g = random_graph(s, nv, k, extra, unit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
        for _ in 0..3 {
            let p: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let exact = alpha_bruteforce(&g, &p)?.alpha;
            worst = worst.max((alpha_discrete(&g, &p, 1e-9)?.alpha - exact).abs());
            if unit {
                worst_karp = worst_karp.max((alpha_karp(&g, &p)? - exact).abs());
            }
        }
        karp_graphs += unit as usize;
    }
    Ok((
        worst <= 1e-9 && worst_karp <= 1e-9,
        format!("50 graphs, max deviation {worst:.2e}; Karp on {karp_graphs} unit graphs {worst_karp:.2e} (tol 1e-9)"),
    ))
}

fn a4(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let g = hedlund_model(8, 0.1)?;
    let norm = |h: [f64; 3]| stable_norm_estimate(&g, &HomologyVector::new(h.to_vec())?, &[16]);
    let (x, xy, xyz) = (norm([1.0, 0.0, 0.0])?, norm([1.0, 1.0, 0.0])?, norm([1.0, 1.0, 1.0])?);
    let (r2, r3) = (xy.estimate / x.estimate, xyz.estimate / x.estimate);
    let jumps = tube_changes(8, &g, &xy.path_edges);
    Ok((
        (r2 / 2.0 - 1.0).abs() <= 0.1 && (r3 / 3.0 - 1.0).abs() <= 0.1 && jumps <= 2,
        format!("ratios {r2:.3} and {r3:.3} (targets 2, 3 within 10%); (1,1,0) changes tube {jumps} times"),
    ))
}

fn a5(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let eps = [0.5, 0.25, 0.125];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, g) in [
        ("flat torus", GraphComplex::flat_torus(2)),
        ("Hedlund", hedlund_model(4, 0.2)?),
    ] {
        let s = verify_space_convergence(&g, &eps, &SpaceOptions::default())?;
        let fiber = s.rows.iter().all(|r| r.fiber_bound);
        let bounded = s.rows.iter().all(|r| r.a_eps <= s.c * r.eps * (1.0 + 1e-12));
        ok &= s.c_stable && fiber && bounded;
        parts.push(format!(
            "{name}: C = {:.3}, stable {}, fiber bound {}",
            s.c, s.c_stable, fiber
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn a6(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let t = torsion_collapse_check(&GraphComplex::circle_with_fin(4)?, &[0.5, 0.25, 0.125, 0.0625])?;
    let ok = t.ratios.iter().all(|r| (r / 0.5 - 1.0).abs() <= 0.2);
    Ok((ok, format!("diameter ratios {:?} (target 0.5 within 20%)", t.ratios)))
}

fn a7(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let cfg = ExperimentConfig {
        engine: Engine::Continuous,
        model: Some(ModelSpec {
            preset: "pendulum".into(),
            amplitude: 1.0,
            dim: 1,
        }),
        graph: None,
        initial: InitialData::Cone { center: vec![0.5] },
        eps_list: vec![0.25, 0.125, 0.0625],
        t: 1.0,
        dt: 0.01,
        n: 1024,
        out_dir: None,
        seed: 0,
    };
    let r = run_convergence_study(&cfg)?;
    let errs: Vec<f64> = r.rows.iter().map(|row| row.sup_error).collect();
    let strict = r.all_ran && errs.windows(2).all(|w| w[1] < w[0]);
    Ok((strict, format!("sup errors {errs:.4?}")))
}

fn a8(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let eps = [0.5, 0.25, 0.125, 0.0625];
    let t = 1.0;
    let opts = HomogenizeOptions::default();
    let mut ok = true;
    let mut parts = Vec::new();
    let cases: [(&str, GraphComplex, Vec<f64>); 2] = [
        ("circle", GraphComplex::circle(), vec![0.5]),
        ("torus", GraphComplex::flat_torus(2), vec![0.5, -0.25]),
    ];
    for (name, g, p) in cases {
        let cone = |y: &[f64]| y.iter().map(|c| c * c).sum::<f64>().sqrt();
        let runs = cover_homogenize(&g, &cone, &eps, t, &opts)?;
        let errs: Vec<f64> = runs.iter().map(|r| r.row.sup_error).collect();
        let cone_ok = errs.windows(2).all(|w| w[1] <= w[0]);

        let a = 0.25;
        let pa = p.clone();
        let affine = move |y: &[f64]| a + y.iter().zip(&pa).map(|(u, q)| u * q).sum::<f64>();
        let runs = cover_homogenize(&g, &affine, &eps, t, &opts)?;
        let aff: Vec<f64> = runs.iter().map(|r| r.row.sup_error).collect();
        let alpha = alpha_discrete(&g, &p, 1e-9)?;
        let amp = discrete_corrector(&g, &alpha)?.amplitude();
        let corrector_ok = runs.iter().all(|r| {
            r.nodes
                .iter()
                .all(|n| (n.value - (affine(&n.y) - alpha.alpha * t)).abs() <= r.row.eps * (amp + 1.0) + 1e-9)
        });
        let aff_ok = aff.windows(2).all(|w| w[1] <= w[0]);
        ok &= cone_ok && aff_ok && corrector_ok;
        parts.push(format!(
            "{name}: cone {errs:.4?}, affine max {:.2e}, corrector bound {}",
            aff.iter().cloned().fold(0.0, f64::max),
            if corrector_ok { "held" } else { "violated" }
        ));
    }
    Ok((ok, parts.join("; ")))
}

/// Dyadic field on 64 nodes with `u₀ = −1`, `u₁ = u₆₃ = 0` and the rest in
/// `[0, 1/8]`, so both fields of a pair share the Lipschitz estimate 64.
fn dyadic_pair(rng: &mut ChaCha8Rng, grid: PeriodicGrid) -> Result<(ValueField, ValueField)> {
    let n = grid.n();
    let mut u = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 2..n - 1 {
        u[i] = rng.gen_range(0..=32) as f64 / 256.0;
        w[i] = rng.gen_range(0..=32) as f64 / 256.0;
    }
    u[0] = -1.0;
    let v: Vec<f64> = u.iter().zip(&w).map(|(a, b)| a + b).collect();
    Ok((ValueField::new(grid, u, 0.0)?, ValueField::new(grid, v, 0.0)?))
}

fn a9(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let grid = PeriodicGrid::new(1, 64)?;
    let model = TonelliModel::flat(1);
    let dt = 1.0 / 64.0;
    let c = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut mono, mut commute, mut nonexp) = (0, 0, 0);
    for _ in 0..100 {
        let (u, v) = dyadic_pair(&mut rng, grid)?;
        let (tu, tv) = (lax_oleinik_step(&u, &model, dt)?, lax_oleinik_step(&v, &model, dt)?);
        mono += tu.values().iter().zip(tv.values()).any(|(a, b)| a > b) as usize;
        let tuc = lax_oleinik_step(&u.map(|x| x + c)?, &model, dt)?;
        commute += tuc.values().iter().zip(tu.values()).any(|(a, b)| *a != b + c) as usize;
        nonexp += (tu.sup_distance(&tv) > u.sup_distance(&v)) as usize;
    }
    let pendulum = TonelliModel::pendulum(1.0);
    let g32 = PeriodicGrid::new(1, 32)?;
    let f = ValueField::from_fn(g32, 0.0, |x| (x[0] - 0.5).abs())?;
    let osc = solve_oscillatory(&f, &pendulum, 1.0, 0.1, 0.01)?.field;
    let plain = solve_cauchy(&f, &pendulum, 0.1, 0.01)?.field;
    let bits = osc
        .values()
        .iter()
        .zip(plain.values())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    Ok((
        mono + commute + nonexp == 0 && bits,
        format!(
            "100 pairs: {mono} monotonicity, {commute} commutation, {nonexp} nonexpansiveness violations; eps = 1 bit-exact {bits}"
        ),
    ))
}

fn a10(_: &AcceptanceOptions) -> Result<(bool, String)> {
    let table = continuous_alpha_table(&TonelliModel::pendulum(1.0))?;
    let beta0 = legendre_inverse(table.grid(), table.values(), &[0.0])?;
    let slopes = LatticeBox::symmetric(1, 3.5, 141)?;
    let dc = double_conjugate(table.grid(), table.values(), &slopes)?;
    let excess = dc
        .iter()
        .zip(table.values())
        .map(|(d, a)| d - a)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((
        (beta0 + 1.0).abs() <= 5e-3 && excess <= 1e-6,
        format!("beta(0) = {beta0:.6} (target -1 within 5e-3); max(alpha** - alpha) = {excess:.2e}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_ids_are_rejected() {
        let opts = AcceptanceOptions {
            only: Some(vec!["A11".into()]),
            ..Default::default()
        };
        assert!(run_acceptance_suite(&opts).is_err());
    }

    #[test]
    fn fast_criteria_pass() {
        let opts = AcceptanceOptions {
            only: Some(vec!["A6".into(), "A9".into()]),
            ..Default::default()
        };
        let s = run_acceptance_suite(&opts).unwrap();
        assert_eq!(s.results.len(), 2);
        assert!(s.all_passed(), "{s}");
    }

    #[test]
    fn dyadic_pairs_share_lipschitz() {
        let grid = PeriodicGrid::new(1, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (u, v) = dyadic_pair(&mut rng, grid).unwrap();
        assert_eq!(u.lipschitz(), v.lipschitz());
        assert!(u.values().iter().zip(v.values()).all(|(a, b)| a <= b));
    }
}
