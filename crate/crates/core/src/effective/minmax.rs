use serde::Serialize;

use crate::hj_grid::PeriodicGrid;
use crate::models::TonelliModel;
use crate::{Error, Result};

/// Options of the min-max solver.
///
/// The non-smooth objective `max_i H(x_i, P + Du_i)` is replaced by the
/// log-sum-exp `μ log Σ exp(H_i/μ)`, which overestimates the max by at most
/// `μ log N`, and minimized by accelerated gradient steps with backtracking.
/// `μ` is halved in stages from `mu_start` down to `mu_final`.
#[derive(Debug, Clone, Serialize)]
pub struct MinmaxOptions {
    pub iterations: usize,
    pub mu_start: f64,
    pub mu_final: f64,
}

impl Default for MinmaxOptions {
    fn default() -> Self {
        Self {
            iterations: 20_000,
            mu_start: 0.1,
            mu_final: 2e-4,
        }
    }
}

impl MinmaxOptions {
    pub fn with_iterations(iterations: usize) -> Self {
        Self {
            iterations,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinmaxResult {
    /// Best `max_i H(x_i, P + Du_i)` seen; this sequence never increases.
    pub alpha: f64,
    /// Best-so-far value after each iteration.
    pub history: Vec<f64>,
    /// `μ log N` at the final stage.
    pub smoothing_gap: f64,
    /// The minimizing grid function (zero mean).
    pub u: Vec<f64>,
}

struct Objective<'a> {
    model: &'a TonelliModel,
    grid: PeriodicGrid,
    xs: Vec<Vec<f64>>,
    p: Vec<f64>,
    h_vals: Vec<f64>,
    hp: Vec<[f64; 2]>,
}

impl<'a> Objective<'a> {
    /// Evaluates `H_i` and `∂_p H_i` at every node; returns the true max.
    fn evaluate(&mut self, u: &[f64]) -> Result<f64> {
        let g = self.grid;
        let dim = g.dim();
        let inv = 0.5 * g.n() as f64;
        let mut q = [0.0; 2];
        let mut max = f64::NEG_INFINITY;
        for i in 0..g.len() {
            for k in 0..dim {
                let mut e = [0i64; 2];
                e[k] = 1;
                let plus = u[g.shift(i, e)];
                e[k] = -1;
                let minus = u[g.shift(i, e)];
                q[k] = self.p[k] + (plus - minus) * inv;
            }
            let h = self.model.hamiltonian(&self.xs[i], &q[..dim])?;
            if !h.is_finite() {
                return Err(Error::ModelEvaluation(crate::Point {
                    x: self.xs[i].clone(),
                    v: q[..dim].to_vec(),
                }));
            }
            self.h_vals[i] = h;
            self.model
                .hamiltonian_p(&self.xs[i], &q[..dim], &mut self.hp[i][..dim])?;
            max = max.max(h);
        }
        Ok(max)
    }

    /// Smoothed value `μ log Σ exp(H_i/μ)` of the last evaluation.
    fn smoothed(&self, max: f64, mu: f64) -> f64 {
        let s: f64 = self.h_vals.iter().map(|h| ((h - max) / mu).exp()).sum();
        max + mu * s.ln()
    }

    fn gradient(&self, max: f64, mu: f64, out: &mut [f64]) {
        let g = self.grid;
        let inv = 0.5 * g.n() as f64;
        let weights: Vec<f64> = self.h_vals.iter().map(|h| ((h - max) / mu).exp()).collect();
        let total: f64 = weights.iter().sum();
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..g.len() {
            let w = weights[i] / total;
            for k in 0..g.dim() {
                let c = w * self.hp[i][k] * inv;
                let mut e = [0i64; 2];
                e[k] = 1;
                out[g.shift(i, e)] += c;
                e[k] = -1;
                out[g.shift(i, e)] -= c;
            }
        }
    }
}

fn zero_mean(u: &mut [f64]) {
    let m = u.iter().sum::<f64>() / u.len() as f64;
    u.iter_mut().for_each(|x| *x -= m);
}

/// `α(P) = min_u max_i H(x_i, P + Du_i)` over zero-mean grid functions, with
/// central differences `Du`. Starts from `u = 0`.
pub fn alpha_minmax(
    model: &TonelliModel,
    p: &[f64],
    grid: PeriodicGrid,
    options: &MinmaxOptions,
) -> Result<MinmaxResult> {
    if p.len() != model.dim() || grid.dim() != model.dim() {
        return Err(Error::Input("dimension mismatch in min-max".into()));
    }
    if !(options.mu_final > 0.0 && options.mu_start >= options.mu_final) {
        return Err(Error::Input("need mu_start >= mu_final > 0".into()));
    }
    let n = grid.len();
    let mut obj = Objective {
        model,
        grid,
        xs: (0..n).map(|i| grid.coords(i)).collect(),
        p: p.to_vec(),
        h_vals: vec![0.0; n],
        hp: vec![[0.0; 2]; n],
    };
    let log_n = (n as f64).ln();
    let stages = ((options.mu_start / options.mu_final).log2().ceil() as usize) + 1;
    let per_stage = (options.iterations / stages).max(1);

    let mut x = vec![0.0; n];
    let mut best = obj.evaluate(&x)?;
    let mut best_u = x.clone();
    let mut history = Vec::with_capacity(options.iterations);
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut step = grid.spacing().powi(2);
    let mut mu = options.mu_start;
    let mut increases = 0usize;
    let mut done = 0usize;

    for stage in 0..stages {
        if stage > 0 {
            mu = (mu * 0.5).max(options.mu_final);
        }
        if stage + 1 == stages {
            mu = options.mu_final;
        }
        let mut y = x.clone();
        let mut t = 1.0_f64;
        let max_x = obj.evaluate(&x)?;
        let mut fx = obj.smoothed(max_x, mu);
        let budget = if stage + 1 == stages {
            options.iterations - done
        } else {
            per_stage
        };
        for _ in 0..budget {
            let max_y = obj.evaluate(&y)?;
            let fy = obj.smoothed(max_y, mu);
            obj.gradient(max_y, mu, &mut grad);
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            if g2 == 0.0 {
                history.push(best);
                done += 1;
                continue;
            }
            let mut accepted = None;
            while step > 1e-30 {
                for i in 0..n {
                    trial[i] = y[i] - step * grad[i];
                }
                let m = obj.evaluate(&trial)?;
                let f = obj.smoothed(m, mu);
                if f <= fy - 0.5 * step * g2 {
                    accepted = Some((f, m));
                    break;
                }
                step *= 0.5;
            }
            let Some((f_new, max_new)) = accepted else {
                // no decrease representable at this μ
                step = grid.spacing().powi(2);
                done += 1;
                history.push(best);
                break;
            };
            if max_new < best {
                best = max_new;
                best_u.copy_from_slice(&trial);
            }
            history.push(best);
            done += 1;

            if f_new > fx + 1e-14 * fx.abs() {
                increases += 1;
                if increases >= 100 {
                    return Err(Error::StepSize(format!(
                        "objective increased over {increases} consecutive steps"
                    )));
                }
                // momentum restart
                t = 1.0;
                y.copy_from_slice(&x);
                continue;
            }
            increases = 0;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for i in 0..n {
                y[i] = trial[i] + beta * (trial[i] - x[i]);
            }
            x.copy_from_slice(&trial);
            fx = f_new;
            t = t_next;
            step *= 1.2;
        }
    }
    zero_mean(&mut best_u);
    Ok(MinmaxResult {
        alpha: best,
        history,
        smoothing_gap: mu * log_n,
        u: best_u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::alpha_1d_oracle_fn;
    use std::f64::consts::PI;

    #[test]
    fn flat_model_is_optimal_at_start() {
        let g = PeriodicGrid::new(1, 64).unwrap();
        for p in [-2.0, 0.0, 1.5] {
            let r = alpha_minmax(&TonelliModel::flat(1), &[p], g, &MinmaxOptions::with_iterations(50)).unwrap();
            assert_eq!(r.alpha, p * p / 2.0);
        }
    }

    #[test]
    fn pendulum_at_zero() {
        let g = PeriodicGrid::new(1, 256).unwrap();
        let r = alpha_minmax(
            &TonelliModel::pendulum(1.0),
            &[0.0],
            g,
            &MinmaxOptions::with_iterations(2000),
        )
        .unwrap();
        assert!(r.alpha >= 1.0 - 1e-12 && r.alpha <= 1.05, "{}", r.alpha);
    }

    #[test]
    fn pendulum_above_flat_piece() {
        let g = PeriodicGrid::new(1, 256).unwrap();
        let r = alpha_minmax(&TonelliModel::pendulum(1.0), &[2.0], g, &MinmaxOptions::default()).unwrap();
        let oracle = alpha_1d_oracle_fn(|x| (2.0 * PI * x).cos(), 2.0).unwrap();
        assert!((r.alpha - oracle).abs() < 0.02, "{} vs {oracle}", r.alpha);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
    }
}
