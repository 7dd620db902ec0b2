//! Box-constrained limited-memory quasi-Newton minimisation with
//! finite-difference gradients.
//!
//! Each iteration takes a two-loop L-BFGS direction on the variables that
//! are not pinned at a bound, projects the trial point back into the box and
//! backtracks until the Armijo condition holds.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(n: usize) -> Bounds {
        Bounds {
            lower: vec![f64::NEG_INFINITY; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimOptions {
    pub max_iter: usize,
    /// Stop when an accepted step lowers the objective by less than this.
    pub ftol: f64,
    /// Stop when the projected gradient's infinity norm drops below this.
    pub gtol: f64,
    pub memory: usize,
    pub fd_rel_step: f64,
    pub fd_min_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        OptimOptions {
            max_iter: 500,
            ftol: 1e-9,
            gtol: 1e-6,
            memory: 10,
            fd_rel_step: 1e-6,
            fd_min_step: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Gradient,
    FunctionChange,
    MaxIterations,
    LineSearchFailed,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub termination: Termination,
    /// Objective at the start point followed by every accepted iterate.
    pub history: Vec<f64>,
}

pub fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], opts: &OptimOptions) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = (opts.fd_rel_step * x[i].abs()).max(opts.fd_min_step);
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn pinned(x: f64, g: f64, lo: f64, hi: f64) -> bool {
    (x <= lo && g > 0.0) || (x >= hi && g < 0.0)
}

pub fn projected_gradient_norm(x: &[f64], g: &[f64], bounds: &Bounds) -> f64 {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (&xi, &gi))| ((xi - gi).clamp(bounds.lower[i], bounds.upper[i]) - xi).abs())
        .fold(0.0, f64::max)
}

pub fn minimize<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], bounds: &Bounds, opts: &OptimOptions) -> OptimResult {
    let n = x0.len();
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let mut fx = f(&x);
    let mut history = vec![fx];
    if !fx.is_finite() {
        return OptimResult {
            x,
            f: fx,
            iterations: 0,
            termination: Termination::NonFinite,
            history,
        };
    }
    let mut g = central_gradient(&f, &x, opts);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        if g.iter().any(|v| !v.is_finite()) {
            termination = Termination::NonFinite;
            break;
        }
        if projected_gradient_norm(&x, &g, bounds) < opts.gtol {
            termination = Termination::Gradient;
            break;
        }
        let free: Vec<bool> = (0..n)
            .map(|i| !pinned(x[i], g[i], bounds.lower[i], bounds.upper[i]))
            .collect();
        let mut d = two_loop(&g, &s_hist, &y_hist);
        for i in 0..n {
            d[i] = if free[i] { -d[i] } else { 0.0 };
        }
        if s_hist.is_empty() || dot(&g, &d) >= 0.0 {
            s_hist.clear();
            y_hist.clear();
            d = (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect();
            let scale = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale > 1.0 {
                d.iter_mut().for_each(|v| *v /= scale);
            }
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            bounds.project(&mut trial);
            let moved: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
            let slope = dot(&g, &moved);
            if moved.iter().all(|&m| m == 0.0) {
                break;
            }
            let ft = f(&trial);
            if ft.is_finite() && ft < fx && ft <= fx + 1e-4 * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }

        let Some((x_new, f_new)) = accepted else {
            if s_hist.is_empty() {
                termination = Termination::LineSearchFailed;
                break;
            }
            s_hist.clear();
            y_hist.clear();
            iterations += 1;
            continue;
        };

        let g_new = central_gradient(&f, &x_new, opts);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&y, &y).max(f64::MIN_POSITIVE) {
            if s_hist.len() == opts.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        let decrease = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        history.push(fx);
        iterations += 1;
        if decrease < opts.ftol {
            termination = Termination::FunctionChange;
            break;
        }
    }

    OptimResult {
        x,
        f: fx,
        iterations,
        termination,
        history,
    }
}

/// Applies the inverse-Hessian approximation to `g`.
fn two_loop(g: &[f64], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let mut q = g.to_vec();
    let k = s_hist.len();
    let mut alpha = vec![0.0; k];
    let rho: Vec<f64> = (0..k).map(|i| 1.0 / dot(&y_hist[i], &s_hist[i])).collect();
    for i in (0..k).rev() {
        alpha[i] = rho[i] * dot(&s_hist[i], &q);
        for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
            *qj -= alpha[i] * yj;
        }
    }
    if k > 0 {
        let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
        q.iter_mut().for_each(|v| *v *= gamma);
    }
    for i in 0..k {
        let beta = rho[i] * dot(&y_hist[i], &q);
        for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    q
}
