//! Limited-memory BFGS with Armijo backtracking and central finite-difference
//! gradients.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbfgsConfig {
    pub max_iters: usize,
    /// Relative decrease `(f_prev − f) / max(|f_prev|, |f|, 1)` below which
    /// the run stops.
    pub f_tol: f64,
    /// Stop once the largest gradient component is at or below this.
    pub g_tol: f64,
    pub history: usize,
    pub fd_step: f64,
    pub max_backtracks: usize,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        LbfgsConfig {
            max_iters: 2000,
            f_tol: 1e-12,
            g_tol: 1e-9,
            history: 10,
            fd_step: 1e-6,
            max_backtracks: 50,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    FunctionTolerance,
    MaxIterations,
    LineSearchFailed,
    NonFinite,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub reason: StopReason,
    /// Objective at the start and after every accepted step.
    pub trace: Vec<f64>,
}

pub fn central_gradient(f: &impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
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

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Two-loop recursion: returns `−H·g`.
fn search_direction(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, rho) in pairs.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    if let Some((s, y, _)) = pairs.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

pub fn minimize(f: impl Fn(&[f64]) -> f64, x0: &[f64], cfg: &LbfgsConfig) -> LbfgsReport {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut trace = vec![fx];
    if !fx.is_finite() {
        return LbfgsReport {
            x,
            f: fx,
            iterations: 0,
            reason: StopReason::NonFinite,
            trace,
        };
    }
    let mut g = central_gradient(&f, &x, cfg.fd_step);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut reason = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        if !g.iter().all(|v| v.is_finite()) {
            reason = StopReason::NonFinite;
            break;
        }
        if inf_norm(&g) <= cfg.g_tol {
            reason = StopReason::GradientTolerance;
            break;
        }
        let mut d = search_direction(&g, &pairs);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        // First steepest-descent step is kept short; quasi-Newton steps start at 1.
        let mut t = if pairs.is_empty() { (1.0 / inf_norm(&g)).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let ft = f(&trial);
            if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
                accepted = Some((trial, ft));
                break;
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if pairs.is_empty() {
                reason = StopReason::LineSearchFailed;
                break;
            }
            pairs.clear();
            continue;
        };
        iterations += 1;
        let g_new = central_gradient(&f, &x_new, cfg.fd_step);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if pairs.len() == cfg.history {
                pairs.pop_front();
            }
            pairs.push_back((s, y, 1.0 / sy));
        }
        let decrease = (fx - f_new) / fx.abs().max(f_new.abs()).max(1.0);
        x = x_new;
        fx = f_new;
        g = g_new;
        trace.push(fx);
        if decrease <= cfg.f_tol {
            reason = StopReason::FunctionTolerance;
            break;
        }
    }
    LbfgsReport {
        x,
        f: fx,
        iterations,
        reason,
        trace,
    }
}
