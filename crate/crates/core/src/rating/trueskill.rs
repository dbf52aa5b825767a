//! TrueSkill for a free-for-all match of single-player teams.
//!
//! Factor graph, per player `i` in finishing order:
//!
//! ```text
//! prior N(mu_i, sigma_i² + tau²) ── skill_i ── N(·, beta²) ── perf_i
//! perf_k ─┐
//!         ├─ d_k = perf_k - perf_{k+1} ── 1[d_k > eps] or 1[|d_k| <= eps]
//! perf_k+1┘
//! ```
//!
//! The skill→performance messages are fixed once the priors are in place,
//! so only the chain of difference factors is iterated. Each sweep goes
//! forward over the chain and then backward; iteration stops once the
//! largest change in any difference marginal's mean or variance is below
//! the configured tolerance.

use log::warn;

use super::gaussian::{ppf, v_draw, v_win, w_draw, w_win};
use super::{check_aligned, RatingConfig, TrueSkillState};
use crate::error::Result;

/// Gaussian in natural parameters: precision `pi` and precision-mean `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Gaussian {
    pi: f64,
    tau: f64,
}

impl Gaussian {
    const UNIFORM: Gaussian = Gaussian { pi: 0.0, tau: 0.0 };

    fn from_mean_var(mean: f64, var: f64) -> Self {
        Gaussian {
            pi: 1.0 / var,
            tau: mean / var,
        }
    }

    fn mean(self) -> f64 {
        if self.pi == 0.0 {
            0.0
        } else {
            self.tau / self.pi
        }
    }

    fn var(self) -> f64 {
        if self.pi == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.pi
        }
    }

    fn mul(self, o: Gaussian) -> Gaussian {
        Gaussian {
            pi: self.pi + o.pi,
            tau: self.tau + o.tau,
        }
    }

    fn div(self, o: Gaussian) -> Gaussian {
        Gaussian {
            pi: self.pi - o.pi,
            tau: self.tau - o.tau,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrueSkillUpdate {
    pub states: Vec<TrueSkillState>,
    /// Sweeps over the difference chain that were run.
    pub iterations: usize,
    pub converged: bool,
}

/// Draw margin for a comparison between two single-player teams.
pub fn draw_margin(draw_prob: f64, beta: f64) -> f64 {
    ppf((draw_prob + 1.0) / 2.0) * 2f64.sqrt() * beta
}

/// Message state for the difference chain. Index `k` couples the players at
/// sorted positions `k` and `k + 1`.
struct Chain {
    /// Fixed message from each skill into its performance variable.
    perf_prior: Vec<Gaussian>,
    to_left: Vec<Gaussian>,
    to_right: Vec<Gaussian>,
    diff_down: Vec<Gaussian>,
    trunc: Vec<Gaussian>,
    draw: Vec<bool>,
    eps: f64,
}

impl Chain {
    fn perf_marginal(&self, i: usize) -> Gaussian {
        let mut m = self.perf_prior[i];
        if i > 0 {
            m = m.mul(self.to_right[i - 1]);
        }
        if i < self.to_left.len() {
            m = m.mul(self.to_left[i]);
        }
        m
    }

    /// `perf_k` and `perf_{k+1}` with factor `k`'s own messages removed.
    fn cavities(&self, k: usize) -> (Gaussian, Gaussian) {
        (
            self.perf_marginal(k).div(self.to_left[k]),
            self.perf_marginal(k + 1).div(self.to_right[k]),
        )
    }

    fn down(&mut self, k: usize) {
        let (l, r) = self.cavities(k);
        self.diff_down[k] = Gaussian::from_mean_var(l.mean() - r.mean(), l.var() + r.var());
    }

    /// Conditions `d_k` on its outcome. Returns the change in its marginal.
    fn truncate(&mut self, k: usize) -> f64 {
        let cavity = self.diff_down[k];
        let old = cavity.mul(self.trunc[k]);
        let sqrt_pi = cavity.pi.sqrt();
        let t = cavity.tau / sqrt_pi;
        let eps = self.eps * sqrt_pi;
        let (v, w) = if self.draw[k] {
            (v_draw(t, eps), w_draw(t, eps))
        } else {
            (v_win(t - eps), w_win(t - eps))
        };
        let denom = (1.0 - w).max(f64::MIN_POSITIVE);
        let new = Gaussian {
            pi: cavity.pi / denom,
            tau: (cavity.tau + sqrt_pi * v) / denom,
        };
        self.trunc[k] = new.div(cavity);
        if old.pi == 0.0 {
            return f64::INFINITY;
        }
        (new.mean() - old.mean()).abs().max((new.var() - old.var()).abs())
    }

    fn up_left(&mut self, k: usize) {
        let (_, r) = self.cavities(k);
        let d = self.trunc[k];
        self.to_left[k] = Gaussian::from_mean_var(d.mean() + r.mean(), d.var() + r.var());
    }

    fn up_right(&mut self, k: usize) {
        let (l, _) = self.cavities(k);
        let d = self.trunc[k];
        self.to_right[k] = Gaussian::from_mean_var(l.mean() - d.mean(), l.var() + d.var());
    }
}

/// Updates every participant of one match. Equal ranks are draws.
///
/// When the schedule does not converge within `cfg.max_iterations` the
/// current posteriors are returned with `converged = false`.
pub fn trueskill_update_ffa(states: &[TrueSkillState], ranks: &[u32], cfg: &RatingConfig) -> Result<TrueSkillUpdate> {
    check_aligned(states.len(), ranks)?;
    let n = states.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ranks[i]);

    let beta2 = cfg.ts_beta * cfg.ts_beta;
    let tau2 = cfg.ts_tau * cfg.ts_tau;
    let priors: Vec<Gaussian> = order
        .iter()
        .map(|&i| Gaussian::from_mean_var(states[i].mu, states[i].sigma * states[i].sigma + tau2))
        .collect();

    let m = n - 1;
    let mut chain = Chain {
        perf_prior: priors
            .iter()
            .map(|p| Gaussian::from_mean_var(p.mean(), p.var() + beta2))
            .collect(),
        to_left: vec![Gaussian::UNIFORM; m],
        to_right: vec![Gaussian::UNIFORM; m],
        diff_down: vec![Gaussian::UNIFORM; m],
        trunc: vec![Gaussian::UNIFORM; m],
        draw: order.windows(2).map(|w| ranks[w[0]] == ranks[w[1]]).collect(),
        eps: draw_margin(cfg.ts_draw_prob, cfg.ts_beta),
    };

    let mut converged = false;
    let mut iterations = 0;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let mut delta: f64 = 0.0;
        if m == 1 {
            chain.down(0);
            delta = chain.truncate(0);
        } else {
            for k in 0..m - 1 {
                chain.down(k);
                delta = delta.max(chain.truncate(k));
                chain.up_right(k);
            }
            for k in (1..m).rev() {
                chain.down(k);
                delta = delta.max(chain.truncate(k));
                chain.up_left(k);
            }
        }
        if delta < cfg.convergence_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        warn!("trueskill: no convergence after {iterations} sweeps (n = {n})");
    }
    chain.up_left(0);
    chain.up_right(m - 1);

    let mut out = vec![TrueSkillState::default(); n];
    for (pos, &player) in order.iter().enumerate() {
        let evidence = chain.perf_marginal(pos).div(chain.perf_prior[pos]);
        let to_skill = Gaussian::from_mean_var(evidence.mean(), evidence.var() + beta2);
        let post = priors[pos].mul(to_skill);
        out[player] = TrueSkillState {
            mu: post.mean(),
            sigma: post.var().sqrt(),
        };
    }
    Ok(TrueSkillUpdate {
        states: out,
        iterations,
        converged,
    })
}
