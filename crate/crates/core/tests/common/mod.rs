//! Independent oracles shared by the integration tests and the acceptance
//! harness.

#![allow(dead_code)]

use statrs::function::erf::erfc;

fn phi(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Outcome of a two-player match from player 1's side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Win,
    Draw,
    Loss,
}

/// Exact posterior means and standard deviations of two skills after one
/// match, by brute-force 2-D quadrature of
///
/// ```text
/// N(s1; m1, v1) N(s2; m2, v2) P(outcome | s1 - s2)
/// ```
///
/// where `v = sigma² + tau²` and, with `d = s1 - s2` and `c = sqrt(2) beta`,
/// `P(win) = Φ((d - eps) / c)` and `P(draw) = Φ((eps - d) / c) - Φ((-eps - d) / c)`.
pub fn two_player_posterior(
    prior: [(f64, f64); 2],
    outcome: Outcome,
    beta: f64,
    tau: f64,
    eps: f64,
) -> [(f64, f64); 2] {
    let c = 2f64.sqrt() * beta;
    let lik = |d: f64| match outcome {
        Outcome::Win => phi((d - eps) / c),
        Outcome::Loss => phi((-d - eps) / c),
        Outcome::Draw => phi((eps - d) / c) - phi((-eps - d) / c),
    };
    let sd: Vec<f64> = prior.iter().map(|(_, s)| (s * s + tau * tau).sqrt()).collect();
    // Standardized grid on [-9, 9]; the Gaussian weight makes the tails negligible.
    let nodes = 1201;
    let h = 18.0 / (nodes - 1) as f64;
    let z: Vec<f64> = (0..nodes).map(|i| -9.0 + i as f64 * h).collect();
    let w: Vec<f64> = z.iter().map(|z| (-0.5 * z * z).exp()).collect();
    let (mut z0, mut s1, mut s2, mut q1, mut q2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (a, wa) in z.iter().zip(&w) {
        let x1 = prior[0].0 + sd[0] * a;
        for (b, wb) in z.iter().zip(&w) {
            let x2 = prior[1].0 + sd[1] * b;
            let p = wa * wb * lik(x1 - x2);
            z0 += p;
            s1 += p * x1;
            s2 += p * x2;
            q1 += p * x1 * x1;
            q2 += p * x2 * x2;
        }
    }
    let (m1, m2) = (s1 / z0, s2 / z0);
    [(m1, (q1 / z0 - m1 * m1).sqrt()), (m2, (q2 / z0 - m2 * m2).sqrt())]
}

/// Plain NDCG with linear gain `n - rank`, for cross-checking.
pub fn linear_ndcg(ordering: &[&str], observed: &[(&str, u32)]) -> f64 {
    let n = observed.len() as f64;
    let rel = |p: &str| n - f64::from(observed.iter().find(|(q, _)| *q == p).unwrap().1);
    let dcg = |rels: &[f64]| -> f64 { rels.iter().enumerate().map(|(k, r)| r / (k as f64 + 2.0).log2()).sum() };
    let got: Vec<f64> = ordering.iter().map(|p| rel(p)).collect();
    let mut ideal = got.clone();
    ideal.sort_by(|a, b| b.total_cmp(a));
    dcg(&got) / dcg(&ideal)
}
