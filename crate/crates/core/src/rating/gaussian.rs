//! Standard normal helpers and the truncated-Gaussian corrections used by
//! TrueSkill's comparison factors.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::erf::{erf_inv, erfc};

/// Below this point `Φ` is evaluated through its asymptotic series.
const TAIL: f64 = -30.0;

pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Inverse of [`cdf`] on `(0, 1)`.
pub fn ppf(p: f64) -> f64 {
    SQRT_2 * erf_inv(2.0 * p - 1.0)
}

/// `Φ(x) / φ(x)`, accurate deep into the left tail.
fn cdf_over_pdf(x: f64) -> f64 {
    if x < TAIL {
        let x2 = x * x;
        let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2) + 105.0 / (x2 * x2 * x2 * x2);
        series / -x
    } else {
        cdf(x) / pdf(x)
    }
}

/// Mean correction for a win: `φ(t) / Φ(t)`.
pub fn v_win(t: f64) -> f64 {
    if t < TAIL {
        1.0 / cdf_over_pdf(t)
    } else {
        let denom = cdf(t);
        if denom == 0.0 {
            -t
        } else {
            pdf(t) / denom
        }
    }
}

/// Variance correction for a win: `v(t) (v(t) + t)`, in `[0, 1)`.
pub fn w_win(t: f64) -> f64 {
    let v = v_win(t);
    (v * (v + t)).clamp(0.0, 1.0)
}

/// Mean correction for a draw with margin `eps` (both in standardized units).
pub fn v_draw(t: f64, eps: f64) -> f64 {
    let (v_abs, _) = draw_corrections(t.abs(), eps);
    if t < 0.0 {
        -v_abs
    } else {
        v_abs
    }
}

/// Variance correction for a draw with margin `eps`.
pub fn w_draw(t: f64, eps: f64) -> f64 {
    draw_corrections(t.abs(), eps).1
}

/// Corrections for `t >= 0`. Truncation interval is `[-eps - t, eps - t]`.
fn draw_corrections(t: f64, eps: f64) -> (f64, f64) {
    let hi = eps - t;
    let lo = -eps - t;
    let denom = cdf(hi) - cdf(lo);
    if denom > 1e-250 {
        let v = (pdf(lo) - pdf(hi)) / denom;
        let w = v * v + (hi * pdf(hi) - lo * pdf(lo)) / denom;
        return (v, w.clamp(0.0, 1.0));
    }
    // Far tail: divide through by φ(hi) so nothing underflows.
    let ratio = (-2.0 * eps * t).exp();
    let scaled = cdf_over_pdf(hi) - cdf_over_pdf(lo) * ratio;
    if scaled <= 0.0 || eps == 0.0 {
        // Zero-width interval: the posterior collapses onto the boundary.
        return (hi, 1.0);
    }
    let v = (ratio - 1.0) / scaled;
    let w = v * v + (hi - lo * ratio) / scaled;
    (v, w.clamp(0.0, 1.0))
}
