use serde::Serialize;

use crate::coefficients::{FellerWeight, HypothesisReport};
use crate::error::{Error, Hypothesis, Result};

/// The explicit constants of the decay estimate `E(t) ≤ E(0) e^{1 - t/M}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityConstants {
    #[serde(rename = "C_HP")]
    pub c_hp: f64,
    #[serde(rename = "Theta")]
    pub theta: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: f64,
    pub eps0: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub beta: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    pub sigma1: f64,
    pub eta1: f64,
    /// `eps0 - 2 δ C1`
    pub c_eps: f64,
}

struct Parts {
    theta: f64,
    c1: f64,
    /// `4Θ + 1/σ(1) + 1/η(1) + β/η(1) + K/4`
    a: f64,
    /// `β²/η(1) + Kβ/2 + β/η(1) + K/4 + βε₀/2`
    p: f64,
    /// `2 + 2C_HP/min³η`
    q0: f64,
    /// `1 + (max η + C_HP)/min²η`, the coefficient of `1/δ`
    r: f64,
}

fn parts(c_hp: f64, k: f64, beta: f64, eps0: f64, w: &FellerWeight, sigma1: f64, eta1: f64) -> Parts {
    let (lo, hi) = (w.eta_min, w.eta_max);
    let a1 = sigma1 * eta1;
    let theta = (1.0 / a1 + k * c_hp / lo).max(1.0 + k / 4.0);
    let p = beta * beta / eta1 + k * beta / 2.0 + beta / eta1 + k / 4.0 + beta * eps0 / 2.0;
    let c1 = p * (1.0 / lo.powi(3) + 1.0);
    Parts {
        theta,
        c1,
        a: 4.0 * theta + 1.0 / sigma1 + 1.0 / eta1 + beta / eta1 + k / 4.0,
        p,
        q0: 2.0 + 2.0 * c_hp / lo.powi(3),
        r: 1.0 + (hi + c_hp) / (lo * lo),
    }
}

fn m_of(p: &Parts, eps0: f64, delta: f64) -> (f64, f64) {
    let c_eps = eps0 - 2.0 * delta * p.c1;
    ((p.a + p.p * (p.q0 + p.r / delta)) / c_eps, c_eps)
}

/// Evaluates `Θ`, `C1` and `M`. `delta` defaults to `eps0/(4 C1)`, or to 1
/// when `C1 = 0` and every positive `δ` is admissible.
pub fn theoretical_constants(
    w: &FellerWeight,
    hyp: &HypothesisReport,
    c_hp: f64,
    beta: f64,
    delta: Option<f64>,
) -> Result<StabilityConstants> {
    let eps0 = hyp.eps0;
    let k = hyp.k;
    if !(eps0 > 0.0) {
        return Err(Error::HypothesisViolation(vec![(Hypothesis::Ass2, format!("eps0 = {eps0} is not positive"))]));
    }
    if !(k < 2.0) {
        return Err(Error::HypothesisViolation(vec![(Hypothesis::Ass1, format!("K = {k} is not below 2"))]));
    }
    if !(beta >= 0.0) || !beta.is_finite() || !(c_hp > 0.0) || !c_hp.is_finite() {
        return Err(Error::InvalidInput(format!("need beta >= 0 and C_HP > 0, got {beta}, {c_hp}")));
    }
    let model = w.model();
    let a1 = model.a(1.0);
    let eta1 = w.eta(1.0);
    let sigma1 = a1 / eta1;
    let p = parts(c_hp, k, beta, eps0, w, sigma1, eta1);
    let upper = if p.c1 > 0.0 { eps0 / (2.0 * p.c1) } else { f64::INFINITY };
    let delta = match delta {
        Some(d) => {
            if !(d > 0.0 && d < upper) {
                return Err(Error::BadDelta { delta: d, upper });
            }
            d
        }
        None if p.c1 > 0.0 => eps0 / (4.0 * p.c1),
        None => 1.0,
    };
    let (m, c_eps) = m_of(&p, eps0, delta);
    Ok(StabilityConstants {
        c_hp,
        theta: p.theta,
        c1: p.c1,
        delta,
        m,
        eps0,
        k,
        beta,
        eta_min: w.eta_min,
        eta_max: w.eta_max,
        sigma1,
        eta1,
        c_eps,
    })
}

/// The `δ` minimizing `M(δ)` on `(0, eps0/(2 C1))`: the positive root of
/// `2 C1 α δ² + 4 C1 γ δ - γ ε₀ = 0` where `M = (α + γ/δ)/(ε₀ - 2C1δ)`.
pub fn optimal_delta(c: &StabilityConstants, w: &FellerWeight) -> Option<f64> {
    let p = parts(c.c_hp, c.k, c.beta, c.eps0, w, c.sigma1, c.eta1);
    let alpha = p.a + p.p * p.q0;
    let gamma = p.p * p.r;
    if !(p.c1 > 0.0 && gamma > 0.0) {
        return None;
    }
    let (qa, qb, qc) = (2.0 * p.c1 * alpha, 4.0 * p.c1 * gamma, -gamma * c.eps0);
    // stable form of the positive root
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    Some(2.0 * (-qc) / (qb + disc))
}
