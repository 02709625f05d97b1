use serde::Serialize;

use crate::error::{Error, Result};

const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub bound_ok: bool,
    /// `max_n E(t_n)/(E(0) e^{1 - t_n/M}) - 1`
    pub max_violation: f64,
}

/// Checks `E(t_n) ≤ E(0) e^{1 - t_n/M}` on every sample.
pub fn decay_bound_check(times: &[f64], energies: &[f64], m: f64) -> Result<BoundCheck> {
    check_series(times, energies)?;
    let e0 = energies[0];
    if !(e0 > 0.0) {
        return Err(Error::InvalidInput("decay bound needs E(0) > 0".into()));
    }
    let max_violation = times
        .iter()
        .zip(energies)
        .map(|(t, e)| e / (e0 * (1.0 - t / m).exp()) - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundCheck { bound_ok: max_violation <= BOUND_TOL, max_violation })
}

fn check_series(times: &[f64], energies: &[f64]) -> Result<()> {
    if times.len() != energies.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: energies.len() });
    }
    if times.is_empty() {
        return Err(Error::InvalidInput("empty energy trace".into()));
    }
    Ok(())
}

/// Least-squares slope of `-ln E` against `t` after discarding the leading
/// `discard_fraction` of samples. The fit ends at the last positive sample.
pub fn fit_decay_rate(times: &[f64], energies: &[f64], discard_fraction: f64) -> Result<f64> {
    check_series(times, energies)?;
    if !(0.0..1.0).contains(&discard_fraction) {
        return Err(Error::InvalidInput(format!("discard fraction {discard_fraction} outside [0, 1)")));
    }
    let start = (discard_fraction * times.len() as f64).floor() as usize;
    let window: Vec<(f64, f64)> = times[start..]
        .iter()
        .zip(&energies[start..])
        .map(|(t, e)| (*t, *e))
        .take_while(|(_, e)| *e > 0.0)
        .collect();
    if window.len() < 10 {
        return Err(Error::DegenerateFit(format!(
            "{} positive samples after discarding {:.0}% of the trace, need 10",
            window.len(),
            100.0 * discard_fraction
        )));
    }
    let (lo, hi) = window.iter().fold((f64::INFINITY, 0.0f64), |(l, h), (_, e)| (l.min(*e), h.max(*e)));
    if hi - lo <= 4.0 * f64::EPSILON * hi {
        return Ok(0.0);
    }
    let n = window.len() as f64;
    let tm = window.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = window.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, e) in &window {
        sxy += (t - tm) * (e.ln() - lm);
        sxx += (t - tm) * (t - tm);
    }
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("all retained samples share one time".into()));
    }
    Ok(-sxy / sxx)
}

/// `max_n ∫_{t_n}^∞ E / E(t_n)`: trapezoid over the trace plus the tail
/// `E(T)/ω` of an exponential fitted to the last fifth of the trace.
/// Requires `E(T) < 0.01 E(0)`.
pub fn lemma46_empirical_m(times: &[f64], energies: &[f64]) -> Result<f64> {
    check_series(times, energies)?;
    let n = energies.len();
    let e0 = energies[0];
    let ratio = energies[n - 1] / e0;
    if !(e0 > 0.0) || !(ratio < 0.01) || n < 50 {
        return Err(Error::NotDecayed { ratio });
    }
    let cut = n - n / 5;
    let omega = fit_decay_rate(&times[cut..], &energies[cut..], 0.0)?;
    if !(omega > 0.0) {
        return Err(Error::NotDecayed { ratio });
    }
    let mut tail = energies[n - 1] / omega;
    let mut best = tail / energies[n - 1];
    for i in (0..n - 1).rev() {
        tail += 0.5 * (energies[i] + energies[i + 1]) * (times[i + 1] - times[i]);
        if energies[i] > 0.0 {
            best = best.max(tail / energies[i]);
        }
    }
    Ok(best)
}
