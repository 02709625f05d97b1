use serde::Serialize;

use super::StabilityConstants;
use crate::discretization::DiscreteSystem;
use crate::error::{Error, Hypothesis, Result};
use crate::evolution::{EvolutionTrace, Snapshot};

/// Spatial and space-time integrals of a trace over a window `[s, T]`.
/// Space uses the assembly quadrature, time the trapezoid rule over stored
/// snapshots (interior terms) or every step (boundary and energy terms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowIntegrals {
    pub s: f64,
    pub t: f64,
    /// `∫ x y_x y_t / σ` at `s` and `T`
    pub x_yx_yt: [f64; 2],
    /// `∫ y y_t / σ` at `s` and `T`
    pub y_yt: [f64; 2],
    /// `∫∫ x η (b/a) y_x²`
    pub drift: f64,
    /// `∫∫ (1 - x(a' - b)/a) y_t² / σ`
    pub kinetic_weighted: f64,
    /// `∫∫ y_t² / σ`
    pub kinetic: f64,
    /// `∫∫ η y_x²`
    pub potential: f64,
    /// `∫ y_t(t,1)²`
    pub yt1_sq: f64,
    /// `∫ y_x(t,1)²` with `y_x(1) = -(y_t(1) + β y(1))/η(1)`
    pub yx1_sq: f64,
    /// `∫ y(t,1)²`
    pub y1_sq: f64,
    /// `∫ y(t,1) y_x(t,1)`
    pub y1_yx1: f64,
    pub energy_s: f64,
    pub energy_t: f64,
    /// `∫ E`
    pub energy_integral: f64,
    pub energy0: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Pointwise {
    x_yx_yt: f64,
    y_yt: f64,
    drift: f64,
    kinetic_weighted: f64,
    kinetic: f64,
    potential: f64,
}

fn pointwise(sys: &DiscreteSystem, snap: &Snapshot) -> Pointwise {
    let y = sys.full_nodal(&snap.y);
    let v = sys.full_nodal(&snap.v);
    let mut out = Pointwise::default();
    let mesh = &sys.mesh;
    for e in 0..mesh.elements() {
        let h = mesh.h(e);
        let yx = (y[e + 1] - y[e]) / h;
        for p in sys.quad.element_points(e) {
            let yv = y[e] * p.phi_l + y[e + 1] * p.phi_r;
            let vt = v[e] * p.phi_l + v[e + 1] * p.phi_r;
            let w = p.w;
            out.x_yx_yt += w * p.x * yx * vt * p.inv_sigma;
            out.y_yt += w * yv * vt * p.inv_sigma;
            out.drift += w * p.x * p.eta * p.b / p.a * yx * yx;
            out.kinetic_weighted += w * (1.0 - p.x * (p.a_prime - p.b) / p.a) * vt * vt * p.inv_sigma;
            out.kinetic += w * vt * vt * p.inv_sigma;
            out.potential += w * p.eta * yx * yx;
        }
    }
    out
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    let i = times.partition_point(|x| *x < t);
    if i == 0 {
        0
    } else if i == times.len() || (t - times[i - 1]) <= (times[i] - t) {
        i - 1
    } else {
        i
    }
}

pub fn space_time_integrals(trace: &EvolutionTrace, sys: &DiscreteSystem, s: f64, t_end: f64) -> Result<WindowIntegrals> {
    if !(s >= 0.0 && t_end > s) {
        return Err(Error::InvalidInput(format!("window ({s}, {t_end}) must satisfy 0 <= s < T")));
    }
    if trace.is_empty() {
        return Err(Error::InsufficientSnapshots("empty trace".into()));
    }
    let half = 0.5 * trace.dt * (1.0 + 1e-9);
    let last = *trace.times.last().unwrap();
    if t_end > last + half {
        return Err(Error::InsufficientSnapshots(format!("trace ends at {last}, window needs {t_end}")));
    }
    let i_s = nearest_index(&trace.times, s);
    let i_t = nearest_index(&trace.times, t_end);
    let snaps: Vec<&Snapshot> = trace.snapshots.iter().filter(|sn| sn.step >= i_s && sn.step <= i_t).collect();
    let endpoints_present =
        snaps.first().map(|sn| sn.step) == Some(i_s) && snaps.last().map(|sn| sn.step) == Some(i_t);
    if snaps.len() < 3 || !endpoints_present {
        return Err(Error::InsufficientSnapshots(format!(
            "need snapshots at steps {i_s} and {i_t} with at least one in between (stride {})",
            trace.stride
        )));
    }
    let values: Vec<Pointwise> = snaps.iter().map(|sn| pointwise(sys, sn)).collect();
    let mut acc = Pointwise::default();
    for k in 0..snaps.len() - 1 {
        let dt = snaps[k + 1].t - snaps[k].t;
        let (a, b) = (&values[k], &values[k + 1]);
        acc.drift += 0.5 * dt * (a.drift + b.drift);
        acc.kinetic_weighted += 0.5 * dt * (a.kinetic_weighted + b.kinetic_weighted);
        acc.kinetic += 0.5 * dt * (a.kinetic + b.kinetic);
        acc.potential += 0.5 * dt * (a.potential + b.potential);
    }
    let eta1 = sys.weight.eta(1.0);
    let beta = sys.beta;
    let flux = |i: usize| -(trace.v_boundary[i] + beta * trace.y_boundary[i]) / eta1;
    let trap = |f: &dyn Fn(usize) -> f64| {
        (i_s..i_t).map(|i| 0.5 * (trace.times[i + 1] - trace.times[i]) * (f(i) + f(i + 1))).sum::<f64>()
    };
    let (first, end) = (values[0], values[values.len() - 1]);
    Ok(WindowIntegrals {
        s: trace.times[i_s],
        t: trace.times[i_t],
        x_yx_yt: [first.x_yx_yt, end.x_yx_yt],
        y_yt: [first.y_yt, end.y_yt],
        drift: acc.drift,
        kinetic_weighted: acc.kinetic_weighted,
        kinetic: acc.kinetic,
        potential: acc.potential,
        yt1_sq: trap(&|i| trace.v_boundary[i].powi(2)),
        yx1_sq: trap(&|i| flux(i).powi(2)),
        y1_sq: trap(&|i| trace.y_boundary[i].powi(2)),
        y1_yx1: trap(&|i| trace.y_boundary[i] * flux(i)),
        energy_s: trace.energies[i_s],
        energy_t: trace.energies[i_t],
        energy_integral: trap(&|i| trace.energies[i]),
        energy0: trace.energies[0],
    })
}

fn normalized(value: f64, e0: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value.abs() / e0.max(f64::MIN_POSITIVE)
    }
}

impl WindowIntegrals {
    /// Right-hand side of the `x y_x/σ` multiplier identity, which vanishes
    /// for exact solutions.
    pub fn multiplier_identity(&self, sys: &DiscreteSystem) -> f64 {
        let eta1 = sys.weight.eta(1.0);
        let sigma1 = sys.weight.sigma(1.0);
        2.0 * (self.x_yx_yt[1] - self.x_yx_yt[0]) - self.yt1_sq / sigma1 - eta1 * self.yx1_sq - self.drift
            + self.kinetic_weighted
            + self.potential
    }
}

/// `|identity| / E(0)` for the `x y_x/σ` multiplier over `[s, T]`.
pub fn multiplier_identity_residual(trace: &EvolutionTrace, sys: &DiscreteSystem, s: f64, t_end: f64) -> Result<f64> {
    let w = space_time_integrals(trace, sys, s, t_end)?;
    Ok(normalized(w.multiplier_identity(sys), w.energy0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slack {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`
    pub slack: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalitySlacks {
    pub s: f64,
    #[serde(rename = "T")]
    pub t: f64,
    /// Boundary observation: `∫ y(t,1)² ≤ c₁ E(s) + c₂ ∫ E`.
    pub boundary_observation: Slack,
    /// Energy integral: `(ε₀/2) ∫∫ (y_t²/σ + η y_x²) ≤ 4ΘE(s) + ...`.
    pub energy_integral: Slack,
    /// The combined multiplier identity; `ok` means `|slack| ≤ tolerance`.
    pub combined_identity: Slack,
    /// `|x y_x/σ` multiplier identity`| / E(0)`.
    pub multiplier_residual: f64,
    /// `0.05 E(0) (T - s)`
    pub tolerance: f64,
    pub all_ok: bool,
}

/// Evaluates both sides of the boundary-observation and energy-integral
/// estimates and of the combined multiplier identity on `[s, T]`.
/// `lhs_scale` multiplies the space-time energy integral (1 for the plain check).
pub fn inequality_suite(
    trace: &EvolutionTrace,
    sys: &DiscreteSystem,
    c: &StabilityConstants,
    s: f64,
    t_end: f64,
    lhs_scale: f64,
) -> Result<InequalitySlacks> {
    if !(c.eps0 > 0.0) {
        return Err(Error::HypothesisViolation(vec![(Hypothesis::Ass2, format!("eps0 = {} is not positive", c.eps0))]));
    }
    let w = space_time_integrals(trace, sys, s, t_end)?;
    let tol = 0.05 * w.energy0 * (w.t - w.s);
    let (k, beta, eta1, sigma1) = (c.k, c.beta, c.eta1, c.sigma1);
    let (lo, hi, chp, delta) = (c.eta_min, c.eta_max, c.c_hp, c.delta);
    let make = |lhs: f64, rhs: f64| Slack { lhs, rhs, slack: rhs - lhs, ok: rhs - lhs >= -tol };

    let obs_rhs = (2.0 + 2.0 * chp / lo.powi(3) + 1.0 / delta + (hi + chp) / (delta * lo * lo)) * w.energy_s
        + 2.0 * delta * (1.0 / lo.powi(3) + 1.0) * w.energy_integral;
    let boundary_observation = make(w.y1_sq, obs_rhs);

    let energy_lhs = lhs_scale * 0.5 * c.eps0 * (w.kinetic + w.potential);
    let energy_rhs = 4.0 * c.theta * w.energy_s
        + (1.0 / sigma1 + 1.0 / eta1 + beta / eta1 + k / 4.0) * (w.energy_s - w.energy_t)
        + (beta * beta / eta1 + k * beta / 2.0 + beta / eta1 + k / 4.0) * w.y1_sq;
    let energy_integral = make(energy_lhs, energy_rhs);

    let bt_lhs = w.kinetic_weighted + 0.5 * k * w.kinetic + (1.0 - 0.5 * k) * w.potential - w.drift;
    let bt_rhs = (-2.0 * w.x_yx_yt[1] + 0.5 * k * w.y_yt[1]) - (-2.0 * w.x_yx_yt[0] + 0.5 * k * w.y_yt[0])
        + w.yt1_sq / sigma1
        + eta1 * w.yx1_sq
        - 0.5 * k * eta1 * w.y1_yx1;
    let mut combined_identity = make(bt_lhs, bt_rhs);
    combined_identity.ok = combined_identity.slack.abs() <= tol;

    let multiplier_residual = normalized(w.multiplier_identity(sys), w.energy0);
    Ok(InequalitySlacks {
        s: w.s,
        t: w.t,
        boundary_observation,
        energy_integral,
        combined_identity,
        multiplier_residual,
        tolerance: tol,
        all_ok: boundary_observation.ok && energy_integral.ok && combined_identity.ok,
    })
}
