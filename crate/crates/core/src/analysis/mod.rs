//! Energies, decay diagnostics, explicit stability constants, multiplier
//! identities and spectra.

mod constants;
mod decay;
mod json;
mod multiplier;
mod report;
mod spectrum;

pub use constants::{optimal_delta, theoretical_constants, StabilityConstants};
pub use decay::{decay_bound_check, fit_decay_rate, lemma46_empirical_m, BoundCheck};
pub use json::{to_json_string, FullPrecision};
pub use multiplier::{inequality_suite, multiplier_identity_residual, space_time_integrals, InequalitySlacks, Slack, WindowIntegrals};
pub use report::StabilityReport;
pub use spectrum::{spectrum, Spectrum};

use crate::discretization::DiscreteSystem;
use crate::error::{Error, Result};
use crate::evolution::{EvolutionTrace, State};

/// `½[vᵀMv + yᵀK_ηy + β y_N²]`
pub fn energy(sys: &DiscreteSystem, state: &State) -> Result<f64> {
    let n = sys.dim();
    for len in [state.y.len(), state.v.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    Ok(0.5 * sys.pairing(&state.y, &state.v, &state.y, &state.v))
}

/// `max_n |E^{n+1} - E^n + dt (v_N^{mid})²| / max(E(0), ε)`.
pub fn dissipation_residual(trace: &EvolutionTrace, dt: f64) -> f64 {
    let scale = trace.energies.first().copied().unwrap_or(0.0).max(f64::EPSILON);
    trace
        .energies
        .windows(2)
        .zip(&trace.v_mid)
        .map(|(e, vm)| (e[1] - e[0] + dt * vm * vm).abs() / scale)
        .fold(0.0, f64::max)
}

/// Largest increase `E^{n+1} - E^n` relative to `E(0)`; nonpositive for a nonincreasing trace.
pub fn max_energy_increase(trace: &EvolutionTrace) -> f64 {
    let scale = trace.energies.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    trace.energies.windows(2).map(|e| (e[1] - e[0]) / scale).fold(f64::NEG_INFINITY, f64::max)
}
