use serde::Serialize;

use super::{InequalitySlacks, StabilityConstants};
use crate::coefficients::HypothesisReport;
use crate::function_spaces::HardyPoincareEstimate;

/// Everything the `report` pipeline computes for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub hypotheses: HypothesisReport,
    pub hardy_poincare: HardyPoincareEstimate,
    pub constants: StabilityConstants,
    pub fitted_rate: f64,
    /// `None` when `N` exceeds the dense eigenvalue cap.
    pub spectral_abscissa: Option<f64>,
    /// Abscissa over the lowest-frequency quarter of the spectrum.
    pub resolved_abscissa: Option<f64>,
    pub bound_ok: bool,
    pub max_violation: f64,
    pub dissipation_residual: f64,
    /// Largest `(E^{n+1} - E^n)/E(0)`.
    pub max_energy_increase: f64,
    pub inequality_slacks: InequalitySlacks,
    /// `None` when the trace has not decayed below 1% of `E(0)`.
    #[serde(rename = "lemma46_M_emp")]
    pub lemma46_m_emp: Option<f64>,
    pub lemma46_warning: Option<String>,
    /// The decay bound re-checked with `M_emp` in place of `M`.
    pub lemma46_bound_ok: Option<bool>,
}
