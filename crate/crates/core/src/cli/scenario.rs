use std::sync::Arc;

use serde::Serialize;

use super::config::{AutoOr, ScenarioConfig};
use crate::analysis::{
    decay_bound_check, dissipation_residual, fit_decay_rate, inequality_suite, lemma46_empirical_m,
    max_energy_increase, optimal_delta, spectrum, theoretical_constants, Spectrum, StabilityConstants,
    StabilityReport,
};
use crate::coefficients::{
    check_hypotheses, degeneracy_constant, feller_weight, CoefficientModel, FellerWeight, HypothesisReport, SupGrid,
};
use crate::discretization::{assemble_generator, assemble_system, auto_grading, build_mesh, DiscreteSystem, DENSE_CAP};
use crate::error::{Error, Hypothesis, Result};
use crate::evolution::{default_dt, initial_data, simulate, EvolutionTrace, Integrator};
use crate::function_spaces::{
    hardy_poincare_constant, norm_equivalence_constants, richardson, seeded_rng, weighted_norms, GridFunction,
    HardyPoincareEstimate,
};

/// Hypotheses needed to assemble the discrete system at all.
const ASSEMBLY: [Hypothesis; 2] = [Hypothesis::Basic, Hypothesis::Ass0];
const ALL: [Hypothesis; 4] = [Hypothesis::Basic, Hypothesis::Ass0, Hypothesis::Ass1, Hypothesis::Ass2];

const RANDOM_SAMPLES: usize = 100;

/// Output of `check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionSpaceReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub hardy_poincare: HardyPoincareEstimate,
    pub eta_min: f64,
    pub eta_max: f64,
    /// `‖u‖₁² ≤ lower ‖u‖²_{1,1/σ}`
    pub equivalence_lower: f64,
    /// `‖u‖²_{1,1/σ} ≤ upper ‖u‖₁²`
    pub equivalence_upper: f64,
    pub seed: u64,
    pub samples: usize,
    /// Smallest `(C_HP ∫u'² - ‖u‖²_{1/σ}) / ∫u'²` over the random functions.
    pub hardy_poincare_min_slack: f64,
    /// Smallest normalized slacks of the two equivalence inequalities.
    pub equivalence_min_slack: [f64; 2],
}

/// Output of `spectrum`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub count: usize,
    pub abscissa: f64,
    pub resolved_abscissa: f64,
}

/// Everything `report` produces.
#[derive(Debug, Clone)]
pub struct ReportRun {
    pub report: StabilityReport,
    pub system: DiscreteSystem,
    pub trace: EvolutionTrace,
    pub spectrum: Option<Spectrum>,
}

/// A parsed scenario with its coefficients classified.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    model: Arc<CoefficientModel>,
    hypotheses: HypothesisReport,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let model = Arc::new(config.model()?);
        let grid = SupGrid::default();
        // a divergent supremum is a verdict (INVALID), not a failure
        let k = match degeneracy_constant(&model, &grid) {
            Ok(k) => k,
            Err(Error::DivergentSupremum { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let hypotheses = check_hypotheses(&model, k, &grid)?;
        Ok(Self { config, model, hypotheses })
    }

    pub fn hypotheses(&self) -> &HypothesisReport {
        &self.hypotheses
    }

    fn weight(&self, required: &[Hypothesis]) -> Result<Arc<FellerWeight>> {
        self.hypotheses.require(required)?;
        Ok(Arc::new(feller_weight(Arc::clone(&self.model))?))
    }

    fn system(&self, w: &Arc<FellerWeight>, n: usize) -> Result<DiscreteSystem> {
        let k = self.hypotheses.k;
        let gamma = self.config.mesh.gamma.or_else(|| auto_grading(k));
        let mesh = Arc::new(build_mesh(n, gamma)?);
        assemble_system(Arc::clone(w), mesh, k, self.config.beta)
    }

    fn hardy_poincare(&self, w: &Arc<FellerWeight>, finest: &DiscreteSystem) -> Result<HardyPoincareEstimate> {
        let n = self.config.mesh.n;
        let c1 = hardy_poincare_constant(&self.system(w, (n / 4).max(4))?)?;
        let c2 = hardy_poincare_constant(&self.system(w, (n / 2).max(4))?)?;
        let c3 = hardy_poincare_constant(finest)?;
        Ok(richardson([c1, c2, c3]))
    }

    pub fn check(&self) -> Result<FunctionSpaceReport> {
        let w = self.weight(&ASSEMBLY)?;
        let sys = self.system(&w, self.config.mesh.n)?;
        let hp = self.hardy_poincare(&w, &sys)?;
        let (lower, upper) = norm_equivalence_constants(&w, hp.finest);
        let seed = self.config.effective_seed();
        let mut rng = seeded_rng(seed);
        let mut hp_slack = f64::INFINITY;
        let mut eq_slack = [f64::INFINITY; 2];
        for _ in 0..RANDOM_SAMPLES {
            let u = GridFunction::random_dirichlet(Arc::clone(&sys.mesh), &mut rng);
            let norms = weighted_norms(&u, &sys.quad, self.config.beta)?;
            let h1 = norms.h1_seminorm.powi(2);
            let l2 = norms.l2_sigma.powi(2);
            let full = norms.h1_sigma.powi(2);
            hp_slack = hp_slack.min((hp.finest * h1 - l2) / h1);
            eq_slack[0] = eq_slack[0].min((lower * full - h1) / h1);
            eq_slack[1] = eq_slack[1].min((upper * h1 - full) / h1);
        }
        Ok(FunctionSpaceReport {
            n: self.config.mesh.n,
            hardy_poincare: hp,
            eta_min: w.eta_min,
            eta_max: w.eta_max,
            equivalence_lower: lower,
            equivalence_upper: upper,
            seed,
            samples: RANDOM_SAMPLES,
            hardy_poincare_min_slack: hp_slack,
            equivalence_min_slack: eq_slack,
        })
    }

    fn dt(&self) -> f64 {
        self.config.time.dt.or_else(|| default_dt(self.config.mesh.n))
    }

    fn run(&self, sys: &DiscreteSystem) -> Result<EvolutionTrace> {
        let (y0, y1) = initial_data(&self.config.initial, sys)?;
        let t = &self.config.time;
        simulate(sys, &y0, &y1, t.t, self.dt(), t.stride, Integrator::Trapezoidal)
    }

    pub fn simulate(&self) -> Result<(DiscreteSystem, EvolutionTrace)> {
        let w = self.weight(&ASSEMBLY)?;
        let sys = self.system(&w, self.config.mesh.n)?;
        let trace = self.run(&sys)?;
        Ok((sys, trace))
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        let w = self.weight(&ASSEMBLY)?;
        let sys = self.system(&w, self.config.mesh.n)?;
        spectrum(&assemble_generator(&sys)?)
    }

    fn constants(&self, w: &FellerWeight, c_hp: f64) -> Result<StabilityConstants> {
        let delta = match self.config.analysis.delta {
            AutoOr::Auto => None,
            AutoOr::Value(d) => Some(d),
        };
        let c = theoretical_constants(w, &self.hypotheses, c_hp, self.config.beta, delta)?;
        if !self.config.analysis.optimize_delta {
            return Ok(c);
        }
        match optimal_delta(&c, w) {
            Some(d) => theoretical_constants(w, &self.hypotheses, c_hp, self.config.beta, Some(d)),
            None => Ok(c),
        }
    }

    pub fn report(&self) -> Result<ReportRun> {
        let w = self.weight(&ALL)?;
        let sys = self.system(&w, self.config.mesh.n)?;
        let hp = self.hardy_poincare(&w, &sys)?;
        // the discrete constant approaches the continuous one from below
        let constants = self.constants(&w, hp.finest.max(hp.extrapolated))?;
        let trace = self.run(&sys)?;

        let bound = decay_bound_check(&trace.times, &trace.energies, constants.m)?;
        let fitted_rate = fit_decay_rate(&trace.times, &trace.energies, self.config.analysis.discard_fraction)?;
        let (lemma46_m_emp, lemma46_warning, lemma46_bound_ok) = match lemma46_empirical_m(&trace.times, &trace.energies) {
            Ok(m) => {
                let check = decay_bound_check(&trace.times, &trace.energies, m)?;
                (Some(m), None, Some(check.max_violation <= 1e-6))
            }
            Err(e @ (Error::NotDecayed { .. } | Error::DegenerateFit(_))) => (None, Some(e.to_string()), None),
            Err(e) => return Err(e),
        };
        let [s, t] = self.config.window();
        let inequality_slacks = inequality_suite(&trace, &sys, &constants, s, t, 1.0)?;
        let spectrum = if sys.dim() <= DENSE_CAP { Some(spectrum(&assemble_generator(&sys)?)?) } else { None };

        let report = StabilityReport {
            hypotheses: self.hypotheses,
            hardy_poincare: hp,
            constants,
            fitted_rate,
            spectral_abscissa: spectrum.as_ref().map(|s| s.abscissa),
            resolved_abscissa: spectrum.as_ref().map(|s| s.resolved_abscissa(0.25)),
            bound_ok: bound.bound_ok,
            max_violation: bound.max_violation,
            dissipation_residual: dissipation_residual(&trace, trace.dt),
            max_energy_increase: max_energy_increase(&trace),
            inequality_slacks,
            lemma46_m_emp,
            lemma46_warning,
            lemma46_bound_ok,
        };
        Ok(ReportRun { report, system: sys, trace, spectrum })
    }
}

impl Spectrum {
    pub fn summary(&self) -> SpectrumSummary {
        SpectrumSummary {
            n: self.eigenvalues.len() / 2,
            count: self.eigenvalues.len(),
            abscissa: self.abscissa,
            resolved_abscissa: self.resolved_abscissa(0.25),
        }
    }
}
