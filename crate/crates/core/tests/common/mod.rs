#![allow(dead_code)]

use std::sync::Arc;

use degenwave::coefficients::{check_hypotheses, degeneracy_constant, feller_weight, CoefficientModel, FellerWeight, HypothesisReport, SupGrid};
use degenwave::discretization::{assemble_system, auto_grading, build_mesh, DiscreteSystem};
use degenwave::evolution::{initial_data, simulate, EvolutionTrace, InitialPreset, Integrator};

pub struct Setup {
    pub weight: Arc<FellerWeight>,
    pub hyp: HypothesisReport,
}

pub fn setup(model: CoefficientModel) -> Setup {
    let model = Arc::new(model);
    let grid = SupGrid::default();
    let k = degeneracy_constant(&model, &grid).unwrap();
    let hyp = check_hypotheses(&model, k, &grid).unwrap();
    Setup { weight: Arc::new(feller_weight(model).unwrap()), hyp }
}

impl Setup {
    pub fn system(&self, n: usize, beta: f64) -> DiscreteSystem {
        let k = self.hyp.k;
        let mesh = Arc::new(build_mesh(n, auto_grading(k)).unwrap());
        assemble_system(Arc::clone(&self.weight), mesh, k, beta).unwrap()
    }
}

pub fn standard_initial() -> InitialPreset {
    InitialPreset::Poly { y0: vec![0.0, 2.0, -1.0], y1: vec![] }
}

pub fn run(sys: &DiscreteSystem, preset: &InitialPreset, t_end: f64, dt: f64, stride: usize) -> EvolutionTrace {
    let (y0, y1) = initial_data(preset, sys).unwrap();
    simulate(sys, &y0, &y1, t_end, dt, stride, Integrator::Trapezoidal).unwrap()
}

/// `a = x^{1/2}`, `b = 0`
pub fn standard_model() -> CoefficientModel {
    CoefficientModel::power(0.5, 0.0, 0.0)
}

/// `a = x^{1/2}`, `b = 0.3 x^{1/2}`
pub fn drift_model() -> CoefficientModel {
    CoefficientModel::power(0.5, 0.5, 0.3)
}
