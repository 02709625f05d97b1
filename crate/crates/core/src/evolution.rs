//! Crank–Nicolson time stepping of `ẏ = v`, `M v̇ = -S y - e_N v_N`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::analysis::energy;
use crate::discretization::{DiscreteSystem, SymTridiag, TridiagCholesky, DENSE_CAP};
use crate::error::{Error, Result};
use crate::function_spaces::GridFunction;

/// Displacement and velocity at nodes `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
}

impl State {
    pub fn zeros(n: usize) -> Self {
        Self { t: 0.0, y: vec![0.0; n], v: vec![0.0; n] }
    }

    pub fn is_finite(&self) -> bool {
        self.y.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    Trapezoidal,
    /// Forward Euler; does not dissipate energy and exists for contrast runs.
    ExplicitEuler,
}

/// Time stepper with the shifted matrix factorized once for a fixed `dt`.
#[derive(Debug, Clone)]
pub struct Stepper {
    dt: f64,
    integrator: Integrator,
    s: SymTridiag,
    mass: SymTridiag,
    factor: TridiagCholesky,
}

impl Stepper {
    pub fn new(sys: &DiscreteSystem, dt: f64, integrator: Integrator) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let s = sys.total_stiffness();
        let factor = match integrator {
            Integrator::Trapezoidal => {
                // 2M + dt²/2 S + dt e_N e_Nᵀ
                let mut shifted = sys.mass.combine(2.0, &s, 0.5 * dt * dt);
                let n = shifted.dim();
                shifted.diag[n - 1] += dt;
                shifted
                    .cholesky()
                    .map_err(|e| Error::SolveFailure(format!("shifted system: {e}")))?
            }
            Integrator::ExplicitEuler => sys.mass_factor().clone(),
        };
        Ok(Self { dt, integrator, s, mass: sys.mass.clone(), factor })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` by one step and returns the boundary velocity
    /// averaged over the step, `(v_N^n + v_N^{n+1})/2`.
    pub fn step(&self, state: &mut State) -> f64 {
        let n = self.s.dim();
        let dt = self.dt;
        match self.integrator {
            Integrator::Trapezoidal => {
                let mut rhs = self.mass.matvec(&state.v);
                let sy = self.s.matvec(&state.y);
                for (r, q) in rhs.iter_mut().zip(&sy) {
                    *r = 2.0 * *r - dt * q;
                }
                self.factor.solve_in_place(&mut rhs);
                let vbar = rhs;
                for i in 0..n {
                    state.y[i] += dt * vbar[i];
                    state.v[i] = 2.0 * vbar[i] - state.v[i];
                }
                state.t += dt;
                vbar[n - 1]
            }
            Integrator::ExplicitEuler => {
                let mut acc = self.s.matvec(&state.y);
                acc[n - 1] += state.v[n - 1];
                acc.iter_mut().for_each(|a| *a = -*a);
                self.factor.solve_in_place(&mut acc);
                let v_old = state.v[n - 1];
                for i in 0..n {
                    state.y[i] += dt * state.v[i];
                    state.v[i] += dt * acc[i];
                }
                state.t += dt;
                0.5 * (v_old + state.v[n - 1])
            }
        }
    }
}

/// One Crank–Nicolson step. Factorizes on every call; use [`Stepper`] for runs.
pub fn step_trapezoidal(sys: &DiscreteSystem, state: &State, dt: f64) -> Result<State> {
    let stepper = Stepper::new(sys, dt, Integrator::Trapezoidal)?;
    let mut next = state.clone();
    stepper.step(&mut next);
    if !next.is_finite() {
        return Err(Error::NonFiniteState { step: 1 });
    }
    Ok(next)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
}

/// Per-step series of a run. `v_mid[n]` belongs to the step from `times[n]`
/// to `times[n+1]` and is one shorter than the other series.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionTrace {
    pub dt: f64,
    pub integrator: Integrator,
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
    pub y_boundary: Vec<f64>,
    pub v_boundary: Vec<f64>,
    pub v_mid: Vec<f64>,
    /// `Σ dt (v_N^{mid})²` up to each sample, starting at 0.
    pub cumulative_dissipation: Vec<f64>,
    pub stride: usize,
    pub snapshots: Vec<Snapshot>,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Trace CSV with header `t,E,y1,v1,cumulative_dissipation`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,E,y1,v1,cumulative_dissipation\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.times[i], self.energies[i], self.y_boundary[i], self.v_boundary[i], self.cumulative_dissipation[i]
            ));
        }
        out
    }
}

/// Number of steps needed to reach `t_end`, tolerant of rounding in `t_end/dt`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    let r = t_end / dt;
    let n = r.round();
    if (r - n).abs() <= 1e-9 * r.max(1.0) {
        n as usize
    } else {
        r.ceil() as usize
    }
}

/// Default time step `min(1/(4N), 10⁻³)`.
pub fn default_dt(n: usize) -> f64 {
    (0.25 / n as f64).min(1e-3)
}

/// Runs `⌈T/dt⌉` steps from `(y0, y1)`, recording every step and a full
/// snapshot every `stride` steps (`stride = 0` keeps none).
pub fn simulate(
    sys: &DiscreteSystem,
    y0: &GridFunction,
    y1: &GridFunction,
    t_end: f64,
    dt: f64,
    stride: usize,
    integrator: Integrator,
) -> Result<EvolutionTrace> {
    let n = sys.dim();
    for g in [y0, y1] {
        if g.values().len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: g.values().len() });
        }
    }
    if !y0.is_dirichlet() {
        return Err(Error::InvalidInput("initial displacement must vanish at x = 0".into()));
    }
    if !(t_end > 0.0) || !t_end.is_finite() || t_end < dt * (1.0 - 1e-12) {
        return Err(Error::InvalidInput(format!("final time {t_end} must be >= dt = {dt}")));
    }
    let stepper = Stepper::new(sys, dt, integrator)?;
    let steps = step_count(t_end, dt);
    let mut state = State { t: 0.0, y: y0.reduced().to_vec(), v: y1.reduced().to_vec() };
    if !state.is_finite() {
        return Err(Error::NonFiniteState { step: 0 });
    }
    let mut trace = EvolutionTrace {
        dt,
        integrator,
        times: Vec::with_capacity(steps + 1),
        energies: Vec::with_capacity(steps + 1),
        y_boundary: Vec::with_capacity(steps + 1),
        v_boundary: Vec::with_capacity(steps + 1),
        v_mid: Vec::with_capacity(steps),
        cumulative_dissipation: Vec::with_capacity(steps + 1),
        stride,
        snapshots: Vec::new(),
    };
    let mut dissipated = 0.0;
    let record = |trace: &mut EvolutionTrace, state: &State, step: usize, dissipated: f64| -> Result<()> {
        trace.times.push(step as f64 * dt);
        trace.energies.push(energy(sys, state)?);
        trace.y_boundary.push(state.y[n - 1]);
        trace.v_boundary.push(state.v[n - 1]);
        trace.cumulative_dissipation.push(dissipated);
        if stride > 0 && step.is_multiple_of(stride) {
            trace.snapshots.push(Snapshot { step, t: step as f64 * dt, y: state.y.clone(), v: state.v.clone() });
        }
        Ok(())
    };
    record(&mut trace, &state, 0, 0.0)?;
    for step in 1..=steps {
        let vm = stepper.step(&mut state);
        state.t = step as f64 * dt;
        if !state.is_finite() || !vm.is_finite() {
            return Err(Error::NonFiniteState { step });
        }
        dissipated += dt * vm * vm;
        trace.v_mid.push(vm);
        record(&mut trace, &state, step, dissipated)?;
    }
    Ok(trace)
}

/// Closed-form initial data interpolated to the mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPreset {
    /// `y0 = Σ y0[k] x^k`, `y1 = Σ y1[k] x^k`.
    Poly {
        #[serde(default)]
        y0: Vec<f64>,
        #[serde(default)]
        y1: Vec<f64>,
    },
    /// `amplitude · exp(1 - 1/(1 - r²))`, `r = (x - center)/width`, as
    /// displacement, velocity or both.
    Bump {
        center: f64,
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default)]
        velocity_amplitude: f64,
    },
    /// The `k`-th eigenvector (1-based, ascending) of `S φ = λ M φ` with max-norm `amplitude`.
    ModeK {
        k: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn bump(x: f64, center: f64, width: f64) -> f64 {
    let r = (x - center) / width;
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// Builds `(y0, y1)` for `preset` on the mesh of `sys`.
pub fn initial_data(preset: &InitialPreset, sys: &DiscreteSystem) -> Result<(GridFunction, GridFunction)> {
    let mesh = std::sync::Arc::clone(&sys.mesh);
    match preset {
        InitialPreset::Poly { y0, y1 } => {
            if y0.first().copied().unwrap_or(0.0) != 0.0 {
                return Err(Error::InvalidInput("poly preset: y0 must vanish at x = 0 (constant term 0)".into()));
            }
            let a = GridFunction::interpolate(std::sync::Arc::clone(&mesh), |x| poly(y0, x));
            let mut b = GridFunction::interpolate(mesh, |x| poly(y1, x));
            if !b.is_dirichlet() {
                // velocity is a Dirichlet function as well
                let mut vals = b.values().to_vec();
                vals[0] = 0.0;
                b = GridFunction::new(std::sync::Arc::clone(b.mesh()), vals)?;
            }
            Ok((a, b))
        }
        InitialPreset::Bump { center, width, amplitude, velocity_amplitude } => {
            if !(*width > 0.0) || center - width < 0.0 || !center.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "bump preset: support [{}, {}] must lie in [0, inf) with positive width",
                    center - width,
                    center + width
                )));
            }
            let a = GridFunction::interpolate(std::sync::Arc::clone(&mesh), |x| amplitude * bump(x, *center, *width));
            let b = GridFunction::interpolate(mesh, |x| velocity_amplitude * bump(x, *center, *width));
            Ok((a, b))
        }
        InitialPreset::ModeK { k, amplitude } => {
            let phi = generalized_mode(sys, *k)?;
            let scale = phi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let sign = if phi[phi.len() - 1] < 0.0 { -1.0 } else { 1.0 };
            let reduced: Vec<f64> = phi.iter().map(|v| amplitude * sign * v / scale).collect();
            let a = GridFunction::from_reduced(std::sync::Arc::clone(&mesh), &reduced)?;
            Ok((a, GridFunction::zeros(mesh)))
        }
    }
}

/// `k`-th eigenvector of the pencil `(S, M)`, `k` counted from 1.
pub fn generalized_mode(sys: &DiscreteSystem, k: usize) -> Result<Vec<f64>> {
    let n = sys.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("mode index {k} outside 1..={n}")));
    }
    if n > DENSE_CAP {
        return Err(Error::InvalidInput(format!("mode preset needs N <= {DENSE_CAP}")));
    }
    let lm = sys.mass_factor();
    let s = sys.total_stiffness();
    // C = L⁻¹ S L⁻ᵀ, built column by column
    let mut c = DMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|x| *x = 0.0);
        col[j] = 1.0;
        lm.backward(&mut col);
        let mut sc = s.matvec(&col);
        lm.forward(&mut sc);
        for i in 0..n {
            c[(i, j)] = sc[i];
        }
    }
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(c, 1e-14, 0)
        .ok_or_else(|| Error::EigenFailure("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let w: Vec<f64> = eig.eigenvectors.column(order[k - 1]).iter().copied().collect();
    let mut phi = w;
    lm.backward(&mut phi);
    Ok(phi)
}
