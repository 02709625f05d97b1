//! Weighted norms, the Hardy–Poincaré constant and the auxiliary boundary
//! problem `-σ(ηz')' = 0`, `ηz'(1) + βz(1) = λ`.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::coefficients::FellerWeight;
use crate::discretization::{DiscreteSystem, Mesh, QuadratureTable};
use crate::error::{Error, Result};
use crate::quadrature::dyadic_tail;

/// Environment variable overriding the seed for random test functions.
pub const SEED_ENV: &str = "DEGENWAVE_SEED";

/// Piecewise-linear function given by its values at all mesh nodes.
#[derive(Debug, Clone)]
pub struct GridFunction {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        let expected = mesh.nodes().len();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: values.len() });
        }
        Ok(Self { mesh, values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate<F: Fn(f64) -> f64>(mesh: Arc<Mesh>, f: F) -> Self {
        let values = mesh.nodes().iter().map(|&x| f(x)).collect();
        Self { mesh, values }
    }

    /// Dirichlet function from its values at nodes `1..=N`.
    pub fn from_reduced(mesh: Arc<Mesh>, reduced: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(reduced.len() + 1);
        values.push(0.0);
        values.extend_from_slice(reduced);
        Self::new(mesh, values)
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.nodes().len();
        Self { mesh, values: vec![0.0; n] }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Values at nodes `1..=N`.
    pub fn reduced(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn is_dirichlet(&self) -> bool {
        self.values[0] == 0.0
    }

    pub fn at_one(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { mesh: Arc::clone(&self.mesh), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Standard-normal nodal values with node 0 set to zero.
    pub fn random_dirichlet(mesh: Arc<Mesh>, rng: &mut ChaCha8Rng) -> Self {
        let n = mesh.nodes().len();
        let mut values: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        values[0] = 0.0;
        Self { mesh, values }
    }
}

/// Seeded generator, overridable through [`SEED_ENV`].
pub fn seeded_rng(default_seed: u64) -> ChaCha8Rng {
    let seed = std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<u64>().ok())
        .unwrap_or(default_seed);
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormBundle {
    /// `‖u‖_{1/σ}`
    pub l2_sigma: f64,
    /// `(∫ u'²)^{1/2}`
    pub h1_seminorm: f64,
    /// `(‖u‖²_{1/σ} + ∫ η u'²)^{1/2}`
    pub h1_sigma: f64,
    /// `(∫ η u'² + β u(1)²)^{1/2}`
    pub triple: f64,
}

/// All weighted norms of `u`. A function not vanishing at 0 has its first
/// element integrated on dyadic pieces, and a divergent tail is reported
/// as [`Error::SingularMass`].
pub fn weighted_norms(u: &GridFunction, quad: &QuadratureTable, beta: f64) -> Result<NormBundle> {
    if !Arc::ptr_eq(u.mesh(), quad.mesh()) && u.mesh().nodes() != quad.mesh().nodes() {
        return Err(Error::InvalidInput("grid function and quadrature live on different meshes".into()));
    }
    let vals = u.values();
    let mut l2 = 0.0;
    let mut h1 = 0.0;
    let mut eta_h1 = 0.0;
    let elements = quad.mesh().elements();
    for e in 0..elements {
        let h = quad.mesh().h(e);
        let d = (vals[e + 1] - vals[e]) / h;
        for p in quad.element_points(e) {
            let uv = vals[e] * p.phi_l + vals[e + 1] * p.phi_r;
            if e > 0 || u.is_dirichlet() {
                l2 += p.w * uv * uv * p.inv_sigma;
            }
            h1 += p.w * d * d;
            eta_h1 += p.w * p.eta * d * d;
        }
    }
    if !u.is_dirichlet() {
        let w = quad.weight();
        let h0 = quad.mesh().h(0);
        let f = |x: f64| {
            let uv = vals[0] + (vals[1] - vals[0]) * x / h0;
            uv * uv * w.inv_sigma(x)
        };
        let tail = dyadic_tail(&f, h0);
        if !tail.converged || !tail.value.is_finite() {
            return Err(Error::SingularMass);
        }
        l2 += tail.value;
    }
    let b1 = u.at_one();
    Ok(NormBundle {
        l2_sigma: l2.sqrt(),
        h1_seminorm: h1.sqrt(),
        h1_sigma: (l2 + eta_h1).sqrt(),
        triple: (eta_h1 + beta * b1 * b1).sqrt(),
    })
}

/// Top eigenvalue of the pencil `(M_{1/σ}, K)` with `K` the unweighted
/// Dirichlet stiffness: the discrete Hardy–Poincaré constant.
pub fn hardy_poincare_constant(sys: &DiscreteSystem) -> Result<f64> {
    let k = sys.unweighted_stiffness();
    let kf = k.cholesky()?;
    let n = sys.dim();
    // positive start vector overlaps the positive ground state
    let mut x: Vec<f64> = sys.mesh.nodes()[1..].to_vec();
    let mut mu = 0.0;
    for _ in 0..20_000 {
        let mut next = sys.mass.matvec(&x);
        kf.solve_in_place(&mut next);
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::EigenFailure("power iteration broke down".into()));
        }
        for (xi, ni) in x.iter_mut().zip(&next) {
            *xi = ni / norm;
        }
        let new_mu = sys.mass.bilinear(&x, &x) / k.bilinear(&x, &x);
        if (new_mu - mu).abs() <= 1e-15 * new_mu {
            return Ok(new_mu);
        }
        mu = new_mu;
    }
    Err(Error::EigenFailure(format!("power iteration did not converge for N = {n}")))
}

/// `C_HP` on three nested meshes with the Richardson-extrapolated limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyPoincareEstimate {
    /// Values at `N/4`, `N/2`, `N`.
    pub values: [f64; 3],
    pub finest: f64,
    pub extrapolated: f64,
    /// Observed convergence order (2 assumed when it cannot be estimated).
    pub order: f64,
}

/// Richardson extrapolation of three values on meshes refined by 2.
pub fn richardson(values: [f64; 3]) -> HardyPoincareEstimate {
    let [c1, c2, c3] = values;
    let (d1, d2) = (c2 - c1, c3 - c2);
    let mut order = 2.0;
    if d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() {
        let p = (d1 / d2).log2();
        if p.is_finite() && (0.5..=8.0).contains(&p) {
            order = p;
        }
    }
    let extrapolated = c3 + d2 / (2f64.powf(order) - 1.0);
    HardyPoincareEstimate { values, finest: c3, extrapolated, order }
}

/// `(1/min η, C_HP + max η)`: `‖u‖₁² ≤ lower·‖u‖²_{1,1/σ}` and
/// `‖u‖²_{1,1/σ} ≤ upper·‖u‖₁²`.
pub fn norm_equivalence_constants(w: &FellerWeight, c_hp: f64) -> (f64, f64) {
    (1.0 / w.eta_min, c_hp + w.eta_max)
}

#[derive(Debug, Clone)]
pub struct AuxiliarySolution {
    pub z: GridFunction,
    /// The constant flux `c = η z'`.
    pub flux: f64,
}

/// `z(x) = c ∫_0^x dt/η` with `c = λ / (1 + β ∫_0^1 dt/η)`.
pub fn solve_auxiliary(lambda: f64, beta: f64, w: &FellerWeight, mesh: Arc<Mesh>) -> Result<AuxiliarySolution> {
    if !(beta >= 0.0) || !beta.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("auxiliary problem needs finite λ and β >= 0, got {lambda}, {beta}")));
    }
    let c = lambda / (1.0 + beta * w.inv_eta_integral);
    let cum = w.inv_eta_cumulative(mesh.nodes());
    let values = cum.iter().map(|v| c * v).collect();
    Ok(AuxiliarySolution { z: GridFunction::new(mesh, values)?, flux: c })
}

impl AuxiliarySolution {
    /// Exact `|||z|||₁²`, using `z' = c/η` rather than the interpolant.
    pub fn triple_sq(&self, w: &FellerWeight, beta: f64) -> f64 {
        let i = w.inv_eta_integral;
        self.flux * self.flux * i + beta * self.z.at_one().powi(2)
    }

    /// Residual of `∫ηz'φ' + βz(1)φ(1) - λφ(1)` against every Dirichlet hat
    /// function, with `z' = c/η` integrated exactly: `c(φ(1) - φ(0)) + (βz(1) - λ)φ(1)`.
    pub fn variational_residual(&self, lambda: f64, beta: f64) -> Vec<f64> {
        let n = self.z.mesh().elements();
        let mut r = vec![0.0; n];
        // ∫η (c/η) φ_i' = c ∫ φ_i' = c (φ_i(1) - φ_i(0)), nonzero only for the last hat
        r[n - 1] = self.flux + beta * self.z.at_one() - lambda;
        r
    }
}
