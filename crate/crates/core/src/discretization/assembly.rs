use std::sync::Arc;

use super::mesh::Mesh;
use super::tridiag::{SymTridiag, TridiagCholesky};
use crate::coefficients::FellerWeight;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// A quadrature point with the coefficient data every integral needs.
#[derive(Debug, Clone, Copy)]
pub struct QuadPoint {
    pub x: f64,
    pub w: f64,
    /// Left and right P1 shape function values.
    pub phi_l: f64,
    pub phi_r: f64,
    pub inv_sigma: f64,
    pub eta: f64,
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
}

/// Elementwise quadrature on a mesh: 4-point Gauss on every element except
/// the first, where 16-point Gauss on the dyadic pieces `[h 2^{-m-1}, h 2^{-m}]`
/// resolves the power-type singularity of `1/σ` at 0.
#[derive(Debug, Clone)]
pub struct QuadratureTable {
    mesh: Arc<Mesh>,
    weight: Arc<FellerWeight>,
    points: Vec<QuadPoint>,
    offsets: Vec<usize>,
}

/// Dyadic pieces on the first element; the uncovered `[0, h 2^{-48}]` is
/// below rounding for every integrand the module forms.
const FIRST_ELEMENT_PIECES: i32 = 48;

impl QuadratureTable {
    pub fn new(mesh: Arc<Mesh>, weight: Arc<FellerWeight>, k: f64) -> Result<Self> {
        if !(k.is_finite() && k < 2.0) {
            return Err(Error::AssemblyFailure(format!("degeneracy constant K = {k} must be < 2")));
        }
        let model = weight.model();
        let mut points = Vec::with_capacity(16 + 4 * mesh.elements());
        let mut offsets = Vec::with_capacity(mesh.elements() + 1);
        let point = |x: f64, w: f64, x0: f64, h: f64| {
            let eta = weight.eta(x);
            let a = model.a(x);
            let phi_r = (x - x0) / h;
            QuadPoint {
                x,
                w,
                phi_l: 1.0 - phi_r,
                phi_r,
                inv_sigma: eta / a,
                eta,
                a,
                a_prime: model.a_prime(x),
                b: model.b(x),
            }
        };
        for e in 0..mesh.elements() {
            offsets.push(points.len());
            let (x0, x1) = mesh.element(e);
            let h = x1 - x0;
            if e == 0 {
                for m in (0..FIRST_ELEMENT_PIECES).rev() {
                    let hi = h * 0.5f64.powi(m);
                    for (x, w) in GaussLegendre::sixteen().mapped(hi * 0.5, hi) {
                        points.push(point(x, w, x0, h));
                    }
                }
            } else {
                for (x, w) in GaussLegendre::four().mapped(x0, x1) {
                    points.push(point(x, w, x0, h));
                }
            }
        }
        offsets.push(points.len());
        if points.iter().any(|p| !p.inv_sigma.is_finite() || !p.eta.is_finite()) {
            return Err(Error::AssemblyFailure("non-finite weight at a quadrature point".into()));
        }
        Ok(Self { mesh, weight, points, offsets })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn weight(&self) -> &Arc<FellerWeight> {
        &self.weight
    }

    pub fn element_points(&self, e: usize) -> &[QuadPoint] {
        &self.points[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn points(&self) -> &[QuadPoint] {
        &self.points
    }

    /// `∫ f` where `f` sees the quadrature point and its element index.
    pub fn integrate<F: FnMut(&QuadPoint, usize) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        for e in 0..self.mesh.elements() {
            total += self.element_points(e).iter().map(|p| p.w * f(p, e)).sum::<f64>();
        }
        total
    }

    /// Integral of `f(point, u, u')` for a P1 function with full nodal values `u`.
    pub fn integrate_p1<F>(&self, u: &[f64], mut f: F) -> f64
    where
        F: FnMut(&QuadPoint, f64, f64) -> f64,
    {
        self.integrate(|p, e| {
            let val = u[e] * p.phi_l + u[e + 1] * p.phi_r;
            let der = (u[e + 1] - u[e]) / self.mesh.h(e);
            f(p, val, der)
        })
    }

    /// Integral of `f(point, u, u', v, v')` for two P1 functions.
    pub fn integrate_p1_pair<F>(&self, u: &[f64], v: &[f64], mut f: F) -> f64
    where
        F: FnMut(&QuadPoint, f64, f64, f64, f64) -> f64,
    {
        self.integrate(|p, e| {
            let h = self.mesh.h(e);
            let uv = u[e] * p.phi_l + u[e + 1] * p.phi_r;
            let ud = (u[e + 1] - u[e]) / h;
            let vv = v[e] * p.phi_l + v[e + 1] * p.phi_r;
            let vd = (v[e + 1] - v[e]) / h;
            f(p, uv, ud, vv, vd)
        })
    }
}

/// Galerkin image of the weighted variational structure on the
/// Dirichlet-reduced P1 space (unknowns at nodes `1..=N`).
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    pub mesh: Arc<Mesh>,
    pub quad: Arc<QuadratureTable>,
    pub weight: Arc<FellerWeight>,
    /// `M_ij = ∫ φ_i φ_j / σ`
    pub mass: SymTridiag,
    /// `(K_η)_ij = ∫ η φ_i' φ_j'`
    pub stiffness: SymTridiag,
    pub beta: f64,
    pub k: f64,
    mass_factor: TridiagCholesky,
}

impl DiscreteSystem {
    /// Cholesky factor of `M`, computed once at assembly.
    pub fn mass_factor(&self) -> &TridiagCholesky {
        &self.mass_factor
    }

    /// Reduced dimension `N` (node 0 eliminated).
    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// Reduced index of the node at `x = 1`.
    pub fn boundary_index(&self) -> usize {
        self.dim() - 1
    }

    /// `K_η + β e_N e_Nᵀ`
    pub fn total_stiffness(&self) -> SymTridiag {
        let mut s = self.stiffness.clone();
        let n = self.boundary_index();
        s.diag[n] += self.beta;
        s
    }

    /// Unweighted P1 stiffness `∫ φ_i' φ_j'`, reduced.
    pub fn unweighted_stiffness(&self) -> SymTridiag {
        let n = self.mesh.elements();
        let mut s = SymTridiag::zeros(n);
        for e in 0..n {
            let inv_h = 1.0 / self.mesh.h(e);
            add_local(&mut s, e, [[inv_h, -inv_h], [-inv_h, inv_h]]);
        }
        s
    }

    /// The energy pairing `⟨(y,v),(ỹ,ṽ)⟩₁ = vᵀMṽ + yᵀ(K_η + βe_Ne_Nᵀ)ỹ`.
    pub fn pairing(&self, y: &[f64], v: &[f64], y2: &[f64], v2: &[f64]) -> f64 {
        let n = self.boundary_index();
        self.mass.bilinear(v, v2) + self.stiffness.bilinear(y, y2) + self.beta * y[n] * y2[n]
    }

    /// Full nodal vector (with the Dirichlet zero at node 0) from reduced values.
    pub fn full_nodal(&self, reduced: &[f64]) -> Vec<f64> {
        let mut u = Vec::with_capacity(reduced.len() + 1);
        u.push(0.0);
        u.extend_from_slice(reduced);
        u
    }
}

/// Adds a 2x2 element matrix for element `e` (nodes `e`, `e+1`) into the
/// reduced matrix, skipping node 0.
fn add_local(m: &mut SymTridiag, e: usize, local: [[f64; 2]; 2]) {
    // node j maps to reduced index j - 1
    if e >= 1 {
        m.diag[e - 1] += local[0][0];
        m.off[e - 1] += local[0][1];
    }
    m.diag[e] += local[1][1];
}

/// Assembles mass and stiffness matrices for `weight` on `mesh`.
pub fn assemble_system(weight: Arc<FellerWeight>, mesh: Arc<Mesh>, k: f64, beta: f64) -> Result<DiscreteSystem> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta = {beta} must be finite and >= 0")));
    }
    let quad = Arc::new(QuadratureTable::new(Arc::clone(&mesh), Arc::clone(&weight), k)?);
    let n = mesh.elements();
    let mut mass = SymTridiag::zeros(n);
    let mut stiffness = SymTridiag::zeros(n);
    for e in 0..n {
        let h = mesh.h(e);
        let mut m = [[0.0; 2]; 2];
        let mut eta_int = 0.0;
        for p in quad.element_points(e) {
            let phi = [p.phi_l, p.phi_r];
            for i in 0..2 {
                for j in 0..2 {
                    m[i][j] += p.w * phi[i] * phi[j] * p.inv_sigma;
                }
            }
            eta_int += p.w * p.eta;
        }
        let kk = eta_int / (h * h);
        add_local(&mut mass, e, m);
        add_local(&mut stiffness, e, [[kk, -kk], [-kk, kk]]);
    }
    if mass.diag.iter().chain(&mass.off).any(|v| !v.is_finite()) {
        return Err(Error::SingularMass);
    }
    let mass_factor = mass.cholesky()?;
    Ok(DiscreteSystem { mesh, quad, weight, mass, stiffness, beta, k, mass_factor })
}
