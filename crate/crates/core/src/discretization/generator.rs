use nalgebra::DMatrix;

use super::assembly::DiscreteSystem;
use super::tridiag::{SymTridiag, TridiagCholesky};
use crate::error::{Error, Result};

/// Largest `N` for which dense generator matrices are built.
pub const DENSE_CAP: usize = 1024;

/// Above this `N`, `M⁻¹` is only ever applied through its factor.
const DENSE_INVERSE_CAP: usize = 512;

/// The first-order operator acting on stacked `(y, v)`:
/// `(y, v) ↦ (v, -M⁻¹[S y + e_N v_N])` with `S = K_η + β e_N e_Nᵀ`.
#[derive(Debug, Clone)]
pub struct Generator {
    s: SymTridiag,
    mass: SymTridiag,
    mass_factor: TridiagCholesky,
}

pub fn assemble_generator(sys: &DiscreteSystem) -> Result<Generator> {
    Ok(Generator {
        s: sys.total_stiffness(),
        mass: sys.mass.clone(),
        mass_factor: sys.mass.cholesky()?,
    })
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn apply(&self, y: &[f64], v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        for len in [y.len(), v.len()] {
            if len != n {
                return Err(Error::DimensionMismatch { expected: n, got: len });
            }
        }
        let mut rhs = self.s.matvec(y);
        rhs[n - 1] += v[n - 1];
        for r in rhs.iter_mut() {
            *r = -*r;
        }
        self.mass_factor.solve_in_place(&mut rhs);
        Ok((v.to_vec(), rhs))
    }

    /// `vᵀMṽ + yᵀSỹ`
    pub fn pairing(&self, y: &[f64], v: &[f64], y2: &[f64], v2: &[f64]) -> f64 {
        self.mass.bilinear(v, v2) + self.s.bilinear(y, y2)
    }

    /// The dense `2N × 2N` matrix in `(y, v)` coordinates.
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > DENSE_INVERSE_CAP {
            return Err(Error::InvalidInput(format!(
                "dense generator requested for N = {n} > {DENSE_INVERSE_CAP}"
            )));
        }
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            a[(i, n + i)] = 1.0;
        }
        let mut e = vec![0.0; n];
        for j in 0..2 * n {
            let (y, v) = if j < n {
                e[j] = 1.0;
                let r = self.apply(&e, &vec![0.0; n])?;
                e[j] = 0.0;
                r
            } else {
                e[j - n] = 1.0;
                let r = self.apply(&vec![0.0; n], &e)?;
                e[j - n] = 0.0;
                r
            };
            let _ = y;
            for i in 0..n {
                a[(n + i, j)] = v[i];
            }
        }
        Ok(a)
    }

    /// A matrix similar to the generator, written in energy coordinates
    /// `(L_Sᵀ y, L_Mᵀ v)`: `[[0, B], [-Bᵀ, -g gᵀ]]` with `B = L_Sᵀ L_M^{-T}`
    /// and `g = L_M^{-1} e_N`. Its symmetric part is `-diag(0, g gᵀ)`.
    pub fn energy_matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > DENSE_CAP {
            return Err(Error::InvalidInput(format!(
                "dense generator requested for N = {n} > {DENSE_CAP}"
            )));
        }
        let ls = self.s.cholesky()?;
        let mut b = DMatrix::zeros(n, n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[j] = 1.0;
            self.mass_factor.backward(&mut col);
            let bj = ls.upper_mul(&col);
            for i in 0..n {
                b[(i, j)] = bj[i];
            }
        }
        let mut g = vec![0.0; n];
        g[n - 1] = 1.0;
        self.mass_factor.forward(&mut g);
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                a[(i, n + j)] = b[(i, j)];
                a[(n + j, i)] = -b[(i, j)];
                a[(n + i, n + j)] = -g[i] * g[j];
            }
        }
        Ok(a)
    }
}
