use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    /// `off[i]` couples rows `i` and `i + 1`.
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn zeros(n: usize) -> Self {
        Self { diag: vec![0.0; n], off: vec![0.0; n.saturating_sub(1)] }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// `xᵀ A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            s += x[i] * self.diag[i] * y[i];
            if i + 1 < n {
                s += self.off[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
            }
        }
        s
    }

    /// `α A + β B` (same dimension).
    pub fn combine(&self, alpha: f64, other: &SymTridiag, beta: f64) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| alpha * a + beta * b).collect(),
            off: self.off.iter().zip(&other.off).map(|(a, b)| alpha * a + beta * b).collect(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.off[i];
                m[(i + 1, i)] = self.off[i];
            }
        }
        m
    }

    /// Coordinate-format text: one `row col value` line per stored entry,
    /// 1-based rows matching mesh node numbers (node 0 eliminated).
    pub fn to_coo_text(&self) -> String {
        let mut s = String::new();
        let n = self.dim();
        for i in 0..n {
            if i > 0 {
                s.push_str(&format!("{} {} {:.16e}\n", i + 1, i, self.off[i - 1]));
            }
            s.push_str(&format!("{} {} {:.16e}\n", i + 1, i + 1, self.diag[i]));
            if i + 1 < n {
                s.push_str(&format!("{} {} {:.16e}\n", i + 1, i + 2, self.off[i]));
            }
        }
        s
    }

    /// Cholesky factor `A = L Lᵀ` with `L` lower bidiagonal.
    pub fn cholesky(&self) -> Result<TridiagCholesky> {
        let n = self.dim();
        let mut l = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        for i in 0..n {
            let mut d = self.diag[i];
            if i > 0 {
                sub[i - 1] = self.off[i - 1] / l[i - 1];
                d -= sub[i - 1] * sub[i - 1];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::FactorizationFailure { pivot: i, value: d });
            }
            l[i] = d.sqrt();
        }
        Ok(TridiagCholesky { l, sub })
    }
}

/// Lower bidiagonal Cholesky factor.
#[derive(Debug, Clone)]
pub struct TridiagCholesky {
    /// diagonal of `L`
    pub l: Vec<f64>,
    /// subdiagonal of `L`
    pub sub: Vec<f64>,
}

impl TridiagCholesky {
    pub fn dim(&self) -> usize {
        self.l.len()
    }

    /// Solves `L z = b` in place.
    pub fn forward(&self, b: &mut [f64]) {
        for i in 0..self.dim() {
            if i > 0 {
                b[i] -= self.sub[i - 1] * b[i - 1];
            }
            b[i] /= self.l[i];
        }
    }

    /// Solves `Lᵀ z = b` in place.
    pub fn backward(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in (0..n).rev() {
            if i + 1 < n {
                b[i] -= self.sub[i] * b[i + 1];
            }
            b[i] /= self.l[i];
        }
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.forward(b);
        self.backward(b);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// `Lᵀ x`
    pub fn upper_mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|i| self.l[i] * x[i] + if i + 1 < n { self.sub[i] * x[i + 1] } else { 0.0 })
            .collect()
    }
}
