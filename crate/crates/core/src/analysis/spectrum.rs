use num_complex::Complex64;

use crate::discretization::{Generator, DENSE_CAP};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by decreasing real part, then by imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Largest real part.
    pub abscissa: f64,
}

impl Spectrum {
    /// Largest real part among the `fraction` of eigenvalues with the
    /// smallest `|Im|`. High-frequency grid modes barely reach the damped
    /// boundary, so the plain abscissa tends to 0 under refinement while this
    /// one tracks the modes that smooth data actually excites.
    pub fn resolved_abscissa(&self, fraction: f64) -> f64 {
        let mut by_freq: Vec<&Complex64> = self.eigenvalues.iter().collect();
        by_freq.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()).then(b.re.total_cmp(&a.re)));
        let keep = ((by_freq.len() as f64 * fraction).ceil() as usize).clamp(1, by_freq.len().max(1));
        by_freq.iter().take(keep).map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Eigenvalue CSV with header `re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for z in &self.eigenvalues {
            out.push_str(&format!("{:.16e},{:.16e}\n", z.re, z.im));
        }
        out
    }
}

/// All eigenvalues of the generator, computed from its energy-coordinate form.
pub fn spectrum(generator: &Generator) -> Result<Spectrum> {
    if generator.dim() > DENSE_CAP {
        return Err(Error::EigenFailure(format!("N = {} exceeds the dense cap {DENSE_CAP}", generator.dim())));
    }
    let a = generator.energy_matrix()?;
    let schur = nalgebra::linalg::Schur::try_new(a, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigenFailure("Schur iteration did not converge".into()))?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    if eigenvalues.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let abscissa = eigenvalues.first().map(|z| z.re).unwrap_or(f64::NEG_INFINITY);
    Ok(Spectrum { eigenvalues, abscissa })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::coefficients::{feller_weight, CoefficientModel};
    use crate::discretization::{assemble_generator, assemble_system, auto_grading, build_mesh};

    #[test]
    fn conjugate_pairs_and_dissipativity() {
        let w = Arc::new(feller_weight(Arc::new(CoefficientModel::power(1.0, 0.0, 0.0))).unwrap());
        let mesh = Arc::new(build_mesh(32, auto_grading(1.0)).unwrap());
        let sys = assemble_system(w, mesh, 1.0, 0.5).unwrap();
        let sp = spectrum(&assemble_generator(&sys).unwrap()).unwrap();
        assert_eq!(sp.eigenvalues.len(), 64);
        assert!(sp.abscissa < 0.0);
        for z in &sp.eigenvalues {
            let partner = sp.eigenvalues.iter().any(|u| (u.re - z.re).abs() < 1e-8 && (u.im + z.im).abs() < 1e-8 * (1.0 + z.im.abs()));
            assert!(partner, "{z}");
        }
        assert_eq!(sp.to_csv().lines().count(), 65);
        let resolved = sp.resolved_abscissa(0.25);
        assert!(resolved <= sp.abscissa && resolved < 0.0);
    }
}
