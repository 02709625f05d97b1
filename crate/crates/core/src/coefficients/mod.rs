//! Coefficient pairs `(a, b)` of `y_tt = a(x) y_xx + b(x) y_x`, the
//! degeneracy constant `K`, the Feller weight and the hypothesis checks.

mod feller;
mod hypotheses;
mod spline;

use std::fmt;
use std::sync::Arc;

pub use feller::{feller_weight, FellerWeight};
pub use hypotheses::{check_hypotheses, classify, degeneracy_constant, Classification, HypothesisReport, SupGrid};
pub use spline::CubicSpline;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One coefficient as a function of `x`.
#[derive(Clone)]
pub enum Profile {
    Zero,
    /// `scale * x^exponent`
    Power { scale: f64, exponent: f64 },
    /// `sum c_i x^{p_i}` stored as `(c_i, p_i)`
    SumPower(Vec<(f64, f64)>),
    Tabulated(CubicSpline),
    /// A function together with its derivative.
    Custom { f: ScalarFn, df: ScalarFn },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Power { scale, exponent } => write!(f, "Power({scale} x^{exponent})"),
            Profile::SumPower(terms) => write!(f, "SumPower({terms:?})"),
            Profile::Tabulated(s) => write!(f, "Tabulated({:?})", s.x_range()),
            Profile::Custom { .. } => write!(f, "Custom"),
        }
    }
}

fn pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Power { scale, exponent } => scale * pow(x, *exponent),
            Profile::SumPower(terms) => terms.iter().map(|(c, p)| c * pow(x, *p)).sum(),
            Profile::Tabulated(s) => s.eval(x),
            Profile::Custom { f, .. } => f(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Power { scale, exponent } => {
                if *exponent == 0.0 {
                    0.0
                } else {
                    scale * exponent * pow(x, exponent - 1.0)
                }
            }
            Profile::SumPower(terms) => terms
                .iter()
                .filter(|(_, p)| *p != 0.0)
                .map(|(c, p)| c * p * pow(x, p - 1.0))
                .sum(),
            Profile::Tabulated(s) => s.derivative(x),
            Profile::Custom { df, .. } => df(x),
        }
    }
}

/// Closed-form description `a = x^K_exp`, `b = b_scale x^h_exp`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PowerLaw {
    pub k_exp: f64,
    pub h_exp: f64,
    pub b_scale: f64,
}

/// An evaluable coefficient pair `(a, b)` with `a'`.
#[derive(Debug, Clone)]
pub struct CoefficientModel {
    a: Profile,
    b: Profile,
    meta: Option<PowerLaw>,
}

impl CoefficientModel {
    pub fn new(a: Profile, b: Profile) -> Self {
        Self { a, b, meta: None }
    }

    /// `a = x^k_exp`, `b = b_scale x^h_exp`.
    pub fn power(k_exp: f64, h_exp: f64, b_scale: f64) -> Self {
        let b = if b_scale == 0.0 {
            Profile::Zero
        } else {
            Profile::Power { scale: b_scale, exponent: h_exp }
        };
        Self {
            a: Profile::Power { scale: 1.0, exponent: k_exp },
            b,
            meta: Some(PowerLaw { k_exp, h_exp, b_scale }),
        }
    }

    pub fn sum_power(a_terms: Vec<(f64, f64)>, b_terms: Vec<(f64, f64)>) -> Self {
        let b = if b_terms.is_empty() { Profile::Zero } else { Profile::SumPower(b_terms) };
        Self::new(Profile::SumPower(a_terms), b)
    }

    /// Tabulated coefficients; both tables must cover `[0, 1]`.
    pub fn tabulated(a: CubicSpline, b: CubicSpline) -> Result<Self> {
        for (name, s) in [("a", &a), ("b", &b)] {
            let (lo, hi) = s.x_range();
            if lo > 1e-12 || hi < 1.0 - 1e-12 {
                return Err(Error::InvalidInput(format!(
                    "table for {name} covers [{lo}, {hi}], must cover [0, 1]"
                )));
            }
        }
        Ok(Self::new(Profile::Tabulated(a), Profile::Tabulated(b)))
    }

    pub fn a(&self, x: f64) -> f64 {
        self.a.eval(x)
    }

    pub fn b(&self, x: f64) -> f64 {
        self.b.eval(x)
    }

    pub fn a_prime(&self, x: f64) -> f64 {
        self.a.derivative(x)
    }

    pub fn meta(&self) -> Option<PowerLaw> {
        self.meta
    }

    pub fn a_profile(&self) -> &Profile {
        &self.a
    }

    pub fn b_profile(&self) -> &Profile {
        &self.b
    }

    pub fn drift_is_zero(&self) -> bool {
        matches!(self.b, Profile::Zero)
    }

    /// Evaluates `a` and checks it is finite and positive.
    pub fn a_checked(&self, x: f64) -> Result<f64> {
        let v = self.a(x);
        if !v.is_finite() {
            return Err(Error::EvaluationFailure { x, what: format!("a = {v}") });
        }
        if v <= 0.0 {
            return Err(Error::NonPositiveCoefficient { x, value: v });
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_law_closed_forms() {
        let m = CoefficientModel::power(0.5, 0.25, 0.3);
        for x in [1e-9, 0.01, 0.5, 1.0] {
            let rel = |u: f64, v: f64| ((u - v) / v).abs();
            assert!(rel(m.a(x), x.powf(0.5)) < 1e-12);
            assert!(rel(m.b(x), 0.3 * x.powf(0.25)) < 1e-12);
            assert!(rel(m.a_prime(x), 0.5 * x.powf(-0.5)) < 1e-12);
        }
        assert_eq!(m.a(0.0), 0.0);
        assert!(CoefficientModel::power(0.5, 0.0, 0.0).drift_is_zero());
    }

    #[test]
    fn sum_power_derivative() {
        let m = CoefficientModel::sum_power(vec![(1.0, 1.0), (1.0, 2.0)], vec![]);
        assert_eq!(m.a(0.5), 0.75);
        assert_eq!(m.a_prime(0.5), 2.0);
        assert_eq!(m.b(0.3), 0.0);
    }

    #[test]
    fn a_checked_rejects_nonpositive() {
        let m = CoefficientModel::sum_power(vec![(1.0, 1.0), (-2.0, 2.0)], vec![]);
        assert!(matches!(m.a_checked(0.9), Err(Error::NonPositiveCoefficient { .. })));
        assert!(m.a_checked(0.1).is_ok());
    }
}
