use std::sync::Arc;

use super::CoefficientModel;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, dyadic_tail, log_adaptive};

const REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
enum LogEta {
    Zero,
    /// `b_scale (x^q - 2^{-q}) / q`
    ClosedForm { b_scale: f64, q: f64 },
    /// Values of `∫_{1/2}^{x} b/a` at `x = 2^{-m}`, m = 1.., and at `x = 0`.
    Numeric { dyadic: Vec<f64>, at_zero: f64 },
}

/// The Feller weight `η(x) = exp(∫_{1/2}^x b/a)` and `σ = a/η`.
#[derive(Debug, Clone)]
pub struct FellerWeight {
    model: Arc<CoefficientModel>,
    log_eta: LogEta,
    pub eta_min: f64,
    pub eta_max: f64,
    /// `∫_0^1 dt/η`
    pub inv_eta_integral: f64,
}

impl FellerWeight {
    pub fn model(&self) -> &CoefficientModel {
        &self.model
    }

    pub fn model_arc(&self) -> Arc<CoefficientModel> {
        Arc::clone(&self.model)
    }

    /// `∫_{1/2}^x b(s)/a(s) ds`.
    pub fn log_eta(&self, x: f64) -> f64 {
        match &self.log_eta {
            LogEta::Zero => 0.0,
            LogEta::ClosedForm { b_scale, q } => b_scale * (x.powf(*q) - 0.5f64.powf(*q)) / q,
            LogEta::Numeric { dyadic, at_zero } => {
                if x <= 0.0 {
                    return *at_zero;
                }
                let f = |s: f64| self.model.b(s) / self.model.a(s);
                if x >= 0.5 {
                    return adaptive(&f, 0.5, x, REL_TOL, 1e-300).0;
                }
                // nearest tabulated dyadic point 2^{-m} >= x
                let m = ((-x.log2()).floor() as usize).clamp(1, dyadic.len());
                let anchor = 0.5f64.powi(m as i32);
                let base = dyadic[m - 1];
                if x == anchor {
                    return base;
                }
                base - log_adaptive(&f, x, anchor, REL_TOL).0
            }
        }
    }

    pub fn eta(&self, x: f64) -> f64 {
        self.log_eta(x).exp()
    }

    pub fn sigma(&self, x: f64) -> f64 {
        self.model.a(x) / self.eta(x)
    }

    /// `1/σ = η/a`; infinite at a degenerate endpoint.
    pub fn inv_sigma(&self, x: f64) -> f64 {
        self.eta(x) / self.model.a(x)
    }

    /// `∫_0^{x_i} dt/η` at each of the increasing points `xs`.
    pub fn inv_eta_cumulative(&self, xs: &[f64]) -> Vec<f64> {
        let g = |t: f64| (-self.log_eta(t)).exp();
        let mut acc = 0.0;
        let mut prev = 0.0;
        xs.iter()
            .map(|&x| {
                if x > prev {
                    acc += integrate_inv_eta(&g, prev, x);
                    prev = x;
                }
                acc
            })
            .collect()
    }
}

fn integrate_inv_eta<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> f64 {
    // 1/η is bounded; only its derivative may blow up at 0
    if lo == 0.0 {
        let cut = (hi * 1e-14).max(1e-300);
        g(0.0) * cut + log_adaptive(g, cut, hi, REL_TOL).0
    } else {
        adaptive(g, lo, hi, REL_TOL, 1e-300).0
    }
}

/// Builds the Feller weight of `model`.
///
/// Power-law models with `h > K - 1` use the closed-form integral; otherwise
/// the singular tail near 0 is integrated on dyadic pieces and a failing tail
/// test is reported as [`Error::NonIntegrableDrift`].
pub fn feller_weight(model: Arc<CoefficientModel>) -> Result<FellerWeight> {
    let log_eta = if model.drift_is_zero() {
        LogEta::Zero
    } else if let Some(meta) = model.meta().filter(|m| m.b_scale != 0.0) {
        let q = meta.h_exp - meta.k_exp + 1.0;
        if q <= 0.0 {
            return Err(Error::NonIntegrableDrift);
        }
        LogEta::ClosedForm { b_scale: meta.b_scale, q }
    } else {
        let abs = |s: f64| (model.b(s) / model.a(s)).abs();
        let abs_tail = dyadic_tail(&abs, 0.5);
        if !abs_tail.converged || !abs_tail.value.is_finite() {
            return Err(Error::NonIntegrableDrift);
        }
        let f = |s: f64| model.b(s) / model.a(s);
        let tail = dyadic_tail(&f, 0.5);
        if !tail.value.is_finite() {
            return Err(Error::NonIntegrableDrift);
        }
        // partial[m] = ∫_{2^{-m-1}}^{1/2} f, so ∫_{1/2}^{2^{-m-1}} f = -partial[m]
        let dyadic: Vec<f64> = tail.partial.iter().map(|p| -p).collect();
        LogEta::Numeric { dyadic, at_zero: -tail.value }
    };
    let mut w = FellerWeight {
        model,
        log_eta,
        eta_min: 1.0,
        eta_max: 1.0,
        inv_eta_integral: 1.0,
    };
    if !matches!(w.log_eta, LogEta::Zero) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut visit = |x: f64| {
            let e = w.eta(x);
            lo = lo.min(e);
            hi = hi.max(e);
        };
        visit(0.0);
        const N: usize = 2048;
        for i in 0..=N {
            visit(i as f64 / N as f64);
            visit((1e-12f64.ln() * (1.0 - i as f64 / N as f64)).exp());
        }
        if !(lo > 0.0 && hi.is_finite()) {
            return Err(Error::NonIntegrableDrift);
        }
        w.eta_min = lo;
        w.eta_max = hi;
        w.inv_eta_integral = *w.inv_eta_cumulative(&[1.0]).last().unwrap();
    }
    Ok(w)
}
