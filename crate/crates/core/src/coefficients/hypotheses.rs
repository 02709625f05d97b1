use serde::Serialize;

use super::CoefficientModel;
use crate::error::{Error, Hypothesis, Result};
use crate::quadrature::dyadic_tail;

/// Deterministic surrogate for suprema and infima over `(0, 1]`: a
/// log-spaced grid down to `x_min` followed by local refinement rounds
/// around the extremizer.
#[derive(Debug, Clone, Copy)]
pub struct SupGrid {
    pub points: usize,
    pub x_min: f64,
    pub rounds: usize,
}

impl Default for SupGrid {
    fn default() -> Self {
        Self { points: 1 << 14, x_min: 1e-12, rounds: 3 }
    }
}

/// Upper end of the right neighbourhood of 0 used by the `Ass0` monotonicity test.
pub const ASS0_NEIGHBOURHOOD: f64 = 1e-2;

fn log_point(x_min: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        return 1.0;
    }
    (x_min.ln() * (1.0 - i as f64 / (n - 1) as f64)).exp()
}

/// Supremum of `f` on the grid over `[x_min, 1]`, with local refinement.
fn grid_sup<F>(f: &F, x_min: f64, points: usize, rounds: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = points.max(3);
    let xs: Vec<f64> = (0..n).map(|i| log_point(x_min, i, n)).collect();
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (i, &x) in xs.iter().enumerate() {
        let v = f(x)?;
        if v.is_nan() {
            return Err(Error::EvaluationFailure { x, what: "NaN in supremum argument".into() });
        }
        if v > best {
            best = v;
            arg = i;
        }
    }
    let mut lo = xs[arg.saturating_sub(1)];
    let mut hi = xs[(arg + 1).min(n - 1)];
    for _ in 0..rounds {
        const M: usize = 33;
        let mut local_best = f64::NEG_INFINITY;
        let mut local_arg = 0;
        let pts: Vec<f64> =
            (0..M).map(|j| lo * (hi / lo).powf(j as f64 / (M - 1) as f64)).collect();
        for (j, &x) in pts.iter().enumerate() {
            let v = f(x)?;
            if v > local_best {
                local_best = v;
                local_arg = j;
            }
        }
        best = best.max(local_best);
        lo = pts[local_arg.saturating_sub(1)];
        hi = pts[(local_arg + 1).min(M - 1)];
    }
    Ok(best)
}

/// Supremum plus a divergence verdict from three nested lower limits.
struct NestedSup {
    value: f64,
    divergent: bool,
}

fn nested_sup<F>(f: &F, grid: &SupGrid) -> Result<NestedSup>
where
    F: Fn(f64) -> Result<f64>,
{
    let coarse = (grid.points / 4).max(64);
    let s1 = grid_sup(f, 1e-4_f64.max(grid.x_min), coarse, grid.rounds)?;
    let s2 = grid_sup(f, 1e-8_f64.max(grid.x_min), coarse, grid.rounds)?;
    let s3 = grid_sup(f, grid.x_min, grid.points, grid.rounds)?;
    let grows = |a: f64, b: f64| b > a * 1.01 + 1e-12;
    Ok(NestedSup { value: s3, divergent: grows(s1, s2) && grows(s2, s3) })
}

/// `K = sup x|a'(x)|/a(x)` over `(0, 1]`.
///
/// Power-law models return their exponent exactly. A supremum that keeps
/// growing as the grid reaches further towards 0 (and already exceeds 2) is
/// reported as [`Error::DivergentSupremum`].
pub fn degeneracy_constant(model: &CoefficientModel, grid: &SupGrid) -> Result<f64> {
    if let Some(meta) = model.meta() {
        if meta.k_exp < 0.0 {
            return Err(Error::InvalidInput(format!("negative exponent K_exp = {}", meta.k_exp)));
        }
        return Ok(meta.k_exp);
    }
    let ratio = |x: f64| -> Result<f64> {
        let a = model.a_checked(x)?;
        let d = model.a_prime(x);
        if !d.is_finite() {
            return Err(Error::EvaluationFailure { x, what: format!("a' = {d}") });
        }
        Ok(x * d.abs() / a)
    };
    let sup = nested_sup(&ratio, grid)?;
    if sup.divergent && sup.value > 2.0 {
        return Err(Error::DivergentSupremum { last: sup.value });
    }
    Ok(sup.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    /// Weakly degenerate: `K` in `(0, 1)`.
    Wd,
    /// Strongly degenerate: `K` in `[1, 2)`.
    Sd,
    Nondegenerate,
    Invalid,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Wd => "WD",
            Classification::Sd => "SD",
            Classification::Nondegenerate => "NONDEGENERATE",
            Classification::Invalid => "INVALID",
        };
        f.write_str(s)
    }
}

/// Classifies the degeneracy constant. `degenerate` is `a(0) == 0`.
pub fn classify(k: f64, degenerate: bool) -> Classification {
    if !degenerate {
        return Classification::Nondegenerate;
    }
    if !k.is_finite() || k >= 2.0 || k <= 0.0 {
        Classification::Invalid
    } else if k >= 1.0 {
        Classification::Sd
    } else {
        Classification::Wd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisReport {
    #[serde(rename = "K")]
    pub k: f64,
    pub classification: Classification,
    pub hyp_basic: bool,
    pub hyp_ass0: bool,
    pub hyp_ass1: bool,
    pub hyp_ass2: bool,
    pub eps0: f64,
    pub xb_over_a_sup: f64,
    /// Whether `b/a` passed the integrability tail test (part of `hyp_basic`).
    pub drift_integrable: bool,
}

impl HypothesisReport {
    /// Violated hypotheses among `required`, each with a short reason.
    pub fn violations(&self, required: &[Hypothesis]) -> Vec<(Hypothesis, String)> {
        let mut out = Vec::new();
        for h in required {
            let failed = match h {
                Hypothesis::Basic if !self.hyp_basic => Some(if self.drift_integrable {
                    "a or b is not continuous on [0,1]".to_string()
                } else {
                    "non-integrable drift: b/a not in L1(0,1)".to_string()
                }),
                Hypothesis::Ass0 if !self.hyp_ass0 => {
                    Some(format!("x^K/a not nondecreasing near 0 or a not degenerate (K = {})", self.k))
                }
                Hypothesis::Ass1 if !self.hyp_ass1 => Some(format!(
                    "classification {} with K = {}, sup x|b|/a = {}",
                    self.classification, self.k, self.xb_over_a_sup
                )),
                Hypothesis::Ass2 if !self.hyp_ass2 => Some(format!("eps0 = {} <= 0", self.eps0)),
                _ => None,
            };
            if let Some(reason) = failed {
                out.push((*h, reason));
            }
        }
        out
    }

    /// Fails with [`Error::HypothesisViolation`] naming every violated hypothesis.
    pub fn require(&self, required: &[Hypothesis]) -> Result<()> {
        let v = self.violations(required);
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::HypothesisViolation(v))
        }
    }
}

fn drift_integrable(model: &CoefficientModel) -> bool {
    if model.drift_is_zero() {
        return true;
    }
    if let Some(meta) = model.meta() {
        return meta.b_scale == 0.0 || meta.h_exp > meta.k_exp - 1.0;
    }
    let f = |x: f64| (model.b(x) / model.a(x)).abs();
    let tail = dyadic_tail(&f, 1.0);
    tail.converged && tail.value.is_finite()
}

/// Evaluates every hypothesis as an executable check.
///
/// Violations are reported as `false` fields; only evaluation failures
/// (NaN coefficients, non-positive `a`) are errors.
pub fn check_hypotheses(model: &CoefficientModel, k: f64, grid: &SupGrid) -> Result<HypothesisReport> {
    let a0 = model.a(0.0);
    let b0 = model.b(0.0);
    if a0.is_nan() || b0.is_nan() {
        return Err(Error::EvaluationFailure { x: 0.0, what: "NaN coefficient at x = 0".into() });
    }
    let degenerate = a0 == 0.0;
    let classification = classify(k, degenerate);

    // a, b finite on the grid; a positive on (0, 1]
    let n = grid.points;
    for i in 0..n {
        let x = log_point(grid.x_min, i, n);
        model.a_checked(x)?;
        let b = model.b(x);
        if !b.is_finite() {
            return Err(Error::EvaluationFailure { x, what: format!("b = {b}") });
        }
    }
    let continuous = a0.is_finite() && b0.is_finite();
    let integrable = drift_integrable(model);
    let hyp_basic = continuous && integrable;

    let hyp_ass0 = hyp_basic && degenerate && k.is_finite() && k > 0.0 && {
        let m = 4096;
        let mut prev = f64::NEG_INFINITY;
        let mut ok = true;
        for i in 0..m {
            let x = (grid.x_min.ln()
                + (ASS0_NEIGHBOURHOOD.ln() - grid.x_min.ln()) * i as f64 / (m - 1) as f64)
                .exp();
            let g = x.powf(k) / model.a(x);
            if g < prev * (1.0 - 1e-9) {
                ok = false;
                break;
            }
            prev = g;
        }
        ok
    };

    let xb = |x: f64| -> Result<f64> { Ok(x * model.b(x).abs() / model.a_checked(x)?) };
    let xb_sup = nested_sup(&xb, grid)?;
    let xb_over_a_sup = if xb_sup.divergent { f64::INFINITY } else { xb_sup.value };

    let hyp_ass1 = hyp_basic
        && matches!(classification, Classification::Wd | Classification::Sd)
        && (k <= 1.0 || xb_over_a_sup.is_finite());

    let eps0 = if k.is_finite() { (2.0 - k) - 2.0 * xb_sup.value } else { f64::NEG_INFINITY };
    Ok(HypothesisReport {
        k,
        classification,
        hyp_basic,
        hyp_ass0,
        hyp_ass1,
        hyp_ass2: eps0 > 0.0,
        eps0,
        xb_over_a_sup,
        drift_integrable: integrable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::Profile;
    use std::sync::Arc;

    #[test]
    fn power_meta_returns_exponent() {
        let k = degeneracy_constant(&CoefficientModel::power(0.5, 0.0, 0.0), &SupGrid::default());
        assert_eq!(k.unwrap(), 0.5);
    }

    #[test]
    fn sampled_sum_power_matches_dense_oracle() {
        // x a'/a = (1+2x)/(1+x) for a = x + x^2; oracle: brute force on a dense uniform grid
        let model = CoefficientModel::sum_power(vec![(1.0, 1.0), (1.0, 2.0)], vec![]);
        let k = degeneracy_constant(&model, &SupGrid::default()).unwrap();
        let oracle = (1..=100_000)
            .map(|i| {
                let x = i as f64 / 100_000.0;
                x * (1.0 + 2.0 * x) / (x + x * x)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((oracle - 1.5).abs() < 1e-15);
        assert!((k - 1.5).abs() < 1e-12, "{k}");
    }

    #[test]
    fn x_squared_is_invalid() {
        let model = CoefficientModel::sum_power(vec![(1.0, 2.0)], vec![]);
        let k = degeneracy_constant(&model, &SupGrid::default()).unwrap();
        assert!((k - 2.0).abs() < 1e-12);
        assert_eq!(classify(k, true), Classification::Invalid);
    }

    #[test]
    fn divergent_supremum_detected() {
        // a = exp(-ln(1/x)^2 / 2): x a'/a = ln(1/x), unbounded
        let f = Arc::new(|x: f64| (-(x.ln() * x.ln()) / 2.0).exp());
        let df = Arc::new(|x: f64| -(x.ln() / x) * (-(x.ln() * x.ln()) / 2.0).exp());
        let model = CoefficientModel::new(Profile::Custom { f, df }, Profile::Zero);
        assert!(matches!(
            degeneracy_constant(&model, &SupGrid::default()),
            Err(Error::DivergentSupremum { .. })
        ));
    }

    #[test]
    fn nonpositive_coefficient_is_an_error() {
        let model = CoefficientModel::sum_power(vec![(1.0, 1.0), (-1.0, 0.5)], vec![]);
        assert!(matches!(
            degeneracy_constant(&model, &SupGrid::default()),
            Err(Error::NonPositiveCoefficient { .. })
        ));
    }

    #[test]
    fn classification_boundaries() {
        assert_eq!(classify(0.5, true), Classification::Wd);
        assert_eq!(classify(1.0, true), Classification::Sd);
        assert_eq!(classify(1.999, true), Classification::Sd);
        assert_eq!(classify(2.0, true), Classification::Invalid);
        assert_eq!(classify(f64::INFINITY, true), Classification::Invalid);
        assert_eq!(classify(0.5, false), Classification::Nondegenerate);
        assert_eq!(classify(3.0, false), Classification::Nondegenerate);
    }

    #[test]
    fn pure_power_without_drift_satisfies_everything() {
        for k in [0.3, 1.0, 1.5] {
            let model = CoefficientModel::power(k, 0.0, 0.0);
            let rep = check_hypotheses(&model, k, &SupGrid::default()).unwrap();
            assert_eq!(rep.eps0, 2.0 - k);
            assert!(rep.hyp_basic && rep.hyp_ass0 && rep.hyp_ass1 && rep.hyp_ass2, "{rep:?}");
        }
    }

    #[test]
    fn small_drift_passes_ass2() {
        // |b| = c x^{K-1} with c < (2-K)/2
        let k = 1.5;
        let c = 0.2;
        let model = CoefficientModel::power(k, k - 1.0 + 1e-9, c);
        let rep = check_hypotheses(&model, k, &SupGrid::default()).unwrap();
        assert!(rep.hyp_ass2, "{rep:?}");
        assert!((rep.eps0 - (2.0 - k - 2.0 * c)).abs() < 1e-6);
    }

    #[test]
    fn large_drift_fails_ass2() {
        let model = CoefficientModel::power(1.5, 0.5, 1.0);
        let rep = check_hypotheses(&model, 1.5, &SupGrid::default()).unwrap();
        assert!((rep.eps0 + 1.5).abs() < 1e-9, "{}", rep.eps0);
        assert!(!rep.hyp_ass2);
        // b/a = 1/x is not integrable either
        assert!(!rep.hyp_basic);
        let names: Vec<_> = rep.violations(&[Hypothesis::Basic, Hypothesis::Ass2]).into_iter().map(|v| v.0).collect();
        assert_eq!(names, vec![Hypothesis::Basic, Hypothesis::Ass2]);
    }

    #[test]
    fn unbounded_xb_over_a_fails_ass1_only_when_k_above_one() {
        let model = CoefficientModel::sum_power(vec![(1.0, 1.5)], vec![(0.1, 0.4)]);
        let rep = check_hypotheses(&model, 1.5, &SupGrid::default()).unwrap();
        assert!(rep.xb_over_a_sup.is_infinite());
        assert!(!rep.hyp_ass1);
        let model = CoefficientModel::sum_power(vec![(1.0, 0.5)], vec![(0.1, -0.4)]);
        let rep = check_hypotheses(&model, 0.5, &SupGrid::default()).unwrap();
        assert!(!rep.hyp_basic, "b is not continuous at 0");
    }

    #[test]
    fn sampled_nonintegrable_drift_detected() {
        let model = CoefficientModel::sum_power(vec![(1.0, 0.5)], vec![(1.0, -0.75)]);
        let rep = check_hypotheses(&model, 0.5, &SupGrid::default()).unwrap();
        assert!(!rep.drift_integrable);
        assert!(!rep.hyp_basic);
    }

    #[test]
    fn nondegenerate_fails_ass0() {
        let model = CoefficientModel::power(0.0, 0.0, 0.0);
        let rep = check_hypotheses(&model, 0.0, &SupGrid::default()).unwrap();
        assert_eq!(rep.classification, Classification::Nondegenerate);
        assert!(rep.hyp_basic && !rep.hyp_ass0 && !rep.hyp_ass1);
    }
}
