//! Gauss–Legendre rules, adaptive integration and the dyadic tail test used
//! for integrability checks near the degenerate endpoint.

use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 4-point rule (element interiors).
    pub fn four() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(4))
    }

    /// Shared 16-point rule (graded first element, dyadic tail pieces).
    pub fn sixteen() -> &'static GaussLegendre {
        static RULE: OnceLock<GaussLegendre> = OnceLock::new();
        RULE.get_or_init(|| GaussLegendre::new(16))
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Maps the rule onto `[a, b]`, returning `(x, w)` pairs.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, w * half))
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive bisection on a 16-point Gauss rule. Returns the integral and a
/// flag telling whether the tolerance was met within the depth limit.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> (f64, bool) {
    let rule = GaussLegendre::sixteen();
    let whole = rule.integrate(f, a, b);
    adaptive_rec(f, rule, a, b, whole, rel_tol, abs_tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec<F: Fn(f64) -> f64>(
    f: &F,
    rule: &GaussLegendre,
    a: f64,
    b: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: usize,
) -> (f64, bool) {
    let m = 0.5 * (a + b);
    let left = rule.integrate(f, a, m);
    let right = rule.integrate(f, m, b);
    let refined = left + right;
    let err = (refined - whole).abs();
    if err <= abs_tol.max(rel_tol * refined.abs()) || !err.is_finite() {
        return (refined, err.is_finite());
    }
    if depth >= 40 {
        return (refined, false);
    }
    let (l, okl) = adaptive_rec(f, rule, a, m, left, rel_tol, 0.5 * abs_tol, depth + 1);
    let (r, okr) = adaptive_rec(f, rule, m, b, right, rel_tol, 0.5 * abs_tol, depth + 1);
    (l + r, okl && okr)
}

/// `∫_lo^hi f` for `0 < lo < hi`, integrating in the logarithmic variable so
/// power-type behaviour near 0 becomes smooth.
pub fn log_adaptive<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, rel_tol: f64) -> (f64, bool) {
    if lo == hi {
        return (0.0, true);
    }
    let g = |u: f64| {
        let x = u.exp();
        f(x) * x
    };
    adaptive(&g, lo.ln(), hi.ln(), rel_tol, 1e-300)
}

/// Outcome of the dyadic tail test for `∫_0^upper f`.
#[derive(Debug, Clone)]
pub struct TailIntegral {
    /// Estimate of `∫_0^upper f` (partial sums plus the extrapolated tail).
    pub value: f64,
    /// Partial sums `∫_{upper 2^{-m}}^{upper} f`, index `m`.
    pub partial: Vec<f64>,
    pub converged: bool,
}

/// Maximum dyadic depth of the tail test.
pub const TAIL_DEPTH: usize = 40;

/// Integrates `f` over `(0, upper]` as a sum of dyadic pieces
/// `[upper 2^{-m-1}, upper 2^{-m}]`, m = 0..40.
///
/// The sum is accepted when the Cauchy criterion `|d_m| < 1e-10 |S_m|` holds,
/// or when the last pieces contract geometrically with a stable ratio
/// `r < 1 - 1e-3`, in which case the remaining tail `d r / (1 - r)` is added.
pub fn dyadic_tail<F: Fn(f64) -> f64>(f: &F, upper: f64) -> TailIntegral {
    let rule = GaussLegendre::sixteen();
    let mut partial = Vec::with_capacity(TAIL_DEPTH + 1);
    let mut pieces = Vec::with_capacity(TAIL_DEPTH + 1);
    let mut sum = 0.0;
    partial.push(0.0);
    let mut hi = upper;
    for _ in 0..=TAIL_DEPTH {
        let lo = 0.5 * hi;
        // one level of splitting keeps 16 points accurate on a ratio-2 interval
        let d = rule.integrate(f, lo, 0.75 * hi) + rule.integrate(f, 0.75 * hi, hi);
        sum += d;
        pieces.push(d);
        partial.push(sum);
        if !sum.is_finite() {
            return TailIntegral { value: sum, partial, converged: false };
        }
        if d.abs() < 1e-10 * sum.abs() || (d == 0.0 && sum == 0.0) {
            return TailIntegral { value: sum, partial, converged: true };
        }
        hi = lo;
    }
    // geometric contraction of the last pieces
    let tail: Vec<f64> = pieces[pieces.len() - 6..].to_vec();
    let ratios: Vec<f64> = tail
        .windows(2)
        .map(|w| if w[0] != 0.0 { (w[1] / w[0]).abs() } else { f64::INFINITY })
        .collect();
    let rmax = ratios.iter().cloned().fold(0.0, f64::max);
    let rmin = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let same_sign = tail.iter().all(|d| d.signum() == tail[0].signum());
    if same_sign && rmax < 1.0 - 1e-3 && rmax - rmin < 1e-2 {
        let r = *ratios.last().unwrap();
        let last = *pieces.last().unwrap();
        let value = sum + last * r / (1.0 - r);
        TailIntegral { value, partial, converged: true }
    } else {
        TailIntegral { value: sum, partial, converged: false }
    }
}
