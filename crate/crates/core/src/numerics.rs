//! Scalar special functions and one-dimensional search primitives.
//!
//! Everything here is a pure function of its arguments.

use thiserror::Error;

/// Errors raised by the scalar primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("empty interval: lo = {lo} must be below hi = {hi}")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("no sign change of f - target on [{lo}, {hi}] (residuals {f_lo}, {f_hi})")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("invalid tolerance: abs_tol = {abs_tol}, max_iter = {max_iter}")]
    InvalidTolerance { abs_tol: f64, max_iter: usize },
}

/// Stopping rule shared by the interval searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    abs_tol: f64,
    max_iter: usize,
}

impl Tolerance {
    pub fn new(abs_tol: f64, max_iter: usize) -> Result<Self, NumericsError> {
        if !(abs_tol > 0.0) || !abs_tol.is_finite() || max_iter == 0 {
            return Err(NumericsError::InvalidTolerance { abs_tol, max_iter });
        }
        Ok(Self { abs_tol, max_iter })
    }

    /// Tolerance with enough iterations to shrink an interval of `width` to `abs_tol`.
    pub fn for_width(abs_tol: f64, width: f64) -> Result<Self, NumericsError> {
        let ratio = (width.abs() / abs_tol).max(1.0);
        // golden-section shrinks by 0.618 per step, bisection by 0.5
        let iters = (ratio.ln() / (1.0 / GOLDEN_RATIO).ln().abs()).ceil() as usize + 8;
        Self::new(abs_tol, iters.max(1))
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter
    }
}

/// Arguments beyond this magnitude saturate the Q-function to exactly 0 or 1.
pub const Q_SATURATION: f64 = 38.0;

const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Standard Gaussian upper-tail probability `Q(x) = P(Z > x)`.
pub fn q(x: f64) -> Result<f64, NumericsError> {
    if !x.is_finite() {
        return Err(NumericsError::NonFinite(x));
    }
    Ok(q_saturating(x))
}

/// Q-function for callers that may legitimately pass `±inf` (degenerate
/// variances). NaN propagates.
pub(crate) fn q_saturating(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > Q_SATURATION {
        return 0.0;
    }
    if x < -Q_SATURATION {
        return 1.0;
    }
    (0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)).clamp(0.0, 1.0)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Upper-tail probability of `N(0, sigma^2)` beyond `d`, i.e. `Q(d / sigma)`,
/// with `sigma == 0` treated as a point mass (0.5 at the atom).
pub(crate) fn gaussian_tail(d: f64, sigma: f64) -> f64 {
    if sigma > 0.0 {
        q_saturating(d / sigma)
    } else if d > 0.0 {
        0.0
    } else if d < 0.0 {
        1.0
    } else {
        0.5
    }
}

/// Outcome of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult {
    pub x: f64,
    pub value: f64,
    /// False when `max_iter` ran out before the interval reached `abs_tol`.
    pub converged: bool,
}

/// Maximize a unimodal `f` on `[lo, hi]` by golden-section search.
///
/// The bracket shrinks until its width is at most `tol.abs_tol()`; the
/// better of the two interior probes is returned. When `max_iter` runs out
/// the best point so far comes back with `converged == false`.
pub fn golden_section_max<F>(
    f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<SearchResult, NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::NonFinite(if lo.is_finite() { hi } else { lo }));
    }
    if lo >= hi {
        return Err(NumericsError::EmptyInterval { lo, hi });
    }
    let inv_phi = 1.0 / GOLDEN_RATIO;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while b - a > tol.abs_tol {
        if iter >= tol.max_iter {
            let (x, value) = if f2 >= f1 { (x2, f2) } else { (x1, f1) };
            return Ok(SearchResult { x, value, converged: false });
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        iter += 1;
    }
    let (x, value) = if f2 >= f1 { (x2, f2) } else { (x1, f1) };
    Ok(SearchResult { x, value, converged: true })
}

/// Shrink `[lo, hi]` around the crossing of a monotone `f` with `target`.
///
/// Returns the final bracket `(lo, hi)`; `f(lo) - target` keeps the sign it
/// had at the original `lo` end. Useful when the caller needs to stay on one
/// side of the root.
pub fn bisect_bracket<F>(
    f: F,
    target: f64,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<(f64, f64), NumericsError>
where
    F: Fn(f64) -> f64,
{
    if !lo.is_finite() || !hi.is_finite() {
        return Err(NumericsError::NonFinite(if lo.is_finite() { hi } else { lo }));
    }
    if lo >= hi {
        return Err(NumericsError::EmptyInterval { lo, hi });
    }
    let f_lo = f(lo) - target;
    let f_hi = f(hi) - target;
    if f_lo == 0.0 {
        return Ok((lo, lo));
    }
    if f_hi == 0.0 {
        return Ok((hi, hi));
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(NumericsError::NoBracket { lo, hi, f_lo, f_hi });
    }
    let lo_sign = f_lo.signum();
    let (mut a, mut b) = (lo, hi);
    let mut iter = 0;
    while b - a > tol.abs_tol && iter < tol.max_iter {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let r = f(mid) - target;
        if r == 0.0 {
            return Ok((mid, mid));
        }
        if r.signum() == lo_sign {
            a = mid;
        } else {
            b = mid;
        }
        iter += 1;
    }
    Ok((a, b))
}

/// Solve `f(x) = target` for monotone `f` by bisection; returns the midpoint
/// of the final bracket.
pub fn bisect_monotone<F>(
    f: F,
    target: f64,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (a, b) = bisect_bracket(f, target, lo, hi, tol)?;
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Gaussian tail by composite Gauss-Legendre quadrature on [x, x + 40];
    /// independent of erfc.
    fn tail_by_quadrature(x: f64) -> f64 {
        // 5-point Gauss-Legendre nodes/weights on [-1, 1]
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
            0.236_926_885_056_189_08,
        ];
        let (a, b) = (x, x + 40.0);
        let panels = 4000;
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for k in 0..panels {
            let mid = a + (k as f64 + 0.5) * h;
            for (t, w) in NODES.iter().zip(WEIGHTS) {
                sum += w * normal_pdf(mid + 0.5 * h * t);
            }
        }
        sum * 0.5 * h
    }

    #[test]
    fn q_known_values() {
        assert_eq!(q(0.0).unwrap(), 0.5);
        assert!((q(2.0).unwrap() - 0.022_750_1).abs() < 1e-7);
        assert!((q(-3.0).unwrap() - 0.998_650_1).abs() < 1e-7);
    }

    #[test]
    fn q_matches_quadrature() {
        for i in 0..=64 {
            let x = -8.0 + 0.25 * i as f64;
            let oracle = if x >= 0.0 {
                tail_by_quadrature(x)
            } else {
                1.0 - tail_by_quadrature(-x)
            };
            let got = q(x).unwrap();
            assert!(
                ((got - oracle) / oracle).abs() <= 1e-12,
                "x = {x}: {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn q_rejects_non_finite() {
        assert!(matches!(q(f64::NAN), Err(NumericsError::NonFinite(_))));
        assert!(q(f64::INFINITY).is_err());
    }

    #[test]
    fn q_saturates() {
        assert_eq!(q(39.0).unwrap(), 0.0);
        assert_eq!(q(-39.0).unwrap(), 1.0);
        assert!(q(37.0).unwrap() > 0.0);
    }

    #[test]
    fn gaussian_tail_degenerate_is_step() {
        assert_eq!(gaussian_tail(1.0, 0.0), 0.0);
        assert_eq!(gaussian_tail(-1.0, 0.0), 1.0);
        assert_eq!(gaussian_tail(0.0, 0.0), 0.5);
    }

    #[test]
    fn golden_quadratic_vertex() {
        let tol = Tolerance::new(1e-6, 200).unwrap();
        let r = golden_section_max(|x| -(x - 1.0) * (x - 1.0), 0.0, 2.0, tol).unwrap();
        assert!((r.x - 1.0).abs() <= 1e-6);
        assert!(r.converged);
        assert_eq!(r.value, -(r.x - 1.0) * (r.x - 1.0));
    }

    #[test]
    fn golden_monotone_endpoint() {
        let tol = Tolerance::new(1e-6, 200).unwrap();
        let r = golden_section_max(|x| x, 0.0, 1.0, tol).unwrap();
        assert!((r.x - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn golden_sine_matches_dense_grid() {
        // dense grid oracle, then local refinement of the grid winner
        let n = 300_000;
        let (mut best_x, mut best_f) = (0.0, f64::MIN);
        for k in 0..=n {
            let x = 3.0 * k as f64 / n as f64;
            if x.sin() > best_f {
                best_f = x.sin();
                best_x = x;
            }
        }
        assert!((best_x - std::f64::consts::FRAC_PI_2).abs() < 1e-5);
        let tol = Tolerance::new(1e-8, 200).unwrap();
        let r = golden_section_max(f64::sin, 0.0, 3.0, tol).unwrap();
        assert!((r.x - std::f64::consts::FRAC_PI_2).abs() <= 1e-8);
        assert!(r.value >= best_f - 1e-15);
    }

    #[test]
    fn golden_rejects_empty_interval() {
        let tol = Tolerance::new(1e-6, 10).unwrap();
        assert!(matches!(
            golden_section_max(|x| x, 1.0, 1.0, tol),
            Err(NumericsError::EmptyInterval { .. })
        ));
    }

    #[test]
    fn golden_flags_iteration_cap() {
        let tol = Tolerance::new(1e-12, 3).unwrap();
        let r = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, tol).unwrap();
        assert!(!r.converged);
        assert!(r.x > 0.0 && r.x < 1.0);
    }

    #[test]
    fn bisect_examples() {
        let tol = Tolerance::new(1e-10, 200).unwrap();
        assert!((bisect_monotone(|x| x, 0.5, 0.0, 1.0, tol).unwrap() - 0.5).abs() <= 1e-10);
        assert!((bisect_monotone(|x| 2.0 * x - 1.0, 0.0, 0.0, 1.0, tol).unwrap() - 0.5).abs() <= 1e-10);
        let root = bisect_monotone(|x| q(x).unwrap(), 0.022_750_131_948_179_2, 0.0, 8.0, tol).unwrap();
        assert!((root - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn bisect_requires_sign_change() {
        let tol = Tolerance::new(1e-10, 200).unwrap();
        assert!(matches!(
            bisect_monotone(|x| x, 5.0, 0.0, 1.0, tol),
            Err(NumericsError::NoBracket { .. })
        ));
    }

    #[test]
    fn bisect_bracket_keeps_lo_side() {
        let tol = Tolerance::new(1e-9, 200).unwrap();
        let (a, b) = bisect_bracket(|x| -x, -0.25, 0.0, 1.0, tol).unwrap();
        // f(a) - target = 0.25 - a stays positive on the returned lower end
        assert!(0.25 - a >= 0.0);
        assert!(b - a <= 1e-9);
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(0.0, 10).is_err());
        assert!(Tolerance::new(1e-3, 0).is_err());
        assert!(Tolerance::new(f64::NAN, 3).is_err());
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn q_symmetry(x in -40.0f64..40.0) {
                let s = q(x).unwrap() + q(-x).unwrap();
                prop_assert!((s - 1.0).abs() <= 1e-12);
            }

            #[test]
            fn q_decreasing(x in -5.0f64..9.0, dx in 1e-3f64..1.0) {
                prop_assert!(q(x + dx).unwrap() < q(x).unwrap());
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(1000))]
            #[test]
            fn golden_recovers_concave_quadratic_vertex(
                vertex in -50.0f64..50.0,
                curvature in 0.01f64..100.0,
                left in 0.1f64..20.0,
                right in 0.1f64..20.0,
            ) {
                let tol = Tolerance::new(1e-7, 500).unwrap();
                let r = golden_section_max(
                    |x| -curvature * (x - vertex) * (x - vertex),
                    vertex - left,
                    vertex + right,
                    tol,
                ).unwrap();
                prop_assert!((r.x - vertex).abs() <= 1e-7);
            }
        }
    }
}
