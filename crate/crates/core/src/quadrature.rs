//! One-dimensional quadrature: Gauss-Legendre panels and geometric
//! grading toward an endpoint singularity.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(16))
}

fn gl4() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(4))
}

fn panel(rule: &(Vec<f64>, Vec<f64>), f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// 16-point Gauss-Legendre panel on [a, b].
pub fn gauss_legendre(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    panel(gl16(), &mut f, a, b)
}

/// 4-point Gauss-Legendre panel on [a, b].
pub fn gauss_legendre4(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    panel(gl4(), &mut f, a, b)
}

/// Result of [`integrate_to_zero`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradedIntegral {
    pub value: f64,
    pub levels: usize,
    /// Ratio of the last two dyadic pieces; below one for an integrable
    /// endpoint singularity.
    pub decay_ratio: f64,
}

const MAX_LEVELS: usize = 1000;
/// Pieces shrinking by less than this relative amount per level count as
/// not decaying (an exponent within ~1.4e-3 of -1 is treated as divergent).
const DECAY_MARGIN: f64 = 1e-3;

/// Integrate `f` over (0, b] with pieces [b/2^(k+1), b/2^k].
///
/// The remainder below the last piece is estimated as a geometric tail.
/// Stops once successive tail-corrected estimates differ by less than
/// `rel_tol` relative; pieces that stop shrinking are reported as a
/// divergence.
pub fn integrate_to_zero(mut f: impl FnMut(f64) -> f64, b: f64, rel_tol: f64) -> Result<GradedIntegral> {
    let mut partial = 0.0;
    let mut prev_piece = f64::NAN;
    let mut prev_estimate = f64::NAN;
    let mut non_decay_run = 0usize;
    let mut history: Vec<f64> = Vec::new();
    let mut hi = b;
    for level in 0..MAX_LEVELS {
        let lo = 0.5 * hi;
        let piece = gauss_legendre(&mut f, lo, hi);
        if !piece.is_finite() {
            return Err(Error::divergence(
                "endpoint integral",
                &[lo],
                &history,
                "non-finite integrand near the endpoint",
            ));
        }
        partial += piece;
        let ratio = if prev_piece.is_nan() || prev_piece == 0.0 { f64::NAN } else { piece / prev_piece };
        let estimate = if ratio.is_finite() && (0.0..1.0).contains(&ratio) {
            partial + piece * ratio / (1.0 - ratio)
        } else {
            partial
        };
        if history.len() >= 8 {
            history.remove(0);
        }
        history.push(estimate);
        if piece == 0.0 && level > 0 {
            return Ok(GradedIntegral { value: partial, levels: level + 1, decay_ratio: 0.0 });
        }
        if ratio.is_finite() && ratio >= 1.0 - DECAY_MARGIN {
            non_decay_run += 1;
        } else {
            non_decay_run = 0;
        }
        if non_decay_run >= 8 {
            return Err(Error::divergence(
                "endpoint integral",
                &[lo],
                &history,
                format!("dyadic pieces stopped shrinking (ratio {ratio:.6})"),
            ));
        }
        if level >= 4
            && ratio.is_finite()
            && ratio < 1.0 - DECAY_MARGIN
            && (estimate - prev_estimate).abs() <= rel_tol * estimate.abs()
        {
            return Ok(GradedIntegral { value: estimate, levels: level + 1, decay_ratio: ratio });
        }
        prev_piece = piece;
        prev_estimate = estimate;
        hi = lo;
        if hi < f64::MIN_POSITIVE * 1e10 {
            break;
        }
    }
    Err(Error::divergence(
        "endpoint integral",
        &[hi],
        &history,
        "refinement cap reached without convergence",
    ))
}

/// Integrate `f` over [a, b] (0 < a < b) with dyadic panels [a 2^k, a 2^(k+1)].
pub fn integrate_dyadic(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b >= a);
    let mut total = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (2.0 * lo).min(b);
        total += gauss_legendre(&mut f, lo, hi);
        lo = hi;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre_rule(5);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m8: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((m8 - 2.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn gl16_sine() {
        let v = gauss_legendre(|x| x.sin(), 0.0, std::f64::consts::PI);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn graded_power_singularity() {
        // integral of t^-0.75 over (0, 1] is 4
        let r = integrate_to_zero(|t| t.powf(-0.75), 1.0, 1e-10).unwrap();
        assert!((r.value - 4.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn graded_detects_log_divergence() {
        assert!(matches!(integrate_to_zero(|t| 1.0 / t, 1.0, 1e-10), Err(Error::Divergence(_))));
        assert!(matches!(integrate_to_zero(|t| t.powf(-1.2), 1.0, 1e-10), Err(Error::Divergence(_))));
    }

    #[test]
    fn dyadic_panels() {
        let v = integrate_dyadic(|t| t.powf(-0.75), 1.0, 1000.0);
        let exact = 4.0 * (1000f64.powf(0.25) - 1.0);
        assert!((v - exact).abs() < 1e-10 * exact);
    }
}
