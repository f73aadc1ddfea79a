//! Young's inequality, the Δ2 constant, dominance ratios and the linear
//! truncation near zero.

use std::sync::Arc;

use serde::Serialize;

use super::{log_grid, Family, NFunctionSpec};
use crate::error::{Error, Result};

/// Sampled Δ2 evidence: `constant` is the largest M(2t)/M(t) seen on
/// `[lower, upper]`, attained at `argmax`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Delta2Estimate {
    pub constant: f64,
    pub lower: f64,
    pub upper: f64,
    pub argmax: f64,
}

/// Output of [`NFunctionSpec::growth_estimate_keps`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KEpsEstimate {
    pub k_eps: f64,
    /// First grid point where h(t) ≤ g(t)/(2ε).
    pub t0: f64,
    pub probe_points: usize,
    /// max over the probe grid of lhs − rhs (non-positive when the
    /// estimate holds).
    pub worst_excess: f64,
}

const DELTA2_SAMPLES: usize = 1000;
const TRUNCATION_GRID: usize = 241;

impl NFunctionSpec {
    /// M(t) + M̄(s) − st.
    ///
    /// Written as (M(t) − M(t̂)) − s(t − t̂) with t̂ = m̄(s), which is the same
    /// quantity because M̄(s) = s t̂ − M(t̂), and loses no digits to
    /// cancellation near the equality case.
    pub fn young_gap(&self, s: f64, t: f64) -> Result<f64> {
        self.check_arg(t, "young gap argument t")?;
        let conj_cap = self.density_raw(self.cap);
        if !(s >= 0.0) || s > conj_cap * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Range { what: "young gap argument s", value: s, cap: conj_cap });
        }
        let t_hat = self.generalized_inverse_density(s);
        Ok(self.increment(t_hat, t) - s * (t - t_hat))
    }

    /// sup of M(2t)/M(t) over `DELTA2_SAMPLES` log-spaced points of
    /// [max(t0, 1e-6), upper].
    pub fn delta2_constant(&self, t0: f64, upper: f64) -> Result<Delta2Estimate> {
        if !(t0 >= 0.0 && upper > t0) {
            return Err(Error::Invalid(format!("delta2 range needs 0 <= t0 < T, got [{t0}, {upper}]")));
        }
        if 2.0 * upper > self.cap * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Range { what: "delta2 horizon (2T)", value: 2.0 * upper, cap: self.cap });
        }
        let lower = t0.max(1e-6).min(upper);
        let mut best = Delta2Estimate { constant: 0.0, lower, upper, argmax: lower };
        for t in log_grid(lower, upper, DELTA2_SAMPLES) {
            let m = self.eval_raw(t);
            if !(m > 0.0) {
                return Err(Error::Degenerate(format!("M vanishes at t = {t} on the delta2 grid")));
            }
            let ratio = self.eval_raw(2.0 * t) / m;
            if ratio > best.constant {
                best.constant = ratio;
                best.argmax = t;
            }
        }
        Ok(best)
    }

    /// other(λT) / self(T).
    pub fn dominance_ratio(&self, other: &NFunctionSpec, lambda: f64, horizon: f64) -> Result<f64> {
        if !(lambda > 0.0 && horizon > 0.0) {
            return Err(Error::Invalid("dominance ratio needs positive lambda and horizon".into()));
        }
        let den = self.eval(horizon)?;
        let num = other.eval(lambda * horizon)?;
        Ok(num / den)
    }

    /// Smallest p̂ with M̄(m(t)) ≤ (p̂ − 1) M(t) on a log grid over [lo, hi].
    pub fn conjugate_index(&self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::Invalid(format!("index range must satisfy 0 < lo < hi, got [{lo}, {hi}]")));
        }
        self.check_arg(hi, "index horizon")?;
        let conj = self.conjugate();
        let mut worst: f64 = 0.0;
        for t in log_grid(lo, hi, DELTA2_SAMPLES) {
            let big = self.eval_raw(t);
            if !(big > 0.0) {
                return Err(Error::Degenerate(format!("M vanishes at t = {t}")));
            }
            worst = worst.max(conj.eval_raw(self.density_raw(t)) / big);
        }
        Ok(1.0 + worst)
    }

    /// M₁: linear with slope M(α)/α on [0, α], equal to M beyond, where α
    /// is the crossing of M(t) = t (α = 1 when M(1) ≤ 1).
    pub fn young_truncation(&self) -> Result<NFunctionSpec> {
        let top = self.cap.min(1.0);
        let below = |t: f64| self.eval_raw(t) <= t;
        let alpha = if below(top) {
            top
        } else {
            let grid = log_grid(1e-12 * top, top, TRUNCATION_GRID);
            let idx = grid
                .iter()
                .rposition(|&t| below(t))
                .ok_or_else(|| Error::Degenerate("M(t) > t on the whole probe grid; no crossing found".into()))?;
            let (mut lo, mut hi) = (grid[idx], grid[idx + 1]);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if below(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let slope = self.eval_raw(alpha) / alpha;
        let family = Family::Truncated { base: Arc::new(self.clone()), alpha, slope };
        Ok(NFunctionSpec::from_family(family, self.cap))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_square() -> NFunctionSpec {
        NFunctionSpec::power(2.0).unwrap().with_scale(0.5).unwrap()
    }

    #[test]
    fn young_gap_examples() {
        let m = half_square();
        assert_eq!(m.young_gap(0.0, 0.0).unwrap(), 0.0);
        assert!(m.young_gap(3.0, 3.0).unwrap().abs() < 1e-12);
        assert!((m.young_gap(1.0, 3.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn delta2_for_powers() {
        for p in [1.5, 2.0, 3.7] {
            let m = NFunctionSpec::power(p).unwrap();
            let d = m.delta2_constant(0.0, 1e3).unwrap();
            assert!((d.constant - 2f64.powf(p)).abs() < 1e-12 * 2f64.powf(p));
        }
    }

    #[test]
    fn delta2_exp_quad_grows_with_horizon() {
        let m = NFunctionSpec::exp_quad();
        let ks: Vec<f64> = [1.0, 2.0, 5.0, 10.0].iter().map(|&t| m.delta2_constant(0.0, t).unwrap().constant).collect();
        assert!(ks.windows(2).all(|w| w[1] > w[0]), "{ks:?}");
        assert!(ks[3] > 1e100);
    }

    #[test]
    fn dominance_examples() {
        let p3 = NFunctionSpec::power(3.0).unwrap();
        let p2 = NFunctionSpec::power(2.0).unwrap();
        assert!((p3.dominance_ratio(&p2, 1.0, 100.0).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(p2.dominance_ratio(&p2, 1.0, 37.0).unwrap(), 1.0);
        let e = NFunctionSpec::exp_quad();
        let p4 = NFunctionSpec::power(4.0).unwrap();
        assert!(e.dominance_ratio(&p4, 2.0, 10.0).unwrap() < 1e-30);
    }

    #[test]
    fn truncation_of_powers() {
        for p in [2.0, 3.0] {
            let m1 = NFunctionSpec::power(p).unwrap().young_truncation().unwrap();
            let (alpha, slope) = m1.truncation_parameters().unwrap();
            assert_eq!(alpha, 1.0);
            assert_eq!(slope, 1.0);
            assert!((m1.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
            assert!((m1.eval(2.0).unwrap() - 2f64.powf(p)).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_crossing_below_one() {
        // M(t) = 4t², crossing at 1/4
        let m = NFunctionSpec::power(2.0).unwrap().with_scale(4.0).unwrap();
        let m1 = m.young_truncation().unwrap();
        let (alpha, slope) = m1.truncation_parameters().unwrap();
        assert!((alpha - 0.25).abs() < 1e-14);
        assert!((slope - 1.0).abs() < 1e-12);
        let left = m1.eval(alpha * (1.0 - 1e-12)).unwrap();
        let right = m1.eval(alpha * (1.0 + 1e-12)).unwrap();
        assert!((left - right).abs() < 1e-11);
    }

    #[test]
    fn conjugate_index_for_half_powers() {
        for p in [1.5, 2.0, 3.0] {
            let m = NFunctionSpec::power(p).unwrap().with_scale(1.0 / p).unwrap();
            let idx = m.conjugate_index(1e-3, 1e3).unwrap();
            assert!((idx - p).abs() < 1e-6, "p={p} idx={idx}");
        }
    }
}
