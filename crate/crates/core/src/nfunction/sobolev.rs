//! Integrability conditions, the Sobolev conjugate M* and the K_ε growth
//! estimate for it.

use std::sync::Arc;

use serde::Serialize;

use super::{log_grid, DensityTable, Family, KEpsEstimate, NFunctionSpec};
use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, integrate_dyadic, integrate_to_zero};

/// Evidence for the two integrability conditions on g(τ) = M⁻¹(τ)/τ^{(N+s)/N}.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Integrability {
    /// ∫₀¹ g.
    pub near_zero: f64,
    /// ∫₁^{τ_max} g.
    pub tail: f64,
    pub tau_max: f64,
    /// Log-log slope of g over [τ_max/10, τ_max].
    pub tail_exponent: f64,
    /// The tail integral keeps growing (exponent ≥ −1).
    pub tail_diverges: bool,
}

const GRID_PER_DECADE: f64 = 40.0;
const ZERO_TOL: f64 = 1e-10;
const KEPS_POINTS: usize = 1000;

fn validate_dim(n: usize, s: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Invalid(format!("s must lie in (0, 1), got {s}")));
    }
    Ok(())
}

impl NFunctionSpec {
    fn sobolev_integrand(&self, n: usize, s: f64) -> impl Fn(f64) -> f64 + '_ {
        let exponent = 1.0 + s / n as f64;
        move |tau: f64| self.inverse_raw(tau) / tau.powf(exponent)
    }

    /// Near-zero and tail integrals of M⁻¹(τ)/τ^{(N+s)/N}.
    ///
    /// A near-zero integral that does not settle under dyadic refinement
    /// is returned as a divergence error.
    pub fn check_integrability(&self, n: usize, s: f64, tau_max: f64) -> Result<Integrability> {
        validate_dim(n, s)?;
        let top = self.range_max();
        if !(tau_max > 1.0) || tau_max > top {
            return Err(Error::Range { what: "integrability horizon", value: tau_max, cap: top });
        }
        let g = self.sobolev_integrand(n, s);
        let near_zero = integrate_to_zero(&g, 1.0, ZERO_TOL)?.value;
        let tail = integrate_dyadic(&g, 1.0, tau_max);
        let lo = tau_max / 10.0;
        let tail_exponent = (g(tau_max).ln() - g(lo).ln()) / 10f64.ln();
        Ok(Integrability { near_zero, tail, tau_max, tail_exponent, tail_diverges: tail_exponent >= -1.0 - 1e-9 })
    }

    /// Tabulate M* through M*⁻¹(t) = ∫₀ᵗ M⁻¹(τ)/τ^{(N+s)/N} dτ.
    ///
    /// The table stores the density m*(x) = t^{(N+s)/N}/M⁻¹(t) at the knots
    /// x = M*⁻¹(t) of a log-spaced t grid.
    pub fn sobolev_conjugate(&self, n: usize, s: f64) -> Result<NFunctionSpec> {
        validate_dim(n, s)?;
        let top = self.range_max().min(1e12);
        if !(top > 1.0) {
            return Err(Error::Precondition("M must exceed 1 on its trusted range".into()));
        }
        let info = match self.check_integrability(n, s, top) {
            Ok(info) => info,
            Err(Error::Divergence(report)) => {
                return Err(Error::Precondition(format!("near-zero integrability fails: {report}")));
            }
            Err(e) => return Err(e),
        };
        if !info.tail_diverges {
            return Err(Error::Precondition(format!(
                "tail integral converges (integrand exponent {:.4} < -1)",
                info.tail_exponent
            )));
        }
        let bottom = 1e-12_f64.min(top * 1e-6);
        let decades = (top / bottom).log10();
        let count = (decades * GRID_PER_DECADE).ceil() as usize + 1;
        let ts = log_grid(bottom, top, count);
        let g = self.sobolev_integrand(n, s);
        let mut xs = Vec::with_capacity(ts.len());
        let mut x = integrate_to_zero(&g, ts[0], ZERO_TOL)?.value;
        xs.push(x);
        for w in ts.windows(2) {
            x += gauss_legendre(&g, w[0], w[1]);
            xs.push(x);
        }
        let ms: Vec<f64> = ts.iter().map(|&t| 1.0 / g(t)).collect();
        let table = DensityTable::new(&xs, &ms)?;
        let cap = table.last_knot();
        Ok(NFunctionSpec::from_family(Family::Tabulated(Arc::new(table)), cap))
    }

    /// Least-squares slope of ln M against ln t over `samples` log-spaced
    /// points of [lo, hi].
    pub fn log_log_slope(&self, lo: f64, hi: f64, samples: usize) -> Result<f64> {
        if !(lo > 0.0 && hi > lo) || samples < 2 {
            return Err(Error::Invalid("slope fit needs 0 < lo < hi and at least two samples".into()));
        }
        self.check_arg(hi, "slope fit horizon")?;
        let pts: Vec<(f64, f64)> = log_grid(lo, hi, samples).into_iter().map(|t| (t.ln(), self.eval_raw(t).ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Ok(sxy / sxx)
    }

    /// K_ε for [M*(t)]^{(N−s)/N} ≤ M*(t)/(2ε) + (K_ε/ε) t, with `self` = M*.
    ///
    /// With h(t) = M*(t)^{(N−s)/N}/t and g(t) = M*(t)/t, t₀ is the first point
    /// of a uniform grid on (0, t_probe] where h ≤ g/(2ε), and
    /// K_ε = ε sup_{t ≤ t₀} h. The inequality is then re-checked on the whole grid.
    pub fn growth_estimate_keps(&self, eps: f64, n: usize, s: f64, t_probe: f64) -> Result<KEpsEstimate> {
        validate_dim(n, s)?;
        if !(eps > 0.0) {
            return Err(Error::Invalid(format!("epsilon must be positive, got {eps}")));
        }
        self.check_arg(t_probe, "growth probe horizon")?;
        let power = (n as f64 - s) / n as f64;
        let grid: Vec<f64> = (1..=KEPS_POINTS).map(|k| t_probe * k as f64 / KEPS_POINTS as f64).collect();
        let h = |t: f64| self.eval_raw(t).powf(power) / t;
        let g = |t: f64| self.eval_raw(t) / t;
        let Some(i0) = grid.iter().position(|&t| h(t) <= g(t) / (2.0 * eps)) else {
            let t = *grid.last().unwrap_or(&t_probe);
            return Err(Error::Degenerate(format!(
                "h(t) > g(t)/(2 eps) on the whole probe grid (largest violating t = {t})"
            )));
        };
        let t0 = grid[i0];
        let k_eps = eps * grid[..=i0].iter().map(|&t| h(t)).fold(0.0, f64::max);
        let worst_excess = grid
            .iter()
            .map(|&t| {
                let big = self.eval_raw(t);
                big.powf(power) - (big / (2.0 * eps) + k_eps / eps * t)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if worst_excess > 1e-12 {
            let bad = grid
                .iter()
                .copied()
                .filter(|&t| {
                    let big = self.eval_raw(t);
                    big.powf(power) > big / (2.0 * eps) + k_eps / eps * t + 1e-12
                })
                .fold(0.0, f64::max);
            return Err(Error::Degenerate(format!("growth estimate fails up to t = {bad}")));
        }
        Ok(KEpsEstimate { k_eps, t0, probe_points: grid.len(), worst_excess })
    }
}
