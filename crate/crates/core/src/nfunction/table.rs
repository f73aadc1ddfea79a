//! Sampled monotone densities, interpolated shape-preservingly in
//! log-log coordinates.

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// A non-decreasing density m sampled at knots t_0 < ... < t_n.
///
/// Between knots ln m is a monotone (Fritsch-Carlson / PCHIP) cubic in
/// ln t, so power laws are reproduced exactly. Below the first knot m is
/// continued as a power law through the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityTable {
    ln_t: Vec<f64>,
    ln_m: Vec<f64>,
    slopes: Vec<f64>,
    cumulative: Vec<f64>,
    head_exponent: f64,
}

impl DensityTable {
    /// Build from samples; a leading `t = 0` knot (with `m = 0`) is accepted
    /// and dropped.
    pub fn new(ts: &[f64], ms: &[f64]) -> Result<Self> {
        if ts.len() != ms.len() {
            return Err(Error::Invalid("density table columns differ in length".into()));
        }
        let mut pairs: Vec<(f64, f64)> = ts.iter().copied().zip(ms.iter().copied()).collect();
        if let Some(&(t0, m0)) = pairs.first() {
            if t0 == 0.0 {
                if m0 != 0.0 {
                    return Err(Error::Invalid(format!("density at t = 0 must be 0, got {m0}")));
                }
                pairs.remove(0);
            }
        }
        if pairs.len() < 2 {
            return Err(Error::Invalid("density table needs at least two positive knots".into()));
        }
        for w in pairs.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Invalid(format!("knots not strictly increasing at t = {}", w[1].0)));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::Invalid(format!("density decreases at t = {}", w[1].0)));
            }
        }
        for &(t, m) in &pairs {
            if !(t.is_finite() && m.is_finite() && t > 0.0 && m > 0.0) {
                return Err(Error::Invalid(format!("density must be finite and positive for t > 0 (t = {t}, m = {m})")));
            }
        }
        let ln_t: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
        let ln_m: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
        let slopes = pchip_slopes(&ln_t, &ln_m);
        let first_secant = (ln_m[1] - ln_m[0]) / (ln_t[1] - ln_t[0]);
        let head_exponent = if first_secant > 0.0 { first_secant } else { 1.0 };
        let mut table = DensityTable { ln_t, ln_m, slopes, cumulative: Vec::new(), head_exponent };
        let t0 = pairs[0].0;
        let mut cumulative = Vec::with_capacity(pairs.len());
        cumulative.push(pairs[0].1 * t0 / (head_exponent + 1.0));
        for k in 0..pairs.len() - 1 {
            let piece = table.segment_integral(k, table.ln_t[k + 1]);
            cumulative.push(cumulative[k] + piece);
        }
        table.cumulative = cumulative;
        Ok(table)
    }

    pub fn first_knot(&self) -> f64 {
        self.ln_t[0].exp()
    }

    pub fn last_knot(&self) -> f64 {
        self.ln_t[self.ln_t.len() - 1].exp()
    }

    pub fn len(&self) -> usize {
        self.ln_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_t.is_empty()
    }

    /// Knot abscissae and density values.
    pub fn knots(&self) -> (Vec<f64>, Vec<f64>) {
        (self.ln_t.iter().map(|x| x.exp()).collect(), self.ln_m.iter().map(|y| y.exp()).collect())
    }

    fn locate(&self, x: f64) -> usize {
        // index k with ln_t[k] <= x < ln_t[k+1], clamped to the last segment
        let n = self.ln_t.len();
        match self.ln_t.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(k) => k.min(n - 2),
            Err(k) => k.saturating_sub(1).min(n - 2),
        }
    }

    fn hermite(&self, k: usize, x: f64) -> f64 {
        let h = self.ln_t[k + 1] - self.ln_t[k];
        let u = (x - self.ln_t[k]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.ln_m[k] + h10 * h * self.slopes[k] + h01 * self.ln_m[k + 1] + h11 * h * self.slopes[k + 1]
    }

    fn segment_integral(&self, k: usize, x_end: f64) -> f64 {
        // integral of m(t) dt = exp(ln m + ln t) d(ln t)
        gauss_legendre(|x| (self.hermite(k, x) + x).exp(), self.ln_t[k], x_end)
    }

    /// Interpolated density; `t` must lie in [0, last_knot].
    pub fn density(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t.ln();
        if x <= self.ln_t[0] {
            return (self.ln_m[0] + self.head_exponent * (x - self.ln_t[0])).exp();
        }
        let k = self.locate(x);
        self.hermite(k, x).exp()
    }

    /// Integral of the density over [0, t].
    pub fn integral(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let x = t.ln();
        if x <= self.ln_t[0] {
            return self.density(t) * t / (self.head_exponent + 1.0);
        }
        let k = self.locate(x);
        if x == self.ln_t[k] {
            return self.cumulative[k];
        }
        self.cumulative[k] + self.segment_integral(k, x)
    }
}

/// Shape-preserving derivative estimates (Fritsch-Carlson with the
/// Fritsch-Butland weighted harmonic mean for uneven spacing).
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0], delta[0]];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] <= 0.0 {
            d[k] = 0.0;
        } else {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
