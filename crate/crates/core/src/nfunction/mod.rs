//! N-functions M(t) = ∫₀ᵗ m(s) ds and the scalar calculus built on them.

mod calculus;
mod sobolev;
mod table;

use std::io::Read;
use std::path::Path;
use std::sync::{Arc, OnceLock};

pub use calculus::{Delta2Estimate, KEpsEstimate};
pub use sobolev::Integrability;
pub use table::DensityTable;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre4;

/// Relative tolerance promised by [`NFunctionSpec::inverse`].
pub const TOL_INV: f64 = 1e-10;

const DEFAULT_POWER_CAP: f64 = 1e8;
const DEFAULT_EXP_QUAD_CAP: f64 = 25.0;

/// How the density of an N-function is given.
#[derive(Clone, Debug)]
pub enum Family {
    /// M(t) = t^p, p > 1.
    Power { p: f64 },
    /// M(t) = t^p ln(1 + t), p ≥ 1.
    PowerLog { p: f64 },
    /// M(t) = exp(t²) − 1.
    ExpQuad,
    Tabulated(Arc<DensityTable>),
    /// Linear below `alpha` with the chord slope M(alpha)/alpha, the base
    /// function above it.
    Truncated { base: Arc<NFunctionSpec>, alpha: f64, slope: f64 },
    /// Complementary function built from the generalized inverse density.
    Conjugate { base: Arc<NFunctionSpec> },
}

/// An N-function together with the range on which it is trusted.
///
/// Values are immutable once built; the conjugate is computed lazily and
/// cached, so clones share nothing mutable.
#[derive(Clone, Debug)]
pub struct NFunctionSpec {
    family: Family,
    scale: f64,
    cap: f64,
    conjugate: OnceLock<Arc<NFunctionSpec>>,
}

impl NFunctionSpec {
    fn from_family(family: Family, cap: f64) -> Self {
        NFunctionSpec { family, scale: 1.0, cap, conjugate: OnceLock::new() }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::Invalid(format!("power exponent must exceed 1, got {p}")));
        }
        Ok(Self::from_family(Family::Power { p }, DEFAULT_POWER_CAP))
    }

    pub fn power_log(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Invalid(format!("power-log exponent must be at least 1, got {p}")));
        }
        Ok(Self::from_family(Family::PowerLog { p }, DEFAULT_POWER_CAP))
    }

    pub fn exp_quad() -> Self {
        Self::from_family(Family::ExpQuad, DEFAULT_EXP_QUAD_CAP)
    }

    /// Tabulated density; the trusted range ends at the last knot.
    pub fn tabulated(ts: &[f64], ms: &[f64]) -> Result<Self> {
        let table = DensityTable::new(ts, ms)?;
        let cap = table.last_knot();
        let spec = Self::from_family(Family::Tabulated(Arc::new(table)), cap);
        spec.validate()?;
        Ok(spec)
    }

    /// Read a two-column `t,m(t)` CSV (an optional header row is skipped).
    pub fn from_csv_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut ts = Vec::new();
        let mut ms = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Invalid(format!("row {}: expected 2 columns, found {}", row + 1, record.len())));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(t), Ok(m)) => {
                    ts.push(t);
                    ms.push(m);
                }
                _ if row == 0 => continue,
                _ => return Err(Error::Invalid(format!("row {}: non-numeric entry", row + 1))),
            }
        }
        Self::tabulated(&ts, &ms)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    /// Multiply M (and m) by a positive constant.
    pub fn with_scale(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Invalid(format!("scale must be positive, got {factor}")));
        }
        self.scale *= factor;
        self.conjugate = OnceLock::new();
        Ok(self)
    }

    /// Restrict or extend the trusted range.
    pub fn with_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::Invalid(format!("domain cap must be positive, got {cap}")));
        }
        if let Family::Tabulated(table) = &self.family {
            if cap > table.last_knot() {
                return Err(Error::Invalid("cap beyond the last tabulated knot".into()));
            }
        }
        if let Family::ExpQuad = self.family {
            if cap > 26.0 {
                return Err(Error::Invalid("exp-quad overflows beyond t = 26".into()));
            }
        }
        self.cap = cap;
        self.conjugate = OnceLock::new();
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Largest argument for which evaluation is trusted.
    pub fn cap(&self) -> f64 {
        self.cap
    }

    /// M(cap): the largest value `inverse` accepts.
    pub fn range_max(&self) -> f64 {
        self.eval_raw(self.cap)
    }

    /// `(alpha, slope)` when this is a Young truncation.
    pub fn truncation_parameters(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::Truncated { alpha, slope, .. } => Some((*alpha, *slope)),
            _ => None,
        }
    }

    /// Short human-readable name.
    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::Power { p } => format!("power(p={p})"),
            Family::PowerLog { p } => format!("power_log(p={p})"),
            Family::ExpQuad => "exp_quad".to_string(),
            Family::Tabulated(t) => format!("tabulated({} knots)", t.len()),
            Family::Truncated { base, alpha, .. } => format!("truncated({}, alpha={alpha})", base.label()),
            Family::Conjugate { base } => format!("conjugate({})", base.label()),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{}", self.scale, base)
        }
    }

    fn check_arg(&self, t: f64, what: &'static str) -> Result<()> {
        if !(t >= 0.0) || t > self.cap * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Range { what, value: t, cap: self.cap });
        }
        Ok(())
    }

    /// M(t) for 0 ≤ t ≤ cap.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.check_arg(t, "N-function argument")?;
        Ok(self.eval_raw(t))
    }

    /// m(t) for 0 ≤ t ≤ cap.
    pub fn density(&self, t: f64) -> Result<f64> {
        self.check_arg(t, "density argument")?;
        Ok(self.density_raw(t))
    }

    /// M(t) without the range check; callers validate the largest argument once.
    pub(crate) fn eval_raw(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let t = t.min(self.cap);
        let v = match &self.family {
            Family::Power { p } => t.powf(*p),
            Family::PowerLog { p } => t.powf(*p) * t.ln_1p(),
            Family::ExpQuad => (t * t).exp_m1(),
            Family::Tabulated(table) => table.integral(t),
            Family::Truncated { base, alpha, slope } => {
                if t <= *alpha {
                    slope * t
                } else {
                    base.eval_raw(t)
                }
            }
            Family::Conjugate { base } => {
                let tau = base.generalized_inverse_density(t);
                t * tau - base.eval_raw(tau)
            }
        };
        self.scale * v
    }

    pub(crate) fn density_raw(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let t = t.min(self.cap);
        let v = match &self.family {
            Family::Power { p } => p * t.powf(p - 1.0),
            Family::PowerLog { p } => p * t.powf(p - 1.0) * t.ln_1p() + t.powf(*p) / (1.0 + t),
            Family::ExpQuad => 2.0 * t * (t * t).exp(),
            Family::Tabulated(table) => table.density(t),
            Family::Truncated { base, alpha, slope } => {
                if t < *alpha {
                    *slope
                } else {
                    base.density_raw(t)
                }
            }
            Family::Conjugate { base } => base.generalized_inverse_density(t),
        };
        self.scale * v
    }

    /// M(b) − M(a) without cancellation when a and b are close.
    pub(crate) fn increment(&self, a: f64, b: f64) -> f64 {
        let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        if hi == lo {
            return 0.0;
        }
        if hi - lo > 1e-2 * hi {
            return sign * (self.eval_raw(hi) - self.eval_raw(lo));
        }
        sign * gauss_legendre4(|t| self.density_raw(t), lo, hi)
    }

    /// F(x') − F(x) − F'(x)(x' − x) for F(x) = M(|x|), without cancellation
    /// when x' is close to x.
    pub(crate) fn bregman(&self, x: f64, x_new: f64) -> f64 {
        let (a, b) = (x.abs(), x_new.abs());
        let ma = self.density_raw(a);
        if x * x_new < 0.0 {
            return self.eval_raw(b) - self.eval_raw(a) + ma * (a + b);
        }
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        if hi == lo {
            return 0.0;
        }
        if hi - lo > 1e-2 * hi {
            let d = self.eval_raw(b) - self.eval_raw(a) - ma * (b - a);
            return d.max(0.0);
        }
        gauss_legendre4(|t| (self.density_raw(t) - ma).abs(), lo, hi)
    }

    /// sup{t ∈ [0, cap] : m(t) ≤ y}, by monotone bisection.
    pub(crate) fn generalized_inverse_density(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if self.density_raw(self.cap) <= y {
            return self.cap;
        }
        let mut t = self.cap;
        let floor = self.cap * 1e-300;
        while t > floor && self.density_raw(t) > y {
            t *= 0.5;
        }
        if t <= floor {
            return 0.0;
        }
        let mut lo = t;
        let mut hi = (2.0 * t).min(self.cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.density_raw(mid) <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// M^{-1}(y) for 0 ≤ y ≤ M(cap), by monotone bisection.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        let top = self.range_max();
        if !(y >= 0.0) || y > top * (1.0 + 4.0 * f64::EPSILON) {
            return Err(Error::Range { what: "N-function inverse argument", value: y, cap: top });
        }
        Ok(self.inverse_raw(y))
    }

    pub(crate) fn inverse_raw(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut hi = self.cap;
        if self.eval_raw(hi) <= y {
            return hi;
        }
        let floor = self.cap * 1e-300;
        while hi > floor && self.eval_raw(0.5 * hi) >= y {
            hi *= 0.5;
        }
        let mut lo = 0.5 * hi;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval_raw(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (self.eval_raw(lo) - y).abs() < (self.eval_raw(hi) - y).abs() {
            lo
        } else {
            hi
        }
    }

    /// The complementary N-function M̄ with density m̄(s) = sup{t : m(t) ≤ s}.
    ///
    /// M̄ is evaluated through the equality case of Young's inequality,
    /// M̄(s) = s·m̄(s) − M(m̄(s)). Its trusted range is [0, m(cap)].
    pub fn conjugate(&self) -> NFunctionSpec {
        self.conjugate
            .get_or_init(|| {
                let cap = self.density_raw(self.cap);
                Arc::new(Self::from_family(Family::Conjugate { base: Arc::new(self.clone()) }, cap))
            })
            .as_ref()
            .clone()
    }

    /// Check the N-function invariants on a log-spaced sample grid.
    pub fn validate(&self) -> Result<()> {
        let lo = match &self.family {
            Family::Tabulated(t) => t.first_knot() * 1e-3,
            _ => self.cap * 1e-16,
        };
        let grid = log_grid(lo, self.cap, 400);
        let mut prev = 0.0;
        if self.density_raw(0.0) != 0.0 {
            return Err(Error::Invalid("density must vanish at 0".into()));
        }
        for &t in &grid {
            let m = self.density_raw(t);
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::Invalid(format!("density must be positive and finite at t = {t}")));
            }
            if m < prev * (1.0 - 1e-12) {
                return Err(Error::Invalid(format!("density decreases near t = {t}")));
            }
            prev = m;
        }
        let first = self.eval_raw(grid[0]) / grid[0];
        let last = self.eval_raw(self.cap) / self.cap;
        if !(first < last) {
            return Err(Error::Invalid("M(t)/t does not increase across the trusted range".into()));
        }
        Ok(())
    }
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
