//! Sums over ordered node pairs with a diagonal band ladder.

use serde::{Deserialize, Serialize};

use super::{Domain, QuadratureRule};
use crate::error::{Error, Result};
use crate::par;

const EXCLUDED: u8 = u8::MAX;

/// Estimates of a double integral for shrinking diagonal bands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ladder {
    /// Band widths in length units, coarsest first.
    pub widths: Vec<f64>,
    pub estimates: Vec<f64>,
    /// The finest-rung estimate.
    pub value: f64,
    /// Aitken Δ² extrapolation of the last three rungs (the finest value
    /// when the ladder is too short or not contracting).
    pub extrapolated: f64,
}

impl Ladder {
    /// Accept a ladder unless its last two increments share a sign and grow.
    ///
    /// Increments of opposite sign come from cancelling layers (a smooth
    /// integrand near an inflection) rather than from a singular band.
    pub fn from_estimates(what: &str, widths: Vec<f64>, estimates: Vec<f64>) -> Result<Ladder> {
        let scale = estimates.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        Self::with_noise_floor(what, widths, estimates, 1e-13 * scale)
    }

    /// As [`Ladder::from_estimates`], ignoring increments below `floor`.
    pub fn with_noise_floor(what: &str, widths: Vec<f64>, estimates: Vec<f64>, floor: f64) -> Result<Ladder> {
        let n = estimates.len();
        assert!(n >= 1 && widths.len() == n);
        if estimates.iter().any(|e| !e.is_finite()) {
            return Err(Error::divergence(what, &widths, &estimates, "non-finite ladder estimate"));
        }
        let value = estimates[n - 1];
        let mut extrapolated = value;
        if n >= 3 {
            let d1 = estimates[n - 2] - estimates[n - 3];
            let d2 = estimates[n - 1] - estimates[n - 2];
            if d1 * d2 > 0.0 && d2.abs() > d1.abs() * (1.0 + 1e-9) && d2.abs() > floor {
                return Err(Error::divergence(
                    what,
                    &widths,
                    &estimates,
                    format!("band increments grow under refinement ({d1:.3e} then {d2:.3e})"),
                ));
            }
            if d1 * d2 > 0.0 && d2.abs() < d1.abs() {
                extrapolated = value - d2 * d2 / (d2 - d1);
            }
        }
        Ok(Ladder { widths, estimates, value, extrapolated })
    }

    pub fn scaled(mut self, c: f64) -> Ladder {
        self.estimates.iter_mut().for_each(|e| *e *= c);
        self.value *= c;
        self.extrapolated *= c;
        self
    }
}

/// Offset bookkeeping for pair sums on one grid under one diagonal policy.
///
/// Every pair (i, j) maps to the offset of node j relative to node i; the
/// distance, ladder rung and any kernel tables are per offset.
#[derive(Clone, Debug)]
pub struct PairGeometry {
    domain: Domain,
    widths: Vec<usize>,
    symmetric: bool,
    span_y: usize,
    dist: Vec<f64>,
    rung: Vec<u8>,
}

impl PairGeometry {
    pub fn new(domain: &Domain, rule: &QuadratureRule) -> Result<Self> {
        rule.validate()?;
        let [nx, ny] = domain.shape();
        let h = domain.spacing();
        let h_min = domain.h_min();
        let widths = rule.ladder_widths();
        let thresholds: Vec<f64> = widths.iter().map(|&w| w as f64 * h_min * (1.0 - 1e-9)).collect();
        let span_x = 2 * nx - 1;
        let span_y = 2 * ny - 1;
        let mut dist = Vec::with_capacity(span_x * span_y);
        let mut rung = Vec::with_capacity(span_x * span_y);
        for dx in 0..span_x {
            for dy in 0..span_y {
                let ox = (dx as f64 - (nx - 1) as f64) * h[0];
                let oy = (dy as f64 - (ny - 1) as f64) * h[1];
                let r = (ox * ox + oy * oy).sqrt();
                dist.push(r);
                let k = thresholds.iter().position(|&t| r >= t).map_or(EXCLUDED, |k| k as u8);
                rung.push(k);
            }
        }
        Ok(PairGeometry {
            domain: *domain,
            widths,
            symmetric: matches!(rule.diagonal, super::DiagonalPolicy::SymmetricPv),
            span_y,
            dist,
            rung,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn depth(&self) -> usize {
        self.widths.len()
    }

    /// Band widths in length units, coarsest first.
    pub fn widths(&self) -> Vec<f64> {
        self.widths.iter().map(|&w| w as f64 * self.domain.h_min()).collect()
    }

    pub fn offset_count(&self) -> usize {
        self.dist.len()
    }

    /// Offset index of node j as seen from node i.
    #[inline]
    pub fn offset(&self, i: usize, j: usize) -> usize {
        let [nx, ny] = self.domain.shape();
        let (ix, iy) = (i / ny, i % ny);
        let (jx, jy) = (j / ny, j % ny);
        (jx + nx - 1 - ix) * self.span_y + (jy + ny - 1 - iy)
    }

    /// The offset pointing the other way.
    #[inline]
    pub fn mirror(&self, o: usize) -> usize {
        self.dist.len() - 1 - o
    }

    pub fn distance(&self, o: usize) -> f64 {
        self.dist[o]
    }

    /// Whether offset `o` lies outside the finest band.
    pub fn included(&self, o: usize) -> bool {
        self.rung[o] != EXCLUDED
    }

    /// Coarsest ladder rung that includes offset `o`.
    pub fn rung(&self, o: usize) -> Option<usize> {
        (self.rung[o] != EXCLUDED).then_some(self.rung[o] as usize)
    }

    /// `f(|x − y|)` for every offset; excluded offsets hold 0.
    pub fn offset_table(&self, f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
        par::map_indexed(self.dist.len(), |o| if self.rung[o] == EXCLUDED { 0.0 } else { f(self.dist[o]) })
    }

    /// Per-rung estimates of Σ_{i,j} term(i, j, offset(i, j)).
    ///
    /// With `support`, pairs whose nodes both lie outside it are skipped,
    /// so `term` must vanish there. Rows are reduced in a fixed order, so
    /// the result does not depend on the thread count.
    pub fn sum<F>(&self, support: Option<&[bool]>, term: F) -> Vec<f64>
    where
        F: Fn(usize, usize, usize) -> f64 + Sync,
    {
        let n = self.domain.len();
        let depth = self.depth();
        let support_list: Option<Vec<usize>> = support.map(|s| (0..n).filter(|&i| s[i]).collect());
        let rows = par::map_indexed(n, |i| {
            let mut buckets = vec![0.0; depth];
            let inside = support.is_none_or(|s| s[i]);
            let mut visit = |j: usize| {
                let o = self.offset(i, j);
                let k = self.rung[o];
                if k == EXCLUDED {
                    return;
                }
                let v = if self.symmetric { term(i, j, o) + term(j, i, self.mirror(o)) } else { term(i, j, o) };
                buckets[k as usize] += v;
            };
            match (&support_list, inside, self.symmetric) {
                (Some(list), false, true) => {
                    let start = list.partition_point(|&j| j <= i);
                    list[start..].iter().for_each(|&j| visit(j));
                }
                (Some(list), false, false) => list.iter().for_each(|&j| visit(j)),
                (_, _, true) => (i + 1..n).for_each(&mut visit),
                (_, _, false) => (0..n).for_each(&mut visit),
            }
            buckets
        });
        let mut estimates = Vec::with_capacity(depth);
        let mut running = 0.0;
        for k in 0..depth {
            let column: Vec<f64> = rows.iter().map(|b| b[k]).collect();
            running += par::pairwise_sum(&column);
            estimates.push(running);
        }
        estimates
    }

    /// [`PairGeometry::sum`] checked as a refinement ladder.
    pub fn ladder<F>(&self, what: &str, support: Option<&[bool]>, term: F) -> Result<Ladder>
    where
        F: Fn(usize, usize, usize) -> f64 + Sync,
    {
        Ladder::from_estimates(what, self.widths(), self.sum(support, term))
    }
}

/// ∫_Ω∫_Ω kernel(x, y) dx dy with the rule's single weights and diagonal
/// policy.
pub fn double_integrate<K>(kernel: K, dom: &Domain, rule: &QuadratureRule) -> Result<Ladder>
where
    K: Fn([f64; 2], [f64; 2]) -> f64 + Sync,
{
    let geom = PairGeometry::new(dom, rule)?;
    let w = dom.weights(rule.single);
    let coords: Vec<[f64; 2]> = (0..dom.len()).map(|i| dom.coords(i)).collect();
    geom.ladder("double integral", None, |i, j, _| w[i] * w[j] * kernel(coords[i], coords[j]))
}
