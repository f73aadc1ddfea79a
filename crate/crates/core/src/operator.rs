//! The fractional M-Laplacian: principal-value application, the weak
//! pairing, and the fractional p-Laplacian used as a cross-check.

use crate::domain::{GridFunction, Ladder, PairGeometry, QuadratureRule};
use crate::error::{Error, Result};
use crate::fracspace::{Coverage, FracKernel, FracParams};

#[inline]
fn sign(d: f64) -> f64 {
    if d > 0.0 {
        1.0
    } else if d < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// 2 Σ_y w_y c(u(x) − u(y), offset) over the working grid, summing the
/// partners x + o and x − o together; a partner that falls off the grid
/// leaves the other one unpaired.
fn paired_sum(
    geom: &PairGeometry,
    weights: &[f64],
    values: &[f64],
    k: usize,
    contrib: impl Fn(f64, usize) -> f64,
) -> Result<Ladder> {
    let dom = geom.domain();
    let [nx, ny] = dom.shape();
    let (kx, ky) = dom.multi_index(k);
    let (kx, ky) = (kx as isize, ky as isize);
    let inside = |x: isize, y: isize| x >= 0 && y >= 0 && x < nx as isize && y < ny as isize;
    let mut buckets = vec![0.0; geom.depth()];
    let mut magnitude = 0.0;
    let (ax, ay) = (nx as isize - 1, ny as isize - 1);
    for a in 0..=ax {
        let b_start = if a == 0 { 1 } else { -ay };
        for b in b_start..=ay {
            let plus = inside(kx + a, ky + b).then(|| dom.index((kx + a) as usize, (ky + b) as usize));
            let minus = inside(kx - a, ky - b).then(|| dom.index((kx - a) as usize, (ky - b) as usize));
            let o = match (plus, minus) {
                (Some(j), _) => geom.offset(k, j),
                (None, Some(j)) => geom.mirror(geom.offset(k, j)),
                (None, None) => continue,
            };
            let Some(r) = geom.rung(o) else { continue };
            let mut v = 0.0;
            if let Some(j) = plus {
                let c = weights[j] * contrib(values[k] - values[j], o);
                magnitude += c.abs();
                v += c;
            }
            if let Some(j) = minus {
                let c = weights[j] * contrib(values[k] - values[j], geom.mirror(o));
                magnitude += c.abs();
                v += c;
            }
            buckets[r] += v;
        }
    }
    let mut running = 0.0;
    let estimates = buckets
        .iter()
        .map(|b| {
            running += b;
            2.0 * running
        })
        .collect();
    Ladder::with_noise_floor("principal value", geom.widths(), estimates, 1e-12 * 2.0 * magnitude)
}

fn check_node(u: &GridFunction, node: usize) -> Result<()> {
    if node >= u.domain().len() {
        return Err(Error::Invalid(format!("node {node} outside the grid of {} nodes", u.domain().len())));
    }
    Ok(())
}

impl FracKernel {
    /// (−Δ)^s_m u at working-grid node `k` by symmetric pairing.
    pub fn apply_pv_at(&self, values: &[f64], k: usize) -> Result<Ladder> {
        let m = self.nfunction();
        let ik = self.inv_kernel();
        paired_sum(self.geometry(), self.weights(), values, k, |d, o| m.density_raw(d.abs() * ik[o]) * sign(d) * ik[o])
    }

    /// 2 Σ_y w_y m(|h|) sign(u(x) − u(y)) / K at each listed working-grid
    /// node, finest band only, summed in plain index order.
    pub fn operator_rows(&self, values: &[f64], nodes: &[usize]) -> Vec<f64> {
        let m = self.nfunction();
        let ik = self.inv_kernel();
        let w = self.weights();
        let geom = self.geometry();
        let n = values.len();
        crate::par::map_slice(nodes, |&k| {
            let mut acc = 0.0;
            for j in 0..n {
                let d = values[k] - values[j];
                if d == 0.0 {
                    continue;
                }
                let o = geom.offset(k, j);
                if !geom.included(o) {
                    continue;
                }
                acc += w[j] * m.density_raw(d.abs() * ik[o]) * sign(d) * ik[o];
            }
            2.0 * acc
        })
    }

    /// ∫∫ m(|h_u|) sign(u(x) − u(y)) h_v on working-grid values.
    pub fn pairing(&self, u: &[f64], v: &[f64]) -> Result<Ladder> {
        let m = self.nfunction();
        let ik = self.inv_kernel();
        let w = self.weights();
        self.geometry().ladder("weak pairing", self.support(), |i, j, o| {
            let d = u[i] - u[j];
            if d == 0.0 {
                return 0.0;
            }
            w[i] * w[j] * m.density_raw(d.abs() * ik[o]) * sign(d) * (v[i] - v[j]) * ik[o]
        })
    }
}

/// (−Δ)^s_m u(x) = 2 P.V. ∫ m(h_{x,y}(u)) sign(u(x) − u(y)) / (|x−y|^s M⁻¹(|x−y|^N)) dy
/// at node `node` of Ω.
pub fn apply_pv(u: &GridFunction, node: usize, p: &FracParams) -> Result<Ladder> {
    check_node(u, node)?;
    let kernel = FracKernel::new(u.domain(), p)?;
    let values = kernel.lift(u)?;
    kernel.apply_pv_at(&values, kernel.embedding()[node])
}

/// [`apply_pv`] at every node of Ω (finest-band values).
pub fn apply_field(u: &GridFunction, p: &FracParams) -> Result<Vec<f64>> {
    let kernel = FracKernel::new(u.domain(), p)?;
    let values = kernel.lift(u)?;
    let ladders = crate::par::map_slice(kernel.embedding(), |&k| kernel.apply_pv_at(&values, k));
    ladders.into_iter().map(|l| l.map(|l| l.value)).collect()
}

/// ⟨(−Δ)^s_m u, v⟩ = ∫∫ m(h_{x,y}(u)) sign(u(x) − u(y)) h_{x,y}(v) dx dy.
pub fn weak_pairing(u: &GridFunction, v: &GridFunction, p: &FracParams) -> Result<Ladder> {
    if u.domain() != v.domain() {
        return Err(Error::Invalid("u and v live on different grids".into()));
    }
    let kernel = FracKernel::new(u.domain(), p)?;
    kernel.pairing(&kernel.lift(u)?, &kernel.lift(v)?)
}

/// 2 P.V. ∫ |u(x) − u(y)|^{p−2}(u(x) − u(y)) / |x−y|^{N+sp} dy with the same
/// pairing, band ladder and coverage as [`apply_pv`].
pub fn p_laplacian_reference(
    u: &GridFunction,
    node: usize,
    s: f64,
    p: f64,
    rule: &QuadratureRule,
    coverage: Coverage,
) -> Result<Ladder> {
    check_node(u, node)?;
    if !(s > 0.0 && s < 1.0 && p >= 1.0) {
        return Err(Error::Invalid(format!("need 0 < s < 1 and p >= 1, got s = {s}, p = {p}")));
    }
    let rule = rule.for_order(s);
    let (work, values, k) = match coverage {
        Coverage::Interior => (*u.domain(), u.values().to_vec(), node),
        Coverage::WithExterior => {
            let ext = u.zero_extended()?;
            (*ext.domain(), ext.into_values(), u.domain().to_extended_index(node))
        }
    };
    let geom = PairGeometry::new(&work, &rule)?;
    let w = work.weights(rule.single);
    let exponent = work.dim() as f64 + s * p;
    paired_sum(&geom, &w, &values, k, |d, o| {
        if d == 0.0 {
            0.0
        } else {
            d.abs().powf(p - 1.0) * sign(d) / geom.distance(o).powf(exponent)
        }
    })
}
