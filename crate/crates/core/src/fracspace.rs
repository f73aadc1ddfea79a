//! The fractional modular Φ_{s,M}, the Gagliardo seminorm it gauges, the
//! full norm and the Amemiya-form seminorm.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Extension, GridFunction, Ladder, PairGeometry, QuadratureRule};
use crate::error::{Error, Result};
use crate::nfunction::NFunctionSpec;
use crate::orlicz::{amemiya, gauge, luxemburg_norm_with};

/// Which pairs enter the double integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coverage {
    /// Ω × Ω.
    #[default]
    Interior,
    /// (Ω ∪ halo)², for zero-outside functions.
    WithExterior,
}

#[derive(Clone, Debug)]
pub struct FracParams {
    pub s: f64,
    pub m: NFunctionSpec,
    pub rule: QuadratureRule,
    pub coverage: Coverage,
}

impl FracParams {
    pub fn new(s: f64, m: NFunctionSpec) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::Invalid(format!("s must lie in (0, 1), got {s}")));
        }
        Ok(FracParams { s, m, rule: QuadratureRule::default(), coverage: Coverage::Interior })
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Result<Self> {
        rule.validate()?;
        self.rule = rule;
        Ok(self)
    }

    pub fn with_coverage(mut self, coverage: Coverage) -> Self {
        self.coverage = coverage;
        self
    }

    /// The rule actually used for order s.
    pub fn effective_rule(&self) -> QuadratureRule {
        self.rule.for_order(self.s)
    }
}

/// Pair geometry and kernel tables for one domain and parameter set.
///
/// The kernel is K(r) = r^s M⁻¹(r^N); `inv_kernel` holds 1/K per offset.
#[derive(Clone, Debug)]
pub struct FracKernel {
    inner: Domain,
    geom: PairGeometry,
    inv_kernel: Vec<f64>,
    weights: Vec<f64>,
    support: Option<Vec<bool>>,
    embed: Vec<usize>,
    min_kernel: f64,
    m: NFunctionSpec,
}

impl FracKernel {
    pub fn new(domain: &Domain, p: &FracParams) -> Result<Self> {
        let work = match p.coverage {
            Coverage::Interior => *domain,
            Coverage::WithExterior => domain.extended(),
        };
        let rule = p.effective_rule();
        let geom = PairGeometry::new(&work, &rule)?;
        let n = domain.dim() as i32;
        let r_max = work.diameter();
        let top = p.m.range_max();
        if r_max.powi(n) > top {
            return Err(Error::Range { what: "kernel argument |x-y|^N", value: r_max.powi(n), cap: top });
        }
        let s = p.s;
        let m = &p.m;
        let kernel = geom.offset_table(|r| r.powf(s) * m.inverse_raw(r.powi(n)));
        let mut min_kernel = f64::INFINITY;
        let inv_kernel: Vec<f64> = kernel
            .iter()
            .enumerate()
            .map(|(o, &k)| {
                if geom.included(o) {
                    min_kernel = min_kernel.min(k);
                    1.0 / k
                } else {
                    0.0
                }
            })
            .collect();
        let embed: Vec<usize> = match p.coverage {
            Coverage::Interior => (0..domain.len()).collect(),
            Coverage::WithExterior => (0..domain.len()).map(|i| domain.to_extended_index(i)).collect(),
        };
        let support = match p.coverage {
            Coverage::Interior => None,
            Coverage::WithExterior => {
                let mut mask = vec![false; work.len()];
                embed.iter().for_each(|&e| mask[e] = true);
                Some(mask)
            }
        };
        Ok(FracKernel {
            inner: *domain,
            weights: work.weights(rule.single),
            geom,
            inv_kernel,
            support,
            embed,
            min_kernel,
            m: p.m.clone(),
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.inner
    }

    pub fn geometry(&self) -> &PairGeometry {
        &self.geom
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn inv_kernel(&self) -> &[f64] {
        &self.inv_kernel
    }

    pub fn support(&self) -> Option<&[bool]> {
        self.support.as_deref()
    }

    pub fn nfunction(&self) -> &NFunctionSpec {
        &self.m
    }

    /// Working-grid index of each node of Ω.
    pub fn embedding(&self) -> &[usize] {
        &self.embed
    }

    /// Values of `u` on the working grid.
    pub fn lift(&self, u: &GridFunction) -> Result<Vec<f64>> {
        if u.domain() != &self.inner {
            return Err(Error::Invalid("grid function does not live on the kernel's domain".into()));
        }
        if self.support.is_some() && u.extension() != Extension::ZeroOutside {
            return Err(Error::Precondition("exterior coverage needs a zero-outside function".into()));
        }
        Ok(self.lift_values(u.values()))
    }

    pub(crate) fn lift_values(&self, values: &[f64]) -> Vec<f64> {
        if self.support.is_none() {
            return values.to_vec();
        }
        let mut out = vec![0.0; self.geom.domain().len()];
        for (&e, &v) in self.embed.iter().zip(values) {
            out[e] = v;
        }
        out
    }

    /// Largest argument passed to M at parameter λ.
    fn check_range(&self, values: &[f64], lambda: f64) -> Result<()> {
        let (lo, hi) = values.iter().fold((0.0_f64, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
        let arg = lambda * (hi - lo) / self.min_kernel;
        if arg > self.m.cap() {
            return Err(Error::Range { what: "fractional modular argument", value: arg, cap: self.m.cap() });
        }
        Ok(())
    }

    fn modular_estimates(&self, values: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.check_range(values, lambda)?;
        let (w, ik, m) = (&self.weights, &self.inv_kernel, &self.m);
        Ok(self.geom.sum(self.support(), |i, j, o| {
            let d = values[i] - values[j];
            if d == 0.0 {
                0.0
            } else {
                w[i] * w[j] * m.eval_raw(lambda * d.abs() * ik[o])
            }
        }))
    }

    /// Φ_{s,M}(λu) on working-grid values.
    pub fn modular(&self, values: &[f64], lambda: f64) -> Result<Ladder> {
        Ladder::from_estimates("fractional modular", self.geom.widths(), self.modular_estimates(values, lambda)?)
    }

    /// The finest-band sum of [`FracKernel::modular`] without the
    /// refinement check: the modular of the discrete problem itself.
    pub fn discrete_modular(&self, values: &[f64], lambda: f64) -> Result<f64> {
        Ok(*self.modular_estimates(values, lambda)?.last().unwrap_or(&0.0))
    }

    fn zero_ladder(&self) -> Ladder {
        let widths = self.geom.widths();
        let estimates = vec![0.0; widths.len()];
        Ladder { widths, estimates, value: 0.0, extrapolated: 0.0 }
    }

    /// inf{λ > 0 : Φ_{s,M}(u/λ) ≤ 1}.
    pub fn seminorm(&self, values: &[f64]) -> Result<f64> {
        let first = values[0];
        if values.iter().all(|&v| v == first) {
            return Ok(0.0);
        }
        let sup = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        gauge(|lambda| Ok(self.modular(values, 1.0 / lambda)?.value), sup, sup, "Gagliardo seminorm")
    }
}

fn is_flat(u: &GridFunction, coverage: Coverage) -> bool {
    match coverage {
        Coverage::Interior => u.is_constant(),
        Coverage::WithExterior => u.is_zero(),
    }
}

/// Φ_{s,M}(λu) = ∫∫ M(λ(u(x) − u(y)) / (|x−y|^s M⁻¹(|x−y|^N))) dx dy.
pub fn frac_modular(u: &GridFunction, p: &FracParams, lambda: f64) -> Result<Ladder> {
    if !(lambda > 0.0) {
        return Err(Error::Invalid(format!("lambda must be positive, got {lambda}")));
    }
    let kernel = FracKernel::new(u.domain(), p)?;
    if is_flat(u, p.coverage) {
        return Ok(kernel.zero_ladder());
    }
    kernel.modular(&kernel.lift(u)?, lambda)
}

/// [u]_{s,M} = inf{λ > 0 : Φ_{s,M}(u/λ) ≤ 1}.
pub fn gagliardo_seminorm(u: &GridFunction, p: &FracParams) -> Result<f64> {
    if is_flat(u, p.coverage) {
        return Ok(0.0);
    }
    let kernel = FracKernel::new(u.domain(), p)?;
    kernel.seminorm(&kernel.lift(u)?)
}

/// ‖u‖_M + [u]_{s,M}.
pub fn frac_norm(u: &GridFunction, p: &FracParams) -> Result<f64> {
    Ok(luxemburg_norm_with(u, &p.m, p.rule.single)? + gagliardo_seminorm(u, p)?)
}

/// inf_{k>0} (1 + Φ_{s,M}(k u))/k.
pub fn orlicz_gagliardo_seminorm(u: &GridFunction, p: &FracParams) -> Result<f64> {
    if is_flat(u, p.coverage) {
        return Ok(0.0);
    }
    let kernel = FracKernel::new(u.domain(), p)?;
    let values = kernel.lift(u)?;
    let semi = kernel.seminorm(&values)?;
    amemiya(|k| Ok(kernel.modular(&values, k)?.value), semi, "Amemiya seminorm")
}

/// The W^{s,p} seminorm (∫∫ |u(x) − u(y)|^p / |x−y|^{N+sp})^{1/p}, summed
/// with the same weights and diagonal band as the fractional modular.
pub fn wsp_seminorm(u: &GridFunction, s: f64, p: f64, rule: &QuadratureRule, coverage: Coverage) -> Result<f64> {
    if !(s > 0.0 && s < 1.0 && p >= 1.0) {
        return Err(Error::Invalid(format!("need 0 < s < 1 and p >= 1, got s = {s}, p = {p}")));
    }
    let rule = rule.for_order(s);
    let (work, values, support) = match coverage {
        Coverage::Interior => (*u.domain(), u.values().to_vec(), None),
        Coverage::WithExterior => {
            let ext = u.zero_extended()?;
            let inner = u.domain();
            let mut mask = vec![false; ext.domain().len()];
            (0..inner.len()).for_each(|i| mask[inner.to_extended_index(i)] = true);
            (*ext.domain(), ext.into_values(), Some(mask))
        }
    };
    let geom = PairGeometry::new(&work, &rule)?;
    let w = work.weights(rule.single);
    let exponent = work.dim() as f64 + s * p;
    let ladder = geom.ladder("W^{s,p} seminorm", support.as_deref(), |i, j, o| {
        let d = (values[i] - values[j]).abs();
        if d == 0.0 {
            0.0
        } else {
            w[i] * w[j] * d.powf(p) / geom.distance(o).powf(exponent)
        }
    })?;
    Ok(ladder.value.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_test_function, TestKind};

    fn params(p: f64, s: f64) -> FracParams {
        FracParams::new(s, NFunctionSpec::power(p).unwrap()).unwrap()
    }

    #[test]
    fn constants_vanish() {
        let d = Domain::interval(0.0, 1.0, 32).unwrap();
        let c = GridFunction::constant(d, 3.0);
        let p = params(2.0, 0.4);
        assert_eq!(frac_modular(&c, &p, 1.0).unwrap().value, 0.0);
        assert_eq!(gagliardo_seminorm(&c, &p).unwrap(), 0.0);
        assert_eq!(orlicz_gagliardo_seminorm(&c, &p).unwrap(), 0.0);
        assert!((frac_norm(&GridFunction::constant(d, 1.0), &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn modular_is_monotone_in_lambda() {
        let d = Domain::interval(0.0, 1.0, 48).unwrap();
        let u = make_test_function(TestKind::Random, &d, 5);
        let p = params(2.5, 0.3);
        let a = frac_modular(&u, &p, 0.5).unwrap().value;
        let b = frac_modular(&u, &p, 0.7).unwrap().value;
        assert!(a < b);
    }

    #[test]
    fn seminorm_is_homogeneous() {
        let d = Domain::interval(0.0, 1.0, 48).unwrap();
        let u = make_test_function(TestKind::Bump, &d, 2);
        let p = FracParams::new(0.4, NFunctionSpec::power_log(1.5).unwrap()).unwrap();
        let a = gagliardo_seminorm(&u, &p).unwrap();
        let b = gagliardo_seminorm(&u.scale(2.5), &p).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-9 * b);
    }

    #[test]
    fn power_family_reduces_to_wsp() {
        let d = Domain::interval(0.0, 1.0, 64).unwrap();
        let u = make_test_function(TestKind::Bump, &d, 0);
        for (pp, s) in [(1.5, 0.3), (3.0, 0.5)] {
            let semi = gagliardo_seminorm(&u, &params(pp, s)).unwrap();
            let wsp = wsp_seminorm(&u, s, pp, &QuadratureRule::default(), Coverage::Interior).unwrap();
            assert!((semi - wsp).abs() < 1e-9 * wsp, "{semi} {wsp}");
        }
    }

    #[test]
    fn exterior_coverage_adds_energy() {
        let d = Domain::interval(0.0, 1.0, 40).unwrap();
        let u = make_test_function(TestKind::Bump, &d, 0);
        let inner = gagliardo_seminorm(&u, &params(2.0, 0.5)).unwrap();
        let outer = gagliardo_seminorm(&u, &params(2.0, 0.5).with_coverage(Coverage::WithExterior)).unwrap();
        assert!(outer > inner);
    }
}
