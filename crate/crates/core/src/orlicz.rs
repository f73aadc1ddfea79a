//! Modular, Luxemburg and Amemiya norms on L_M(Ω).

use crate::domain::{integrate, GridFunction, SingleRule};
use crate::error::{Error, Result};
use crate::nfunction::NFunctionSpec;
use crate::par;

/// Relative tolerance of the norm searches.
pub const TOL_NORM: f64 = 1e-8;

const GAUGE_STEPS: usize = 200;
const GOLDEN_TOL: f64 = 1e-9;

/// ∫_Ω M(|u|) with the given single rule.
pub fn modular_with(u: &GridFunction, m: &NFunctionSpec, rule: SingleRule) -> Result<f64> {
    let sup = u.sup_norm();
    if sup > m.cap() {
        return Err(Error::Range { what: "modular argument", value: sup, cap: m.cap() });
    }
    let w = u.domain().weights(rule);
    let terms: Vec<f64> = u.values().iter().zip(&w).map(|(v, w)| w * m.eval_raw(v.abs())).collect();
    Ok(par::pairwise_sum(&terms))
}

/// ∫_Ω M(|u|) with the trapezoid rule.
pub fn modular(u: &GridFunction, m: &NFunctionSpec) -> Result<f64> {
    modular_with(u, m, SingleRule::Trapezoid)
}

/// Smallest λ with ρ(λ) ≤ 1 for a non-increasing ρ; range errors count as ρ > 1.
///
/// `lo` and `hi` are first guesses, widened geometrically when they do not
/// bracket the level. Bisection runs in the geometric mean.
pub(crate) fn gauge(mut rho: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, what: &str) -> Result<f64> {
    let mut below = |lambda: f64| -> Result<bool> {
        match rho(lambda) {
            Ok(v) => Ok(v <= 1.0),
            Err(Error::Range { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let (mut lo, mut hi) = (lo.min(hi), hi.max(lo));
    if !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::Bracket(format!("{what}: invalid initial bracket [{lo}, {hi}]")));
    }
    let mut steps = 0;
    while !below(hi)? {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > GAUGE_STEPS {
            return Err(Error::Bracket(format!("{what}: modular stays above 1 up to lambda = {hi:e}")));
        }
    }
    while below(lo)? {
        hi = lo;
        lo *= 0.5;
        steps += 1;
        if steps > GAUGE_STEPS {
            return Err(Error::Bracket(format!("{what}: modular stays below 1 down to lambda = {lo:e}")));
        }
    }
    while hi / lo - 1.0 > 1e-13 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// inf_{k>0} (1 + ρ(k))/k for a convex non-decreasing ρ with ρ(0) = 0,
/// given the gauge `scale` of ρ (so the infimum lies in [scale, 2 scale]).
///
/// Golden-section search in ln k; range errors count as +∞.
pub(crate) fn amemiya(mut rho: impl FnMut(f64) -> Result<f64>, scale: f64, what: &str) -> Result<f64> {
    let mut f = |ln_k: f64| -> Result<f64> {
        let k = ln_k.exp();
        match rho(k) {
            Ok(v) => Ok((1.0 + v) / k),
            Err(Error::Range { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };
    // the minimiser satisfies 1/k ≤ 2·scale
    let a0 = -(2.0 * scale).ln();
    let mut left = a0;
    let mut mid = -scale.ln();
    let mut f_mid = f(mid)?;
    let mut right = mid + std::f64::consts::LN_2;
    let mut f_right = f(right)?;
    let mut steps = 0;
    while f_right < f_mid {
        left = mid;
        mid = right;
        f_mid = f_right;
        right += std::f64::consts::LN_2;
        f_right = f(right)?;
        steps += 1;
        if steps > GAUGE_STEPS {
            return Err(Error::Bracket(format!("{what}: Amemiya functional keeps decreasing up to k = {:e}", right.exp())));
        }
    }
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (left, right);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > GOLDEN_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let best = fc.min(fd).min(f_mid);
    if !best.is_finite() {
        return Err(Error::Bracket(format!("{what}: no finite value on the search bracket")));
    }
    Ok(best)
}

/// Luxemburg norm inf{λ > 0 : ∫ M(|u|/λ) ≤ 1}.
pub fn luxemburg_norm_with(u: &GridFunction, m: &NFunctionSpec, rule: SingleRule) -> Result<f64> {
    if u.is_zero() {
        return Ok(0.0);
    }
    let w = u.domain().weights(rule);
    let measure: f64 = w.iter().sum();
    let l1: f64 = u.values().iter().zip(&w).map(|(v, w)| w * v.abs()).sum();
    let level = if 1.0 / measure <= m.range_max() { m.inverse_raw(1.0 / measure) } else { m.cap() };
    // Jensen: the modular is ≥ 1 at the lower guess and ≤ 1 at the upper one
    let lo = l1 / (measure * level);
    let hi = u.sup_norm() / level;
    gauge(|lambda| modular_with(&u.scale(1.0 / lambda), m, rule), lo, hi, "Luxemburg norm")
}

pub fn luxemburg_norm(u: &GridFunction, m: &NFunctionSpec) -> Result<f64> {
    luxemburg_norm_with(u, m, SingleRule::Trapezoid)
}

/// Orlicz norm in Amemiya form, inf_{k>0} (1 + ∫ M(k|u|))/k.
pub fn amemiya_orlicz_norm_with(u: &GridFunction, m: &NFunctionSpec, rule: SingleRule) -> Result<f64> {
    let lux = luxemburg_norm_with(u, m, rule)?;
    if lux == 0.0 {
        return Ok(0.0);
    }
    amemiya(|k| modular_with(&u.scale(k), m, rule), lux, "Amemiya norm")
}

pub fn amemiya_orlicz_norm(u: &GridFunction, m: &NFunctionSpec) -> Result<f64> {
    amemiya_orlicz_norm_with(u, m, SingleRule::Trapezoid)
}

/// 2‖u‖_M ‖v‖_{M̄} − ∫|uv|.
pub fn holder_gap(u: &GridFunction, v: &GridFunction, m: &NFunctionSpec) -> Result<f64> {
    let product = u.combine(0.0, v, 0.0)?;
    let uv: Vec<f64> = u.values().iter().zip(v.values()).map(|(a, b)| (a * b).abs()).collect();
    let uv = GridFunction::new(*product.domain(), uv, product.extension())?;
    let nu = luxemburg_norm(u, m)?;
    let nv = luxemburg_norm(v, &m.conjugate())?;
    Ok(2.0 * nu * nv - integrate(&uv, SingleRule::Trapezoid))
}

/// Constants (β, γ) with ‖u‖_M ≤ β‖u‖_{M₁} and ‖u‖_{M₁} ≤ γ‖u‖_M, where
/// M₁ is the linear truncation of M below α: β = max(1, α/M(α)),
/// γ = M(α)|Ω| + 1.
pub fn truncation_equivalence_constants(m: &NFunctionSpec, measure: f64) -> Result<(f64, f64)> {
    let m1 = m.young_truncation()?;
    let (alpha, _) = m1.truncation_parameters().expect("truncation carries its parameters");
    let m_alpha = m.eval(alpha)?;
    Ok(((alpha / m_alpha).max(1.0), m_alpha * measure + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_test_function, Domain, Extension, TestKind};

    fn unit(n: usize) -> Domain {
        Domain::interval(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn modular_examples() {
        let d = unit(1025);
        let p2 = NFunctionSpec::power(2.0).unwrap();
        let p3 = NFunctionSpec::power(3.0).unwrap();
        assert_eq!(modular(&GridFunction::zeros(d), &p2).unwrap(), 0.0);
        assert!((modular(&GridFunction::constant(d, 1.0), &p2).unwrap() - 1.0).abs() < 1e-14);
        let x = GridFunction::from_fn(d, Extension::Undefined, |c| c[0]).unwrap();
        assert!((modular(&x, &p3).unwrap() - 0.25).abs() < 1e-6);
    }

    #[test]
    fn luxemburg_matches_lp() {
        let d = unit(129);
        let one = GridFunction::constant(d, 1.0);
        assert!((luxemburg_norm(&one, &NFunctionSpec::power(2.0).unwrap()).unwrap() - 1.0).abs() < 1e-12);
        for p in [1.5, 2.0, 3.0] {
            let m = NFunctionSpec::power(p).unwrap();
            for seed in 0..5 {
                let u = make_test_function(TestKind::Random, &d, seed);
                let w = d.weights(SingleRule::Trapezoid);
                let lp: f64 = u.values().iter().zip(&w).map(|(v, w)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
                let lux = luxemburg_norm(&u, &m).unwrap();
                assert!((lux - lp).abs() < 1e-8 * lp, "p={p} lux={lux} lp={lp}");
            }
        }
    }

    #[test]
    fn unit_ball_characterisation() {
        let d = unit(65);
        for m in [NFunctionSpec::power_log(1.5).unwrap(), NFunctionSpec::exp_quad()] {
            let u = make_test_function(TestKind::Bump, &d, 4);
            let lux = luxemburg_norm(&u, &m).unwrap();
            let rho = modular(&u.scale(1.0 / lux), &m).unwrap();
            assert!((1.0 - TOL_NORM..=1.0 + 1e-8).contains(&rho), "{rho}");
        }
    }

    #[test]
    fn amemiya_of_constant_is_twice_luxemburg() {
        let d = unit(65);
        let m = NFunctionSpec::power(2.0).unwrap();
        let a = amemiya_orlicz_norm(&GridFunction::constant(d, 1.0), &m).unwrap();
        assert!((a - 2.0).abs() < 1e-10, "{a}");
        assert_eq!(amemiya_orlicz_norm(&GridFunction::zeros(d), &m).unwrap(), 0.0);
    }

    #[test]
    fn holder_gap_examples() {
        let d = unit(65);
        let m = NFunctionSpec::power(2.0).unwrap();
        let one = GridFunction::constant(d, 1.0);
        assert_eq!(holder_gap(&one, &GridFunction::zeros(d), &m).unwrap(), 0.0);
        assert!(holder_gap(&one, &one, &m).unwrap() >= 0.0);
    }

    #[test]
    fn truncation_constants_for_square() {
        let (beta, gamma) = truncation_equivalence_constants(&NFunctionSpec::power(2.0).unwrap(), 1.0).unwrap();
        assert_eq!(beta, 1.0);
        assert_eq!(gamma, 2.0);
    }
}
