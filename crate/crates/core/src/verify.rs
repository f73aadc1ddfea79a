//! Numerical checks of the inequalities, equivalences and embeddings
//! relating the norms of the other modules.

use serde::Serialize;

use crate::domain::{mollify, GridFunction, PairGeometry, QuadratureRule};
use crate::error::{Error, Result};
use crate::fracspace::{frac_norm, frac_modular, gagliardo_seminorm, orlicz_gagliardo_seminorm, FracParams};
use crate::nfunction::NFunctionSpec;
use crate::orlicz::{amemiya_orlicz_norm_with, luxemburg_norm, luxemburg_norm_with};
use crate::par;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub index: usize,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// Per-function ratios, their maximum, and the skipped members.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub max: Option<f64>,
    pub rows: Vec<RatioRow>,
    pub skipped: Vec<(usize, String)>,
    pub rule: QuadratureRule,
}

fn ratio_report(
    family: &[GridFunction],
    rule: QuadratureRule,
    eval: impl Fn(&GridFunction) -> Result<(f64, f64)> + Sync,
) -> Result<RatioReport> {
    let results = par::map_slice(family, |u| if u.is_constant() { None } else { Some(eval(u)) });
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (index, r) in results.into_iter().enumerate() {
        match r {
            None => skipped.push((index, "constant function".to_string())),
            Some(Err(e)) => return Err(e),
            Some(Ok((numerator, denominator))) => {
                if denominator > 0.0 {
                    rows.push(RatioRow { index, numerator, denominator, ratio: numerator / denominator });
                } else {
                    skipped.push((index, "zero denominator".to_string()));
                }
            }
        }
    }
    let max = rows.iter().map(|r| r.ratio).reduce(f64::max);
    Ok(RatioReport { max, rows, skipped, rule })
}

fn require_zero_outside(family: &[GridFunction]) -> Result<()> {
    if let Some(i) = family.iter().position(|u| u.extension() != crate::domain::Extension::ZeroOutside) {
        return Err(Error::Precondition(format!("family member {i} is not zero outside the domain")));
    }
    Ok(())
}

/// max over the family of ‖u‖_M / [u]_{s,M}.
pub fn poincare_ratio(family: &[GridFunction], p: &FracParams) -> Result<RatioReport> {
    require_zero_outside(family)?;
    ratio_report(family, p.effective_rule(), |u| {
        Ok((luxemburg_norm_with(u, &p.m, p.rule.single)?, gagliardo_seminorm(u, p)?))
    })
}

/// max over the family of ‖u‖_{M*} / ‖u‖_{s,M}, with M* the Sobolev
/// conjugate for dimension `n` (which must match the grid).
pub fn embedding_ratio(family: &[GridFunction], p: &FracParams, n: usize) -> Result<RatioReport> {
    if let Some(u) = family.first() {
        if u.domain().dim() != n {
            return Err(Error::Invalid(format!("dimension {n} does not match the {}-d grid", u.domain().dim())));
        }
    }
    let star = p.m.sobolev_conjugate(n, p.s)?;
    ratio_report(family, p.effective_rule(), |u| Ok((luxemburg_norm_with(u, &star, p.rule.single)?, frac_norm(u, p)?)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormEquivalence {
    /// Amemiya-form seminorm over the Luxemburg-form one.
    pub seminorm_ratio: f64,
    /// Amemiya norm over Luxemburg norm on L_M.
    pub norm_ratio: f64,
}

/// Both sandwich ratios, or `None` for a constant function.
pub fn norm_equivalence(u: &GridFunction, p: &FracParams) -> Result<Option<NormEquivalence>> {
    if u.is_constant() {
        return Ok(None);
    }
    let semi = gagliardo_seminorm(u, p)?;
    let orlicz_semi = orlicz_gagliardo_seminorm(u, p)?;
    let lux = luxemburg_norm_with(u, &p.m, p.rule.single)?;
    let ame = amemiya_orlicz_norm_with(u, &p.m, p.rule.single)?;
    Ok(Some(NormEquivalence { seminorm_ratio: orlicz_semi / semi, norm_ratio: ame / lux }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ws1Report {
    /// ∫|u| + ∫∫ |u(x) − u(y)| / |x−y|^{N+s}.
    pub ws1_norm: f64,
    /// ‖u‖_{M₁} + [u]_{s,M₁}.
    pub frac_norm_m1: f64,
    pub alpha: f64,
    pub c_prime: f64,
    /// ‖1‖_{M̄₁} over a set of measure max(|Ω|, |Ω|²).
    pub one_norm: f64,
    /// (2 + 2C')‖1‖_{M̄₁}.
    pub constant: f64,
    /// constant · frac_norm_m1 − ws1_norm.
    pub gap: f64,
}

/// Check ‖u‖_{W^{s,1}} ≤ (2 + 2C')‖1‖_{M̄₁} ‖u‖_{s,M₁} for the linear
/// truncation M₁ of M.
pub fn ws1_embedding(u: &GridFunction, p: &FracParams) -> Result<Ws1Report> {
    let m1 = p.m.young_truncation()?;
    let (alpha, _) = m1.truncation_parameters().expect("truncation carries its parameters");
    let dom = u.domain();
    let n = dom.dim() as i32;
    let rule = p.effective_rule();
    let geom = PairGeometry::new(dom, &rule)?;
    let mut c_prime: f64 = 0.0;
    for o in 0..geom.offset_count() {
        let r = geom.distance(o);
        if r > alpha && geom.included(o) {
            let rn = r.powi(n);
            c_prime = c_prime.max(m1.inverse(rn)? / rn);
        }
    }
    let measure = dom.measure().max(dom.measure().powi(2));
    let one_norm = 1.0 / m1.conjugate().inverse(1.0 / measure)?;
    let constant = (2.0 + 2.0 * c_prime) * one_norm;

    let w = dom.weights(rule.single);
    let values = u.values();
    let l1: f64 = values.iter().zip(&w).map(|(v, w)| v.abs() * w).sum();
    let exponent = n as f64 + p.s;
    let semi = geom
        .ladder("W^{s,1} seminorm", None, |i, j, o| {
            let d = (values[i] - values[j]).abs();
            if d == 0.0 {
                0.0
            } else {
                w[i] * w[j] * d / geom.distance(o).powf(exponent)
            }
        })?
        .value;
    let ws1_norm = l1 + semi;
    let p1 = FracParams { m: m1, ..p.clone() };
    let frac_norm_m1 = if u.is_zero() { 0.0 } else { frac_norm(u, &p1)? };
    Ok(Ws1Report { ws1_norm, frac_norm_m1, alpha, c_prime, one_norm, constant, gap: constant * frac_norm_m1 - ws1_norm })
}

/// Φ_{s,M}(|u|) and Φ_{s,M}(min(|u|, cutoff)) at λ = 1.
pub fn lipschitz_composition(u: &GridFunction, cutoff: f64, p: &FracParams) -> Result<(f64, f64)> {
    if !(cutoff >= 0.0) {
        return Err(Error::Invalid(format!("cutoff must be non-negative, got {cutoff}")));
    }
    let abs = u.map(f64::abs);
    let clipped = u.map(|v| v.abs().min(cutoff));
    Ok((frac_modular(&abs, p, 1.0)?.value, frac_modular(&clipped, p, 1.0)?.value))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MollifierRow {
    pub eps: f64,
    /// ‖u_ε − u‖_M.
    pub norm_distance: f64,
    /// [u_ε − u]_{s,M}.
    pub seminorm_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MollifierTable {
    pub rows: Vec<MollifierRow>,
    pub skipped: Vec<(f64, String)>,
    pub rule: QuadratureRule,
}

/// Distances between u and its mollifications along a ladder of ε.
pub fn mollifier_convergence(u: &GridFunction, p: &FracParams, eps_ladder: &[f64]) -> Result<MollifierTable> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &eps in eps_ladder {
        let smooth = match mollify(u, eps) {
            Ok(s) => s,
            Err(Error::Resolution { h, .. }) => {
                skipped.push((eps, format!("eps below twice the grid spacing {h}")));
                continue;
            }
            Err(e) => return Err(e),
        };
        let diff = smooth.sub(u)?;
        rows.push(MollifierRow {
            eps,
            norm_distance: luxemburg_norm_with(&diff, &p.m, p.rule.single)?,
            seminorm_distance: gagliardo_seminorm(&diff, p)?,
        });
    }
    Ok(MollifierTable { rows, skipped, rule: p.effective_rule() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessRow {
    pub eps: f64,
    /// sup over the family of ‖u_ε − u‖_B.
    pub max_distance: f64,
    /// max over pairs of ‖u_ε − v_ε‖_B.
    pub diameter: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactnessReport {
    pub rows: Vec<CompactnessRow>,
    /// max over the family of ‖u‖_{s,M}.
    pub family_bound: f64,
    /// B(2T)/M*(T) at increasing horizons T.
    pub dominance_ratios: Vec<(f64, f64)>,
    /// Whether those ratios decay, i.e. whether B grows essentially
    /// slower than M* on the probed range.
    pub dominated: bool,
    pub skipped: Vec<(f64, String)>,
}

/// Mollification distances and diameters of a family in L_B, with a flag
/// for the growth condition of B against the Sobolev conjugate M*.
pub fn compact_embedding_evidence(
    family: &[GridFunction],
    p: &FracParams,
    b: &NFunctionSpec,
    eps_ladder: &[f64],
) -> Result<CompactnessReport> {
    let Some(first) = family.first() else {
        return Err(Error::Degenerate("empty family".into()));
    };
    let n = first.domain().dim();
    let star = p.m.sobolev_conjugate(n, p.s)?;
    let norms = par::map_slice(family, |u| frac_norm(u, p));
    let mut family_bound: f64 = 0.0;
    for r in norms {
        let v = r?;
        if !v.is_finite() {
            return Err(Error::Degenerate("family is not bounded in the fractional norm".into()));
        }
        family_bound = family_bound.max(v);
    }
    let top = (0.5 * b.cap()).min(star.cap());
    let mut dominance_ratios = Vec::new();
    let mut t = 10.0;
    while t <= top {
        dominance_ratios.push((t, star.dominance_ratio(b, 2.0, t)?));
        t *= 10.0;
    }
    let dominated = dominance_ratios.len() >= 2
        && dominance_ratios.windows(2).all(|w| w[1].1 < w[0].1)
        && dominance_ratios.last().unwrap().1 < 0.1 * dominance_ratios[0].1;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &eps in eps_ladder {
        let smoothed: Vec<Result<GridFunction>> = par::map_slice(family, |u| mollify(u, eps));
        if let Some(Err(Error::Resolution { h, .. })) = smoothed.first() {
            skipped.push((eps, format!("eps below twice the grid spacing {h}")));
            continue;
        }
        let smoothed: Vec<GridFunction> = smoothed.into_iter().collect::<Result<_>>()?;
        let mut max_distance: f64 = 0.0;
        for (s, u) in smoothed.iter().zip(family) {
            max_distance = max_distance.max(luxemburg_norm(&s.sub(u)?, b)?);
        }
        let pairs: Vec<(usize, usize)> =
            (0..smoothed.len()).flat_map(|i| (i + 1..smoothed.len()).map(move |j| (i, j))).collect();
        let dists = par::map_slice(&pairs, |&(i, j)| luxemburg_norm(&smoothed[i].sub(&smoothed[j])?, b));
        let mut diameter: f64 = 0.0;
        for d in dists {
            diameter = diameter.max(d?);
        }
        rows.push(CompactnessRow { eps, max_distance, diameter });
    }
    Ok(CompactnessReport { rows, family_bound, dominance_ratios, dominated, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_test_function, Domain, TestKind};

    fn params(p: f64, s: f64) -> FracParams {
        FracParams::new(s, NFunctionSpec::power(p).unwrap()).unwrap()
    }

    #[test]
    fn zero_family_is_skipped() {
        let d = Domain::interval(0.0, 1.0, 16).unwrap();
        let r = poincare_ratio(&[GridFunction::zeros(d)], &params(2.0, 0.5)).unwrap();
        assert!(r.max.is_none());
        assert_eq!(r.skipped.len(), 1);
    }

    #[test]
    fn poincare_ratio_is_scale_invariant() {
        let d = Domain::interval(0.0, 1.0, 40).unwrap();
        let fam: Vec<GridFunction> = (1..4).map(|k| make_test_function(TestKind::Bump, &d, k)).collect();
        let scaled: Vec<GridFunction> = fam.iter().map(|u| u.scale(3.0)).collect();
        let a = poincare_ratio(&fam, &params(2.0, 0.5)).unwrap();
        let b = poincare_ratio(&scaled, &params(2.0, 0.5)).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((x.ratio - y.ratio).abs() < 1e-8 * x.ratio);
        }
    }

    #[test]
    fn ws1_of_zero_and_hat() {
        let d = Domain::interval(0.0, 1.0, 48).unwrap();
        let z = ws1_embedding(&GridFunction::zeros(d), &params(2.0, 0.25)).unwrap();
        assert_eq!(z.gap, 0.0);
        let hat = make_test_function(TestKind::Hat, &d, 0);
        let r = ws1_embedding(&hat, &params(2.0, 0.25)).unwrap();
        assert_eq!(r.c_prime, 0.0);
        assert!(r.gap >= 0.0, "{r:?}");
    }

    #[test]
    fn lipschitz_cutoffs() {
        let d = Domain::interval(0.0, 1.0, 40).unwrap();
        let u = make_test_function(TestKind::Random, &d, 3);
        let p = params(2.0, 0.3);
        let (b, a) = lipschitz_composition(&u, u.sup_norm(), &p).unwrap();
        assert_eq!(a, b);
        let (_, a0) = lipschitz_composition(&u, 0.0, &p).unwrap();
        assert_eq!(a0, 0.0);
    }

    #[test]
    fn mollifier_of_constant() {
        let d = Domain::interval(0.0, 1.0, 64).unwrap();
        let t = mollifier_convergence(&GridFunction::constant(d, 2.0), &params(2.0, 0.3), &[0.2, 0.1, 0.01]).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.skipped.len(), 1);
        assert!(t.rows.iter().all(|r| r.norm_distance == 0.0));
    }
}
