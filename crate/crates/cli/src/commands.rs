use frac_orlicz::domain::{make_test_function, TestKind};
use frac_orlicz::fracspace::{
    frac_modular, frac_norm, gagliardo_seminorm, orlicz_gagliardo_seminorm, wsp_seminorm, FracParams,
};
use frac_orlicz::nfunction::log_grid;
use frac_orlicz::operator::apply_field;
use frac_orlicz::orlicz::{amemiya_orlicz_norm, luxemburg_norm, modular};
use frac_orlicz::solver::{coercivity_probe, solve, DirichletProblem};
use frac_orlicz::verify::{self, RatioReport};
use frac_orlicz::{Domain, GridFunction, NFunctionSpec};
use serde_json::{json, Value};

use crate::config::{Config, Suite};
use crate::report::{num, Artifacts};
use crate::{CliError, Command};

pub fn dispatch(cmd: Command, cfg: &Config, out: &mut Artifacts) -> Result<Value, CliError> {
    match cmd {
        Command::Nfun => nfun(cfg, out),
        Command::Norm => norm(cfg, out),
        Command::Apply => apply(cfg, out),
        Command::Solve => solve_cmd(cfg, out),
        Command::Verify => verify_cmd(cfg, out),
        Command::ReduceP => reduce_p(cfg, out),
    }
}

fn opt(r: frac_orlicz::Result<f64>) -> String {
    r.map(num).unwrap_or_default()
}

fn grid_header(dom: &Domain, value: &'static str) -> Vec<&'static str> {
    if dom.dim() == 1 {
        vec!["node", "x", value]
    } else {
        vec!["node", "x", "y", value]
    }
}

fn grid_rows<'a>(dom: &'a Domain, values: &'a [f64]) -> impl Iterator<Item = Vec<String>> + 'a {
    values.iter().enumerate().map(move |(k, &v)| {
        let c = dom.coords(k);
        let mut row = vec![k.to_string(), num(c[0])];
        if dom.dim() == 2 {
            row.push(num(c[1]));
        }
        row.push(num(v));
        row
    })
}

fn nfun(cfg: &Config, out: &mut Artifacts) -> Result<Value, CliError> {
    let c = &cfg.nfun;
    if !(c.t_min > 0.0 && c.t_max > c.t_min) || c.points < 2 {
        return Err(CliError::Validation("nfun: need 0 < t_min < t_max and points >= 2".into()));
    }
    let m = cfg.nfunction.build()?;
    let conj = m.conjugate();
    let ts = log_grid(c.t_min, c.t_max, c.points);
    out.csv(
        "nfunction.csv",
        &["t", "M", "m", "M_inverse", "conjugate", "conjugate_inverse"],
        ts.iter().map(|&t| {
            vec![num(t), opt(m.eval(t)), opt(m.density(t)), opt(m.inverse(t)), opt(conj.eval(t)), opt(conj.inverse(t))]
        }),
    )?;

    let delta2 = m.delta2_constant(0.0, c.delta2_upper)?;
    out.csv("delta2.csv", &["t0", "upper", "constant", "argmax"], [vec![
        num(delta2.lower),
        num(delta2.upper),
        num(delta2.constant),
        num(delta2.argmax),
    ]])?;

    let sobolev = match m.sobolev_conjugate(c.dim, cfg.s) {
        Ok(star) => {
            let (lo, hi) = (1e-6 * star.cap(), 1e-1 * star.cap());
            let slope = star.log_log_slope(lo, hi, 200)?;
            let xs = log_grid(lo, hi, c.points);
            out.csv(
                "sobolev_conjugate.csv",
                &["x", "M_star", "m_star"],
                xs.iter().map(|&x| vec![num(x), opt(star.eval(x)), opt(star.density(x))]),
            )?;
            json!({ "dim": c.dim, "s": cfg.s, "fitted_exponent": slope, "fit_range": [lo, hi], "cap": star.cap() })
        }
        Err(frac_orlicz::Error::Precondition(msg)) => {
            out.csv("sobolev_conjugate.csv", &["x", "M_star", "m_star"], std::iter::empty())?;
            json!({ "dim": c.dim, "s": cfg.s, "unavailable": msg })
        }
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "nfunction": m.label(),
        "cap": m.cap(),
        "delta2": delta2,
        "sobolev_conjugate": sobolev,
    }))
}

fn norm(cfg: &Config, out: &mut Artifacts) -> Result<Value, CliError> {
    let p = cfg.params()?;
    let dom = cfg.domain.build()?;
    let u = cfg.function.build(&dom, cfg.seed);
    out.csv("function.csv", &grid_header(&dom, "u"), grid_rows(&dom, u.values()))?;
    let ladder = frac_modular(&u, &p, 1.0)?;
    out.csv(
        "modular_ladder.csv",
        &["width", "estimate"],
        ladder.widths.iter().zip(&ladder.estimates).map(|(w, e)| vec![num(*w), num(*e)]),
    )?;
    Ok(json!({
        "modular": modular(&u, &p.m)?,
        "luxemburg": luxemburg_norm(&u, &p.m)?,
        "amemiya": amemiya_orlicz_norm(&u, &p.m)?,
        "fractional_modular": ladder.value,
        "fractional_modular_extrapolated": ladder.extrapolated,
        "gagliardo_seminorm": gagliardo_seminorm(&u, &p)?,
        "orlicz_gagliardo_seminorm": orlicz_gagliardo_seminorm(&u, &p)?,
        "fractional_norm": frac_norm(&u, &p)?,
    }))
}

fn apply(cfg: &Config, out: &mut Artifacts) -> Result<Value, CliError> {
    let p = cfg.params()?;
    let dom = cfg.domain.build()?;
    let u = cfg.function.build(&dom, cfg.seed);
    let field = apply_field(&u, &p)?;
    out.csv("field.csv", &grid_header(&dom, "value"), grid_rows(&dom, &field))?;
    let max_abs = field.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(json!({ "nodes": field.len(), "max_abs": max_abs }))
}

fn solve_cmd(cfg: &Config, out: &mut Artifacts) -> Result<Value, CliError> {
    let p = cfg.params()?;
    let dom = cfg.domain.build()?;
    let f = cfg.rhs.build(&dom, cfg.seed);
    let problem = DirichletProblem::new(f, p)?;
    let sol = solve(&problem, &cfg.solver)?;
    let r = &sol.report;
    out.csv("solution.csv", &grid_header(&dom, "u"), grid_rows(&dom, sol.u.values()))?;
    out.csv(
        "trace.csv",
        &["iteration", "energy", "residual"],
        r.energy_trace
            .iter()
            .zip(&r.residual_trace)
            .enumerate()
            .map(|(k, (e, g))| vec![k.to_string(), num(*e), num(*g)]),
    )?;
    let coercivity = if sol.u.is_zero() {
        Value::Null
    } else {
        let table = coercivity_probe(&sol.u, &cfg.solver.probe_scales, problem.params())?;
        out.csv(
            "coercivity.csv",
            &["scale", "norm", "ratio"],
            table.rows.iter().map(|r| vec![num(r.scale), num(r.norm), num(r.ratio)]),
        )?;
        json!({ "slope": table.slope })
    };
    Ok(json!({
        "converged": r.converged,
        "iterations": r.iterations,
        "residual": r.residual,
        "energy": r.energy_trace.last(),
        "delta2": r.delta2,
        "coercivity": coercivity,
    }))
}

fn family(dom: &Domain, cfg: &Config) -> Vec<GridFunction> {
    (0..cfg.verify.family_size as u64).map(|i| make_test_function(TestKind::Bump, dom, cfg.seed + i)).collect()
}

fn ratio_suite(out: &mut Artifacts, name: &str, report: &RatioReport) -> Result<Value, CliError> {
    out.csv(
        &format!("{name}.csv"),
        &["index", "numerator", "denominator", "ratio"],
        report.rows.iter().map(|r| vec![r.index.to_string(), num(r.numerator), num(r.denominator), num(r.ratio)]),
    )?;
    Ok(json!({ "max_ratio": report.max, "rows": report.rows.len(), "skipped": report.skipped }))
}

fn verify_cmd(cfg: &Config, out: &mut Artifacts) -> Result<Value, CliError> {
    let v = &cfg.verify;
    if v.family_size == 0 {
        return Err(CliError::Validation("verify.family_size: must be positive".into()));
    }
    let p = cfg.params()?;
    let dom = cfg.domain.build()?;
    let fam = family(&dom, cfg);
    let u = cfg.function.build(&dom, cfg.seed);
    let mut summary = serde_json::Map::new();
    for &suite in &v.suites {
        let (key, value) = match suite {
            Suite::Poincare => ("poincare", ratio_suite(out, "poincare", &verify::poincare_ratio(&fam, &p)?)?),
            Suite::Embedding => {
                ("embedding", ratio_suite(out, "embedding", &verify::embedding_ratio(&fam, &p, dom.dim())?)?)
            }
            Suite::NormEquivalence => ("norm_equivalence", norm_equivalence(out, &fam, &p)?),
            Suite::Ws1 => ("ws1", ws1(out, &fam, &p)?),
            Suite::Lipschitz => ("lipschitz", lipschitz(out, &fam, &p, v.cutoff_fraction)?),
            Suite::Mollifier => {
                let t = verify::mollifier_convergence(&u, &p, &v.eps_ladder)?;
                out.csv(
                    "mollifier.csv",
                    &["eps", "norm_distance", "seminorm_distance"],
                    t.rows.iter().map(|r| vec![num(r.eps), num(r.norm_distance), num(r.seminorm_distance)]),
                )?;
                ("mollifier", json!({ "rows": t.rows.len(), "skipped": t.skipped }))
            }
            Suite::Compactness => ("compactness", compactness(out, &fam, &p, &v.target.build()?, &v.eps_ladder)?),
        };
        summary.insert(key.to_string(), value);
    }
    Ok(Value::Object(summary))
}

fn norm_equivalence(out: &mut Artifacts, fam: &[GridFunction], p: &FracParams) -> Result<Value, CliError> {
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (i, u) in fam.iter().enumerate() {
        match verify::norm_equivalence(u, p)? {
            Some(e) => rows.push((i, e)),
            None => skipped.push(i),
        }
    }
    out.csv(
        "norm_equivalence.csv",
        &["index", "seminorm_ratio", "norm_ratio"],
        rows.iter().map(|(i, e)| vec![i.to_string(), num(e.seminorm_ratio), num(e.norm_ratio)]),
    )?;
    let range = |f: fn(&verify::NormEquivalence) -> f64| {
        let vals: Vec<f64> = rows.iter().map(|(_, e)| f(e)).collect();
        vals.iter().copied().reduce(f64::min).map(|lo| [lo, vals.iter().copied().fold(lo, f64::max)])
    };
    Ok(json!({
        "seminorm_ratio_range": range(|e| e.seminorm_ratio),
        "norm_ratio_range": range(|e| e.norm_ratio),
        "skipped": skipped,
    }))
}

fn ws1(out: &mut Artifacts, fam: &[GridFunction], p: &FracParams) -> Result<Value, CliError> {
    let reports = fam.iter().map(|u| verify::ws1_embedding(u, p)).collect::<Result<Vec<_>, _>>()?;
    out.csv(
        "ws1.csv",
        &["index", "ws1_norm", "frac_norm_m1", "constant", "gap"],
        reports.iter().enumerate().map(|(i, r)| {
            vec![i.to_string(), num(r.ws1_norm), num(r.frac_norm_m1), num(r.constant), num(r.gap)]
        }),
    )?;
    let min_gap = reports.iter().map(|r| r.gap).reduce(f64::min);
    Ok(json!({
        "min_gap": min_gap,
        "holds": min_gap.is_some_and(|g| g >= 0.0),
        "constant": reports.first().map(|r| r.constant),
        "c_prime": reports.first().map(|r| r.c_prime),
    }))
}

fn lipschitz(out: &mut Artifacts, fam: &[GridFunction], p: &FracParams, fraction: f64) -> Result<Value, CliError> {
    if !(fraction > 0.0) {
        return Err(CliError::Validation("verify.cutoff_fraction: must be positive".into()));
    }
    let mut rows = Vec::with_capacity(fam.len());
    for u in fam {
        let cutoff = fraction * u.sup_norm();
        let (before, after) = verify::lipschitz_composition(u, cutoff, p)?;
        rows.push((cutoff, before, after));
    }
    out.csv(
        "lipschitz.csv",
        &["index", "cutoff", "before", "after"],
        rows.iter().enumerate().map(|(i, r)| vec![i.to_string(), num(r.0), num(r.1), num(r.2)]),
    )?;
    let violations = rows.iter().filter(|r| r.2 > r.1).count();
    Ok(json!({ "rows": rows.len(), "violations": violations }))
}

fn compactness(
    out: &mut Artifacts,
    fam: &[GridFunction],
    p: &FracParams,
    target: &NFunctionSpec,
    eps_ladder: &[f64],
) -> Result<Value, CliError> {
    let r = verify::compact_embedding_evidence(fam, p, target, eps_ladder)?;
    out.csv(
        "compactness.csv",
        &["eps", "max_distance", "diameter"],
        r.rows.iter().map(|row| vec![num(row.eps), num(row.max_distance), num(row.diameter)]),
    )?;
    Ok(json!({
        "target": target.label(),
        "family_bound": r.family_bound,
        "dominance_ratios": r.dominance_ratios,
        "dominated": r.dominated,
        "skipped": r.skipped,
    }))
}

fn reduce_p(cfg: &Config, out: &mut Artifacts) -> Result<Value, CliError> {
    let c = &cfg.reduce_p;
    let dom = cfg.domain.build()?;
    let u = cfg.function.build(&dom, cfg.seed);
    let mut rows = Vec::new();
    for &exponent in &c.p_values {
        for &s in &c.s_values {
            let params = FracParams::new(s, NFunctionSpec::power(exponent)?)?
                .with_rule(cfg.quadrature)?
                .with_coverage(cfg.coverage);
            let orlicz = gagliardo_seminorm(&u, &params)?;
            let reference = wsp_seminorm(&u, s, exponent, &cfg.quadrature, cfg.coverage)?;
            let rel = (orlicz - reference).abs() / reference.abs().max(f64::MIN_POSITIVE);
            rows.push([exponent, s, orlicz, reference, rel]);
        }
    }
    out.csv(
        "reduce_p.csv",
        &["p", "s", "orlicz_seminorm", "wsp_seminorm", "rel_discrepancy"],
        rows.iter().map(|r| r.iter().map(|&x| num(x)).collect()),
    )?;
    let max_rel = rows.iter().map(|r| r[4]).reduce(f64::max);
    Ok(json!({
        "max_rel_discrepancy": max_rel,
        "tolerance": c.tolerance,
        "within_tolerance": max_rel.is_none_or(|m| m <= c.tolerance),
    }))
}
