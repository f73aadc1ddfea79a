//! Galerkin descent solver for the Dirichlet problem (−Δ)^s_m u = f in Ω,
//! u = 0 off Ω, plus the monotonicity and coercivity probes of the operator.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Extension, GridFunction};
use crate::error::{Error, Result};
use crate::fracspace::{frac_norm, Coverage, FracKernel, FracParams};
use crate::nfunction::Delta2Estimate;
use crate::operator::weak_pairing;

#[derive(Clone, Debug)]
pub struct DirichletProblem {
    f: GridFunction,
    params: FracParams,
}

impl DirichletProblem {
    /// Exterior pairs are always included: the unknown vanishes off Ω.
    pub fn new(f: GridFunction, params: FracParams) -> Result<Self> {
        Ok(DirichletProblem { f, params: params.with_coverage(Coverage::WithExterior) })
    }

    pub fn domain(&self) -> &Domain {
        self.f.domain()
    }

    pub fn rhs(&self) -> &GridFunction {
        &self.f
    }

    pub fn params(&self) -> &FracParams {
        &self.params
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Stop once the Euclidean norm of the gradient is at most this.
    pub grad_tol: f64,
    pub max_iter: usize,
    /// Backtracking factor in (0, 1).
    pub contraction: f64,
    /// Armijo constant in (0, 1).
    pub sufficient_decrease: f64,
    /// Largest number of step halvings per iteration.
    pub max_backtracks: usize,
    /// Scales c for the coercivity scan of ⟨A(cu), cu⟩/‖cu‖.
    pub probe_scales: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grad_tol: 1e-8,
            max_iter: 10_000,
            contraction: 0.5,
            sufficient_decrease: 1e-4,
            max_backtracks: 60,
            probe_scales: vec![1.0, 2.0, 4.0, 8.0],
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::Invalid(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if !(self.contraction > 0.0 && self.contraction < 1.0) {
            return Err(Error::Invalid(format!("contraction must lie in (0, 1), got {}", self.contraction)));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::Invalid(format!(
                "sufficient_decrease must lie in (0, 1), got {}",
                self.sufficient_decrease
            )));
        }
        if self.max_iter == 0 || self.max_backtracks == 0 {
            return Err(Error::Invalid("max_iter and max_backtracks must be positive".into()));
        }
        if self.probe_scales.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::Invalid("probe scales must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// J after each accepted step, starting with the initial guess.
    pub energy_trace: Vec<f64>,
    pub residual_trace: Vec<f64>,
    /// Sampled Δ2 constant of M on the working range.
    pub delta2: Delta2Estimate,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub u: GridFunction,
    pub coefficients: Vec<f64>,
    pub report: SolveReport,
}

/// The discrete problem over the interior nodal basis.
///
/// Unknown i is the value at the i-th interior node of Ω; u vanishes on ∂Ω
/// and in the halo.
#[derive(Clone, Debug)]
pub struct Galerkin {
    kernel: FracKernel,
    unknowns: Vec<usize>,
    work: Vec<usize>,
    load: Vec<f64>,
}

impl Galerkin {
    pub fn new(problem: &DirichletProblem) -> Result<Self> {
        let dom = *problem.domain();
        let kernel = FracKernel::new(&dom, &problem.params)?;
        let unknowns = dom.interior_indices();
        let work: Vec<usize> = unknowns.iter().map(|&i| kernel.embedding()[i]).collect();
        let f = problem.f.values();
        let load = unknowns.iter().zip(&work).map(|(&i, &k)| kernel.weights()[k] * f[i]).collect();
        Ok(Galerkin { kernel, unknowns, work, load })
    }

    pub fn dim(&self) -> usize {
        self.unknowns.len()
    }

    /// (∫ f φ_i)_i for the nodal basis under the single rule.
    pub fn load(&self) -> &[f64] {
        &self.load
    }

    fn check(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.dim() {
            return Err(Error::Invalid(format!("expected {} coefficients, got {}", self.dim(), coeffs.len())));
        }
        Ok(())
    }

    fn working_values(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.kernel.geometry().domain().len()];
        for (&k, &c) in self.work.iter().zip(coeffs) {
            out[k] = c;
        }
        out
    }

    /// The grid function with the given interior coefficients.
    pub fn expand(&self, coeffs: &[f64]) -> Result<GridFunction> {
        self.check(coeffs)?;
        let dom = *self.kernel.domain();
        let mut values = vec![0.0; dom.len()];
        for (&i, &c) in self.unknowns.iter().zip(coeffs) {
            values[i] = c;
        }
        GridFunction::new(dom, values, Extension::ZeroOutside)
    }

    /// J(U) = Φ_{s,M}(u_U) − ∫ f u_U.
    pub fn energy(&self, coeffs: &[f64]) -> Result<f64> {
        self.check(coeffs)?;
        let phi = self.kernel.discrete_modular(&self.working_values(coeffs), 1.0)?;
        let linear: f64 = self.load.iter().zip(coeffs).map(|(a, b)| a * b).sum();
        Ok(phi - linear)
    }

    /// ∂J/∂U_i = ⟨(−Δ)^s_m u_U, φ_i⟩ − ∫ f φ_i.
    pub fn gradient(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check(coeffs)?;
        let rows = self.kernel.operator_rows(&self.working_values(coeffs), &self.work);
        let w = self.kernel.weights();
        Ok(rows.iter().zip(&self.work).zip(&self.load).map(|((a, &k), l)| w[k] * a - l).collect())
    }

    /// Φ(u_new) − Φ(u_old) − ⟨Φ'(u_old), u_new − u_old⟩ ≥ 0, summed pairwise.
    fn remainder(&self, old: &[f64], new: &[f64]) -> f64 {
        let a = self.working_values(old);
        let b = self.working_values(new);
        let (w, ik, m) = (self.kernel.weights(), self.kernel.inv_kernel(), self.kernel.nfunction());
        let sums = self.kernel.geometry().sum(self.kernel.support(), |i, j, o| {
            let da = a[i] - a[j];
            let db = b[i] - b[j];
            if da == db {
                return 0.0;
            }
            w[i] * w[j] * m.bregman(da * ik[o], db * ik[o])
        });
        *sums.last().unwrap_or(&0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn delta2_on_working_range(p: &FracParams) -> Result<Delta2Estimate> {
    let upper = (0.5 * p.m.cap()).min(1e3);
    p.m.delta2_constant(0.0, upper)
}

/// Steepest descent with Barzilai-Borwein trial steps and Armijo
/// backtracking, from U = 0.
pub fn solve(problem: &DirichletProblem, cfg: &SolverConfig) -> Result<Solution> {
    let g = Galerkin::new(problem)?;
    solve_from(problem, cfg, &vec![0.0; g.dim()])
}

/// [`solve`] from a given coefficient vector.
///
/// Energy differences are accumulated as R − α‖∇J‖², where R is the
/// pairwise second-order remainder, so the trace stays monotone even when
/// the decrease is far below the energy's rounding level.
pub fn solve_from(problem: &DirichletProblem, cfg: &SolverConfig, start: &[f64]) -> Result<Solution> {
    cfg.validate()?;
    let delta2 = delta2_on_working_range(&problem.params)?;
    let g = Galerkin::new(problem)?;
    g.check(start)?;
    let mut u = start.to_vec();
    let mut energy = g.energy(&u)?;
    let mut grad = g.gradient(&u)?;
    let mut residual = dot(&grad, &grad).sqrt();
    let mut energy_trace = vec![energy];
    let mut residual_trace = vec![residual];
    let mut alpha = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    while residual > cfg.grad_tol {
        if iterations >= cfg.max_iter {
            return Err(Error::NonConvergence { iterations, residual });
        }
        if let Some((du, dg)) = &prev {
            let sy = dot(du, dg);
            if sy > 0.0 {
                alpha = dot(du, du) / sy;
            }
        }
        let g2 = residual * residual;
        let mut accepted = None;
        for _ in 0..cfg.max_backtracks {
            let trial: Vec<f64> = u.iter().zip(&grad).map(|(x, d)| x - alpha * d).collect();
            let change = g.remainder(&u, &trial) - alpha * g2;
            if change <= -cfg.sufficient_decrease * alpha * g2 {
                accepted = Some((trial, change));
                break;
            }
            alpha *= cfg.contraction;
        }
        let Some((next, change)) = accepted else {
            return Err(Error::StepUnderflow { iteration: iterations, residual });
        };
        let next_grad = g.gradient(&next)?;
        let du: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let dg: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        prev = Some((du, dg));
        u = next;
        grad = next_grad;
        energy += change;
        residual = dot(&grad, &grad).sqrt();
        energy_trace.push(energy);
        residual_trace.push(residual);
        iterations += 1;
    }
    let report = SolveReport { converged: true, iterations, residual, energy_trace, residual_trace, delta2 };
    Ok(Solution { u: g.expand(&u)?, coefficients: u, report })
}

/// ⟨A(u) − A(v), u − v⟩.
pub fn monotonicity_probe(u: &GridFunction, v: &GridFunction, p: &FracParams) -> Result<f64> {
    let diff = u.sub(v)?;
    Ok(weak_pairing(u, &diff, p)?.value - weak_pairing(v, &diff, p)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoercivityRow {
    pub scale: f64,
    pub norm: f64,
    /// ⟨A(cu), cu⟩ / ‖cu‖_{s,M}.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoercivityTable {
    pub rows: Vec<CoercivityRow>,
    /// Least-squares slope of ln ratio against ln ‖cu‖; its value plus one
    /// is the measured growth exponent.
    pub slope: Option<f64>,
}

/// ⟨A(cu), cu⟩/‖cu‖_{s,M} for each scale c.
pub fn coercivity_probe(u: &GridFunction, scales: &[f64], p: &FracParams) -> Result<CoercivityTable> {
    if u.is_zero() {
        return Err(Error::Degenerate("coercivity probe needs a non-zero function".into()));
    }
    let mut rows = Vec::with_capacity(scales.len());
    for &c in scales {
        if !(c > 0.0) {
            return Err(Error::Invalid(format!("scales must be positive, got {c}")));
        }
        let cu = u.scale(c);
        let norm = frac_norm(&cu, p)?;
        let pairing = weak_pairing(&cu, &cu, p)?.value;
        rows.push(CoercivityRow { scale: c, norm, ratio: pairing / norm });
    }
    let slope = (rows.len() >= 2).then(|| {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.norm.ln(), r.ratio.ln())).collect();
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(CoercivityTable { rows, slope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_test_function, TestKind};
    use crate::nfunction::NFunctionSpec;

    fn problem(p: f64, f: f64, n: usize) -> DirichletProblem {
        let d = Domain::interval(0.0, 1.0, n).unwrap();
        let mut values = vec![f; n];
        values[0] = 0.0;
        values[n - 1] = 0.0;
        let f = GridFunction::new(d, values, Extension::Undefined).unwrap();
        DirichletProblem::new(f, FracParams::new(0.4, NFunctionSpec::power(p).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn zero_rhs_gives_exact_zero() {
        let sol = solve(&problem(2.0, 0.0, 20), &SolverConfig::default()).unwrap();
        assert!(sol.coefficients.iter().all(|&c| c == 0.0));
        assert_eq!(sol.report.residual, 0.0);
        assert_eq!(sol.report.iterations, 0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let prob = problem(3.0, 1.0, 24);
        let g = Galerkin::new(&prob).unwrap();
        let u = make_test_function(TestKind::Random, prob.domain(), 2);
        let coeffs: Vec<f64> = prob.domain().interior_indices().iter().map(|&i| u.values()[i]).collect();
        let grad = g.gradient(&coeffs).unwrap();
        for i in [0, 7, 15] {
            let e = 1e-5;
            let mut a = coeffs.clone();
            let mut b = coeffs.clone();
            a[i] += e;
            b[i] -= e;
            let fd = (g.energy(&a).unwrap() - g.energy(&b).unwrap()) / (2.0 * e);
            assert!((fd - grad[i]).abs() < 1e-6 * grad[i].abs().max(1e-3), "{i}: {fd} {}", grad[i]);
        }
    }

    #[test]
    fn energy_trace_decreases() {
        let sol = solve(&problem(2.5, 1.0, 24), &SolverConfig::default()).unwrap();
        assert!(sol.report.energy_trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(sol.report.residual <= 1e-8);
        let g = Galerkin::new(&problem(2.5, 1.0, 24)).unwrap();
        let direct = g.energy(&sol.coefficients).unwrap();
        let traced = *sol.report.energy_trace.last().unwrap();
        assert!((direct - traced).abs() < 1e-10 * direct.abs());
    }

    #[test]
    fn non_convergence_is_reported() {
        let cfg = SolverConfig { max_iter: 2, ..SolverConfig::default() };
        assert!(matches!(solve(&problem(2.0, 1.0, 24), &cfg), Err(Error::NonConvergence { .. })));
    }

    #[test]
    fn probes() {
        let d = Domain::interval(0.0, 1.0, 32).unwrap();
        let p = FracParams::new(0.3, NFunctionSpec::power(2.5).unwrap()).unwrap();
        let u = make_test_function(TestKind::Bump, &d, 1);
        assert_eq!(monotonicity_probe(&u, &u, &p).unwrap(), 0.0);
        let v = make_test_function(TestKind::Bump, &d, 2);
        assert!(monotonicity_probe(&u, &v, &p).unwrap() > 0.0);
        let t = coercivity_probe(&u, &[1.0], &p).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.slope.is_none());
    }
}
