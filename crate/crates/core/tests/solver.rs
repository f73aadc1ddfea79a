use frac_orlicz::domain::{make_test_function, Domain, GridFunction, TestKind};
use frac_orlicz::fracspace::FracParams;
use frac_orlicz::nfunction::NFunctionSpec;
use frac_orlicz::operator::weak_pairing;
use frac_orlicz::solver::{solve, DirichletProblem, Galerkin, SolverConfig};
use frac_orlicz::Error;
use proptest::prelude::*;

fn problem(f: GridFunction, p: f64, s: f64) -> DirichletProblem {
    DirichletProblem::new(f, FracParams::new(s, NFunctionSpec::power(p).unwrap()).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // For M = t², the solution map f ↦ u is linear.
    #[test]
    fn quadratic_problem_is_linear(a in 1u64..100, b in 100u64..200, c in -2.0f64..2.0) {
        let d = Domain::interval(0.0, 1.0, 24).unwrap();
        let f = make_test_function(TestKind::Bump, &d, a);
        let g = make_test_function(TestKind::Bump, &d, b);
        let cfg = SolverConfig { grad_tol: 1e-13, ..SolverConfig::default() };
        let uf = solve(&problem(f.clone(), 2.0, 0.4), &cfg).unwrap().coefficients;
        let ug = solve(&problem(g.clone(), 2.0, 0.4), &cfg).unwrap().coefficients;
        let ufg = solve(&problem(f.combine(1.0, &g, c).unwrap(), 2.0, 0.4), &cfg).unwrap().coefficients;
        let scale = ufg.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-3);
        for i in 0..ufg.len() {
            prop_assert!((ufg[i] - uf[i] - c * ug[i]).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn energy_trace_is_monotone(p in 2.0f64..3.5, s in 0.2f64..0.8) {
        let d = Domain::interval(0.0, 1.0, 20).unwrap();
        let sol = solve(&problem(GridFunction::constant(d, 1.0), p, s), &SolverConfig::default()).unwrap();
        prop_assert!(sol.report.energy_trace.windows(2).all(|w| w[1] <= w[0]));
    }
}

// Galerkin optimality tested against smooth v: ⟨A u, v⟩ = ∫ f v.
#[test]
fn solution_satisfies_weak_form() {
    let d = Domain::interval(0.0, 1.0, 30).unwrap();
    let f = GridFunction::constant(d, 1.0);
    let prob = problem(f, 2.5, 0.3);
    let sol = solve(&prob, &SolverConfig { grad_tol: 1e-12, ..SolverConfig::default() }).unwrap();
    let w = d.weights(frac_orlicz::domain::SingleRule::Trapezoid);
    for seed in [0, 3, 8] {
        let v = make_test_function(TestKind::Bump, &d, seed);
        let lhs = weak_pairing(&sol.u, &v, prob.params()).unwrap().value;
        let rhs: f64 = v.values().iter().zip(&w).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9, "seed {seed}: {lhs} vs {rhs}");
    }
}

#[test]
fn energy_decreases_from_start_to_solution() {
    let d = Domain::interval(0.0, 1.0, 26).unwrap();
    let prob = problem(GridFunction::constant(d, 2.0), 3.0, 0.5);
    let g = Galerkin::new(&prob).unwrap();
    let sol = solve(&prob, &SolverConfig::default()).unwrap();
    assert!(g.energy(&sol.coefficients).unwrap() < g.energy(&vec![0.0; g.dim()]).unwrap());
    assert!(sol.u.values().iter().all(|&v| v >= 0.0), "positive data gives a non-negative solution");
}

#[test]
fn config_rejects_bad_values_and_unknown_fields() {
    let bad = SolverConfig { contraction: 1.5, ..SolverConfig::default() };
    assert!(matches!(bad.validate(), Err(Error::Invalid(_))));
    assert!(serde_json::from_str::<SolverConfig>(r#"{"grad_tol": 1e-6, "typo": 1}"#).is_err());
    let cfg: SolverConfig = serde_json::from_str(r#"{"grad_tol": 1e-6}"#).unwrap();
    assert_eq!(cfg.max_iter, SolverConfig::default().max_iter);
}
