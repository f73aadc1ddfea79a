use frac_orlicz::domain::{make_test_function, Domain, GridFunction, QuadratureRule, SingleRule, TestKind};
use frac_orlicz::fracspace::{frac_modular, gagliardo_seminorm, wsp_seminorm, Coverage, FracParams};
use frac_orlicz::nfunction::NFunctionSpec;
use frac_orlicz::orlicz::{amemiya_orlicz_norm, holder_gap, luxemburg_norm};
use frac_orlicz::par;
use proptest::prelude::*;

fn trapezoid_lp(u: &GridFunction, p: f64) -> f64 {
    let v = u.values();
    let n = v.len();
    let h = u.domain().spacing()[0];
    let total: f64 = (0..n)
        .map(|i| {
            let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
            w * v[i].abs().powf(p)
        })
        .sum();
    total.powf(1.0 / p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn luxemburg_of_power_is_lp(p in 1.2f64..4.0, seed in 1u64..500) {
        let d = Domain::interval(0.0, 1.0, 40).unwrap();
        let u = make_test_function(TestKind::Bump, &d, seed);
        let got = luxemburg_norm(&u, &NFunctionSpec::power(p).unwrap()).unwrap();
        let want = trapezoid_lp(&u, p);
        prop_assert!((got - want).abs() <= 1e-7 * want, "{got} {want}");
    }

    #[test]
    fn norms_are_homogeneous(c in 0.1f64..10.0, seed in 1u64..500) {
        let d = Domain::interval(0.0, 1.0, 32).unwrap();
        let u = make_test_function(TestKind::Random, &d, seed);
        let m = NFunctionSpec::power_log(2.0).unwrap();
        let a = luxemburg_norm(&u.scale(c), &m).unwrap();
        let b = c * luxemburg_norm(&u, &m).unwrap();
        prop_assert!((a - b).abs() <= 1e-7 * b);
        let p = FracParams::new(0.35, m).unwrap();
        let a = gagliardo_seminorm(&u.scale(c), &p).unwrap();
        let b = c * gagliardo_seminorm(&u, &p).unwrap();
        prop_assert!((a - b).abs() <= 1e-7 * b);
    }

    #[test]
    fn amemiya_sits_between_one_and_two(seed in 1u64..500) {
        let d = Domain::interval(0.0, 1.0, 32).unwrap();
        let u = make_test_function(TestKind::Bump, &d, seed);
        let m = NFunctionSpec::exp_quad();
        let r = amemiya_orlicz_norm(&u, &m).unwrap() / luxemburg_norm(&u, &m).unwrap();
        prop_assert!((1.0 - 1e-6..=2.0 + 1e-6).contains(&r), "{r}");
    }

    #[test]
    fn holder_gap_is_nonnegative(a in 1u64..200, b in 200u64..400) {
        let d = Domain::interval(0.0, 1.0, 32).unwrap();
        let u = make_test_function(TestKind::Random, &d, a);
        let v = make_test_function(TestKind::Bump, &d, b);
        prop_assert!(holder_gap(&u, &v, &NFunctionSpec::power(2.5).unwrap()).unwrap() >= -1e-10);
    }

    #[test]
    fn seminorm_triangle_inequality(a in 1u64..200, b in 200u64..400) {
        let d = Domain::interval(0.0, 1.0, 32).unwrap();
        let u = make_test_function(TestKind::Bump, &d, a);
        let v = make_test_function(TestKind::Hat, &d, b);
        let p = FracParams::new(0.3, NFunctionSpec::power(1.7).unwrap()).unwrap();
        let lhs = gagliardo_seminorm(&u.add(&v).unwrap(), &p).unwrap();
        let rhs = gagliardo_seminorm(&u, &p).unwrap() + gagliardo_seminorm(&v, &p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-7));
    }
}

#[test]
fn power_seminorm_matches_wsp_with_exterior() {
    let d = Domain::interval(0.0, 1.0, 48).unwrap();
    let u = make_test_function(TestKind::Bump, &d, 7);
    for (p, s) in [(1.5, 0.2), (2.0, 0.5), (3.0, 0.8)] {
        let params = FracParams::new(s, NFunctionSpec::power(p).unwrap()).unwrap().with_coverage(Coverage::WithExterior);
        let a = gagliardo_seminorm(&u, &params).unwrap();
        let b = wsp_seminorm(&u, s, p, &QuadratureRule::default(), Coverage::WithExterior).unwrap();
        assert!((a - b).abs() < 1e-7 * b, "p={p} s={s}: {a} {b}");
    }
}

#[test]
fn modular_at_gauge_is_one() {
    let d = Domain::rectangle([0.0, 1.0], [0.0, 1.0], [14, 14]).unwrap();
    let u = make_test_function(TestKind::Bump, &d, 3);
    let p = FracParams::new(0.4, NFunctionSpec::power(2.0).unwrap()).unwrap();
    let g = gagliardo_seminorm(&u, &p).unwrap();
    let phi = frac_modular(&u, &p, 1.0 / g).unwrap().value;
    assert!((phi - 1.0).abs() < 1e-7, "{phi}");
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let d = Domain::interval(0.0, 1.0, 96).unwrap();
    let u = make_test_function(TestKind::Random, &d, 5);
    let p = FracParams::new(0.45, NFunctionSpec::power_log(2.0).unwrap()).unwrap();
    let a = frac_modular(&u, &p, 1.3).unwrap();
    let b = par::sequential(|| frac_modular(&u, &p, 1.3).unwrap());
    assert_eq!(a.estimates, b.estimates);
}

#[test]
fn simpson_and_trapezoid_agree_on_smooth_data() {
    let d = Domain::interval(0.0, 1.0, 129).unwrap();
    let u = make_test_function(TestKind::Bump, &d, 0);
    let m = NFunctionSpec::power(2.0).unwrap();
    let rule = |single| FracParams::new(0.3, m.clone()).unwrap().with_rule(QuadratureRule { single, ..QuadratureRule::default() }).unwrap();
    let a = gagliardo_seminorm(&u, &rule(SingleRule::Trapezoid)).unwrap();
    let b = gagliardo_seminorm(&u, &rule(SingleRule::Simpson)).unwrap();
    assert!((a - b).abs() < 1e-2 * a);
}
