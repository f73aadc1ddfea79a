use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Domain, Extension, GridFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Smooth compactly supported exp(1 − 1/(1 − ρ²)).
    Bump,
    /// Piecewise linear max(0, 1 − ρ).
    Hat,
    /// Affine a + b·x + c·y; not zero outside.
    Linear,
    /// Smoothed uniform noise tapered to zero at the boundary, unit height.
    Random,
}

struct Shape {
    center: [f64; 2],
    radius: [f64; 2],
    amplitude: f64,
}

/// Seed 0 gives the centred unit-height shape with radius 0.4 of the box;
/// other seeds draw the centre, radii and height, keeping the support two
/// cells away from the boundary.
fn shape(dom: &Domain, rng: &mut ChaCha8Rng, seed: u64) -> Shape {
    let lo = dom.lower();
    let hi = dom.upper();
    let h = dom.spacing();
    let mut s = Shape { center: [0.0; 2], radius: [1.0; 2], amplitude: 1.0 };
    for a in 0..dom.dim() {
        let len = hi[a] - lo[a];
        if seed == 0 {
            s.center[a] = 0.5 * (lo[a] + hi[a]);
            s.radius[a] = 0.4 * len;
        } else {
            let r = len * rng.random_range(0.15..0.4);
            let slack = (len - 2.0 * r - 4.0 * h[a]).max(0.0);
            s.radius[a] = r;
            s.center[a] = lo[a] + r + 2.0 * h[a] + slack * rng.random::<f64>();
        }
    }
    if seed != 0 {
        s.amplitude = rng.random_range(0.5..2.0);
    }
    s
}

fn rho2(dom: &Domain, s: &Shape, c: [f64; 2]) -> f64 {
    (0..dom.dim()).map(|a| ((c[a] - s.center[a]) / s.radius[a]).powi(2)).sum()
}

fn smooth_axis(dom: &Domain, v: &mut [f64], axis: usize) {
    let [nx, ny] = dom.shape();
    let src = v.to_vec();
    for i in 0..dom.len() {
        let (ix, iy) = dom.multi_index(i);
        let (k, n) = if axis == 0 { (ix, nx) } else { (iy, ny) };
        let at = |m: usize| if axis == 0 { src[dom.index(m, iy)] } else { src[dom.index(ix, m)] };
        let left = at(k.saturating_sub(1));
        let right = at((k + 1).min(n - 1));
        v[i] = 0.25 * left + 0.5 * src[i] + 0.25 * right;
    }
}

/// Deterministic test function of the given kind.
pub fn make_test_function(kind: TestKind, dom: &Domain, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (values, extension) = match kind {
        TestKind::Bump | TestKind::Hat => {
            let s = shape(dom, &mut rng, seed);
            let values = dom.sample(|c| {
                let r2 = rho2(dom, &s, c);
                if r2 >= 1.0 {
                    0.0
                } else if kind == TestKind::Bump {
                    s.amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
                } else {
                    s.amplitude * (1.0 - r2.sqrt())
                }
            });
            (values, Extension::ZeroOutside)
        }
        TestKind::Linear => {
            let (a, b, c) = if seed == 0 {
                (0.0, 1.0, 0.0)
            } else {
                (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            };
            (dom.sample(|x| a + b * x[0] + c * x[1]), Extension::Undefined)
        }
        TestKind::Random => {
            let mut v: Vec<f64> = (0..dom.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let shape = dom.shape();
            for (axis, &len) in shape.iter().enumerate().take(dom.dim()) {
                // k binomial passes have variance k/2 cells²; aim for a
                // correlation length of 1/16 of the box.
                let cells = len as f64 / 16.0;
                let passes = (2.0 * cells * cells).ceil().max(3.0) as usize;
                for _ in 0..passes {
                    smooth_axis(dom, &mut v, axis);
                }
            }
            let lo = dom.lower();
            let hi = dom.upper();
            for (i, x) in v.iter_mut().enumerate() {
                if dom.is_boundary(i) {
                    *x = 0.0;
                    continue;
                }
                let c = dom.coords(i);
                let taper: f64 =
                    (0..dom.dim()).map(|a| (std::f64::consts::PI * (c[a] - lo[a]) / (hi[a] - lo[a])).sin()).product();
                *x *= taper;
            }
            let peak = v.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            if peak > 0.0 {
                v.iter_mut().for_each(|x| *x /= peak);
            }
            (v, Extension::ZeroOutside)
        }
    };
    GridFunction::new(*dom, values, extension).expect("test functions satisfy their extension")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_bump_is_symmetric() {
        let d = Domain::interval(0.0, 1.0, 65).unwrap();
        let u = make_test_function(TestKind::Bump, &d, 0);
        let v = u.values();
        for i in 0..65 {
            assert!((v[i] - v[64 - i]).abs() < 1e-15);
        }
        let imax = (0..65).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
        assert_eq!(imax, 32);
        assert_eq!(v[32], 1.0);
    }

    #[test]
    fn seeds_are_deterministic() {
        let d = Domain::rectangle([0.0, 1.0], [0.0, 1.0], [12, 12]).unwrap();
        for kind in [TestKind::Bump, TestKind::Hat, TestKind::Linear, TestKind::Random] {
            assert_eq!(make_test_function(kind, &d, 11), make_test_function(kind, &d, 11));
        }
        assert_ne!(make_test_function(TestKind::Bump, &d, 1), make_test_function(TestKind::Bump, &d, 2));
    }

    #[test]
    fn random_has_zero_boundary() {
        let d = Domain::interval(0.0, 1.0, 64).unwrap();
        let u = make_test_function(TestKind::Random, &d, 7);
        assert_eq!(u.values()[0], 0.0);
        assert_eq!(u.values()[63], 0.0);
        assert!(u.sup_norm() > 0.0);
    }

    #[test]
    fn seeded_bumps_stay_inside() {
        let d = Domain::interval(0.0, 1.0, 64).unwrap();
        for seed in 1..50 {
            let u = make_test_function(TestKind::Bump, &d, seed);
            assert_eq!(u.extension(), Extension::ZeroOutside);
            assert_eq!(u.values()[1], 0.0);
            assert_eq!(u.values()[62], 0.0);
        }
    }
}
