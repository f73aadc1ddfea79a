use super::{Domain, Extension, GridFunction};
use crate::error::{Error, Result};
use crate::par;

fn bump(r2: f64) -> f64 {
    if r2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r2)).exp()
    }
}

/// Discrete convolution with the standard bump J_ε(x) = ε^{-N} J(x/ε).
///
/// A zero-outside `u` is convolved as its zero extension, with the kernel
/// normalised to unit discrete mass over the whole lattice. Otherwise the
/// kernel is truncated to the grid and renormalised at every node, so
/// constants are reproduced exactly.
pub fn mollify(u: &GridFunction, eps: f64) -> Result<GridFunction> {
    let dom: Domain = *u.domain();
    let h = dom.spacing();
    let h_max = if dom.dim() == 1 { h[0] } else { h[0].max(h[1]) };
    if !(eps >= 2.0 * h_max * (1.0 - 1e-12)) {
        return Err(Error::Resolution { eps, h: h_max });
    }
    let [nx, ny] = dom.shape();
    let kx = (eps / h[0]).floor() as isize;
    let ky = if dom.dim() == 2 { (eps / h[1]).floor() as isize } else { 0 };
    let mut stencil = Vec::new();
    for a in -kx..=kx {
        for b in -ky..=ky {
            let zx = a as f64 * h[0] / eps;
            let zy = if dom.dim() == 2 { b as f64 * h[1] / eps } else { 0.0 };
            let j = bump(zx * zx + zy * zy);
            if j > 0.0 {
                stencil.push((a, b, j));
            }
        }
    }
    let lattice_mass: f64 = stencil.iter().map(|s| s.2).sum();
    let zero_outside = u.extension() == Extension::ZeroOutside;
    let values = u.values();
    let out = par::map_indexed(dom.len(), |i| {
        let (ix, iy) = dom.multi_index(i);
        let mut acc = 0.0;
        let mut mass = 0.0;
        for &(a, b, j) in &stencil {
            let jx = ix as isize + a;
            let jy = iy as isize + b;
            if jx < 0 || jy < 0 || jx >= nx as isize || jy >= ny as isize {
                continue;
            }
            acc += j * values[dom.index(jx as usize, jy as usize)];
            mass += j;
        }
        if zero_outside {
            acc / lattice_mass
        } else {
            acc / mass
        }
    });
    let extension = if zero_outside && (0..dom.len()).all(|i| !dom.is_boundary(i) || out[i] == 0.0) {
        Extension::ZeroOutside
    } else {
        Extension::Undefined
    };
    GridFunction::new(dom, out, extension)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{integrate, make_test_function, SingleRule, TestKind};

    #[test]
    fn constants_are_preserved() {
        let d = Domain::rectangle([0.0, 1.0], [0.0, 1.0], [21, 21]).unwrap();
        let c = GridFunction::constant(d, 2.5);
        let m = mollify(&c, 0.2).unwrap();
        assert!(m.values().iter().all(|v| (v - 2.5).abs() < 1e-14));
    }

    #[test]
    fn resolution_guard() {
        let d = Domain::interval(0.0, 1.0, 11).unwrap();
        assert!(matches!(mollify(&GridFunction::zeros(d), 0.1), Err(Error::Resolution { .. })));
        assert!(mollify(&GridFunction::zeros(d), 0.2).is_ok());
    }

    #[test]
    fn mass_and_support_preserved() {
        let d = Domain::interval(0.0, 1.0, 257).unwrap();
        let u = make_test_function(TestKind::Bump, &d, 0);
        let m = mollify(&u, 0.05).unwrap();
        let a = integrate(&u, SingleRule::Trapezoid);
        let b = integrate(&m, SingleRule::Trapezoid);
        assert!((a - b).abs() < 1e-10);
        // support [0.1, 0.9], so eps = 0.05 keeps everything inside [0.05, 0.95]
        for (i, v) in m.values().iter().enumerate() {
            let x = d.coords(i)[0];
            if !(0.05..=0.95).contains(&x) {
                assert_eq!(*v, 0.0);
            }
        }
        assert_eq!(m.extension(), Extension::ZeroOutside);
    }
}
