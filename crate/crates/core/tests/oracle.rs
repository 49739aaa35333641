//! Independent checks of the tabulated exact solution.

use coagrip::analytic::delta_of_b;
use coagrip::{ParametricSolution, PhysParams};

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 50)
}

fn h_reference(b: f64, p: &PhysParams) -> f64 {
    let integrand = |s: f64| delta_of_b(s, p).unwrap().powf(p.gamma) * (p.kappa + p.chi * s) / s;
    b * b * (-p.phi00 / (2.0 * p.b0 * p.b0) + adaptive_simpson(&integrand, p.b0, b, 1e-14))
}

#[test]
fn h_matches_adaptive_quadrature() {
    let fig1 = PhysParams::default();
    let fig2 = PhysParams {
        gamma: 0.5,
        chi: 0.1,
        ..PhysParams::default()
    };
    for p in [fig1, fig2] {
        let sol = ParametricSolution::new(&p).unwrap();
        for b in [0.9, 0.5, 0.2, 0.05] {
            let (got, want) = (sol.h_of_b(b).unwrap(), h_reference(b, &p));
            assert!((got - want).abs() <= 1e-8, "b={b}: {got} vs {want}");
        }
    }
}

#[test]
fn tau_matches_adaptive_quadrature() {
    let p = PhysParams::default();
    let sol = ParametricSolution::new(&p).unwrap();
    let inv_h = |s: f64| 1.0 / h_reference(s, &p);
    for b in [0.8, 0.5] {
        let want = adaptive_simpson(&inv_h, p.b0, b, 1e-11);
        let got = sol.tau_of_b(b).unwrap();
        assert!((got - want).abs() <= 1e-7 * want, "b={b}: {got} vs {want}");
    }
}

#[test]
fn delta_reference_value() {
    // 0.2 * 0.5^0.04 * exp(-0.001)
    let d = delta_of_b(0.5, &PhysParams::default()).unwrap();
    assert!((d - 0.19433655572605567).abs() < 1e-15);
}
