mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use plaplace_core::annulus::{minimize_annulus, SolveOptions};
use plaplace_core::radial::{make_grid, AnnulusSpec, RadialFunction, RadialGrid, Spacing};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CASES: [(usize, f64); 3] = [(3, 2.0), (4, 2.0), (4, 3.0)];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn grid_examples() {
    let spec = AnnulusSpec::new(1.0, 2.0, 3, 2.0).unwrap();
    assert_eq!(make_grid(&spec, 2, Spacing::Uniform).unwrap().nodes(), &[1.0, 1.5, 2.0]);
    let spec = AnnulusSpec::new(0.01, 1.0, 3, 2.0).unwrap();
    let g = make_grid(&spec, 2, Spacing::Logarithmic).unwrap();
    assert_eq!(g.nodes()[0], 0.01);
    assert!(rel(g.nodes()[1], 0.1) < 1e-15);
    assert_eq!(g.nodes()[2], 1.0);
    assert!(AnnulusSpec::new(2.0, 1.0, 3, 2.0).is_err());
    assert!(AnnulusSpec::new(0.5, 1.0, 3, 3.0).is_err());
}

#[test]
fn norms_agree_with_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (dim, p) in CASES {
        for (a, b) in [(0.5, 1.0), (1.0, 3.0), (0.01, 1.0)] {
            let grid = Arc::new(RadialGrid::logarithmic(a, b, 100, dim, p).unwrap());
            let u = common::random_dirichlet(&grid, &mut rng);
            let (grad, leb) = common::norms(&u);
            assert!(rel(u.grad_norm_p(), grad) < 1e-12);
            assert!(rel(u.lpstar_norm_pow(), leb) < 1e-12);
            assert!(rel(u.energy(), common::energy(&u)) < 1e-10);
        }
    }
}

#[test]
fn volume_and_linear_profile() {
    let grid = Arc::new(RadialGrid::uniform(1.0, 2.0, 16, 3, 2.0).unwrap());
    let one = RadialFunction::from_fn(Arc::clone(&grid), false, |_| 1.0);
    let vol = 4.0 * PI / 3.0 * 7.0;
    // trapezoid on r^2 over 16 cells: error h^2/12 * int (r^2)'' = h^2/6
    assert!(rel(one.lpstar_norm_pow(), vol) < 2e-3);
    assert_eq!(one.grad_norm_p(), 0.0);

    let grid = Arc::new(RadialGrid::uniform(0.0, 1.0, 64, 3, 2.0).unwrap());
    let id = RadialFunction::from_fn(grid, false, |r| r);
    assert!(rel(id.grad_norm_p(), 4.0 * PI / 3.0) < 1e-12);
}

#[test]
fn zero_function() {
    let grid = Arc::new(RadialGrid::logarithmic(0.5, 1.0, 32, 4, 2.0).unwrap());
    let z = RadialFunction::zeros(grid);
    assert_eq!(z.grad_norm_p(), 0.0);
    assert_eq!(z.lpstar_norm_pow(), 0.0);
    assert_eq!(z.energy(), 0.0);
    assert!(z.rayleigh_quotient().is_err());
    assert!(z.energy_gradient().iter().all(|&g| g == 0.0));
    assert_eq!(z.ode_residual(), 0.0);
}

/// `int_1^2 |u'|^p r^{N-1} dr` for `u = (r - 1)(2 - r)` by composite Simpson
/// on a fine grid, split at the kink of `|u'|^p`.
fn exact_bump_gradient(dim: usize, p: f64) -> f64 {
    let f = |r: f64| (3.0 - 2.0 * r).abs().powf(p) * r.powf(dim as f64 - 1.0);
    let simpson = |a: f64, b: f64| {
        let n = 200_000;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    common::sphere_area(dim) * (simpson(1.0, 1.5) + simpson(1.5, 2.0))
}

#[test]
fn gradient_quadrature_converges_at_second_order() {
    for (dim, p) in CASES {
        let exact = exact_bump_gradient(dim, p);
        let cells = [64usize, 128, 256, 512];
        let pts: Vec<(f64, f64)> = cells
            .iter()
            .map(|&m| {
                let grid = Arc::new(RadialGrid::uniform(1.0, 2.0, m, dim, p).unwrap());
                let u = RadialFunction::from_fn(grid, true, |r| (r - 1.0) * (2.0 - r));
                ((1.0 / m as f64).ln(), (u.grad_norm_p() - exact).abs().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        assert!((slope - 2.0).abs() <= 0.4, "({dim},{p}): observed order {slope}");
    }
}

#[test]
fn quotient_is_bounded_below_by_the_discrete_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (dim, p) in CASES {
        let spec = AnnulusSpec::new(0.5, 1.0, dim, p).unwrap();
        let (u, rep) = minimize_annulus(&spec, 128, &SolveOptions::default()).unwrap();
        assert!(rep.converged && rep.q > 0.0);
        let grid = u.grid().clone();
        for _ in 0..200 {
            let v = common::random_dirichlet(&grid, &mut rng);
            assert!(v.rayleigh_quotient().unwrap() >= rep.q * (1.0 - 1e-9));
        }
        for _ in 0..20 {
            let v = common::random_bump(&grid, &mut rng);
            assert!(v.rayleigh_quotient().unwrap() >= rep.q * (1.0 - 1e-9));
        }
    }
}

fn case() -> impl Strategy<Value = (usize, f64)> {
    prop_oneof![Just((3, 2.0)), Just((4, 2.0)), Just((4, 3.0)), (3usize..7).prop_flat_map(|n| (Just(n), 1.1..(n as f64 - 0.1)))]
}

fn function() -> impl Strategy<Value = RadialFunction> {
    (case(), 0.01f64..0.9, 0.5f64..3.0, 8usize..80, any::<u64>()).prop_map(|((n, p), ratio, r2, cells, seed)| {
        let grid = Arc::new(RadialGrid::logarithmic(ratio * r2, r2, cells, n, p).unwrap());
        common::random_dirichlet(&grid, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(u in function(), c in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0]) {
        let g = u.grid();
        let (p, ps) = (g.exponent(), g.critical_exponent());
        let v = u.scaled(c);
        prop_assert!(rel(v.grad_norm_p(), c.abs().powf(p) * u.grad_norm_p()) < 1e-12);
        prop_assert!(rel(v.lpstar_norm_pow(), c.abs().powf(ps) * u.lpstar_norm_pow()) < 1e-12);
        prop_assert!(rel(v.rayleigh_quotient().unwrap(), u.rayleigh_quotient().unwrap()) < 1e-12);
    }

    #[test]
    fn energy_is_even(u in function()) {
        prop_assert_eq!(u.energy(), u.scaled(-1.0).energy());
        let g = u.grid();
        let direct = u.grad_norm_p() / g.exponent() - u.lpstar_norm_pow() / g.critical_exponent();
        prop_assert_eq!(u.energy(), direct);
    }

    #[test]
    fn gradient_matches_finite_differences(u in function(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = u.energy_gradient();
        for _ in 0..20 {
            let h = common::random_dirichlet(u.grid(), &mut rng);
            let eps = 1e-6;
            let fd = (u.axpy(eps, &h).unwrap().energy() - u.axpy(-eps, &h).unwrap().energy()) / (2.0 * eps);
            let an: f64 = g.iter().zip(h.values()).map(|(a, b)| a * b).sum();
            let scale = an.abs().max(g.iter().map(|x| x.abs()).sum::<f64>() * 1e-3);
            prop_assert!((fd - an).abs() / scale <= 1e-5, "fd {} vs analytic {}", fd, an);
        }
    }

    #[test]
    fn extension_by_zero_is_exact(u in function(), left in 1usize..20, right in 1usize..20) {
        let g = u.grid();
        let nodes = g.nodes();
        let step = nodes[1] / nodes[0];
        let mut big: Vec<f64> = (1..=left).rev().map(|k| nodes[0] / step.powi(k as i32)).collect();
        big.extend_from_slice(nodes);
        big.extend((1..=right).map(|k| nodes[nodes.len() - 1] * step.powi(k as i32)));
        let target = Arc::new(RadialGrid::new(big, g.dim(), g.exponent(), g.spacing()).unwrap());
        let w = u.extend_by_zero(target, left).unwrap();
        prop_assert!(rel(w.grad_norm_p(), u.grad_norm_p()) < 1e-12);
        prop_assert!(rel(w.lpstar_norm_pow(), u.lpstar_norm_pow()) < 1e-12);
    }
}
