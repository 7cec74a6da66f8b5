mod common;

use std::sync::Arc;

use plaplace_core::radial::RadialGrid;
use plaplace_core::sobolev::{
    calibrate_talenti, dilate, energy_quantum, nehari_project, nehari_scale, sobolev_constant, sobolev_quantum,
    TalentiProfile,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn talenti_values() {
    let u = TalentiProfile::new(1.0, 1.0, 4, 2.0).unwrap();
    assert_eq!(u.eval(0.0).unwrap(), 1.0);
    assert!(rel(u.eval(1.0).unwrap(), 0.5) < 1e-15);
    assert!(u.eval(-1.0).is_err());
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let v = u.value(k as f64 * 0.05);
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn calibration_pins_beta() {
    for (dim, p) in [(3, 2.0), (4, 2.0), (4, 3.0), (5, 1.5)] {
        let prof = calibrate_talenti(dim, p, 1.0).unwrap();
        let res = prof.residual().unwrap();
        assert!(res <= 1e-6, "({dim},{p}) residual {res:.2e}");
        for f in [0.5, 1.5] {
            let off = TalentiProfile::new(prof.alpha, prof.beta * f, dim, p).unwrap();
            assert!(off.residual().unwrap() >= 1e3 * res, "({dim},{p}) beta x {f}");
        }
    }
    for dim in [3, 4, 5] {
        let prof = calibrate_talenti(dim, 2.0, 1.0).unwrap();
        let n = dim as f64;
        assert!(rel(prof.beta, 1.0 / (n * (n - 2.0))) < 1e-6);
    }
    assert!(calibrate_talenti(4, 2.0, 0.0).is_err());
    assert!(calibrate_talenti(4, 2.0, -1.0).is_err());
}

#[test]
fn calibration_commutes_with_dilation() {
    for (dim, p) in [(3, 2.0), (4, 2.0), (4, 3.0)] {
        let a = calibrate_talenti(dim, p, 1.0).unwrap();
        let b = calibrate_talenti(dim, p, 4.0).unwrap();
        // solutions map to solutions under r -> r/4 with beta scaled by 4^{-1/(p-1)}
        assert!(rel(b.beta, a.beta * 4f64.powf(-1.0 / (p - 1.0))) < 1e-6);
        let grid = Arc::new(RadialGrid::logarithmic(1e-2, 1e2, 2048, dim, p).unwrap());
        let ua = dilate(&a.sample(Arc::clone(&grid)), 4.0).unwrap();
        let ub = b.sample(Arc::clone(ua.grid()));
        assert!(rel(ua.rayleigh_quotient().unwrap(), ub.rayleigh_quotient().unwrap()) < 1e-10);
    }
}

#[test]
fn sobolev_constant_matches_closed_form() {
    for (dim, p) in [(3, 2.0), (4, 2.0), (4, 3.0)] {
        let rep = sobolev_quantum(dim, p).unwrap();
        let exact = common::closed_form_sobolev(dim, p);
        assert!(rel(rep.s, exact) < 5e-4, "({dim},{p}): {} vs {exact}", rep.s);
        assert_eq!(rep.c_infty, energy_quantum(rep.s, dim, p));
        assert_eq!(rep.c_infty, rep.s.powf(dim as f64 / p) / dim as f64);
    }
}

#[test]
fn sobolev_constant_self_convergence() {
    let coarse = sobolev_constant(3, 2.0, 1e5, 1024).unwrap().s;
    let fine = sobolev_constant(3, 2.0, 1e5, 2048).unwrap().s;
    assert!(rel(fine, coarse) <= 1e-3);
    let near = sobolev_constant(3, 2.0, 1e5, 5120).unwrap().s;
    let far = sobolev_constant(3, 2.0, 1e6, 6144).unwrap().s;
    assert!(rel(far, near) <= 1e-3);
    assert!(sobolev_constant(3, 2.0, 100.0, 1024).is_err());
    assert!(sobolev_constant(3, 2.0, 1e4, 100).is_err());
}

#[test]
fn nehari_scale_examples() {
    assert_eq!(nehari_scale(3.0, 3.0, 2.0, 4.0).unwrap(), 1.0);
    assert!(rel(nehari_scale(2.0, 1.0, 2.0, 4.0).unwrap(), 2f64.sqrt()) < 1e-15);
    assert!(nehari_scale(0.0, 1.0, 2.0, 4.0).is_err());
    assert!(nehari_scale(1.0, -1.0, 2.0, 4.0).is_err());
}

fn function() -> impl Strategy<Value = plaplace_core::radial::RadialFunction> {
    let case = prop_oneof![Just((3usize, 2.0f64)), Just((4, 2.0)), Just((4, 3.0)), Just((6, 1.7))];
    (case, 0.05f64..0.8, 8usize..60, any::<u64>()).prop_map(|((n, p), ratio, cells, seed)| {
        let grid = Arc::new(RadialGrid::logarithmic(ratio, 1.0, cells, n, p).unwrap());
        common::random_dirichlet(&grid, &mut ChaCha8Rng::seed_from_u64(seed))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nehari_identity(u in function()) {
        let g = u.grid();
        let n = g.dim() as f64;
        let pu = nehari_project(&u).unwrap();
        let q = u.rayleigh_quotient().unwrap();
        prop_assert!(rel(pu.energy(), q.powf(n / g.exponent()) / n) <= 1e-10);
        prop_assert!(rel(pu.energy(), common::fiber_max(&u)) <= 1e-10);
        let again = nehari_project(&pu).unwrap();
        for (a, b) in again.values().iter().zip(pu.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * pu.max().abs().max(pu.min().abs()));
        }
        let neg = nehari_project(&u.scaled(-1.0)).unwrap();
        let flipped = pu.scaled(-1.0);
        prop_assert_eq!(neg.values(), flipped.values());
    }

    #[test]
    fn fibering_is_unimodal(u in function()) {
        let g = u.grid();
        let t_star = nehari_scale(u.grad_norm_p(), u.lpstar_norm_pow(), g.exponent(), g.critical_exponent()).unwrap();
        let below: Vec<f64> = (1..=50).map(|k| u.scaled(t_star * k as f64 / 50.0).energy()).collect();
        prop_assert!(below.windows(2).all(|w| w[1] > w[0]));
        let above: Vec<f64> = (0..50).map(|k| u.scaled(t_star * (1.0 + k as f64 / 10.0)).energy()).collect();
        prop_assert!(above.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn quotient_invariances(u in function(), lambda in 0.01f64..100.0, c in 0.1f64..10.0) {
        let q = u.rayleigh_quotient().unwrap();
        prop_assert!(rel(dilate(&u, lambda).unwrap().rayleigh_quotient().unwrap(), q) <= 1e-12);
        prop_assert!(rel(u.scaled(c).rayleigh_quotient().unwrap(), q) <= 1e-12);
        let j = u.energy();
        prop_assert!((dilate(&u, lambda).unwrap().energy() - j).abs() <= 1e-12 * j.abs().max(u.grad_norm_p()));
    }

    #[test]
    fn dilation_group_law(u in function(), lambda in 0.1f64..10.0) {
        prop_assert_eq!(&dilate(&u, 1.0).unwrap(), &u);
        let back = dilate(&dilate(&u, lambda).unwrap(), 1.0 / lambda).unwrap();
        for (a, b) in back.grid().nodes().iter().zip(u.grid().nodes()) {
            prop_assert!(rel(*a, *b) <= 1e-14);
        }
        for (a, b) in back.values().iter().zip(u.values()) {
            prop_assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
    }
}
