mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use plaplace_core::annulus::SolveOptions;
use plaplace_core::calibration::threshold_l0;
use plaplace_core::symmetry::{
    annulus_sample, close_group, fixed_subspace, min_orbit_card, mu_g, orbit_separation, plane_rotation,
    random_orthogonal, Cardinality, GroupClosure, GroupSpec,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn group(dim: usize, gens: &[DMatrix<f64>]) -> GroupClosure {
    close_group(&GroupSpec::from_matrices(dim, gens), 10_000).unwrap()
}

#[test]
fn closure_and_fixed_space_examples() {
    let id = group(3, &[DMatrix::identity(3, 3)]);
    assert_eq!(id.order(), 1);
    assert_eq!(fixed_subspace(&id).unwrap().ncols(), 3);
    assert_eq!(min_orbit_card(&id, 0).unwrap().l, Cardinality::Finite(1));

    let pm = group(3, &[-DMatrix::identity(3, 3)]);
    assert_eq!(pm.order(), 2);
    assert_eq!(fixed_subspace(&pm).unwrap().ncols(), 0);
    assert_eq!(min_orbit_card(&pm, 0).unwrap().l, Cardinality::Finite(2));

    let five = group(4, &[plane_rotation(4, 0, 1, 2.0 * PI / 5.0)]);
    assert_eq!(five.order(), 5);
    let fix = fixed_subspace(&five).unwrap();
    assert_eq!(fix.ncols(), 2);
    for col in fix.column_iter() {
        assert!(col[0].abs() < 1e-12 && col[1].abs() < 1e-12);
    }

    let a = 2.0 * PI / 3.0;
    let double = group(4, &[plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, a)]);
    let rep = min_orbit_card(&double, 0).unwrap();
    assert_eq!((rep.l, rep.fix_dim, rep.group_order), (Cardinality::Finite(3), 0, Some(3)));
    assert_eq!(common::orbit_size(&double, &rep.witness), 3);
}

#[test]
fn infinite_groups_are_flagged() {
    let irrational = group(2, &[plane_rotation(2, 0, 1, 1.0)]);
    assert!(!irrational.is_complete());
    assert!(fixed_subspace(&irrational).is_err());
    let rep = min_orbit_card(&irrational, 0).unwrap();
    assert!(matches!(rep.l, Cardinality::Infinite { .. }));
    assert!(rep.l.exceeds(1e9));
}

#[test]
fn randomized_generator_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut complete = 0;
    let (mut trivial_fix, mut nontrivial_fix) = (0, 0);
    while complete < 20 {
        let dim = rng.gen_range(2..5);
        let gens: Vec<DMatrix<f64>> = (0..rng.gen_range(1..3)).map(|_| common::random_generator(dim, &mut rng)).collect();
        let c = close_group(&GroupSpec::from_matrices(dim, &gens), 2_000).unwrap();
        if !c.is_complete() {
            continue;
        }
        complete += 1;
        let rep = min_orbit_card(&c, complete).unwrap();
        let fix = common::fix_dim_by_svd(&c);
        assert_eq!(rep.fix_dim, fix);
        let l = rep.l.finite().unwrap();
        assert_eq!(l == 1, fix >= 1, "l = {l}, fix_dim = {fix}");
        assert_eq!(c.order() % l, 0);
        assert_eq!(common::orbit_size(&c, &rep.witness), l);
        assert!(rep.sampled_min >= l);
        if fix == 0 {
            trivial_fix += 1;
        } else {
            nontrivial_fix += 1;
        }
    }
    assert!(trivial_fix > 0 && nontrivial_fix > 0);
}

#[test]
fn orbit_sizes_divide_the_order() {
    let a = 2.0 * PI / 3.0;
    let groups = [
        group(4, &[plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, a)]),
        group(3, &[plane_rotation(3, 0, 1, PI / 2.0), DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, -1.0]))]),
        group(4, &[DMatrix::from_fn(4, 4, |i, j| if (i + 1) % 4 == j { 1.0 } else { 0.0 }), -DMatrix::identity(4, 4)]),
    ];
    for c in &groups {
        for x in annulus_sample(c.dim(), 0.5, 1.0, 1000, 9) {
            let size = c.orbit_size(&x).unwrap();
            assert_eq!(c.order() % size, 0);
            assert_eq!(size, common::orbit_size(c, &x));
        }
    }
}

#[test]
fn conjugation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let a = 2.0 * PI / 3.0;
    let sets: Vec<(usize, Vec<DMatrix<f64>>)> = vec![
        (4, vec![plane_rotation(4, 0, 1, a) * plane_rotation(4, 2, 3, a)]),
        (3, vec![plane_rotation(3, 0, 1, PI / 2.0), DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0]))]),
        (3, vec![-DMatrix::identity(3, 3)]),
        (2, vec![plane_rotation(2, 0, 1, 2.0 * PI / 6.0)]),
    ];
    for (dim, gens) in sets {
        let base = min_orbit_card(&group(dim, &gens), 1).unwrap();
        let q = random_orthogonal(dim, &mut rng);
        let conj: Vec<DMatrix<f64>> = gens.iter().map(|g| &q * g * q.transpose()).collect();
        let rep = min_orbit_card(&group(dim, &conj), 1).unwrap();
        assert_eq!((rep.l, rep.fix_dim, rep.group_order), (base.l, base.fix_dim, base.group_order));
    }
}

#[test]
fn mu_g_and_separation() {
    let pm = group(3, &[-DMatrix::identity(3, 3)]);
    let pts = annulus_sample(3, 0.5, 1.0, 200, 1);
    let mu = mu_g(&pm, &pts, 10.0).unwrap();
    assert_eq!((mu.min_orbit, mu.value), (2, 20.0));
    let flip = group(3, &[DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 1.0, 1.0]))]);
    let mut pts = annulus_sample(3, 0.5, 1.0, 50, 2);
    pts.push(vec![0.0, 0.7, 0.0]);
    assert_eq!(mu_g(&flip, &pts, 10.0).unwrap().value, 10.0);
    assert!(mu_g(&flip, &[], 10.0).is_err());

    assert!((orbit_separation(&[1.0, 0.0, 0.0], &pm).unwrap() - 2.0).abs() < 1e-15);
    let rot = group(2, &[plane_rotation(2, 0, 1, 2.0 * PI / 3.0)]);
    let y = [0.6, 0.8];
    let s = orbit_separation(&y, &rot).unwrap();
    assert!((s - 3f64.sqrt()).abs() < 1e-12);
    assert!((orbit_separation(&[1.2, 1.6], &rot).unwrap() - 2.0 * s).abs() < 1e-12);
    assert!(orbit_separation(&[0.0, 0.0], &rot).is_err());
    assert_eq!(orbit_separation(&[0.0, 1.0, 0.0], &flip).unwrap(), f64::INFINITY);
}

#[test]
fn symmetry_gate_is_monotone_in_the_hole() {
    let opts = SolveOptions::default();
    let thresholds: Vec<_> =
        [0.5, 0.2, 0.1, 0.01].iter().map(|&r| threshold_l0(r, 1.0, 4, 2.0, 512, &opts).unwrap()).collect();
    let again = threshold_l0(0.1, 1.0, 4, 2.0, 512, &opts).unwrap();
    assert_eq!(again, thresholds[2]);
    for l in 1..=50 {
        let gate: Vec<bool> = thresholds.iter().map(|t| t.admits(l)).collect();
        // once admitted, admitted for every smaller hole
        assert!(gate.windows(2).all(|w| !w[0] || w[1]), "l = {l}: {gate:?}");
        let c = Cardinality::Finite(l);
        assert_eq!(gate, thresholds.iter().map(|t| c.exceeds(t.l0)).collect::<Vec<_>>());
    }
    assert!(!thresholds[3].admits(1) && thresholds[3].admits(2));
}
