use std::f64::consts::PI;

use subsig_core::density::{
    density_pair, lhs_density, odd_density_pair, rhs_density, FixedPointData, OddFixedPointData,
};
use subsig_core::random::{angles, nil_curvature, trial_rng, ANGLE_MARGIN};
use subsig_core::scalar::{Complex64, Nil};
use subsig_core::Error;

fn agrees(lhs: Complex64, rhs: Complex64) -> bool {
    (lhs - rhs).norm() <= (1e-9 * lhs.norm().max(rhs.norm())).max(1e-12)
}

#[test]
fn nilpotent_fixed_sets() {
    let mut nonzero = 0;
    for n in [2, 4, 6] {
        for a in (2..=n).step_by(2) {
            for k in (0..=n - 2).step_by(2) {
                for trial in 0..6 {
                    let mut rng = trial_rng(100 + n as u64, (a * 16 + k) as u64 * 64 + trial);
                    let d = FixedPointData::<Nil> {
                        n,
                        a,
                        k,
                        phi_angles: angles(&mut rng, (n - a) / 2, ANGLE_MARGIN),
                        curvature: nil_curvature(&mut rng, n, a),
                    };
                    let p = density_pair(&d).unwrap();
                    assert!(agrees(p.lhs, p.rhs), "n={n} a={a} k={k}: {p:?}");
                    if p.rhs.norm() > 1e-6 {
                        nonzero += 1;
                    }
                }
            }
        }
    }
    // the identity is not being met by zeros alone
    assert!(nonzero > 20, "only {nonzero} nonvanishing cases");
}

#[test]
fn isolated_points() {
    for n in [2, 4, 6, 8] {
        for k in (0..=n - 2).step_by(2) {
            let mut rng = trial_rng(5, (n * 16 + k) as u64);
            let d = FixedPointData::<Complex64>::flat(n, 0, k, &angles(&mut rng, n / 2, ANGLE_MARGIN));
            let p = density_pair(&d).unwrap();
            assert!(agrees(p.lhs, p.rhs), "n={n} k={k}: {p:?}");
        }
    }
}

#[test]
fn plane_rotation_value() {
    // in the plane with k = 0 the density is 1 for every angle
    for theta in [0.4, 1.0, PI, 5.5] {
        let d = FixedPointData::<Complex64>::flat(2, 0, 0, &[theta]);
        let p = density_pair(&d).unwrap();
        assert!(agrees(p.lhs, Complex64::new(1.0, 0.0)), "θ = {theta}: {p:?}");
    }
}

#[test]
fn positive_fixed_dimension_needs_nilpotent_forms() {
    let d = FixedPointData::<Complex64>::flat(4, 2, 0, &[1.0]);
    assert!(matches!(lhs_density(&d), Err(Error::Usage(_))));
    assert!(matches!(rhs_density(&d), Err(Error::Usage(_))));
}

#[test]
fn degenerate_angle_is_singular() {
    let d = FixedPointData::<Complex64>::flat(2, 0, 0, &[0.0]);
    assert!(matches!(lhs_density(&d), Err(Error::Singular(_))));
}

#[test]
fn odd_case_with_rank_two() {
    for n in [3, 5, 7] {
        let mut rng = trial_rng(8, n as u64);
        let d = OddFixedPointData { n, k: 2, phi_angles: angles(&mut rng, (n - 1) / 2, ANGLE_MARGIN) };
        let p = odd_density_pair(&d).unwrap();
        assert!(agrees(p.lhs, p.rhs), "n={n}: {p:?}");
    }
}

#[test]
fn odd_case_without_bundle_differs_by_a_constant() {
    // the trace side is 1 and the form side -√-1 for every rotation
    for n in [3, 5] {
        let mut rng = trial_rng(9, n as u64);
        let d = OddFixedPointData { n, k: 0, phi_angles: angles(&mut rng, (n - 1) / 2, ANGLE_MARGIN) };
        let p = odd_density_pair(&d).unwrap();
        assert!(agrees(p.lhs, Complex64::new(1.0, 0.0)), "{p:?}");
        assert!(agrees(p.rhs, Complex64::new(0.0, -1.0)), "{p:?}");
    }
}
