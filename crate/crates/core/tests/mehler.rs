use subsig_core::forms::AntisymmetricMatrix;
use subsig_core::mehler::{
    closed_form_planar, closed_form_trace_factor, convergence_study, convergence_study_with, fd_heat_trace,
    OscillatorSpec,
};
use subsig_core::scalar::Complex64;

#[test]
fn closed_form_grows_with_time() {
    let theta = 0.7;
    let mut last = 1.0;
    for i in 1..40 {
        let t = 0.2 * i as f64;
        let v = closed_form_planar(theta, t).unwrap();
        assert!(v > last, "t = {t}");
        last = v;
    }
    let t = 1e-3;
    let coeff = (closed_form_planar(theta, t).unwrap() - 1.0) / (t * t);
    assert!((coeff - theta * theta / 24.0).abs() < 1e-8, "{coeff}");
}

#[test]
fn four_dimensional_coupling_factorizes() {
    let b = AntisymmetricMatrix::from_roots(&[Complex64::new(0.6, 0.0), Complex64::new(1.3, 0.0)], false);
    let v = closed_form_trace_factor(&b, 0.9).unwrap();
    let w = closed_form_planar(0.6, 0.9).unwrap() * closed_form_planar(1.3, 0.9).unwrap();
    assert!((v - w).abs() < 1e-14);
}

#[test]
fn finite_differences_converge_on_coarse_grids() {
    let s = convergence_study(0.5, 0.5, &[0.4, 0.2, 0.1]).unwrap();
    assert!(s.rows.windows(2).all(|w| w[1].error < w[0].error), "{:?}", s.rows);
    assert!(s.finest_error() < 1e-4);
    assert!(s.orders.iter().all(|&p| p > 1.5), "{:?}", s.orders);
    assert_eq!(s.to_csv().lines().count(), 4);
}

#[test]
fn one_dimensional_run_is_the_free_kernel() {
    let spec = OscillatorSpec::new(1, vec![0.0], 0.1, 0.5).unwrap();
    assert!((fd_heat_trace(&spec, 0.5).unwrap() - 1.0).abs() < 1e-13);
    let s = convergence_study_with(1, vec![0.0], 0.5, &[0.2, 0.1]).unwrap();
    assert!(s.finest_error() < 1e-13);
}

#[test]
fn invalid_grids_are_rejected() {
    assert!(OscillatorSpec::planar(0.5, 0.0, 0.5).is_err());
    assert!(OscillatorSpec::new(2, vec![0.0, 1.0, 1.0, 0.0], 0.1, 0.5).is_err());
    assert!(OscillatorSpec::planar(0.5, 0.1, -1.0).is_err());
    assert!(convergence_study(0.5, 0.5, &[]).is_err());
    // the spacing is too coarse for the initial Gaussian to fit before t
    assert!(convergence_study(0.5, 0.01, &[0.2]).is_err());
}
