use vstates::geometry::{FourierBoundary, UnitGrid};
use vstates::linearization::*;
use vstates::specfun::omega_dispersion;

#[test]
fn multipliers_vanish_at_dispersion() {
    let om = omega_dispersion(0.5, 4);
    let s = multiplier_at_disc(0.5, om, 10).unwrap();
    assert_eq!(s.kernel_modes(1e-14), vec![3]);
    assert!(multiplier_at_disc(0.5, om, 1).is_err());
    assert!(multiplier_at_disc(1.2, om, 4).is_err());
}

#[test]
fn assembled_disc_jacobian_is_diagonal() {
    let grid = UnitGrid::for_truncation(8);
    let j = disc_jacobian(0.5, &grid).unwrap().at(0.3);
    let s = multiplier_at_disc(0.5, 0.3, 8).unwrap();
    for r in 0..=8 {
        for c in 0..=8 {
            let expect = if r == c { s.mult[r] } else { 0.0 };
            assert!((j[(r, c)] - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn analytic_matches_numerical_jacobian() {
    let b = FourierBoundary::new(vec![0.0, 0.04, 0.0, 0.01]).unwrap();
    let grid = UnitGrid::for_truncation(7);
    let num = numerical_jacobian(&b, 0.3, 0.5, &grid, 1e-6).unwrap();
    let modes: Vec<usize> = (0..=7).collect();
    let rows: Vec<usize> = (1..=8).collect();
    let an = analytic_jacobian(&b, 0.5, &grid, &modes, &rows).unwrap().at(0.3);
    let diff = (&an - &num.entries).abs().max();
    assert!(diff < 1e-7, "{diff}");
    assert!(numerical_jacobian(&b, 0.3, 0.5, &grid, 1e-2).is_err());
}

#[test]
fn scan_sqg_and_transversality() {
    let grid = UnitGrid::for_truncation(16);
    let om = omega_dispersion(1.0, 3);
    let r = bifurcation_scan(1.0, 3, (om - 0.05, om + 0.05), &grid).unwrap();
    assert!(r.gap < 1e-8);
    assert_eq!(r.kernel_dimension, 1);
    assert!(transversality_check(0.5, 2, &grid, 1e-8).unwrap());
}

#[test]
fn scan_without_bracket_fails() {
    let grid = UnitGrid::for_truncation(16);
    assert!(bifurcation_scan(0.5, 3, (0.5, 0.6), &grid).is_err());
}
