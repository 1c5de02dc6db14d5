use vstates::geometry::{FourierBoundary, UnitGrid};
use vstates::kernels::*;

#[test]
fn disc_is_annihilated() {
    for &a in &[0.1, 0.5, 0.9, 1.0] {
        for &om in &[-1.0, 0.0, 0.37, 1.0] {
            let g = functional(om, &FourierBoundary::identity(8), a, &UnitGrid::for_truncation(8)).unwrap();
            assert!(g.sup_norm() < 1e-12);
        }
    }
}

#[test]
fn product_and_trapezoid_agree() {
    let b = FourierBoundary::new(vec![0.0, 0.1, 0.03]).unwrap();
    let grid = UnitGrid::new(64).unwrap();
    let fine = s_phi(&b, 0.5, &grid).unwrap();
    let targets = UnitGrid::offset(64).unwrap();
    let coarse = s_phi_trapezoid(&b, 0.5, &targets, 8192).unwrap();
    let fine_offset = s_phi(&b, 0.5, &UnitGrid::offset(64).unwrap()).unwrap();
    let gap = coarse.iter().zip(&fine_offset).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
    assert_eq!(fine.len(), 64);
}

#[test]
fn ellipse_fourth_coefficient_frozen() {
    let g4 = ellipse_fourth_coefficient(0.2, 0.3, 0.5, &UnitGrid::new(512).unwrap()).unwrap();
    assert!((g4.abs() - 0.002_227_504_402_345_877).abs() < 1e-12);
    let series = ellipse_fourth_coefficient_series(0.3, 0.5).unwrap();
    assert!((series - g4).abs() < 1e-12);
}

#[test]
fn residual_field_exports() {
    let g = functional(0.3, &FourierBoundary::ellipse(0.2, 1), 0.5, &UnitGrid::new(64).unwrap()).unwrap();
    assert_eq!(g.rows().len(), 64);
    assert_eq!(g.sine_coeffs.len(), 32);
    let csv = vstates::io::residual_csv(&g);
    assert!(csv.starts_with("angle,residual\n"));
    assert_eq!(csv.lines().count(), 65);
}

#[test]
fn moment_table_serializes_named_families() {
    let t = MomentTable::new(0.5, 4).unwrap();
    let v = serde_json::to_value(&t).unwrap();
    assert_eq!(v["I"].as_array().unwrap().len(), 5);
    assert!(MomentTable::new(1.0, 4).is_err());
}

#[test]
fn near_self_intersection_is_reported() {
    let b = FourierBoundary::new(vec![0.0, 0.0, 0.5]).unwrap();
    assert!(functional(0.3, &b, 0.5, &UnitGrid::new(64).unwrap()).is_err());
}
