use num_complex::Complex64;
use vstates::continuation::{solve_vstate, SolveOptions};
use vstates::evolution::*;
use vstates::geometry::FourierBoundary;

#[test]
fn vstate_normal_velocity_is_rigid() {
    let sol = solve_vstate(0.5, 3, 0.03, None, &SolveOptions::default()).unwrap();
    let st = ContourState::from_boundary(&sol.fourier_boundary(), 256, 0.5).unwrap();
    assert!(rotation_frame_residual(&st, sol.omega).unwrap() < 1e-5);
    assert!(rotation_frame_residual(&st, sol.omega + 0.05).unwrap() > 1e-4);
}

#[test]
fn subtracted_kernel_has_same_normal_velocity() {
    let st = ContourState::from_boundary(&FourierBoundary::ellipse(0.2, 1), 256, 0.6).unwrap();
    let a = velocity_with(&st, false).unwrap();
    let b = velocity_with(&st, true).unwrap();
    let dz = vstates::fourier::spectral_derivative(&st.nodes);
    for i in 0..st.len() {
        let n = ((a[i] - b[i]) * dz[i].conj()).im / dz[i].norm();
        assert!(n.abs() < 1e-4, "{n}");
    }
}

#[test]
fn dilation_rescales_time() {
    let b = FourierBoundary::ellipse(0.2, 1);
    let st = ContourState::from_boundary(&b, 96, 0.5).unwrap();
    let lam: f64 = 2.0;
    let big = ContourState::new(st.nodes.iter().map(|z| z * lam).collect(), 0.5).unwrap();
    let opts = EvolveOptions { redistribute_every: 0, subtracted: None };
    let small = evolve_with(&st, 0.2, 0.01, &opts).unwrap();
    let large = evolve_with(&big, 0.2 * lam.powf(0.5), 0.01 * lam.powf(0.5), &opts).unwrap();
    let gap = small.nodes.iter().zip(&large.nodes).map(|(a, b)| (a * lam - b).norm()).fold(0.0, f64::max);
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn cfl_violation_is_an_error() {
    let st = ContourState::from_boundary(&FourierBoundary::ellipse(0.2, 1), 128, 0.5).unwrap();
    assert!(step_rk4(&st, 1.0).is_err());
}

#[test]
fn collapsed_curve_is_rejected() {
    // nearly flat ellipse: opposite arcs closer than the node spacing
    let nodes: Vec<Complex64> = (0..64)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
            Complex64::new(t.cos(), 0.001 * t.sin())
        })
        .collect();
    let st = ContourState::new(nodes, 0.5).unwrap();
    assert!(velocity_contour(&st).is_err());
}

#[test]
fn hausdorff_of_shifted_circle() {
    let c: Vec<Complex64> = (0..400).map(|j| Complex64::from_polar(1.0, j as f64 * 0.0157079632679)).collect();
    let d: Vec<Complex64> = c.iter().map(|z| z + 0.01).collect();
    let h = hausdorff(&c, &d);
    assert!((h - 0.01).abs() < 1e-4);
    assert_eq!(hausdorff(&c, &c), 0.0);
}

#[test]
fn trajectory_round_trips_as_json_lines() {
    let st = ContourState::from_boundary(&FourierBoundary::ellipse(0.1, 1), 16, 0.5).unwrap();
    let text = vstates::io::jsonl_string(&[st.clone(), st.clone()]);
    let back: Vec<ContourState> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(back, vec![st.clone(), st]);
}

#[test]
fn rejects_bad_alpha() {
    assert!(ContourState::from_boundary(&FourierBoundary::identity(2), 64, 0.0).is_err());
    assert!(ContourState::from_boundary(&FourierBoundary::identity(2), 64, 1.2).is_err());
}
