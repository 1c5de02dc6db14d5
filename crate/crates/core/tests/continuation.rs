use vstates::continuation::*;
use vstates::specfun::omega_dispersion;

#[test]
fn small_amplitude_vstate() {
    let sol = solve_vstate(0.5, 3, 0.01, None, &SolveOptions::default()).unwrap();
    assert!(sol.residual_norm < 1e-10);
    assert!(sol.fourier_boundary().is_mfold(3));
    assert!((sol.omega - omega_dispersion(0.5, 3)).abs() < 1e-3);
    assert!(sol.residual_on(&sol.grid()).unwrap() < 1e-10);
}

#[test]
fn branch_omega_is_even_in_s() {
    let opts = SolveOptions::default();
    let p = solve_vstate(0.5, 2, 0.02, None, &opts).unwrap();
    let q = solve_vstate(0.5, 2, -0.02, None, &opts).unwrap();
    assert!((p.omega - q.omega).abs() < 1e-12);
}

#[test]
fn branch_table_and_extrapolation() {
    let t = continue_branch(0.5, 2, 0.02, 0.01, &SolveOptions::default()).unwrap();
    assert_eq!(t.solutions.len(), 3);
    assert!(t.failure.is_none());
    assert!((t.extrapolated_omega().unwrap() - omega_dispersion(0.5, 2)).abs() < 1e-6);
    let csv = vstates::io::branch_csv(&t, 3);
    assert!(csv.starts_with("s,omega,residual,a1,a3,a5\n"));
    assert!(continue_branch(0.5, 2, 0.01, 0.0, &SolveOptions::default()).is_err());
}

#[test]
fn dilation_law_holds() {
    let sol = solve_vstate(0.5, 3, 0.02, None, &SolveOptions::default()).unwrap();
    let law = verify_dilation_law(&sol, 3.0).unwrap();
    let wrong = dilated_residual(&sol, 3.0, 1.0 / 3.0).unwrap();
    assert!(law < 1e-11);
    assert!(wrong > 1e-4);
}

#[test]
fn richardson_removes_quadratic_term() {
    let f = |h: f64| 2.0 + 3.0 * h * h;
    assert!((richardson_even(f(0.1), f(0.2)) - 2.0).abs() < 1e-14);
}
