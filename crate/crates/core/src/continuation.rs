//! Newton solver and amplitude continuation for m-fold V-state branches
//! bifurcating from the disc at Ω_m^α.
//!
//! Unknowns are (Ω, a_{2m−1}, ..., a_{Km−1}) with a_{m−1} = s pinned; equations
//! are the sine coefficients g_m, g_{2m}, ..., g_{Km} of G(Ω, φ).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, VStateError};
use crate::geometry::{dilate, embed_mfold, FourierBoundary, MFoldBoundary, UnitGrid};
use crate::kernels::{functional, ResidualField};
use crate::linearization::analytic_jacobian;
use crate::specfun::omega_dispersion;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Number K of m-fold modes kept (a_{m−1}, ..., a_{Km−1}).
    pub modes: usize,
    pub tol: f64,
    pub max_iter: usize,
    /// Grid nodes per Fourier mode of the truncation.
    pub grid_factor: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { modes: 16, tol: 1e-11, max_iter: 30, grid_factor: 16 }
    }
}

impl SolveOptions {
    pub fn truncation(&self, m: usize) -> usize {
        self.modes * m - 1
    }

    pub fn grid(&self, m: usize) -> UnitGrid {
        UnitGrid { size: self.grid_factor * (self.truncation(m) + 1), offset: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VStateSolution {
    pub alpha: f64,
    pub m: usize,
    pub s: f64,
    pub omega: f64,
    pub boundary: MFoldBoundary,
    pub residual_norm: f64,
    pub grid_size: usize,
    pub iterations: usize,
}

impl VStateSolution {
    pub fn fourier_boundary(&self) -> FourierBoundary {
        self.boundary.to_boundary()
    }

    pub fn grid(&self) -> UnitGrid {
        UnitGrid { size: self.grid_size, offset: false }
    }

    /// Sup-norm of all sine coefficients of G on `grid`.
    pub fn residual_on(&self, grid: &UnitGrid) -> Result<f64> {
        Ok(functional(self.omega, &self.fourier_boundary(), self.alpha, grid)?.sine_norm())
    }
}

fn residual(omega: f64, bnd: &FourierBoundary, alpha: f64, grid: &UnitGrid) -> Result<ResidualField> {
    functional(omega, bnd, alpha, grid)
}

fn equations(field: &ResidualField, m: usize, k: usize) -> DVector<f64> {
    DVector::from_iterator(k, (1..=k).map(|j| field.sine(j * m)))
}

/// Newton iteration for the m-fold V-state with a_{m−1} = s.
pub fn solve_vstate(
    alpha: f64,
    m: usize,
    s: f64,
    initial_guess: Option<&VStateSolution>,
    opts: &SolveOptions,
) -> Result<VStateSolution> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(VStateError::Domain(format!("alpha must lie in (0,1], got {alpha}")));
    }
    if m < 2 || opts.modes < 2 {
        return Err(VStateError::InvalidInput("need m >= 2 and at least two modes".into()));
    }
    if alpha == 1.0 {
        log::warn!("alpha = 1 branch solving is experimental");
    }
    let k = opts.modes;
    let grid = opts.grid(m);
    let n = opts.truncation(m);
    let mut coeffs = vec![0.0; k];
    let mut omega = omega_dispersion(alpha, m);
    if let Some(g) = initial_guess {
        omega = g.omega;
        for (c, v) in coeffs.iter_mut().zip(&g.boundary.coeffs) {
            *c = *v;
        }
    }
    coeffs[0] = s;
    let build = |c: &[f64]| embed_mfold(&MFoldBoundary { m, coeffs: c.to_vec() }, n);
    if s == 0.0 {
        let bnd = build(&vec![0.0; k])?;
        let res = residual(omega_dispersion(alpha, m), &bnd, alpha, &grid)?.sine_norm();
        return Ok(VStateSolution {
            alpha,
            m,
            s,
            omega: omega_dispersion(alpha, m),
            boundary: MFoldBoundary { m, coeffs: vec![0.0; k] },
            residual_norm: res,
            grid_size: grid.size,
            iterations: 0,
        });
    }
    let modes: Vec<usize> = (2..=k).map(|j| j * m - 1).collect();
    let rows: Vec<usize> = (1..=k).map(|j| j * m).collect();
    let mut bnd = build(&coeffs)?;
    let mut field = residual(omega, &bnd, alpha, &grid)?;
    let mut norm = equations(&field, m, k).amax();
    for iter in 0..=opts.max_iter {
        if norm < opts.tol {
            if !bnd.is_univalent_proxy() {
                return Err(VStateError::NearSelfIntersection(bnd.min_abs_deriv(4 * grid.size)));
            }
            return Ok(VStateSolution {
                alpha,
                m,
                s,
                omega,
                boundary: MFoldBoundary { m, coeffs },
                residual_norm: field.sine_norm(),
                grid_size: grid.size,
                iterations: iter,
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let aff = analytic_jacobian(&bnd, alpha, &grid, &modes, &rows)?;
        let mut jac = DMatrix::zeros(k, k);
        jac.set_column(0, &aff.omega_column);
        jac.view_mut((0, 1), (k, k - 1)).copy_from(&aff.at(omega));
        let rhs = -equations(&field, m, k);
        let step = jac.lu().solve(&rhs).ok_or(VStateError::SingularJacobian)?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(VStateError::SingularJacobian);
        }
        let mut lambda = 1.0;
        let mut best: Option<(f64, Vec<f64>, f64, FourierBoundary, ResidualField)> = None;
        for _ in 0..=5 {
            let om = omega + lambda * step[0];
            let mut c = coeffs.clone();
            for j in 1..k {
                c[j] += lambda * step[j];
            }
            let b = build(&c)?;
            if let Ok(f) = residual(om, &b, alpha, &grid) {
                let nn = equations(&f, m, k).amax();
                let better = best.as_ref().is_none_or(|x| nn < x.0);
                if better {
                    best = Some((nn, c, om, b, f));
                }
                if nn < norm {
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (nn, c, om, b, f) = best.ok_or(VStateError::NearSelfIntersection(0.0))?;
        log::debug!("newton {iter}: |F| = {nn:.3e}, lambda = {lambda}");
        norm = nn;
        coeffs = c;
        omega = om;
        bnd = b;
        field = f;
    }
    Err(VStateError::NoConvergence { iterations: opts.max_iter, residual: norm })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchTable {
    pub alpha: f64,
    pub m: usize,
    pub solutions: Vec<VStateSolution>,
    /// Reason the continuation stopped before s_max, if it did.
    pub failure: Option<String>,
}

impl BranchTable {
    pub fn last_good_s(&self) -> f64 {
        self.solutions.last().map_or(0.0, |x| x.s)
    }

    /// (4Ω(ds) − Ω(2ds))/3 from the first two nonzero amplitudes; Ω(s) is even in s.
    pub fn extrapolated_omega(&self) -> Option<f64> {
        let nz: Vec<&VStateSolution> = self.solutions.iter().filter(|x| x.s != 0.0).collect();
        if nz.len() < 2 || ((nz[1].s / nz[0].s) - 2.0).abs() > 1e-9 {
            return None;
        }
        Some(richardson_even(nz[0].omega, nz[1].omega))
    }
}

/// Limit at s = 0 of an even function sampled at h and 2h.
pub fn richardson_even(f_h: f64, f_2h: f64) -> f64 {
    (4.0 * f_h - f_2h) / 3.0
}

/// Continues the branch at s = ds, 2ds, ... ≤ s_max; stops at the first failed solve.
pub fn continue_branch(alpha: f64, m: usize, s_max: f64, ds: f64, opts: &SolveOptions) -> Result<BranchTable> {
    if !(ds > 0.0) || !(s_max >= ds) {
        return Err(VStateError::InvalidInput(format!("need 0 < ds <= s_max, got ds = {ds}, s_max = {s_max}")));
    }
    let mut table = BranchTable { alpha, m, solutions: vec![solve_vstate(alpha, m, 0.0, None, opts)?], failure: None };
    let steps = (s_max / ds + 1e-9).floor() as usize;
    for i in 1..=steps {
        let s = i as f64 * ds;
        let guess = predictor(&table.solutions, s);
        match solve_vstate(alpha, m, s, Some(&guess), opts) {
            Ok(sol) => {
                log::info!("s = {s:.4}: omega = {:.12}, residual {:.2e}", sol.omega, sol.residual_norm);
                table.solutions.push(sol);
            }
            Err(e) => {
                log::warn!("continuation stopped at s = {s}: {e}");
                table.failure = Some(format!("s = {s}: {e}"));
                break;
            }
        }
    }
    Ok(table)
}

// secant predictor in s
fn predictor(prev: &[VStateSolution], s: f64) -> VStateSolution {
    let last = prev.last().expect("non-empty").clone();
    if prev.len() < 2 {
        return last;
    }
    let before = &prev[prev.len() - 2];
    let t = (s - last.s) / (last.s - before.s);
    let mut out = last.clone();
    out.omega = last.omega + t * (last.omega - before.omega);
    for (j, c) in out.boundary.coeffs.iter_mut().enumerate() {
        let b = before.boundary.coeffs.get(j).copied().unwrap_or(0.0);
        *c += t * (*c - b);
    }
    out.s = s;
    out
}

/// Residual of G(Ω·factor, λφ) in the sine sup-norm.
pub fn dilated_residual(sol: &VStateSolution, lambda: f64, omega_factor: f64) -> Result<f64> {
    let (bnd, _) = dilate(&sol.fourier_boundary(), lambda, sol.alpha)?;
    Ok(functional(sol.omega * omega_factor, &bnd, sol.alpha, &sol.grid())?.sine_norm())
}

/// Residual of G(Ω/λ^α, λφ).
pub fn verify_dilation_law(sol: &VStateSolution, lambda: f64) -> Result<f64> {
    let (_, factor) = dilate(&sol.fourier_boundary(), lambda, sol.alpha)?;
    dilated_residual(sol, lambda, factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_solution() {
        let sol = solve_vstate(0.5, 3, 0.0, None, &SolveOptions::default()).unwrap();
        assert_eq!(sol.omega, omega_dispersion(0.5, 3));
        assert!(sol.residual_norm < 1e-12);
    }

    #[test]
    fn small_amplitude_converges() {
        let opts = SolveOptions { modes: 8, ..Default::default() };
        let sol = solve_vstate(0.5, 3, 0.01, None, &opts).unwrap();
        assert!(sol.residual_norm < 1e-11);
        assert!((sol.omega - omega_dispersion(0.5, 3)).abs() < 1e-3);
        let l1 = verify_dilation_law(&sol, 1.0).unwrap();
        assert_eq!(l1, sol.residual_on(&sol.grid()).unwrap());
    }
}
