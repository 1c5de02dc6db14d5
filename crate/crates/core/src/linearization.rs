//! Linearization of G at arbitrary boundaries (Gâteaux derivative), the exact
//! Fourier multiplier at the disc, and spectral diagnostics of the disc Jacobian:
//! bifurcation points, kernel dimension and transversality.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VStateError};
use crate::geometry::{FourierBoundary, UnitGrid};
use crate::kernels::{functional, sector_count, tile_values, Evaluator, ResidualField, Samples};
use crate::specfun::omega_dispersion;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpectrum {
    pub alpha: f64,
    pub omega: f64,
    #[serde(rename = "N")]
    pub n: usize,
    /// mult[n]: the factor taking b_n to g_{n+1}.
    pub mult: Vec<f64>,
}

impl MultiplierSpectrum {
    /// Indices n ≥ 1 where the multiplier vanishes to `tol`.
    pub fn kernel_modes(&self, tol: f64) -> Vec<usize> {
        (1..self.mult.len()).filter(|&n| self.mult[n].abs() <= tol).collect()
    }
}

/// mult[0] = Ω/2, mult[n] = (n+1)(Ω − Ω_{n+1}^α)/2.
pub fn multiplier_at_disc(alpha: f64, omega: f64, n: usize) -> Result<MultiplierSpectrum> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(VStateError::Domain(format!("alpha must lie in [0,1], got {alpha}")));
    }
    if n < 2 {
        return Err(VStateError::InvalidInput(format!("N must be >= 2, got {n}")));
    }
    let mut mult = Vec::with_capacity(n + 1);
    mult.push(omega / 2.0);
    for k in 1..=n {
        mult.push((k + 1) as f64 * (omega - omega_dispersion(alpha, k + 1)) / 2.0);
    }
    Ok(MultiplierSpectrum { alpha, omega, n, mult })
}

/// Ω-independent and Ω-proportional parts of the directional derivative:
/// dG[h] = Ω·rot − int.
pub(crate) fn gateaux_parts(ev: &Evaluator, h: &Samples, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = &ev.s;
    let m = ev.grid.size;
    let st = &ev.stencil;
    let mut rot = Vec::with_capacity(count);
    let mut int = Vec::with_capacity(count);
    let alpha = ev.alpha;
    if alpha == 1.0 {
        let p: Vec<Complex64> = s.w.iter().zip(&s.dphi).map(|(w, d)| w * d).collect();
        let q: Vec<Complex64> = s.w.iter().zip(&h.dphi).map(|(w, d)| w * d).collect();
        for i in 0..count {
            let wi = s.w[i];
            let (d0, e0) = (s.dphi[i], h.dphi[i]);
            let h0 = d0.norm();
            let dp0 = d0 + wi * s.d2phi[i];
            let dq0 = e0 + wi * h.d2phi[i];
            let re0 = (d0.conj() * e0).re;
            let mut acc_i = ev.weights[0] * dp0 / h0;
            let mut acc_d = ev.weights[0] * (dq0 / h0 - dp0 * re0 / (h0 * h0 * h0));
            for j in 1..m {
                let k = (i + j) % m;
                let dw = -wi * st.one_minus_zeta[j];
                let dphi = (s.phi[k] - s.phi[i]) / dw;
                let dh = (h.phi[k] - h.phi[i]) / dw;
                let hh = dphi.norm();
                let dp = (p[k] - p[i]) / dw;
                let dq = (q[k] - q[i]) / dw;
                let re = (dphi.conj() * dh).re;
                acc_i += ev.weights[j] * dp / hh;
                acc_d += ev.weights[j] * (dq / hh - dp * re / (hh * hh * hh));
            }
            let integral = acc_i * wi;
            let d_integral = acc_d * wi;
            let wb = wi.conj();
            rot.push((h.phi[i] * d0.conj() * wb + s.phi[i] * e0.conj() * wb).im);
            int.push((d_integral * d0.conj() * wb + integral * e0.conj() * wb).im);
        }
    } else {
        let e = -0.5 * alpha;
        let pw = |r2: f64| if alpha == 0.5 { 1.0 / r2.sqrt().sqrt() } else { (e * r2.ln()).exp() };
        for i in 0..count {
            let wi = s.w[i];
            let (d0, e0) = (s.dphi[i], h.dphi[i]);
            let r20 = d0.norm_sqr();
            let hp0 = pw(r20);
            let re0 = (d0.conj() * e0).re;
            let mut acc_s = ev.weights[0] * d0 * hp0;
            let mut acc_d = ev.weights[0] * (e0 * hp0 - alpha * d0 * hp0 * re0 / r20);
            for j in 1..m {
                let k = (i + j) % m;
                let dw = -wi * st.one_minus_zeta[j];
                let dphi = (s.phi[k] - s.phi[i]) / dw;
                let dh = (h.phi[k] - h.phi[i]) / dw;
                let r2 = dphi.norm_sqr();
                let hp = pw(r2);
                let re = (dphi.conj() * dh).re;
                acc_s += ev.weights[j] * s.dphi[k] * hp;
                acc_d += ev.weights[j] * (h.dphi[k] * hp - alpha * s.dphi[k] * hp * re / r2);
            }
            let sp = acc_s * wi * ev.c_alpha;
            let ds = acc_d * wi * ev.c_alpha;
            let wb = wi.conj();
            rot.push((h.phi[i] * wb * d0.conj() + s.phi[i] * wb * e0.conj()).im);
            int.push((ds * wb * d0.conj() + sp * wb * e0.conj()).im);
        }
    }
    Ok((rot, int))
}

fn combined_symmetry(a: &FourierBoundary, b: &FourierBoundary) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    gcd(a.symmetry_order(), b.symmetry_order())
}

/// ∂_f G(Ω, φ)h; `h` is read as the increment h(w) = (λ_h − 1)w + Σ c_n w̄ⁿ.
pub fn gateaux_derivative(
    bnd: &FourierBoundary,
    h: &FourierBoundary,
    omega: f64,
    alpha: f64,
    grid: &UnitGrid,
) -> Result<ResidualField> {
    let ev = Evaluator::new(bnd, alpha, grid)?;
    let hs = Samples::direction(h, grid);
    let count = sector_count(grid, combined_symmetry(bnd, h));
    let (rot, int) = gateaux_parts(&ev, &hs, count)?;
    let vals: Vec<f64> = rot.iter().zip(&int).map(|(r, i)| omega * r - i).collect();
    Ok(ResidualField::from_values(*grid, tile_values(vals, grid.size)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianMatrix {
    /// Rows: sine modes g_1..g_{N+1}; columns: directions w̄⁰..w̄^N.
    pub entries: DMatrix<f64>,
    /// ∂_Ω G(Ω, φ) in the same sine modes.
    pub omega_column: DVector<f64>,
    /// ∂_Ω ∂_f G(Ω, φ) per direction.
    pub mixed: DMatrix<f64>,
}

impl JacobianMatrix {
    pub fn size(&self) -> usize {
        self.entries.ncols()
    }
}

fn sine_vector(field: &ResidualField, rows: usize) -> DVector<f64> {
    DVector::from_iterator(rows, (1..=rows).map(|n| field.sine(n)))
}

fn truncation_for(grid: &UnitGrid) -> usize {
    (grid.size / 16).max(3) - 1
}

/// Central-difference Jacobian in the directions w̄ⁿ, n = 0..=N with N = M/16 − 1.
pub fn numerical_jacobian(bnd: &FourierBoundary, omega: f64, alpha: f64, grid: &UnitGrid, eps: f64) -> Result<JacobianMatrix> {
    if !(1e-8..=1e-4).contains(&eps) {
        return Err(VStateError::InvalidInput(format!("eps must lie in [1e-8, 1e-4], got {eps}")));
    }
    let n = truncation_for(grid);
    let size = n + 1;
    let mut entries = DMatrix::zeros(size, size);
    let mut mixed = DMatrix::zeros(size, size);
    let mut sensitivity: f64 = 0.0;
    let rotation = |b: &FourierBoundary| -> Result<ResidualField> {
        let ev = Evaluator::new(b, alpha, grid)?;
        Ok(ResidualField::from_values(*grid, ev.rotation_values()))
    };
    for col in 0..size {
        let h = FourierBoundary::mode(col, n);
        let column = |t: f64| -> Result<DVector<f64>> {
            let gp = sine_vector(&functional(omega, &bnd.perturbed(&h, t), alpha, grid)?, size);
            let gm = sine_vector(&functional(omega, &bnd.perturbed(&h, -t), alpha, grid)?, size);
            Ok((gp - gm) / (2.0 * t))
        };
        let c1 = column(eps)?;
        let c2 = column(2.0 * eps)?;
        sensitivity = sensitivity.max((&c1 - &c2).amax());
        entries.set_column(col, &c1);
        let rp = sine_vector(&rotation(&bnd.perturbed(&h, eps))?, size);
        let rm = sine_vector(&rotation(&bnd.perturbed(&h, -eps))?, size);
        mixed.set_column(col, &((rp - rm) / (2.0 * eps)));
    }
    if sensitivity > 1e-5 {
        log::warn!("finite-difference Jacobian is step sensitive: {sensitivity:.2e}");
    }
    let omega_column = sine_vector(&rotation(bnd)?, size);
    Ok(JacobianMatrix { entries, omega_column, mixed })
}

/// Jacobian split as J(Ω) = Ω·rot − int, assembled from the Gâteaux formula.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineJacobian {
    pub rot: DMatrix<f64>,
    pub int: DMatrix<f64>,
    pub omega_column: DVector<f64>,
}

impl AffineJacobian {
    pub fn at(&self, omega: f64) -> DMatrix<f64> {
        &self.rot * omega - &self.int
    }

    pub fn jacobian(&self, omega: f64) -> JacobianMatrix {
        JacobianMatrix { entries: self.at(omega), omega_column: self.omega_column.clone(), mixed: self.rot.clone() }
    }
}

/// Analytic Jacobian in directions `modes` with residual rows `rows` (sine modes).
pub fn analytic_jacobian(
    bnd: &FourierBoundary,
    alpha: f64,
    grid: &UnitGrid,
    modes: &[usize],
    rows: &[usize],
) -> Result<AffineJacobian> {
    let ev = Evaluator::new(bnd, alpha, grid)?;
    let mut rot = DMatrix::zeros(rows.len(), modes.len());
    let mut int = DMatrix::zeros(rows.len(), modes.len());
    let ntr = modes.iter().copied().max().unwrap_or(0).max(bnd.truncation());
    for (c, &n) in modes.iter().enumerate() {
        let h = FourierBoundary::mode(n, ntr);
        let hs = Samples::direction(&h, grid);
        let count = sector_count(grid, combined_symmetry(bnd, &h));
        let (r, i) = gateaux_parts(&ev, &hs, count)?;
        let fr = ResidualField::from_values(*grid, tile_values(r, grid.size));
        let fi = ResidualField::from_values(*grid, tile_values(i, grid.size));
        for (k, &row) in rows.iter().enumerate() {
            rot[(k, c)] = fr.sine(row);
            int[(k, c)] = fi.sine(row);
        }
    }
    let omega = ResidualField::from_values(*grid, ev.rotation_values());
    let omega_column = DVector::from_iterator(rows.len(), rows.iter().map(|&r| omega.sine(r)));
    Ok(AffineJacobian { rot, int, omega_column })
}

/// Square disc Jacobian: directions w̄⁰..w̄^N against sine modes 1..=N+1.
pub fn disc_jacobian(alpha: f64, grid: &UnitGrid) -> Result<AffineJacobian> {
    let n = truncation_for(grid);
    let modes: Vec<usize> = (0..=n).collect();
    let rows: Vec<usize> = (1..=n + 1).collect();
    analytic_jacobian(&FourierBoundary::identity(n), alpha, grid, &modes, &rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub alpha: f64,
    pub m: usize,
    pub omega_located: f64,
    pub omega_closed_form: f64,
    pub gap: f64,
    pub kernel_dimension: usize,
    pub kernel_mass: f64,
    pub smallest_singular: f64,
    /// Smallest singular value once the b_{m−1} column and g_m row are removed.
    pub complement_singular: f64,
}

fn svd_sorted(a: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    (svd.singular_values, svd.u.expect("u"), svd.v_t.expect("v_t"))
}

fn argmin(v: &DVector<f64>) -> usize {
    v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|x| x.0).unwrap_or(0)
}

/// Locates the Ω where the mode-(m−1) block of the disc Jacobian loses rank, by bisection in `window`.
pub fn bifurcation_scan(alpha: f64, m: usize, window: (f64, f64), grid: &UnitGrid) -> Result<ScanResult> {
    let jac = disc_jacobian(alpha, grid)?;
    scan_with(&jac, alpha, m, window)
}

pub fn scan_with(jac: &AffineJacobian, alpha: f64, m: usize, window: (f64, f64)) -> Result<ScanResult> {
    let size = jac.rot.ncols();
    if m < 2 || m > size {
        return Err(VStateError::InvalidInput(format!("mode {m} outside the assembled range 2..={size}")));
    }
    let c = m - 1;
    let entry = |om: f64| jac.rot[(c, c)] * om - jac.int[(c, c)];
    let (mut lo, mut hi) = window;
    let (mut flo, fhi) = (entry(lo), entry(hi));
    if flo == 0.0 {
        hi = lo;
    } else if fhi == 0.0 {
        lo = hi;
    } else if flo.signum() == fhi.signum() {
        return Err(VStateError::NoBracket(window.0, window.1));
    }
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = entry(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let omega = 0.5 * (lo + hi);
    let a = jac.at(omega);
    let (sv, _, vt) = svd_sorted(&a);
    let smax = sv.max();
    let kernel_dimension = sv.iter().filter(|&&s| s < 1e-9 * smax).count();
    let i = argmin(&sv);
    let kernel_mass = vt[(i, c)] * vt[(i, c)];
    let complement = a.clone().remove_row(c).remove_column(c);
    let complement_singular = complement.singular_values().min();
    let closed = omega_dispersion(alpha, m);
    Ok(ScanResult {
        alpha,
        m,
        omega_located: omega,
        omega_closed_form: closed,
        gap: (omega - closed).abs(),
        kernel_dimension,
        kernel_mass,
        smallest_singular: sv[i],
        complement_singular,
    })
}

/// True iff `column` has a component of size > tol along the cokernel of `a`.
pub fn transversality_with_column(a: &DMatrix<f64>, column: &DVector<f64>, tol: f64) -> bool {
    let (sv, u, _) = svd_sorted(a);
    let i = argmin(&sv);
    u.column(i).dot(column).abs() > tol
}

/// ∂_Ω∂_f G(Ω_m, Id) w̄^{m−1} leaves the range of ∂_f G(Ω_m, Id).
pub fn transversality_check(alpha: f64, m: usize, grid: &UnitGrid, tol: f64) -> Result<bool> {
    let jac = disc_jacobian(alpha, grid)?;
    if m < 2 || m > jac.rot.ncols() {
        return Err(VStateError::InvalidInput(format!("mode {m} outside the assembled range")));
    }
    let a = jac.at(omega_dispersion(alpha, m));
    Ok(transversality_with_column(&a, &jac.rot.column(m - 1).into_owned(), tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_zero_at_dispersion() {
        let om = omega_dispersion(0.5, 3);
        let sp = multiplier_at_disc(0.5, om, 16).unwrap();
        assert_eq!(sp.kernel_modes(1e-14), vec![2]);
        let sp = multiplier_at_disc(1.0, 2.0 / (3.0 * std::f64::consts::PI), 8).unwrap();
        assert!(sp.mult[1].abs() < 1e-15);
        let sp = multiplier_at_disc(0.3, 0.0, 8).unwrap();
        assert!(sp.mult[1..].iter().all(|&v| v < 0.0));
    }

    #[test]
    fn gateaux_at_disc_is_multiplier() {
        let g = UnitGrid::new(128).unwrap();
        for &alpha in &[0.5, 1.0] {
            let om = 0.3;
            let sp = multiplier_at_disc(alpha, om, 6).unwrap();
            for n in 0..=5 {
                let h = FourierBoundary::mode(n, 5);
                let f = gateaux_derivative(&FourierBoundary::identity(5), &h, om, alpha, &g).unwrap();
                for k in 1..20 {
                    let want = if k == n + 1 { sp.mult[n] } else { 0.0 };
                    assert!((f.sine(k) - want).abs() < 1e-12, "alpha {alpha} n {n} k {k}: {} vs {want}", f.sine(k));
                }
                assert!(f.cosine_residue < 1e-12);
            }
        }
    }

    #[test]
    fn gateaux_vs_finite_difference_ellipse() {
        let g = UnitGrid::new(128).unwrap();
        let bnd = FourierBoundary::ellipse(0.2, 4);
        let h = FourierBoundary::mode(2, 4);
        let om = 0.3;
        let a = gateaux_derivative(&bnd, &h, om, 0.5, &g).unwrap();
        let eps = 1e-6;
        let p = functional(om, &bnd.perturbed(&h, eps), 0.5, &g).unwrap();
        let m = functional(om, &bnd.perturbed(&h, -eps), 0.5, &g).unwrap();
        for i in 0..g.size {
            let fd = (p.values[i] - m.values[i]) / (2.0 * eps);
            assert!((fd - a.values[i]).abs() < 1e-7, "{fd} {}", a.values[i]);
        }
    }

    #[test]
    fn scan_half_two() {
        let g = UnitGrid::for_truncation(7);
        let r = bifurcation_scan(0.5, 2, (0.1, 0.3), &g).unwrap();
        assert!(r.gap < 1e-8, "{r:?}");
        assert_eq!(r.kernel_dimension, 1);
        assert!(r.kernel_mass > 0.999999);
        assert!(transversality_check(0.5, 3, &g, 1e-3).unwrap());
    }
}
