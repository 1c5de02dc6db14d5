//! Singular moments on the unit circle, the velocity integral S(φ), and the
//! rotating-patch functional G(Ω, φ) for α ∈ (0,1) and its α = 1 variant.
//!
//! S(φ) is evaluated by product quadrature: for a target w the kernel
//! |φ(w)−φ(τ)|^{−α} is split as |w−τ|^{−α}·H^{−α}, the smooth factor is
//! sampled on the grid and contracted against exact moments of |1−ζ|^{−α}.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VStateError};
use crate::fourier;
use crate::geometry::{
    eval_deriv, eval_deriv_at, eval_map, eval_map_at, eval_second_deriv, FourierBoundary, UnitGrid,
};
use crate::specfun::{c_alpha_const, moment_prefactor, pochhammer_ratio};

pub mod oracle;

const H_FLOOR: f64 = 1e-8;

fn check_alpha_open(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(VStateError::Domain(format!("alpha must lie in (0,1), got {alpha}")))
    }
}

/// ⨍ τⁿ |τ−w|^{−α} dτ = I_n w^{n+1}.
#[allow(non_snake_case)]
pub fn singular_moment_I(alpha: f64, n: usize) -> f64 {
    let h = alpha / 2.0;
    moment_prefactor(alpha) * pochhammer_ratio(h, 1.0 - h, n + 1)
}

/// ⨍ (w−τ)(wⁿ−τⁿ)|w−τ|^{−α−2} dτ = J_n w^{n+2}.
#[allow(non_snake_case)]
pub fn singular_moment_J(alpha: f64, n: usize) -> f64 {
    let h = alpha / 2.0;
    (1.0 + h) * moment_prefactor(alpha) / (2.0 - alpha) * (1.0 - pochhammer_ratio(2.0 + h, 2.0 - h, n))
}

/// ⨍ (w̄−τ̄)(w̄ⁿ−τ̄ⁿ)|w−τ|^{−α−2} dτ = Z_n w̄ⁿ.
#[allow(non_snake_case)]
pub fn singular_moment_Z(alpha: f64, n: usize) -> f64 {
    let h = alpha / 2.0;
    -0.5 * moment_prefactor(alpha) * (1.0 - pochhammer_ratio(h, -h, n))
}

/// ⨍ (τⁿ−wⁿ)/|w−τ| dτ/τ = sqg_moment_1(n) wⁿ.
pub fn sqg_moment_1(n: usize) -> f64 {
    -2.0 / PI * (0..n).map(|k| 1.0 / (2 * k + 1) as f64).sum::<f64>()
}

/// ⨍ (τ−w)²(τⁿ−wⁿ)/|w−τ|³ dτ/τ = sqg_moment_2(n) w^{n+2}.
pub fn sqg_moment_2(n: usize) -> f64 {
    2.0 / PI * (1..=n).map(|k| 1.0 / (2 * k + 1) as f64).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTable {
    pub alpha: f64,
    #[serde(rename = "I")]
    pub i: Vec<f64>,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    #[serde(rename = "Z")]
    pub z: Vec<f64>,
    pub max_n: usize,
}

impl MomentTable {
    pub fn new(alpha: f64, max_n: usize) -> Result<Self> {
        check_alpha_open(alpha)?;
        Ok(Self {
            alpha,
            i: (0..=max_n).map(|n| singular_moment_I(alpha, n)).collect(),
            j: (0..=max_n).map(|n| singular_moment_J(alpha, n)).collect(),
            z: (0..=max_n).map(|n| singular_moment_Z(alpha, n)).collect(),
            max_n,
        })
    }
}

/// μ_k = (1/2π)∫ e^{ikη}|1−e^{iη}|^{−α} dη for k = 0..=count (μ_{−k} = μ_k).
pub fn power_moments(alpha: f64, count: usize) -> Vec<f64> {
    let h = alpha / 2.0;
    let mut mu = Vec::with_capacity(count + 1);
    let mut v = moment_prefactor(alpha);
    for k in 0..=count {
        mu.push(v);
        let k = k as f64;
        v *= (h + k) / (1.0 - h + k);
    }
    mu
}

/// ν_k = (1/2π)∫_0^{2π} i e^{iη/2} e^{ikη} dη = −2/(π(2k+1)).
pub fn sign_moment(k: i64) -> f64 {
    -2.0 / (PI * (2 * k + 1) as f64)
}

// weights W_j = (1/M) Σ_k c_k ζ_j^{−k}, |k| < M/2, Nyquist split evenly
fn weights_from_coefficients(m: usize, coef: impl Fn(i64) -> f64) -> Vec<Complex64> {
    let half = (m / 2) as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for k in (-half + 1)..half {
        buf[k.rem_euclid(m as i64) as usize] = Complex64::new(coef(k), 0.0);
    }
    buf[m / 2] = Complex64::new(0.5 * (coef(half) + coef(-half)), 0.0);
    let inv = 1.0 / m as f64;
    fourier::dft(&buf).into_iter().map(|c| c * inv).collect()
}

/// Product-quadrature weights of |1−ζ|^{−α}·ζ on an M-point grid.
pub fn product_weights(alpha: f64, m: usize) -> Vec<Complex64> {
    let mu = power_moments(alpha, m / 2 + 2);
    weights_from_coefficients(m, |k| mu[(k + 1).unsigned_abs() as usize])
}

/// Product-quadrature weights of the α = 1 sign kernel i e^{iη/2}, η ∈ (0, 2π).
pub fn sign_weights(m: usize) -> Vec<Complex64> {
    weights_from_coefficients(m, sign_moment)
}

/// Geometry of the offsets ζ_j = e^{2πij/M} shared by every target.
pub(crate) struct Stencil {
    pub one_minus_zeta: Vec<Complex64>,
    pub chord2: Vec<f64>,
}

impl Stencil {
    pub fn new(m: usize) -> Self {
        let mut one_minus_zeta = Vec::with_capacity(m);
        let mut chord2 = Vec::with_capacity(m);
        for j in 0..m {
            let x = PI * j as f64 / m as f64;
            let s = x.sin();
            one_minus_zeta.push(Complex64::new(0.0, -2.0 * s) * Complex64::from_polar(1.0, x));
            chord2.push(4.0 * s * s);
        }
        Self { one_minus_zeta, chord2 }
    }
}

/// Samples of φ and its derivatives on the grid.
pub(crate) struct Samples {
    pub w: Vec<Complex64>,
    pub phi: Vec<Complex64>,
    pub dphi: Vec<Complex64>,
    pub d2phi: Vec<Complex64>,
}

impl Samples {
    pub fn new(bnd: &FourierBoundary, grid: &UnitGrid) -> Self {
        Self {
            w: grid.nodes(),
            phi: eval_map(bnd, grid),
            dphi: eval_deriv(bnd, grid),
            d2phi: eval_second_deriv(bnd, grid),
        }
    }

    /// Samples of a direction h(w) = (λ−1)w + Σ c_n w̄ⁿ.
    pub fn direction(h: &FourierBoundary, grid: &UnitGrid) -> Self {
        let mut s = Self::new(h, grid);
        let one = Complex64::new(1.0, 0.0);
        for (p, w) in s.phi.iter_mut().zip(&s.w) {
            *p -= w;
        }
        for d in s.dphi.iter_mut() {
            *d -= one;
        }
        s
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Number of targets needed when the integrand is invariant under rotation by 2π/s.
fn sector_len(m: usize, symmetry: usize) -> usize {
    let s = if symmetry == 0 { m } else { gcd(m, symmetry) };
    m / s.max(1)
}

fn tile<T: Copy>(mut v: Vec<T>, m: usize) -> Vec<T> {
    let len = v.len();
    v.reserve(m - len);
    for i in len..m {
        let x = v[i % len];
        v.push(x);
    }
    v
}

#[inline]
fn neg_half_power(alpha: f64) -> impl Fn(f64) -> f64 {
    let e = -0.5 * alpha;
    move |r2: f64| {
        if alpha == 0.5 {
            1.0 / r2.sqrt().sqrt()
        } else {
            (e * r2.ln()).exp()
        }
    }
}

/// Evaluator bound to one boundary, grid and α.
pub(crate) struct Evaluator {
    pub alpha: f64,
    pub grid: UnitGrid,
    pub stencil: Stencil,
    pub weights: Vec<Complex64>,
    pub s: Samples,
    pub c_alpha: f64,
}

impl Evaluator {
    pub fn new(bnd: &FourierBoundary, alpha: f64, grid: &UnitGrid) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(VStateError::Domain(format!("alpha must lie in (0,1], got {alpha}")));
        }
        let m = grid.size;
        let weights = if alpha == 1.0 { sign_weights(m) } else { product_weights(alpha, m) };
        Ok(Self {
            alpha,
            grid: *grid,
            stencil: Stencil::new(m),
            weights,
            s: Samples::new(bnd, grid),
            c_alpha: if alpha == 1.0 { 1.0 } else { c_alpha_const(alpha)? },
        })
    }

    /// S(φ)(w_i) for i < count.
    pub fn s_phi(&self, count: usize) -> Result<Vec<Complex64>> {
        let m = self.grid.size;
        let s = &self.s;
        let pw = neg_half_power(self.alpha);
        let mut out = Vec::with_capacity(count);
        let mut hmin = f64::INFINITY;
        for i in 0..count {
            let d0 = s.dphi[i];
            let mut acc = self.weights[0] * d0 * pw(d0.norm_sqr());
            for j in 1..m {
                let k = (i + j) % m;
                let r2 = (s.phi[i] - s.phi[k]).norm_sqr() / self.stencil.chord2[j];
                hmin = hmin.min(r2);
                acc += self.weights[j] * s.dphi[k] * pw(r2);
            }
            hmin = hmin.min(d0.norm_sqr());
            out.push(acc * s.w[i] * self.c_alpha);
        }
        let hmin = hmin.sqrt();
        if hmin < H_FLOOR {
            return Err(VStateError::NearSelfIntersection(hmin));
        }
        Ok(out)
    }

    /// ⨍ (τφ'(τ) − wφ'(w))/|φ(w)−φ(τ)| dτ/τ at w_i for i < count.
    pub fn sqg_integral(&self, count: usize) -> Result<Vec<Complex64>> {
        let m = self.grid.size;
        let s = &self.s;
        let p: Vec<Complex64> = s.w.iter().zip(&s.dphi).map(|(w, d)| w * d).collect();
        let mut out = Vec::with_capacity(count);
        let mut hmin = f64::INFINITY;
        for i in 0..count {
            let wi = s.w[i];
            let d0 = s.dphi[i];
            let h0 = d0.norm();
            hmin = hmin.min(h0);
            let mut acc = self.weights[0] * (d0 + wi * s.d2phi[i]) / h0;
            for j in 1..m {
                let k = (i + j) % m;
                let dw = -wi * self.stencil.one_minus_zeta[j];
                let h = ((s.phi[i] - s.phi[k]).norm_sqr() / self.stencil.chord2[j]).sqrt();
                hmin = hmin.min(h);
                acc += self.weights[j] * (p[k] - p[i]) / (dw * h);
            }
            out.push(acc * wi);
        }
        if hmin < H_FLOOR {
            return Err(VStateError::NearSelfIntersection(hmin));
        }
        Ok(out)
    }

    /// Values of G(Ω, φ) at the first `count` nodes.
    pub fn functional_values(&self, omega: f64, count: usize) -> Result<Vec<f64>> {
        let s = &self.s;
        let integral = if self.alpha == 1.0 { self.sqg_integral(count)? } else { self.s_phi(count)? };
        Ok((0..count)
            .map(|i| ((omega * s.phi[i] - integral[i]) * s.w[i].conj() * s.dphi[i].conj()).im)
            .collect())
    }

    /// R(φ) = Im{φ w̄ φ̄'}, the Ω-derivative of G.
    pub fn rotation_values(&self) -> Vec<f64> {
        let s = &self.s;
        (0..self.grid.size).map(|i| (s.phi[i] * s.w[i].conj() * s.dphi[i].conj()).im).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualField {
    pub grid: UnitGrid,
    pub values: Vec<f64>,
    /// g_n of the expansion i Σ g_n (wⁿ − w̄ⁿ), n = 0..M/2 (g_0 = 0).
    pub sine_coeffs: Vec<f64>,
    /// Largest cosine coefficient, zero for fields in the sine space.
    pub cosine_residue: f64,
}

impl ResidualField {
    pub fn from_values(grid: UnitGrid, values: Vec<f64>) -> Self {
        let spec = fourier::half_spectrum(&values, grid.shift());
        let n = grid.size / 2;
        let sine_coeffs = (0..n).map(|k| if k == 0 { 0.0 } else { spec[k].im }).collect();
        let cosine_residue = spec[..n].iter().map(|c| c.re.abs()).fold(0.0, f64::max);
        Self { grid, values, sine_coeffs, cosine_residue }
    }

    pub fn sine(&self, n: usize) -> f64 {
        self.sine_coeffs.get(n).copied().unwrap_or(0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// max_n |g_n|.
    pub fn sine_norm(&self) -> f64 {
        self.sine_coeffs.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Angle/value rows for CSV export.
    pub fn rows(&self) -> Vec<(f64, f64)> {
        self.grid.angles().into_iter().zip(self.values.iter().copied()).collect()
    }
}

/// S(φ)(w_j) on the grid, α ∈ (0,1).
pub fn s_phi(bnd: &FourierBoundary, alpha: f64, grid: &UnitGrid) -> Result<Vec<Complex64>> {
    check_alpha_open(alpha)?;
    let ev = Evaluator::new(bnd, alpha, grid)?;
    ev.s_phi(grid.size)
}

/// Independent evaluation of S(φ) at the `targets` nodes: midpoint rule with sources
/// offset by half a spacing, at M and M/2 sources, Richardson-extrapolated in h^{1−α}.
pub fn s_phi_trapezoid(bnd: &FourierBoundary, alpha: f64, targets: &UnitGrid, sources: usize) -> Result<Vec<Complex64>> {
    check_alpha_open(alpha)?;
    if sources < 4 || !sources.is_multiple_of(4) {
        return Err(VStateError::InvalidInput("source count must be a positive multiple of 4".into()));
    }
    let c = c_alpha_const(alpha)?;
    let midpoint = |w: Complex64, m: usize| -> Complex64 {
        let z = eval_map_at(bnd, w);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..m {
            let tau = w * Complex64::from_polar(1.0, PI * (2 * j + 1) as f64 / m as f64);
            let d = (z - eval_map_at(bnd, tau)).norm_sqr();
            acc += eval_deriv_at(bnd, tau) * tau * d.powf(-0.5 * alpha);
        }
        acc / m as f64
    };
    let r = 2f64.powf(1.0 - alpha);
    Ok(targets
        .nodes()
        .into_iter()
        .map(|w| c * (r * midpoint(w, sources) - midpoint(w, sources / 2)) / (r - 1.0))
        .collect())
}

/// G(Ω, φ)(w) = Im{(Ωφ(w) − S(φ)(w)) w̄ φ̄'(w)} for α ∈ (0,1).
#[allow(non_snake_case)]
pub fn functional_G(omega: f64, bnd: &FourierBoundary, alpha: f64, grid: &UnitGrid) -> Result<ResidualField> {
    check_alpha_open(alpha)?;
    functional(omega, bnd, alpha, grid)
}

/// α = 1 functional with the subtracted numerator τφ'(τ) − wφ'(w) and no C_α.
#[allow(non_snake_case)]
pub fn functional_G_sqg(omega: f64, bnd: &FourierBoundary, grid: &UnitGrid) -> Result<ResidualField> {
    functional(omega, bnd, 1.0, grid)
}

/// Dispatches to the α ∈ (0,1) or α = 1 functional.
pub fn functional(omega: f64, bnd: &FourierBoundary, alpha: f64, grid: &UnitGrid) -> Result<ResidualField> {
    let ev = Evaluator::new(bnd, alpha, grid)?;
    let count = sector_len(grid.size, bnd.symmetry_order());
    let vals = ev.functional_values(omega, count)?;
    Ok(ResidualField::from_values(*grid, tile(vals, grid.size)))
}

pub(crate) fn sector_count(grid: &UnitGrid, symmetry: usize) -> usize {
    sector_len(grid.size, symmetry)
}

pub(crate) fn tile_values(v: Vec<f64>, m: usize) -> Vec<f64> {
    tile(v, m)
}

/// Coefficient g_4 of (w⁴ − w̄⁴) in G(Ω, w + Q w̄).
pub fn ellipse_fourth_coefficient(omega: f64, q: f64, alpha: f64, grid: &UnitGrid) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(VStateError::InvalidInput(format!("Q must lie in [0,1), got {q}")));
    }
    let bnd = FourierBoundary::ellipse(q, 1);
    Ok(functional(omega, &bnd, alpha, grid)?.sine(4))
}

/// Ratio a₂/a₀ = (2+α)(4+α)/((4−α)(6−α)) of the moments ⨍ ζ^{±2}|1−ζ|^{−α} dζ.
pub fn ellipse_moment_ratio(alpha: f64) -> f64 {
    (2.0 + alpha) * (4.0 + alpha) / ((4.0 - alpha) * (6.0 - alpha))
}

/// Series value of g_4 for the ellipse:
/// C_α (1−Q²)(1+Q²)^{−α/2} (a₂ − a₀)/2 · Σ_{k≥1} A_{2k} binom(2k, k−1).
pub fn ellipse_fourth_coefficient_series(q: f64, alpha: f64) -> Result<f64> {
    check_alpha_open(alpha)?;
    let c = c_alpha_const(alpha)? * (1.0 - q * q) / (1.0 + q * q).powf(alpha / 2.0);
    let mu = power_moments(alpha, 3);
    let (a2, a0) = (mu[3], mu[1]);
    let x = q / (1.0 + q * q);
    let h = alpha / 2.0;
    // A_n = (α/2)_n/n! x^n, binom(2k, k-1) updated in place
    let mut sum = 0.0;
    let mut a_n = 1.0;
    let mut binom = 1.0; // binom(2, 0)
    let mut n = 0usize;
    for k in 1..2000usize {
        while n < 2 * k {
            a_n *= (h + n as f64) / (n as f64 + 1.0) * x;
            n += 1;
        }
        if k > 1 {
            // binom(2k, k-1) from binom(2k-2, k-2)
            let kk = k as f64;
            binom *= (2.0 * kk) * (2.0 * kk - 1.0) / ((kk - 1.0) * (kk + 1.0));
        }
        let term = a_n * binom;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    Ok(c * (a2 - a0) / 2.0 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_fn;

    #[test]
    fn moment_closed_forms() {
        let a = 0.5;
        let k0 = gamma_fn(0.5).unwrap() / gamma_fn(0.75).unwrap().powi(2);
        assert!((singular_moment_I(a, 0) - k0 * 0.25 / 0.75).abs() < 1e-15);
        assert_eq!(singular_moment_J(a, 0), 0.0);
        assert!((singular_moment_Z(a, 1) + k0).abs() < 1e-14);
        for n in 0..30 {
            let r = singular_moment_I(a, n + 1) / singular_moment_I(a, n);
            let want = (a / 2.0 + n as f64 + 1.0) / (1.0 - a / 2.0 + n as f64 + 1.0);
            assert!((r - want).abs() < 1e-14);
        }
        assert!((sqg_moment_1(1) + 2.0 / PI).abs() < 1e-16);
        assert!((sqg_moment_2(1) - 2.0 / (3.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn ratio_formula() {
        let mu = power_moments(0.5, 3);
        assert!((mu[3] / mu[1] - ellipse_moment_ratio(0.5)).abs() < 1e-15);
        assert!((ellipse_moment_ratio(0.5) - 2.5 * 4.5 / (3.5 * 5.5)).abs() < 1e-15);
    }

    #[test]
    fn disc_is_annihilated() {
        let g = UnitGrid::new(64).unwrap();
        let id = FourierBoundary::identity(3);
        for &a in &[0.1, 0.5, 0.9, 1.0] {
            for &om in &[-1.0, 0.0, 0.37, 1.0] {
                let r = functional(om, &id, a, &g).unwrap();
                assert!(r.sup_norm() < 1e-12, "alpha {a} omega {om}: {}", r.sup_norm());
            }
        }
    }

    #[test]
    fn identity_s_phi() {
        let g = UnitGrid::new(32).unwrap();
        let a = 0.5;
        let s = s_phi(&FourierBoundary::identity(2), a, &g).unwrap();
        let want = c_alpha_const(a).unwrap() * singular_moment_I(a, 0);
        for (v, w) in s.iter().zip(g.nodes()) {
            assert!((v - want * w).norm() < 1e-13);
        }
    }

    #[test]
    fn product_vs_trapezoid() {
        let a = 0.5;
        let bnd = FourierBoundary::ellipse(0.3, 1);
        let g = UnitGrid::new(256).unwrap();
        let s = s_phi(&bnd, a, &g).unwrap();
        let t = UnitGrid::new(8).unwrap();
        let f = s_phi_trapezoid(&bnd, a, &t, 8192).unwrap();
        for (i, v) in f.iter().enumerate() {
            let d = (v - s[i * 32]).norm();
            assert!(d < 1e-6, "node {i}: {d:e}");
        }
    }

    #[test]
    fn ellipse_g4_series_matches_quadrature() {
        let g = UnitGrid::new(512).unwrap();
        let num = ellipse_fourth_coefficient(0.3, 0.3, 0.5, &g).unwrap();
        let ser = ellipse_fourth_coefficient_series(0.3, 0.5).unwrap();
        assert!((num - ser).abs() < 1e-12, "{num} vs {ser}");
        assert!((ser + 0.002_227_504_402_345_877).abs() < 1e-15);
    }
}
