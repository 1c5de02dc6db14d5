//! Boundaries given by truncated exterior conformal maps
//! φ(w) = λw + Σ_{n=0}^{N} b_n w̄ⁿ on the unit circle, with real coefficients.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VStateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitGrid {
    pub size: usize,
    pub offset: bool,
}

impl UnitGrid {
    pub fn new(size: usize) -> Result<Self> {
        Self::build(size, false)
    }

    pub fn offset(size: usize) -> Result<Self> {
        Self::build(size, true)
    }

    fn build(size: usize, offset: bool) -> Result<Self> {
        if size < 2 || !size.is_multiple_of(2) {
            return Err(VStateError::InvalidInput(format!("grid size must be even and >= 2, got {size}")));
        }
        Ok(Self { size, offset })
    }

    /// Default grid for truncation N: 16(N+1) nodes.
    pub fn for_truncation(n: usize) -> Self {
        Self { size: 16 * (n + 1), offset: false }
    }

    /// Shift of node j in units of the spacing (0 or 1/2).
    pub fn shift(&self) -> f64 {
        if self.offset {
            0.5
        } else {
            0.0
        }
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * (j as f64 + self.shift()) / self.size as f64
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.size).map(|j| self.angle(j)).collect()
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.size).map(|j| Complex64::from_polar(1.0, self.angle(j))).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierBoundary {
    pub coeffs: Vec<f64>,
    /// Leading coefficient λ of w; 1 except for dilated maps.
    pub scale: f64,
}

impl FourierBoundary {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(VStateError::InvalidInput("truncation N must be positive".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(VStateError::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { coeffs, scale: 1.0 })
    }

    pub fn identity(n: usize) -> Self {
        Self { coeffs: vec![0.0; n.max(1) + 1], scale: 1.0 }
    }

    /// w + Q w̄, an ellipse with semi-axes 1 + Q and 1 − Q.
    pub fn ellipse(q: f64, n: usize) -> Self {
        let mut b = Self::identity(n.max(1));
        b.coeffs[1] = q;
        b
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient b_n, zero beyond the truncation.
    pub fn coeff(&self, n: usize) -> f64 {
        self.coeffs.get(n).copied().unwrap_or(0.0)
    }

    pub fn with_truncation(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n.max(1) + 1, 0.0);
        Self { coeffs, scale: self.scale }
    }

    pub fn is_identity(&self) -> bool {
        self.scale == 1.0 && self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Largest m such that b_n ≠ 0 only for n ≡ −1 (mod m); 0 for the identity.
    pub fn symmetry_order(&self) -> usize {
        let mut g = 0usize;
        for (n, &c) in self.coeffs.iter().enumerate() {
            if c != 0.0 {
                g = gcd(g, n + 1);
            }
        }
        g
    }

    pub fn is_mfold(&self, m: usize) -> bool {
        self.coeffs.iter().enumerate().all(|(n, &c)| c == 0.0 || (n + 1) % m == 0)
    }

    /// `self + t·h`, truncation extended to cover both.
    pub fn perturbed(&self, h: &FourierBoundary, t: f64) -> Self {
        let n = self.truncation().max(h.truncation());
        let mut out = self.with_truncation(n);
        for (k, c) in h.coeffs.iter().enumerate() {
            out.coeffs[k] += t * c;
        }
        out.scale += t * (h.scale - 1.0);
        out
    }

    /// Direction w̄ⁿ as a boundary increment (scale 1 means no change of the leading term).
    pub fn mode(n: usize, truncation: usize) -> Self {
        let mut b = Self::identity(truncation.max(n));
        b.coeffs[n] = 1.0;
        b
    }

    pub fn min_abs_deriv(&self, samples: usize) -> f64 {
        let grid = UnitGrid { size: samples.max(2) & !1, offset: false };
        eval_deriv(self, &grid).iter().map(|d| d.norm()).fold(f64::INFINITY, f64::min)
    }

    /// Univalence proxy: |φ'| bounded away from zero on a fine grid.
    pub fn is_univalent_proxy(&self) -> bool {
        self.min_abs_deriv(16 * (self.truncation() + 1).max(64)) > 1e-6
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::json!({
            "alpha_independent": true,
            "N": self.truncation(),
            "coeffs": self.coeffs,
        });
        if self.scale != 1.0 {
            v["scale"] = serde_json::json!(self.scale);
        }
        v
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let coeffs: Vec<f64> = v
            .get("coeffs")
            .and_then(|c| serde_json::from_value(c.clone()).ok())
            .ok_or_else(|| VStateError::InvalidInput("missing coeffs".into()))?;
        let mut b = Self::new(coeffs)?;
        if let Some(s) = v.get("scale").and_then(|s| s.as_f64()) {
            b.scale = s;
        }
        Ok(b)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn check_aliasing(bnd: &FourierBoundary, grid: &UnitGrid) {
    if grid.size < 2 * (bnd.truncation() + 1) {
        log::warn!(
            "grid of {} nodes aliases a boundary truncated at N = {}",
            grid.size,
            bnd.truncation()
        );
    }
}

// Σ_n c_n z^n by Horner
fn horner(c: impl DoubleEndedIterator<Item = f64>, z: Complex64) -> Complex64 {
    c.rev().fold(Complex64::new(0.0, 0.0), |acc, b| acc * z + b)
}

/// φ(w_j) on the grid.
pub fn eval_map(bnd: &FourierBoundary, grid: &UnitGrid) -> Vec<Complex64> {
    check_aliasing(bnd, grid);
    grid.nodes().into_iter().map(|w| eval_map_at(bnd, w)).collect()
}

pub fn eval_map_at(bnd: &FourierBoundary, w: Complex64) -> Complex64 {
    bnd.scale * w + horner(bnd.coeffs.iter().copied(), w.conj())
}

/// φ'(w_j) = λ − Σ n b_n w̄^{n+1}.
pub fn eval_deriv(bnd: &FourierBoundary, grid: &UnitGrid) -> Vec<Complex64> {
    check_aliasing(bnd, grid);
    grid.nodes().into_iter().map(|w| eval_deriv_at(bnd, w)).collect()
}

pub fn eval_deriv_at(bnd: &FourierBoundary, w: Complex64) -> Complex64 {
    let z = w.conj();
    let s = horner(bnd.coeffs.iter().enumerate().map(|(n, &b)| n as f64 * b), z);
    bnd.scale - s * z
}

/// φ''(w_j) = Σ n(n+1) b_n w̄^{n+2}.
pub fn eval_second_deriv(bnd: &FourierBoundary, grid: &UnitGrid) -> Vec<Complex64> {
    grid.nodes().into_iter().map(|w| eval_second_deriv_at(bnd, w)).collect()
}

pub fn eval_second_deriv_at(bnd: &FourierBoundary, w: Complex64) -> Complex64 {
    let z = w.conj();
    horner(bnd.coeffs.iter().enumerate().map(|(n, &b)| (n * (n + 1)) as f64 * b), z) * z * z
}

/// conj(φ'(w)) through the identity conj(f)'(w) relation: for real coefficients
/// conj(φ'(w)) = φ'(w̄).
pub fn eval_conj_deriv(bnd: &FourierBoundary, grid: &UnitGrid) -> Vec<Complex64> {
    grid.nodes().into_iter().map(|w| eval_deriv_at(bnd, w.conj())).collect()
}

/// Dilation by λ > 0: returns λφ and the angular-velocity factor λ^{−α}.
pub fn dilate(bnd: &FourierBoundary, lambda: f64, alpha: f64) -> Result<(FourierBoundary, f64)> {
    if !(lambda > 0.0) {
        return Err(VStateError::InvalidInput(format!("dilation factor must be positive, got {lambda}")));
    }
    let out = FourierBoundary {
        coeffs: bnd.coeffs.iter().map(|c| c * lambda).collect(),
        scale: bnd.scale * lambda,
    };
    Ok((out, lambda.powf(-alpha)))
}

/// m-fold boundary φ(w) = w + Σ_{k≥1} a_{km−1} w̄^{km−1}; `coeffs[k-1] = a_{km−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MFoldBoundary {
    pub m: usize,
    pub coeffs: Vec<f64>,
}

impl MFoldBoundary {
    pub fn new(m: usize, coeffs: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(VStateError::InvalidInput(format!("m must be >= 2, got {m}")));
        }
        Ok(Self { m, coeffs })
    }

    /// Fourier index of reduced coefficient k (0-based): (k+1)m − 1.
    pub fn index(&self, k: usize) -> usize {
        (k + 1) * self.m - 1
    }

    /// Smallest truncation holding every reduced coefficient.
    pub fn natural_truncation(&self) -> usize {
        self.index(self.coeffs.len().max(1) - 1)
    }

    pub fn to_boundary(&self) -> FourierBoundary {
        embed_mfold(self, self.natural_truncation()).expect("natural truncation fits")
    }
}

pub fn embed_mfold(red: &MFoldBoundary, n: usize) -> Result<FourierBoundary> {
    if n + 1 < red.m {
        return Err(VStateError::InvalidInput(format!("truncation {n} below m - 1 = {}", red.m - 1)));
    }
    let mut b = FourierBoundary::identity(n);
    for (k, &a) in red.coeffs.iter().enumerate() {
        let idx = red.index(k);
        if idx <= n {
            b.coeffs[idx] = a;
        } else if a != 0.0 {
            log::warn!("reduced coefficient a_{idx} dropped by truncation {n}");
        }
    }
    Ok(b)
}

/// Keeps the m-fold coefficients; returns them together with the discarded energy Σ b_n².
pub fn project_mfold(bnd: &FourierBoundary, m: usize, strict: bool) -> Result<(MFoldBoundary, f64)> {
    if m < 2 {
        return Err(VStateError::InvalidInput(format!("m must be >= 2, got {m}")));
    }
    let mut coeffs = Vec::new();
    let mut energy = 0.0;
    for (n, &c) in bnd.coeffs.iter().enumerate() {
        if (n + 1) % m == 0 {
            coeffs.push(c);
        } else {
            energy += c * c;
        }
    }
    if strict && energy > 1e-12 {
        return Err(VStateError::NotMFold(energy));
    }
    Ok((MFoldBoundary { m, coeffs }, energy))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_map_is_exact() {
        let g = UnitGrid::new(64).unwrap();
        let b = FourierBoundary::identity(8);
        for (z, w) in eval_map(&b, &g).iter().zip(g.nodes()) {
            assert_eq!(*z, w);
        }
        assert!(eval_deriv(&b, &g).iter().all(|d| *d == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn ellipse_values() {
        let g = UnitGrid::offset(32).unwrap();
        let b = FourierBoundary::ellipse(0.3, 4);
        let phi = eval_map(&b, &g);
        let dphi = eval_deriv(&b, &g);
        for ((w, z), d) in g.nodes().iter().zip(&phi).zip(&dphi) {
            assert!((z - (w + 0.3 * w.conj())).norm() < 1e-15);
            assert!((d - (1.0 - 0.3 * w.conj() * w.conj())).norm() < 1e-15);
        }
    }

    #[test]
    fn conj_deriv_identity() {
        let b = FourierBoundary::new(vec![0.0, 0.05, -0.02, 0.01, 0.003]).unwrap();
        let g = UnitGrid::new(40).unwrap();
        let d = eval_deriv(&b, &g);
        let c = eval_conj_deriv(&b, &g);
        for (x, y) in d.iter().zip(&c) {
            assert!((x.conj() - y).norm() < 1e-15);
        }
    }

    #[test]
    fn mfold_rotation() {
        let red = MFoldBoundary::new(3, vec![0.1, -0.02, 0.004]).unwrap();
        let b = embed_mfold(&red, 12).unwrap();
        assert_eq!(b.symmetry_order(), 3);
        let rot = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        for w in UnitGrid::new(48).unwrap().nodes() {
            let lhs = eval_map_at(&b, rot * w);
            let rhs = rot * eval_map_at(&b, w);
            assert!((lhs - rhs).norm() < 1e-13);
        }
        assert_eq!(b.coeffs[2], 0.1);
        let (back, e) = project_mfold(&b, 3, true).unwrap();
        assert_eq!(e, 0.0);
        assert_eq!(embed_mfold(&back, 12).unwrap(), b);
    }

    #[test]
    fn strict_projection_rejects() {
        let b = FourierBoundary::new(vec![0.0, 0.1, 0.2]).unwrap();
        assert!(matches!(project_mfold(&b, 3, true), Err(VStateError::NotMFold(_))));
    }

    #[test]
    fn dilation_factor() {
        let b = FourierBoundary::ellipse(0.2, 3);
        let (d, f) = dilate(&b, 1.0, 0.5).unwrap();
        assert_eq!(d, b);
        assert_eq!(f, 1.0);
        let (d, f) = dilate(&b, 2.0, 0.5).unwrap();
        assert!((f - 2f64.powf(-0.5)).abs() < 1e-16);
        assert_eq!(d.scale, 2.0);
        assert_eq!(d.coeffs[1], 0.4);
    }

    #[test]
    fn json_round_trip() {
        let b = FourierBoundary::new(vec![0.0, 0.1, 1.0 / 3.0]).unwrap();
        let v = b.to_json();
        assert_eq!(v["N"], 2);
        assert!(v.get("scale").is_none());
        assert_eq!(FourierBoundary::from_json(&v).unwrap(), b);
    }
}
