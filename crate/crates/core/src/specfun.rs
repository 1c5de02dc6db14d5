//! Special functions and the closed-form constants of the rotating-patch problem:
//! gamma, Pochhammer symbols, digamma at half integers, the kernel constant
//! `C_α`, the dispersion relation `Ω_m^α` and its large-`m` asymptotics.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VStateError};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

// Lanczos sum for argument x - 1, x >= 0.5
fn lanczos_sum(x: f64) -> f64 {
    let z = x - 1.0;
    let mut s = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        s += c / (z + i as f64);
    }
    s
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let mut r = x - 2.0 * (x / 2.0).round();
    if r > 0.5 {
        r = 1.0 - r;
    } else if r < -0.5 {
        r = -1.0 - r;
    }
    (PI * r).sin()
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) for real x away from the poles 0, −1, −2, ...
///
/// Lanczos approximation (g = 7, 9 terms) for x ≥ 1/2, reflection below.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(VStateError::Domain("gamma of NaN".into()));
    }
    if is_pole(x) {
        return Err(VStateError::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma_unchecked(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        let mut f = 1.0;
        for k in 2..(x as u64) {
            f *= k as f64;
        }
        return f;
    }
    let t = x - 0.5 + LANCZOS_G;
    // split the power so that x up to ~171 does not overflow
    let a = t.powf(0.5 * (x - 0.5));
    (2.0 * PI).sqrt() * a * (a * (-t).exp()) * lanczos_sum(x)
}

/// ln|Γ(x)|.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(VStateError::Domain("ln_gamma of NaN".into()));
    }
    if is_pole(x) {
        return Err(VStateError::GammaPole(x));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / sin_pi(x).abs()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let t = x - 0.5 + LANCZOS_G;
    0.5 * (2.0 * PI).ln() + (x - 0.5) * t.ln() - t + lanczos_sum(x).ln()
}

/// Γ(a)/Γ(b) for positive a, b.
pub fn gamma_ratio(a: f64, b: f64) -> f64 {
    if a < 150.0 && b < 150.0 {
        gamma_unchecked(a) / gamma_unchecked(b)
    } else {
        (ln_gamma_unchecked(a) - ln_gamma_unchecked(b)).exp()
    }
}

/// Rising factorial (x)_n = x(x+1)···(x+n−1), with (x)_0 = 1.
pub fn pochhammer(x: f64, n: usize) -> f64 {
    let mut p = 1.0;
    for k in 0..n {
        p *= x + k as f64;
    }
    p
}

/// (a)_n / (b)_n evaluated as a product of ratios (no overflow).
pub fn pochhammer_ratio(a: f64, b: f64, n: usize) -> f64 {
    let mut p = 1.0;
    for k in 0..n {
        let k = k as f64;
        p *= (a + k) / (b + k);
    }
    p
}

/// ϝ(n + 1/2) = −γ − 2 ln 2 + 2 Σ_{k<n} 1/(2k+1).
pub fn digamma_half_integer(n: usize) -> f64 {
    let s: f64 = (0..n).map(|k| 1.0 / (2 * k + 1) as f64).sum();
    -EULER_GAMMA - 2.0 * LN_2 + 2.0 * s
}

/// Riemann ζ(s) for real s > 0, s ≠ 1.
///
/// Borwein's accelerated alternating series for η(s), then
/// ζ(s) = η(s)/(1 − 2^{1−s}). About 1e-16 relative with 40 terms.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 0.0) || s == 1.0 {
        return Err(VStateError::Domain(format!("zeta at s = {s}")));
    }
    if s > 60.0 {
        return Ok(1.0 + 2f64.powf(-s));
    }
    const N: usize = 40;
    let n = N as f64;
    let mut d = [0.0f64; N + 1];
    let mut term = 1.0 / n;
    let mut acc = term;
    d[0] = n * acc;
    for i in 0..N {
        let fi = i as f64;
        term *= 4.0 * (n + fi) * (n - fi) / ((2.0 * fi + 1.0) * (2.0 * fi + 2.0));
        acc += term;
        d[i + 1] = n * acc;
    }
    let dn = d[N];
    let mut eta = 0.0;
    for k in 0..N {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        eta += sign * (d[k] - dn) / ((k + 1) as f64).powf(s);
    }
    eta = -eta / dn;
    Ok(eta / -((1.0 - s) * LN_2).exp_m1())
}

/// C_α = Γ(α/2) / (2^{1−α} Γ(1−α/2)).
pub fn c_alpha_const(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha > 1.0 {
        return Err(VStateError::Domain(format!("C_alpha needs alpha in (0,1], got {alpha}")));
    }
    Ok(gamma_unchecked(alpha / 2.0) / (2f64.powf(1.0 - alpha) * gamma_unchecked(1.0 - alpha / 2.0)))
}

/// K_α = Γ(1−α)/Γ²(1−α/2), the zeroth moment of |1−τ|^{−α}.
pub fn moment_prefactor(alpha: f64) -> f64 {
    let g = gamma_unchecked(1.0 - alpha / 2.0);
    gamma_unchecked(1.0 - alpha) / (g * g)
}

/// Θ_α = 2^α Γ(1+α/2) Γ(1−α) / ((2−α) Γ³(1−α/2)), the limit of Ω_m^α as m → ∞.
pub fn theta_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(VStateError::Domain(format!("Theta_alpha needs alpha in (0,1), got {alpha}")));
    }
    let g = gamma_unchecked(1.0 - alpha / 2.0);
    Ok(2f64.powf(alpha) * gamma_unchecked(1.0 + alpha / 2.0) * gamma_unchecked(1.0 - alpha)
        / ((2.0 - alpha) * g * g * g))
}

/// Dispersion relation Ω_m^α, Pochhammer form for α ∈ (0,1) and the closed
/// endpoint forms at α = 0 and α = 1.
///
/// # Panics
/// If α ∉ [0,1] or m < 2.
pub fn omega_dispersion(alpha: f64, m: usize) -> f64 {
    assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0,1]");
    assert!(m >= 2, "mode must be at least 2");
    if alpha == 0.0 {
        return (m as f64 - 1.0) / (2.0 * m as f64);
    }
    if alpha == 1.0 {
        return omega_sqg(m);
    }
    omega_dispersion_pochhammer(alpha, m)
}

/// Θ_α (1 − (1+α/2)_{m−1} / (2−α/2)_{m−1}).
pub fn omega_dispersion_pochhammer(alpha: f64, m: usize) -> f64 {
    let theta = theta_alpha(alpha).expect("alpha in (0,1)");
    let h = alpha / 2.0;
    theta * (1.0 - pochhammer_ratio(1.0 + h, 2.0 - h, m - 1))
}

/// Gamma form:
/// Γ(1−α)/(2^{1−α}Γ²(1−α/2)) · (Γ(1+α/2)/Γ(2−α/2) − Γ(m+α/2)/Γ(m+1−α/2)).
pub fn omega_dispersion_gamma(alpha: f64, m: usize) -> f64 {
    let h = alpha / 2.0;
    let m = m as f64;
    let g = gamma_unchecked(1.0 - h);
    let pre = gamma_unchecked(1.0 - alpha) / (2f64.powf(1.0 - alpha) * g * g);
    pre * (gamma_ratio(1.0 + h, 2.0 - h) - gamma_ratio(m + h, m + 1.0 - h))
}

/// Ω_m^1 = (2/π) Σ_{k=1}^{m−1} 1/(2k+1).
pub fn omega_sqg(m: usize) -> f64 {
    let s: f64 = (1..m).map(|k| 1.0 / (2 * k + 1) as f64).sum();
    2.0 / PI * s
}

/// c_α = Σ_{k≥1} α^{2k+1} ζ(2k+1) / (2^{2k} (2k+1)), truncated once a term drops below 1e-15.
///
/// Satisfies e^{αγ + c_α} = Γ(1−α/2)/Γ(1+α/2).
pub fn c_alpha_series(alpha: f64) -> f64 {
    let mut sum = 0.0;
    let mut k = 1;
    loop {
        let p = (2 * k + 1) as f64;
        let z = zeta(p).expect("odd integer > 1");
        let term = alpha.powf(p) * z / (4f64.powi(k) * p);
        sum += term;
        if term.abs() < 1e-15 || k > 200 {
            break;
        }
        k += 1;
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub alpha: f64,
    pub theta_alpha: f64,
    pub c_alpha: f64,
    pub euler_gamma: f64,
}

impl AsymptoticParams {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(Self {
            alpha,
            theta_alpha: theta_alpha(alpha)?,
            c_alpha: c_alpha_series(alpha),
            euler_gamma: EULER_GAMMA,
        })
    }

    /// Θ_α − (1−α/2) Θ_α e^{αγ + c_α} / n^{1−α}
    pub fn omega(&self, n: usize) -> f64 {
        let a = self.alpha;
        let th = self.theta_alpha;
        th - (1.0 - a / 2.0) * th * (a * self.euler_gamma + self.c_alpha).exp()
            / (n as f64).powf(1.0 - a)
    }
}

/// Large-mode approximation of Ω_n^α; the error against the exact value is O(n^{α−2}).
pub fn omega_asymptotic(alpha: f64, n: usize) -> Result<f64> {
    Ok(AsymptoticParams::new(alpha)?.omega(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionTable {
    pub alpha: f64,
    pub values: BTreeMap<usize, f64>,
}

impl DispersionTable {
    pub fn new(alpha: f64, m_max: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(VStateError::Domain(format!("alpha must lie in [0,1], got {alpha}")));
        }
        let values = (2..=m_max.max(2)).map(|m| (m, omega_dispersion(alpha, m))).collect();
        Ok(Self { alpha, values })
    }

    pub fn get(&self, m: usize) -> Option<f64> {
        self.values.get(&m).copied()
    }

    pub fn is_increasing(&self) -> bool {
        self.values.values().zip(self.values.values().skip(1)).all(|(a, b)| b > a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_reference_values() {
        let cases = [
            (0.5, 1.772_453_850_905_516),
            (-0.5, -3.544_907_701_811_032),
            (0.1, 9.513_507_698_668_73),
            (1.3, 0.897_470_696_306_277_2),
            (2.5, 1.329_340_388_179_137),
            (7.7, 2_769.830_362_327_314_6),
            (13.2, 795_120_469.074_829_9),
            (29.5, 1.634_812_519_827_426_7e30),
            (-3.3, 0.438_517_392_198_763_07),
            (-9.7, 2.157_532_490_123_547_4e-6),
            (-0.01, -100.587_197_964_410_78),
        ];
        for (x, g) in cases {
            let v = gamma_fn(x).unwrap();
            assert!(rel(v, g) < 1e-13, "Γ({x}) = {v}, want {g}, rel {}", rel(v, g));
        }
        assert_eq!(gamma_fn(5.0).unwrap(), 24.0);
    }

    #[test]
    fn gamma_poles() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(gamma_fn(x), Err(VStateError::GammaPole(_))));
        }
    }

    #[test]
    fn ln_gamma_matches_gamma() {
        for x in [0.3, 1.7, 10.5, 50.25, 120.0] {
            let a = ln_gamma(x).unwrap();
            let b = gamma_fn(x).unwrap().ln();
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn zeta_values() {
        assert!(rel(zeta(0.5).unwrap(), -1.460_354_508_809_586_8) < 1e-13);
        assert!(rel(zeta(0.25).unwrap(), -0.813_278_405_261_891_7) < 1e-13);
        assert!(rel(zeta(2.0).unwrap(), PI * PI / 6.0) < 1e-14);
        assert!(rel(zeta(3.0).unwrap(), 1.202_056_903_159_594_2) < 1e-14);
    }

    #[test]
    fn c_alpha_half() {
        assert!(rel(c_alpha_const(0.5).unwrap(), 2.092_099_240_106_203_5) < 1e-13);
        assert!((c_alpha_const(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(c_alpha_const(0.0).is_err());
    }

    #[test]
    fn series_constant() {
        assert!(rel(c_alpha_series(0.5), 0.012_944_955_402_342_103) < 1e-12);
        assert!(c_alpha_series(0.01) < 1e-6);
        for a in [0.1, 0.5, 0.9] {
            let lhs = a * EULER_GAMMA + c_alpha_series(a);
            let rhs = (gamma_fn(1.0 - a / 2.0).unwrap() / gamma_fn(1.0 + a / 2.0).unwrap()).ln();
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn dispersion_reference_values() {
        let cases = [
            (0.5, 2, 0.235_179_968_596_959_58),
            (0.5, 3, 0.342_079_954_322_850_3),
            (0.5, 4, 0.406_219_945_758_384_77),
            (0.5, 5, 0.450_105_203_056_382),
            (0.25, 2, 0.242_455_260_346_926_55),
            (0.9, 5, 0.493_434_861_166_007_6),
            (0.5, 1000, 0.796_736_672_341_724_4),
        ];
        for (a, m, w) in cases {
            assert!(rel(omega_dispersion(a, m), w) < 1e-13, "Ω({a},{m})");
        }
        assert!(rel(theta_alpha(0.5).unwrap(), 0.823_129_890_089_358_6) < 1e-13);
        assert_eq!(omega_dispersion(0.0, 2), 0.25);
        assert!((omega_dispersion(1.0, 2) - 2.0 / (3.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn digamma_limit_matches_sqg() {
        assert!((digamma_half_integer(0) + 1.963_510_026_021_423_5).abs() < 1e-14);
        for m in 2..12 {
            let v = -(digamma_half_integer(1) - digamma_half_integer(m)) / PI;
            assert!((v - omega_sqg(m)).abs() < 1e-14);
        }
    }

    #[test]
    fn pochhammer_basics() {
        assert_eq!(pochhammer(3.7, 0), 1.0);
        assert_eq!(pochhammer(2.0, 3), 24.0);
        let v = pochhammer(0.25, 5);
        let w = gamma_fn(5.25).unwrap() / gamma_fn(0.25).unwrap();
        assert!(rel(v, w) < 1e-13);
    }
}
