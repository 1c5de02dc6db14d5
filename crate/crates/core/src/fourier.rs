//! Discrete Fourier helpers on uniform periodic grids.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Forward DFT, `X_k = Σ_j x_j e^{-2πi jk/M}` (no normalization).
pub fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse DFT, `x_j = Σ_k X_k e^{2πi jk/M}` (no normalization).
pub fn idft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
    buf
}

/// Normalized coefficients `V_n = (1/M) Σ_j v_j e^{-inθ_j}` for n = 0..M/2
/// where θ_j = 2π(j + shift)/M.
pub fn half_spectrum(values: &[f64], shift: f64) -> Vec<Complex64> {
    let m = values.len();
    let buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let spec = dft(&buf);
    let inv = 1.0 / m as f64;
    (0..=m / 2)
        .map(|n| {
            let phase = -2.0 * std::f64::consts::PI * n as f64 * shift / m as f64;
            spec[n] * inv * Complex64::from_polar(1.0, phase)
        })
        .collect()
}

/// Frequency of DFT bin k on an M-point grid, in (−M/2, M/2].
pub fn frequency(k: usize, m: usize) -> i64 {
    if k <= m / 2 {
        k as i64
    } else {
        k as i64 - m as i64
    }
}

/// Spectral derivative of periodic samples on a uniform grid over [0, 2π).
pub fn spectral_derivative(z: &[Complex64]) -> Vec<Complex64> {
    let m = z.len();
    let mut spec = dft(z);
    for (k, c) in spec.iter_mut().enumerate() {
        let f = frequency(k, m);
        *c = if m.is_multiple_of(2) && k == m / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            *c * Complex64::new(0.0, f as f64)
        };
    }
    let inv = 1.0 / m as f64;
    idft(&spec).into_iter().map(|c| c * inv).collect()
}

/// Trigonometric interpolation of periodic samples at arbitrary parameters θ ∈ ℝ.
pub struct TrigInterpolant {
    coeffs: Vec<(i64, Complex64)>,
}

impl TrigInterpolant {
    pub fn new(z: &[Complex64]) -> Self {
        let m = z.len();
        let spec = dft(z);
        let inv = 1.0 / m as f64;
        let mut coeffs = Vec::with_capacity(m + 1);
        for (k, c) in spec.iter().enumerate() {
            let f = frequency(k, m);
            if m.is_multiple_of(2) && k == m / 2 {
                coeffs.push((f, *c * inv * 0.5));
                coeffs.push((-f, *c * inv * 0.5));
            } else {
                coeffs.push((f, *c * inv));
            }
        }
        Self { coeffs }
    }

    pub fn eval(&self, theta: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    pub fn eval_deriv(&self, theta: f64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|&(k, c)| c * Complex64::new(0.0, k as f64) * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }
}
