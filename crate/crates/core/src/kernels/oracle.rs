//! Adaptive trigonometric quadrature of the circle integrals, independent of the
//! closed forms. Used by the `verify-integrals` command and the tests.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::integrate;

/// A point η of (0, 2π) kept as its distance x ∈ (0, π] to the nearer endpoint.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: f64,
    pub reflected: bool,
}

impl Node {
    pub fn eta(&self) -> f64 {
        if self.reflected {
            2.0 * PI - self.x
        } else {
            self.x
        }
    }

    /// sin(kη/2) for integer k, accurate near both endpoints.
    pub fn half_sin(&self, k: i64) -> f64 {
        let v = (k as f64 * self.x / 2.0).sin();
        if self.reflected && k % 2 == 0 {
            -v
        } else {
            v
        }
    }

    /// e^{ikη/2}.
    pub fn half_cis(&self, k: i64) -> Complex64 {
        Complex64::from_polar(1.0, k as f64 * self.eta() / 2.0)
    }
}

/// (1/2π)∫_0^{2π} f(η) dη for f with integrable |η|^{−β} singularities at 0 and 2π.
///
/// The two halves are folded onto (0, π) and x = π t^p, p = 1/(1−β) removes the endpoint singularity.
pub fn circle_mean<F: Fn(Node) -> Complex64>(f: F, beta: f64, tol: f64) -> Complex64 {
    let p = 1.0 / (1.0 - beta);
    let g = |t: f64| {
        let x = PI * t.powf(p);
        if x <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let jac = PI * p * t.powf(p - 1.0);
        (f(Node { x, reflected: false }) + f(Node { x, reflected: true })) * jac
    };
    integrate(g, 0.0, 1.0, 1e-15, tol, 20_000).value / (2.0 * PI)
}

#[allow(non_snake_case)]
pub fn moment_I(alpha: f64, n: usize) -> Complex64 {
    let k = 2 * (n as i64 + 1);
    circle_mean(|e| e.half_cis(k) / (2.0 * e.half_sin(1)).powf(alpha), alpha, 1e-12)
}

#[allow(non_snake_case)]
pub fn moment_J(alpha: f64, n: usize) -> Complex64 {
    let n = n as i64;
    circle_mean(
        |e| -4.0 * e.half_sin(n) * e.half_cis(n + 3) / (2f64.powf(alpha + 2.0) * e.half_sin(1).powf(alpha + 1.0)),
        alpha,
        1e-12,
    )
}

#[allow(non_snake_case)]
pub fn moment_Z(alpha: f64, n: usize) -> Complex64 {
    let n = n as i64;
    circle_mean(
        |e| -4.0 * e.half_sin(n) * e.half_cis(1 - n) / (2f64.powf(alpha + 2.0) * e.half_sin(1).powf(alpha + 1.0)),
        alpha,
        1e-12,
    )
}

pub fn sqg_1(n: usize) -> Complex64 {
    let n = n as i64;
    circle_mean(|e| Complex64::new(0.0, 1.0) * e.half_sin(n) * e.half_cis(n) / e.half_sin(1), 0.0, 1e-12)
}

pub fn sqg_2(n: usize) -> Complex64 {
    let n = n as i64;
    circle_mean(|e| Complex64::new(0.0, -1.0) * e.half_cis(n + 2) * e.half_sin(n) / e.half_sin(1), 0.0, 1e-12)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct OracleRow {
    pub family: &'static str,
    pub n: usize,
    pub closed_form: f64,
    pub quadrature: f64,
    pub quadrature_imag: f64,
    pub error: f64,
}

impl OracleRow {
    fn new(family: &'static str, n: usize, closed_form: f64, q: Complex64) -> Self {
        let diff = (q - closed_form).norm();
        let error = if closed_form.abs() > 1e-300 { diff / closed_form.abs() } else { diff };
        Self { family, n, closed_form, quadrature: q.re, quadrature_imag: q.im, error }
    }
}

/// Compares every closed-form moment with its quadrature for n = 0..=n_max.
/// Rows for α = 1 cover only the two SQG families (n ≥ 1).
pub fn moment_report(alpha: f64, n_max: usize) -> Vec<OracleRow> {
    use super::*;
    let mut rows = Vec::new();
    if alpha > 0.0 && alpha < 1.0 {
        for n in 0..=n_max {
            rows.push(OracleRow::new("I", n, singular_moment_I(alpha, n), moment_I(alpha, n)));
            rows.push(OracleRow::new("J", n, singular_moment_J(alpha, n), moment_J(alpha, n)));
            rows.push(OracleRow::new("Z", n, singular_moment_Z(alpha, n), moment_Z(alpha, n)));
        }
    }
    for n in 1..=n_max.max(1) {
        rows.push(OracleRow::new("sqg1", n, sqg_moment_1(n), sqg_1(n)));
        rows.push(OracleRow::new("sqg2", n, sqg_moment_2(n), sqg_2(n)));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_tight() {
        for row in moment_report(0.5, 6) {
            assert!(row.error < 1e-9, "{row:?}");
        }
    }
}
