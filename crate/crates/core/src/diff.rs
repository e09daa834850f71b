//! Fourth-order central finite differences.

/// Default relative step for first-derivative oracles (multiplied by `R`).
pub const REL_STEP: f64 = 1e-5;

/// Relative step for second derivatives and nested brackets, where a
/// 1e-5 step would amplify roundoff past the checked tolerances.
pub const REL_STEP_SECOND: f64 = 1e-3;

/// d/dt f(t) at t = 0, fourth order.
pub fn first<F: FnMut(f64) -> f64>(mut f: F, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// d²/dt² f(t) at t = 0, fourth order.
pub fn second<F: FnMut(f64) -> f64>(mut f: F, h: f64) -> f64 {
    (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h)
}

/// Generic-valued first derivative: `f` returns a vector of length `dim`.
pub fn first_vec<F: FnMut(f64) -> Vec<f64>>(mut f: F, h: f64) -> Vec<f64> {
    let m2 = f(-2.0 * h);
    let m1 = f(-h);
    let p1 = f(h);
    let p2 = f(2.0 * h);
    (0..m2.len())
        .map(|k| (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h))
        .collect()
}

/// Complex first derivative.
pub fn first_c<F: FnMut(f64) -> crate::C64>(mut f: F, h: f64) -> crate::C64 {
    (f(-2.0 * h) - f(-h) * 8.0 + f(h) * 8.0 - f(2.0 * h)) / (12.0 * h)
}

/// Complex second derivative.
pub fn second_c<F: FnMut(f64) -> crate::C64>(mut f: F, h: f64) -> crate::C64 {
    (-f(-2.0 * h) + f(-h) * 16.0 - f(0.0) * 30.0 + f(h) * 16.0 - f(2.0 * h)) / (12.0 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_derivative_of_sin() {
        let d = first(|t| (0.3 + t).sin(), 1e-3);
        assert!((d - 0.3f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn second_derivative_of_exp() {
        let d = second(|t| (0.5 + t).exp(), 1e-3);
        assert!((d - 0.5f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn quartic_is_exact() {
        // stencil is exact for polynomials up to degree 4
        let d = first(|t| (1.0 + t).powi(4), 0.1);
        assert!((d - 4.0).abs() < 1e-12);
    }
}
