//! Large-radius contraction: curved ν̂ and Ĥ against their flat
//! counterparts −(i/m)∂ and −(1/2m)∇² on compactly supported functions.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::diff;
use crate::error::{Error, Result};
use crate::par;
use crate::{ChartCoords, C64};

/// Evaluation points per axis of the box [−r₀, r₀]³ (points outside the
/// ball |ε| ≤ r₀ are dropped).
pub const EVAL_POINTS_PER_AXIS: usize = 9;

/// Chart finite-difference step, relative to r₀.
pub const CONTRACTION_REL_STEP: f64 = 1e-3;

/// exp(1 − 1/(1 − s²)) e^{i k·ε} with s = |ε − c|/w, zero for s ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    pub center: Vector3<f64>,
    pub width: f64,
    pub wave: Vector3<f64>,
}

impl BumpFunction {
    pub fn value(&self, eps: &Vector3<f64>) -> C64 {
        let s2 = (eps - self.center).norm_squared() / (self.width * self.width);
        if s2 >= 1.0 {
            return C64::new(0.0, 0.0);
        }
        C64::from_polar((1.0 - 1.0 / (1.0 - s2)).exp(), self.wave.dot(eps))
    }

    /// Radius of the smallest origin-centred ball holding the support.
    pub fn support_radius(&self) -> f64 {
        self.center.norm() + self.width
    }
}

/// Two bumps inside |ε| ≤ r₀, one off-centre and modulated.
pub fn default_test_functions(r0: f64) -> Vec<BumpFunction> {
    vec![
        BumpFunction { center: Vector3::zeros(), width: r0, wave: Vector3::zeros() },
        BumpFunction {
            center: Vector3::new(0.3, -0.2, 0.1) * r0,
            width: 0.5 * r0,
            wave: Vector3::new(1.0, 2.0, -1.5) / r0,
        },
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractionReport {
    pub r0: f64,
    pub mass: f64,
    pub radii: Vec<f64>,
    pub points: usize,
    pub test_functions: usize,
    /// max |ν̂_i φ + (i/m)∂_i φ| per radius.
    pub nu_deviation: Vec<f64>,
    /// max |Ĥφ + (1/2m)∇²φ| per radius.
    pub h_deviation: Vec<f64>,
    /// max |ε̂_i φ − ε_i φ| per radius.
    pub eps_deviation: Vec<f64>,
    pub nu_slope: f64,
    pub h_slope: f64,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

impl ContractionReport {
    pub fn nu_decreasing(&self) -> bool {
        strictly_decreasing(&self.nu_deviation)
    }

    pub fn h_decreasing(&self) -> bool {
        strictly_decreasing(&self.h_deviation)
    }

    /// Both deviations strictly decrease, both slopes are at most
    /// −1 + `slope_tol`, and the position deviation vanishes.
    pub fn passes(&self, slope_tol: f64) -> bool {
        self.nu_decreasing()
            && self.h_decreasing()
            && self.nu_slope <= -1.0 + slope_tol
            && self.h_slope <= -1.0 + slope_tol
            && self.eps_deviation.iter().all(|d| *d == 0.0)
    }
}

/// Least-squares slope of ln y against ln x.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

struct Jet {
    eps: Vector3<f64>,
    value: C64,
    grad: [C64; 3],
    hess: [[C64; 3]; 3],
}

fn jet(f: &BumpFunction, eps: Vector3<f64>, h: f64) -> Jet {
    let g = |d: Vector3<f64>| f.value(&(eps + d));
    let e = |k: usize, t: f64| Vector3::ith(k, t);
    let grad = std::array::from_fn(|k| diff::first_c(|t| g(e(k, t)), h));
    let mut hess = [[C64::new(0.0, 0.0); 3]; 3];
    for k in 0..3 {
        hess[k][k] = diff::second_c(|t| g(e(k, t)), h);
        for l in (k + 1)..3 {
            let v = diff::first_c(|s| diff::first_c(|t| g(e(k, s) + e(l, t)), h), h);
            hess[k][l] = v;
            hess[l][k] = v;
        }
    }
    Jet { eps, value: f.value(&eps), grad, hess }
}

/// Deviations of the curved operators from the flat ones at one radius.
fn deviations(j: &Jet, radius: f64, mass: f64) -> (f64, f64, f64) {
    let eps = j.eps;
    let rho = (1.0 - eps.norm_squared() / (radius * radius)).sqrt();
    let i = C64::new(0.0, 1.0);
    // Z^R_(i)^k = ρ δ_ik + (1/R)(e_i × ε)_k
    let z = Matrix3::identity() * rho - crate::geometry::cross_matrix(&eps) / radius;
    let mut d_nu: f64 = 0.0;
    for a in 0..3 {
        let curved: C64 = (0..3).map(|k| j.grad[k] * z[(k, a)]).sum::<C64>() * (-i / mass);
        let flat = j.grad[a] * (-i / mass);
        d_nu = d_nu.max((curved - flat).norm());
    }
    let r2 = radius * radius;
    let mut lap_curved = C64::new(0.0, 0.0);
    let mut lap_flat = C64::new(0.0, 0.0);
    for k in 0..3 {
        lap_curved -= j.grad[k] * (3.0 * eps[k] / r2);
        lap_flat += j.hess[k][k];
        for l in 0..3 {
            let ginv = if k == l { 1.0 } else { 0.0 } - eps[k] * eps[l] / r2;
            lap_curved += j.hess[k][l] * ginv;
        }
    }
    let d_h = ((lap_curved - lap_flat) * (-1.0 / (2.0 * mass))).norm();
    // ε̂ multiplies by the chart coordinate of the point on the radius-R sphere
    let on_sphere = ChartCoords::north(eps, radius).map_or(Vector3::repeat(f64::NAN), |c| c.eps);
    let d_eps = (0..3).map(|k| (j.value * on_sphere[k] - j.value * eps[k]).norm()).fold(0.0, f64::max);
    (d_nu, d_h, d_eps)
}

/// Runs the contraction study over `radii` (ascending) for functions
/// supported in |ε| ≤ r₀.
pub fn contraction_study(radii: &[f64], tests: &[BumpFunction], r0: f64, mass: f64) -> Result<ContractionReport> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::InvalidArgument(format!("r0 must be > 0, got {r0}")));
    }
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be > 0, got {mass}")));
    }
    if radii.len() < 2 || tests.is_empty() {
        return Err(Error::InvalidArgument("need at least two radii and one test function".into()));
    }
    if !radii.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly ascending".into()));
    }
    if !(radii[0] > 2.0 * r0) {
        return Err(Error::InvalidArgument(format!("smallest radius {} does not exceed 2 r0 = {}", radii[0], 2.0 * r0)));
    }
    for t in tests {
        if !(t.width > 0.0) || t.support_radius() > r0 {
            return Err(Error::InvalidArgument(format!(
                "test function support reaches |eps| = {} beyond r0 = {r0}",
                t.support_radius()
            )));
        }
    }
    let k = EVAL_POINTS_PER_AXIS;
    let step = 2.0 * r0 / (k - 1) as f64;
    let points: Vec<Vector3<f64>> = (0..k * k * k)
        .map(|n| Vector3::new((n % k) as f64, ((n / k) % k) as f64, (n / (k * k)) as f64) * step - Vector3::repeat(r0))
        .filter(|p| p.norm() <= r0)
        .collect();
    let h = CONTRACTION_REL_STEP * r0;
    let jets: Vec<Jet> = tests.iter().flat_map(|t| par::map_slice(&points, |p| jet(t, *p, h))).collect();
    let mut report = ContractionReport {
        r0,
        mass,
        radii: radii.to_vec(),
        points: points.len(),
        test_functions: tests.len(),
        nu_deviation: Vec::new(),
        h_deviation: Vec::new(),
        eps_deviation: Vec::new(),
        nu_slope: f64::NAN,
        h_slope: f64::NAN,
    };
    for &r in radii {
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        for j in &jets {
            let (x, y, z) = deviations(j, r, mass);
            a = par::nan_max(a, x);
            b = par::nan_max(b, y);
            c = par::nan_max(c, z);
        }
        report.nu_deviation.push(a);
        report.h_deviation.push(b);
        report.eps_deviation.push(c);
    }
    report.nu_slope = log_log_slope(radii, &report.nu_deviation);
    report.h_slope = log_log_slope(radii, &report.h_deviation);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slopes_of_leading_corrections() {
        let r0 = 0.5;
        let radii = [10.0 * r0, 100.0 * r0, 1000.0 * r0];
        let r = contraction_study(&radii, &default_test_functions(r0), r0, 1.0).unwrap();
        assert!(r.nu_decreasing() && r.h_decreasing(), "{r:?}");
        assert!((r.nu_slope + 1.0).abs() < 0.05, "{r:?}");
        assert!((r.h_slope + 2.0).abs() < 0.05, "{r:?}");
        assert!(r.passes(0.3));
        assert!(r.eps_deviation.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn support_outside_ball_rejected() {
        let bad = BumpFunction { center: Vector3::new(0.8, 0.0, 0.0), width: 0.5, wave: Vector3::zeros() };
        assert!(contraction_study(&[10.0, 100.0], &[bad], 1.0, 1.0).is_err());
        assert!(contraction_study(&[1.5, 100.0], &default_test_functions(1.0), 1.0, 1.0).is_err());
        assert!(contraction_study(&[100.0, 10.0], &default_test_functions(1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn bump_is_compact() {
        let b = default_test_functions(1.0)[1];
        assert_eq!(b.value(&Vector3::new(2.0, 0.0, 0.0)), C64::new(0.0, 0.0));
        assert!((b.value(&b.center).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn slope_fit_exact_on_power_law() {
        let x = [1.0, 10.0, 100.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-1.5)).collect();
        assert!((log_log_slope(&x, &y) + 1.5).abs() < 1e-12);
    }
}
