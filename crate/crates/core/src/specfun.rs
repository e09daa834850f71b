//! Gegenbauer polynomials, associated Legendre functions, spherical
//! harmonics (orthonormal, Condon–Shortley phase) and Gauss–Legendre rules.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::C64;

/// Value of a polynomial and its first derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyEval {
    pub value: f64,
    pub derivative: f64,
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(x.abs() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("argument {x} outside [-1, 1]")));
    }
    Ok(())
}

fn gegenbauer_value(alpha: f64, k: usize, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 2.0 * alpha * x);
    for j in 2..=k {
        let jf = j as f64;
        let next = (2.0 * x * (jf + alpha - 1.0) * cur - (jf + 2.0 * alpha - 2.0) * prev) / jf;
        prev = cur;
        cur = next;
    }
    cur
}

/// C^(α)_k(x) by upward three-term recurrence, with derivative
/// d/dx C^(α)_k = 2α C^(α+1)_{k−1}.
pub fn gegenbauer(alpha: f64, k: usize, x: f64) -> Result<PolyEval> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("Gegenbauer parameter must be > 0, got {alpha}")));
    }
    check_unit_interval(x)?;
    let derivative = if k == 0 { 0.0 } else { 2.0 * alpha * gegenbauer_value(alpha + 1.0, k - 1, x) };
    Ok(PolyEval { value: gegenbauer_value(alpha, k, x), derivative })
}

/// Monomial coefficients of C^(α)_k, lowest power first.
pub fn gegenbauer_coefficients(alpha: f64, k: usize) -> Result<Vec<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("Gegenbauer parameter must be > 0, got {alpha}")));
    }
    let mut prev = vec![1.0];
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = vec![0.0, 2.0 * alpha];
    for j in 2..=k {
        let jf = j as f64;
        let mut next = vec![0.0; j + 1];
        for (p, c) in cur.iter().enumerate() {
            next[p + 1] += 2.0 * (jf + alpha - 1.0) * c;
        }
        for (p, c) in prev.iter().enumerate() {
            next[p] -= (jf + 2.0 * alpha - 2.0) * c;
        }
        next.iter_mut().for_each(|c| *c /= jf);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Monomial coefficients of the m-th derivative of the Legendre polynomial
/// P_l, lowest power first.
pub fn legendre_derivative_coefficients(l: usize, m: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    let mut cur = vec![0.0, 1.0];
    let mut p = if l == 0 {
        prev.clone()
    } else {
        for n in 1..l {
            let nf = n as f64;
            let mut next = vec![0.0; n + 2];
            for (a, c) in cur.iter().enumerate() {
                next[a + 1] += (2.0 * nf + 1.0) * c;
            }
            for (a, c) in prev.iter().enumerate() {
                next[a] -= nf * c;
            }
            next.iter_mut().for_each(|c| *c /= nf + 1.0);
            prev = cur;
            cur = next;
        }
        cur
    };
    for _ in 0..m {
        if p.len() <= 1 {
            return vec![0.0];
        }
        p = p.iter().enumerate().skip(1).map(|(a, c)| a as f64 * c).collect();
    }
    p
}

/// Associated Legendre function P_l^m(x), m ≥ 0, with the Condon–Shortley
/// phase (−1)^m.
pub fn associated_legendre(l: usize, m: usize, x: f64) -> Result<f64> {
    if m > l {
        return Err(Error::Domain(format!("order {m} exceeds degree {l}")));
    }
    check_unit_interval(x)?;
    let x = x.clamp(-1.0, 1.0);
    let s = ((1.0 - x) * (1.0 + x)).sqrt();
    let mut pmm = 1.0;
    for j in 0..m {
        pmm *= -((2 * j + 1) as f64) * s;
    }
    if l == m {
        return Ok(pmm);
    }
    let mut prev = pmm;
    let mut cur = x * (2 * m + 1) as f64 * pmm;
    for n in (m + 2)..=l {
        let next = (x * (2 * n - 1) as f64 * cur - (n + m - 1) as f64 * prev) / (n - m) as f64;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Normalization K_lm = sqrt((2l+1)/(4π) · (l−m)!/(l+m)!), m ≥ 0.
pub fn harmonic_norm(l: usize, m: usize) -> f64 {
    let ratio: f64 = ((l - m + 1)..=(l + m)).map(|k| 1.0 / k as f64).product();
    ((2 * l + 1) as f64 / (4.0 * PI) * ratio).sqrt()
}

/// Orthonormal spherical harmonic Y_lm(θ, φ) with Condon–Shortley phase and
/// Y_{l,−m} = (−1)^m conj(Y_lm).
pub fn spherical_harmonic(l: usize, m_z: i64, theta: f64, phi: f64) -> Result<C64> {
    let m = m_z.unsigned_abs() as usize;
    if m > l {
        return Err(Error::Domain(format!("|m_z| = {m} exceeds l = {l}")));
    }
    let y = C64::from_polar(harmonic_norm(l, m) * associated_legendre(l, m, theta.cos())?, m as f64 * phi);
    Ok(if m_z >= 0 {
        y
    } else if m.is_multiple_of(2) {
        y.conj()
    } else {
        -y.conj()
    })
}

/// n-point Gauss–Legendre rule on [−1, 1]; nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::InvalidArgument("Gauss-Legendre rule needs at least one node".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Gauss–Legendre rule mapped to [a, b].
pub fn gauss_legendre_interval(a: f64, b: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, w) = gauss_legendre(n)?;
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    Ok((x.iter().map(|t| mid + half * t).collect(), w.iter().map(|v| v * half).collect()))
}
