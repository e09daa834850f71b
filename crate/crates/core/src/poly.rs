//! Complex polynomials in the four embedding coordinates
//! x = (x⁰, x¹, x², x³) = (Rρ, ε¹, ε², ε³).
//!
//! The eigenbasis is polynomial in x, and the invariant vector fields of S³
//! are linear in x, so every operator of the quantum suite maps such
//! polynomials to polynomials without rounding beyond coefficient
//! arithmetic.

use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector4};

use crate::C64;

type Exponents = [u8; 4];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly4 {
    terms: BTreeMap<Exponents, C64>,
}

impl Poly4 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: C64) -> Self {
        let mut p = Self::zero();
        p.add_term([0; 4], c);
        p
    }

    /// The coordinate x^a.
    pub fn var(a: usize) -> Self {
        let mut e = [0; 4];
        e[a] = 1;
        let mut p = Self::zero();
        p.add_term(e, C64::new(1.0, 0.0));
        p
    }

    fn add_term(&mut self, e: Exponents, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(e).or_insert(C64::new(0.0, 0.0));
        *entry += c;
        if *entry == C64::new(0.0, 0.0) {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|e| e.iter().map(|&k| k as usize).sum()).max().unwrap_or(0)
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            out.add_term(*e, v * c);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(*e, *v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ea, va) in &self.terms {
            for (eb, vb) in &other.terms {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                out.add_term(e, va * vb);
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::constant(C64::new(1.0, 0.0)), |acc, _| acc.mul(self))
    }

    /// ∂/∂x^a.
    pub fn derivative(&self, a: usize) -> Self {
        let mut out = Self::zero();
        for (e, v) in &self.terms {
            if e[a] > 0 {
                let mut d = *e;
                d[a] -= 1;
                out.add_term(d, v * e[a] as f64);
            }
        }
        out
    }

    /// Derivative along the linear field V(x) = M x: Σ_ab M_ab x^b ∂_a P.
    pub fn along_linear_field(&self, m: &Matrix4<f64>) -> Self {
        let mut out = Self::zero();
        for a in 0..4 {
            let d = self.derivative(a);
            if d.is_zero() {
                continue;
            }
            for b in 0..4 {
                if m[(a, b)] != 0.0 {
                    out = out.add(&d.mul(&Self::var(b)).scale(C64::new(m[(a, b)], 0.0)));
                }
            }
        }
        out
    }

    /// Composition with a polynomial in one variable: Σ c_k s^k.
    pub fn compose_univariate(coeffs: &[f64], s: &Self) -> Self {
        let mut out = Self::zero();
        for c in coeffs.iter().rev() {
            out = out.mul(s).add(&Self::constant(C64::new(*c, 0.0)));
        }
        out
    }

    pub fn eval(&self, x: &Vector4<f64>) -> C64 {
        let deg = self.terms.keys().flat_map(|e| e.iter().copied()).max().unwrap_or(0) as usize;
        let mut powers = [[1.0f64; 32]; 4];
        for (a, row) in powers.iter_mut().enumerate() {
            for k in 1..=deg.min(31) {
                row[k] = row[k - 1] * x[a];
            }
        }
        let mut acc = C64::new(0.0, 0.0);
        for (e, v) in &self.terms {
            let mono = powers[0][e[0] as usize] * powers[1][e[1] as usize] * powers[2][e[2] as usize] * powers[3][e[3] as usize];
            acc += v * mono;
        }
        acc
    }

    /// Complex conjugate; the variables are real.
    pub fn conj(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, v)| (*e, v.conj())).collect() }
    }

    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
