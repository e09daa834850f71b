//! Tensor-product quadrature on S³ against the Haar measure
//! dμ = R³ sin²χ sinθ dχ dθ dφ.
//!
//! χ uses Gauss–Legendre nodes with sin²χ folded into the weights, θ uses
//! Gauss–Legendre nodes in cos θ and φ is sampled uniformly, which is exact
//! for trigonometric polynomials of degree below `n_phi`. The Gauss–Legendre
//! χ rule is spectrally accurate but not exact for polynomials in cos χ;
//! [`ChiRule::GaussJacobi`] (nodes χ_j = jπ/(n+1)) is exact for
//! sin²χ·p(cos χ) with deg p ≤ 2n_chi − 1.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{S3Point, SpaceConfig};
use crate::par;
use crate::specfun::{gauss_legendre, gauss_legendre_interval};
use crate::C64;

/// Default grid orders (n_chi, n_theta, n_phi).
pub const DEFAULT_ORDERS: (usize, usize, usize) = (24, 16, 32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypersphericalNode {
    pub chi: f64,
    pub theta: f64,
    pub phi: f64,
    /// Full measure factor, R³ sin²χ sinθ included.
    pub weight: f64,
}

impl HypersphericalNode {
    pub fn point(&self) -> S3Point {
        S3Point::from_hyperspherical(self.chi, self.theta, self.phi)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadGrid {
    pub nodes: Vec<HypersphericalNode>,
    pub orders: (usize, usize, usize),
    pub radius: f64,
}

/// Rule used along χ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum ChiRule {
    /// Gauss–Legendre in χ on [0, π].
    #[default]
    GaussLegendre,
    /// Gauss–Jacobi in cos χ with weight (1 − x²)^(1/2).
    GaussJacobi,
}

fn chi_rule(rule: ChiRule, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok(match rule {
        ChiRule::GaussLegendre => gauss_legendre_interval(0.0, PI, n)?,
        ChiRule::GaussJacobi => {
            // weights are divided by sin²χ here so both rules share the
            // folding below
            let h = PI / (n + 1) as f64;
            ((1..=n).map(|j| h * j as f64).collect(), vec![h; n])
        }
    })
}

/// Builds the product grid; orders must be at least (2, 2, 4).
pub fn build_grid(n_chi: usize, n_theta: usize, n_phi: usize, cfg: &SpaceConfig) -> Result<QuadGrid> {
    build_grid_with(ChiRule::default(), n_chi, n_theta, n_phi, cfg)
}

pub fn build_grid_with(rule: ChiRule, n_chi: usize, n_theta: usize, n_phi: usize, cfg: &SpaceConfig) -> Result<QuadGrid> {
    if n_chi < 2 || n_theta < 2 || n_phi < 4 {
        return Err(Error::InvalidGrid { n_chi, n_theta, n_phi });
    }
    let (chi, w_chi) = chi_rule(rule, n_chi)?;
    let (ct, w_t) = gauss_legendre(n_theta)?;
    let r3 = cfg.radius.powi(3);
    let w_phi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_chi * n_theta * n_phi);
    for (c, wc) in chi.iter().zip(&w_chi) {
        let s = c.sin();
        for (x, wt) in ct.iter().zip(&w_t) {
            for k in 0..n_phi {
                nodes.push(HypersphericalNode {
                    chi: *c,
                    theta: x.acos(),
                    phi: w_phi * k as f64,
                    weight: r3 * wc * s * s * wt * w_phi,
                });
            }
        }
    }
    Ok(QuadGrid { nodes, orders: (n_chi, n_theta, n_phi), radius: cfg.radius })
}

impl QuadGrid {
    pub fn default_for(cfg: &SpaceConfig) -> Result<Self> {
        let (a, b, c) = DEFAULT_ORDERS;
        build_grid(a, b, c, cfg)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        let mut acc = Neumaier::default();
        self.nodes.iter().for_each(|n| acc.add(n.weight));
        acc.total()
    }

    /// Evaluates `f` on every node (in node order).
    pub fn sample<F>(&self, f: F) -> Vec<C64>
    where
        F: Fn(&HypersphericalNode) -> C64 + Sync + Send,
    {
        par::map_slice(&self.nodes, f)
    }

    /// Σ f(node)·weight over precomputed node values.
    pub fn integrate_values(&self, values: &[C64]) -> Result<C64> {
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        for (index, (v, n)) in values.iter().zip(&self.nodes).enumerate() {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { index, chi: n.chi, theta: n.theta, phi: n.phi });
            }
            re.add(v.re * n.weight);
            im.add(v.im * n.weight);
        }
        Ok(C64::new(re.total(), im.total()))
    }

    /// ⟨a, b⟩ = Σ conj(a)·b·weight over node values.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        let (mut re, mut im) = (Neumaier::default(), Neumaier::default());
        for ((a, b), n) in a.iter().zip(b).zip(&self.nodes) {
            let v = a.conj() * b * n.weight;
            re.add(v.re);
            im.add(v.im);
        }
        C64::new(re.total(), im.total())
    }

    pub fn norm(&self, a: &[C64]) -> f64 {
        self.inner(a, a).re.max(0.0).sqrt()
    }

    /// Writes `chi,theta,phi,weight` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "chi,theta,phi,weight")?;
        for n in &self.nodes {
            writeln!(w, "{:e},{:e},{:e},{:e}", n.chi, n.theta, n.phi, n.weight)?;
        }
        Ok(())
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Σ f(node)·weight; fails naming the first node where f is not finite.
pub fn integrate<F>(f: F, grid: &QuadGrid) -> Result<C64>
where
    F: Fn(&HypersphericalNode) -> C64 + Sync + Send,
{
    grid.integrate_values(&grid.sample(f))
}

/// Volume 2π²R³ of the sphere of radius R.
pub fn volume(cfg: &SpaceConfig) -> f64 {
    2.0 * PI * PI * cfg.radius.powi(3)
}
