//! Quantum particle on S³: eigenbasis, operators and the wavefunctions
//! obtained from the sigma group by polarization.
//!
//! Basis functions are stored as polynomials in the embedding coordinates
//! x = (Rρ, ε) (see [`Poly4`]), so the analytic backend applies invariant
//! fields exactly. The finite-difference backend differentiates along the
//! group flows instead and works on any [`WaveFunction`].

pub mod analysis;
pub mod contraction;

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use nalgebra::{Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::diff;
use crate::error::{Error, Result};
use crate::geometry::{quat_mul, ChartCoords, Side, SpaceConfig, CHART_RHO_MIN};
use crate::poly::Poly4;
use crate::quadrature::{HypersphericalNode, QuadGrid};
use crate::sigma_group::{left_fields, right_fields, FieldMatrix, SigmaGroupElement};
use crate::specfun::{gegenbauer, gegenbauer_coefficients, harmonic_norm, legendre_derivative_coefficients, spherical_harmonic};
use crate::C64;

/// Step of the finite-difference backend, relative to R for translations
/// and absolute (radians) for rotations.
pub const FD_REL_STEP: f64 = 1e-3;

/// Below this |ρ| the finite-difference Laplace–Beltrami operator switches
/// from the chart stencil to a translated chart centred on the point.
pub const LB_CHART_MIN_RHO: f64 = 0.5;

/// Largest level accepted by [`spectrum`].
pub const MAX_SPECTRUM_LEVEL: usize = 20;

pub(crate) const I: C64 = C64::new(0.0, 1.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Quantum numbers (n, l, m_z) with 0 ≤ l ≤ n and |m_z| ≤ l.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpectralLabel {
    pub n: usize,
    pub l: usize,
    pub m_z: i64,
}

impl SpectralLabel {
    pub fn new(n: i64, l: i64, m_z: i64) -> Result<Self> {
        if n < 0 || l < 0 || l > n || m_z.abs() > l {
            return Err(Error::InvalidLabel { n, l, m_z });
        }
        Ok(Self { n: n as usize, l: l as usize, m_z })
    }

    /// All labels of level n, ordered by l then m_z.
    pub fn level(n: usize) -> Vec<Self> {
        (0..=n)
            .flat_map(|l| (-(l as i64)..=l as i64).map(move |m_z| Self { n, l, m_z }))
            .collect()
    }

    pub fn all_up_to(n_max: usize) -> Vec<Self> {
        (0..=n_max).flat_map(Self::level).collect()
    }

    pub fn energy(&self, cfg: &SpaceConfig) -> f64 {
        energy(self.n, cfg)
    }
}

impl fmt::Display for SpectralLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.n, self.l, self.m_z)
    }
}

/// E_n = n(n+2) / (2 m R²).
pub fn energy(n: usize, cfg: &SpaceConfig) -> f64 {
    (n * (n + 2)) as f64 / (2.0 * cfg.mass * cfg.radius * cfg.radius)
}

/// (n+1)².
pub fn degeneracy(n: usize) -> usize {
    (n + 1) * (n + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumLevel {
    pub n: usize,
    pub energy: f64,
    pub degeneracy: usize,
}

pub fn spectrum(n_max: usize, cfg: &SpaceConfig) -> Result<Vec<SpectrumLevel>> {
    if n_max > MAX_SPECTRUM_LEVEL {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} exceeds {MAX_SPECTRUM_LEVEL}")));
    }
    Ok((0..=n_max).map(|n| SpectrumLevel { n, energy: energy(n, cfg), degeneracy: degeneracy(n) }).collect())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// The ratio 2^(2l+1) (l!)² (n−l)! (n+1) / ((n+l+1)! R³), which equals
/// ν·N² for the normalization constant N.
fn normalization_ratio(n: usize, l: usize, cfg: &SpaceConfig) -> f64 {
    2f64.powi(2 * l as i32 + 1) * factorial(l).powi(2) * factorial(n - l) * (n + 1) as f64
        / (factorial(n + l + 1) * cfg.radius.powi(3))
}

/// Closed-form N_nl, making ψ_nlm unit-normalized on the sphere of radius R.
pub fn normalization(n: usize, l: usize, cfg: &SpaceConfig) -> f64 {
    (normalization_ratio(n, l, cfg) / PI).sqrt()
}

/// r^l Y_lm as a polynomial in (x¹, x², x³).
fn solid_harmonic(l: usize, m_z: i64) -> Poly4 {
    let m = m_z.unsigned_abs() as usize;
    let r2 = (1..4).fold(Poly4::zero(), |acc, a| acc.add(&Poly4::var(a).pow(2)));
    let radial = legendre_derivative_coefficients(l, m)
        .iter()
        .enumerate()
        .filter(|(j, c)| **c != 0.0 && (l - m - j).is_multiple_of(2))
        .fold(Poly4::zero(), |acc, (j, c)| acc.add(&Poly4::var(3).pow(j).mul(&r2.pow((l - m - j) / 2)).scale(re(*c))));
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let planar = Poly4::var(1).add(&Poly4::var(2).scale(I)).pow(m);
    let s = planar.mul(&radial).scale(re(sign * harmonic_norm(l, m)));
    if m_z >= 0 {
        s
    } else {
        s.conj().scale(re(sign))
    }
}

/// ψ_nlm = N R^(−l) r^l Y_lm(ε) C^(l+1)_(n−l)(ρ) as an embedding polynomial.
pub fn psi(label: SpectralLabel, cfg: &SpaceConfig) -> Result<WaveFunction> {
    let SpectralLabel { n, l, m_z } = label;
    let radial = Poly4::compose_univariate(&gegenbauer_coefficients((l + 1) as f64, n - l)?, &Poly4::var(0).scale(re(1.0 / cfg.radius)));
    let p = solid_harmonic(l, m_z)
        .mul(&radial)
        .scale(re(normalization(n, l, cfg) * cfg.radius.powi(-(l as i32))));
    Ok(WaveFunction::from_poly(p, cfg.radius).with_label(label))
}

/// ψ_nlm evaluated directly in hyperspherical angles from the special
/// functions, independent of the polynomial form.
pub fn psi_direct(label: SpectralLabel, p: &crate::S3Point, cfg: &SpaceConfig) -> Result<C64> {
    let (chi, theta, phi) = p.hyperspherical();
    let c = gegenbauer((label.l + 1) as f64, label.n - label.l, chi.cos())?.value;
    let y = spherical_harmonic(label.l, label.m_z, theta, phi)?;
    Ok(y * normalization(label.n, label.l, cfg) * chi.sin().powi(label.l as i32) * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationRow {
    pub n: usize,
    pub l: usize,
    pub closed_form: f64,
    pub measured: f64,
    pub relative_diff: f64,
    /// The constant ν that the measured N implies; π for a correct formula.
    pub implied_nu: f64,
}

/// Measured normalization constants against the closed form.
pub fn normalization_table(n_max: usize, grid: &QuadGrid, cfg: &SpaceConfig) -> Result<Vec<NormalizationRow>> {
    let mut rows = Vec::new();
    for n in 0..=n_max {
        for l in 0..=n {
            let unnorm = SpectralLabel { n, l, m_z: 0 };
            let values = grid.sample(|node| {
                psi_direct(unnorm, &node.point(), cfg).map(|v| v / normalization(n, l, cfg)).unwrap_or(re(f64::NAN))
            });
            let sq: Vec<C64> = values.iter().map(|v| re(v.norm_sqr())).collect();
            let integral = grid.integrate_values(&sq)?.re;
            let measured = 1.0 / integral.sqrt();
            let closed_form = normalization(n, l, cfg);
            rows.push(NormalizationRow {
                n,
                l,
                closed_form,
                measured,
                relative_diff: (measured / closed_form - 1.0).abs(),
                implied_nu: normalization_ratio(n, l, cfg) / (measured * measured),
            });
        }
    }
    Ok(rows)
}

/// Function of a point of S³.
pub type Evaluator = Arc<dyn Fn(&crate::S3Point) -> C64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Poly(Arc<Poly4>),
    Func(Evaluator),
}

/// A complex function on the sphere, either polynomial in the embedding
/// coordinates or an arbitrary evaluator.
#[derive(Clone)]
pub struct WaveFunction {
    repr: Repr,
    radius: f64,
    label: Option<SpectralLabel>,
}

impl fmt::Debug for WaveFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Poly(p) => format!("poly({} terms)", p.term_count()),
            Repr::Func(_) => "func".to_string(),
        };
        f.debug_struct("WaveFunction").field("repr", &kind).field("radius", &self.radius).field("label", &self.label).finish()
    }
}

impl WaveFunction {
    pub fn from_poly(p: Poly4, radius: f64) -> Self {
        Self { repr: Repr::Poly(Arc::new(p)), radius, label: None }
    }

    pub fn from_fn<F>(radius: f64, f: F) -> Self
    where
        F: Fn(&crate::S3Point) -> C64 + Send + Sync + 'static,
    {
        Self { repr: Repr::Func(Arc::new(f)), radius, label: None }
    }

    /// Function given in chart coordinates (either hemisphere).
    pub fn from_chart_fn<F>(radius: f64, f: F) -> Self
    where
        F: Fn(&ChartCoords) -> C64 + Send + Sync + 'static,
    {
        Self::from_fn(radius, move |p| f(&p.chart(radius)))
    }

    pub fn with_label(mut self, label: SpectralLabel) -> Self {
        self.label = Some(label);
        self
    }

    pub fn label(&self) -> Option<SpectralLabel> {
        self.label
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn poly(&self) -> Option<&Poly4> {
        match &self.repr {
            Repr::Poly(p) => Some(p),
            Repr::Func(_) => None,
        }
    }

    fn require_poly(&self) -> Result<&Poly4> {
        self.poly().ok_or(Error::NoAnalyticForm)
    }

    pub fn eval(&self, p: &crate::S3Point) -> C64 {
        match &self.repr {
            Repr::Poly(poly) => poly.eval(&p.embedded(self.radius)),
            Repr::Func(f) => f(p),
        }
    }

    pub fn eval_chart(&self, c: &ChartCoords) -> C64 {
        self.eval(&c.point())
    }

    pub fn eval_node(&self, node: &HypersphericalNode) -> C64 {
        self.eval(&node.point())
    }

    /// Values on every grid node, in node order.
    pub fn sample(&self, grid: &QuadGrid) -> Vec<C64> {
        grid.sample(|node| self.eval_node(node))
    }

    pub fn scale(&self, c: C64) -> Self {
        match &self.repr {
            Repr::Poly(p) => Self::from_poly(p.scale(c), self.radius),
            Repr::Func(f) => {
                let f = f.clone();
                Self::from_fn(self.radius, move |p| f(p) * c)
            }
        }
    }

    /// a·self + b·other.
    pub fn combine(&self, a: C64, other: &Self, b: C64) -> Self {
        match (&self.repr, &other.repr) {
            (Repr::Poly(x), Repr::Poly(y)) => Self::from_poly(x.scale(a).add(&y.scale(b)), self.radius),
            _ => {
                let (x, y) = (self.clone(), other.clone());
                Self::from_fn(self.radius, move |p| x.eval(p) * a + y.eval(p) * b)
            }
        }
    }

    /// Pointwise product with an embedding polynomial.
    pub fn mul_poly(&self, q: &Poly4) -> Self {
        match &self.repr {
            Repr::Poly(p) => Self::from_poly(p.mul(q), self.radius),
            Repr::Func(f) => {
                let (f, q, r) = (f.clone(), q.clone(), self.radius);
                Self::from_fn(r, move |p| f(p) * q.eval(&p.embedded(r)))
            }
        }
    }
}

/// How derivatives are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Backend {
    /// Exact differentiation of the polynomial representation.
    #[default]
    Analytic,
    /// Fourth-order differences along group flows.
    FiniteDifference,
}

/// Which expression of Ĥ to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum HamiltonianForm {
    /// Ĥ = (m/2) Σ ν̂_i ν̂_i.
    #[default]
    ViaNu,
    /// Ĥ = −(1/2m) Δ with Δ in chart coordinates.
    LaplaceBeltrami,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Position {
    Eps(usize),
    Rho,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngularComponent {
    Axis(usize),
    Squared,
}

impl AngularComponent {
    pub const THIRD: AngularComponent = AngularComponent::Axis(2);
}

fn unit_quat(axis: usize, angle: f64) -> crate::S3Point {
    let mut q = [angle.cos(), 0.0, 0.0, 0.0];
    q[1 + axis] = angle.sin();
    crate::S3Point::from_components(q).expect("unit quaternion")
}

/// Embedding matrix M with Z_(i) f = Σ (M x)^a ∂_a f.
pub fn field_matrix(side: Side, i: usize, radius: f64) -> Matrix4<f64> {
    let mut gen = Vector4::zeros();
    gen[1 + i] = 1.0 / radius;
    let mut m = Matrix4::zeros();
    for b in 0..4 {
        let e = Vector4::ith(b, 1.0);
        let col = match side {
            Side::Right => quat_mul(&gen, &e),
            Side::Left => quat_mul(&e, &gen),
        };
        m.set_column(b, &col);
    }
    m
}

/// Matrix of the rotation field (R/2)(Z^R_(i) − Z^L_(i)).
pub fn rotation_matrix(i: usize, radius: f64) -> Matrix4<f64> {
    (field_matrix(Side::Right, i, radius) - field_matrix(Side::Left, i, radius)) * (radius / 2.0)
}

/// Flow of Z_(i) for parameter t: X ↦ exp(t ê_i/R) X (right-invariant
/// fields) or X exp(t ê_i/R) (left-invariant fields).
fn field_flow(side: Side, i: usize, t: f64, p: &crate::S3Point, radius: f64) -> crate::S3Point {
    let u = unit_quat(i, t / radius);
    match side {
        Side::Right => u.mul(p),
        Side::Left => p.mul(&u),
    }
}

/// Flow of the rotation field: conjugation by exp(s ê_i / 2).
fn rotation_flow(i: usize, s: f64, p: &crate::S3Point) -> crate::S3Point {
    unit_quat(i, s / 2.0).mul(p).mul(&unit_quat(i, -s / 2.0))
}

/// Z_(i) φ for an invariant field of either side.
pub fn apply_invariant_field(phi: &WaveFunction, side: Side, i: usize, backend: Backend) -> Result<WaveFunction> {
    let r = phi.radius;
    match backend {
        Backend::Analytic => Ok(WaveFunction::from_poly(phi.require_poly()?.along_linear_field(&field_matrix(side, i, r)), r)),
        Backend::FiniteDifference => {
            let f = phi.clone();
            Ok(WaveFunction::from_fn(r, move |p| diff::first_c(|t| f.eval(&field_flow(side, i, t, p, r)), FD_REL_STEP * r)))
        }
    }
}

/// Z^L_(i) φ, the generator of the right action.
pub fn left_action_operator(phi: &WaveFunction, i: usize, backend: Backend) -> Result<WaveFunction> {
    apply_invariant_field(phi, Side::Left, i, backend)
}

/// (R/2)(Z^R_(i) − Z^L_(i)) φ, the infinitesimal rotation about axis i.
pub fn apply_rotation_generator(phi: &WaveFunction, i: usize, backend: Backend) -> Result<WaveFunction> {
    let r = phi.radius;
    match backend {
        Backend::Analytic => Ok(WaveFunction::from_poly(phi.require_poly()?.along_linear_field(&rotation_matrix(i, r)), r)),
        Backend::FiniteDifference => {
            let f = phi.clone();
            Ok(WaveFunction::from_fn(r, move |p| diff::first_c(|s| f.eval(&rotation_flow(i, s, p)), FD_REL_STEP)))
        }
    }
}

/// (e_i × ε)·∇_ε φ computed in the chart of each point.
pub fn apply_chart_rotation(phi: &WaveFunction, i: usize, backend: Backend) -> Result<WaveFunction> {
    let r = phi.radius;
    let e = Vector3::ith(i, 1.0);
    match backend {
        Backend::Analytic => {
            // the x⁰ dependence drops out: (e_i × ε)·∇_ε ρ = 0
            let p = phi.require_poly()?;
            let mut out = Poly4::zero();
            for k in 0..3 {
                for j in 0..3 {
                    let coef = e.cross(&Vector3::ith(j, 1.0))[k];
                    if coef != 0.0 {
                        out = out.add(&p.derivative(1 + k).mul(&Poly4::var(1 + j)).scale(re(coef)));
                    }
                }
            }
            Ok(WaveFunction::from_poly(out, r))
        }
        Backend::FiniteDifference => {
            let f = phi.clone();
            // rotate ε within the chart, which keeps |ε| and hence ρ fixed
            let axis = nalgebra::Unit::new_unchecked(e);
            Ok(WaveFunction::from_fn(r, move |p| {
                let c = p.chart(r);
                diff::first_c(|t| f.eval_chart(&ChartCoords { eps: nalgebra::Rotation3::from_axis_angle(&axis, t) * c.eps, ..c }), FD_REL_STEP)
            }))
        }
    }
}

/// ν̂_i = −(i/m) Z^R_(i).
pub fn apply_nu(phi: &WaveFunction, i: usize, backend: Backend, cfg: &SpaceConfig) -> Result<WaveFunction> {
    Ok(apply_invariant_field(phi, Side::Right, i, backend)?.scale(-I / cfg.mass))
}

/// Multiplication by ε_i, or by ρ − 1 for [`Position::Rho`].
pub fn apply_position(phi: &WaveFunction, pos: Position) -> WaveFunction {
    let q = match pos {
        Position::Eps(i) => Poly4::var(1 + i),
        Position::Rho => Poly4::var(0).scale(re(1.0 / phi.radius)).sub(&Poly4::constant(re(1.0))),
    };
    phi.mul_poly(&q)
}

/// Ĵ_i = −i (R/2)(Z^R − Z^L), or Ĵ² = Σ Ĵ_i Ĵ_i.
pub fn apply_angular(phi: &WaveFunction, comp: AngularComponent, backend: Backend) -> Result<WaveFunction> {
    match (comp, backend) {
        (AngularComponent::Axis(i), _) => Ok(apply_rotation_generator(phi, i, backend)?.scale(-I)),
        (AngularComponent::Squared, Backend::Analytic) => {
            let mut acc = Poly4::zero();
            for i in 0..3 {
                let m = rotation_matrix(i, phi.radius);
                acc = acc.sub(&phi.require_poly()?.along_linear_field(&m).along_linear_field(&m));
            }
            Ok(WaveFunction::from_poly(acc, phi.radius))
        }
        (AngularComponent::Squared, Backend::FiniteDifference) => {
            let f = phi.clone();
            Ok(WaveFunction::from_fn(phi.radius, move |p| {
                -(0..3).map(|i| diff::second_c(|s| f.eval(&rotation_flow(i, s, p)), FD_REL_STEP)).sum::<C64>()
            }))
        }
    }
}

pub fn apply_hamiltonian(phi: &WaveFunction, form: HamiltonianForm, backend: Backend, cfg: &SpaceConfig) -> Result<WaveFunction> {
    let r = phi.radius;
    let k = -1.0 / (2.0 * cfg.mass);
    match (form, backend) {
        (HamiltonianForm::ViaNu, Backend::Analytic) => {
            let p = phi.require_poly()?;
            let mut acc = Poly4::zero();
            for i in 0..3 {
                let m = field_matrix(Side::Right, i, r);
                acc = acc.add(&p.along_linear_field(&m).along_linear_field(&m));
            }
            Ok(WaveFunction::from_poly(acc.scale(re(k)), r))
        }
        (HamiltonianForm::ViaNu, Backend::FiniteDifference) => {
            let f = phi.clone();
            Ok(WaveFunction::from_fn(r, move |p| {
                (0..3).map(|i| diff::second_c(|t| f.eval(&field_flow(Side::Right, i, t, p, r)), FD_REL_STEP * r)).sum::<C64>() * k
            }))
        }
        (HamiltonianForm::LaplaceBeltrami, Backend::Analytic) => {
            let lb = chart_laplacian_analytic(phi.require_poly()?, r);
            Ok(WaveFunction::from_fn(r, move |p| lb(p) * k))
        }
        (HamiltonianForm::LaplaceBeltrami, Backend::FiniteDifference) => {
            let f = phi.clone();
            Ok(WaveFunction::from_fn(r, move |p| chart_laplacian_fd(&f, p) * k))
        }
    }
}

/// Δf = ∇²f − (1/R²)(ε_k ε_l ∂_k ∂_l f + 3 ε·∇f) in chart coordinates,
/// with the chart partials of f(ε) = P(x⁰(ε), ε) from the chain rule
/// ∂x⁰/∂ε_k = −ε_k/x⁰. NaN on the chart equator.
fn chart_laplacian_analytic(p: &Poly4, radius: f64) -> impl Fn(&crate::S3Point) -> C64 + Send + Sync {
    let d1: Vec<Poly4> = (0..4).map(|a| p.derivative(a)).collect();
    let d2: Vec<Vec<Poly4>> = d1.iter().map(|d| (0..4).map(|b| d.derivative(b)).collect()).collect();
    move |pt| {
        let x = pt.embedded(radius);
        let x0 = x[0];
        if x0.abs() < CHART_RHO_MIN * radius {
            return re(f64::NAN);
        }
        let eps = Vector3::new(x[1], x[2], x[3]);
        let a = -eps / x0;
        let p1: Vec<C64> = d1.iter().map(|d| d.eval(&x)).collect();
        let p2: Vec<Vec<C64>> = d2.iter().map(|row| row.iter().map(|d| d.eval(&x)).collect()).collect();
        let grad: Vec<C64> = (0..3).map(|k| p1[1 + k] + p1[0] * a[k]).collect();
        let r2 = radius * radius;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..3 {
            acc -= grad[k] * (3.0 * eps[k] / r2);
            for l in 0..3 {
                let da = -(if k == l { 1.0 } else { 0.0 }) / x0 - eps[k] * eps[l] / x0.powi(3);
                let h = p2[1 + k][1 + l] + p2[1 + k][0] * a[l] + p2[0][1 + l] * a[k] + p2[0][0] * a[k] * a[l] + p1[0] * da;
                let ginv = if k == l { 1.0 } else { 0.0 } - eps[k] * eps[l] / r2;
                acc += h * ginv;
            }
        }
        acc
    }
}

/// Finite-difference Laplace–Beltrami: the chart stencil away from the
/// equator, else the flat Laplacian in a chart translated to the point
/// (translations are isometries and Δ is flat at the chart origin).
fn chart_laplacian_fd(f: &WaveFunction, pt: &crate::S3Point) -> C64 {
    let r = f.radius;
    let h = FD_REL_STEP * r;
    let c = pt.chart(r);
    if c.rho().abs() >= LB_CHART_MIN_RHO {
        let g = |d: Vector3<f64>| f.eval_chart(&c.shifted(&d));
        let e = |k: usize, t: f64| Vector3::ith(k, t);
        let grad: Vec<C64> = (0..3).map(|k| diff::first_c(|t| g(e(k, t)), h)).collect();
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..3 {
            acc -= grad[k] * (3.0 * c.eps[k] / (r * r));
            for l in 0..3 {
                let hkl = if k == l {
                    diff::second_c(|t| g(e(k, t)), h)
                } else {
                    diff::first_c(|s| diff::first_c(|t| g(e(k, s) + e(l, t)), h), h)
                };
                let ginv = if k == l { 1.0 } else { 0.0 } - c.eps[k] * c.eps[l] / (r * r);
                acc += hkl * ginv;
            }
        }
        acc
    } else {
        let g = |k: usize, t: f64| {
            let mut eps = Vector3::zeros();
            eps[k] = t;
            f.eval(&pt.mul(&ChartCoords::origin(r).shifted(&eps).point()))
        };
        (0..3).map(|k| diff::second_c(|t| g(k, t), h)).sum()
    }
}

/// Apply one of the named Hermitian operators of the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observable {
    Nu(usize),
    Eps(usize),
    Rho,
    J(usize),
    H,
}

impl Observable {
    pub const ALL: [Observable; 11] = [
        Observable::Nu(0),
        Observable::Nu(1),
        Observable::Nu(2),
        Observable::Eps(0),
        Observable::Eps(1),
        Observable::Eps(2),
        Observable::Rho,
        Observable::J(0),
        Observable::J(1),
        Observable::J(2),
        Observable::H,
    ];

    pub fn name(&self) -> String {
        match self {
            Observable::Nu(i) => format!("nu{}", i + 1),
            Observable::Eps(i) => format!("eps{}", i + 1),
            Observable::Rho => "rho".into(),
            Observable::J(i) => format!("J{}", i + 1),
            Observable::H => "H".into(),
        }
    }

    pub fn apply(&self, phi: &WaveFunction, backend: Backend, cfg: &SpaceConfig) -> Result<WaveFunction> {
        match *self {
            Observable::Nu(i) => apply_nu(phi, i, backend, cfg),
            Observable::Eps(i) => Ok(apply_position(phi, Position::Eps(i))),
            Observable::Rho => Ok(apply_position(phi, Position::Rho)),
            Observable::J(i) => apply_angular(phi, AngularComponent::Axis(i), backend),
            Observable::H => apply_hamiltonian(phi, HamiltonianForm::ViaNu, backend, cfg),
        }
    }
}

/// Ψ(g) = ζ exp(−i m (ε·ν + R(ρ − 1) z)) φ(ε): the wavefunction on the
/// sigma group annihilated by the polarization fields Z^L_ν and Z^L_z.
pub fn polarized_value(phi: &WaveFunction, g: &SigmaGroupElement, cfg: &SpaceConfig) -> C64 {
    g.zeta * polarization_phase(g, cfg) * phi.eval_chart(&g.chart(cfg))
}

fn polarization_phase(g: &SigmaGroupElement, cfg: &SpaceConfig) -> C64 {
    let rho = g.rho(cfg);
    C64::from_polar(1.0, -cfg.mass * (g.eps.dot(&g.nu) + cfg.radius * (rho - 1.0) * g.z))
}

/// Residuals of the polarization conditions and of the reduction of the
/// right fields on Ψ to ν̂, ε̂ and ρ̂ acting on φ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarizationCheck {
    /// max |Z^L_ν Ψ|.
    pub left_nu: f64,
    /// |Z^L_z Ψ|.
    pub left_z: f64,
    /// |Z^L_Ξ Ψ − iΨ|.
    pub left_xi: f64,
    /// max |Z^R_ε Ψ − ζ e^{…} Z^R φ|.
    pub right_eps: f64,
    /// max |Z^R_ν Ψ + i m ε Ψ|.
    pub right_nu: f64,
    /// |Z^R_z Ψ + i m R(ρ − 1) Ψ|.
    pub right_z: f64,
}

impl PolarizationCheck {
    pub fn max(&self) -> f64 {
        [self.left_nu, self.left_z, self.left_xi, self.right_eps, self.right_nu, self.right_z]
            .into_iter()
            .fold(0.0, crate::par::nan_max)
    }
}

fn field_derivative(phi: &WaveFunction, g: &SigmaGroupElement, fields: &FieldMatrix, col: usize, cfg: &SpaceConfig) -> C64 {
    let x = fields.column(col).into_owned();
    let h = diff::REL_STEP * cfg.radius.min(1.0);
    diff::first_c(
        |t| {
            let mut gt = *g;
            for k in 0..3 {
                gt.eps[k] += t * x[k];
                gt.nu[k] += t * x[3 + k];
            }
            gt.z += t * x[6];
            gt.zeta *= C64::from_polar(1.0, t * x[7]);
            polarized_value(phi, &gt, cfg)
        },
        h,
    )
}

/// Checks the polarized Ψ built from `phi` at the group element `g`.
pub fn polarization_check(phi: &WaveFunction, g: &SigmaGroupElement, cfg: &SpaceConfig) -> Result<PolarizationCheck> {
    let psi = polarized_value(phi, g, cfg);
    let lf = left_fields(g, cfg);
    let rf = right_fields(g, cfg);
    let d = |f: &FieldMatrix, k: usize| field_derivative(phi, g, f, k, cfg);
    let m = cfg.mass;
    let rho = g.rho(cfg);
    let point = g.chart(cfg).point();
    let mut check = PolarizationCheck {
        left_nu: 0.0,
        left_z: d(&lf, 6).norm(),
        left_xi: (d(&lf, 7) - I * psi).norm(),
        right_eps: 0.0,
        right_nu: 0.0,
        right_z: (d(&rf, 6) + I * m * cfg.radius * (rho - 1.0) * psi).norm(),
    };
    let pref = g.zeta * polarization_phase(g, cfg);
    for i in 0..3 {
        check.left_nu = check.left_nu.max(d(&lf, 3 + i).norm());
        check.right_nu = check.right_nu.max((d(&rf, 3 + i) + I * m * g.eps[i] * psi).norm());
        let zphi = apply_invariant_field(phi, Side::Right, i, Backend::FiniteDifference)?.eval(&point);
        check.right_eps = check.right_eps.max((d(&rf, i) - pref * zphi).norm());
    }
    Ok(check)
}

/// Writes `chi,theta,phi,weight,re,im` for every grid node.
pub fn write_wavefunction_csv<W: Write>(phi: &WaveFunction, grid: &QuadGrid, mut w: W) -> std::io::Result<()> {
    writeln!(w, "chi,theta,phi,weight,re,im")?;
    for (node, v) in grid.nodes.iter().zip(phi.sample(grid)) {
        writeln!(w, "{:e},{:e},{:e},{:e},{:e},{:e}", node.chi, node.theta, node.phi, node.weight, v.re, v.im)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
