//! Geometry of S³ viewed as the SU(2) group manifold.
//!
//! Points are stored chart-free as unit quaternions ([`S3Point`]). The local
//! chart used by all coordinate formulas is ε = R·q⃗ with ρ = q₀ recovered as
//! `±sqrt(1 - |ε|²/R²)`; the sign selects the hemisphere ([`ChartCoords`]).
//!
//! Matrix layouts used throughout:
//!
//! * `canonical_one_form(c, side)[(i, j)]` is θ^(i)_j, the j-th component of
//!   the i-th invariant 1-form.
//! * `dual_field(c, side)[(k, i)]` is Z^k_(i), the k-th component of the i-th
//!   invariant vector field (fields are columns).
//!
//! With these layouts `θ · Z = I` on each side.

use nalgebra::{Matrix3, Quaternion, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::diff;
use crate::error::{Error, Result};

/// Points with |ρ| below this are treated as lying on the chart equator.
pub const CHART_RHO_MIN: f64 = 1e-10;

/// Slack allowed on |ε| ≤ R before a domain error is raised.
pub const CHART_RADIUS_SLACK: f64 = 1e-12;

/// Physical context: sphere radius and particle mass (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub radius: f64,
    pub mass: f64,
}

impl SpaceConfig {
    pub fn new(radius: f64, mass: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!("radius must be finite and > 0, got {radius}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Domain(format!("mass must be finite and > 0, got {mass}")));
        }
        Ok(Self { radius, mass })
    }
}

impl Default for SpaceConfig {
    fn default() -> Self {
        Self { radius: 1.0, mass: 1.0 }
    }
}

/// Which family of invariant objects: `Right` fields generate left
/// translations, `Left` fields generate right translations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Sign multiplying the η (cross-product) term of the invariant fields.
    fn eta_sign(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hemisphere {
    North,
    South,
}

impl Hemisphere {
    pub fn sign(self) -> f64 {
        match self {
            Hemisphere::North => 1.0,
            Hemisphere::South => -1.0,
        }
    }

    pub fn of(rho: f64) -> Self {
        if rho.is_sign_negative() {
            Hemisphere::South
        } else {
            Hemisphere::North
        }
    }
}

/// Levi-Civita symbol η_{ijk} with η_{123} = +1 (zero-based indices).
pub fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Matrix of `v ↦ a × v`.
pub fn cross_matrix(a: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -a.z, a.y, a.z, 0.0, -a.x, -a.y, a.x, 0.0)
}

/// Hamilton product of 4-vectors stored as `(w, x, y, z)`.
pub fn quat_mul(a: &Vector4<f64>, b: &Vector4<f64>) -> Vector4<f64> {
    let av = Vector3::new(a[1], a[2], a[3]);
    let bv = Vector3::new(b[1], b[2], b[3]);
    let v = bv * a[0] + av * b[0] + av.cross(&bv);
    Vector4::new(a[0] * b[0] - av.dot(&bv), v.x, v.y, v.z)
}

/// Quaternion conjugate of a `(w, x, y, z)` 4-vector.
pub fn quat_conj(a: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(a[0], -a[1], -a[2], -a[3])
}

/// A point of S³ as a unit quaternion `(q0, q1, q2, q3)`; the embedded point
/// is `(R q0, R q⃗)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S3Point {
    q: [f64; 4],
}

impl S3Point {
    pub const IDENTITY: S3Point = S3Point { q: [1.0, 0.0, 0.0, 0.0] };

    /// Normalizes `q`; fails on a zero or non-finite input.
    pub fn from_components(q: [f64; 4]) -> Result<Self> {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Domain(format!("cannot normalize quaternion {q:?}")));
        }
        Ok(Self { q: [q[0] / n, q[1] / n, q[2] / n, q[3] / n] })
    }

    pub fn from_quaternion(q: &Quaternion<f64>) -> Result<Self> {
        Self::from_components([q.w, q.i, q.j, q.k])
    }

    /// Point from an embedded 4-vector `(x0, x⃗)` with `|x| ≈ R`.
    pub fn from_embedded(x: &Vector4<f64>) -> Result<Self> {
        Self::from_components([x[0], x[1], x[2], x[3]])
    }

    pub fn from_chart(c: &ChartCoords) -> Self {
        let rho = c.rho();
        let r = c.radius;
        // exact unit norm up to rounding; renormalize anyway
        Self::from_components([rho, c.eps.x / r, c.eps.y / r, c.eps.z / r])
            .expect("chart point has unit norm")
    }

    /// Hyperspherical angles: ε = R sinχ (sinθ cosφ, sinθ sinφ, cosθ), ρ = cos χ.
    pub fn from_hyperspherical(chi: f64, theta: f64, phi: f64) -> Self {
        let (sc, cc) = chi.sin_cos();
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::from_components([cc, sc * st * cp, sc * st * sp, sc * ct]).expect("unit by construction")
    }

    pub fn components(&self) -> [f64; 4] {
        self.q
    }

    pub fn quaternion(&self) -> Quaternion<f64> {
        Quaternion::new(self.q[0], self.q[1], self.q[2], self.q[3])
    }

    pub fn embedded(&self, radius: f64) -> Vector4<f64> {
        Vector4::new(self.q[0], self.q[1], self.q[2], self.q[3]) * radius
    }

    pub fn chart(&self, radius: f64) -> ChartCoords {
        ChartCoords {
            eps: Vector3::new(self.q[1], self.q[2], self.q[3]) * radius,
            hemisphere: Hemisphere::of(self.q[0]),
            radius,
        }
    }

    /// Returns `(chi, theta, phi)` with chi, theta in [0, π] and phi in [0, 2π).
    pub fn hyperspherical(&self) -> (f64, f64, f64) {
        let [q0, q1, q2, q3] = self.q;
        let s = (q1 * q1 + q2 * q2 + q3 * q3).sqrt();
        let chi = s.atan2(q0);
        let theta = (q1 * q1 + q2 * q2).sqrt().atan2(q3);
        let mut phi = q2.atan2(q1);
        if phi < 0.0 {
            phi += std::f64::consts::TAU;
        }
        (chi, theta, phi)
    }

    /// Quaternion product `self · other` (group multiplication in SU(2)).
    pub fn mul(&self, other: &S3Point) -> S3Point {
        let p = self.quaternion() * other.quaternion();
        S3Point::from_quaternion(&p).expect("product of unit quaternions")
    }

    pub fn conj(&self) -> S3Point {
        S3Point { q: [self.q[0], -self.q[1], -self.q[2], -self.q[3]] }
    }

    pub fn distance(&self, other: &S3Point) -> f64 {
        self.q.iter().zip(other.q.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Chart coordinates ε ∈ ℝ³ (|ε| ≤ R) plus the hemisphere of ρ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartCoords {
    pub eps: Vector3<f64>,
    pub hemisphere: Hemisphere,
    pub radius: f64,
}

impl ChartCoords {
    pub fn new(eps: Vector3<f64>, hemisphere: Hemisphere, radius: f64) -> Result<Self> {
        let c = Self { eps, hemisphere, radius };
        c.check()?;
        Ok(c)
    }

    pub fn north(eps: Vector3<f64>, radius: f64) -> Result<Self> {
        Self::new(eps, Hemisphere::North, radius)
    }

    pub fn origin(radius: f64) -> Self {
        Self { eps: Vector3::zeros(), hemisphere: Hemisphere::North, radius }
    }

    fn check(&self) -> Result<()> {
        let n = self.eps.norm();
        if !n.is_finite() || n > self.radius * (1.0 + CHART_RADIUS_SLACK) {
            return Err(Error::Domain(format!(
                "|eps| = {n} exceeds the sphere radius {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// Same hemisphere, displaced coordinates; unchecked.
    pub fn shifted(&self, delta: &Vector3<f64>) -> ChartCoords {
        ChartCoords { eps: self.eps + delta, ..*self }
    }

    /// ρ = ±sqrt(1 − |ε|²/R²), clamped at the equator.
    pub fn rho(&self) -> f64 {
        let s = 1.0 - self.eps.norm_squared() / (self.radius * self.radius);
        self.hemisphere.sign() * s.max(0.0).sqrt()
    }

    /// ρ, failing when |ρ| < [`CHART_RHO_MIN`].
    pub fn interior_rho(&self) -> Result<f64> {
        self.check()?;
        let rho = self.rho();
        if rho.abs() < CHART_RHO_MIN {
            return Err(Error::ChartSingularity { rho });
        }
        Ok(rho)
    }

    pub fn point(&self) -> S3Point {
        S3Point::from_chart(self)
    }
}

/// ρ of a chart point; domain error if |ε| > R.
pub fn rho(c: &ChartCoords) -> Result<f64> {
    c.check()?;
    Ok(c.rho())
}

/// g_ij = δ_ij + ε_i ε_j / (R² ρ²).
pub fn metric(c: &ChartCoords) -> Result<Matrix3<f64>> {
    let rho = c.interior_rho()?;
    let r2 = c.radius * c.radius;
    Ok(Matrix3::identity() + c.eps * c.eps.transpose() / (r2 * rho * rho))
}

/// g^ij = δ^ij − ε^i ε^j / R².
pub fn metric_inverse(c: &ChartCoords) -> Matrix3<f64> {
    Matrix3::identity() - c.eps * c.eps.transpose() / (c.radius * c.radius)
}

/// Canonical invariant 1-forms θ^(i)_j, the exact duals of
/// [`dual_field`] on the same side.
pub fn canonical_one_form(c: &ChartCoords, side: Side) -> Result<Matrix3<f64>> {
    let rho = c.interior_rho()?;
    let r = c.radius;
    let s = side.eta_sign();
    Ok(Matrix3::identity() * rho
        + c.eps * c.eps.transpose() / (r * r * rho)
        + cross_matrix(&c.eps) * (s / r))
}

/// Invariant vector fields, column i = Z_(i):
/// Z^R_(i) = ρ e_i + (1/R) e_i × ε, Z^L_(i) = ρ e_i − (1/R) e_i × ε.
pub fn dual_field(c: &ChartCoords, side: Side) -> Matrix3<f64> {
    let s = side.eta_sign();
    Matrix3::identity() * c.rho() - cross_matrix(&c.eps) * (s / c.radius)
}

/// Christoffel symbols Γ^j_{kl} of the chart metric by central differences
/// of g (the geodesic-equation oracle). Indexed `[j][k][l]`.
pub fn christoffel_numeric(c: &ChartCoords, h: f64) -> Result<[[[f64; 3]; 3]; 3]> {
    check_stencil(c, h)?;
    let ginv = metric_inverse(c);
    let mut dg = [Matrix3::zeros(); 3];
    for (a, dga) in dg.iter_mut().enumerate() {
        let e = Vector3::ith(a, 1.0);
        let mut out = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out[(i, j)] = diff::first(|t| metric(&c.shifted(&(e * t))).map(|g| g[(i, j)]).unwrap_or(f64::NAN), h);
            }
        }
        *dga = out;
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for (j, gj) in gamma.iter_mut().enumerate() {
        for (k, gjk) in gj.iter_mut().enumerate() {
            for (l, v) in gjk.iter_mut().enumerate() {
                *v = (0..3)
                    .map(|s| 0.5 * ginv[(j, s)] * (dg[k][(s, l)] + dg[l][(s, k)] - dg[s][(k, l)]))
                    .sum();
            }
        }
    }
    Ok(gamma)
}

/// Fails if a ±2h stencil around `c` could leave the chart interior.
pub fn check_stencil(c: &ChartCoords, h: f64) -> Result<()> {
    c.check()?;
    let reach = c.eps.norm() + 2.0 * h * 3f64.sqrt();
    let r = c.radius;
    if reach >= r || (1.0 - (reach / r).powi(2)).sqrt() < CHART_RHO_MIN.max(1e-6) {
        return Err(Error::Stencil { eps: [c.eps.x, c.eps.y, c.eps.z], step: h });
    }
    Ok(())
}

/// Jacobian `J[(a, b)] = ∂X^a/∂ε^b` of a chart vector field.
pub fn field_jacobian<F>(c: &ChartCoords, field: &F, h: f64) -> Matrix3<f64>
where
    F: Fn(&ChartCoords) -> Vector3<f64> + ?Sized,
{
    let mut jac = Matrix3::zeros();
    for b in 0..3 {
        let e = Vector3::ith(b, 1.0);
        let col = diff::first_vec(
            |t| {
                let v = field(&c.shifted(&(e * t)));
                vec![v.x, v.y, v.z]
            },
            h,
        );
        for a in 0..3 {
            jac[(a, b)] = col[a];
        }
    }
    jac
}

/// Lie bracket [X, Y]^a = X^b ∂_b Y^a − Y^b ∂_b X^a by central differences.
pub fn lie_bracket<F, G>(c: &ChartCoords, x: &F, y: &G, h: f64) -> Result<Vector3<f64>>
where
    F: Fn(&ChartCoords) -> Vector3<f64> + ?Sized,
    G: Fn(&ChartCoords) -> Vector3<f64> + ?Sized,
{
    check_stencil(c, h)?;
    let jx = field_jacobian(c, x, h);
    let jy = field_jacobian(c, y, h);
    Ok(jy * x(c) - jx * y(c))
}

/// The i-th invariant field on `side` as a closure over chart points.
pub fn invariant_field(side: Side, i: usize) -> impl Fn(&ChartCoords) -> Vector3<f64> + Sync + Send {
    move |c: &ChartCoords| dual_field(c, side).column(i).into_owned()
}

/// Max-norm of the Lie derivative L_X g_ij by central differences.
pub fn killing_residual<F>(c: &ChartCoords, field: &F, h: f64) -> Result<f64>
where
    F: Fn(&ChartCoords) -> Vector3<f64> + ?Sized,
{
    check_stencil(c, h)?;
    let g = metric(c)?;
    let x = field(c);
    let jx = field_jacobian(c, field, h);
    let mut lie = jx.transpose() * g + g * jx;
    for k in 0..3 {
        let e = Vector3::ith(k, 1.0);
        let mut dgk = Matrix3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                dgk[(i, j)] =
                    diff::first(|t| metric(&c.shifted(&(e * t))).map(|g| g[(i, j)]).unwrap_or(f64::NAN), h);
            }
        }
        lie += dgk * x[k];
    }
    Ok(lie.amax())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rho_examples() {
        let r = 2.0;
        assert_eq!(rho(&ChartCoords::origin(r)).unwrap(), 1.0);
        let eq = ChartCoords::north(Vector3::new(r, 0.0, 0.0), r).unwrap();
        assert_eq!(rho(&eq).unwrap(), 0.0);
        let half = ChartCoords::north(Vector3::new(r / 2.0, 0.0, 0.0), r).unwrap();
        assert!(close(rho(&half).unwrap(), 3f64.sqrt() / 2.0, 1e-15));
    }

    #[test]
    fn outside_ball_is_domain_error() {
        let c = ChartCoords { eps: Vector3::new(1.1, 0.0, 0.0), hemisphere: Hemisphere::North, radius: 1.0 };
        assert!(matches!(rho(&c), Err(Error::Domain(_))));
    }

    #[test]
    fn metric_at_origin_and_equator() {
        assert_eq!(metric(&ChartCoords::origin(1.0)).unwrap(), Matrix3::identity());
        let eq = ChartCoords::north(Vector3::new(1.0, 0.0, 0.0), 1.0).unwrap();
        assert!(matches!(metric(&eq), Err(Error::ChartSingularity { .. })));
        assert_eq!(metric_inverse(&eq), Matrix3::from_diagonal(&Vector3::new(0.0, 1.0, 1.0)));
    }

    #[test]
    fn determinant_is_inverse_rho_squared() {
        let mut s = Sampler::new(1);
        for _ in 0..100 {
            let c = s.chart_point(1.3, 0.95);
            let rho = c.rho();
            let det = metric(&c).unwrap().determinant();
            assert!((det - 1.0 / (rho * rho)).abs() < 1e-10 * det);
        }
    }

    #[test]
    fn metric_times_inverse_is_identity() {
        let mut s = Sampler::new(2);
        for _ in 0..100 {
            let c = s.chart_point(0.7, 0.95);
            let p = metric(&c).unwrap() * metric_inverse(&c);
            assert!((p - Matrix3::identity()).amax() < 1e-12);
        }
    }

    #[test]
    fn one_forms_and_fields_are_dual_on_both_sides() {
        let mut s = Sampler::new(3);
        for _ in 0..200 {
            let c = s.chart_point(1.0, 0.97);
            for side in [Side::Left, Side::Right] {
                let prod = canonical_one_form(&c, side).unwrap() * dual_field(&c, side);
                assert!((prod - Matrix3::identity()).amax() < 1e-12, "{side:?} {prod}");
            }
        }
    }

    #[test]
    fn chiral_metric_reconstruction() {
        let mut s = Sampler::new(4);
        let r = 1.7;
        let killing = Matrix3::identity() * (-8.0 / (r * r));
        for _ in 0..100 {
            let c = s.chart_point(r, 0.95);
            let g = metric(&c).unwrap();
            for side in [Side::Left, Side::Right] {
                let th = canonical_one_form(&c, side).unwrap();
                let rec = th.transpose() * killing * th * (-(r * r) / 8.0);
                assert!((rec - g).amax() < 1e-12 * g.amax());
            }
        }
    }

    #[test]
    fn origin_values_are_identity() {
        let c = ChartCoords::origin(3.0);
        for side in [Side::Left, Side::Right] {
            assert_eq!(canonical_one_form(&c, side).unwrap(), Matrix3::identity());
            assert_eq!(dual_field(&c, side), Matrix3::identity());
        }
    }

    #[test]
    fn structure_constants_of_invariant_fields() {
        let mut s = Sampler::new(5);
        let r = 1.0;
        let h = diff::REL_STEP * r;
        for _ in 0..20 {
            let c = s.chart_point(r, 0.8);
            for i in 0..3 {
                for j in 0..3 {
                    let br = lie_bracket(&c, &invariant_field(Side::Right, i), &invariant_field(Side::Right, j), h)
                        .unwrap();
                    let bl = lie_bracket(&c, &invariant_field(Side::Left, i), &invariant_field(Side::Left, j), h)
                        .unwrap();
                    let mix = lie_bracket(&c, &invariant_field(Side::Left, i), &invariant_field(Side::Right, j), h)
                        .unwrap();
                    let mut er = Vector3::zeros();
                    let mut el = Vector3::zeros();
                    for k in 0..3 {
                        let eta = levi_civita(i, j, k);
                        er += dual_field(&c, Side::Right).column(k) * (-2.0 / r * eta);
                        el += dual_field(&c, Side::Left).column(k) * (2.0 / r * eta);
                    }
                    assert!((br - er).amax() < 1e-8);
                    assert!((bl - el).amax() < 1e-8);
                    assert!(mix.amax() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn invariant_fields_are_killing() {
        let mut s = Sampler::new(6);
        let h = diff::REL_STEP;
        for _ in 0..20 {
            let c = s.chart_point(1.0, 0.8);
            for side in [Side::Left, Side::Right] {
                for i in 0..3 {
                    let r = killing_residual(&c, &invariant_field(side, i), h).unwrap();
                    assert!(r < 1e-7, "{side:?} {i} {r}");
                }
            }
        }
    }

    #[test]
    fn constant_field_is_not_killing() {
        let c = ChartCoords::north(Vector3::new(0.3, -0.2, 0.1), 1.0).unwrap();
        let r = killing_residual(&c, &|_: &ChartCoords| Vector3::new(1.0, 0.0, 0.0), diff::REL_STEP).unwrap();
        assert!(r > 1e-3);
    }

    #[test]
    fn stencil_near_equator_is_rejected() {
        let c = ChartCoords::north(Vector3::new(1.0 - 1e-6, 0.0, 0.0), 1.0).unwrap();
        let r = killing_residual(&c, &invariant_field(Side::Right, 0), diff::REL_STEP);
        assert!(matches!(r, Err(Error::Stencil { .. })));
    }

    #[test]
    fn chart_round_trip_both_hemispheres() {
        let mut s = Sampler::new(7);
        for _ in 0..1000 {
            let p = s.point();
            let c = p.chart(2.5);
            let back = S3Point::from_chart(&c);
            assert!(back.distance(&p) < 1e-12);
            let c2 = back.chart(2.5);
            assert!((c2.eps - c.eps).amax() < 1e-12 && c2.hemisphere == c.hemisphere);
        }
    }

    #[test]
    fn hyperspherical_round_trip() {
        let mut s = Sampler::new(8);
        for _ in 0..200 {
            let p = s.point();
            let (chi, th, ph) = p.hyperspherical();
            assert!(S3Point::from_hyperspherical(chi, th, ph).distance(&p) < 1e-12);
        }
    }

    #[test]
    fn levi_civita_is_antisymmetric() {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_eq!(levi_civita(i, j, k), -levi_civita(j, i, k));
                    assert_eq!(levi_civita(i, j, k), levi_civita(j, k, i));
                }
            }
        }
        let a = Vector3::new(0.3, -1.2, 2.0);
        let b = Vector3::new(-0.7, 0.4, 1.1);
        assert!((cross_matrix(&a) * b - a.cross(&b)).amax() < 1e-15);
    }
}
