//! The SU(2)-sigma group: S³ extended by the velocity-like parameters
//! (ν, z) and centrally by U(1), with its invariant vector fields,
//! quantization 1-form Θ and Noether invariants.
//!
//! Coordinates on the group are ordered (ε¹, ε², ε³, ν¹, ν², ν³, z, φ) with
//! ζ = e^{iφ}. The (z, ν) pair composes like a quaternion w = (z, ν) under
//! left multiplication by q = (ρ, ε/R): w″ = w′ + q′ w.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3, Vector4};
use serde::Serialize;

use crate::diff;
use crate::error::{Error, Result};
use crate::geometry::{canonical_one_form, dual_field, levi_civita, quat_conj, quat_mul, ChartCoords, Hemisphere, Side, SpaceConfig};
use crate::par;
use crate::sampling::Sampler;
use crate::C64;

pub type Vector8 = SVector<f64, 8>;
/// Invariant fields as columns, ordered (ε¹..³, ν¹..³, z, Ξ).
pub type FieldMatrix = SMatrix<f64, 8, 8>;

/// Tolerance on |ζ| − 1 accepted by [`SigmaGroupElement::new`].
pub const PHASE_MODULUS_TOL: f64 = 1e-12;

const GENERATOR_NAMES: [&str; 8] = ["eps1", "eps2", "eps3", "nu1", "nu2", "nu3", "z", "Xi"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaGroupElement {
    pub eps: Vector3<f64>,
    pub hemisphere: Hemisphere,
    pub nu: Vector3<f64>,
    pub z: f64,
    pub zeta: C64,
}

/// A tangent vector in the coordinate basis (ε, ν, z, φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupTangent {
    pub components: Vector8,
}

impl GroupTangent {
    pub fn new(components: Vector8) -> Result<Self> {
        if !components.iter().all(|c| c.is_finite()) {
            return Err(Error::Domain("non-finite tangent component".into()));
        }
        Ok(Self { components })
    }
}

impl SigmaGroupElement {
    pub fn identity() -> Self {
        Self { eps: Vector3::zeros(), hemisphere: Hemisphere::North, nu: Vector3::zeros(), z: 0.0, zeta: C64::new(1.0, 0.0) }
    }

    pub fn new(eps: Vector3<f64>, hemisphere: Hemisphere, nu: Vector3<f64>, z: f64, zeta: C64, cfg: &SpaceConfig) -> Result<Self> {
        ChartCoords::new(eps, hemisphere, cfg.radius)?;
        if !(nu.iter().all(|v| v.is_finite()) && z.is_finite()) {
            return Err(Error::Domain("non-finite group parameters".into()));
        }
        if !((zeta.norm() - 1.0).abs() <= PHASE_MODULUS_TOL) {
            return Err(Error::Domain(format!("|zeta| = {} is not 1", zeta.norm())));
        }
        Ok(Self { eps, hemisphere, nu, z, zeta })
    }

    /// Pure translation along z, the characteristic direction.
    pub fn z_translation(dz: f64) -> Self {
        Self { z: dz, ..Self::identity() }
    }

    pub fn chart(&self, cfg: &SpaceConfig) -> ChartCoords {
        ChartCoords { eps: self.eps, hemisphere: self.hemisphere, radius: cfg.radius }
    }

    pub fn rho(&self, cfg: &SpaceConfig) -> f64 {
        self.chart(cfg).rho()
    }

    fn quaternion(&self, cfg: &SpaceConfig) -> Vector4<f64> {
        let r = cfg.radius;
        Vector4::new(self.rho(cfg), self.eps.x / r, self.eps.y / r, self.eps.z / r)
    }

    fn w(&self) -> Vector4<f64> {
        Vector4::new(self.z, self.nu.x, self.nu.y, self.nu.z)
    }

    fn from_parts(q: &Vector4<f64>, w: &Vector4<f64>, zeta: C64, cfg: &SpaceConfig) -> Self {
        let q = q / q.norm();
        let r = cfg.radius;
        Self {
            eps: Vector3::new(q[1], q[2], q[3]) * r,
            hemisphere: Hemisphere::of(q[0]),
            nu: Vector3::new(w[1], w[2], w[3]),
            z: w[0],
            zeta: zeta / zeta.norm(),
        }
    }

    /// Max componentwise distance; infinite across hemispheres.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.hemisphere != other.hemisphere && self.eps.norm() > 0.0 {
            return f64::INFINITY;
        }
        (self.eps - other.eps)
            .amax()
            .max((self.nu - other.nu).amax())
            .max((self.z - other.z).abs())
            .max((self.zeta - other.zeta).norm())
    }

    /// Shifts coordinate `k` of (ε, ν, z, φ) by `t`, keeping the hemisphere.
    pub fn shifted(&self, k: usize, t: f64) -> Self {
        let mut g = *self;
        match k {
            0..=2 => g.eps[k] += t,
            3..=5 => g.nu[k - 3] += t,
            6 => g.z += t,
            _ => g.zeta *= C64::from_polar(1.0, t),
        }
        g
    }
}

/// The cocycle ξ(g′, g) = −m(R(ρ′ − 1)z − ε′·ν) in ζ″ = ζ′ζ e^{iξ}.
fn cocycle(gp: &SigmaGroupElement, g: &SigmaGroupElement, cfg: &SpaceConfig) -> f64 {
    -cfg.mass * (cfg.radius * (gp.rho(cfg) - 1.0) * g.z - gp.eps.dot(&g.nu))
}

/// Group law g″ = g′ ∗ g.
pub fn compose(gp: &SigmaGroupElement, g: &SigmaGroupElement, cfg: &SpaceConfig) -> SigmaGroupElement {
    let qp = gp.quaternion(cfg);
    let q = quat_mul(&qp, &g.quaternion(cfg));
    let w = gp.w() + quat_mul(&qp, &g.w());
    let zeta = gp.zeta * g.zeta * C64::from_polar(1.0, cocycle(gp, g, cfg));
    SigmaGroupElement::from_parts(&q, &w, zeta, cfg)
}

/// Inverse: ε ↦ −ε with the same ρ, w ↦ −q̄w and the phase fixed by the
/// cocycle.
pub fn inverse(g: &SigmaGroupElement, cfg: &SpaceConfig) -> SigmaGroupElement {
    let qbar = quat_conj(&g.quaternion(cfg));
    let w = -quat_mul(&qbar, &g.w());
    let mut inv = SigmaGroupElement::from_parts(&qbar, &w, g.zeta.conj(), cfg);
    inv.hemisphere = g.hemisphere;
    inv.zeta *= C64::from_polar(1.0, -cocycle(&inv, g, cfg));
    inv
}

/// Left-invariant fields (generators of right translations).
pub fn left_fields(g: &SigmaGroupElement, cfg: &SpaceConfig) -> FieldMatrix {
    let c = g.chart(cfg);
    let (r, m, rho) = (cfg.radius, cfg.mass, c.rho());
    let zl = dual_field(&c, Side::Left);
    let mut f = FieldMatrix::zeros();
    for i in 0..3 {
        for k in 0..3 {
            f[(k, i)] = zl[(k, i)];
            f[(3 + k, 3 + i)] = zl[(k, i)];
        }
        f[(6, 3 + i)] = -g.eps[i] / r;
        f[(7, 3 + i)] = m * g.eps[i];
        f[(3 + i, 6)] = g.eps[i] / r;
    }
    f[(6, 6)] = rho;
    f[(7, 6)] = -m * r * (rho - 1.0);
    f[(7, 7)] = 1.0;
    f
}

/// Right-invariant fields (generators of left translations).
pub fn right_fields(g: &SigmaGroupElement, cfg: &SpaceConfig) -> FieldMatrix {
    let c = g.chart(cfg);
    let (r, m) = (cfg.radius, cfg.mass);
    let zr = dual_field(&c, Side::Right);
    let mut f = FieldMatrix::identity();
    for i in 0..3 {
        let e = Vector3::ith(i, 1.0);
        let nu_part = (e.cross(&g.nu) + e * g.z) / r;
        for k in 0..3 {
            f[(k, i)] = zr[(k, i)];
            f[(3 + k, i)] = nu_part[k];
        }
        f[(6, i)] = -g.nu[i] / r;
        f[(7, i)] = m * g.nu[i];
    }
    f
}

fn coordinate_step(k: usize, cfg: &SpaceConfig) -> f64 {
    if k < 3 {
        diff::REL_STEP * cfg.radius
    } else {
        diff::REL_STEP
    }
}

/// Tangent at t = 0 of a curve through `base`, in coordinates.
fn curve_tangent<F: Fn(f64) -> SigmaGroupElement>(base: &SigmaGroupElement, curve: F, h: f64) -> Vector8 {
    let d = diff::first_vec(
        |t| {
            let g = curve(t);
            let mut v = vec![0.0; 8];
            for k in 0..3 {
                v[k] = g.eps[k] - base.eps[k];
                v[3 + k] = g.nu[k] - base.nu[k];
            }
            v[6] = g.z - base.z;
            v[7] = (g.zeta * base.zeta.conj()).arg();
            v
        },
        h,
    );
    Vector8::from_column_slice(&d)
}

/// Fields obtained by differentiating the group law at the identity:
/// left fields from g ∗ δ, right fields from δ ∗ g.
pub fn numerical_fields(g: &SigmaGroupElement, side: Side, cfg: &SpaceConfig) -> FieldMatrix {
    let e = SigmaGroupElement::identity();
    let mut f = FieldMatrix::zeros();
    for a in 0..8 {
        let h = coordinate_step(a, cfg);
        let col = curve_tangent(
            g,
            |t| {
                let d = e.shifted(a, t);
                match side {
                    Side::Left => compose(g, &d, cfg),
                    Side::Right => compose(&d, g, cfg),
                }
            },
            h,
        );
        f.set_column(a, &col);
    }
    f
}

fn fields_on(side: Side) -> fn(&SigmaGroupElement, &SpaceConfig) -> FieldMatrix {
    match side {
        Side::Left => left_fields,
        Side::Right => right_fields,
    }
}

/// d/dy_k of every field component, by central differences.
fn field_derivatives(g: &SigmaGroupElement, side: Side, cfg: &SpaceConfig) -> [FieldMatrix; 8] {
    let fields = fields_on(side);
    let mut out = [FieldMatrix::zeros(); 8];
    // fields do not depend on φ; slot 7 stays zero
    for (k, dk) in out.iter_mut().enumerate().take(7) {
        let h = coordinate_step(k, cfg);
        let flat = diff::first_vec(|t| fields(&g.shifted(k, t), cfg).as_slice().to_vec(), h);
        *dk = FieldMatrix::from_column_slice(&flat);
    }
    out
}

/// Lie bracket [X_a, Y_b] of field `a` on `side_x` with field `b` on
/// `side_y`: [X, Y]^c = X^k ∂_k Y^c − Y^k ∂_k X^c.
pub fn field_bracket(g: &SigmaGroupElement, side_x: Side, a: usize, side_y: Side, b: usize, cfg: &SpaceConfig) -> Result<Vector8> {
    crate::geometry::check_stencil(&g.chart(cfg), coordinate_step(0, cfg))?;
    let dx = field_derivatives(g, side_x, cfg);
    let dy = if side_x == side_y { dx } else { field_derivatives(g, side_y, cfg) };
    let x = fields_on(side_x)(g, cfg).column(a).into_owned();
    let y = fields_on(side_y)(g, cfg).column(b).into_owned();
    let mut out = Vector8::zeros();
    for k in 0..8 {
        out += dy[k].column(b) * x[k] - dx[k].column(a) * y[k];
    }
    Ok(out)
}

/// Structure constants f_ab^c with [Z^R_a, Z^R_b] = f_ab^c Z^R_c of the
/// right-invariant algebra.
pub fn right_structure_constants(cfg: &SpaceConfig) -> [[Vector8; 8]; 8] {
    let (r, m) = (cfg.radius, cfg.mass);
    let mut f = [[Vector8::zeros(); 8]; 8];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let e = levi_civita(i, j, k);
                f[i][j][k] = -2.0 / r * e;
                f[i][3 + j][3 + k] = -e / r;
            }
            if i == j {
                f[i][3 + j][6] = 1.0 / r;
                f[i][3 + j][7] = -m;
            }
        }
        f[i][6][3 + i] = -1.0 / r;
    }
    for a in 0..8 {
        for b in 0..a {
            f[a][b] = -f[b][a];
        }
    }
    f
}

/// Θ = −m ε·dν − mR(ρ − 1) dz + dφ as a covector.
pub fn quantization_form(g: &SigmaGroupElement, cfg: &SpaceConfig) -> Vector8 {
    let (r, m) = (cfg.radius, cfg.mass);
    let mut th = Vector8::zeros();
    for i in 0..3 {
        th[3 + i] = -m * g.eps[i];
    }
    th[6] = -m * r * (g.rho(cfg) - 1.0);
    th[7] = 1.0;
    th
}

/// dΘ_ab = ∂_aΘ_b − ∂_bΘ_a by central differences.
pub fn quantization_form_differential(g: &SigmaGroupElement, cfg: &SpaceConfig) -> SMatrix<f64, 8, 8> {
    let mut jac = SMatrix::<f64, 8, 8>::zeros();
    for a in 0..7 {
        let h = coordinate_step(a, cfg);
        let col = diff::first_vec(|t| quantization_form(&g.shifted(a, t), cfg).as_slice().to_vec(), h);
        for b in 0..8 {
            jac[(a, b)] = col[b];
        }
    }
    jac - jac.transpose()
}

/// Exact (ε, ν) block of dΘ: −m δ_ij.
pub fn exact_dtheta_eps_nu(cfg: &SpaceConfig) -> Matrix3<f64> {
    Matrix3::identity() * -cfg.mass
}

/// Exact (ε, z) column of dΘ: m ε_i / (Rρ).
pub fn exact_dtheta_eps_z(g: &SigmaGroupElement, cfg: &SpaceConfig) -> Result<Vector3<f64>> {
    Ok(g.eps * (cfg.mass / (cfg.radius * g.chart(cfg).interior_rho()?)))
}

/// i_{Z^R}Θ for the seven non-central right generators:
/// m(Z^R_(i)·ν − zε_i/R), −mε^j, −mR(ρ − 1).
pub fn noether_invariants(g: &SigmaGroupElement, cfg: &SpaceConfig) -> [f64; 7] {
    let (r, m) = (cfg.radius, cfg.mass);
    let c = g.chart(cfg);
    let zr = dual_field(&c, Side::Right);
    let mut out = [0.0; 7];
    for i in 0..3 {
        out[i] = m * (zr.column(i).dot(&g.nu) - g.z * g.eps[i] / r);
        out[3 + i] = -m * g.eps[i];
    }
    out[6] = -m * r * (c.rho() - 1.0);
    out
}

/// Contractions of Θ and dΘ with the left generators at one element.
#[derive(Debug, Clone, Serialize)]
pub struct CharacteristicCheck {
    /// |Θ(Ξ) − 1|
    pub theta_xi: f64,
    /// max |Θ(Z^L_a)| over ε, ν and z generators.
    pub theta_left: f64,
    /// max |i_{Z^L_z} dΘ|
    pub dtheta_z: f64,
    /// max |i_Ξ dΘ|
    pub dtheta_xi: f64,
    /// max |i_{Z^L_ν¹} dΘ|, nonzero because ν is symplectic.
    pub dtheta_nu1: f64,
}

pub fn characteristic_check(g: &SigmaGroupElement, cfg: &SpaceConfig) -> CharacteristicCheck {
    let th = quantization_form(g, cfg);
    let dth = quantization_form_differential(g, cfg);
    let fl = left_fields(g, cfg);
    let contract = |col: usize| (dth.transpose() * fl.column(col)).amax();
    CharacteristicCheck {
        theta_xi: (th.dot(&fl.column(7)) - 1.0).abs(),
        theta_left: (0..7).map(|a| th.dot(&fl.column(a)).abs()).fold(0.0, par::nan_max),
        dtheta_z: contract(6),
        dtheta_xi: contract(7),
        dtheta_nu1: contract(3),
    }
}

/// The quotient by ⟨Z^L_z, Ξ⟩: invariants (ε, ϑ) of an element with ζ = 1,
/// and the momentum π = mν − (mz/(Rρ)) ε in Darboux form.
pub fn quotient_point(g: &SigmaGroupElement, cfg: &SpaceConfig) -> Result<crate::classical::SolutionPoint> {
    let inv = noether_invariants(g, cfg);
    let m = cfg.mass;
    let eps = Vector3::new(-inv[3], -inv[4], -inv[5]) / m;
    let theta0 = Vector3::new(inv[0], inv[1], inv[2]) / m;
    let point0 = ChartCoords { eps, hemisphere: g.hemisphere, radius: cfg.radius };
    let th = canonical_one_form(&point0, Side::Right)?;
    Ok(crate::classical::SolutionPoint { point0, theta0, pi0: th.transpose() * theta0 * m })
}

fn quotient_momentum(y: &SVector<f64, 7>, hemisphere: Hemisphere, cfg: &SpaceConfig) -> Vector3<f64> {
    let eps = Vector3::new(y[0], y[1], y[2]);
    let nu = Vector3::new(y[3], y[4], y[5]);
    let rho = ChartCoords { eps, hemisphere, radius: cfg.radius }.rho();
    (nu - eps * (y[6] / (cfg.radius * rho))) * cfg.mass
}

/// Max difference between dΘ on (ε, ν, z) and the pullback of
/// Ω = dπ_i ∧ dε^i under (ε, ν, z) ↦ (ε, π).
pub fn quotient_symplectic_residual(g: &SigmaGroupElement, cfg: &SpaceConfig) -> f64 {
    let y = SVector::<f64, 7>::from_fn(|k, _| match k {
        0..=2 => g.eps[k],
        3..=5 => g.nu[k - 3],
        _ => g.z,
    });
    let mut jac = SMatrix::<f64, 6, 7>::zeros();
    for k in 0..7 {
        let h = coordinate_step(k, cfg);
        if k < 3 {
            jac[(k, k)] = 1.0;
        }
        let d = diff::first_vec(
            |t| {
                let mut yy = y;
                yy[k] += t;
                quotient_momentum(&yy, g.hemisphere, cfg).as_slice().to_vec()
            },
            h,
        );
        for i in 0..3 {
            jac[(3 + i, k)] = d[i];
        }
    }
    let omega = crate::classical::canonical_symplectic_matrix();
    let pulled = jac.transpose() * omega * jac;
    let dth = quantization_form_differential(g, cfg);
    let mut worst: f64 = 0.0;
    for a in 0..7 {
        for b in 0..7 {
            worst = par::nan_max(worst, (pulled[(a, b)] - dth[(a, b)]).abs());
        }
    }
    worst
}

/// Random element with |ε| ≤ R sin(π/8) so that products of up to three
/// stay on the ρ > 0 chart.
pub fn random_element(s: &mut Sampler, cfg: &SpaceConfig) -> SigmaGroupElement {
    let eps = s.ball(cfg.radius * (std::f64::consts::PI / 8.0).sin());
    SigmaGroupElement {
        eps,
        hemisphere: Hemisphere::North,
        nu: s.cube(1.0),
        z: s.uniform(-1.0, 1.0),
        zeta: C64::from_polar(1.0, s.phase()),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StructureConstant {
    pub bracket: String,
    pub component: String,
    pub measured: f64,
    pub expected: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupReport {
    pub samples: usize,
    pub field_points: usize,
    pub associativity: f64,
    pub identity: f64,
    pub inverse: f64,
    pub involution: f64,
    pub left_fields_vs_group_law: f64,
    pub right_fields_vs_group_law: f64,
    /// Right-right brackets against the reference table.
    pub right_bracket_residual: f64,
    /// Left-left brackets against the negated table.
    pub left_bracket_residual: f64,
    /// All 64 [Z^L, Z^R] brackets.
    pub mixed_bracket_residual: f64,
    /// Measured right structure constants (nonzero entries of the table
    /// plus any measured entry above 1e-9), averaged over field points.
    pub structure_constants: Vec<StructureConstant>,
    pub theta_xi: f64,
    pub theta_left: f64,
    pub dtheta_z: f64,
    pub dtheta_xi: f64,
    /// Smallest |i_{Z^L_ν¹} dΘ| seen; must stay away from zero.
    pub dtheta_nu1_min: f64,
    pub dtheta_exact_block: f64,
    pub noether_table: f64,
    pub noether_z_flow: f64,
    pub quotient_darboux: f64,
    pub quotient_momentum: f64,
    pub quotient_symplectic: f64,
    /// The ν-composition convention that passed associativity.
    pub nu_convention: String,
}

/// Runs every group-level check on `samples` random elements (fields and
/// brackets on at most `field_points` of them).
pub fn verify_group(samples: usize, field_points: usize, seed: u64, cfg: &SpaceConfig) -> Result<GroupReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    let mut s = Sampler::new(seed);
    let triples: Vec<[SigmaGroupElement; 3]> =
        (0..samples).map(|_| [random_element(&mut s, cfg), random_element(&mut s, cfg), random_element(&mut s, cfg)]).collect();
    let e = SigmaGroupElement::identity();

    let axioms = par::map_slice(&triples, |[a, b, c]| {
        let assoc = compose(&compose(a, b, cfg), c, cfg).distance(&compose(a, &compose(b, c, cfg), cfg));
        let ident = compose(&e, a, cfg).distance(a).max(compose(a, &e, cfg).distance(a));
        let ia = inverse(a, cfg);
        let inv = compose(&ia, a, cfg).distance(&e).max(compose(a, &ia, cfg).distance(&e));
        [assoc, ident, inv, inverse(&ia, cfg).distance(a)]
    });
    let col_max = |k: usize| axioms.iter().map(|v| v[k]).fold(0.0, par::nan_max);

    let npts = field_points.min(samples);
    let points: Vec<SigmaGroupElement> = triples.iter().take(npts).map(|t| t[0]).collect();
    let table = right_structure_constants(cfg);

    struct PointResult {
        left_fd: f64,
        right_fd: f64,
        right_br: f64,
        left_br: f64,
        mixed: f64,
        measured: [[Vector8; 8]; 8],
        chk: CharacteristicCheck,
        exact_block: f64,
        noether: f64,
        z_flow: f64,
        darboux: f64,
        momentum: f64,
        symplectic: f64,
    }

    let per_point = par::map_slice(&points, |g| -> Result<PointResult> {
        let fl = left_fields(g, cfg);
        let fr = right_fields(g, cfg);
        let left_fd = (numerical_fields(g, Side::Left, cfg) - fl).amax();
        let right_fd = (numerical_fields(g, Side::Right, cfg) - fr).amax();
        let fr_inv = fr.try_inverse().ok_or(Error::ChartSingularity { rho: g.rho(cfg) })?;
        let (mut right_br, mut left_br, mut mixed) = (0.0f64, 0.0f64, 0.0f64);
        let mut measured = [[Vector8::zeros(); 8]; 8];
        for a in 0..8 {
            for b in 0..8 {
                let br = field_bracket(g, Side::Right, a, Side::Right, b, cfg)?;
                measured[a][b] = fr_inv * br;
                right_br = par::nan_max(right_br, (br - fr * table[a][b]).amax());
                let bl = field_bracket(g, Side::Left, a, Side::Left, b, cfg)?;
                left_br = par::nan_max(left_br, (bl + fl * table[a][b]).amax());
                mixed = par::nan_max(mixed, field_bracket(g, Side::Left, a, Side::Right, b, cfg)?.amax());
            }
        }
        let chk = characteristic_check(g, cfg);
        let dth = quantization_form_differential(g, cfg);
        let mut exact_block = (dth.fixed_view::<3, 3>(0, 3) - exact_dtheta_eps_nu(cfg)).amax();
        exact_block = exact_block.max((dth.fixed_view::<3, 1>(0, 6) - exact_dtheta_eps_z(g, cfg)?).amax());

        let th = quantization_form(g, cfg);
        let closed = noether_invariants(g, cfg);
        let noether = (0..7).map(|a| (th.dot(&fr.column(a)) - closed[a]).abs()).fold(0.0, par::nan_max);
        let moved = compose(g, &SigmaGroupElement::z_translation(0.37), cfg);
        let after = noether_invariants(&moved, cfg);
        let z_flow = closed.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, par::nan_max);

        let flat = SigmaGroupElement { zeta: C64::new(1.0, 0.0), ..*g };
        let sp = quotient_point(&flat, cfg)?;
        let darboux = sp.darboux_residual(cfg)?;
        let c = flat.chart(cfg);
        let pi_direct = (flat.nu - flat.eps * (flat.z / (cfg.radius * c.interior_rho()?))) * cfg.mass;
        let momentum = (sp.pi0 - pi_direct).amax().max((sp.point0.eps - flat.eps).amax());
        let symplectic = quotient_symplectic_residual(&flat, cfg);
        Ok(PointResult { left_fd, right_fd, right_br, left_br, mixed, measured, chk, exact_block, noether, z_flow, darboux, momentum, symplectic })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let pmax = |f: &dyn Fn(&PointResult) -> f64| per_point.iter().map(f).fold(0.0, par::nan_max);

    let mut structure_constants = Vec::new();
    for a in 0..8 {
        for b in (a + 1)..8 {
            for c in 0..8 {
                let mean = per_point.iter().map(|p| p.measured[a][b][c]).sum::<f64>() / per_point.len().max(1) as f64;
                let expected = table[a][b][c];
                if expected != 0.0 || mean.abs() > 1e-9 {
                    structure_constants.push(StructureConstant {
                        bracket: format!("[Z^R_{}, Z^R_{}]", GENERATOR_NAMES[a], GENERATOR_NAMES[b]),
                        component: GENERATOR_NAMES[c].to_string(),
                        measured: mean,
                        expected,
                    });
                }
            }
        }
    }

    Ok(GroupReport {
        samples,
        field_points: npts,
        associativity: col_max(0),
        identity: col_max(1),
        inverse: col_max(2),
        involution: col_max(3),
        left_fields_vs_group_law: pmax(&|p| p.left_fd),
        right_fields_vs_group_law: pmax(&|p| p.right_fd),
        right_bracket_residual: pmax(&|p| p.right_br),
        left_bracket_residual: pmax(&|p| p.left_br),
        mixed_bracket_residual: pmax(&|p| p.mixed),
        structure_constants,
        theta_xi: pmax(&|p| p.chk.theta_xi),
        theta_left: pmax(&|p| p.chk.theta_left),
        dtheta_z: pmax(&|p| p.chk.dtheta_z),
        dtheta_xi: pmax(&|p| p.chk.dtheta_xi),
        dtheta_nu1_min: per_point.iter().map(|p| p.chk.dtheta_nu1).fold(f64::INFINITY, f64::min),
        dtheta_exact_block: pmax(&|p| p.exact_block),
        noether_table: pmax(&|p| p.noether),
        noether_z_flow: pmax(&|p| p.z_flow),
        quotient_darboux: pmax(&|p| p.darboux),
        quotient_momentum: pmax(&|p| p.momentum),
        quotient_symplectic: pmax(&|p| p.symplectic),
        nu_convention: "X^L(eps')nu = rho' nu + (1/R) eps' x nu".into(),
    })
}
