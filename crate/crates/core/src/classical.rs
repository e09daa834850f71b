//! Classical free motion on S³: Lagrangian and Hamiltonian, geodesics,
//! Noether invariants, the Hamilton–Jacobi map onto the solution manifold
//! and numerical Poisson brackets in Darboux coordinates (ε, π).
//!
//! Time evolution is done in the embedding ℝ⁴ where the geodesics are great
//! circles, so trajectories may cross the chart equator ρ = 0 freely.

use nalgebra::{DMatrix, DVector, Vector3, Vector4};
use serde::Serialize;

use crate::diff;
use crate::error::{Error, Result};
use crate::geometry::{
    self, canonical_one_form, dual_field, levi_civita, metric, metric_inverse, quat_conj, quat_mul, ChartCoords,
    Hemisphere, Side, SpaceConfig,
};
use crate::par;
use crate::sampling::Sampler;

/// Chart position and velocity ε̇.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub point: ChartCoords,
    pub vel: Vector3<f64>,
}

impl PhaseState {
    pub fn new(point: ChartCoords, vel: Vector3<f64>) -> Result<Self> {
        if !vel.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("non-finite velocity {vel:?}")));
        }
        geometry::rho(&point)?;
        Ok(Self { point, vel })
    }

    /// Embedded position `(Rρ, ε)` and velocity `(Rρ̇, ε̇)`.
    pub fn embedded(&self) -> Result<(Vector4<f64>, Vector4<f64>)> {
        let c = &self.point;
        let r = c.radius;
        let rho = c.rho();
        let x = Vector4::new(r * rho, c.eps.x, c.eps.y, c.eps.z);
        let radial = c.eps.dot(&self.vel);
        let rho_dot = if radial == 0.0 { 0.0 } else { -radial / (r * r * c.interior_rho()?) };
        let v = Vector4::new(r * rho_dot, self.vel.x, self.vel.y, self.vel.z);
        Ok((x, v))
    }

    pub fn from_embedded(x: &Vector4<f64>, v: &Vector4<f64>, radius: f64) -> Self {
        Self {
            point: ChartCoords {
                eps: Vector3::new(x[1], x[2], x[3]),
                hemisphere: Hemisphere::of(x[0]),
                radius,
            },
            vel: Vector3::new(v[1], v[2], v[3]),
        }
    }
}

/// A point of the solution manifold: initial position ε₀ (with its
/// hemisphere), the conserved ϑ₀ and the Darboux momentum π₀.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolutionPoint {
    pub point0: ChartCoords,
    pub theta0: Vector3<f64>,
    pub pi0: Vector3<f64>,
}

impl SolutionPoint {
    /// Builds the point from (ε₀, π₀), deriving ϑ₀ = (1/m) Zᵀ π₀.
    pub fn from_canonical(point0: ChartCoords, pi0: Vector3<f64>, cfg: &SpaceConfig) -> Self {
        Self { point0, theta0: theta_from_canonical(&point0, &pi0, cfg), pi0 }
    }

    /// Residual of π_i = m θ^(k)_i ϑ_k.
    pub fn darboux_residual(&self, cfg: &SpaceConfig) -> Result<f64> {
        let th = canonical_one_form(&self.point0, Side::Right)?;
        Ok((th.transpose() * self.theta0 * cfg.mass - self.pi0).amax())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantSample {
    pub energy: f64,
    pub theta_right: Vector3<f64>,
    pub theta_left: Vector3<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub invariants_log: Vec<InvariantSample>,
    /// Set when ω·Δt exceeds [`MAX_STABLE_PHASE_STEP`].
    pub accuracy_warning: Option<String>,
}

/// Largest ω·Δt considered accurate for the fixed-step integrator.
pub const MAX_STABLE_PHASE_STEP: f64 = 0.5;

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Max |H(t) − H(0)| / H(0) (absolute when H(0) = 0).
    pub fn energy_drift(&self) -> f64 {
        let h0 = self.invariants_log.first().map_or(0.0, |s| s.energy);
        let scale = if h0 > 0.0 { h0 } else { 1.0 };
        self.invariants_log.iter().map(|s| (s.energy - h0).abs() / scale).fold(0.0, par::nan_max)
    }

    /// CSV rows `t, eps1..3, rho, vel1..3, H, thetaR1..3, thetaL1..3`; the
    /// signed ρ column records the hemisphere.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,eps1,eps2,eps3,rho,vel1,vel2,vel3,H,thetaR1,thetaR2,thetaR3,thetaL1,thetaL2,thetaL3")?;
        for ((t, s), inv) in self.times.iter().zip(&self.states).zip(&self.invariants_log) {
            let e = s.point.eps;
            let v = s.vel;
            let (a, b) = (inv.theta_right, inv.theta_left);
            writeln!(
                w,
                "{t:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                e[0], e[1], e[2], s.point.rho(), v[0], v[1], v[2], inv.energy, a[0], a[1], a[2], b[0], b[1], b[2]
            )?;
        }
        Ok(())
    }

    /// Max drift of the right and left invariant triples.
    pub fn theta_drift(&self) -> f64 {
        let Some(first) = self.invariants_log.first() else { return 0.0 };
        self.invariants_log
            .iter()
            .map(|s| (s.theta_right - first.theta_right).amax().max((s.theta_left - first.theta_left).amax()))
            .fold(0.0, par::nan_max)
    }
}

/// L = (m/2) g_ij ε̇^i ε̇^j.
pub fn lagrangian(s: &PhaseState, cfg: &SpaceConfig) -> Result<f64> {
    Ok(0.5 * cfg.mass * s.vel.dot(&(metric(&s.point)? * s.vel)))
}

/// p_i = m g_ij ε̇^j.
pub fn momentum(s: &PhaseState, cfg: &SpaceConfig) -> Result<Vector3<f64>> {
    Ok(metric(&s.point)? * s.vel * cfg.mass)
}

/// H = (1/2m) g^ij p_i p_j.
pub fn hamiltonian(s: &PhaseState, cfg: &SpaceConfig) -> Result<f64> {
    let p = momentum(s, cfg)?;
    Ok(p.dot(&(metric_inverse(&s.point) * p)) / (2.0 * cfg.mass))
}

/// The energy written three ways: (m/2) g ε̇ε̇, (1/2m) g⁻¹pp and (m/2) δ θθ.
pub fn hamiltonian_forms(s: &PhaseState, cfg: &SpaceConfig) -> Result<[f64; 3]> {
    let theta = canonical_one_form(&s.point, Side::Right)? * s.vel;
    Ok([lagrangian(s, cfg)?, hamiltonian(s, cfg)?, 0.5 * cfg.mass * theta.norm_squared()])
}

/// ω = (1/R) sqrt(g_ij ε̇^i ε̇^j), the angular rate of the great circle.
pub fn angular_frequency(s: &PhaseState) -> Result<f64> {
    let (_, v) = s.embedded()?;
    Ok(v.norm() / s.point.radius)
}

/// The alternative expression sqrt(8H/(mR²)); exceeds the true rate by a
/// factor of 2 and is kept only for the residual comparison.
pub fn alternative_frequency(s: &PhaseState, cfg: &SpaceConfig) -> Result<f64> {
    Ok((8.0 * hamiltonian(s, cfg)? / (cfg.mass * cfg.radius * cfg.radius)).sqrt())
}

/// Chart-free invariants (ϑ^R, ϑ^L) from embedded position and velocity:
/// ϑ^R = vec(V X̄)/R, ϑ^L = vec(X̄ V)/R.
pub fn invariants_embedded(x: &Vector4<f64>, v: &Vector4<f64>, radius: f64) -> (Vector3<f64>, Vector3<f64>) {
    let r = quat_mul(v, &quat_conj(x)) / radius;
    let l = quat_mul(&quat_conj(x), v) / radius;
    (Vector3::new(r[1], r[2], r[3]), Vector3::new(l[1], l[2], l[3]))
}

fn great_circle(x0: &Vector4<f64>, v0: &Vector4<f64>, omega: f64, t: f64) -> (Vector4<f64>, Vector4<f64>) {
    if omega == 0.0 {
        return (*x0, *v0);
    }
    let (s, c) = (omega * t).sin_cos();
    (x0 * c + v0 * (s / omega), v0 * c - x0 * (omega * s))
}

/// Closed-form geodesic ε(t) = ε₀ cos ωt + ε̇₀ sin ωt / ω, evaluated on the
/// embedded great circle so the hemisphere is tracked across the equator.
pub fn geodesic_exact(init: &PhaseState, t: f64, cfg: &SpaceConfig) -> Result<PhaseState> {
    let (x0, v0) = init.embedded()?;
    let omega = v0.norm() / cfg.radius;
    if omega == 0.0 {
        return Ok(*init);
    }
    let (x, v) = great_circle(&x0, &v0, omega, t);
    Ok(PhaseState::from_embedded(&x, &v, cfg.radius))
}

fn log_sample(x: &Vector4<f64>, v: &Vector4<f64>, cfg: &SpaceConfig) -> InvariantSample {
    let (theta_right, theta_left) = invariants_embedded(x, v, cfg.radius);
    InvariantSample { energy: 0.5 * cfg.mass * v.norm_squared(), theta_right, theta_left }
}

/// Fixed-step RK4 integration of Ẍ = −(|V|²/R²) X in the embedding, with
/// |X| = R renormalization and tangency projection after every step.
pub fn geodesic_integrate(init: &PhaseState, t_end: f64, steps: usize, cfg: &SpaceConfig) -> Result<Trajectory> {
    if steps < 10 {
        return Err(Error::InvalidArgument(format!("steps must be >= 10, got {steps}")));
    }
    if !t_end.is_finite() {
        return Err(Error::InvalidArgument("t_end must be finite".into()));
    }
    let r = cfg.radius;
    let (mut x, mut v) = init.embedded()?;
    let dt = t_end / steps as f64;
    let omega = v.norm() / r;
    let accuracy_warning = (omega * dt.abs() > MAX_STABLE_PHASE_STEP).then(|| {
        format!("omega*dt = {:.3} exceeds {MAX_STABLE_PHASE_STEP}; integration is inaccurate", omega * dt.abs())
    });

    let accel = |x: &Vector4<f64>, v: &Vector4<f64>| -x * (v.norm_squared() / (r * r));
    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        invariants_log: Vec::with_capacity(steps + 1),
        accuracy_warning,
    };
    traj.times.push(0.0);
    traj.states.push(*init);
    traj.invariants_log.push(log_sample(&x, &v, cfg));
    for n in 1..=steps {
        let k1x = v;
        let k1v = accel(&x, &v);
        let (x2, v2) = (x + k1x * (dt / 2.0), v + k1v * (dt / 2.0));
        let k2x = v2;
        let k2v = accel(&x2, &v2);
        let (x3, v3) = (x + k2x * (dt / 2.0), v + k2v * (dt / 2.0));
        let k3x = v3;
        let k3v = accel(&x3, &v3);
        let (x4, v4) = (x + k3x * dt, v + k3v * dt);
        let k4x = v4;
        let k4v = accel(&x4, &v4);
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (dt / 6.0);
        x *= r / x.norm();
        v -= x * (v.dot(&x) / (r * r));

        traj.times.push(n as f64 * dt);
        traj.states.push(PhaseState::from_embedded(&x, &v, r));
        traj.invariants_log.push(log_sample(&x, &v, cfg));
    }
    Ok(traj)
}

/// Maps a state observed at time `t` to the solution manifold by evolving
/// it back to t = 0.
pub fn hj_transform(s: &PhaseState, t: f64, cfg: &SpaceConfig) -> Result<SolutionPoint> {
    let (x, v) = s.embedded()?;
    let omega = v.norm() / cfg.radius;
    let (x0, v0) = great_circle(&x, &v, omega, -t);
    let (theta0, _) = invariants_embedded(&x0, &v0, cfg.radius);
    let point0 = PhaseState::from_embedded(&x0, &v0, cfg.radius).point;
    let th = canonical_one_form(&point0, Side::Right)?;
    Ok(SolutionPoint { point0, theta0, pi0: th.transpose() * theta0 * cfg.mass })
}

/// Inverse of [`hj_transform`]: rebuilds the state at time `t`.
pub fn hj_inverse(sp: &SolutionPoint, t: f64, cfg: &SpaceConfig) -> Result<PhaseState> {
    let r = cfg.radius;
    let x0 = sp.point0.point().embedded(r);
    let w = Vector4::new(0.0, sp.theta0.x, sp.theta0.y, sp.theta0.z);
    // q̇ = (1/R)(0, ϑ) q  ⇒  V = (0, ϑ) X / R
    let v0 = quat_mul(&w, &x0) / r;
    let omega = v0.norm() / r;
    let (x, v) = great_circle(&x0, &v0, omega, t);
    Ok(PhaseState::from_embedded(&x, &v, r))
}

/// Samples with |ρ| below this are skipped by the geodesic residual: the
/// chart metric blows up like 1/ρ² and differenced Christoffel symbols lose
/// accuracy like 1/ρ⁴.
pub const EQUATOR_SKIP_RHO: f64 = 0.05;

/// Relative Christoffel step, scaled by ρ² at each sample so truncation and
/// roundoff stay balanced as the metric steepens.
pub const CHRISTOFFEL_REL_STEP: f64 = 6e-4;

/// Result of plugging a closed-form candidate into the geodesic equation.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicResidual {
    pub omega: f64,
    pub max_residual: f64,
    pub samples: usize,
    pub skipped_near_equator: usize,
    /// Samples where the candidate curve had |ε| > R, i.e. left the sphere.
    pub off_sphere: usize,
}

impl GeodesicResidual {
    pub fn passes(&self, tol: f64) -> bool {
        self.off_sphere == 0 && self.max_residual < tol && self.skipped_near_equator < self.samples
    }
}

/// Evaluates ε̈ + Γ^j_kl ε̇^k ε̇^l along ε(t) = ε₀ cos ωt + ε̇₀ sin ωt/ω for the
/// given ω at `samples` times over one period, with Christoffel symbols from
/// central differences of the metric.
pub fn geodesic_equation_residual(init: &PhaseState, omega: f64, samples: usize) -> Result<GeodesicResidual> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument("omega must be > 0".into()));
    }
    let r = init.point.radius;
    let (x0, v0) = init.embedded()?;
    let period = std::f64::consts::TAU / omega;
    let mut max_residual: f64 = 0.0;
    let (mut skipped, mut off_sphere) = (0, 0);
    for k in 0..samples {
        let t = (k as f64 + 0.5) * period / samples as f64;
        let (s, c) = (omega * t).sin_cos();
        let eps = init.point.eps * c + init.vel * (s / omega);
        let vel = init.vel * c - init.point.eps * (omega * s);
        let acc = -eps * (omega * omega);
        if eps.norm() > r {
            off_sphere += 1;
            continue;
        }
        // the candidate's ρ follows the same harmonic law in the embedding
        let x0t = x0[0] * c + v0[0] * s / omega;
        let point = ChartCoords { eps, hemisphere: Hemisphere::of(x0t), radius: r };
        let rho = point.rho();
        let h = CHRISTOFFEL_REL_STEP * r * rho * rho;
        if rho.abs() < EQUATOR_SKIP_RHO || geometry::check_stencil(&point, h).is_err() {
            skipped += 1;
            continue;
        }
        let gamma = geometry::christoffel_numeric(&point, h)?;
        let mut res = acc;
        for (j, gj) in gamma.iter().enumerate() {
            for (k, gjk) in gj.iter().enumerate() {
                for (l, g) in gjk.iter().enumerate() {
                    res[j] += g * vel[k] * vel[l];
                }
            }
        }
        max_residual = par::nan_max(max_residual, res.amax());
    }
    Ok(GeodesicResidual { omega, max_residual, samples, skipped_near_equator: skipped, off_sphere })
}

/// A scalar function on the canonical coordinates (ε, π) of the solution
/// manifold.
pub type PhaseFunction<'a> = dyn Fn(&ChartCoords, &Vector3<f64>) -> f64 + Sync + Send + 'a;

/// The generators of the basic Poisson algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasicFunction {
    Eps(usize),
    Theta(usize),
    Rho,
}

impl BasicFunction {
    pub const ALL: [BasicFunction; 7] = [
        BasicFunction::Eps(0),
        BasicFunction::Eps(1),
        BasicFunction::Eps(2),
        BasicFunction::Theta(0),
        BasicFunction::Theta(1),
        BasicFunction::Theta(2),
        BasicFunction::Rho,
    ];

    pub fn eval(&self, c: &ChartCoords, pi: &Vector3<f64>, cfg: &SpaceConfig) -> f64 {
        match *self {
            BasicFunction::Eps(i) => c.eps[i],
            BasicFunction::Theta(j) => theta_from_canonical(c, pi, cfg)[j],
            BasicFunction::Rho => c.rho(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            BasicFunction::Eps(i) => format!("eps{}", i + 1),
            BasicFunction::Theta(i) => format!("theta{}", i + 1),
            BasicFunction::Rho => "rho".into(),
        }
    }
}

/// ϑ_j(ε, π) = (1/m) Z^{R k}_(j)(ε) π_k.
pub fn theta_from_canonical(c: &ChartCoords, pi: &Vector3<f64>, cfg: &SpaceConfig) -> Vector3<f64> {
    dual_field(c, Side::Right).transpose() * pi / cfg.mass
}

/// {f, g} = Σ_i (∂f/∂ε^i ∂g/∂π_i − ∂f/∂π_i ∂g/∂ε^i) with step `h` in ε and π.
pub fn poisson_bracket_at(f: &PhaseFunction, g: &PhaseFunction, c: &ChartCoords, pi: &Vector3<f64>, h: f64) -> Result<f64> {
    geometry::check_stencil(c, h)?;
    Ok(bracket_unchecked(f, g, c, pi, h))
}

fn bracket_unchecked(f: &PhaseFunction, g: &PhaseFunction, c: &ChartCoords, pi: &Vector3<f64>, h: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let e = Vector3::ith(i, 1.0);
        let d_eps = |fun: &PhaseFunction| diff::first(|t| fun(&c.shifted(&(e * t)), pi), h);
        let d_pi = |fun: &PhaseFunction| diff::first(|t| fun(c, &(pi + e * t)), h);
        acc += d_eps(f) * d_pi(g) - d_pi(f) * d_eps(g);
    }
    acc
}

/// Poisson bracket at a solution-manifold point with the default step.
pub fn poisson_bracket(f: &PhaseFunction, g: &PhaseFunction, at: &SolutionPoint, cfg: &SpaceConfig) -> Result<f64> {
    poisson_bracket_at(f, g, &at.point0, &at.pi0, diff::REL_STEP * cfg.radius)
}

/// Coefficient fitted as `Σ measured·basis / Σ basis²`.
#[derive(Debug, Clone, Serialize)]
pub struct FittedCoefficient {
    pub bracket: String,
    pub measured: f64,
    /// Coefficient in the reference bracket table at this mass.
    pub reference: f64,
    /// Value implied by ϑ = (1/m) Zᵀπ.
    pub derived: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoissonAlgebraReport {
    pub mass: f64,
    pub radius: f64,
    pub samples: usize,
    /// Max residual of each family against the reference formulas.
    pub family_residuals: Vec<(String, f64)>,
    pub coefficients: Vec<FittedCoefficient>,
    /// Max least-squares residual projecting every bracket onto
    /// span{1, ε, ϑ, ρ}.
    pub closure_residual: f64,
    pub jacobi_residual: f64,
    pub jacobi_triples: usize,
    pub jacobi_points: usize,
    pub antisymmetry_residual: f64,
}

impl PoissonAlgebraReport {
    pub fn max_family_residual(&self) -> f64 {
        self.family_residuals.iter().map(|(_, r)| *r).fold(0.0, par::nan_max)
    }
}

fn basic(f: BasicFunction, cfg: SpaceConfig) -> impl Fn(&ChartCoords, &Vector3<f64>) -> f64 + Sync + Send {
    move |c: &ChartCoords, pi: &Vector3<f64>| f.eval(c, pi, &cfg)
}

/// Evaluates all brackets of the basic algebra at random points and checks
/// them against the reference structure, fits the coefficients, checks
/// closure and the Jacobi identity.
pub fn verify_basic_algebra(sample_count: usize, jacobi_points: usize, seed: u64, cfg: &SpaceConfig) -> Result<PoissonAlgebraReport> {
    let r = cfg.radius;
    let m = cfg.mass;
    let h = diff::REL_STEP * r;
    let mut sampler = Sampler::new(seed);
    let points: Vec<(ChartCoords, Vector3<f64>)> =
        (0..sample_count).map(|_| (sampler.chart_point(r, 0.8), sampler.cube(m))).collect();
    let funcs = BasicFunction::ALL;

    // brackets[p][a][b] = {f_a, f_b} at point p
    let brackets: Vec<[[f64; 7]; 7]> = par::map_slice(&points, |(c, pi)| {
        let mut out = [[0.0; 7]; 7];
        for a in 0..7 {
            for b in 0..7 {
                let fa = basic(funcs[a], *cfg);
                let fb = basic(funcs[b], *cfg);
                out[a][b] = bracket_unchecked(&fa, &fb, c, pi, h);
            }
        }
        out
    });

    let mut fam = [0.0f64; 5];
    let mut antisym: f64 = 0.0;
    let (mut tt_num, mut tt_den, mut tr_num, mut tr_den, mut et_num, mut et_den) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for ((c, pi), br) in points.iter().zip(&brackets) {
        let rho = c.rho();
        let theta = theta_from_canonical(c, pi, cfg);
        for i in 0..3 {
            fam[3] = par::nan_max(fam[3], br[i][6].abs());
            let expect_tr = c.eps[i] / (r * r);
            fam[4] = par::nan_max(fam[4], (br[3 + i][6] - expect_tr).abs());
            tr_num += br[3 + i][6] * expect_tr;
            tr_den += expect_tr * expect_tr;
            for j in 0..3 {
                fam[0] = par::nan_max(fam[0], br[i][j].abs());
                let expect_et: f64 = (0..3).map(|k| levi_civita(i, j, k) * c.eps[k]).sum::<f64>() / r
                    + if i == j { rho } else { 0.0 };
                fam[1] = par::nan_max(fam[1], (br[i][3 + j] - expect_et).abs());
                et_num += br[i][3 + j] * expect_et;
                et_den += expect_et * expect_et;
                let basis_tt: f64 = (0..3).map(|k| levi_civita(i, j, k) * theta[k]).sum();
                fam[2] = par::nan_max(fam[2], (br[3 + i][3 + j] - 2.0 * m / r * basis_tt).abs());
                tt_num += br[3 + i][3 + j] * basis_tt;
                tt_den += basis_tt * basis_tt;
                antisym = par::nan_max(antisym, (br[3 + i][3 + j] + br[3 + j][3 + i]).abs());
            }
        }
    }

    let closure_residual = closure_residual(&points, &brackets, cfg);
    let (jacobi_residual, jacobi_triples) = jacobi_residual(&points[..jacobi_points.min(points.len())], cfg)?;

    let names = ["eps_eps", "eps_theta", "theta_theta", "eps_rho", "theta_rho"];
    Ok(PoissonAlgebraReport {
        mass: m,
        radius: r,
        samples: sample_count,
        family_residuals: names.iter().map(|s| s.to_string()).zip(fam).collect(),
        coefficients: vec![
            FittedCoefficient { bracket: "{eps^i, theta_j} / (rho delta + eta eps / R)".into(), measured: et_num / et_den, reference: 1.0, derived: 1.0 / m },
            FittedCoefficient { bracket: "{theta_i, theta_j} / (eta^k_ij theta_k)".into(), measured: tt_num / tt_den, reference: 2.0 * m / r, derived: 2.0 / (m * r) },
            FittedCoefficient { bracket: "{theta_i, rho} / (eps_i / R^2)".into(), measured: tr_num / tr_den, reference: 1.0, derived: 1.0 / m },
        ],
        closure_residual,
        jacobi_residual,
        jacobi_triples,
        jacobi_points: jacobi_points.min(points.len()),
        antisymmetry_residual: antisym,
    })
}

fn closure_residual(points: &[(ChartCoords, Vector3<f64>)], brackets: &[[[f64; 7]; 7]], cfg: &SpaceConfig) -> f64 {
    let n = points.len();
    // span {1, eps1..3, theta1..3, rho}
    let mut basis = DMatrix::zeros(n, 8);
    for (p, (c, pi)) in points.iter().enumerate() {
        basis[(p, 0)] = 1.0;
        for (a, f) in BasicFunction::ALL.iter().enumerate() {
            basis[(p, a + 1)] = f.eval(c, pi, cfg);
        }
    }
    let svd = basis.clone().svd(true, true);
    let mut worst: f64 = 0.0;
    for a in 0..7 {
        for b in (a + 1)..7 {
            let rhs = DVector::from_iterator(n, brackets.iter().map(|br| br[a][b]));
            let Ok(coef) = svd.solve(&rhs, 1e-12) else { return f64::NAN };
            worst = par::nan_max(worst, (&basis * coef - rhs).amax());
        }
    }
    worst
}

fn jacobi_residual(points: &[(ChartCoords, Vector3<f64>)], cfg: &SpaceConfig) -> Result<(f64, usize)> {
    let h = diff::REL_STEP_SECOND * cfg.radius;
    let funcs = BasicFunction::ALL;
    let mut triples = Vec::new();
    for a in 0..7 {
        for b in (a + 1)..7 {
            for c in (b + 1)..7 {
                triples.push((a, b, c));
            }
        }
    }
    for (c, _) in points {
        geometry::check_stencil(c, 4.0 * h)?;
    }
    let cfg = *cfg;
    let nested = move |x: BasicFunction, y: BasicFunction, z: BasicFunction, c: &ChartCoords, pi: &Vector3<f64>| {
        let fy = basic(y, cfg);
        let fz = basic(z, cfg);
        let inner = move |c: &ChartCoords, pi: &Vector3<f64>| bracket_unchecked(&fy, &fz, c, pi, h);
        bracket_unchecked(&basic(x, cfg), &inner, c, pi, h)
    };
    let residuals = par::map_slice(&triples, |&(a, b, c)| {
        points
            .iter()
            .map(|(p, pi)| {
                let (fa, fb, fc) = (funcs[a], funcs[b], funcs[c]);
                (nested(fa, fb, fc, p, pi) + nested(fb, fc, fa, p, pi) + nested(fc, fa, fb, p, pi)).abs()
            })
            .fold(0.0, par::nan_max)
    });
    Ok((residuals.into_iter().fold(0.0, par::nan_max), triples.len()))
}

/// Symplectic matrix of Ω = dπ_i ∧ dε^i in coordinates (ε, π).
pub fn canonical_symplectic_matrix() -> nalgebra::Matrix6<f64> {
    let mut w = nalgebra::Matrix6::zeros();
    for i in 0..3 {
        // Ω(∂π_i, ∂ε^i) = 1
        w[(3 + i, i)] = 1.0;
        w[(i, 3 + i)] = -1.0;
    }
    w
}

/// Convenience: θ^R(ε) ε̇ in the chart.
pub fn theta_right(s: &PhaseState) -> Result<Vector3<f64>> {
    Ok(canonical_one_form(&s.point, Side::Right)? * s.vel)
}

/// Convenience: θ^L(ε) ε̇ in the chart.
pub fn theta_left(s: &PhaseState) -> Result<Vector3<f64>> {
    Ok(canonical_one_form(&s.point, Side::Left)? * s.vel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SpaceConfig {
        SpaceConfig::default()
    }

    fn sample_state(s: &mut Sampler, cfg: &SpaceConfig) -> PhaseState {
        PhaseState::new(s.chart_point(cfg.radius, 0.9), s.cube(1.0)).unwrap()
    }

    #[test]
    fn rest_state_has_zero_energy() {
        let st = PhaseState::new(ChartCoords::origin(1.0), Vector3::zeros()).unwrap();
        assert_eq!(lagrangian(&st, &cfg()).unwrap(), 0.0);
        assert_eq!(hamiltonian(&st, &cfg()).unwrap(), 0.0);
        assert_eq!(momentum(&st, &cfg()).unwrap(), Vector3::zeros());
        assert_eq!(geodesic_exact(&st, 3.0, &cfg()).unwrap(), st);
    }

    #[test]
    fn lagrangian_at_origin_is_flat() {
        let cfg = SpaceConfig::new(2.0, 3.0).unwrap();
        let v = Vector3::new(0.3, -0.4, 1.2);
        let st = PhaseState::new(ChartCoords::origin(2.0), v).unwrap();
        assert!((lagrangian(&st, &cfg).unwrap() - 1.5 * v.norm_squared()).abs() < 1e-15);
    }

    #[test]
    fn transverse_velocity_feels_no_curvature() {
        let cfg = SpaceConfig::new(2.0, 1.5).unwrap();
        let st = PhaseState::new(ChartCoords::north(Vector3::new(1.0, 0.0, 0.0), 2.0).unwrap(), Vector3::new(0.0, 0.7, 0.0)).unwrap();
        assert!((hamiltonian(&st, &cfg).unwrap() - 0.5 * 1.5 * 0.49).abs() < 1e-15);
    }

    #[test]
    fn three_energy_forms_agree() {
        let mut s = Sampler::new(11);
        let cfg = SpaceConfig::new(1.3, 0.7).unwrap();
        for _ in 0..200 {
            let st = sample_state(&mut s, &cfg);
            let [a, b, c] = hamiltonian_forms(&st, &cfg).unwrap();
            let scale = a.abs().max(1e-300);
            assert!((a - b).abs() < 1e-12 * scale && (a - c).abs() < 1e-12 * scale, "{a} {b} {c}");
        }
    }

    #[test]
    fn chart_and_embedded_invariants_agree() {
        let mut s = Sampler::new(12);
        let cfg = SpaceConfig::new(1.6, 1.0).unwrap();
        for _ in 0..100 {
            let st = sample_state(&mut s, &cfg);
            let (x, v) = st.embedded().unwrap();
            let (tr, tl) = invariants_embedded(&x, &v, cfg.radius);
            assert!((tr - theta_right(&st).unwrap()).amax() < 1e-12);
            assert!((tl - theta_left(&st).unwrap()).amax() < 1e-12);
        }
    }

    #[test]
    fn exact_geodesic_at_zero_time_is_identity() {
        let mut s = Sampler::new(13);
        let st = sample_state(&mut s, &cfg());
        let back = geodesic_exact(&st, 0.0, &cfg()).unwrap();
        assert!((back.point.eps - st.point.eps).amax() < 1e-15 && (back.vel - st.vel).amax() < 1e-15);
    }

    #[test]
    fn exact_geodesic_closes_after_one_period() {
        let mut s = Sampler::new(14);
        for _ in 0..20 {
            let st = sample_state(&mut s, &cfg());
            let omega = angular_frequency(&st).unwrap();
            let end = geodesic_exact(&st, std::f64::consts::TAU / omega, &cfg()).unwrap();
            let (x0, _) = st.embedded().unwrap();
            let (x1, _) = end.embedded().unwrap_or((Vector4::from_element(f64::NAN), Vector4::zeros()));
            assert!((x1 - x0).amax() < 1e-9);
        }
    }

    #[test]
    fn integrator_needs_ten_steps() {
        let st = PhaseState::new(ChartCoords::origin(1.0), Vector3::new(1.0, 0.0, 0.0)).unwrap();
        assert!(matches!(geodesic_integrate(&st, 1.0, 9, &cfg()), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn coarse_steps_raise_warning() {
        let st = PhaseState::new(ChartCoords::origin(1.0), Vector3::new(5.0, 0.0, 0.0)).unwrap();
        let tr = geodesic_integrate(&st, 10.0, 10, &cfg()).unwrap();
        assert!(tr.accuracy_warning.is_some());
        let fine = geodesic_integrate(&st, 1.0, 100, &cfg()).unwrap();
        assert!(fine.accuracy_warning.is_none());
    }

    #[test]
    fn trajectory_csv_has_header_and_rows() {
        let st = PhaseState::new(ChartCoords::origin(1.0), Vector3::new(0.5, 0.0, 0.0)).unwrap();
        let tr = geodesic_integrate(&st, 1.0, 10, &cfg()).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 15);
    }

    #[test]
    fn hj_at_zero_time() {
        let mut s = Sampler::new(15);
        let cfg = SpaceConfig::new(1.0, 2.0).unwrap();
        for _ in 0..50 {
            let st = sample_state(&mut s, &cfg);
            let sp = hj_transform(&st, 0.0, &cfg).unwrap();
            assert!((sp.point0.eps - st.point.eps).amax() < 1e-14);
            assert!((sp.theta0 - theta_right(&st).unwrap()).amax() < 1e-12);
            assert!((sp.pi0 - momentum(&st, &cfg).unwrap()).amax() < 1e-10);
            assert!(sp.darboux_residual(&cfg).unwrap() < 1e-10);
        }
    }

    #[test]
    fn hj_round_trip_and_flow() {
        let mut s = Sampler::new(16);
        let cfg = cfg();
        for _ in 0..50 {
            let st = sample_state(&mut s, &cfg);
            let t = s.uniform(-3.0, 3.0);
            let Ok(sp) = hj_transform(&st, t, &cfg) else { continue };
            let back = hj_inverse(&sp, t, &cfg).unwrap();
            assert!((back.point.eps - st.point.eps).amax() < 1e-10 && (back.vel - st.vel).amax() < 1e-10);

            let (t1, t2) = (s.uniform(-1.0, 1.0), s.uniform(-1.0, 1.0));
            let whole = hj_transform(&st, t1 + t2, &cfg);
            let earlier = geodesic_exact(&st, -t1, &cfg).unwrap();
            let split = earlier.embedded().ok().map(|_| hj_transform(&earlier, t2, &cfg));
            if let (Ok(a), Some(Ok(b))) = (whole, split) {
                assert!((a.point0.eps - b.point0.eps).amax() < 1e-10);
                assert!((a.theta0 - b.theta0).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn theta_from_canonical_inverts_darboux_relation() {
        let mut s = Sampler::new(17);
        let cfg = SpaceConfig::new(1.2, 0.6).unwrap();
        for _ in 0..100 {
            let c = s.chart_point(cfg.radius, 0.9);
            let theta = s.cube(1.0);
            let pi = canonical_one_form(&c, Side::Right).unwrap().transpose() * theta * cfg.mass;
            assert!((theta_from_canonical(&c, &pi, &cfg) - theta).amax() < 1e-12);
        }
    }

    #[test]
    fn basic_brackets_at_points() {
        let cfg = cfg();
        let mut s = Sampler::new(18);
        for _ in 0..100 {
            let sp = SolutionPoint::from_canonical(s.chart_point(1.0, 0.8), s.cube(1.0), &cfg);
            let e1 = |c: &ChartCoords, _: &Vector3<f64>| c.eps.x;
            let e2 = |c: &ChartCoords, _: &Vector3<f64>| c.eps.y;
            let rho = |c: &ChartCoords, _: &Vector3<f64>| c.rho();
            assert!(poisson_bracket(&e1, &e2, &sp, &cfg).unwrap().abs() < 1e-10);
            assert!(poisson_bracket(&e1, &rho, &sp, &cfg).unwrap().abs() < 1e-10);
            for i in 0..3 {
                for j in 0..3 {
                    let ei = basic(BasicFunction::Eps(i), cfg);
                    let tj = basic(BasicFunction::Theta(j), cfg);
                    let got = poisson_bracket(&ei, &tj, &sp, &cfg).unwrap();
                    let want: f64 = (0..3).map(|k| levi_civita(i, j, k) * sp.point0.eps[k]).sum::<f64>()
                        + if i == j { sp.point0.rho() } else { 0.0 };
                    assert!((got - want).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn unit_mass_algebra_matches_display() {
        let rep = verify_basic_algebra(40, 3, 7, &cfg()).unwrap();
        assert!(rep.max_family_residual() < 1e-7, "{rep:?}");
        assert!(rep.antisymmetry_residual < 1e-12);
        assert!(rep.closure_residual < 1e-6);
        assert!(rep.jacobi_residual < 1e-6);
        assert_eq!(rep.jacobi_triples, 35);
    }

    #[test]
    fn mass_dependence_of_coefficients() {
        let cfg = SpaceConfig::new(1.5, 2.0).unwrap();
        let rep = verify_basic_algebra(20, 0, 3, &cfg).unwrap();
        for c in &rep.coefficients {
            assert!((c.measured - c.derived).abs() < 1e-7 * c.derived.abs().max(1.0), "{c:?}");
        }
    }
}
