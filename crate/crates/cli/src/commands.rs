//! One function per subcommand. Each returns an [`Outcome`] holding its
//! checks, the report payload and, where meaningful, a CSV table.

use anyhow::Context;
use clap::{Args, ValueEnum};
use nalgebra::Vector3;
use serde_json::json;
use su2sigma::classical::{
    alternative_frequency, angular_frequency, geodesic_equation_residual, geodesic_exact, geodesic_integrate,
    verify_basic_algebra, PhaseState,
};
use su2sigma::quadrature::{build_grid, volume, QuadGrid};
use su2sigma::quantum::analysis::{
    backend_agreement, eigen_residuals, gram, hermiticity, leakage, operator_algebra, write_basis_csv, Basis, EigenRow,
};
use su2sigma::quantum::contraction::{contraction_study, default_test_functions};
use su2sigma::quantum::{
    normalization_table, psi, spectrum, write_wavefunction_csv, Backend, HamiltonianForm, SpectralLabel,
    MAX_SPECTRUM_LEVEL,
};
use su2sigma::sigma_group::verify_group;
use su2sigma::{ChartCoords, Error as CoreError};

use crate::config::{parse_list, parse_vec3, usage, RunConfig};
use crate::report::{checks_csv, Check, Outcome};

/// Core errors caused by the caller's input become usage errors.
fn input(e: CoreError) -> anyhow::Error {
    match e {
        CoreError::InvalidArgument(_) | CoreError::Domain(_) | CoreError::InvalidLabel { .. } | CoreError::InvalidGrid { .. } => {
            usage(e.to_string())
        }
        other => other.into(),
    }
}

fn grid(cfg: &RunConfig) -> anyhow::Result<QuadGrid> {
    let [a, b, c] = cfg.grid;
    build_grid(a, b, c, &cfg.space()?).map_err(input)
}

fn csv_string(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, Args)]
pub struct GeodesicArgs {
    /// Initial chart position [default: (0.3, -0.2, 0.1) R]
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    pub eps0: Option<String>,
    /// Initial chart velocity [default: (0.4, 0.5, -0.3) R]
    #[arg(long, value_name = "X,Y,Z", allow_hyphen_values = true)]
    pub vel0: Option<String>,
    /// Integration time [default: 20/omega, or 20 for a state at rest]
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    /// Sample times for the geodesic-equation residual
    #[arg(long, default_value_t = 50)]
    pub residual_samples: usize,
}

impl Default for GeodesicArgs {
    fn default() -> Self {
        Self { eps0: None, vel0: None, t_end: None, steps: 2000, residual_samples: 50 }
    }
}

pub fn geodesic(cfg: &RunConfig, args: &GeodesicArgs) -> anyhow::Result<Outcome> {
    let space = cfg.space()?;
    let r = space.radius;
    let eps0 = match &args.eps0 {
        Some(s) => Vector3::from(parse_vec3(s, "eps0")?),
        None => Vector3::new(0.3, -0.2, 0.1) * r,
    };
    let vel0 = match &args.vel0 {
        Some(s) => Vector3::from(parse_vec3(s, "vel0")?),
        None => Vector3::new(0.4, 0.5, -0.3) * r,
    };
    let point = ChartCoords::north(eps0, r).map_err(|e| usage(format!("bad initial state: {e}")))?;
    let state = PhaseState::new(point, vel0).map_err(|e| usage(format!("bad initial state: {e}")))?;
    let omega = angular_frequency(&state).map_err(|e| usage(format!("bad initial state: {e}")))?;
    let t_end = args.t_end.unwrap_or(if omega > 0.0 { 20.0 / omega } else { 20.0 });
    if args.residual_samples == 0 {
        return Err(usage("--residual-samples must be >= 1"));
    }

    let traj = geodesic_integrate(&state, t_end, args.steps, &space).map_err(input)?;
    let end = traj.states.last().expect("trajectory has the initial state");
    let exact = geodesic_exact(&state, t_end, &space)?;
    let vel_scale = if omega > 0.0 { omega * r } else { 1.0 };
    let endpoint = ((end.point.eps - exact.point.eps).amax() / r).max((end.vel - exact.vel).amax() / vel_scale);
    let same_hemisphere = end.point.hemisphere == exact.point.hemisphere;

    let mut checks = vec![
        Check::at_most("energy_drift", traj.energy_drift(), cfg.tol("energy_drift")),
        Check::at_most("theta_drift", traj.theta_drift(), cfg.tol("theta_drift")),
        Check::at_most("endpoint", endpoint, cfg.tol("endpoint")),
        Check::holds("endpoint_hemisphere", same_hemisphere),
    ];
    let mut residuals = serde_json::Value::Null;
    if omega > 0.0 {
        let tol = cfg.tol("geodesic_residual");
        let res = geodesic_equation_residual(&state, omega, args.residual_samples)?;
        let alt_omega = alternative_frequency(&state, &space)?;
        let alt = geodesic_equation_residual(&state, alt_omega, args.residual_samples)?;
        checks.push(Check::at_most("geodesic_residual", res.max_residual, tol));
        checks.push(Check::holds("geodesic_residual_samples", res.passes(tol)));
        checks.push(Check::holds("alternative_frequency_fails", !alt.passes(tol)));
        residuals = json!({
            "omega": res,
            "alternative_omega": alt,
            "frequency_ratio": alt_omega / omega,
        });
    }
    let data = json!({
        "eps0": [eps0.x, eps0.y, eps0.z],
        "vel0": [vel0.x, vel0.y, vel0.z],
        "omega": omega,
        "t_end": t_end,
        "steps": args.steps,
        "energy_drift": traj.energy_drift(),
        "theta_drift": traj.theta_drift(),
        "endpoint_deviation": endpoint,
        "accuracy_warning": traj.accuracy_warning,
        "geodesic_residuals": residuals,
    });
    let table = csv_string(|w| traj.write_csv(w))?;
    Ok(Outcome { command: "geodesic".into(), checks, data, table: Some(table) })
}

#[derive(Debug, Clone, Args)]
pub struct GroupArgs {
    /// Random element triples for the group axioms
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Elements on which fields, brackets and invariants are checked
    #[arg(long, default_value_t = 100)]
    pub field_points: usize,
}

impl Default for GroupArgs {
    fn default() -> Self {
        Self { samples: 1000, field_points: 100 }
    }
}

pub fn groupcheck(cfg: &RunConfig, args: &GroupArgs) -> anyhow::Result<Outcome> {
    if args.samples == 0 {
        return Err(usage("--samples must be >= 1"));
    }
    if args.field_points == 0 {
        return Err(usage("--field-points must be >= 1"));
    }
    let r = verify_group(args.samples, args.field_points, cfg.seed, &cfg.space()?).map_err(input)?;
    let (g, f, b, q, n) = (cfg.tol("group"), cfg.tol("fields"), cfg.tol("brackets"), cfg.tol("quantization"), cfg.tol("noether"));
    let checks = vec![
        Check::at_most("associativity", r.associativity, g),
        Check::at_most("identity", r.identity, g),
        Check::at_most("inverse", r.inverse, g),
        Check::at_most("involution", r.involution, g),
        Check::at_most("left_fields_vs_group_law", r.left_fields_vs_group_law, f),
        Check::at_most("right_fields_vs_group_law", r.right_fields_vs_group_law, f),
        Check::at_most("right_brackets", r.right_bracket_residual, b),
        Check::at_most("left_brackets", r.left_bracket_residual, b),
        Check::at_most("mixed_brackets", r.mixed_bracket_residual, b),
        Check::at_most("theta_xi", r.theta_xi, q),
        Check::at_most("theta_left_z", r.theta_left, q),
        Check::at_most("dtheta_left_z", r.dtheta_z, q),
        Check::at_most("dtheta_xi", r.dtheta_xi, q),
        Check::at_most("dtheta_exact_block", r.dtheta_exact_block, q),
        Check::at_least("dtheta_left_nu1_nonzero", r.dtheta_nu1_min, q),
        Check::at_most("noether_table", r.noether_table, n),
        Check::at_most("noether_z_flow", r.noether_z_flow, n),
        Check::at_most("quotient_darboux", r.quotient_darboux, q),
        Check::at_most("quotient_momentum", r.quotient_momentum, q),
        Check::at_most("quotient_symplectic", r.quotient_symplectic, q),
    ];
    Ok(Outcome { command: "groupcheck".into(), checks, data: serde_json::to_value(&r)?, table: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    Analytic,
    Fd,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormChoice {
    Nu,
    Laplacian,
}

impl From<FormChoice> for HamiltonianForm {
    fn from(f: FormChoice) -> Self {
        match f {
            FormChoice::Nu => HamiltonianForm::ViaNu,
            FormChoice::Laplacian => HamiltonianForm::LaplaceBeltrami,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Highest level listed
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    /// Highest level whose eigenfunctions are checked [default: min(n-max, 5)]
    #[arg(long)]
    pub check_n_max: Option<usize>,
    #[arg(long, value_enum, default_value = "both")]
    pub backend: BackendChoice,
    /// Form of the Hamiltonian used for the eigen-residuals
    #[arg(long, value_enum, default_value = "nu")]
    pub form: FormChoice,
    /// Random basis combinations compared across backends
    #[arg(long, default_value_t = 20)]
    pub agreement_functions: usize,
    #[arg(long, default_value_t = 50)]
    pub agreement_points: usize,
}

impl Default for SpectrumArgs {
    fn default() -> Self {
        Self {
            n_max: 5,
            check_n_max: None,
            backend: BackendChoice::Both,
            form: FormChoice::Nu,
            agreement_functions: 20,
            agreement_points: 50,
        }
    }
}

fn max_of(rows: &[EigenRow], f: impl Fn(&EigenRow) -> f64) -> f64 {
    rows.iter().map(f).fold(0.0, su2sigma::par::nan_max)
}

pub fn spectrum_cmd(cfg: &RunConfig, args: &SpectrumArgs) -> anyhow::Result<Outcome> {
    let space = cfg.space()?;
    if args.n_max > MAX_SPECTRUM_LEVEL {
        return Err(usage(format!("--n-max must be <= {MAX_SPECTRUM_LEVEL}")));
    }
    let check_n = args.check_n_max.unwrap_or(args.n_max.min(5));
    if check_n > args.n_max {
        return Err(usage("--check-n-max cannot exceed --n-max"));
    }
    let levels = spectrum(args.n_max, &space).map_err(input)?;
    let grid = grid(cfg)?;
    let basis = Basis::build(check_n, grid, &space).map_err(input)?;
    let form = HamiltonianForm::from(args.form);

    let mut checks = Vec::new();
    let mut analytic_rows = Vec::new();
    let mut fd_rows = Vec::new();
    if args.backend != BackendChoice::Fd {
        analytic_rows = eigen_residuals(&basis, Backend::Analytic, form)?;
        checks.push(Check::at_most("h_residual_analytic", max_of(&analytic_rows, |r| r.h_residual), cfg.tol("spectrum_analytic")));
        checks.push(Check::at_most("j2_residual_analytic", max_of(&analytic_rows, |r| r.j2_residual), cfg.tol("angular")));
        checks.push(Check::at_most("j3_residual_analytic", max_of(&analytic_rows, |r| r.j3_residual), cfg.tol("angular")));
    }
    if args.backend != BackendChoice::Analytic {
        fd_rows = eigen_residuals(&basis, Backend::FiniteDifference, form)?;
        let tol = cfg.tol("spectrum_fd");
        checks.push(Check::at_most("h_residual_fd", max_of(&fd_rows, |r| r.h_residual), tol));
        checks.push(Check::at_most("j2_residual_fd", max_of(&fd_rows, |r| r.j2_residual), tol));
        checks.push(Check::at_most("j3_residual_fd", max_of(&fd_rows, |r| r.j3_residual), tol));
    }
    let rows = if analytic_rows.is_empty() { &fd_rows } else { &analytic_rows };
    checks.push(Check::at_most("norm_residual", max_of(rows, |r| r.norm_residual), cfg.tol("gram")));

    let norms = normalization_table(check_n, &basis.grid, &space)?;
    let pi = std::f64::consts::PI;
    let norm_err = norms.iter().map(|r| r.relative_diff).fold(0.0, su2sigma::par::nan_max);
    let nu_err = norms.iter().map(|r| ((r.implied_nu - pi) / pi).abs()).fold(0.0, su2sigma::par::nan_max);
    checks.push(Check::at_most("normalization", norm_err, cfg.tol("normalization")));
    checks.push(Check::at_most("implied_nu_vs_pi", nu_err, cfg.tol("normalization")));

    let mut agreement = serde_json::Value::Null;
    if args.agreement_functions > 0 && args.agreement_points > 0 {
        let a = backend_agreement(args.agreement_functions, args.agreement_points, check_n, cfg.seed, &space)?;
        let rotation = a.get("rotation vs chart form").unwrap_or(f64::NAN);
        let rest = a.comparisons.iter().filter(|(n, _)| n != "rotation vs chart form").map(|(_, v)| *v).fold(0.0, su2sigma::par::nan_max);
        checks.push(Check::at_most("rotation_vs_chart_form", rotation, cfg.tol("rotation")));
        checks.push(Check::at_most("backend_agreement", rest, cfg.tol("backend")));
        agreement = serde_json::to_value(&a)?;
    }

    let data = json!({
        "levels": levels,
        "check_n_max": check_n,
        "form": format!("{form:?}"),
        "analytic": analytic_rows,
        "finite_difference": fd_rows,
        "normalization": norms,
        "backend_agreement": agreement,
    });
    let table = csv_string(|w| write_basis_csv(rows, w))?;
    Ok(Outcome { command: "spectrum".into(), checks, data, table: Some(table) })
}

#[derive(Debug, Clone, Args)]
pub struct OrthoArgs {
    #[arg(long, default_value_t = 5)]
    pub n_max: usize,
    /// Random basis pairs for the hermiticity check
    #[arg(long, default_value_t = 50)]
    pub pairs: usize,
    /// Truncation level of the operator-algebra check
    #[arg(long, default_value_t = 4)]
    pub algebra_n_max: usize,
}

impl Default for OrthoArgs {
    fn default() -> Self {
        Self { n_max: 5, pairs: 50, algebra_n_max: 4 }
    }
}

pub fn orthonormality(cfg: &RunConfig, args: &OrthoArgs) -> anyhow::Result<Outcome> {
    let space = cfg.space()?;
    if args.n_max > MAX_SPECTRUM_LEVEL {
        return Err(usage(format!("--n-max must be <= {MAX_SPECTRUM_LEVEL}")));
    }
    if args.algebra_n_max > args.n_max {
        return Err(usage("--algebra-n-max cannot exceed --n-max"));
    }
    let grid = grid(cfg)?;
    let vol_err = (grid.total_weight() / volume(&space) - 1.0).abs();
    let basis = Basis::build(args.n_max, grid, &space).map_err(input)?;
    let g = gram(&basis);
    let herm = hermiticity(&basis, args.pairs, cfg.seed, Backend::Analytic).map_err(input)?;
    let leak = leakage(&basis)?;
    let alg = operator_algebra(&basis, args.algebra_n_max).map_err(input)?;
    let checks = vec![
        Check::at_most("volume", vol_err, cfg.tol("volume")),
        Check::at_most("gram", g.max_deviation(), cfg.tol("gram")),
        Check::at_most("hermiticity", herm.max(), cfg.tol("hermiticity")),
        Check::at_most("leakage", leak.max(), cfg.tol("leakage")),
        Check::at_most("commutator_families", alg.max_family_residual(), cfg.tol("algebra")),
        Check::at_most("su2_structure", alg.max_su2_error(), cfg.tol("algebra")),
    ];
    let data = json!({
        "volume_relative_error": vol_err,
        "gram": g,
        "hermiticity": herm,
        "leakage": leak,
        "algebra": alg,
    });
    Ok(Outcome { command: "orthonormality".into(), checks, data, table: None })
}

#[derive(Debug, Clone, Args)]
pub struct WavefnArgs {
    /// Spectral label n,l,m_z
    #[arg(long, default_value = "1,0,0", allow_hyphen_values = true)]
    pub label: String,
}

impl Default for WavefnArgs {
    fn default() -> Self {
        Self { label: "1,0,0".into() }
    }
}

fn parse_label(s: &str) -> anyhow::Result<SpectralLabel> {
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| usage(format!("bad label entry {p:?}"))))
        .collect::<anyhow::Result<_>>()?;
    let [n, l, m] = <[i64; 3]>::try_from(parts).map_err(|_| usage(format!("label must be n,l,m_z, got {s:?}")))?;
    SpectralLabel::new(n, l, m).map_err(input)
}

pub fn wavefn(cfg: &RunConfig, args: &WavefnArgs) -> anyhow::Result<Outcome> {
    let space = cfg.space()?;
    let label = parse_label(&args.label)?;
    if label.n > MAX_SPECTRUM_LEVEL {
        return Err(usage(format!("n must be <= {MAX_SPECTRUM_LEVEL}")));
    }
    let grid = grid(cfg)?;
    let f = psi(label, &space).map_err(input)?;
    let values = f.sample(&grid);
    let norm = grid.norm(&values);
    let checks = vec![Check::at_most("norm_residual", (norm - 1.0).abs(), cfg.tol("gram"))];
    let data = json!({
        "label": label,
        "energy": label.energy(&space),
        "nodes": grid.len(),
        "norm": norm,
    });
    let table = csv_string(|w| write_wavefunction_csv(&f, &grid, w))?;
    Ok(Outcome { command: "wavefn".into(), checks, data, table: Some(table) })
}

#[derive(Debug, Clone, Args)]
pub struct ContractArgs {
    /// Support radius of the test functions
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    /// Sphere radii as multiples of r0
    #[arg(long, default_value = "10,100,1000")]
    pub radii: String,
}

impl Default for ContractArgs {
    fn default() -> Self {
        Self { r0: 1.0, radii: "10,100,1000".into() }
    }
}

pub fn contract(cfg: &RunConfig, args: &ContractArgs) -> anyhow::Result<Outcome> {
    let space = cfg.space()?;
    let radii: Vec<f64> = parse_list(&args.radii, "radii")?.into_iter().map(|k| k * args.r0).collect();
    let r = contraction_study(&radii, &default_test_functions(args.r0), args.r0, space.mass).map_err(input)?;
    let tol = cfg.tol("contraction_slope");
    let checks = vec![
        Check::holds("nu_deviation_decreasing", r.nu_decreasing()),
        Check::holds("h_deviation_decreasing", r.h_decreasing()),
        Check::at_most("nu_slope", r.nu_slope, -1.0 + tol),
        Check::at_most("h_slope", r.h_slope, -1.0 + tol),
        Check::at_most("eps_deviation", r.eps_deviation.iter().copied().fold(0.0, f64::max), 0.0),
    ];
    let mut table = String::from("radius,nu_deviation,h_deviation,eps_deviation\n");
    for (k, rad) in r.radii.iter().enumerate() {
        table.push_str(&format!("{rad:e},{:e},{:e},{:e}\n", r.nu_deviation[k], r.h_deviation[k], r.eps_deviation[k]));
    }
    Ok(Outcome { command: "contract".into(), checks, data: serde_json::to_value(&r)?, table: Some(table) })
}

#[derive(Debug, Clone, Args)]
pub struct PoissonArgs {
    /// Random phase-space points for the bracket families
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Points at which the Jacobi identity is checked on all basis triples
    #[arg(long, default_value_t = 10)]
    pub jacobi_points: usize,
}

impl Default for PoissonArgs {
    fn default() -> Self {
        Self { samples: 100, jacobi_points: 10 }
    }
}

pub fn poisson(cfg: &RunConfig, args: &PoissonArgs) -> anyhow::Result<Outcome> {
    if args.samples == 0 {
        return Err(usage("--samples must be >= 1"));
    }
    let r = verify_basic_algebra(args.samples, args.jacobi_points, cfg.seed, &cfg.space()?).map_err(input)?;
    let tol = cfg.tol("poisson");
    let mut checks: Vec<Check> = r.family_residuals.iter().map(|(name, v)| Check::at_most(name.clone(), *v, tol)).collect();
    checks.push(Check::at_most("antisymmetry", r.antisymmetry_residual, tol));
    if args.jacobi_points > 0 {
        checks.push(Check::at_most("jacobi", r.jacobi_residual, cfg.tol("jacobi")));
    }
    checks.push(Check::at_most("closure", r.closure_residual, cfg.tol("closure")));
    Ok(Outcome { command: "poisson".into(), checks, data: serde_json::to_value(&r)?, table: None })
}

/// Every suite at its defaults, combined into one report.
pub fn all(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let parts = [
        geodesic(cfg, &GeodesicArgs::default()).context("geodesic")?,
        groupcheck(cfg, &GroupArgs::default()).context("groupcheck")?,
        poisson(cfg, &PoissonArgs::default()).context("poisson")?,
        spectrum_cmd(cfg, &SpectrumArgs::default()).context("spectrum")?,
        orthonormality(cfg, &OrthoArgs::default()).context("orthonormality")?,
        wavefn(cfg, &WavefnArgs::default()).context("wavefn")?,
        contract(cfg, &ContractArgs::default()).context("contract")?,
    ];
    let mut checks = Vec::new();
    let mut table = String::from("suite,check,value,bound,relation,passed\n");
    let mut suites = serde_json::Map::new();
    for p in &parts {
        for c in &p.checks {
            checks.push(Check { name: format!("{}/{}", p.command, c.name), ..c.clone() });
        }
        table.push_str(checks_csv(&p.command, &p.checks).split_once('\n').map_or("", |(_, rest)| rest));
        suites.insert(p.command.clone(), json!({ "passed": p.passed(), "checks": p.checks, "data": p.data }));
    }
    Ok(Outcome { command: "all".into(), checks, data: serde_json::Value::Object(suites), table: Some(table) })
}
