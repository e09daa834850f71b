//! The twelve acceptance criteria at their stated tolerances. Prints one
//! PASS/FAIL line per criterion on stderr (uncaptured) and fails if any
//! criterion fails.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use su2sigma::classical::{
    alternative_frequency, angular_frequency, geodesic_equation_residual, geodesic_exact, geodesic_integrate,
    verify_basic_algebra, PhaseState,
};
use su2sigma::quadrature::{build_grid, volume};
use su2sigma::quantum::analysis::{eigen_residuals, gram, hermiticity, Basis};
use su2sigma::quantum::contraction::{contraction_study, default_test_functions};
use su2sigma::quantum::{Backend, HamiltonianForm};
use su2sigma::sigma_group::verify_group;
use su2sigma::{ChartCoords, SpaceConfig};

const SEED: u64 = 20240917;

struct Ledger(Vec<(usize, bool)>);

impl Ledger {
    fn record(&mut self, id: usize, ok: bool, elapsed: Duration, detail: String) {
        let line = format!("{} criterion {id:>2} ({:.2} s): {detail}\n", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
        std::io::stderr().write_all(line.as_bytes()).unwrap();
        self.0.push((id, ok));
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

#[test]
fn acceptance_criteria() {
    let cfg = SpaceConfig::default();
    let mut ledger = Ledger(Vec::new());

    // 1. volume
    let (vol_err, t) = timed(|| {
        let grid = build_grid(24, 16, 32, &cfg).unwrap();
        (grid.total_weight() / volume(&cfg) - 1.0).abs()
    });
    let ok = vol_err < 1e-12 && t < Duration::from_secs(1);
    ledger.record(1, ok, t, format!("volume relative error {vol_err:.2e} (< 1e-12, < 1 s)"));

    // 2. spectrum
    let ((h_an, ang, h_fd), t) = timed(|| {
        let basis = Basis::build(5, build_grid(24, 16, 32, &cfg).unwrap(), &cfg).unwrap();
        let an = eigen_residuals(&basis, Backend::Analytic, HamiltonianForm::ViaNu).unwrap();
        let fd = eigen_residuals(&basis, Backend::FiniteDifference, HamiltonianForm::ViaNu).unwrap();
        let max = |rows: &[su2sigma::quantum::analysis::EigenRow], f: &dyn Fn(&su2sigma::quantum::analysis::EigenRow) -> f64| {
            rows.iter().map(f).fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) })
        };
        (max(&an, &|r| r.h_residual), max(&an, &|r| r.j2_residual.max(r.j3_residual)), max(&fd, &|r| r.h_residual))
    });
    let ok = h_an < 1e-7 && h_fd < 1e-4 && ang < 1e-7 && t < Duration::from_secs(30);
    ledger.record(2, ok, t, format!("H residual analytic {h_an:.2e}, fd {h_fd:.2e}, J2/J3 {ang:.2e} (n <= 5, < 30 s)"));

    // 3. orthonormality
    let (g, t) = timed(|| {
        let basis = Basis::build(5, build_grid(24, 16, 32, &cfg).unwrap(), &cfg).unwrap();
        gram(&basis)
    });
    let ok = g.size == 91 && g.max_deviation() < 1e-9 && t < Duration::from_secs(60);
    ledger.record(3, ok, t, format!("{} functions, max Gram deviation {:.2e} (< 1e-9, < 60 s)", g.size, g.max_deviation()));

    // 4. group axioms
    let (r, t) = timed(|| verify_group(1000, 1, SEED, &cfg).unwrap());
    let worst = r.associativity.max(r.inverse).max(r.identity);
    let ok = worst < 1e-12 && t < Duration::from_secs(1);
    ledger.record(4, ok, t, format!("associativity {:.2e}, inverse {:.2e} over 1000 triples (< 1e-12, < 1 s)", r.associativity, r.inverse));

    // 5 and 9 share the per-element suite
    let (r, t) = timed(|| verify_group(100, 100, SEED, &cfg).unwrap());
    let brackets = r.right_bracket_residual.max(r.left_bracket_residual);
    let ok = brackets < 1e-7 && r.mixed_bracket_residual < 1e-7 && t < Duration::from_secs(5);
    ledger.record(
        5,
        ok,
        t,
        format!("right/left bracket tables {brackets:.2e}, mixed {:.2e} (< 1e-7, < 5 s)", r.mixed_bracket_residual),
    );

    // 6. Poisson algebra at m = 1
    let (p, t) = timed(|| verify_basic_algebra(100, 10, SEED, &cfg).unwrap());
    let fam = p.max_family_residual();
    let ok = p.family_residuals.len() == 5 && fam < 1e-7 && p.jacobi_residual < 1e-6 && !p.coefficients.is_empty();
    let coeffs: Vec<String> = p.coefficients.iter().map(|c| format!("{} = {:.6}", c.bracket, c.measured)).collect();
    ledger.record(
        6,
        ok,
        t,
        format!("families {fam:.2e} (< 1e-7), Jacobi {:.2e} (< 1e-6); measured {}", p.jacobi_residual, coeffs.join(", ")),
    );

    // 7 and 8: the geodesic
    let state = PhaseState::new(
        ChartCoords::north(Vector3::new(0.3, -0.2, 0.1), 1.0).unwrap(),
        Vector3::new(0.4, 0.5, -0.3),
    )
    .unwrap();
    let omega = angular_frequency(&state).unwrap();
    let t_end = 20.0 / omega;
    let ((de, dth, dend), t) = timed(|| {
        let traj = geodesic_integrate(&state, t_end, 2000, &cfg).unwrap();
        let end = traj.states.last().unwrap();
        let exact = geodesic_exact(&state, t_end, &cfg).unwrap();
        let dend = (end.point.eps - exact.point.eps).amax().max((end.vel - exact.vel).amax() / omega);
        (traj.energy_drift(), traj.theta_drift(), dend)
    });
    let ok = de < 1e-8 && dth < 1e-8 && dend < 1e-8;
    ledger.record(7, ok, t, format!("energy drift {de:.2e}, theta drift {dth:.2e}, endpoint {dend:.2e} (< 1e-8)"));

    let ((res, alt), t) = timed(|| {
        let res = geodesic_equation_residual(&state, omega, 50).unwrap();
        let alt = geodesic_equation_residual(&state, alternative_frequency(&state, &cfg).unwrap(), 50).unwrap();
        (res, alt)
    });
    let ok = res.passes(1e-7) && !alt.passes(1e-7);
    ledger.record(
        8,
        ok,
        t,
        format!("residual {:.2e} (< 1e-7); alternative frequency residual {:.2e} fails", res.max_residual, alt.max_residual),
    );

    // 9. quantization form and Noether table
    let q = [r.theta_xi, r.theta_left, r.dtheta_z, r.noether_table].into_iter().fold(0.0, f64::max);
    let ok = q < 1e-8 && r.field_points == 100;
    ledger.record(9, ok, Duration::ZERO, format!("Theta(Xi), i_Z Theta, i_Z dTheta, Noether table {q:.2e} at 100 elements (< 1e-8)"));

    // 10. contraction
    let (c, t) = timed(|| contraction_study(&[10.0, 100.0, 1000.0], &default_test_functions(1.0), 1.0, 1.0).unwrap());
    let ok = c.passes(0.3);
    ledger.record(
        10,
        ok,
        t,
        format!(
            "nu deviation at 1000 r0 {:.2e}, slope {:.3}; H deviation {:.2e}, slope {:.3}; eps deviation {:?}",
            c.nu_deviation.last().unwrap(),
            c.nu_slope,
            c.h_deviation.last().unwrap(),
            c.h_slope,
            c.eps_deviation
        ),
    );

    // 11. self-adjointness
    let (h, t) = timed(|| {
        let basis = Basis::build(5, build_grid(24, 16, 32, &cfg).unwrap(), &cfg).unwrap();
        hermiticity(&basis, 50, SEED, Backend::Analytic).unwrap()
    });
    let ok = h.max() < 1e-8 && h.pairs == 50;
    ledger.record(11, ok, t, format!("{} observables on 50 pairs, max {:.2e} (< 1e-8)", h.operators.len(), h.max()));

    // 12. full CLI run
    let (out, t) = timed(|| Command::new(env!("CARGO_BIN_EXE_su2sigma")).arg("all").output().unwrap());
    let ok = out.status.code() == Some(0) && t < Duration::from_secs(300);
    ledger.record(12, ok, t, format!("`su2sigma all` exit {:?} (0, < 300 s)", out.status.code()));

    let failed: Vec<usize> = ledger.0.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    assert_eq!(ledger.0.len(), 12);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
