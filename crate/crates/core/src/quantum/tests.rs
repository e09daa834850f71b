use super::*;
use crate::quadrature::build_grid;
use crate::sampling::Sampler;

fn cfg(r: f64, m: f64) -> SpaceConfig {
    SpaceConfig::new(r, m).unwrap()
}

fn max_diff(a: &WaveFunction, b: &WaveFunction, pts: &[crate::S3Point]) -> f64 {
    pts.iter().map(|p| (a.eval(p) - b.eval(p)).norm()).fold(0.0, f64::max)
}

fn points(n: usize, seed: u64) -> Vec<crate::S3Point> {
    let mut s = Sampler::new(seed);
    (0..n).map(|_| s.point()).collect()
}

#[test]
fn labels_validate() {
    assert!(SpectralLabel::new(2, 3, 0).is_err());
    assert!(SpectralLabel::new(2, 1, -2).is_err());
    assert!(SpectralLabel::new(-1, 0, 0).is_err());
    assert_eq!(SpectralLabel::new(3, 2, -1).unwrap(), SpectralLabel { n: 3, l: 2, m_z: -1 });
    for n in 0..6 {
        assert_eq!(SpectralLabel::level(n).len(), degeneracy(n));
    }
    assert_eq!(SpectralLabel::all_up_to(5).len(), 91);
}

#[test]
fn spectrum_table() {
    let c = cfg(2.0, 0.5);
    let s = spectrum(20, &c).unwrap();
    assert_eq!(s.len(), 21);
    assert_eq!(s[3].energy, 15.0 / 4.0);
    assert_eq!(s[20].degeneracy, 441);
    assert!(spectrum(21, &c).is_err());
}

#[test]
fn polynomial_form_matches_special_functions() {
    let c = cfg(1.3, 1.0);
    let pts = points(40, 1);
    for label in SpectralLabel::all_up_to(6) {
        let f = psi(label, &c).unwrap();
        for p in &pts {
            let d = psi_direct(label, p, &c).unwrap();
            assert!((f.eval(p) - d).norm() < 1e-11, "{label}");
        }
    }
}

#[test]
fn closed_form_normalization_implies_pi() {
    let c = cfg(0.7, 1.0);
    let g = QuadGrid::default_for(&c).unwrap();
    for row in normalization_table(5, &g, &c).unwrap() {
        assert!(row.relative_diff < 1e-11, "{row:?}");
        assert!((row.implied_nu - PI).abs() < 1e-10, "{row:?}");
    }
}

#[test]
fn invariant_fields_commute_across_sides() {
    let c = cfg(1.0, 1.0);
    let f = psi(SpectralLabel::new(3, 1, 1).unwrap(), &c).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let a = apply_invariant_field(&apply_invariant_field(&f, Side::Left, j, Backend::Analytic).unwrap(), Side::Right, i, Backend::Analytic).unwrap();
            let b = apply_invariant_field(&apply_invariant_field(&f, Side::Right, i, Backend::Analytic).unwrap(), Side::Left, j, Backend::Analytic).unwrap();
            assert!(max_diff(&a, &b, &points(10, 2)) < 1e-12);
        }
    }
}

#[test]
fn backends_agree_on_basis_functions() {
    let c = cfg(1.4, 0.8);
    let pts = points(30, 3);
    for label in [SpectralLabel::new(1, 1, 0).unwrap(), SpectralLabel::new(4, 2, -1).unwrap(), SpectralLabel::new(5, 5, 3).unwrap()] {
        let f = psi(label, &c).unwrap();
        for i in 0..3 {
            let a = apply_nu(&f, i, Backend::Analytic, &c).unwrap();
            let b = apply_nu(&f, i, Backend::FiniteDifference, &c).unwrap();
            assert!(max_diff(&a, &b, &pts) < 1e-8, "{label} nu{i}");
            let a = apply_angular(&f, AngularComponent::Axis(i), Backend::Analytic).unwrap();
            let b = apply_angular(&f, AngularComponent::Axis(i), Backend::FiniteDifference).unwrap();
            assert!(max_diff(&a, &b, &pts) < 1e-8, "{label} J{i}");
        }
        let h = apply_hamiltonian(&f, HamiltonianForm::ViaNu, Backend::Analytic, &c).unwrap();
        for (form, backend) in [
            (HamiltonianForm::ViaNu, Backend::FiniteDifference),
            (HamiltonianForm::LaplaceBeltrami, Backend::Analytic),
            (HamiltonianForm::LaplaceBeltrami, Backend::FiniteDifference),
        ] {
            let o = apply_hamiltonian(&f, form, backend, &c).unwrap();
            let d = pts.iter().filter(|p| p.components()[0].abs() > 0.05).map(|p| (o.eval(p) - h.eval(p)).norm()).fold(0.0, f64::max);
            assert!(d < 1e-6, "{label} {form:?} {backend:?}: {d}");
        }
    }
}

#[test]
fn eigenvalue_equations_hold_pointwise() {
    let c = cfg(1.7, 1.3);
    let pts = points(20, 4);
    for label in SpectralLabel::all_up_to(4) {
        let f = psi(label, &c).unwrap();
        let h = apply_hamiltonian(&f, HamiltonianForm::ViaNu, Backend::Analytic, &c).unwrap();
        let j2 = apply_angular(&f, AngularComponent::Squared, Backend::Analytic).unwrap();
        let j3 = apply_angular(&f, AngularComponent::THIRD, Backend::Analytic).unwrap();
        let l = label.l as f64;
        assert!(max_diff(&h, &f.scale(re(label.energy(&c))), &pts) < 1e-11, "{label}");
        assert!(max_diff(&j2, &f.scale(re(l * (l + 1.0))), &pts) < 1e-11, "{label}");
        assert!(max_diff(&j3, &f.scale(re(label.m_z as f64)), &pts) < 1e-11, "{label}");
    }
}

#[test]
fn rotation_generator_equals_chart_form() {
    let c = cfg(2.5, 1.0);
    let pts = points(20, 5);
    let f = psi(SpectralLabel::new(4, 3, -2).unwrap(), &c).unwrap();
    for i in 0..3 {
        let a = apply_rotation_generator(&f, i, Backend::Analytic).unwrap();
        let b = apply_chart_rotation(&f, i, Backend::Analytic).unwrap();
        let d = apply_chart_rotation(&f, i, Backend::FiniteDifference).unwrap();
        assert!(max_diff(&a, &b, &pts) < 1e-12);
        assert!(max_diff(&a, &d, &pts) < 1e-8);
    }
}

#[test]
fn analytic_backend_needs_polynomial() {
    let f = WaveFunction::from_fn(1.0, |_| re(1.0));
    assert_eq!(apply_nu(&f, 0, Backend::Analytic, &SpaceConfig::default()).unwrap_err(), Error::NoAnalyticForm);
    assert!(apply_nu(&f, 0, Backend::FiniteDifference, &SpaceConfig::default()).is_ok());
}

#[test]
fn polarized_wavefunction_reduces_to_quotient_operators() {
    let c = cfg(1.2, 0.9);
    let mut s = Sampler::new(6);
    let f = psi(SpectralLabel::new(3, 2, 1).unwrap(), &c).unwrap();
    for _ in 0..10 {
        let g = crate::sigma_group::random_element(&mut s, &c);
        let chk = polarization_check(&f, &g, &c).unwrap();
        assert!(chk.max() < 1e-8, "{chk:?}");
    }
}

#[test]
fn wavefunction_csv() {
    let c = SpaceConfig::default();
    let g = build_grid(2, 2, 4, &c).unwrap();
    let mut buf = Vec::new();
    write_wavefunction_csv(&psi(SpectralLabel::new(0, 0, 0).unwrap(), &c).unwrap(), &g, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 17);
}
