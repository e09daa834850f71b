use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use su2sigma::classical::{geodesic_exact, hamiltonian, PhaseState};
use su2sigma::geometry::{canonical_one_form, dual_field, metric, Hemisphere};
use su2sigma::quantum::{apply_hamiltonian, psi, psi_direct, Backend, HamiltonianForm, SpectralLabel};
use su2sigma::sigma_group::{compose, inverse, SigmaGroupElement};
use su2sigma::{ChartCoords, S3Point, Side, SpaceConfig, C64};

fn small_eps(r: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(move |(a, b, c)| Vector3::new(a, b, c) * (0.2 * r))
}

fn element(cfg: SpaceConfig) -> impl Strategy<Value = SigmaGroupElement> {
    (small_eps(cfg.radius), -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(eps, a, b, c, z, phase)| {
        SigmaGroupElement::new(eps, Hemisphere::North, Vector3::new(a, b, c), z, C64::from_polar(1.0, phase), &cfg).unwrap()
    })
}

fn label() -> impl Strategy<Value = SpectralLabel> {
    (0i64..=6).prop_flat_map(|n| (Just(n), 0..=n)).prop_flat_map(|(n, l)| (Just(n), Just(l), -l..=l)).prop_map(|(n, l, m)| SpectralLabel::new(n, l, m).unwrap())
}

fn point() -> impl Strategy<Value = S3Point> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("nonzero", |(a, b, c, d)| a * a + b * b + c * c + d * d > 1e-3)
        .prop_map(|(a, b, c, d)| S3Point::from_components([a, b, c, d]).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_associative(a in element(SpaceConfig::default()), b in element(SpaceConfig::default()), c in element(SpaceConfig::default())) {
        let cfg = SpaceConfig::default();
        let lhs = compose(&compose(&a, &b, &cfg), &c, &cfg);
        let rhs = compose(&a, &compose(&b, &c, &cfg), &cfg);
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn inverse_is_two_sided(g in element(SpaceConfig::new(2.0, 0.5).unwrap())) {
        let cfg = SpaceConfig::new(2.0, 0.5).unwrap();
        let e = SigmaGroupElement::identity();
        prop_assert!(compose(&inverse(&g, &cfg), &g, &cfg).distance(&e) < 1e-12);
        prop_assert!(compose(&g, &inverse(&g, &cfg), &cfg).distance(&e) < 1e-12);
    }

    #[test]
    fn one_forms_dual_to_fields(eps in small_eps(1.5)) {
        let c = ChartCoords::north(eps, 1.5).unwrap();
        for side in [Side::Left, Side::Right] {
            let d = canonical_one_form(&c, side).unwrap() * dual_field(&c, side) - Matrix3::identity();
            prop_assert!(d.amax() < 1e-13);
        }
    }

    #[test]
    fn fields_orthonormal_in_metric(eps in small_eps(0.8)) {
        let c = ChartCoords::north(eps, 0.8).unwrap();
        let z = dual_field(&c, Side::Right);
        let gram = z.transpose() * metric(&c).unwrap() * z;
        prop_assert!((gram - Matrix3::identity()).amax() < 1e-13);
    }

    #[test]
    fn basis_polynomial_matches_angles(l in label(), p in point()) {
        let cfg = SpaceConfig::new(1.3, 1.0).unwrap();
        let f = psi(l, &cfg).unwrap();
        prop_assert!((f.eval(&p) - psi_direct(l, &p, &cfg).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn hamiltonian_forms_agree(l in label(), p in point()) {
        prop_assume!(p.components()[0].abs() > 0.1);
        let cfg = SpaceConfig::default();
        let f = psi(l, &cfg).unwrap();
        let a = apply_hamiltonian(&f, HamiltonianForm::ViaNu, Backend::Analytic, &cfg).unwrap().eval(&p);
        let b = apply_hamiltonian(&f, HamiltonianForm::LaplaceBeltrami, Backend::Analytic, &cfg).unwrap().eval(&p);
        prop_assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn closed_form_geodesic_conserves_energy(eps in small_eps(1.0), v in small_eps(3.0), t in 0.0..10.0f64) {
        let cfg = SpaceConfig::default();
        let s = PhaseState::new(ChartCoords::north(eps, 1.0).unwrap(), v).unwrap();
        let h0 = hamiltonian(&s, &cfg).unwrap();
        let (x, vv) = geodesic_exact(&s, t, &cfg).unwrap().embedded().unwrap();
        let h1 = 0.5 * cfg.mass * vv.norm_squared();
        prop_assert!((h1 - h0).abs() <= 1e-10 * h0.max(1e-300));
        prop_assert!((x.norm() - 1.0).abs() < 1e-12);
    }
}
