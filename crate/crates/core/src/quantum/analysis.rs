//! Verification suites over the eigenbasis: eigen-residuals, Gram matrix,
//! hermiticity, level invariance, operator algebra and backend agreement.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{
    apply_angular, apply_chart_rotation, apply_hamiltonian, apply_invariant_field, apply_nu, apply_position, apply_rotation_generator, psi,
    AngularComponent, Backend, HamiltonianForm, Observable, Position, SpectralLabel, WaveFunction, I,
};
use crate::error::{Error, Result};
use crate::geometry::{levi_civita, Side, SpaceConfig};
use crate::par::nan_max;
use crate::quadrature::QuadGrid;
use crate::sampling::Sampler;
use crate::C64;

/// Basis functions with n ≤ n_max and their values on a quadrature grid.
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct Basis {
    pub labels: Vec<SpectralLabel>,
    pub funcs: Vec<WaveFunction>,
    pub values: Vec<Vec<C64>>,
    pub grid: QuadGrid,
    pub cfg: SpaceConfig,
}

impl Basis {
    pub fn build(n_max: usize, grid: QuadGrid, cfg: &SpaceConfig) -> Result<Self> {
        let labels = SpectralLabel::all_up_to(n_max);
        let funcs = labels.iter().map(|l| psi(*l, cfg)).collect::<Result<Vec<_>>>()?;
        let values = funcs.iter().map(|f| f.sample(&grid)).collect();
        Ok(Self { labels, funcs, values, grid, cfg: *cfg })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn level_indices(&self, n: usize) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.labels[k].n == n).collect()
    }

    fn max_level(&self) -> usize {
        self.labels.iter().map(|l| l.n).max().unwrap_or(0)
    }

    fn norm(&self, v: &[C64]) -> f64 {
        self.grid.norm(v)
    }
}

/// ‖a − λψ‖ / (‖ψ‖ · max(1, |λ|)).
fn eigen_residual(grid: &QuadGrid, applied: &[C64], psi: &[C64], lambda: f64) -> f64 {
    let diff: Vec<C64> = applied.iter().zip(psi).map(|(a, p)| a - p * lambda).collect();
    grid.norm(&diff) / (grid.norm(psi) * lambda.abs().max(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenRow {
    pub label: SpectralLabel,
    pub energy: f64,
    pub norm_residual: f64,
    pub h_residual: f64,
    pub j2_residual: f64,
    pub j3_residual: f64,
}

impl EigenRow {
    pub fn max_operator_residual(&self) -> f64 {
        nan_max(self.h_residual, nan_max(self.j2_residual, self.j3_residual))
    }
}

/// Relative residuals of Ĥ, Ĵ², Ĵ₃ on every basis function.
pub fn eigen_residuals(basis: &Basis, backend: Backend, form: HamiltonianForm) -> Result<Vec<EigenRow>> {
    let g = &basis.grid;
    let mut rows = Vec::with_capacity(basis.len());
    for (k, label) in basis.labels.iter().enumerate() {
        let (f, v) = (&basis.funcs[k], &basis.values[k]);
        let e = label.energy(&basis.cfg);
        let l = label.l as f64;
        let h = apply_hamiltonian(f, form, backend, &basis.cfg)?.sample(g);
        let j2 = apply_angular(f, AngularComponent::Squared, backend)?.sample(g);
        let j3 = apply_angular(f, AngularComponent::THIRD, backend)?.sample(g);
        rows.push(EigenRow {
            label: *label,
            energy: e,
            norm_residual: (basis.norm(v) - 1.0).abs(),
            h_residual: eigen_residual(g, &h, v, e),
            j2_residual: eigen_residual(g, &j2, v, l * (l + 1.0)),
            j3_residual: eigen_residual(g, &j3, v, label.m_z as f64),
        });
    }
    Ok(rows)
}

/// CSV with columns n, l, m_z, E, norm-res, H-res, J2-res, J3-res.
pub fn write_basis_csv<W: Write>(rows: &[EigenRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,l,m_z,E,norm_res,H_res,J2_res,J3_res")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{:e},{:e},{:e},{:e},{:e}",
            r.label.n, r.label.l, r.label.m_z, r.energy, r.norm_residual, r.h_residual, r.j2_residual, r.j3_residual
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct GramReport {
    pub size: usize,
    pub max_diagonal_deviation: f64,
    pub max_off_diagonal: f64,
    /// Label pair holding the largest off-diagonal entry.
    pub worst_pair: Option<(SpectralLabel, SpectralLabel)>,
}

impl GramReport {
    pub fn max_deviation(&self) -> f64 {
        nan_max(self.max_diagonal_deviation, self.max_off_diagonal)
    }
}

pub fn gram(basis: &Basis) -> GramReport {
    let n = basis.len();
    let rows: Vec<Vec<C64>> = crate::par::map_range(n, |a| (a..n).map(|b| basis.grid.inner(&basis.values[a], &basis.values[b])).collect());
    let mut report = GramReport { size: n, max_diagonal_deviation: 0.0, max_off_diagonal: 0.0, worst_pair: None };
    for (a, row) in rows.iter().enumerate() {
        for (off, v) in row.iter().enumerate() {
            let b = a + off;
            if off == 0 {
                report.max_diagonal_deviation = nan_max(report.max_diagonal_deviation, (v - 1.0).norm());
            } else if !(v.norm() <= report.max_off_diagonal) {
                report.max_off_diagonal = v.norm();
                report.worst_pair = Some((basis.labels[a], basis.labels[b]));
            }
        }
    }
    report
}

#[derive(Debug, Clone, Serialize)]
pub struct HermiticityReport {
    pub pairs: usize,
    pub seed: u64,
    /// (operator name, max |⟨a, Ab⟩ − ⟨Aa, b⟩|).
    pub operators: Vec<(String, f64)>,
}

impl HermiticityReport {
    pub fn max(&self) -> f64 {
        self.operators.iter().map(|(_, v)| *v).fold(0.0, nan_max)
    }
}

/// Checks ⟨ψ_a, Aψ_b⟩ = ⟨Aψ_a, ψ_b⟩ on `pairs` seeded random basis pairs
/// for every operator in [`Observable::ALL`].
pub fn hermiticity(basis: &Basis, pairs: usize, seed: u64, backend: Backend) -> Result<HermiticityReport> {
    if basis.is_empty() {
        return Err(Error::InvalidArgument("empty basis".into()));
    }
    let mut s = Sampler::new(seed);
    let chosen: Vec<(usize, usize)> = (0..pairs).map(|_| (s.index(basis.len()), s.index(basis.len()))).collect();
    let mut operators = Vec::new();
    for op in Observable::ALL {
        let mut applied: HashMap<usize, Vec<C64>> = HashMap::new();
        let mut worst = 0.0;
        for &(a, b) in &chosen {
            for k in [a, b] {
                if let std::collections::hash_map::Entry::Vacant(e) = applied.entry(k) {
                    e.insert(op.apply(&basis.funcs[k], backend, &basis.cfg)?.sample(&basis.grid));
                }
            }
            let lhs = basis.grid.inner(&basis.values[a], &applied[&b]);
            let rhs = basis.grid.inner(&applied[&a], &basis.values[b]);
            worst = nan_max(worst, (lhs - rhs).norm());
        }
        operators.push((op.name(), worst));
    }
    Ok(HermiticityReport { pairs, seed, operators })
}

/// An operator built from ν̂ and Ĵ that commutes with Ĥ.
fn level_operators() -> Vec<(String, Vec<LevelOp>)> {
    let mut ops = Vec::new();
    for i in 0..3 {
        ops.push((format!("nu{}", i + 1), vec![LevelOp::Nu(i)]));
        ops.push((format!("J{}", i + 1), vec![LevelOp::J(i)]));
    }
    for i in 0..3 {
        for j in i..3 {
            ops.push((format!("nu{}nu{}", i + 1, j + 1), vec![LevelOp::Nu(j), LevelOp::Nu(i)]));
        }
    }
    ops
}

#[derive(Debug, Clone, Copy)]
enum LevelOp {
    Nu(usize),
    J(usize),
}

fn apply_chain(f: &WaveFunction, chain: &[LevelOp], cfg: &SpaceConfig) -> Result<WaveFunction> {
    chain.iter().try_fold(f.clone(), |acc, op| match op {
        LevelOp::Nu(i) => apply_nu(&acc, *i, Backend::Analytic, cfg),
        LevelOp::J(i) => apply_angular(&acc, AngularComponent::Axis(*i), Backend::Analytic),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LeakageReport {
    pub n_max: usize,
    /// (operator, max ‖Aψ − P_n Aψ‖ / max(1, ‖Aψ‖)) with P_n the projector
    /// onto the level of ψ.
    pub operators: Vec<(String, f64)>,
}

impl LeakageReport {
    pub fn max(&self) -> f64 {
        self.operators.iter().map(|(_, v)| *v).fold(0.0, nan_max)
    }
}

/// Level invariance under ν̂_i, Ĵ_i and ν̂_iν̂_j.
pub fn leakage(basis: &Basis) -> Result<LeakageReport> {
    let g = &basis.grid;
    let n_max = basis.max_level();
    let mut operators = Vec::new();
    for (name, chain) in level_operators() {
        let mut worst = 0.0;
        for n in 0..=n_max {
            let level = basis.level_indices(n);
            for &k in &level {
                let a = apply_chain(&basis.funcs[k], &chain, &basis.cfg)?.sample(g);
                let mut rest = a.clone();
                for &b in &level {
                    let c = g.inner(&basis.values[b], &a);
                    rest.iter_mut().zip(&basis.values[b]).for_each(|(r, v)| *r -= c * v);
                }
                worst = nan_max(worst, g.norm(&rest) / g.norm(&a).max(1.0));
            }
        }
        operators.push((name, worst));
    }
    Ok(LeakageReport { n_max, operators })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Su2Fit {
    pub side: Side,
    pub level: usize,
    /// Least-squares coefficient c in [A_i, A_j] = c η_ijk A_k, averaged over
    /// the cyclic pairs.
    pub measured: f64,
    pub expected: f64,
    /// max ‖[A_i, A_j] − expected·A_k‖_F / ‖A_k‖_F.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AlgebraReport {
    pub n_trunc: usize,
    /// (commutator family, max relative residual of commutator − predicted
    /// right-hand side over the truncated basis).
    pub families: Vec<(String, f64)>,
    pub su2: Vec<Su2Fit>,
}

impl AlgebraReport {
    pub fn max_family_residual(&self) -> f64 {
        self.families.iter().map(|(_, v)| *v).fold(0.0, nan_max)
    }

    pub fn max_su2_error(&self) -> f64 {
        self.su2.iter().map(|f| nan_max(f.residual, (f.measured - f.expected).abs())).fold(0.0, nan_max)
    }
}

fn commutator(a: &dyn Fn(&WaveFunction) -> Result<WaveFunction>, b: &dyn Fn(&WaveFunction) -> Result<WaveFunction>, f: &WaveFunction) -> Result<WaveFunction> {
    let ab = a(&b(f)?)?;
    let ba = b(&a(f)?)?;
    Ok(ab.combine(C64::new(1.0, 0.0), &ba, C64::new(-1.0, 0.0)))
}

/// Commutators of ν̂, ε̂, ρ̂, Ĵ and Ĥ on the basis with n ≤ n_trunc against
/// their predicted right-hand sides, plus the su(2) closure of the matrices
/// of Z^R and Z^L on each level.
pub fn operator_algebra(basis: &Basis, n_trunc: usize) -> Result<AlgebraReport> {
    let cfg = basis.cfg;
    let (m, r) = (cfg.mass, cfg.radius);
    let g = &basis.grid;
    let idx: Vec<usize> = (0..basis.len()).filter(|&k| basis.labels[k].n <= n_trunc).collect();
    type Op = Box<dyn Fn(&WaveFunction) -> Result<WaveFunction>>;
    let nu = |i: usize| -> Op { Box::new(move |f| apply_nu(f, i, Backend::Analytic, &cfg)) };
    let eps = |i: usize| -> Op { Box::new(move |f| Ok(apply_position(f, Position::Eps(i)))) };
    let rho = || -> Op { Box::new(|f| Ok(apply_position(f, Position::Rho))) };
    let jj = |i: usize| -> Op { Box::new(move |f| apply_angular(f, AngularComponent::Axis(i), Backend::Analytic)) };
    let ham = || -> Op { Box::new(move |f| apply_hamiltonian(f, HamiltonianForm::ViaNu, Backend::Analytic, &cfg)) };

    let mut families: Vec<(String, f64)> = Vec::new();
    let mut check = |name: &str, lhs: (Op, Op), rhs: &dyn Fn(&WaveFunction) -> Result<WaveFunction>| -> Result<()> {
        let mut worst = 0.0;
        for &k in &idx {
            let f = &basis.funcs[k];
            let c = commutator(&*lhs.0, &*lhs.1, f)?;
            let p = rhs(f)?;
            let d = c.combine(C64::new(1.0, 0.0), &p, C64::new(-1.0, 0.0)).sample(g);
            worst = nan_max(worst, g.norm(&d) / g.norm(&p.sample(g)).max(1.0));
        }
        match families.iter_mut().find(|(n, _)| n == name) {
            Some(entry) => entry.1 = nan_max(entry.1, worst),
            None => families.push((name.to_string(), worst)),
        }
        Ok(())
    };
    for i in 0..3 {
        for j in 0..3 {
            // [ν̂_i, ε̂_j] = −(i/m)(ρ̂ + 1)δ_ij + (i/(mR)) η_ijk ε̂_k
            check("[nu_i, eps_j]", (nu(i), eps(j)), &|f| {
                let mut acc = WaveFunction::from_poly(crate::poly::Poly4::zero(), r);
                if i == j {
                    let rho1 = apply_position(f, Position::Rho).combine(C64::new(1.0, 0.0), f, C64::new(1.0, 0.0));
                    acc = acc.combine(C64::new(1.0, 0.0), &rho1, -I / m);
                }
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    if e != 0.0 {
                        acc = acc.combine(C64::new(1.0, 0.0), &apply_position(f, Position::Eps(k)), I * e / (m * r));
                    }
                }
                Ok(acc)
            })?;
            // [ν̂_i, ν̂_j] = (2i/(mR)) η_ijk ν̂_k
            check("[nu_i, nu_j]", (nu(i), nu(j)), &|f| {
                let mut acc = WaveFunction::from_poly(crate::poly::Poly4::zero(), r);
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    if e != 0.0 {
                        acc = acc.combine(C64::new(1.0, 0.0), &apply_nu(f, k, Backend::Analytic, &cfg)?, I * 2.0 * e / (m * r));
                    }
                }
                Ok(acc)
            })?;
            // [Ĵ_i, Ĵ_j] = i η_ijk Ĵ_k
            check("[J_i, J_j]", (jj(i), jj(j)), &|f| {
                let mut acc = WaveFunction::from_poly(crate::poly::Poly4::zero(), r);
                for k in 0..3 {
                    let e = levi_civita(i, j, k);
                    if e != 0.0 {
                        acc = acc.combine(C64::new(1.0, 0.0), &apply_angular(f, AngularComponent::Axis(k), Backend::Analytic)?, I * e);
                    }
                }
                Ok(acc)
            })?;
            // [ε̂_i, ε̂_j] = 0
            check("[eps_i, eps_j]", (eps(i), eps(j)), &|_| Ok(WaveFunction::from_poly(crate::poly::Poly4::zero(), r)))?;
        }
        // [ν̂_i, ρ̂] = (i/(mR²)) ε̂_i
        check("[nu_i, rho]", (nu(i), rho()), &|f| Ok(apply_position(f, Position::Eps(i)).scale(I / (m * r * r))))?;
        // [ν̂_i, Ĥ] = 0
        check("[nu_i, H]", (nu(i), ham()), &|_| Ok(WaveFunction::from_poly(crate::poly::Poly4::zero(), r)))?;
    }

    let mut su2 = Vec::new();
    for level in 1..=n_trunc {
        let members = basis.level_indices(level);
        if members.is_empty() {
            continue;
        }
        for (side, expected) in [(Side::Right, -2.0 / r), (Side::Left, 2.0 / r)] {
            let mats = (0..3)
                .map(|i| field_matrix_on(basis, &members, side, i))
                .collect::<Result<Vec<_>>>()?;
            let mut fits = Vec::new();
            let mut residual: f64 = 0.0;
            for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                let c = &mats[i] * &mats[j] - &mats[j] * &mats[i];
                let ak = &mats[k];
                let fit = ak.iter().zip(c.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re / ak.norm_squared();
                fits.push(fit);
                residual = nan_max(residual, (&c - ak * C64::new(expected, 0.0)).norm() / ak.norm());
            }
            su2.push(Su2Fit { side, level, measured: fits.iter().sum::<f64>() / 3.0, expected, residual });
        }
    }
    Ok(AlgebraReport { n_trunc, families, su2 })
}

/// Matrix ⟨ψ_a, Z_(i) ψ_b⟩ over the given basis members.
fn field_matrix_on(basis: &Basis, members: &[usize], side: Side, i: usize) -> Result<DMatrix<C64>> {
    let n = members.len();
    let mut out = DMatrix::zeros(n, n);
    for (col, &b) in members.iter().enumerate() {
        let zb = apply_invariant_field(&basis.funcs[b], side, i, Backend::Analytic)?.sample(&basis.grid);
        for (row, &a) in members.iter().enumerate() {
            out[(row, col)] = basis.grid.inner(&basis.values[a], &zb);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BackendAgreement {
    pub functions: usize,
    pub points: usize,
    pub seed: u64,
    /// Points with |ρ| < 0.05 skipped for the chart-formula Laplacian.
    pub skipped_near_equator: usize,
    /// (comparison, max |a − b| / max(1, max |b|)).
    pub comparisons: Vec<(String, f64)>,
}

impl BackendAgreement {
    pub fn max(&self) -> f64 {
        self.comparisons.iter().map(|(_, v)| *v).fold(0.0, nan_max)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.comparisons.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Points closer than this to the chart equator are excluded when the
/// chart form of Δ (with its 1/ρ³ terms) is compared.
pub const LB_COMPARE_MIN_RHO: f64 = 0.05;

/// Cross-checks the two derivative backends, the two Hamiltonian forms and
/// the rotation identity (R/2)(Z^R − Z^L) = η ε ∂ on `functions` random basis
/// functions with n ≤ n_max at `points` random points.
pub fn backend_agreement(functions: usize, points: usize, n_max: usize, seed: u64, cfg: &SpaceConfig) -> Result<BackendAgreement> {
    let mut s = Sampler::new(seed);
    let labels = SpectralLabel::all_up_to(n_max);
    let chosen: Vec<SpectralLabel> = (0..functions).map(|_| labels[s.index(labels.len())]).collect();
    let pts: Vec<crate::S3Point> = (0..points).map(|_| s.point()).collect();
    let skipped = pts.iter().filter(|p| p.components()[0].abs() < LB_COMPARE_MIN_RHO).count();
    let mut comparisons: Vec<(String, f64)> = Vec::new();
    let mut record = |name: &str, a: &WaveFunction, b: &WaveFunction, skip_equator: bool| {
        let used: Vec<&crate::S3Point> = pts.iter().filter(|p| !skip_equator || p.components()[0].abs() >= LB_COMPARE_MIN_RHO).collect();
        let vals = crate::par::map_slice(&used, |p| (a.eval(p), b.eval(p)));
        let scale = vals.iter().map(|(_, b)| b.norm()).fold(1.0, f64::max);
        let d = vals.iter().map(|(a, b)| (a - b).norm()).fold(0.0, nan_max) / scale;
        match comparisons.iter_mut().find(|(n, _)| n == name) {
            Some(entry) => entry.1 = nan_max(entry.1, d),
            None => comparisons.push((name.to_string(), d)),
        }
    };
    for label in &chosen {
        let f = psi(*label, cfg)?;
        for i in 0..3 {
            record("nu analytic vs fd", &apply_nu(&f, i, Backend::Analytic, cfg)?, &apply_nu(&f, i, Backend::FiniteDifference, cfg)?, false);
            let j = AngularComponent::Axis(i);
            record("J analytic vs fd", &apply_angular(&f, j, Backend::Analytic)?, &apply_angular(&f, j, Backend::FiniteDifference)?, false);
            let rot = apply_rotation_generator(&f, i, Backend::Analytic)?;
            record("rotation vs chart form", &rot, &apply_chart_rotation(&f, i, Backend::Analytic)?, false);
            record("rotation vs chart form (fd)", &rot, &apply_chart_rotation(&f, i, Backend::FiniteDifference)?, false);
        }
        let sq = AngularComponent::Squared;
        record("J2 analytic vs fd", &apply_angular(&f, sq, Backend::Analytic)?, &apply_angular(&f, sq, Backend::FiniteDifference)?, false);
        let h = apply_hamiltonian(&f, HamiltonianForm::ViaNu, Backend::Analytic, cfg)?;
        record("H via_nu fd", &apply_hamiltonian(&f, HamiltonianForm::ViaNu, Backend::FiniteDifference, cfg)?, &h, false);
        record("H laplace_beltrami analytic", &apply_hamiltonian(&f, HamiltonianForm::LaplaceBeltrami, Backend::Analytic, cfg)?, &h, true);
        record("H laplace_beltrami fd", &apply_hamiltonian(&f, HamiltonianForm::LaplaceBeltrami, Backend::FiniteDifference, cfg)?, &h, false);
    }
    Ok(BackendAgreement { functions, points, seed, skipped_near_equator: skipped, comparisons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{build_grid_with, ChiRule};

    fn small_basis(n_max: usize, cfg: &SpaceConfig) -> Basis {
        // the Jacobi rule integrates these products exactly on a small grid
        Basis::build(n_max, build_grid_with(ChiRule::GaussJacobi, 12, 10, 16, cfg).unwrap(), cfg).unwrap()
    }

    #[test]
    fn gram_is_identity() {
        let cfg = SpaceConfig::new(1.3, 1.0).unwrap();
        let r = gram(&small_basis(3, &cfg));
        assert_eq!(r.size, 30);
        assert!(r.max_deviation() < 1e-11, "{r:?}");
    }

    #[test]
    fn eigen_rows_and_csv() {
        let cfg = SpaceConfig::default();
        let rows = eigen_residuals(&small_basis(2, &cfg), Backend::Analytic, HamiltonianForm::ViaNu).unwrap();
        assert_eq!(rows.len(), 14);
        assert!(rows.iter().all(|r| r.max_operator_residual() < 1e-10 && r.norm_residual < 1e-11));
        let mut buf = Vec::new();
        write_basis_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,l,m_z,E,norm_res,H_res,J2_res,J3_res\n"));
        assert_eq!(text.lines().count(), 15);
    }

    #[test]
    fn observables_hermitian() {
        let cfg = SpaceConfig::new(0.8, 2.0).unwrap();
        let r = hermiticity(&small_basis(3, &cfg), 20, 9, Backend::Analytic).unwrap();
        assert_eq!(r.operators.len(), 11);
        assert!(r.max() < 1e-10, "{r:?}");
    }

    #[test]
    fn levels_invariant() {
        let cfg = SpaceConfig::default();
        let r = leakage(&small_basis(3, &cfg)).unwrap();
        assert!(r.max() < 1e-10, "{r:?}");
    }

    #[test]
    fn algebra_and_su2_closure() {
        let cfg = SpaceConfig::new(1.6, 0.7).unwrap();
        let r = operator_algebra(&small_basis(3, &cfg), 2).unwrap();
        assert!(r.max_family_residual() < 1e-10, "{r:?}");
        assert_eq!(r.su2.len(), 4);
        assert!(r.max_su2_error() < 1e-10, "{r:?}");
    }

    #[test]
    fn backends_agree() {
        let cfg = SpaceConfig::default();
        let r = backend_agreement(6, 20, 5, 4, &cfg).unwrap();
        assert_eq!(r.comparisons.len(), 8);
        assert!(r.max() < 1e-8, "{r:?}");
        assert!(r.get("rotation vs chart form").unwrap() < 1e-12);
    }
}
