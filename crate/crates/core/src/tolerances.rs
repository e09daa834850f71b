//! Default tolerances of the verification suites, addressable by name so the
//! command line can override them (`--tol name=value`).

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// `(name, default, description)` for every tolerance the suites check.
pub const DEFAULTS: &[(&str, f64, &str)] = &[
    ("volume", 1e-12, "relative error of the quadrature volume"),
    ("spectrum_analytic", 1e-7, "relative H eigen-residual, analytic derivatives"),
    ("spectrum_fd", 1e-4, "relative H eigen-residual, finite differences"),
    ("angular", 1e-7, "relative J^2 and J3 eigen-residuals"),
    ("gram", 1e-9, "entrywise Gram matrix deviation from identity"),
    ("normalization", 1e-9, "relative error of the closed-form normalization constants"),
    ("group", 1e-12, "associativity, identity and inverse residuals"),
    ("fields", 1e-8, "invariant fields against differentiated group law"),
    ("brackets", 1e-7, "vector-field bracket table residuals"),
    ("poisson", 1e-7, "Poisson bracket families"),
    ("jacobi", 1e-6, "Jacobi identity of nested Poisson brackets"),
    ("closure", 1e-6, "least-squares closure of the Poisson algebra"),
    ("energy_drift", 1e-8, "relative energy drift of the integrator"),
    ("theta_drift", 1e-8, "drift of the invariant triples"),
    ("endpoint", 1e-8, "integrator endpoint against the closed form"),
    ("geodesic_residual", 1e-7, "closed-form geodesic equation residual"),
    ("quantization", 1e-8, "quantization form contractions"),
    ("noether", 1e-8, "Noether invariant table"),
    ("contraction_slope", 0.3, "allowed slope deviation from -1 in the contraction fit"),
    ("hermiticity", 1e-8, "operator self-adjointness on basis pairs"),
    ("backend", 1e-6, "analytic against finite-difference operator backends"),
    ("rotation", 1e-8, "rotation generator against its chart form"),
    ("leakage", 1e-8, "projection leakage out of an energy level"),
    ("algebra", 1e-6, "operator commutator matrices against predicted right-hand sides"),
];

/// A named tolerance set, defaults overridden per name.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(DEFAULTS.iter().map(|(n, v, _)| (n.to_string(), *v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        match self.0.get(name) {
            Some(v) => *v,
            None => panic!("unknown tolerance {name:?}"),
        }
    }

    /// Overrides one tolerance; the name must be known and the value > 0.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !self.0.contains_key(name) {
            return Err(Error::InvalidArgument(format!(
                "unknown tolerance {name:?}; known: {}",
                self.0.keys().cloned().collect::<Vec<_>>().join(", ")
            )));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance {name} must be a positive number, got {value}")));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }

    /// Parses `name=value`.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected name=value, got {pair:?}")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad tolerance value in {pair:?}")))?;
        self.set(name.trim(), value)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}
