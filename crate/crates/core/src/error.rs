use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula containing 1/ρ was evaluated at (or too close to) the chart
    /// equator ρ = 0.
    #[error("chart singularity at |rho| = {rho:e}; evaluate in the opposite hemisphere chart or chart-free")]
    ChartSingularity { rho: f64 },

    #[error("finite-difference stencil leaves the chart around eps = {eps:?} (step {step:e})")]
    Stencil { eps: [f64; 3], step: f64 },

    #[error("invalid spectral label (n={n}, l={l}, m_z={m_z})")]
    InvalidLabel { n: i64, l: i64, m_z: i64 },

    #[error("non-finite integrand value at node {index} (chi={chi}, theta={theta}, phi={phi})")]
    NonFinite {
        index: usize,
        chi: f64,
        theta: f64,
        phi: f64,
    },

    #[error("invalid quadrature orders ({n_chi}, {n_theta}, {n_phi}); need at least (2, 2, 4)")]
    InvalidGrid {
        n_chi: usize,
        n_theta: usize,
        n_phi: usize,
    },

    #[error("no analytic representation available for this wavefunction")]
    NoAnalyticForm,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
