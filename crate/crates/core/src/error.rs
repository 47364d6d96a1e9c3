use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("equilibrium solver did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    NonConvergence { iterations: usize, best_residual: f64 },

    #[error("dynamical matrix has negative eigenvalue {value:.3e}; the configuration is not a minimum")]
    NegativeEigenvalue { value: f64 },

    #[error("drive at omega = {omega} is within {margin:.4} of mode {mode} (omega_n = {mode_frequency:.6}, detuning {detuning:.3e})")]
    ResonantDrive {
        omega: f64,
        mode: usize,
        mode_frequency: f64,
        detuning: f64,
        margin: f64,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Fock truncation leak {leakage:.3e} exceeds tolerance {tolerance:.1e}")]
    TruncationLeak { leakage: f64, tolerance: f64 },

    #[error("integrator step size underflow at t = {t} (h = {step:.3e})")]
    StepFailure { t: f64, step: f64 },

    #[error("state tracking lost at field {field}: overlap {overlap:.3} with previous grid point")]
    TrackingAmbiguity { field: f64, overlap: f64 },

    #[error("dipole curves of the selected states do not cross on the grid")]
    NoCrossing,

    #[error("ac amplitude {e_ac} lies outside the linear window (half width {half_width})")]
    OutsideLinearWindow { e_ac: f64, half_width: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
