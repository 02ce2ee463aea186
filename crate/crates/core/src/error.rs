//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructed value failed one of its structural invariants.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// The coefficient matrix does not commute with itself at different
    /// times, so the analytic propagator is not valid.
    #[error(
        "non-commuting coefficient: sampled commutator residual {residual:.3e} \
         exceeds tolerance {tolerance:.3e}; use the RK4 integrator instead"
    )]
    NonCommuting { residual: f64, tolerance: f64 },

    /// A numerical routine produced a non-finite or otherwise unusable value.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Physical-mode parity readout disagrees with the truth-table transition.
    #[error(
        "encoding mismatch: (state={present_state}, input={input}) expected \
         (next={expected_next}, output={expected_output}) but readout gave \
         (state_bit={state_bit}, coherence_bit={coherence_bit}) \
         with rho11={rho11:.6}, coherence={coherence:.6}"
    )]
    EncodingMismatch {
        present_state: u8,
        input: u8,
        expected_next: u8,
        expected_output: u8,
        state_bit: u8,
        coherence_bit: u8,
        rho11: f64,
        coherence: f64,
    },

    /// Configuration rejected; every violated invariant is listed.
    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
