//! Simulation toolbox for a three-ion Toffoli gate built from sideband
//! pulses and a shared motional mode.
//!
//! The crate covers the full pipeline: construction of the ion⊗phonon
//! Hilbert space and its elementary operators ([`hilbert`]), the composite
//! encode/decode pulse sequence ([`pulses`]), assembly of the three-qubit
//! gate and its analytic single-excitation oracle ([`gate`]), Lindblad
//! open-system integration with phonon heating and dephasing
//! ([`lindblad`]), three-qubit quantum process tomography ([`qpt`]),
//! derivative-free search for the Rabi-ratio working point ([`optimizer`]),
//! and a Monte-Carlo study of Rabi-frequency fluctuations ([`montecarlo`]).
//!
//! All frequencies and rates are angular (rad/s), durations are seconds,
//! and ħ = 1 throughout.

extern crate openblas_src;

pub mod error;
pub mod expm;
pub mod gate;
pub mod hilbert;
pub mod lindblad;
pub mod montecarlo;
pub mod optimizer;
pub mod pulses;
pub mod qpt;
pub mod sparse;

pub use error::{Error, Result};
pub use gate::{
    gate_duration, ideal_toffoli, logical_matrix, sector_oracle, tavis_cummings_h,
    toffoli_unitary, GateSchedule, RabiConfig, ToffoliGate,
};
pub use hilbert::{
    build_space, hermiticity_error, logical_embed, logical_project, min_eigenvalue, trace,
    HilbertSpec, Level, LogicalBasis, Operator,
};
pub use lindblad::{evolve, lindblad_rhs, noisy_gate_map, IntegratorConfig, NoiseParams};
pub use montecarlo::{mc_average_fidelity, sample_rabi, FluctuationConfig, SpreadSemantics};
pub use optimizer::{optimize, RatioSearchConfig};
pub use qpt::{
    avg_state_fidelity, chi_of_map, chi_of_unitary, discrepancy_rows, gate_fidelity,
    OperatorBasis, ProcessMatrix,
};

/// Complex double-precision scalar used everywhere in the crate.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMat = ndarray::Array2<C64>;
/// Dense complex vector (pure state amplitudes).
pub type CVec = ndarray::Array1<C64>;
