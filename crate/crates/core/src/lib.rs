//! Coherence-vector dynamics of driven N-level atoms, analytic propagators
//! via Sylvester's eigenvalue formula, and a finite-state-machine logic
//! layer (serial parity checker, linear sequential machines) read out from
//! thresholded populations and coherences.

pub mod config;
pub mod dynamics;
pub mod error;
pub mod generators;
pub mod logic;
pub mod pulse;
pub mod quad;
pub mod sylvester;

pub use config::{
    parse_config, parse_sweep, serialize_config, InitialState, NamedState, OutputFormat, OutputSpec,
    SimulationConfig, SweepAxis, SweepSpec,
};
pub use dynamics::{
    adjoint_matrix, coherence_to_density, density_to_coherence, initial_coherence, integrate,
    integrate_system, rk4_step, to_reduced_time, two_level_g, BlochSystem, CoherenceVector,
    DensityMatrix, HamiltonianCoeffs, Trajectory,
};
pub use error::{Error, Result};
pub use generators::{projector, GeneratorBasis, GeneratorKind, StructureConstants};
pub use logic::{
    lsm_step, lsm_step_mod2, readout, run_parity, short_time_step, CoherenceMeasure,
    LogicThresholds, LsmSpec, MachineClass, ParityMachine, ParityMode, Readout, TransitionRecord,
};
pub use pulse::{DetuningSpec, PulseProfile};
pub use sylvester::{
    closed_form_two_level, eigenvalues_two_level, integrate_coefficient, superevolution,
    sylvester_expm, IntegratedCoefficient, Propagator, SignConvention, COMMUTATIVITY_TOL,
};
