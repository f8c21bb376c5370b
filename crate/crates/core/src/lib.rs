//! Two-tone Floquet dynamics of driven spin-1/2 chains.
//!
//! Units: `ħ = 1`, energies in units of the field `g`, times in `g⁻¹`.
//! Site `j` (1-based) maps to bit `j − 1` of a basis index, with spin up
//! as bit value 1, so `|↓…↓⟩` is index 0.

pub mod analytic;
pub mod cache;
pub mod drive;
pub mod error;
pub mod export;
pub mod linalg;
pub mod observables;
pub mod propagator;
pub mod spin;
pub mod steer;

pub use analytic::{analytic_correlation, analytic_magnetizations, subharmonic_period, TwoLevelState};
pub use cache::UnitaryCache;
pub use drive::{
    hamiltonian_at, magnus_zeroth, DriveAssignment, DrivePreset, DrivenChain, EffectiveHamiltonian,
    LatticeConfig,
};
pub use error::{Error, Result};
pub use observables::{
    correlation, detect_peaks, fidelity, fidelity_susceptibility, fs_scan, magnetization, ObservableSeries,
    Peak, SusceptibilityMap,
};
pub use propagator::{
    continuous_evolve, one_period_operator, step, stroboscopic_evolve, Method, Propagator, PropagatorOptions,
    UnitaryMatrix,
};
pub use spin::{
    basis_index, index_to_config, inner_product, PauliAction, PauliTerm, SparsePauliOperator,
    SpinConfiguration, StateVector,
};
pub use steer::{compile_sequence, default_m, mirror_check, run_protocol, Block, ProtocolSequence};
