//! Simulation and calibration toolkit for the parasitic ZZ interaction between
//! two coupled anharmonic oscillators (transmon and C-shunt flux qubits), and
//! for diabatic CZ / iSWAP gates driven by flux pulses on one of them.
//!
//! Configuration uses linear frequencies (GHz for mode frequencies, MHz for
//! anharmonicities and couplings). Hamiltonians are built in angular units
//! (rad/ns) and time is in ns.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod gates;
mod linalg;
pub mod model;
pub mod optimize;
pub mod pulse;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use dynamics::{logical_frame, populations, project_logical, propagate, LogicalFrame, Projection, Propagator};
pub use gates::{
    metrics_from_propagator,
    average_fidelity, canonicalize_virtual_z, extract_angles, simulate_gate, target_unitary, AngleBranch, GateKind,
    GateMetrics,
};
pub use model::{bare_energy, build_hamiltonian, lowering_operator, BareLabel, CouplingSpec, DeviceSpec, ModeSpec};
pub use optimize::{
    asymmetry_sweep, calibrate_gate, calibrate_gate_with, optimize_overshoot, AsymmetryRow, CalibrationResult, CalibrationSettings,
    ErrorChannel, HoldPoint, Objective, TracePoint,
};
pub use pulse::{frequency_at, sample_pulse, PulseSpec};
pub use spectrum::{
    eigensolve_labeled, sweep_zz, zz_analytic, zz_numeric, zz_perturbative, LabeledSpectrum, ZzMethod, ZzResult,
};

/// 4×4 complex matrix on the computational subspace, ordered |00>, |01>, |10>, |11>
/// with qubit a as the most significant digit.
pub type Gate4 = nalgebra::Matrix4<Complex64>;
