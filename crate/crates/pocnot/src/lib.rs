//! Numerical laboratory for the Pound-Overhauser controlled-NOT gate in a
//! weakly-coupled two-spin system.
//!
//! The crate builds the rotating-frame effective Hamiltonians of a two-spin
//! NMR system under monochromatic irradiation (on-resonance or on a single
//! doublet transition), evaluates their propagators both numerically and via
//! closed-form factorizations, extracts and verifies the conditional phases
//! of the resulting c-NOT implementations, certifies the analytic
//! diagonalization and the off-resonance perturbation bounds, and reproduces
//! the product-operator time series and Lorentzian spectral fitting pipeline
//! used to validate the effective Hamiltonians experimentally.

pub mod bounds;
pub mod diag;
pub mod error;
pub mod gates;
pub mod hamiltonian;
pub mod operator;
pub mod spectra;

pub use error::{Error, Result};
pub use operator::{
    basis_op, basis_op_named, decompose, eigenvalues_hermitian, expm_hermitian, ga_norm,
    phase_insensitive_distance, recompose, scalar_part, Axis, OpLabel, Operator4,
    ProductOperatorCoeffs, Sign, Spin, Tolerances,
};

pub use hamiltonian::{
    drop_offres_term, effective_fields, lab_hamiltonian, perturbed_hamiltonian, rotation_time,
    rotating_frame_hamiltonian, Coupling, EffectiveField, Placement, ReducedParams, RfPulse,
    SpinSystem,
};

pub use gates::{
    cnot_matrix, cnot_sequence_onres, exact_cnot_params, onres_split_propagator,
    ontrn_defect_closed_form, ontrn_phase_factorization, ontrn_split, predicted_phases_onres,
    transition_propagator, variant_hamiltonian, verify_cnot, CnotVerdict, HamiltonianVariant,
    OntrnFactorization, PhaseDiag, SoftPulseOrder,
};

pub use diag::{char_eigenvalues, diag_angles, diag_transform, factored_propagator, DiagFactorization};

pub use bounds::{
    commutator_power, derivative_term_bounds, f_alpha, g_c2, measured_derivative_terms,
    ontrn_offres_bound, sinch_directional_derivative, BoundReport, TermBounds,
};

pub use spectra::{
    equilibrium_state, fid_spectrum_window, fit_components, simulate_series, synth_fid,
    synth_window, ComponentAmplitudes, ExperimentPreset, FitResult, HamiltonianVariant, PresetId,
    SpectrumModel, TimeSeries,
};
