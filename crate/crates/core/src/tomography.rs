//! State tomography in metric Hilbert spaces.
//!
//! Frames are finite weighted families of quasi-Hermitian operators; the
//! continuous measure over observables becomes a probability vector. Spin
//! data follow the Stern-Gerlach protocol with half-integer outcomes
//! `m = +1/2, -1/2`, so `sum_m m p(m|n) = <sigma.n> / 2`.

mod frame;
mod nosignal;
mod spin;

pub use frame::{
    expectations_from_records, frame_expectations, pauli_frame, reconstruct, sampling_superoperator, trace_distance,
    OperatorFrame, Reconstruction, MAX_CONDITION,
};
pub use nosignal::{verify_no_signalling, NoSignalling};
pub use spin::{
    axis_rotation, pauli_settings, simulate_dataset, stern_gerlach_probabilities, MeasurementRecord,
    OutcomeProbabilities, SternGerlachConfig,
};

#[cfg(test)]
mod tests;
