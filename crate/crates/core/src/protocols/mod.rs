//! Protocol-level figures of merit: BB84 error rates and key fraction,
//! MUB-averaged fidelity, entangled pairs, tomography, concurrence and CHSH.

pub mod bb84;
pub mod density;
pub mod link;
pub mod two_photon;

pub use bb84::{
    bb84_run, bb84_run_mixed, bb84_run_per_state, binary_entropy, key_fraction, mub_average_fidelity,
    mub_fidelities, Bb84Report, SECURITY_THRESHOLD,
};
pub use density::{
    chsh_labeling, chsh_s, concurrence, correlators, phi_minus, tomography_probs, tomography_reconstruct,
    tomography_reconstruct_unclipped, TwoQubitDensityMatrix, ALICE_SETTINGS, BOB_SETTINGS,
};
pub use link::{hv_coordinates, Encoding, Link, QubitOutcome};
pub use two_photon::{apply_local, bell_state_logical, LocalOutcome, TwoPhotonPureState};
