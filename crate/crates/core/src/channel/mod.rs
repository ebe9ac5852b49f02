//! Everything between source and detector: q-plate encoding and decoding,
//! free propagation, spatial perturbations and the invariance condition.

pub mod analytic;
pub mod coupling;
pub mod mask;
pub mod pipeline;
pub mod qplate;

pub use analytic::{
    combined_coeff_analytic, combined_coeff_from_alpha, displaced_lg1_field, displacement_coeff_analytic,
    tilt_coeff_analytic, tilt_coeff_from_alpha, CombinedCoefficient, DisplacedLg1,
};
pub use coupling::{
    apply_coupling, check_invariance, project_coupling, InvarianceReport, ModeCoupling, PolAction,
    ProjectedCoupling,
};
pub use mask::{chain_coupling, chain_powers, mask_coupling, norm_capture, MaskSpec, NormCapture, PhaseScreen, PhaseTerm, SpatialOp, Transmission};
pub use pipeline::{Channel, ChannelOp};
pub use qplate::{
    decode, encode, encode_with, erase_polarization, free_propagate, oam_decode, qplate_apply,
    qplate_apply_with_loss, qplate_radial_coeffs, OamDetection, OamQubit, QPlateSpec, OAM_POLARIZER_ANGLE,
};
