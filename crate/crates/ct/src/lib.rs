//! Spectral photon-counting CT: parallel-beam geometry, a multi-material
//! spectral forward model with Poisson counts, and reconstruction by
//! linearized ADMM with diagonal preconditioning.

mod error;
pub mod experiment;
pub mod forward;
pub mod geometry;
pub mod phantom;
pub mod recon;
pub mod spectral;

pub use error::CtError;
pub use experiment::{run_ct_experiment, run_ct_sigma, CtExperimentConfig, CtExperimentOutput, CtRun, CtScan};
pub use forward::{
    ct_loss_parts, ct_loss_parts_with, exact_exp, expected_counts, forward_counts, loss_offset, project, sample_counts,
    CountData, LossParts,
};
pub use geometry::{build_projector, CtGeometry, Ray};
pub use phantom::{default_phantom, rasterize, CtImage, Disc};
pub use recon::{
    alpha_ratio, alpha_t_diagnostic, ct_u_update, ct_x_update, ct_y_update, fosp_ratio, informative_rays,
    AlphaReference, CtLikelihood, CtPreconditioners, CtReconProblem, CtState, RaySubproblem,
};
pub use spectral::{build_spectral_model, AttenuationTable, EnergyGrid, SpectralConfig, SpectralModel, Spectrum};
