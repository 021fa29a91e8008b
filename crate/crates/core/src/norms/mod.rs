//! Estimators of the critical functionals: the homogeneous Besov norm
//! `B^{-1,∞}_∞`, the Koch-Tataru `X_T` norm and `BMO^{-1}`.

pub mod besov;
pub mod bilinear;
pub mod carleson;
pub mod lattice;
pub mod linf;
pub mod report;

pub use besov::{besov_norm, besov_norm_grid, BesovOptions};
pub use bilinear::{bilinear_sanity, BilinearReport};
pub use carleson::{
    bmo_neg1_norm, xt_norm, xt_norm_sampled, CarlesonOptions, SampledTrajectory, Trajectory, TORUS_R_CAP,
};
pub use linf::{linf_frozen, linf_grid, LinfEstimate, LinfOptions};
pub use report::{write_reports_csv, NormKind, NormReport, Sampling, Witnesses};
