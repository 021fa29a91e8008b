//! Periodic pseudospectral Navier-Stokes solver in projection form.

pub mod evolve;
pub mod grid;
pub mod snapshot;

pub use evolve::{diagnostics, evolve, nonlinear_term, write_diagnostics_csv, Diagnostics, DtPolicy, SolverConfig, SolverRun};
pub use grid::{dims_for, spectralize, spectralize_truncated, GridField};

use crate::calculus::{heat_flow, TrigField};
use crate::construction::InitialData;
use crate::norms::SampledTrajectory;
use crate::Result;

/// `y(t) = u(t) - e^{tΔ}u_0 + u_1(t)` at every snapshot. Exact fields are
/// injected at the snapshot times, keeping only the modes the solver grid
/// resolves.
pub fn compute_remainder(traj: &SampledTrajectory, u0: &InitialData, u1: &TrigField) -> Result<SampledTrajectory> {
    let lin = heat_flow(&u0.field);
    let mut fields = Vec::with_capacity(traj.len());
    for (&t, u) in traj.times().iter().zip(traj.fields()) {
        let dims = u.dims();
        let a = spectralize_truncated(&lin, t, dims, u.nu)?;
        let b = spectralize_truncated(u1, t, dims, u.nu)?;
        let y = u.axpy(-1.0, &a)?.axpy(1.0, &b)?;
        fields.push(y);
    }
    SampledTrajectory::new(traj.times().to_vec(), fields)
}
