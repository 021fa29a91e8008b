//! Exact calculus on trigonometric vector fields.

pub mod field;
pub mod frozen;
pub mod iterate;
pub mod ops;
pub mod profile;

pub use field::{ModeKey, Phase, TrigField, TrigMode};
pub use frozen::{FrozenField, FrozenMode};
pub use iterate::{first_iterate, first_iterate_with_budget, split_u1, FirstIterate};
pub use ops::{
    advect, advect_with_budget, duhamel_integrate, duhamel_integrate_logged, heat_flow,
    heat_semigroup, leray_project, NearResonance, DEFAULT_MODE_BUDGET, RESONANCE_TOL,
};
pub use profile::{Profile, Term, TimeProfile, VectorProfile};
