//! Expected-profit maps for illegal resource extraction from a protected area.
//!
//! Two enforcement models are supported on a uniform Cartesian grid:
//!
//! - aerial patrols ([`multiobjective`]): the extractor trades travel cost
//!   against the probability of being detected, solved by sweeping a
//!   scalarization weight λ and integrating two transport equations per λ;
//! - ground patrols ([`terminated`]): detection ends the loaded trip at once,
//!   giving a randomly-terminated Eikonal equation parameterized by the loot
//!   value.
//!
//! Both reduce to the first-order upwind solvers in [`eikonal`].

pub mod eikonal;
pub mod error;
pub mod grid;
pub mod io;
pub mod multiobjective;
pub mod planning;
pub mod terminated;
pub mod trajectory;

pub use error::{Error, Result};
pub use grid::{integrate_field, normalize_budget, sample_bilinear, DomainMask, Grid2D, Point, Problem, ScalarField};
