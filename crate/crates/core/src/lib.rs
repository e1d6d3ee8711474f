//! Optimal rank-based prize policies for `n`-contestant contests with power
//! costs `c(q) = q^beta`.
//!
//! The crate is organised bottom-up:
//!
//! - [`bernstein`]: the degree-`(n-1)` Bernstein basis, the policy polynomial
//!   `h(x, p)`, its derivative and monotone inverse.
//! - [`policy`]: the ordered-simplex [`Policy`] type and structure classes.
//! - [`quadrature`]: one-dimensional rules with monotone error accounting.
//! - [`objective`]: designer objectives in equilibrium-free form, gradients.
//! - [`equilibrium`]: the symmetric mixed equilibrium and a Monte Carlo game.
//! - [`optimizer`]: branch-and-bound over the two-level family, line search,
//!   and a brute-force lattice oracle.
//! - [`structure`]: sign changes, quasiconvexity, Schur direction and
//!   total-positivity checks.
//! - [`verify`]: the invariant suites behind `contest-opt verify`.

pub mod bernstein;
pub mod equilibrium;
pub mod error;
pub mod format;
pub mod objective;
pub mod optimizer;
pub mod policy;
pub mod quadrature;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use objective::{CostParams, ObjectiveSpec};
pub use policy::{Policy, StructureClass};
pub use quadrature::{QuadratureConfig, Rule};
