//! Variational ground states of the p-Laplacian with an attractive potential.
//!
//! The central object is the energy
//!
//! ```text
//!     Q_V[u] = ∫ |∇u|^p dx − ∫ V |u|^p dx,        λ(V) = inf { Q_V[u] : ‖u‖_p = 1 },
//! ```
//!
//! discretized on uniform 1D, radial, and log-radius grids with staggered
//! first differences and trapezoid quadrature. For weak couplings αV the
//! lowest eigenvalue obeys two limit laws that this crate measures and fits:
//!
//! * `p > d` (algebraic): `α^{−p/(p−d)} λ(αV) → −((p−d)/p) (d/p)^{d/(p−d)} (S ∫V)^{p/(p−d)}`,
//!   where `S = S_{d,p}` is the sharp constant in `‖u‖_∞^p ≤ S ‖∇u‖_p^d ‖u‖_p^{p−d}`;
//! * `p = d > 1` (exponential): `α^{1/(d−1)} log(1/|λ(αV)|) → d ω_d^{1/(d−1)} (∫V)^{−1/(d−1)}`,
//!   with `ω_d` the surface area of the unit sphere.
//!
//! Module layout: [`grid`] builds grids and quadrature, [`functional`]
//! evaluates energies and gradients, [`solver`] minimizes the Rayleigh
//! quotient, [`closed_forms`] holds the exact constants and test functions,
//! [`asymptotics`] runs coupling sweeps and extrapolation fits, and [`cli`]
//! backs the `plap` binary.

pub mod asymptotics;
pub mod cli;
pub mod closed_forms;
mod error;
pub mod functional;
pub mod grid;
pub mod potential;
pub mod solver;

pub use error::{Error, Result};
