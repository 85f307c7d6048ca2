//! Numerical solver for the stationary free-boundary model of a small
//! arterial plaque occupying the thin annulus `1-eps < r < 1`.
//!
//! The library computes three things, each validated against the model's
//! closed-form asymptotics:
//!
//! * the radially symmetric steady state `(L*, H*, F*, p*)` together with the
//!   foam-cell clearance rate `rho4` that makes the interface stationary
//!   ([`steady`]),
//! * the linearized response of the steady state to a `cos(n theta)` boundary
//!   perturbation ([`modes`]), with an independent analytic solve path for the
//!   pressure mode ([`kernel`]),
//! * the symmetry-breaking bifurcation points `mu_n` where the Frechet
//!   derivative of the free-boundary velocity changes sign ([`bifurcation`]).
//!
//! Model parameters and every closed-form quantity used as an oracle live in
//! [`model`]; grids and discrete radial operators in [`grid`]; the acceptance
//! battery run by `plaquebif validate` in [`acceptance`].

pub mod acceptance;
pub mod bifurcation;
pub mod config;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod modes;
pub mod output;
pub mod reactions;
pub mod rootfind;
pub mod steady;
pub mod tolerances;

pub use bifurcation::{find_mu_n, frechet_coeff, separation_table, sweep, BifurcationPoint};
pub use grid::{build_grid, RadialGrid, Scheme};
pub use model::{AsymptoticCoefficients, ModelParams};
pub use modes::{solve_mode, ModeSolution};
pub use steady::{solve_steady, SteadyState};
