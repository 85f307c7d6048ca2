//! Every tolerance and threshold used by the solvers and the acceptance
//! battery, in one place. Nothing numeric is decided ad hoc at call sites.
//!
//! Two kinds of constants live here:
//!
//! * solver tolerances, chosen from the conditioning of the stretched-
//!   coordinate discretization (residuals of the radial operators are
//!   measured after scaling interior rows by `eps^2`, which makes the
//!   attainable floor independent of `eps`);
//! * acceptance bounds for quantities the theory only controls up to an
//!   unspecified constant `C`. Those constants were measured on the
//!   reference parameter sets over the full `eps`-sweep and frozen with at
//!   least a 2x margin; the measured values are quoted next to each one.

/// Max-norm bound on the scaled Newton residual (interior rows scaled by
/// `eps^2`, boundary rows unscaled). The scaling keeps the rounding floor of
/// the second-difference stencils near 1e-13 for all sweep values of `eps`,
/// so 1e-11 is reachable and `eps`-uniform.
pub const TOL_NEWTON: f64 = 1e-11;

/// Hard cap on Newton iterations for the coupled steady solve.
pub const NEWTON_MAX_ITER: usize = 50;

/// Step-halving cap inside the damped Newton line search.
pub const NEWTON_MAX_HALVINGS: usize = 30;

/// `Phi` is an integral over an interval of length `eps` of a bracket whose
/// leading orders cancel, so it scales like `eps^2`; the root tolerance
/// follows that scaling.
pub fn tol_phi(eps: f64) -> f64 {
    1e-10 * eps * eps
}

/// Bound on the `rho4` uncertainty accepted when the `Phi` bracket collapses
/// to machine width with `|Phi|` still above `tol_phi` (the `eps^2` law can
/// sit below the evaluation floor, which is set by profile rounding noise
/// amplified through the quadrature). The root is then accepted iff the
/// implied `rho4` error `|Phi| / (eps^2 fstar1)` stays below this relative
/// bound; everything downstream tolerates `rho4` errors many orders larger.
pub const RHO4_COLLAPSE_RTOL: f64 = 1e-4;

/// A damped Newton step that cannot reduce the residual any further has hit
/// the rounding floor of the scaled assembly; residuals within this multiple
/// of `TOL_NEWTON` are then accepted as converged.
pub const NEWTON_STALL_FACTOR: f64 = 100.0;

/// Root tolerance on the Frechet coefficient `g(n, mu)`. `g` itself is
/// `O(eps)`-scaled, hence the `eps`-proportional part.
pub fn tol_g(eps: f64) -> f64 {
    1e-12 + 1e-8 * eps
}

/// Central-difference step for d/dmu of solver outputs.
pub fn mu_step(mu: f64) -> f64 {
    (1e-4 * mu.abs()).max(1e-4)
}

/// Grids below this node count cannot host the one-sided second-order
/// boundary closures with a meaningful interior.
pub const GRID_MIN_NODES: usize = 16;

/// Default node count for production runs.
pub const GRID_N_PRODUCTION: usize = 128;

/// Default node count for tests and the acceptance battery.
pub const GRID_N_TEST: usize = 64;

/// Discrete `p*'(1-eps)` consistency bound, as a multiple of
/// `eps * h_t^2 * (1 + |mu - mu_c| / (gamma + H0))` with `h_t = 1/(N-1)`.
/// `p*'` vanishes in the continuum once `Phi = 0`; the h_t^2-scaled ceiling
/// catches gross root-find failures. The accepted states sit far below it
/// (measured max |p*'(1-eps)| = 1.1e-8 absolute across both reference
/// sweeps at N in {64, 128}, against ceilings of order 1e-4).
pub const CONSISTENCY_FACTOR: f64 = 100.0;

/// `W(m)` values within this multiple of `tol_g` of zero flag a kernel
/// degeneracy (an eigenvalue collision) in the separation table.
pub const SEPARATION_GUARD_FACTOR: f64 = 10.0;

// ---------------------------------------------------------------------------
// Acceptance bounds. "Measured" means: REF-A or REF-B as indicated, grid
// N = 64 uniform-FD2, eps in {1e-2, 5e-3, 2.5e-3}, modes as indicated.
// ---------------------------------------------------------------------------

/// Criterion 1: `|mu_n - (gamma+H0) n^2 (1-n^2)| / (n^5 eps)` on REF-B,
/// n in {2, 3}. Measured max 27.0 (n = 2, eps = 1e-2); frozen at 60.
pub const C_MU_DEVIATION: f64 = 60.0;

/// Criterion 1: window for `deviation(eps) / deviation(eps/2)`; first order
/// in `eps` means the ratio sits near 2.
pub const MU_DEVIATION_RATIO: (f64, f64) = (1.5, 2.6);

/// Criterion 2: `max |X* - (X0 + eps X*1)| / eps^2` on REF-A for
/// X in {L, H, F}. Measured 0.86, eps-stable to 3 digits; frozen at 10.
pub const C_PROFILE_EXPANSION: f64 = 10.0;

/// Criterion 3: `|rho4 - rho4_leading| / eps` on REF-A. Measured max 5.44;
/// frozen at 60 (REF-B runs near 290, covered by its own test bound).
pub const C_RHO4_LAW: f64 = 60.0;

/// Criterion 4: `|p*''(1-eps)| / eps^2` (i.e. `|J1|`) on REF-A. Measured max
/// 0.222, eps-stable; frozen at 12.
pub const C_J1_BOUND: f64 = 12.0;

/// Criterion 4: window for `p*''(1-eps, eps) / p*''(1-eps, eps/2)`; second
/// order decay means the ratio sits near 4.
pub const J1_DECAY_RATIO: (f64, f64) = (2.5, 6.0);

/// Criterion 5: sharp-estimate residual `|J2n| / (n^2+1)` on REF-B,
/// n in {0..5}. Measured max 681 (n = 0, the mode with no annulus factor to
/// absorb the mu-scale); frozen at 1500.
pub const C_SHARP_ESTIMATE: f64 = 1500.0;

/// Criterion 6: cross-path agreement floor; the discretization estimate is
/// Richardson-extrapolated from the N and 2N-1 direct solves and inflated by
/// this safety factor.
pub const CROSS_PATH_ABS_FLOOR: f64 = 1e-8;
pub const CROSS_PATH_RICHARDSON_SAFETY: f64 = 4.0;

/// Criterion 8: relative mismatch allowed between the hand-derived
/// linearization coefficients and central finite differences of the
/// nonlinear reaction terms.
pub const JACOBIAN_ORACLE_RTOL: f64 = 1e-6;

/// Criterion 9: transversality window half-width as a multiple of
/// `eps (n^2+1)`: requires `|dg/dmu * (gamma+H0)/eps - 1| <= C eps (n^2+1)`.
/// Measured max ratio 8.3 on REF-B (n = 2, eps = 2.5e-3); frozen at 15 to
/// keep headroom across grid choices.
pub const C_TRANSVERSALITY: f64 = 15.0;

/// Criterion 7 sample count for the kernel bound certificates.
pub const KERNEL_CERT_SAMPLES: usize = 100;

/// Default seed for the randomized certificates; reproducible by
/// construction, overridable from the CLI.
pub const DEFAULT_SEED: u64 = 0x706c61712d626966;

/// Criterion 2: window for `dev(eps)/dev(eps/2)` of the profile expansion
/// deviation; second-order decay puts it near 4.
pub const PROFILE_DECAY_RATIO: (f64, f64) = (2.5, 6.0);
