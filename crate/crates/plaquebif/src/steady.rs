//! Radially symmetric stationary solve on the annulus.
//!
//! Two nested solvers, mirroring how the existence proof is organized:
//!
//! * `solve_inner`: damped Newton on the coupled `(L*, H*, F*, p*)` system at
//!   *fixed* `rho4`, with the interface conditions Robin/Robin/Robin/
//!   Dirichlet at `r = 1-eps` and homogeneous Neumann at `r = 1`. The extra
//!   condition `p*'(1-eps) = 0` is not imposed here.
//! * `solve_steady`: scalar root-find over `rho4` of
//!   `Phi(rho4) = int [lambda(M0-F*)L*/(gamma+H*) - rho3(M0-F*) - rho4 F*] r dr`,
//!   which vanishes exactly when `p*'(1-eps)` does (integrate the pressure
//!   equation against `r dr` and use `p*'(1) = 0`). Bracketed at `[0,
//!   rho4_hi]` with `rho4_hi` doubled from twice the leading-order `rho4`
//!   until the sign changes, then Brent.
//!
//! Residuals are measured with interior rows scaled by `eps^2` (the
//! stretched-coordinate form), which keeps their rounding floor and hence
//! every tolerance `eps`-uniform.

use nalgebra::{DMatrix, DVector};

use crate::grid::{apply, RadialGrid};
use crate::linalg::solve_dense_diag;
use crate::model::{ModelParams, Violation};
use crate::reactions;
use crate::rootfind::brent;
use crate::tolerances::{
    self, CONSISTENCY_FACTOR, NEWTON_MAX_HALVINGS, NEWTON_MAX_ITER, TOL_NEWTON,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SteadyError {
    #[error("invalid parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),
    #[error("mu-below-critical: mu = {mu} <= mu_c = {mu_c}")]
    MuBelowCritical { mu: f64, mu_c: f64 },
    #[error("negative rho4 = {rho4} requires the explicit override flag")]
    NegativeRho4 { rho4: f64 },
    #[error("newton-diverged: residual {last_residual} after {iterations} iterations ({halvings} damping halvings exhausted)")]
    NewtonDiverged { last_residual: f64, iterations: usize, halvings: usize },
    #[error("max-iterations: residual {last_residual} after {iterations} Newton iterations")]
    MaxIterations { last_residual: f64, iterations: usize },
    #[error("singular Jacobian (rcond ~ {rcond:.3e})")]
    SingularJacobian { rcond: f64 },
    #[error("no sign change in Phi on [0, {hi}]: Phi({hi}) = {phi_hi}; mu may be at or below mu_c")]
    NoSignChange { hi: f64, phi_hi: f64 },
    #[error("rho4 root-find stalled: Phi = {phi} exceeds tol {tol}")]
    PhiNotConverged { phi: f64, tol: f64 },
    #[error("p*'(1-eps) consistency check failed: {p_prime_inner} exceeds {tol}")]
    ConsistencyCheck { p_prime_inner: f64, tol: f64 },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// Solver knobs; the defaults are the documented tolerances.
#[derive(Debug, Clone, Copy)]
pub struct SteadySettings {
    pub tol_newton: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Run with parameter sets that fail validation (proof-edge cases).
    pub allow_invalid_params: bool,
    /// Attempt the solve below `mu_c` (exploration only).
    pub allow_mu_below_critical: bool,
    /// Allow `solve_inner` at negative `rho4` (exploration only).
    pub allow_negative_rho4: bool,
}

impl Default for SteadySettings {
    fn default() -> Self {
        SteadySettings {
            tol_newton: TOL_NEWTON,
            max_iter: NEWTON_MAX_ITER,
            max_halvings: NEWTON_MAX_HALVINGS,
            allow_invalid_params: false,
            allow_mu_below_critical: false,
            allow_negative_rho4: false,
        }
    }
}

/// Node arrays of the four steady profiles.
#[derive(Debug, Clone)]
pub struct Profiles {
    pub l: Vec<f64>,
    pub h: Vec<f64>,
    pub f: Vec<f64>,
    pub p: Vec<f64>,
}

/// Result of the fixed-`rho4` coupled solve.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub profiles: Profiles,
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Converged steady state with the solved `rho4` and the diagnostics the
/// bifurcation condition consumes.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub grid: RadialGrid,
    pub lstar: Vec<f64>,
    pub hstar: Vec<f64>,
    pub fstar: Vec<f64>,
    pub pstar: Vec<f64>,
    /// Foam-cell clearance rate solving `Phi = 0`.
    pub rho4: f64,
    /// Scaled max-norm Newton residual at the accepted solution.
    pub residual_norm: f64,
    /// `Phi` at the accepted `rho4`.
    pub phi_residual: f64,
    /// `p*''(1-eps)` from the pressure equation evaluated at the interface.
    pub p2_inner: f64,
    /// `p2_inner / eps^2`; bounded uniformly in `eps` (Frechet remainder).
    pub j1: f64,
    /// Max over nodes and fields of `|u'|`; `O(eps)` in the valid regime.
    pub deriv_max: f64,
    /// Discrete `p*'(1-eps)`, reported by the consistency check.
    pub p_prime_inner: f64,
    /// Sign changes of `Phi` beyond the first on the scanned bracket;
    /// nonzero values flag multiple candidate roots (the solver keeps the
    /// smallest nonnegative one).
    pub extra_phi_sign_changes: usize,
    /// Maximum-principle box bounds `0 <= L* <= L0`, `0 <= H* <= H0`,
    /// `0 <= F* <= M0` verified nodewise (with roundoff slack).
    pub box_bounds_ok: bool,
    /// Inner Newton iterations summed over the whole `rho4` search.
    pub newton_iterations_total: usize,
}

/// Second derivatives of the profiles at `r = 1-eps`, obtained by
/// substituting the PDE right-hand sides and first derivatives at the
/// boundary node rather than differentiating the discrete solution twice.
#[derive(Debug, Clone, Copy)]
pub struct SecondDerivatives {
    pub l2: f64,
    pub h2: f64,
    pub f2: f64,
    pub p2: f64,
}

struct NewtonContext<'a> {
    params: &'a ModelParams,
    rho4: f64,
    grid: &'a RadialGrid,
    /// `-D2 - diag(1/r) D1`, the discrete `-Laplacian` on radial functions.
    lap: DMatrix<f64>,
    eps2: f64,
}

impl<'a> NewtonContext<'a> {
    fn new(params: &'a ModelParams, rho4: f64, grid: &'a RadialGrid) -> Self {
        let n = grid.len();
        let mut lap = DMatrix::zeros(n, n);
        for i in 0..n {
            let r = grid.nodes[i];
            for j in 0..n {
                lap[(i, j)] = -grid.d2[(i, j)] - grid.d1[(i, j)] / r;
            }
        }
        NewtonContext { params, rho4, grid, lap, eps2: grid.eps * grid.eps }
    }

    fn n(&self) -> usize {
        self.grid.len()
    }

    fn residual(&self, u: &DVector<f64>) -> DVector<f64> {
        let n = self.n();
        let p = self.params;
        let (l, h, f, pr) = split(u, n);
        let lap_l = apply(&self.lap, l);
        let lap_h = apply(&self.lap, h);
        let lap_f = apply(&self.lap, f);
        let lap_p = apply(&self.lap, pr);
        let d1_f = apply(&self.grid.d1, f);
        let d1_p = apply(&self.grid.d1, pr);
        let d1_l = apply(&self.grid.d1, l);
        let d1_h = apply(&self.grid.d1, h);

        let mut r = DVector::zeros(4 * n);
        for i in 1..n - 1 {
            let rr = reactions::rhs(p, self.rho4, l[i], h[i], f[i]);
            r[i] = self.eps2 * (lap_l[i] - rr[0]);
            r[n + i] = self.eps2 * (lap_h[i] - rr[1]);
            r[2 * n + i] = self.eps2 * (p.D * lap_f[i] - d1_f[i] * d1_p[i] - rr[2]);
            r[3 * n + i] = self.eps2 * (lap_p[i] - rr[3]);
        }
        let last = n - 1;
        let l0 = p.l0();
        r[0] = -d1_l[0] + p.beta1 * (l[0] - l0);
        r[last] = d1_l[last];
        r[n] = -d1_h[0] + p.beta1 * (h[0] - p.H0);
        r[n + last] = d1_h[last];
        r[2 * n] = -d1_f[0] + p.beta2 * f[0];
        r[2 * n + last] = d1_f[last];
        r[3 * n] = pr[0] + 1.0 / (1.0 - self.grid.eps);
        r[3 * n + last] = d1_p[last];
        r
    }

    fn jacobian(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let p = self.params;
        let (l, h, f, pr) = split(u, n);
        let d1_f = apply(&self.grid.d1, f);
        let d1_p = apply(&self.grid.d1, pr);

        let mut jm = DMatrix::zeros(4 * n, 4 * n);
        for i in 1..n - 1 {
            let jr = reactions::jacobian(p, self.rho4, l[i], h[i], f[i]);
            for j in 0..n {
                let lap_ij = self.eps2 * self.lap[(i, j)];
                let d1_ij = self.eps2 * self.grid.d1[(i, j)];
                // L row
                jm[(i, j)] = lap_ij;
                // H row
                jm[(n + i, n + j)] = lap_ij;
                // F row: D*lap - F' p' advection (both factors vary)
                jm[(2 * n + i, 2 * n + j)] = p.D * lap_ij - d1_p[i] * d1_ij;
                jm[(2 * n + i, 3 * n + j)] = -d1_f[i] * d1_ij;
                // p row
                jm[(3 * n + i, 3 * n + j)] = lap_ij;
            }
            // reaction couplings (diagonal in space)
            jm[(i, i)] -= self.eps2 * jr[0][0];
            jm[(i, n + i)] -= self.eps2 * jr[0][1];
            jm[(i, 2 * n + i)] -= self.eps2 * jr[0][2];
            jm[(n + i, i)] -= self.eps2 * jr[1][0];
            jm[(n + i, n + i)] -= self.eps2 * jr[1][1];
            jm[(n + i, 2 * n + i)] -= self.eps2 * jr[1][2];
            jm[(2 * n + i, i)] -= self.eps2 * jr[2][0];
            jm[(2 * n + i, n + i)] -= self.eps2 * jr[2][1];
            jm[(2 * n + i, 2 * n + i)] -= self.eps2 * jr[2][2];
            jm[(3 * n + i, i)] -= self.eps2 * jr[3][0];
            jm[(3 * n + i, n + i)] -= self.eps2 * jr[3][1];
            jm[(3 * n + i, 2 * n + i)] -= self.eps2 * jr[3][2];
        }
        let last = n - 1;
        for j in 0..n {
            let d0 = self.grid.d1[(0, j)];
            let dl = self.grid.d1[(last, j)];
            for block in 0..4 {
                let b = block * n;
                if block == 3 {
                    // Dirichlet row for p at the interface
                    jm[(b, b + j)] = if j == 0 { 1.0 } else { 0.0 };
                } else {
                    jm[(b, b + j)] = -d0;
                }
                jm[(b + last, b + j)] = dl;
            }
        }
        jm[(0, 0)] += p.beta1;
        jm[(n, n)] += p.beta1;
        jm[(2 * n, 2 * n)] += p.beta2;
        jm
    }
}

fn split(u: &DVector<f64>, n: usize) -> (&[f64], &[f64], &[f64], &[f64]) {
    let s = u.as_slice();
    (&s[0..n], &s[n..2 * n], &s[2 * n..3 * n], &s[3 * n..4 * n])
}

fn pack(p: &Profiles) -> DVector<f64> {
    let n = p.l.len();
    let mut u = DVector::zeros(4 * n);
    for i in 0..n {
        u[i] = p.l[i];
        u[n + i] = p.h[i];
        u[2 * n + i] = p.f[i];
        u[3 * n + i] = p.p[i];
    }
    u
}

fn unpack(u: &DVector<f64>, n: usize) -> Profiles {
    let (l, h, f, p) = split(u, n);
    Profiles { l: l.to_vec(), h: h.to_vec(), f: f.to_vec(), p: p.to_vec() }
}

/// First-order asymptotic initial guess: constants plus `eps` times the
/// closed-form coefficients, `p` pinned at the interface curvature value.
pub fn initial_guess(params: &ModelParams, grid: &RadialGrid) -> Profiles {
    let c = params.asymptotic_coefficients();
    let n = grid.len();
    let l_base = params.rho3 * params.gamma_h0() / params.lambda + params.eps * c.lstar1;
    let h_base = params.H0 + params.eps * c.hstar1;
    let f_base = params.eps * c.fstar1;
    Profiles {
        l: vec![l_base; n],
        h: vec![h_base; n],
        f: vec![f_base; n],
        p: vec![-1.0 / (1.0 - grid.eps); n],
    }
}

/// Damped-Newton solve of the coupled system at fixed `rho4`.
///
/// `rho4` may be any real; negative values need
/// `settings.allow_negative_rho4`. The initial guess is the asymptotic one
/// unless a warm start is supplied.
pub fn solve_inner(
    params: &ModelParams,
    rho4: f64,
    grid: &RadialGrid,
    settings: &SteadySettings,
    warm: Option<&Profiles>,
) -> Result<InnerSolution, SteadyError> {
    if !settings.allow_invalid_params {
        let v = params.validate();
        if !v.is_empty() {
            return Err(SteadyError::InvalidParams(v));
        }
    }
    if rho4 < 0.0 && !settings.allow_negative_rho4 {
        return Err(SteadyError::NegativeRho4 { rho4 });
    }

    let ctx = NewtonContext::new(params, rho4, grid);
    let mut u = match warm {
        Some(w) => pack(w),
        None => pack(&initial_guess(params, grid)),
    };
    let mut r = ctx.residual(&u);
    let mut rn = r.amax();
    let mut iterations = 0;
    let mut slow_steps = 0usize;

    loop {
        // Two consecutive iterations with < 4x residual reduction while the
        // residual sits within the stall window: rounding floor reached.
        if slow_steps >= 2 && rn <= tolerances::NEWTON_STALL_FACTOR * settings.tol_newton {
            return Ok(InnerSolution { profiles: unpack(&u, ctx.n()), residual_norm: rn, iterations });
        }
        if rn.is_finite() && rn <= settings.tol_newton {
            // One undamped polish step: quadratic convergence pushes the
            // residual to its rounding floor, which the tight Phi and g
            // tolerances downstream depend on.
            if let Some((du, _)) = solve_dense_diag(&ctx.jacobian(&u), &(-&r)) {
                let u_try = &u + &du;
                let r_try = ctx.residual(&u_try);
                let rn_try = r_try.amax();
                if rn_try.is_finite() && rn_try < rn {
                    u = u_try;
                    rn = rn_try;
                }
            }
            return Ok(InnerSolution { profiles: unpack(&u, ctx.n()), residual_norm: rn, iterations });
        }
        if iterations >= settings.max_iter {
            if rn <= tolerances::NEWTON_STALL_FACTOR * settings.tol_newton {
                // Iteration budget burned shuffling floor-level rounding
                // noise; the iterate is converged for every practical
                // purpose (see NEWTON_STALL_FACTOR).
                return Ok(InnerSolution {
                    profiles: unpack(&u, ctx.n()),
                    residual_norm: rn,
                    iterations,
                });
            }
            return Err(SteadyError::MaxIterations { last_residual: rn, iterations });
        }
        let jm = ctx.jacobian(&u);
        let (du, rcond) = solve_dense_diag(&jm, &(-&r))
            .ok_or(SteadyError::SingularJacobian { rcond: 0.0 })?;
        if rcond < 1e-15 {
            return Err(SteadyError::SingularJacobian { rcond });
        }
        let mut alpha = 1.0;
        let mut halvings = 0;
        loop {
            let u_try = &u + alpha * &du;
            let r_try = ctx.residual(&u_try);
            let rn_try = r_try.amax();
            if rn_try.is_finite() && rn_try < rn {
                slow_steps = if rn_try > 0.25 * rn { slow_steps + 1 } else { 0 };
                u = u_try;
                r = r_try;
                rn = rn_try;
                break;
            }
            halvings += 1;
            if halvings > settings.max_halvings {
                // No step length improves the residual: the iterate sits at
                // the rounding floor of the scaled assembly. Accept it when
                // it is within sight of the tolerance, fail otherwise.
                if rn <= tolerances::NEWTON_STALL_FACTOR * settings.tol_newton {
                    return Ok(InnerSolution {
                        profiles: unpack(&u, ctx.n()),
                        residual_norm: rn,
                        iterations,
                    });
                }
                return Err(SteadyError::NewtonDiverged {
                    last_residual: rn,
                    iterations,
                    halvings: halvings - 1,
                });
            }
            alpha /= 2.0;
        }
        iterations += 1;
    }
}

/// The stationarity functional over the solved fixed-`rho4` profiles.
pub fn phi_from_profiles(params: &ModelParams, rho4: f64, grid: &RadialGrid, pr: &Profiles) -> f64 {
    let integrand: Vec<f64> = (0..grid.len())
        .map(|i| {
            let b = reactions::rhs(params, rho4, pr.l[i], pr.h[i], pr.f[i])[3] * params.M0;
            b * grid.nodes[i]
        })
        .collect();
    grid.integrate(&integrand)
}

/// Solves the inner system at `rho4` (params carry `mu`) and evaluates
/// `Phi`. Returns the value together with the profiles for reuse.
pub fn phi(
    params: &ModelParams,
    rho4: f64,
    grid: &RadialGrid,
    settings: &SteadySettings,
    warm: Option<&Profiles>,
) -> Result<(f64, InnerSolution), SteadyError> {
    let sol = solve_inner(params, rho4, grid, settings, warm)?;
    let value = phi_from_profiles(params, rho4, grid, &sol.profiles);
    Ok((value, sol))
}

/// Full steady solve: outer bracketed root-find of `Phi(rho4) = 0` around
/// the inner Newton, then diagnostics.
pub fn solve_steady(
    params: &ModelParams,
    grid: &RadialGrid,
    settings: &SteadySettings,
) -> Result<SteadyState, SteadyError> {
    if !settings.allow_invalid_params {
        let v = params.validate();
        if !v.is_empty() {
            return Err(SteadyError::InvalidParams(v));
        }
    }
    let coeffs = params.asymptotic_coefficients();
    if params.mu <= coeffs.mu_c && !settings.allow_mu_below_critical {
        return Err(SteadyError::MuBelowCritical { mu: params.mu, mu_c: coeffs.mu_c });
    }

    let mut warm: Option<Profiles> = None;
    let mut newton_total = 0usize;
    let eval = |rho4: f64, warm_store: &mut Option<Profiles>, newton_total: &mut usize| {
        let (value, sol) = phi(params, rho4, grid, settings, warm_store.as_ref())?;
        *newton_total += sol.iterations;
        *warm_store = Some(sol.profiles);
        Ok::<f64, SteadyError>(value)
    };

    let tol_phi = tolerances::tol_phi(params.eps);
    // |Phi| accepted at bracket collapse: the value implying a relative
    // rho4 error of RHO4_COLLAPSE_RTOL through |dPhi/drho4| ~ eps^2 fstar1.
    let phi_guard = tolerances::RHO4_COLLAPSE_RTOL
        * params.eps
        * params.eps
        * coeffs.fstar1
        * (1.0 + coeffs.rho4_leading.abs());

    let phi0 = eval(0.0, &mut warm, &mut newton_total)?;
    let (rho4_star, phi_star, extra_sign_changes) = if phi0 == 0.0 {
        (0.0, 0.0, 0)
    } else if phi0 < 0.0 {
        // Phi(0) <= 0 means no nonnegative root in the theorem's regime.
        return Err(SteadyError::NoSignChange { hi: 0.0, phi_hi: phi0 });
    } else {
        let mut hi = if coeffs.rho4_leading > 0.0 { 2.0 * coeffs.rho4_leading } else { 1.0 };
        let mut phi_hi = eval(hi, &mut warm, &mut newton_total)?;
        let mut doublings = 0;
        while phi_hi > 0.0 {
            doublings += 1;
            if doublings > 60 {
                return Err(SteadyError::NoSignChange { hi, phi_hi });
            }
            hi *= 2.0;
            phi_hi = eval(hi, &mut warm, &mut newton_total)?;
        }
        // Coarse scan: take the first sign change (smallest nonnegative
        // root) and count any further ones.
        let mut xs = vec![0.0];
        let mut fs = vec![phi0];
        for j in 1..8 {
            let x = hi * j as f64 / 8.0;
            xs.push(x);
            fs.push(eval(x, &mut warm, &mut newton_total)?);
        }
        xs.push(hi);
        fs.push(phi_hi);
        let mut first = None;
        let mut changes = 0usize;
        for j in 0..xs.len() - 1 {
            if fs[j] == 0.0 {
                continue;
            }
            if fs[j] * fs[j + 1] <= 0.0 {
                changes += 1;
                if first.is_none() {
                    first = Some(j);
                }
            }
        }
        let j = first.expect("bracket endpoints have opposite signs");
        let result = brent(xs[j], fs[j], xs[j + 1], fs[j + 1], tol_phi, 200, |x| {
            eval(x, &mut warm, &mut newton_total)
        })?;
        // Accept a machine-width bracket whose best |Phi| sits above the
        // eps^2 law but within the rho4-accuracy guard (evaluation floor).
        if !result.converged && result.fx.abs() > tol_phi.max(phi_guard) {
            return Err(SteadyError::PhiNotConverged {
                phi: result.fx,
                tol: tol_phi.max(phi_guard),
            });
        }
        (result.x, result.fx, changes.saturating_sub(1))
    };

    // Final solve at the accepted rho4 (warm; cheap) and diagnostics.
    let final_sol = solve_inner(params, rho4_star, grid, settings, warm.as_ref())?;
    newton_total += final_sol.iterations;
    let pr = final_sol.profiles;
    let n = grid.len();

    let d1l = apply(&grid.d1, &pr.l);
    let d1h = apply(&grid.d1, &pr.h);
    let d1f = apply(&grid.d1, &pr.f);
    let d1p = apply(&grid.d1, &pr.p);
    let deriv_max = [&d1l, &d1h, &d1f, &d1p]
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));

    // p*'' at the interface from the pressure equation with p*' = 0 there.
    let bracket = reactions::rhs(params, rho4_star, pr.l[0], pr.h[0], pr.f[0])[3] * params.M0;
    let p2_inner = -bracket / params.M0;
    let j1 = p2_inner / (params.eps * params.eps);

    let p_prime_inner = d1p[0];
    let h_t = 1.0 / (n as f64 - 1.0);
    let consistency_tol = CONSISTENCY_FACTOR
        * params.eps
        * h_t
        * h_t
        * (1.0 + (params.mu - coeffs.mu_c).abs() / params.gamma_h0());
    if p_prime_inner.abs() > consistency_tol {
        return Err(SteadyError::ConsistencyCheck {
            p_prime_inner,
            tol: consistency_tol,
        });
    }

    let l0 = params.l0();
    let slack = 1e-10;
    let box_bounds_ok = pr.l.iter().all(|&v| v >= -slack * l0 && v <= l0 * (1.0 + slack))
        && pr.h.iter().all(|&v| v >= -slack * params.H0 && v <= params.H0 * (1.0 + slack))
        && pr.f.iter().all(|&v| v >= -slack * params.M0 && v <= params.M0 * (1.0 + slack));

    Ok(SteadyState {
        grid: grid.clone(),
        lstar: pr.l,
        hstar: pr.h,
        fstar: pr.f,
        pstar: pr.p,
        rho4: rho4_star,
        residual_norm: final_sol.residual_norm,
        phi_residual: phi_star,
        p2_inner,
        j1,
        deriv_max,
        p_prime_inner,
        extra_phi_sign_changes: extra_sign_changes,
        box_bounds_ok,
        newton_iterations_total: newton_total,
    })
}

/// PDE-substituted second derivatives at the interface node:
/// `u'' = Lap u - u'/r` with `Lap u` replaced by the equation right-hand
/// side; for the pressure, `p*'(1-eps) = 0` reduces this to
/// `p*'' = -(1/M0)[lambda(M0-F*)L*/(gamma+H*) - rho3(M0-F*) - rho4 F*]`.
pub fn second_derivatives_at_inner(state: &SteadyState, params: &ModelParams) -> SecondDerivatives {
    let r0 = state.grid.nodes[0];
    let l1 = state.grid.deriv(&state.lstar)[0];
    let h1 = state.grid.deriv(&state.hstar)[0];
    let f1 = state.grid.deriv(&state.fstar)[0];
    let p1 = state.grid.deriv(&state.pstar)[0];
    let rr = reactions::rhs(params, state.rho4, state.lstar[0], state.hstar[0], state.fstar[0]);
    SecondDerivatives {
        l2: -rr[0] - l1 / r0,
        h2: -rr[1] - h1 / r0,
        f2: (-rr[2] - f1 * p1) / params.D - f1 / r0,
        p2: -rr[3],
    }
}
