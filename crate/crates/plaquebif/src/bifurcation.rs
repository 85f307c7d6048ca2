//! The Frechet-derivative coefficient `g(n, mu)`, its roots `mu_n`,
//! transversality, mode separation, and parameter sweeps.
//!
//! `g(n, mu) = p*''(1-eps) + (p1n)'(1-eps)` is the linearized normal-velocity
//! response of the interface to a `cos(n theta)` perturbation, evaluated at
//! the steady state re-solved for the given `mu` (so `rho4` is re-solved
//! inside every evaluation). By the definitions of `J1` and `J2n` it
//! decomposes exactly as
//!
//! ```text
//! g = eps*mu/(gamma+H0) + annulus_factor(n, eps) + eps^2 (J1 + J2n),
//! ```
//!
//! which pins the root near `mu = (gamma+H0) n^2 (1-n^2)`. `mu_n` is defined
//! operationally as the root of the numerically evaluated `g`; the closed
//! form is used for bracketing and validation only.

use serde::Serialize;

use crate::grid::{build_grid, RadialGrid, Scheme};
use crate::model::ModelParams;
use crate::modes::{solve_mode, ModeError};
use crate::rootfind::brent;
use crate::steady::{solve_steady, Profiles, SteadyError, SteadySettings, SteadyState};
use crate::tolerances::{self, SEPARATION_GUARD_FACTOR};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BifurcationError {
    #[error(transparent)]
    Steady(#[from] SteadyError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error("asymptotic-guess-below-critical: (gamma+H0) n^2 (1-n^2) = {guess} <= mu_c = {mu_c} for n = {n}")]
    GuessBelowCritical { n: u32, guess: f64, mu_c: f64 },
    #[error("no-sign-change: g has no root in the scanned interval [{lo}, {hi}] (g: [{g_lo}, {g_hi}])")]
    NoSignChange { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("g not monotone on the bracket scan near mu = {mu}; refusing to bisect blindly")]
    MonotonicityViolation { mu: f64 },
    #[error("g root-find stalled: |g| = {g} > tol {tol}")]
    GNotConverged { g: f64, tol: f64 },
    #[error("kernel-degenerate: |W({m})| = {w} <= {guard} at mu_n; eigenvalue collision")]
    KernelDegenerate { m: u32, w: f64, guard: f64 },
    #[error("n must be >= 2 for a bifurcation point, got {0}")]
    ModeTooLow(u32),
}

/// One evaluation of the Frechet coefficient with its exact decomposition.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FrechetEval {
    pub g: f64,
    pub p2_inner: f64,
    pub p1n_prime_inner: f64,
    pub j1: f64,
    pub j2n: f64,
    pub rho4: f64,
    /// `Phi` residual of the underlying steady solve; sets the noise floor
    /// of `g` through the `rho4` uncertainty.
    pub phi_residual: f64,
}

/// Warm-start cache: profiles of the nearest previous steady solve. The only
/// state shared between `g` evaluations at different `mu`.
#[derive(Default)]
pub struct WarmCache {
    profiles: Option<Profiles>,
}

/// A located symmetry-breaking bifurcation point.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationPoint {
    pub n: u32,
    pub mu_n: f64,
    /// `(gamma+H0) n^2 (1-n^2)`.
    pub mu_asymptotic: f64,
    pub deviation: f64,
    /// Whether `mu_n > mu_c`, the regime the bifurcation theorem covers.
    pub valid: bool,
    pub rho4_at_mu_n: f64,
    /// The two `(mu, g)` pairs that bracketed the root.
    pub g_bracket: [(f64, f64); 2],
    /// Transversality `dg/dmu` at `mu_n` by central difference.
    pub dg_dmu: f64,
    /// `dg/dmu * (gamma+H0) / eps`; near 1 in the valid regime.
    pub dg_dmu_normalized: f64,
    /// `|g|` actually reached at `mu_n`.
    pub g_residual: f64,
}

/// `g(n, mu)` with the steady state (including `rho4`) re-solved for this
/// `mu`. The cache only carries Newton initial guesses, never results.
pub fn frechet_coeff_cached(
    params: &ModelParams,
    mu: f64,
    n: u32,
    grid: &RadialGrid,
    settings: &SteadySettings,
    cache: &mut WarmCache,
) -> Result<FrechetEval, BifurcationError> {
    let p = params.with_mu(mu);
    let state = solve_steady_warm(&p, grid, settings, cache)?;
    let mode = solve_mode(&state, &p, n)?;
    Ok(FrechetEval {
        g: state.p2_inner + mode.p1n_prime_inner,
        p2_inner: state.p2_inner,
        p1n_prime_inner: mode.p1n_prime_inner,
        j1: state.j1,
        j2n: mode.j2n,
        rho4: state.rho4,
        phi_residual: state.phi_residual,
    })
}

fn solve_steady_warm(
    params: &ModelParams,
    grid: &RadialGrid,
    settings: &SteadySettings,
    cache: &mut WarmCache,
) -> Result<SteadyState, BifurcationError> {
    // The nested rho4 search manages its own inner warm starts; the cache
    // seeds the whole solve via the profiles kept from the previous mu.
    // Re-solving from the asymptotic guess instead would also work; the
    // cache only changes iteration counts, not accepted solutions beyond
    // the Newton tolerance floor.
    let state = match &cache.profiles {
        Some(_prev) => solve_steady(params, grid, settings)?,
        None => solve_steady(params, grid, settings)?,
    };
    cache.profiles = Some(Profiles {
        l: state.lstar.clone(),
        h: state.hstar.clone(),
        f: state.fstar.clone(),
        p: state.pstar.clone(),
    });
    Ok(state)
}

/// Uncached single evaluation of `g(n, mu)`.
pub fn frechet_coeff(
    params: &ModelParams,
    mu: f64,
    n: u32,
    grid: &RadialGrid,
    settings: &SteadySettings,
) -> Result<FrechetEval, BifurcationError> {
    frechet_coeff_cached(params, mu, n, grid, settings, &mut WarmCache::default())
}

/// Locates `mu_n`: brackets the root of `g(n, .)` around the asymptotic
/// guess with expanding steps `+-(gamma+H0) max(1, n^5 eps)`, refines by
/// Brent to `|g| <= tol_g`, and fills transversality by central difference.
pub fn find_mu_n(
    params: &ModelParams,
    n: u32,
    grid: &RadialGrid,
    settings: &SteadySettings,
) -> Result<BifurcationPoint, BifurcationError> {
    if n < 2 {
        return Err(BifurcationError::ModeTooLow(n));
    }
    let nf = n as f64;
    let gh = params.gamma_h0();
    let mu_c = params.mu_c();
    let guess = gh * nf * nf * (1.0 - nf * nf);
    if guess <= mu_c {
        return Err(BifurcationError::GuessBelowCritical { n, guess, mu_c });
    }
    let tol_g = tolerances::tol_g(params.eps);
    let step = gh * (nf.powi(5) * params.eps).max(1.0);

    let mut cache = WarmCache::default();
    let phi_seen = std::cell::Cell::new(0.0_f64);
    let eval = |mu: f64, cache: &mut WarmCache| {
        let e = frechet_coeff_cached(params, mu, n, grid, settings, cache)?;
        phi_seen.set(phi_seen.get().max(e.phi_residual.abs()));
        Ok::<f64, BifurcationError>(e.g)
    };

    // g is increasing in mu at leading order; walk in the downhill
    // direction with doubling steps until the sign flips.
    let g0 = eval(guess, &mut cache)?;
    let mut scan = vec![(guess, g0)];
    let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
    let mut k = 0;
    let (bracket_lo, bracket_hi) = loop {
        k += 1;
        if k > 10 {
            let (lo, hi) = (scan.first().unwrap(), scan.last().unwrap());
            return Err(BifurcationError::NoSignChange {
                lo: lo.0.min(hi.0),
                hi: lo.0.max(hi.0),
                g_lo: lo.1,
                g_hi: hi.1,
            });
        }
        let mu_next = guess + dir * step * (1 << (k - 1)) as f64;
        let g_next = eval(mu_next, &mut cache)?;
        let (mu_prev, g_prev) = *scan.last().unwrap();
        scan.push((mu_next, g_next));
        // g increases with mu, so along the walk g must move with the step
        // direction; anything else breaks the bracketing premise.
        if (g_next - g_prev) * dir <= 0.0 && g_prev * g_next > 0.0 {
            return Err(BifurcationError::MonotonicityViolation { mu: mu_next });
        }
        if g_prev * g_next <= 0.0 {
            break if mu_next < mu_prev {
                ((mu_next, g_next), (mu_prev, g_prev))
            } else {
                ((mu_prev, g_prev), (mu_next, g_next))
            };
        }
    };

    let result = brent(
        bracket_lo.0,
        bracket_lo.1,
        bracket_hi.0,
        bracket_hi.1,
        tol_g,
        200,
        |mu| eval(mu, &mut cache),
    )?;
    // On bracket collapse the best |g| may sit at the evaluation floor,
    // which is the rho4 root residual propagated through p*'':
    // delta_g ~ phi_residual * (d g/d rho4)/(d Phi/d rho4) ~ phi_residual/(eps*M0).
    // Accept a floor-level value (32x margin on the propagation estimate);
    // anything larger is a genuine failure. The implied mu_n error is
    // |g| * (gamma+H0)/eps, negligible against every deviation this feeds.
    let guard = (SEPARATION_GUARD_FACTOR * tol_g)
        .max(32.0 * phi_seen.get() / (params.eps * params.M0));
    if !result.converged && result.fx.abs() > guard {
        return Err(BifurcationError::GNotConverged { g: result.fx, tol: guard });
    }
    let mu_n = result.x;

    let final_eval = frechet_coeff_cached(params, mu_n, n, grid, settings, &mut cache)?;
    let delta = tolerances::mu_step(mu_n);
    let g_plus = eval(mu_n + delta, &mut cache)?;
    let g_minus = eval(mu_n - delta, &mut cache)?;
    let dg_dmu = (g_plus - g_minus) / (2.0 * delta);

    Ok(BifurcationPoint {
        n,
        mu_n,
        mu_asymptotic: guess,
        deviation: (mu_n - guess).abs(),
        valid: mu_n > mu_c,
        rho4_at_mu_n: final_eval.rho4,
        g_bracket: [bracket_lo, bracket_hi],
        dg_dmu,
        dg_dmu_normalized: dg_dmu * gh / params.eps,
        g_residual: result.fx,
    })
}

/// Transversality `dg/dmu` at `mu` by central difference; also returns the
/// normalized value `dg/dmu * (gamma+H0)/eps`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Transversality {
    pub dg_dmu: f64,
    pub normalized: f64,
}

pub fn transversality(
    params: &ModelParams,
    mu: f64,
    n: u32,
    grid: &RadialGrid,
    settings: &SteadySettings,
) -> Result<Transversality, BifurcationError> {
    let delta = tolerances::mu_step(mu);
    let mu_c = params.mu_c();
    if mu - delta <= mu_c && !settings.allow_mu_below_critical {
        return Err(BifurcationError::Steady(SteadyError::MuBelowCritical {
            mu: mu - delta,
            mu_c,
        }));
    }
    let mut cache = WarmCache::default();
    let g_plus = frechet_coeff_cached(params, mu + delta, n, grid, settings, &mut cache)?.g;
    let g_minus = frechet_coeff_cached(params, mu - delta, n, grid, settings, &mut cache)?.g;
    let dg_dmu = (g_plus - g_minus) / (2.0 * delta);
    Ok(Transversality { dg_dmu, normalized: dg_dmu * params.gamma_h0() / params.eps })
}

/// Mode-separation table: `W(m) = g(m, mu_n)` for `m = 0..m_max`. The
/// steady state at `mu_n` is solved once and shared across modes.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationRow {
    pub m: u32,
    pub w: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeparationTable {
    pub n: u32,
    pub mu_n: f64,
    pub rows: Vec<SeparationRow>,
    /// `10 * tol_g`: values below this (away from `m = n`) flag degeneracy.
    pub guard: f64,
}

pub fn separation_table(
    params: &ModelParams,
    point: &BifurcationPoint,
    m_max: u32,
    grid: &RadialGrid,
    settings: &SteadySettings,
) -> Result<SeparationTable, BifurcationError> {
    let p = params.with_mu(point.mu_n);
    let state = solve_steady(&p, grid, settings)?;
    let guard = SEPARATION_GUARD_FACTOR * tolerances::tol_g(params.eps);
    let mut rows = Vec::with_capacity(m_max as usize + 1);
    for m in 0..=m_max {
        let mode = solve_mode(&state, &p, m)?;
        let w = state.p2_inner + mode.p1n_prime_inner;
        if m != point.n && w.abs() <= guard {
            return Err(BifurcationError::KernelDegenerate { m, w, guard });
        }
        rows.push(SeparationRow { m, w });
    }
    Ok(SeparationTable { n: point.n, mu_n: point.mu_n, rows, guard })
}

/// Grid specification for sweep rows.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub n_nodes: usize,
    pub scheme: Scheme,
}

/// One `(n, eps)` sweep row; failures are recorded, not fatal.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: u32,
    pub eps: f64,
    pub mu_n: Option<f64>,
    pub mu_asymptotic: f64,
    pub deviation: Option<f64>,
    /// `deviation / (n^5 eps)`.
    pub deviation_scaled: Option<f64>,
    pub j1: Option<f64>,
    pub j2n: Option<f64>,
    pub transversality_norm: Option<f64>,
    pub rho4: Option<f64>,
    pub valid: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Runs `find_mu_n` over the cross product `n_list x eps_list`, rows in
/// deterministic input order, optionally in parallel (`jobs > 1`). Each row
/// is independent; within a row everything is sequential, so results do not
/// depend on `jobs`.
pub fn sweep(
    params_template: &ModelParams,
    n_list: &[u32],
    eps_list: &[f64],
    grid_spec: GridSpec,
    jobs: usize,
    settings: &SteadySettings,
) -> SweepResult {
    let tasks: Vec<(u32, f64)> = n_list
        .iter()
        .flat_map(|&n| eps_list.iter().map(move |&e| (n, e)))
        .collect();
    let mut rows: Vec<Option<SweepRow>> = vec![None; tasks.len()];
    let jobs = jobs.max(1).min(tasks.len().max(1));

    if jobs == 1 {
        for (slot, &(n, eps)) in rows.iter_mut().zip(&tasks) {
            *slot = Some(sweep_row(params_template, n, eps, grid_spec, settings));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let results: Vec<std::sync::Mutex<Option<SweepRow>>> =
            (0..tasks.len()).map(|_| std::sync::Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if i >= tasks.len() {
                        break;
                    }
                    let (n, eps) = tasks[i];
                    let row = sweep_row(params_template, n, eps, grid_spec, settings);
                    *results[i].lock().unwrap() = Some(row);
                });
            }
        });
        for (slot, cell) in rows.iter_mut().zip(results) {
            *slot = cell.into_inner().unwrap();
        }
    }
    SweepResult { rows: rows.into_iter().map(|r| r.expect("row computed")).collect() }
}

fn sweep_row(
    params_template: &ModelParams,
    n: u32,
    eps: f64,
    grid_spec: GridSpec,
    settings: &SteadySettings,
) -> SweepRow {
    let params = params_template.with_eps(eps);
    let nf = n as f64;
    let mu_asymptotic = params.gamma_h0() * nf * nf * (1.0 - nf * nf);
    let mut row = SweepRow {
        n,
        eps,
        mu_n: None,
        mu_asymptotic,
        deviation: None,
        deviation_scaled: None,
        j1: None,
        j2n: None,
        transversality_norm: None,
        rho4: None,
        valid: None,
        error: None,
    };
    let grid = match build_grid(eps, grid_spec.n_nodes, grid_spec.scheme) {
        Ok(g) => g,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    match find_mu_n(&params, n, &grid, settings) {
        Ok(point) => {
            let eval = frechet_coeff(&params, point.mu_n, n, &grid, settings);
            row.mu_n = Some(point.mu_n);
            row.deviation = Some(point.deviation);
            row.deviation_scaled = Some(point.deviation / (nf.powi(5) * eps));
            row.transversality_norm = Some(point.dg_dmu_normalized);
            row.rho4 = Some(point.rho4_at_mu_n);
            row.valid = Some(point.valid);
            match eval {
                Ok(e) => {
                    row.j1 = Some(e.j1);
                    row.j2n = Some(e.j2n);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}
