//! Linearized mode-n system around a converged steady state.
//!
//! Writing the boundary perturbation as `cos(n theta)` separates the
//! linearization into radial profiles `(L1n, H1n, F1n, p1n)` governed by the
//! mode operator `L_n` with reaction couplings frozen at the steady
//! profiles. The inhomogeneous data sit on the inner boundary: Robin data
//! `(X*'' - beta X*')|_{1-eps}` for L, H, F and the curvature Dirichlet
//! datum `G = (1-n^2)/(1-eps)^2` for the pressure mode.
//!
//! The whole 4-field system is solved monolithically (the `F*' (p1n)'`
//! coupling stays inside the block solve; `|F*'| = O(eps)` makes it weak but
//! splitting it out would trade an exact solve for an iteration). The
//! quantity the bifurcation condition needs is `(p1n)'(1-eps)`, extracted
//! from the one-sided `D1` row, and its `eps^2`-normalized remainder `J2n`
//! against the sharp prediction `eps*mu/(gamma+H0) + annulus_factor(n, eps)`.

use nalgebra::{DMatrix, DVector};

use crate::grid::apply;
use crate::kernel::{self, KernelSolution};
use crate::linalg::solve_dense_diag;
use crate::model::ModelParams;
use crate::reactions;
use crate::steady::{second_derivatives_at_inner, SteadyState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModeError {
    #[error("singular-system: mode n = {n} linear system is singular (rcond ~ {rcond:.3e}); possible eigenvalue collision")]
    SingularSystem { n: u32, rcond: f64 },
}

/// Solution of the linearized mode-n system.
#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub n: u32,
    pub l1n: Vec<f64>,
    pub h1n: Vec<f64>,
    pub f1n: Vec<f64>,
    pub p1n: Vec<f64>,
    /// Inner Robin data `(L*'' - beta1 L*')|_{1-eps}`, etc.; independent of n.
    pub bdata_l: f64,
    pub bdata_h: f64,
    pub bdata_f: f64,
    /// Inner Dirichlet datum for the pressure mode.
    pub g_inner: f64,
    /// `(p1n)'(1-eps)` from the one-sided D1 row.
    pub p1n_prime_inner: f64,
    /// `(p1n)'(1-eps) = eps*mu/(gamma+H0) + annulus_factor + eps^2 J2n`.
    pub j2n: f64,
    /// Node samples of the pressure-equation forcing `f8`.
    pub f8_samples: Vec<f64>,
}

/// Node-sampled multiplier arrays of `(L1n, H1n, F1n)` for each linearized
/// equation, plus the gradient-coupling profile derivatives.
#[derive(Debug, Clone)]
pub struct LinearizedCoefficients {
    /// L-equation (`f5`) multipliers.
    pub f5: [Vec<f64>; 3],
    /// H-equation (`f6`) multipliers.
    pub f6: [Vec<f64>; 3],
    /// F-equation (`f7`) multipliers; derived symbolically from the full
    /// F reaction and certified against the finite-difference oracle.
    pub f7: [Vec<f64>; 3],
    /// Pressure-equation (`f8`) multipliers.
    pub f8: [Vec<f64>; 3],
    /// `F*'` samples coupling `(p1n)'` into the F equation.
    pub fstar_prime: Vec<f64>,
    /// `p*'` samples advecting `(F1n)'`.
    pub pstar_prime: Vec<f64>,
}

/// Inhomogeneous Robin data of the mode system, from the PDE-substituted
/// second derivatives at the interface. Independent of `n`.
pub fn mode_boundary_data(state: &SteadyState, params: &ModelParams) -> (f64, f64, f64) {
    let sd = second_derivatives_at_inner(state, params);
    let d1l = state.grid.deriv(&state.lstar)[0];
    let d1h = state.grid.deriv(&state.hstar)[0];
    let d1f = state.grid.deriv(&state.fstar)[0];
    (
        sd.l2 - params.beta1 * d1l,
        sd.h2 - params.beta1 * d1h,
        sd.f2 - params.beta2 * d1f,
    )
}

/// Freezes the reaction Jacobian at the steady profiles into per-equation
/// multiplier arrays.
pub fn linearized_rhs_coefficients(
    state: &SteadyState,
    params: &ModelParams,
) -> LinearizedCoefficients {
    let n = state.grid.len();
    let mut f5 = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut f6 = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut f7 = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut f8 = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for i in 0..n {
        let j = reactions::jacobian(params, state.rho4, state.lstar[i], state.hstar[i], state.fstar[i]);
        for k in 0..3 {
            f5[k][i] = j[0][k];
            f6[k][i] = j[1][k];
            f7[k][i] = j[2][k];
            f8[k][i] = j[3][k];
        }
    }
    LinearizedCoefficients {
        f5,
        f6,
        f7,
        f8,
        fstar_prime: state.grid.deriv(&state.fstar),
        pstar_prime: state.grid.deriv(&state.pstar),
    }
}

/// Assembles and solves the 4N x 4N mode system by direct factorization.
pub fn solve_mode(
    state: &SteadyState,
    params: &ModelParams,
    n_mode: u32,
) -> Result<ModeSolution, ModeError> {
    let grid = &state.grid;
    let n = grid.len();
    let coeffs = linearized_rhs_coefficients(state, params);
    let (bdata_l, bdata_h, bdata_f) = mode_boundary_data(state, params);
    let g_inner = (1.0 - (n_mode as f64).powi(2)) / (1.0 - grid.eps).powi(2);

    let eps2 = grid.eps * grid.eps;
    let n2 = (n_mode as f64).powi(2);
    let mut a = DMatrix::zeros(4 * n, 4 * n);
    let mut rhs = DVector::zeros(4 * n);

    // Interior rows, scaled by eps^2 like the steady solve.
    for i in 1..n - 1 {
        let r = grid.nodes[i];
        for j in 0..n {
            // L_n = -D2 - D1/r + n^2/r^2 on the diagonal blocks
            let ln_ij = eps2 * (-grid.d2[(i, j)] - grid.d1[(i, j)] / r);
            let d1_ij = eps2 * grid.d1[(i, j)];
            a[(i, j)] += ln_ij;
            a[(n + i, n + j)] += ln_ij;
            a[(2 * n + i, 2 * n + j)] += params.D * ln_ij - coeffs.pstar_prime[i] * d1_ij;
            a[(2 * n + i, 3 * n + j)] -= coeffs.fstar_prime[i] * d1_ij;
            a[(3 * n + i, 3 * n + j)] += ln_ij;
        }
        let mode_term = eps2 * n2 / (r * r);
        a[(i, i)] += mode_term;
        a[(n + i, n + i)] += mode_term;
        a[(2 * n + i, 2 * n + i)] += params.D * mode_term;
        a[(3 * n + i, 3 * n + i)] += mode_term;
        // reaction couplings
        a[(i, i)] -= eps2 * coeffs.f5[0][i];
        a[(i, n + i)] -= eps2 * coeffs.f5[1][i];
        a[(i, 2 * n + i)] -= eps2 * coeffs.f5[2][i];
        a[(n + i, i)] -= eps2 * coeffs.f6[0][i];
        a[(n + i, n + i)] -= eps2 * coeffs.f6[1][i];
        a[(n + i, 2 * n + i)] -= eps2 * coeffs.f6[2][i];
        a[(2 * n + i, i)] -= eps2 * coeffs.f7[0][i];
        a[(2 * n + i, n + i)] -= eps2 * coeffs.f7[1][i];
        a[(2 * n + i, 2 * n + i)] -= eps2 * coeffs.f7[2][i];
        a[(3 * n + i, i)] -= eps2 * coeffs.f8[0][i];
        a[(3 * n + i, n + i)] -= eps2 * coeffs.f8[1][i];
        a[(3 * n + i, 2 * n + i)] -= eps2 * coeffs.f8[2][i];
    }

    // Boundary rows: homogeneous Neumann at r = 1 for all four fields;
    // inhomogeneous Robin (L, H, F) and Dirichlet (p) at r = 1-eps.
    let last = n - 1;
    for j in 0..n {
        let d0 = grid.d1[(0, j)];
        let dl = grid.d1[(last, j)];
        for block in 0..4 {
            let b = block * n;
            if block == 3 {
                a[(b, b + j)] = if j == 0 { 1.0 } else { 0.0 };
            } else {
                a[(b, b + j)] = -d0;
            }
            a[(b + last, b + j)] = dl;
        }
    }
    a[(0, 0)] += params.beta1;
    a[(n, n)] += params.beta1;
    a[(2 * n, 2 * n)] += params.beta2;
    rhs[0] = bdata_l;
    rhs[n] = bdata_h;
    rhs[2 * n] = bdata_f;
    rhs[3 * n] = g_inner;

    let (x, rcond) = solve_dense_diag(&a, &rhs)
        .ok_or(ModeError::SingularSystem { n: n_mode, rcond: 0.0 })?;
    if rcond < 1e-15 {
        return Err(ModeError::SingularSystem { n: n_mode, rcond });
    }

    let l1n: Vec<f64> = x.as_slice()[0..n].to_vec();
    let h1n: Vec<f64> = x.as_slice()[n..2 * n].to_vec();
    let f1n: Vec<f64> = x.as_slice()[2 * n..3 * n].to_vec();
    let p1n: Vec<f64> = x.as_slice()[3 * n..4 * n].to_vec();

    let f8_samples: Vec<f64> = (0..n)
        .map(|i| {
            coeffs.f8[0][i] * l1n[i] + coeffs.f8[1][i] * h1n[i] + coeffs.f8[2][i] * f1n[i]
        })
        .collect();
    let p1n_prime_inner = grid.deriv(&p1n)[0];
    let j2n = (p1n_prime_inner
        - grid.eps * params.mu / params.gamma_h0()
        - kernel::annulus_factor(n_mode, grid.eps))
        / eps2;

    Ok(ModeSolution {
        n: n_mode,
        l1n,
        h1n,
        f1n,
        p1n,
        bdata_l,
        bdata_h,
        bdata_f,
        g_inner,
        p1n_prime_inner,
        j2n,
        f8_samples,
    })
}

/// Recomputes `p1n` through the analytic annulus machinery with
/// `eta = mu/(gamma+H0)` and `f = f8 - eta`, for cross-validation against
/// the direct block solve.
pub fn mode_via_kernel(
    state: &SteadyState,
    params: &ModelParams,
    n_mode: u32,
    mode_sol: &ModeSolution,
) -> KernelSolution {
    let eta = params.mu / params.gamma_h0();
    let f: Vec<f64> = mode_sol.f8_samples.iter().map(|v| v - eta).collect();
    kernel::solve_annulus_mode(n_mode, eta, &f, mode_sol.g_inner, &state.grid)
}

/// Homogenized mode profiles `X1n - bdata_X / beta`; the theory bounds these
/// by `C (n^2+1) eps` uniformly.
pub fn homogenized_profiles(sol: &ModeSolution, params: &ModelParams) -> [Vec<f64>; 3] {
    let shift_l = sol.bdata_l / params.beta1;
    let shift_h = sol.bdata_h / params.beta1;
    let shift_f = sol.bdata_f / params.beta2;
    [
        sol.l1n.iter().map(|v| v - shift_l).collect(),
        sol.h1n.iter().map(|v| v - shift_h).collect(),
        sol.f1n.iter().map(|v| v - shift_f).collect(),
    ]
}

/// Interior residual of the discrete mode equations at a candidate
/// solution; used by tests to cross-check the assembly.
pub fn mode_interior_residual(
    state: &SteadyState,
    params: &ModelParams,
    sol: &ModeSolution,
) -> f64 {
    let grid = &state.grid;
    let n = grid.len();
    let coeffs = linearized_rhs_coefficients(state, params);
    let n2 = (sol.n as f64).powi(2);
    let d2 = [&sol.l1n, &sol.h1n, &sol.f1n, &sol.p1n].map(|v| apply(&grid.d2, v));
    let d1 = [&sol.l1n, &sol.h1n, &sol.f1n, &sol.p1n].map(|v| apply(&grid.d1, v));
    let mut worst = 0.0_f64;
    for i in 1..n - 1 {
        let r = grid.nodes[i];
        let ln = |k: usize, v: &Vec<f64>| -d2[k][i] - d1[k][i] / r + n2 / (r * r) * v[i];
        let f5 = coeffs.f5[0][i] * sol.l1n[i]
            + coeffs.f5[1][i] * sol.h1n[i]
            + coeffs.f5[2][i] * sol.f1n[i];
        let f6 = coeffs.f6[0][i] * sol.l1n[i]
            + coeffs.f6[1][i] * sol.h1n[i]
            + coeffs.f6[2][i] * sol.f1n[i];
        let f7 = coeffs.f7[0][i] * sol.l1n[i]
            + coeffs.f7[1][i] * sol.h1n[i]
            + coeffs.f7[2][i] * sol.f1n[i];
        let f8 = sol.f8_samples[i];
        worst = worst.max((ln(0, &sol.l1n) - f5).abs());
        worst = worst.max((ln(1, &sol.h1n) - f6).abs());
        worst = worst.max(
            (params.D * ln(2, &sol.f1n)
                - d1[2][i] * coeffs.pstar_prime[i]
                - f7
                - coeffs.fstar_prime[i] * d1[3][i])
                .abs(),
        );
        worst = worst.max((ln(3, &sol.p1n) - f8).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Scheme};
    use crate::steady::{solve_steady, SteadySettings};
    use crate::tolerances::GRID_N_TEST;

    fn steady(params: &ModelParams) -> SteadyState {
        let g = build_grid(params.eps, GRID_N_TEST, Scheme::UniformFd2).unwrap();
        solve_steady(params, &g, &SteadySettings::default()).unwrap()
    }

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    #[test]
    fn boundary_data_scale_like_asymptotics() {
        let p = ModelParams::ref_a();
        let st = steady(&p);
        let c = p.asymptotic_coefficients();
        let (bl, bh, bf) = mode_boundary_data(&st, &p);
        let wl = p.mu / p.lambda - c.lstar1;
        assert!(
            (bl / p.beta1 - wl).abs() <= 5.0 * p.eps * (1.0 + wl.abs()),
            "{} vs {wl}",
            bl / p.beta1
        );
        assert!((bh / p.beta1 + c.hstar1).abs() <= 5.0 * p.eps * (1.0 + c.hstar1.abs()));
        assert!((bf / p.beta2 + c.fstar1).abs() <= 5.0 * p.eps * (1.0 + c.fstar1.abs()));
    }

    #[test]
    fn f8_coefficient_of_l1n_is_displayed_formula() {
        let p = ModelParams::ref_b();
        let st = steady(&p);
        let c = linearized_rhs_coefficients(&st, &p);
        for i in 0..st.grid.len() {
            let want = p.lambda * (p.M0 - st.fstar[i]) / (p.M0 * (p.gamma + st.hstar[i]));
            assert!((c.f8[0][i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn coefficients_match_fd_oracle_at_steady_profiles() {
        for p in [ModelParams::ref_a(), ModelParams::ref_b()] {
            let st = steady(&p);
            let samples: Vec<(f64, f64, f64)> = (0..st.grid.len())
                .map(|i| (st.lstar[i], st.hstar[i], st.fstar[i]))
                .collect();
            let worst = reactions::jacobian_oracle_mismatch(&p, st.rho4, samples);
            assert!(worst <= 1e-6, "oracle mismatch {worst}");
        }
    }

    #[test]
    fn mode_solution_satisfies_interior_equations_and_bcs() {
        let p = ModelParams::ref_b();
        let st = steady(&p);
        for n in [0u32, 1, 2, 5] {
            let sol = solve_mode(&st, &p, n).unwrap();
            let res = mode_interior_residual(&st, &p, &sol);
            assert!(res < 1e-6, "n={n}: interior residual {res}");
            // Neumann rows at r=1
            for v in [&sol.l1n, &sol.h1n, &sol.f1n, &sol.p1n] {
                let d = st.grid.deriv(v);
                assert!(d[st.grid.len() - 1].abs() < 1e-8, "n={n}");
            }
            // Dirichlet row for p at 1-eps is exact
            assert!((sol.p1n[0] - sol.g_inner).abs() < 1e-12, "n={n}");
            // Robin rows carry the boundary data
            let dl = st.grid.deriv(&sol.l1n);
            assert!((-dl[0] + p.beta1 * sol.l1n[0] - sol.bdata_l).abs() < 1e-8);
        }
    }

    #[test]
    fn linearity_in_boundary_data() {
        // The mode system is linear: scaling all boundary data by 2 scales
        // the solution by 2. Verified through a shifted-mu trick is not
        // possible (data are not free inputs), so check via superposition of
        // the interior residual instead: 2*solution satisfies the system
        // with doubled data.
        let p = ModelParams::ref_b();
        let st = steady(&p);
        let sol = solve_mode(&st, &p, 3).unwrap();
        let doubled = ModeSolution {
            l1n: sol.l1n.iter().map(|v| 2.0 * v).collect(),
            h1n: sol.h1n.iter().map(|v| 2.0 * v).collect(),
            f1n: sol.f1n.iter().map(|v| 2.0 * v).collect(),
            p1n: sol.p1n.iter().map(|v| 2.0 * v).collect(),
            f8_samples: sol.f8_samples.iter().map(|v| 2.0 * v).collect(),
            ..sol.clone()
        };
        let res = mode_interior_residual(&st, &p, &doubled);
        assert!(res < 2e-6, "doubled solution residual {res}");
        let dl = st.grid.deriv(&doubled.l1n);
        assert!((-dl[0] + p.beta1 * doubled.l1n[0] - 2.0 * sol.bdata_l).abs() < 1e-8);
    }

    #[test]
    fn l1n_matches_uniform_asymptotics() {
        // L1n = mu/lambda - lstar1 + O((n^2+1) eps) uniformly.
        let p = ModelParams::ref_b();
        let c = p.asymptotic_coefficients();
        let st = steady(&p);
        let want = p.mu / p.lambda - c.lstar1;
        for n in [0u32, 2, 4] {
            let sol = solve_mode(&st, &p, n).unwrap();
            let n2p1 = (n as f64).powi(2) + 1.0;
            let dev = sol.l1n.iter().fold(0.0_f64, |m, v| m.max((v - want).abs()));
            assert!(
                dev <= 60.0 * n2p1 * p.eps * (1.0 + want.abs()),
                "n={n}: dev {dev} vs scale {}",
                n2p1 * p.eps
            );
        }
    }

    #[test]
    fn f8_approaches_eta_uniformly() {
        // f8 = mu/(gamma+H0) + O((n^2+1) eps) at the solved amplitudes.
        let p = ModelParams::ref_b();
        let st = steady(&p);
        let eta = p.mu / p.gamma_h0();
        for n in [0u32, 3] {
            let sol = solve_mode(&st, &p, n).unwrap();
            let n2p1 = (n as f64).powi(2) + 1.0;
            let dev = sol.f8_samples.iter().fold(0.0_f64, |m, v| m.max((v - eta).abs()));
            assert!(dev <= 60.0 * n2p1 * p.eps * (1.0 + eta.abs()), "n={n}: dev {dev}");
        }
    }

    #[test]
    fn sharp_estimate_structure() {
        // |(p1n)'(1-eps) - eps mu/(gamma+H0) - annulus| <= C (n^2+1) eps^2,
        // i.e. |J2n| <= C (n^2+1); check boundedness across modes here.
        let p = ModelParams::ref_b();
        let st = steady(&p);
        for n in 0u32..=5 {
            let sol = solve_mode(&st, &p, n).unwrap();
            let n2p1 = (n as f64).powi(2) + 1.0;
            assert!(
                sol.j2n.abs() <= crate::tolerances::C_SHARP_ESTIMATE * n2p1,
                "n={n}: J2n = {} vs bound {}",
                sol.j2n,
                crate::tolerances::C_SHARP_ESTIMATE * n2p1
            );
        }
        // n = 1 annihilates the annulus factor entirely.
        assert_eq!(kernel::annulus_factor(1, p.eps), 0.0);
    }

    #[test]
    fn homogenized_profiles_are_small() {
        let p = ModelParams::ref_b();
        let st = steady(&p);
        for n in [0u32, 2, 5, 8] {
            let sol = solve_mode(&st, &p, n).unwrap();
            let n2p1 = (n as f64).powi(2) + 1.0;
            let hp = homogenized_profiles(&sol, &p);
            for (k, v) in hp.iter().enumerate() {
                let dev = max_abs(v);
                assert!(
                    dev <= 100.0 * n2p1 * p.eps,
                    "n={n} field {k}: homogenized size {dev} vs {}",
                    n2p1 * p.eps
                );
            }
        }
    }

    #[test]
    fn kernel_cross_path_agrees() {
        let p = ModelParams::ref_b();
        let st = steady(&p);
        for n in [0u32, 1, 3, 5] {
            let sol = solve_mode(&st, &p, n).unwrap();
            let ker = mode_via_kernel(&st, &p, n, &sol);
            let dev: f64 = sol
                .p1n
                .iter()
                .zip(&ker.psi)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(dev < 1e-6, "n={n}: cross-path deviation {dev}");
            // the kernel-path boundary derivative obeys the same sharp bound
            let j2_kernel = (ker.psi_prime[0]
                - p.eps * p.mu / p.gamma_h0()
                - kernel::annulus_factor(n, p.eps))
                / (p.eps * p.eps);
            assert!(
                j2_kernel.abs() <= crate::tolerances::C_SHARP_ESTIMATE * ((n as f64).powi(2) + 1.0),
                "n={n}: {j2_kernel}"
            );
        }
    }
}
