//! The acceptance battery: twelve numbered checks, each validating one
//! pillar of the solver against closed-form asymptotics, independent
//! oracles, or hard reproducibility requirements. `plaquebif validate` and
//! the `acceptance` integration test both run exactly this battery; every
//! tolerance lives in [`crate::tolerances`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bifurcation::{self, separation_table, GridSpec, SweepResult};
use crate::grid::{build_grid, Scheme};
use crate::kernel;
use crate::model::ModelParams;
use crate::modes::{self, solve_mode};
use crate::output;
use crate::reactions;
use crate::steady::{solve_steady, SteadySettings};
use crate::tolerances::{self, SEPARATION_GUARD_FACTOR};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CheckResult {
    fn new(id: &'static str, name: &'static str, passed: bool, details: String) -> Self {
        CheckResult { id, name, passed, details }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.details
        )
    }
}

/// Battery options; the defaults reproduce the documented desk-scale run.
#[derive(Debug, Clone, Copy)]
pub struct AcceptanceOptions {
    pub n_grid: usize,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        AcceptanceOptions { n_grid: tolerances::GRID_N_TEST, seed: tolerances::DEFAULT_SEED, jobs: 1 }
    }
}

const EPS_SWEEP: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

/// Runs the full battery in order; never panics, failures are reported in
/// the results.
pub fn run_all(opts: &AcceptanceOptions) -> Vec<CheckResult> {
    let mut results = Vec::with_capacity(12);
    let settings = SteadySettings::default();
    let grid_spec = GridSpec { n_nodes: opts.n_grid, scheme: Scheme::UniformFd2 };

    // The REF-B bifurcation sweep backs criteria 1, 9 and 11.
    let sweep = bifurcation::sweep(
        &ModelParams::ref_b(),
        &[2, 3],
        &EPS_SWEEP,
        grid_spec,
        opts.jobs,
        &settings,
    );

    results.push(criterion_1_bifurcation_asymptotics(&sweep));
    results.push(criterion_2_steady_expansions(opts, &settings));
    results.push(criterion_3_rho4_law(opts, &settings));
    results.push(criterion_4_j1_boundedness(opts, &settings));
    results.push(criterion_5_sharp_estimate(opts, &settings));
    results.push(criterion_6_kernel_cross_validation(opts, &settings));
    results.push(criterion_7_kernel_bound_certificates(opts));
    results.push(criterion_8_jacobian_oracle(opts, &settings));
    results.push(criterion_9_transversality(&sweep));
    results.push(criterion_10_mode_separation(opts, &settings));
    results.push(criterion_11_box_bounds(opts, &settings, &sweep));
    results.push(criterion_12_determinism(opts, &settings));
    results
}

fn criterion_1_bifurcation_asymptotics(sweep: &SweepResult) -> CheckResult {
    let id = "C01";
    let name = "bifurcation asymptotics mu_n = (gamma+H0) n^2(1-n^2) + O(n^5 eps)";
    let mut max_scaled = 0.0_f64;
    let mut details = Vec::new();
    let mut passed = true;
    for n in [2u32, 3] {
        let devs: Vec<f64> = sweep
            .rows
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.deviation)
            .collect();
        let scaled: Vec<f64> = sweep
            .rows
            .iter()
            .filter(|r| r.n == n)
            .filter_map(|r| r.deviation_scaled)
            .collect();
        if devs.len() != EPS_SWEEP.len() {
            passed = false;
            details.push(format!("n={n}: missing rows"));
            continue;
        }
        for s in &scaled {
            max_scaled = max_scaled.max(*s);
        }
        for w in devs.windows(2) {
            let ratio = w[0] / w[1];
            let (lo, hi) = tolerances::MU_DEVIATION_RATIO;
            if !(ratio >= lo && ratio <= hi) {
                passed = false;
                details.push(format!("n={n}: halving ratio {ratio:.3} outside [{lo}, {hi}]"));
            }
        }
        details.push(format!(
            "n={n}: dev/(n^5 eps) = {}",
            scaled.iter().map(|s| format!("{s:.2}")).collect::<Vec<_>>().join(", ")
        ));
    }
    if max_scaled > tolerances::C_MU_DEVIATION {
        passed = false;
        details.push(format!(
            "max scaled deviation {max_scaled:.2} > {}",
            tolerances::C_MU_DEVIATION
        ));
    }
    if sweep.rows.iter().any(|r| r.valid == Some(false)) {
        passed = false;
        details.push("some mu_n <= mu_c".to_string());
    }
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_2_steady_expansions(opts: &AcceptanceOptions, settings: &SteadySettings) -> CheckResult {
    let id = "C02";
    let name = "steady profiles = constants + eps*(L1,H1,F1) + O(eps^2) on REF-A";
    let base = ModelParams::ref_a();
    let mut passed = true;
    let mut details = Vec::new();
    let mut devs = Vec::new();
    for eps in EPS_SWEEP {
        let p = base.with_eps(eps);
        let c = p.asymptotic_coefficients();
        let grid = match build_grid(eps, opts.n_grid, Scheme::UniformFd2) {
            Ok(g) => g,
            Err(e) => return CheckResult::new(id, name, false, e.to_string()),
        };
        match solve_steady(&p, &grid, settings) {
            Ok(st) => {
                let l_ref = p.rho3 * p.gamma_h0() / p.lambda + eps * c.lstar1;
                let h_ref = p.H0 + eps * c.hstar1;
                let f_ref = eps * c.fstar1;
                let dev = max_dev(&st.lstar, l_ref)
                    .max(max_dev(&st.hstar, h_ref))
                    .max(max_dev(&st.fstar, f_ref));
                devs.push(dev);
                let scaled = dev / (eps * eps);
                if scaled > tolerances::C_PROFILE_EXPANSION {
                    passed = false;
                    details.push(format!(
                        "eps={eps}: dev/eps^2 = {scaled:.2} > {}",
                        tolerances::C_PROFILE_EXPANSION
                    ));
                } else {
                    details.push(format!("eps={eps}: dev/eps^2 = {scaled:.2}"));
                }
            }
            Err(e) => {
                passed = false;
                details.push(format!("eps={eps}: {e}"));
            }
        }
    }
    // second-order decay under halving
    for w in devs.windows(2) {
        let ratio = w[0] / w[1];
        let (lo, hi) = tolerances::PROFILE_DECAY_RATIO;
        if !(ratio >= lo && ratio <= hi) {
            passed = false;
            details.push(format!("halving ratio {ratio:.2} outside [{lo}, {hi}]"));
        }
    }
    CheckResult::new(id, name, passed, details.join("; "))
}

fn max_dev(values: &[f64], reference: f64) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max((v - reference).abs()))
}

fn criterion_3_rho4_law(opts: &AcceptanceOptions, settings: &SteadySettings) -> CheckResult {
    let id = "C03";
    let name = "rho4 = drho4/dmu * (mu - mu_c) + O(eps), increasing in mu";
    let base = ModelParams::ref_a();
    let mut passed = true;
    let mut details = Vec::new();
    for eps in EPS_SWEEP {
        let p = base.with_eps(eps);
        let c = p.asymptotic_coefficients();
        let grid = match build_grid(eps, opts.n_grid, Scheme::UniformFd2) {
            Ok(g) => g,
            Err(e) => return CheckResult::new(id, name, false, e.to_string()),
        };
        match solve_steady(&p, &grid, settings) {
            Ok(st) => {
                let scaled = (st.rho4 - c.rho4_leading).abs() / eps;
                if scaled > tolerances::C_RHO4_LAW {
                    passed = false;
                    details.push(format!(
                        "eps={eps}: |rho4 - leading|/eps = {scaled:.2} > {}",
                        tolerances::C_RHO4_LAW
                    ));
                } else {
                    details.push(format!("eps={eps}: |rho4 - leading|/eps = {scaled:.2}"));
                }
            }
            Err(e) => {
                passed = false;
                details.push(format!("eps={eps}: {e}"));
            }
        }
    }
    // strict monotonicity over 5 sampled mu above mu_c
    let grid = build_grid(base.eps, opts.n_grid, Scheme::UniformFd2).expect("grid");
    let mut last = f64::NEG_INFINITY;
    let mut mono = true;
    for mu in [0.5, 1.0, 1.5, 2.0, 3.0] {
        match solve_steady(&base.with_mu(mu), &grid, settings) {
            Ok(st) => {
                if st.rho4 <= last {
                    mono = false;
                }
                last = st.rho4;
            }
            Err(e) => {
                passed = false;
                details.push(format!("mu={mu}: {e}"));
            }
        }
    }
    if !mono {
        passed = false;
        details.push("rho4 not strictly increasing in mu".to_string());
    } else {
        details.push("rho4 strictly increasing over 5 mu samples".to_string());
    }
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_4_j1_boundedness(opts: &AcceptanceOptions, settings: &SteadySettings) -> CheckResult {
    let id = "C04";
    let name = "|p*''(1-eps)|/eps^2 bounded; raw value second order in eps";
    let base = ModelParams::ref_a();
    let mut passed = true;
    let mut details = Vec::new();
    let mut raws = Vec::new();
    for eps in EPS_SWEEP {
        let p = base.with_eps(eps);
        let grid = match build_grid(eps, opts.n_grid, Scheme::UniformFd2) {
            Ok(g) => g,
            Err(e) => return CheckResult::new(id, name, false, e.to_string()),
        };
        match solve_steady(&p, &grid, settings) {
            Ok(st) => {
                raws.push(st.p2_inner.abs());
                if st.j1.abs() > tolerances::C_J1_BOUND {
                    passed = false;
                    details.push(format!(
                        "eps={eps}: |J1| = {:.3} > {}",
                        st.j1,
                        tolerances::C_J1_BOUND
                    ));
                } else {
                    details.push(format!("eps={eps}: J1 = {:+.3}", st.j1));
                }
            }
            Err(e) => {
                passed = false;
                details.push(format!("eps={eps}: {e}"));
            }
        }
    }
    for w in raws.windows(2) {
        let ratio = w[0] / w[1];
        let (lo, hi) = tolerances::J1_DECAY_RATIO;
        if !(ratio >= lo && ratio <= hi) {
            passed = false;
            details.push(format!("raw p*'' halving ratio {ratio:.2} outside [{lo}, {hi}]"));
        }
    }
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_5_sharp_estimate(opts: &AcceptanceOptions, settings: &SteadySettings) -> CheckResult {
    let id = "C05";
    let name = "(p1n)'(1-eps) sharp estimate: |J2n| <= C (n^2+1) on REF-B";
    let base = ModelParams::ref_b();
    let mut passed = true;
    let mut worst = 0.0_f64;
    let mut details = Vec::new();
    for eps in EPS_SWEEP {
        let p = base.with_eps(eps);
        let grid = match build_grid(eps, opts.n_grid, Scheme::UniformFd2) {
            Ok(g) => g,
            Err(e) => return CheckResult::new(id, name, false, e.to_string()),
        };
        let st = match solve_steady(&p, &grid, settings) {
            Ok(st) => st,
            Err(e) => {
                passed = false;
                details.push(format!("eps={eps}: {e}"));
                continue;
            }
        };
        for n in 0u32..=5 {
            match solve_mode(&st, &p, n) {
                Ok(m) => {
                    let scaled = m.j2n.abs() / ((n * n + 1) as f64);
                    worst = worst.max(scaled);
                    if scaled > tolerances::C_SHARP_ESTIMATE {
                        passed = false;
                        details.push(format!("eps={eps} n={n}: |J2n|/(n^2+1) = {scaled:.1}"));
                    }
                }
                Err(e) => {
                    passed = false;
                    details.push(format!("eps={eps} n={n}: {e}"));
                }
            }
        }
    }
    details.push(format!(
        "max |J2n|/(n^2+1) = {worst:.1} (bound {})",
        tolerances::C_SHARP_ESTIMATE
    ));
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_6_kernel_cross_validation(
    opts: &AcceptanceOptions,
    settings: &SteadySettings,
) -> CheckResult {
    let id = "C06";
    let name = "p1n direct block solve vs analytic kernel path";
    let p = ModelParams::ref_b();
    let coarse = match build_grid(p.eps, opts.n_grid, Scheme::UniformFd2) {
        Ok(g) => g,
        Err(e) => return CheckResult::new(id, name, false, e.to_string()),
    };
    let fine = coarse.refined();
    let st_c = match solve_steady(&p, &coarse, settings) {
        Ok(s) => s,
        Err(e) => return CheckResult::new(id, name, false, e.to_string()),
    };
    let st_f = match solve_steady(&p, &fine, settings) {
        Ok(s) => s,
        Err(e) => return CheckResult::new(id, name, false, e.to_string()),
    };
    let mut passed = true;
    let mut details = Vec::new();
    for n in 0u32..=5 {
        let (mc, mf) = match (solve_mode(&st_c, &p, n), solve_mode(&st_f, &p, n)) {
            (Ok(a), Ok(b)) => (a, b),
            (a, b) => {
                passed = false;
                details.push(format!(
                    "n={n}: {}",
                    a.err().map(|e| e.to_string()).or(b.err().map(|e| e.to_string())).unwrap()
                ));
                continue;
            }
        };
        // Richardson estimate of the direct path's own discretization error
        // (second-order scheme: true error ~ 4/3 of the N vs 2N-1 gap).
        let gap = (0..coarse.len())
            .fold(0.0_f64, |m, i| m.max((mc.p1n[i] - mf.p1n[2 * i]).abs()));
        let disc = tolerances::CROSS_PATH_RICHARDSON_SAFETY * (4.0 / 3.0) * gap;
        let tol = disc.max(tolerances::CROSS_PATH_ABS_FLOOR);
        let ker = modes::mode_via_kernel(&st_c, &p, n, &mc);
        let dev = (0..coarse.len())
            .fold(0.0_f64, |m, i| m.max((mc.p1n[i] - ker.psi[i]).abs()));
        if dev > tol {
            passed = false;
            details.push(format!("n={n}: cross-path dev {dev:.2e} > tol {tol:.2e}"));
        } else {
            details.push(format!("n={n}: {dev:.1e} <= {tol:.1e}"));
        }
    }
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_7_kernel_bound_certificates(opts: &AcceptanceOptions) -> CheckResult {
    let id = "C07";
    let name = "K[f] bound certificates over random smooth forcings";
    let grid = match build_grid(1e-2, opts.n_grid, Scheme::UniformFd2) {
        Ok(g) => g,
        Err(e) => return CheckResult::new(id, name, false, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut min_slack_kf = f64::INFINITY;
    let mut min_slack_kfp = f64::INFINITY;
    let mut violations = 0usize;
    let samples = tolerances::KERNEL_CERT_SAMPLES;
    for k in 0..samples {
        // random trigonometric polynomial in the stretched coordinate
        let a0: f64 = rng.gen_range(-1.0..1.0);
        let amps: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phases: Vec<f64> =
            (0..4).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        let f: Vec<f64> = grid
            .nodes
            .iter()
            .map(|r| {
                let t = (1.0 - r) / grid.eps;
                a0 + amps
                    .iter()
                    .zip(&phases)
                    .enumerate()
                    .map(|(j, (a, ph))| a * ((j + 1) as f64 * t + ph).cos())
                    .sum::<f64>()
            })
            .collect();
        let fmax = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        // cycle through n = 1..=64 while also drawing randomly
        let n: u32 = if k < 64 { (k + 1) as u32 } else { rng.gen_range(1..=64) };
        let (kf, kfp) = kernel::k_apply(n, &f, &grid);
        let (bk, bkp) = kernel::k_bounds(n, grid.eps);
        for i in 0..grid.len() {
            let s1 = bk * fmax - kf[i].abs();
            let s2 = bkp * fmax - kfp[i].abs();
            min_slack_kf = min_slack_kf.min(s1);
            min_slack_kfp = min_slack_kfp.min(s2);
            if s1 < 0.0 || s2 < 0.0 {
                violations += 1;
            }
        }
    }
    let passed = violations == 0;
    CheckResult::new(
        id,
        name,
        passed,
        format!(
            "{samples} forcings, n in 1..=64: min slack K[f] {min_slack_kf:.2e}, K[f]' {min_slack_kfp:.2e}, {violations} violations"
        ),
    )
}

fn criterion_8_jacobian_oracle(opts: &AcceptanceOptions, settings: &SteadySettings) -> CheckResult {
    let id = "C08";
    let name = "linearization coefficients vs finite-difference Jacobian oracle";
    let mut worst = 0.0_f64;
    for p in [ModelParams::ref_a(), ModelParams::ref_b()] {
        let grid = match build_grid(p.eps, opts.n_grid, Scheme::UniformFd2) {
            Ok(g) => g,
            Err(e) => return CheckResult::new(id, name, false, e.to_string()),
        };
        let st = match solve_steady(&p, &grid, settings) {
            Ok(s) => s,
            Err(e) => return CheckResult::new(id, name, false, e.to_string()),
        };
        let samples: Vec<(f64, f64, f64)> =
            (0..grid.len()).map(|i| (st.lstar[i], st.hstar[i], st.fstar[i])).collect();
        worst = worst.max(reactions::jacobian_oracle_mismatch(&p, st.rho4, samples));
    }
    let passed = worst <= tolerances::JACOBIAN_ORACLE_RTOL;
    CheckResult::new(
        id,
        name,
        passed,
        format!(
            "max relative mismatch {worst:.2e} (gate {:.0e}) across all four equations at both reference steady states",
            tolerances::JACOBIAN_ORACLE_RTOL
        ),
    )
}

fn criterion_9_transversality(sweep: &SweepResult) -> CheckResult {
    let id = "C09";
    let name = "dg/dmu * (gamma+H0)/eps near 1 and positive at mu_n";
    let mut passed = true;
    let mut details = Vec::new();
    for row in &sweep.rows {
        match row.transversality_norm {
            Some(t) => {
                let window = tolerances::C_TRANSVERSALITY * row.eps * ((row.n * row.n + 1) as f64);
                if t <= 0.0 || (t - 1.0).abs() > window {
                    passed = false;
                    details.push(format!(
                        "n={} eps={}: normalized dg/dmu = {t:.4} outside 1 +- {window:.3}",
                        row.n, row.eps
                    ));
                } else {
                    details.push(format!("n={} eps={}: {t:.4}", row.n, row.eps));
                }
            }
            None => {
                passed = false;
                details.push(format!("n={} eps={}: missing", row.n, row.eps));
            }
        }
    }
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_10_mode_separation(opts: &AcceptanceOptions, settings: &SteadySettings) -> CheckResult {
    let id = "C10";
    let name = "W(m) != 0 for m != 2 and W(2) ~ 0 at mu_2 on REF-B";
    let p = ModelParams::ref_b();
    let grid = match build_grid(p.eps, opts.n_grid, Scheme::UniformFd2) {
        Ok(g) => g,
        Err(e) => return CheckResult::new(id, name, false, e.to_string()),
    };
    let point = match bifurcation::find_mu_n(&p, 2, &grid, settings) {
        Ok(pt) => pt,
        Err(e) => return CheckResult::new(id, name, false, e.to_string()),
    };
    let table = match separation_table(&p, &point, 12, &grid, settings) {
        Ok(t) => t,
        Err(e) => return CheckResult::new(id, name, false, e.to_string()),
    };
    let guard = SEPARATION_GUARD_FACTOR * tolerances::tol_g(p.eps);
    let mut passed = true;
    let mut details = vec![format!("mu_2 = {:.5}, guard = {guard:.1e}", point.mu_n)];
    for row in &table.rows {
        if row.m == 2 {
            if row.w.abs() > guard {
                passed = false;
                details.push(format!("W(2) = {:.2e} above guard", row.w));
            }
        } else if row.w.abs() <= guard {
            passed = false;
            details.push(format!("W({}) = {:.2e} within guard", row.m, row.w));
        }
    }
    let min_off = table
        .rows
        .iter()
        .filter(|r| r.m != 2)
        .fold(f64::INFINITY, |m, r| m.min(r.w.abs()));
    details.push(format!("min |W(m != 2)| = {min_off:.3e}"));
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_11_box_bounds(
    opts: &AcceptanceOptions,
    settings: &SteadySettings,
    sweep: &SweepResult,
) -> CheckResult {
    let id = "C11";
    let name = "maximum-principle box bounds at every accepted steady state";
    let mut passed = true;
    let mut details = Vec::new();
    let mut checked = 0usize;
    // targets: the steady state behind every located bifurcation point,
    // plus both reference sets across the eps-sweep at their default mu
    let mut targets: Vec<(String, ModelParams)> = Vec::new();
    for row in &sweep.rows {
        if let Some(mu_n) = row.mu_n {
            targets.push((
                format!("ref-b n={} eps={}", row.n, row.eps),
                ModelParams::ref_b().with_eps(row.eps).with_mu(mu_n),
            ));
        }
    }
    for base in [ModelParams::ref_a(), ModelParams::ref_b()] {
        for eps in EPS_SWEEP {
            targets.push((format!("default mu eps={eps}"), base.with_eps(eps)));
        }
    }
    for (label, p) in targets {
        match build_grid(p.eps, opts.n_grid, Scheme::UniformFd2)
            .map_err(|e| e.to_string())
            .and_then(|g| solve_steady(&p, &g, settings).map_err(|e| e.to_string()))
        {
            Ok(st) => {
                checked += 1;
                if !st.box_bounds_ok {
                    passed = false;
                    details.push(format!("{label}: box bounds violated"));
                }
            }
            Err(e) => {
                passed = false;
                details.push(format!("{label}: {e}"));
            }
        }
    }
    details.push(format!("{checked} steady states checked nodewise"));
    CheckResult::new(id, name, passed, details.join("; "))
}

fn criterion_12_determinism(opts: &AcceptanceOptions, settings: &SteadySettings) -> CheckResult {
    let id = "C12";
    let name = "identical sweep runs are byte-identical";
    let p = ModelParams::ref_b();
    let spec = GridSpec { n_nodes: opts.n_grid, scheme: Scheme::UniformFd2 };
    let a = bifurcation::sweep(&p, &[2], &[1e-2, 5e-3], spec, 1, settings);
    let b = bifurcation::sweep(&p, &[2], &[1e-2, 5e-3], spec, 2.max(opts.jobs), settings);
    let csv_a = output::sweep_csv(&a);
    let csv_b = output::sweep_csv(&b);
    let json_a = output::to_json(&a);
    let json_b = output::to_json(&b);
    let passed = csv_a == csv_b && json_a == json_b;
    CheckResult::new(
        id,
        name,
        passed,
        if passed {
            format!("CSV ({} bytes) and JSON ({} bytes) identical across jobs=1 and jobs>1", csv_a.len(), json_a.len())
        } else {
            "outputs differ between identical runs".to_string()
        },
    )
}
