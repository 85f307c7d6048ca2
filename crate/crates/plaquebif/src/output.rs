//! CSV/JSON emission and the per-run manifest.
//!
//! Output is deterministic byte-for-byte for identical inputs: floats are
//! written with Rust's shortest-roundtrip formatting, columns and JSON keys
//! have fixed order, and nothing time- or host-dependent is recorded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::bifurcation::{BifurcationPoint, SeparationTable, SweepResult};
use crate::config::{GridConfig, ValueSource};
use crate::model::ModelParams;
use crate::modes::ModeSolution;
use crate::steady::SteadyState;
use crate::tolerances;

/// Everything needed to reproduce a run, written as `run.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params: ModelParams,
    pub params_hash: String,
    pub param_sources: BTreeMap<String, ValueSource>,
    pub grid: GridConfig,
    pub seed: u64,
    pub output_format: String,
    pub tolerances: ToleranceRecord,
    pub command_args: BTreeMap<String, String>,
}

/// The numeric tolerances in force for the run.
#[derive(Debug, Clone, Serialize)]
pub struct ToleranceRecord {
    pub tol_newton: f64,
    pub tol_phi: f64,
    pub tol_g: f64,
    pub newton_max_iter: usize,
    pub newton_max_halvings: usize,
}

impl ToleranceRecord {
    pub fn for_eps(eps: f64) -> Self {
        ToleranceRecord {
            tol_newton: tolerances::TOL_NEWTON,
            tol_phi: tolerances::tol_phi(eps),
            tol_g: tolerances::tol_g(eps),
            newton_max_iter: tolerances::NEWTON_MAX_ITER,
            newton_max_halvings: tolerances::NEWTON_MAX_HALVINGS,
        }
    }
}

impl Manifest {
    pub fn new(
        command: &str,
        params: &ModelParams,
        sources: &BTreeMap<String, ValueSource>,
        grid: GridConfig,
        seed: u64,
        format: &str,
        args: BTreeMap<String, String>,
    ) -> Self {
        Manifest {
            tool: "plaquebif",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            params: *params,
            params_hash: params.hash(),
            param_sources: sources.clone(),
            grid,
            seed,
            output_format: format.to_string(),
            tolerances: ToleranceRecord::for_eps(params.eps),
            command_args: args,
        }
    }
}

/// Steady-state CSV: comment header with provenance scalars, then
/// `r,Lstar,Hstar,Fstar,pstar` rows.
pub fn steady_csv(state: &SteadyState, params: &ModelParams) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# params_hash={} rho4={} J1={}",
        params.hash(),
        state.rho4,
        state.j1
    );
    out.push_str("r,Lstar,Hstar,Fstar,pstar\n");
    for i in 0..state.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            state.grid.nodes[i], state.lstar[i], state.hstar[i], state.fstar[i], state.pstar[i]
        );
    }
    out
}

/// Per-run diagnostics accompanying the steady CSV.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyDiagnostics {
    pub rho4: f64,
    pub j1: f64,
    pub p2_inner: f64,
    pub residual_norm: f64,
    pub phi_residual: f64,
    pub deriv_max: f64,
    pub p_prime_inner: f64,
    pub extra_phi_sign_changes: usize,
    pub box_bounds_ok: bool,
    pub mu_c: f64,
    pub rho4_leading: f64,
}

pub fn steady_diagnostics(state: &SteadyState, params: &ModelParams) -> SteadyDiagnostics {
    let c = params.asymptotic_coefficients();
    SteadyDiagnostics {
        rho4: state.rho4,
        j1: state.j1,
        p2_inner: state.p2_inner,
        residual_norm: state.residual_norm,
        phi_residual: state.phi_residual,
        deriv_max: state.deriv_max,
        p_prime_inner: state.p_prime_inner,
        extra_phi_sign_changes: state.extra_phi_sign_changes,
        box_bounds_ok: state.box_bounds_ok,
        mu_c: c.mu_c,
        rho4_leading: c.rho4_leading,
    }
}

/// Mode CSV: comment header with `n`, `J2n`, `(p1n)'(1-eps)`, then
/// `r,L1n,H1n,F1n,p1n` rows.
pub fn mode_csv(sol: &ModeSolution, state: &SteadyState, params: &ModelParams) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# params_hash={} n={} J2n={} p1n_prime_inner={}",
        params.hash(),
        sol.n,
        sol.j2n,
        sol.p1n_prime_inner
    );
    out.push_str("r,L1n,H1n,F1n,p1n\n");
    for i in 0..state.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            state.grid.nodes[i], sol.l1n[i], sol.h1n[i], sol.f1n[i], sol.p1n[i]
        );
    }
    out
}

/// Separation table CSV: `m,W` rows.
pub fn separation_csv(table: &SeparationTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# n={} mu_n={} guard={}", table.n, table.mu_n, table.guard);
    out.push_str("m,W\n");
    for row in &table.rows {
        let _ = writeln!(out, "{},{}", row.m, row.w);
    }
    out
}

/// Sweep CSV with the stable column order.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(
        "n,eps,mu_n,mu_asymptotic,deviation,deviation_scaled,J1,J2n,transversality_norm,rho4,valid\n",
    );
    let fmt_opt = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for row in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            row.n,
            row.eps,
            fmt_opt(&row.mu_n),
            row.mu_asymptotic,
            fmt_opt(&row.deviation),
            fmt_opt(&row.deviation_scaled),
            fmt_opt(&row.j1),
            fmt_opt(&row.j2n),
            fmt_opt(&row.transversality_norm),
            fmt_opt(&row.rho4),
            row.valid.map(|b| b.to_string()).unwrap_or_default(),
        );
    }
    out
}

/// Pretty JSON with trailing newline; serde emits struct fields in
/// declaration order, so the key order is stable.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// JSON payload for a located bifurcation point plus its separation table.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationReport<'a> {
    pub point: &'a BifurcationPoint,
    pub separation: &'a SeparationTable,
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, Scheme};
    use crate::steady::{solve_steady, SteadySettings};

    #[test]
    fn steady_csv_shape_and_determinism() {
        let p = ModelParams::ref_a();
        let g = build_grid(p.eps, 32, Scheme::UniformFd2).unwrap();
        let st = solve_steady(&p, &g, &SteadySettings::default()).unwrap();
        let a = steady_csv(&st, &p);
        let b = steady_csv(&st, &p);
        assert_eq!(a, b);
        let mut lines = a.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("# params_hash="));
        assert!(header.contains("rho4="));
        assert!(header.contains("J1="));
        assert_eq!(lines.next().unwrap(), "r,Lstar,Hstar,Fstar,pstar");
        assert_eq!(a.lines().count(), 2 + 32);
        // floats round-trip exactly
        let first_data = a.lines().nth(2).unwrap();
        let r: f64 = first_data.split(',').next().unwrap().parse().unwrap();
        assert_eq!(r, st.grid.nodes[0]);
    }

    #[test]
    fn manifest_is_deterministic_and_complete() {
        let p = ModelParams::ref_b();
        let r = crate::config::ResolvedParams::from_preset("ref-b").unwrap();
        let m = Manifest::new(
            "steady",
            &p,
            &r.sources,
            GridConfig::default(),
            7,
            "csv",
            BTreeMap::new(),
        );
        let j1 = to_json(&m);
        let j2 = to_json(&m);
        assert_eq!(j1, j2);
        assert!(j1.contains("\"params_hash\""));
        assert!(j1.contains("\"tol_newton\""));
        assert!(!j1.contains("time"), "manifests must not carry timestamps");
    }
}
