use plaquebif::bifurcation::{find_mu_n, separation_table};
use plaquebif::grid::{build_grid, Scheme};
use plaquebif::model::ModelParams;
use plaquebif::steady::{solve_steady, SteadySettings};
use plaquebif::modes::solve_mode;

fn main() {
    let p0 = ModelParams::ref_b();
    println!("mu_c = {:.4}", p0.mu_c());
    let s = SteadySettings::default();
    for n in [2u32, 3] {
        let mut devs = vec![];
        for eps in [1e-2, 5e-3, 2.5e-3] {
            let p = p0.with_eps(eps);
            let g = build_grid(eps, 64, Scheme::UniformFd2).unwrap();
            match find_mu_n(&p, n, &g, &s) {
                Ok(pt) => {
                    devs.push(pt.deviation);
                    println!("n={n} eps={eps:7.4}: mu_n={:+10.5} dev={:8.5} dev/(n^5 e)={:7.4} tnorm={:8.5} |g|res={:.1e} rho4={:.3} valid={}",
                        pt.mu_n, pt.deviation, pt.deviation/((n as f64).powi(5)*eps), pt.dg_dmu_normalized, pt.g_residual.abs(), pt.rho4_at_mu_n, pt.valid);
                }
                Err(e) => println!("n={n} eps={eps}: ERR {e}"),
            }
        }
        if devs.len() == 3 { println!("   ratios: {:.3}, {:.3}", devs[0]/devs[1], devs[1]/devs[2]); }
    }
    let p = p0.with_eps(1e-2);
    let g = build_grid(1e-2, 64, Scheme::UniformFd2).unwrap();
    let pt = find_mu_n(&p, 2, &g, &s).unwrap();
    match separation_table(&p, &pt, 12, &g, &s) {
        Ok(t) => {
            print!("W(m): ");
            for r in &t.rows { print!("m{}={:+.3e} ", r.m, r.w); }
            println!();
        }
        Err(e) => println!("separation ERR: {e}"),
    }
    for eps in [1e-2, 2.5e-3] {
        let p = p0.with_eps(eps);
        let g = build_grid(eps, 64, Scheme::UniformFd2).unwrap();
        let st = solve_steady(&p, &g, &s).unwrap();
        print!("eps={eps:7.4} J1={:+.2} rho4={:.3} (lead {:.3}) J2n: ", st.j1, st.rho4, p.asymptotic_coefficients().rho4_leading);
        for n in 0u32..=5 {
            let m = solve_mode(&st, &p, n).unwrap();
            print!("n{}={:+.1} ", n, m.j2n);
        }
        println!();
    }
}
