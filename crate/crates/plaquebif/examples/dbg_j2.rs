use plaquebif::grid::{build_grid, Scheme};
use plaquebif::model::ModelParams;
use plaquebif::modes::{mode_via_kernel, solve_mode};
use plaquebif::steady::{solve_steady, SteadySettings};
use plaquebif::kernel;

fn main() {
    for eps in [1e-2, 5e-3, 2.5e-3] {
        let p = ModelParams::ref_b().with_eps(eps);
        let g = build_grid(eps, 64, Scheme::UniformFd2).unwrap();
        let st = solve_steady(&p, &g, &SteadySettings::default()).unwrap();
        print!("eps={eps:.4}: J1={:+9.3} rho4={:7.3} |", st.j1, st.rho4);
        for n in 0u32..=5 {
            let m = solve_mode(&st, &p, n).unwrap();
            let ker = mode_via_kernel(&st, &p, n, &m);
            let j2k = (ker.psi_prime[0] - eps * p.mu / p.gamma_h0() - kernel::annulus_factor(n, eps)) / (eps * eps);
            print!(" n{n}: {:+8.2}/{:+8.2}", m.j2n, j2k);
        }
        println!();
        // normalized by n^2+1
        print!("            J2n/(n^2+1):");
        for n in 0u32..=5 {
            let m = solve_mode(&st, &p, n).unwrap();
            print!(" {:+7.2}", m.j2n / ((n * n + 1) as f64));
        }
        println!();
    }
    // REF-A for comparison
    for eps in [1e-2, 5e-3] {
        let p = ModelParams::ref_a().with_eps(eps);
        let g = build_grid(eps, 64, Scheme::UniformFd2).unwrap();
        let st = solve_steady(&p, &g, &SteadySettings::default()).unwrap();
        print!("REF-A eps={eps:.4}: J1={:+9.4} |", st.j1);
        for n in 0u32..=5 {
            let m = solve_mode(&st, &p, n).unwrap();
            print!(" n{n}:{:+8.3}", m.j2n);
        }
        println!();
    }
}
