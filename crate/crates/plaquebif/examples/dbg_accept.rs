use plaquebif::grid::{build_grid, Scheme};
use plaquebif::model::ModelParams;
use plaquebif::steady::{solve_steady, SteadySettings};

fn main() {
    let mut worst = 0.0_f64;
    for base in [ModelParams::ref_a(), ModelParams::ref_b()] {
        for eps in [1e-2, 5e-3, 2.5e-3] {
            for n in [64usize, 128] {
                let p = base.with_eps(eps);
                let g = build_grid(eps, n, Scheme::UniformFd2).unwrap();
                let st = solve_steady(&p, &g, &SteadySettings::default()).unwrap();
                let h_t = 1.0 / (n as f64 - 1.0);
                let scale = eps * h_t * h_t * (1.0 + (p.mu - p.mu_c()).abs() / p.gamma_h0());
                let ratio = st.p_prime_inner.abs() / scale;
                worst = worst.max(ratio);
                println!("eps={eps:7.4} N={n:3}: |p'(1-eps)| = {:.3e}, ratio = {ratio:.3}", st.p_prime_inner.abs());
            }
        }
    }
    println!("worst ratio = {worst:.3} (CONSISTENCY_FACTOR = 100)");
}
