use plaquebif::grid::{build_grid, Scheme};
use plaquebif::kernel::annulus_factor;
use plaquebif::model::ModelParams;
use plaquebif::modes::solve_mode;
use plaquebif::steady::{solve_steady, SteadySettings};

// a2(n): second-order coefficient of the annulus factor:
// annulus = -n^2(1-n^2) eps - a2 eps^2 + O(eps^3)
fn a2(n: u32) -> f64 {
    let e = 1e-5;
    let nf = n as f64;
    -(annulus_factor(n, e) + nf * nf * (1.0 - nf * nf) * e) / (e * e)
}

fn probe(label: &str, p0: ModelParams) {
    let mc = p0.mu_c();
    let gh = p0.gamma_h0();
    let c0 = p0.asymptotic_coefficients();
    let mu2 = -12.0 * gh;
    let r4 = c0.drho4_dmu_leading * (mu2 - mc);
    let sat = r4 * 0.01 / (p0.beta2 * p0.D);
    let hon = p0.rho2 * 0.01 / p0.beta1;
    println!("== {label}: mu_c={mc:.2} rho4(mu2)={r4:.1} sat={sat:.3} honesty={hon:.3}");
    if mc > -72.0 * gh - 2.0 * gh { println!("   REJECT mu_c"); return; }
    if sat > 0.25 { println!("   REJECT saturation"); return; }
    if hon > 0.25 { println!("   REJECT honesty"); return; }
    let mut s_by_n: Vec<Vec<f64>> = vec![vec![]; 2];
    for eps in [1e-2, 5e-3, 2.5e-3] {
        let p = p0.with_eps(eps).with_mu(mu2);
        let g = build_grid(eps, 64, Scheme::UniformFd2).unwrap();
        match solve_steady(&p, &g, &SteadySettings::default()) {
            Ok(st) => {
                print!("   eps={eps:7.4}: J1={:+8.2}", st.j1);
                for (i, n) in [2u32, 3].iter().enumerate() {
                    match solve_mode(&st, &p, *n) {
                        Ok(m) => { print!(" J2_{n}={:+9.2}", m.j2n); s_by_n[i].push(st.j1 + m.j2n); }
                        Err(e) => print!(" J2_{n}=ERR({e})"),
                    }
                }
                println!();
            }
            Err(e) => println!("   eps={eps}: steady ERR: {e}"),
        }
    }
    for (i, n) in [2u32, 3].iter().enumerate() {
        if s_by_n[i].len() == 3 {
            let a = a2(*n);
            let x: Vec<f64> = s_by_n[i].iter().map(|s| (a - s).abs()).collect();
            println!("   n={n}: a2={a:.1} S={:+.1},{:+.1},{:+.1} pred_ratios {:.2}, {:.2}",
                s_by_n[i][0], s_by_n[i][1], s_by_n[i][2],
                2.0 * x[0] / x[1], 2.0 * x[1] / x[2]);
        }
    }
}

fn main() {
    let base = ModelParams::ref_b();
    probe("REF(k1=8,r2=12,r3=10,b1=.5,gh=.2)", base);
    let mk = |gamma: f64, h0: f64, rho3: f64, beta1: f64, rho2: f64, k1: f64, beta2: f64, d: f64, k2: f64, rho1: f64| {
        let mut p = base;
        p.gamma = gamma; p.H0 = h0; p.rho3 = rho3; p.beta1 = beta1; p.rho2 = rho2;
        p.k1 = k1; p.beta2 = beta2; p.D = d; p.k2 = k2; p.rho1 = rho1;
        p.mu = -12.0 * (gamma + h0);
        p
    };
    probe("G1 gh=1 r3=40 b1=2 r2=5.4 k1=3.28 b2=.5 D=8", mk(0.2, 0.8, 40.0, 2.0, 5.4, 3.28, 0.5, 8.0, 0.5, 0.05));
    probe("G3 gh=1 r3=40 b1=2 r2=5.4 k1=3.28 b2=1 D=4", mk(0.2, 0.8, 40.0, 2.0, 5.4, 3.28, 1.0, 4.0, 0.5, 0.05));
    probe("G4 gh=.5 r3=30 b1=2 r2=7.7 k1=3.41 b2=.5 D=8", mk(0.1, 0.4, 30.0, 2.0, 7.7, 3.41, 0.5, 8.0, 0.5, 0.05));
    probe("G5 gh=1 r3=40 b1=2 r2=5.4 k1=3.28 b2=.5 D=8 k2=1 rho1=.1", mk(0.2, 0.8, 40.0, 2.0, 5.4, 3.28, 0.5, 8.0, 1.0, 0.1));
    probe("G6 gh=1 r3=40 b1=2 r2=5.4 k1=13.325 b2=1 D=4", mk(0.2, 0.8, 40.0, 2.0, 5.4, 13.325, 1.0, 4.0, 0.5, 0.05));
    probe("G6b gh=1 r3=40 b1=2 r2=5.4 k1=10 b2=1 D=4", mk(0.2, 0.8, 40.0, 2.0, 5.4, 10.0, 1.0, 4.0, 0.5, 0.05));
    probe("G7 gh=1 r3=40 b1=2 r2=5.4 k1=13.325 b2=1 D=2", mk(0.2, 0.8, 40.0, 2.0, 5.4, 13.325, 1.0, 2.0, 0.5, 0.05));
}
// appended candidates probed via env var
