//! Reaction right-hand sides of the four stationary equations and their
//! partial derivatives with respect to `(L, H, F)`.
//!
//! The equations read, with `Lap` the radial Laplacian:
//!
//! ```text
//! -Lap L           = rhs_l = -k1 (M0-F) L/(K1+L) - rho1 L
//! -Lap H           = rhs_h = -k2 H F/(K2+F) - rho2 H
//! -D Lap F - F'p'  = rhs_f = k1 (M0-F) L/(K1+L) - k2 H F/(K2+F)
//!                            - lambda F (M0-F) L / (M0 (gamma+H))
//!                            + (rho3-rho4)(M0-F) F / M0
//! -Lap p           = rhs_p = (1/M0) [ lambda (M0-F) L/(gamma+H)
//!                            - rho3 (M0-F) - rho4 F ]
//! ```
//!
//! One implementation feeds three consumers: the steady Newton Jacobian, the
//! linearized mode-n coefficient arrays (`f5`..`f8`), and the boundary
//! second-derivative substitutions. The F-equation derivative (the mode
//! system's `f7`) is the one transcription with no displayed reference
//! formula, so every partial here is certified against central finite
//! differences of the `rhs_*` values; that oracle is a hard gate in the
//! acceptance battery.

use crate::model::ModelParams;

/// Point values of the four reaction right-hand sides at `(l, h, f)`.
pub fn rhs(p: &ModelParams, rho4: f64, l: f64, h: f64, f: f64) -> [f64; 4] {
    let mf = p.M0 - f;
    let sat1 = l / (p.K1 + l);
    let sat2 = f / (p.K2 + f);
    let gh = p.gamma + h;
    let rhs_l = -p.k1 * mf * sat1 - p.rho1 * l;
    let rhs_h = -p.k2 * h * sat2 - p.rho2 * h;
    let rhs_f = p.k1 * mf * sat1 - p.k2 * h * sat2 - p.lambda * f * mf * l / (p.M0 * gh)
        + (p.rho3 - rho4) * mf * f / p.M0;
    let rhs_p = (p.lambda * mf * l / gh - p.rho3 * mf - rho4 * f) / p.M0;
    [rhs_l, rhs_h, rhs_f, rhs_p]
}

/// `d rhs_X / d(L, H, F)` at `(l, h, f)`, rows ordered (L, H, F, p) to match
/// [`rhs`].
pub fn jacobian(p: &ModelParams, rho4: f64, l: f64, h: f64, f: f64) -> [[f64; 3]; 4] {
    let mf = p.M0 - f;
    let kl = p.K1 + l;
    let kf = p.K2 + f;
    let gh = p.gamma + h;

    let dl = [
        -p.k1 * mf * p.K1 / (kl * kl) - p.rho1,
        0.0,
        p.k1 * l / kl,
    ];
    let dh = [
        0.0,
        -p.k2 * f / kf - p.rho2,
        -p.k2 * h * p.K2 / (kf * kf),
    ];
    let df = [
        p.k1 * mf * p.K1 / (kl * kl) - p.lambda * f * mf / (p.M0 * gh),
        -p.k2 * f / kf + p.lambda * f * mf * l / (p.M0 * gh * gh),
        -p.k1 * l / kl - p.k2 * h * p.K2 / (kf * kf) - p.lambda * (p.M0 - 2.0 * f) * l / (p.M0 * gh)
            + (p.rho3 - rho4) * (p.M0 - 2.0 * f) / p.M0,
    ];
    let dp = [
        p.lambda * mf / (p.M0 * gh),
        -p.lambda * mf * l / (p.M0 * gh * gh),
        (-p.lambda * l / gh + p.rho3 - rho4) / p.M0,
    ];
    [dl, dh, df, dp]
}

/// Central finite-difference Jacobian of [`rhs`]; the independent oracle the
/// symbolic [`jacobian`] is checked against (acceptance criterion: 1e-6
/// relative agreement at solved steady profiles).
pub fn fd_jacobian(p: &ModelParams, rho4: f64, l: f64, h: f64, f: f64) -> [[f64; 3]; 4] {
    let mut out = [[0.0; 3]; 4];
    let vars = [l, h, f];
    for (k, &v) in vars.iter().enumerate() {
        let step = 1e-6 * (1.0 + v.abs());
        let mut hi = vars;
        let mut lo = vars;
        hi[k] = v + step;
        lo[k] = v - step;
        let rp = rhs(p, rho4, hi[0], hi[1], hi[2]);
        let rm = rhs(p, rho4, lo[0], lo[1], lo[2]);
        for eq in 0..4 {
            out[eq][k] = (rp[eq] - rm[eq]) / (2.0 * step);
        }
    }
    out
}

/// Max relative mismatch between [`jacobian`] and [`fd_jacobian`] over the
/// supplied profile samples.
pub fn jacobian_oracle_mismatch(
    p: &ModelParams,
    rho4: f64,
    samples: impl IntoIterator<Item = (f64, f64, f64)>,
) -> f64 {
    let mut worst = 0.0_f64;
    for (l, h, f) in samples {
        let sym = jacobian(p, rho4, l, h, f);
        let fd = fd_jacobian(p, rho4, l, h, f);
        for eq in 0..4 {
            for k in 0..3 {
                let scale = sym[eq][k].abs().max(fd[eq][k].abs()).max(1e-8);
                worst = worst.max((sym[eq][k] - fd[eq][k]).abs() / scale);
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_jacobian_matches_fd_oracle_on_generic_states() {
        for p in [ModelParams::ref_a(), ModelParams::ref_b()] {
            let c = p.asymptotic_coefficients();
            let rho4 = c.rho4_leading.max(0.3);
            // States spanning the maximum-principle box and a bit beyond.
            let states = [
                (p.l0() * 0.9, p.H0 * 0.95, 0.01 * p.M0),
                (p.l0() * 0.5, p.H0 * 0.5, 0.4 * p.M0),
                (p.l0() * 0.99, p.H0 * 0.8, 0.9 * p.M0),
                (0.02, 0.03, 0.001),
            ];
            let worst = jacobian_oracle_mismatch(&p, rho4, states);
            assert!(worst <= 1e-6, "mismatch {worst}");
        }
    }

    #[test]
    fn f_row_reduces_to_logistic_derivative_without_couplings() {
        // With k1 = k2 = lambda = 0 the F reaction is pure logistic:
        // (rho3-rho4)(M0-F)F/M0, with derivative (rho3-rho4)(M0-2F)/M0.
        let mut p = ModelParams::ref_a();
        p.k1 = 0.0;
        p.k2 = 0.0;
        p.lambda = 0.0;
        let j = jacobian(&p, 0.25, 0.1, 0.2, 0.3);
        let want = (p.rho3 - 0.25) * (p.M0 - 0.6) / p.M0;
        assert!((j[2][2] - want).abs() < 1e-15);
        assert_eq!(j[2][0], 0.0);
        assert_eq!(j[2][1], 0.0);
    }

    #[test]
    fn p_row_matches_displayed_linearization() {
        // Coefficients of (L1, H1, F1) in the pressure equation:
        // lambda(M0-F)/(M0(gamma+H)), -lambda(M0-F)L/(M0(gamma+H)^2),
        // (1/M0)(-lambda L/(gamma+H) + rho3 - rho4).
        let p = ModelParams::ref_b();
        let (l, h, f, rho4) = (1.9, 0.12, 0.007, 150.0);
        let j = jacobian(&p, rho4, l, h, f);
        let gh = p.gamma + h;
        assert!((j[3][0] - p.lambda * (p.M0 - f) / (p.M0 * gh)).abs() < 1e-15);
        assert!((j[3][1] + p.lambda * (p.M0 - f) * l / (p.M0 * gh * gh)).abs() < 1e-14);
        assert!((j[3][2] - (-p.lambda * l / gh + p.rho3 - rho4) / p.M0).abs() < 1e-12);
    }
}
