//! Model parameters and the closed-form asymptotic quantities used as
//! independent oracles throughout the crate.
//!
//! The bifurcation parameter is `mu = (1/eps) * (lambda*L0 - rho3*(gamma+H0))`.
//! `mu` is the canonical input everywhere; the blood LDL concentration `L0`
//! is always derived from it, never stored, so inconsistent `(mu, L0)` pairs
//! cannot exist. The foam-cell clearance rate `rho4` is deliberately *not* a
//! parameter: it is the scalar unknown solved together with the steady state.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

/// All model constants plus the bifurcation parameter `mu`.
///
/// Field names follow the model's notation; they double as the config-file
/// and CLI keys, so they are kept verbatim (including case).
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Macrophage-to-foam-cell conversion rate.
    pub k1: f64,
    /// Foam-cell reversion rate by HDL.
    pub k2: f64,
    /// LDL saturation constant in the `k1` Michaelis-Menten term.
    pub K1: f64,
    /// Foam-cell saturation constant in the `k2` term.
    pub K2: f64,
    /// LDL death rate.
    pub rho1: f64,
    /// HDL death rate.
    pub rho2: f64,
    /// Macrophage death rate.
    pub rho3: f64,
    /// Foam-cell diffusivity.
    pub D: f64,
    /// Oxidation-attraction rate of LDL on macrophages.
    pub lambda: f64,
    /// HDL offset in the attraction term `lambda*M*L/(gamma+H)`.
    pub gamma: f64,
    /// Total cell density (`M + F = M0`).
    pub M0: f64,
    /// Robin transfer coefficient for L and H at the interface.
    pub beta1: f64,
    /// Robin transfer coefficient for F at the interface.
    pub beta2: f64,
    /// Blood HDL concentration.
    pub H0: f64,
    /// Annulus width; the plaque occupies `1-eps < r < 1`.
    pub eps: f64,
    /// Bifurcation parameter `(1/eps) * (lambda*L0 - rho3*(gamma+H0))`.
    pub mu: f64,
}

/// One violated parameter invariant. `validate` reports these instead of
/// panicking so that proof-edge cases (e.g. `rho3 = 0`) stay testable behind
/// the solvers' override flags.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub field: &'static str,
    pub value: f64,
    pub reason: &'static str,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({} = {})", self.field, self.reason, self.field, self.value)
    }
}

/// Closed-form first-order coefficients of the steady profiles and of the
/// solved `rho4(mu)`, all exact functions of the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCoefficients {
    /// Critical parameter below which no steady state with `rho4 >= 0` exists.
    pub mu_c: f64,
    /// `L* = rho3(gamma+H0)/lambda + eps*lstar1 + O(eps^2)`.
    pub lstar1: f64,
    /// `H* = H0 + eps*hstar1 + O(eps^2)`; always `-rho2*H0/beta1 < 0`.
    pub hstar1: f64,
    /// `F* = eps*fstar1 + O(eps^2)`; always positive.
    pub fstar1: f64,
    /// Leading term of `rho4(mu)`; vanishes at `mu = mu_c`.
    pub rho4_leading: f64,
    /// Leading term of `d rho4 / d mu`, independent of `mu`.
    pub drho4_dmu_leading: f64,
}

const POSITIVE_FIELDS: [&str; 14] = [
    "k1", "k2", "K1", "K2", "rho1", "rho2", "rho3", "D", "lambda", "gamma", "M0", "beta1",
    "beta2", "H0",
];

impl ModelParams {
    /// REF-A: generic all-O(1) parameters for steady-state validation.
    /// `mu_c = 0.13543...`, default `mu = 1` comfortably above it.
    pub fn ref_a() -> Self {
        #[allow(non_snake_case)]
        ModelParams {
            k1: 1.0,
            k2: 1.0,
            K1: 1.0,
            K2: 1.0,
            rho1: 0.1,
            rho2: 0.1,
            rho3: 0.1,
            D: 1.0,
            lambda: 1.0,
            gamma: 0.5,
            M0: 1.0,
            beta1: 1.0,
            beta2: 1.0,
            H0: 1.0,
            eps: 0.01,
            mu: 1.0,
        }
    }

    /// REF-B: bifurcation-valid parameters (`gamma+H0 = 1`). Constructed so
    /// that four constraints hold simultaneously over the working sweep
    /// `eps <= 0.01`:
    ///
    /// * `mu_c = -92.52... < (gamma+H0) n^2 (1-n^2)` for n = 2 (-12) and
    ///   n = 3 (-72) with enough margin (20.5 at n = 3) that the root located
    ///   near the asymptotic value, and the bracket scan around it, stay
    ///   above `mu_c`;
    /// * `rho2*eps/beta1 = 0.031 << 0.25`, keeping the O(eps) profile
    ///   corrections honestly small;
    /// * `rho4_leading(mu_2)*eps/(beta2*D) = 0.08 << 1`, keeping the solved
    ///   clearance rate inside the regime where the death term
    ///   `int rho4 F* r dr` still responds linearly (it saturates at
    ///   `eps * k1 M0 L*/(K1+L*)` for `rho4 ~ beta2 D/eps`, beyond which
    ///   `Phi` has no root at all);
    /// * the second-order remainders `J1`, `J2n` are dominated by an
    ///   eps-stable term well separated from the annulus factor's own
    ///   second-order coefficient, so bifurcation-point deviations scale
    ///   cleanly at first order in `eps` (drift per eps-halving under 5%).
    ///
    /// Default `mu` is the n = 2 asymptotic bifurcation value.
    pub fn ref_b() -> Self {
        #[allow(non_snake_case)]
        ModelParams {
            k1: 10.0,
            k2: 0.5,
            K1: 1.0,
            K2: 1.0,
            rho1: 0.05,
            rho2: 6.15,
            rho3: 40.0,
            D: 4.0,
            lambda: 1.0,
            gamma: 0.2,
            M0: 1.0,
            beta1: 2.0,
            beta2: 1.0,
            H0: 0.8,
            eps: 0.01,
            mu: -12.0,
        }
    }

    /// `gamma + H0`, the combination the pressure asymptotics revolve around.
    pub fn gamma_h0(&self) -> f64 {
        self.gamma + self.H0
    }

    /// Derived blood LDL concentration `L0 = (rho3(gamma+H0) + eps*mu)/lambda`.
    pub fn l0(&self) -> f64 {
        (self.rho3 * self.gamma_h0() + self.eps * self.mu) / self.lambda
    }

    /// Same parameters with a different bifurcation parameter.
    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    /// Same parameters with a different annulus width.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Checks every parameter invariant; the returned list is empty iff the
    /// set is usable. Never fails: diagnostics only.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let values = [
            self.k1, self.k2, self.K1, self.K2, self.rho1, self.rho2, self.rho3, self.D,
            self.lambda, self.gamma, self.M0, self.beta1, self.beta2, self.H0,
        ];
        for (field, value) in POSITIVE_FIELDS.iter().zip(values) {
            if !(value > 0.0) || !value.is_finite() {
                out.push(Violation { field, value, reason: "must be strictly positive" });
            }
        }
        if !(self.eps > 0.0 && self.eps <= 0.1) {
            out.push(Violation { field: "eps", value: self.eps, reason: "eps out of range" });
        }
        if !self.mu.is_finite() {
            out.push(Violation { field: "mu", value: self.mu, reason: "must be finite" });
        }
        let l0 = self.l0();
        if !(l0 > 0.0) {
            out.push(Violation { field: "mu", value: l0, reason: "derived L0 nonpositive" });
        }
        out
    }

    /// Critical bifurcation parameter
    /// `mu_c = (rho3/beta1) * { (gamma+H0)(lambda k1 M0 / (lambda K1 + rho3(gamma+H0)) + rho1) - rho2 H0 }`.
    pub fn mu_c(&self) -> f64 {
        let gh = self.gamma_h0();
        self.rho3 / self.beta1
            * (gh * (self.lambda * self.k1 * self.M0 / (self.lambda * self.K1 + self.rho3 * gh)
                + self.rho1)
                - self.rho2 * self.H0)
    }

    /// First-order expansion coefficients of the steady state and of
    /// `rho4(mu)`. `rho4_leading` is computed as
    /// `drho4_dmu_leading * (mu - mu_c)` so the two share one formula.
    pub fn asymptotic_coefficients(&self) -> AsymptoticCoefficients {
        let gh = self.gamma_h0();
        let den = self.lambda * self.K1 + self.rho3 * gh;
        let lstar1 = self.mu / self.lambda
            - self.rho3 * gh / self.beta1 * (self.k1 * self.M0 / den + self.rho1 / self.lambda);
        let hstar1 = -self.rho2 * self.H0 / self.beta1;
        let fstar1 = self.rho3 * gh / (self.beta2 * self.D) * self.k1 * self.M0 / den;
        let mu_c = self.mu_c();
        let drho4_dmu_leading = self.M0 / (fstar1 * gh);
        AsymptoticCoefficients {
            mu_c,
            lstar1,
            hstar1,
            fstar1,
            rho4_leading: drho4_dmu_leading * (self.mu - mu_c),
            drho4_dmu_leading,
        }
    }

    /// Sets a parameter by its config key. Keys are exactly the field names.
    pub fn set_key(&mut self, key: &str, value: f64) -> Result<(), UnknownKey> {
        match key {
            "k1" => self.k1 = value,
            "k2" => self.k2 = value,
            "K1" => self.K1 = value,
            "K2" => self.K2 = value,
            "rho1" => self.rho1 = value,
            "rho2" => self.rho2 = value,
            "rho3" => self.rho3 = value,
            "D" => self.D = value,
            "lambda" => self.lambda = value,
            "gamma" => self.gamma = value,
            "M0" => self.M0 = value,
            "beta1" => self.beta1 = value,
            "beta2" => self.beta2 = value,
            "H0" => self.H0 = value,
            "eps" => self.eps = value,
            "mu" => self.mu = value,
            _ => return Err(UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// All config keys in canonical order.
    pub fn keys() -> &'static [&'static str] {
        &[
            "k1", "k2", "K1", "K2", "rho1", "rho2", "rho3", "D", "lambda", "gamma", "M0",
            "beta1", "beta2", "H0", "eps", "mu",
        ]
    }

    /// Value of a parameter by its config key.
    pub fn get_key(&self, key: &str) -> Result<f64, UnknownKey> {
        Ok(match key {
            "k1" => self.k1,
            "k2" => self.k2,
            "K1" => self.K1,
            "K2" => self.K2,
            "rho1" => self.rho1,
            "rho2" => self.rho2,
            "rho3" => self.rho3,
            "D" => self.D,
            "lambda" => self.lambda,
            "gamma" => self.gamma,
            "M0" => self.M0,
            "beta1" => self.beta1,
            "beta2" => self.beta2,
            "H0" => self.H0,
            "eps" => self.eps,
            "mu" => self.mu,
            _ => return Err(UnknownKey(key.to_string())),
        })
    }

    /// Short hash of the exact parameter bits; stamped into output headers so
    /// result files are traceable to the inputs that produced them.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for key in Self::keys() {
            let v = self.get_key(key).expect("canonical key");
            hasher.update(key.as_bytes());
            hasher.update(v.to_bits().to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Unknown parameter key in a config file or CLI override.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown parameter key `{0}`")]
pub struct UnknownKey(pub String);

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn reference_sets_are_valid() {
        assert!(ModelParams::ref_a().validate().is_empty());
        assert!(ModelParams::ref_b().validate().is_empty());
    }

    #[test]
    fn eps_zero_is_flagged() {
        let p = ModelParams::ref_a().with_eps(0.0);
        let v = p.validate();
        assert!(v.iter().any(|x| x.field == "eps" && x.reason == "eps out of range"));
    }

    #[test]
    fn strongly_negative_mu_breaks_l0() {
        let mut p = ModelParams::ref_a();
        p.mu = -2.0 * p.rho3 * p.gamma_h0() / p.eps;
        let v = p.validate();
        assert!(v.iter().any(|x| x.reason == "derived L0 nonpositive"));
        assert!(p.l0() < 0.0);
    }

    #[test]
    fn mu_c_vanishes_with_rho3() {
        let mut p = ModelParams::ref_a();
        p.rho3 = 0.0; // validation suspended: mu_c is a pure formula
        assert_eq!(p.mu_c(), 0.0);
    }

    #[test]
    fn mu_c_hand_value() {
        let mut p = ModelParams::ref_a();
        p.k1 = 1.0;
        p.K1 = 1.0;
        p.M0 = 1.0;
        p.lambda = 1.0;
        p.gamma = 1.0;
        p.H0 = 1.0;
        p.beta1 = 1.0;
        p.rho1 = 0.1;
        p.rho2 = 0.1;
        p.rho3 = 0.1;
        // recomputed by hand: 0.1 * (2*(1/1.2 + 0.1) - 0.1)
        let expected = 0.1 * (2.0 * (1.0 / 1.2 + 0.1) - 0.1);
        assert_relative_eq!(p.mu_c(), expected, max_relative = 1e-15);
        assert_relative_eq!(p.mu_c(), 0.176_666_666_666_666_67, max_relative = 1e-14);
    }

    #[test]
    fn doubling_beta1_halves_mu_c() {
        let p = ModelParams::ref_b();
        let mut q = p;
        q.beta1 = 2.0 * p.beta1;
        assert_relative_eq!(q.mu_c(), 0.5 * p.mu_c(), max_relative = 1e-15);
    }

    #[test]
    fn ref_b_satisfies_bifurcation_constraints() {
        let p = ModelParams::ref_b();
        let mu_c = p.mu_c();
        for n in [2.0_f64, 3.0] {
            let guess = p.gamma_h0() * n * n * (1.0 - n * n);
            assert!(guess > mu_c, "n={n}: guess {guess} <= mu_c {mu_c}");
        }
        assert!(p.rho2 * p.eps / p.beta1 <= 0.25);
        // L0 stays positive across the mu range the sweep visits.
        assert!(p.with_mu(-72.0 * p.gamma_h0()).l0() > 0.0);
        // rho4 stays in the linear-response regime at the largest eps and
        // the largest mu the sweep visits (mu_2): far from the saturation
        // threshold rho4*eps ~ beta2*D past which Phi loses its root.
        let c = p.asymptotic_coefficients();
        assert!(
            c.rho4_leading * p.eps / (p.beta2 * p.D) <= 0.25,
            "rho4_leading {} too large at eps {}",
            c.rho4_leading,
            p.eps
        );
    }

    #[test]
    fn expansion_coefficient_identity() {
        // M0 (lambda*lstar1 - rho3*hstar1) / (gamma+H0) == M0 (mu - mu_c) / (gamma+H0)
        for p in [ModelParams::ref_a(), ModelParams::ref_b(), ModelParams::ref_b().with_mu(-14.4)]
        {
            let c = p.asymptotic_coefficients();
            let lhs = p.M0 * (p.lambda * c.lstar1 - p.rho3 * c.hstar1) / p.gamma_h0();
            let rhs = p.M0 * (p.mu - c.mu_c) / p.gamma_h0();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn rho4_leading_vanishes_at_mu_c() {
        let p = ModelParams::ref_a();
        let c = p.with_mu(p.mu_c()).asymptotic_coefficients();
        assert_eq!(c.rho4_leading, 0.0);
    }

    #[test]
    fn coefficient_signs() {
        for p in [ModelParams::ref_a(), ModelParams::ref_b()] {
            let c = p.asymptotic_coefficients();
            assert!(c.fstar1 > 0.0);
            assert!(c.hstar1 < 0.0);
            assert_relative_eq!(c.hstar1, -p.rho2 * p.H0 / p.beta1, max_relative = 1e-15);
        }
    }

    #[test]
    fn set_get_roundtrip_and_hash_sensitivity() {
        let mut p = ModelParams::ref_a();
        let h0 = p.hash();
        p.set_key("rho2", 0.375).unwrap();
        assert_eq!(p.get_key("rho2").unwrap(), 0.375);
        assert_ne!(p.hash(), h0);
        assert!(p.set_key("rho9", 1.0).is_err());
    }

    fn valid_params() -> impl Strategy<Value = ModelParams> {
        // Positive O(1) parameters; mu kept above mu_c is not required here.
        (
            0.2..2.0_f64,
            0.2..2.0_f64,
            0.2..2.0_f64,
            0.2..2.0_f64,
            0.05..0.5_f64,
            0.05..0.5_f64,
            0.05..0.5_f64,
            0.5..2.0_f64,
        )
            .prop_flat_map(|(k1, k2, kk1, kk2, rho1, rho2, rho3, d)| {
                (
                    Just((k1, k2, kk1, kk2, rho1, rho2, rho3, d)),
                    0.5..2.0_f64,
                    0.1..1.0_f64,
                    0.5..2.0_f64,
                    0.5..2.0_f64,
                    0.5..2.0_f64,
                    0.5..2.0_f64,
                    0.002..0.05_f64,
                    -0.5..2.0_f64,
                )
            })
            .prop_map(
                |((k1, k2, kk1, kk2, rho1, rho2, rho3, d), lambda, gamma, m0, beta1, beta2, h0, eps, mu)| {
                    #[allow(non_snake_case)]
                    ModelParams {
                        k1,
                        k2,
                        K1: kk1,
                        K2: kk2,
                        rho1,
                        rho2,
                        rho3,
                        D: d,
                        lambda,
                        gamma,
                        M0: m0,
                        beta1,
                        beta2,
                        H0: h0,
                        eps,
                        mu,
                    }
                },
            )
    }

    proptest! {
        // Only the product k1*M0 enters mu_c.
        #[test]
        fn mu_c_invariant_under_k1_m0_rescaling(p in valid_params(), c in 0.1..10.0f64) {
            let mut q = p;
            q.k1 = p.k1 * c;
            q.M0 = p.M0 / c;
            prop_assert!((q.mu_c() - p.mu_c()).abs() <= 1e-10 * (1.0 + p.mu_c().abs()));
        }

        // fstar1 * beta2 * D depends on neither beta2 nor D.
        #[test]
        fn fstar1_beta2_d_product_invariant(p in valid_params(), b in 0.1..10.0f64, d in 0.1..10.0f64) {
            let mut q = p;
            q.beta2 = b;
            q.D = d;
            let lhs = q.asymptotic_coefficients().fstar1 * q.beta2 * q.D;
            let rhs = p.asymptotic_coefficients().fstar1 * p.beta2 * p.D;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
        }

        // rho4_leading / drho4_dmu_leading recovers mu - mu_c.
        #[test]
        fn rho4_leading_ratio(p in valid_params()) {
            let c = p.asymptotic_coefficients();
            let got = c.rho4_leading / c.drho4_dmu_leading;
            prop_assert!((got - (p.mu - c.mu_c)).abs() <= 1e-10 * (1.0 + (p.mu - c.mu_c).abs()));
        }

        // Finite-difference sensitivity of the closed forms matches their
        // analytic mu-derivative (the only nontrivial partial: d lstar1/d mu
        // = 1/lambda, d rho4_leading/d mu = drho4_dmu_leading).
        #[test]
        fn coefficients_mu_sensitivity(p in valid_params()) {
            let h = 1e-5 * (1.0 + p.mu.abs());
            let cp = p.with_mu(p.mu + h).asymptotic_coefficients();
            let cm = p.with_mu(p.mu - h).asymptotic_coefficients();
            let dl = (cp.lstar1 - cm.lstar1) / (2.0 * h);
            prop_assert!((dl - 1.0 / p.lambda).abs() <= 1e-6 * (1.0 + (1.0 / p.lambda).abs()));
            let dr = (cp.rho4_leading - cm.rho4_leading) / (2.0 * h);
            let c = p.asymptotic_coefficients();
            prop_assert!((dr - c.drho4_dmu_leading).abs() <= 1e-6 * (1.0 + c.drho4_dmu_leading.abs()));
        }
    }
}
