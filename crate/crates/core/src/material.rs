//! Model constants and the scalar constitutive functions.
//!
//! The thermal functions are affine in temperature,
//! `h_X(θ) = β_X (θ − θ_X)`, so every second temperature derivative vanishes
//! and the heat-capacity coefficient of the temperature equation is exactly
//! `c_s`. The kinetic asymmetry function is
//! `d(χ_S, σ_m) = d0 + d1 χ_S + d2 (1 − tanh(k_d σ_m)) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Issue, Result};
use crate::tensors::{DevTensor3, SymTensor3};

/// Phase labels for the thermal functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    /// Austenite.
    A,
    /// Twinned (multi-variant) martensite.
    M,
    /// Detwinned (oriented) martensite.
    S,
}

/// All model constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    pub c_s: f64,
    pub xi_s: f64,
    pub theta_0: f64,
    #[serde(rename = "beta_M")]
    pub beta_m: f64,
    #[serde(rename = "theta_M_ref")]
    pub theta_m_ref: f64,
    #[serde(rename = "beta_S")]
    pub beta_s: f64,
    #[serde(rename = "theta_S_ref")]
    pub theta_s_ref: f64,
    #[serde(rename = "beta_A")]
    pub beta_a: f64,
    #[serde(rename = "theta_A_ref")]
    pub theta_a_ref: f64,
    /// Slope of `h_d(θ) = h_d_tensor (θ − θ_0)`.
    #[serde(default)]
    pub h_d_tensor: SymTensor3,
    #[serde(default, rename = "C_MS")]
    pub c_ms: f64,
    #[serde(default, rename = "C_AM")]
    pub c_am: f64,
    #[serde(default, rename = "C_AS")]
    pub c_as: f64,
    #[serde(default, rename = "C_AMS")]
    pub c_ams: f64,
    #[serde(default, rename = "H_M")]
    pub h_m: f64,
    #[serde(default, rename = "H_S")]
    pub h_s: f64,
    #[serde(default)]
    pub d0: f64,
    #[serde(default)]
    pub d1: f64,
    #[serde(default)]
    pub d2: f64,
    #[serde(default)]
    pub k_d: f64,
}

impl MaterialParams {
    /// Demonstration set used by the built-in scenarios.
    ///
    /// Energies are scaled so the dissipation thresholds are 1. The
    /// twinned-martensite transformation is centred on 280 K, and at 300 K
    /// austenite is stable against detwinned martensite by `h_S − h_A = 5`.
    pub fn demo() -> Self {
        MaterialParams {
            lambda: 15000.0,
            mu: 10000.0,
            c_s: 20.0,
            xi_s: 0.05,
            theta_0: 300.0,
            beta_m: 0.1,
            theta_m_ref: 280.0,
            beta_s: 0.1,
            theta_s_ref: 250.0,
            beta_a: 0.0,
            theta_a_ref: 300.0,
            h_d_tensor: SymTensor3::zero(),
            c_ms: 0.5,
            c_am: 0.0,
            c_as: 0.0,
            c_ams: 0.0,
            h_m: 0.0,
            h_s: 0.0,
            d0: 0.5,
            d1: 0.0,
            d2: 0.0,
            k_d: 0.0,
        }
    }

    /// Bulk modulus `λ + 2μ/3`.
    pub fn bulk(&self) -> f64 {
        self.lambda + 2.0 * self.mu / 3.0
    }

    pub fn slope(&self, phase: Phase) -> f64 {
        match phase {
            Phase::A => self.beta_a,
            Phase::M => self.beta_m,
            Phase::S => self.beta_s,
        }
    }

    fn reference(&self, phase: Phase) -> f64 {
        match phase {
            Phase::A => self.theta_a_ref,
            Phase::M => self.theta_m_ref,
            Phase::S => self.theta_s_ref,
        }
    }

    /// `h_d(θ)`; deviatoric because the coefficient is.
    pub fn h_d(&self, theta: f64) -> DevTensor3 {
        ((theta - self.theta_0) * self.h_d_tensor).dev()
    }

    pub fn h_d_slope(&self) -> DevTensor3 {
        self.h_d_tensor.dev()
    }

    /// Temperature at which `h_M − h_A = target`, if the slope is nonzero.
    pub fn theta_where_dh_ma(&self, target: f64) -> Option<f64> {
        solve_affine(
            self.beta_m - self.beta_a,
            -self.beta_m * self.theta_m_ref + self.beta_a * self.theta_a_ref,
            target,
        )
    }

    /// Temperature at which `h_S − h_A = target`.
    pub fn theta_where_dh_sa(&self, target: f64) -> Option<f64> {
        solve_affine(
            self.beta_s - self.beta_a,
            -self.beta_s * self.theta_s_ref + self.beta_a * self.theta_a_ref,
            target,
        )
    }

    /// `h_M(θ) − h_A(θ)` without domain checks.
    pub fn dh_ma(&self, theta: f64) -> f64 {
        self.beta_m * (theta - self.theta_m_ref) - self.beta_a * (theta - self.theta_a_ref)
    }

    /// `h_S(θ) − h_A(θ)` without domain checks.
    pub fn dh_sa(&self, theta: f64) -> f64 {
        self.beta_s * (theta - self.theta_s_ref) - self.beta_a * (theta - self.theta_a_ref)
    }

    /// `d` with the χ_S argument clamped to `[0, 1]`.
    pub fn d_clamped(&self, chi_s: f64, sigma_m: f64) -> f64 {
        let chi = chi_s.clamp(0.0, 1.0);
        self.d0 + self.d1 * chi + self.d2 * 0.5 * (1.0 - (self.k_d * sigma_m).tanh())
    }
}

fn solve_affine(slope: f64, offset: f64, target: f64) -> Option<f64> {
    (slope != 0.0).then(|| (target - offset) / slope)
}

/// `h_phase(θ) = β (θ − θ_ref)`.
pub fn h_eval(params: &MaterialParams, phase: Phase, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {theta}"
        )));
    }
    Ok(params.slope(phase) * (theta - params.reference(phase)))
}

/// Kinetic asymmetry `d(χ_S, σ_m) ≥ 0`.
pub fn d_eval(params: &MaterialParams, chi_s: f64, sigma_m: f64) -> Result<f64> {
    const TOL: f64 = 1e-9;
    if !(-TOL..=1.0 + TOL).contains(&chi_s) {
        return Err(Error::Domain(format!(
            "chi_S must lie in [0, 1], got {chi_s}"
        )));
    }
    Ok(params.d_clamped(chi_s, sigma_m))
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn into_result(self) -> Result<Vec<String>> {
        if self.issues.is_empty() {
            Ok(self.notes)
        } else {
            Err(Error::InvalidParams(self.issues))
        }
    }
}

/// Checks every parameter invariant and reports all violations at once.
pub fn validate(params: &MaterialParams) -> ValidationReport {
    validate_at(params, "")
}

pub(crate) fn validate_at(params: &MaterialParams, prefix: &str) -> ValidationReport {
    let p = params;
    let mut issues = Vec::new();
    let mut push = |key: &str, msg: &str| issues.push(Issue::new(format!("{prefix}{key}"), msg));

    let scalars = [
        ("lambda", p.lambda),
        ("mu", p.mu),
        ("c_s", p.c_s),
        ("xi_s", p.xi_s),
        ("theta_0", p.theta_0),
        ("beta_M", p.beta_m),
        ("theta_M_ref", p.theta_m_ref),
        ("beta_S", p.beta_s),
        ("theta_S_ref", p.theta_s_ref),
        ("beta_A", p.beta_a),
        ("theta_A_ref", p.theta_a_ref),
        ("C_MS", p.c_ms),
        ("C_AM", p.c_am),
        ("C_AS", p.c_as),
        ("C_AMS", p.c_ams),
        ("H_M", p.h_m),
        ("H_S", p.h_s),
        ("d0", p.d0),
        ("d1", p.d1),
        ("d2", p.d2),
        ("k_d", p.k_d),
    ];
    for (key, v) in scalars {
        if !v.is_finite() {
            push(key, "must be finite");
        }
    }
    if !p.h_d_tensor.is_finite() {
        push("h_d_tensor", "must be finite");
    }

    if !(p.mu > 0.0) {
        push("mu", "mu must be positive");
    }
    if !(p.bulk() > 0.0) {
        push(
            "lambda",
            "lambda + 2 mu / 3 must be positive (bulk modulus)",
        );
    }
    if !(p.c_s > 0.0) {
        push(
            "c_s",
            "c_s must be positive: with affine thermal functions the heat-capacity \
             coefficient of the temperature equation equals c_s and must stay positive",
        );
    }
    if !(p.xi_s > 0.0) {
        push("xi_s", "xi_s must be positive");
    }
    if !(p.theta_0 > 0.0) {
        push("theta_0", "theta_0 must be positive");
    }
    for (key, v) in [
        ("C_MS", p.c_ms),
        ("C_AM", p.c_am),
        ("C_AS", p.c_as),
        ("C_AMS", p.c_ams),
        ("H_M", p.h_m),
        ("H_S", p.h_s),
        ("d0", p.d0),
        ("d1", p.d1),
        ("d2", p.d2),
    ] {
        if v < 0.0 {
            push(key, &format!("{key} must be nonnegative"));
        }
    }
    let hd = &p.h_d_tensor;
    if hd.trace().abs() > 1e-12 * (1.0 + hd.norm()) {
        push("h_d_tensor", "h_d_tensor must be deviatoric (zero trace)");
    }

    let mut notes = Vec::new();
    if issues.is_empty() {
        notes.push(format!(
            "thermal functions are affine: all second temperature derivatives vanish, \
             heat-capacity coefficient = c_s = {} > 0",
            p.c_s
        ));
    }
    ValidationReport { issues, notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn h_examples() {
        let mut p = MaterialParams::demo();
        p.beta_m = 0.1;
        p.theta_m_ref = 300.0;
        let v = h_eval(&p, Phase::M, 290.0).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
        assert_eq!(h_eval(&p, Phase::M, 300.0).unwrap(), 0.0);
        p.beta_a = 0.0;
        assert_eq!(h_eval(&p, Phase::A, 123.0).unwrap(), 0.0);
        assert!(matches!(h_eval(&p, Phase::A, 0.0), Err(Error::Domain(_))));
        assert!(matches!(h_eval(&p, Phase::A, -3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn d_examples() {
        let mut p = MaterialParams::demo();
        (p.d0, p.d1, p.d2) = (0.0, 0.0, 0.0);
        assert_eq!(d_eval(&p, 0.3, 123.0).unwrap(), 0.0);
        (p.d0, p.d1, p.d2) = (0.5, 1.0, 0.0);
        assert!((d_eval(&p, 0.2, -50.0).unwrap() - 0.7).abs() < 1e-15);
        (p.d0, p.d1, p.d2, p.k_d) = (0.0, 0.0, 0.4, 17.0);
        assert!((d_eval(&p, 0.6, 0.0).unwrap() - 0.2).abs() < 1e-15);
        assert!(d_eval(&p, 1.5, 0.0).is_err());
        assert!(d_eval(&p, -0.1, 0.0).is_err());
    }

    #[test]
    fn validate_examples() {
        let r = validate(&MaterialParams::demo());
        assert!(r.is_ok());
        assert!(!r.notes.is_empty());

        let mut p = MaterialParams::demo();
        p.mu = -1.0;
        let r = validate(&p);
        assert!(r
            .issues
            .iter()
            .any(|i| i.path == "mu" && i.message.contains("mu must be positive")));

        let mut p = MaterialParams::demo();
        p.c_s = 0.0;
        let r = validate(&p);
        assert!(r
            .issues
            .iter()
            .any(|i| i.path == "c_s" && i.message.contains("temperature equation")));
    }

    #[test]
    fn validate_itemizes_everything() {
        let mut p = MaterialParams::demo();
        p.mu = 0.0;
        p.xi_s = -1.0;
        p.c_ams = -0.1;
        p.d2 = f64::NAN;
        let r = validate(&p);
        let paths: Vec<_> = r.issues.iter().map(|i| i.path.as_str()).collect();
        for key in ["mu", "xi_s", "C_AMS", "d2"] {
            assert!(paths.contains(&key), "missing {key} in {paths:?}");
        }
    }

    #[test]
    fn onset_temperatures_invert_dh() {
        let p = MaterialParams::demo();
        let t = p.theta_where_dh_ma(-1.0).unwrap();
        assert!((p.dh_ma(t) + 1.0).abs() < 1e-12);
        let t = p.theta_where_dh_sa(2.0).unwrap();
        assert!((p.dh_sa(t) - 2.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn d_is_nonnegative(
            d0 in 0.0f64..3.0, d1 in 0.0f64..3.0, d2 in 0.0f64..3.0, k in -1.0f64..1.0,
            chi in 0.0f64..=1.0, sm in -1e4f64..1e4,
        ) {
            let mut p = MaterialParams::demo();
            (p.d0, p.d1, p.d2, p.k_d) = (d0, d1, d2, k);
            prop_assert!(d_eval(&p, chi, sm).unwrap() >= 0.0);
        }

        #[test]
        fn h_is_affine(t1 in 1.0f64..1000.0, t2 in 1.0f64..1000.0, beta in -1.0f64..1.0) {
            let mut p = MaterialParams::demo();
            p.beta_s = beta;
            let lhs = h_eval(&p, Phase::S, t1).unwrap() + h_eval(&p, Phase::S, t2).unwrap();
            let rhs = 2.0 * h_eval(&p, Phase::S, 0.5 * (t1 + t2)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }
    }
}
