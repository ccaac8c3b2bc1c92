//! Free energy, stress, entropy and the energetic thermodynamic forces.
//!
//! ```text
//! Ψ = (λ/2 + μ/3)(tr ε)² + μ‖e − χ_S d‖²
//!   + c_s((θ − θ_0) − θ log θ)
//!   + (1 − χ_M − χ_S) h_A + χ_M h_M + χ_S h_S + h_d : d
//!   + Ψ_int(χ_M, χ_S)
//! ```
//!
//! The indicator terms (phase fractions in the triangle `K`, `‖d‖ = ξ_s`) are
//! feasibility predicates rather than infinite energies. Forces are the plain
//! partial derivatives `∂Ψ/∂χ_M`, `∂Ψ/∂χ_S`, `∂Ψ/∂d`; constraint reactions are
//! supplied by the integrator.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::material::{d_eval, MaterialParams};
use crate::tensors::{DevTensor3, SymTensor3};

/// Tolerance for membership in the phase triangle and on the orientation sphere.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// State of a material point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThermoState {
    /// Total small strain.
    pub eps: SymTensor3,
    /// Absolute temperature.
    pub theta: f64,
    /// Twinned martensite fraction.
    pub chi_m: f64,
    /// Detwinned martensite fraction.
    pub chi_s: f64,
    /// Transformation-strain direction, `‖d_tr‖ = ξ_s`.
    pub d_tr: DevTensor3,
}

impl ThermoState {
    /// Unstrained austenite at `theta` with the orientation along uniaxial tension.
    pub fn austenite(params: &MaterialParams, theta: f64) -> Self {
        ThermoState {
            eps: SymTensor3::zero(),
            theta,
            chi_m: 0.0,
            chi_s: 0.0,
            d_tr: params.xi_s * DevTensor3::uniaxial(),
        }
    }

    pub fn chi_a(&self) -> f64 {
        1.0 - self.chi_m - self.chi_s
    }

    /// Names the violated indicator, if any.
    pub fn check_feasible(&self, params: &MaterialParams) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(Error::Infeasible(format!(
                "temperature must be positive, got {}",
                self.theta
            )));
        }
        if !in_triangle(self.chi_m, self.chi_s, FEASIBILITY_TOL) {
            return Err(Error::Infeasible(format!(
                "phase fractions (chi_M, chi_S) = ({}, {}) outside K",
                self.chi_m, self.chi_s
            )));
        }
        let n = self.d_tr.norm();
        if (n - params.xi_s).abs() > FEASIBILITY_TOL {
            return Err(Error::Infeasible(format!(
                "orientation norm {n} differs from xi_s = {}",
                params.xi_s
            )));
        }
        if !self.eps.is_finite() {
            return Err(Error::Infeasible("strain is not finite".into()));
        }
        Ok(())
    }
}

/// `(a, b) ∈ K` up to `tol`.
pub fn in_triangle(a: f64, b: f64, tol: f64) -> bool {
    a >= -tol && b >= -tol && a + b <= 1.0 + tol
}

/// Energetic forces `∂Ψ/∂χ_M`, `∂Ψ/∂χ_S`, `∂Ψ/∂d` (no constraint reactions).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Forces {
    pub b_m: f64,
    pub b_s: f64,
    pub b_d: DevTensor3,
}

/// Rates (or increments) of the internal variables.
#[derive(Clone, Copy, Debug, Default)]
pub struct Rates {
    pub chi_m: f64,
    pub chi_s: f64,
    pub d_tr: DevTensor3,
}

/// Elastic part of the deviatoric strain, `e − χ_S d`.
fn elastic_dev(state: &ThermoState) -> DevTensor3 {
    state.eps.dev() - state.chi_s * state.d_tr
}

/// Mean stress `(λ + 2μ/3) tr ε`.
pub fn mean_stress(params: &MaterialParams, eps: &SymTensor3) -> f64 {
    params.bulk() * eps.trace()
}

/// Cauchy stress `σ_m I + 2μ(e − χ_S d)`.
pub fn stress(params: &MaterialParams, state: &ThermoState) -> SymTensor3 {
    let s = 2.0 * params.mu * elastic_dev(state);
    mean_stress(params, &state.eps) * SymTensor3::identity() + s.into_sym()
}

/// Interaction energy, including the optional quadratic hardening terms.
pub fn psi_int(params: &MaterialParams, chi_m: f64, chi_s: f64) -> f64 {
    let p = params;
    let chi_a = 1.0 - chi_m - chi_s;
    p.c_ms * chi_m * chi_s
        + (p.c_am * chi_m + p.c_as * chi_s) * chi_a
        + p.c_ams * chi_m * chi_s * chi_a
        + 0.5 * p.h_m * chi_m * chi_m
        + 0.5 * p.h_s * chi_s * chi_s
}

/// `(∂Ψ_int/∂χ_M, ∂Ψ_int/∂χ_S)`.
pub fn psi_int_partials(params: &MaterialParams, chi_m: f64, chi_s: f64) -> (f64, f64) {
    let p = params;
    let chi_a = 1.0 - chi_m - chi_s;
    let lin = p.c_am * chi_m + p.c_as * chi_s;
    let dm =
        p.c_ms * chi_s + p.c_am * chi_a - lin + p.c_ams * chi_s * (chi_a - chi_m) + p.h_m * chi_m;
    let ds =
        p.c_ms * chi_m + p.c_as * chi_a - lin + p.c_ams * chi_m * (chi_a - chi_s) + p.h_s * chi_s;
    (dm, ds)
}

/// Finite part of Ψ, evaluated anywhere (no feasibility checks).
pub fn free_energy_smooth(params: &MaterialParams, state: &ThermoState) -> f64 {
    let p = params;
    let th = state.theta;
    let tr = state.eps.trace();
    let el = (0.5 * p.lambda + p.mu / 3.0) * tr * tr + p.mu * elastic_dev(state).norm().powi(2);
    let id = p.c_s * ((th - p.theta_0) - th * th.ln());
    let (a, b) = (state.chi_m, state.chi_s);
    let h_a = p.beta_a * (th - p.theta_a_ref);
    let h_m = p.beta_m * (th - p.theta_m_ref);
    let h_s = p.beta_s * (th - p.theta_s_ref);
    let ch = (1.0 - a - b) * h_a + a * h_m + b * h_s + p.h_d(th).dot(&state.d_tr);
    el + id + ch + psi_int(p, a, b)
}

/// Free energy of a feasible state.
pub fn free_energy(params: &MaterialParams, state: &ThermoState) -> Result<f64> {
    state.check_feasible(params)?;
    Ok(free_energy_smooth(params, state))
}

/// Energetic forces conjugate to the internal variables.
///
/// The caller guarantees feasibility; reactions of the constraints are not
/// included.
pub fn forces_smooth(params: &MaterialParams, state: &ThermoState) -> Forces {
    let p = params;
    let el = elastic_dev(state);
    let (dpm, dps) = psi_int_partials(p, state.chi_m, state.chi_s);
    let b_m = p.dh_ma(state.theta) + dpm;
    let b_s = p.dh_sa(state.theta) + dps - 2.0 * p.mu * el.dot(&state.d_tr);
    let b_d = -2.0 * p.mu * state.chi_s * el + p.h_d(state.theta);
    Forces { b_m, b_s, b_d }
}

/// `η = −∂Ψ/∂θ`.
pub fn entropy(params: &MaterialParams, state: &ThermoState) -> Result<f64> {
    let p = params;
    if !(state.theta > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {}",
            state.theta
        )));
    }
    let (a, b) = (state.chi_m, state.chi_s);
    Ok(p.c_s * state.theta.ln()
        - p.beta_a * (1.0 - a - b)
        - p.beta_m * a
        - p.beta_s * b
        - p.h_d_slope().dot(&state.d_tr))
}

/// Mechanical dissipation rate `|χ̇_M| + |χ̇_S| + d (χ̇_S)⁺ + χ_S ‖ḋ‖`.
///
/// `d` is evaluated at the state's χ_S and the mean stress of `sigma`.
pub fn heating_rate(
    params: &MaterialParams,
    state: &ThermoState,
    rates: &Rates,
    sigma: &SymTensor3,
) -> Result<f64> {
    let d = d_eval(params, state.chi_s, sigma.trace() / 3.0)?;
    Ok(rates.chi_m.abs()
        + rates.chi_s.abs()
        + d * rates.chi_s.max(0.0)
        + state.chi_s * rates.d_tr.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::SymTensor3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zero_thermal(mut p: MaterialParams) -> MaterialParams {
        p.beta_a = 0.0;
        p.beta_m = 0.0;
        p.beta_s = 0.0;
        (p.c_ms, p.c_am, p.c_as, p.c_ams, p.h_m, p.h_s) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        p
    }

    fn n_hat() -> DevTensor3 {
        DevTensor3::uniaxial()
    }

    fn random_params(rng: &mut ChaCha8Rng) -> MaterialParams {
        let mut p = MaterialParams::demo();
        p.lambda = rng.gen_range(5e3..2e4);
        p.mu = rng.gen_range(5e3..2e4);
        p.c_s = rng.gen_range(0.1..5.0);
        p.xi_s = rng.gen_range(0.02..0.08);
        p.beta_a = rng.gen_range(0.0..0.2);
        p.beta_m = rng.gen_range(0.0..0.2);
        p.beta_s = rng.gen_range(0.0..0.2);
        p.c_ms = rng.gen_range(0.0..2.0);
        p.c_am = rng.gen_range(0.0..2.0);
        p.c_as = rng.gen_range(0.0..2.0);
        p.c_ams = rng.gen_range(0.0..2.0);
        p.h_m = rng.gen_range(0.0..2.0);
        p.h_s = rng.gen_range(0.0..2.0);
        p.h_d_tensor = SymTensor3::from([(); 6].map(|_| rng.gen_range(-0.01..0.01)))
            .dev()
            .into_sym();
        p
    }

    fn random_state(rng: &mut ChaCha8Rng, p: &MaterialParams) -> ThermoState {
        let a: f64 = rng.gen_range(0.05..0.9);
        let b: f64 = rng.gen_range(0.05..(0.95 - a).max(0.06));
        let dir = SymTensor3::from([(); 6].map(|_| rng.gen_range(-1.0..1.0))).dev();
        ThermoState {
            eps: SymTensor3::from([(); 6].map(|_| rng.gen_range(-0.01..0.01))),
            theta: rng.gen_range(250.0..320.0),
            chi_m: a,
            chi_s: b.min(0.94 - a),
            d_tr: dir.with_norm(p.xi_s).unwrap(),
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1.0)
    }

    #[test]
    fn stress_examples() {
        let mut p = MaterialParams::demo();
        let s0 = ThermoState::austenite(&p, 300.0);
        assert_eq!(stress(&p, &s0), SymTensor3::zero());

        (p.lambda, p.mu) = (15000.0, 10000.0);
        let mut s = s0;
        s.eps = 0.001 * SymTensor3::identity();
        let sig = stress(&p, &s);
        assert!((sig.trace() / 3.0 - 65.0).abs() < 1e-10);
        assert!(sig.dev().norm() < 1e-10);

        p.xi_s = 0.05;
        let n = n_hat();
        let s = ThermoState {
            eps: 0.03 * n.into_sym(),
            chi_s: 0.2,
            d_tr: 0.05 * n,
            ..s0
        };
        let sig = stress(&p, &s);
        let expect = 400.0 * n.into_sym();
        assert!(sig.max_abs_diff(&expect) < 1e-9, "{sig:?}");
    }

    #[test]
    fn free_energy_examples() {
        let mut p = zero_thermal(MaterialParams::demo());
        p.c_s = 1.0;
        p.theta_0 = 1.0;
        let s = ThermoState::austenite(&p, 1.0);
        assert_eq!(free_energy(&p, &s).unwrap(), 0.0);

        p.mu = 10000.0;
        let shear = SymTensor3::new(0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
        let shear = 0.03 / shear.norm() * shear;
        let s = ThermoState { eps: shear, ..s };
        assert!((free_energy(&p, &s).unwrap() - 9.0).abs() < 1e-12);

        let bad = ThermoState {
            chi_m: 0.8,
            chi_s: 0.5,
            ..s
        };
        let err = free_energy(&p, &bad).unwrap_err();
        assert!(matches!(err, Error::Infeasible(ref m) if m.contains("outside K")));

        let bad = ThermoState {
            d_tr: 2.0 * s.d_tr,
            ..s
        };
        let err = free_energy(&p, &bad).unwrap_err();
        assert!(matches!(err, Error::Infeasible(ref m) if m.contains("orientation")));
    }

    #[test]
    fn psi_int_partial_examples() {
        let mut p = MaterialParams::demo();
        (p.c_ms, p.c_am, p.c_as, p.c_ams) = (0.3, 0.7, 1.1, 2.0);
        assert_eq!(psi_int_partials(&p, 0.0, 0.0), (0.7, 1.1));

        let mut p = zero_thermal(MaterialParams::demo());
        p.c_ms = 1.0;
        assert_eq!(psi_int_partials(&p, 0.5, 0.5), (0.5, 0.5));

        let p = zero_thermal(MaterialParams::demo());
        assert_eq!(psi_int_partials(&p, 0.3, 0.1), (0.0, 0.0));
    }

    #[test]
    fn force_examples() {
        let mut p = zero_thermal(MaterialParams::demo());
        p.beta_s = 0.3 / 300.0;
        p.theta_s_ref = 0.0;
        p.c_as = 0.1;
        p.c_s = 1e-3;
        let s = ThermoState::austenite(&p, 300.0);
        let f = forces_smooth(&p, &s);
        assert!((f.b_s - 0.4).abs() < 1e-12);
        let h = 1e-6;
        let up = ThermoState { chi_s: h, ..s };
        let fd = (free_energy_smooth(&p, &up)
            - free_energy_smooth(&p, &ThermoState { chi_s: -h, ..s }))
            / (2.0 * h);
        assert!((fd - 0.4).abs() < 1e-6);

        let p = zero_thermal(MaterialParams::demo());
        let n = n_hat();
        let s = ThermoState {
            eps: 0.03 * n.into_sym(),
            chi_s: 0.2,
            d_tr: 0.05 * n,
            ..ThermoState::austenite(&p, 300.0)
        };
        let f = forces_smooth(&p, &s);
        assert!((f.b_s + 20.0).abs() < 1e-9, "{}", f.b_s);

        let s = ThermoState::austenite(&p, 300.0);
        assert_eq!(forces_smooth(&p, &s).b_d.norm(), 0.0);
    }

    #[test]
    fn entropy_examples() {
        let mut p = zero_thermal(MaterialParams::demo());
        p.c_s = 1.0;
        assert_eq!(entropy(&p, &ThermoState::austenite(&p, 1.0)).unwrap(), 0.0);
        p.c_s = 2.0;
        let e = std::f64::consts::E;
        assert!((entropy(&p, &ThermoState::austenite(&p, e)).unwrap() - 2.0).abs() < 1e-15);
        p.c_s = 1.0;
        p.beta_m = 0.1;
        let s = ThermoState {
            chi_m: 1.0,
            ..ThermoState::austenite(&p, 1.0)
        };
        assert!((entropy(&p, &s).unwrap() + 0.1).abs() < 1e-15);
        assert!(entropy(&p, &ThermoState::austenite(&p, -1.0)).is_err());
    }

    #[test]
    fn heating_rate_examples() {
        let mut p = MaterialParams::demo();
        (p.d0, p.d1, p.d2) = (0.5, 0.0, 0.0);
        let s = ThermoState::austenite(&p, 300.0);
        let sig = SymTensor3::zero();
        assert_eq!(heating_rate(&p, &s, &Rates::default(), &sig).unwrap(), 0.0);
        let fwd = Rates {
            chi_s: 0.1,
            ..Default::default()
        };
        assert!((heating_rate(&p, &s, &fwd, &sig).unwrap() - 0.15).abs() < 1e-15);
        let rev = Rates {
            chi_s: -0.1,
            ..Default::default()
        };
        assert!((heating_rate(&p, &s, &rev, &sig).unwrap() - 0.1).abs() < 1e-15);
    }

    // Central differences of the smooth energy in every argument.
    #[test]
    fn gradients_match_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..100 {
            let p = random_params(&mut rng);
            let s = random_state(&mut rng, &p);
            let f = forces_smooth(&p, &s);
            let psi = |st: &ThermoState| free_energy_smooth(&p, st);

            let fd_m = (psi(&ThermoState {
                chi_m: s.chi_m + h,
                ..s
            }) - psi(&ThermoState {
                chi_m: s.chi_m - h,
                ..s
            })) / (2.0 * h);
            let fd_s = (psi(&ThermoState {
                chi_s: s.chi_s + h,
                ..s
            }) - psi(&ThermoState {
                chi_s: s.chi_s - h,
                ..s
            })) / (2.0 * h);
            assert!(rel(fd_m, f.b_m) < 1e-6, "B_M {fd_m} vs {}", f.b_m);
            assert!(rel(fd_s, f.b_s) < 1e-6, "B_S {fd_s} vs {}", f.b_s);

            // unconstrained directional derivatives, leaving the sphere on purpose
            let sig = stress(&p, &s);
            for k in 0..6 {
                let e = SymTensor3::basis(k);
                let v = e.dev();
                let dp = s.d_tr + h * v;
                let dm = s.d_tr - h * v;
                let fd = (psi(&ThermoState { d_tr: dp, ..s })
                    - psi(&ThermoState { d_tr: dm, ..s }))
                    / (2.0 * h);
                let an = f.b_d.dot(&v);
                assert!(rel(fd, an) < 1e-6, "B_d[{k}] {fd} vs {an}");

                let ep = ThermoState {
                    eps: s.eps + h * e,
                    ..s
                };
                let em = ThermoState {
                    eps: s.eps - h * e,
                    ..s
                };
                let fd = (psi(&ep) - psi(&em)) / (2.0 * h);
                let an = sig.dot(&e);
                assert!(rel(fd, an) < 1e-6, "sigma[{k}] {fd} vs {an}");
            }

            let fd_t = -(psi(&ThermoState {
                theta: s.theta + h,
                ..s
            }) - psi(&ThermoState {
                theta: s.theta - h,
                ..s
            })) / (2.0 * h);
            let eta = entropy(&p, &s).unwrap();
            assert!(rel(fd_t, eta) < 1e-6, "eta {fd_t} vs {eta}");
        }
    }

    #[test]
    fn stress_deviator_is_elastic_shear() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p = random_params(&mut rng);
            let s = random_state(&mut rng, &p);
            let sd = stress(&p, &s).dev();
            let expect = 2.0 * p.mu * (s.eps.dev() - s.chi_s * s.d_tr);
            let diff = (sd - expect).norm();
            assert!(diff <= 1e-12 * (1.0 + expect.norm()));
        }
    }

    #[test]
    fn heating_rate_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = random_params(&mut rng);
            let s = random_state(&mut rng, &p);
            let r = Rates {
                chi_m: rng.gen_range(-1.0..1.0),
                chi_s: rng.gen_range(-1.0..1.0),
                d_tr: SymTensor3::from([(); 6].map(|_| rng.gen_range(-1.0..1.0))).dev(),
            };
            assert!(heating_rate(&p, &s, &r, &stress(&p, &s)).unwrap() >= 0.0);
        }
    }
}
