//! Orientation update on the sphere `‖d_tr‖ = ξ_s` with χ_S, ε, θ frozen.
//!
//! The tangential drive at `d` is the tangential part of the fixed deviator
//! `w = 2μ χ_S e − h_d(θ)` under held strain, `w = χ_S s − h_d(θ)` under held
//! stress with deviator `s`. Slip rotates `d` along the great circle through
//! the start orientation towards `w` and stops where the tangential drive has
//! fallen to the threshold χ_S, i.e. where the angle `ψ` between `d` and `w`
//! satisfies `‖w‖ sin ψ = χ_S`. For rotations below a right angle this is the
//! same path as `ξ_s normalize(d + λ G_t)`, λ ≥ 0.

use serde::Serialize;

use super::{Hold, SolverOptions};
use crate::energy::{forces_smooth, ThermoState};
use crate::error::{Error, Result};
use crate::kinetics::yield_fd;
use crate::material::MaterialParams;
use crate::tensors::DevTensor3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReorientSolution {
    pub d_tr: DevTensor3,
    pub zeta_d: f64,
    /// Reaction of the norm constraint, making `B_d + γ d_tr` tangential.
    pub gamma: f64,
    pub f_d: f64,
    pub tangential_drive_norm: f64,
    pub frozen: bool,
    pub slip: bool,
}

/// Updates `state.d_tr` at held strain using `state.chi_s` as the threshold.
pub fn step_reorientation(
    params: &MaterialParams,
    state: &ThermoState,
    options: &SolverOptions,
) -> Result<ReorientSolution> {
    reorient(params, state, Hold::Strain, options)
}

pub(crate) fn reorient(
    params: &MaterialParams,
    state: &ThermoState,
    hold: Hold,
    options: &SolverOptions,
) -> Result<ReorientSolution> {
    let state = &hold.state(params, *state);
    let xi = params.xi_s;
    let chi = state.chi_s;
    let d0 = state.d_tr;
    if chi <= options.tol_chi_freeze {
        let f = forces_smooth(params, state);
        let (f_d, g) = yield_fd(&f.b_d, &d0, chi, xi);
        return Ok(ReorientSolution {
            d_tr: d0,
            zeta_d: 0.0,
            gamma: -f.b_d.dot(&d0) / (xi * xi),
            f_d,
            tangential_drive_norm: g,
            frozen: true,
            slip: false,
        });
    }

    let n0 = (1.0 / d0.norm()) * d0;
    let loading = match hold {
        Hold::Strain => 2.0 * params.mu * state.eps.dev(),
        Hold::Stress(sig) => sig.dev(),
    };
    let w = chi * loading - params.h_d(state.theta);
    let wn = w.dot(&n0);
    let g0 = w - wn * n0;
    let g0_norm = g0.norm();
    let tol = options.tol_kkt * (1.0 + w.norm());

    let d_new = if g0_norm <= chi + tol {
        d0
    } else {
        let t = (1.0 / g0_norm) * g0;
        let phi0 = g0_norm.atan2(wn);
        let psi = (chi / w.norm()).min(1.0).asin();
        let alpha = phi0 - psi;
        let d = (xi * alpha.cos()) * n0 + (xi * alpha.sin()) * t;
        d.with_norm(xi).unwrap_or(d)
    };

    let end = hold.state(
        params,
        ThermoState {
            d_tr: d_new,
            ..*state
        },
    );
    let f = forces_smooth(params, &end);
    let (f_d, g) = yield_fd(&f.b_d, &d_new, chi, xi);
    let slip = d_new != d0;
    if slip && f_d.abs() > 1e-9 * (1.0 + w.norm()) {
        return Err(Error::solver(
            "reorientation",
            "tangential drive does not meet the threshold after slip",
            f_d.abs(),
        ));
    }
    Ok(ReorientSolution {
        d_tr: d_new,
        zeta_d: (d_new - d0).norm(),
        gamma: -f.b_d.dot(&d_new) / (xi * xi),
        f_d,
        tangential_drive_norm: g,
        frozen: false,
        slip,
    })
}
