//! Yield functions, asymmetric threshold, and step dissipation.
//!
//! The yield functions take the *driving force* on χ_S, i.e. the force
//! oriented so that positive values push the detwinned fraction up. In terms
//! of the energetic force including reactions that is `−B_S`. Forward
//! transformation is resisted by `1 + d`, reverse transformation by `1`.

use serde::Serialize;

use crate::energy::ThermoState;
use crate::error::Result;
use crate::material::{d_eval, MaterialParams};
use crate::tensors::DevTensor3;

/// End-of-step yield values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct YieldReport {
    pub f_m: f64,
    pub f_s: f64,
    pub f_d: f64,
    /// Threshold that applied to χ_S (`1` or `1 + d`).
    pub r: f64,
    /// Norm of the tangential part of the orientation drive.
    pub tangential_drive_norm: f64,
}

/// Threshold for a given drive and precomputed `d`.
pub fn threshold(drive: f64, d: f64) -> f64 {
    if drive < 0.0 {
        1.0
    } else {
        1.0 + d
    }
}

/// `R = 1` for reverse drive, `1 + d(χ_S, σ_m)` for forward drive.
pub fn r_eval(params: &MaterialParams, drive: f64, chi_s: f64, sigma_m: f64) -> Result<f64> {
    Ok(threshold(drive, d_eval(params, chi_s, sigma_m)?))
}

/// `F_M = |B_M| − 1`.
pub fn yield_fm(b_m: f64) -> f64 {
    b_m.abs() - 1.0
}

/// `F_S = |drive| − R(drive)`.
pub fn yield_fs(params: &MaterialParams, drive: f64, chi_s: f64, sigma_m: f64) -> Result<f64> {
    Ok(drive.abs() - r_eval(params, drive, chi_s, sigma_m)?)
}

/// `F_S` with a precomputed `d`.
pub fn yield_fs_with(drive: f64, d: f64) -> f64 {
    drive.abs() - threshold(drive, d)
}

/// Tangential drive `G_t = −(B_d − (B_d : n) n)` with `n = d_tr / ξ_s`.
///
/// The normal component is absorbed by the norm constraint on `d_tr`.
pub fn tangential_drive(b_d: &DevTensor3, d_tr: &DevTensor3, xi_s: f64) -> DevTensor3 {
    let n = (1.0 / xi_s) * *d_tr;
    -(*b_d - b_d.dot(&n) * n)
}

/// `(F_d, ‖G_t‖)` with `F_d = ‖G_t‖ − χ_S`.
pub fn yield_fd(b_d: &DevTensor3, d_tr: &DevTensor3, chi_s: f64, xi_s: f64) -> (f64, f64) {
    let g = tangential_drive(b_d, d_tr, xi_s).norm();
    (g - chi_s, g)
}

/// Dissipation over one step with coefficients frozen at `old`:
/// `|Δχ_M| + |Δχ_S| + d(χ_S^old, σ_m)(Δχ_S)⁺ + χ_S^old ‖Δd‖`.
pub fn dissipation_increment(
    params: &MaterialParams,
    old: &ThermoState,
    new: &ThermoState,
    sigma_m: f64,
) -> Result<f64> {
    let d = d_eval(params, old.chi_s, sigma_m)?;
    Ok(dissipation_with(d, old, new))
}

/// [`dissipation_increment`] with a precomputed `d`.
pub fn dissipation_with(d: f64, old: &ThermoState, new: &ThermoState) -> f64 {
    let dm = new.chi_m - old.chi_m;
    let ds = new.chi_s - old.chi_s;
    dm.abs() + ds.abs() + d * ds.max(0.0) + old.chi_s * (new.d_tr - old.d_tr).norm()
}
