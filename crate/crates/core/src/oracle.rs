//! Brute-force reference implementations for verification only.
//!
//! Each oracle goes through the plain energy function rather than the
//! solver's polynomial or closed forms.

use crate::energy::{free_energy_smooth, in_triangle, mean_stress, Forces, ThermoState};
use crate::error::{Error, Result};
use crate::kinetics::dissipation_with;
use crate::material::{d_eval, MaterialParams};
use crate::parallel::Exec;
use crate::tensors::SymTensor3;

/// Grid minimiser of the incremental phase functional over `K`.
///
/// The grid spacing is `1/⌈1/resolution⌉`, so the hypotenuse lies on the
/// grid. Ties go to the point nearest the current fractions, then to the
/// lexicographically smallest.
pub fn oracle_phases_grid(
    params: &MaterialParams,
    state: &ThermoState,
    resolution: f64,
    exec: Exec,
) -> Result<(f64, f64)> {
    if !(resolution > 0.0 && resolution <= 0.1) {
        return Err(Error::Domain(format!(
            "grid resolution must lie in (0, 0.1], got {resolution}"
        )));
    }
    state.check_feasible(params)?;
    let n = (1.0 / resolution).ceil() as usize;
    let d = d_eval(params, state.chi_s, mean_stress(params, &state.eps))?;
    let j = |a: f64, b: f64| {
        let s = ThermoState {
            chi_m: a,
            chi_s: b,
            ..*state
        };
        free_energy_smooth(params, &s) + dissipation_with(d, state, &s)
    };
    let rows: Vec<Vec<f64>> = exec.map_range(n + 1, |i| {
        let a = i as f64 / n as f64;
        (0..=n - i).map(|k| j(a, k as f64 / n as f64)).collect()
    });
    let best = rows.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * (1.0 + best.abs());
    let (a0, b0) = (state.chi_m, state.chi_s);
    let mut pick: Option<(f64, usize, usize)> = None;
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v > best + tie {
                continue;
            }
            let dist = (i as f64 / n as f64 - a0).hypot(k as f64 / n as f64 - b0);
            if pick.is_none_or(|(pd, _, _)| dist < pd) {
                pick = Some((dist, i, k));
            }
        }
    }
    let (_, i, k) = pick.expect("grid is nonempty");
    Ok((i as f64 / n as f64, k as f64 / n as f64))
}

/// Central differences of Ψ in χ_M, χ_S and along the orientation sphere.
///
/// The returned `b_d` is the tangential part of the orientation force:
/// direction `k` perturbs `d_tr` along the tangential projection of the
/// `k`-th basis tensor and re-projects onto the sphere.
pub fn fd_forces(params: &MaterialParams, state: &ThermoState, h: f64) -> Result<Forces> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::Domain(format!(
            "step must lie in [1e-8, 1e-4], got {h}"
        )));
    }
    state.check_feasible(params)?;
    let fits = |h: f64| {
        let (a, b) = (state.chi_m, state.chi_s);
        in_triangle(a - h, b - h, 0.0) && a + b + h <= 1.0
    };
    let h = if fits(h) {
        h
    } else if fits(0.5 * h) {
        0.5 * h
    } else {
        return Err(Error::Infeasible(format!(
            "fractions ({}, {}) too close to the boundary of K for step {h}",
            state.chi_m, state.chi_s
        )));
    };
    let psi = |s: ThermoState| free_energy_smooth(params, &s);
    let central = |p: ThermoState, m: ThermoState| (psi(p) - psi(m)) / (2.0 * h);

    let b_m = central(
        ThermoState {
            chi_m: state.chi_m + h,
            ..*state
        },
        ThermoState {
            chi_m: state.chi_m - h,
            ..*state
        },
    );
    let b_s = central(
        ThermoState {
            chi_s: state.chi_s + h,
            ..*state
        },
        ThermoState {
            chi_s: state.chi_s - h,
            ..*state
        },
    );

    let xi = params.xi_s;
    let d = state.d_tr;
    let n = (1.0 / d.norm()) * d;
    let mut comps = [0.0; 6];
    for (k, c) in comps.iter_mut().enumerate() {
        let e = SymTensor3::basis(k).dev();
        let v = e - e.dot(&n) * n;
        let on_sphere = |s: f64| (d + s * v).with_norm(xi).expect("nonzero near the sphere");
        let dd = central(
            ThermoState {
                d_tr: on_sphere(h),
                ..*state
            },
            ThermoState {
                d_tr: on_sphere(-h),
                ..*state
            },
        );
        let weight = if k < 3 { 1.0 } else { 2.0 };
        *c = dd / weight;
    }
    Ok(Forces {
        b_m,
        b_s,
        b_d: SymTensor3::from(comps).dev(),
    })
}

/// Central differences of Ψ in each strain component; off-diagonal
/// derivatives are halved to give tensor components.
pub fn fd_stress(params: &MaterialParams, state: &ThermoState, h: f64) -> SymTensor3 {
    let mut out = [0.0; 6];
    for (k, c) in out.iter_mut().enumerate() {
        let e = SymTensor3::basis(k);
        let p = ThermoState {
            eps: state.eps + h * e,
            ..*state
        };
        let m = ThermoState {
            eps: state.eps - h * e,
            ..*state
        };
        let weight = if k < 3 { 1.0 } else { 2.0 };
        *c = (free_energy_smooth(params, &p) - free_energy_smooth(params, &m)) / (2.0 * h * weight);
    }
    SymTensor3::from(out)
}

/// Central difference of −Ψ in θ.
pub fn fd_entropy(params: &MaterialParams, state: &ThermoState, h: f64) -> f64 {
    let p = ThermoState {
        theta: state.theta + h,
        ..*state
    };
    let m = ThermoState {
        theta: state.theta - h,
        ..*state
    };
    -(free_energy_smooth(params, &p) - free_energy_smooth(params, &m)) / (2.0 * h)
}

/// Projection onto `K` by checking all seven candidate faces: the interior,
/// the three edges (foot of the perpendicular, if on the segment) and the
/// three vertices.
pub fn oracle_project(a: f64, b: f64) -> (f64, f64) {
    let mut cands: Vec<(f64, f64)> = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    if in_triangle(a, b, 0.0) {
        cands.push((a, b));
    }
    if (0.0..=1.0).contains(&b) {
        cands.push((0.0, b));
    }
    if (0.0..=1.0).contains(&a) {
        cands.push((a, 0.0));
    }
    let t = 0.5 * (1.0 + a - b);
    if (0.0..=1.0).contains(&t) {
        cands.push((t, 1.0 - t));
    }
    cands
        .into_iter()
        .min_by(|p, q| {
            let dp = (p.0 - a).hypot(p.1 - b);
            let dq = (q.0 - a).hypot(q.1 - b);
            dp.total_cmp(&dq)
        })
        .expect("vertices are always candidates")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensors::DevTensor3;

    #[test]
    fn project_examples() {
        assert_eq!(oracle_project(0.0, 0.0), (0.0, 0.0));
        assert_eq!(oracle_project(2.0, 2.0), (0.5, 0.5));
        let (a, b) = oracle_project(1.2, 0.3);
        assert!((a - 0.95).abs() < 1e-15 && (b - 0.05).abs() < 1e-15);
    }

    #[test]
    fn grid_elastic_step_stays_put() {
        let p = MaterialParams::demo();
        let s = ThermoState {
            chi_m: 0.3004,
            ..ThermoState::austenite(&p, 280.0)
        };
        let (a, b) = oracle_phases_grid(&p, &s, 0.01, Exec::Sequential).unwrap();
        assert_eq!((a, b), (0.3, 0.0));
    }

    #[test]
    fn grid_hardening_balance() {
        let mut p = MaterialParams::demo();
        (p.c_ms, p.h_m) = (0.0, 0.5);
        let s = ThermoState::austenite(&p, 267.5);
        let (a, b) = oracle_phases_grid(&p, &s, 0.01, Exec::Parallel).unwrap();
        assert!((a - 0.5).abs() <= 0.01 && b == 0.0);
    }

    #[test]
    fn fd_forces_zeroed_constants() {
        let mut p = MaterialParams::demo();
        (p.beta_m, p.beta_a, p.beta_s, p.c_ms) = (0.0, 0.0, 0.0, 0.0);
        let s = ThermoState {
            chi_m: 0.3,
            chi_s: 0.2,
            ..ThermoState::austenite(&p, 300.0)
        };
        let f = fd_forces(&p, &s, 1e-6).unwrap();
        assert!(f.b_m.abs() < 1e-6);
    }

    #[test]
    fn fd_forces_worked_elastic_example() {
        let mut p = MaterialParams::demo();
        (p.beta_m, p.beta_a, p.beta_s, p.c_ms) = (0.0, 0.0, 0.0, 0.0);
        p.c_s = 1e-3;
        let n = DevTensor3::uniaxial();
        let s = ThermoState {
            eps: 0.03 * n.into_sym(),
            chi_m: 0.1,
            chi_s: 0.2,
            d_tr: 0.05 * n,
            theta: 300.0,
        };
        let f = fd_forces(&p, &s, 1e-6).unwrap();
        assert!((f.b_s + 20.0).abs() < 20.0 * 1e-6, "{}", f.b_s);
    }

    #[test]
    fn fd_forces_rejects_boundary_states() {
        let p = MaterialParams::demo();
        let s = ThermoState::austenite(&p, 300.0);
        assert!(matches!(fd_forces(&p, &s, 1e-6), Err(Error::Infeasible(_))));
    }
}
