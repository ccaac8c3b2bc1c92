//! One control increment at a material point.
//!
//! Strain-driven increments alternate the phase solve (orientation frozen)
//! and the orientation update (fractions frozen) until the orientation used
//! by the phase solve is the one that comes out. Stress control wraps this in
//! a damped Newton iteration on the strain. An adiabatic temperature update
//! wraps either in a fixed point on θ.

pub mod phases;
pub mod projection;
pub mod reorient;

use serde::{Deserialize, Serialize};

pub use phases::{step_phases, PhaseProblem, PhaseSolution};
pub use projection::project_k;
use reorient::reorient;
pub use reorient::{step_reorientation, ReorientSolution};

use crate::energy::{forces_smooth, free_energy_smooth, mean_stress, stress, Forces, ThermoState};
use crate::error::{Error, Issue, Result};
use crate::kinetics::{dissipation_with, YieldReport};
use crate::material::{d_eval, MaterialParams};
use crate::tensors::{DevTensor3, SymTensor3};

/// Solver tolerances and iteration limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    /// Fixed-point tolerance of the orientation sweeps and the temperature.
    pub tol_kkt: f64,
    /// Below this χ_S the orientation is frozen.
    pub tol_chi_freeze: f64,
    /// Sweeps of the alternating solve and temperature iterations.
    pub max_outer: usize,
    /// Bisection cap of the root finders.
    pub max_bisect: usize,
    /// Most substeps a failing increment is split into.
    pub substep_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_kkt: 1e-10,
            tol_chi_freeze: 1e-8,
            max_outer: 50,
            max_bisect: 200,
            substep_limit: 16,
        }
    }
}

impl SolverOptions {
    pub(crate) fn validate_at(&self, prefix: &str) -> Vec<Issue> {
        let mut issues = Vec::new();
        for (key, v) in [
            ("tol_kkt", self.tol_kkt),
            ("tol_chi_freeze", self.tol_chi_freeze),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                issues.push(Issue::new(format!("{prefix}{key}"), "must be positive"));
            }
        }
        for (key, v) in [
            ("max_outer", self.max_outer),
            ("max_bisect", self.max_bisect),
            ("substep_limit", self.substep_limit),
        ] {
            if v == 0 {
                issues.push(Issue::new(format!("{prefix}{key}"), "must be at least 1"));
            }
        }
        issues
    }
}

/// What the mechanics holds fixed while the internal variables move.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Hold {
    Strain,
    /// The strain follows the internal variables:
    /// `ε = C⁻¹ : σ + χ_S d_tr` with the elastic compliance `C⁻¹`.
    Stress(SymTensor3),
}

impl Hold {
    /// `state` with its strain made consistent with the hold.
    pub fn state(&self, params: &MaterialParams, state: ThermoState) -> ThermoState {
        match self {
            Hold::Strain => state,
            Hold::Stress(sig) => ThermoState {
                eps: compliance(params, sig) + (state.chi_s * state.d_tr).into_sym(),
                ..state
            },
        }
    }
}

/// Mechanical target of an increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ControlMode {
    Strain(SymTensor3),
    Stress(SymTensor3),
    /// `ε = amplitude · direction` with a unit deviator.
    Proportional {
        direction: DevTensor3,
        amplitude: f64,
    },
}

/// Temperature handling of an increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ThermalControl {
    Prescribed(f64),
    /// Lumped energy balance
    /// `c_s Δθ = D + θ (Δh' · Δχ) − k_ex (θ − θ_env) Δt`,
    /// the latent term only when `latent_heat` is set.
    Adiabatic {
        k_ex: f64,
        theta_env: f64,
        dt: f64,
        latent_heat: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Controls {
    pub mode: ControlMode,
    pub thermal: ThermalControl,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Multipliers {
    pub zeta_m: f64,
    pub zeta_s: f64,
    pub zeta_d: f64,
    pub gamma_m: f64,
    pub gamma_s: f64,
    /// Reaction of the orientation norm constraint.
    pub gamma_d: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StepFlags {
    pub slip_m: bool,
    pub slip_s: bool,
    pub slip_d: bool,
    pub d_tr_frozen: bool,
    /// Detwinned martensite appeared and the orientation was set.
    pub nucleated: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Iterations {
    pub sweeps: usize,
    pub thermal: usize,
    pub substeps: usize,
}

/// Outcome of one increment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepResult {
    pub state: ThermoState,
    pub sigma: SymTensor3,
    /// Smooth forces at the end of the step.
    pub forces: Forces,
    pub multipliers: Multipliers,
    pub yields: YieldReport,
    /// Dissipation increment with coefficients frozen at the start.
    pub dissipation: f64,
    pub psi: f64,
    pub iterations: Iterations,
    pub flags: StepFlags,
}

impl StepResult {
    /// Complementarity conditions `ζ ≥ 0, F ≤ 0, ζ F = 0` that fail.
    ///
    /// The orientation is skipped while frozen.
    pub fn kkt_violations(&self) -> Vec<String> {
        let m = &self.multipliers;
        let y = &self.yields;
        let mut out = Vec::new();
        let mut pairs = vec![("M", m.zeta_m, y.f_m), ("S", m.zeta_s, y.f_s)];
        if !self.flags.d_tr_frozen {
            pairs.push(("d", m.zeta_d, y.f_d));
        }
        for (name, z, f) in pairs {
            if z < -1e-10 {
                out.push(format!("zeta_{name} = {z:e} is negative"));
            }
            if f > 1e-8 {
                out.push(format!("F_{name} = {f:e} is positive"));
            }
            if (z * f).abs() > 1e-8 {
                out.push(format!("zeta_{name} F_{name} = {:e}", z * f));
            }
        }
        out
    }

    /// Feasibility of the end state within `tol`.
    pub fn is_feasible(&self, params: &MaterialParams, tol: f64) -> bool {
        let s = &self.state;
        crate::energy::in_triangle(s.chi_m, s.chi_s, tol)
            && (self.flags.d_tr_frozen || (s.d_tr.norm() - params.xi_s).abs() <= tol)
    }
}

struct Inner {
    state: ThermoState,
    phase: PhaseSolution,
    orient: ReorientSolution,
    sweeps: usize,
    nucleated: bool,
}

/// Orientation for newly nucleated detwinned martensite: along the trial
/// deviatoric stress, else the deviatoric strain, else unchanged.
fn nucleation_direction(params: &MaterialParams, trial: &ThermoState) -> DevTensor3 {
    stress(params, trial)
        .dev()
        .with_norm(params.xi_s)
        .or_else(|| trial.eps.dev().with_norm(params.xi_s))
        .unwrap_or(trial.d_tr)
}

/// Internal-variable solve at prescribed `theta` and either `eps` or the
/// held stress.
fn solve_internal(
    params: &MaterialParams,
    start: &ThermoState,
    eps: SymTensor3,
    hold: Hold,
    theta: f64,
    opts: &SolverOptions,
) -> Result<Inner> {
    let trial = hold.state(
        params,
        ThermoState {
            eps,
            theta,
            ..*start
        },
    );
    trial.check_feasible(params)?;
    let d_coef = d_eval(params, start.chi_s, mean_stress(params, &start.eps))?;
    let dormant = start.chi_s <= opts.tol_chi_freeze;
    let d_ref = if dormant {
        nucleation_direction(params, &trial)
    } else {
        start.d_tr
    };
    let mut d_phase = d_ref;
    let mut last_change = f64::INFINITY;
    for sweep in 1..=opts.max_outer {
        let problem = PhaseProblem {
            params,
            state: ThermoState {
                d_tr: d_phase,
                ..trial
            },
            d: d_coef,
            hold,
        };
        let phase = problem.solve()?;
        let frozen = phase.chi_s <= opts.tol_chi_freeze;
        let cur = ThermoState {
            chi_m: phase.chi_m,
            chi_s: phase.chi_s,
            d_tr: if frozen { start.d_tr } else { d_ref },
            ..trial
        };
        let orient = reorient(params, &cur, hold, opts)?;
        last_change = (orient.d_tr - d_phase).norm() / params.xi_s;
        if last_change <= opts.tol_kkt {
            return Ok(Inner {
                state: hold.state(
                    params,
                    ThermoState {
                        d_tr: orient.d_tr,
                        ..cur
                    },
                ),
                phase,
                orient,
                sweeps: sweep,
                nucleated: dormant && !frozen,
            });
        }
        d_phase = orient.d_tr;
    }
    Err(Error::solver(
        "alternating phase/orientation sweeps",
        format!("no fixed point after {} sweeps", opts.max_outer),
        last_change,
    ))
}

/// Elastic compliance applied to a stress.
fn compliance(params: &MaterialParams, sigma: &SymTensor3) -> SymTensor3 {
    let vol = sigma.trace() / (3.0 * params.bulk());
    (vol / 3.0) * SymTensor3::identity() + ((0.5 / params.mu) * sigma.dev()).into_sym()
}

fn mechanical(
    params: &MaterialParams,
    start: &ThermoState,
    mode: &ControlMode,
    theta: f64,
    opts: &SolverOptions,
) -> Result<Inner> {
    let (eps, hold) = match mode {
        ControlMode::Strain(eps) => (*eps, Hold::Strain),
        ControlMode::Proportional {
            direction,
            amplitude,
        } => ((*amplitude * *direction).into_sym(), Hold::Strain),
        ControlMode::Stress(sig) => (start.eps, Hold::Stress(*sig)),
    };
    solve_internal(params, start, eps, hold, theta, opts)
}

/// Latent heat released over the increment, `θ Σ (h'_X − h'_A) Δχ_X + θ h'_d : Δd`.
fn latent_heat(params: &MaterialParams, start: &ThermoState, end: &ThermoState) -> f64 {
    let p = params;
    start.theta
        * ((p.beta_m - p.beta_a) * (end.chi_m - start.chi_m)
            + (p.beta_s - p.beta_a) * (end.chi_s - start.chi_s)
            + p.h_d_slope().dot(&(end.d_tr - start.d_tr)))
}

fn assemble(
    params: &MaterialParams,
    start: &ThermoState,
    inner: &Inner,
    iterations: Iterations,
) -> Result<StepResult> {
    let state = inner.state;
    let d_coef = d_eval(params, start.chi_s, mean_stress(params, &start.eps))?;
    let ph = &inner.phase;
    let or = &inner.orient;
    Ok(StepResult {
        state,
        sigma: stress(params, &state),
        forces: forces_smooth(params, &state),
        multipliers: Multipliers {
            zeta_m: ph.zeta_m,
            zeta_s: ph.zeta_s,
            zeta_d: or.zeta_d,
            gamma_m: ph.gamma_m,
            gamma_s: ph.gamma_s,
            gamma_d: or.gamma,
        },
        yields: YieldReport {
            f_m: ph.f_m,
            f_s: ph.f_s,
            f_d: or.f_d,
            r: ph.r,
            tangential_drive_norm: or.tangential_drive_norm,
        },
        dissipation: dissipation_with(d_coef, start, &state),
        psi: free_energy_smooth(params, &state),
        iterations,
        flags: StepFlags {
            slip_m: ph.zeta_m > 0.0,
            slip_s: ph.zeta_s > 0.0,
            slip_d: or.slip,
            d_tr_frozen: or.frozen,
            nucleated: inner.nucleated,
        },
    })
}

fn step_once(
    params: &MaterialParams,
    state: &ThermoState,
    controls: &Controls,
    opts: &SolverOptions,
) -> Result<StepResult> {
    match controls.thermal {
        ThermalControl::Prescribed(theta) => {
            if !(theta > 0.0) {
                return Err(Error::Domain(format!(
                    "prescribed temperature must be positive, got {theta}"
                )));
            }
            let inner = mechanical(params, state, &controls.mode, theta, opts)?;
            let it = Iterations {
                sweeps: inner.sweeps,
                thermal: 0,
                substeps: 1,
            };
            assemble(params, state, &inner, it)
        }
        ThermalControl::Adiabatic {
            k_ex,
            theta_env,
            dt,
            latent_heat: latent,
        } => {
            let exchange = k_ex * (state.theta - theta_env) * dt;
            let mut theta = state.theta;
            let mut gap = f64::INFINITY;
            for k in 1..=opts.max_outer {
                let mut inner = mechanical(params, state, &controls.mode, theta, opts)?;
                let d_coef = d_eval(params, state.chi_s, mean_stress(params, &state.eps))?;
                let mut heat = dissipation_with(d_coef, state, &inner.state) - exchange;
                if latent {
                    heat += latent_heat(params, state, &inner.state);
                }
                let next = state.theta + heat / params.c_s;
                gap = (next - theta).abs();
                if gap <= opts.tol_kkt * (1.0 + theta.abs()) {
                    // keeps the energy balance exact; the mechanics moved
                    // by at most the tolerance
                    inner.state.theta = next;
                    let it = Iterations {
                        sweeps: inner.sweeps,
                        thermal: k,
                        substeps: 1,
                    };
                    return assemble(params, state, &inner, it);
                }
                if !(next > 0.0) {
                    return Err(Error::Domain(format!(
                        "adiabatic update drives the temperature to {next}"
                    )));
                }
                theta = next;
            }
            Err(Error::solver(
                "adiabatic temperature",
                format!("no fixed point after {} iterations", opts.max_outer),
                gap,
            ))
        }
    }
}

/// The control values at the start of a step, in the form `controls` uses.
fn current_controls(params: &MaterialParams, state: &ThermoState, controls: &Controls) -> Controls {
    let mode = match controls.mode {
        ControlMode::Strain(_) => ControlMode::Strain(state.eps),
        ControlMode::Stress(_) => ControlMode::Stress(stress(params, state)),
        ControlMode::Proportional { direction, .. } => ControlMode::Proportional {
            direction,
            amplitude: state.eps.dev().dot(&direction),
        },
    };
    let thermal = match controls.thermal {
        ThermalControl::Prescribed(_) => ThermalControl::Prescribed(state.theta),
        t => t,
    };
    Controls { mode, thermal }
}

/// Exact at both ends and constant when `a == b`.
fn lerp(a: f64, b: f64, s: f64) -> f64 {
    if s >= 1.0 {
        b
    } else {
        a + s * (b - a)
    }
}

fn lerp_t(a: &SymTensor3, b: &SymTensor3, s: f64) -> SymTensor3 {
    SymTensor3::from(std::array::from_fn(|i| lerp(a.get(i), b.get(i), s)))
}

/// Controls a fraction `s` of the way from `from` to `to`.
fn interpolate(from: &Controls, to: &Controls, s: f64, parts: usize) -> Controls {
    let mode = match (from.mode, to.mode) {
        (ControlMode::Strain(a), ControlMode::Strain(b)) => ControlMode::Strain(lerp_t(&a, &b, s)),
        (ControlMode::Stress(a), ControlMode::Stress(b)) => ControlMode::Stress(lerp_t(&a, &b, s)),
        (
            ControlMode::Proportional { amplitude: a, .. },
            ControlMode::Proportional {
                direction,
                amplitude: b,
            },
        ) => ControlMode::Proportional {
            direction,
            amplitude: lerp(a, b, s),
        },
        (_, m) => m,
    };
    let thermal = match (from.thermal, to.thermal) {
        (ThermalControl::Prescribed(a), ThermalControl::Prescribed(b)) => {
            ThermalControl::Prescribed(lerp(a, b, s))
        }
        (
            _,
            ThermalControl::Adiabatic {
                k_ex,
                theta_env,
                dt,
                latent_heat,
            },
        ) => ThermalControl::Adiabatic {
            k_ex,
            theta_env,
            dt: dt / parts as f64,
            latent_heat,
        },
        (_, t) => t,
    };
    Controls { mode, thermal }
}

/// Advances `state` by one increment to `controls`.
///
/// A solver failure triggers a retry with the increment split into 2, 4, …
/// substeps, up to `substep_limit`. The returned multipliers and yield values
/// are those of the last substep; the dissipation is the sum.
pub fn step(
    params: &MaterialParams,
    state: &ThermoState,
    controls: &Controls,
    options: &SolverOptions,
) -> Result<StepResult> {
    state.check_feasible(params)?;
    let first = step_once(params, state, controls, options);
    let Err(Error::Solver { .. }) = first else {
        return first;
    };
    let from = current_controls(params, state, controls);
    let mut parts = 2;
    let mut last = first;
    while parts <= options.substep_limit {
        last = (|| {
            let mut cur = *state;
            let mut total = 0.0;
            let mut res = None;
            for k in 1..=parts {
                let c = interpolate(&from, controls, k as f64 / parts as f64, parts);
                let r = step_once(params, &cur, &c, options)?;
                total += r.dissipation;
                cur = r.state;
                res = Some(r);
            }
            let mut r = res.expect("at least two substeps");
            r.dissipation = total;
            r.iterations.substeps = parts;
            Ok(r)
        })();
        if last.is_ok() {
            return last;
        }
        parts *= 2;
    }
    last
}

/// Mechanical path of a segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SegmentPath {
    Strain {
        from: SymTensor3,
        to: SymTensor3,
    },
    Stress {
        from: SymTensor3,
        to: SymTensor3,
    },
    Proportional {
        direction: DevTensor3,
        from: f64,
        to: f64,
    },
}

/// Thermal path of a segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum ThermalPath {
    Ramp {
        from: f64,
        to: f64,
    },
    Adiabatic {
        k_ex: f64,
        theta_env: f64,
        latent_heat: bool,
    },
}

/// A linear control path sampled into `steps` equal increments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Segment {
    pub path: SegmentPath,
    pub thermal: ThermalPath,
    pub steps: usize,
}

impl Segment {
    /// Controls at the end of increment `k` (1-based).
    pub fn controls_at(&self, k: usize) -> Controls {
        let s = k as f64 / self.steps as f64;
        let mode = match self.path {
            SegmentPath::Strain { from, to } => ControlMode::Strain(lerp_t(&from, &to, s)),
            SegmentPath::Stress { from, to } => ControlMode::Stress(lerp_t(&from, &to, s)),
            SegmentPath::Proportional {
                direction,
                from,
                to,
            } => ControlMode::Proportional {
                direction,
                amplitude: lerp(from, to, s),
            },
        };
        let thermal = match self.thermal {
            ThermalPath::Ramp { from, to } => ThermalControl::Prescribed(lerp(from, to, s)),
            ThermalPath::Adiabatic {
                k_ex,
                theta_env,
                latent_heat,
            } => ThermalControl::Adiabatic {
                k_ex,
                theta_env,
                dt: 1.0 / self.steps as f64,
                latent_heat,
            },
        };
        Controls { mode, thermal }
    }
}

/// Applies every increment of `segment` in order.
///
/// Errors carry the 1-based step index; the segment index is left at 0 for
/// the caller to fill in.
pub fn run_segment(
    params: &MaterialParams,
    state: &ThermoState,
    segment: &Segment,
    options: &SolverOptions,
) -> Result<Vec<StepResult>> {
    if segment.steps == 0 {
        return Err(Error::Domain("a segment needs at least one step".into()));
    }
    let mut out = Vec::with_capacity(segment.steps);
    let mut cur = *state;
    for k in 1..=segment.steps {
        let r =
            step(params, &cur, &segment.controls_at(k), options).map_err(|e| Error::AtStep {
                segment: 0,
                step: k,
                source: Box::new(e),
            })?;
        cur = r.state;
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strain(eps: SymTensor3, theta: f64) -> Controls {
        Controls {
            mode: ControlMode::Strain(eps),
            thermal: ThermalControl::Prescribed(theta),
        }
    }

    #[test]
    fn zero_increment_changes_nothing() {
        let p = MaterialParams::demo();
        let s = ThermoState::austenite(&p, 300.0);
        let r = step(&p, &s, &strain(s.eps, s.theta), &SolverOptions::default()).unwrap();
        assert_eq!(r.state, s);
        assert_eq!(r.dissipation, 0.0);
        assert!(r.kkt_violations().is_empty());
    }

    #[test]
    fn constant_controls_stay_elastic() {
        let p = MaterialParams::demo();
        let s = ThermoState::austenite(&p, 300.0);
        let eps = 0.001 * DevTensor3::uniaxial().into_sym();
        let seg = Segment {
            path: SegmentPath::Strain { from: eps, to: eps },
            thermal: ThermalPath::Ramp {
                from: 300.0,
                to: 300.0,
            },
            steps: 10,
        };
        let out = run_segment(&p, &s, &seg, &SolverOptions::default()).unwrap();
        assert_eq!(out.len(), 10);
        assert!(out
            .iter()
            .all(|r| r.state == out[0].state && r.dissipation == 0.0));
    }

    #[test]
    fn stress_control_recovers_elastic_strain() {
        let p = MaterialParams::demo();
        let s = ThermoState::austenite(&p, 300.0);
        let target = SymTensor3::new(10.0, -5.0, 2.0, 3.0, 0.0, -1.0);
        let c = Controls {
            mode: ControlMode::Stress(target),
            thermal: ThermalControl::Prescribed(300.0),
        };
        let r = step(&p, &s, &c, &SolverOptions::default()).unwrap();
        assert!((r.sigma - target).norm() < 1e-8);
        assert_eq!(r.state.chi_s, 0.0);
    }

    #[test]
    fn adiabatic_forward_transformation_heats() {
        let mut p = MaterialParams::demo();
        p.h_s = 20.0;
        let s = ThermoState::austenite(&p, 300.0);
        let c = Controls {
            mode: ControlMode::Proportional {
                direction: DevTensor3::uniaxial(),
                amplitude: 0.01,
            },
            thermal: ThermalControl::Adiabatic {
                k_ex: 0.0,
                theta_env: 300.0,
                dt: 1.0,
                latent_heat: false,
            },
        };
        let r = step(&p, &s, &c, &SolverOptions::default()).unwrap();
        assert!(r.state.chi_s > 0.0);
        let expected = 300.0 + r.dissipation / p.c_s;
        assert!((r.state.theta - expected).abs() < 1e-6, "{}", r.state.theta);
        assert!(r.kkt_violations().is_empty(), "{:?}", r.kkt_violations());
    }
}
