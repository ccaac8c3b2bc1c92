//! Loading programs, the two built-in scenarios, and trajectory output.

mod config;
mod output;

pub use config::{parse_config, Config, OutputSpec, PlotSpec};
pub use output::{column, emit_svg, to_csv_string, write_csv, CSV_COLUMNS, PLOT_COLUMNS};

use serde::{Deserialize, Serialize};

use crate::energy::{psi_int_partials, stress, ThermoState};
use crate::error::{Error, Issue, Result};
use crate::integrator::{
    run_segment, Segment, SegmentPath, SolverOptions, StepResult, ThermalPath,
};
use crate::material::MaterialParams;
use crate::parallel::Exec;
use crate::tensors::{DevTensor3, SymTensor3};

/// Starting point of a program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub theta: f64,
    #[serde(default)]
    pub eps: SymTensor3,
    #[serde(default, rename = "chi_M")]
    pub chi_m: f64,
    #[serde(default, rename = "chi_S")]
    pub chi_s: f64,
    /// Defaults to `ξ_s` times the unit uniaxial-tension deviator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_tr: Option<SymTensor3>,
}

impl InitialState {
    pub fn at(theta: f64) -> Self {
        InitialState {
            theta,
            eps: SymTensor3::zero(),
            chi_m: 0.0,
            chi_s: 0.0,
            d_tr: None,
        }
    }

    pub fn to_state(&self, params: &MaterialParams) -> Result<ThermoState> {
        let d_tr = match self.d_tr {
            None => params.xi_s * DevTensor3::uniaxial(),
            Some(d) => DevTensor3::try_new(d)
                .ok_or_else(|| Error::Infeasible("initial d_tr is not deviatoric".into()))?,
        };
        let s = ThermoState {
            eps: self.eps,
            theta: self.theta,
            chi_m: self.chi_m,
            chi_s: self.chi_s,
            d_tr,
        };
        s.check_feasible(params)?;
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    Strain,
    Stress,
    Proportional,
}

/// A tensor for strain and stress segments, a scalar amplitude for
/// proportional ones.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Target {
    Scalar(f64),
    Tensor(SymTensor3),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdiabaticSpec {
    #[serde(default)]
    pub k_ex: f64,
    /// Defaults to the temperature at the start of the segment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_env: Option<f64>,
    #[serde(default = "yes")]
    pub latent_heat: bool,
}

fn yes() -> bool {
    true
}

/// Exactly one of `to` (linear ramp) and `adiabatic`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adiabatic: Option<AdiabaticSpec>,
}

/// One leg of a program. It starts wherever the previous one ended and moves
/// linearly to `target`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub mode: ModeKind,
    pub target: Target,
    /// Deviator of proportional loading; normalised on use.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<SymTensor3>,
    pub steps: usize,
    /// Held constant when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
}

impl SegmentSpec {
    /// Resolves the path against the state the segment starts from.
    pub fn realise(&self, params: &MaterialParams, state: &ThermoState) -> Result<Segment> {
        let bad = |m: &str| Error::Config(vec![Issue::new("segment", m)]);
        let path = match (self.mode, self.target) {
            (ModeKind::Strain, Target::Tensor(to)) => SegmentPath::Strain {
                from: state.eps,
                to,
            },
            (ModeKind::Stress, Target::Tensor(to)) => SegmentPath::Stress {
                from: stress(params, state),
                to,
            },
            (ModeKind::Proportional, Target::Scalar(to)) => {
                let direction = self.direction.and_then(|d| d.dev().unit()).ok_or_else(|| {
                    bad("proportional loading needs a nonzero deviatoric direction")
                })?;
                SegmentPath::Proportional {
                    direction,
                    from: state.eps.dev().dot(&direction),
                    to,
                }
            }
            _ => return Err(bad("target does not match the mode")),
        };
        let thermal = match &self.theta {
            None => ThermalPath::Ramp {
                from: state.theta,
                to: state.theta,
            },
            Some(ThetaSpec {
                to: Some(to),
                adiabatic: None,
            }) => ThermalPath::Ramp {
                from: state.theta,
                to: *to,
            },
            Some(ThetaSpec {
                to: None,
                adiabatic: Some(a),
            }) => ThermalPath::Adiabatic {
                k_ex: a.k_ex,
                theta_env: a.theta_env.unwrap_or(state.theta),
                latent_heat: a.latent_heat,
            },
            Some(_) => return Err(bad("theta needs exactly one of `to` and `adiabatic`")),
        };
        Ok(Segment {
            path,
            thermal,
            steps: self.steps,
        })
    }

    fn validate_at(&self, prefix: &str, issues: &mut Vec<Issue>) {
        let mut push = |k: &str, m: &str| issues.push(Issue::new(format!("{prefix}{k}"), m));
        if self.steps == 0 {
            push("steps", "must be at least 1");
        }
        match (self.mode, self.target) {
            (ModeKind::Proportional, Target::Scalar(v)) if !v.is_finite() => {
                push("target", "must be finite")
            }
            (ModeKind::Proportional, Target::Scalar(_)) => {}
            (ModeKind::Proportional, Target::Tensor(_)) => {
                push("target", "proportional mode takes a scalar amplitude")
            }
            (_, Target::Scalar(_)) => push(
                "target",
                "strain and stress modes take a 6-component tensor",
            ),
            (_, Target::Tensor(t)) if !t.is_finite() => push("target", "must be finite"),
            _ => {}
        }
        match (self.mode, self.direction) {
            (ModeKind::Proportional, None) => push("direction", "required for proportional mode"),
            (ModeKind::Proportional, Some(d)) if d.dev().unit().is_none() => {
                push("direction", "must have a nonzero deviatoric part")
            }
            (ModeKind::Proportional, Some(_)) | (_, None) => {}
            (_, Some(_)) => push("direction", "only used by proportional mode"),
        }
        if let Some(t) = &self.theta {
            match (t.to, &t.adiabatic) {
                (Some(v), None) if !(v > 0.0 && v.is_finite()) => {
                    push("theta.to", "must be positive")
                }
                (Some(_), None) => {}
                (None, Some(a)) => {
                    if !(a.k_ex >= 0.0 && a.k_ex.is_finite()) {
                        push("theta.adiabatic.k_ex", "must be nonnegative");
                    }
                    if let Some(e) = a.theta_env {
                        if !(e > 0.0 && e.is_finite()) {
                            push("theta.adiabatic.theta_env", "must be positive");
                        }
                    }
                }
                _ => push("theta", "needs exactly one of `to` and `adiabatic`"),
            }
        }
    }
}

/// Initial state plus an ordered list of segments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingProgram {
    pub initial: InitialState,
    #[serde(default)]
    pub segments: Vec<SegmentSpec>,
}

impl LoadingProgram {
    pub(crate) fn validate_at(&self, params: &MaterialParams, prefix: &str) -> Vec<Issue> {
        let mut issues = Vec::new();
        if let Err(e) = self.initial.to_state(params) {
            issues.push(Issue::new(format!("{prefix}initial"), e.to_string()));
        }
        for (k, seg) in self.segments.iter().enumerate() {
            seg.validate_at(&format!("{prefix}segments[{k}]."), &mut issues);
        }
        issues
    }

    pub fn total_steps(&self) -> usize {
        self.segments.iter().map(|s| s.steps).sum()
    }
}

/// Cooling and reheating at zero stress across the whole twinned-martensite
/// hysteresis, 300 steps each way.
///
/// The range extends 10 K beyond the closed-form onset and completion
/// temperatures, rounded outward to whole kelvin. A material without a
/// temperature-dependent `h_M − h_A` gets 250–310 K.
pub fn builtin_case1(params: &MaterialParams) -> LoadingProgram {
    let (dm0, _) = psi_int_partials(params, 0.0, 0.0);
    let (dm1, _) = psi_int_partials(params, 1.0, 0.0);
    let temps: Option<Vec<f64>> = [-1.0 - dm0, -1.0 - dm1, 1.0 - dm0, 1.0 - dm1]
        .iter()
        .map(|&t| params.theta_where_dh_ma(t))
        .collect();
    let (lo, hi) = match temps {
        Some(t) => {
            let lo = t.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = t.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            ((lo - 10.0).floor().max(1.0), (hi + 10.0).ceil())
        }
        None => (250.0, 310.0),
    };
    let leg = |to: f64| SegmentSpec {
        mode: ModeKind::Stress,
        target: Target::Tensor(SymTensor3::zero()),
        direction: None,
        steps: 300,
        theta: Some(ThetaSpec {
            to: Some(to),
            adiabatic: None,
        }),
    };
    LoadingProgram {
        initial: InitialState::at(hi),
        segments: vec![leg(lo), leg(hi)],
    }
}

/// Proportional load and unload along uniaxial tension at `θ_0`, 300 steps
/// each way.
///
/// The peak amplitude is 25 % beyond forward completion, rounded up to a
/// multiple of 1e-3.
pub fn builtin_case2(params: &MaterialParams) -> LoadingProgram {
    let theta = params.theta_0;
    let (_, ds1) = psi_int_partials(params, 0.0, 1.0);
    let d = params.d_clamped(1.0, 0.0).max(params.d_clamped(0.0, 0.0));
    let x_complete = 1.0 + d + params.dh_sa(theta) + ds1;
    let a_complete = x_complete / (2.0 * params.mu * params.xi_s) + params.xi_s;
    let a_max = (1.25 * a_complete.max(params.xi_s) * 1e3).ceil() / 1e3;
    let n = DevTensor3::uniaxial().into_sym();
    let leg = |to: f64| SegmentSpec {
        mode: ModeKind::Proportional,
        target: Target::Scalar(to),
        direction: Some(n),
        steps: 300,
        theta: None,
    };
    LoadingProgram {
        initial: InitialState::at(theta),
        segments: vec![leg(a_max), leg(0.0)],
    }
}

/// One row of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Record {
    /// 1-based over the whole program.
    pub step: usize,
    /// 0-based segment index.
    pub segment: usize,
    /// Segment index plus the fraction of the segment completed.
    pub t: f64,
    pub result: StepResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub initial: Option<ThermoState>,
    pub records: Vec<Record>,
}

impl Trajectory {
    pub fn total_dissipation(&self) -> f64 {
        self.records.iter().map(|r| r.result.dissipation).sum()
    }

    pub fn states(&self) -> impl Iterator<Item = &ThermoState> {
        self.records.iter().map(|r| &r.result.state)
    }
}

/// Runs every segment in order from the program's initial state.
pub fn run_program(
    params: &MaterialParams,
    program: &LoadingProgram,
    options: &SolverOptions,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        initial: None,
        records: Vec::with_capacity(program.total_steps()),
    };
    if program.segments.is_empty() {
        return Ok(traj);
    }
    let mut state = program.initial.to_state(params)?;
    traj.initial = Some(state);
    let mut step = 0;
    for (k, spec) in program.segments.iter().enumerate() {
        let at = |e: Error| match e {
            Error::AtStep { step, source, .. } => Error::AtStep {
                segment: k,
                step,
                source,
            },
            e => Error::AtStep {
                segment: k,
                step: 0,
                source: Box::new(e),
            },
        };
        let seg = spec.realise(params, &state).map_err(at)?;
        let results = run_segment(params, &state, &seg, options).map_err(at)?;
        for (i, result) in results.into_iter().enumerate() {
            step += 1;
            traj.records.push(Record {
                step,
                segment: k,
                t: k as f64 + (i + 1) as f64 / seg.steps as f64,
                result,
            });
        }
        if let Some(last) = traj.records.last() {
            state = last.result.state;
        }
    }
    Ok(traj)
}

/// Runs independent programs, possibly concurrently; output order follows input.
pub fn run_many(
    params: &MaterialParams,
    programs: &[LoadingProgram],
    options: &SolverOptions,
    exec: Exec,
) -> Vec<Result<Trajectory>> {
    exec.map(programs, |p| run_program(params, p, options))
}
