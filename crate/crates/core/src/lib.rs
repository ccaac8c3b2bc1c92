//! Material-point engine for a three-phase shape-memory-alloy model with
//! austenite, twinned martensite and detwinned (oriented) martensite.
//!
//! The state is `(ε, θ, χ_M, χ_S, d_tr)`. Phase fractions live in the triangle
//! `K = {χ_M, χ_S ≥ 0, χ_M + χ_S ≤ 1}` and the orientation on the sphere
//! `‖d_tr‖ = ξ_s`. Each load increment is solved as an incremental
//! minimisation of free energy plus dissipation distance.
//!
//! ```
//! use sma_core::driver::{builtin_case2, run_program};
//! use sma_core::{MaterialParams, SolverOptions};
//!
//! let params = MaterialParams::demo();
//! let traj = run_program(&params, &builtin_case2(&params), &SolverOptions::default()).unwrap();
//! let peak = traj.records.iter().map(|r| r.result.state.chi_s).fold(0.0, f64::max);
//! assert!((peak - 1.0).abs() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod check;
pub mod driver;
pub mod energy;
pub mod error;
pub mod integrator;
pub mod kinetics;
pub mod material;
pub mod oracle;
pub mod parallel;
pub mod poly;
pub mod tensors;

pub use energy::{Forces, ThermoState};
pub use error::{Error, Issue, Result};
pub use integrator::{ControlMode, Controls, SolverOptions, StepResult, ThermalControl};
pub use material::{MaterialParams, Phase};
pub use parallel::Exec;
pub use tensors::{DevTensor3, SymTensor3};
