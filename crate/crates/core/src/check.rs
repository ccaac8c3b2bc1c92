//! Seeded verification suite behind the `check` command: finite-difference
//! forces and stress, solver against the grid oracle, closed-form projection
//! against the enumerating one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::energy::{forces_smooth, stress, ThermoState};
use crate::integrator::{project_k, step_phases, SolverOptions};
use crate::material::MaterialParams;
use crate::oracle::{fd_forces, fd_stress, oracle_phases_grid, oracle_project};
use crate::parallel::Exec;
use crate::tensors::{DevTensor3, SymTensor3};

/// Random draws for property tests and the check suite.
pub mod sampling {
    use super::*;

    fn random_dev(rng: &mut ChaCha8Rng) -> DevTensor3 {
        loop {
            let c: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            if let Some(u) = SymTensor3::from(c).dev().unit() {
                return u;
            }
        }
    }

    /// Parameters with moderate heat capacity so that finite differences of Ψ
    /// stay well above round-off.
    pub fn params(rng: &mut ChaCha8Rng) -> MaterialParams {
        let mut p = MaterialParams::demo();
        p.lambda = rng.gen_range(5e3..2e4);
        p.mu = rng.gen_range(5e3..2e4);
        p.c_s = rng.gen_range(0.1..1.0);
        p.xi_s = rng.gen_range(0.03..0.08);
        p.theta_0 = rng.gen_range(280.0..310.0);
        p.beta_a = rng.gen_range(0.0..0.2);
        p.beta_m = rng.gen_range(0.0..0.2);
        p.beta_s = rng.gen_range(0.0..0.2);
        p.theta_a_ref = rng.gen_range(250.0..320.0);
        p.theta_m_ref = rng.gen_range(250.0..320.0);
        p.theta_s_ref = rng.gen_range(250.0..320.0);
        p.h_d_tensor = (rng.gen_range(0.0..0.01) * random_dev(rng)).into_sym();
        p.c_ms = rng.gen_range(0.0..0.3);
        p.c_am = rng.gen_range(0.0..0.3);
        p.c_as = rng.gen_range(0.0..0.3);
        p.c_ams = rng.gen_range(0.0..0.3);
        p.h_m = rng.gen_range(2.0..6.0);
        p.h_s = rng.gen_range(2.0..6.0);
        p.d0 = rng.gen_range(0.0..1.0);
        p.d1 = rng.gen_range(0.0..0.5);
        p.d2 = rng.gen_range(0.0..0.5);
        p.k_d = rng.gen_range(0.0..0.05);
        p
    }

    /// A feasible state with fractions at least `margin` inside `K`.
    pub fn state(rng: &mut ChaCha8Rng, params: &MaterialParams, margin: f64) -> ThermoState {
        let (a, b) = loop {
            let a = rng.gen_range(margin..1.0 - 2.0 * margin);
            let b = rng.gen_range(margin..1.0 - 2.0 * margin);
            if a + b <= 1.0 - margin {
                break (a, b);
            }
        };
        let vol = rng.gen_range(-1e-3..1e-3);
        let dev = rng.gen_range(0.0..0.06) * random_dev(rng);
        ThermoState {
            eps: (vol / 3.0) * SymTensor3::identity() + dev.into_sym(),
            theta: rng.gen_range(260.0..320.0),
            chi_m: a,
            chi_s: b,
            d_tr: params.xi_s * random_dev(rng),
        }
    }
}

/// One suite of the check command.
#[derive(Clone, Debug, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub samples: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub items: Vec<CheckItem>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }
}

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random states for the gradient suite and configurations for the grid suite.
    pub samples: usize,
    pub grid_resolution: f64,
    pub projection_points: usize,
    pub exec: Exec,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 20_240_611,
            samples: 200,
            grid_resolution: 1e-3,
            projection_points: 10_000,
            exec: Exec::Parallel,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Worst relative mismatch of forces and stress against finite differences.
pub fn gradient_suite(seed: u64, samples: usize, exec: Exec) -> CheckItem {
    let errs = exec.map_range(samples, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let p = sampling::params(&mut rng);
        let s = sampling::state(&mut rng, &p, 0.01);
        let an = forces_smooth(&p, &s);
        let n = (1.0 / s.d_tr.norm()) * s.d_tr;
        let tangential = an.b_d - an.b_d.dot(&n) * n;
        let Ok(fd) = fd_forces(&p, &s, 1e-6) else {
            return f64::INFINITY;
        };
        let sig = stress(&p, &s);
        let sig_fd = fd_stress(&p, &s, 1e-6);
        let mut worst = rel(fd.b_m, an.b_m).max(rel(fd.b_s, an.b_s));
        for i in 0..6 {
            worst = worst
                .max(rel(fd.b_d.as_sym().get(i), tangential.as_sym().get(i)))
                .max(rel(sig_fd.get(i), sig.get(i)));
        }
        worst
    });
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    CheckItem {
        name: "gradient consistency",
        samples,
        worst,
        tolerance: 1e-6,
        passed: worst <= 1e-6,
    }
}

/// Worst per-coordinate distance between the phase solver and the grid oracle.
pub fn oracle_suite(seed: u64, samples: usize, resolution: f64, exec: Exec) -> CheckItem {
    let opts = SolverOptions::default();
    let errs: Vec<f64> = (0..samples)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1_000_003 + k as u64));
            let p = sampling::params(&mut rng);
            let s = sampling::state(&mut rng, &p, 0.0);
            let Ok(sol) = step_phases(&p, &s, &opts) else {
                return f64::INFINITY;
            };
            let Ok((a, b)) = oracle_phases_grid(&p, &s, resolution, exec) else {
                return f64::INFINITY;
            };
            (sol.chi_m - a).abs().max((sol.chi_s - b).abs())
        })
        .collect();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    CheckItem {
        name: "phase solver vs grid oracle",
        samples,
        worst,
        tolerance: 2.0 * resolution,
        passed: worst <= 2.0 * resolution,
    }
}

/// Worst distance between the two projections onto `K`.
pub fn projection_suite(seed: u64, points: usize) -> CheckItem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(7));
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let a = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(-2.0..2.0);
        let p = project_k(a, b);
        let q = oracle_project(a, b);
        worst = worst.max((p.0 - q.0).abs()).max((p.1 - q.1).abs());
    }
    CheckItem {
        name: "projection onto K",
        samples: points,
        worst,
        tolerance: 1e-12,
        passed: worst <= 1e-12,
    }
}

pub fn run_check(cfg: &CheckConfig) -> CheckReport {
    CheckReport {
        seed: cfg.seed,
        items: vec![
            gradient_suite(cfg.seed, cfg.samples, cfg.exec),
            oracle_suite(cfg.seed, cfg.samples, cfg.grid_resolution, cfg.exec),
            projection_suite(cfg.seed, cfg.projection_points),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_check_passes() {
        let cfg = CheckConfig {
            samples: 8,
            grid_resolution: 1e-2,
            projection_points: 500,
            ..CheckConfig::default()
        };
        let report = run_check(&cfg);
        for item in &report.items {
            assert!(item.passed, "{item:?}");
        }
    }
}
