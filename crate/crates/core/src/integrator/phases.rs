//! Phase-fraction update with strain, temperature and orientation frozen.
//!
//! The incremental functional
//!
//! ```text
//! J(a, b) = Ψ(a, b) + |a − a0| + |b − b0| + d (b − b0)⁺
//! ```
//!
//! is a cubic polynomial on each of the four sign quadrants around
//! `(a0, b0)`. Its global minimum over `K` is found by enumeration: interior
//! critical points of each quadrant polynomial, critical points along the five
//! lines that bound the pieces (`a = 0`, `b = 0`, `a + b = 1`, `a = a0`,
//! `b = b0`), and their pairwise intersections.

use serde::Serialize;

use super::projection::project_k;
use crate::energy::{forces_smooth, mean_stress, ThermoState};
use crate::error::{Error, Result};
use crate::kinetics::threshold;
use crate::material::{d_eval, MaterialParams};
use crate::poly::Cubic2;

use super::{Hold, SolverOptions};

/// One phase subproblem.
#[derive(Clone, Copy, Debug)]
pub struct PhaseProblem<'a> {
    pub params: &'a MaterialParams,
    /// Supplies θ, d_tr and, under held strain, ε; its fractions are the
    /// start-of-step values.
    pub state: ThermoState,
    /// Kinetic asymmetry, frozen over the step.
    pub d: f64,
    pub hold: Hold,
}

/// Minimiser of the phase subproblem with its multipliers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct PhaseSolution {
    pub chi_m: f64,
    pub chi_s: f64,
    pub zeta_m: f64,
    pub zeta_s: f64,
    /// Reactions of the constraint set `K`.
    pub gamma_m: f64,
    pub gamma_s: f64,
    /// Smooth forces at the solution.
    pub b_m: f64,
    pub b_s: f64,
    pub f_m: f64,
    pub f_s: f64,
    /// Threshold applied to χ_S.
    pub r: f64,
    /// Infeasibility of the reconstructed stationarity conditions.
    pub kkt_residual: f64,
}

impl<'a> PhaseProblem<'a> {
    /// Problem at `state` with `d` evaluated at its χ_S and mean stress.
    pub fn at(params: &'a MaterialParams, state: ThermoState) -> Result<Self> {
        let d = d_eval(params, state.chi_s, mean_stress(params, &state.eps))?;
        Ok(PhaseProblem {
            params,
            state,
            d,
            hold: Hold::Strain,
        })
    }

    /// The energy being minimised as a polynomial in `(χ_M, χ_S)`, up to a
    /// constant: Ψ under held strain, the Gibbs energy `Ψ − σ:ε` under held
    /// stress.
    pub fn psi_poly(&self) -> Cubic2 {
        let p = self.params;
        let s = &self.state;
        let (drive, quad) = match self.hold {
            Hold::Strain => (
                2.0 * p.mu * s.eps.dev().dot(&s.d_tr),
                p.mu * s.d_tr.norm().powi(2),
            ),
            Hold::Stress(sig) => (sig.dev().dot(&s.d_tr), 0.0),
        };
        let mut q = Cubic2::default();
        let c = &mut q.c;
        c[1][0] = p.dh_ma(s.theta) + p.c_am;
        c[0][1] = p.dh_sa(s.theta) + p.c_as - drive;
        c[2][0] = -p.c_am + 0.5 * p.h_m;
        c[0][2] = quad - p.c_as + 0.5 * p.h_s;
        c[1][1] = p.c_ms - p.c_am - p.c_as + p.c_ams;
        c[2][1] = -p.c_ams;
        c[1][2] = -p.c_ams;
        q
    }

    fn dissipation(&self, a: f64, b: f64) -> f64 {
        let (da, db) = (a - self.state.chi_m, b - self.state.chi_s);
        da.abs() + db.abs() + self.d * db.max(0.0)
    }

    /// Incremental functional up to a constant.
    pub fn objective(&self, a: f64, b: f64) -> f64 {
        self.psi_poly().eval(a, b) + self.dissipation(a, b)
    }

    /// Global minimiser over `K` and its multipliers.
    pub fn solve(&self) -> Result<PhaseSolution> {
        let (a, b) = self.minimise();
        self.multipliers(a, b)
    }

    fn minimise(&self) -> (f64, f64) {
        let psi = self.psi_poly();
        let (a0, b0) = (self.state.chi_m, self.state.chi_s);
        let mut cands = vec![
            (a0, b0),
            (0.0, 0.0),
            (1.0, 0.0),
            (0.0, 1.0),
            (a0, 0.0),
            (a0, 1.0 - a0),
            (0.0, b0),
            (1.0 - b0, b0),
        ];
        // (point, direction, parameter length)
        let lines = [
            ((0.0, 0.0), (0.0, 1.0), 1.0),
            ((0.0, 0.0), (1.0, 0.0), 1.0),
            ((1.0, 0.0), (-1.0, 1.0), 1.0),
            ((a0, 0.0), (0.0, 1.0), 1.0 - a0),
            ((0.0, b0), (1.0, 0.0), 1.0 - b0),
        ];
        for sm in [-1.0, 1.0] {
            for ss in [-1.0, 1.0] {
                let mut q = psi;
                q.c[1][0] += sm;
                q.c[0][1] += ss * if ss > 0.0 { 1.0 + self.d } else { 1.0 };
                for &(p, u, len) in &lines {
                    let slope = q.restrict(p, u).derivative();
                    for t in slope.sign_change_roots(0.0, len) {
                        cands.push((p.0 + t * u.0, p.1 + t * u.1));
                    }
                }
                interior_critical_points(&q, &mut cands);
            }
        }

        let j = |(a, b): (f64, f64)| psi.eval(a, b) + self.dissipation(a, b);
        let cands: Vec<(f64, f64)> = cands
            .into_iter()
            .filter(|&(a, b)| a.is_finite() && b.is_finite())
            .filter(|&(a, b)| a >= -1e-12 && b >= -1e-12 && a + b <= 1.0 + 1e-12)
            .map(|(a, b)| project_k(a, b))
            .collect();
        let values: Vec<f64> = cands.iter().map(|&c| j(c)).collect();
        let best = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let tie = 1e-13 * (1.0 + psi.max_abs_coef());
        let dist = |&(a, b): &(f64, f64)| (a - a0).hypot(b - b0);
        cands
            .iter()
            .zip(&values)
            .filter(|(_, &v)| v <= best + tie)
            .map(|(c, _)| *c)
            .min_by(|x, y| {
                dist(x)
                    .total_cmp(&dist(y))
                    .then(x.0.total_cmp(&y.0))
                    .then(x.1.total_cmp(&y.1))
            })
            .unwrap_or((a0, b0))
    }

    /// Reconstructs reactions and yield values at a candidate `(a, b)`.
    pub fn multipliers(&self, a: f64, b: f64) -> Result<PhaseSolution> {
        const ZERO: f64 = 1e-13;
        const ACTIVE: f64 = 1e-12;
        let st = self.hold.state(
            self.params,
            ThermoState {
                chi_m: a,
                chi_s: b,
                ..self.state
            },
        );
        let f = forces_smooth(self.params, &st);
        let (dm, ds) = (a - self.state.chi_m, b - self.state.chi_s);
        let d = self.d;

        // admissible dissipative forces g = −(B + n)
        let gm = if dm > ZERO {
            (1.0, 1.0)
        } else if dm < -ZERO {
            (-1.0, -1.0)
        } else {
            (-1.0, 1.0)
        };
        let gs = if ds > ZERO {
            (1.0 + d, 1.0 + d)
        } else if ds < -ZERO {
            (-1.0, -1.0)
        } else {
            (-1.0, 1.0 + d)
        };
        let mut hp: Vec<([f64; 2], f64)> = vec![
            ([1.0, 0.0], -f.b_m - gm.0),
            ([-1.0, 0.0], f.b_m + gm.1),
            ([0.0, 1.0], -f.b_s - gs.0),
            ([0.0, -1.0], f.b_s + gs.1),
        ];
        let act_a = a <= ACTIVE;
        let act_b = b <= ACTIVE;
        let act_c = a + b >= 1.0 - ACTIVE;
        let cone: &[[f64; 2]] = match (act_a, act_b, act_c) {
            (false, false, false) => &[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            (true, false, false) => &[[1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
            (false, true, false) => &[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]],
            (false, false, true) => &[[1.0, -1.0], [-1.0, 1.0], [-1.0, 0.0]],
            (true, true, _) => &[[1.0, 0.0], [0.0, 1.0]],
            (true, false, true) => &[[0.0, -1.0], [1.0, -1.0]],
            (false, true, true) => &[[-1.0, 0.0], [-1.0, 1.0]],
        };
        hp.extend(cone.iter().map(|&w| (w, 0.0)));
        // among admissible reactions, take the one leaving the smallest
        // dissipative force: search over m = n + B
        for (w, c) in hp.iter_mut() {
            *c += w[0] * f.b_m + w[1] * f.b_s;
        }
        let scale = 1.0 + f.b_m.abs() + f.b_s.abs();
        let (m, violation) = min_norm_point(&hp, 1e-10 * scale);
        let n = [m[0] - f.b_m, m[1] - f.b_s];

        let g = (-(f.b_m + n[0]), -(f.b_s + n[1]));
        let r = threshold(g.1, d);
        let sol = PhaseSolution {
            chi_m: a,
            chi_s: b,
            zeta_m: dm.abs(),
            zeta_s: ds.abs(),
            gamma_m: n[0],
            gamma_s: n[1],
            b_m: f.b_m,
            b_s: f.b_s,
            f_m: g.0.abs() - 1.0,
            f_s: g.1.abs() - r,
            r,
            kkt_residual: violation,
        };
        if violation > 1e-7 * scale {
            return Err(Error::solver(
                "phases",
                format!("no multipliers satisfy stationarity at ({a}, {b})"),
                violation,
            ));
        }
        Ok(sol)
    }
}

/// Interior stationary points of `q`, which must have no `a³` term.
///
/// `∂q/∂a` is linear in `a`; eliminating `a` from `∂q/∂b` leaves a quartic in
/// `b`. Roots are polished with Newton on the full gradient.
fn interior_critical_points(q: &Cubic2, out: &mut Vec<(f64, f64)>) {
    debug_assert_eq!(q.c[3][0], 0.0);
    let ga = q.d_a();
    let gb = q.d_b();
    let [a0, a1, ..] = ga.in_a();
    let [b0, b1, b2, _] = gb.in_a();
    let res = b0
        .mul(&a1)
        .mul(&a1)
        .add(&b1.mul(&a0).mul(&a1).scale(-1.0))
        .add(&b2.mul(&a0).mul(&a0));
    let scale = 1e-12 * (1.0 + q.max_abs_coef());
    let (gaa, gab, gbb) = (ga.d_a(), ga.d_b(), gb.d_b());
    for b in res.sign_change_roots(0.0, 1.0) {
        let den = a1.eval(b);
        if den.abs() <= scale {
            continue;
        }
        let (mut x, mut y) = (-a0.eval(b) / den, b);
        for _ in 0..3 {
            let (h11, h12, h22) = (gaa.eval(x, y), gab.eval(x, y), gbb.eval(x, y));
            let det = h11 * h22 - h12 * h12;
            if det.abs() <= scale * scale {
                break;
            }
            let (r1, r2) = (ga.eval(x, y), gb.eval(x, y));
            x -= (h22 * r1 - h12 * r2) / det;
            y -= (h11 * r2 - h12 * r1) / det;
        }
        out.push((x, y));
    }
}

/// Point of least norm in `{n : w·n ≤ c}` in the plane, by active-set
/// enumeration. Returns the least-violating candidate when the set is empty
/// up to `tol`, together with its violation.
fn min_norm_point(hp: &[([f64; 2], f64)], tol: f64) -> ([f64; 2], f64) {
    let mut cands = vec![[0.0, 0.0]];
    for (i, &(w, c)) in hp.iter().enumerate() {
        let ww = w[0] * w[0] + w[1] * w[1];
        cands.push([c * w[0] / ww, c * w[1] / ww]);
        for &(v, e) in &hp[i + 1..] {
            let det = w[0] * v[1] - w[1] * v[0];
            if det.abs() > 1e-12 {
                cands.push([(c * v[1] - w[1] * e) / det, (w[0] * e - c * v[0]) / det]);
            }
        }
    }
    let violation = |n: &[f64; 2]| {
        hp.iter()
            .map(|(w, c)| (w[0] * n[0] + w[1] * n[1] - c) / w[0].hypot(w[1]))
            .fold(0.0, f64::max)
    };
    let norm = |n: &[f64; 2]| n[0].hypot(n[1]);
    let scored: Vec<([f64; 2], f64)> = cands.iter().map(|n| (*n, violation(n))).collect();
    scored
        .iter()
        .filter(|(_, v)| *v <= tol)
        .min_by(|x, y| norm(&x.0).total_cmp(&norm(&y.0)))
        .or_else(|| scored.iter().min_by(|x, y| x.1.total_cmp(&y.1)))
        .copied()
        .unwrap_or(([0.0, 0.0], f64::INFINITY))
}

/// Solves the phase subproblem at `state` (start-of-step fractions, frozen
/// ε, θ and d_tr).
pub fn step_phases(
    params: &MaterialParams,
    state: &ThermoState,
    _options: &SolverOptions,
) -> Result<PhaseSolution> {
    state.check_feasible(params)?;
    PhaseProblem::at(params, *state)?.solve()
}
