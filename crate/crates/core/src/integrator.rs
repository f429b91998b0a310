//! Embedded Runge–Kutta–Fehlberg 4(5) integration with adaptive steps and
//! cubic-Hermite dense output, plus the four-body front end.

use crate::dynamics::{accelerations, PhaseState};
use crate::error::Error;
use crate::masses::MassModel;
use std::fmt::Write as _;

/// Tolerances and step bounds for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Retain every accepted step for dense output (on by default; turning
    /// it off keeps only the final state).
    pub dense: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            min_step: 1e-14,
            max_step: 0.25,
            dense: true,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "integrator tolerances must be positive".into(),
            ));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step) {
            return Err(Error::InvalidParameter(
                "integrator requires 0 < min_step < max_step".into(),
            ));
        }
        Ok(())
    }
}

/// Counters reported with every integration.
#[derive(Debug, Clone, Copy, Default)]
pub struct IntegrationStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub rhs_evaluations: usize,
    pub max_error_estimate: f64,
}

/// One accepted step: time, state, and state derivative (for Hermite
/// interpolation between nodes).
#[derive(Debug, Clone)]
pub struct StepPoint {
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

/// Dense solution of a generic first-order system.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub steps: Vec<StepPoint>,
    pub stats: IntegrationStats,
}

impl OdeSolution {
    pub fn start(&self) -> &StepPoint {
        self.steps.first().expect("solution has at least one point")
    }

    pub fn end(&self) -> &StepPoint {
        self.steps.last().expect("solution has at least one point")
    }

    /// Cubic Hermite interpolation at `t` (clamped to the solution span).
    pub fn sample(&self, t: f64) -> Vec<f64> {
        let steps = &self.steps;
        if steps.len() == 1 || t <= steps[0].t {
            return steps[0].y.clone();
        }
        if t >= steps[steps.len() - 1].t {
            return steps[steps.len() - 1].y.clone();
        }
        let idx = match steps.binary_search_by(|s| s.t.partial_cmp(&t).unwrap()) {
            Ok(i) => return steps[i].y.clone(),
            Err(i) => i - 1,
        };
        let (a, b) = (&steps[idx], &steps[idx + 1]);
        let h = b.t - a.t;
        let s = (t - a.t) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut y = vec![0.0; a.y.len()];
        for k in 0..y.len() {
            y[k] = h00 * a.y[k] + h10 * h * a.dy[k] + h01 * b.y[k] + h11 * h * b.dy[k];
        }
        y
    }
}

// Classical Fehlberg 4(5) tableau.
const C: [f64; 6] = [0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5];
const A: [[f64; 5]; 6] = [
    [0.0, 0.0, 0.0, 0.0, 0.0],
    [0.25, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0],
    [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0.0, 0.0],
    [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0],
    [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0],
];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -0.2,
    0.0,
];
const SAFETY: f64 = 0.9;

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t_end` (either direction).
/// The fifth-order solution propagates; the embedded difference controls
/// the step.
pub fn integrate_ode<F>(
    mut rhs: F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    settings: &IntegratorSettings,
) -> Result<OdeSolution, Error>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), Error>,
{
    settings.validate()?;
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut dy = vec![0.0; n];
    rhs(t, &y, &mut dy)?;
    stats.rhs_evaluations += 1;

    let mut steps = vec![StepPoint {
        t,
        y: y.clone(),
        dy: dy.clone(),
    }];
    let span = t_end - t0;
    if span == 0.0 {
        return Ok(OdeSolution { steps, stats });
    }
    let dir = span.signum();
    let mut h = (0.01 * span.abs()).min(settings.max_step).max(settings.min_step) * dir;

    let mut k = vec![vec![0.0; n]; 6];
    let mut y_stage = vec![0.0; n];
    let mut y5 = vec![0.0; n];

    while (t_end - t) * dir > 0.0 {
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < settings.min_step {
            return Err(Error::StepFailure { t, h });
        }

        k[0].copy_from_slice(&dy);
        for s in 1..6 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            rhs(t + C[s] * h, &y_stage, &mut k[s])?;
            stats.rhs_evaluations += 1;
        }

        let mut err_ratio: f64 = 0.0;
        for i in 0..n {
            let mut v5 = 0.0;
            let mut v4 = 0.0;
            for s in 0..6 {
                v5 += B5[s] * k[s][i];
                v4 += B4[s] * k[s][i];
            }
            y5[i] = y[i] + h * v5;
            let err = h * (v5 - v4);
            let scale = settings.abs_tol + settings.rel_tol * y[i].abs().max(y5[i].abs());
            err_ratio = err_ratio.max((err / scale).abs());
        }

        if err_ratio <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y5);
            rhs(t, &y, &mut dy)?;
            stats.rhs_evaluations += 1;
            stats.accepted_steps += 1;
            stats.max_error_estimate = stats.max_error_estimate.max(err_ratio);
            if settings.dense || (t_end - t) * dir <= 0.0 {
                steps.push(StepPoint {
                    t,
                    y: y.clone(),
                    dy: dy.clone(),
                });
            }
        } else {
            stats.rejected_steps += 1;
        }

        let factor = if err_ratio > 0.0 {
            (SAFETY * err_ratio.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h = (h * factor).clamp(-settings.max_step, settings.max_step);
        if h.abs() < settings.min_step {
            h = settings.min_step * dir;
        }
    }

    if !settings.dense && steps.len() == 1 {
        steps.push(StepPoint {
            t,
            y: y.clone(),
            dy: dy.clone(),
        });
    }
    Ok(OdeSolution { steps, stats })
}

/// A propagated four-body path with dense output.
#[derive(Debug, Clone)]
pub struct Trajectory {
    solution: OdeSolution,
    masses: MassModel,
}

impl Trajectory {
    /// Wrap a dense solution produced elsewhere (sampled closed-form
    /// motions use this).
    pub fn from_solution(solution: OdeSolution, masses: MassModel) -> Self {
        Self { solution, masses }
    }

    pub fn stats(&self) -> IntegrationStats {
        self.solution.stats
    }

    pub fn start_time(&self) -> f64 {
        self.solution.start().t
    }

    pub fn end_time(&self) -> f64 {
        self.solution.end().t
    }

    pub fn masses(&self) -> &MassModel {
        &self.masses
    }

    pub fn state_at(&self, t: f64) -> PhaseState {
        PhaseState::from_flat(&self.solution.sample(t), t)
    }

    pub fn end_state(&self) -> PhaseState {
        let end = self.solution.end();
        PhaseState::from_flat(&end.y, end.t)
    }

    pub fn states(&self) -> impl Iterator<Item = PhaseState> + '_ {
        self.solution
            .steps
            .iter()
            .map(|s| PhaseState::from_flat(&s.y, s.t))
    }

    /// CSV with header `t,q1x,...,q4y,v1x,...,v4y`, 17 significant digits,
    /// at `samples + 1` uniform times.
    pub fn to_csv(&self, samples: usize) -> String {
        let mut out = String::from(
            "t,q1x,q1y,q2x,q2y,q3x,q3y,q4x,q4y,v1x,v1y,v2x,v2y,v3x,v3y,v4x,v4y\n",
        );
        let (t0, t1) = (self.start_time(), self.end_time());
        let n = samples.max(1);
        for k in 0..=n {
            let t = t0 + (t1 - t0) * (k as f64) / (n as f64);
            let y = self.solution.sample(t);
            let _ = write!(out, "{t:.16e}");
            for v in y {
                let _ = write!(out, ",{v:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

/// RHS of Newton's equations in flat `(q, v)` layout.
pub fn four_body_rhs(masses: &MassModel) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<(), Error> + '_ {
    move |_t, y, dy| {
        let state = PhaseState::from_flat(y, 0.0);
        let acc = accelerations(&state.config, masses)?;
        for i in 0..4 {
            dy[2 * i] = y[8 + 2 * i];
            dy[2 * i + 1] = y[8 + 2 * i + 1];
            dy[8 + 2 * i] = acc[i].x;
            dy[8 + 2 * i + 1] = acc[i].y;
        }
        Ok(())
    }
}

/// Propagate a four-body state to `t_end`.
pub fn integrate(
    state0: &PhaseState,
    t_end: f64,
    masses: &MassModel,
    settings: &IntegratorSettings,
) -> Result<Trajectory, Error> {
    let y0 = state0.to_flat();
    let solution = integrate_ode(four_body_rhs(masses), state0.time, &y0, t_end, settings)?;
    Ok(Trajectory {
        solution,
        masses: *masses,
    })
}
