//! Time-gridded paths and the discretized action functional.
//!
//! Paths are piecewise linear on a uniform grid. The kinetic term of the
//! action is then exact for the interpolant; the potential term uses the
//! midpoint rule per segment, which is second-order accurate and keeps
//! quadrature points away from endpoint collisions.

use crate::boundary::{build_qend, build_qstart, rotate_row, BoundaryParams};
use crate::dynamics::{potential_energy, potential_gradient, Configuration};
use crate::error::Error;
use crate::masses::MassModel;
use crate::Vec2;

/// A discrete four-body path on `[0, T]` with `n + 1` nodes pinned to the
/// boundary templates at both ends.
#[derive(Debug, Clone)]
pub struct DiscretePath {
    pub t_horizon: f64,
    pub nodes: Vec<[Vec2; 4]>,
    pub params: BoundaryParams,
    pub theta: f64,
}

impl DiscretePath {
    /// Constant-velocity seed path between the boundary configurations.
    pub fn linear_seed(
        params: BoundaryParams,
        theta: f64,
        masses: &MassModel,
        segments: usize,
        t_horizon: f64,
    ) -> Result<Self, Error> {
        if segments < 2 {
            return Err(Error::InvalidParameter(
                "a discrete path needs at least 2 segments".into(),
            ));
        }
        let (a1, a2, a3) = params.start_triple();
        let (a4, a5, a6) = params.end_triple();
        let qs = build_qstart(a1, a2, a3, theta, masses);
        let qe = build_qend(a4, a5, a6, masses);
        let nodes = (0..=segments)
            .map(|k| {
                let s = k as f64 / segments as f64;
                let mut q = [Vec2::zeros(); 4];
                for i in 0..4 {
                    q[i] = (1.0 - s) * qs.positions[i] + s * qe.positions[i];
                }
                q
            })
            .collect();
        Ok(Self {
            t_horizon,
            nodes,
            params,
            theta,
        })
    }

    /// Path through explicitly sampled nodes; endpoints are rebuilt from
    /// the parameters.
    pub fn from_nodes(
        params: BoundaryParams,
        theta: f64,
        masses: &MassModel,
        mut nodes: Vec<[Vec2; 4]>,
        t_horizon: f64,
    ) -> Result<Self, Error> {
        if nodes.len() < 3 {
            return Err(Error::InvalidParameter(
                "a discrete path needs at least 2 segments".into(),
            ));
        }
        let (a1, a2, a3) = params.start_triple();
        let (a4, a5, a6) = params.end_triple();
        let n = nodes.len() - 1;
        nodes[0] = build_qstart(a1, a2, a3, theta, masses).positions;
        nodes[n] = build_qend(a4, a5, a6, masses).positions;
        Ok(Self {
            t_horizon,
            nodes,
            params,
            theta,
        })
    }

    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.t_horizon / self.segments() as f64
    }

    /// Piecewise-linear resampling onto `segments` intervals.
    pub fn resampled(&self, segments: usize) -> Self {
        let n_old = self.segments();
        let nodes = (0..=segments)
            .map(|k| {
                let s = k as f64 / segments as f64 * n_old as f64;
                let idx = (s.floor() as usize).min(n_old - 1);
                let frac = s - idx as f64;
                let mut q = [Vec2::zeros(); 4];
                for i in 0..4 {
                    q[i] = (1.0 - frac) * self.nodes[idx][i] + frac * self.nodes[idx + 1][i];
                }
                q
            })
            .collect();
        Self {
            t_horizon: self.t_horizon,
            nodes,
            params: self.params,
            theta: self.theta,
        }
    }

    /// One-sided velocity estimates at the first node (used to seed
    /// shooting).
    pub fn initial_velocities(&self) -> [Vec2; 4] {
        let dt = self.dt();
        let mut v = [Vec2::zeros(); 4];
        for i in 0..4 {
            v[i] = (self.nodes[1][i] - self.nodes[0][i]) / dt;
        }
        v
    }
}

/// Action of the discrete path: exact piecewise-linear kinetic part plus
/// midpoint-rule potential.
pub fn discretized_action(path: &DiscretePath, masses: &MassModel) -> Result<f64, Error> {
    let dt = path.dt();
    let mut action = 0.0;
    for k in 0..path.segments() {
        let (a, b) = (&path.nodes[k], &path.nodes[k + 1]);
        let mut mid = [Vec2::zeros(); 4];
        for i in 0..4 {
            let d = b[i] - a[i];
            action += masses.mass(i) * d.norm_squared() / (2.0 * dt);
            mid[i] = 0.5 * (a[i] + b[i]);
        }
        action += dt * potential_energy(&Configuration::new(mid), masses)?;
    }
    Ok(action)
}

/// Gradient of the discretized action.
#[derive(Debug, Clone)]
pub struct PathGradient {
    /// With respect to the interior nodes `1..n`.
    pub interior: Vec<[Vec2; 4]>,
    /// With respect to the first and last node (before the chain rule).
    pub endpoint_start: [Vec2; 4],
    pub endpoint_end: [Vec2; 4],
    /// Chain-ruled through the boundary templates to `(a1, ..., a6)`.
    pub boundary: [f64; 6],
}

impl PathGradient {
    pub fn interior_norm(&self) -> f64 {
        self.interior
            .iter()
            .flat_map(|n| n.iter())
            .map(|v| v.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn joint_norm(&self) -> f64 {
        let b: f64 = self.boundary.iter().map(|v| v * v).sum();
        (self.interior_norm().powi(2) + b).sqrt()
    }
}

/// Sensitivities of the start template rows to `(a1, a2, a3)`, already
/// rotated.
pub fn qstart_jacobian(theta: f64, masses: &MassModel) -> [[Vec2; 4]; 3] {
    let c2 = (-masses.m2 - masses.m4) / masses.m3;
    let c3 = masses.m1 / masses.m3;
    let rows = [
        [
            Vec2::zeros(),
            Vec2::new(-1.0, 0.0),
            Vec2::zeros(),
            Vec2::new(1.0, 0.0),
        ],
        [
            Vec2::zeros(),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, c2),
            Vec2::new(0.0, 1.0),
        ],
        [
            Vec2::new(0.0, -1.0),
            Vec2::zeros(),
            Vec2::new(0.0, c3),
            Vec2::zeros(),
        ],
    ];
    rows.map(|r| r.map(|v| rotate_row(v, theta)))
}

/// Sensitivities of the end template rows to `(a4, a5, a6)`.
pub fn qend_jacobian(masses: &MassModel) -> [[Vec2; 4]; 3] {
    let c5 = (-masses.m1 - masses.m3) / masses.m4;
    let c6 = masses.m2 / masses.m4;
    [
        [
            Vec2::new(1.0, 0.0),
            Vec2::zeros(),
            Vec2::new(-1.0, 0.0),
            Vec2::zeros(),
        ],
        [
            Vec2::new(0.0, 1.0),
            Vec2::zeros(),
            Vec2::new(0.0, 1.0),
            Vec2::new(0.0, c5),
        ],
        [
            Vec2::zeros(),
            Vec2::new(0.0, -1.0),
            Vec2::zeros(),
            Vec2::new(0.0, c6),
        ],
    ]
}

/// Exact gradient of [`discretized_action`] with respect to the interior
/// nodes and, through the endpoint templates, the boundary parameters.
pub fn action_gradient(path: &DiscretePath, masses: &MassModel) -> Result<PathGradient, Error> {
    let n = path.segments();
    let dt = path.dt();
    let mut grad = vec![[Vec2::zeros(); 4]; n + 1];

    for k in 0..n {
        let (a, b) = (&path.nodes[k], &path.nodes[k + 1]);
        let mut mid = [Vec2::zeros(); 4];
        for i in 0..4 {
            mid[i] = 0.5 * (a[i] + b[i]);
        }
        let gu = potential_gradient(&Configuration::new(mid), masses)?;
        for i in 0..4 {
            let d = b[i] - a[i];
            let kin = masses.mass(i) / dt * d;
            grad[k][i] += -kin + 0.5 * dt * gu[i];
            grad[k + 1][i] += kin + 0.5 * dt * gu[i];
        }
    }

    let js = qstart_jacobian(path.theta, masses);
    let je = qend_jacobian(masses);
    let mut boundary = [0.0; 6];
    for p in 0..3 {
        boundary[p] = (0..4).map(|i| grad[0][i].dot(&js[p][i])).sum();
        boundary[p + 3] = (0..4).map(|i| grad[n][i].dot(&je[p][i])).sum();
    }

    Ok(PathGradient {
        interior: grad[1..n].to_vec(),
        endpoint_start: grad[0],
        endpoint_end: grad[n],
        boundary,
    })
}
