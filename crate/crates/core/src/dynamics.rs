//! Planar four-body kinematics: energies, the Newtonian vector field, and
//! the potential Hessian used by the variational equations.

use crate::error::Error;
use crate::masses::MassModel;
use crate::Vec2;
use nalgebra::SMatrix;

/// Pairwise-distance floor below which evaluations fail with
/// [`Error::Collision`]. Minimizing paths stay clear of collisions, so this
/// is a numerical guard rather than a physical model.
pub const COLLISION_FLOOR: f64 = 1e-13;

/// Positions of the four bodies, index 0..4 for bodies 1..4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub positions: [Vec2; 4],
}

impl Configuration {
    pub fn new(positions: [Vec2; 4]) -> Self {
        Self { positions }
    }

    /// Smallest pairwise distance together with the realizing pair.
    pub fn min_pair_distance(&self) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 1);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = (self.positions[i] - self.positions[j]).norm();
                if d < best.0 {
                    best = (d, i, j);
                }
            }
        }
        best
    }

    pub fn center_of_mass(&self, masses: &MassModel) -> Vec2 {
        let mut c = Vec2::zeros();
        for i in 0..4 {
            c += masses.mass(i) * self.positions[i];
        }
        c / masses.total
    }

    /// Uniform scaling of all positions.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.positions.map(|p| s * p))
    }
}

/// Full phase-space state: positions, velocities, and the time stamp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub config: Configuration,
    pub velocities: [Vec2; 4],
    pub time: f64,
}

impl PhaseState {
    pub fn new(config: Configuration, velocities: [Vec2; 4], time: f64) -> Self {
        Self {
            config,
            velocities,
            time,
        }
    }

    /// Shift positions and velocities so the center of mass sits at the
    /// origin with zero total linear momentum. Orbit seeds are expected to
    /// satisfy both to 1e-10; this enforces them exactly.
    pub fn recentered(&self, masses: &MassModel) -> Self {
        let com = self.config.center_of_mass(masses);
        let mut momentum = Vec2::zeros();
        for i in 0..4 {
            momentum += masses.mass(i) * self.velocities[i];
        }
        let vel_shift = momentum / masses.total;
        Self {
            config: Configuration::new(self.config.positions.map(|p| p - com)),
            velocities: self.velocities.map(|v| v - vel_shift),
            time: self.time,
        }
    }

    /// Flat `[q1x, q1y, ..., q4y, v1x, ..., v4y]` layout used by the
    /// integrator and the archive.
    pub fn to_flat(&self) -> [f64; 16] {
        let mut y = [0.0; 16];
        for i in 0..4 {
            y[2 * i] = self.config.positions[i].x;
            y[2 * i + 1] = self.config.positions[i].y;
            y[8 + 2 * i] = self.velocities[i].x;
            y[8 + 2 * i + 1] = self.velocities[i].y;
        }
        y
    }

    pub fn from_flat(y: &[f64], time: f64) -> Self {
        let mut pos = [Vec2::zeros(); 4];
        let mut vel = [Vec2::zeros(); 4];
        for i in 0..4 {
            pos[i] = Vec2::new(y[2 * i], y[2 * i + 1]);
            vel[i] = Vec2::new(y[8 + 2 * i], y[8 + 2 * i + 1]);
        }
        Self::new(Configuration::new(pos), vel, time)
    }
}

/// Newtonian potential `U = sum_{i<j} m_i m_j / |q_i - q_j|`.
pub fn potential_energy(config: &Configuration, masses: &MassModel) -> Result<f64, Error> {
    let mut u = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = (config.positions[i] - config.positions[j]).norm();
            if d < COLLISION_FLOOR {
                return Err(Error::Collision { i, j, distance: d });
            }
            u += masses.mass(i) * masses.mass(j) / d;
        }
    }
    Ok(u)
}

/// Kinetic energy `1/2 sum m_i |v_i|^2`.
pub fn kinetic_energy(state: &PhaseState, masses: &MassModel) -> f64 {
    (0..4)
        .map(|i| 0.5 * masses.mass(i) * state.velocities[i].norm_squared())
        .sum()
}

/// Gradient of the potential with respect to each position,
/// `dU/dq_i = sum_j m_i m_j (q_j - q_i)/|q_j - q_i|^3`.
pub fn potential_gradient(config: &Configuration, masses: &MassModel) -> Result<[Vec2; 4], Error> {
    let mut g = [Vec2::zeros(); 4];
    for i in 0..4 {
        for j in (i + 1)..4 {
            let d = config.positions[j] - config.positions[i];
            let r = d.norm();
            if r < COLLISION_FLOOR {
                return Err(Error::Collision { i, j, distance: r });
            }
            let f = masses.mass(i) * masses.mass(j) / (r * r * r);
            g[i] += f * d;
            g[j] -= f * d;
        }
    }
    Ok(g)
}

/// Accelerations per Newton's equations, `(1/m_i) dU/dq_i`.
pub fn accelerations(config: &Configuration, masses: &MassModel) -> Result<[Vec2; 4], Error> {
    let g = potential_gradient(config, masses)?;
    let mut a = [Vec2::zeros(); 4];
    for i in 0..4 {
        a[i] = g[i] / masses.mass(i);
    }
    Ok(a)
}

/// Hamiltonian value `K - U`.
pub fn total_energy(state: &PhaseState, masses: &MassModel) -> Result<f64, Error> {
    Ok(kinetic_energy(state, masses) - potential_energy(&state.config, masses)?)
}

/// Total angular momentum `sum m_i (q_i x v_i)` (planar cross product).
pub fn angular_momentum(state: &PhaseState, masses: &MassModel) -> f64 {
    (0..4)
        .map(|i| masses.mass(i) * state.config.positions[i].perp(&state.velocities[i]))
        .sum()
}

/// 8x8 position Hessian of the potential, ordered `(q1x, q1y, ..., q4y)`.
/// Used by the full-dimension variational equations.
pub fn potential_hessian(
    config: &Configuration,
    masses: &MassModel,
) -> Result<SMatrix<f64, 8, 8>, Error> {
    let mut h = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let d = config.positions[i] - config.positions[j];
            let r = d.norm();
            if r < COLLISION_FLOOR {
                return Err(Error::Collision { i, j, distance: r });
            }
            let r3 = r * r * r;
            let r5 = r3 * r * r;
            let mm = masses.mass(i) * masses.mass(j);
            // d^2/dq_i^2 of the (i,j) pair term, accumulated over j
            let mut blk = SMatrix::<f64, 2, 2>::zeros();
            for a in 0..2 {
                for b in 0..2 {
                    blk[(a, b)] = mm * (3.0 * d[a] * d[b] / r5 - f64::from(a == b) / r3);
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    h[(2 * i + a, 2 * i + b)] += blk[(a, b)];
                    h[(2 * i + a, 2 * j + b)] -= blk[(a, b)];
                }
            }
        }
    }
    Ok(h)
}
