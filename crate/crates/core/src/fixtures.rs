//! Built-in table of published stable-orbit initial conditions, and the
//! shooting refinement that sharpens them to machine precision.
//!
//! The listed states carry about ten significant digits; over a full
//! period that truncation grows to visible closure error, so closure and
//! stability checks refine a fixture first. The refinement stays within
//! the listing's own precision of the published values.

use crate::boundary::RotationAngle;
use crate::dynamics::{Configuration, PhaseState};
use crate::error::Error;
use crate::masses::MassModel;
use crate::shooting::{refine_seed_params, RefinedSeed, SeedParams, ShootingSettings};
use crate::Vec2;

/// One published orbit: rotation angle `P pi / Q`, mass ratio, minimum
/// period, and the full initial state.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub theta_p: u32,
    pub theta_q: u32,
    pub mu: f64,
    pub period: f64,
    /// `[q1, q2, q3, q4]` as `(qx, qy, vx, vy)`.
    pub state: [[f64; 4]; 4],
}

pub const FIXTURES: [Fixture; 6] = [
    Fixture {
        name: "fixture-1",
        theta_p: 4,
        theta_q: 5,
        mu: 1.0,
        period: 20.0,
        state: [
            [-0.2997475302, 0.4125670813, 1.114760563, 0.8099231855],
            [1.195555973, -0.5096218631, -0.8600513847, -0.003559696213],
            [-1.011040523, 1.391577897, 0.01444607736, 0.01049661818],
            [0.1152320804, -1.294523115, -0.2691552559, -0.8168601074],
        ],
    },
    Fixture {
        name: "fixture-2",
        theta_p: 4,
        theta_q: 5,
        mu: 0.5,
        period: 20.0,
        state: [
            [-0.03365216432, 0.04631823056, 0.8791868243, 0.6387681838],
            [1.229294751, -0.7817016926, -0.904358996, -0.2059939437],
            [-0.762779971, 1.049876561, -0.1893205096, -0.1375492335],
            [0.3635695192, -1.410687891, -0.4753736332, -0.7964439574],
        ],
    },
    Fixture {
        name: "fixture-3",
        theta_p: 4,
        theta_q: 5,
        mu: 1.5,
        period: 20.0,
        state: [
            [-0.4954623785, 0.6819454601, 1.286530639, 0.93472253],
            [1.17942819, -0.3292799005, -0.8390962366, 0.1359441271],
            [-1.196730568, 1.647158317, 0.1671195441, 0.121421328],
            [-0.05129955936, -1.223455951, -0.1300038857, -0.8400400324],
        ],
    },
    Fixture {
        name: "fixture-4",
        theta_p: 7,
        theta_q: 8,
        mu: 1.0,
        period: 16.0,
        state: [
            [-0.3657149699, 0.8829140403, 1.186543081, 0.4914819077],
            [1.104628492, -1.169044107, -0.7831641034, 0.3494036031],
            [-0.7844622398, 1.893859379, -0.09666570501, -0.04003861407],
            [0.04554871816, -1.607729312, -0.3067132724, -0.8008468968],
        ],
    },
    Fixture {
        name: "fixture-5",
        theta_p: 7,
        theta_q: 8,
        mu: 1.5,
        period: 16.0,
        state: [
            [-0.5350773026, 1.291790881, 1.350250694, 0.5592959079],
            [1.099754106, -0.9458393211, -0.7454903418, 0.4733604227],
            [-0.9513025743, 2.296647577, 0.05662296548, 0.02345549633],
            [-0.1088341884, -1.446452984, -0.1924254315, -0.8618613589],
        ],
    },
    Fixture {
        name: "fixture-6",
        theta_p: 7,
        theta_q: 9,
        mu: 1.0,
        period: 36.0,
        state: [
            [-0.27004813, 0.3218308291, 1.071180019, 0.8988296083],
            [1.207641964, -0.3501521227, -0.8488458756, -0.1158622427],
            [-1.072721533, 1.278419741, 0.03916771092, 0.03286635046],
            [0.1351276988, -1.250098447, -0.2615018538, -0.815833716],
        ],
    },
];

impl Fixture {
    pub fn by_name(name: &str) -> Option<&'static Fixture> {
        FIXTURES.iter().find(|f| f.name == name)
    }

    pub fn masses(&self) -> MassModel {
        MassModel::from_ratio(self.mu).expect("published ratios are valid")
    }

    pub fn rotation_angle(&self) -> RotationAngle {
        RotationAngle::from_rational(self.theta_p, self.theta_q).expect("published angles are valid")
    }

    pub fn theta(&self) -> f64 {
        self.rotation_angle().radians
    }

    /// The state exactly as published.
    pub fn phase_state(&self) -> PhaseState {
        let mut pos = [Vec2::zeros(); 4];
        let mut vel = [Vec2::zeros(); 4];
        for i in 0..4 {
            pos[i] = Vec2::new(self.state[i][0], self.state[i][1]);
            vel[i] = Vec2::new(self.state[i][2], self.state[i][3]);
        }
        PhaseState::new(Configuration::new(pos), vel, 0.0)
    }

    /// Boundary horizon `T` of the underlying minimization (`period` is
    /// `2QT` for even `Q`, `4QT` for odd `Q`).
    pub fn t_horizon(&self) -> f64 {
        if self.theta_q % 2 == 0 {
            self.period / (2.0 * self.theta_q as f64)
        } else {
            self.period / (4.0 * self.theta_q as f64)
        }
    }

    /// Shooting-refined seed for this fixture.
    pub fn refined(&self, settings: &ShootingSettings) -> Result<RefinedSeed, Error> {
        let masses = self.masses();
        let state = self.phase_state();
        let guess = SeedParams::from_state(&state, self.theta(), &masses, 1e-3)
            .ok_or_else(|| {
                Error::VerificationFailure(format!(
                    "{} does not fit the start subspace",
                    self.name
                ))
            })?;
        refine_seed_params(guess, self.theta(), &masses, self.t_horizon(), settings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::membership_a;
    use crate::dynamics::{angular_momentum, kinetic_energy};
    use approx::assert_abs_diff_eq;

    #[test]
    fn fixtures_sit_in_the_start_subspace() {
        for f in &FIXTURES {
            let m = f.masses();
            let s = f.phase_state();
            let fit = membership_a(&s.config, f.theta(), &m, 1e-3);
            assert!(fit.is_some(), "{} not in start subspace", f.name);
        }
    }

    #[test]
    fn fixtures_have_zero_momentum_and_centered_mass() {
        for f in &FIXTURES {
            let m = f.masses();
            let s = f.phase_state();
            let mut mom = Vec2::zeros();
            for i in 0..4 {
                mom += m.mass(i) * s.velocities[i];
            }
            assert_abs_diff_eq!(mom.norm(), 0.0, epsilon = 1e-7);
            assert_abs_diff_eq!(s.config.center_of_mass(&m).norm(), 0.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn fixture_one_kinetic_energy_matches_direct_sum() {
        let f = &FIXTURES[0];
        let s = f.phase_state();
        let m = f.masses();
        let direct: f64 = (0..4)
            .map(|i| 0.5 * m.mass(i) * (s.velocities[i].x.powi(2) + s.velocities[i].y.powi(2)))
            .sum();
        assert_abs_diff_eq!(kinetic_energy(&s, &m), direct, epsilon = 1e-15);
        // and a fixed nonzero angular momentum
        assert!(angular_momentum(&s, &m).abs() > 0.1);
    }

    #[test]
    fn horizons_match_periods() {
        for f in &FIXTURES {
            assert_abs_diff_eq!(f.t_horizon(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lookup_by_name() {
        assert!(Fixture::by_name("fixture-4").is_some());
        assert!(Fixture::by_name("fixture-7").is_none());
    }
}
