//! Reference actions: the homographic (rotating-rhombus) family, the
//! constant-velocity test path, and the admissible-region scan that
//! compares the two.

use crate::boundary::{build_qend, build_qstart, BoundaryParams};
use crate::dynamics::{accelerations, potential_energy, Configuration, PhaseState};
use crate::error::Error;
use crate::integrator::{OdeSolution, StepPoint, Trajectory};
use crate::masses::MassModel;
use crate::Vec2;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Boundary angular speed, `|pi/2 - theta|/T` for `theta < pi` and
/// `|3pi/2 - theta|/T` above.
pub fn omega_from_theta(theta: f64, t_horizon: f64) -> f64 {
    if theta < PI {
        (PI / 2.0 - theta).abs() / t_horizon
    } else {
        (1.5 * PI - theta).abs() / t_horizon
    }
}

/// Signed angular speed selecting the rotation sense that carries the
/// start boundary onto the end boundary (retrograde below the degenerate
/// angles, prograde above).
pub fn signed_omega(theta: f64, t_horizon: f64) -> f64 {
    if theta < PI {
        (theta - PI / 2.0) / t_horizon
    } else {
        (theta - 1.5 * PI) / t_horizon
    }
}

/// Rhombus radii `(r1, r2)` of the central configuration rotating at
/// `omega`, solved by a two-dimensional Newton iteration on the
/// equilibrium relations; unique for positive inputs.
pub fn solve_rhombus_radii(omega: f64, m1: f64, m2: f64) -> Result<(f64, f64), Error> {
    if !(omega > 0.0 && m1 > 0.0 && m2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rhombus radii need positive omega and masses, got ({omega}, {m1}, {m2})"
        )));
    }
    let w2 = omega * omega;
    let residual = |r1: f64, r2: f64| -> (f64, f64) {
        let s = (r1 * r1 + r2 * r2).powf(1.5);
        (
            -w2 + 2.0 * m2 / s + m1 / (4.0 * r1.powi(3)),
            -w2 + 2.0 * m1 / s + m2 / (4.0 * r2.powi(3)),
        )
    };
    // equal-mass closed form at the geometric mean mass seeds Newton
    let mbar = (m1 * m2).sqrt();
    let mut r1 = (mbar * (2.0 * 2.0_f64.sqrt() + 1.0) / (4.0 * w2)).powf(1.0 / 3.0);
    let mut r2 = r1;
    for _ in 0..60 {
        let (f1, f2) = residual(r1, r2);
        if f1.abs().max(f2.abs()) < 1e-13 {
            return Ok((r1, r2));
        }
        let s52 = (r1 * r1 + r2 * r2).powf(2.5);
        let j11 = -6.0 * m2 * r1 / s52 - 0.75 * m1 / r1.powi(4);
        let j12 = -6.0 * m2 * r2 / s52;
        let j21 = -6.0 * m1 * r1 / s52;
        let j22 = -6.0 * m1 * r2 / s52 - 0.75 * m2 / r2.powi(4);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            break;
        }
        let d1 = (f1 * j22 - f2 * j12) / det;
        let d2 = (j11 * f2 - j21 * f1) / det;
        // keep the iterates positive
        r1 = (r1 - d1).max(0.25 * r1);
        r2 = (r2 - d2).max(0.25 * r2);
    }
    let (f1, f2) = residual(r1, r2);
    if f1.abs().max(f2.abs()) < 1e-12 {
        Ok((r1, r2))
    } else {
        Err(Error::NoConvergence {
            what: "rhombus radii Newton iteration",
            iterations: 60,
            residual: f1.abs().max(f2.abs()),
        })
    }
}

/// The rotating-rhombus homographic solution aligned to the boundary
/// subspaces: body `k` moves on radius `r_k` with phase
/// `(k-1) pi/2 + alpha0`.
#[derive(Debug, Clone, Copy)]
pub struct HomographicFamily {
    /// Signed angular speed (sense chosen by the boundary alignment).
    pub omega: f64,
    pub r1: f64,
    pub r2: f64,
    /// Phase offset placing `q(0)` in the start subspace.
    pub alpha0: f64,
    /// Minimum period `2 pi / |omega|`.
    pub minimum_period: f64,
    /// Central-configuration multiplier (`omega^2`).
    pub lambda: f64,
    pub masses: MassModel,
}

impl HomographicFamily {
    pub fn for_boundary(theta: f64, mu: f64, t_horizon: f64) -> Result<Self, Error> {
        let w = signed_omega(theta, t_horizon);
        if w == 0.0 {
            return Err(Error::DegenerateOmega { theta });
        }
        let masses = MassModel::from_ratio(mu)?;
        let (r1, r2) = solve_rhombus_radii(w.abs(), masses.m1, masses.m2)?;
        Ok(Self {
            omega: w,
            r1,
            r2,
            alpha0: PI / 2.0 - theta,
            minimum_period: 2.0 * PI / w.abs(),
            lambda: w * w,
            masses,
        })
    }

    pub fn radius(&self, body: usize) -> f64 {
        match body {
            0 | 2 => self.r1,
            1 | 3 => self.r2,
            _ => panic!("body index {body} out of range"),
        }
    }

    pub fn state_at(&self, t: f64) -> PhaseState {
        let mut pos = [Vec2::zeros(); 4];
        let mut vel = [Vec2::zeros(); 4];
        for k in 0..4 {
            let rho = 0.5 * PI * k as f64 + self.alpha0;
            let phase = self.omega * t + rho;
            let (s, c) = phase.sin_cos();
            let r = self.radius(k);
            pos[k] = Vec2::new(r * c, r * s);
            vel[k] = self.omega * Vec2::new(-r * s, r * c);
        }
        PhaseState::new(Configuration::new(pos), vel, t)
    }

    /// Action over one boundary horizon, `3 omega^2 (m1 r1^2 + m2 r2^2) T`.
    pub fn action(&self, t_horizon: f64) -> f64 {
        3.0 * self.lambda
            * (self.masses.m1 * self.r1 * self.r1 + self.masses.m2 * self.r2 * self.r2)
            * t_horizon
    }
}

/// Homographic action for the boundary-aligned angular speed.
pub fn homographic_action(theta: f64, mu: f64, t_horizon: f64) -> Result<f64, Error> {
    Ok(HomographicFamily::for_boundary(theta, mu, t_horizon)?.action(t_horizon))
}

/// Homographic action for an explicit angular speed (the faster rotation
/// branches of the same boundary pair).
pub fn homographic_action_with_omega(omega: f64, mu: f64, t_horizon: f64) -> Result<f64, Error> {
    if omega == 0.0 {
        return Err(Error::DegenerateOmega { theta: f64::NAN });
    }
    let masses = MassModel::from_ratio(mu)?;
    let (r1, r2) = solve_rhombus_radii(omega.abs(), masses.m1, masses.m2)?;
    Ok(3.0 * omega * omega * (masses.m1 * r1 * r1 + masses.m2 * r2 * r2) * t_horizon)
}

/// Homographic action at `k*theta` obtained from the value at `theta` by
/// the `rho^(2/3)` speed-scaling law, `rho = omega(k theta)/omega(theta)`.
pub fn homographic_action_scaled(
    theta: f64,
    k: f64,
    mu: f64,
    t_horizon: f64,
) -> Result<f64, Error> {
    let kt = k * theta;
    if !(kt > 0.0 && kt < 2.0 * PI) {
        return Err(Error::InvalidParameter(format!(
            "scaled angle {kt} outside (0, 2pi)"
        )));
    }
    let w0 = omega_from_theta(theta, t_horizon);
    let w1 = omega_from_theta(kt, t_horizon);
    if w0 == 0.0 || w1 == 0.0 {
        return Err(Error::DegenerateOmega {
            theta: if w0 == 0.0 { theta } else { kt },
        });
    }
    Ok((w1 / w0).powf(2.0 / 3.0) * homographic_action(theta, mu, t_horizon)?)
}

/// Closed form of `int_0^1 du / sqrt(a + b u + c u^2)` for `c > 0` away
/// from a degenerate discriminant.
pub fn pair_integral_closed(a: f64, b: f64, c: f64) -> f64 {
    if c == 0.0 {
        // constant relative displacement
        return 1.0 / a.sqrt();
    }
    let sc = c.sqrt();
    let g = |u: f64| {
        let q = (a + b * u + c * u * u).max(0.0);
        (2.0 * sc * q.sqrt() + 2.0 * c * u + b).ln()
    };
    (g(1.0) - g(0.0)) / sc
}

/// Adaptive Simpson quadrature of the same integrand; fallback for
/// near-degenerate discriminants and the independent oracle in tests.
pub fn pair_integral_quadrature(a: f64, b: f64, c: f64) -> f64 {
    let f = |u: f64| 1.0 / (a + b * u + c * u * u).sqrt();
    fn simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, flo: f64, fmid: f64, fhi: f64) -> f64 {
        (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    }
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        lo: f64,
        hi: f64,
        flo: f64,
        fmid: f64,
        fhi: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let fl = f(0.5 * (lo + mid));
        let fr = f(0.5 * (mid + hi));
        let left = simpson(f, lo, mid, flo, fl, fmid);
        let right = simpson(f, mid, hi, fmid, fr, fhi);
        if depth == 0 || (left + right - whole).abs() < 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, lo, mid, flo, fl, fmid, left, 0.5 * tol, depth - 1)
                + recurse(f, mid, hi, fmid, fr, fhi, right, 0.5 * tol, depth - 1)
        }
    }
    let (flo, fmid, fhi) = (f(0.0), f(0.5), f(1.0));
    let whole = simpson(&f, 0.0, 1.0, flo, fmid, fhi);
    recurse(&f, 0.0, 1.0, flo, fmid, fhi, whole, 1e-13, 48)
}

/// Action of the constant-velocity test path between the two boundary
/// configurations: closed-form kinetic part plus one explicit integral per
/// body pair.
pub fn test_path_action(
    theta: f64,
    mu: f64,
    a_test: &BoundaryParams,
    t_horizon: f64,
) -> Result<f64, Error> {
    let masses = MassModel::from_ratio(mu)?;
    let (a1, a2, a3) = a_test.start_triple();
    let (a4, a5, a6) = a_test.end_triple();
    let qs = build_qstart(a1, a2, a3, theta, &masses);
    let qe = build_qend(a4, a5, a6, &masses);

    let mut action = 0.0;
    for k in 0..4 {
        let d = qe.positions[k] - qs.positions[k];
        action += masses.mass(k) * d.norm_squared() / (2.0 * t_horizon);
    }

    for i in 0..4 {
        for j in (i + 1)..4 {
            let d0 = qs.positions[i] - qs.positions[j];
            let d1 = qe.positions[i] - qe.positions[j];
            let dd = d1 - d0;
            let a = d0.norm_squared();
            let b = 2.0 * d0.dot(&dd);
            let c = dd.norm_squared();
            // closest approach of the linear interpolants on [0, 1]
            let mut min_sq = a.min(a + b + c);
            if c > 0.0 {
                let ustar = -b / (2.0 * c);
                if (0.0..=1.0).contains(&ustar) {
                    min_sq = min_sq.min(a + b * ustar + c * ustar * ustar);
                }
            }
            if min_sq < 1e-20 {
                return Err(Error::SegmentCollision { i, j });
            }
            let integral = if (4.0 * a * c - b * b).abs() < 1e-12 * c {
                pair_integral_quadrature(a, b, c)
            } else {
                pair_integral_closed(a, b, c)
            };
            action += masses.mass(i) * masses.mass(j) * integral * t_horizon;
        }
    }
    Ok(action)
}

/// Sampled homographic trajectory, aligned so `q(0)` lies in the start
/// subspace and `q(T)` in the end subspace.
pub fn build_homographic_trajectory(
    theta: f64,
    mu: f64,
    t_horizon: f64,
    samples: usize,
) -> Result<Trajectory, Error> {
    let family = HomographicFamily::for_boundary(theta, mu, t_horizon)?;
    let masses = family.masses;
    let n = samples.max(2);
    let mut steps = Vec::with_capacity(n);
    for k in 0..n {
        let t = t_horizon * k as f64 / (n - 1) as f64;
        let state = family.state_at(t);
        let y = state.to_flat().to_vec();
        let acc = accelerations(&state.config, &masses)?;
        let mut dy = vec![0.0; 16];
        for i in 0..4 {
            dy[2 * i] = state.velocities[i].x;
            dy[2 * i + 1] = state.velocities[i].y;
            dy[8 + 2 * i] = acc[i].x;
            dy[8 + 2 * i + 1] = acc[i].y;
        }
        steps.push(StepPoint { t, y, dy });
    }
    Ok(Trajectory::from_solution(
        OdeSolution {
            steps,
            stats: Default::default(),
        },
        masses,
    ))
}

/// Boundary parameters of the homographic solution (rhombus shape in both
/// subspaces); a useful outer-minimization seed.
pub fn homographic_boundary_params(theta: f64, mu: f64, t_horizon: f64) -> Result<BoundaryParams, Error> {
    let family = HomographicFamily::for_boundary(theta, mu, t_horizon)?;
    let (r1, r2) = (family.r1, family.r2);
    // start template: bodies 1,3 at (0, -+a3), bodies 2,4 at (-+a1, 0);
    // end template: bodies 1,3 at (+-a4, 0), bodies 2,4 at (0, -+a6)
    BoundaryParams::new([r2, 0.0, -r1, r1, 0.0, -r2])
}

/// Region scan outcome over a `(theta, mu)` grid: `mask[i][j]` is `true`
/// when the cheapest listed test path undercuts the homographic action at
/// `(theta[j], mu[i])` and `theta != pi`.
#[derive(Debug, Clone)]
pub struct OmegaRegionScan {
    pub thetas: Vec<f64>,
    pub mus: Vec<f64>,
    pub mask: Vec<Vec<bool>>,
    pub a_tests: Vec<BoundaryParams>,
    /// Cells whose evaluation failed, with the reason.
    pub failures: Vec<(usize, usize, String)>,
}

impl OmegaRegionScan {
    /// Bracketing `theta` intervals where the row mask switches, reported
    /// as `(theta_before, theta_after)` pairs.
    pub fn transitions_for_row(&self, row: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let row = &self.mask[row];
        for j in 1..row.len() {
            if row[j] != row[j - 1] {
                out.push((self.thetas[j - 1], self.thetas[j]));
            }
        }
        out
    }

    /// CSV matrix: header row of `theta/pi`, one row per `mu` with 0/1
    /// entries.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu");
        for th in &self.thetas {
            let _ = write!(out, ",{:.6}", th / PI);
        }
        out.push('\n');
        for (i, mu) in self.mus.iter().enumerate() {
            let _ = write!(out, "{mu:.6}");
            for cell in &self.mask[i] {
                let _ = write!(out, ",{}", u8::from(*cell));
            }
            out.push('\n');
        }
        out
    }
}

/// Scan the grid; the mask is the union over the test-path list.
pub fn scan_region(
    thetas: &[f64],
    mus: &[f64],
    a_tests: &[BoundaryParams],
    t_horizon: f64,
) -> Result<OmegaRegionScan, Error> {
    if thetas.is_empty() || mus.is_empty() || a_tests.is_empty() {
        return Err(Error::InvalidParameter(
            "scan needs nonempty theta grid, mu grid, and test-path list".into(),
        ));
    }
    let mut mask = vec![vec![false; thetas.len()]; mus.len()];
    let mut failures = Vec::new();
    for (i, &mu) in mus.iter().enumerate() {
        for (j, &theta) in thetas.iter().enumerate() {
            if (theta - PI).abs() < 1e-12 {
                continue;
            }
            let diamond = match homographic_action(theta, mu, t_horizon) {
                Ok(v) => v,
                Err(e) => {
                    failures.push((i, j, e.to_string()));
                    continue;
                }
            };
            let mut best = f64::INFINITY;
            for a in a_tests {
                match test_path_action(theta, mu, a, t_horizon) {
                    Ok(v) => best = best.min(v),
                    Err(e) => failures.push((i, j, e.to_string())),
                }
            }
            mask[i][j] = best < diamond;
        }
    }
    Ok(OmegaRegionScan {
        thetas: thetas.to_vec(),
        mus: mus.to_vec(),
        mask,
        a_tests: a_tests.to_vec(),
        failures,
    })
}

/// The published scan window: `theta in [0.6 pi, 1.4 pi]` step `0.005 pi`,
/// `mu in [0.2, 3]` step `0.02`.
pub fn default_scan_grids() -> (Vec<f64>, Vec<f64>) {
    let thetas: Vec<f64> = (0..=160).map(|k| (0.6 + 0.005 * k as f64) * PI).collect();
    let mus: Vec<f64> = (0..=140).map(|k| 0.2 + 0.02 * k as f64).collect();
    (thetas, mus)
}

/// The four published test-path parameter vectors (minimizers at
/// `theta = 4pi/5` for `mu = 1, 2, 0.8, 0.5`).
pub fn published_test_params() -> Vec<BoundaryParams> {
    vec![
        BoundaryParams([
            0.6676542303,
            1.11499232,
            0.5099504088,
            0.6676542314,
            1.11499232,
            0.5099504078,
        ]),
        BoundaryParams([
            0.8347577868,
            0.8492284757,
            1.107411045,
            0.6740939528,
            1.7071110,
            0.072136065,
        ]),
        BoundaryParams([
            0.6216336897,
            1.197204657,
            0.347804861,
            0.6658203645,
            0.9561601763,
            0.6379731628,
        ]),
        BoundaryParams([
            0.5350313653,
            1.354931439,
            0.0572523078,
            0.6625485,
            0.674032487,
            0.8789531194,
        ]),
    ]
}

/// The first published test-path vector (equal-mass minimizer).
pub fn equal_mass_test_params() -> BoundaryParams {
    published_test_params()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{membership_a, membership_b};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn omega_formula() {
        assert_abs_diff_eq!(omega_from_theta(0.8 * PI, 1.0), 0.3 * PI, epsilon = 1e-15);
        assert_eq!(omega_from_theta(PI / 2.0, 1.0), 0.0);
        assert_eq!(omega_from_theta(1.5 * PI, 1.0), 0.0);
    }

    #[test]
    fn equal_mass_radii_closed_form() {
        let w = 0.3 * PI;
        let (r1, r2) = solve_rhombus_radii(w, 1.0, 1.0).unwrap();
        let expect = ((2.0 * 2.0_f64.sqrt() + 1.0) / (4.0 * w * w)).powf(1.0 / 3.0);
        assert_relative_eq!(r1, expect, max_relative = 1e-12);
        assert_relative_eq!(r2, expect, max_relative = 1e-12);
    }

    #[test]
    fn radii_kepler_scaling() {
        let w = 0.3 * PI;
        let (r1, r2) = solve_rhombus_radii(w, 1.0, 1.7).unwrap();
        let (s1, s2) = solve_rhombus_radii(8.0 * w, 1.0, 1.7).unwrap();
        assert_relative_eq!(s1, r1 / 4.0, max_relative = 1e-10);
        assert_relative_eq!(s2, r2 / 4.0, max_relative = 1e-10);
    }

    #[test]
    fn radii_match_bisection_oracle() {
        // alternating bisection per coordinate on the same residuals
        let (w, m1, m2) = (0.3 * PI, 1.0, 2.0);
        let w2 = w * w;
        let f1 = |r1: f64, r2: f64| -w2 + 2.0 * m2 / (r1 * r1 + r2 * r2).powf(1.5) + m1 / (4.0 * r1.powi(3));
        let f2 = |r1: f64, r2: f64| -w2 + 2.0 * m1 / (r1 * r1 + r2 * r2).powf(1.5) + m2 / (4.0 * r2.powi(3));
        let bisect = |f: &dyn Fn(f64) -> f64| {
            let (mut lo, mut hi) = (1e-6, 1e3);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let (mut r1, mut r2) = (1.0, 1.0);
        for _ in 0..400 {
            r1 = bisect(&|r: f64| f1(r, r2));
            r2 = bisect(&|r: f64| f2(r1, r));
        }
        let (n1, n2) = solve_rhombus_radii(w, m1, m2).unwrap();
        assert_abs_diff_eq!(n1, r1, epsilon = 1e-10);
        assert_abs_diff_eq!(n2, r2, epsilon = 1e-10);
    }

    #[test]
    fn homographic_action_published_values() {
        for (th, want) in [
            (0.78 * PI, 5.3497),
            (0.77 * PI, 5.2216),
            (1.11 * PI, 6.6722),
            (1.12 * PI, 6.5576),
        ] {
            let got = homographic_action(th, 1.0, 1.0).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-3);
        }
        // equal-mass closed form
        for th in [0.6 * PI, 0.78 * PI, 0.8 * PI, 0.9 * PI, 1.11 * PI] {
            let w = omega_from_theta(th, 1.0);
            let closed = 6.0 * ((2.0 * 2.0_f64.sqrt() + 1.0) / 4.0).powf(2.0 / 3.0) * w.powf(2.0 / 3.0);
            assert_relative_eq!(
                homographic_action(th, 1.0, 1.0).unwrap(),
                closed,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn excluded_angle_is_degenerate() {
        assert!(matches!(
            homographic_action(PI / 2.0, 1.0, 1.0),
            Err(Error::DegenerateOmega { .. })
        ));
    }

    #[test]
    fn action_scaling_law() {
        let theta = 0.78 * PI;
        let k = 0.9 / 0.78;
        let scaled = homographic_action_scaled(theta, k, 1.0, 1.0).unwrap();
        let direct = homographic_action(0.9 * PI, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(scaled, direct, epsilon = 1e-10);
        assert_abs_diff_eq!(
            homographic_action_scaled(theta, 1.0, 1.3, 1.0).unwrap(),
            homographic_action(theta, 1.3, 1.0).unwrap(),
            epsilon = 1e-14
        );
        // mu = 1: action / omega^{2/3} is theta-independent
        let ratio = |th: f64| homographic_action(th, 1.0, 1.0).unwrap() / omega_from_theta(th, 1.0).powf(2.0 / 3.0);
        assert_relative_eq!(ratio(0.7 * PI), ratio(1.2 * PI), max_relative = 1e-12);
    }

    #[test]
    fn test_path_published_values() {
        let a = equal_mass_test_params();
        for (th, want) in [
            (0.78 * PI, 5.3444),
            (0.77 * PI, 5.4085),
            (1.11 * PI, 6.5124),
            (1.12 * PI, 6.6465),
        ] {
            let got = test_path_action(th, 1.0, &a, 1.0).unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-3);
        }
    }

    #[test]
    fn stationary_segment_contributes_potential_only() {
        // a pair whose relative displacement never changes integrates to
        // T / |d0|: the zero-kinetic limit of the test path
        let d0 = 1.7_f64;
        assert_relative_eq!(
            pair_integral_closed(d0 * d0, 0.0, 0.0),
            1.0 / d0,
            max_relative = 1e-15
        );
        // near-stationary endpoints: the action approaches U(Qstart) * T
        // plus the vanishing kinetic term
        let m = MassModel::equal();
        let (a1, a2, a3) = (0.6676542303, 1.11499232, 0.5099504088);
        let qs = build_qstart(a1, a2, a3, 0.8 * PI, &m);
        let u = potential_energy(&qs, &m).unwrap();
        let mut action = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = qs.positions[i] - qs.positions[j];
                action += m.mass(i) * m.mass(j) * pair_integral_closed(d.norm_squared(), 0.0, 0.0);
            }
        }
        assert_relative_eq!(action, u, max_relative = 1e-14);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let cases = [
            (1.3, 0.4, 0.9),
            (0.2, -0.1, 0.5),
            (2.0, -2.2, 1.4),
            (0.9, 0.0, 0.0),
            (1.7, 2.9, 3.0),
        ];
        for (a, b, c) in cases {
            let closed = pair_integral_closed(a, b, c);
            let quad = pair_integral_quadrature(a, b, c);
            assert_abs_diff_eq!(closed, quad, epsilon = 1e-10);
        }
    }

    #[test]
    fn segment_collision_detected() {
        // bodies 1 and 2 swap sides through each other
        let m = MassModel::equal();
        let a = BoundaryParams([0.0, 1.0, -1.0, 0.0, -1.0, 1.0]);
        let err = test_path_action(1e-14, 1.0, &a, 1.0);
        let _ = m;
        assert!(matches!(err, Err(Error::SegmentCollision { .. })));
    }

    #[test]
    fn homographic_trajectory_solves_newton_and_fits_boundaries() {
        let (theta, mu, t_h) = (0.8 * PI, 1.0, 1.0);
        let family = HomographicFamily::for_boundary(theta, mu, t_h).unwrap();
        let m = family.masses;
        for k in 0..=20 {
            let t = t_h * k as f64 / 20.0;
            let s = family.state_at(t);
            let acc = accelerations(&s.config, &m).unwrap();
            for i in 0..4 {
                // q'' = -omega^2 q on the circular solution
                let expect = -family.lambda * s.config.positions[i];
                assert_abs_diff_eq!((acc[i] - expect).norm(), 0.0, epsilon = 1e-9);
            }
        }
        let s0 = family.state_at(0.0);
        let s1 = family.state_at(t_h);
        assert!(membership_a(&s0.config, theta, &m, 1e-9).is_some());
        assert!(membership_b(&s1.config, &m, 1e-9).is_some());
        // mu != 1 as well
        let fam2 = HomographicFamily::for_boundary(1.2 * PI, 0.7, t_h).unwrap();
        let m2 = fam2.masses;
        assert!(membership_a(&fam2.state_at(0.0).config, 1.2 * PI, &m2, 1e-9).is_some());
        assert!(membership_b(&fam2.state_at(t_h).config, &m2, 1e-9).is_some());
    }

    #[test]
    fn scan_brackets_equal_mass_transitions() {
        let thetas: Vec<f64> = (0..=80).map(|k| (0.7 + 0.005 * k as f64) * PI).collect();
        let scan = scan_region(&thetas, &[1.0], &[equal_mass_test_params()], 1.0).unwrap();
        let tr = scan.transitions_for_row(0);
        assert_eq!(tr.len(), 2, "expected exactly two transitions, got {tr:?}");
        assert!(tr[0].0 >= 0.77 * PI - 1e-12 && tr[0].1 <= 0.78 * PI + 1e-12);
        assert!(tr[1].0 >= 1.11 * PI - 1e-12 && tr[1].1 <= 1.12 * PI + 1e-12);
    }

    #[test]
    fn scan_rejects_empty_inputs() {
        assert!(scan_region(&[], &[1.0], &[equal_mass_test_params()], 1.0).is_err());
        assert!(scan_region(&[0.8 * PI], &[1.0], &[], 1.0).is_err());
    }

    #[test]
    fn scan_theta_pi_column_false() {
        let scan = scan_region(&[PI], &[1.0], &[equal_mass_test_params()], 1.0).unwrap();
        assert!(!scan.mask[0][0]);
    }

    #[test]
    fn scan_union_monotone() {
        let thetas: Vec<f64> = (0..=40).map(|k| (0.7 + 0.01 * k as f64) * PI).collect();
        let mus = [0.5, 1.0, 2.0];
        let all = published_test_params();
        let one = scan_region(&thetas, &mus, &all[..1], 1.0).unwrap();
        let four = scan_region(&thetas, &mus, &all, 1.0).unwrap();
        for i in 0..mus.len() {
            for j in 0..thetas.len() {
                assert!(!one.mask[i][j] || four.mask[i][j]);
            }
        }
    }
}
