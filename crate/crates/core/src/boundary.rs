//! The two structural boundary subspaces and their parameterizations.
//!
//! A start configuration places bodies 1 and 3 on an axis rotated by
//! `theta` with bodies 2 and 4 mirrored across it (an isosceles triangle
//! with one body on its axis of symmetry); the end configuration is the
//! unrotated mirror-symmetric counterpart. Both templates have their
//! center of mass at the origin identically.

use crate::dynamics::Configuration;
use crate::error::Error;
use crate::masses::MassModel;
use crate::Vec2;
use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The six boundary parameters `(a1, ..., a6)`; the first three shape the
/// start boundary, the last three the end boundary. Signs are
/// unrestricted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryParams(pub [f64; 6]);

impl BoundaryParams {
    pub fn new(a: [f64; 6]) -> Result<Self, Error> {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "boundary parameters must be finite".into(),
            ));
        }
        Ok(Self(a))
    }

    pub fn start_triple(&self) -> (f64, f64, f64) {
        (self.0[0], self.0[1], self.0[2])
    }

    pub fn end_triple(&self) -> (f64, f64, f64) {
        (self.0[3], self.0[4], self.0[5])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Start and end shape triples agree within `rel_tol` (relative to the
    /// larger magnitude, absolute near zero).
    pub fn shapes_match(&self, rel_tol: f64) -> bool {
        (0..3).all(|i| {
            let (x, y) = (self.0[i], self.0[i + 3]);
            (x - y).abs() <= rel_tol * x.abs().max(y.abs()).max(1.0)
        })
    }
}

/// Rotation angle of the start boundary, optionally with an exact rational
/// form `theta = P pi / Q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationAngle {
    pub radians: f64,
    pub rational: Option<(u32, u32)>,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RotationAngle {
    pub fn from_radians(theta: f64) -> Result<Self, Error> {
        if !(theta > 0.0 && theta < 2.0 * PI) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 2pi), got {theta}"
            )));
        }
        Ok(Self {
            radians: theta,
            rational: None,
        })
    }

    /// Exact rational angle `P pi / Q`; requires `0 < P/Q < 2`.
    pub fn from_rational(p: u32, q: u32) -> Result<Self, Error> {
        if p == 0 || q == 0 || p >= 2 * q {
            return Err(Error::InvalidParameter(format!(
                "rational angle {p}pi/{q} outside (0, 2pi)"
            )));
        }
        let g = gcd(p, q);
        let (p, q) = (p / g, q / g);
        Ok(Self {
            radians: p as f64 * PI / q as f64,
            rational: Some((p, q)),
        })
    }

    /// Angles `pi/2`, `pi`, `3pi/2` make the coercivity bound fail and are
    /// rejected by the minimizer and the reference actions.
    pub fn is_excluded(&self) -> bool {
        if let Some((p, q)) = self.rational {
            return (p, q) == (1, 2) || (p, q) == (1, 1) || (p, q) == (3, 2);
        }
        let t = self.radians;
        [(PI / 2.0), PI, 1.5 * PI]
            .iter()
            .any(|x| (t - x).abs() < 1e-12)
    }

    pub fn ensure_admissible(&self) -> Result<(), Error> {
        if self.is_excluded() {
            Err(Error::ExcludedAngle {
                theta: self.radians,
            })
        } else {
            Ok(())
        }
    }
}

/// Standard planar rotation matrix; positions are row vectors multiplied
/// on the right.
pub fn rotation_matrix(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Row-vector action `v * R(theta)`.
#[inline]
pub fn rotate_row(v: Vec2, theta: f64) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(v.x * c + v.y * s, -v.x * s + v.y * c)
}

/// Start template rows before rotation.
fn start_rows(a1: f64, a2: f64, a3: f64, masses: &MassModel) -> [Vec2; 4] {
    let y3 = (-masses.m2 * a2 - masses.m4 * a2 + masses.m1 * a3) / masses.m3;
    [
        Vec2::new(0.0, -a3),
        Vec2::new(-a1, a2),
        Vec2::new(0.0, y3),
        Vec2::new(a1, a2),
    ]
}

/// End template rows.
fn end_rows(a4: f64, a5: f64, a6: f64, masses: &MassModel) -> [Vec2; 4] {
    let y4 = (-masses.m1 * a5 - masses.m3 * a5 + masses.m2 * a6) / masses.m4;
    [
        Vec2::new(a4, a5),
        Vec2::new(0.0, -a6),
        Vec2::new(-a4, a5),
        Vec2::new(0.0, y4),
    ]
}

/// Start boundary configuration: template rows right-multiplied by
/// `R(theta)`. The center of mass vanishes identically.
pub fn build_qstart(a1: f64, a2: f64, a3: f64, theta: f64, masses: &MassModel) -> Configuration {
    Configuration::new(start_rows(a1, a2, a3, masses).map(|r| rotate_row(r, theta)))
}

/// End boundary configuration (no rotation).
pub fn build_qend(a4: f64, a5: f64, a6: f64, masses: &MassModel) -> Configuration {
    Configuration::new(end_rows(a4, a5, a6, masses))
}

/// Successful membership outcome: recovered parameters and the residual
/// left after the least-squares fit onto the template.
#[derive(Debug, Clone, Copy)]
pub struct MembershipFit {
    pub params: [f64; 3],
    pub residual: f64,
}

pub const MEMBERSHIP_TOL: f64 = 1e-9;

fn fit_template(
    coords: &[f64; 8],
    columns: &[[f64; 8]; 3],
    tol: f64,
) -> Option<MembershipFit> {
    let a = DMatrix::from_fn(8, 3, |r, c| columns[c][r]);
    let b = DVector::from_row_slice(coords);
    let svd = a.clone().svd(true, true);
    let sol = svd.solve(&b, 1e-14).ok()?;
    let residual = (&a * &sol - &b).amax();
    let fit = MembershipFit {
        params: [sol[0], sol[1], sol[2]],
        residual,
    };
    (residual <= tol).then_some(fit)
}

/// Test whether `config` lies in the start subspace for `theta`. On
/// success returns the unique `(a1, a2, a3)` recovered by least squares.
pub fn membership_a(
    config: &Configuration,
    theta: f64,
    masses: &MassModel,
    tol: f64,
) -> Option<MembershipFit> {
    // undo the rotation, then fit the linear template
    let y: Vec<Vec2> = config
        .positions
        .iter()
        .map(|p| rotate_row(*p, -theta))
        .collect();
    let coords = [
        y[0].x, y[0].y, y[1].x, y[1].y, y[2].x, y[2].y, y[3].x, y[3].y,
    ];
    let m2 = masses.m2;
    let m4 = masses.m4;
    let (c_a2, c_a3) = ((-m2 - m4) / masses.m3, masses.m1 / masses.m3);
    let columns = [
        // d/da1, d/da2, d/da3 of the template coordinates
        [0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0, 0.0, c_a2, 0.0, 1.0],
        [0.0, -1.0, 0.0, 0.0, 0.0, c_a3, 0.0, 0.0],
    ];
    fit_template(&coords, &columns, tol)
}

/// Test whether `config` lies in the end subspace; mirror of
/// [`membership_a`] without the rotation.
pub fn membership_b(
    config: &Configuration,
    masses: &MassModel,
    tol: f64,
) -> Option<MembershipFit> {
    let p = &config.positions;
    let coords = [p[0].x, p[0].y, p[1].x, p[1].y, p[2].x, p[2].y, p[3].x, p[3].y];
    let (c_a5, c_a6) = ((-masses.m1 - masses.m3) / masses.m4, masses.m2 / masses.m4);
    let columns = [
        [1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, c_a5],
        [0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, c_a6],
    ];
    fit_template(&coords, &columns, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rotation_identities() {
        let id = rotation_matrix(0.0);
        assert_abs_diff_eq!((id - Matrix2::identity()).norm(), 0.0);
        let half = rotation_matrix(PI);
        assert_abs_diff_eq!((half - Matrix2::new(-1.0, 0.0, 0.0, -1.0)).norm(), 0.0, epsilon = 1e-15);
        for theta in [0.3, 1.7, 4.4] {
            let prod = rotation_matrix(theta) * rotation_matrix(-theta);
            assert_abs_diff_eq!((prod - Matrix2::identity()).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn qstart_reads_off_at_theta_zero() {
        let m = MassModel::equal();
        let q = build_qstart(1.0, 1.0, 2.0, 0.0, &m);
        let expect = [
            Vec2::new(0.0, -2.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
        ];
        for i in 0..4 {
            assert_abs_diff_eq!((q.positions[i] - expect[i]).norm(), 0.0);
        }
    }

    #[test]
    fn qend_reads_off() {
        let m = MassModel::equal();
        let q = build_qend(1.0, 1.0, 2.0, &m);
        let expect = [
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, -2.0),
            Vec2::new(-1.0, 1.0),
            Vec2::new(0.0, 0.0),
        ];
        for i in 0..4 {
            assert_abs_diff_eq!((q.positions[i] - expect[i]).norm(), 0.0);
        }
    }

    #[test]
    fn total_collision_at_zero_params() {
        let m = MassModel::equal();
        let q = build_qstart(0.0, 0.0, 0.0, 0.9, &m);
        for p in q.positions {
            assert_eq!(p, Vec2::zeros());
        }
    }

    #[test]
    fn centers_of_mass_vanish_identically() {
        let m = MassModel::new(1.0, 2.7).unwrap();
        for (a, theta) in [([0.3, -1.2, 0.8], 1.1), ([2.0, 0.4, -0.9], 5.3)] {
            let qs = build_qstart(a[0], a[1], a[2], theta, &m);
            let qe = build_qend(a[0], a[1], a[2], &m);
            assert_abs_diff_eq!(qs.center_of_mass(&m).norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(qe.center_of_mass(&m).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn membership_round_trips() {
        let m = MassModel::new(1.0, 0.7).unwrap();
        let theta = 2.1;
        let q = build_qstart(0.61, -1.13, 0.52, theta, &m);
        let fit = membership_a(&q, theta, &m, MEMBERSHIP_TOL).expect("in subspace");
        assert_abs_diff_eq!(fit.params[0], 0.61, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.params[1], -1.13, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.params[2], 0.52, epsilon = 1e-14);

        let qe = build_qend(0.2, 1.9, -0.4, &m);
        let fit = membership_b(&qe, &m, MEMBERSHIP_TOL).expect("in subspace");
        assert_abs_diff_eq!(fit.params[0], 0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.params[1], 1.9, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.params[2], -0.4, epsilon = 1e-14);
    }

    #[test]
    fn generic_configuration_rejected() {
        let m = MassModel::equal();
        let q = Configuration::new([
            Vec2::new(0.3, -1.2),
            Vec2::new(1.4, 0.7),
            Vec2::new(-0.8, 0.9),
            Vec2::new(-0.4, -0.6),
        ]);
        assert!(membership_a(&q, 1.0, &m, MEMBERSHIP_TOL).is_none());
        assert!(membership_b(&q, &m, MEMBERSHIP_TOL).is_none());

        // a rotated start configuration is not in B for generic theta
        let qs = build_qstart(0.61, 1.13, 0.52, 2.2, &m);
        assert!(membership_b(&qs, &m, MEMBERSHIP_TOL).is_none());
    }

    #[test]
    fn start_axis_symmetry() {
        // bodies 1 and 3 on the rotated axis; 2 and 4 mirror images across it
        let m = MassModel::new(1.0, 1.8).unwrap();
        let theta = 0.77 * PI;
        let q = build_qstart(0.61, 1.13, 0.52, theta, &m);
        let axis = rotate_row(Vec2::new(0.0, 1.0), theta);
        let normal = rotate_row(Vec2::new(1.0, 0.0), theta);
        assert_abs_diff_eq!(q.positions[0].dot(&normal), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(q.positions[2].dot(&normal), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            q.positions[1].dot(&axis),
            q.positions[3].dot(&axis),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            q.positions[1].dot(&normal),
            -q.positions[3].dot(&normal),
            epsilon = 1e-14
        );
    }

    #[test]
    fn rational_angle_normalizes() {
        let a = RotationAngle::from_rational(8, 10).unwrap();
        assert_eq!(a.rational, Some((4, 5)));
        assert_abs_diff_eq!(a.radians, 0.8 * PI, epsilon = 1e-15);
        assert!(!a.is_excluded());
        assert!(RotationAngle::from_rational(1, 2).unwrap().is_excluded());
        assert!(RotationAngle::from_rational(1, 1).unwrap().is_excluded());
        assert!(RotationAngle::from_rational(3, 2).unwrap().is_excluded());
        assert!(RotationAngle::from_rational(2, 1).is_err());
    }

    #[test]
    fn congruent_boundaries_for_matching_shapes() {
        // with (a1,a2,a3) = (a4,a5,a6) the end configuration is the start
        // configuration reflected and unrotated; distances match pairwise
        let m = MassModel::equal();
        let (a1, a2, a3) = (0.6676542303, 1.11499232, 0.5099504088);
        let qs = build_qstart(a1, a2, a3, 0.8 * PI, &m);
        let qe = build_qend(a1, a2, a3, &m);
        // end body i coincides (up to the rotation) with start body perm[i]
        let perm = [3, 0, 1, 2];
        for i in 0..4 {
            for j in (i + 1)..4 {
                let ds = (qs.positions[perm[i]] - qs.positions[perm[j]]).norm();
                let de = (qe.positions[i] - qe.positions[j]).norm();
                assert_abs_diff_eq!(ds, de, epsilon = 1e-12);
            }
        }
    }
}
