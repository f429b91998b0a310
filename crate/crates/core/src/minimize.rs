//! Two-step action minimization: conjugate-gradient descent over interior
//! nodes for a fixed boundary, and an outer search over the boundary
//! parameters, either jointly with the nodes (default) or by Nelder–Mead
//! on the inner minimum.

use crate::boundary::{BoundaryParams, RotationAngle};
use crate::error::Error;
use crate::masses::MassModel;
use crate::path::{action_gradient, discretized_action, DiscretePath};
use crate::path::{qend_jacobian, qstart_jacobian};
use crate::reference::{homographic_boundary_params, test_path_action};
use crate::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterStrategy {
    /// Descend over interior nodes and boundary parameters together.
    JointDescent,
    /// Derivative-free simplex over the boundary parameters with a full
    /// inner minimization per evaluation.
    NelderMead,
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizerSettings {
    /// Convergence threshold on the 2-norm of the active gradient.
    pub grad_tol: f64,
    pub max_inner_iterations: usize,
    /// Armijo sufficient-decrease coefficient.
    pub armijo_c1: f64,
    /// Simplex spread threshold for the Nelder–Mead outer loop.
    pub outer_simplex_tol: f64,
    pub max_outer_iterations: usize,
    /// Grid used during the search phase.
    pub segments_search: usize,
    /// Grid used for the final polish before shooting.
    pub segments_polish: usize,
    pub strategy: OuterStrategy,
    /// Abort if the boundary norm exceeds this bound; coercivity makes
    /// that a setup error rather than a feature of the landscape.
    pub divergence_bound: f64,
}

impl Default for MinimizerSettings {
    fn default() -> Self {
        Self {
            grad_tol: 1e-10,
            max_inner_iterations: 40_000,
            armijo_c1: 1e-4,
            outer_simplex_tol: 1e-12,
            max_outer_iterations: 400,
            segments_search: 512,
            segments_polish: 2048,
            strategy: OuterStrategy::JointDescent,
            divergence_bound: 50.0,
        }
    }
}

impl MinimizerSettings {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.grad_tol > 0.0 && self.outer_simplex_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "minimizer tolerances must be positive".into(),
            ));
        }
        if self.segments_search < 2 || self.segments_polish < 2 {
            return Err(Error::InvalidParameter(
                "grids need at least 2 segments".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a minimization run.
#[derive(Debug, Clone)]
pub struct MinimizationResult {
    pub path: DiscretePath,
    pub action: f64,
    pub params: BoundaryParams,
    pub converged: bool,
    pub grad_norm: f64,
    pub iterations: usize,
}

/// Flat optimization vector: interior node coordinates, optionally
/// followed by the six boundary parameters.
struct Workspace {
    theta: f64,
    masses: MassModel,
    t_horizon: f64,
    segments: usize,
    joint: bool,
}

impl Workspace {
    fn unpack(&self, x: &[f64], template: &DiscretePath) -> DiscretePath {
        let n = self.segments;
        let mut nodes = vec![[Vec2::zeros(); 4]; n + 1];
        for k in 1..n {
            for i in 0..4 {
                let base = 8 * (k - 1) + 2 * i;
                nodes[k][i] = Vec2::new(x[base], x[base + 1]);
            }
        }
        let params = if self.joint {
            let b = 8 * (n - 1);
            BoundaryParams([x[b], x[b + 1], x[b + 2], x[b + 3], x[b + 4], x[b + 5]])
        } else {
            template.params
        };
        DiscretePath::from_nodes(params, self.theta, &self.masses, nodes, self.t_horizon)
            .expect("node count fixed by construction")
    }

    fn pack(&self, path: &DiscretePath) -> Vec<f64> {
        let n = self.segments;
        let mut x = vec![0.0; 8 * (n - 1) + if self.joint { 6 } else { 0 }];
        for k in 1..n {
            for i in 0..4 {
                let base = 8 * (k - 1) + 2 * i;
                x[base] = path.nodes[k][i].x;
                x[base + 1] = path.nodes[k][i].y;
            }
        }
        if self.joint {
            let b = 8 * (n - 1);
            x[b..b + 6].copy_from_slice(&path.params.0);
        }
        x
    }

    fn eval(&self, x: &[f64], template: &DiscretePath) -> Option<(f64, Vec<f64>)> {
        let path = self.unpack(x, template);
        if self.joint && path.params.norm() > 1e6 {
            return None;
        }
        let f = discretized_action(&path, &self.masses).ok()?;
        let g = action_gradient(&path, &self.masses).ok()?;
        let n = self.segments;
        let mut grad = vec![0.0; x.len()];
        for k in 0..n - 1 {
            for i in 0..4 {
                let base = 8 * k + 2 * i;
                grad[base] = g.interior[k][i].x;
                grad[base + 1] = g.interior[k][i].y;
            }
        }
        if self.joint {
            let b = 8 * (n - 1);
            grad[b..b + 6].copy_from_slice(&g.boundary);
        }
        Some((f, grad))
    }

    /// Inverse of the kinetic-energy block of the Hessian: a tridiagonal
    /// solve per body and coordinate over the interior nodes, plus a
    /// diagonal estimate for the boundary block. Preconditioning the
    /// conjugate-gradient directions with it removes the `O(n^2)` grid
    /// stiffness of the kinetic term.
    fn precondition(&self, g: &[f64], out: &mut [f64]) {
        let n = self.segments;
        let m = n - 1;
        let dt = self.t_horizon / n as f64;
        let mut c_prime = vec![0.0; m];
        let mut d_prime = vec![0.0; m];
        for i in 0..4 {
            let scale = self.masses.mass(i) / dt;
            for coord in 0..2 {
                // Thomas algorithm on tridiag(-1, 2, -1) * scale
                for k in 0..m {
                    let idx = 8 * k + 2 * i + coord;
                    let rhs = g[idx] / scale;
                    if k == 0 {
                        c_prime[0] = -0.5;
                        d_prime[0] = rhs / 2.0;
                    } else {
                        let denom = 2.0 + c_prime[k - 1];
                        c_prime[k] = -1.0 / denom;
                        d_prime[k] = (rhs + d_prime[k - 1]) / denom;
                    }
                }
                let mut prev = d_prime[m - 1];
                out[8 * (m - 1) + 2 * i + coord] = prev;
                for k in (0..m - 1).rev() {
                    prev = d_prime[k] - c_prime[k] * prev;
                    out[8 * k + 2 * i + coord] = prev;
                }
            }
        }
        if self.joint {
            let js = qstart_jacobian(self.theta, &self.masses);
            let je = qend_jacobian(&self.masses);
            let b = 8 * m;
            for p in 0..3 {
                let curv_s: f64 = (0..4)
                    .map(|i| self.masses.mass(i) * js[p][i].norm_squared() / dt)
                    .sum();
                let curv_e: f64 = (0..4)
                    .map(|i| self.masses.mass(i) * je[p][i].norm_squared() / dt)
                    .sum();
                out[b + p] = g[b + p] / curv_s.max(1e-12);
                out[b + 3 + p] = g[b + 3 + p] / curv_e.max(1e-12);
            }
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned Polak–Ribière conjugate gradient with Armijo
/// backtracking. Returns `(converged, iterations, grad_norm)` and leaves
/// the final point in `x`.
fn ncg(
    ws: &Workspace,
    template: &DiscretePath,
    x: &mut Vec<f64>,
    settings: &MinimizerSettings,
) -> Result<(bool, usize, f64, f64), Error> {
    let (mut f, mut g) = ws
        .eval(x, template)
        .ok_or_else(|| Error::InvalidParameter("seed path evaluates to a collision".into()))?;
    let dim = x.len();
    let mut z = vec![0.0; dim];
    ws.precondition(&g, &mut z);
    let mut d: Vec<f64> = z.iter().map(|v| -v).collect();
    let mut gz = dot(&g, &z);
    let mut alpha_prev = 1.0;
    let mut x_try = vec![0.0; dim];
    let restart_every = dim.min(200);

    for iter in 0..settings.max_inner_iterations {
        let gnorm = norm2(&g);
        if gnorm <= settings.grad_tol {
            return Ok((true, iter, gnorm, f));
        }

        let mut gtd = dot(&g, &d);
        if gtd >= 0.0 {
            d.iter_mut().zip(&z).for_each(|(di, zi)| *di = -zi);
            gtd = dot(&g, &d);
        }

        // Armijo backtracking; collision evaluations count as +inf
        let mut alpha = (alpha_prev * 2.5).min(1e3);
        let mut accepted = None;
        let noise_floor = 1e-15 * (1.0 + f.abs());
        for _ in 0..60 {
            for i in 0..dim {
                x_try[i] = x[i] + alpha * d[i];
            }
            if let Some((f_new, g_new)) = ws.eval(&x_try, template) {
                if f_new <= f + settings.armijo_c1 * alpha * gtd {
                    accepted = Some((f_new, g_new));
                    break;
                }
                // descent direction but the decrease drowned in roundoff:
                // accept on gradient reduction instead
                if (alpha * gtd).abs() < noise_floor && norm2(&g_new) < gnorm {
                    accepted = Some((f_new, g_new));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((f_new, g_new)) = accepted else {
            // no usable step along this direction; restart once from the
            // preconditioned steepest descent, then give up
            let steepest: Vec<f64> = z.iter().map(|v| -v).collect();
            if d != steepest {
                d = steepest;
                alpha_prev = 1e-3;
                continue;
            }
            return Ok((gnorm <= settings.grad_tol, iter, gnorm, f));
        };
        alpha_prev = alpha;

        for i in 0..dim {
            x[i] += alpha * d[i];
        }
        let mut z_new = vec![0.0; dim];
        ws.precondition(&g_new, &mut z_new);
        let gz_new = dot(&g_new, &z_new);
        // Polak-Ribiere+ with preconditioning
        let mut beta = (gz_new - dot(&g_new, &z)) / gz;
        if beta < 0.0 || (iter + 1) % restart_every == 0 {
            beta = 0.0;
        }
        for i in 0..dim {
            d[i] = -z_new[i] + beta * d[i];
        }
        f = f_new;
        g = g_new;
        z = z_new;
        gz = gz_new;
    }
    let gnorm = norm2(&g);
    Ok((gnorm <= settings.grad_tol, settings.max_inner_iterations, gnorm, f))
}

/// Minimize the action over interior nodes for a fixed boundary, seeded
/// from the constant-velocity test path.
pub fn minimize_inner(
    params: BoundaryParams,
    theta: &RotationAngle,
    masses: &MassModel,
    t_horizon: f64,
    settings: &MinimizerSettings,
) -> Result<MinimizationResult, Error> {
    let seed = DiscretePath::linear_seed(
        params,
        theta.radians,
        masses,
        settings.segments_search,
        t_horizon,
    )?;
    minimize_inner_from(&seed, masses, settings)
}

/// Inner minimization from an explicit seed path.
pub fn minimize_inner_from(
    seed: &DiscretePath,
    masses: &MassModel,
    settings: &MinimizerSettings,
) -> Result<MinimizationResult, Error> {
    settings.validate()?;
    let ws = Workspace {
        theta: seed.theta,
        masses: *masses,
        t_horizon: seed.t_horizon,
        segments: seed.segments(),
        joint: false,
    };
    let mut x = ws.pack(seed);
    let (converged, iterations, grad_norm, action) = ncg(&ws, seed, &mut x, settings)?;
    let path = ws.unpack(&x, seed);
    Ok(MinimizationResult {
        action,
        params: path.params,
        path,
        converged,
        grad_norm,
        iterations,
    })
}

fn joint_descent(
    seed: &DiscretePath,
    masses: &MassModel,
    settings: &MinimizerSettings,
) -> Result<MinimizationResult, Error> {
    let ws = Workspace {
        theta: seed.theta,
        masses: *masses,
        t_horizon: seed.t_horizon,
        segments: seed.segments(),
        joint: true,
    };
    let mut x = ws.pack(seed);
    let (converged, iterations, grad_norm, action) = ncg(&ws, seed, &mut x, settings)?;
    let path = ws.unpack(&x, seed);
    if path.params.norm() > settings.divergence_bound {
        return Err(Error::Divergence {
            bound: settings.divergence_bound,
        });
    }
    Ok(MinimizationResult {
        action,
        params: path.params,
        path,
        converged,
        grad_norm,
        iterations,
    })
}

fn nelder_mead_outer(
    theta: &RotationAngle,
    masses: &MassModel,
    a_init: BoundaryParams,
    t_horizon: f64,
    settings: &MinimizerSettings,
) -> Result<MinimizationResult, Error> {
    let inner_settings = MinimizerSettings {
        max_inner_iterations: settings.max_inner_iterations.min(4000),
        grad_tol: settings.grad_tol.max(1e-8),
        ..*settings
    };
    let eval = |a: &[f64; 6]| -> f64 {
        let params = BoundaryParams(*a);
        if params.norm() > settings.divergence_bound {
            return f64::INFINITY;
        }
        minimize_inner(params, theta, masses, t_horizon, &inner_settings)
            .map(|r| r.action)
            .unwrap_or(f64::INFINITY)
    };

    let mut simplex: Vec<[f64; 6]> = vec![a_init.0];
    for p in 0..6 {
        let mut v = a_init.0;
        v[p] += 0.05 * v[p].abs().max(0.2);
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(&eval).collect();

    for _ in 0..settings.max_outer_iterations {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let sorted: Vec<[f64; 6]> = order.iter().map(|&i| simplex[i]).collect();
        let sorted_vals: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        simplex = sorted;
        values = sorted_vals;

        if values[6] - values[0] < settings.outer_simplex_tol.max(1e-10) {
            break;
        }

        let mut centroid = [0.0; 6];
        for v in simplex.iter().take(6) {
            for p in 0..6 {
                centroid[p] += v[p] / 6.0;
            }
        }
        let worst = simplex[6];
        let mut reflect = [0.0; 6];
        for p in 0..6 {
            reflect[p] = centroid[p] + (centroid[p] - worst[p]);
        }
        let fr = eval(&reflect);
        if fr < values[0] {
            let mut expand = [0.0; 6];
            for p in 0..6 {
                expand[p] = centroid[p] + 2.0 * (centroid[p] - worst[p]);
            }
            let fe = eval(&expand);
            if fe < fr {
                simplex[6] = expand;
                values[6] = fe;
            } else {
                simplex[6] = reflect;
                values[6] = fr;
            }
        } else if fr < values[5] {
            simplex[6] = reflect;
            values[6] = fr;
        } else {
            let mut contract = [0.0; 6];
            for p in 0..6 {
                contract[p] = centroid[p] + 0.5 * (worst[p] - centroid[p]);
            }
            let fc = eval(&contract);
            if fc < values[6] {
                simplex[6] = contract;
                values[6] = fc;
            } else {
                for k in 1..7 {
                    for p in 0..6 {
                        simplex[k][p] = simplex[0][p] + 0.5 * (simplex[k][p] - simplex[0][p]);
                    }
                    values[k] = eval(&simplex[k]);
                }
            }
        }
    }

    let best = (0..7)
        .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
        .unwrap();
    minimize_inner(
        BoundaryParams(simplex[best]),
        theta,
        masses,
        t_horizon,
        settings,
    )
}

/// Minimize over the boundary parameters and the path together. Runs every
/// provided seed and returns all local minimizers sorted by action (the
/// first entry is the primary, lowest-action one).
pub fn minimize_outer_multi(
    theta: &RotationAngle,
    masses: &MassModel,
    seeds: &[BoundaryParams],
    t_horizon: f64,
    settings: &MinimizerSettings,
) -> Result<Vec<MinimizationResult>, Error> {
    theta.ensure_admissible()?;
    settings.validate()?;
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no outer seeds provided".into()));
    }
    let mut results = Vec::new();
    for &a in seeds {
        let result = match settings.strategy {
            OuterStrategy::JointDescent => {
                let seed = DiscretePath::linear_seed(
                    a,
                    theta.radians,
                    masses,
                    settings.segments_search,
                    t_horizon,
                )?;
                let coarse = joint_descent(&seed, masses, settings)?;
                if settings.segments_polish > settings.segments_search {
                    let refined = coarse.path.resampled(settings.segments_polish);
                    joint_descent(&refined, masses, settings)?
                } else {
                    coarse
                }
            }
            OuterStrategy::NelderMead => {
                nelder_mead_outer(theta, masses, a, t_horizon, settings)?
            }
        };
        results.push(result);
    }
    results.sort_by(|a, b| a.action.partial_cmp(&b.action).unwrap());
    Ok(results)
}

/// Default outer minimization: joint descent from the given seed (or the
/// published test vectors plus the homographic boundary when none given).
pub fn minimize_outer(
    theta: &RotationAngle,
    masses: &MassModel,
    a_init: Option<BoundaryParams>,
    t_horizon: f64,
    settings: &MinimizerSettings,
) -> Result<MinimizationResult, Error> {
    let seeds = match a_init {
        Some(a) => vec![a],
        None => default_outer_seeds(theta.radians, masses.mu, t_horizon),
    };
    let results = minimize_outer_multi(theta, masses, &seeds, t_horizon, settings)?;
    Ok(results.into_iter().next().expect("at least one seed"))
}

/// Warm-start candidates: the published test vectors plus the homographic
/// boundary shape when available.
pub fn default_outer_seeds(theta: f64, mu: f64, t_horizon: f64) -> Vec<BoundaryParams> {
    let mut seeds = crate::reference::published_test_params();
    if let Ok(h) = homographic_boundary_params(theta, mu, t_horizon) {
        seeds.push(h);
    }
    seeds
}

/// Kinetic lower bound on the inner minimum for boundary vectors of
/// increasing norm; a diagnostic for the coercive growth of the outer
/// landscape.
pub fn coercivity_probe(
    theta: &RotationAngle,
    masses: &MassModel,
    radius_schedule: &[f64],
    t_horizon: f64,
) -> Result<Vec<(f64, f64)>, Error> {
    theta.ensure_admissible()?;
    // fixed direction set: coordinate axes and a few mixed diagonals
    let mut directions: Vec<[f64; 6]> = Vec::new();
    for p in 0..6 {
        let mut d = [0.0; 6];
        d[p] = 1.0;
        directions.push(d);
        d[p] = -1.0;
        directions.push(d);
    }
    directions.push([1.0; 6].map(|v: f64| v / 6.0_f64.sqrt()));
    directions.push([1.0, -1.0, 1.0, -1.0, 1.0, -1.0].map(|v: f64| v / 6.0_f64.sqrt()));

    let bound = |a: &BoundaryParams| -> f64 {
        let (a1, a2, a3) = a.start_triple();
        let (a4, a5, a6) = a.end_triple();
        let qs = crate::boundary::build_qstart(a1, a2, a3, theta.radians, masses);
        let qe = crate::boundary::build_qend(a4, a5, a6, masses);
        (0..4)
            .map(|i| {
                masses.mass(i) * (qe.positions[i] - qs.positions[i]).norm_squared()
                    / (2.0 * t_horizon)
            })
            .sum()
    };

    Ok(radius_schedule
        .iter()
        .map(|&r| {
            let worst = directions
                .iter()
                .map(|d| {
                    let a = BoundaryParams([
                        r * d[0],
                        r * d[1],
                        r * d[2],
                        r * d[3],
                        r * d[4],
                        r * d[5],
                    ]);
                    bound(&a)
                })
                .fold(f64::INFINITY, f64::min);
            (r, worst)
        })
        .collect())
}

/// Reference upper bound used by tests and the CLI: the test-path action
/// for the same boundary.
pub fn test_path_upper_bound(
    params: &BoundaryParams,
    theta: f64,
    mu: f64,
    t_horizon: f64,
) -> Result<f64, Error> {
    test_path_action(theta, mu, params, t_horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::equal_mass_test_params;
    use std::f64::consts::PI;

    fn fast_settings(n: usize) -> MinimizerSettings {
        MinimizerSettings {
            segments_search: n,
            segments_polish: n,
            grad_tol: 1e-9,
            max_inner_iterations: 8000,
            ..Default::default()
        }
    }

    #[test]
    fn inner_beats_test_path() {
        let theta = RotationAngle::from_rational(4, 5).unwrap();
        let m = MassModel::equal();
        let a = equal_mass_test_params();
        let settings = fast_settings(64);
        let result = minimize_inner(a, &theta, &m, 1.0, &settings).unwrap();
        let upper = test_path_upper_bound(&a, theta.radians, 1.0, 1.0).unwrap();
        assert!(
            result.action < upper,
            "inner minimum {} not below the test path {}",
            result.action,
            upper
        );
    }

    #[test]
    fn inner_monotone_decrease_and_fixed_point() {
        let theta = RotationAngle::from_rational(4, 5).unwrap();
        let m = MassModel::equal();
        let settings = fast_settings(48);
        let r1 = minimize_inner(equal_mass_test_params(), &theta, &m, 1.0, &settings).unwrap();
        // restart from the converged path: action must not decrease further
        let r2 = minimize_inner_from(&r1.path, &m, &settings).unwrap();
        assert!(r2.action <= r1.action + 1e-12);
        assert!(r1.action - r2.action < 1e-8);
    }

    #[test]
    fn excluded_angles_rejected() {
        let m = MassModel::equal();
        let theta = RotationAngle::from_rational(1, 2).unwrap();
        let err = minimize_outer(&theta, &m, None, 1.0, &fast_settings(32));
        assert!(matches!(err, Err(Error::ExcludedAngle { .. })));
    }

    #[test]
    fn coercivity_probe_grows() {
        let theta = RotationAngle::from_rational(4, 5).unwrap();
        let m = MassModel::equal();
        let table = coercivity_probe(&theta, &m, &[0.0, 1.0, 2.0, 5.0, 10.0, 20.0], 1.0).unwrap();
        assert_eq!(table[0].1, 0.0);
        for w in table.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
        // at least linear growth in the scale from radius 1 to 10
        assert!(table[5].1 >= 10.0 * table[1].1.max(1e-12));
        let bad = RotationAngle::from_rational(1, 2).unwrap();
        assert!(coercivity_probe(&bad, &m, &[1.0], 1.0).is_err());
    }

    #[test]
    fn joint_descent_recovers_published_minimizer_coarsely() {
        // at a modest grid the boundary parameters land near the published
        // equal-mass minimizer
        let theta = RotationAngle::from_rational(4, 5).unwrap();
        let m = MassModel::equal();
        let settings = MinimizerSettings {
            segments_search: 96,
            segments_polish: 96,
            grad_tol: 1e-9,
            max_inner_iterations: 12000,
            ..Default::default()
        };
        let result =
            minimize_outer(&theta, &m, Some(equal_mass_test_params()), 1.0, &settings).unwrap();
        let want = equal_mass_test_params().0;
        for p in 0..6 {
            assert!(
                (result.params.0[p] - want[p]).abs() < 5e-3,
                "param {p}: {} vs {}",
                result.params.0[p],
                want[p]
            );
        }
    }
}
