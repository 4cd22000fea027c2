//! Solver for the dual Minkowski problem with `q < 0`.
//!
//! The unknown is the vector `x = log h` of support numbers on the atom
//! directions of `μ`. The objective
//!
//! `Φ(x) = −(1/|μ|) Σ w_i x_i + log V̄_q([e^x])`
//!
//! is invariant under `x ↦ x + c`, and its gradient is
//! `∂Φ/∂x_i = −w_i/|μ| + c_i/Ṽ_q`, where `c_i` are the dual curvature masses of
//! the Wulff shape `[e^x]`. A stationary point therefore reproduces `μ` after the
//! rescaling that makes `Ṽ_q = |μ|`. The ascent direction is the gradient
//! mapped through a BFGS inverse-curvature estimate that starts from
//! `diag(|μ|/w_i)`, and every step passes an Armijo backtracking test on `Φ`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{
    angle_between, hausdorff_distance, hemisphere_witness, norm, polar, sphere_area, wulff_shape,
    DiscreteMeasure, Polytope,
};
use crate::measure::{dual_curvature, dual_volume, log_normalized_from_dual};
use crate::quadrature::{build_rule_with, integrate_interval, QuadratureRule, RuleKind};

/// Armijo sufficient-increase parameter.
const ARMIJO: f64 = 1e-4;
/// Smallest trial step before the line search gives up.
const MIN_STEP: f64 = 1e-14;
/// Largest change of any log-support in one trial step.
const MAX_LOG_STEP: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub q: f64,
    /// Target for the relative residual `max_i |c_i − w_i| / |μ|`.
    pub tol: f64,
    pub max_iter: usize,
    pub quad_level: usize,
    pub starts: usize,
    pub seed: u64,
    pub step0: f64,
    pub backtrack: f64,
    pub h_floor: f64,
    pub rule: RuleKind,
}

impl SolverConfig {
    pub fn new(q: f64) -> Self {
        Self { q, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.q < 0.0 && self.q.is_finite()) {
            return bad(format!("q must be negative, got {}", self.q));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 || self.starts == 0 {
            return bad("max_iter and starts must be positive".into());
        }
        if !(self.step0 > 0.0) || !(self.h_floor > 0.0) {
            return bad("step0 and h_floor must be positive".into());
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad(format!("backtrack must lie in (0, 1), got {}", self.backtrack));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            q: -1.0,
            tol: 1e-6,
            max_iter: 5000,
            quad_level: 2,
            starts: 1,
            seed: 0,
            step0: 1.0,
            backtrack: 0.5,
            h_floor: 1e-10,
            rule: RuleKind::Facet,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIter,
    InvalidMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub status: Status,
    pub iterations: usize,
    pub phi_trace: Vec<f64>,
    pub residual: f64,
    #[serde(rename = "bound_M")]
    pub bound_m: f64,
    pub bound_satisfied: bool,
}

/// State of one ascent iterate.
struct Eval {
    phi: f64,
    grad: Vec<f64>,
    dual_volume: f64,
}

impl Eval {
    fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.dual_volume > 0.0 && self.grad.iter().all(|g| g.is_finite())
    }
}

struct Problem<'a> {
    mu: &'a DiscreteMeasure,
    cfg: &'a SolverConfig,
    normals: Vec<crate::geom::Direction>,
    weights: Vec<f64>,
    total: f64,
}

impl Problem<'_> {
    fn body(&self, x: &[f64]) -> Result<Polytope> {
        wulff_shape(self.normals.clone(), x.iter().map(|v| v.exp()).collect())
    }

    fn eval(&self, x: &[f64]) -> Result<Eval> {
        let body = self.body(x)?;
        let rule = build_rule_with(self.cfg.rule, body.dim(), self.cfg.quad_level, &body)?;
        let dc = dual_curvature(&body, self.cfg.q, &rule)?;
        let v = dc.total;
        let data: f64 = self.weights.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() / self.total;
        let phi = -data + log_normalized_from_dual(v, self.cfg.q, self.mu.dim());
        let grad = self
            .weights
            .iter()
            .zip(&dc.masses)
            .map(|(w, c)| -w / self.total + c / v)
            .collect();
        Ok(Eval {
            phi,
            grad,
            dual_volume: v,
        })
    }
}

/// `Φ` and its gradient at log-supports `x` (one entry per atom of `μ`), on
/// the rule selected by `cfg`.
pub fn phi_and_gradient(mu: &DiscreteMeasure, x: &[f64], cfg: &SolverConfig) -> Result<(f64, Vec<f64>)> {
    if x.len() != mu.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} atoms but {} log-supports",
            mu.len(),
            x.len()
        )));
    }
    let prob = Problem {
        mu,
        cfg,
        normals: mu.directions(),
        weights: mu.weights(),
        total: mu.total(),
    };
    let e = prob.eval(x)?;
    Ok((e.phi, e.grad))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Initial log-supports for start `k`: zero for `k = 0`, otherwise uniform
/// perturbations in `[−1, 1]` from stream `k` of the configured seed.
fn initial_point(m: usize, seed: u64, start: usize) -> Vec<f64> {
    if start == 0 {
        return vec![0.0; m];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start as u64);
    (0..m).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// Maximizes `Φ_μ` from the default start and returns the body normalized to
/// `Ṽ_q = |μ|`.
pub fn solve(mu: &DiscreteMeasure, cfg: &SolverConfig) -> Result<(Polytope, SolverReport)> {
    solve_from(mu, cfg, 0)
}

/// As [`solve`], from start number `start` (see the initialization rule above).
pub fn solve_from(
    mu: &DiscreteMeasure,
    cfg: &SolverConfig,
    start: usize,
) -> Result<(Polytope, SolverReport)> {
    cfg.validate()?;
    if let Some(w) = hemisphere_witness(mu) {
        return Err(Error::HemisphereConcentrated {
            witness: w.into_inner(),
        });
    }
    let prob = Problem {
        mu,
        cfg,
        normals: mu.directions(),
        weights: mu.weights(),
        total: mu.total(),
    };
    let m = mu.len();
    let floor = cfg.h_floor.ln();
    let h0 = DMatrix::from_diagonal(&DVector::from_iterator(
        m,
        prob.weights.iter().map(|w| prob.total / w),
    ));
    let mut inv_hess = h0.clone();

    let mut x = initial_point(m, cfg.seed, start);
    let mut cur = prob.eval(&x)?;
    if !cur.is_finite() {
        return Err(Error::InvalidConfig(
            "objective is not finite at the initial point".into(),
        ));
    }
    let mut phi_trace = vec![cur.phi];
    let mut iterations = 0;
    let mut status = Status::MaxIter;
    while iterations < cfg.max_iter {
        if inf_norm(&cur.grad) <= cfg.tol {
            status = Status::Converged;
            break;
        }
        let g = DVector::from_column_slice(&cur.grad);
        let mut d = &inv_hess * &g;
        if g.dot(&d) <= 0.0 {
            inv_hess = h0.clone();
            d = &inv_hess * &g;
        }
        let slope = g.dot(&d);
        let dir = d.as_slice();
        let mut step = cfg.step0.min(MAX_LOG_STEP / inf_norm(dir));
        let accepted = loop {
            let mut trial: Vec<f64> = x
                .iter()
                .zip(dir)
                .map(|(xi, d)| (xi + step * d).max(floor))
                .collect();
            // Φ is shift invariant; keep the iterate centred
            let mean = trial.iter().sum::<f64>() / m as f64;
            trial.iter_mut().for_each(|t| *t = (*t - mean).max(floor));
            // trials whose evaluation breaks down count as rejected
            if let Ok(next) = prob.eval(&trial) {
                if next.is_finite() && next.phi >= cur.phi + ARMIJO * step * slope {
                    break Some((trial, next));
                }
            }
            step *= cfg.backtrack;
            if step < MIN_STEP {
                break None;
            }
        };
        match accepted {
            Some((trial, next)) => {
                let sv = DVector::from_iterator(m, trial.iter().zip(&x).map(|(a, b)| a - b));
                // curvature pair of −Φ
                let yv = DVector::from_iterator(m, cur.grad.iter().zip(&next.grad).map(|(a, b)| a - b));
                let sy = sv.dot(&yv);
                if sy > 1e-12 * sv.norm() * yv.norm() {
                    let rho = 1.0 / sy;
                    let left = DMatrix::identity(m, m) - (&sv * yv.transpose()) * rho;
                    inv_hess = &left * &inv_hess * left.transpose() + (&sv * sv.transpose()) * rho;
                }
                x = trial;
                cur = next;
                phi_trace.push(cur.phi);
                iterations += 1;
            }
            None => {
                status = if inf_norm(&cur.grad) <= 10.0 * cfg.tol {
                    Status::Converged
                } else {
                    Status::MaxIter
                };
                break;
            }
        }
    }
    if status == Status::MaxIter && inf_norm(&cur.grad) <= cfg.tol {
        status = Status::Converged;
    }

    let lambda = (prob.total / cur.dual_volume).powf(1.0 / cfg.q);
    let body = wulff_shape(prob.normals.clone(), x.iter().map(|v| v.exp() * lambda).collect())?;
    let rule = build_rule_with(cfg.rule, body.dim(), cfg.quad_level, &body)?;
    let res = residual(mu, &body, cfg.q, &rule)?;
    let bound = bound_check(&body, prob.total, cfg.q, &rule)?;
    Ok((
        body,
        SolverReport {
            status,
            iterations,
            phi_trace,
            residual: res,
            bound_m: bound.bound,
            bound_satisfied: bound.satisfied,
        },
    ))
}

fn check_same_normals(mu: &DiscreteMeasure, p: &Polytope) -> Result<()> {
    if mu.dim() != p.dim() {
        return Err(Error::ShapeMismatch(format!(
            "measure in dimension {}, body in dimension {}",
            mu.dim(),
            p.dim()
        )));
    }
    if mu.len() != p.num_facets() {
        return Err(Error::ShapeMismatch(format!(
            "{} atoms but {} facets",
            mu.len(),
            p.num_facets()
        )));
    }
    for (i, (a, v)) in mu.atoms().iter().zip(p.normals()).enumerate() {
        if angle_between(&a.v, v) > 1e-9 {
            return Err(Error::ShapeMismatch(format!(
                "atom {i} and facet normal {i} differ"
            )));
        }
    }
    Ok(())
}

/// `max_i |c_i − w_i| / |μ|` with `c_i` the dual curvature masses of `P`.
pub fn residual(mu: &DiscreteMeasure, p: &Polytope, q: f64, rule: &QuadratureRule) -> Result<f64> {
    check_same_normals(mu, p)?;
    let dc = dual_curvature(p, q, rule)?;
    let total = mu.total();
    Ok(mu
        .atoms()
        .iter()
        .zip(&dc.masses)
        .map(|(a, c)| (c - a.w).abs() / total)
        .fold(0.0, f64::max))
}

/// `m_0 = ∫_{S^{n−1}} (u·v)_+^{−q} du`, reduced to the polar angle about `v`:
/// `|S^{n−2}| ∫_0^{π/2} cos^{−q}θ sin^{n−2}θ dθ`.
pub fn m0(dim: usize, q: f64) -> f64 {
    let p = -q;
    let k = dim as i32 - 2;
    // φ = π/2 − θ = (π/2) s⁴ smooths the sin^p φ endpoint behaviour
    let half = std::f64::consts::FRAC_PI_2;
    let f = |s: f64| {
        let phi = half * s.powi(4);
        phi.sin().powf(p) * phi.cos().powi(k) * half * 4.0 * s.powi(3)
    };
    sphere_area(dim - 1) * integrate_interval(f, 0.0, 1.0, 64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub m0: f64,
    /// `M = (n c / m_0)^{−1/q}`.
    pub bound: f64,
    /// Largest vertex norm of the polar body.
    pub polar_radius: f64,
    pub satisfied: bool,
    /// `|Ṽ_q(P) − c| / c` on the given rule.
    pub volume_gap: f64,
}

/// Checks `P* ⊂ M B_n` for the a-priori radius `M` that holds for every body
/// with `Ṽ_q = c`.
pub fn bound_check(p: &Polytope, c: f64, q: f64, rule: &QuadratureRule) -> Result<BoundCheck> {
    let n = p.dim();
    let m0 = m0(n, q);
    let bound = (n as f64 * c / m0).powf(-1.0 / q);
    let pol = polar(p)?;
    let polar_radius = pol.vertices().iter().map(|x| norm(x)).fold(0.0, f64::max);
    let v = dual_volume(p, q, rule)?;
    Ok(BoundCheck {
        m0,
        bound,
        polar_radius,
        satisfied: polar_radius <= bound * (1.0 + 1e-9),
        volume_gap: (v - c).abs() / c,
    })
}

#[derive(Debug, Clone)]
pub struct UniquenessProbe {
    /// Largest pairwise Hausdorff distance between the solutions.
    pub max_distance: f64,
    pub solutions: Vec<(Polytope, SolverReport)>,
}

/// Solves from `cfg.starts` different initial points and measures how far apart
/// the solutions are.
pub fn uniqueness_probe(mu: &DiscreteMeasure, cfg: &SolverConfig) -> Result<UniquenessProbe> {
    cfg.validate()?;
    let solutions: Vec<(Polytope, SolverReport)> = (0..cfg.starts)
        .into_par_iter()
        .map(|k| solve_from(mu, cfg, k))
        .collect::<Result<_>>()?;
    let mut max_distance = 0.0f64;
    for i in 0..solutions.len() {
        for j in 0..i {
            max_distance = max_distance.max(hausdorff_distance(&solutions[i].0, &solutions[j].0)?.distance);
        }
    }
    Ok(UniquenessProbe {
        max_distance,
        solutions,
    })
}

#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub distance: f64,
    pub measure: DiscreteMeasure,
    pub solution: Polytope,
    pub report: SolverReport,
}

/// Computes `μ = C̃_q(P, ·)` (zero-mass facets dropped), solves for it and
/// returns the Hausdorff distance between `P` and the solution. `P` already
/// satisfies `Ṽ_q(P) = |μ|`, so no rescaling is involved.
pub fn round_trip(p: &Polytope, q: f64, cfg: &SolverConfig) -> Result<RoundTrip> {
    let rule = build_rule_with(cfg.rule, p.dim(), cfg.quad_level, p)?;
    let measure = dual_curvature(p, q, &rule)?.to_measure()?;
    let cfg = SolverConfig { q, ..cfg.clone() };
    let (solution, report) = solve(&measure, &cfg)?;
    let distance = hausdorff_distance(p, &solution)?.distance;
    Ok(RoundTrip {
        distance,
        measure,
        solution,
        report,
    })
}
