//! Dual volumes and dual curvature measures of polytopes, the functional `Φ_μ`,
//! and the smooth planar density used to cross-check them.
//!
//! For a polytope with facet normals `v_i` the `q`-th dual curvature measure is
//! `Σ c_i δ_{v_i}` with `c_i = (1/n) ∫_{cell_i} ρ^q du`, where `cell_i` is the
//! set of radial directions hitting facet `i`. Its total mass is the dual volume
//! `Ṽ_q = (1/n) ∫ ρ^q du`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{sphere_area, unit_ball_volume, DiscreteMeasure, Polytope};
use crate::quadrature::{build_rule_with, QuadratureRule, RuleKind};

fn check_rule(p: &Polytope, rule: &QuadratureRule) -> Result<()> {
    if rule.dim != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: rule.dim,
        });
    }
    if rule.num_facets != p.num_facets() {
        return Err(Error::ShapeMismatch(format!(
            "rule built for {} facets, body has {}",
            rule.num_facets,
            p.num_facets()
        )));
    }
    Ok(())
}

/// `Σ_k w_k ρ(u_k)^q`, i.e. `∫ ρ^q du` on the rule.
fn radial_power_integral(p: &Polytope, q: f64, rule: &QuadratureRule) -> f64 {
    (0..rule.len())
        .map(|k| rule.weights[k] * rule.radial_at(p, k).powf(q))
        .sum()
}

/// `Ṽ_q(P) = (1/n) ∫ ρ_P^q du`.
pub fn dual_volume(p: &Polytope, q: f64, rule: &QuadratureRule) -> Result<f64> {
    check_rule(p, rule)?;
    Ok(radial_power_integral(p, q, rule) / p.dim() as f64)
}

/// `V̄_q(P) = ((1/(nω_n)) ∫ ρ^q du)^{1/q}`, or `exp((1/(nω_n)) ∫ log ρ du)` at `q = 0`.
pub fn normalized_dual_volume(p: &Polytope, q: f64, rule: &QuadratureRule) -> Result<f64> {
    check_rule(p, rule)?;
    let area = sphere_area(p.dim());
    if q == 0.0 {
        let s: f64 = (0..rule.len())
            .map(|k| rule.weights[k] * rule.radial_at(p, k).ln())
            .sum();
        Ok((s / area).exp())
    } else {
        Ok((radial_power_integral(p, q, rule) / area).powf(1.0 / q))
    }
}

/// `log V̄_q` expressed through `Ṽ_q` (valid for `q != 0`).
pub fn log_normalized_from_dual(dual_volume: f64, q: f64, dim: usize) -> f64 {
    (dual_volume.ln() - unit_ball_volume(dim).ln()) / q
}

/// The discrete measure `C̃_q(P, ·) = Σ c_i δ_{v_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualCurvature {
    pub body: Polytope,
    pub q: f64,
    pub masses: Vec<f64>,
    pub total: f64,
    /// Mass carried by quadrature nodes whose cell could not be resolved
    /// (3D depth cap). Each `c_i` is uncertain by at most this amount.
    pub rule_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualCurvatureRecord {
    pub q: f64,
    pub masses: Vec<f64>,
    pub total: f64,
    pub rule_error: f64,
}

impl DualCurvature {
    pub fn record(&self) -> DualCurvatureRecord {
        DualCurvatureRecord {
            q: self.q,
            masses: self.masses.clone(),
            total: self.total,
            rule_error: self.rule_error,
        }
    }

    /// The measure as atoms on the body's normals, skipping zero-mass facets.
    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        let (dirs, weights): (Vec<_>, Vec<_>) = self
            .body
            .normals()
            .iter()
            .zip(&self.masses)
            .filter(|(_, &c)| c > 0.0)
            .map(|(v, &c)| (v.clone(), c))
            .unzip();
        DiscreteMeasure::from_parts(dirs, weights)
    }
}

/// Per-facet masses `c_i = (1/n) Σ_{k : a_k = i} w_k ρ(u_k)^q`; inactive facets get 0.
pub fn dual_curvature(p: &Polytope, q: f64, rule: &QuadratureRule) -> Result<DualCurvature> {
    check_rule(p, rule)?;
    let n = p.dim() as f64;
    let mut masses = vec![0.0; p.num_facets()];
    let mut rule_error = 0.0;
    for k in 0..rule.len() {
        let c = rule.weights[k] * rule.radial_at(p, k).powf(q) / n;
        masses[rule.cells[k]] += c;
        if rule.mixed[k] {
            rule_error += c;
        }
    }
    let total = masses.iter().sum();
    Ok(DualCurvature {
        body: p.clone(),
        q,
        masses,
        total,
        rule_error,
    })
}

/// `λP`.
pub fn scale_body(p: &Polytope, lambda: f64) -> Result<Polytope> {
    p.scaled(lambda)
}

/// Builds a fresh rule for `P` and returns `(Ṽ_q, masses)`.
pub fn evaluate(p: &Polytope, q: f64, level: usize) -> Result<(f64, Vec<f64>)> {
    evaluate_with(RuleKind::Geodesic, p, q, level)
}

pub fn evaluate_with(kind: RuleKind, p: &Polytope, q: f64, level: usize) -> Result<(f64, Vec<f64>)> {
    let rule = build_rule_with(kind, p.dim(), level, p)?;
    let dc = dual_curvature(p, q, &rule)?;
    Ok((dc.total, dc.masses))
}

/// `Φ_μ(P) = −(1/|μ|) Σ w_i log h_P(v_i) + log V̄_q(P)`.
pub fn phi_functional(mu: &DiscreteMeasure, p: &Polytope, q: f64, rule: &QuadratureRule) -> Result<f64> {
    if mu.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: mu.dim(),
        });
    }
    let total = mu.total();
    let data: f64 = mu
        .atoms()
        .iter()
        .map(|a| a.w * p.support_value(&a.v).ln())
        .sum::<f64>()
        / total;
    Ok(-data + normalized_dual_volume(p, q, rule)?.ln())
}

/// A `C²` support function on the circle, parametrized by the normal angle.
pub trait SupportCurve {
    fn h(&self, theta: f64) -> f64;
    fn dh(&self, theta: f64) -> f64;
    fn d2h(&self, theta: f64) -> f64;
}

/// Disk of radius `r` centred at the origin.
#[derive(Debug, Clone, Copy)]
pub struct Disk {
    pub r: f64,
}

impl SupportCurve for Disk {
    fn h(&self, _: f64) -> f64 {
        self.r
    }
    fn dh(&self, _: f64) -> f64 {
        0.0
    }
    fn d2h(&self, _: f64) -> f64 {
        0.0
    }
}

/// Ellipse `x²/a² + y²/b² <= 1`, with `h(θ) = sqrt(a² cos²θ + b² sin²θ)`.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub a: f64,
    pub b: f64,
}

impl Ellipse {
    /// Radial function at direction angle `phi`.
    pub fn radial(&self, phi: f64) -> f64 {
        let (c, s) = (phi.cos(), phi.sin());
        1.0 / ((c / self.a).powi(2) + (s / self.b).powi(2)).sqrt()
    }
}

impl SupportCurve for Ellipse {
    fn h(&self, t: f64) -> f64 {
        let (c, s) = (t.cos(), t.sin());
        (self.a * self.a * c * c + self.b * self.b * s * s).sqrt()
    }
    fn dh(&self, t: f64) -> f64 {
        let k = self.b * self.b - self.a * self.a;
        k * t.sin() * t.cos() / self.h(t)
    }
    fn d2h(&self, t: f64) -> f64 {
        let k = self.b * self.b - self.a * self.a;
        let h = self.h(t);
        let g = k * t.sin() * t.cos();
        (k * (2.0 * t).cos() * h - g * g / h) / (h * h)
    }
}

/// Density of `C̃_q(K, ·)` with respect to arc length on the circle:
/// `(1/2) h (h'² + h²)^{(q−2)/2} (h'' + h)`.
pub fn smooth_density<C: SupportCurve + ?Sized>(curve: &C, theta: f64, q: f64) -> Result<f64> {
    let h = curve.h(theta);
    let dh = curve.dh(theta);
    let radius_of_curvature = curve.d2h(theta) + h;
    if !(radius_of_curvature > 0.0) || !(h > 0.0) {
        return Err(Error::NonConvexData {
            theta,
            value: radius_of_curvature,
        });
    }
    Ok(0.5 * h * (dh * dh + h * h).powf((q - 2.0) / 2.0) * radius_of_curvature)
}

/// Outcome of a finite-difference test of the log-Wulff variational formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalCheck {
    /// Central difference of `log V̄_q` along `h_i e^{t g_i}`.
    pub lhs: f64,
    /// `(1/Ṽ_q) Σ g_i c_i`.
    pub rhs: f64,
    pub gap: f64,
}

/// Compares `d/dt log V̄_q([h e^{t g}])` at `t = 0` (central difference with
/// step `t`) against `(1/Ṽ_q) Σ g_i c_i`. `g` is given at the facet normals.
pub fn variational_check(p: &Polytope, q: f64, g: &[f64], t: f64, level: usize) -> Result<VariationalCheck> {
    variational_check_with(RuleKind::Geodesic, p, q, g, t, level)
}

/// As [`variational_check`], with every evaluation on a rule of the given kind.
pub fn variational_check_with(
    kind: RuleKind,
    p: &Polytope,
    q: f64,
    g: &[f64],
    t: f64,
    level: usize,
) -> Result<VariationalCheck> {
    if g.len() != p.num_facets() {
        return Err(Error::ShapeMismatch(format!(
            "{} perturbation values for {} facets",
            g.len(),
            p.num_facets()
        )));
    }
    if q == 0.0 {
        return Err(Error::InvalidConfig("variational check needs q != 0".into()));
    }
    let log_vbar = |s: f64| -> Result<f64> {
        let h: Vec<f64> = p
            .supports()
            .iter()
            .zip(g)
            .map(|(h, gi)| h * (s * gi).exp())
            .collect();
        let body = p.with_supports(h)?;
        let (v, _) = evaluate_with(kind, &body, q, level)?;
        Ok(log_normalized_from_dual(v, q, p.dim()))
    };
    let lhs = (log_vbar(t)? - log_vbar(-t)?) / (2.0 * t);
    let (v, masses) = evaluate_with(kind, p, q, level)?;
    let rhs = g.iter().zip(&masses).map(|(gi, c)| gi * c).sum::<f64>() / v;
    Ok(VariationalCheck {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}
