//! Quadrature on the unit sphere adapted to the radial facet cells of a polytope.
//!
//! In the plane the cells are arcs between consecutive vertex directions and are
//! integrated exactly cell by cell with composite Gauss-Legendre panels. On S²
//! an icosahedral geodesic mesh is refined uniformly, then triangles whose
//! corners disagree on the owning facet are split further. Cells are radial
//! projections of convex facets and hence spherically convex, so a triangle
//! whose three corners share a cell lies entirely inside it.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{cross3, dot, norm, sphere_area, Direction, Polytope};

/// Gauss-Legendre nodes per planar panel.
pub const GAUSS_ORDER: usize = 16;

/// Maximum total subdivision depth for triangles straddling a cell boundary.
pub const DEPTH_CAP: usize = 12;

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * pn - p0) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gauss16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GAUSS_ORDER))
}

/// Composite Gauss-Legendre integral of `f` over `[a, b]` with `panels` panels.
pub fn integrate_interval<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss16();
    let len = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * len;
        let mid = lo + 0.5 * len;
        let half = 0.5 * len;
        total += x
            .iter()
            .zip(w)
            .map(|(&t, &wt)| wt * f(mid + half * t))
            .sum::<f64>()
            * half;
    }
    total
}

/// One planar cell: facet `facet` owns the directions with angle in `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arc {
    pub facet: usize,
    /// In `[0, 2π)`.
    pub start: f64,
    /// `start < end < start + 2π`.
    pub end: f64,
}

impl Arc {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

/// Exact partition of the circle into facet cells. Inactive facets own no arc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArcDecomposition {
    pub arcs: Vec<Arc>,
}

fn angle_of(x: &[f64]) -> f64 {
    let a = x[1].atan2(x[0]);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Arc endpoints are the angular coordinates of the vertices of `P`.
pub fn arc_decomposition(p: &Polytope) -> Result<ArcDecomposition> {
    if p.dim() != 2 {
        return Err(Error::UnsupportedDimension {
            op: "arc_decomposition",
            dim: p.dim(),
        });
    }
    let ring = p.ring();
    let verts = p.vertices();
    let r = ring.len();
    let arcs = (0..r)
        .map(|k| {
            // facet ring[k] lies between vertex k-1 and vertex k
            let prev = &verts[(k + r - 1) % r];
            let next = &verts[k];
            let start = angle_of(prev);
            let mut end = angle_of(next);
            if end <= start {
                end += 2.0 * PI;
            }
            Arc {
                facet: ring[k],
                start,
                end,
            }
        })
        .collect();
    Ok(ArcDecomposition { arcs })
}

/// Nodes, weights and owning facet of every node.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureRule {
    pub dim: usize,
    pub nodes: Vec<Direction>,
    pub weights: Vec<f64>,
    pub cells: Vec<usize>,
    /// Number of facets of the body the rule was built for.
    #[serde(skip)]
    pub num_facets: usize,
    /// Nodes standing for triangles that still straddled a cell boundary at the depth cap.
    #[serde(skip)]
    pub mixed: Vec<bool>,
    /// Total area of those triangles.
    #[serde(skip)]
    pub mixed_area: f64,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Area assigned to each facet.
    pub fn cell_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_facets];
        for (&c, &w) in self.cells.iter().zip(&self.weights) {
            out[c] += w;
        }
        out
    }

    /// True when some boundary triangles reached the depth cap unresolved.
    pub fn depth_cap_exceeded(&self) -> bool {
        self.mixed_area > 0.0
    }

    /// `ρ_P(u_k)` from the node's own cell; `P` must be the body the rule was built for.
    #[inline]
    pub(crate) fn radial_at(&self, p: &Polytope, k: usize) -> f64 {
        let i = self.cells[k];
        p.supports()[i] / dot(&self.nodes[k], &p.normals()[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("rule serializes")
    }
}

/// Builds the cell-adapted rule for `P`. `level` is the number of extra
/// Gauss panels per arc in the plane and the number of uniform icosahedral
/// refinements on S².
pub fn build_rule(dim: usize, level: usize, p: &Polytope) -> Result<QuadratureRule> {
    if dim != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    match dim {
        2 => Ok(build_rule_2d(level, p)),
        3 => Ok(build_rule_3d(level, p)),
        _ => Err(Error::UnsupportedDimension {
            op: "build_rule",
            dim,
        }),
    }
}

fn build_rule_2d(level: usize, p: &Polytope) -> QuadratureRule {
    let arcs = arc_decomposition(p).expect("dimension checked");
    let (x, w) = gauss16();
    let panels = level + 1;
    let n = arcs.arcs.len() * panels * GAUSS_ORDER;
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n);
    for arc in &arcs.arcs {
        let len = arc.length() / panels as f64;
        for k in 0..panels {
            let mid = arc.start + (k as f64 + 0.5) * len;
            for (&t, &wt) in x.iter().zip(w) {
                nodes.push(Direction::from_angle(mid + 0.5 * len * t));
                weights.push(0.5 * len * wt);
                cells.push(arc.facet);
            }
        }
    }
    QuadratureRule {
        dim: 2,
        mixed: vec![false; nodes.len()],
        nodes,
        weights,
        cells,
        num_facets: p.num_facets(),
        mixed_area: 0.0,
    }
}

/// Vertices and faces of the regular icosahedron on the unit sphere.
pub fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let verts = raw.iter().map(|v| unit3(*v)).collect();
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (verts, faces)
}

fn unit3(v: [f64; 3]) -> [f64; 3] {
    let r = norm(&v);
    [v[0] / r, v[1] / r, v[2] / r]
}

fn midpoint(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    unit3([a[0] + b[0], a[1] + b[1], a[2] + b[2]])
}

/// Area (spherical excess) of the geodesic triangle `abc`.
pub fn spherical_triangle_area(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> f64 {
    let triple = dot(a, &cross3(b, c)).abs();
    let denom = 1.0 + dot(a, b) + dot(b, c) + dot(c, a);
    2.0 * triple.atan2(denom)
}

struct Builder<'a> {
    p: &'a Polytope,
    level: usize,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    cells: Vec<usize>,
    mixed: Vec<bool>,
    mixed_area: f64,
}

impl Builder<'_> {
    fn cell(&self, u: &[f64; 3]) -> usize {
        self.p
            .radial_and_cell(u)
            .map(|(_, c)| c)
            .expect("valid polytope has a facet in every direction")
    }

    fn emit(&mut self, a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], mixed: bool) {
        let centroid = unit3([a[0] + b[0] + c[0], a[1] + b[1] + c[1], a[2] + b[2] + c[2]]);
        let area = spherical_triangle_area(a, b, c);
        let cell = self.cell(&centroid);
        self.nodes.push(Direction::new(centroid.to_vec()).expect("unit"));
        self.weights.push(area);
        self.cells.push(cell);
        self.mixed.push(mixed);
        if mixed {
            self.mixed_area += area;
        }
    }

    fn refine(&mut self, t: [[f64; 3]; 3], cells: [usize; 3], depth: usize) {
        let uniform = cells[0] == cells[1] && cells[1] == cells[2];
        if depth >= self.level && (uniform || depth >= DEPTH_CAP) {
            self.emit(&t[0], &t[1], &t[2], !uniform);
            return;
        }
        let [a, b, c] = t;
        let ab = midpoint(&a, &b);
        let bc = midpoint(&b, &c);
        let ca = midpoint(&c, &a);
        let (cab, cbc, cca) = (self.cell(&ab), self.cell(&bc), self.cell(&ca));
        let [ka, kb, kc] = cells;
        self.refine([a, ab, ca], [ka, cab, cca], depth + 1);
        self.refine([ab, b, bc], [cab, kb, cbc], depth + 1);
        self.refine([ca, bc, c], [cca, cbc, kc], depth + 1);
        self.refine([ab, bc, ca], [cab, cbc, cca], depth + 1);
    }
}

fn build_rule_3d(level: usize, p: &Polytope) -> QuadratureRule {
    let (verts, faces) = icosahedron();
    let mut b = Builder {
        p,
        level,
        nodes: Vec::new(),
        weights: Vec::new(),
        cells: Vec::new(),
        mixed: Vec::new(),
        mixed_area: 0.0,
    };
    let vcells: Vec<usize> = verts.iter().map(|v| b.cell(v)).collect();
    for f in &faces {
        b.refine(
            [verts[f[0]], verts[f[1]], verts[f[2]]],
            [vcells[f[0]], vcells[f[1]], vcells[f[2]]],
            0,
        );
    }
    QuadratureRule {
        dim: 3,
        nodes: b.nodes,
        weights: b.weights,
        cells: b.cells,
        num_facets: p.num_facets(),
        mixed: b.mixed,
        mixed_area: b.mixed_area,
    }
}

/// How a rule on S² resolves the facet cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    /// Icosahedral geodesic mesh with boundary-adaptive splitting ([`build_rule`]).
    #[default]
    Geodesic,
    /// Gauss points on each facet mapped radially onto the sphere ([`build_facet_rule`]).
    Facet,
}

/// [`build_rule`] or [`build_facet_rule`]. Both coincide in the plane.
pub fn build_rule_with(kind: RuleKind, dim: usize, level: usize, p: &Polytope) -> Result<QuadratureRule> {
    match kind {
        RuleKind::Geodesic => build_rule(dim, level, p),
        RuleKind::Facet if dim == 2 => build_rule(dim, level, p),
        RuleKind::Facet => build_facet_rule(dim, level, p),
    }
}

/// Fan triangles of the facet rule are split until their diameter is at most
/// this fraction of their nearest corner's distance from the origin.
const FACET_SPLIT_RATIO: f64 = 0.5;
/// Maximal number of midpoint splits of one fan triangle.
const FACET_SPLIT_DEPTH: usize = 10;

/// Rule on S² whose cells are exact: every active facet is fanned into
/// triangles from its centroid, triangles far from the origin relative to
/// their size are split at edge midpoints, each piece carries a collapsed
/// `(4 + 2·level)²` Gauss product rule, and a facet point `x` becomes the node
/// `x/|x|` with weight `h_i |x|^{-3} dA` (the radial projection Jacobian).
pub fn build_facet_rule(dim: usize, level: usize, p: &Polytope) -> Result<QuadratureRule> {
    if dim != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: p.dim(),
        });
    }
    if dim != 3 {
        return Err(Error::UnsupportedDimension {
            op: "build_facet_rule",
            dim,
        });
    }
    let order = 4 + 2 * level;
    let (gx, gw) = gauss_legendre(order);
    // map to [0, 1]
    let gx: Vec<f64> = gx.iter().map(|t| 0.5 * (t + 1.0)).collect();
    let gw: Vec<f64> = gw.iter().map(|w| 0.5 * w).collect();
    let verts = p.vertices();
    let mut out = FacetRuleBuilder {
        gx: &gx,
        gw: &gw,
        nodes: Vec::new(),
        weights: Vec::new(),
        cells: Vec::new(),
    };
    for (i, face) in p.faces().iter().enumerate() {
        if face.is_empty() {
            continue;
        }
        let h = p.supports()[i];
        let mut c = [0.0; 3];
        for &k in face {
            for (ci, xi) in c.iter_mut().zip(&verts[k]) {
                *ci += xi / face.len() as f64;
            }
        }
        for e in 0..face.len() {
            let a = &verts[face[e]];
            let b = &verts[face[(e + 1) % face.len()]];
            out.triangle(i, h, c, [a[0], a[1], a[2]], [b[0], b[1], b[2]], 0);
        }
    }
    Ok(QuadratureRule {
        dim: 3,
        mixed: vec![false; out.nodes.len()],
        nodes: out.nodes,
        weights: out.weights,
        cells: out.cells,
        num_facets: p.num_facets(),
        mixed_area: 0.0,
    })
}

struct FacetRuleBuilder<'a> {
    gx: &'a [f64],
    gw: &'a [f64],
    nodes: Vec<Direction>,
    weights: Vec<f64>,
    cells: Vec<usize>,
}

impl FacetRuleBuilder<'_> {
    fn triangle(&mut self, facet: usize, h: f64, p0: [f64; 3], p1: [f64; 3], p2: [f64; 3], depth: usize) {
        let sub = |a: &[f64; 3], b: &[f64; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
        let mid =
            |a: &[f64; 3], b: &[f64; 3]| [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])];
        let diam = norm(&sub(&p1, &p0))
            .max(norm(&sub(&p2, &p1)))
            .max(norm(&sub(&p0, &p2)));
        let near = norm(&p0).min(norm(&p1)).min(norm(&p2));
        if diam > FACET_SPLIT_RATIO * near && depth < FACET_SPLIT_DEPTH {
            let (m01, m12, m20) = (mid(&p0, &p1), mid(&p1, &p2), mid(&p2, &p0));
            self.triangle(facet, h, p0, m01, m20, depth + 1);
            self.triangle(facet, h, m01, p1, m12, depth + 1);
            self.triangle(facet, h, m20, m12, p2, depth + 1);
            self.triangle(facet, h, m12, m20, m01, depth + 1);
            return;
        }
        let e1 = sub(&p1, &p0);
        let e2 = sub(&p2, &p1);
        let twice_area = norm(&cross3(&e1, &e2));
        for (&s, &ws) in self.gx.iter().zip(self.gw) {
            for (&t, &wt) in self.gx.iter().zip(self.gw) {
                let x = [
                    p0[0] + s * e1[0] + s * t * e2[0],
                    p0[1] + s * e1[1] + s * t * e2[1],
                    p0[2] + s * e1[2] + s * t * e2[2],
                ];
                let r = norm(&x);
                self.nodes
                    .push(Direction::new(vec![x[0] / r, x[1] / r, x[2] / r]).expect("unit"));
                self.weights.push(ws * wt * s * twice_area * h / (r * r * r));
                self.cells.push(facet);
            }
        }
    }
}

/// `Σ w_k f(u_k)`.
pub fn integrate<F: Fn(&Direction) -> f64>(rule: &QuadratureRule, f: F) -> Result<f64> {
    let mut total = 0.0;
    for (k, (u, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(u);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { node: k });
        }
        total += w * v;
    }
    Ok(total)
}

/// Relative gap between the rule's total weight and the sphere area.
pub fn partition_gap(rule: &QuadratureRule) -> f64 {
    let area = sphere_area(rule.dim);
    (rule.total_weight() - area).abs() / area
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::reverse_gauss_cell;
    use crate::geom::shapes::{cube, regular_polygon, square};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
        // degree 30 is within the 2n-1 = 31 exactness range
        let s: f64 = x.iter().zip(&w).map(|(t, wt)| wt * t.powi(30)).sum();
        assert_abs_diff_eq!(s, 2.0 / 31.0, epsilon = 1e-14);
        let (_, w5) = gauss_legendre(5);
        assert_abs_diff_eq!(w5[2], 128.0 / 225.0, epsilon = 1e-15);
    }

    #[test]
    fn square_arcs() {
        let arcs = arc_decomposition(&square()).unwrap();
        assert_eq!(arcs.arcs.len(), 4);
        let mut starts: Vec<f64> = arcs.arcs.iter().map(|a| a.start).collect();
        starts.sort_by(f64::total_cmp);
        for (s, e) in starts
            .iter()
            .zip([PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0])
        {
            assert_abs_diff_eq!(*s, e, epsilon = 1e-14);
        }
        for a in &arcs.arcs {
            assert_abs_diff_eq!(a.length(), PI / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn hexagon_arcs() {
        let arcs = arc_decomposition(&regular_polygon(6, 1.0, 0.1).unwrap()).unwrap();
        assert_eq!(arcs.arcs.len(), 6);
        for a in &arcs.arcs {
            assert_abs_diff_eq!(a.length(), PI / 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn redundant_facet_owns_no_arc() {
        let mut normals = square().normals().to_vec();
        normals.push(Direction::new(vec![1.0, 1.0]).unwrap());
        let p = Polytope::new(normals, vec![1.0, 1.0, 1.0, 1.0, 2.0]).unwrap();
        let arcs = arc_decomposition(&p).unwrap();
        assert_eq!(arcs.arcs.len(), 4);
        assert!(arcs.arcs.iter().all(|a| a.facet != 4));
    }

    fn random_polygon(m: usize, seed: u64) -> Polytope {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let normals = (0..m)
            .map(|k| {
                let base = 2.0 * PI * k as f64 / m as f64;
                Direction::from_angle(base + rng.random_range(-0.2..0.2) * 2.0 * PI / m as f64)
            })
            .collect();
        let supports = (0..m).map(|_| rng.random_range(0.8..1.2)).collect();
        Polytope::new(normals, supports).unwrap()
    }

    #[test]
    fn random_12gon_arcs_have_constant_argmin() {
        let p = random_polygon(12, 3);
        let arcs = arc_decomposition(&p).unwrap();
        assert_eq!(arcs.arcs.len(), 12);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let total: f64 = arcs.arcs.iter().map(Arc::length).sum();
        assert_abs_diff_eq!(total, 2.0 * PI, epsilon = 1e-12);
        for a in &arcs.arcs {
            let mid = Direction::from_angle(0.5 * (a.start + a.end));
            assert_eq!(reverse_gauss_cell(&p, &mid).unwrap(), vec![a.facet]);
            for _ in 0..100 {
                let t = rng.random_range(a.start..a.end);
                let edge = (t - a.start).min(a.end - t);
                if edge < 1e-12 {
                    continue;
                }
                assert_eq!(
                    reverse_gauss_cell(&p, &Direction::from_angle(t)).unwrap(),
                    vec![a.facet]
                );
            }
        }
    }

    #[test]
    fn planar_integrals() {
        let rule = build_rule(2, 0, &square()).unwrap();
        assert_abs_diff_eq!(integrate(&rule, |_| 1.0).unwrap(), 2.0 * PI, epsilon = 1e-10);
        // ∫ cos_+ = 2 and ∫ cos_+^2 = π/2; the diamond's arcs end at ±π/2, where the kinks are
        let rule = build_rule(2, 1, &regular_polygon(4, 1.0, PI / 4.0).unwrap()).unwrap();
        let pos = integrate(&rule, |u| u[0].max(0.0)).unwrap();
        assert_abs_diff_eq!(pos, 2.0, epsilon = 1e-8);
        let sq = integrate(&rule, |u| u[0].max(0.0).powi(2)).unwrap();
        assert_abs_diff_eq!(sq, PI / 2.0, epsilon = 1e-8);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let rule = build_rule(2, 0, &square()).unwrap();
        assert!(matches!(
            integrate(&rule, |_| f64::NAN),
            Err(Error::NonFiniteIntegrand { node: 0 })
        ));
    }

    #[test]
    fn cube_rule_covers_the_sphere() {
        let c = cube(1.0).unwrap();
        let rule = build_rule(3, 3, &c).unwrap();
        assert!(partition_gap(&rule) < 1e-6);
        for (k, u) in rule.nodes.iter().enumerate() {
            assert_eq!(rule.cells[k], reverse_gauss_cell(&c, u).unwrap()[0]);
        }
        let areas = rule.cell_areas();
        for a in &areas {
            // six congruent cells
            assert_abs_diff_eq!(*a, 4.0 * PI / 6.0, epsilon = 1e-3);
        }
    }

    #[test]
    fn facet_rule_is_exact_on_the_cube() {
        let c = cube(1.0).unwrap();
        let rule = build_facet_rule(3, 2, &c).unwrap();
        assert!(partition_gap(&rule) < 1e-7);
        for a in rule.cell_areas() {
            assert_abs_diff_eq!(a, 4.0 * PI / 6.0, epsilon = 1e-7);
        }
        for (k, u) in rule.nodes.iter().enumerate() {
            assert_eq!(rule.cells[k], reverse_gauss_cell(&c, u).unwrap()[0]);
        }
    }

    #[test]
    fn geodesic_refinement_converges_on_the_cube() {
        let c = cube(1.0).unwrap();
        let reference = integrate(&build_facet_rule(3, 4, &c).unwrap(), |u| {
            u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
        })
        .unwrap();
        let mut prev = f64::INFINITY;
        for level in [1, 3, 5] {
            let err = (integrate(&build_rule(3, level, &c).unwrap(), |u| {
                u.iter().fold(0.0f64, |m, x| m.max(x.abs()))
            })
            .unwrap()
                - reference)
                .abs();
            assert!(err < prev, "level {level}: {err} !< {prev}");
            prev = err;
        }
        assert!(prev < 1e-3 * reference);
    }

    #[test]
    fn cell_assignment_is_lowest_index_argmin() {
        let p = random_polygon(9, 8);
        let rule = build_rule(2, 2, &p).unwrap();
        for (k, u) in rule.nodes.iter().enumerate() {
            assert_eq!(rule.cells[k], reverse_gauss_cell(&p, u).unwrap()[0]);
        }
    }

    #[test]
    fn json_dump_has_the_three_arrays() {
        let rule = build_rule(2, 0, &square()).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rule.to_json()).unwrap();
        assert_eq!(v["nodes"].as_array().unwrap().len(), 64);
        assert_eq!(v["weights"].as_array().unwrap().len(), 64);
        assert_eq!(v["cells"].as_array().unwrap().len(), 64);
    }
}
