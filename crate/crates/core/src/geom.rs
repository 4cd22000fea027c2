//! Convex bodies given by outward normals and support numbers.
//!
//! A [`Polytope`] is the Wulff shape `∩ {x : x·v_i <= h_i}` of a finite normal
//! set. All support numbers are positive, so the origin is interior and the
//! radial function is finite and positive in every direction. Vertices are
//! enumerated exactly in dimensions 2 and 3; in higher dimensions only the
//! support/radial evaluations are available (support values through a small
//! LP).

use std::f64::consts::PI;
use std::ops::Deref;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atoms closer than this angle (radians) are rejected as duplicates.
pub const DEDUP_ANGLE: f64 = 1e-8;

/// Relative tolerance used for vertex feasibility and incidence tests.
const VERTEX_TOL: f64 = 1e-9;

/// Relative tolerance under which two candidate facets tie in the radial argmin.
const TIE_TOL: f64 = 1e-13;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Angle between two unit vectors, stable for nearly parallel inputs.
pub(crate) fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let chord = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    2.0 * (chord / 2.0).min(1.0).asin()
}

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    // ω_n = π^{n/2} / Γ(n/2 + 1), via the two-step recursion ω_n = 2π/n · ω_{n-2}.
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Surface area `n ω_n` of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// A unit vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes `coords`. Vectors already of unit norm up to rounding are
    /// kept bit-for-bit so that serialized directions read back unchanged.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::InvalidDirection(format!(
                "need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidDirection(format!(
                "non-finite coordinates {coords:?}"
            )));
        }
        let r = norm(&coords);
        if r == 0.0 {
            return Err(Error::InvalidDirection("zero vector".into()));
        }
        if (r - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok(Self(coords));
        }
        Ok(Self(coords.into_iter().map(|c| c / r).collect()))
    }

    /// Point on the unit circle at angle `theta`.
    pub fn from_angle(theta: f64) -> Self {
        Self(vec![theta.cos(), theta.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Direction {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

/// One atom `w δ_v` of a discrete measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub v: Direction,
    pub w: f64,
}

/// A finite positive measure on the sphere with pairwise distinct atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidMeasure(format!("dimension {dim} < 2")));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.v.dim(),
                });
            }
            if !(a.w > 0.0 && a.w.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {i} has non-positive or non-finite weight {}",
                    a.w
                )));
            }
        }
        for i in 0..atoms.len() {
            for j in 0..i {
                if angle_between(&atoms[i].v, &atoms[j].v) <= DEDUP_ANGLE {
                    return Err(Error::InvalidMeasure(format!(
                        "atoms {j} and {i} are duplicates (angle <= {DEDUP_ANGLE:e})"
                    )));
                }
            }
        }
        Ok(Self { dim, atoms })
    }

    /// Builds a measure from parallel direction and weight lists.
    pub fn from_parts(directions: Vec<Direction>, weights: Vec<f64>) -> Result<Self> {
        if directions.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} directions but {} weights",
                directions.len(),
                weights.len()
            )));
        }
        let dim = directions.first().map_or(0, |d| d.dim());
        let atoms = directions
            .into_iter()
            .zip(weights)
            .map(|(v, w)| Atom { v, w })
            .collect();
        Self::new(dim, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn directions(&self) -> Vec<Direction> {
        self.atoms.iter().map(|a| a.v.clone()).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.w).collect()
    }

    /// Total mass `|μ|`.
    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.w).sum()
    }
}

/// Returns a unit `v` with `v·u >= 0` for every `u` in `dirs`, if one exists.
///
/// When the directions span the space, such a `v` exists iff the system
/// `v·u_i >= 0, v·Σu_i = 1` is feasible; otherwise any unit vector orthogonal to
/// the span works.
pub(crate) fn closed_hemisphere_witness<'a, I>(dim: usize, dirs: I) -> Option<Vec<f64>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let dirs: Vec<&[f64]> = dirs.into_iter().collect();
    if dirs.is_empty() {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        return Some(v);
    }
    let m = dirs.len();
    let mat = DMatrix::from_fn(m.max(dim), dim, |i, j| if i < m { dirs[i][j] } else { 0.0 });
    let svd = mat.svd(false, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1.0))
        .count();
    if rank < dim {
        let v_t = svd.v_t.expect("requested V^T");
        // Row of V^T with the smallest singular value spans part of the null space.
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        let v: Vec<f64> = (0..dim).map(|j| v_t[(k, j)]).collect();
        let r = norm(&v);
        return Some(v.into_iter().map(|c| c / r).collect());
    }

    let mut sum = vec![0.0; dim];
    for d in &dirs {
        for (s, c) in sum.iter_mut().zip(d.iter()) {
            *s += c;
        }
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..dim)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for d in &dirs {
        let row: Vec<_> = vars.iter().copied().zip(d.iter().copied()).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let row: Vec<_> = vars.iter().copied().zip(sum.iter().copied()).collect();
    lp.add_constraint(row.as_slice(), ComparisonOp::Eq, 1.0);
    match lp.solve() {
        Ok(sol) => {
            let v: Vec<f64> = vars.iter().map(|&x| sol[x]).collect();
            let r = norm(&v);
            if r == 0.0 || !r.is_finite() {
                return None;
            }
            let v: Vec<f64> = v.into_iter().map(|c| c / r).collect();
            // Guard against the LP's internal tolerance admitting a slightly negative row.
            let worst = dirs.iter().map(|d| dot(d, &v)).fold(f64::INFINITY, f64::min);
            (worst >= -1e-9).then_some(v)
        }
        Err(_) => None,
    }
}

/// True iff `μ` is *not* concentrated on any closed hemisphere, i.e. the origin
/// is interior to the convex hull of the atom directions.
pub fn hemisphere_check(mu: &DiscreteMeasure) -> bool {
    hemisphere_witness(mu).is_none()
}

/// A pole `v` of a closed hemisphere containing every atom of `μ`, if any.
pub fn hemisphere_witness(mu: &DiscreteMeasure) -> Option<Direction> {
    closed_hemisphere_witness(mu.dim(), mu.atoms().iter().map(|a| a.v.coords()))
        .map(|v| Direction::new(v).expect("witness is a unit vector"))
}

/// Convex polytope with the origin in its interior, stored as a Wulff shape.
///
/// Facets whose halfspace does not touch the body in an `(n-1)`-dimensional face
/// are kept and flagged inactive.
#[derive(Debug, Clone)]
pub struct Polytope {
    dim: usize,
    normals: Vec<Direction>,
    supports: Vec<f64>,
    vertices: Vec<Vec<f64>>,
    active: Vec<bool>,
    /// n = 2 only: active facets in counter-clockwise order; vertex `k` joins
    /// `ring[k]` and `ring[k + 1]`.
    ring: Vec<usize>,
    /// n = 3 only: vertex indices of each facet, counter-clockwise seen from
    /// outside. Empty for inactive facets.
    faces: Vec<Vec<usize>>,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.normals == other.normals && self.supports == other.supports
    }
}

impl Polytope {
    /// Wulff shape `∩ {x : x·v_i <= f_i}`.
    pub fn new(normals: Vec<Direction>, supports: Vec<f64>) -> Result<Self> {
        wulff_shape(normals, supports)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[Direction] {
        &self.normals
    }

    pub fn supports(&self) -> &[f64] {
        &self.supports
    }

    pub fn num_facets(&self) -> usize {
        self.normals.len()
    }

    /// Cached vertex list. Empty in dimension 4 and above.
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn is_active(&self, facet: usize) -> bool {
        self.active[facet]
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn inactive_facets(&self) -> Vec<usize> {
        (0..self.num_facets()).filter(|&i| !self.active[i]).collect()
    }

    /// Counter-clockwise cycle of active facets (dimension 2 only).
    pub(crate) fn ring(&self) -> &[usize] {
        &self.ring
    }

    /// Ordered vertex indices of every facet (dimension 3 only).
    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    /// `λP`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidBody(format!(
                "scale factor {lambda} is not positive"
            )));
        }
        Ok(Self {
            dim: self.dim,
            normals: self.normals.clone(),
            supports: self.supports.iter().map(|h| h * lambda).collect(),
            vertices: self
                .vertices
                .iter()
                .map(|x| x.iter().map(|c| c * lambda).collect())
                .collect(),
            active: self.active.clone(),
            ring: self.ring.clone(),
            faces: self.faces.clone(),
        })
    }

    /// Same normals, new support numbers.
    pub fn with_supports(&self, supports: Vec<f64>) -> Result<Self> {
        wulff_shape(self.normals.clone(), supports)
    }

    pub fn support_value(&self, v: &[f64]) -> f64 {
        support_value(self, v)
    }

    pub fn radial_value(&self, u: &[f64]) -> Result<f64> {
        radial_value(self, u)
    }

    /// Radial value together with the lowest-index facet attaining it.
    ///
    /// Returns `None` only for an unbounded ray, which a valid polytope never has.
    #[inline]
    pub fn radial_and_cell(&self, u: &[f64]) -> Option<(f64, usize)> {
        let mut best = f64::INFINITY;
        let mut cell = usize::MAX;
        for (i, (v, &h)) in self.normals.iter().zip(&self.supports).enumerate() {
            let c = dot(u, v);
            if c > 0.0 {
                let r = h / c;
                if r < best * (1.0 - TIE_TOL) {
                    best = r;
                    cell = i;
                } else if r < best {
                    // within the tie band: keep the lower index, but track the smaller ratio
                    best = r;
                }
            }
        }
        (cell != usize::MAX).then_some((best, cell))
    }
}

/// `h_P(v) = max{v·x : x ∈ P}`.
pub fn support_value(p: &Polytope, v: &[f64]) -> f64 {
    if !p.vertices.is_empty() {
        return p
            .vertices
            .iter()
            .map(|x| dot(x, v))
            .fold(f64::NEG_INFINITY, f64::max);
    }
    // n >= 4: maximize v·x over the halfspaces.
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = v
        .iter()
        .map(|&c| lp.add_var(c, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for (n, &h) in p.normals.iter().zip(&p.supports) {
        let row: Vec<_> = vars.iter().copied().zip(n.iter().copied()).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Le, h);
    }
    lp.solve()
        .map(|s| s.objective())
        .expect("bounded polytope has a finite support value")
}

/// `ρ_P(u) = max{λ > 0 : λu ∈ P} = min_{u·v_i > 0} h_i / (u·v_i)`.
pub fn radial_value(p: &Polytope, u: &[f64]) -> Result<f64> {
    p.radial_and_cell(u)
        .map(|(r, _)| r)
        .ok_or_else(|| Error::InvalidBody(format!("ray {u:?} meets no facet")))
}

/// Facets `i` minimising `h_i / (u·v_i)`; ties are reported in full, in index order.
pub fn reverse_gauss_cell(p: &Polytope, u: &[f64]) -> Result<Vec<usize>> {
    let ratios: Vec<Option<f64>> = p
        .normals
        .iter()
        .zip(&p.supports)
        .map(|(v, &h)| {
            let c = dot(u, v);
            (c > 0.0).then(|| h / c)
        })
        .collect();
    let best = ratios.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::InvalidBody(format!("ray {u:?} meets no facet")));
    }
    Ok(ratios
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.filter(|&r| r <= best * (1.0 + 1e-12)).map(|_| i))
        .collect())
}

/// Builds the Wulff shape `[f] = ∩ {x : x·v_i <= f_i}`.
pub fn wulff_shape(normals: Vec<Direction>, f: Vec<f64>) -> Result<Polytope> {
    if normals.len() != f.len() {
        return Err(Error::InvalidBody(format!(
            "{} normals but {} support numbers",
            normals.len(),
            f.len()
        )));
    }
    let dim = normals
        .first()
        .map(|v| v.dim())
        .ok_or_else(|| Error::InvalidBody("no facets".into()))?;
    for v in &normals {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
    }
    if let Some((i, h)) = f.iter().enumerate().find(|(_, h)| !(**h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidBody(format!(
            "support number {i} is {h}, must be positive"
        )));
    }
    if let Some(witness) = closed_hemisphere_witness(dim, normals.iter().map(|v| v.coords())) {
        return Err(Error::UnboundedWulff { witness });
    }
    let mut p = Polytope {
        dim,
        normals,
        supports: f,
        vertices: Vec::new(),
        active: Vec::new(),
        ring: Vec::new(),
        faces: Vec::new(),
    };
    match dim {
        2 => enumerate_2d(&mut p),
        3 => enumerate_3d(&mut p),
        _ => p.active = vec![true; p.normals.len()],
    }
    Ok(p)
}

/// Vertex enumeration in the plane through the polar point set `v_i / h_i`:
/// its convex hull lists the active facets in angular order, and consecutive
/// hull points give the vertices.
fn enumerate_2d(p: &mut Polytope) {
    let m = p.normals.len();
    let pts: Vec<[f64; 2]> = (0..m)
        .map(|i| [p.normals[i][0] / p.supports[i], p.normals[i][1] / p.supports[i]])
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        pts[a][0]
            .total_cmp(&pts[b][0])
            .then(pts[a][1].total_cmp(&pts[b][1]))
            .then(a.cmp(&b))
    });
    order.dedup_by(|b, a| pts[*a] == pts[*b]);

    let cross = |o: usize, a: usize, b: usize| {
        let (ax, ay) = (pts[a][0] - pts[o][0], pts[a][1] - pts[o][1]);
        let (bx, by) = (pts[b][0] - pts[o][0], pts[b][1] - pts[o][1]);
        let c = ax * by - ay * bx;
        let scale = (ax.hypot(ay) * bx.hypot(by)).max(f64::MIN_POSITIVE);
        c / scale
    };
    // Andrew's monotone chain, dropping collinear points (facets meeting the
    // body in a single vertex).
    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for &i in &order {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 1e-12 {
            hull.pop();
        }
        hull.push(i);
    }
    let lower = hull.len() + 1;
    for &i in order.iter().rev().skip(1) {
        while hull.len() >= lower && cross(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 1e-12 {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();

    // Rotate so the ring starts at the facet with the smallest angle in [0, 2π).
    let angle = |i: usize| {
        let a = p.normals[i][1].atan2(p.normals[i][0]);
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    };
    let start = (0..hull.len())
        .min_by(|&a, &b| angle(hull[a]).total_cmp(&angle(hull[b])))
        .unwrap_or(0);
    hull.rotate_left(start);

    let r = hull.len();
    let mut active = vec![false; m];
    let mut vertices = Vec::with_capacity(r);
    for k in 0..r {
        let (i, j) = (hull[k], hull[(k + 1) % r]);
        active[i] = true;
        let (a, b) = (&p.normals[i], &p.normals[j]);
        let det = a[0] * b[1] - a[1] * b[0];
        let (hi, hj) = (p.supports[i], p.supports[j]);
        vertices.push(vec![(hi * b[1] - hj * a[1]) / det, (a[0] * hj - b[0] * hi) / det]);
    }
    p.ring = hull;
    p.active = active;
    p.vertices = vertices;
}

/// Vertex enumeration in space: every feasible intersection of three
/// facet planes, deduplicated. A facet is active when at least three distinct
/// vertices lie on it.
fn enumerate_3d(p: &mut Polytope) {
    let m = p.normals.len();
    // tolerances scale with the vertex norm so that bodies with very uneven
    // supports keep their small features
    let n = &p.normals;
    let h = &p.supports;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let cij = cross3(&n[i], &n[j]);
            if norm(&cij) < 1e-12 {
                continue;
            }
            for k in (j + 1)..m {
                let det = dot(&cij, &n[k]);
                if det.abs() < 1e-12 {
                    continue;
                }
                // Cramer: x = (h_i (n_j × n_k) + h_j (n_k × n_i) + h_k (n_i × n_j)) / det
                let cjk = cross3(&n[j], &n[k]);
                let cki = cross3(&n[k], &n[i]);
                let x: Vec<f64> = (0..3)
                    .map(|c| (h[i] * cjk[c] + h[j] * cki[c] + h[k] * cij[c]) / det)
                    .collect();
                let tol = VERTEX_TOL * norm(&x);
                if (0..m).any(|l| dot(&x, &n[l]) > h[l] + tol) {
                    continue;
                }
                if vertices.iter().any(|y| {
                    let t = VERTEX_TOL * norm(y).max(norm(&x));
                    y.iter().zip(&x).all(|(a, b)| (a - b).abs() <= t)
                }) {
                    continue;
                }
                vertices.push(x);
            }
        }
    }
    let faces: Vec<Vec<usize>> = (0..m)
        .map(|l| {
            let mut on: Vec<usize> = (0..vertices.len())
                .filter(|&k| (dot(&vertices[k], &n[l]) - h[l]).abs() <= VERTEX_TOL * norm(&vertices[k]))
                .collect();
            if on.len() < 3 {
                return Vec::new();
            }
            // order by angle about the facet centroid, counter-clockwise about n_l
            let mut c = [0.0; 3];
            for &k in &on {
                for (ci, xi) in c.iter_mut().zip(&vertices[k]) {
                    *ci += xi / on.len() as f64;
                }
            }
            let helper = if n[l][0].abs() < 0.9 {
                [1.0, 0.0, 0.0]
            } else {
                [0.0, 1.0, 0.0]
            };
            let e1 = cross3(&n[l], &helper);
            let r1 = norm(&e1);
            let e1 = [e1[0] / r1, e1[1] / r1, e1[2] / r1];
            let e2 = cross3(&n[l], &e1);
            let angle = |k: usize| {
                let d: Vec<f64> = vertices[k].iter().zip(&c).map(|(x, ci)| x - ci).collect();
                dot(&d, &e2).atan2(dot(&d, &e1))
            };
            on.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
            on
        })
        .collect();
    p.active = faces.iter().map(|f| !f.is_empty()).collect();
    p.faces = faces;
    p.vertices = vertices;
}

pub(crate) fn cross3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Polar body `P* = {x : x·y <= 1 for all y ∈ P}`, the Wulff shape of the
/// normalized vertices of `P` with supports `1/|x|`.
pub fn polar(p: &Polytope) -> Result<Polytope> {
    if p.vertices.is_empty() {
        return Err(Error::UnsupportedDimension {
            op: "polar",
            dim: p.dim,
        });
    }
    let mut normals = Vec::with_capacity(p.vertices.len());
    let mut supports = Vec::with_capacity(p.vertices.len());
    for x in &p.vertices {
        let r = norm(x);
        normals.push(Direction::new(x.clone())?);
        supports.push(1.0 / r);
    }
    wulff_shape(normals, supports)
}

/// Two bodies in the same dimension.
#[derive(Debug, Clone)]
pub struct BodyPair {
    pub q1: Polytope,
    pub q2: Polytope,
}

impl BodyPair {
    pub fn new(q1: Polytope, q2: Polytope) -> Result<Self> {
        if q1.dim() != q2.dim() {
            return Err(Error::DimensionMismatch {
                expected: q1.dim(),
                found: q2.dim(),
            });
        }
        Ok(Self { q1, q2 })
    }
}

/// Deterministic, roughly uniform direction sample: equally spaced angles in
/// the plane, a Fibonacci lattice on S².
pub fn direction_sample(dim: usize, count: usize) -> Result<Vec<Direction>> {
    match dim {
        2 => Ok((0..count)
            .map(|k| Direction::from_angle(2.0 * PI * k as f64 / count as f64))
            .collect()),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            Ok((0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * k as f64;
                    Direction::new(vec![r * phi.cos(), r * phi.sin(), z]).expect("lattice point is nonzero")
                })
                .collect())
        }
        _ => Err(Error::UnsupportedDimension {
            op: "direction_sample",
            dim,
        }),
    }
}

/// Sampled sup-distance between two bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub distance: f64,
    /// Number of directions the supremum was taken over.
    pub samples: usize,
}

/// Default size of the dense part of the Hausdorff direction sample.
pub const HAUSDORFF_SAMPLES_2D: usize = 4096;
pub const HAUSDORFF_SAMPLES_3D: usize = 20_000;

fn distance_directions(p: &Polytope, q: &Polytope, dense: usize) -> Result<Vec<Direction>> {
    let mut dirs = direction_sample(p.dim(), dense)?;
    for body in [p, q] {
        dirs.extend(body.normals().iter().cloned());
        for x in body.vertices() {
            dirs.push(Direction::new(x.clone())?);
        }
    }
    Ok(dirs)
}

/// `sup_u |h_P(u) − h_Q(u)|` over both normal sets, both vertex-direction sets
/// and a dense deterministic sample. Support functions of polytopes are maxima
/// of linear functions, so the supremum of their difference is attained on
/// this kind of set up to the sample resolution.
pub fn hausdorff_distance(p: &Polytope, q: &Polytope) -> Result<DistanceEstimate> {
    let dense = if p.dim() == 2 {
        HAUSDORFF_SAMPLES_2D
    } else {
        HAUSDORFF_SAMPLES_3D
    };
    hausdorff_distance_with(p, q, dense)
}

pub fn hausdorff_distance_with(p: &Polytope, q: &Polytope, dense: usize) -> Result<DistanceEstimate> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let dirs = distance_directions(p, q, dense)?;
    let distance = dirs
        .iter()
        .map(|u| (support_value(p, u) - support_value(q, u)).abs())
        .fold(0.0, f64::max);
    Ok(DistanceEstimate {
        distance,
        samples: dirs.len(),
    })
}

/// `sup_u |ρ_P(u) − ρ_Q(u)|` on the same direction set as [`hausdorff_distance`].
pub fn radial_distance(p: &Polytope, q: &Polytope) -> Result<DistanceEstimate> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let dense = if p.dim() == 2 {
        HAUSDORFF_SAMPLES_2D
    } else {
        HAUSDORFF_SAMPLES_3D
    };
    let dirs = distance_directions(p, q, dense)?;
    let mut distance = 0.0f64;
    for u in &dirs {
        distance = distance.max((radial_value(p, u)? - radial_value(q, u)?).abs());
    }
    Ok(DistanceEstimate {
        distance,
        samples: dirs.len(),
    })
}

/// Convenience constructors used throughout tests and the CLI.
pub mod shapes {
    use super::*;

    /// Regular `m`-gon with facet normals at angles `offset + 2πk/m` and all supports `h`.
    pub fn regular_polygon(m: usize, h: f64, offset: f64) -> Result<Polytope> {
        let normals = (0..m)
            .map(|k| Direction::from_angle(offset + 2.0 * PI * k as f64 / m as f64))
            .collect();
        Polytope::new(normals, vec![h; m])
    }

    /// `[-a, a] × [-b, b]` with facet order `+e1, +e2, −e1, −e2`.
    pub fn rectangle(a: f64, b: f64) -> Result<Polytope> {
        let normals = vec![
            Direction::new(vec![1.0, 0.0])?,
            Direction::new(vec![0.0, 1.0])?,
            Direction::new(vec![-1.0, 0.0])?,
            Direction::new(vec![0.0, -1.0])?,
        ];
        Polytope::new(normals, vec![a, b, a, b])
    }

    /// `[-1, 1]^2`.
    pub fn square() -> Polytope {
        rectangle(1.0, 1.0).expect("square is valid")
    }

    /// `[-s, s]^3` with facet order `+e1, +e2, +e3, −e1, −e2, −e3`.
    pub fn cube(s: f64) -> Result<Polytope> {
        let mut normals = Vec::with_capacity(6);
        for sign in [1.0, -1.0] {
            for axis in 0..3 {
                let mut v = vec![0.0; 3];
                v[axis] = sign;
                normals.push(Direction::new(v)?);
            }
        }
        Polytope::new(normals, vec![s; 6])
    }
}

#[cfg(test)]
mod tests {
    use super::shapes::*;
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dir(c: &[f64]) -> Direction {
        Direction::new(c.to_vec()).unwrap()
    }

    fn measure(dirs: &[&[f64]]) -> DiscreteMeasure {
        DiscreteMeasure::from_parts(dirs.iter().map(|d| dir(d)).collect(), vec![1.0; dirs.len()]).unwrap()
    }

    fn cross_polytope_2d() -> Polytope {
        let s = 0.5f64.sqrt();
        Polytope::new(
            vec![dir(&[s, s]), dir(&[-s, s]), dir(&[-s, -s]), dir(&[s, -s])],
            vec![s; 4],
        )
        .unwrap()
    }

    #[test]
    fn support_values_of_square_and_diamond() {
        let sq = square();
        assert_abs_diff_eq!(sq.support_value(&[1.0, 0.0]), 1.0, epsilon = 1e-15);
        let d = dir(&[1.0, 1.0]);
        assert_abs_diff_eq!(sq.support_value(&d), 2f64.sqrt(), epsilon = 1e-15);
        let u = Direction::from_angle(0.3);
        // brute force over the four diamond vertices ±e1, ±e2
        let brute = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
            .iter()
            .map(|x| dot(x, &u))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(cross_polytope_2d().support_value(&u), brute, epsilon = 1e-15);
        assert_abs_diff_eq!(brute, 0.955_336_489_125_606, epsilon = 1e-12);
    }

    #[test]
    fn radial_values() {
        let sq = square();
        let u = Direction::from_angle(PI / 6.0);
        assert_abs_diff_eq!(sq.radial_value(&u).unwrap(), 2.0 / 3f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(sq.radial_value(&[1.0, 0.0]).unwrap(), 1.0, epsilon = 1e-15);
        let big = sq.scaled(2.0).unwrap();
        assert_eq!(big.radial_value(&u).unwrap(), 2.0 * sq.radial_value(&u).unwrap());
    }

    #[test]
    fn polar_of_square_is_diamond() {
        let pol = polar(&square()).unwrap();
        let mut verts: Vec<Vec<f64>> = pol.vertices().to_vec();
        verts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let expected = [[-1.0, 0.0], [0.0, -1.0], [0.0, 1.0], [1.0, 0.0]];
        assert_eq!(verts.len(), 4);
        for (v, e) in verts.iter().zip(expected) {
            assert_abs_diff_eq!(v[0], e[0], epsilon = 1e-12);
            assert_abs_diff_eq!(v[1], e[1], epsilon = 1e-12);
        }
        let back = polar(&pol).unwrap();
        let d = hausdorff_distance(&square(), &back).unwrap();
        assert!(d.distance < 1e-9);
    }

    #[test]
    fn polar_of_regular_polygon_has_inverse_circumradius() {
        let r = 1.7;
        let m = 7;
        let p = regular_polygon(m, r, 0.0).unwrap();
        let pol = polar(&p).unwrap();
        // vertices of P sit at circumradius r / cos(π/m); polar supports are their inverses
        let expected = (PI / m as f64).cos() / r;
        for h in pol.supports() {
            assert_abs_diff_eq!(*h, expected, epsilon = 1e-12);
        }
        // and the polar's own vertices sit at circumradius 1/r
        for x in pol.vertices() {
            assert_abs_diff_eq!(norm(x), 1.0 / r, epsilon = 1e-12);
        }
    }

    #[test]
    fn wulff_shape_examples() {
        let base = vec![
            dir(&[1.0, 0.0]),
            dir(&[0.0, 1.0]),
            dir(&[-1.0, 0.0]),
            dir(&[0.0, -1.0]),
        ];
        let p = wulff_shape(base.clone(), vec![1.0; 4]).unwrap();
        assert_eq!(p.vertices().len(), 4);

        let mut normals = base;
        normals.push(dir(&[1.0, 1.0]));
        let p = wulff_shape(normals, vec![1.0, 1.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!(!p.is_active(4));
        assert_eq!(p.inactive_facets(), vec![4]);
        assert_abs_diff_eq!(p.support_value(&p.normals()[4]), 2f64.sqrt(), epsilon = 1e-14);

        let err = wulff_shape(vec![dir(&[1.0, 0.0]), dir(&[0.0, 1.0])], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::UnboundedWulff { .. })));
    }

    #[test]
    fn facet_touching_at_a_vertex_is_inactive() {
        let s = 0.5f64.sqrt();
        let normals = vec![
            dir(&[1.0, 0.0]),
            dir(&[0.0, 1.0]),
            dir(&[-1.0, 0.0]),
            dir(&[0.0, -1.0]),
            dir(&[s, s]),
        ];
        let p = wulff_shape(normals, vec![1.0, 1.0, 1.0, 1.0, 2f64.sqrt()]).unwrap();
        assert_eq!(p.vertices().len(), 4);
        assert!(!p.is_active(4));
    }

    #[test]
    fn hexagon_vertices() {
        let p = regular_polygon(6, 1.0, 0.0).unwrap();
        assert_eq!(p.vertices().len(), 6);
        for x in p.vertices() {
            assert_abs_diff_eq!(norm(x), 1.0 / (PI / 6.0).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn cube_and_octahedron_vertices() {
        let c = cube(1.0).unwrap();
        assert_eq!(c.vertices().len(), 8);
        assert!(c.active().iter().all(|&a| a));
        let oct = polar(&c).unwrap();
        assert_eq!(oct.num_facets(), 8);
        assert_eq!(oct.vertices().len(), 6);
        for x in oct.vertices() {
            assert_abs_diff_eq!(norm(x), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn hemisphere_examples() {
        assert!(hemisphere_check(&measure(&[
            &[1.0, 0.0],
            &[-1.0, 0.0],
            &[0.0, 1.0],
            &[0.0, -1.0]
        ])));
        let m = measure(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(!hemisphere_check(&m));
        let w = hemisphere_witness(&m).unwrap();
        assert!(w[0] >= -1e-12 && w[1] >= -1e-12);
        assert!(hemisphere_check(&measure(&[
            &[1.0, 0.0],
            &[0.0, 1.0],
            &[-1.0, -1.0]
        ])));
        // closed (not open) hemisphere: ±e1 and e2
        assert!(!hemisphere_check(&measure(&[
            &[1.0, 0.0],
            &[-1.0, 0.0],
            &[0.0, 1.0]
        ])));
        // lower-dimensional support in R^3
        assert!(!hemisphere_check(&measure(&[
            &[1.0, 0.0, 0.0],
            &[-1.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, -1.0, 0.0],
        ])));
    }

    #[test]
    fn hemisphere_check_agrees_with_angular_gap_in_the_plane() {
        // brute force: in R^2 a closed hemisphere exists iff some angular gap is >= π
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let m = rng.random_range(2..7);
            let mut angles: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            angles.sort_by(f64::total_cmp);
            let mut gap = angles[0] + 2.0 * PI - angles[m - 1];
            for k in 1..m {
                gap = gap.max(angles[k] - angles[k - 1]);
            }
            if (gap - PI).abs() < 1e-6 {
                continue;
            }
            let mu = DiscreteMeasure::from_parts(
                angles.iter().map(|&a| Direction::from_angle(a)).collect(),
                vec![1.0; m],
            )
            .unwrap();
            assert_eq!(hemisphere_check(&mu), gap < PI, "angles {angles:?}");
        }
    }

    #[test]
    fn reverse_gauss_cells() {
        let sq = square();
        assert_eq!(
            reverse_gauss_cell(&sq, &Direction::from_angle(0.3)).unwrap(),
            vec![0]
        );
        assert_eq!(reverse_gauss_cell(&sq, &dir(&[1.0, 1.0])).unwrap(), vec![0, 1]);
        let hex = regular_polygon(6, 1.0, 0.2).unwrap();
        for (i, v) in hex.normals().iter().enumerate() {
            assert_eq!(reverse_gauss_cell(&hex, v).unwrap(), vec![i]);
        }
    }

    #[test]
    fn hausdorff_examples() {
        let sq = square();
        assert_eq!(hausdorff_distance(&sq, &sq).unwrap().distance, 0.0);
        let d = hausdorff_distance(&sq, &sq.scaled(2.0).unwrap()).unwrap();
        assert_abs_diff_eq!(d.distance, 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn hausdorff_square_vs_diamond_matches_dense_oracle() {
        let sq = square();
        let dia = cross_polytope_2d();
        // brute force over 1e5 angles with closed-form support functions
        let mut brute = 0.0f64;
        for k in 0..100_000 {
            let t = 2.0 * PI * k as f64 / 100_000.0;
            let (c, s) = (t.cos(), t.sin());
            brute = brute.max((c.abs() + s.abs() - c.abs().max(s.abs())).abs());
        }
        let d = hausdorff_distance(&sq, &dia).unwrap();
        assert_abs_diff_eq!(d.distance, brute, epsilon = 1e-8);
        assert_abs_diff_eq!(d.distance, 0.5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn duplicate_atoms_are_rejected() {
        let a = dir(&[1.0, 0.0]);
        let b = Direction::from_angle(1e-9);
        let err = DiscreteMeasure::from_parts(vec![a, b], vec![1.0, 1.0]);
        assert!(matches!(err, Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn nonpositive_weights_and_supports_are_rejected() {
        let dirs = vec![dir(&[1.0, 0.0]), dir(&[-1.0, 0.0])];
        assert!(DiscreteMeasure::from_parts(dirs.clone(), vec![1.0, 0.0]).is_err());
        assert!(matches!(
            Polytope::new(
                vec![dir(&[1.0, 0.0]), dir(&[0.0, 1.0]), dir(&[-1.0, -1.0])],
                vec![1.0, -1.0, 1.0]
            ),
            Err(Error::InvalidBody(_))
        ));
    }

    #[test]
    fn four_dimensional_support_by_lp() {
        let mut normals = Vec::new();
        for sign in [1.0, -1.0] {
            for axis in 0..4 {
                let mut v = vec![0.0; 4];
                v[axis] = sign;
                normals.push(dir(&v));
            }
        }
        let p = Polytope::new(normals, vec![1.0; 8]).unwrap();
        assert!(p.vertices().is_empty());
        let u = dir(&[1.0, 1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(p.support_value(&u), 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(p.radial_value(&u).unwrap(), 2.0, epsilon = 1e-12);
        assert!(matches!(polar(&p), Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn ball_volume_constants() {
        assert_abs_diff_eq!(unit_ball_volume(2), PI, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sphere_area(3), 4.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_ball_volume(4), PI * PI / 2.0, epsilon = 1e-14);
    }
}
