//! Brute-force references that share no code path with the quadrature:
//! Monte-Carlo estimates of dual volumes and per-facet dual curvature masses
//! from uniform sphere samples, and a sampled verifier of the radial comparison
//! between two bodies.
//!
//! Samples are drawn in fixed-size chunks; chunk `c` uses a ChaCha8 stream
//! seeded with `seed` on stream `c`. Chunks run in parallel and are merged in
//! chunk order, so results are bit-identical for a given `(inputs, seed)`
//! regardless of the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{direction_sample, support_value, unit_ball_volume, Direction, Polytope};

/// Samples per chunk.
pub const CHUNK: usize = 1 << 16;

/// Gate used when comparing quadrature values against Monte-Carlo estimates.
pub const STD_ERROR_GATE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

impl McEstimate {
    /// `|value − mean| <= k · std_error`.
    pub fn agrees_with(&self, value: f64, k: f64) -> bool {
        (value - self.mean).abs() <= k * self.std_error
    }

    /// Deviation of `value` from the mean in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        if self.std_error == 0.0 {
            if value == self.mean {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (value - self.mean).abs() / self.std_error
        }
    }
}

/// Fills `buf` with a uniform point of the sphere (normalized Gaussian vector).
fn sample_direction(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    loop {
        let mut r2 = 0.0;
        for x in buf.iter_mut() {
            *x = StandardNormal.sample(rng);
            r2 += *x * *x;
        }
        if r2 > 1e-300 {
            let r = r2.sqrt();
            buf.iter_mut().for_each(|x| *x /= r);
            return;
        }
    }
}

/// Draws `n` uniform directions with the chunked seed schedule, folding each
/// chunk into a fresh `init()` with `step`; per-chunk results come back in order.
fn sample_chunks<T, I, F>(dim: usize, n: usize, seed: u64, init: I, step: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> T + Sync,
    F: Fn(&mut T, &[f64]) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut buf = vec![0.0; dim];
            let mut acc = init();
            for _ in 0..len {
                sample_direction(&mut rng, &mut buf);
                step(&mut acc, &buf);
            }
            acc
        })
        .collect()
}

/// `n` uniform directions with the chunked seed schedule.
pub fn uniform_directions(dim: usize, n: usize, seed: u64) -> Vec<Direction> {
    sample_chunks(dim, n, seed, Vec::new, |out: &mut Vec<Direction>, u| {
        out.push(Direction::new(u.to_vec()).expect("unit"))
    })
    .into_iter()
    .flatten()
    .collect()
}

#[derive(Clone)]
struct Sums {
    per_facet: Vec<f64>,
    per_facet_sq: Vec<f64>,
    total_sq: f64,
}

fn facet_sums(p: &Polytope, q: f64, n: usize, seed: u64) -> Sums {
    let m = p.num_facets();
    let empty = || Sums {
        per_facet: vec![0.0; m],
        per_facet_sq: vec![0.0; m],
        total_sq: 0.0,
    };
    let parts = sample_chunks(p.dim(), n, seed, empty, |s, u| {
        let (rho, cell) = p
            .radial_and_cell(u)
            .expect("valid polytope has a facet in every direction");
        let x = rho.powf(q);
        s.per_facet[cell] += x;
        s.per_facet_sq[cell] += x * x;
        s.total_sq += x * x;
    });
    let mut acc = empty();
    for s in parts {
        for i in 0..m {
            acc.per_facet[i] += s.per_facet[i];
            acc.per_facet_sq[i] += s.per_facet_sq[i];
        }
        acc.total_sq += s.total_sq;
    }
    acc
}

fn estimate(sum: f64, sum_sq: f64, n: usize, scale: f64, seed: u64) -> McEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0).max(1.0);
    McEstimate {
        mean: scale * mean,
        std_error: scale * (var / nf).sqrt(),
        samples: n,
        seed,
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n < 1000 {
        return Err(Error::InvalidConfig(format!(
            "need at least 1000 samples, got {n}"
        )));
    }
    Ok(())
}

/// `Ṽ_q(P) ≈ ω_n · mean(ρ_P(u)^q)` over `n` uniform directions.
pub fn mc_dual_volume(p: &Polytope, q: f64, n: usize, seed: u64) -> Result<McEstimate> {
    check_samples(n)?;
    let s = facet_sums(p, q, n, seed);
    let sum: f64 = s.per_facet.iter().sum();
    Ok(estimate(sum, s.total_sq, n, unit_ball_volume(p.dim()), seed))
}

/// Per-facet masses `c_i ≈ ω_n · mean(ρ^q · 1[u ∈ cell_i])`, stratified by the
/// argmin facet on the same sample as [`mc_dual_volume`].
pub fn mc_dual_curvature(p: &Polytope, q: f64, n: usize, seed: u64) -> Result<Vec<McEstimate>> {
    check_samples(n)?;
    let s = facet_sums(p, q, n, seed);
    let scale = unit_ball_volume(p.dim());
    Ok((0..p.num_facets())
        .map(|i| estimate(s.per_facet[i], s.per_facet_sq[i], n, scale, seed))
        .collect())
}

/// Which of `η_1 = {h_1 > h_2}`, `η_2 = {h_1 < h_2}`, `η_0 = {h_1 = h_2}` a normal falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Greater,
    Less,
    Equal,
}

/// Relative band inside which two support values count as equal.
const EQUAL_BAND: f64 = 1e-12;
/// Relative slack for the non-strict radial inequality on `η_2 ∪ η_0`.
const WEAK_SLACK: f64 = 1e-9;

fn side(h1: f64, h2: f64) -> Side {
    let band = EQUAL_BAND * h1.abs().max(h2.abs());
    if h1 - h2 > band {
        Side::Greater
    } else if h2 - h1 > band {
        Side::Less
    } else {
        Side::Equal
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub samples: usize,
    /// Samples whose `Q1` facet normal lies in `η_1`.
    pub in_q1_eta1: usize,
    /// Violations of `ρ_1 > ρ_2` on those samples.
    pub violations_strict: usize,
    /// Samples whose `Q2` facet normal lies in `η_2 ∪ η_0`.
    pub in_q2_eta20: usize,
    /// Violations of `ρ_2 >= ρ_1` on those samples.
    pub violations_weak: usize,
    /// Samples in `α*_{Q1}(η_1)` but not in `α*_{Q2}(η_1)`.
    pub violations_inclusion: usize,
    /// Empirical measure fraction of `α*_{Q2}(η_1)`.
    pub fraction_q2_eta1: f64,
    /// Empirical measure fraction of `α*_{Q1}(η_2)`.
    pub fraction_q1_eta2: f64,
}

impl ComparisonReport {
    pub fn violations(&self) -> usize {
        self.violations_strict + self.violations_weak + self.violations_inclusion
    }
}

/// Samples the radial comparison between `Q1` and `Q2`:
/// on `α*_{Q1}(η_1)` the radial function of `Q1` is strictly larger, on
/// `α*_{Q2}(η_2 ∪ η_0)` that of `Q2` is at least as large,
/// `α*_{Q1}(η_1) ⊂ α*_{Q2}(η_1)`, and both `α*_{Q2}(η_1)` and `α*_{Q1}(η_2)`
/// have positive measure.
///
/// The three sets `η` are probed on both normal sets plus a dense direction
/// sample; `η_0` also counts as nonempty when `η_1` and `η_2` both are, since
/// `h_1 − h_2` is continuous on the connected sphere.
pub fn comparison_check(q1: &Polytope, q2: &Polytope, n: usize, seed: u64) -> Result<ComparisonReport> {
    let dim = q1.dim();
    if q2.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: q2.dim(),
        });
    }
    let mut probe = match dim {
        2 => direction_sample(2, 4096)?,
        3 => direction_sample(3, 20_000)?,
        _ => uniform_directions(dim, 20_000, seed ^ 0x9e37_79b9_7f4a_7c15),
    };
    probe.extend(q1.normals().iter().cloned());
    probe.extend(q2.normals().iter().cloned());
    let (mut any1, mut any2, mut any0) = (false, false, false);
    for v in &probe {
        match side(support_value(q1, v), support_value(q2, v)) {
            Side::Greater => any1 = true,
            Side::Less => any2 = true,
            Side::Equal => any0 = true,
        }
    }
    any0 |= any1 && any2;
    if !(any1 && any2 && any0) {
        let mut empty = Vec::new();
        if !any1 {
            empty.push("η_1");
        }
        if !any2 {
            empty.push("η_2");
        }
        if !any0 {
            empty.push("η_0");
        }
        return Err(Error::NotApplicable(format!("{} empty", empty.join(", "))));
    }

    let side1: Vec<Side> = q1
        .normals()
        .iter()
        .map(|v| side(support_value(q1, v), support_value(q2, v)))
        .collect();
    let side2: Vec<Side> = q2
        .normals()
        .iter()
        .map(|v| side(support_value(q1, v), support_value(q2, v)))
        .collect();

    #[derive(Default)]
    struct Tally {
        in_a: usize,
        viol_a: usize,
        in_b: usize,
        viol_b: usize,
        viol_c: usize,
        q2_eta1: usize,
        q1_eta2: usize,
    }
    let parts = sample_chunks(dim, n, seed, Tally::default, |t, u| {
        let (r1, c1) = q1.radial_and_cell(u).expect("valid body");
        let (r2, c2) = q2.radial_and_cell(u).expect("valid body");
        if side1[c1] == Side::Greater {
            t.in_a += 1;
            if r1 <= r2 {
                t.viol_a += 1;
            }
            if side2[c2] != Side::Greater {
                t.viol_c += 1;
            }
        }
        if side2[c2] != Side::Greater {
            t.in_b += 1;
            if r2 < r1 * (1.0 - WEAK_SLACK) {
                t.viol_b += 1;
            }
        }
        if side2[c2] == Side::Greater {
            t.q2_eta1 += 1;
        }
        if side1[c1] == Side::Less {
            t.q1_eta2 += 1;
        }
    });
    let mut t = Tally::default();
    for p in parts {
        t.in_a += p.in_a;
        t.viol_a += p.viol_a;
        t.in_b += p.in_b;
        t.viol_b += p.viol_b;
        t.viol_c += p.viol_c;
        t.q2_eta1 += p.q2_eta1;
        t.q1_eta2 += p.q1_eta2;
    }
    Ok(ComparisonReport {
        samples: n,
        in_q1_eta1: t.in_a,
        violations_strict: t.viol_a,
        in_q2_eta20: t.in_b,
        violations_weak: t.viol_b,
        violations_inclusion: t.viol_c,
        fraction_q2_eta1: t.q2_eta1 as f64 / n as f64,
        fraction_q1_eta2: t.q1_eta2 as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::shapes::{cube, rectangle, regular_polygon, square};
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn square_dual_volume_and_masses() {
        let sq = square();
        let v = mc_dual_volume(&sq, -1.0, 200_000, 1).unwrap();
        assert!(v.agrees_with(2.0 * SQRT_2, 4.0), "{v:?}");
        let cs = mc_dual_curvature(&sq, -1.0, 200_000, 1).unwrap();
        for c in &cs {
            assert!(c.agrees_with(SQRT_2 / 2.0, 4.0), "{c:?}");
        }
        let sum: f64 = cs.iter().map(|c| c.mean).sum();
        assert!((sum - v.mean).abs() <= 1e-12 * v.mean);
    }

    #[test]
    fn ball_limit() {
        let ball = regular_polygon(256, 1.0, 0.0).unwrap();
        let v = mc_dual_volume(&ball, -3.0, 100_000, 2).unwrap();
        // ρ is within 1e-4 of 1 everywhere, far below the sampling noise floor
        assert!((v.mean - PI).abs() <= 4.0 * v.std_error + 1e-3, "{v:?}");
    }

    #[test]
    fn symmetric_bodies_split_mass_evenly() {
        let hex = regular_polygon(6, 1.0, 0.0).unwrap();
        let cs = mc_dual_curvature(&hex, -1.0, 100_000, 3).unwrap();
        let total: f64 = cs.iter().map(|c| c.mean).sum();
        for c in &cs {
            assert!(c.agrees_with(total / 6.0, 4.0 * SQRT_2));
        }
        let cube = cube(1.0).unwrap();
        let cs = mc_dual_curvature(&cube, -1.0, 100_000, 3).unwrap();
        let total: f64 = cs.iter().map(|c| c.mean).sum();
        for c in &cs {
            assert!(c.agrees_with(total / 6.0, 4.0 * SQRT_2));
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let p = square();
        let a = mc_dual_volume(&p, -2.0, 150_000, 77).unwrap();
        let b = mc_dual_volume(&p, -2.0, 150_000, 77).unwrap();
        assert_eq!(a, b);
        let c = mc_dual_volume(&p, -2.0, 150_000, 78).unwrap();
        assert_ne!(a.mean, c.mean);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let d = pool.install(|| mc_dual_volume(&p, -2.0, 150_000, 77).unwrap());
        assert_eq!(a, d);
    }

    #[test]
    fn too_few_samples() {
        assert!(mc_dual_volume(&square(), -1.0, 10, 0).is_err());
    }

    #[test]
    fn comparison_not_applicable_cases() {
        let sq = square();
        assert!(matches!(
            comparison_check(&sq, &sq, 10_000, 0),
            Err(Error::NotApplicable(_))
        ));
        let big = sq.scaled(1.0001).unwrap();
        assert!(matches!(
            comparison_check(&sq, &big, 10_000, 0),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn comparison_square_vs_rectangle() {
        let sq = square();
        let rect = rectangle(1.2, 0.9).unwrap();
        let r = comparison_check(&sq, &rect, 100_000, 5).unwrap();
        assert_eq!(r.violations(), 0, "{r:?}");
        assert!(r.in_q1_eta1 > 0 && r.in_q2_eta20 > 0);
        assert!(r.fraction_q2_eta1 > 0.0 && r.fraction_q1_eta2 > 0.0);
    }
}
