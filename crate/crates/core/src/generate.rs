//! Seeded random instances: measures that pass the hemisphere test and
//! polytopes whose facets are all active.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geom::{angle_between, dot, hemisphere_check, wulff_shape, Direction, DiscreteMeasure, Polytope};

pub const MAX_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub dim: usize,
    /// Number of atoms or facets.
    pub m: usize,
    /// Close the instance under `v ↦ −v`.
    pub symmetric: bool,
}

impl GenSpec {
    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidConfig(format!(
                "dimension must be at least 2, got {}",
                self.dim
            )));
        }
        if self.m < self.dim + 1 {
            return Err(Error::InvalidConfig(format!(
                "need at least {} atoms in dimension {}, got {}",
                self.dim + 1,
                self.dim,
                self.m
            )));
        }
        if self.symmetric && (!self.m.is_multiple_of(2) || self.m < 2 * self.dim) {
            return Err(Error::InvalidConfig(format!(
                "symmetric instances need an even count of at least {}, got {}",
                2 * self.dim,
                self.m
            )));
        }
        Ok(())
    }
}

fn gaussian_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Direction {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if let Ok(d) = Direction::new(v) {
            return d;
        }
    }
}

fn negated(v: &Direction) -> Direction {
    Direction::new(v.iter().map(|x| -x).collect()).expect("unit")
}

/// Uniform directions and weights in `[0.5, 2]`, resampled until the measure
/// is not concentrated on a closed hemisphere.
pub fn random_measure(spec: GenSpec, seed: u64) -> Result<DiscreteMeasure> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let (dirs, weights) = if spec.symmetric {
            let half: Vec<Direction> = (0..spec.m / 2)
                .map(|_| gaussian_direction(spec.dim, &mut rng))
                .collect();
            let w: Vec<f64> = (0..spec.m / 2).map(|_| rng.random_range(0.5..2.0)).collect();
            let dirs = half.iter().cloned().chain(half.iter().map(negated)).collect();
            (dirs, [w.clone(), w].concat())
        } else {
            let dirs = (0..spec.m)
                .map(|_| gaussian_direction(spec.dim, &mut rng))
                .collect();
            (dirs, (0..spec.m).map(|_| rng.random_range(0.5..2.0)).collect())
        };
        if let Ok(mu) = DiscreteMeasure::from_parts(dirs, weights) {
            if hemisphere_check(&mu) {
                return Ok(mu);
            }
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

/// Smallest admissible angle between two normals of a generated body.
fn separation(spec: GenSpec) -> f64 {
    if spec.dim == 2 {
        std::f64::consts::PI / spec.m as f64
    } else {
        (2.0 / spec.m as f64).sqrt().min(0.5)
    }
}

/// Normals at pairwise angle at least `sep`, by sequential dart throwing.
fn separated_normals<R: Rng + ?Sized>(spec: GenSpec, sep: f64, rng: &mut R) -> Option<Vec<Direction>> {
    let mut out: Vec<Direction> = Vec::with_capacity(spec.m);
    let target = if spec.symmetric { spec.m / 2 } else { spec.m };
    let mut darts = 0;
    while out.len() < target {
        darts += 1;
        if darts > 100 * spec.m {
            return None;
        }
        let v = gaussian_direction(spec.dim, rng);
        let clear = |u: &Direction| {
            angle_between(u, &v) >= sep
                && (!spec.symmetric || std::f64::consts::PI - angle_between(u, &v) >= sep)
        };
        if out.iter().all(clear) {
            out.push(v);
        }
    }
    if spec.symmetric {
        let back: Vec<Direction> = out.iter().map(negated).collect();
        out.extend(back);
    }
    Some(out)
}

/// A polytope with `m` active facets: a body circumscribed about the unit
/// ball with slightly jittered supports, mapped by a random linear map and,
/// unless symmetric, translated while keeping the origin interior.
pub fn random_body(spec: GenSpec, seed: u64) -> Result<Polytope> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.dim;
    let sep = separation(spec);
    // support jitter that keeps every tangent point strictly inside the others
    let jitter = 0.5 * (1.0 / sep.cos() - 1.0);
    for _ in 0..MAX_ATTEMPTS {
        let Some(normals) = separated_normals(spec, sep, &mut rng) else {
            continue;
        };
        let mut h: Vec<f64> = (0..spec.m).map(|_| 1.0 + jitter * rng.random::<f64>()).collect();
        if spec.symmetric {
            let half = spec.m / 2;
            for i in 0..half {
                h[half + i] = h[i];
            }
        }
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| {
            let g: f64 = StandardNormal.sample(&mut rng);
            if i == j {
                1.0 + 0.3 * g
            } else {
                0.3 * g
            }
        });
        let Some(inv_t) = a.clone().try_inverse().map(|m| m.transpose()) else {
            continue;
        };
        let mut new_normals = Vec::with_capacity(spec.m);
        let mut new_h = Vec::with_capacity(spec.m);
        for (v, hv) in normals.iter().zip(&h) {
            let w = &inv_t * nalgebra::DVector::from_column_slice(v);
            let r = w.norm();
            new_normals.push(Direction::new(w.as_slice().to_vec())?);
            new_h.push(hv / r);
        }
        if !spec.symmetric {
            let t_dir = gaussian_direction(n, &mut rng);
            let hmin = new_h.iter().cloned().fold(f64::INFINITY, f64::min);
            let t: Vec<f64> = t_dir
                .iter()
                .map(|x| x * 0.3 * hmin * rng.random::<f64>())
                .collect();
            for (hv, v) in new_h.iter_mut().zip(&new_normals) {
                *hv += dot(v, &t);
            }
        }
        if new_h.iter().any(|h| !(*h > 0.0)) {
            continue;
        }
        if let Ok(p) = wulff_shape(new_normals, new_h) {
            if p.active().iter().all(|&a| a) {
                return Ok(p);
            }
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measures_are_reproducible_and_valid() {
        let spec = GenSpec {
            dim: 2,
            m: 12,
            symmetric: false,
        };
        let a = random_measure(spec, 7).unwrap();
        assert_eq!(a, random_measure(spec, 7).unwrap());
        assert_ne!(a, random_measure(spec, 8).unwrap());
        assert!(hemisphere_check(&a));
        assert_eq!(a.len(), 12);
    }

    #[test]
    fn symmetric_measures_are_closed_under_antipodes() {
        let mu = random_measure(
            GenSpec {
                dim: 3,
                m: 10,
                symmetric: true,
            },
            3,
        )
        .unwrap();
        for a in mu.atoms() {
            let anti = mu
                .atoms()
                .iter()
                .find(|b| angle_between(&b.v, &negated(&a.v)) < 1e-15)
                .unwrap();
            assert_eq!(anti.w, a.w);
        }
    }

    #[test]
    fn bodies_have_all_facets_active() {
        for (dim, m) in [(2, 4), (2, 40), (3, 6), (3, 20)] {
            for seed in 0..5 {
                for symmetric in [false, true] {
                    let spec = GenSpec { dim, m, symmetric };
                    let p = random_body(spec, seed).unwrap();
                    assert_eq!(p.num_facets(), m);
                    assert!(p.active().iter().all(|&a| a), "{spec:?} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn rejects_too_few_atoms() {
        let spec = GenSpec {
            dim: 3,
            m: 3,
            symmetric: false,
        };
        assert!(matches!(random_measure(spec, 0), Err(Error::InvalidConfig(_))));
    }
}
