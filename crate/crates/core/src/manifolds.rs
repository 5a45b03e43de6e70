//! Benchmark point sets in three dimensions: two spheres, a Swiss roll and
//! three tori.
//!
//! Regular shapes are deterministic lattices; random shapes draw from a
//! ChaCha8 stream seeded by [`ManifoldSpec::seed`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Configuration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifoldShape {
    SphereRegular,
    SphereRandom,
    SwissRoll,
    TorusRandom,
    TorusLargeRegular,
    TorusSmallRegular,
}

impl ManifoldShape {
    pub const ALL: [ManifoldShape; 6] = [
        ManifoldShape::SphereRegular,
        ManifoldShape::SphereRandom,
        ManifoldShape::SwissRoll,
        ManifoldShape::TorusRandom,
        ManifoldShape::TorusLargeRegular,
        ManifoldShape::TorusSmallRegular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ManifoldShape::SphereRegular => "sphere_regular",
            ManifoldShape::SphereRandom => "sphere_random",
            ManifoldShape::SwissRoll => "swiss_roll",
            ManifoldShape::TorusRandom => "torus_random",
            ManifoldShape::TorusLargeRegular => "torus_large_regular",
            ManifoldShape::TorusSmallRegular => "torus_small_regular",
        }
    }

    fn default_radii(self) -> (f64, f64) {
        match self {
            ManifoldShape::TorusLargeRegular => (10.0, 2.0),
            ManifoldShape::TorusSmallRegular => (3.0, 2.0),
            _ => (6.0, 2.0),
        }
    }

    fn is_torus(self) -> bool {
        matches!(
            self,
            ManifoldShape::TorusRandom | ManifoldShape::TorusLargeRegular | ManifoldShape::TorusSmallRegular
        )
    }
}

impl fmt::Display for ManifoldShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ManifoldShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ManifoldShape::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Unknown { what: "shape", name: s.to_string() })
    }
}

/// Shape parameters. Unset values take the per-shape defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShapeParams {
    /// Sphere radius (default 1).
    pub radius: Option<f64>,
    /// Torus ring radius `R`.
    pub ring_radius: Option<f64>,
    /// Torus tube radius `r`.
    pub tube_radius: Option<f64>,
    /// Swiss roll turns; the angle runs over `[1.5 pi, 1.5 pi + 2 pi turns]` (default 1.5).
    pub turns: Option<f64>,
    /// Swiss roll height (default 21).
    pub height: Option<f64>,
    /// Swiss roll: sample `(phi, h)` uniformly at random instead of on a grid.
    pub random: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub shape: ManifoldShape,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ShapeParams,
}

impl ManifoldSpec {
    pub fn new(shape: ManifoldShape, n: usize, seed: u64) -> Self {
        Self { shape, n, seed, params: ShapeParams::default() }
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

/// Lattice shape `(a, b)` with `a * b >= n` and `a / b` close to `ratio`.
///
/// Exact factor pairs are preferred (closest ratio in log terms, squarer on
/// ties). When `n` has no factor pair within a factor of 4 of the target,
/// the lattice is `b` rows of `a` with a partial last row.
pub(crate) fn lattice_shape(n: usize, ratio: f64) -> (usize, usize) {
    let target = ratio.ln();
    let mut best: Option<(f64, f64, usize, usize)> = None;
    for b in 1..=n {
        if n % b != 0 {
            continue;
        }
        let a = n / b;
        let err = ((a as f64 / b as f64).ln() - target).abs();
        let skew = (a as f64 / b as f64).ln().abs();
        let better = match best {
            None => true,
            Some((e, s, _, _)) => err < e - 1e-12 || ((err - e).abs() <= 1e-12 && skew < s),
        };
        if better {
            best = Some((err, skew, a, b));
        }
    }
    let (err, _, a, b) = best.unwrap_or((f64::INFINITY, 0.0, n, 1));
    if err <= 4f64.ln() + 1e-12 && a.min(b) >= 3.min(n) {
        return (a, b);
    }
    let b = ((n as f64 / ratio).sqrt().round() as usize).clamp(1, n);
    let a = n.div_ceil(b);
    (a, b)
}

/// Generates the `n x 3` point set described by `spec`.
pub fn generate(spec: &ManifoldSpec) -> Result<Configuration> {
    let n = spec.n;
    if n < 4 {
        return Err(Error::TooSmall { what: "manifold points", min: 4, got: n });
    }
    let p = &spec.params;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut pts: Vec<f64> = Vec::with_capacity(3 * n);
    match spec.shape {
        ManifoldShape::SphereRegular | ManifoldShape::SphereRandom => {
            let rad = positive("radius", p.radius.unwrap_or(1.0))?;
            for i in 0..n {
                let (z, theta) = if spec.shape == ManifoldShape::SphereRegular {
                    // Fibonacci lattice
                    let golden = PI * (3.0 - 5f64.sqrt());
                    (1.0 - (2 * i + 1) as f64 / n as f64, golden * i as f64)
                } else {
                    (rng.random_range(-1.0..=1.0), rng.random_range(0.0..2.0 * PI))
                };
                let s = (1.0 - z * z).max(0.0).sqrt();
                pts.extend([rad * s * theta.cos(), rad * s * theta.sin(), rad * z]);
            }
        }
        ManifoldShape::SwissRoll => {
            let turns = positive("turns", p.turns.unwrap_or(1.5))?;
            let height = positive("height", p.height.unwrap_or(21.0))?;
            let (lo, hi) = (1.5 * PI, 1.5 * PI + 2.0 * PI * turns);
            let point = |phi: f64, h: f64| [phi * phi.cos(), h, phi * phi.sin()];
            if p.random.unwrap_or(false) {
                for _ in 0..n {
                    let phi = rng.random_range(lo..=hi);
                    let h = rng.random_range(0.0..=height);
                    pts.extend(point(phi, h));
                }
            } else {
                // grid in (phi, h); aspect from arc length against height
                let arc = 0.5 * (hi * hi - lo * lo);
                let (a, b) = lattice_shape(n, arc / height);
                for idx in 0..n {
                    let (i, j) = (idx % a, idx / a);
                    let phi = lo + (hi - lo) * (i as f64 + 0.5) / a as f64;
                    let h = height * (j as f64 + 0.5) / b as f64;
                    pts.extend(point(phi, h));
                }
            }
        }
        shape if shape.is_torus() => {
            let (dr, dt) = shape.default_radii();
            let big = positive("ring_radius", p.ring_radius.unwrap_or(dr))?;
            let small = positive("tube_radius", p.tube_radius.unwrap_or(dt))?;
            if big <= small {
                return Err(Error::InvalidParameter(format!(
                    "torus needs ring_radius > tube_radius, got {big} <= {small}"
                )));
            }
            let point = |u: f64, v: f64| {
                let ring = big + small * v.cos();
                [ring * u.cos(), small * v.sin(), ring * u.sin()]
            };
            if shape == ManifoldShape::TorusRandom {
                for _ in 0..n {
                    let u = rng.random_range(0.0..2.0 * PI);
                    // surface element is proportional to R + r cos v
                    let v = loop {
                        let v: f64 = rng.random_range(0.0..2.0 * PI);
                        let accept: f64 = rng.random_range(0.0..1.0);
                        if accept * (big + small) <= big + small * v.cos() {
                            break v;
                        }
                    };
                    pts.extend(point(u, v));
                }
            } else {
                let (a, b) = lattice_shape(n, big / small);
                for idx in 0..n {
                    let (i, j) = (idx % a, idx / a);
                    let u = 2.0 * PI * i as f64 / a as f64;
                    let v = 2.0 * PI * j as f64 / b as f64;
                    pts.extend(point(u, v));
                }
            }
        }
        _ => unreachable!("every shape is handled"),
    }
    Configuration::from_flat(n, 3, pts)
}
