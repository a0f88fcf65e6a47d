//! Seeded synthetic benchmark data sets and the balanced-class subsampler.
//!
//! Classes are emitted in order (all of class 0, then class 1, ...) and
//! their sizes differ by at most one. `noise` is the standard deviation of
//! isotropic Gaussian jitter added to every coordinate, except for
//! [`GeneratorKind::GaussianBlobs`] where it is the blob standard deviation.
//!
//! Cosine similarity only sees the angle from the origin, so each layout is
//! placed so that the origin is not the centre of any one class. The fixed
//! offsets are listed per kind.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DataSet, DenseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Upper arc `(cos t, sin t)` and lower arc `(1 − cos t, ½ − sin t)`,
    /// `t` evenly spaced on `[0, π]`, shifted by `(−½, −¼)`.
    TwoMoons,
    /// Circles of radius 1, 2 and 3 around `(4, 0)`, evenly spaced angles.
    ThreeCircles,
    /// Two thick crescents: radius uniform in `[1, 1.4]`, upper half around
    /// `(0, 0)` and lower half around `(1.2, 0.3)`, shifted by `(−0.6, −0.15)`.
    Cassine,
    /// `components` Gaussians centred on a circle of radius 5 around the
    /// origin, first centre on the positive x axis.
    GaussianBlobs { components: usize },
    /// Four compact silhouettes on the corners of a 4×4 square around the
    /// origin: filled square, filled disk, filled triangle and a ring.
    Shapes,
    /// Two eyes, a nose and a mouth arc, with the face centred at `(3, 3)`.
    Smiley,
}

impl GeneratorKind {
    pub fn class_count(&self) -> usize {
        match self {
            Self::TwoMoons | Self::Cassine => 2,
            Self::ThreeCircles => 3,
            Self::GaussianBlobs { components } => *components,
            Self::Shapes | Self::Smiley => 4,
        }
    }

    /// Noise level used when none is given.
    pub fn default_noise(&self) -> f64 {
        match self {
            Self::TwoMoons | Self::ThreeCircles => 0.05,
            Self::GaussianBlobs { .. } => 0.5,
            Self::Cassine | Self::Shapes | Self::Smiley => 0.02,
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TwoMoons => f.write_str("two-moons"),
            Self::ThreeCircles => f.write_str("three-circles"),
            Self::Cassine => f.write_str("cassine"),
            Self::GaussianBlobs { components } => write!(f, "gaussian-blobs-{components}"),
            Self::Shapes => f.write_str("shapes"),
            Self::Smiley => f.write_str("smiley"),
        }
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    /// Accepts `two-moons`, `three-circles`, `cassine`, `shapes`, `smiley`,
    /// `gaussian` / `gaussian-blobs` (3 components) or `gaussian-blobs-C`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        Ok(match s.as_str() {
            "two-moons" | "moons" => Self::TwoMoons,
            "three-circles" | "circles" => Self::ThreeCircles,
            "cassine" | "cassini" => Self::Cassine,
            "gaussian" | "gaussian-blobs" | "blobs" => Self::GaussianBlobs { components: 3 },
            "shapes" => Self::Shapes,
            "smiley" => Self::Smiley,
            other => {
                let c = other
                    .strip_prefix("gaussian-blobs-")
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::InvalidSpec(format!("unknown data set kind '{s}'")))?;
                Self::GaussianBlobs { components: c }
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub noise: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            noise: kind.default_noise(),
            seed,
        }
    }

    pub fn with_noise(mut self, noise: f64) -> Self {
        self.noise = noise;
        self
    }
}

/// Sizes of `classes` groups summing to `n`, differing by at most one.
pub fn class_sizes(n: usize, classes: usize) -> Vec<usize> {
    (0..classes)
        .map(|c| n / classes + usize::from(c < n % classes))
        .collect()
}

/// `i`-th of `count` evenly spaced values on `[lo, hi]`.
fn linspace(lo: f64, hi: f64, count: usize, i: usize) -> f64 {
    if count <= 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (count - 1) as f64
    }
}

/// Uniform point in a disk.
fn in_disk(rng: &mut ChaCha8Rng, radius: f64) -> (f64, f64) {
    let r = radius * rng.gen::<f64>().sqrt();
    let t = rng.gen_range(0.0..2.0 * PI);
    (r * t.cos(), r * t.sin())
}

/// Uniform point in an annular sector.
fn in_band(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64, t_lo: f64, t_hi: f64) -> (f64, f64) {
    let r = rng.gen_range(r_lo * r_lo..r_hi * r_hi).sqrt();
    let t = rng.gen_range(t_lo..t_hi);
    (r * t.cos(), r * t.sin())
}

fn shape_point(rng: &mut ChaCha8Rng, class: usize, i: usize, size: usize) -> (f64, f64) {
    let (cx, cy) = [(-2.0, 2.0), (2.0, 2.0), (-2.0, -2.0), (2.0, -2.0)][class];
    let (x, y) = match class {
        // square
        0 => (rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
        // disk
        1 => in_disk(rng, 0.6),
        // triangle, by folding the unit square
        2 => {
            let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
            if u + v > 1.0 {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            let (ax, ay, bx, by, qx, qy) = (-0.6, -0.5, 0.6, -0.5, 0.0, 0.6);
            (ax + u * (bx - ax) + v * (qx - ax), ay + u * (by - ay) + v * (qy - ay))
        }
        // ring: evenly spaced angles, radius jittered inside the band
        _ => {
            let t = 2.0 * PI * i as f64 / size as f64;
            let r = rng.gen_range(0.4..0.6);
            (r * t.cos(), r * t.sin())
        }
    };
    (cx + x, cy + y)
}

fn smiley_point(rng: &mut ChaCha8Rng, class: usize, i: usize, size: usize) -> (f64, f64) {
    let (x, y) = match class {
        0 => {
            let (x, y) = in_disk(rng, 0.25);
            (x - 1.0, y + 1.0)
        }
        1 => {
            let (x, y) = in_disk(rng, 0.25);
            (x + 1.0, y + 1.0)
        }
        // nose: short vertical bar
        2 => (rng.gen_range(-0.08..0.08), linspace(-0.4, 0.3, size, i)),
        // mouth: lower arc of radius 1.6 around (0, 0.3)
        _ => {
            let t = linspace(1.2 * PI, 1.8 * PI, size, i);
            (1.6 * t.cos(), 0.3 + 1.6 * t.sin())
        }
    };
    (x + 3.0, y + 3.0)
}

pub fn generate(g: &GeneratorSpec) -> Result<DataSet> {
    let classes = g.kind.class_count();
    if classes < 1 {
        return Err(Error::InvalidSpec("at least one class is required".into()));
    }
    if g.n < classes {
        return Err(Error::InvalidSpec(format!(
            "n = {} is smaller than the class count {classes}",
            g.n
        )));
    }
    if !(g.noise >= 0.0 && g.noise.is_finite()) {
        return Err(Error::InvalidSpec(format!("noise must be >= 0, got {}", g.noise)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(g.seed);
    let jitter = Normal::new(0.0, g.noise).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    let sizes = class_sizes(g.n, classes);
    let mut data = Vec::with_capacity(2 * g.n);
    let mut labels = Vec::with_capacity(g.n);

    for (class, &size) in sizes.iter().enumerate() {
        for i in 0..size {
            let (x, y) = match g.kind {
                GeneratorKind::TwoMoons => {
                    let t = linspace(0.0, PI, size, i);
                    let (x, y) = if class == 0 {
                        (t.cos(), t.sin())
                    } else {
                        (1.0 - t.cos(), 0.5 - t.sin())
                    };
                    (x - 0.5, y - 0.25)
                }
                GeneratorKind::ThreeCircles => {
                    let r = (class + 1) as f64;
                    let t = 2.0 * PI * i as f64 / size as f64;
                    (4.0 + r * t.cos(), r * t.sin())
                }
                GeneratorKind::Cassine => {
                    let (x, y) = if class == 0 {
                        in_band(&mut rng, 1.0, 1.4, 0.0, PI)
                    } else {
                        let (x, y) = in_band(&mut rng, 1.0, 1.4, PI, 2.0 * PI);
                        (x + 1.2, y + 0.3)
                    };
                    (x - 0.6, y - 0.15)
                }
                GeneratorKind::GaussianBlobs { components } => {
                    let t = 2.0 * PI * class as f64 / components as f64;
                    (5.0 * t.cos(), 5.0 * t.sin())
                }
                GeneratorKind::Shapes => shape_point(&mut rng, class, i, size),
                GeneratorKind::Smiley => smiley_point(&mut rng, class, i, size),
            };
            let (dx, dy) = if g.noise > 0.0 {
                (jitter.sample(&mut rng), jitter.sample(&mut rng))
            } else {
                (0.0, 0.0)
            };
            data.push(x + dx);
            data.push(y + dy);
            labels.push(class);
        }
    }
    let points = DenseMatrix::new(g.n, 2, data)?;
    DataSet::new(g.kind.to_string(), points, Some(labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleSpec {
    pub fraction: f64,
    pub seed: u64,
}

/// Points drawn per class: `fraction · n / classes`, rounded half up, at
/// least one.
pub fn per_class_count(n: usize, classes: usize, fraction: f64) -> usize {
    ((fraction * n as f64 / classes as f64 + 0.5).floor() as usize).max(1)
}

/// Draws the same number of points from every class without replacement.
/// Selected rows keep their original relative order. The per-class count is
/// capped at the smallest class size.
pub fn subsample_balanced(d: &DataSet, s: &SubsampleSpec) -> Result<DataSet> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    if !(s.fraction > 0.0 && s.fraction <= 1.0) {
        return Err(Error::FractionTooSmall(s.fraction));
    }
    let classes = d.class_count();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    let smallest = members.iter().map(Vec::len).min().unwrap_or(0);
    let per_class = per_class_count(d.n(), classes, s.fraction).min(smallest);
    if per_class == 0 {
        return Err(Error::FractionTooSmall(s.fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut chosen = Vec::with_capacity(per_class * classes);
    for m in &mut members {
        let (picked, _) = m.partial_shuffle(&mut rng, per_class);
        chosen.extend_from_slice(picked);
    }
    chosen.sort_unstable();
    let mut out = d.select(&chosen)?;
    out.name = format!("{}@{}", d.name, s.fraction);
    Ok(out)
}
