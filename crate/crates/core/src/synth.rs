//! Seeded synthetic point distributions.

use crate::geometry::Point2;
use crate::io::{Row, SeriesTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    Uniform,
    Gaussian,
    Ring,
    Mixture,
}

impl FromStr for SyntheticKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(SyntheticKind::Uniform),
            "gaussian" => Ok(SyntheticKind::Gaussian),
            "ring" => Ok(SyntheticKind::Ring),
            "mixture" => Ok(SyntheticKind::Mixture),
            other => Err(format!("unknown distribution kind '{other}'")),
        }
    }
}

/// One isotropic Gaussian component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub center: Point2,
    pub sigma: f64,
    pub weight: f64,
}

/// A fully parameterised sampling distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Distribution2 {
    /// Uniform in the axis-aligned rectangle `[min, max]`.
    Uniform {
        min: Point2,
        max: Point2,
    },
    Gaussian {
        center: Point2,
        sigma: f64,
    },
    /// Uniform by area in the annulus `r_inner <= r <= r_outer`.
    Ring {
        center: Point2,
        r_inner: f64,
        r_outer: f64,
    },
    Mixture {
        components: Vec<Component>,
    },
}

impl SyntheticKind {
    /// Default parameters, all inside the `[0, 100] x [0, 100]` square.
    pub fn default_distribution(self) -> Distribution2 {
        match self {
            SyntheticKind::Uniform => Distribution2::Uniform {
                min: Point2::new(10.0, 20.0),
                max: Point2::new(90.0, 80.0),
            },
            SyntheticKind::Gaussian => Distribution2::Gaussian {
                center: Point2::new(50.0, 50.0),
                sigma: 12.0,
            },
            SyntheticKind::Ring => Distribution2::Ring {
                center: Point2::new(50.0, 50.0),
                r_inner: 25.0,
                r_outer: 40.0,
            },
            SyntheticKind::Mixture => Distribution2::Mixture {
                components: vec![
                    Component {
                        center: Point2::new(40.0, 45.0),
                        sigma: 9.0,
                        weight: 0.5,
                    },
                    Component {
                        center: Point2::new(62.0, 48.0),
                        sigma: 7.0,
                        weight: 0.3,
                    },
                    Component {
                        center: Point2::new(50.0, 65.0),
                        sigma: 6.0,
                        weight: 0.2,
                    },
                ],
            },
        }
    }
}

impl Distribution2 {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point2 {
        match self {
            Distribution2::Uniform { min, max } => {
                Point2::new(rng.gen_range(min.x..=max.x), rng.gen_range(min.y..=max.y))
            }
            Distribution2::Gaussian { center, sigma } => gaussian(rng, *center, *sigma),
            Distribution2::Ring {
                center,
                r_inner,
                r_outer,
            } => {
                let u: f64 = rng.gen();
                let r = (r_inner * r_inner + u * (r_outer * r_outer - r_inner * r_inner)).sqrt();
                let t = rng.gen_range(0.0..TAU);
                *center + Point2::new(r * t.cos(), r * t.sin())
            }
            Distribution2::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                let mut pick = rng.gen::<f64>() * total;
                let mut chosen = components.last().expect("mixture has components");
                for c in components {
                    if pick < c.weight {
                        chosen = c;
                        break;
                    }
                    pick -= c.weight;
                }
                gaussian(rng, chosen.center, chosen.sigma)
            }
        }
    }

    /// Probability density at `p`.
    pub fn pdf(&self, p: Point2) -> f64 {
        let gauss = |c: Point2, s: f64| {
            let d2 = p.distance_squared(c);
            (-d2 / (2.0 * s * s)).exp() / (TAU * s * s)
        };
        match self {
            Distribution2::Uniform { min, max } => {
                let b = crate::geometry::BBox {
                    min: *min,
                    max: *max,
                };
                if b.contains(p) {
                    1.0 / (b.width() * b.height())
                } else {
                    0.0
                }
            }
            Distribution2::Gaussian { center, sigma } => gauss(*center, *sigma),
            Distribution2::Ring {
                center,
                r_inner,
                r_outer,
            } => {
                let r = p.distance(*center);
                if r >= *r_inner && r <= *r_outer {
                    1.0 / (std::f64::consts::PI * (r_outer * r_outer - r_inner * r_inner))
                } else {
                    0.0
                }
            }
            Distribution2::Mixture { components } => {
                let total: f64 = components.iter().map(|c| c.weight).sum();
                components
                    .iter()
                    .map(|c| c.weight / total * gauss(c.center, c.sigma))
                    .sum()
            }
        }
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, center: Point2, sigma: f64) -> Point2 {
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    Point2::new(center.x + n.sample(rng), center.y + n.sample(rng))
}

/// Draw `count` points from `dist` with a ChaCha8 stream seeded by `seed`.
pub fn sample_points(dist: &Distribution2, count: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| dist.sample(&mut rng)).collect()
}

/// Reproducible synthetic table using the default parameters for `kind`.
pub fn generate_synthetic(kind: SyntheticKind, count: usize, seed: u64) -> SeriesTable {
    generate_from(&kind.default_distribution(), count, seed, None)
}

pub fn generate_from(
    dist: &Distribution2,
    count: usize,
    seed: u64,
    series: Option<&str>,
) -> SeriesTable {
    SeriesTable {
        rows: sample_points(dist, count, seed)
            .into_iter()
            .map(|p| Row {
                x: p.x,
                y: p.y,
                series: series.map(str::to_owned),
                time: None,
            })
            .collect(),
    }
}
