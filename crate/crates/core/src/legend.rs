//! Radial density profile and width-scale bars.

use crate::density::{quad_area, Slicing, WidthProfile};
use crate::geometry::{orient, Point2, PointSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const UNITS_NAME: &str = "P / SQU";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LegendError {
    #[error("radial profile needs at least 2 bins, got {0}")]
    TooFewBins(usize),
    #[error("width legend needs at least 1 bar")]
    NoBars,
    #[error("point set has {points} points but the slicing assigned {assigned}")]
    PointMismatch { points: usize, assigned: usize },
}

/// Density per radial sub-section, index 0 on the centre side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub density: Vec<f64>,
    pub area: Vec<f64>,
    pub count: Vec<usize>,
}

impl RadialProfile {
    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    /// `sum(count) / sum(area)`, which is also the area-weighted mean bin.
    pub fn mean_density(&self) -> f64 {
        let area: f64 = self.area.iter().sum();
        if area > 0.0 {
            self.count.iter().sum::<usize>() as f64 / area
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthBar {
    /// Points per square unit.
    pub density: f64,
    /// Render units.
    pub width: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendSpec {
    pub radial_profile: Vec<f64>,
    pub width_bars: Vec<WidthBar>,
    pub units_name: String,
}

/// Cut every slice into `m` strips between its centre edge `(o_i, o_{i+1})`
/// and its curve edge `(v_i, v_{i+1})`, then pool counts and areas per strip
/// index across slices.
pub fn radial_profile(
    slicing: &Slicing,
    points: &PointSet,
    m: usize,
) -> Result<RadialProfile, LegendError> {
    if m < 2 {
        return Err(LegendError::TooFewBins(m));
    }
    if slicing.assignment.len() != points.len() {
        return Err(LegendError::PointMismatch {
            points: points.len(),
            assigned: slicing.assignment.len(),
        });
    }
    let mut area = vec![0.0; m];
    let mut count = vec![0usize; m];
    for s in &slicing.slices {
        let [v0, v1, o1, o0] = s.quad;
        let strip_areas: Vec<f64> = (0..m)
            .map(|j| {
                let (t0, t1) = (j as f64 / m as f64, (j + 1) as f64 / m as f64);
                quad_area(&[
                    o0.lerp(v0, t0),
                    o1.lerp(v1, t0),
                    o1.lerp(v1, t1),
                    o0.lerp(v0, t1),
                ])
                .0
            })
            .collect();
        // a floored slice area is spread the same way as its real area
        let real: f64 = strip_areas.iter().sum();
        let stretch = if real > 0.0 { s.area / real } else { 0.0 };
        for (j, a) in strip_areas.into_iter().enumerate() {
            area[j] += if real > 0.0 {
                a * stretch
            } else {
                s.area / m as f64
            };
        }
    }
    for (p, slot) in points.points.iter().zip(&slicing.assignment) {
        if let Some(i) = *slot {
            let [v0, v1, o1, o0] = slicing.slices[i].quad;
            let t = radial_coordinate(*p, o0, o1, v0, v1);
            count[((t * m as f64) as usize).min(m - 1)] += 1;
        }
    }
    let density = count
        .iter()
        .zip(&area)
        .map(|(&c, &a)| if a > 0.0 { c as f64 / a } else { 0.0 })
        .collect();
    Ok(RadialProfile {
        density,
        area,
        count,
    })
}

/// The `t` in `[0, 1]` whose cross-section `o0 + t (v0 - o0)` to
/// `o1 + t (v1 - o1)` passes through `p`, found by bisection on the side of
/// `p` relative to that cross-section. Points outside the slice clamp to
/// the nearer end.
fn radial_coordinate(p: Point2, o0: Point2, o1: Point2, v0: Point2, v1: Point2) -> f64 {
    let side = |t: f64| orient(o0.lerp(v0, t), o1.lerp(v1, t), p);
    let (mut lo, mut hi) = (0.0, 1.0);
    let (f_lo, f_hi) = (side(lo), side(hi));
    if f_lo == 0.0 {
        return 0.0;
    }
    if f_lo.signum() == f_hi.signum() {
        return if f_lo.abs() <= f_hi.abs() { 0.0 } else { 1.0 };
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if side(mid).signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A density written as `digits * 10^exp`, so labels never pick up binary
/// rounding noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Decimal {
    digits: u64,
    exp: i32,
}

impl Decimal {
    fn to_f64(self) -> f64 {
        self.to_string().parse().expect("decimal text parses")
    }
}

impl std::fmt::Display for Decimal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut digits = self.digits;
        let mut exp = self.exp;
        while exp < 0 && digits.is_multiple_of(10) && digits > 0 {
            digits /= 10;
            exp += 1;
        }
        if exp >= 0 {
            write!(f, "{}", digits as u128 * 10u128.pow(exp as u32))
        } else {
            let s = digits.to_string();
            let frac = (-exp) as usize;
            if s.len() > frac {
                write!(f, "{}.{}", &s[..s.len() - frac], &s[s.len() - frac..])
            } else {
                write!(f, "0.{}{}", "0".repeat(frac - s.len()), s)
            }
        }
    }
}

/// Largest step of the form `{1, 2, 2.5, 5} * 10^k` not above `x`, as
/// `(mantissa in tenths, k)`.
fn round_step_below(x: f64) -> (u64, i32) {
    let k = x.log10().floor() as i32;
    let lead = x / 10f64.powi(k);
    let mantissa = [50u64, 25, 20, 10]
        .into_iter()
        .find(|&m| m as f64 / 10.0 <= lead * (1.0 + 1e-12))
        .unwrap_or(10);
    (mantissa, k)
}

/// `count` round-number densities `step, 2 step, ..`, with the step chosen
/// so the last one does not exceed `max`.
pub fn round_steps(max: f64, count: usize) -> Vec<(f64, String)> {
    if !(max > 0.0) || !max.is_finite() || count == 0 {
        return Vec::new();
    }
    let (mantissa, k) = round_step_below(max / count as f64);
    (1..=count as u64)
        .map(|i| {
            let d = Decimal {
                digits: i * mantissa,
                exp: k - 1,
            };
            (d.to_f64(), d.to_string())
        })
        .collect()
}

/// Reference bars for the smoothed density range of `profile`, drawn at
/// `density * scale`. An all-zero profile has no bars.
pub fn width_bars(profile: &WidthProfile, count: usize) -> Result<Vec<WidthBar>, LegendError> {
    if count == 0 {
        return Err(LegendError::NoBars);
    }
    Ok(round_steps(profile.max_smoothed(), count)
        .into_iter()
        .map(|(density, text)| WidthBar {
            density,
            width: density * profile.scale,
            label: format!("{text} {UNITS_NAME}"),
        })
        .collect())
}

pub fn legend_spec(
    slicing: &Slicing,
    points: &PointSet,
    profile: &WidthProfile,
    bins: usize,
    bars: usize,
) -> Result<LegendSpec, LegendError> {
    Ok(LegendSpec {
        radial_profile: radial_profile(slicing, points, bins)?.density,
        width_bars: width_bars(profile, bars)?,
        units_name: UNITS_NAME.to_owned(),
    })
}
