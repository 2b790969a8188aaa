//! Band geometry, styling and deterministic SVG output.

mod color;
mod heat;
mod svg;

pub use color::{lab_ramp, palette, Lab, Rgb, QUAL6, SET1, TIME_END, TIME_START};
pub use heat::{render_heat_reference, HeatLayer, HeatRaster};
pub use svg::{fmt3, legend_panel_height, render_svg, LEGEND_PANEL_WIDTH};

use crate::curve::SegmentedCurve;
use crate::density::{InscribedCircle, WidthProfile};
use crate::geometry::{signed_area, BBox, Point2};
use crate::legend::LegendSpec;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use thiserror::Error;

/// Bands never reach further in than this fraction of the local inscribed
/// radius.
pub const WIDTH_CLAMP: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("nothing to render")]
    EmptyScene,
    #[error("invalid colour '{0}'")]
    BadColor(String),
    #[error("unknown palette '{0}'")]
    UnknownPalette(String),
    #[error("heat bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
    #[error("a time gradient needs at least 2 steps, got {0}")]
    TooFewTimeSteps(usize),
    #[error("canvas transform is not invertible")]
    SingularTransform,
    #[error("cannot encode raster: {0}")]
    Encode(String),
}

/// Uniform scale plus translation with the y axis flipped, so map north is
/// up on the canvas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transform {
    /// Render units per map unit.
    pub scale: f64,
    pub tx: f64,
    pub ty: f64,
}

impl Transform {
    /// Fit `bbox` into a `width`-wide drawing area with `margin` on every
    /// side, centred horizontally. Tall extents are shrunk so the area is at
    /// most 1.5 times as high as it is wide. Returns the transform and the
    /// resulting area height.
    pub fn fit(bbox: &BBox, width: f64, margin: f64) -> Result<(Transform, f64), RenderError> {
        let inner = width - 2.0 * margin;
        let span = bbox.width().max(bbox.height() / 1.5);
        let scale = inner / span;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(RenderError::SingularTransform);
        }
        let height = bbox.height() * scale + 2.0 * margin;
        let pad = 0.5 * (inner - bbox.width() * scale);
        Ok((
            Transform {
                scale,
                tx: margin + pad - bbox.min.x * scale,
                ty: margin + bbox.max.y * scale,
            },
            height,
        ))
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        Point2::new(p.x * self.scale + self.tx, self.ty - p.y * self.scale)
    }

    pub fn invert(&self, q: Point2) -> Point2 {
        Point2::new((q.x - self.tx) / self.scale, (self.ty - q.y) / self.scale)
    }

    /// Map units covered by one render unit.
    pub fn map_per_unit(&self) -> f64 {
        1.0 / self.scale
    }
}

/// The filled region between the curve and its per-divisor inward offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhoenixBand {
    pub series: String,
    pub outer: Vec<Point2>,
    pub inner: Vec<Point2>,
    pub color: Rgb,
    pub opacity: f64,
}

impl PhoenixBand {
    /// Area between the two rings, in map units squared.
    pub fn area(&self) -> f64 {
        signed_area(&self.outer).abs() - signed_area(&self.inner).abs()
    }

    /// Per-divisor band width in map units.
    pub fn widths(&self) -> Vec<f64> {
        self.outer
            .iter()
            .zip(&self.inner)
            .map(|(a, b)| a.distance(*b))
            .collect()
    }
}

/// Offset each divisor inward by its rendered width converted to map units,
/// clamped to `0.95 r_i`.
pub fn band_from_parts(
    divisors: &[Point2],
    normals: &[Point2],
    radii: &[f64],
    render_widths: &[f64],
    map_per_unit: f64,
) -> PhoenixBand {
    assert!(
        divisors.len() == normals.len()
            && divisors.len() == radii.len()
            && divisors.len() == render_widths.len(),
        "band inputs must have one entry per divisor"
    );
    let inner = divisors
        .iter()
        .zip(normals)
        .zip(radii.iter().zip(render_widths))
        .map(|((&v, &n), (&r, &w))| {
            let depth = (w * map_per_unit).clamp(0.0, WIDTH_CLAMP * r);
            v + n * depth
        })
        .collect();
    PhoenixBand {
        series: String::new(),
        outer: divisors.to_vec(),
        inner,
        color: QUAL6[0],
        opacity: 1.0,
    }
}

pub fn build_band(
    curve: &SegmentedCurve,
    circles: &[InscribedCircle],
    profile: &WidthProfile,
    map_per_unit: f64,
) -> PhoenixBand {
    assert_eq!(profile.len(), curve.len(), "one width per divisor");
    let radii: Vec<f64> = circles.iter().map(|c| c.radius).collect();
    band_from_parts(
        curve.divisors(),
        curve.inward_normals(),
        &radii,
        &profile.widths(),
        map_per_unit,
    )
}

/// Compare time labels numerically when both parse as numbers, otherwise as
/// text.
pub fn compare_time(a: &str, b: &str) -> Ordering {
    match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        _ => a.cmp(b),
    }
}

/// Colour bands along a CIELAB ramp from `start` (earliest) to `end`
/// (latest) and return them earliest first, so the latest is drawn on top.
pub fn render_time_gradient(
    bands: Vec<(String, PhoenixBand)>,
    start: Rgb,
    end: Rgb,
) -> Result<Vec<PhoenixBand>, RenderError> {
    if bands.len() < 2 {
        return Err(RenderError::TooFewTimeSteps(bands.len()));
    }
    let mut bands = bands;
    bands.sort_by(|a, b| compare_time(&a.0, &b.0));
    let ramp = lab_ramp(start, end, bands.len());
    Ok(bands
        .into_iter()
        .zip(ramp)
        .map(|((_, mut band), c)| {
            band.color = c;
            band
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Heat,
    Bands,
    Dots,
    Legend,
}

pub const DEFAULT_LAYERS: [Layer; 4] = [Layer::Heat, Layer::Bands, Layer::Dots, Layer::Legend];

/// A static image placed under everything else, stretched over `bbox`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub href: String,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub width: f64,
    pub height: f64,
    pub transform: Transform,
    pub layers: Vec<Layer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub background: Option<Background>,
    /// Left edge of the legend column, in render units.
    pub legend_x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DotLayer {
    pub series: String,
    pub points: Vec<Point2>,
    pub color: Rgb,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendPanel {
    pub title: String,
    pub color: Rgb,
    pub legend: LegendSpec,
}

/// Everything `render_svg` draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub spec: RenderSpec,
    pub bands: Vec<PhoenixBand>,
    pub legends: Vec<LegendPanel>,
    pub dots: Vec<DotLayer>,
    pub heat: Option<HeatLayer>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{segment_curve, ClosedCurve};
    use crate::density::inscribed_circles;
    use std::f64::consts::PI;

    #[test]
    fn transform_round_trip_and_flip() {
        let bbox = BBox {
            min: Point2::new(-5.0, 10.0),
            max: Point2::new(15.0, 20.0),
        };
        let (t, h) = Transform::fit(&bbox, 220.0, 10.0).unwrap();
        assert!((t.scale - 10.0).abs() < 1e-12);
        assert!((h - 120.0).abs() < 1e-9);
        let top_left = t.apply(Point2::new(-5.0, 20.0));
        assert!(top_left.distance(Point2::new(10.0, 10.0)) < 1e-9);
        let p = Point2::new(3.3, 14.7);
        assert!(t.invert(t.apply(p)).distance(p) < 1e-12);
    }

    #[test]
    fn zero_widths_give_zero_area() {
        let seg = segment_curve(&ClosedCurve::circle(Point2::new(0.0, 0.0), 1.0, 8), 64).unwrap();
        let circles = inscribed_circles(&seg).unwrap();
        let profile = WidthProfile {
            raw: vec![0.0; 64],
            smoothed: vec![0.0; 64],
            scale: 1.0,
            window: 4,
        };
        let band = build_band(&seg, &circles, &profile, 1.0);
        assert_eq!(band.inner, band.outer);
        assert_eq!(band.area(), 0.0);
    }

    #[test]
    fn constant_width_on_a_circle_is_an_annulus() {
        let (r, w) = (10.0, 2.5);
        let seg = segment_curve(&ClosedCurve::circle(Point2::new(3.0, -1.0), r, 8), 3000).unwrap();
        let circles = inscribed_circles(&seg).unwrap();
        let profile = WidthProfile {
            raw: vec![1.0; 3000],
            smoothed: vec![1.0; 3000],
            scale: 50.0,
            window: 1,
        };
        let band = build_band(&seg, &circles, &profile, w / 50.0);
        let annulus = PI * (r * r - (r - w) * (r - w));
        assert!((band.area() - annulus).abs() / annulus < 1e-3);
    }

    #[test]
    fn widths_clamp_to_inscribed_radius() {
        let band = band_from_parts(
            &[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)],
            &[Point2::new(0.0, 1.0), Point2::new(0.0, 1.0)],
            &[1.0, 2.0],
            &[100.0, 0.5],
            1.0,
        );
        assert!((band.inner[0].y - 0.95).abs() < 1e-15);
        assert!((band.inner[1].y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn time_gradient_orders_and_colours() {
        let mk = |s: &str| {
            (
                s.to_owned(),
                PhoenixBand {
                    series: s.to_owned(),
                    outer: vec![],
                    inner: vec![],
                    color: QUAL6[0],
                    opacity: 1.0,
                },
            )
        };
        let forward = vec![mk("2015"), mk("2016"), mk("9"), mk("2021")];
        let out = render_time_gradient(forward.clone(), TIME_START, TIME_END).unwrap();
        let order: Vec<&str> = out.iter().map(|b| b.series.as_str()).collect();
        assert_eq!(order, ["9", "2015", "2016", "2021"]);
        assert_eq!(out[0].color, TIME_START);
        assert_eq!(out[3].color, TIME_END);
        let mut reversed = forward;
        reversed.reverse();
        assert_eq!(
            render_time_gradient(reversed, TIME_START, TIME_END).unwrap(),
            out
        );
        assert_eq!(
            render_time_gradient(vec![mk("1")], TIME_START, TIME_END),
            Err(RenderError::TooFewTimeSteps(1))
        );
    }
}
