//! End-to-end orchestration: per-group geometry, shared scaling, layout,
//! and the JSON sidecar that reproduces the SVG.

use crate::curve::{fit_closed_bezier, segment_curve, CurveError, SegmentedCurve};
use crate::density::{
    build_slices, inscribed_circles, scale_widths, smooth_widths, DensityError, InscribedCircle,
    Slicing, WidthProfile,
};
use crate::geometry::{
    close_notches, concave_hull_with_k, convex_hull, fill_dents, offset_outline,
    round_reflex_corners, BBox, GeometryError, Outline, Point2, PointSet,
};
use crate::io::{GroupKey, SeriesTable};
use crate::legend::{legend_spec, LegendError, LegendSpec};
use crate::render::{
    band_from_parts, compare_time, legend_panel_height, palette, render_heat_reference, render_svg,
    DotLayer, HeatLayer, LegendPanel, PhoenixBand, RenderError, RenderSpec, Rgb, Scene, Transform,
    DEFAULT_LAYERS, LEGEND_PANEL_WIDTH, TIME_END, TIME_START,
};
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

pub const MIN_GROUP_POINTS: usize = 3;
/// Default offset as a fraction of the outline's bounding-box diagonal.
pub const DEFAULT_OFFSET_FRACTION: f64 = 0.02;
const MAX_OFFSET_HALVINGS: usize = 10;
const REFLEX_ROUNDING_PASSES: usize = 2;
const MAP_MARGIN: f64 = 20.0;
const PANEL_GAP: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HullMode {
    #[default]
    Concave,
    Convex,
    Predefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Number of curve segments `n`.
    pub segments: usize,
    /// Smoothing half-window `x`; `n / 10` when unset.
    pub window: Option<usize>,
    /// Fixed density-to-width scale `c`; chosen from `max_width` when unset.
    pub scale: Option<f64>,
    /// Widest band in render units under automatic scaling.
    pub max_width: f64,
    /// Outline offset `b` in map units. Unset means `0.02 * diagonal` for
    /// computed hulls and no offset for a predefined outline.
    pub offset: Option<f64>,
    pub hull_k: usize,
    pub hull_mode: HullMode,
    pub legend_bins: usize,
    pub legend_bars: usize,
    pub legend: bool,
    pub palette: String,
    pub time_start: Rgb,
    pub time_end: Rgb,
    /// Width of the map area in render units.
    pub canvas_width: f64,
    pub opacity: f64,
    pub dots: bool,
    pub dot_radius: f64,
    /// Bandwidth of the reference heat layer in map units; no layer when
    /// unset.
    pub heat_bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outline: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sidecar: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            segments: 3000,
            window: None,
            scale: None,
            max_width: 30.0,
            offset: None,
            hull_k: 3,
            hull_mode: HullMode::Concave,
            legend_bins: 100,
            legend_bars: 4,
            legend: true,
            palette: "qual6".to_owned(),
            time_start: TIME_START,
            time_end: TIME_END,
            canvas_width: 800.0,
            opacity: 0.85,
            dots: false,
            dot_radius: 1.5,
            heat_bandwidth: None,
            input: None,
            outline: None,
            out: None,
            sidecar: None,
        }
    }
}

impl Config {
    pub fn resolved_window(&self) -> usize {
        self.window.unwrap_or((self.segments / 10).max(1))
    }

    /// Copy with every defaulted value that does not depend on the data
    /// filled in.
    pub fn resolved(&self) -> Config {
        Config {
            window: Some(self.resolved_window()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        let n = self.segments;
        if n < 16 {
            return bad(format!("segments must be at least 16, got {n}"));
        }
        let x = self.resolved_window();
        if x < 1 || x > n / 2 {
            return bad(format!("window must lie in [1, {}], got {x}", n / 2));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if let Some(b) = self.offset.filter(|&b| !positive(b)) {
            return bad(format!("offset must be positive, got {b}"));
        }
        if let Some(c) = self.scale.filter(|&c| !positive(c)) {
            return bad(format!("scale must be positive, got {c}"));
        }
        if !positive(self.max_width) {
            return bad(format!(
                "max width must be positive, got {}",
                self.max_width
            ));
        }
        if self.hull_k < 3 {
            return bad(format!("hull k must be at least 3, got {}", self.hull_k));
        }
        if self.legend_bins < 2 || self.legend_bars < 1 {
            return bad("legend needs at least 2 bins and 1 bar".to_owned());
        }
        if !positive(self.canvas_width) || self.canvas_width <= 2.0 * MAP_MARGIN {
            return bad(format!("canvas width too small: {}", self.canvas_width));
        }
        if !(0.0..=1.0).contains(&self.opacity) {
            return bad(format!("opacity must lie in [0, 1], got {}", self.opacity));
        }
        if let Some(h) = self.heat_bandwidth.filter(|&h| !positive(h)) {
            return bad(format!("heat bandwidth must be positive, got {h}"));
        }
        palette(&self.palette)?;
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GroupError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Legend(#[from] LegendError),
    #[error("no smooth simple curve found around the outline")]
    NoValidCurve,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("a predefined outline was requested but none was given")]
    MissingOutline,
    #[error("no group has at least {MIN_GROUP_POINTS} points")]
    NoGroups,
    #[error("group '{group}': {source}")]
    Group {
        group: String,
        #[source]
        source: GroupError,
    },
    #[error(transparent)]
    Render(#[from] RenderError),
}

/// Every geometric intermediate for one point group.
#[derive(Debug, Clone)]
pub struct GroupGeometry {
    /// Hull or predefined outline before any adjustment.
    pub base: Outline,
    /// `k` the concave hull settled on; `None` for convex or predefined.
    pub hull_k: Option<usize>,
    /// Offset actually applied, after any halving.
    pub offset: Option<f64>,
    /// Polygon the curve was fitted through.
    pub control: Outline,
    pub curve: SegmentedCurve,
    pub circles: Vec<InscribedCircle>,
}

fn spacing_ladder(mode: HullMode) -> &'static [f64] {
    // divisors of the diagonal; 0 fits through the polygon vertices as-is
    match mode {
        HullMode::Predefined => &[64.0, 128.0, 256.0],
        _ => &[0.0, 8.0, 16.0, 32.0, 64.0, 128.0],
    }
}

/// Outline, offset and fitted curve for one group.
///
/// Computed hulls first get notches narrower than `4 b` bridged and dents
/// shallower than `2 b` filled. After offsetting, reflex corners are
/// rounded. The curve is then fitted through the vertices directly and, if
/// it self-intersects, has no valid inscribed circles or leaves a point
/// outside, through progressively denser resamplings.
pub fn group_geometry(
    points: &PointSet,
    config: &Config,
    predefined: Option<&Outline>,
) -> Result<GroupGeometry, GroupError> {
    let (base, hull_k) = match config.hull_mode {
        HullMode::Concave => concave_hull_with_k(points, config.hull_k)?,
        HullMode::Convex => (convex_hull(points)?, None),
        HullMode::Predefined => (
            predefined.cloned().ok_or(GeometryError::InvalidParameter(
                "predefined outline missing".to_owned(),
            ))?,
            None,
        ),
    };
    let diag = base.bbox().diagonal();
    let computed = config.hull_mode != HullMode::Predefined;
    let b0 = match (config.offset, computed) {
        (Some(b), _) => Some(b),
        (None, true) => Some(DEFAULT_OFFSET_FRACTION * diag),
        (None, false) => None,
    };
    let prepared = match (computed, b0) {
        (true, Some(b)) => fill_dents(&close_notches(&base, 4.0 * b), 2.0 * b),
        _ => base.clone(),
    };
    let (offset_outline_, offset) = match b0 {
        Some(b0) => {
            let mut b = b0;
            let mut attempt = 0;
            loop {
                match offset_outline(&prepared, b) {
                    Ok(o) => break (o, Some(b)),
                    Err(GeometryError::OffsetSelfIntersection { .. })
                        if attempt < MAX_OFFSET_HALVINGS =>
                    {
                        attempt += 1;
                        b *= 0.5;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        None => (prepared, None),
    };
    let rounded = round_reflex_corners(&offset_outline_, REFLEX_ROUNDING_PASSES);

    for &div in spacing_ladder(config.hull_mode) {
        let control = if div == 0.0 {
            rounded.clone()
        } else {
            rounded.densified(diag / div)
        };
        let fitted = fit_closed_bezier(&control)?;
        let curve = segment_curve(&fitted, config.segments)?;
        if curve.is_self_intersecting() {
            continue;
        }
        let Ok(circles) = inscribed_circles(&curve) else {
            continue;
        };
        if computed
            && !points
                .points
                .iter()
                .all(|p| curve.boundary().locate(*p).is_covered())
        {
            continue;
        }
        return Ok(GroupGeometry {
            base,
            hull_k,
            offset,
            control,
            curve,
            circles,
        });
    }
    Err(GroupError::NoValidCurve)
}

/// Per-group intermediates, before the shared scale is known.
#[derive(Debug, Clone)]
pub struct GroupResult {
    pub key: GroupKey,
    pub points: PointSet,
    pub geometry: GroupGeometry,
    pub slicing: Slicing,
    /// Unscaled (scale 1) smoothed profile.
    pub profile: WidthProfile,
}

pub fn process_group(
    key: GroupKey,
    points: PointSet,
    config: &Config,
    predefined: Option<&Outline>,
) -> Result<GroupResult, GroupError> {
    let geometry = group_geometry(&points, config, predefined)?;
    let slicing = build_slices(&geometry.curve, &geometry.circles, &points);
    let profile = smooth_widths(&slicing.slices, config.resolved_window())?;
    Ok(GroupResult {
        key,
        points,
        geometry,
        slicing,
        profile,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<String>,
    pub point_count: usize,
    pub inside_count: usize,
    pub hull_k: Option<usize>,
    pub offset: Option<f64>,
    pub outline: Vec<Point2>,
    pub control_points: Vec<Point2>,
    pub curve_area: f64,
    pub divisor_count: usize,
    pub divisors: Vec<Point2>,
    pub normals: Vec<Point2>,
    pub radii: Vec<f64>,
    pub slice_counts: Vec<usize>,
    pub slice_areas: Vec<f64>,
    pub raw_widths: Vec<f64>,
    pub smoothed_widths: Vec<f64>,
    pub legend: LegendSpec,
    pub color: Rgb,
    pub opacity: f64,
}

impl GroupReport {
    /// Rendered widths in render units.
    pub fn render_widths(&self, scale: f64) -> Vec<f64> {
        self.smoothed_widths.iter().map(|w| w * scale).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedGroup {
    pub label: String,
    pub point_count: usize,
}

/// Machine-readable record of a run, sufficient to redraw the SVG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub config: Config,
    /// Density-to-width scale `c` shared by all groups.
    pub scale: f64,
    /// Groups in drawing order.
    pub groups: Vec<GroupReport>,
    pub skipped: Vec<SkippedGroup>,
    pub render: RenderSpec,
    pub dots: Vec<DotLayer>,
    pub heat: Option<HeatLayer>,
}

impl Sidecar {
    pub fn scene(&self) -> Scene {
        let map_per_unit = self.render.transform.map_per_unit();
        let bands = self
            .groups
            .iter()
            .map(|g| PhoenixBand {
                series: g.label.clone(),
                color: g.color,
                opacity: g.opacity,
                ..band_from_parts(
                    &g.divisors,
                    &g.normals,
                    &g.radii,
                    &g.render_widths(self.scale),
                    map_per_unit,
                )
            })
            .collect();
        let legends = if self.config.legend {
            self.groups
                .iter()
                .map(|g| LegendPanel {
                    title: g.label.clone(),
                    color: g.color,
                    legend: g.legend.clone(),
                })
                .collect()
        } else {
            Vec::new()
        };
        Scene {
            spec: self.render.clone(),
            bands,
            legends,
            dots: self.dots.clone(),
            heat: self.heat.clone(),
        }
    }

    pub fn render_svg(&self) -> Result<String, RenderError> {
        render_svg(&self.scene())
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub svg: String,
    pub sidecar: Sidecar,
    pub groups: Vec<GroupResult>,
}

/// Colours per group in drawing order: a time ramp when a single series
/// spans several time labels, the palette by series otherwise.
fn assign_colors(keys: &[GroupKey], config: &Config) -> Result<Vec<Rgb>, RenderError> {
    let mut series: Vec<&Option<String>> = keys.iter().map(|k| &k.series).collect();
    series.dedup();
    let times = keys.iter().filter(|k| k.time.is_some()).count();
    if series.len() == 1 && times >= 2 {
        return Ok(crate::render::lab_ramp(
            config.time_start,
            config.time_end,
            keys.len(),
        ));
    }
    let colors = palette(&config.palette)?;
    Ok(keys
        .iter()
        .map(|k| {
            let idx = series.iter().position(|s| **s == k.series).unwrap_or(0);
            colors[idx % colors.len()]
        })
        .collect())
}

fn group_order(a: &GroupKey, b: &GroupKey) -> std::cmp::Ordering {
    a.series
        .cmp(&b.series)
        .then_with(|| match (&a.time, &b.time) {
            (Some(x), Some(y)) => compare_time(x, y),
            (x, y) => x.cmp(y),
        })
}

/// Run every stage for every `(series, time)` group and compose the map.
pub fn run_pipeline(
    table: &SeriesTable,
    config: &Config,
    outline: Option<&Outline>,
) -> Result<PipelineOutput, PipelineError> {
    config.validate()?;
    if config.hull_mode == HullMode::Predefined && outline.is_none() {
        return Err(PipelineError::MissingOutline);
    }
    let config = config.resolved();

    let mut keyed: Vec<(GroupKey, PointSet)> = table.groups().into_iter().collect();
    keyed.sort_by(|a, b| group_order(&a.0, &b.0));
    let mut skipped = Vec::new();
    keyed.retain(|(key, pts)| {
        if pts.len() < MIN_GROUP_POINTS {
            warn!(
                "skipping group '{}': {} point(s), need at least {MIN_GROUP_POINTS}",
                key.label(),
                pts.len()
            );
            skipped.push(SkippedGroup {
                label: key.label(),
                point_count: pts.len(),
            });
            false
        } else {
            true
        }
    });
    if keyed.is_empty() {
        return Err(PipelineError::NoGroups);
    }

    let groups: Vec<GroupResult> = keyed
        .into_par_iter()
        .map(|(key, pts)| {
            let label = key.label();
            process_group(key, pts, &config, outline).map_err(|source| PipelineError::Group {
                group: label,
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    for g in &groups {
        info!(
            "group '{}': {} points, {} inside, offset {:?}",
            g.key.label(),
            g.points.len(),
            g.slicing.inside_count(),
            g.geometry.offset
        );
    }

    let peak = groups
        .iter()
        .map(|g| g.profile.max_smoothed())
        .fold(0.0, f64::max);
    let scale = match config.scale {
        Some(c) => c,
        None if peak > 0.0 => config.max_width / peak,
        None => 1.0,
    };
    let keys: Vec<GroupKey> = groups.iter().map(|g| g.key.clone()).collect();
    let colors = assign_colors(&keys, &config)?;

    let mut reports = Vec::with_capacity(groups.len());
    for (g, color) in groups.iter().zip(&colors) {
        let scaled = scale_widths(&g.profile, scale).map_err(|e| PipelineError::Group {
            group: g.key.label(),
            source: e.into(),
        })?;
        let legend = legend_spec(
            &g.slicing,
            &g.points,
            &scaled,
            config.legend_bins,
            config.legend_bars,
        )
        .map_err(|e| PipelineError::Group {
            group: g.key.label(),
            source: e.into(),
        })?;
        let curve = &g.geometry.curve;
        reports.push(GroupReport {
            label: g.key.label(),
            series: g.key.series.clone(),
            time: g.key.time.clone(),
            point_count: g.points.len(),
            inside_count: g.slicing.inside_count(),
            hull_k: g.geometry.hull_k,
            offset: g.geometry.offset,
            outline: g.geometry.base.vertices().to_vec(),
            control_points: g.geometry.control.vertices().to_vec(),
            curve_area: curve.enclosed_area(),
            divisor_count: curve.len(),
            divisors: curve.divisors().to_vec(),
            normals: curve.inward_normals().to_vec(),
            radii: g.geometry.circles.iter().map(|c| c.radius).collect(),
            slice_counts: g.slicing.counts(),
            slice_areas: g.slicing.areas(),
            raw_widths: g.profile.raw.clone(),
            smoothed_widths: g.profile.smoothed.clone(),
            legend,
            color: *color,
            opacity: config.opacity,
        });
    }

    let mut bbox: Option<BBox> = None;
    for g in &groups {
        let ring: Vec<Point2> = g.geometry.curve.samples().iter().map(|s| s.point).collect();
        let b = BBox::of(&ring).expect("curve has samples");
        bbox = Some(bbox.map_or(b, |acc| acc.union(&b)));
    }
    let all_points: Vec<Point2> = groups
        .iter()
        .flat_map(|g| g.points.points.clone())
        .collect();
    let mut bbox = bbox.expect("at least one group");
    if config.dots {
        if let Some(pb) = BBox::of(&all_points) {
            bbox = bbox.union(&pb);
        }
    }
    let (transform, map_height) = Transform::fit(&bbox, config.canvas_width, MAP_MARGIN)?;

    let heat = match config.heat_bandwidth {
        Some(h) => Some(render_heat_reference(&PointSet::new(all_points), h)?.to_layer()?),
        None => None,
    };
    let dots = if config.dots {
        groups
            .iter()
            .zip(&colors)
            .map(|(g, c)| DotLayer {
                series: g.key.label(),
                points: g.points.points.clone(),
                color: *c,
                radius: config.dot_radius,
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut render = RenderSpec {
        width: config.canvas_width,
        height: map_height,
        transform,
        layers: DEFAULT_LAYERS.to_vec(),
        background: None,
        legend_x: config.canvas_width,
    };
    let mut sidecar = Sidecar {
        config,
        scale,
        groups: reports,
        skipped,
        render: render.clone(),
        dots,
        heat,
    };
    if sidecar.config.legend {
        let stack: f64 = sidecar
            .scene()
            .legends
            .iter()
            .map(|p| legend_panel_height(p) + PANEL_GAP)
            .sum::<f64>()
            + 12.0;
        render.width += LEGEND_PANEL_WIDTH;
        render.height = render.height.max(stack);
        sidecar.render = render;
    }
    let svg = sidecar.render_svg()?;
    Ok(PipelineOutput {
        svg,
        sidecar,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::Row;

    fn table(points: &[(f64, f64)], series: Option<&str>, time: Option<&str>) -> SeriesTable {
        SeriesTable {
            rows: points
                .iter()
                .map(|&(x, y)| Row {
                    x,
                    y,
                    series: series.map(str::to_owned),
                    time: time.map(str::to_owned),
                })
                .collect(),
        }
    }

    #[test]
    fn config_defaults_and_validation() {
        let c = Config::default();
        assert_eq!(c.resolved_window(), 300);
        assert!(c.validate().is_ok());
        for bad in [
            Config {
                segments: 15,
                ..Config::default()
            },
            Config {
                window: Some(0),
                ..Config::default()
            },
            Config {
                window: Some(1501),
                ..Config::default()
            },
            Config {
                offset: Some(0.0),
                ..Config::default()
            },
            Config {
                scale: Some(-1.0),
                ..Config::default()
            },
            Config {
                palette: "nope".into(),
                ..Config::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn config_json_round_trip_and_unknown_field() {
        let c = Config::default().resolved();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(serde_json::from_str::<Config>(&json).unwrap(), c);
        assert!(serde_json::from_str::<Config>(r#"{"segmnets": 10}"#).is_err());
        let partial: Config = serde_json::from_str(r#"{"segments": 1000}"#).unwrap();
        assert_eq!(partial.resolved_window(), 100);
    }

    #[test]
    fn tiny_groups_are_skipped() {
        let mut t = table(
            &[(0.0, 0.0), (4.0, 0.0), (4.0, 3.0), (0.0, 3.0), (2.0, 1.0)],
            Some("a"),
            None,
        );
        t.rows
            .extend(table(&[(9.0, 9.0), (9.5, 9.0)], Some("b"), None).rows);
        let cfg = Config {
            segments: 200,
            ..Config::default()
        };
        let out = run_pipeline(&t, &cfg, None).unwrap();
        assert_eq!(out.sidecar.groups.len(), 1);
        assert_eq!(
            out.sidecar.skipped,
            vec![SkippedGroup {
                label: "b".into(),
                point_count: 2
            }]
        );
        let only_small = table(&[(0.0, 0.0), (1.0, 1.0)], None, None);
        assert!(matches!(
            run_pipeline(&only_small, &cfg, None),
            Err(PipelineError::NoGroups)
        ));
    }

    #[test]
    fn predefined_mode_needs_outline() {
        let t = table(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], None, None);
        let cfg = Config {
            hull_mode: HullMode::Predefined,
            ..Config::default()
        };
        assert!(matches!(
            run_pipeline(&t, &cfg, None),
            Err(PipelineError::MissingOutline)
        ));
    }

    #[test]
    fn collinear_group_reports_its_name() {
        let t = table(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)], Some("line"), None);
        match run_pipeline(
            &t,
            &Config {
                segments: 100,
                ..Config::default()
            },
            None,
        ) {
            Err(PipelineError::Group {
                group,
                source: GroupError::Geometry(GeometryError::CollinearInput),
            }) => {
                assert_eq!(group, "line")
            }
            other => panic!("{other:?}"),
        }
    }
}
