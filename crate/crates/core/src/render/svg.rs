use super::{Layer, LegendPanel, RenderError, Scene, Transform};
use crate::geometry::{BBox, Point2};
use std::fmt::Write;

pub const LEGEND_PANEL_WIDTH: f64 = 190.0;
const PROFILE_BOX: (f64, f64) = (36.0, 100.0);
const TITLE_HEIGHT: f64 = 28.0;
const BAR_GAP: f64 = 8.0;
const BAR_LENGTH: f64 = 36.0;
const PANEL_GAP: f64 = 16.0;

/// Fixed three-decimal formatting; negative zero prints as `0.000`.
pub fn fmt3(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_owned()
    } else {
        s
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn ring_path(out: &mut String, t: &Transform, ring: &[Point2]) {
    for (k, p) in ring.iter().enumerate() {
        let q = t.apply(*p);
        let _ = write!(
            out,
            "{}{} {} ",
            if k == 0 { "M" } else { "L" },
            fmt3(q.x),
            fmt3(q.y)
        );
    }
    out.push('Z');
}

fn placed_rect(t: &Transform, bbox: &BBox) -> (Point2, f64, f64) {
    let top_left = t.apply(Point2::new(bbox.min.x, bbox.max.y));
    (top_left, bbox.width() * t.scale, bbox.height() * t.scale)
}

/// Height of one legend panel in render units.
pub fn legend_panel_height(panel: &LegendPanel) -> f64 {
    let bars: f64 = panel
        .legend
        .width_bars
        .iter()
        .map(|b| b.width.max(1.0) + BAR_GAP)
        .sum();
    TITLE_HEIGHT + PROFILE_BOX.1.max(bars) + 14.0
}

fn legend_panel(out: &mut String, panel: &LegendPanel, x: f64, y: f64) {
    let color = panel.color.to_string();
    let _ = writeln!(
        out,
        r#"<g class="legend" data-series="{}">"#,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
        fmt3(x),
        fmt3(y + 12.0),
        escape(&panel.title)
    );
    let (bx, by) = (x, y + TITLE_HEIGHT);
    let (bw, bh) = PROFILE_BOX;
    let profile = &panel.legend.radial_profile;
    let peak = profile.iter().copied().fold(0.0, f64::max);
    let step = bh / profile.len().max(1) as f64;
    for (j, v) in profile.iter().enumerate() {
        let w = if peak > 0.0 { bw * v / peak } else { 0.0 };
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
            fmt3(bx),
            fmt3(by + j as f64 * step),
            fmt3(w),
            fmt3(step)
        );
    }
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#444444" stroke-width="0.5"/>"##,
        fmt3(bx),
        fmt3(by),
        fmt3(bw),
        fmt3(bh)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="8" fill="#444444">centre</text>"##,
        fmt3(bx),
        fmt3(by - 3.0)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-family="sans-serif" font-size="8" fill="#444444">edge</text>"##,
        fmt3(bx),
        fmt3(by + bh + 9.0)
    );
    let mut yb = by;
    let lx = bx + bw + 12.0;
    for bar in &panel.legend.width_bars {
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{color}"/>"#,
            fmt3(lx),
            fmt3(yb),
            fmt3(BAR_LENGTH),
            fmt3(bar.width)
        );
        let _ = writeln!(
            out,
            r##"<text x="{}" y="{}" font-family="sans-serif" font-size="9" fill="#222222">{}</text>"##,
            fmt3(lx + BAR_LENGTH + 4.0),
            fmt3(yb + 0.5 * bar.width + 3.0),
            escape(&bar.label)
        );
        yb += bar.width.max(1.0) + BAR_GAP;
    }
    out.push_str("</g>\n");
}

/// Serialize a scene as an SVG 1.1 document. Layers are emitted in
/// `scene.spec.layers` order and elements within a layer in input order;
/// every coordinate is printed with three decimals.
pub fn render_svg(scene: &Scene) -> Result<String, RenderError> {
    let spec = &scene.spec;
    let t = &spec.transform;
    if !(t.scale > 0.0) || !t.scale.is_finite() {
        return Err(RenderError::SingularTransform);
    }
    let has = |layer: Layer| {
        spec.layers.contains(&layer)
            && match layer {
                Layer::Heat => scene.heat.is_some(),
                Layer::Bands => !scene.bands.is_empty(),
                Layer::Dots => scene.dots.iter().any(|d| !d.points.is_empty()),
                Layer::Legend => !scene.legends.is_empty(),
            }
    };
    if !spec.layers.iter().any(|&l| has(l)) {
        return Err(RenderError::EmptyScene);
    }

    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n");
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = fmt3(spec.width),
        h = fmt3(spec.height)
    );
    let _ = writeln!(
        out,
        r##"<rect x="0.000" y="0.000" width="{}" height="{}" fill="#ffffff"/>"##,
        fmt3(spec.width),
        fmt3(spec.height)
    );
    if let Some(bg) = &spec.background {
        let (p, w, h) = placed_rect(t, &bg.bbox);
        let _ = writeln!(
            out,
            r#"<image x="{}" y="{}" width="{}" height="{}" preserveAspectRatio="none" xlink:href="{}"/>"#,
            fmt3(p.x),
            fmt3(p.y),
            fmt3(w),
            fmt3(h),
            escape(&bg.href)
        );
    }

    for &layer in &spec.layers {
        if !has(layer) {
            continue;
        }
        match layer {
            Layer::Heat => {
                let heat = scene.heat.as_ref().expect("checked above");
                let (p, w, h) = placed_rect(t, &heat.bbox);
                let _ = writeln!(
                    out,
                    r#"<g id="heat"><image x="{}" y="{}" width="{}" height="{}" preserveAspectRatio="none" xlink:href="data:image/png;base64,{}"/></g>"#,
                    fmt3(p.x),
                    fmt3(p.y),
                    fmt3(w),
                    fmt3(h),
                    heat.png_base64
                );
            }
            Layer::Bands => {
                out.push_str("<g id=\"bands\">\n");
                for band in &scene.bands {
                    let mut d = String::new();
                    ring_path(&mut d, t, &band.outer);
                    d.push(' ');
                    let inner: Vec<Point2> = band.inner.iter().rev().copied().collect();
                    ring_path(&mut d, t, &inner);
                    let _ = writeln!(
                        out,
                        r#"<path class="band" data-series="{}" fill="{}" fill-opacity="{}" fill-rule="evenodd" stroke="none" d="{}"/>"#,
                        escape(&band.series),
                        band.color,
                        fmt3(band.opacity),
                        d
                    );
                }
                out.push_str("</g>\n");
            }
            Layer::Dots => {
                out.push_str("<g id=\"dots\">\n");
                for dots in &scene.dots {
                    let _ = writeln!(
                        out,
                        r#"<g class="dots" data-series="{}" fill="{}">"#,
                        escape(&dots.series),
                        dots.color
                    );
                    for p in &dots.points {
                        let q = t.apply(*p);
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{}" cy="{}" r="{}"/>"#,
                            fmt3(q.x),
                            fmt3(q.y),
                            fmt3(dots.radius)
                        );
                    }
                    out.push_str("</g>\n");
                }
                out.push_str("</g>\n");
            }
            Layer::Legend => {
                out.push_str("<g id=\"legend\">\n");
                let mut y = 12.0;
                for panel in &scene.legends {
                    legend_panel(&mut out, panel, spec.legend_x, y);
                    y += legend_panel_height(panel) + PANEL_GAP;
                }
                out.push_str("</g>\n");
            }
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{PhoenixBand, RenderSpec, DEFAULT_LAYERS, QUAL6};
    use super::*;

    fn scene(bands: Vec<PhoenixBand>) -> Scene {
        Scene {
            spec: RenderSpec {
                width: 100.0,
                height: 100.0,
                transform: Transform {
                    scale: 10.0,
                    tx: 0.0,
                    ty: 100.0,
                },
                layers: DEFAULT_LAYERS.to_vec(),
                background: None,
                legend_x: 100.0,
            },
            bands,
            legends: vec![],
            dots: vec![],
            heat: None,
        }
    }

    fn square_band(color_index: usize) -> PhoenixBand {
        PhoenixBand {
            series: format!("s{color_index}"),
            outer: vec![
                Point2::new(1.0, 1.0),
                Point2::new(9.0, 1.0),
                Point2::new(9.0, 9.0),
                Point2::new(1.0, 9.0),
            ],
            inner: vec![
                Point2::new(2.0, 2.0),
                Point2::new(8.0, 2.0),
                Point2::new(8.0, 8.0),
                Point2::new(2.0, 8.0),
            ],
            color: QUAL6[color_index],
            opacity: 0.85,
        }
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt3(-0.0001), "0.000");
        assert_eq!(fmt3(1.23456), "1.235");
        assert_eq!(fmt3(-2.0), "-2.000");
    }

    #[test]
    fn one_band_is_one_path() {
        let svg = render_svg(&scene(vec![square_band(0)])).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        assert!(svg.contains(r#"d="M10.000 90.000 L90.000 90.000 "#));
        assert!(svg.starts_with("<?xml"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn six_bands_six_colours_in_order() {
        let svg = render_svg(&scene((0..6).map(square_band).collect())).unwrap();
        let fills: Vec<&str> = svg
            .match_indices("<path class=\"band\"")
            .map(|(i, _)| {
                let rest = &svg[i..];
                let f = rest.find("fill=\"").unwrap() + 6;
                &rest[f..f + 7]
            })
            .collect();
        let expect: Vec<String> = QUAL6.iter().map(|c| c.to_string()).collect();
        assert_eq!(fills, expect);
    }

    #[test]
    fn deterministic_and_empty_scene() {
        let s = scene(vec![square_band(1)]);
        assert_eq!(render_svg(&s).unwrap(), render_svg(&s.clone()).unwrap());
        assert_eq!(render_svg(&scene(vec![])), Err(RenderError::EmptyScene));
    }

    #[test]
    fn labels_are_escaped() {
        let mut b = square_band(0);
        b.series = "a<b & \"c\"".into();
        let svg = render_svg(&scene(vec![b])).unwrap();
        assert!(svg.contains("data-series=\"a&lt;b &amp; &quot;c&quot;\""));
    }
}
