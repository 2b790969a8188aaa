//! Per-segment interior slices, point counting and width smoothing.

use crate::curve::SegmentedCurve;
use crate::geometry::index::BoxGrid;
use crate::geometry::{
    locate_in_ring, orient, segments_cross, BBox, Point2, PointSet, BOUNDARY_EPS,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative (to the bbox diagonal) tolerance on inscribed-circle radii.
pub const CIRCLE_EPS: f64 = 1e-6;
/// Area floor factor: `A_i >= diagonal * arc_length_i * AREA_FLOOR`.
pub const AREA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("inward normal at divisor {index} leaves the region immediately")]
    DegenerateNormal { index: usize },
    #[error("window half-size {window} outside [1, {max}]")]
    BadWindow { window: usize, max: usize },
    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),
}

/// Largest circle inside the curve that touches it at a divisor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InscribedCircle {
    pub center: Point2,
    pub radius: f64,
}

/// Radius of the circle tangent at `v` (centre along `normal`) passing
/// through `q`. Points on or behind the tangent line never constrain it.
#[inline]
fn tangent_radius(v: Point2, normal: Point2, q: Point2, min_dist2: f64) -> f64 {
    let d = q - v;
    let dn = d.dot(normal);
    let dd = d.norm_squared();
    if dn <= 0.0 || dd <= min_dist2 {
        f64::INFINITY
    } else {
        dd / (2.0 * dn)
    }
}

fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Maximal interior circle tangent to the curve at divisor `i`, centred on
/// the inward normal.
///
/// A circle tangent at `v` with radius `r` contains a curve point `q` iff
/// `r > |q - v|^2 / (2 (q - v) . n)`, so the maximal radius is the minimum of
/// that ratio over the curve, together with the osculating radius at `v`.
/// The minimum is taken over the flattened samples and then polished on the
/// exact curve around the best few samples.
pub fn inscribed_circle_at(
    curve: &SegmentedCurve,
    i: usize,
) -> Result<InscribedCircle, DensityError> {
    let n = curve.len();
    let i = i % n;
    let v = curve.divisors()[i];
    let normal = curve.inward_normals()[i];
    let u_v = curve.params()[i];
    let closed = curve.curve();
    // closer than this the ratio is dominated by rounding; the osculating
    // radius covers that neighbourhood
    let min_dist = 1e-4 * curve.diagonal();
    let min_dist2 = min_dist * min_dist;

    let mut best = f64::INFINITY;
    let tangent = closed.derivative(u_v);
    if let Some(t) = tangent.normalized() {
        let bend = closed.curvature(u_v) * normal.dot(t.perp());
        if bend > 0.0 {
            best = 1.0 / bend;
        }
    }

    let samples = curve.samples();
    let ms = samples.len();
    let mut top: [(f64, usize); 3] = [(f64::INFINITY, usize::MAX); 3];
    for (j, s) in samples.iter().enumerate() {
        let r = tangent_radius(v, normal, s.point, min_dist2);
        if r < top[2].0 {
            top[2] = (r, j);
            top.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
    }
    let end = closed.param_end();
    for &(r, j) in &top {
        if !r.is_finite() {
            continue;
        }
        let lo = if j == 0 {
            samples[ms - 1].param - end
        } else {
            samples[j - 1].param
        };
        let hi = if j + 1 == ms {
            end
        } else {
            samples[j + 1].param
        };
        let refined = golden_min(lo, hi, |u| {
            tangent_radius(v, normal, closed.position(u), min_dist2)
        });
        best = best.min(r).min(refined);
    }

    if !best.is_finite() || best <= 0.0 {
        return Err(DensityError::DegenerateNormal { index: i });
    }
    Ok(InscribedCircle {
        center: v + normal * best,
        radius: best,
    })
}

/// Inscribed circles for every divisor.
pub fn inscribed_circles(curve: &SegmentedCurve) -> Result<Vec<InscribedCircle>, DensityError> {
    (0..curve.len())
        .into_par_iter()
        .map(|i| inscribed_circle_at(curve, i))
        .collect()
}

/// Counting cell for one curve segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSlice {
    pub index: usize,
    /// `(v_i, v_{i+1}, o_{i+1}, o_i)`
    pub quad: [Point2; 4],
    /// The quad crosses itself and is handled as two triangles.
    pub crossed: bool,
    pub area: f64,
    pub count: usize,
    pub density: f64,
}

/// Whether the quad self-intersects, and its area under the triangle split.
pub fn quad_area(q: &[Point2; 4]) -> (f64, bool) {
    let crossed = segments_cross(q[1], q[2], q[3], q[0]) || segments_cross(q[0], q[1], q[2], q[3]);
    let area = if crossed {
        0.5 * (orient(q[0], q[1], q[2]).abs() + orient(q[0], q[2], q[3]).abs())
    } else {
        0.5 * (orient(q[0], q[1], q[2]) + orient(q[0], q[2], q[3])).abs()
    };
    (area, crossed)
}

fn in_triangle(p: Point2, a: Point2, b: Point2, c: Point2, eps: f64) -> bool {
    locate_in_ring(p, &[a, b, c], eps).is_covered()
}

/// Containment in a slice quad (boundary inclusive).
pub fn quad_contains(q: &[Point2; 4], crossed: bool, p: Point2, eps: f64) -> bool {
    if crossed {
        in_triangle(p, q[0], q[1], q[2], eps) || in_triangle(p, q[0], q[2], q[3], eps)
    } else {
        locate_in_ring(p, q, eps).is_covered()
    }
}

/// Slices plus the slice each input point was assigned to (`None` for
/// points outside the curve).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slicing {
    pub slices: Vec<SegmentSlice>,
    pub assignment: Vec<Option<usize>>,
}

impl Slicing {
    pub fn inside_count(&self) -> usize {
        self.assignment.iter().filter(|a| a.is_some()).count()
    }

    pub fn total_area(&self) -> f64 {
        self.slices.iter().map(|s| s.area).sum()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.slices.iter().map(|s| s.count).collect()
    }

    pub fn areas(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.area).collect()
    }

    pub fn densities(&self) -> Vec<f64> {
        self.slices.iter().map(|s| s.density).collect()
    }
}

/// Build the `n` slice quads and partition the points inside the curve among
/// them: the lowest-index quad containing a point wins; points in no quad go
/// to the slice whose chord midpoint is nearest.
pub fn build_slices(
    curve: &SegmentedCurve,
    circles: &[InscribedCircle],
    points: &PointSet,
) -> Slicing {
    let n = curve.len();
    assert_eq!(circles.len(), n, "one inscribed circle per divisor");
    let diag = curve.diagonal();
    let eps = BOUNDARY_EPS * diag;

    let mut slices: Vec<SegmentSlice> = (0..n)
        .map(|i| {
            let j = (i + 1) % n;
            let quad = [
                curve.divisor(i),
                curve.divisor(j),
                circles[j].center,
                circles[i].center,
            ];
            let (area, crossed) = quad_area(&quad);
            let floor = diag * curve.arc_lengths()[i] * AREA_FLOOR;
            SegmentSlice {
                index: i,
                quad,
                crossed,
                area: area.max(floor),
                count: 0,
                density: 0.0,
            }
        })
        .collect();

    let boxes: Vec<BBox> = slices
        .iter()
        .map(|s| BBox::of(&s.quad).unwrap().expanded(eps))
        .collect();
    let grid = BoxGrid::new(&boxes);
    let midpoints: Vec<Point2> = (0..n)
        .map(|i| curve.divisor(i).midpoint(curve.divisor(i + 1)))
        .collect();

    let boundary = curve.boundary();
    let assignment: Vec<Option<usize>> = points
        .points
        .par_iter()
        .map(|&p| {
            if !boundary.locate(p).is_covered() {
                return None;
            }
            let hit = grid.candidates(p).iter().copied().find(|&i| {
                boxes[i].contains(p) && quad_contains(&slices[i].quad, slices[i].crossed, p, eps)
            });
            Some(hit.unwrap_or_else(|| {
                (0..n)
                    .min_by(|&a, &b| {
                        midpoints[a]
                            .distance_squared(p)
                            .total_cmp(&midpoints[b].distance_squared(p))
                    })
                    .unwrap()
            }))
        })
        .collect();

    for i in assignment.iter().flatten() {
        slices[*i].count += 1;
    }
    for s in &mut slices {
        s.density = s.count as f64 / s.area;
    }
    Slicing { slices, assignment }
}

/// Raw per-slice densities and their smoothed, scaled counterparts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthProfile {
    pub raw: Vec<f64>,
    /// Window-averaged density, before scaling.
    pub smoothed: Vec<f64>,
    pub scale: f64,
    pub window: usize,
}

impl WidthProfile {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Rendered widths, `smoothed * scale`.
    pub fn widths(&self) -> Vec<f64> {
        self.smoothed.iter().map(|w| w * self.scale).collect()
    }

    pub fn max_smoothed(&self) -> f64 {
        self.smoothed.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_smoothed(&self) -> f64 {
        self.smoothed.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Area-weighted circular moving average over indices `[i - x, i + x)`.
pub fn smooth_widths(slices: &[SegmentSlice], x: usize) -> Result<WidthProfile, DensityError> {
    let n = slices.len();
    if x < 1 || x > n / 2 {
        return Err(DensityError::BadWindow {
            window: x,
            max: n / 2,
        });
    }
    let raw: Vec<f64> = slices.iter().map(|s| s.density).collect();
    let weighted: Vec<f64> = slices.iter().map(|s| s.density * s.area).collect();
    let smoothed = (0..n)
        .map(|i| {
            let (mut num, mut den) = (0.0, 0.0);
            for off in 0..2 * x {
                let k = (i + n + off - x) % n;
                num += weighted[k];
                den += slices[k].area;
            }
            if den > 0.0 {
                num / den
            } else {
                0.0
            }
        })
        .collect();
    Ok(WidthProfile {
        raw,
        smoothed,
        scale: 1.0,
        window: x,
    })
}

/// Multiply the current scale by `c`.
pub fn scale_widths(profile: &WidthProfile, c: f64) -> Result<WidthProfile, DensityError> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(DensityError::NonPositiveScale(c));
    }
    Ok(WidthProfile {
        scale: profile.scale * c,
        ..profile.clone()
    })
}

/// Choose the scale so the widest point is `max_width`. An all-zero profile
/// keeps scale 1.
pub fn auto_scale(profile: &WidthProfile, max_width: f64) -> Result<WidthProfile, DensityError> {
    if !(max_width > 0.0) || !max_width.is_finite() {
        return Err(DensityError::NonPositiveScale(max_width));
    }
    let peak = profile.max_smoothed();
    let scale = if peak > 0.0 { max_width / peak } else { 1.0 };
    Ok(WidthProfile {
        scale,
        ..profile.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{fit_closed_bezier, segment_curve, ClosedCurve};
    use crate::geometry::Outline;
    use std::f64::consts::TAU;

    fn slices_from(density: &[f64], area: &[f64]) -> Vec<SegmentSlice> {
        density
            .iter()
            .zip(area)
            .enumerate()
            .map(|(i, (&d, &a))| SegmentSlice {
                index: i,
                quad: [Point2::default(); 4],
                crossed: false,
                area: a,
                count: 0,
                density: d,
            })
            .collect()
    }

    fn circle_outline(m: usize, r: f64) -> Outline {
        Outline::new(
            (0..m)
                .map(|i| {
                    let t = TAU * i as f64 / m as f64;
                    Point2::new(r * t.cos(), r * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn uniform_density_is_a_fixed_point() {
        let areas: Vec<f64> = (0..40)
            .map(|i| 0.5 + (i as f64 * 0.37).sin().abs())
            .collect();
        let s = slices_from(&[2.5; 40], &areas);
        let p = smooth_widths(&s, 7).unwrap();
        for w in &p.smoothed {
            assert!((w - 2.5).abs() <= 1e-12 * 2.5);
        }
    }

    #[test]
    fn spike_becomes_plateau() {
        let n = 50;
        let x = 4;
        let j = 2;
        let mut d = vec![0.0; n];
        d[j] = 1.0;
        let p = smooth_widths(&slices_from(&d, &vec![1.0; n]), x).unwrap();
        // window [i - x, i + x) covers j for i in [j - x + 1, j + x]
        for i in 0..n {
            let covered = (0..2 * x).any(|off| (i + n + off - x) % n == j);
            let expect = if covered { 1.0 / (2 * x) as f64 } else { 0.0 };
            assert!((p.smoothed[i] - expect).abs() < 1e-15, "i={i}");
        }
        assert_eq!(p.smoothed.iter().filter(|w| **w > 0.0).count(), 2 * x);
        assert!(p.smoothed[(j + n - x + 1) % n] > 0.0 && p.smoothed[j + x] > 0.0);
        assert_eq!(p.smoothed[(j + n - x) % n], 0.0);
    }

    #[test]
    fn window_bounds() {
        let s = slices_from(&[1.0; 20], &[1.0; 20]);
        assert_eq!(
            smooth_widths(&s, 0),
            Err(DensityError::BadWindow { window: 0, max: 10 })
        );
        assert!(smooth_widths(&s, 10).is_ok());
        assert!(smooth_widths(&s, 11).is_err());
    }

    #[test]
    fn scaling() {
        let s = slices_from(&[0.1, 0.5, 0.2, 0.3], &[1.0; 4]);
        let p = smooth_widths(&s, 1).unwrap();
        assert_eq!(scale_widths(&p, 1.0).unwrap().widths(), p.widths());
        let doubled = scale_widths(&p, 2.0).unwrap();
        for (a, b) in doubled.widths().iter().zip(p.widths()) {
            assert_eq!(*a, 2.0 * b);
        }
        assert!(matches!(
            scale_widths(&p, 0.0),
            Err(DensityError::NonPositiveScale(_))
        ));
        assert!(matches!(
            scale_widths(&p, -1.0),
            Err(DensityError::NonPositiveScale(_))
        ));

        let spike = WidthProfile {
            raw: vec![0.5, 0.1],
            smoothed: vec![0.5, 0.1],
            scale: 1.0,
            window: 1,
        };
        assert_eq!(auto_scale(&spike, 30.0).unwrap().scale, 60.0);
    }

    #[test]
    fn disc_circles_reach_the_centre() {
        let curve = ClosedCurve::circle(Point2::default(), 2.0, 64);
        let seg = segment_curve(&curve, 64).unwrap();
        for i in 0..seg.len() {
            let c = inscribed_circle_at(&seg, i).unwrap();
            assert!((c.radius - 2.0).abs() < 1e-6, "r={}", c.radius);
            assert!(c.center.norm() < 1e-6);
            // tangent at the divisor
            assert!((c.center.distance(seg.divisor(i)) - c.radius).abs() < 1e-12);
        }
    }

    #[test]
    fn fitted_polygon_disc_converges() {
        // curvature of the interpolant converges like h^2
        for (m, tol) in [(256, 2e-4), (4096, 1e-6)] {
            let curve = fit_closed_bezier(&circle_outline(m, 1.0)).unwrap();
            let seg = segment_curve(&curve, 100).unwrap();
            let worst = (0..seg.len())
                .map(|i| (inscribed_circle_at(&seg, i).unwrap().radius - 1.0).abs())
                .fold(0.0, f64::max);
            assert!(worst < tol, "m={m} worst={worst}");
        }
    }

    #[test]
    fn ellipse_tip_matches_osculating_radius() {
        let (a, b) = (2.0, 1.0);
        let ell = Outline::new(
            (0..512)
                .map(|i| {
                    let t = TAU * i as f64 / 512.0;
                    Point2::new(a * t.cos(), b * t.sin())
                })
                .collect(),
        )
        .unwrap();
        let seg = segment_curve(&fit_closed_bezier(&ell).unwrap(), 400).unwrap();
        // divisor 0 is the curve start, the major-axis tip (a, 0)
        assert!(seg.divisor(0).distance(Point2::new(a, 0.0)) < 1e-12);
        let r = inscribed_circle_at(&seg, 0).unwrap().radius;
        let expect = b * b / a;
        assert!((r - expect).abs() / expect < 0.01, "r={r}");
    }

    #[test]
    fn square_edge_midpoint_radius_is_half() {
        let sq = Outline::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let seg = segment_curve(&ClosedCurve::from_polygon(&sq), 16).unwrap();
        // spacing 0.25 from (0,0): divisor 2 is the bottom midpoint
        assert!(seg.divisor(2).distance(Point2::new(0.5, 0.0)) < 1e-12);
        let c = inscribed_circle_at(&seg, 2).unwrap();
        assert!((c.radius - 0.5).abs() <= 1e-6, "r={}", c.radius);
        assert!(c.center.distance(Point2::new(0.5, 0.5)) <= 1e-6);
    }

    #[test]
    fn adding_a_point_never_lowers_its_slice_density() {
        let curve = fit_closed_bezier(&circle_outline(64, 1.0)).unwrap();
        let seg = segment_curve(&curve, 32).unwrap();
        let circles = inscribed_circles(&seg).unwrap();
        let mut pts = PointSet::new(vec![Point2::new(0.3, 0.1), Point2::new(-0.2, 0.5)]);
        let before = build_slices(&seg, &circles, &pts);
        pts.points.push(Point2::new(0.31, 0.11));
        let after = build_slices(&seg, &circles, &pts);
        let k = after.assignment[2].unwrap();
        assert!(after.slices[k].density > before.slices[k].density);
        assert_eq!(after.inside_count(), 3);
    }
}
