use super::{RenderError, Rgb};
use crate::geometry::{BBox, Point2, PointSet};
use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use image::{ImageBuffer, ImageFormat, Rgba};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::io::Cursor;

const MAX_CELLS_PER_SIDE: usize = 1024;

/// Gaussian kernel density sampled at cell centres, rows bottom to top.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatRaster {
    pub origin: Point2,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl HeatRaster {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2 {
        self.origin + Point2::new((ix as f64 + 0.5) * self.cell, (iy as f64 + 0.5) * self.cell)
    }

    pub fn bbox(&self) -> BBox {
        BBox {
            min: self.origin,
            max: self.origin + Point2::new(self.nx as f64, self.ny as f64) * self.cell,
        }
    }

    /// Midpoint-rule integral of the field over the grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell * self.cell
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Encode as a PNG on a blue to red ramp, transparent where the field
    /// vanishes.
    pub fn to_layer(&self) -> Result<HeatLayer, RenderError> {
        let peak = self.max();
        let img = ImageBuffer::from_fn(self.nx as u32, self.ny as u32, |x, y| {
            // image rows run top to bottom, raster rows bottom to top
            let v = self.value(x as usize, self.ny - 1 - y as usize);
            let t = if peak > 0.0 { v / peak } else { 0.0 };
            let c = ramp(t);
            Rgba([
                c.r,
                c.g,
                c.b,
                (255.0 * (t * 1.5).min(1.0) * 0.8).round() as u8,
            ])
        });
        let mut png = Vec::new();
        img.write_to(&mut Cursor::new(&mut png), ImageFormat::Png)
            .map_err(|e| RenderError::Encode(e.to_string()))?;
        Ok(HeatLayer {
            bbox: self.bbox(),
            png_base64: STANDARD.encode(png),
        })
    }
}

fn ramp(t: f64) -> Rgb {
    const STOPS: [Rgb; 3] = [Rgb::hex(0x2c7bb6), Rgb::hex(0xffffbf), Rgb::hex(0xd7191c)];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (a, b, f) = if t < 1.0 {
        (STOPS[0], STOPS[1], t)
    } else {
        (STOPS[1], STOPS[2], t - 1.0)
    };
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * f).round() as u8;
    Rgb::new(mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b))
}

/// Raster layer placed over `bbox` in map coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatLayer {
    pub bbox: BBox,
    pub png_base64: String,
}

/// Gaussian KDE with standard deviation `bandwidth`, normalised so the field
/// integrates to the number of points. The grid covers the points' bounding
/// box grown by `4 * bandwidth`.
pub fn render_heat_reference(points: &PointSet, bandwidth: f64) -> Result<HeatRaster, RenderError> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(RenderError::BadBandwidth(bandwidth));
    }
    let bbox = points
        .bbox()
        .ok_or(RenderError::EmptyScene)?
        .expanded(4.0 * bandwidth);
    let extent = bbox.width().max(bbox.height());
    let cell = (extent / 256.0)
        .min(bandwidth / 2.0)
        .max(extent / MAX_CELLS_PER_SIDE as f64);
    let nx = ((bbox.width() / cell).ceil() as usize).max(1);
    let ny = ((bbox.height() / cell).ceil() as usize).max(1);
    let mut values = vec![0.0; nx * ny];
    let norm = 1.0 / (TAU * bandwidth * bandwidth);
    let inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    let reach = 4.0 * bandwidth;
    for p in &points.points {
        let lo = |c: f64, o: f64| (((c - reach - o) / cell).floor().max(0.0)) as usize;
        let hi = |c: f64, o: f64, n: usize| ((((c + reach - o) / cell).ceil()) as usize).min(n);
        for iy in lo(p.y, bbox.min.y)..hi(p.y, bbox.min.y, ny) {
            let cy = bbox.min.y + (iy as f64 + 0.5) * cell;
            let dy2 = (cy - p.y) * (cy - p.y);
            let row = &mut values[iy * nx..(iy + 1) * nx];
            for (ix, v) in row
                .iter_mut()
                .enumerate()
                .take(hi(p.x, bbox.min.x, nx))
                .skip(lo(p.x, bbox.min.x))
            {
                let cx = bbox.min.x + (ix as f64 + 0.5) * cell;
                *v += norm * (-((cx - p.x) * (cx - p.x) + dy2) * inv2h2).exp();
            }
        }
    }
    Ok(HeatRaster {
        origin: bbox.min,
        cell,
        nx,
        ny,
        values,
    })
}
