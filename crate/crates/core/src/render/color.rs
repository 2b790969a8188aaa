use super::RenderError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// An sRGB colour, serialized as `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }

    pub const fn hex(v: u32) -> Self {
        Rgb::new((v >> 16) as u8, (v >> 8) as u8, v as u8)
    }

    pub fn to_lab(self) -> Lab {
        let lin = |c: u8| {
            let c = c as f64 / 255.0;
            if c <= 0.04045 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            }
        };
        let (r, g, b) = (lin(self.r), lin(self.g), lin(self.b));
        let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
        let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
        let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
        let f = |t: f64| {
            if t > (6.0f64 / 29.0).powi(3) {
                t.cbrt()
            } else {
                t / (3.0 * (6.0f64 / 29.0).powi(2)) + 4.0 / 29.0
            }
        };
        let (fx, fy, fz) = (f(x / WHITE.0), f(y / WHITE.1), f(z / WHITE.2));
        Lab {
            l: 116.0 * fy - 16.0,
            a: 500.0 * (fx - fy),
            b: 200.0 * (fy - fz),
        }
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

impl FromStr for Rgb {
    type Err = RenderError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s.trim().trim_start_matches('#');
        if hex.len() != 6 || !hex.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(RenderError::BadColor(s.to_owned()));
        }
        let v = u32::from_str_radix(hex, 16).map_err(|_| RenderError::BadColor(s.to_owned()))?;
        Ok(Rgb::hex(v))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// D65 reference white.
const WHITE: (f64, f64, f64) = (0.950_47, 1.0, 1.088_83);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lab {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl Lab {
    pub fn lerp(self, other: Lab, t: f64) -> Lab {
        Lab {
            l: self.l + (other.l - self.l) * t,
            a: self.a + (other.a - self.a) * t,
            b: self.b + (other.b - self.b) * t,
        }
    }

    pub fn to_rgb(self) -> Rgb {
        let fy = (self.l + 16.0) / 116.0;
        let fx = fy + self.a / 500.0;
        let fz = fy - self.b / 200.0;
        let finv = |t: f64| {
            if t > 6.0 / 29.0 {
                t * t * t
            } else {
                3.0 * (6.0f64 / 29.0).powi(2) * (t - 4.0 / 29.0)
            }
        };
        let (x, y, z) = (finv(fx) * WHITE.0, finv(fy) * WHITE.1, finv(fz) * WHITE.2);
        let r = 3.240_454_2 * x - 1.537_138_5 * y - 0.498_531_4 * z;
        let g = -0.969_266_0 * x + 1.876_010_8 * y + 0.041_556_0 * z;
        let b = 0.055_643_4 * x - 0.204_025_9 * y + 1.057_225_2 * z;
        let enc = |c: f64| {
            let c = c.clamp(0.0, 1.0);
            let v = if c <= 0.003_130_8 {
                12.92 * c
            } else {
                1.055 * c.powf(1.0 / 2.4) - 0.055
            };
            (v * 255.0).round() as u8
        };
        Rgb::new(enc(r), enc(g), enc(b))
    }
}

/// Six contrasting qualitative colours (ColorBrewer "Dark2").
pub const QUAL6: [Rgb; 6] = [
    Rgb::hex(0x1b9e77),
    Rgb::hex(0xd95f02),
    Rgb::hex(0x7570b3),
    Rgb::hex(0xe7298a),
    Rgb::hex(0x66a61e),
    Rgb::hex(0xe6ab02),
];

/// ColorBrewer "Set1", first six classes.
pub const SET1: [Rgb; 6] = [
    Rgb::hex(0xe41a1c),
    Rgb::hex(0x377eb8),
    Rgb::hex(0x4daf4a),
    Rgb::hex(0x984ea3),
    Rgb::hex(0xff7f00),
    Rgb::hex(0xa65628),
];

/// Default endpoints of the time ramp, earliest to latest.
pub const TIME_START: Rgb = Rgb::hex(0x5a3214);
pub const TIME_END: Rgb = Rgb::hex(0xe31a1c);

/// A named palette (`qual6`, `set1`) or a comma-separated list of hex
/// colours.
pub fn palette(name: &str) -> Result<Vec<Rgb>, RenderError> {
    match name.trim().to_ascii_lowercase().as_str() {
        "qual6" | "dark2" => Ok(QUAL6.to_vec()),
        "set1" => Ok(SET1.to_vec()),
        other if other.starts_with('#') => other.split(',').map(str::parse).collect(),
        _ => Err(RenderError::UnknownPalette(name.to_owned())),
    }
}

/// `steps` colours spaced evenly in CIELAB from `start` to `end`.
pub fn lab_ramp(start: Rgb, end: Rgb, steps: usize) -> Vec<Rgb> {
    let (a, b) = (start.to_lab(), end.to_lab());
    match steps {
        0 => Vec::new(),
        1 => vec![end],
        _ => (0..steps)
            .map(|i| match i {
                0 => start,
                i if i + 1 == steps => end,
                i => a.lerp(b, i as f64 / (steps - 1) as f64).to_rgb(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_round_trip() {
        let c: Rgb = "#1B9E77".parse().unwrap();
        assert_eq!(c, QUAL6[0]);
        assert_eq!(c.to_string(), "#1b9e77");
        assert!("#12345".parse::<Rgb>().is_err());
        assert!("zzzzzz".parse::<Rgb>().is_err());
    }

    #[test]
    fn lab_round_trip_is_lossless_on_bytes() {
        for v in [
            0x000000, 0xffffff, 0x5a3214, 0xe31a1c, 0x1b9e77, 0x808080, 0x0000ff,
        ] {
            let c = Rgb::hex(v);
            assert_eq!(c.to_lab().to_rgb(), c, "{c}");
        }
        let white = Rgb::hex(0xffffff).to_lab();
        assert!((white.l - 100.0).abs() < 1e-3 && white.a.abs() < 1e-3 && white.b.abs() < 1e-3);
    }

    #[test]
    fn ramp_endpoints_and_lightness_monotone() {
        let r = lab_ramp(TIME_START, TIME_END, 7);
        assert_eq!(r.len(), 7);
        assert_eq!(r[0], TIME_START);
        assert_eq!(r[6], TIME_END);
        let l: Vec<f64> = r.iter().map(|c| c.to_lab().l).collect();
        assert!(l.windows(2).all(|w| w[1] >= w[0] - 0.5), "{l:?}");
        assert_eq!(
            lab_ramp(TIME_START, TIME_END, 2),
            vec![TIME_START, TIME_END]
        );
    }

    #[test]
    fn palettes() {
        let p = palette("qual6").unwrap();
        assert_eq!(p.len(), 6);
        let distinct: std::collections::HashSet<_> = p.iter().collect();
        assert_eq!(distinct.len(), 6);
        assert_eq!(palette("#ff0000,#00ff00").unwrap().len(), 2);
        assert!(matches!(
            palette("rainbow"),
            Err(RenderError::UnknownPalette(_))
        ));
    }
}
