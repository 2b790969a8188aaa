//! Point tables and outlines from CSV and GeoJSON.

use crate::geometry::{GeometryError, Outline, Point2, PointSet};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("non-finite coordinate at {location}")]
    NonFiniteCoordinate { location: String },
    #[error("missing column '{0}' in CSV header")]
    MissingColumn(&'static str),
    #[error("invalid outline: {0}")]
    Outline(#[from] GeometryError),
}

impl InputError {
    fn parse(location: impl Into<String>, message: impl ToString) -> Self {
        InputError::Parse {
            location: location.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointFormat {
    Csv,
    Geojson,
}

impl PointFormat {
    /// `.json` and `.geojson` are GeoJSON, everything else CSV.
    pub fn from_path(path: &Path) -> PointFormat {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref()
        {
            Some("json" | "geojson") => PointFormat::Geojson,
            _ => PointFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub x: f64,
    pub y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<String>,
}

/// Key of one overlay group.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroupKey {
    pub series: Option<String>,
    pub time: Option<String>,
}

impl GroupKey {
    pub fn label(&self) -> String {
        match (&self.series, &self.time) {
            (None, None) => "all".to_owned(),
            (Some(s), None) => s.clone(),
            (None, Some(t)) => t.clone(),
            (Some(s), Some(t)) => format!("{s}@{t}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesTable {
    pub rows: Vec<Row>,
}

impl SeriesTable {
    pub fn from_points(points: &[Point2]) -> Self {
        SeriesTable {
            rows: points
                .iter()
                .map(|p| Row {
                    x: p.x,
                    y: p.y,
                    series: None,
                    time: None,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn points(&self) -> Vec<Point2> {
        self.rows.iter().map(|r| Point2::new(r.x, r.y)).collect()
    }

    /// Rows grouped by `(series, time)`, keys sorted, row order kept within
    /// each group.
    pub fn groups(&self) -> BTreeMap<GroupKey, PointSet> {
        let mut out: BTreeMap<GroupKey, PointSet> = BTreeMap::new();
        for r in &self.rows {
            let key = GroupKey {
                series: r.series.clone(),
                time: r.time.clone(),
            };
            out.entry(key.clone())
                .or_insert_with(|| PointSet {
                    points: Vec::new(),
                    series_label: key.series.clone(),
                    time_label: key.time.clone(),
                })
                .points
                .push(Point2::new(r.x, r.y));
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_writer(w);
        let has_series = self.rows.iter().any(|r| r.series.is_some());
        let has_time = self.rows.iter().any(|r| r.time.is_some());
        let mut header = vec!["x", "y"];
        if has_series {
            header.push("series");
        }
        if has_time {
            header.push("time");
        }
        wr.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.x.to_string(), r.y.to_string()];
            if has_series {
                rec.push(r.series.clone().unwrap_or_default());
            }
            if has_time {
                rec.push(r.time.clone().unwrap_or_default());
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }
}

fn read_to_string(path: &Path) -> Result<String, InputError> {
    let mut s = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut s))
        .map_err(|source| InputError::Io {
            path: path.to_owned(),
            source,
        })?;
    Ok(s)
}

pub fn load_points(path: &Path, format: PointFormat) -> Result<SeriesTable, InputError> {
    let text = read_to_string(path)?;
    match format {
        PointFormat::Csv => parse_points_csv(&text),
        PointFormat::Geojson => parse_points_geojson(&text),
    }
}

fn finite_pair(x: f64, y: f64, location: impl Fn() -> String) -> Result<(), InputError> {
    if x.is_finite() && y.is_finite() {
        Ok(())
    } else {
        Err(InputError::NonFiniteCoordinate {
            location: location(),
        })
    }
}

/// CSV with a header containing `x` and `y`, and optionally `series` and
/// `time`. Lines are counted from 1, header included.
pub fn parse_points_csv(text: &str) -> Result<SeriesTable, InputError> {
    let mut rd = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rd
        .headers()
        .map_err(|e| InputError::parse("line 1", e))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let xi = col("x").ok_or(InputError::MissingColumn("x"))?;
    let yi = col("y").ok_or(InputError::MissingColumn("y"))?;
    let si = col("series");
    let ti = col("time");

    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            InputError::parse(format!("line {line}"), e)
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let loc = || format!("line {line}");
        let num = |i: usize, name: &str| -> Result<f64, InputError> {
            let field = rec.get(i).unwrap_or("");
            field
                .parse::<f64>()
                .map_err(|_| InputError::parse(loc(), format!("bad {name} value '{field}'")))
        };
        let (x, y) = (num(xi, "x")?, num(yi, "y")?);
        finite_pair(x, y, loc)?;
        let text_field = |i: Option<usize>| {
            i.and_then(|i| rec.get(i))
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
        };
        rows.push(Row {
            x,
            y,
            series: text_field(si),
            time: text_field(ti),
        });
    }
    Ok(SeriesTable { rows })
}

fn property_text(props: Option<&Value>, key: &str) -> Option<String> {
    match props?.get(key)? {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn coord_pair(v: &Value, location: &dyn Fn() -> String) -> Result<(f64, f64), InputError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() >= 2)
        .ok_or_else(|| InputError::parse(location(), "expected a coordinate pair"))?;
    // serde_json has no NaN literal, so null stands in for a missing value
    let num = |c: &Value| match c {
        Value::Null => Ok(f64::NAN),
        c => c
            .as_f64()
            .ok_or_else(|| InputError::parse(location(), "coordinate is not a number")),
    };
    let (x, y) = (num(&arr[0])?, num(&arr[1])?);
    finite_pair(x, y, location)?;
    Ok((x, y))
}

/// FeatureCollection of Point features; `series` and `time` come from each
/// feature's properties.
pub fn parse_points_geojson(text: &str) -> Result<SeriesTable, InputError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| InputError::parse("document", e))?;
    let features = doc
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| InputError::parse("document", "expected a FeatureCollection"))?;
    let mut rows = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        let loc = || format!("feature {i}");
        let geom = f
            .get("geometry")
            .ok_or_else(|| InputError::parse(loc(), "missing geometry"))?;
        if geom.get("type").and_then(Value::as_str) != Some("Point") {
            return Err(InputError::parse(loc(), "geometry is not a Point"));
        }
        let (x, y) = coord_pair(geom.get("coordinates").unwrap_or(&Value::Null), &loc)?;
        let props = f.get("properties");
        rows.push(Row {
            x,
            y,
            series: property_text(props, "series"),
            time: property_text(props, "time"),
        });
    }
    Ok(SeriesTable { rows })
}

/// A predefined outline from a GeoJSON Polygon (exterior ring only) or a CSV
/// vertex list with `x,y` columns.
pub fn load_outline(path: &Path) -> Result<Outline, InputError> {
    let text = read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        parse_outline_geojson(&text)
    } else {
        let ring = parse_points_csv(&text)?.points();
        Ok(Outline::new(ring)?)
    }
}

pub fn parse_outline_geojson(text: &str) -> Result<Outline, InputError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| InputError::parse("document", e))?;
    let geom = find_polygon(&doc)
        .ok_or_else(|| InputError::parse("document", "no Polygon geometry found"))?;
    let exterior = geom
        .get("coordinates")
        .and_then(Value::as_array)
        .and_then(|rings| rings.first())
        .and_then(Value::as_array)
        .ok_or_else(|| InputError::parse("polygon", "missing exterior ring"))?;
    let ring = exterior
        .iter()
        .enumerate()
        .map(|(i, c)| coord_pair(c, &|| format!("ring vertex {i}")).map(|(x, y)| Point2::new(x, y)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Outline::new(ring)?)
}

fn find_polygon(v: &Value) -> Option<&Value> {
    match v.get("type").and_then(Value::as_str)? {
        "Polygon" => Some(v),
        "Feature" => find_polygon(v.get("geometry")?),
        "FeatureCollection" => v.get("features")?.as_array()?.iter().find_map(find_polygon),
        _ => None,
    }
}
