//! County polygons and planar point-in-polygon lookup.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};

/// A closed ring of `(lon, lat)` vertices; the first vertex is repeated at
/// the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring(Vec<(f64, f64)>);

impl Ring {
    /// Closes the ring if needed. Fails with fewer than three distinct vertices.
    pub fn new(mut vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.first() != vertices.last() || vertices.len() == 1 {
            if let Some(&first) = vertices.first() {
                vertices.push(first);
            }
        }
        let mut distinct: Vec<(f64, f64)> = Vec::new();
        for v in &vertices {
            if !distinct.contains(v) {
                distinct.push(*v);
            }
        }
        if distinct.len() < 3 {
            return Err(Error::Data(format!(
                "ring needs at least 3 distinct vertices, got {}",
                distinct.len()
            )));
        }
        if vertices.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Data("ring has non-finite coordinates".into()));
        }
        Ok(Ring(vertices))
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.0
    }

    fn edges(&self) -> impl Iterator<Item = ((f64, f64), (f64, f64))> + '_ {
        self.0.windows(2).map(|w| (w[0], w[1]))
    }

    fn on_boundary(&self, x: f64, y: f64) -> bool {
        self.edges().any(|(a, b)| on_segment(a, b, (x, y)))
    }

    /// Number of edges crossed by the ray from `(x, y)` towards +x.
    fn crossings(&self, x: f64, y: f64) -> usize {
        self.edges()
            .filter(|&((x1, y1), (x2, y2))| {
                if (y1 > y) == (y2 > y) {
                    return false;
                }
                let x_at = x1 + (y - y1) * (x2 - x1) / (y2 - y1);
                x < x_at
            })
            .count()
    }

    fn bbox(&self) -> BBox {
        let mut b = BBox::empty();
        for &(x, y) in &self.0 {
            b.include(x, y);
        }
        b
    }
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let scale = (b.0 - a.0).abs().max((b.1 - a.1).abs()).max(1.0);
    if cross.abs() > 1e-12 * scale * scale {
        return false;
    }
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct BBox {
    min_x: f64,
    min_y: f64,
    max_x: f64,
    max_y: f64,
}

impl BBox {
    fn empty() -> Self {
        BBox { min_x: f64::INFINITY, min_y: f64::INFINITY, max_x: f64::NEG_INFINITY, max_y: f64::NEG_INFINITY }
    }

    fn include(&mut self, x: f64, y: f64) {
        self.min_x = self.min_x.min(x);
        self.min_y = self.min_y.min(y);
        self.max_x = self.max_x.max(x);
        self.max_y = self.max_y.max(y);
    }

    fn merge(&mut self, other: &BBox) {
        self.include(other.min_x, other.min_y);
        self.include(other.max_x, other.max_y);
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }
}

/// Outer ring plus optional holes, evaluated with the even-odd rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    rings: Vec<Ring>,
}

impl Polygon {
    pub fn new(rings: Vec<Ring>) -> Result<Self> {
        if rings.is_empty() {
            return Err(Error::Data("polygon without rings".into()));
        }
        Ok(Polygon { rings })
    }

    pub fn simple(vertices: Vec<(f64, f64)>) -> Result<Self> {
        Polygon::new(vec![Ring::new(vertices)?])
    }

    pub fn rings(&self) -> &[Ring] {
        &self.rings
    }

    /// Even-odd containment; points on any edge count as inside.
    pub fn contains(&self, lon: f64, lat: f64) -> bool {
        if self.rings.iter().any(|r| r.on_boundary(lon, lat)) {
            return true;
        }
        let crossings: usize = self.rings.iter().map(|r| r.crossings(lon, lat)).sum();
        crossings % 2 == 1
    }

    fn bbox(&self) -> BBox {
        let mut b = BBox::empty();
        for r in &self.rings {
            b.merge(&r.bbox());
        }
        b
    }
}

#[derive(Debug, Clone)]
struct County {
    polygons: Vec<Polygon>,
    bbox: BBox,
    name: Option<String>,
}

/// County FIPS → polygons, iterated in ascending FIPS order.
#[derive(Debug, Clone, Default)]
pub struct CountyGeometry {
    counties: BTreeMap<String, County>,
}

impl CountyGeometry {
    pub fn insert(&mut self, fips: impl Into<String>, polygons: Vec<Polygon>, name: Option<String>) {
        let mut bbox = BBox::empty();
        for p in &polygons {
            bbox.merge(&p.bbox());
        }
        let county = self.counties.entry(fips.into()).or_insert(County { polygons: Vec::new(), bbox: BBox::empty(), name: None });
        county.polygons.extend(polygons);
        county.bbox.merge(&bbox);
        if name.is_some() {
            county.name = name;
        }
    }

    pub fn contains_fips(&self, fips: &str) -> bool {
        self.counties.contains_key(fips)
    }

    pub fn fips(&self) -> impl Iterator<Item = &str> {
        self.counties.keys().map(String::as_str)
    }

    pub fn name(&self, fips: &str) -> Option<&str> {
        self.counties.get(fips).and_then(|c| c.name.as_deref())
    }

    pub fn polygons(&self, fips: &str) -> &[Polygon] {
        self.counties.get(fips).map(|c| c.polygons.as_slice()).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.counties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counties.is_empty()
    }

    /// Lowest FIPS whose polygons contain the point.
    pub fn assign_county(&self, lat: f64, lon: f64) -> Option<&str> {
        self.counties
            .iter()
            .filter(|(_, c)| c.bbox.contains(lon, lat))
            .find(|(_, c)| c.polygons.iter().any(|p| p.contains(lon, lat)))
            .map(|(fips, _)| fips.as_str())
    }

    /// Reads a GeoJSON FeatureCollection of Polygon/MultiPolygon features
    /// carrying a `FIPS` property (and optionally `NAME`).
    pub fn from_geojson_file(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_geojson_str(&raw)
    }

    pub fn from_geojson_str(raw: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(raw)?;
        let features = doc
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Data("GeoJSON: missing features array".into()))?;
        let mut geom = CountyGeometry::default();
        for (i, feature) in features.iter().enumerate() {
            let props = feature.get("properties");
            let fips = match props.and_then(|p| p.get("FIPS")) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => format!("{:05}", n.as_u64().unwrap_or_default()),
                _ => return Err(Error::Data(format!("GeoJSON feature {i}: missing FIPS property"))),
            };
            let name = props.and_then(|p| p.get("NAME")).and_then(Value::as_str).map(str::to_string);
            let geometry = feature
                .get("geometry")
                .ok_or_else(|| Error::Data(format!("GeoJSON feature {i}: missing geometry")))?;
            let coords = geometry.get("coordinates");
            let polygons = match (geometry.get("type").and_then(Value::as_str), coords) {
                (Some("Polygon"), Some(c)) => vec![parse_polygon(c)?],
                (Some("MultiPolygon"), Some(Value::Array(polys))) => {
                    polys.iter().map(parse_polygon).collect::<Result<Vec<_>>>()?
                }
                (other, _) => {
                    return Err(Error::Data(format!("GeoJSON feature {i}: unsupported geometry {other:?}")))
                }
            };
            geom.insert(fips, polygons, name);
        }
        Ok(geom)
    }

    /// Serializes as a GeoJSON FeatureCollection.
    pub fn to_geojson(&self) -> Value {
        let features: Vec<Value> = self
            .counties
            .iter()
            .map(|(fips, county)| {
                let polys: Vec<Value> = county
                    .polygons
                    .iter()
                    .map(|p| {
                        Value::Array(
                            p.rings
                                .iter()
                                .map(|r| Value::Array(r.0.iter().map(|&(x, y)| serde_json::json!([x, y])).collect()))
                                .collect(),
                        )
                    })
                    .collect();
                let mut props = serde_json::json!({ "FIPS": fips });
                if let Some(name) = &county.name {
                    props["NAME"] = Value::String(name.clone());
                }
                serde_json::json!({
                    "type": "Feature",
                    "properties": props,
                    "geometry": { "type": "MultiPolygon", "coordinates": polys },
                })
            })
            .collect();
        serde_json::json!({ "type": "FeatureCollection", "features": features })
    }
}

fn parse_polygon(value: &Value) -> Result<Polygon> {
    let rings = value
        .as_array()
        .ok_or_else(|| Error::Data("GeoJSON: polygon is not an array of rings".into()))?;
    let rings = rings
        .iter()
        .map(|ring| {
            let pts = ring
                .as_array()
                .ok_or_else(|| Error::Data("GeoJSON: ring is not an array".into()))?
                .iter()
                .map(|pt| match pt.as_array().map(Vec::as_slice) {
                    Some([x, y, ..]) => match (x.as_f64(), y.as_f64()) {
                        (Some(x), Some(y)) => Ok((x, y)),
                        _ => Err(Error::Data("GeoJSON: non-numeric coordinate".into())),
                    },
                    _ => Err(Error::Data("GeoJSON: position needs two numbers".into())),
                })
                .collect::<Result<Vec<_>>>()?;
            Ring::new(pts)
        })
        .collect::<Result<Vec<_>>>()?;
    Polygon::new(rings)
}
