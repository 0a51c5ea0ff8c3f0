//! ASCII raster grids (ESRI style) and the cell <-> WGS84 mapping.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::geo::{haversine_m, meters_per_degree_lat, meters_per_degree_lon};
use crate::error::{Error, Result};

pub const DEFAULT_NODATA: f64 = -9999.0;

/// Georeferencing and shape of a raster.
///
/// `origin_lat`/`origin_lon` locate the center of the lower-left cell. Storage
/// is row-major with the top row first, so that cell is `(n_rows - 1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_size_m: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub nodata: f64,
}

impl GridMeta {
    pub fn new(n_rows: usize, n_cols: usize, cell_size_m: f64, origin_lat: f64, origin_lon: f64) -> Result<Self> {
        let meta = GridMeta { n_rows, n_cols, cell_size_m, origin_lat, origin_lon, nodata: DEFAULT_NODATA };
        meta.validate()?;
        Ok(meta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.n_cols == 0 {
            return Err(Error::Dimension(format!("grid must be non-empty, got {}x{}", self.n_rows, self.n_cols)));
        }
        if !(self.cell_size_m > 0.0) || !self.cell_size_m.is_finite() {
            return Err(Error::Config(format!("cell size must be positive, got {}", self.cell_size_m)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_cols + col
    }

    #[inline]
    pub fn cell_of(&self, index: usize) -> (usize, usize) {
        (index / self.n_cols, index % self.n_cols)
    }

    #[inline]
    pub fn contains(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.n_rows && (col as usize) < self.n_cols
    }

    fn deg_per_cell_lat(&self) -> f64 {
        self.cell_size_m / meters_per_degree_lat()
    }

    fn deg_per_cell_lon(&self) -> f64 {
        self.cell_size_m / meters_per_degree_lon(self.origin_lat)
    }

    /// WGS84 (lat, lon) of a cell center.
    pub fn cell_to_latlon(&self, row: usize, col: usize) -> (f64, f64) {
        let up = (self.n_rows - 1 - row) as f64;
        (
            self.origin_lat + up * self.deg_per_cell_lat(),
            self.origin_lon + col as f64 * self.deg_per_cell_lon(),
        )
    }

    /// The cell whose footprint contains `(lat, lon)`.
    pub fn latlon_to_cell(&self, lat: f64, lon: f64) -> Result<(usize, usize)> {
        let up = ((lat - self.origin_lat) / self.deg_per_cell_lat()).round();
        let right = ((lon - self.origin_lon) / self.deg_per_cell_lon()).round();
        if !up.is_finite() || !right.is_finite() || up < 0.0 || right < 0.0 || up >= self.n_rows as f64 || right >= self.n_cols as f64 {
            return Err(Error::Bounds(format!("({lat}, {lon}) lies outside the {}x{} grid", self.n_rows, self.n_cols)));
        }
        Ok((self.n_rows - 1 - up as usize, right as usize))
    }

    /// Planar position (east, north) in meters of a cell center relative to
    /// the lower-left cell center.
    pub fn cell_to_local(&self, row: usize, col: usize) -> (f64, f64) {
        (col as f64 * self.cell_size_m, (self.n_rows - 1 - row) as f64 * self.cell_size_m)
    }

    /// Planar position (east, north) in meters of a WGS84 point in the same frame.
    pub fn latlon_to_local(&self, lat: f64, lon: f64) -> (f64, f64) {
        (
            (lon - self.origin_lon) * meters_per_degree_lon(self.origin_lat),
            (lat - self.origin_lat) * meters_per_degree_lat(),
        )
    }

    /// Haversine distance between two cell centers.
    pub fn cell_distance_m(&self, a: (usize, usize), b: (usize, usize)) -> f64 {
        let (la, oa) = self.cell_to_latlon(a.0, a.1);
        let (lb, ob) = self.cell_to_latlon(b.0, b.1);
        haversine_m(la, oa, lb, ob)
    }
}

/// A single raster band, row-major, top row first.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
}

impl Layer {
    pub fn filled(n_rows: usize, n_cols: usize, value: f64) -> Self {
        Layer { n_rows, n_cols, values: vec![value; n_rows * n_cols] }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.n_cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.values[row * self.n_cols + col] = v;
    }

    pub fn is_nodata(&self, row: usize, col: usize, nodata: f64) -> bool {
        self.get(row, col) == nodata
    }
}

const KEYS: [&str; 6] = ["ncols", "nrows", "xll", "yll", "cellsize", "nodata_value"];

/// Parses an ASCII grid document.
///
/// `xllcorner`/`yllcorner` give the lower-left corner (lon/lat degrees) and
/// are shifted by half a cell; `xllcenter`/`yllcenter` are taken as-is.
/// `cellsize` is in meters. `NODATA_value` defaults to -9999 when absent.
pub fn parse_grid(text: &str) -> Result<(Layer, GridMeta)> {
    let mut ncols = None;
    let mut nrows = None;
    let mut x = None;
    let mut y = None;
    let mut cellsize = None;
    let mut nodata = None;

    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).peekable();
    while let Some(&(i, line)) = lines.peek() {
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        if !KEYS.iter().any(|k| key.starts_with(k)) {
            break;
        }
        lines.next();
        let value = parts.next().ok_or_else(|| Error::parse(i + 1, format!("header `{key}` has no value")))?;
        if parts.next().is_some() {
            return Err(Error::parse(i + 1, format!("header `{key}` has trailing tokens")));
        }
        let num: f64 = value.parse().map_err(|_| Error::parse(i + 1, format!("header `{key}` value `{value}` is not a number")))?;
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::parse(i + 1, format!("header `{key}` must be a positive integer")))
            }
        };
        match key.as_str() {
            "ncols" => ncols = Some(count(num)?),
            "nrows" => nrows = Some(count(num)?),
            "xllcorner" => x = Some((num, true)),
            "xllcenter" => x = Some((num, false)),
            "yllcorner" => y = Some((num, true)),
            "yllcenter" => y = Some((num, false)),
            "cellsize" => cellsize = Some(num),
            "nodata_value" => nodata = Some(num),
            other => return Err(Error::parse(i + 1, format!("unknown header `{other}`"))),
        }
    }

    let header_end = lines.peek().map(|(i, _)| *i + 1).unwrap_or(text.lines().count() + 1);
    let missing = |name: &str| Error::parse(header_end, format!("header is missing `{name}`"));
    let ncols = ncols.ok_or_else(|| missing("ncols"))?;
    let nrows = nrows.ok_or_else(|| missing("nrows"))?;
    let (x, x_corner) = x.ok_or_else(|| missing("xllcorner"))?;
    let (y, y_corner) = y.ok_or_else(|| missing("yllcorner"))?;
    let cellsize = cellsize.ok_or_else(|| missing("cellsize"))?;
    let nodata = nodata.unwrap_or(DEFAULT_NODATA);

    let origin_lat = if y_corner { y + 0.5 * cellsize / meters_per_degree_lat() } else { y };
    let origin_lon = if x_corner { x + 0.5 * cellsize / meters_per_degree_lon(origin_lat) } else { x };
    let meta = GridMeta { n_rows: nrows, n_cols: ncols, cell_size_m: cellsize, origin_lat, origin_lon, nodata };
    meta.validate()?;

    let mut values = Vec::with_capacity(nrows * ncols);
    let mut rows_seen = 0;
    for (i, line) in lines {
        rows_seen += 1;
        if rows_seen > nrows {
            return Err(Error::Dimension(format!("line {}: more than {nrows} data rows", i + 1)));
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::parse(i + 1, format!("`{tok}` is not a number")))?;
            values.push(v);
        }
        let got = values.len() - before;
        if got != ncols {
            return Err(Error::Dimension(format!("line {}: expected {ncols} values, found {got}", i + 1)));
        }
    }
    if rows_seen != nrows {
        return Err(Error::Dimension(format!("expected {nrows} data rows, found {rows_seen}")));
    }
    Ok((Layer { n_rows: nrows, n_cols: ncols, values }, meta))
}

/// Writes a layer in the format accepted by [`parse_grid`]. Values use the
/// shortest round-trip representation, so parsing the output is lossless.
pub fn serialize_grid(layer: &Layer, meta: &GridMeta) -> String {
    let mut out = String::with_capacity(layer.values.len() * 4 + 128);
    let _ = writeln!(out, "ncols {}", meta.n_cols);
    let _ = writeln!(out, "nrows {}", meta.n_rows);
    let _ = writeln!(out, "xllcenter {:?}", meta.origin_lon);
    let _ = writeln!(out, "yllcenter {:?}", meta.origin_lat);
    let _ = writeln!(out, "cellsize {:?}", meta.cell_size_m);
    let _ = writeln!(out, "NODATA_value {:?}", meta.nodata);
    for row in layer.values.chunks(layer.n_cols) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:?}");
        }
        out.push('\n');
    }
    out
}
