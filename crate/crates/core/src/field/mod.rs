//! The raster field every planner runs on: altitude plus road importance.

mod geo;
mod grid;
mod roads;
mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use geo::{haversine_m, meters_per_degree_lat, meters_per_degree_lon, EARTH_RADIUS_M};
pub use grid::{parse_grid, serialize_grid, GridMeta, Layer, DEFAULT_NODATA};
pub use roads::{parse_roads, rasterize_roads, Polyline, DEFAULT_BUFFER_M};
pub use synth::{synth_field, SynthSpec};

use crate::error::{Error, Result};

/// Road classes ordered by importance, lowest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoadClass {
    None,
    Regional,
    National,
    Divided,
    Motorway,
}

impl RoadClass {
    pub const ALL: [RoadClass; 5] =
        [RoadClass::None, RoadClass::Regional, RoadClass::National, RoadClass::Divided, RoadClass::Motorway];

    /// Importance weight: 2, √3, √2, 1 for the road classes, 0 off-road.
    pub fn weight(self) -> f64 {
        match self {
            RoadClass::Motorway => 2.0,
            RoadClass::Divided => 3f64.sqrt(),
            RoadClass::National => 2f64.sqrt(),
            RoadClass::Regional => 1.0,
            RoadClass::None => 0.0,
        }
    }

    /// Inverse of [`RoadClass::weight`], tolerant to text round-off.
    pub fn from_weight(w: f64) -> Option<RoadClass> {
        RoadClass::ALL.into_iter().find(|c| (c.weight() - w).abs() < 1e-9)
    }

    pub fn max_weight() -> f64 {
        RoadClass::Motorway.weight()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RoadClass::Motorway => "motorway",
            RoadClass::Divided => "divided",
            RoadClass::National => "national",
            RoadClass::Regional => "regional",
            RoadClass::None => "none",
        }
    }
}

impl fmt::Display for RoadClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoadClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RoadClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Input(format!("unknown road class `{s}`")))
    }
}

/// Stacked altitude, road class and importance layers sharing one grid.
///
/// Immutable once built; walkers keep their own decay overlays.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    meta: GridMeta,
    altitude: Vec<f64>,
    road_class: Vec<RoadClass>,
    importance: Vec<f64>,
}

impl Field {
    pub fn new(meta: GridMeta, altitude: Layer, road_class: Vec<RoadClass>) -> Result<Self> {
        meta.validate()?;
        if altitude.n_rows != meta.n_rows || altitude.n_cols != meta.n_cols {
            return Err(Error::Dimension(format!(
                "altitude is {}x{}, grid is {}x{}",
                altitude.n_rows, altitude.n_cols, meta.n_rows, meta.n_cols
            )));
        }
        if road_class.len() != meta.len() {
            return Err(Error::Dimension(format!("road layer has {} cells, grid has {}", road_class.len(), meta.len())));
        }
        let importance = road_class.iter().map(|c| c.weight()).collect();
        Ok(Field { meta, altitude: altitude.values, road_class, importance })
    }

    /// Rebuilds a field from a stored importance layer.
    pub fn from_importance(meta: GridMeta, altitude: Layer, importance: &Layer) -> Result<Self> {
        if importance.n_rows != meta.n_rows || importance.n_cols != meta.n_cols {
            return Err(Error::Dimension(format!(
                "importance is {}x{}, grid is {}x{}",
                importance.n_rows, importance.n_cols, meta.n_rows, meta.n_cols
            )));
        }
        let classes = importance
            .values
            .iter()
            .map(|&w| RoadClass::from_weight(w).ok_or_else(|| Error::Input(format!("importance value {w} is not a road class weight"))))
            .collect::<Result<Vec<_>>>()?;
        Field::new(meta, altitude, classes)
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn n_rows(&self) -> usize {
        self.meta.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.meta.n_cols
    }

    pub fn cell_size_m(&self) -> f64 {
        self.meta.cell_size_m
    }

    pub fn in_bounds(&self, row: isize, col: isize) -> bool {
        self.meta.contains(row, col)
    }

    pub fn altitude(&self, row: usize, col: usize) -> f64 {
        self.altitude[self.meta.index(row, col)]
    }

    pub fn road_class(&self, row: usize, col: usize) -> RoadClass {
        self.road_class[self.meta.index(row, col)]
    }

    #[inline]
    pub fn importance(&self, row: usize, col: usize) -> f64 {
        self.importance[self.meta.index(row, col)]
    }

    #[inline]
    pub fn importance_at(&self, index: usize) -> f64 {
        self.importance[index]
    }

    pub fn is_road(&self, row: usize, col: usize) -> bool {
        self.importance(row, col) > 0.0
    }

    /// Cells with NODATA altitude (sea, voids) cannot be flown over.
    pub fn is_walkable(&self, row: usize, col: usize) -> bool {
        self.altitude(row, col) != self.meta.nodata
    }

    /// Road cells in row-major order.
    pub fn road_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.importance.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, _)| self.meta.cell_of(i))
    }

    pub fn altitude_layer(&self) -> Layer {
        Layer { n_rows: self.meta.n_rows, n_cols: self.meta.n_cols, values: self.altitude.clone() }
    }

    pub fn importance_layer(&self) -> Layer {
        Layer { n_rows: self.meta.n_rows, n_cols: self.meta.n_cols, values: self.importance.clone() }
    }

    pub fn cell_to_latlon(&self, row: usize, col: usize) -> (f64, f64) {
        self.meta.cell_to_latlon(row, col)
    }

    pub fn latlon_to_cell(&self, lat: f64, lon: f64) -> Result<(usize, usize)> {
        self.meta.latlon_to_cell(lat, lon)
    }

    /// Nearest walkable cell to a point, searching outward ring by ring.
    pub fn nearest_walkable(&self, lat: f64, lon: f64) -> Result<(usize, usize)> {
        self.nearest_where(lat, lon, |r, c| self.is_walkable(r, c))
            .ok_or_else(|| Error::Input("field has no walkable cell".into()))
    }

    /// Closest road cell to a location, for launching walkers onto the network.
    pub fn nearest_road(&self, lat: f64, lon: f64) -> Result<(usize, usize)> {
        self.nearest_where(lat, lon, |r, c| self.is_road(r, c))
            .ok_or_else(|| Error::Input("field has no road cell".into()))
    }

    fn nearest_where(&self, lat: f64, lon: f64, keep: impl Fn(usize, usize) -> bool) -> Option<(usize, usize)> {
        let (r0, c0) = self.latlon_to_cell(lat, lon).ok()?;
        let max_radius = self.meta.n_rows.max(self.meta.n_cols) as isize;
        let mut best: Option<((usize, usize), f64)> = None;
        for radius in 0..=max_radius {
            // Once a hit exists, the ring at this radius is entirely farther
            // than the hit's distance bound, so stop.
            if let Some((_, bd)) = best {
                if (radius - 1) as f64 * self.meta.cell_size_m > bd {
                    break;
                }
            }
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    if dr.abs().max(dc.abs()) != radius {
                        continue;
                    }
                    let (r, c) = (r0 as isize + dr, c0 as isize + dc);
                    if !self.in_bounds(r, c) || !keep(r as usize, c as usize) {
                        continue;
                    }
                    let (clat, clon) = self.cell_to_latlon(r as usize, c as usize);
                    let d = haversine_m(lat, lon, clat, clon);
                    if best.is_none_or(|(_, bd)| d < bd) {
                        best = Some(((r as usize, c as usize), d));
                    }
                }
            }
        }
        best.map(|(cell, _)| cell)
    }

    /// Every `stride`-th road cell center, chosen so that roughly `target`
    /// points come back.
    pub fn sample_road_points(&self, target: usize) -> Vec<(f64, f64)> {
        let cells: Vec<_> = self.road_cells().collect();
        if cells.is_empty() || target == 0 {
            return Vec::new();
        }
        let stride = (cells.len() / target).max(1);
        cells.iter().step_by(stride).map(|&(r, c)| self.cell_to_latlon(r, c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_weights_follow_decreasing_series() {
        let w: Vec<f64> = [RoadClass::Motorway, RoadClass::Divided, RoadClass::National, RoadClass::Regional]
            .iter()
            .map(|c| c.weight())
            .collect();
        assert_eq!(w, vec![2.0, 3f64.sqrt(), 2f64.sqrt(), 1.0]);
        assert!(RoadClass::Motorway > RoadClass::Divided && RoadClass::Regional > RoadClass::None);
    }

    #[test]
    fn importance_round_trips_to_class() {
        for c in RoadClass::ALL {
            let text = format!("{:?}", c.weight());
            assert_eq!(RoadClass::from_weight(text.parse().unwrap()), Some(c));
        }
        assert_eq!(RoadClass::from_weight(0.5), None);
    }

    #[test]
    fn mismatched_layers_are_rejected() {
        let meta = GridMeta::new(3, 3, 100.0, 18.0, -66.0).unwrap();
        let alt = Layer::filled(3, 4, 0.0);
        assert!(matches!(Field::new(meta, alt, vec![RoadClass::None; 9]), Err(Error::Dimension(_))));
        let alt = Layer::filled(3, 3, 0.0);
        assert!(matches!(Field::new(meta, alt, vec![RoadClass::None; 8]), Err(Error::Dimension(_))));
    }

    #[test]
    fn samples_every_nth_road_cell() {
        let f = synth_field(&SynthSpec::new("loop-road", 101, 101)).unwrap();
        let pts = f.sample_road_points(24);
        assert_eq!(pts.len(), 24);
        assert!(f.sample_road_points(0).is_empty());
    }

    #[test]
    fn nearest_road_matches_exhaustive_search() {
        let f = synth_field(&SynthSpec { margin: 8, ..SynthSpec::new("loop-road", 41, 41) }).unwrap();
        for (r, c) in [(20, 20), (0, 0), (3, 37), (40, 12)] {
            let (lat, lon) = f.cell_to_latlon(r, c);
            let got = f.nearest_road(lat, lon).unwrap();
            let dist = |(rr, cc): (usize, usize)| {
                let (a, b) = f.cell_to_latlon(rr, cc);
                haversine_m(lat, lon, a, b)
            };
            let best = f.road_cells().map(dist).fold(f64::INFINITY, f64::min);
            assert!(f.is_road(got.0, got.1));
            assert!((dist(got) - best).abs() < 1e-6, "from ({r},{c})");
        }
        let flat = synth_field(&SynthSpec::new("flat", 5, 5)).unwrap();
        let (lat, lon) = flat.cell_to_latlon(2, 2);
        assert_eq!(flat.nearest_walkable(lat, lon).unwrap(), (2, 2));
    }
}
