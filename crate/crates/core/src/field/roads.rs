//! Road polylines and their rasterization onto the grid.

use super::grid::GridMeta;
use super::RoadClass;
use crate::error::{Error, Result};

/// Default filming/buffer radius around a road centerline.
pub const DEFAULT_BUFFER_M: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub road_class: RoadClass,
    /// (lat, lon) degrees.
    pub vertices: Vec<(f64, f64)>,
}

impl Polyline {
    pub fn new(road_class: RoadClass, vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Input(format!("polyline needs at least 2 vertices, got {}", vertices.len())));
        }
        Ok(Polyline { road_class, vertices })
    }
}

/// Parses a roads file: one road per line, `<class>\t<lat>,<lon> <lat>,<lon> ...`.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_roads(text: &str) -> Result<Vec<Polyline>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (class, coords) = trimmed
            .split_once('\t')
            .ok_or_else(|| Error::parse(line_no, "expected `<class><TAB><lat>,<lon> ...`"))?;
        let road_class: RoadClass = class.trim().parse().map_err(|e: Error| Error::parse(line_no, e.to_string()))?;
        let mut vertices = Vec::new();
        for pair in coords.split_whitespace() {
            let (lat, lon) = pair
                .split_once(',')
                .ok_or_else(|| Error::parse(line_no, format!("vertex `{pair}` is not `<lat>,<lon>`")))?;
            let lat: f64 = lat.parse().map_err(|_| Error::parse(line_no, format!("bad latitude `{lat}`")))?;
            let lon: f64 = lon.parse().map_err(|_| Error::parse(line_no, format!("bad longitude `{lon}`")))?;
            vertices.push((lat, lon));
        }
        out.push(Polyline::new(road_class, vertices).map_err(|e| Error::parse(line_no, e.to_string()))?);
    }
    Ok(out)
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 { 0.0 } else { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

/// Marks every cell whose center lies within `buffer_m` of a road segment.
/// Where classes overlap the most important class wins, so the result does
/// not depend on the order of `polylines`.
pub fn rasterize_roads(polylines: &[Polyline], meta: &GridMeta, buffer_m: f64) -> Vec<RoadClass> {
    let mut classes = vec![RoadClass::None; meta.len()];
    let cs = meta.cell_size_m;
    for line in polylines {
        let pts: Vec<(f64, f64)> = line.vertices.iter().map(|&(lat, lon)| meta.latlon_to_local(lat, lon)).collect();
        for seg in pts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            // Column index grows east, "up" index grows north from the bottom row.
            let c_lo = ((a.0.min(b.0) - buffer_m) / cs).ceil().max(0.0);
            let c_hi = ((a.0.max(b.0) + buffer_m) / cs).floor().min(meta.n_cols as f64 - 1.0);
            let u_lo = ((a.1.min(b.1) - buffer_m) / cs).ceil().max(0.0);
            let u_hi = ((a.1.max(b.1) + buffer_m) / cs).floor().min(meta.n_rows as f64 - 1.0);
            if c_lo > c_hi || u_lo > u_hi {
                continue;
            }
            for up in u_lo as usize..=u_hi as usize {
                let row = meta.n_rows - 1 - up;
                for col in c_lo as usize..=c_hi as usize {
                    let center = meta.cell_to_local(row, col);
                    if point_segment_distance(center, a, b) <= buffer_m {
                        let slot = &mut classes[meta.index(row, col)];
                        *slot = (*slot).max(line.road_class);
                    }
                }
            }
        }
    }
    classes
}
