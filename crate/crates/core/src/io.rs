//! Artifact readers and writers: route CSV/JSON, batch results CSV and PGM
//! overlays.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, GridMeta, Layer};
use crate::walker::{Cell, RouteResult, Scenario};

/// Reads a whole file, mapping failures to [`Error::Io`].
pub fn read_to_string(path: impl AsRef<Path>) -> Result<String> {
    fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))
}

pub fn write_bytes(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    fs::write(path.as_ref(), bytes).map_err(|e| Error::io(path, e))
}

/// `step,row,col,cum_dist_m`, one line per visited cell.
pub fn route_csv(route: &RouteResult, cell_size_m: f64) -> String {
    let mut out = String::from("step,row,col,cum_dist_m\n");
    let mut d = 0.0;
    for (i, &(r, c)) in route.cells.iter().enumerate() {
        if i > 0 {
            let (pr, pc) = route.cells[i - 1];
            d += if pr != r && pc != c { cell_size_m * std::f64::consts::SQRT_2 } else { cell_size_m };
        }
        out.push_str(&format!("{i},{r},{c},{d:.3}\n"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSummary {
    pub scenario: Scenario,
    pub distance_m: f64,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub coverage: f64,
}

impl From<&RouteResult> for RouteSummary {
    fn from(r: &RouteResult) -> Self {
        RouteSummary { scenario: r.scenario, distance_m: r.distance_m, alpha: r.alpha, beta: r.beta, seed: r.seed, coverage: r.coverage }
    }
}

/// One row of the batch results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
    pub scenario: Scenario,
    pub distance_m: f64,
    pub coverage: f64,
}

impl From<&RouteResult> for ResultRow {
    fn from(r: &RouteResult) -> Self {
        ResultRow { seed: r.seed, alpha: r.alpha, beta: r.beta, scenario: r.scenario, distance_m: r.distance_m, coverage: r.coverage }
    }
}

impl ResultRow {
    /// Route record without its cell sequence, which the table does not keep.
    pub fn to_route(&self) -> RouteResult {
        RouteResult {
            cells: Vec::new(),
            distance_m: self.distance_m,
            scenario: self.scenario,
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            coverage: self.coverage,
            proposals: 0,
        }
    }
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io("results", e))?;
    Ok(())
}

pub fn read_results_csv<R: std::io::Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(Error::from)).collect()
}

/// Reads a route CSV back into its cell sequence.
pub fn read_route_csv<R: std::io::Read>(reader: R) -> Result<Vec<Cell>> {
    #[derive(Deserialize)]
    struct Row {
        step: usize,
        row: usize,
        col: usize,
    }
    let mut rdr = csv::Reader::from_reader(reader);
    let mut cells = Vec::new();
    for (i, rec) in rdr.deserialize::<Row>().enumerate() {
        let rec = rec?;
        if rec.step != i {
            return Err(Error::parse(i + 2, format!("expected step {i}, found {}", rec.step)));
        }
        cells.push((rec.row, rec.col));
    }
    Ok(cells)
}

/// Binary greyscale image (P5): roads in grey by importance, NODATA black,
/// route cells white.
pub fn route_pgm(field: &Field, routes: &[&[Cell]]) -> Vec<u8> {
    let (rows, cols) = (field.n_rows(), field.n_cols());
    let max_w = crate::field::RoadClass::max_weight();
    let mut px = vec![0u8; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            px[r * cols + c] = if !field.is_walkable(r, c) {
                0
            } else {
                40 + (120.0 * field.importance(r, c) / max_w).round() as u8
            };
        }
    }
    for route in routes {
        for &(r, c) in *route {
            px[r * cols + c] = 255;
        }
    }
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    out.extend_from_slice(&px);
    out
}

/// Field metadata written next to the exported grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_size_m: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub nodata: f64,
    pub road_cells: usize,
}

impl FieldMeta {
    pub fn of(field: &Field) -> Self {
        let m: &GridMeta = field.meta();
        FieldMeta {
            n_rows: m.n_rows,
            n_cols: m.n_cols,
            cell_size_m: m.cell_size_m,
            origin_lat: m.origin_lat,
            origin_lon: m.origin_lon,
            nodata: m.nodata,
            road_cells: field.road_cells().count(),
        }
    }
}

/// Loads a field bundle from an altitude grid and an importance grid.
pub fn load_field_bundle(altitude: impl AsRef<Path>, importance: impl AsRef<Path>) -> Result<Field> {
    let (alt, meta): (Layer, GridMeta) = crate::field::parse_grid(&read_to_string(altitude)?)?;
    let (imp, imp_meta) = crate::field::parse_grid(&read_to_string(importance)?)?;
    if (imp_meta.n_rows, imp_meta.n_cols) != (meta.n_rows, meta.n_cols) {
        return Err(Error::Dimension(format!(
            "importance grid is {}x{}, altitude grid is {}x{}",
            imp_meta.n_rows, imp_meta.n_cols, meta.n_rows, meta.n_cols
        )));
    }
    Field::from_importance(meta, alt, &imp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{synth_field, SynthSpec};

    fn route() -> RouteResult {
        RouteResult {
            cells: vec![(1, 1), (1, 2), (2, 3), (1, 2), (1, 1)],
            distance_m: 100.0 * (2.0 + 2.0 * std::f64::consts::SQRT_2),
            scenario: Scenario::Home,
            alpha: 0.2,
            beta: 0.3,
            seed: 77,
            coverage: 0.0,
            proposals: 12,
        }
    }

    #[test]
    fn route_csv_roundtrip_and_distance() {
        let r = route();
        let text = route_csv(&r, 100.0);
        assert!(text.starts_with("step,row,col,cum_dist_m\n0,1,1,0.000\n1,1,2,100.000\n2,2,3,241.421\n"));
        let last: f64 = text.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert!((last - r.distance_m).abs() < 1e-3);
        assert_eq!(read_route_csv(text.as_bytes()).unwrap(), r.cells);
        assert!(read_route_csv("step,row,col,cum_dist_m\n1,0,0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn results_csv_roundtrip() {
        let rows = vec![ResultRow::from(&route()), ResultRow { scenario: Scenario::Trapped, seed: 1, ..ResultRow::from(&route()) }];
        let mut buf = Vec::new();
        write_results_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("seed,alpha,beta,scenario,distance_m,coverage\n77,0.2,0.3,home,"));
        assert_eq!(read_results_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn summary_json_keys() {
        let v = serde_json::to_value(RouteSummary::from(&route())).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 6);
        assert_eq!(v["scenario"], "home");
    }

    #[test]
    fn pgm_layout() {
        let f = synth_field(&SynthSpec { template: "flat".into(), n_rows: 4, n_cols: 6, ..Default::default() }).unwrap();
        let cells = [(0usize, 0usize), (3, 5)];
        let img = route_pgm(&f, &[&cells[..]]);
        let header = b"P5\n6 4\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(img.len(), header.len() + 24);
        assert_eq!(img[header.len()], 255);
        assert_eq!(img[header.len() + 23], 255);
        assert_eq!(img[header.len() + 1], 40);
    }
}
