//! Deterministic synthetic fields used as fixtures.

use serde::{Deserialize, Serialize};

use super::grid::{GridMeta, Layer};
use super::{Field, RoadClass};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    /// One of `flat`, `loop-road`, `grid-of-roads`, `moat`.
    pub template: String,
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_size_m: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    /// Ring offset from the border for `loop-road`.
    pub margin: usize,
    /// Road pitch for `grid-of-roads`.
    pub spacing: usize,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            template: "flat".into(),
            n_rows: 101,
            n_cols: 101,
            cell_size_m: 100.0,
            origin_lat: 18.0,
            origin_lon: -66.0,
            margin: 20,
            spacing: 10,
        }
    }
}

impl SynthSpec {
    pub fn new(template: &str, n_rows: usize, n_cols: usize) -> Self {
        SynthSpec { template: template.into(), n_rows, n_cols, ..Default::default() }
    }

    /// The natural launch cell for the template: the middle of the ring's top
    /// edge for `loop-road`, the first road crossing for `grid-of-roads`, and
    /// the center cell otherwise.
    pub fn origin(&self) -> (usize, usize) {
        match self.template.as_str() {
            "loop-road" => (self.margin, self.n_cols / 2),
            "grid-of-roads" => (self.spacing.min(self.n_rows - 1), self.spacing.min(self.n_cols - 1)),
            _ => (self.n_rows / 2, self.n_cols / 2),
        }
    }
}

pub fn synth_field(spec: &SynthSpec) -> Result<Field> {
    let meta = GridMeta::new(spec.n_rows, spec.n_cols, spec.cell_size_m, spec.origin_lat, spec.origin_lon)?;
    let mut altitude = Layer::filled(spec.n_rows, spec.n_cols, 0.0);
    let mut classes = vec![RoadClass::None; meta.len()];
    match spec.template.as_str() {
        "flat" => {}
        "loop-road" => {
            let m = spec.margin;
            if 2 * m + 1 >= spec.n_rows.min(spec.n_cols) {
                return Err(Error::Config(format!("margin {m} leaves no ring in a {}x{} grid", spec.n_rows, spec.n_cols)));
            }
            let (bottom, right) = (spec.n_rows - 1 - m, spec.n_cols - 1 - m);
            for r in m..=bottom {
                for c in m..=right {
                    if r == m || r == bottom || c == m || c == right {
                        classes[meta.index(r, c)] = RoadClass::Motorway;
                    }
                }
            }
        }
        "grid-of-roads" => {
            let s = spec.spacing.max(1);
            let ladder = [RoadClass::Motorway, RoadClass::Divided, RoadClass::National, RoadClass::Regional];
            for r in 0..spec.n_rows {
                for c in 0..spec.n_cols {
                    let mut class = RoadClass::None;
                    if r % s == 0 {
                        class = class.max(ladder[(r / s) % 4]);
                    }
                    if c % s == 0 {
                        class = class.max(ladder[(c / s) % 4]);
                    }
                    classes[meta.index(r, c)] = class;
                }
            }
        }
        "moat" => {
            if spec.n_rows < 3 || spec.n_cols < 3 {
                return Err(Error::Config("moat needs at least a 3x3 grid".into()));
            }
            let (r0, c0) = spec.origin();
            for dr in -1isize..=1 {
                for dc in -1isize..=1 {
                    if dr != 0 || dc != 0 {
                        altitude.set((r0 as isize + dr) as usize, (c0 as isize + dc) as usize, meta.nodata);
                    }
                }
            }
        }
        other => return Err(Error::Config(format!("unknown synthetic template `{other}`"))),
    }
    Field::new(meta, altitude, classes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loop_road_is_a_square_ring_at_the_margin() {
        let spec = SynthSpec::new("loop-road", 101, 101);
        let f = synth_field(&spec).unwrap();
        let ring: Vec<_> = f.road_cells().collect();
        assert_eq!(ring.len(), 4 * 60);
        for (r, c) in ring {
            assert!(r == 20 || r == 80 || c == 20 || c == 80);
            assert_eq!(f.importance(r, c), 2.0);
        }
        assert_eq!(f.importance(50, 50), 0.0);
        assert!(f.is_road(spec.origin().0, spec.origin().1));
    }

    #[test]
    fn flat_is_all_zero() {
        let f = synth_field(&SynthSpec::new("flat", 9, 13)).unwrap();
        assert_eq!(f.road_cells().count(), 0);
    }

    #[test]
    fn moat_surrounds_origin_with_nodata() {
        let spec = SynthSpec::new("moat", 9, 9);
        let f = synth_field(&spec).unwrap();
        let (r0, c0) = spec.origin();
        assert!(f.is_walkable(r0, c0));
        let blocked = (-1isize..=1)
            .flat_map(|dr| (-1isize..=1).map(move |dc| (dr, dc)))
            .filter(|&d| d != (0, 0))
            .filter(|&(dr, dc)| !f.is_walkable((r0 as isize + dr) as usize, (c0 as isize + dc) as usize))
            .count();
        assert_eq!(blocked, 8);
    }

    #[test]
    fn unknown_template_is_config_error() {
        assert!(matches!(synth_field(&SynthSpec::new("volcano", 5, 5)), Err(Error::Config(_))));
    }

    #[test]
    fn synthetic_fields_are_deterministic() {
        let spec = SynthSpec::new("grid-of-roads", 30, 40);
        assert_eq!(synth_field(&spec).unwrap(), synth_field(&spec).unwrap());
    }
}
