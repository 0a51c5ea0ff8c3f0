//! Route coverage scores, combinatorial coverage rate of route pairs and
//! best-pair selection.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::walker::{Cell, KnnRule, RouteResult, Scenario};

/// Sum of the field's importance over the distinct cells of a route.
pub fn road_coverage(cells: &[Cell], field: &Field) -> f64 {
    let distinct: BTreeSet<Cell> = cells.iter().copied().collect();
    distinct.into_iter().map(|(r, c)| field.importance(r, c)).sum()
}

/// Road cells (as grid indices) within the stencil of any route cell.
pub fn covered_cells(cells: &[Cell], field: &Field, rule: KnnRule) -> BTreeSet<usize> {
    cells
        .iter()
        .flat_map(|&(r, c)| rule.cells(field.n_rows(), field.n_cols(), r, c))
        .filter(|&(r, c)| field.is_road(r, c))
        .map(|(r, c)| field.meta().index(r, c))
        .collect()
}

/// What the denominator of the coverage rate counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CcrArea {
    /// Road cells inside the bounding box.
    #[default]
    Road,
    /// Every cell inside the bounding box.
    All,
}

impl std::str::FromStr for CcrArea {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "road" => Ok(CcrArea::Road),
            "all" => Ok(CcrArea::All),
            other => Err(Error::Config(format!("ccr_area must be `road` or `all`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub route_ids: (usize, usize),
    /// Distinct road cells covered by either route.
    pub net_coverage: usize,
    /// Denominator cell count inside the bounding box.
    pub bbox_cells: usize,
    /// `(min_row, min_col, max_row, max_col)`, inclusive.
    pub bbox: (usize, usize, usize, usize),
    /// `None` when the bounding box holds no countable cell.
    pub ccr: Option<f64>,
}

/// Inclusive bounding box of a route grown by `pad` cells and clipped to the grid.
/// Inclusive (row0, col0, row1, col1).
type Bbox = (usize, usize, usize, usize);

fn route_bbox(cells: &[Cell], pad: usize, field: &Field) -> Option<Bbox> {
    let first = cells.first()?;
    let init = (first.0, first.1, first.0, first.1);
    let (r0, c0, r1, c1) = cells.iter().fold(init, |(r0, c0, r1, c1), &(r, c)| (r0.min(r), c0.min(c), r1.max(r), c1.max(c)));
    Some((r0.saturating_sub(pad), c0.saturating_sub(pad), (r1 + pad).min(field.n_rows() - 1), (c1 + pad).min(field.n_cols() - 1)))
}

fn merge_bbox(a: Option<(usize, usize, usize, usize)>, b: Option<(usize, usize, usize, usize)>) -> Option<(usize, usize, usize, usize)> {
    match (a, b) {
        (Some(a), Some(b)) => Some((a.0.min(b.0), a.1.min(b.1), a.2.max(b.2), a.3.max(b.3))),
        (x, None) | (None, x) => x,
    }
}

/// Summed-area table of road cells for O(1) box counts.
struct RoadCounts {
    cols: usize,
    sums: Vec<usize>,
}

impl RoadCounts {
    fn new(field: &Field) -> Self {
        let (rows, cols) = (field.n_rows(), field.n_cols());
        let mut sums = vec![0usize; (rows + 1) * (cols + 1)];
        for r in 0..rows {
            for c in 0..cols {
                let here = usize::from(field.is_road(r, c));
                sums[(r + 1) * (cols + 1) + c + 1] = here + sums[r * (cols + 1) + c + 1] + sums[(r + 1) * (cols + 1) + c] - sums[r * (cols + 1) + c];
            }
        }
        RoadCounts { cols, sums }
    }

    fn count(&self, (r0, c0, r1, c1): (usize, usize, usize, usize)) -> usize {
        let w = self.cols + 1;
        self.sums[(r1 + 1) * w + c1 + 1] + self.sums[r0 * w + c0] - self.sums[r0 * w + c1 + 1] - self.sums[(r1 + 1) * w + c0]
    }
}

fn area(bbox: (usize, usize, usize, usize), mode: CcrArea, roads: &RoadCounts) -> usize {
    match mode {
        CcrArea::Road => roads.count(bbox),
        CcrArea::All => (bbox.2 - bbox.0 + 1) * (bbox.3 - bbox.1 + 1),
    }
}

fn union_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
        n += 1;
    }
    n + (a.len() - i) + (b.len() - j)
}

fn report(
    ids: (usize, usize),
    net: usize,
    bbox: Option<(usize, usize, usize, usize)>,
    mode: CcrArea,
    roads: &RoadCounts,
) -> CoverageReport {
    let (bbox, a) = match bbox {
        Some(b) => (b, area(b, mode, roads)),
        None => ((0, 0, 0, 0), 0),
    };
    CoverageReport { route_ids: ids, net_coverage: net, bbox_cells: a, bbox, ccr: (a > 0).then(|| net as f64 / a as f64) }
}

/// Coverage rate of a route pair: covered road cells of the union over the
/// cells of the bounding box around both routes. The box is grown by the
/// stencil reach so that everything a route can film lies inside it.
pub fn ccr(route_a: &[Cell], route_b: &[Cell], field: &Field, rule: KnnRule, mode: CcrArea) -> CoverageReport {
    let a = covered_cells(route_a, field, rule);
    let b = covered_cells(route_b, field, rule);
    let net = a.union(&b).count();
    let bbox = merge_bbox(route_bbox(route_a, rule.reach(), field), route_bbox(route_b, rule.reach(), field));
    report((0, 1), net, bbox, mode, &RoadCounts::new(field))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairChoice {
    /// Positions in the input slice.
    pub first: usize,
    pub second: usize,
    pub report: CoverageReport,
    pub total_distance_m: f64,
}

/// Exhaustive search over pairs of home routes for the highest coverage
/// rate. Ties go to the shorter combined distance, then to the smaller ids.
pub fn best_pair(routes: &[RouteResult], field: &Field, rule: KnnRule, mode: CcrArea) -> Result<PairChoice> {
    let home: Vec<usize> = (0..routes.len()).filter(|&i| routes[i].scenario == Scenario::Home).collect();
    if home.len() < 2 {
        return Err(Error::Input(format!("need at least 2 home routes to pair, got {}", home.len())));
    }
    let roads = RoadCounts::new(field);
    let prepared: Vec<(Vec<usize>, Option<Bbox>)> = home
        .par_iter()
        .map(|&i| {
            let cov = covered_cells(&routes[i].cells, field, rule).into_iter().collect();
            (cov, route_bbox(&routes[i].cells, rule.reach(), field))
        })
        .collect();

    let key = |c: &PairChoice| (c.report.ccr.unwrap_or(f64::NEG_INFINITY), c.total_distance_m, c.first, c.second);
    let better = |a: PairChoice, b: PairChoice| {
        let (ka, kb) = (key(&a), key(&b));
        let ord = ka.0.total_cmp(&kb.0).reverse().then(ka.1.total_cmp(&kb.1)).then((ka.2, ka.3).cmp(&(kb.2, kb.3)));
        if ord.is_le() {
            a
        } else {
            b
        }
    };
    let best = (0..home.len())
        .into_par_iter()
        .flat_map_iter(|x| ((x + 1)..home.len()).map(move |y| (x, y)))
        .map(|(x, y)| {
            let (i, j) = (home[x], home[y]);
            let net = union_len(&prepared[x].0, &prepared[y].0);
            let bbox = merge_bbox(prepared[x].1, prepared[y].1);
            PairChoice {
                first: i,
                second: j,
                report: report((i, j), net, bbox, mode, &roads),
                total_distance_m: routes[i].distance_m + routes[j].distance_m,
            }
        })
        .reduce_with(better)
        .expect("at least one pair");
    Ok(best)
}
