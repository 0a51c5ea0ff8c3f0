//! Biased random walk that proposes reconnaissance routes.
//!
//! A walker stands on a cell, proposes a uniformly chosen feasible neighbor
//! and accepts it with probability `f = p_road + gamma * p_home`, where both
//! terms are softmaxes over the neighbor set. Accepted moves decay the
//! importance around the new cell in a private overlay so the walker keeps
//! looking for fresh road.

mod bonus;
mod stencil;

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bonus::{experience_bonus, ExperienceBonus};
pub use stencil::{KnnRule, MOORE};

use crate::coverage::road_coverage;
use crate::error::{Error, Result};
use crate::field::{haversine_m, Field};
use crate::scalar::{softmax, Real};
use crate::seeding::{derive_seed, rng_from_seed};

pub type Cell = (usize, usize);

/// How proposals are accepted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Acceptance {
    /// The road/home objective.
    #[default]
    Objective,
    /// Importance-blind baseline: every proposal is accepted with
    /// probability `1/n` over `n` feasible neighbors.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkParams {
    pub alpha: f64,
    pub beta: f64,
    /// Path-length budget in meters.
    pub mfd_m: f64,
    pub knn_rule: KnnRule,
    /// Multiplier applied around every accepted cell.
    pub decay: f64,
    /// Proposal cap; `None` means `10 * mfd_m / cell_size`.
    pub max_proposals: Option<usize>,
    pub max_climb_m: Option<f64>,
    pub acceptance: Acceptance,
    pub seed: u64,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            alpha: 0.2,
            beta: 0.3,
            mfd_m: 52_666.666_666_666_67,
            knn_rule: KnnRule::Eight,
            decay: 0.5,
            max_proposals: None,
            max_climb_m: None,
            acceptance: Acceptance::Objective,
            seed: 0,
        }
    }
}

impl WalkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mfd_m > 0.0) || !self.mfd_m.is_finite() {
            return Err(Error::Config(format!("mfd_m must be positive, got {}", self.mfd_m)));
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return Err(Error::Config(format!("decay must lie in (0, 1], got {}", self.decay)));
        }
        if !self.alpha.is_finite() || !self.beta.is_finite() {
            return Err(Error::Config("alpha and beta must be finite".into()));
        }
        if self.max_climb_m.is_some_and(|c| !(c >= 0.0)) {
            return Err(Error::Config("max_climb_m must be non-negative".into()));
        }
        Ok(())
    }

    pub fn proposal_cap(&self, cell_size_m: f64) -> usize {
        self.max_proposals.unwrap_or_else(|| (10.0 * self.mfd_m / cell_size_m).ceil() as usize)
    }
}

/// Home attraction weight at path length `d_m`: `alpha * (d/mfd - beta)^3`.
pub fn gamma<T: Real>(d_m: T, mfd_m: T, alpha: T, beta: T) -> T {
    let x = d_m / mfd_m - beta;
    alpha * x * x * x
}

/// Per-walk multiplicative importance decay; cells absent from the map keep
/// their full importance.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overlay {
    factors: HashMap<usize, f64>,
}

impl Overlay {
    pub fn factor(&self, index: usize) -> f64 {
        self.factors.get(&index).copied().unwrap_or(1.0)
    }

    pub fn decay(&mut self, index: usize, by: f64) {
        *self.factors.entry(index).or_insert(1.0) *= by;
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Entries sorted by cell index.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        let mut v: Vec<_> = self.factors.iter().map(|(&k, &f)| (k, f)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }
}

/// Current importance of a cell: base importance plus any experience bonus,
/// scaled by the overlay.
fn effective_importance(field: &Field, overlay: &Overlay, bonus: Option<&ExperienceBonus>, cell: Cell) -> f64 {
    let idx = field.meta().index(cell.0, cell.1);
    let base = field.importance_at(idx) + bonus.map_or(0.0, |b| b.get(idx));
    base * overlay.factor(idx)
}

/// 8-connected neighbors that are in the grid, walkable and within the
/// climb limit.
pub fn feasible_neighbors(field: &Field, cell: Cell, max_climb_m: Option<f64>) -> Vec<Cell> {
    let here = field.altitude(cell.0, cell.1);
    MOORE
        .iter()
        .filter_map(|&(dr, dc)| {
            let (r, c) = (cell.0 as isize + dr, cell.1 as isize + dc);
            if !field.in_bounds(r, c) {
                return None;
            }
            let (r, c) = (r as usize, c as usize);
            if !field.is_walkable(r, c) {
                return None;
            }
            if let Some(limit) = max_climb_m {
                if (field.altitude(r, c) - here).abs() > limit {
                    return None;
                }
            }
            Some((r, c))
        })
        .collect()
}

/// Sum of current importance over the stencil around `cell`.
pub fn sense_road(field: &Field, overlay: &Overlay, cell: Cell, rule: KnnRule) -> f64 {
    sense_road_with(field, overlay, None, cell, rule)
}

fn sense_road_with(field: &Field, overlay: &Overlay, bonus: Option<&ExperienceBonus>, cell: Cell, rule: KnnRule) -> f64 {
    rule.cells(field.n_rows(), field.n_cols(), cell.0, cell.1)
        .map(|c| effective_importance(field, overlay, bonus, c))
        .sum()
}

/// Step length between adjacent cells.
fn step_length(field: &Field, a: Cell, b: Cell) -> f64 {
    if a.0 != b.0 && a.1 != b.1 {
        field.cell_size_m() * std::f64::consts::SQRT_2
    } else {
        field.cell_size_m()
    }
}

/// Objective terms for every neighbor of the current cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub neighbors: Vec<Cell>,
    pub p_road: Vec<f64>,
    pub p_home: Vec<f64>,
    pub gamma: f64,
    /// Acceptance probability per neighbor, clamped to [0, 1].
    pub f: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn evaluate(
    field: &Field,
    overlay: &Overlay,
    bonus: Option<&ExperienceBonus>,
    neighbors: Vec<Cell>,
    origin_ll: (f64, f64),
    d_m: f64,
    params: &WalkParams,
) -> Evaluation {
    let road: Vec<f64> = neighbors.iter().map(|&c| sense_road_with(field, overlay, bonus, c, params.knn_rule)).collect();
    let cs = field.cell_size_m();
    let home: Vec<f64> = neighbors
        .iter()
        .map(|&(r, c)| {
            let (lat, lon) = field.cell_to_latlon(r, c);
            -haversine_m(lat, lon, origin_ll.0, origin_ll.1) / cs
        })
        .collect();
    let p_road = softmax(&road);
    let p_home = softmax(&home);
    let g = gamma(d_m, params.mfd_m, params.alpha, params.beta);
    let f = match params.acceptance {
        Acceptance::Objective => p_road.iter().zip(&p_home).map(|(&pr, &ph)| (pr + g * ph).clamp(0.0, 1.0)).collect(),
        Acceptance::Uniform => vec![1.0 / neighbors.len() as f64; neighbors.len()],
    };
    Evaluation { neighbors, p_road, p_home, gamma: g, f }
}

/// Acceptance probability of `proposed` among `neighbors`.
pub fn objective(
    field: &Field,
    overlay: &Overlay,
    neighbors: &[Cell],
    proposed: Cell,
    origin: Cell,
    d_m: f64,
    params: &WalkParams,
) -> Result<f64> {
    let i = neighbors
        .iter()
        .position(|&c| c == proposed)
        .ok_or_else(|| Error::Input(format!("cell {proposed:?} is not among the neighbors")))?;
    let origin_ll = field.cell_to_latlon(origin.0, origin.1);
    Ok(evaluate(field, overlay, None, neighbors.to_vec(), origin_ll, d_m, params).f[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// No feasible neighbor.
    Trapped,
    /// Out of path budget or proposals.
    Exhausted,
    /// Back at the origin.
    Home,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Trapped => "trapped",
            Scenario::Exhausted => "exhausted",
            Scenario::Home => "home",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapped" => Ok(Scenario::Trapped),
            "exhausted" => Ok(Scenario::Exhausted),
            "home" => Ok(Scenario::Home),
            other => Err(Error::Input(format!("unknown scenario `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteResult {
    /// Visited cells including the origin, with repeats.
    pub cells: Vec<Cell>,
    pub distance_m: f64,
    pub scenario: Scenario,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    /// Original importance summed over distinct route cells.
    pub coverage: f64,
    pub proposals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Rejected(Cell),
    Accepted(Cell),
    Finished(Scenario),
}

/// Comparable copy of everything a step may change.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub position: Cell,
    pub distance_m: f64,
    pub path_len: usize,
    pub overlay: Vec<(usize, f64)>,
}

/// Step-by-step walk. Objective terms are cached until the next accepted
/// move, since rejections leave the state untouched.
pub struct Walker<'a> {
    field: &'a Field,
    params: &'a WalkParams,
    bonus: Option<&'a ExperienceBonus>,
    origin: Cell,
    origin_ll: (f64, f64),
    cells: Vec<Cell>,
    distance_m: f64,
    overlay: Overlay,
    rng: ChaCha8Rng,
    proposals: usize,
    cap: usize,
    cache: Option<Evaluation>,
    finished: Option<Scenario>,
}

impl<'a> Walker<'a> {
    pub fn new(field: &'a Field, origin: Cell, params: &'a WalkParams) -> Result<Self> {
        Self::with_bonus(field, origin, params, None)
    }

    pub fn with_bonus(
        field: &'a Field,
        origin: Cell,
        params: &'a WalkParams,
        bonus: Option<&'a ExperienceBonus>,
    ) -> Result<Self> {
        params.validate()?;
        if !field.in_bounds(origin.0 as isize, origin.1 as isize) {
            return Err(Error::Input(format!("origin {origin:?} is outside the grid")));
        }
        if !field.is_walkable(origin.0, origin.1) {
            return Err(Error::Input(format!("origin {origin:?} is not walkable")));
        }
        Ok(Walker {
            field,
            params,
            bonus,
            origin,
            origin_ll: field.cell_to_latlon(origin.0, origin.1),
            cells: vec![origin],
            distance_m: 0.0,
            overlay: Overlay::default(),
            rng: rng_from_seed(params.seed),
            proposals: 0,
            cap: params.proposal_cap(field.cell_size_m()),
            cache: None,
            finished: None,
        })
    }

    pub fn position(&self) -> Cell {
        *self.cells.last().expect("path starts at the origin")
    }

    pub fn distance_m(&self) -> f64 {
        self.distance_m
    }

    pub fn overlay(&self) -> &Overlay {
        &self.overlay
    }

    pub fn finished(&self) -> Option<Scenario> {
        self.finished
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            position: self.position(),
            distance_m: self.distance_m,
            path_len: self.cells.len(),
            overlay: self.overlay.entries(),
        }
    }

    /// Objective terms at the current cell (empty when trapped).
    pub fn evaluation(&mut self) -> &Evaluation {
        if self.cache.is_none() {
            let pos = self.position();
            let nbrs = feasible_neighbors(self.field, pos, self.params.max_climb_m);
            self.cache = Some(if nbrs.is_empty() {
                Evaluation { neighbors: nbrs, p_road: vec![], p_home: vec![], gamma: 0.0, f: vec![] }
            } else {
                evaluate(self.field, &self.overlay, self.bonus, nbrs, self.origin_ll, self.distance_m, self.params)
            });
        }
        self.cache.as_ref().expect("just filled")
    }

    fn finish(&mut self, s: Scenario) -> StepOutcome {
        self.finished = Some(s);
        StepOutcome::Finished(s)
    }

    pub fn step(&mut self) -> StepOutcome {
        if let Some(s) = self.finished {
            return StepOutcome::Finished(s);
        }
        let n = self.evaluation().neighbors.len();
        if n == 0 {
            return self.finish(Scenario::Trapped);
        }
        if self.proposals >= self.cap {
            return self.finish(Scenario::Exhausted);
        }
        self.proposals += 1;
        let i = self.rng.random_range(0..n);
        let u: f64 = self.rng.random();
        let eval = self.cache.as_ref().expect("evaluated above");
        let proposed = eval.neighbors[i];
        if u >= eval.f[i] {
            return StepOutcome::Rejected(proposed);
        }
        let step = step_length(self.field, self.position(), proposed);
        if self.distance_m + step > self.params.mfd_m {
            return self.finish(Scenario::Exhausted);
        }
        self.distance_m += step;
        self.cells.push(proposed);
        self.cache = None;
        for c in KnnRule::Eight.cells(self.field.n_rows(), self.field.n_cols(), proposed.0, proposed.1) {
            self.overlay.decay(self.field.meta().index(c.0, c.1), self.params.decay);
        }
        if proposed == self.origin {
            return self.finish(Scenario::Home);
        }
        StepOutcome::Accepted(proposed)
    }

    /// Runs to termination.
    pub fn run(mut self) -> RouteResult {
        let scenario = loop {
            if let StepOutcome::Finished(s) = self.step() {
                break s;
            }
        };
        RouteResult {
            coverage: road_coverage(&self.cells, self.field),
            cells: self.cells,
            distance_m: self.distance_m,
            scenario,
            alpha: self.params.alpha,
            beta: self.params.beta,
            seed: self.params.seed,
            proposals: self.proposals,
        }
    }
}

/// One complete walk; deterministic given the seed in `params`.
pub fn walk(field: &Field, origin: Cell, params: &WalkParams) -> Result<RouteResult> {
    Ok(Walker::new(field, origin, params)?.run())
}

pub fn walk_with_bonus(field: &Field, origin: Cell, params: &WalkParams, bonus: &ExperienceBonus) -> Result<RouteResult> {
    Ok(Walker::with_bonus(field, origin, params, Some(bonus))?.run())
}

/// Walk `i` of a batch uses `derive_seed(master_seed, i)`.
pub fn batch_params(base: &WalkParams, master_seed: u64, n: usize) -> Vec<WalkParams> {
    (0..n).map(|i| WalkParams { seed: derive_seed(master_seed, i as u64), ..base.clone() }).collect()
}

/// Runs every parameter set in parallel; results keep the input order.
pub fn run_batch(
    field: &Field,
    origin: Cell,
    params: &[WalkParams],
    bonus: Option<&ExperienceBonus>,
) -> Result<Vec<RouteResult>> {
    params.par_iter().map(|p| Ok(Walker::with_bonus(field, origin, p, bonus)?.run())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{synth_field, GridMeta, Layer, RoadClass, SynthSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn flat(n: usize) -> Field {
        synth_field(&SynthSpec { template: "flat".into(), n_rows: n, n_cols: n, ..Default::default() }).unwrap()
    }

    fn with_roads(n: usize, roads: &[(Cell, RoadClass)]) -> Field {
        let meta = GridMeta::new(n, n, 100.0, 18.0, -66.0).unwrap();
        let mut classes = vec![RoadClass::None; meta.len()];
        for &((r, c), class) in roads {
            classes[meta.index(r, c)] = class;
        }
        Field::new(meta, Layer::filled(n, n, 0.0), classes).unwrap()
    }

    #[test]
    fn neighbor_counts() {
        let f = flat(5);
        assert_eq!(feasible_neighbors(&f, (2, 2), None).len(), 8);
        assert_eq!(feasible_neighbors(&f, (0, 0), None).len(), 3);
        assert_eq!(feasible_neighbors(&f, (0, 2), None).len(), 5);
    }

    #[test]
    fn moat_traps_origin() {
        let spec = SynthSpec { template: "moat".into(), n_rows: 11, n_cols: 11, ..Default::default() };
        let f = synth_field(&spec).unwrap();
        assert!(feasible_neighbors(&f, spec.origin(), None).is_empty());
        let r = walk(&f, spec.origin(), &WalkParams::default()).unwrap();
        assert_eq!(r.scenario, Scenario::Trapped);
        assert_eq!(r.cells, vec![spec.origin()]);
        assert_eq!(r.proposals, 0);
    }

    #[test]
    fn climb_limit_filters_neighbors() {
        let meta = GridMeta::new(3, 3, 100.0, 18.0, -66.0).unwrap();
        let mut alt = Layer::filled(3, 3, 0.0);
        alt.set(0, 0, 50.0);
        alt.set(2, 2, 5.0);
        let f = Field::new(meta, alt, vec![RoadClass::None; 9]).unwrap();
        assert_eq!(feasible_neighbors(&f, (1, 1), Some(10.0)).len(), 7);
        assert_eq!(feasible_neighbors(&f, (1, 1), Some(1.0)).len(), 6);
    }

    #[test]
    fn sense_road_stencils() {
        let f = flat(7);
        for rule in KnnRule::ALL {
            assert_eq!(sense_road(&f, &Overlay::default(), (3, 3), rule), 0.0);
        }
        let adjacent = with_roads(7, &[((3, 4), RoadClass::Motorway)]);
        for rule in KnnRule::ALL {
            assert_eq!(sense_road(&adjacent, &Overlay::default(), (3, 3), rule), 2.0);
        }
        let two_away = with_roads(7, &[((3, 5), RoadClass::Motorway)]);
        assert_eq!(sense_road(&two_away, &Overlay::default(), (3, 3), KnnRule::Four), 0.0);
        assert_eq!(sense_road(&two_away, &Overlay::default(), (3, 3), KnnRule::Eight), 0.0);
        assert_eq!(sense_road(&two_away, &Overlay::default(), (3, 3), KnnRule::Twelve), 2.0);
        let diagonal = with_roads(7, &[((2, 2), RoadClass::Regional)]);
        assert_eq!(sense_road(&diagonal, &Overlay::default(), (3, 3), KnnRule::Four), 0.0);
        assert_eq!(sense_road(&diagonal, &Overlay::default(), (3, 3), KnnRule::Eight), 1.0);
    }

    #[test]
    fn overlay_scales_sensing() {
        let f = with_roads(5, &[((2, 3), RoadClass::Motorway)]);
        let mut o = Overlay::default();
        o.decay(f.meta().index(2, 3), 0.5);
        assert_eq!(sense_road(&f, &o, (2, 2), KnnRule::Four), 1.0);
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(0.3 * 1000.0, 1000.0, 0.2, 0.3), 0.0);
        assert_relative_eq!(gamma(0.0, 53_000.0, 0.2, 0.3), -0.0054, epsilon = 1e-15);
        assert_relative_eq!(gamma(53_000.0, 53_000.0, 0.2, 0.3), 0.0686, epsilon = 1e-15);
        assert_relative_eq!(gamma(0.0f32, 1.0, 0.2, 0.3), -0.0054, epsilon = 1e-7);
    }

    #[test]
    fn objective_uniform_when_flat_and_gamma_zero() {
        let f = flat(5);
        let p = WalkParams { mfd_m: 1000.0, beta: 0.0, alpha: 0.2, ..Default::default() };
        let n = feasible_neighbors(&f, (2, 2), None);
        for &c in &n {
            let v = objective(&f, &Overlay::default(), &n, c, (2, 2), 0.0, &p).unwrap();
            assert_relative_eq!(v, 1.0 / 8.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn objective_two_neighbors_scalar_softmax() {
        // Column field of width 1: cell (1,0) has neighbors (0,0) and (2,0).
        let meta = GridMeta::new(3, 1, 100.0, 18.0, -66.0).unwrap();
        let mut classes = vec![RoadClass::None; 3];
        classes[0] = RoadClass::Motorway;
        let f = Field::new(meta, Layer::filled(3, 1, 0.0), classes).unwrap();
        let n = feasible_neighbors(&f, (1, 0), None);
        assert_eq!(n, vec![(0, 0), (2, 0)]);
        let p = WalkParams { alpha: 0.0, knn_rule: KnnRule::Four, ..Default::default() };
        // Stencils: (0,0) sees itself (2) and (1,0) (0); (2,0) sees (1,0) and itself, both 0.
        let v = objective(&f, &Overlay::default(), &n, (0, 0), (1, 0), 0.0, &p).unwrap();
        let e2 = 2f64.exp();
        assert_relative_eq!(v, e2 / (e2 + 1.0), epsilon = 1e-12);
        assert!(objective(&f, &Overlay::default(), &n, (1, 0), (1, 0), 0.0, &p).is_err());
    }

    #[test]
    fn tiny_budget_exhausts() {
        let f = flat(9);
        let p = WalkParams { mfd_m: 150.0, seed: 3, ..Default::default() };
        let r = walk(&f, (4, 4), &p).unwrap();
        assert_eq!(r.scenario, Scenario::Exhausted);
        assert!(r.distance_m <= 150.0);
    }

    #[test]
    fn proposal_cap_exhausts() {
        let f = flat(9);
        let p = WalkParams { max_proposals: Some(0), ..Default::default() };
        let r = walk(&f, (4, 4), &p).unwrap();
        assert_eq!(r.scenario, Scenario::Exhausted);
        assert_eq!(r.cells.len(), 1);
    }

    #[test]
    fn invalid_origin_is_an_error() {
        let spec = SynthSpec { template: "moat".into(), n_rows: 11, n_cols: 11, ..Default::default() };
        let f = synth_field(&spec).unwrap();
        let (r, c) = spec.origin();
        assert!(walk(&f, (r, c + 1), &WalkParams::default()).is_err());
        assert!(walk(&f, (99, 0), &WalkParams::default()).is_err());
    }

    #[test]
    fn batch_is_ordered_and_deterministic() {
        let f = flat(21);
        let base = WalkParams { mfd_m: 3000.0, ..Default::default() };
        let ps = batch_params(&base, 42, 16);
        let a = run_batch(&f, (10, 10), &ps, None).unwrap();
        let b = run_batch(&f, (10, 10), &ps, None).unwrap();
        assert_eq!(a, b);
        for (r, p) in a.iter().zip(&ps) {
            assert_eq!(r.seed, p.seed);
            assert_eq!(*r, walk(&f, (10, 10), p).unwrap());
        }
    }

    #[test]
    fn params_json_roundtrip() {
        let p = WalkParams { knn_rule: KnnRule::Twelve, max_climb_m: Some(30.0), ..Default::default() };
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<WalkParams>(&s).unwrap(), p);
        assert!(serde_json::from_str::<WalkParams>(r#"{"knn_rule": 6}"#).is_err());
    }

    proptest! {
        #[test]
        fn gamma_sign(d in 0.0f64..2e5, mfd in 1.0f64..1e5, alpha in 0.001f64..5.0, beta in 0.0f64..2.0) {
            let g = gamma(d, mfd, alpha, beta);
            let x = d / mfd - beta;
            if x < 0.0 { prop_assert!(g <= 0.0) } else { prop_assert!(g >= 0.0) }
            if x.abs() > 1e-6 { prop_assert_eq!(g < 0.0, d < beta * mfd) }
        }

        #[test]
        fn walk_invariants_on_small_field(seed in any::<u64>(), rule in 0usize..3) {
            let f = synth_field(&SynthSpec { template: "loop-road".into(), n_rows: 31, n_cols: 31, margin: 5, ..Default::default() }).unwrap();
            let p = WalkParams { mfd_m: 6000.0, seed, knn_rule: KnnRule::ALL[rule], ..Default::default() };
            let origin = (5, 15);
            let mut w = Walker::new(&f, origin, &p).unwrap();
            let mut prev = w.position();
            let mut prev_overlay = w.overlay().clone();
            loop {
                let before = w.snapshot();
                let e = w.evaluation().clone();
                if !e.neighbors.is_empty() {
                    let s1: f64 = e.p_road.iter().sum();
                    let s2: f64 = e.p_home.iter().sum();
                    prop_assert!((s1 - 1.0).abs() < 1e-9 && (s2 - 1.0).abs() < 1e-9);
                    prop_assert!(e.f.iter().all(|v| (0.0..=1.0).contains(v)));
                }
                match w.step() {
                    StepOutcome::Rejected(_) => prop_assert_eq!(w.snapshot(), before),
                    StepOutcome::Accepted(c) => {
                        prop_assert!(prev.0.abs_diff(c.0) <= 1 && prev.1.abs_diff(c.1) <= 1 && prev != c);
                        for (k, v) in w.overlay().entries() {
                            prop_assert!(v <= prev_overlay.factor(k) && v > 0.0);
                        }
                        prev = c;
                        prev_overlay = w.overlay().clone();
                    }
                    StepOutcome::Finished(_) => break,
                }
            }
            let r = w.run();
            prop_assert!(r.distance_m <= p.mfd_m);
            if r.scenario == Scenario::Home {
                prop_assert_eq!(r.cells.first(), r.cells.last());
            }
        }
    }
}
