//! Base siting: oversampled k-means over destinations and road samples,
//! reachability checks, drone assignment and inter-base transfers.

mod kmeans;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, kmeans_restarts, partition_objective, KMeansOptions, KMeansResult, PointTag, WeightedPoint};

use crate::error::{Error, Result};
use crate::field::haversine_m;
use crate::fleet::{DroneSpec, RangeModel};
use crate::packing::{Destination, PlanTable};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SitingConfig {
    /// Multiplicative step of the destination weight schedule.
    pub weight_step: f64,
    /// Give up once the weight exceeds `cap_factor` times its initial value.
    pub cap_factor: f64,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub tol_deg: f64,
    pub k_max: usize,
}

impl Default for SitingConfig {
    fn default() -> Self {
        SitingConfig { weight_step: 1.25, cap_factor: 1e6, restarts: 10, seed: 0, max_iter: 100, tol_deg: 1e-6, k_max: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasePlan {
    pub k: usize,
    /// (lat, lon) per base.
    pub centroids: Vec<(f64, f64)>,
    /// Destination name -> base index.
    pub partition: BTreeMap<String, usize>,
    /// Destination names per base, input order.
    pub clusters: Vec<Vec<String>>,
    /// Drone whose reach covers every destination of the base.
    pub reach_drone: Vec<Option<String>>,
    /// Destination weight at which the plan became feasible (road samples weigh 1).
    pub oversample_weight: f64,
    pub initial_weight: f64,
    pub road_samples: usize,
    /// Smaller k values that were tried and found infeasible.
    pub rejected_k: Vec<usize>,
}

/// Per-destination rank of `drone`, if it can serve the destination.
fn rank(table: &PlanTable, dest: &str, drone: &str) -> Option<usize> {
    table.row(dest, drone).map(|r| r.rank)
}

/// Drones able to serve every destination in `members`, ordered by Borda
/// score (sum of per-destination ranks), then by model name.
fn common_drones_by_borda(table: &PlanTable, members: &[&Destination]) -> Vec<(String, usize)> {
    let Some(first) = members.first() else { return Vec::new() };
    let mut out: Vec<(String, usize)> = table
        .rows_for(&first.name)
        .filter_map(|row| {
            let score: Option<usize> = members.iter().map(|m| rank(table, &m.name, &row.drone)).sum();
            score.map(|s| (row.drone.clone(), s))
        })
        .collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn within_reach(table: &PlanTable, members: &[&Destination], centroid: (f64, f64), drone: &str) -> bool {
    members.iter().all(|m| {
        table
            .row(&m.name, drone)
            .is_some_and(|row| haversine_m(centroid.0, centroid.1, m.lat, m.lon) <= row.distance_km * 1000.0)
    })
}

/// The best-ranked common drone that reaches every member from `centroid`.
fn reaching_drone(table: &PlanTable, members: &[&Destination], centroid: (f64, f64)) -> Option<String> {
    common_drones_by_borda(table, members).into_iter().map(|(d, _)| d).find(|d| within_reach(table, members, centroid, d))
}

fn members_of<'a>(dests: &'a [Destination], labels: &[usize], cluster: usize) -> Vec<&'a Destination> {
    dests.iter().zip(labels).filter(|(_, &l)| l == cluster).map(|(d, _)| d).collect()
}

/// Raises the destination weight geometrically (starting where destinations
/// and road samples carry equal total weight) until every base has a drone
/// that reaches all of its destinations.
pub fn oversample_until_feasible(
    dests: &[Destination],
    road_points: &[(f64, f64)],
    table: &PlanTable,
    k: usize,
    cfg: &SitingConfig,
) -> Result<BasePlan> {
    if dests.is_empty() {
        return Err(Error::Input("no destinations to site bases for".into()));
    }
    if let Some(d) = dests.iter().find(|d| table.best(&d.name).is_none()) {
        return Err(Error::Infeasible(format!("destination `{}` has no feasible drone plan", d.name)));
    }
    if !(cfg.weight_step > 1.0) {
        return Err(Error::Config(format!("weight step must exceed 1, got {}", cfg.weight_step)));
    }
    let opts = KMeansOptions { max_iter: cfg.max_iter, tol: cfg.tol_deg };
    let initial = if road_points.is_empty() { 1.0 } else { road_points.len() as f64 / dests.len() as f64 };
    let mut weight = initial;
    while weight <= initial * cfg.cap_factor {
        let points: Vec<WeightedPoint<f64>> = dests
            .iter()
            .map(|d| WeightedPoint::new(d.lat, d.lon, weight, PointTag::Destination))
            .chain(road_points.iter().map(|&(lat, lon)| WeightedPoint::new(lat, lon, 1.0, PointTag::RoadSample)))
            .collect();
        let run = match kmeans_restarts(&points, k, cfg.seed, cfg.restarts, &opts) {
            Ok(run) => run,
            Err(Error::Input(msg)) => return Err(Error::Infeasible(format!("k = {k}: {msg}"))),
            Err(e) => return Err(e),
        };
        let labels = &run.labels[..dests.len()];
        let reach: Vec<Option<String>> = (0..k)
            .map(|j| {
                let members = members_of(dests, labels, j);
                if members.is_empty() {
                    None
                } else {
                    reaching_drone(table, &members, run.centroids[j])
                }
            })
            .collect();
        let feasible = (0..k).all(|j| members_of(dests, labels, j).is_empty() || reach[j].is_some());
        if feasible {
            let clusters = (0..k).map(|j| members_of(dests, labels, j).iter().map(|d| d.name.clone()).collect()).collect();
            return Ok(BasePlan {
                k,
                centroids: run.centroids,
                partition: dests.iter().zip(labels).map(|(d, &l)| (d.name.clone(), l)).collect(),
                clusters,
                reach_drone: reach,
                oversample_weight: weight,
                initial_weight: initial,
                road_samples: road_points.len(),
                rejected_k: Vec::new(),
            });
        }
        weight *= cfg.weight_step;
    }
    Err(Error::Infeasible(format!("no base layout with k = {k} puts every destination within drone reach")))
}

/// Tries k = 1..=k_max and returns the first feasible layout.
pub fn select_k(dests: &[Destination], road_points: &[(f64, f64)], table: &PlanTable, cfg: &SitingConfig) -> Result<BasePlan> {
    let mut rejected = Vec::new();
    for k in 1..=cfg.k_max {
        match oversample_until_feasible(dests, road_points, table, k, cfg) {
            Ok(mut plan) => {
                plan.rejected_k = rejected;
                return Ok(plan);
            }
            Err(Error::Infeasible(_)) => rejected.push(k),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Infeasible(format!("no feasible base layout for k <= {}", cfg.k_max)))
}

/// Straight-line transfer between two bases is possible with `load_lb` aboard.
pub fn transfer_feasible(
    base_a: (f64, f64),
    base_b: (f64, f64),
    spec: &DroneSpec<f64>,
    range: &RangeModel<f64>,
    load_lb: f64,
) -> Result<bool> {
    let reach_m = range.max_reach_km(spec, load_lb)? * 1000.0;
    Ok(haversine_m(base_a.0, base_a.1, base_b.0, base_b.1) <= reach_m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssignConfig {
    /// Spare factor applied to delivery and reconnaissance drones.
    pub redundancy: u32,
    /// Reconnaissance drone; defaults to the video drone with the longest unloaded range.
    pub recon_model: Option<String>,
    pub comm_model: Option<String>,
    pub comm_count: u32,
}

impl Default for AssignConfig {
    fn default() -> Self {
        AssignConfig { redundancy: 2, recon_model: None, comm_model: Some("H".into()), comm_count: 2 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BaseDrones {
    pub base: usize,
    pub delivery: Vec<String>,
    pub recon: Option<String>,
    pub counts: BTreeMap<String, u32>,
    pub warning: Option<String>,
}

/// Picks each base's delivery drone by Borda count over the per-destination
/// rankings (restricted to drones that reach every destination from the
/// base when any do), then adds spares, a reconnaissance drone and relays.
pub fn assign_drones(
    plan: &BasePlan,
    dests: &[Destination],
    table: &PlanTable,
    catalog: &[DroneSpec<f64>],
    cfg: &AssignConfig,
) -> Vec<BaseDrones> {
    let recon = cfg.recon_model.clone().or_else(|| {
        catalog
            .iter()
            .filter(|d| d.video && d.is_cargo())
            .max_by(|a, b| a.mfd_m().total_cmp(&b.mfd_m()).then_with(|| b.model.cmp(&a.model)))
            .map(|d| d.model.clone())
    });
    let comm = cfg.comm_model.clone().filter(|m| catalog.iter().any(|d| &d.model == m));

    (0..plan.k)
        .map(|base| {
            let members: Vec<&Destination> = plan.clusters[base]
                .iter()
                .filter_map(|name| dests.iter().find(|d| &d.name == name))
                .collect();
            let mut out = BaseDrones { base, ..Default::default() };
            if members.is_empty() {
                return out;
            }
            let ranked = common_drones_by_borda(table, &members);
            let centroid = plan.centroids[base];
            if let Some((drone, _)) = ranked.iter().find(|(d, _)| within_reach(table, &members, centroid, d)).or(ranked.first()) {
                out.delivery.push(drone.clone());
            } else {
                let singles: BTreeSet<String> =
                    members.iter().filter_map(|m| table.best(&m.name)).map(|r| r.drone.clone()).collect();
                out.delivery.extend(singles);
                out.warning = Some(format!("base {base} has no drone common to all of its destinations"));
            }
            for d in &out.delivery {
                *out.counts.entry(d.clone()).or_insert(0) += cfg.redundancy;
            }
            if let Some(r) = &recon {
                if !out.delivery.contains(r) {
                    *out.counts.entry(r.clone()).or_insert(0) += cfg.redundancy;
                }
                out.recon = Some(r.clone());
            }
            if let Some(c) = &comm {
                *out.counts.entry(c.clone()).or_insert(0) += cfg.comm_count;
            }
            out
        })
        .collect()
}
