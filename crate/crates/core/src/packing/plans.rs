//! Daily package plans and the (destination, drone) feasibility table.

use std::io::Read;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ga::{pack_feasible, GaConfig};
use super::geometry::{BoxItem, Placement};
use crate::error::{Error, Result};
use crate::fleet::{DroneSpec, RangeModel};
use crate::seeding::derive_seed;

/// Number of medical package kinds tracked per destination.
pub const MED_KINDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageUnit {
    pub kind: String,
    pub dims: [f64; 3],
    pub weight_lb: f64,
}

impl PackageUnit {
    pub fn volume(&self) -> f64 {
        self.dims.iter().product()
    }

    pub fn as_box(&self) -> BoxItem {
        BoxItem::new(self.kind.clone(), self.dims, self.weight_lb)
    }
}

/// MED1..MED3 unit boxes, inches and pounds.
pub const DEFAULT_PACKAGES_CSV: &str = "\
kind,l,w,h,weight_lb
MED1,14,7,5,2
MED2,5,8,5,2
MED3,12,7,4,3
";

#[derive(Debug, Deserialize)]
struct UnitRow {
    kind: String,
    l: f64,
    w: f64,
    h: f64,
    weight_lb: f64,
}

/// Reads `kind,l,w,h,weight_lb`.
pub fn read_package_catalog<R: Read>(reader: R) -> Result<Vec<PackageUnit>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: UnitRow = row?;
        if !(r.l > 0.0 && r.w > 0.0 && r.h > 0.0) || !(r.weight_lb >= 0.0) {
            return Err(Error::Input(format!("package `{}` needs positive dims and non-negative weight", r.kind)));
        }
        out.push(PackageUnit { kind: r.kind, dims: [r.l, r.w, r.h], weight_lb: r.weight_lb });
    }
    Ok(out)
}

pub fn default_package_catalog() -> Vec<PackageUnit> {
    read_package_catalog(DEFAULT_PACKAGES_CSV.as_bytes()).expect("built-in package catalog parses")
}

/// Picks MED1..MED3 out of a package catalog, in that order.
pub fn med_units(catalog: &[PackageUnit]) -> Result<[PackageUnit; MED_KINDS]> {
    let find = |name: &str| {
        catalog
            .iter()
            .find(|u| u.kind.eq_ignore_ascii_case(name))
            .cloned()
            .ok_or_else(|| Error::Input(format!("package catalog has no `{name}`")))
    };
    Ok([find("MED1")?, find("MED2")?, find("MED3")?])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Destination {
    pub name: String,
    pub lat: f64,
    pub lon: f64,
    /// Daily demand of MED1..MED3.
    pub demand: [u32; MED_KINDS],
}

#[derive(Debug, Deserialize)]
struct DestinationRow {
    name: String,
    lat: f64,
    lon: f64,
    med1_per_day: u32,
    med2_per_day: u32,
    med3_per_day: u32,
}

/// Reads `name,lat,lon,med1_per_day,med2_per_day,med3_per_day`.
pub fn read_destinations<R: Read>(reader: R) -> Result<Vec<Destination>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let r: DestinationRow = row?;
        out.push(Destination { name: r.name, lat: r.lat, lon: r.lon, demand: [r.med1_per_day, r.med2_per_day, r.med3_per_day] });
    }
    Ok(out)
}

/// Everything one destination needs for a day, flown in a single trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackagePlan {
    pub destination: String,
    pub counts: [u32; MED_KINDS],
    pub total_weight_lb: f64,
}

impl PackagePlan {
    pub fn for_destination(dest: &Destination, units: &[PackageUnit; MED_KINDS]) -> Result<Self> {
        if dest.demand.iter().all(|&c| c == 0) {
            return Err(Error::Input(format!("destination `{}` has no demand", dest.name)));
        }
        let total_weight_lb = dest.demand.iter().zip(units).map(|(&c, u)| f64::from(c) * u.weight_lb).sum();
        Ok(PackagePlan { destination: dest.name.clone(), counts: dest.demand, total_weight_lb })
    }

    pub fn boxes(&self, units: &[PackageUnit; MED_KINDS]) -> Vec<BoxItem> {
        self.counts
            .iter()
            .zip(units)
            .flat_map(|(&c, u)| std::iter::repeat_n(u.as_box(), c as usize))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub destination: String,
    pub drone: String,
    pub counts: [u32; MED_KINDS],
    pub weight_lb: f64,
    pub distance_km: f64,
    /// 1-based rank within the destination, longest reach first.
    pub rank: usize,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlanTable {
    /// Grouped by destination in input order, ranked within each group.
    pub rows: Vec<PlanRow>,
    /// Destinations no drone can serve.
    pub unservable: Vec<String>,
}

impl PlanTable {
    pub fn rows_for<'a>(&'a self, destination: &'a str) -> impl Iterator<Item = &'a PlanRow> + 'a {
        self.rows.iter().filter(move |r| r.destination == destination)
    }

    pub fn row(&self, destination: &str, drone: &str) -> Option<&PlanRow> {
        self.rows.iter().find(|r| r.destination == destination && r.drone == drone)
    }

    pub fn best(&self, destination: &str) -> Option<&PlanRow> {
        self.rows.iter().find(|r| r.destination == destination && r.rank == 1)
    }
}

/// Enumerates every (destination, cargo drone) pair, keeps those where the
/// daily plan is within the rated payload and packs into the bay, and ranks
/// them per destination by loaded reach.
///
/// Pair `i` runs its GA with seed `derive_seed(ga.seed, i)`, so the table does
/// not depend on thread scheduling.
pub fn enumerate_plans(
    destinations: &[Destination],
    catalog: &[DroneSpec<f64>],
    range: &RangeModel<f64>,
    units: &[PackageUnit; MED_KINDS],
    ga: &GaConfig,
) -> Result<PlanTable> {
    let plans = destinations.iter().map(|d| PackagePlan::for_destination(d, units)).collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> =
        (0..destinations.len()).flat_map(|d| (0..catalog.len()).map(move |c| (d, c))).collect();

    let outcomes = pairs
        .par_iter()
        .enumerate()
        .map(|(pair_index, &(d, c))| -> Result<Option<PlanRow>> {
            let (plan, drone) = (&plans[d], &catalog[c]);
            let Some(bay) = drone.bay else { return Ok(None) };
            if !drone.is_cargo() || plan.total_weight_lb > drone.mpc_lb {
                return Ok(None);
            }
            let cfg = GaConfig { seed: derive_seed(ga.seed, pair_index as u64), ..ga.clone() };
            let packing = pack_feasible(bay, &plan.boxes(units), &cfg)?;
            if !packing.feasible {
                return Ok(None);
            }
            Ok(Some(PlanRow {
                destination: plan.destination.clone(),
                drone: drone.model.clone(),
                counts: plan.counts,
                weight_lb: plan.total_weight_lb,
                distance_km: range.max_reach_km(drone, plan.total_weight_lb)?,
                rank: 0,
                placements: packing.placements,
            }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = PlanTable::default();
    for (d, dest) in destinations.iter().enumerate() {
        let mut rows: Vec<PlanRow> = outcomes[d * catalog.len()..(d + 1) * catalog.len()].iter().flatten().cloned().collect();
        rows.sort_by(|a, b| b.distance_km.total_cmp(&a.distance_km).then_with(|| a.drone.cmp(&b.drone)));
        if rows.is_empty() {
            table.unservable.push(dest.name.clone());
        }
        for (i, r) in rows.iter_mut().enumerate() {
            r.rank = i + 1;
        }
        table.rows.extend(rows);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fleet::default_catalog;

    fn dest(name: &str, demand: [u32; 3]) -> Destination {
        Destination { name: name.into(), lat: 18.4, lon: -66.1, demand }
    }

    #[test]
    fn plan_weight_uses_unit_weights() {
        let units = med_units(&default_package_catalog()).unwrap();
        let p = PackagePlan::for_destination(&dest("x", [2, 1, 2]), &units).unwrap();
        assert_eq!(p.total_weight_lb, 12.0);
        assert_eq!(p.boxes(&units).len(), 5);
        assert!(PackagePlan::for_destination(&dest("y", [0, 0, 0]), &units).is_err());
    }

    #[test]
    fn empty_catalog_leaves_everyone_unservable() {
        let units = med_units(&default_package_catalog()).unwrap();
        let dests = vec![dest("a", [1, 0, 0]), dest("b", [0, 1, 0])];
        let t = enumerate_plans(&dests, &[], &RangeModel::default(), &units, &GaConfig::default()).unwrap();
        assert!(t.rows.is_empty());
        assert_eq!(t.unservable, vec!["a", "b"]);
    }

    #[test]
    fn overweight_plans_are_skipped() {
        let units = med_units(&default_package_catalog()).unwrap();
        // 12 lb exceeds drone B's 8 lb rating.
        let t = enumerate_plans(&[dest("heavy", [2, 1, 2])], &default_catalog(), &RangeModel::default(), &units, &GaConfig::default())
            .unwrap();
        assert!(t.row("heavy", "B").is_none());
        assert_eq!(t.best("heavy").unwrap().drone, "F");
    }
}
