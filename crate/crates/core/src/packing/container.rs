//! Filling a shipping container with drones and medical stock.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::geometry::BoxItem;
use super::plans::{PackageUnit, MED_KINDS};
use crate::error::{Error, Result};
use crate::fleet::DroneSpec;

/// Interior of a 20 ft ISO dry container, inches.
pub const ISO_20FT_INTERIOR_IN: [f64; 3] = [232.0, 92.0, 94.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerConfig {
    pub drones: BTreeMap<String, u32>,
    /// Volume left for medical stock after drone crates, in³ (before efficiency).
    pub free_volume_in3: f64,
    pub med_counts: [u64; MED_KINDS],
    /// `floor(min stock / daily demand)` over kinds with non-zero demand.
    pub supporting_days: Option<u64>,
}

/// Stock the rest of the container in the proportion `ratio`.
///
/// Counts are `floor(m * ratio[i])` for the largest integer multiplier `m`
/// whose total package volume fits in `fill_efficiency` of the free volume.
pub fn configure_container(
    container_dims: [f64; 3],
    drones: &[(&DroneSpec<f64>, u32)],
    ratio: [f64; MED_KINDS],
    units: &[PackageUnit; MED_KINDS],
    daily_demand: [f64; MED_KINDS],
    fill_efficiency: f64,
) -> Result<ContainerConfig> {
    if container_dims.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Config(format!("container dimensions must be positive, got {container_dims:?}")));
    }
    if !(fill_efficiency > 0.0 && fill_efficiency <= 1.0) {
        return Err(Error::Config(format!("fill efficiency must lie in (0, 1], got {fill_efficiency}")));
    }
    if ratio.iter().chain(&daily_demand).any(|r| !(*r >= 0.0)) {
        return Err(Error::Config("ratios and demands must be non-negative".into()));
    }

    let mut counts = BTreeMap::new();
    let mut drone_volume = 0.0;
    for (spec, n) in drones {
        let dims = spec
            .crate_dims
            .ok_or_else(|| Error::Config(format!("drone {} has no crate dimensions", spec.model)))?;
        let crate_box = BoxItem::new(spec.model.clone(), dims, 0.0);
        if *n > 0 && !crate_box.fits_somehow(container_dims) {
            return Err(Error::Config(format!("drone {} crate does not fit the container", spec.model)));
        }
        drone_volume += crate_box.volume() * f64::from(*n);
        *counts.entry(spec.model.clone()).or_insert(0) += n;
    }
    let container_volume: f64 = container_dims.iter().product();
    if drone_volume > container_volume {
        return Err(Error::Config(format!(
            "drone crates need {drone_volume} in³ but the container holds {container_volume} in³"
        )));
    }
    let free = container_volume - drone_volume;
    let capacity = free * fill_efficiency;

    let volume_at = |m: u64| -> f64 { (0..MED_KINDS).map(|i| (m as f64 * ratio[i]).floor() * units[i].volume()).sum() };
    let per_unit_min = (0..MED_KINDS)
        .filter(|&i| ratio[i] > 0.0)
        .map(|i| ratio[i] * units[i].volume())
        .fold(f64::INFINITY, f64::min);
    let med_counts = if per_unit_min.is_finite() {
        // Largest m with volume_at(m) <= capacity; volume_at is non-decreasing.
        let (mut lo, mut hi) = (0u64, (capacity / per_unit_min).ceil() as u64 + 2);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if volume_at(mid) <= capacity {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        std::array::from_fn(|i| (lo as f64 * ratio[i]).floor() as u64)
    } else {
        [0; MED_KINDS]
    };

    Ok(ContainerConfig { drones: counts, free_volume_in3: free, med_counts, supporting_days: supporting_days(med_counts, daily_demand) })
}

pub fn supporting_days(stock: [u64; MED_KINDS], daily_demand: [f64; MED_KINDS]) -> Option<u64> {
    (0..MED_KINDS)
        .filter(|&i| daily_demand[i] > 0.0)
        .map(|i| (stock[i] as f64 / daily_demand[i]).floor() as u64)
        .min()
}
