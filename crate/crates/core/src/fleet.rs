//! Drone catalog and the load-dependent flight-time / reach model.
//!
//! Flight time falls linearly with load until the maximum drivable capacity
//! `MDC = k * MPC`, where the drone can no longer fly:
//!
//! ```text
//! t(l) = T * (1 - l / MDC)
//! ```
//!
//! A delivery flies out loaded and returns empty. Spending the whole battery
//! on that trip gives the reachable distance
//!
//! ```text
//! D(l) = (l - MDC) / (l - 2 MDC) * V * T / 30      (V in km/h, T in min)
//! ```
//!
//! which equals `V * T / 60` for an empty drone.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default proportionality between drivable and rated payload.
pub const DEFAULT_RANGE_COEFFICIENT: f64 = 1.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneSpec<T> {
    pub model: String,
    /// Rated (safe) payload capacity, lb.
    pub mpc_lb: T,
    pub speed_kmh: T,
    /// Flight time with no cargo, minutes.
    pub flight_time_min: T,
    /// Cargo bay interior (l, w, h) in inches; `None` for drones that cannot carry cargo.
    pub bay: Option<[T; 3]>,
    pub video: bool,
    /// Shipping crate (l, w, h) in inches, used when filling containers.
    pub crate_dims: Option<[T; 3]>,
}

impl<T: Real> DroneSpec<T> {
    pub fn is_cargo(&self) -> bool {
        self.bay.is_some() && self.mpc_lb > T::zero()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.speed_kmh >= T::zero()) || !(self.flight_time_min > T::zero()) {
            return Err(Error::Config(format!("drone {}: speed must be >= 0 and flight time > 0", self.model)));
        }
        if self.bay.is_some() && !(self.mpc_lb > T::zero()) {
            return Err(Error::Config(format!("drone {}: cargo drones need a positive payload", self.model)));
        }
        Ok(())
    }

    /// Unloaded flight distance budget in meters, `V * T / 60` km.
    pub fn mfd_m(&self) -> T {
        self.speed_kmh * self.flight_time_min / T::lit(60.0) * T::lit(1000.0)
    }
}

/// Linear load/endurance law parameterised by `k = MDC / MPC`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeModel<T> {
    pub k: T,
}

impl<T: Real> Default for RangeModel<T> {
    fn default() -> Self {
        RangeModel { k: T::lit(DEFAULT_RANGE_COEFFICIENT) }
    }
}

impl<T: Real> RangeModel<T> {
    /// `k` must lie in (1, 1.3]: above one so full rated payload still flies.
    pub fn new(k: T) -> Result<Self> {
        if !(k > T::one() && k <= T::lit(DEFAULT_RANGE_COEFFICIENT) + T::epsilon()) {
            return Err(Error::Config(format!("range coefficient k must lie in (1, 1.3], got {k}")));
        }
        Ok(RangeModel { k })
    }

    /// Maximum drivable capacity `k * MPC`.
    pub fn mdc_lb(&self, spec: &DroneSpec<T>) -> T {
        self.k * spec.mpc_lb
    }

    fn check_load(&self, spec: &DroneSpec<T>, load_lb: T) -> Result<T> {
        let mdc = self.mdc_lb(spec);
        if !(load_lb >= T::zero() && load_lb < mdc) {
            return Err(Error::Range {
                model: spec.model.clone(),
                load: load_lb.to_f64_lossy(),
                limit: mdc.to_f64_lossy(),
            });
        }
        Ok(mdc)
    }

    /// Flight time in minutes when carrying `load_lb`.
    pub fn flight_time_under_load(&self, spec: &DroneSpec<T>, load_lb: T) -> Result<T> {
        let mdc = self.check_load(spec, load_lb)?;
        Ok(spec.flight_time_min * (T::one() - load_lb / mdc))
    }

    /// One-way reach in km for a loaded-out, empty-back trip.
    pub fn max_reach_km(&self, spec: &DroneSpec<T>, load_lb: T) -> Result<T> {
        let mdc = self.check_load(spec, load_lb)?;
        let ratio = (load_lb - mdc) / (load_lb - T::lit(2.0) * mdc);
        Ok(ratio * spec.speed_kmh * spec.flight_time_min / T::lit(30.0))
    }
}

/// Alias kept for call sites that think in terms of the reconnaissance budget.
pub fn mfd_m<T: Real>(spec: &DroneSpec<T>) -> T {
    spec.mfd_m()
}

#[derive(Debug, Deserialize)]
struct CatalogRow {
    model: String,
    mpc_lb: f64,
    speed_kmh: f64,
    flight_time_min: f64,
    bay_l: Option<f64>,
    bay_w: Option<f64>,
    bay_h: Option<f64>,
    video: String,
    #[serde(default)]
    crate_l: Option<f64>,
    #[serde(default)]
    crate_w: Option<f64>,
    #[serde(default)]
    crate_h: Option<f64>,
}

fn triple(model: &str, what: &str, v: [Option<f64>; 3]) -> Result<Option<[f64; 3]>> {
    match v {
        [Some(a), Some(b), Some(c)] => {
            if a > 0.0 && b > 0.0 && c > 0.0 {
                Ok(Some([a, b, c]))
            } else {
                Err(Error::Input(format!("drone {model}: {what} dimensions must be positive")))
            }
        }
        [None, None, None] => Ok(None),
        _ => Err(Error::Input(format!("drone {model}: {what} dimensions are partially specified"))),
    }
}

fn parse_flag(s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "y" | "yes" | "true" | "1" => Ok(true),
        "n" | "no" | "false" | "0" | "" => Ok(false),
        other => Err(Error::Input(format!("`{other}` is not a boolean"))),
    }
}

/// Reads a drone catalog:
/// `model,mpc_lb,speed_kmh,flight_time_min,bay_l,bay_w,bay_h,video[,crate_l,crate_w,crate_h]`.
pub fn read_catalog<R: Read>(reader: R) -> Result<Vec<DroneSpec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).comment(Some(b'#')).from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        let row: CatalogRow = row?;
        let spec = DroneSpec {
            bay: triple(&row.model, "bay", [row.bay_l, row.bay_w, row.bay_h])?,
            crate_dims: triple(&row.model, "crate", [row.crate_l, row.crate_w, row.crate_h])?,
            video: parse_flag(&row.video)?,
            model: row.model,
            mpc_lb: row.mpc_lb,
            speed_kmh: row.speed_kmh,
            flight_time_min: row.flight_time_min,
        };
        spec.validate()?;
        out.push(spec);
    }
    Ok(out)
}

/// Catalog text shipped as the default: drones B, C, F (cargo) and H (tethered
/// communications relay). Bay type 1 is 8x10x14 in, bay type 2 is 24x20x20 in.
pub const DEFAULT_CATALOG_CSV: &str = "\
model,mpc_lb,speed_kmh,flight_time_min,bay_l,bay_w,bay_h,video,crate_l,crate_w,crate_h
B,8,79,40,8,10,14,Y,30,30,22
C,14,64,35,24,20,20,Y,60,50,30
F,22,79,24,24,20,20,N,40,40,25
H,0,79,40,,,,Y,65,75,41
";

pub fn default_catalog() -> Vec<DroneSpec<f64>> {
    read_catalog(DEFAULT_CATALOG_CSV.as_bytes()).expect("built-in catalog parses")
}
