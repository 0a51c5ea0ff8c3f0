//! Cargo packing: GA feasibility of a package plan in a drone bay, the
//! drone/plan enumeration table, and container filling.

mod container;
mod ga;
mod geometry;
mod plans;

pub use container::{configure_container, supporting_days, ContainerConfig, ISO_20FT_INTERIOR_IN};
pub use ga::{pack_feasible, GaConfig, PackingResult};
pub use geometry::{oriented, validate_placements, BoxItem, Placement, EPS, ORIENTATIONS};
pub use plans::{
    default_package_catalog, enumerate_plans, med_units, read_destinations, read_package_catalog, Destination,
    PackagePlan, PackageUnit, PlanRow, PlanTable, DEFAULT_PACKAGES_CSV, MED_KINDS,
};
