//! Geodesy helpers: haversine distance and the local equirectangular frame
//! used to map grid cells to WGS84 coordinates.

use crate::scalar::Real;

/// Mean Earth radius in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Great-circle distance in meters between two (lat, lon) points in degrees.
pub fn haversine_m<T: Real>(lat1: T, lon1: T, lat2: T, lon2: T) -> T {
    let two = T::lit(2.0);
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = p2 - p1;
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / two).sin().powi(2) + p1.cos() * p2.cos() * (dlambda / two).sin().powi(2);
    let c = two * a.sqrt().min(T::one()).asin();
    T::lit(EARTH_RADIUS_M) * c
}

/// Meters spanned by one degree of latitude.
pub fn meters_per_degree_lat() -> f64 {
    EARTH_RADIUS_M * std::f64::consts::PI / 180.0
}

/// Meters spanned by one degree of longitude at `lat` degrees.
pub fn meters_per_degree_lon(lat: f64) -> f64 {
    meters_per_degree_lat() * lat.to_radians().cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_degree_of_latitude() {
        let d = haversine_m(0.0f64, 0.0, 1.0, 0.0);
        assert!((d - meters_per_degree_lat()).abs() < 1e-6);
        assert!((d - 111_195.08).abs() < 0.1);
    }

    #[test]
    fn symmetric_and_zero_on_diagonal() {
        let a = haversine_m(18.47f64, -66.73, 18.33, -65.65);
        let b = haversine_m(18.33f64, -65.65, 18.47, -66.73);
        assert_eq!(a, b);
        assert_eq!(haversine_m(18.0f64, -66.0, 18.0, -66.0), 0.0);
    }

    #[test]
    fn f32_agrees_with_f64() {
        let a = haversine_m(18.47f64, -66.73, 18.33, -65.65);
        let b = haversine_m(18.47f32, -66.73, 18.33, -65.65) as f64;
        assert!((a - b).abs() / a < 1e-4);
    }
}
