//! Spherical great-circle geodesy.

use crate::error::{Error, Result};
use crate::model::{BearingDeg, GeoPoint};

/// Mean Earth radius (IUGG), meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Separations below this are treated as coincident points.
const COINCIDENT_M: f64 = 1e-6;

/// Great-circle distance in meters.
pub fn haversine_distance(a: &GeoPoint, b: &GeoPoint) -> f64 {
    let (phi1, phi2) = (a.lat_deg().to_radians(), b.lat_deg().to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (b.lon_deg() - a.lon_deg()).to_radians();
    let h = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Forward azimuth from `a` toward `b`.
pub fn initial_bearing(a: &GeoPoint, b: &GeoPoint) -> Result<BearingDeg> {
    if a.same_position(b) || haversine_distance(a, b) < COINCIDENT_M {
        return Err(Error::DegenerateBearing);
    }
    let (phi1, phi2) = (a.lat_deg().to_radians(), b.lat_deg().to_radians());
    let dlambda = (b.lon_deg() - a.lon_deg()).to_radians();
    let y = dlambda.sin() * phi2.cos();
    let x = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    Ok(BearingDeg::new(y.atan2(x).to_degrees()))
}

/// Smallest signed rotation from `from` to `to`, in (-180, 180]. Positive is clockwise.
pub fn signed_bearing_delta(from: BearingDeg, to: BearingDeg) -> f64 {
    let d = (to.value() - from.value()).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Timestamp;
    use proptest::prelude::*;

    fn p(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon, None, Timestamp::EPOCH).unwrap()
    }

    fn b(v: f64) -> BearingDeg {
        BearingDeg::new(v)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            haversine_distance(&p(37.30, -120.48), &p(37.30, -120.48)),
            0.0
        );
        // R * dphi for a meridian step
        let oracle = EARTH_RADIUS_M * 0.001_f64.to_radians();
        let d = haversine_distance(&p(0.0, 0.0), &p(0.001, 0.0));
        assert!((d - oracle).abs() < 1e-6, "{d} vs {oracle}");
        assert!((d - 111.195).abs() < 1e-3);
        let antipode = haversine_distance(&p(0.0, 0.0), &p(0.0, 180.0));
        let half_circ = std::f64::consts::PI * EARTH_RADIUS_M;
        assert!((antipode - half_circ).abs() < 1e-6);
    }

    #[test]
    fn bearing_examples() {
        assert!(
            initial_bearing(&p(0.0, 0.0), &p(1.0, 0.0))
                .unwrap()
                .value()
                .abs()
                < 1e-12
        );
        assert!(
            (initial_bearing(&p(0.0, 0.0), &p(0.0, 1.0)).unwrap().value() - 90.0).abs() < 1e-12
        );
        assert!(
            (initial_bearing(&p(0.0, 0.0), &p(-1.0, 0.0))
                .unwrap()
                .value()
                - 180.0)
                .abs()
                < 1e-12
        );
        assert!(matches!(
            initial_bearing(&p(5.0, 5.0), &p(5.0, 5.0)),
            Err(Error::DegenerateBearing)
        ));
    }

    #[test]
    fn delta_examples() {
        assert!((signed_bearing_delta(b(350.0), b(10.0)) - 20.0).abs() < 1e-9);
        assert!((signed_bearing_delta(b(10.0), b(350.0)) + 20.0).abs() < 1e-9);
        assert_eq!(signed_bearing_delta(b(0.0), b(180.0)), 180.0);
        assert_eq!(signed_bearing_delta(b(180.0), b(0.0)), 180.0);
    }

    fn coord() -> impl Strategy<Value = (f64, f64)> {
        (-89.9f64..89.9, -179.9f64..179.9)
    }

    proptest! {
        #[test]
        fn distance_symmetric((la, lo) in coord(), (lb, lob) in coord()) {
            let (a, c) = (p(la, lo), p(lb, lob));
            prop_assert_eq!(haversine_distance(&a, &c), haversine_distance(&c, &a));
            prop_assert!(haversine_distance(&a, &c) >= 0.0);
        }

        #[test]
        fn triangle_inequality(x in coord(), y in coord(), z in coord()) {
            let (a, m, c) = (p(x.0, x.1), p(y.0, y.1), p(z.0, z.1));
            let direct = haversine_distance(&a, &c);
            let via = haversine_distance(&a, &m) + haversine_distance(&m, &c);
            prop_assert!(direct <= via * (1.0 + 1e-6) + 1e-9);
        }

        #[test]
        fn delta_bounds(x in -720.0f64..720.0, y in -720.0f64..720.0) {
            prop_assert_eq!(signed_bearing_delta(b(x), b(x)), 0.0);
            let d = signed_bearing_delta(b(x), b(y));
            prop_assert!(d > -180.0 && d <= 180.0);
        }
    }
}
