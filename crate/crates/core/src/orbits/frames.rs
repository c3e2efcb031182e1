//! Earth rotation, geodetic conversion and topocentric geometry.

use chrono::{DateTime, Utc};
use nalgebra::Vector3;

use super::{GroundSite, SatelliteState};
use crate::{Error, Result};

pub const WGS84_A_M: f64 = 6_378_137.0;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// Mean equatorial radius used for the spherical-Earth helpers.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

const J2000_JD: f64 = 2_451_545.0;
const UNIX_EPOCH_JD: f64 = 2_440_587.5;

/// Julian date of a UTC instant (UT1 − UTC taken as zero).
pub fn julian_date(t: DateTime<Utc>) -> f64 {
    let secs = t.timestamp() as f64 + t.timestamp_subsec_nanos() as f64 * 1e-9;
    UNIX_EPOCH_JD + secs / 86_400.0
}

/// Greenwich mean sidereal time, IAU-1982 polynomial, in radians [0, 2π).
pub fn gmst_rad(t: DateTime<Utc>) -> f64 {
    gmst_from_jd(julian_date(t))
}

pub fn gmst_from_jd(jd_ut1: f64) -> f64 {
    let tu = (jd_ut1 - J2000_JD) / 36_525.0;
    let secs = 67_310.548_41 + (876_600.0 * 3600.0 + 8_640_184.812_866) * tu + 0.093_104 * tu * tu
        - 6.2e-6 * tu * tu * tu;
    let rad = (secs % 86_400.0) / 240.0 * std::f64::consts::PI / 180.0;
    rad.rem_euclid(2.0 * std::f64::consts::PI)
}

/// Rotation of a TEME vector into the Earth-fixed frame by angle `gmst`.
pub fn teme_to_ecef(r: &Vector3<f64>, gmst: f64) -> Vector3<f64> {
    let (s, c) = gmst.sin_cos();
    Vector3::new(c * r.x + s * r.y, -s * r.x + c * r.y, r.z)
}

/// Earth-fixed position of a propagated state, polar motion neglected.
pub fn eci_to_ecef(state: &SatelliteState) -> Vector3<f64> {
    teme_to_ecef(&state.position_eci_m, gmst_rad(state.epoch))
}

pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64, alt_m: f64) -> Vector3<f64> {
    let (slat, clat) = lat_deg.to_radians().sin_cos();
    let (slon, clon) = lon_deg.to_radians().sin_cos();
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let n = WGS84_A_M / (1.0 - e2 * slat * slat).sqrt();
    Vector3::new((n + alt_m) * clat * clon, (n + alt_m) * clat * slon, (n * (1.0 - e2) + alt_m) * slat)
}

/// East, north and up unit vectors at a geodetic position.
pub fn enu_basis(lat_deg: f64, lon_deg: f64) -> [Vector3<f64>; 3] {
    let (slat, clat) = lat_deg.to_radians().sin_cos();
    let (slon, clon) = lon_deg.to_radians().sin_cos();
    [
        Vector3::new(-slon, clon, 0.0),
        Vector3::new(-slat * clon, -slat * slon, clat),
        Vector3::new(clat * clon, clat * slon, slat),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LookAngles {
    pub elevation_deg: f64,
    /// Clockwise from north, in [0, 360).
    pub azimuth_deg: f64,
    pub slant_range_m: f64,
}

/// Precomputed site frame, so campaigns do not redo the trigonometry.
#[derive(Debug, Clone)]
pub struct Topocentric {
    pub ecef_m: Vector3<f64>,
    pub basis: [Vector3<f64>; 3],
}

impl Topocentric {
    pub fn new(site: &GroundSite) -> Self {
        Self {
            ecef_m: geodetic_to_ecef(site.latitude_deg, site.longitude_deg, site.altitude_m),
            basis: enu_basis(site.latitude_deg, site.longitude_deg),
        }
    }

    /// Unit line of sight in local ENU plus the range.
    pub fn line_of_sight(&self, sat_ecef_m: &Vector3<f64>) -> Result<(Vector3<f64>, f64)> {
        let d = sat_ecef_m - self.ecef_m;
        let range = d.norm();
        if !(range > 1e-3) {
            return Err(Error::DegenerateGeometry("satellite coincides with the site".into()));
        }
        let u = d / range;
        Ok((Vector3::new(self.basis[0].dot(&u), self.basis[1].dot(&u), self.basis[2].dot(&u)), range))
    }

    pub fn look_angles(&self, sat_ecef_m: &Vector3<f64>) -> Result<LookAngles> {
        let (enu, range) = self.line_of_sight(sat_ecef_m)?;
        let elevation_deg = enu.z.clamp(-1.0, 1.0).asin().to_degrees();
        let azimuth_deg = enu.x.atan2(enu.y).to_degrees().rem_euclid(360.0);
        // rem_euclid can return 360.0 for tiny negative inputs.
        let azimuth_deg = if azimuth_deg >= 360.0 { 0.0 } else { azimuth_deg };
        Ok(LookAngles { elevation_deg, azimuth_deg, slant_range_m: range })
    }
}

pub fn look_angles(site: &GroundSite, sat_ecef_m: &Vector3<f64>) -> Result<LookAngles> {
    Topocentric::new(site).look_angles(sat_ecef_m)
}

/// Angle at the satellite between its nadir (−r_sat) and the direction to
/// the site, in degrees.
pub fn off_nadir_angle(sat_ecef_m: &Vector3<f64>, site_ecef_m: &Vector3<f64>) -> Result<f64> {
    let to_site = site_ecef_m - sat_ecef_m;
    let (ns, nt) = (sat_ecef_m.norm(), to_site.norm());
    if !(ns > 0.0) || !(nt > 0.0) || !site_ecef_m.norm().is_finite() {
        return Err(Error::DegenerateGeometry("zero-length vector in off-nadir angle".into()));
    }
    let cos = (-sat_ecef_m).dot(&to_site) / (ns * nt);
    Ok(cos.clamp(-1.0, 1.0).acos().to_degrees())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    fn site(lat: f64, lon: f64) -> GroundSite {
        GroundSite::new("t", lat, lon, 0.0).unwrap()
    }

    #[test]
    fn gmst_reference_value() {
        // Vallado example 3-5: 1992-08-20 12:14 UT1 → GMST 152.578787886°
        let t = Utc.with_ymd_and_hms(1992, 8, 20, 12, 14, 0).unwrap();
        assert!((gmst_rad(t).to_degrees() - 152.578_787_886).abs() < 1e-6);
    }

    #[test]
    fn rotation_axis_is_fixed() {
        let r = Vector3::new(0.0, 0.0, 7e6);
        for g in [0.0, 1.0, 4.0] {
            assert_eq!(teme_to_ecef(&r, g), r);
        }
        let v = Vector3::new(7e6, -1e5, 3e4);
        assert_eq!(teme_to_ecef(&v, 0.0), v);
    }

    #[test]
    fn rotation_is_an_isometry() {
        let mut seed = 17u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for _ in 0..100 {
            let r = Vector3::new(next(), next(), next()) * 1e7;
            let g = next() * 20.0;
            assert!((teme_to_ecef(&r, g).norm() - r.norm()).abs() < 1e-8);
        }
    }

    #[test]
    fn zenith_and_nadir() {
        let s = site(45.409, 11.894);
        let topo = Topocentric::new(&s);
        let up = topo.basis[2];
        let la = topo.look_angles(&(topo.ecef_m + up * 550e3)).unwrap();
        assert!((la.elevation_deg - 90.0).abs() < 1e-9);
        assert!((la.slant_range_m - 550e3).abs() < 1e-6);
        let la = topo.look_angles(&(topo.ecef_m - up * 1e6)).unwrap();
        assert!((la.elevation_deg + 90.0).abs() < 1e-9);
        assert!(topo.look_angles(&topo.ecef_m).is_err());
    }

    #[test]
    fn due_east_at_the_equator() {
        let topo = Topocentric::new(&site(0.0, 0.0));
        // ENU east at (0, 0) is ECEF +y.
        let sat = topo.ecef_m + Vector3::new(0.0, 1e6, 0.0);
        let la = topo.look_angles(&sat).unwrap();
        assert!((la.azimuth_deg - 90.0).abs() < 1e-12);
        assert!(la.elevation_deg.abs() < 1e-12);
        let north = topo.ecef_m + Vector3::new(0.0, 0.0, 1e6);
        assert!(topo.look_angles(&north).unwrap().azimuth_deg.abs() < 1e-12);
    }

    #[test]
    fn slant_range_is_the_distance() {
        let topo = Topocentric::new(&site(-21.1, 55.5));
        let sat = Vector3::new(3e6, 4e6, -2.5e6);
        let la = topo.look_angles(&sat).unwrap();
        assert!(((la.slant_range_m - (sat - topo.ecef_m).norm()) / la.slant_range_m).abs() < 1e-12);
    }

    #[test]
    fn geodetic_reference_point() {
        // Equator/prime meridian and the pole.
        let p = geodetic_to_ecef(0.0, 0.0, 0.0);
        assert!((p.x - WGS84_A_M).abs() < 1e-6 && p.y.abs() < 1e-6);
        let b = WGS84_A_M * (1.0 - WGS84_F);
        assert!((geodetic_to_ecef(90.0, 0.0, 0.0).z - b).abs() < 1e-6);
    }

    #[test]
    fn off_nadir_cases() {
        let r = EARTH_RADIUS_M;
        let h = 550e3;
        let sat = Vector3::new(r + h, 0.0, 0.0);
        assert!(off_nadir_angle(&sat, &Vector3::new(r, 0.0, 0.0)).unwrap().abs() < 1e-9);
        // Horizon point: tangent from the satellite to the sphere.
        let half = (r / (r + h)).acos();
        let horizon = Vector3::new(r * half.cos(), r * half.sin(), 0.0);
        let expect = (r / (r + h)).asin().to_degrees();
        assert!((off_nadir_angle(&sat, &horizon).unwrap() - expect).abs() < 1e-9);
        assert!((expect - 67.016).abs() < 0.001);
        assert!(off_nadir_angle(&Vector3::zeros(), &horizon).is_err());
        assert!(off_nadir_angle(&sat, &sat).is_err());
    }
}
