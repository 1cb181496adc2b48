//! Circular-orbit propagation with secular J2 nodal regression.
//!
//! The model keeps only two-body mean motion along the orbit and the
//! secular drift of the ascending node. Earth-fixed coordinates come from
//! rotating by Greenwich mean sidereal time; latitudes are geocentric on a
//! spherical Earth.

use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::math::{self, to_deg, to_rad, wrap_180, wrap_360};
use crate::time::Instant;

/// Earth gravitational parameter, km³ s⁻².
pub const MU_EARTH: f64 = 398_600.441_8;
/// WGS-84 equatorial radius, km.
pub const EQUATORIAL_RADIUS_KM: f64 = 6378.137;
/// Second zonal harmonic.
pub const J2: f64 = 1.08263e-3;
/// Mean tropical year, days. Sets the sun-synchronous nodal rate.
pub const TROPICAL_YEAR_DAYS: f64 = 365.2422;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrbitError {
    #[error("altitude must be positive, got {0} km")]
    BadAltitude(f64),
    #[error("no sun-synchronous inclination exists at {0} km")]
    NoSunSynchronousSolution(f64),
    #[error("inclination {0} deg outside [0, 180]")]
    BadInclination(f64),
    #[error("LTAN {0} h outside [0, 24)")]
    BadLtan(f64),
    #[error("cannot parse LTAN {0:?}; expected HH:MM")]
    LtanSyntax(alloc::string::String),
    #[error("cadence must be positive")]
    BadCadence,
    #[error("no sample times to propagate")]
    EmptyTimes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitKind {
    /// Local time of the ascending node in hours, `[0, 24)`.
    SunSynchronous { ltan_hours: f64 },
    Inclined { inclination_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSpec {
    pub kind: OrbitKind,
    pub altitude_km: f64,
    /// Argument of latitude at epoch, degrees.
    pub true_anomaly_offset_deg: f64,
    /// Added to the node derived from the orbit kind, degrees.
    pub raan_offset_deg: f64,
    pub epoch: Instant,
}

impl OrbitSpec {
    pub fn sun_synchronous(ltan_hours: f64, altitude_km: f64, epoch: Instant) -> Self {
        Self {
            kind: OrbitKind::SunSynchronous { ltan_hours },
            altitude_km,
            true_anomaly_offset_deg: 0.0,
            raan_offset_deg: 0.0,
            epoch,
        }
    }

    pub fn inclined(inclination_deg: f64, altitude_km: f64, epoch: Instant) -> Self {
        Self {
            kind: OrbitKind::Inclined { inclination_deg },
            altitude_km,
            true_anomaly_offset_deg: 0.0,
            raan_offset_deg: 0.0,
            epoch,
        }
    }

    pub fn with_true_anomaly(mut self, deg: f64) -> Self {
        self.true_anomaly_offset_deg = deg;
        self
    }

    pub fn with_raan_offset(mut self, deg: f64) -> Self {
        self.raan_offset_deg = deg;
        self
    }

    pub fn validate(&self) -> Result<(), OrbitError> {
        if !(self.altitude_km > 0.0) {
            return Err(OrbitError::BadAltitude(self.altitude_km));
        }
        match self.kind {
            OrbitKind::SunSynchronous { ltan_hours } if !(0.0..24.0).contains(&ltan_hours) => {
                Err(OrbitError::BadLtan(ltan_hours))
            }
            OrbitKind::Inclined { inclination_deg } if !(0.0..=180.0).contains(&inclination_deg) => {
                Err(OrbitError::BadInclination(inclination_deg))
            }
            _ => Ok(()),
        }
    }

    pub fn inclination_deg(&self) -> Result<f64, OrbitError> {
        match self.kind {
            OrbitKind::SunSynchronous { .. } => sso_inclination(self.altitude_km),
            OrbitKind::Inclined { inclination_deg } => Ok(inclination_deg),
        }
    }

    /// Right ascension of the ascending node at epoch, degrees `[0, 360)`.
    pub fn raan_at_epoch_deg(&self) -> f64 {
        let base = match self.kind {
            OrbitKind::SunSynchronous { ltan_hours } => ltan_to_raan(ltan_hours, self.epoch),
            OrbitKind::Inclined { .. } => 0.0,
        };
        wrap_360(base + self.raan_offset_deg)
    }
}

/// Parses `"HH:MM"` into hours. `"24:00"` is rejected.
pub fn parse_ltan(s: &str) -> Result<f64, OrbitError> {
    let err = || OrbitError::LtanSyntax(s.into());
    let (h, m) = s.trim().split_once(':').ok_or_else(err)?;
    let h: u32 = h.parse().map_err(|_| err())?;
    let m: u32 = m.parse().map_err(|_| err())?;
    if h >= 24 || m >= 60 {
        return Err(OrbitError::BadLtan(f64::from(h) + f64::from(m) / 60.0));
    }
    Ok(f64::from(h) + f64::from(m) / 60.0)
}

fn semi_major_axis(altitude_km: f64) -> f64 {
    EQUATORIAL_RADIUS_KM + altitude_km
}

fn mean_motion(a: f64) -> f64 {
    math::sqrt(MU_EARTH / (a * a * a))
}

/// Secular nodal regression `−3/2 · n · J2 · (R/a)² · cos i`, rad s⁻¹.
pub fn nodal_rate(altitude_km: f64, inclination_deg: f64) -> f64 {
    let a = semi_major_axis(altitude_km);
    let r = EQUATORIAL_RADIUS_KM / a;
    -1.5 * mean_motion(a) * J2 * r * r * math::cos(to_rad(inclination_deg))
}

/// Inclination at which the J2 nodal drift matches the mean Sun,
/// 360° per tropical year.
pub fn sso_inclination(altitude_km: f64) -> Result<f64, OrbitError> {
    if !(altitude_km > 0.0) {
        return Err(OrbitError::BadAltitude(altitude_km));
    }
    let a = semi_major_axis(altitude_km);
    let target = 2.0 * PI / (TROPICAL_YEAR_DAYS * 86_400.0);
    let cos_i = -target * 2.0 * math::pow(a, 3.5) / (3.0 * J2 * math::sqrt(MU_EARTH) * EQUATORIAL_RADIUS_KM * EQUATORIAL_RADIUS_KM);
    if !(-1.0..=1.0).contains(&cos_i) {
        return Err(OrbitError::NoSunSynchronousSolution(altitude_km));
    }
    Ok(to_deg(libm::acos(cos_i)))
}

/// Two-body period of a circular orbit, seconds.
pub fn orbital_period(altitude_km: f64) -> Result<f64, OrbitError> {
    if !(altitude_km >= 0.0) {
        return Err(OrbitError::BadAltitude(altitude_km));
    }
    Ok(2.0 * PI / mean_motion(semi_major_axis(altitude_km)))
}

/// Greenwich mean sidereal time, degrees `[0, 360)`.
///
/// `θ = 280.46061837 + 360.98564736629·d + 0.000387933·T² − T³/38710000`,
/// `d` days since J2000.0 (UT1 ≈ UTC), `T = d/36525`.
pub fn gmst_deg(t: Instant) -> f64 {
    let d = t.days_since_j2000();
    let c = d / 36_525.0;
    // Whole revolutions removed before adding the rest to keep precision.
    let spin = 0.98564736629 * d + 360.0 * (d - math::floor(d));
    wrap_360(280.46061837 + spin + 0.000387933 * c * c - c * c * c / 38_710_000.0)
}

/// Right ascension of the fictitious mean Sun, degrees `[0, 360)`.
///
/// The mean Sun is on the Greenwich meridian at 12:00 UT, so its right
/// ascension is `GMST − 15°·UT + 180°`.
pub fn mean_sun_right_ascension(t: Instant) -> f64 {
    wrap_360(gmst_deg(t) - 15.0 * t.utc_hours() + 180.0)
}

/// Node right ascension for a given LTAN and Sun right ascension.
pub fn raan_for_ltan(ltan_hours: f64, sun_ra_deg: f64) -> f64 {
    wrap_360(sun_ra_deg + (ltan_hours - 12.0) * 15.0)
}

/// RAAN at `epoch` placing the ascending node at `ltan_hours` local mean time.
pub fn ltan_to_raan(ltan_hours: f64, epoch: Instant) -> f64 {
    raan_for_ltan(ltan_hours, mean_sun_right_ascension(epoch))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTrackSample {
    pub time: Instant,
    pub lat: f64,
    /// `[-180, 180)`.
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTrack {
    pub satellite_id: u32,
    pub samples: Vec<GroundTrackSample>,
}

impl GroundTrack {
    /// Samples with `|time − t| ≤ tolerance_s`. Relies on increasing times.
    pub fn samples_near(&self, t: Instant, tolerance_s: i64) -> &[GroundTrackSample] {
        let lo = self.samples.partition_point(|s| s.time < t - tolerance_s);
        let hi = self.samples.partition_point(|s| s.time <= t + tolerance_s);
        &self.samples[lo..hi]
    }
}

/// Times `start, start + cadence, ...` strictly before `end`.
pub fn uniform_times(start: Instant, end: Instant, cadence_s: i64) -> Result<Vec<Instant>, OrbitError> {
    if cadence_s <= 0 {
        return Err(OrbitError::BadCadence);
    }
    let n = if end > start { (end - start + cadence_s - 1) / cadence_s } else { 0 };
    Ok((0..n).map(|k| start + k * cadence_s).collect())
}

/// Precomputed orbit state for repeated evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Propagator {
    epoch: Instant,
    sin_i: f64,
    cos_i: f64,
    raan0: f64,
    raan_rate: f64,
    u0: f64,
    n: f64,
}

impl Propagator {
    pub fn new(spec: &OrbitSpec) -> Result<Self, OrbitError> {
        spec.validate()?;
        let inc = spec.inclination_deg()?;
        let a = semi_major_axis(spec.altitude_km);
        Ok(Self {
            epoch: spec.epoch,
            sin_i: math::sin(to_rad(inc)),
            cos_i: math::cos(to_rad(inc)),
            raan0: to_rad(spec.raan_at_epoch_deg()),
            raan_rate: nodal_rate(spec.altitude_km, inc),
            u0: to_rad(spec.true_anomaly_offset_deg),
            n: mean_motion(a),
        })
    }

    /// Unit position vector in the true-of-date inertial frame.
    pub fn inertial_direction(&self, t: Instant) -> [f64; 3] {
        let dt = (t - self.epoch) as f64;
        let u = self.u0 + self.n * dt;
        let raan = self.raan0 + self.raan_rate * dt;
        let (su, cu) = (math::sin(u), math::cos(u));
        let (so, co) = (math::sin(raan), math::cos(raan));
        [co * cu - so * su * self.cos_i, so * cu + co * su * self.cos_i, su * self.sin_i]
    }

    pub fn subsatellite_point(&self, t: Instant) -> GroundTrackSample {
        let [x, y, z] = self.inertial_direction(t);
        let lat = to_deg(math::asin(z.clamp(-1.0, 1.0)));
        let lon = wrap_180(to_deg(math::atan2(y, x)) - gmst_deg(t));
        GroundTrackSample { time: t, lat, lon }
    }
}

/// Subsatellite points of `spec` at each of `times`.
pub fn propagate(spec: &OrbitSpec, times: &[Instant], satellite_id: u32) -> Result<GroundTrack, OrbitError> {
    if times.is_empty() {
        return Err(OrbitError::EmptyTimes);
    }
    let p = Propagator::new(spec)?;
    let samples = times.iter().map(|&t| p.subsatellite_point(t)).collect();
    Ok(GroundTrack { satellite_id, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn epoch() -> Instant {
        Instant::from_civil(2005, 7, 15, 0, 0, 0)
    }

    #[test]
    fn sso_inclination_at_700km() {
        // scripts/oracles.py: 98.187956351951
        let i = sso_inclination(700.0).unwrap();
        assert_abs_diff_eq!(i, 98.19, epsilon = 0.1);
        assert_abs_diff_eq!(i, 98.187956351951, epsilon = 1e-9);
        assert!(sso_inclination(800.0).unwrap() > i);
        assert!(matches!(sso_inclination(6000.0), Err(OrbitError::NoSunSynchronousSolution(_))));
    }

    #[test]
    fn sso_nodal_rate_matches_sun() {
        let i = sso_inclination(700.0).unwrap();
        let per_day = to_deg(nodal_rate(700.0, i)) * 86_400.0;
        assert_abs_diff_eq!(per_day, 360.0 / TROPICAL_YEAR_DAYS, epsilon = 1e-12);
    }

    #[test]
    fn periods() {
        assert_abs_diff_eq!(orbital_period(700.0).unwrap(), 5926.0, epsilon = 2.0);
        assert_abs_diff_eq!(orbital_period(0.0).unwrap(), 5069.0, epsilon = 2.0);
        assert!(orbital_period(800.0).unwrap() > orbital_period(700.0).unwrap());
    }

    #[test]
    fn ltan_conversion() {
        assert_eq!(raan_for_ltan(12.0, 0.0), 0.0);
        assert_eq!(raan_for_ltan(18.0, 0.0), 90.0);
        assert_eq!(raan_for_ltan(0.0, 0.0), 180.0);
        // Mean-longitude polynomial L = 280.460 + 0.9856474 d (scripts/oracles.py).
        let raan = ltan_to_raan(20.0, epoch());
        assert_abs_diff_eq!(raan, 232.94621909999978, epsilon = 0.5);
    }

    #[test]
    fn ltan_parsing() {
        assert_eq!(parse_ltan("20:00").unwrap(), 20.0);
        assert_eq!(parse_ltan("00:30").unwrap(), 0.5);
        assert!(parse_ltan("24:00").is_err());
        assert!(parse_ltan("8pm").is_err());
    }

    #[test]
    fn gmst_reference_value() {
        // Meeus, Astronomical Algorithms, example 12.a: 1987-04-10 0h UT,
        // GMST = 13h10m46.3668s = 197.693195°.
        let t = Instant::from_civil(1987, 4, 10, 0, 0, 0);
        assert_abs_diff_eq!(gmst_deg(t), 197.693195, epsilon = 1e-5);
    }

    #[test]
    fn equatorial_orbit_stays_on_equator() {
        let spec = OrbitSpec::inclined(0.0, 700.0, epoch());
        let times = uniform_times(epoch(), epoch() + 86_400, 60).unwrap();
        let track = propagate(&spec, &times, 1).unwrap();
        assert!(track.samples.iter().all(|s| s.lat.abs() < 1e-6));
        assert!(track.samples.iter().all(|s| (-180.0..180.0).contains(&s.lon)));
    }

    #[test]
    fn invalid_specs() {
        assert!(propagate(&OrbitSpec::inclined(50.0, 700.0, epoch()), &[], 1).is_err());
        assert!(Propagator::new(&OrbitSpec::inclined(190.0, 700.0, epoch())).is_err());
        assert!(Propagator::new(&OrbitSpec::inclined(50.0, -1.0, epoch())).is_err());
        assert!(Propagator::new(&OrbitSpec::sun_synchronous(24.0, 700.0, epoch())).is_err());
        assert!(uniform_times(epoch(), epoch() + 10, 0).is_err());
    }

    #[test]
    fn samples_near_window() {
        let spec = OrbitSpec::inclined(50.0, 700.0, epoch());
        let times = uniform_times(epoch(), epoch() + 7200, 1800).unwrap();
        let track = propagate(&spec, &times, 1).unwrap();
        assert_eq!(track.samples_near(epoch() + 1800, 900).len(), 1);
        assert_eq!(track.samples_near(epoch() + 2700, 900).len(), 2);
        assert_eq!(track.samples_near(epoch() + 9000, 900).len(), 0);
    }
}
