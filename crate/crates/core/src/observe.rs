//! Matching storm clusters against satellite ground tracks.
//!
//! A cluster is observed when some track sample lies within the time
//! tolerance of the cluster timestamp and its subsatellite point is within
//! the swath reach of the cluster centroid. The field of view is a disc of
//! radius `swath / 2` on the surface.

use alloc::vec::Vec;

use thiserror::Error;

use crate::detect::StormCluster;
use crate::math::{self, to_rad};
use crate::orbit::GroundTrack;
use crate::time::Instant;
use crate::EARTH_RADIUS_KM;

/// Default instrument swath width, km.
pub const DEFAULT_SWATH_KM: f64 = 1450.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObserveError {
    #[error("swath width must be positive, got {0} km")]
    BadSwath(f64),
    #[error("no ground-track sample within {tolerance_s} s of {time}")]
    NoCoverage { time: Instant, tolerance_s: i64 },
}

/// Haversine distance on the sphere of radius 6371 km. Points are `(lat, lon)`
/// in degrees.
pub fn great_circle_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (phi1, phi2) = (to_rad(a.0), to_rad(b.0));
    let dphi = phi2 - phi1;
    let dlambda = to_rad(b.1 - a.1);
    let s1 = math::sin(dphi / 2.0);
    let s2 = math::sin(dlambda / 2.0);
    let h = s1 * s1 + math::cos(phi1) * math::cos(phi2) * s2 * s2;
    2.0 * EARTH_RADIUS_KM * math::asin(math::sqrt(h.clamp(0.0, 1.0)))
}

/// Ground distance from the subsatellite point to the swath edge.
pub fn swath_reach(swath_width_km: f64) -> Result<f64, ObserveError> {
    if !(swath_width_km > 0.0) {
        return Err(ObserveError::BadSwath(swath_width_km));
    }
    Ok(swath_width_km / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ObservationOutcome {
    pub cluster_id: u32,
    pub timestamp: Instant,
    pub observed: bool,
    pub satellite_id: Option<u32>,
    pub sample_time: Option<Instant>,
}

fn first_match(cluster: &StormCluster, tracks: &[GroundTrack], reach_km: f64, tolerance_s: i64) -> (bool, ObservationOutcome) {
    let mut covered = false;
    let mut outcome = ObservationOutcome {
        cluster_id: cluster.cluster_id,
        timestamp: cluster.timestamp,
        observed: false,
        satellite_id: None,
        sample_time: None,
    };
    let mut order: Vec<&GroundTrack> = tracks.iter().collect();
    order.sort_by_key(|t| t.satellite_id);
    for track in order {
        let near = track.samples_near(cluster.timestamp, tolerance_s);
        covered |= !near.is_empty();
        if let Some(s) = near
            .iter()
            .find(|s| great_circle_distance((s.lat, s.lon), cluster.centroid) <= reach_km)
        {
            outcome.observed = true;
            outcome.satellite_id = Some(track.satellite_id);
            outcome.sample_time = Some(s.time);
            return (true, outcome);
        }
    }
    (covered, outcome)
}

/// Whether any satellite saw the cluster centroid within `tolerance_s`.
///
/// The lowest satellite id with a matching sample is recorded. Fails when
/// no track has any sample inside the temporal window at all.
pub fn is_observed(
    cluster: &StormCluster,
    tracks: &[GroundTrack],
    reach_km: f64,
    tolerance_s: i64,
) -> Result<ObservationOutcome, ObserveError> {
    match first_match(cluster, tracks, reach_km, tolerance_s) {
        (true, outcome) => Ok(outcome),
        (false, _) => Err(ObserveError::NoCoverage { time: cluster.timestamp, tolerance_s }),
    }
}

/// Outcome for every cluster, in input order. Clusters outside track
/// coverage are unobserved.
pub fn observation_outcomes(
    clusters: &[StormCluster],
    tracks: &[GroundTrack],
    reach_km: f64,
    tolerance_s: i64,
) -> Vec<ObservationOutcome> {
    clusters
        .iter()
        .map(|c| first_match(c, tracks, reach_km, tolerance_s).1)
        .collect()
}

/// Splits clusters into `(observed, unobserved)`, preserving input order.
pub fn partition_clusters<'a>(
    clusters: &'a [StormCluster],
    tracks: &[GroundTrack],
    reach_km: f64,
    tolerance_s: i64,
) -> (Vec<&'a StormCluster>, Vec<&'a StormCluster>) {
    let outcomes = observation_outcomes(clusters, tracks, reach_km, tolerance_s);
    let mut observed = Vec::new();
    let mut unobserved = Vec::new();
    for (c, o) in clusters.iter().zip(outcomes) {
        if o.observed {
            observed.push(c);
        } else {
            unobserved.push(c);
        }
    }
    (observed, unobserved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::GroundTrackSample;
    use alloc::collections::BTreeMap;
    use alloc::vec;
    use approx::assert_abs_diff_eq;

    fn cluster(id: u32, t: i64, centroid: (f64, f64)) -> StormCluster {
        StormCluster {
            cluster_id: id,
            timestamp: Instant::from_unix(t),
            time_index: 0,
            cells: vec![(0, 0)],
            centroid,
            footprint: Vec::new(),
            attributes: BTreeMap::new(),
        }
    }

    fn track(id: u32, pts: &[(i64, f64, f64)]) -> GroundTrack {
        GroundTrack {
            satellite_id: id,
            samples: pts
                .iter()
                .map(|&(t, lat, lon)| GroundTrackSample { time: Instant::from_unix(t), lat, lon })
                .collect(),
        }
    }

    #[test]
    fn haversine_reference_distances() {
        assert_eq!(great_circle_distance((10.0, 20.0), (10.0, 20.0)), 0.0);
        assert_abs_diff_eq!(great_circle_distance((0.0, 0.0), (0.0, 90.0)), 10007.5, epsilon = 0.5);
        assert_abs_diff_eq!(great_circle_distance((90.0, 0.0), (-90.0, 0.0)), 20015.1, epsilon = 0.5);
        let (a, b) = ((33.4, -111.9), (40.0, -105.3));
        assert_eq!(great_circle_distance(a, b), great_circle_distance(b, a));
    }

    #[test]
    fn reach_is_half_swath() {
        assert_eq!(swath_reach(1450.0).unwrap(), 725.0);
        assert_eq!(swath_reach(2900.0).unwrap(), 1450.0);
        assert!(swath_reach(0.0).is_err());
    }

    #[test]
    fn exact_overhead_sample() {
        let c = cluster(1, 0, (35.0, -110.0));
        let o = is_observed(&c, &[track(1, &[(0, 35.0, -110.0)])], 725.0, 900).unwrap();
        assert!(o.observed);
        assert_eq!(o.satellite_id, Some(1));
        assert_eq!(o.sample_time, Some(Instant::from_unix(0)));
    }

    #[test]
    fn just_outside_reach() {
        // One degree of longitude on the equator is 111.19 km; find the
        // longitude 726 km away.
        let lon = 726.0 / great_circle_distance((0.0, 0.0), (0.0, 1.0));
        let c = cluster(1, 0, (0.0, 0.0));
        let o = is_observed(&c, &[track(1, &[(0, 0.0, lon)])], 725.0, 900).unwrap();
        assert!(!o.observed);
        assert_eq!(o.satellite_id, None);
        let o = is_observed(&c, &[track(1, &[(0, 0.0, lon)])], 726.0 + 1e-9, 900).unwrap();
        assert!(o.observed);
    }

    #[test]
    fn lowest_satellite_id_wins() {
        let c = cluster(1, 0, (0.0, 0.0));
        let tracks = [track(2, &[(0, 0.0, 0.0)]), track(1, &[(600, 0.0, 1.0)])];
        assert_eq!(is_observed(&c, &tracks, 725.0, 900).unwrap().satellite_id, Some(1));
    }

    #[test]
    fn time_tolerance_is_inclusive() {
        let c = cluster(1, 900, (0.0, 0.0));
        let tr = [track(1, &[(0, 0.0, 0.0)])];
        assert!(is_observed(&c, &tr, 725.0, 900).unwrap().observed);
        assert!(is_observed(&c, &tr, 725.0, 899).is_err());
    }

    #[test]
    fn uncovered_cluster_is_an_error_for_single_queries() {
        let c = cluster(1, 100_000, (0.0, 0.0));
        assert!(matches!(
            is_observed(&c, &[track(1, &[(0, 0.0, 0.0)])], 725.0, 900),
            Err(ObserveError::NoCoverage { .. })
        ));
        assert!(is_observed(&c, &[], 725.0, 900).is_err());
    }

    #[test]
    fn partition_edges() {
        let clusters = [cluster(1, 0, (0.0, 0.0)), cluster(2, 0, (50.0, 50.0))];
        let (obs, un) = partition_clusters(&clusters, &[], 725.0, 900);
        assert!(obs.is_empty());
        assert_eq!(un.len(), 2);
        let global = [track(1, &[(0, 0.0, 0.0)])];
        let (obs, un) = partition_clusters(&clusters, &global, 20_015.1, 900);
        assert_eq!(obs.len(), 2);
        assert!(un.is_empty());
    }
}
