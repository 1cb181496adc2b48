//! Scoring constellation configurations and ranking them.
//!
//! For each configuration the storm clusters are split into observed and
//! unobserved, densities of the chosen attribute are fitted to the
//! observed subset (`f`) and to all clusters (`g`), and `D_KL(f ‖ g)` is
//! integrated between the 0th and 99th percentiles of the full set. Lower
//! is more representative.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use thiserror::Error;

use crate::detect::StormCluster;
use crate::extract::TOTAL_WEIGHTED_PRECTOT;
use crate::observe::{observation_outcomes, swath_reach, ObservationOutcome, ObserveError, DEFAULT_SWATH_KM};
use crate::orbit::{propagate, uniform_times, GroundTrack, OrbitError, OrbitKind, OrbitSpec};
use crate::stats::{fit_density, kl_divergence, DensityEstimate, IntegrationBounds, StatsError, DEFAULT_QUADRATURE_POINTS};
use crate::time::Instant;

/// Altitude shared by every bundled configuration, km.
pub const BUNDLED_ALTITUDE_KM: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluateError {
    #[error("configuration {0} has no satellites")]
    NoSatellites(u32),
    #[error("duplicate configuration id {0}")]
    DuplicateId(u32),
    #[error("no storm clusters to evaluate")]
    NoClusters,
    #[error("cluster {cluster_id} at {timestamp} lacks attribute {attribute}")]
    MissingAttribute { cluster_id: u32, timestamp: Instant, attribute: String },
    #[error("every configuration was flagged; nothing to rank")]
    AllFlagged,
    #[error("ground truth: {0}")]
    Truth(StatsError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Observe(#[from] ObserveError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationConfig {
    pub config_id: u32,
    pub name: String,
    pub satellites: Vec<OrbitSpec>,
}

impl ConstellationConfig {
    pub fn n_satellites(&self) -> usize {
        self.satellites.len()
    }

    pub fn validate(&self) -> Result<(), EvaluateError> {
        if self.satellites.is_empty() {
            return Err(EvaluateError::NoSatellites(self.config_id));
        }
        for s in &self.satellites {
            s.validate()?;
        }
        Ok(())
    }

    /// True when every satellite of `other` (counted with multiplicity)
    /// also flies in `self`.
    pub fn is_superset_of(&self, other: &ConstellationConfig) -> bool {
        let mut pool: Vec<Option<&OrbitSpec>> = self.satellites.iter().map(Some).collect();
        other.satellites.iter().all(|want| {
            match pool.iter_mut().find(|slot| slot.is_some_and(|s| s == want)) {
                Some(slot) => {
                    *slot = None;
                    true
                }
                None => false,
            }
        })
    }

    /// Ground tracks of every satellite; ids are 1-based positions.
    pub fn ground_tracks(&self, times: &[Instant]) -> Result<Vec<GroundTrack>, OrbitError> {
        if times.is_empty() {
            return Ok(Vec::new());
        }
        self.satellites
            .iter()
            .enumerate()
            .map(|(k, spec)| propagate(spec, times, k as u32 + 1))
            .collect()
    }
}

/// Checks ids are unique and every configuration is valid.
pub fn validate_study(configs: &[ConstellationConfig]) -> Result<(), EvaluateError> {
    let mut ids: Vec<u32> = configs.iter().map(|c| c.config_id).collect();
    ids.sort_unstable();
    if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
        return Err(EvaluateError::DuplicateId(w[0]));
    }
    configs.iter().try_for_each(ConstellationConfig::validate)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationParams {
    pub cadence_s: i64,
    pub time_tolerance_s: i64,
    pub swath_km: f64,
    pub n_points: usize,
    pub min_observed: usize,
    pub lower_percentile: f64,
    pub upper_percentile: f64,
    /// Reflect both KDEs about zero.
    pub reflect: bool,
    pub attribute: String,
}

impl Default for EvaluationParams {
    fn default() -> Self {
        Self {
            cadence_s: 1800,
            time_tolerance_s: 900,
            swath_km: DEFAULT_SWATH_KM,
            n_points: DEFAULT_QUADRATURE_POINTS,
            min_observed: 10,
            lower_percentile: 0.0,
            upper_percentile: 99.0,
            reflect: true,
            attribute: TOTAL_WEIGHTED_PRECTOT.to_string(),
        }
    }
}

/// Why a configuration has no score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    TooFewObserved { observed: usize, required: usize },
    /// Observed values have zero spread.
    DegenerateObserved,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::TooFewObserved { observed, required } => write!(f, "too_few_observed({observed}<{required})"),
            Flag::DegenerateObserved => f.write_str("degenerate_observed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub config_id: u32,
    pub name: String,
    pub n_satellites: usize,
    pub n_total: usize,
    pub n_observed: usize,
    /// `None` exactly when `flag` is set.
    pub kl_divergence: Option<f64>,
    pub bandwidth_observed: Option<f64>,
    pub bandwidth_truth: f64,
    pub bounds: IntegrationBounds,
    pub flag: Option<Flag>,
}

/// Everything produced while scoring one configuration.
#[derive(Debug, Clone)]
pub struct ConfigurationEvaluation {
    pub result: EvaluationResult,
    pub outcomes: Vec<ObservationOutcome>,
    pub observed_density: Option<DensityEstimate>,
}

/// Attribute values and fitted density of the full cluster set, shared by
/// all configurations of a study.
#[derive(Debug, Clone)]
pub struct TruthReference {
    pub values: Vec<f64>,
    pub bounds: IntegrationBounds,
    pub density: DensityEstimate,
}

fn attribute_values<'a, I>(clusters: I, attribute: &str) -> Result<Vec<f64>, EvaluateError>
where
    I: IntoIterator<Item = &'a StormCluster>,
{
    clusters
        .into_iter()
        .map(|c| {
            c.attributes.get(attribute).copied().ok_or_else(|| EvaluateError::MissingAttribute {
                cluster_id: c.cluster_id,
                timestamp: c.timestamp,
                attribute: attribute.to_string(),
            })
        })
        .collect()
}

impl TruthReference {
    pub fn new(clusters: &[StormCluster], params: &EvaluationParams) -> Result<Self, EvaluateError> {
        if clusters.is_empty() {
            return Err(EvaluateError::NoClusters);
        }
        let values = attribute_values(clusters, &params.attribute)?;
        let bounds = IntegrationBounds::from_percentiles(
            &values,
            params.lower_percentile,
            params.upper_percentile,
            params.n_points,
        )
        .map_err(EvaluateError::Truth)?;
        let density = fit_density(&values, &bounds, params.reflect).map_err(EvaluateError::Truth)?;
        Ok(Self { values, bounds, density })
    }
}

/// Scores `config` against all `clusters`; tracks cover `[window.0, window.1)`.
pub fn evaluate_configuration(
    config: &ConstellationConfig,
    clusters: &[StormCluster],
    window: (Instant, Instant),
    params: &EvaluationParams,
) -> Result<ConfigurationEvaluation, EvaluateError> {
    let truth = TruthReference::new(clusters, params)?;
    evaluate_against(&truth, config, clusters, window, params)
}

/// Like [`evaluate_configuration`] with a precomputed ground truth.
pub fn evaluate_against(
    truth: &TruthReference,
    config: &ConstellationConfig,
    clusters: &[StormCluster],
    window: (Instant, Instant),
    params: &EvaluationParams,
) -> Result<ConfigurationEvaluation, EvaluateError> {
    config.validate()?;
    let reach = swath_reach(params.swath_km)?;
    let times = uniform_times(window.0, window.1, params.cadence_s)?;
    let tracks = config.ground_tracks(&times)?;
    let outcomes = observation_outcomes(clusters, &tracks, reach, params.time_tolerance_s);
    let observed = attribute_values(
        clusters.iter().zip(&outcomes).filter(|(_, o)| o.observed).map(|(c, _)| c),
        &params.attribute,
    )?;

    let mut result = EvaluationResult {
        config_id: config.config_id,
        name: config.name.clone(),
        n_satellites: config.n_satellites(),
        n_total: clusters.len(),
        n_observed: observed.len(),
        kl_divergence: None,
        bandwidth_observed: None,
        bandwidth_truth: truth.density.bandwidth,
        bounds: truth.bounds,
        flag: None,
    };
    if observed.len() < params.min_observed {
        result.flag = Some(Flag::TooFewObserved { observed: observed.len(), required: params.min_observed });
        return Ok(ConfigurationEvaluation { result, outcomes, observed_density: None });
    }
    let density = match fit_density(&observed, &truth.bounds, params.reflect) {
        Ok(d) => d,
        Err(StatsError::DegenerateData) => {
            result.flag = Some(Flag::DegenerateObserved);
            return Ok(ConfigurationEvaluation { result, outcomes, observed_density: None });
        }
        Err(e) => return Err(e.into()),
    };
    result.kl_divergence = Some(kl_divergence(&density, &truth.density, &truth.bounds)?);
    result.bandwidth_observed = Some(density.bandwidth);
    Ok(ConfigurationEvaluation { result, outcomes, observed_density: Some(density) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedResult {
    /// 1-based.
    pub rank: usize,
    pub result: EvaluationResult,
}

fn rank_order(a: &EvaluationResult, b: &EvaluationResult) -> Ordering {
    match (a.kl_divergence, b.kl_divergence) {
        (Some(x), Some(y)) => x
            .total_cmp(&y)
            .then(a.n_satellites.cmp(&b.n_satellites))
            .then(a.config_id.cmp(&b.config_id)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.config_id.cmp(&b.config_id),
    }
}

/// Ascending KL; ties go to fewer satellites, then lower config id.
/// Flagged results follow all scored ones.
pub fn rank_configurations(results: &[EvaluationResult]) -> Result<Vec<RankedResult>, EvaluateError> {
    if !results.iter().any(|r| r.kl_divergence.is_some()) {
        return Err(EvaluateError::AllFlagged);
    }
    let mut sorted = results.to_vec();
    sorted.sort_by(rank_order);
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(k, result)| RankedResult { rank: k + 1, result })
        .collect())
}

/// Epoch of the bundled study window, 2005-07-15T00:00:00Z.
pub fn bundled_epoch() -> Instant {
    Instant::from_civil(2005, 7, 15, 0, 0, 0)
}

/// The twenty reference configurations at 700 km.
pub fn bundled_manifest() -> Vec<ConstellationConfig> {
    bundled_manifest_at(BUNDLED_ALTITUDE_KM, bundled_epoch())
}

#[derive(Clone, Copy)]
enum Sat {
    Inc(f64),
    Sso(f64),
}

impl Sat {
    fn spec(self, altitude_km: f64, epoch: Instant) -> OrbitSpec {
        match self {
            Sat::Inc(i) => OrbitSpec::inclined(i, altitude_km, epoch),
            Sat::Sso(ltan) => OrbitSpec::sun_synchronous(ltan, altitude_km, epoch),
        }
    }

    fn label(self) -> String {
        match self {
            Sat::Inc(i) => format!("{i}° Inclination"),
            Sat::Sso(ltan) => {
                let h = ltan as u32;
                let (h12, ampm) = match h {
                    0 => (12, "AM"),
                    1..=11 => (h, "AM"),
                    12 => (12, "PM"),
                    _ => (h - 12, "PM"),
                };
                format!("SSO {h12}:00 {ampm} LTAN")
            }
        }
    }
}

/// The reference manifest at a chosen altitude and epoch.
///
/// Two satellites sharing one orbit are phased 180° apart in argument of
/// latitude. Configurations 12 and 13 carry the same description in the
/// source table; here 13's inclined plane is rotated 180° in RAAN.
pub fn bundled_manifest_at(altitude_km: f64, epoch: Instant) -> Vec<ConstellationConfig> {
    use Sat::{Inc, Sso};
    let layout: [(u32, &[Sat], f64); 20] = [
        (1, &[Inc(50.0)], 0.0),
        (2, &[Inc(55.0)], 0.0),
        (3, &[Sso(20.0)], 0.0),
        (4, &[Sso(22.0)], 0.0),
        (5, &[Sso(0.0)], 0.0),
        (6, &[Inc(50.0), Inc(50.0)], 0.0),
        (7, &[Inc(55.0), Inc(55.0)], 0.0),
        (8, &[Sso(20.0), Sso(20.0)], 0.0),
        (9, &[Sso(22.0), Sso(22.0)], 0.0),
        (10, &[Sso(0.0), Sso(0.0)], 0.0),
        (11, &[Inc(50.0), Inc(55.0)], 0.0),
        (12, &[Inc(50.0), Sso(20.0)], 0.0),
        (13, &[Inc(50.0), Sso(20.0)], 180.0),
        (14, &[Inc(50.0), Sso(0.0)], 0.0),
        (15, &[Inc(55.0), Sso(20.0)], 0.0),
        (16, &[Inc(55.0), Sso(22.0)], 0.0),
        (17, &[Inc(55.0), Sso(0.0)], 0.0),
        (18, &[Sso(20.0), Sso(22.0)], 0.0),
        (19, &[Sso(20.0), Sso(0.0)], 0.0),
        (20, &[Sso(22.0), Sso(0.0)], 0.0),
    ];
    layout
        .iter()
        .map(|&(config_id, sats, inclined_raan)| {
            let same_orbit = sats.len() == 2 && sats[0].spec(altitude_km, epoch) == sats[1].spec(altitude_km, epoch);
            let satellites: Vec<OrbitSpec> = sats
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let mut spec = s.spec(altitude_km, epoch);
                    if same_orbit && k == 1 {
                        spec = spec.with_true_anomaly(180.0);
                    }
                    if matches!(spec.kind, OrbitKind::Inclined { .. }) {
                        spec = spec.with_raan_offset(inclined_raan);
                    }
                    spec
                })
                .collect();
            let name = if same_orbit {
                format!("2x {}", sats[0].label())
            } else {
                let parts: Vec<String> = sats.iter().map(|s| format!("1x {}", s.label())).collect();
                parts.join(", ")
            };
            let name = if inclined_raan != 0.0 { format!("{name} (inclined RAAN +{inclined_raan}°)") } else { name };
            ConstellationConfig { config_id, name, satellites }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn result(id: u32, kl: Option<f64>, sats: usize) -> EvaluationResult {
        EvaluationResult {
            config_id: id,
            name: String::new(),
            n_satellites: sats,
            n_total: 100,
            n_observed: 50,
            kl_divergence: kl,
            bandwidth_observed: kl.map(|_| 1.0),
            bandwidth_truth: 1.0,
            bounds: IntegrationBounds::new(0.0, 1.0, 2).unwrap(),
            flag: kl.is_none().then_some(Flag::TooFewObserved { observed: 1, required: 10 }),
        }
    }

    fn order(r: &[RankedResult]) -> Vec<u32> {
        r.iter().map(|x| x.result.config_id).collect()
    }

    #[test]
    fn ascending_by_kl() {
        let r = rank_configurations(&[result(1, Some(0.2), 1), result(2, Some(0.1), 1)]).unwrap();
        assert_eq!(order(&r), vec![2, 1]);
        assert_eq!(r[0].rank, 1);
    }

    #[test]
    fn ties_prefer_fewer_satellites_then_id() {
        let r = rank_configurations(&[result(2, Some(0.1), 2), result(9, Some(0.1), 1), result(3, Some(0.1), 1)]).unwrap();
        assert_eq!(order(&r), vec![3, 9, 2]);
    }

    #[test]
    fn flagged_last_and_all_flagged_is_error() {
        let r = rank_configurations(&[result(1, None, 1), result(2, Some(5.0), 2), result(0, None, 1)]).unwrap();
        assert_eq!(order(&r), vec![2, 0, 1]);
        assert_eq!(rank_configurations(&[result(1, None, 1)]), Err(EvaluateError::AllFlagged));
    }

    #[test]
    fn manifest_shape() {
        let m = bundled_manifest();
        assert_eq!(m.len(), 20);
        assert!(validate_study(&m).is_ok());
        let c8 = &m[7];
        assert_eq!(c8.config_id, 8);
        assert_eq!(c8.name, "2x SSO 8:00 PM LTAN");
        assert_eq!(c8.satellites.len(), 2);
        assert!(c8.satellites.iter().all(|s| s.kind == OrbitKind::SunSynchronous { ltan_hours: 20.0 }));
        assert_eq!(c8.satellites[0].true_anomaly_offset_deg, 0.0);
        assert_eq!(c8.satellites[1].true_anomaly_offset_deg, 180.0);
        let c5 = &m[4];
        assert_eq!(c5.name, "1x SSO 12:00 AM LTAN");
        assert_eq!(c5.satellites, vec![OrbitSpec::sun_synchronous(0.0, 700.0, bundled_epoch())]);
        assert_eq!(m[10].name, "1x 50° Inclination, 1x 55° Inclination");
        assert!(m.iter().flat_map(|c| &c.satellites).all(|s| s.altitude_km == 700.0));
        assert_ne!(m[11].satellites, m[12].satellites);
    }

    #[test]
    fn superset_relation() {
        let m = bundled_manifest();
        assert!(m[7].is_superset_of(&m[2]));
        assert!(!m[2].is_superset_of(&m[7]));
        assert!(m[11].is_superset_of(&m[0]) && m[11].is_superset_of(&m[2]));
        assert!(!m[12].is_superset_of(&m[0]));
        assert!(m[12].is_superset_of(&m[2]));
    }

    #[test]
    fn study_validation() {
        let mut m = bundled_manifest();
        m[1].config_id = 1;
        assert_eq!(validate_study(&m), Err(EvaluateError::DuplicateId(1)));
        let empty = ConstellationConfig { config_id: 1, name: "none".into(), satellites: vec![] };
        assert_eq!(validate_study(&[empty]), Err(EvaluateError::NoSatellites(1)));
    }
}
