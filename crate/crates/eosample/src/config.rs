//! JSON configuration: scenario specs, run configs and constellation
//! manifests. Unknown keys are rejected everywhere.

use std::path::{Path, PathBuf};

use eosample_core::evaluate::{bundled_manifest_at, ConstellationConfig, EvaluationParams};
use eosample_core::extract::TOTAL_WEIGHTED_PRECTOT;
use eosample_core::orbit::{parse_ltan, OrbitKind, OrbitSpec};
use eosample_core::scenario::ScenarioSpec;
use eosample_core::Instant;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::timefmt::{format_instant, parse_instant};

/// Sentinel accepted wherever a constellation manifest path is expected.
pub const BUNDLED: &str = "bundled";

/// Serialized form of [`ScenarioSpec`]; omitted keys take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSpecFile {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub resolution_deg: f64,
    pub start: String,
    pub end: String,
    pub step_seconds: i64,
    pub storm_rate: f64,
    pub diurnal_peak_hour: f64,
    pub diurnal_concentration: f64,
    pub diurnal_intensity_gain: f64,
    pub radius_median_km: f64,
    pub radius_log_sd: f64,
    pub intensity_median: f64,
    pub intensity_log_sd: f64,
    pub max_lifetime_steps: u32,
    pub clear_sky_flux: f64,
    pub storm_core_flux: f64,
    pub storm_edge_flux: f64,
    pub seed: u64,
}

impl Default for ScenarioSpecFile {
    fn default() -> Self {
        Self::from(&ScenarioSpec::default())
    }
}

impl From<&ScenarioSpec> for ScenarioSpecFile {
    fn from(s: &ScenarioSpec) -> Self {
        Self {
            lat_min: s.lat_min,
            lat_max: s.lat_max,
            lon_min: s.lon_min,
            lon_max: s.lon_max,
            resolution_deg: s.resolution_deg,
            start: format_instant(s.start),
            end: format_instant(s.end),
            step_seconds: s.step_seconds,
            storm_rate: s.storm_rate,
            diurnal_peak_hour: s.diurnal_peak_hour,
            diurnal_concentration: s.diurnal_concentration,
            diurnal_intensity_gain: s.diurnal_intensity_gain,
            radius_median_km: s.radius_median_km,
            radius_log_sd: s.radius_log_sd,
            intensity_median: s.intensity_median,
            intensity_log_sd: s.intensity_log_sd,
            max_lifetime_steps: s.max_lifetime_steps,
            clear_sky_flux: s.clear_sky_flux,
            storm_core_flux: s.storm_core_flux,
            storm_edge_flux: s.storm_edge_flux,
            seed: s.seed,
        }
    }
}

impl ScenarioSpecFile {
    pub fn to_spec(&self) -> Result<ScenarioSpec, CliError> {
        Ok(ScenarioSpec {
            lat_min: self.lat_min,
            lat_max: self.lat_max,
            lon_min: self.lon_min,
            lon_max: self.lon_max,
            resolution_deg: self.resolution_deg,
            start: parse_instant(&self.start).map_err(CliError::Usage)?,
            end: parse_instant(&self.end).map_err(CliError::Usage)?,
            step_seconds: self.step_seconds,
            storm_rate: self.storm_rate,
            diurnal_peak_hour: self.diurnal_peak_hour,
            diurnal_concentration: self.diurnal_concentration,
            diurnal_intensity_gain: self.diurnal_intensity_gain,
            radius_median_km: self.radius_median_km,
            radius_log_sd: self.radius_log_sd,
            intensity_median: self.intensity_median,
            intensity_log_sd: self.intensity_log_sd,
            max_lifetime_steps: self.max_lifetime_steps,
            clear_sky_flux: self.clear_sky_flux,
            storm_core_flux: self.storm_core_flux,
            storm_edge_flux: self.storm_edge_flux,
            seed: self.seed,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid scenario spec: {e}")))
    }
}

/// Where the nature-run grid comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSource {
    /// An `.nrg` file.
    Path(PathBuf),
    /// Generated in memory from a spec.
    Synthetic(ScenarioSpecFile),
}

/// Density estimation and scoring parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KdeConfig {
    pub n_points: usize,
    pub lower_percentile: f64,
    pub upper_percentile: f64,
    pub reflect: bool,
    pub min_observed: usize,
    pub attribute: String,
}

impl Default for KdeConfig {
    fn default() -> Self {
        let p = EvaluationParams::default();
        Self {
            n_points: p.n_points,
            lower_percentile: p.lower_percentile,
            upper_percentile: p.upper_percentile,
            reflect: p.reflect,
            min_observed: p.min_observed,
            attribute: TOTAL_WEIGHTED_PRECTOT.to_string(),
        }
    }
}

/// Everything `evaluate` needs. Every key is optional in the JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSource,
    pub threshold_k: f64,
    pub cadence_min: f64,
    pub tolerance_min: f64,
    pub swath_km: f64,
    /// Altitude of the bundled configurations, and of manifest satellites
    /// that do not set their own.
    pub altitude_km: f64,
    pub kde: KdeConfig,
    /// `"bundled"` or a path to a constellation manifest.
    pub manifest: String,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioSource::Synthetic(ScenarioSpecFile::default()),
            threshold_k: 220.0,
            cadence_min: 30.0,
            tolerance_min: 15.0,
            swath_km: 1450.0,
            altitude_km: 700.0,
            kde: KdeConfig::default(),
            manifest: BUNDLED.to_string(),
            out_dir: PathBuf::from("out"),
        }
    }
}

fn whole_seconds(minutes: f64, what: &str) -> Result<i64, CliError> {
    let s = minutes * 60.0;
    if !(s > 0.0) || !s.is_finite() || s.fract() != 0.0 {
        return Err(CliError::Usage(format!("{what} must be a positive whole number of seconds, got {minutes} min")));
    }
    Ok(s as i64)
}

impl RunConfig {
    /// Loads a config file. Relative paths inside it resolve against the
    /// file's directory.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: invalid run config: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &Path| if p.is_relative() { base.join(p) } else { p.to_owned() };
        if let ScenarioSource::Path(p) = &mut cfg.scenario {
            *p = rebase(p);
        }
        if cfg.manifest != BUNDLED {
            cfg.manifest = rebase(Path::new(&cfg.manifest)).to_string_lossy().into_owned();
        }
        cfg.out_dir = rebase(&cfg.out_dir);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("threshold_k", self.threshold_k),
            ("cadence_min", self.cadence_min),
            ("tolerance_min", self.tolerance_min),
            ("swath_km", self.swath_km),
            ("altitude_km", self.altitude_km),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
        }
        whole_seconds(self.cadence_min, "cadence")?;
        whole_seconds(self.tolerance_min, "tolerance")?;
        let k = &self.kde;
        if k.n_points < 2 {
            return Err(CliError::Usage("kde.n_points must be at least 2".into()));
        }
        if k.min_observed < 2 {
            return Err(CliError::Usage("kde.min_observed must be at least 2".into()));
        }
        if !(0.0 <= k.lower_percentile && k.lower_percentile < k.upper_percentile && k.upper_percentile <= 100.0) {
            return Err(CliError::Usage(format!(
                "percentile bounds must satisfy 0 <= lower < upper <= 100, got {} and {}",
                k.lower_percentile, k.upper_percentile
            )));
        }
        if self.manifest.is_empty() {
            return Err(CliError::Usage("manifest must be \"bundled\" or a path".into()));
        }
        Ok(())
    }

    pub fn evaluation_params(&self) -> Result<EvaluationParams, CliError> {
        self.validate()?;
        Ok(EvaluationParams {
            cadence_s: whole_seconds(self.cadence_min, "cadence")?,
            time_tolerance_s: whole_seconds(self.tolerance_min, "tolerance")?,
            swath_km: self.swath_km,
            n_points: self.kde.n_points,
            min_observed: self.kde.min_observed,
            lower_percentile: self.kde.lower_percentile,
            upper_percentile: self.kde.upper_percentile,
            reflect: self.kde.reflect,
            attribute: self.kde.attribute.clone(),
        })
    }
}

/// Orbit family of a manifest satellite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitKindName {
    SunSynchronous,
    Inclined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SatelliteEntry {
    pub orbit: OrbitKindName,
    /// Local time of the ascending node, `HH:MM`; sun-synchronous only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ltan: Option<String>,
    /// Degrees; inclined only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inclination_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub altitude_km: Option<f64>,
    #[serde(default)]
    pub true_anomaly_offset_deg: f64,
    #[serde(default)]
    pub raan_offset_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEntry {
    pub config_id: u32,
    pub name: String,
    pub satellites: Vec<SatelliteEntry>,
}

/// A list of candidate constellations.
///
/// `epoch` anchors every orbit; when absent the first timestamp of the
/// scenario is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstellationManifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch: Option<String>,
    pub configs: Vec<ConfigEntry>,
}

fn format_ltan(hours: f64) -> String {
    let minutes = (hours * 60.0).round() as u32;
    format!("{:02}:{:02}", minutes / 60, minutes % 60)
}

impl ConstellationManifest {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("invalid constellation manifest: {e}")))
    }

    pub fn from_configs(configs: &[ConstellationConfig], epoch: Option<Instant>) -> Self {
        let entry = |s: &OrbitSpec| {
            let (orbit, ltan, inclination_deg) = match s.kind {
                OrbitKind::SunSynchronous { ltan_hours } => (OrbitKindName::SunSynchronous, Some(format_ltan(ltan_hours)), None),
                OrbitKind::Inclined { inclination_deg } => (OrbitKindName::Inclined, None, Some(inclination_deg)),
            };
            SatelliteEntry {
                orbit,
                ltan,
                inclination_deg,
                altitude_km: Some(s.altitude_km),
                true_anomaly_offset_deg: s.true_anomaly_offset_deg,
                raan_offset_deg: s.raan_offset_deg,
            }
        };
        Self {
            epoch: epoch.map(format_instant),
            configs: configs
                .iter()
                .map(|c| ConfigEntry {
                    config_id: c.config_id,
                    name: c.name.clone(),
                    satellites: c.satellites.iter().map(entry).collect(),
                })
                .collect(),
        }
    }

    /// Resolves entries into orbit specs.
    pub fn to_configs(&self, default_epoch: Instant, default_altitude_km: f64) -> Result<Vec<ConstellationConfig>, CliError> {
        let epoch = match &self.epoch {
            Some(s) => parse_instant(s).map_err(CliError::Usage)?,
            None => default_epoch,
        };
        if self.configs.is_empty() {
            return Err(CliError::Usage("constellation manifest lists no configurations".into()));
        }
        self.configs
            .iter()
            .map(|c| {
                let satellites = c
                    .satellites
                    .iter()
                    .map(|s| {
                        let altitude = s.altitude_km.unwrap_or(default_altitude_km);
                        let spec = match (s.orbit, &s.ltan, s.inclination_deg) {
                            (OrbitKindName::SunSynchronous, Some(ltan), None) => {
                                let h = parse_ltan(ltan).map_err(|e| CliError::Usage(e.to_string()))?;
                                OrbitSpec::sun_synchronous(h, altitude, epoch)
                            }
                            (OrbitKindName::Inclined, None, Some(i)) => OrbitSpec::inclined(i, altitude, epoch),
                            _ => {
                                return Err(CliError::Usage(format!(
                                    "configuration {}: sun_synchronous satellites need exactly `ltan`, inclined ones exactly `inclination_deg`",
                                    c.config_id
                                )))
                            }
                        };
                        let spec = spec.with_true_anomaly(s.true_anomaly_offset_deg).with_raan_offset(s.raan_offset_deg);
                        spec.validate().map_err(|e| CliError::Usage(format!("configuration {}: {e}", c.config_id)))?;
                        Ok(spec)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ConstellationConfig { config_id: c.config_id, name: c.name.clone(), satellites })
            })
            .collect()
    }
}

/// Loads `"bundled"` or a manifest file into configurations.
pub fn load_constellations(source: &str, epoch: Instant, altitude_km: f64) -> Result<Vec<ConstellationConfig>, CliError> {
    let configs = if source == BUNDLED {
        bundled_manifest_at(altitude_km, epoch)
    } else {
        let text = std::fs::read_to_string(source).map_err(|e| CliError::Usage(format!("{source}: {e}")))?;
        ConstellationManifest::from_json(&text)?.to_configs(epoch, altitude_km)?
    };
    eosample_core::evaluate::validate_study(&configs)?;
    Ok(configs)
}
