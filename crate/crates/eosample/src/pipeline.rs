//! The batch commands behind the CLI.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use eosample_core::detect::{detect_storms, temperature_to_flux, StormCluster};
use eosample_core::evaluate::{
    evaluate_against, rank_configurations, ConfigurationEvaluation, ConstellationConfig, EvaluateError,
    EvaluationParams, RankedResult, TruthReference,
};
use eosample_core::extract::attach_attributes;
use eosample_core::orbit::uniform_times;
use eosample_core::scenario::{generate_synthetic_scenario, NatureRunGrid, LWTUP, PRECTOT};
use eosample_core::stats::{fit_density, IntegrationBounds, StatsError};
use eosample_core::Instant;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{load_constellations, ConstellationManifest, KdeConfig, RunConfig, ScenarioSource, ScenarioSpecFile, BUNDLED};
use crate::error::CliError;
use crate::nrg::{load_dataset, write_dataset};
use crate::report;
use crate::timefmt::format_instant;

pub const CLUSTERS_CSV: &str = "clusters.csv";
pub const OBSERVATIONS_CSV: &str = "observations.csv";
pub const RESULTS_CSV: &str = "results.csv";
pub const RANKING_CSV: &str = "ranking.csv";
pub const RUN_MANIFEST: &str = "manifest.json";
pub const CURVES_DIR: &str = "curves";

pub fn curve_file_name(config_id: u32) -> String {
    format!("config_{config_id:02}.csv")
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Time span the ground tracks must cover: first timestamp up to one step
/// past the last.
pub fn study_window(grid: &NatureRunGrid, cadence_s: i64) -> (Instant, Instant) {
    let ts = grid.timestamps();
    let step = grid.step_seconds().unwrap_or(cadence_s);
    (ts[0], ts[ts.len() - 1] + step)
}

/// Storm clusters below the brightness-temperature threshold, with their
/// precipitation statistics attached.
pub fn detect_clusters(grid: &NatureRunGrid, threshold_k: f64) -> Result<Vec<StormCluster>, CliError> {
    for name in [LWTUP, PRECTOT] {
        grid.variable(name).map_err(|e| CliError::Data(e.to_string()))?;
    }
    let flux = temperature_to_flux(threshold_k).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut clusters = detect_storms(grid, flux).map_err(|e| CliError::Data(e.to_string()))?;
    attach_attributes(&mut clusters, grid, PRECTOT).map_err(|e| CliError::Data(e.to_string()))?;
    Ok(clusters)
}

/// Evaluates every configuration against one shared ground truth, in
/// parallel. Results keep the input order.
pub fn evaluate_all(
    configs: &[ConstellationConfig],
    clusters: &[StormCluster],
    window: (Instant, Instant),
    params: &EvaluationParams,
) -> Result<Vec<ConfigurationEvaluation>, EvaluateError> {
    let truth = TruthReference::new(clusters, params)?;
    configs
        .par_iter()
        .map(|c| evaluate_against(&truth, c, clusters, window, params))
        .collect()
}

fn load_scenario(source: &ScenarioSource) -> Result<NatureRunGrid, CliError> {
    match source {
        ScenarioSource::Path(p) => Ok(load_dataset(p)?),
        ScenarioSource::Synthetic(spec) => {
            generate_synthetic_scenario(&spec.to_spec()?).map_err(|e| CliError::Usage(format!("scenario spec: {e}")))
        }
    }
}

pub fn cmd_generate(spec: &ScenarioSpecFile, out: &Path) -> Result<NatureRunGrid, CliError> {
    let grid = generate_synthetic_scenario(&spec.to_spec()?).map_err(|e| CliError::Usage(format!("scenario spec: {e}")))?;
    write_dataset(&grid, out)?;
    Ok(grid)
}

pub fn cmd_detect(grid_path: &Path, threshold_k: f64, out: &Path) -> Result<Vec<StormCluster>, CliError> {
    let grid = load_dataset(grid_path)?;
    let clusters = detect_clusters(&grid, threshold_k)?;
    report::write_clusters(out, &clusters)?;
    Ok(clusters)
}

/// Ground tracks of one configuration over `[start, end)`.
pub fn cmd_track(
    manifest: &str,
    config_id: u32,
    window: (Instant, Instant),
    cadence_s: i64,
    altitude_km: f64,
    out: &Path,
) -> Result<usize, CliError> {
    let configs = load_constellations(manifest, window.0, altitude_km)?;
    let config = configs
        .iter()
        .find(|c| c.config_id == config_id)
        .ok_or_else(|| CliError::Usage(format!("unknown config id {config_id}")))?;
    let times = uniform_times(window.0, window.1, cadence_s).map_err(|e| CliError::Usage(e.to_string()))?;
    let tracks = config.ground_tracks(&times).map_err(|e| CliError::Usage(e.to_string()))?;
    report::write_tracks(out, &tracks)?;
    Ok(tracks.len())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRecord {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
}

/// Contents of `manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub scenario: InputRecord,
    pub constellation_manifest: InputRecord,
    pub constellations: ConstellationManifest,
    pub window_start: String,
    pub window_end: String,
    pub n_timestamps: usize,
    pub n_clusters: usize,
    /// Output file (relative to the run directory) to its SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(run_dir: &Path) -> Result<Self, CliError> {
        let path = run_dir.join(RUN_MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone)]
pub struct EvaluateReport {
    pub out_dir: PathBuf,
    pub evaluations: Vec<ConfigurationEvaluation>,
    pub ranking: Vec<RankedResult>,
    pub n_clusters: usize,
}

/// Full pipeline: scenario, detection, tracks, scoring and ranking, with
/// every artifact written under `cfg.out_dir`.
///
/// Outputs are written even when every configuration is flagged; the
/// ranking is then omitted and [`CliError::NoResults`] returned.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluateReport, CliError> {
    let params = cfg.evaluation_params()?;
    let grid = load_scenario(&cfg.scenario)?;
    let window = study_window(&grid, params.cadence_s);
    let configs = load_constellations(&cfg.manifest, window.0, cfg.altitude_km)?;
    for c in &configs {
        if let Some(s) = c.satellites.iter().find(|s| s.epoch >= window.1) {
            return Err(CliError::Data(format!(
                "configuration {}: orbit epoch {} is after the scenario ends at {}",
                c.config_id, s.epoch, window.1
            )));
        }
    }
    let clusters = detect_clusters(&grid, cfg.threshold_k)?;
    let evaluations = evaluate_all(&configs, &clusters, window, &params)?;
    let results: Vec<_> = evaluations.iter().map(|e| e.result.clone()).collect();
    let ranking = match rank_configurations(&results) {
        Ok(r) => Some(r),
        Err(EvaluateError::AllFlagged) => None,
        Err(e) => return Err(e.into()),
    };

    let out = &cfg.out_dir;
    let curves_dir = out.join(CURVES_DIR);
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    if curves_dir.exists() {
        fs::remove_dir_all(&curves_dir).map_err(|e| CliError::io(&curves_dir, e))?;
    }
    fs::create_dir_all(&curves_dir).map_err(|e| CliError::io(&curves_dir, e))?;
    let stale = out.join(RANKING_CSV);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }

    let mut written = vec![CLUSTERS_CSV.to_string(), OBSERVATIONS_CSV.to_string(), RESULTS_CSV.to_string()];
    report::write_clusters(&out.join(CLUSTERS_CSV), &clusters)?;
    report::write_observations(
        &out.join(OBSERVATIONS_CSV),
        evaluations.iter().map(|e| (e.result.config_id, e.outcomes.as_slice())),
    )?;
    report::write_results(&out.join(RESULTS_CSV), &results)?;
    if let Some(r) = &ranking {
        report::write_ranking(&out.join(RANKING_CSV), r)?;
        written.push(RANKING_CSV.to_string());
    }
    let truth = TruthReference::new(&clusters, &params)?;
    for e in &evaluations {
        if let Some(observed) = &e.observed_density {
            let name = curve_file_name(e.result.config_id);
            report::write_curve(&curves_dir.join(&name), observed, &truth.density)?;
            written.push(format!("{CURVES_DIR}/{name}"));
        }
    }

    let input = |source: String, path: Option<&Path>| -> Result<InputRecord, CliError> {
        Ok(InputRecord { source, sha256: path.map(sha256_file).transpose()? })
    };
    let scenario = match &cfg.scenario {
        ScenarioSource::Path(p) => input(p.display().to_string(), Some(p))?,
        ScenarioSource::Synthetic(_) => input("synthetic".into(), None)?,
    };
    let constellation_manifest = if cfg.manifest == BUNDLED {
        input(BUNDLED.into(), None)?
    } else {
        input(cfg.manifest.clone(), Some(Path::new(&cfg.manifest)))?
    };
    let outputs = written
        .iter()
        .map(|f| Ok((f.clone(), sha256_file(&out.join(f))?)))
        .collect::<Result<BTreeMap<_, _>, CliError>>()?;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.clone(),
        scenario,
        constellation_manifest,
        constellations: ConstellationManifest::from_configs(&configs, None),
        window_start: format_instant(window.0),
        window_end: format_instant(window.1),
        n_timestamps: grid.timestamps().len(),
        n_clusters: clusters.len(),
        outputs,
    };
    let path = out.join(RUN_MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Data(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;

    match ranking {
        Some(ranking) => Ok(EvaluateReport { out_dir: out.clone(), evaluations, ranking, n_clusters: clusters.len() }),
        None => Err(CliError::NoResults(format!(
            "all {} configurations were flagged; see {}",
            configs.len(),
            out.join(RESULTS_CSV).display()
        ))),
    }
}

/// Ranks a `results.csv` and writes the ranking table.
pub fn cmd_rank(results: &Path, out: &Path) -> Result<Vec<RankedResult>, CliError> {
    let rows = report::read_results(results)?;
    if rows.is_empty() {
        return Err(CliError::Data(format!("{}: no results", results.display())));
    }
    let ranked = rank_configurations(&rows)?;
    report::write_ranking(out, &ranked)?;
    Ok(ranked)
}

/// Recomputes one configuration's density curves from a run directory.
pub fn cmd_curves(run_dir: &Path, config_id: u32, out: &Path) -> Result<(), CliError> {
    let manifest = RunManifest::load(run_dir)?;
    if !manifest.constellations.configs.iter().any(|c| c.config_id == config_id) {
        return Err(CliError::Usage(format!("unknown config id {config_id}")));
    }
    let KdeConfig { n_points, lower_percentile, upper_percentile, reflect, min_observed, attribute } = &manifest.config.kde;
    let values = report::read_cluster_attribute(&run_dir.join(CLUSTERS_CSV), attribute)?;
    let (observed_keys, counts) = report::read_observed(&run_dir.join(OBSERVATIONS_CSV), config_id)?;
    if !counts.contains_key(&config_id) {
        return Err(CliError::Data(format!("no observations recorded for config {config_id}")));
    }
    let truth: Vec<f64> = values.iter().map(|(_, v)| *v).collect();
    let observed: Vec<f64> = values.iter().filter(|(k, _)| observed_keys.contains(k)).map(|(_, v)| *v).collect();
    if truth.is_empty() {
        return Err(CliError::Data("no clusters in run".into()));
    }
    if observed.len() < *min_observed {
        return Err(CliError::NoResults(format!(
            "config {config_id} observed {} clusters, fewer than {min_observed}; no curve",
            observed.len()
        )));
    }
    let stats = |e: StatsError| CliError::Data(e.to_string());
    let bounds = IntegrationBounds::from_percentiles(&truth, *lower_percentile, *upper_percentile, *n_points).map_err(stats)?;
    let g = fit_density(&truth, &bounds, *reflect).map_err(stats)?;
    let f = match fit_density(&observed, &bounds, *reflect) {
        Err(StatsError::DegenerateData) => {
            return Err(CliError::NoResults(format!("config {config_id}: observed values have no spread")))
        }
        other => other.map_err(stats)?,
    };
    report::write_curve(out, &f, &g)
}
