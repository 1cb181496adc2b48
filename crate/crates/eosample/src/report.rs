//! CSV outputs. Floats use shortest round-trip formatting; absent values
//! are empty fields.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use eosample_core::detect::StormCluster;
use eosample_core::evaluate::{EvaluationResult, Flag, RankedResult};
use eosample_core::extract::{AVG_PRECTOT, MAX_PRECTOT, TOTAL_WEIGHTED_PRECTOT};
use eosample_core::observe::ObservationOutcome;
use eosample_core::orbit::GroundTrack;
use eosample_core::stats::{DensityEstimate, IntegrationBounds};

use crate::error::CliError;

type Writer = csv::Writer<std::fs::File>;

/// `(timestamp, cluster_id)` as written in the CSV files.
pub type ClusterKey = (String, u32);

fn open(path: &Path) -> Result<Writer, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

fn finish(mut w: Writer, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| CliError::io(path, e))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Attribute columns in a fixed order: the three PRECTOT statistics first,
/// then any others alphabetically.
fn attribute_columns(clusters: &[StormCluster]) -> Vec<String> {
    let mut cols: Vec<String> = [MAX_PRECTOT, TOTAL_WEIGHTED_PRECTOT, AVG_PRECTOT].map(String::from).to_vec();
    let extra: std::collections::BTreeSet<&String> =
        clusters.iter().flat_map(|c| c.attributes.keys()).filter(|k| !cols.contains(k)).collect();
    cols.extend(extra.into_iter().cloned());
    cols
}

pub fn write_clusters(path: &Path, clusters: &[StormCluster]) -> Result<(), CliError> {
    let err = csv_err(path);
    let mut w = open(path)?;
    let attrs = attribute_columns(clusters);
    let mut header: Vec<&str> = vec!["timestamp", "cluster_id", "n_cells", "centroid_lat", "centroid_lon"];
    header.extend(attrs.iter().map(String::as_str));
    w.write_record(&header).map_err(&err)?;
    for c in clusters {
        let mut row = vec![
            c.timestamp.to_string(),
            c.cluster_id.to_string(),
            c.n_cells().to_string(),
            c.centroid.0.to_string(),
            c.centroid.1.to_string(),
        ];
        row.extend(attrs.iter().map(|a| opt(c.attributes.get(a))));
        w.write_record(&row).map_err(&err)?;
    }
    finish(w, path)
}

pub fn write_tracks(path: &Path, tracks: &[GroundTrack]) -> Result<(), CliError> {
    let err = csv_err(path);
    let mut w = open(path)?;
    w.write_record(["satellite_id", "timestamp", "lat", "lon"]).map_err(&err)?;
    for t in tracks {
        for s in &t.samples {
            w.write_record([t.satellite_id.to_string(), s.time.to_string(), s.lat.to_string(), s.lon.to_string()])
                .map_err(&err)?;
        }
    }
    finish(w, path)
}

pub fn write_observations<'a, I>(path: &Path, per_config: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = (u32, &'a [ObservationOutcome])>,
{
    let err = csv_err(path);
    let mut w = open(path)?;
    w.write_record(["config_id", "timestamp", "cluster_id", "observed", "satellite_id"]).map_err(&err)?;
    for (config_id, outcomes) in per_config {
        for o in outcomes {
            w.write_record([
                config_id.to_string(),
                o.timestamp.to_string(),
                o.cluster_id.to_string(),
                o.observed.to_string(),
                opt(o.satellite_id),
            ])
            .map_err(&err)?;
        }
    }
    finish(w, path)
}

const RESULT_HEADER: [&str; 12] = [
    "config_id",
    "name",
    "n_satellites",
    "n_observed",
    "n_total",
    "kl_divergence",
    "bandwidth_observed",
    "bandwidth_truth",
    "lower_bound",
    "upper_bound",
    "n_points",
    "flag",
];

/// Unranked per-configuration results, enough to rebuild every field of
/// [`EvaluationResult`].
pub fn write_results(path: &Path, results: &[EvaluationResult]) -> Result<(), CliError> {
    let err = csv_err(path);
    let mut w = open(path)?;
    w.write_record(RESULT_HEADER).map_err(&err)?;
    for r in results {
        w.write_record([
            r.config_id.to_string(),
            r.name.clone(),
            r.n_satellites.to_string(),
            r.n_observed.to_string(),
            r.n_total.to_string(),
            opt(r.kl_divergence),
            opt(r.bandwidth_observed),
            r.bandwidth_truth.to_string(),
            r.bounds.lower.to_string(),
            r.bounds.upper.to_string(),
            r.bounds.n_points.to_string(),
            opt(r.flag),
        ])
        .map_err(&err)?;
    }
    finish(w, path)
}

fn parse_flag(s: &str) -> Option<Option<Flag>> {
    if s.is_empty() {
        return Some(None);
    }
    if s == "degenerate_observed" {
        return Some(Some(Flag::DegenerateObserved));
    }
    let inner = s.strip_prefix("too_few_observed(")?.strip_suffix(')')?;
    let (a, b) = inner.split_once('<')?;
    Some(Some(Flag::TooFewObserved { observed: a.parse().ok()?, required: b.parse().ok()? }))
}

pub fn read_results(path: &Path) -> Result<Vec<EvaluationResult>, CliError> {
    let err = csv_err(path);
    let mut r = csv::Reader::from_path(path).map_err(&err)?;
    let header = r.headers().map_err(&err)?.clone();
    if header.iter().ne(RESULT_HEADER) {
        return Err(CliError::Data(format!("{}: unexpected header; expected {}", path.display(), RESULT_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(&err)?;
        let line = k + 2;
        let bad = |col: &str| CliError::Data(format!("{}: line {line}: bad {col}", path.display()));
        fn num<T: std::str::FromStr>(s: &str) -> Option<T> {
            s.parse().ok()
        }
        fn opt_num(s: &str) -> Option<Option<f64>> {
            if s.is_empty() { Some(None) } else { s.parse().ok().map(Some) }
        }
        let bounds = IntegrationBounds::new(
            num(&rec[8]).ok_or_else(|| bad("lower_bound"))?,
            num(&rec[9]).ok_or_else(|| bad("upper_bound"))?,
            num(&rec[10]).ok_or_else(|| bad("n_points"))?,
        )
        .map_err(|e| CliError::Data(format!("{}: line {line}: {e}", path.display())))?;
        out.push(EvaluationResult {
            config_id: num(&rec[0]).ok_or_else(|| bad("config_id"))?,
            name: rec[1].to_string(),
            n_satellites: num(&rec[2]).ok_or_else(|| bad("n_satellites"))?,
            n_observed: num(&rec[3]).ok_or_else(|| bad("n_observed"))?,
            n_total: num(&rec[4]).ok_or_else(|| bad("n_total"))?,
            kl_divergence: opt_num(&rec[5]).ok_or_else(|| bad("kl_divergence"))?,
            bandwidth_observed: opt_num(&rec[6]).ok_or_else(|| bad("bandwidth_observed"))?,
            bandwidth_truth: num(&rec[7]).ok_or_else(|| bad("bandwidth_truth"))?,
            bounds,
            flag: parse_flag(&rec[11]).ok_or_else(|| bad("flag"))?,
        });
    }
    Ok(out)
}

pub fn write_ranking(path: &Path, ranked: &[RankedResult]) -> Result<(), CliError> {
    let err = csv_err(path);
    let mut w = open(path)?;
    w.write_record(["rank", "config_id", "name", "n_satellites", "n_observed", "n_total", "kl_divergence", "flag"])
        .map_err(&err)?;
    for RankedResult { rank, result: r } in ranked {
        w.write_record([
            rank.to_string(),
            r.config_id.to_string(),
            r.name.clone(),
            r.n_satellites.to_string(),
            r.n_observed.to_string(),
            r.n_total.to_string(),
            opt(r.kl_divergence),
            opt(r.flag),
        ])
        .map_err(&err)?;
    }
    finish(w, path)
}

/// `x, density_observed, density_truth` on the shared quadrature nodes.
pub fn write_curve(path: &Path, observed: &DensityEstimate, truth: &DensityEstimate) -> Result<(), CliError> {
    if observed.support != truth.support {
        return Err(CliError::Data("observed and truth densities use different nodes".into()));
    }
    let err = csv_err(path);
    let mut w = open(path)?;
    w.write_record(["x", "density_observed", "density_truth"]).map_err(&err)?;
    for ((x, f), g) in observed.support.iter().zip(&observed.density).zip(&truth.density) {
        w.write_record([x.to_string(), f.to_string(), g.to_string()]).map_err(&err)?;
    }
    finish(w, path)
}

/// Cluster key `(timestamp, cluster_id)` to the value of one attribute
/// column, in file order.
pub fn read_cluster_attribute(path: &Path, attribute: &str) -> Result<Vec<(ClusterKey, f64)>, CliError> {
    let err = csv_err(path);
    let mut r = csv::Reader::from_path(path).map_err(&err)?;
    let header = r.headers().map_err(&err)?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("{}: no column {name}", path.display())))
    };
    let (ts, id, val) = (col("timestamp")?, col("cluster_id")?, col(attribute)?);
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(&err)?;
        let bad = || CliError::Data(format!("{}: line {}: malformed row", path.display(), k + 2));
        let cluster_id: u32 = rec[id].parse().map_err(|_| bad())?;
        let v: f64 = rec[val].parse().map_err(|_| bad())?;
        out.push(((rec[ts].to_string(), cluster_id), v));
    }
    Ok(out)
}

/// Keys of the clusters a configuration observed, and the set of config
/// ids present in the file.
pub fn read_observed(path: &Path, config_id: u32) -> Result<(HashSet<ClusterKey>, BTreeMap<u32, usize>), CliError> {
    let err = csv_err(path);
    let mut r = csv::Reader::from_path(path).map_err(&err)?;
    let mut observed = HashSet::new();
    let mut counts = BTreeMap::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec.map_err(&err)?;
        let bad = || CliError::Data(format!("{}: line {}: malformed row", path.display(), k + 2));
        if rec.len() != 5 {
            return Err(bad());
        }
        let cid: u32 = rec[0].parse().map_err(|_| bad())?;
        *counts.entry(cid).or_insert(0) += 1;
        let seen: bool = rec[3].parse().map_err(|_| bad())?;
        if cid == config_id && seen {
            observed.insert((rec[1].to_string(), rec[2].parse().map_err(|_| bad())?));
        }
    }
    Ok((observed, counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_round_trip_through_text() {
        for f in [None, Some(Flag::DegenerateObserved), Some(Flag::TooFewObserved { observed: 3, required: 10 })] {
            assert_eq!(parse_flag(&opt(f)), Some(f));
        }
        assert_eq!(parse_flag("garbage"), None);
    }
}
