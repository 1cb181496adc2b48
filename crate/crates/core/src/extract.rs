//! Per-cluster attributes computed from member-cell values.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::detect::StormCluster;
use crate::scenario::{GridError, NatureRunGrid};

/// Attribute key for the area-weighted total precipitation, the quantity
/// whose distribution is scored.
pub const TOTAL_WEIGHTED_PRECTOT: &str = "total_weighted_prectot";
pub const MAX_PRECTOT: &str = "max_prectot";
pub const AVG_PRECTOT: &str = "avg_prectot";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterAttributes {
    pub max_value: f64,
    /// Σ value · cell area, in value units · km².
    pub total_weighted: f64,
    /// Unweighted mean over member cells.
    pub average: f64,
    pub n_cells: usize,
}

fn member_values<'a>(cluster: &'a StormCluster, field: &'a [f64], cols: usize) -> impl Iterator<Item = f64> + 'a {
    cluster.cells.iter().map(move |&(j, i)| field[j * cols + i])
}

/// Peak member-cell value. `field` is a row-major `[J, I]` snapshot.
pub fn max_value(cluster: &StormCluster, field: &[f64], cols: usize) -> f64 {
    member_values(cluster, field, cols).fold(f64::NEG_INFINITY, f64::max)
}

/// `Σ G[j,i] · A[j,i]` over member cells.
pub fn total_weighted_value(cluster: &StormCluster, field: &[f64], areas: &[f64], cols: usize) -> f64 {
    cluster
        .cells
        .iter()
        .map(|&(j, i)| field[j * cols + i] * areas[j * cols + i])
        .sum()
}

/// Arithmetic mean of member-cell values; not area weighted.
pub fn average_value(cluster: &StormCluster, field: &[f64], cols: usize) -> f64 {
    member_values(cluster, field, cols).sum::<f64>() / cluster.cells.len() as f64
}

pub fn cluster_attributes(cluster: &StormCluster, field: &[f64], areas: &[f64], cols: usize) -> ClusterAttributes {
    ClusterAttributes {
        max_value: max_value(cluster, field, cols),
        total_weighted: total_weighted_value(cluster, field, areas, cols),
        average: average_value(cluster, field, cols),
        n_cells: cluster.cells.len(),
    }
}

/// Fills `max_<var>`, `total_weighted_<var>` and `avg_<var>` (lower-cased
/// variable name) on every cluster from `grid`.
pub fn attach_attributes(clusters: &mut [StormCluster], grid: &NatureRunGrid, variable: &str) -> Result<(), GridError> {
    let areas: Vec<f64> = grid.cell_areas();
    let (_, cols) = grid.shape();
    let suffix = variable.to_lowercase();
    let keys: [String; 3] = [
        format!("max_{suffix}"),
        format!("total_weighted_{suffix}"),
        format!("avg_{suffix}"),
    ];
    for cluster in clusters.iter_mut() {
        let field = grid.snapshot(variable, cluster.time_index)?;
        let attrs = cluster_attributes(cluster, field, &areas, cols);
        cluster.attributes.insert(keys[0].clone(), attrs.max_value);
        cluster.attributes.insert(keys[1].clone(), attrs.total_weighted);
        cluster.attributes.insert(keys[2].clone(), attrs.average);
    }
    Ok(())
}
