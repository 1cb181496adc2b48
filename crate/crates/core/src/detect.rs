//! Storm detection: cold-cloud masking and 4-connected cluster labeling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::scenario::{GridError, NatureRunGrid, LWTUP};
use crate::time::Instant;

/// Stefan-Boltzmann constant, W m⁻² K⁻⁴.
pub const STEFAN_BOLTZMANN: f64 = 5.67037e-8;

/// Cloud-top temperature below which a cell counts as deep convection, K.
pub const DEFAULT_THRESHOLD_K: f64 = 220.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectError {
    #[error("temperature must be a non-negative number of kelvin, got {0}")]
    NegativeTemperature(f64),
    #[error("field has {found} values, grid shape needs {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Blackbody flux `σT⁴` for a temperature in kelvin.
pub fn temperature_to_flux(kelvin: f64) -> Result<f64, DetectError> {
    if !(kelvin >= 0.0) {
        return Err(DetectError::NegativeTemperature(kelvin));
    }
    let t2 = kelvin * kelvin;
    Ok(STEFAN_BOLTZMANN * t2 * t2)
}

/// Per-timestep cold-cloud mask, row-major `[J, I]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
    pub timestamp: Instant,
}

impl BinaryMask {
    /// Builds a mask from 0/1 values. Any non-zero value counts as 1.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<u8>, timestamp: Instant) -> Result<Self, DetectError> {
        if cells.len() != rows * cols {
            return Err(DetectError::ShapeMismatch { expected: rows * cols, found: cells.len() });
        }
        let cells = cells.into_iter().map(|c| u8::from(c != 0)).collect();
        Ok(Self { rows, cols, cells, timestamp })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, j: usize, i: usize) -> u8 {
        self.cells[j * self.cols + i]
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&c| c == 1).count()
    }
}

/// `mask[j,i] = 1` iff `field[j,i] < threshold`.
pub fn cold_cloud_mask(
    field: &[f64],
    shape: (usize, usize),
    threshold: f64,
    timestamp: Instant,
) -> Result<BinaryMask, DetectError> {
    let (rows, cols) = shape;
    if field.len() != rows * cols {
        return Err(DetectError::ShapeMismatch { expected: rows * cols, found: field.len() });
    }
    let cells = field.iter().map(|&v| u8::from(v < threshold)).collect();
    Ok(BinaryMask { rows, cols, cells, timestamp })
}

/// Component labels; 0 is background, clusters are `1..=count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGrid {
    rows: usize,
    cols: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabeledGrid {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, j: usize, i: usize) -> u32 {
        self.labels[j * self.cols + i]
    }

    pub fn count(&self) -> u32 {
        self.count
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        let up = parent[parent[x as usize] as usize];
        parent[x as usize] = up;
        x = up;
    }
    x
}

fn union(parent: &mut [u32], a: u32, b: u32) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi as usize] = lo;
    }
}

/// Labels 4-connected components with a two-pass union-find.
///
/// Final labels are numbered in raster order of each component's first cell.
pub fn label_components(mask: &BinaryMask) -> LabeledGrid {
    let (rows, cols) = mask.shape();
    let mut provisional = vec![0u32; rows * cols];
    // parent[0] is the background sentinel.
    let mut parent: Vec<u32> = vec![0];

    for j in 0..rows {
        for i in 0..cols {
            let k = j * cols + i;
            if mask.cells[k] == 0 {
                continue;
            }
            let up = if j > 0 { provisional[k - cols] } else { 0 };
            let left = if i > 0 { provisional[k - 1] } else { 0 };
            provisional[k] = match (up, left) {
                (0, 0) => {
                    let id = parent.len() as u32;
                    parent.push(id);
                    id
                }
                (a, 0) | (0, a) => a,
                (a, b) => {
                    union(&mut parent, a, b);
                    a.min(b)
                }
            };
        }
    }

    let mut final_of_root = vec![0u32; parent.len()];
    let mut count = 0u32;
    let mut labels = vec![0u32; rows * cols];
    for (k, &p) in provisional.iter().enumerate() {
        if p == 0 {
            continue;
        }
        let root = find(&mut parent, p) as usize;
        if final_of_root[root] == 0 {
            count += 1;
            final_of_root[root] = count;
        }
        labels[k] = final_of_root[root];
    }
    LabeledGrid { rows, cols, labels, count }
}

/// Lat/lon bounds of one member cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellBox {
    pub lat_lo: f64,
    pub lat_hi: f64,
    pub lon_lo: f64,
    pub lon_hi: f64,
}

/// A 4-connected cold-cloud region at one timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct StormCluster {
    /// Unique within a timestamp; equals the component label.
    pub cluster_id: u32,
    pub timestamp: Instant,
    /// Index into the source grid's timestamps.
    pub time_index: usize,
    /// Member cells `(j, i)` in raster order.
    pub cells: Vec<(usize, usize)>,
    /// Area-weighted mean of member-cell centres, degrees.
    pub centroid: (f64, f64),
    pub footprint: Vec<CellBox>,
    /// Filled by [`crate::extract`].
    pub attributes: BTreeMap<String, f64>,
}

impl StormCluster {
    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }
}

/// One cluster per label at grid time index `t`.
pub fn build_clusters(labeled: &LabeledGrid, grid: &NatureRunGrid, t: usize) -> Vec<StormCluster> {
    build_clusters_with_areas(labeled, grid, t, &grid.cell_areas())
}

pub(crate) fn build_clusters_with_areas(
    labeled: &LabeledGrid,
    grid: &NatureRunGrid,
    t: usize,
    areas: &[f64],
) -> Vec<StormCluster> {
    let (rows, cols) = labeled.shape();
    let lat = grid.lat_axis();
    let lon = grid.lon_axis();
    let timestamp = grid.timestamps()[t];
    let mut clusters: Vec<StormCluster> = (1..=labeled.count())
        .map(|id| StormCluster {
            cluster_id: id,
            timestamp,
            time_index: t,
            cells: Vec::new(),
            centroid: (0.0, 0.0),
            footprint: Vec::new(),
            attributes: BTreeMap::new(),
        })
        .collect();
    let mut weights = vec![(0.0f64, 0.0f64, 0.0f64); clusters.len()];

    for j in 0..rows {
        for i in 0..cols {
            let label = labeled.get(j, i);
            if label == 0 {
                continue;
            }
            let c = (label - 1) as usize;
            let (lat_lo, lat_hi) = lat.bounds(j);
            let (lon_lo, lon_hi) = lon.bounds(i);
            clusters[c].cells.push((j, i));
            clusters[c].footprint.push(CellBox { lat_lo, lat_hi, lon_lo, lon_hi });
            let a = areas[j * cols + i];
            let w = &mut weights[c];
            w.0 += a;
            w.1 += a * lat.center(j);
            w.2 += a * lon.center(i);
        }
    }
    for (cluster, (a, wlat, wlon)) in clusters.iter_mut().zip(weights) {
        cluster.centroid = (wlat / a, wlon / a);
    }
    clusters
}

/// Clusters at every timestamp of `grid`, ordered by time then label.
pub fn detect_storms(grid: &NatureRunGrid, threshold_flux: f64) -> Result<Vec<StormCluster>, DetectError> {
    let areas = grid.cell_areas();
    let shape = grid.shape();
    let mut out = Vec::new();
    for (t, &ts) in grid.timestamps().iter().enumerate() {
        let mask = cold_cloud_mask(grid.snapshot(LWTUP, t)?, shape, threshold_flux, ts)?;
        let labeled = label_components(&mask);
        out.extend(build_clusters_with_areas(&labeled, grid, t, &areas));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{cell_area, GridAxis, Variable};
    use alloc::string::ToString;
    use approx::assert_abs_diff_eq;

    fn mask(rows: usize, cols: usize, cells: &[u8]) -> BinaryMask {
        BinaryMask::from_cells(rows, cols, cells.to_vec(), Instant::default()).unwrap()
    }

    #[test]
    fn stefan_boltzmann_values() {
        assert_abs_diff_eq!(temperature_to_flux(220.0).unwrap(), 132.8, epsilon = 0.05);
        assert_eq!(temperature_to_flux(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(temperature_to_flux(300.0).unwrap(), 459.30, epsilon = 0.05);
        assert!(temperature_to_flux(-1.0).is_err());
        assert!(temperature_to_flux(f64::NAN).is_err());
    }

    #[test]
    fn flux_strictly_increasing() {
        let mut prev = -1.0;
        for k in 0..400 {
            let f = temperature_to_flux(k as f64).unwrap();
            assert!(f > prev);
            prev = f;
        }
    }

    #[test]
    fn mask_uses_strict_inequality() {
        let field = [100.0, 132.8, 200.0, 132.79];
        let m = cold_cloud_mask(&field, (2, 2), 132.8, Instant::default()).unwrap();
        assert_eq!(m.cells(), &[1, 0, 0, 1]);
        let m = cold_cloud_mask(&[300.0; 4], (2, 2), 132.8, Instant::default()).unwrap();
        assert_eq!(m.count_ones(), 0);
        assert!(cold_cloud_mask(&field, (3, 2), 132.8, Instant::default()).is_err());
    }

    #[test]
    fn single_cell_cluster() {
        let l = label_components(&mask(3, 3, &[0, 0, 0, 0, 1, 0, 0, 0, 0]));
        assert_eq!(l.count(), 1);
        assert_eq!(l.get(1, 1), 1);
    }

    #[test]
    fn diagonal_cells_are_separate() {
        let l = label_components(&mask(2, 2, &[1, 0, 0, 1]));
        assert_eq!(l.count(), 2);
        assert_eq!(l.labels(), &[1, 0, 0, 2]);
    }

    #[test]
    fn u_shape_merges_under_raster_order() {
        // Two arms joined at the bottom: provisional labels must merge.
        #[rustfmt::skip]
        let cells = [
            1, 0, 1, 0, 1,
            1, 0, 1, 0, 0,
            1, 1, 1, 0, 1,
        ];
        let l = label_components(&mask(3, 5, &cells));
        assert_eq!(l.count(), 3);
        #[rustfmt::skip]
        assert_eq!(l.labels(), &[
            1, 0, 1, 0, 2,
            1, 0, 1, 0, 0,
            1, 1, 1, 0, 3,
        ]);
    }

    fn one_step_grid(lat_edges: Vec<f64>, lon_edges: Vec<f64>) -> NatureRunGrid {
        let lat = GridAxis::latitude(lat_edges).unwrap();
        let lon = GridAxis::longitude(lon_edges).unwrap();
        let n = lat.len() * lon.len();
        let mut vars = BTreeMap::new();
        vars.insert(LWTUP.to_string(), Variable { units: "W m-2".into(), values: vec![250.0; n] });
        NatureRunGrid::new(lat, lon, vec![Instant::default()], vars).unwrap()
    }

    #[test]
    fn one_cell_centroid_is_cell_centre() {
        let g = one_step_grid(vec![10.0, 11.0, 12.0], vec![-100.0, -99.0, -98.0]);
        let l = label_components(&mask(2, 2, &[0, 0, 0, 1]));
        let c = build_clusters(&l, &g, 0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].centroid, (11.5, -98.5));
        assert_eq!(c[0].cells, vec![(1, 1)]);
    }

    #[test]
    fn equator_straddling_pair_centres_on_zero() {
        let g = one_step_grid(vec![-1.0, 0.0, 1.0], vec![0.0, 1.0]);
        let l = label_components(&mask(2, 1, &[1, 1]));
        let c = build_clusters(&l, &g, 0);
        assert_abs_diff_eq!(c[0].centroid.0, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[0].centroid.1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn l_shaped_centroid_matches_weighted_mean() {
        // Cells (40.5,-109.5), (41.5,-109.5), (41.5,-108.5); oracle from scripts/oracles.py.
        let g = one_step_grid(vec![40.0, 41.0, 42.0], vec![-110.0, -109.0, -108.0]);
        let l = label_components(&mask(2, 2, &[1, 0, 1, 1]));
        let c = build_clusters(&l, &g, 0);
        assert_eq!(c.len(), 1);
        assert_abs_diff_eq!(c[0].centroid.0, 41.16328649675945, epsilon = 1e-9);
        assert_abs_diff_eq!(c[0].centroid.1, -109.16835675162027, epsilon = 1e-9);
        let a = cell_area(40.0, 41.0, -110.0, -109.0).unwrap();
        assert_abs_diff_eq!(a, 9401.77705384975, epsilon = 1e-6);
    }
}
