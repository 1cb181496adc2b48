//! Gridded geophysical data model and the seeded synthetic nature-run
//! generator.
//!
//! Fields are stored `[time, lat, lon]` in one flat buffer per variable,
//! latitude-outer and longitude-inner within a snapshot.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use thiserror::Error;

use crate::math::{self, to_rad};
use crate::time::{Instant, DAY};
use crate::EARTH_RADIUS_KM;

/// Total precipitation flux, kg m⁻² s⁻¹.
pub const PRECTOT: &str = "PRECTOT";
/// Upwelling longwave flux at the top of the atmosphere, W m⁻².
pub const LWTUP: &str = "LWTUP";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("{axis} axis needs at least two edges")]
    TooFewEdges { axis: &'static str },
    #[error("{axis} edges must be strictly increasing (edge {index})")]
    NonMonotonicEdges { axis: &'static str, index: usize },
    #[error("{axis} edge {value} outside [{min}, {max}]")]
    EdgeOutOfRange { axis: &'static str, value: f64, min: f64, max: f64 },
    #[error("at least one timestamp is required")]
    NoTimestamps,
    #[error("timestamps must be strictly increasing and uniformly spaced (index {index})")]
    IrregularTimestamps { index: usize },
    #[error("variable {name}: expected {expected} values, found {found}")]
    ShapeMismatch { name: String, expected: usize, found: usize },
    #[error("variable {name}: invalid value {value} at flat index {index}")]
    InvalidValue { name: String, index: usize, value: f64 },
    #[error("invalid cell bounds: latitude [{lat_lo}, {lat_hi}], longitude [{lon_lo}, {lon_hi}]")]
    InvalidCell { lat_lo: f64, lat_hi: f64, lon_lo: f64, lon_hi: f64 },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario region contains no grid cells")]
    DegenerateRegion,
    #[error("time step must be positive and no larger than the time range")]
    BadTimeRange,
    #[error("invalid scenario parameter {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Cell boundaries along one axis, in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    edges: Vec<f64>,
}

impl GridAxis {
    pub fn latitude(edges: Vec<f64>) -> Result<Self, GridError> {
        Self::checked("latitude", edges, -90.0, 90.0)
    }

    pub fn longitude(edges: Vec<f64>) -> Result<Self, GridError> {
        Self::checked("longitude", edges, -180.0, 180.0)
    }

    /// Edges `lo, lo + step, ...` covering `[lo, hi]`; the last cell is
    /// clipped at `hi` when the span is not a whole number of steps.
    pub fn uniform_edges(lo: f64, hi: f64, step: f64) -> Vec<f64> {
        let n = math::floor((hi - lo) / step + 1e-9) as usize;
        let mut edges: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
        if hi - edges[n] > 1e-9 * step {
            edges.push(hi);
        }
        edges
    }

    fn checked(axis: &'static str, edges: Vec<f64>, min: f64, max: f64) -> Result<Self, GridError> {
        if edges.len() < 2 {
            return Err(GridError::TooFewEdges { axis });
        }
        for (index, &value) in edges.iter().enumerate() {
            if !(min..=max).contains(&value) {
                return Err(GridError::EdgeOutOfRange { axis, value, min, max });
            }
            if index > 0 && value <= edges[index - 1] {
                return Err(GridError::NonMonotonicEdges { axis, index });
            }
        }
        Ok(Self { edges })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self, k: usize) -> (f64, f64) {
        (self.edges[k], self.edges[k + 1])
    }

    pub fn center(&self, k: usize) -> f64 {
        0.5 * (self.edges[k] + self.edges[k + 1])
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.center(k)).collect()
    }

    /// Index of the cell containing `x`, if any. Upper edges belong to the
    /// cell below except for the last edge.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let n = self.len();
        if x < self.edges[0] || x > self.edges[n] {
            return None;
        }
        let k = self.edges.partition_point(|&e| e <= x);
        Some(k.saturating_sub(1).min(n - 1))
    }
}

/// One named field with its units and `[time, lat, lon]` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub units: String,
    pub values: Vec<f64>,
}

/// Time-indexed 2-D fields on a lat/lon grid. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct NatureRunGrid {
    lat: GridAxis,
    lon: GridAxis,
    timestamps: Vec<Instant>,
    variables: BTreeMap<String, Variable>,
}

impl NatureRunGrid {
    pub fn new(
        lat: GridAxis,
        lon: GridAxis,
        timestamps: Vec<Instant>,
        variables: BTreeMap<String, Variable>,
    ) -> Result<Self, GridError> {
        if timestamps.is_empty() {
            return Err(GridError::NoTimestamps);
        }
        if timestamps.len() > 1 {
            let step = timestamps[1] - timestamps[0];
            for index in 1..timestamps.len() {
                let d = timestamps[index] - timestamps[index - 1];
                if d <= 0 || d != step {
                    return Err(GridError::IrregularTimestamps { index });
                }
            }
        }
        let expected = timestamps.len() * lat.len() * lon.len();
        for (name, var) in &variables {
            if var.values.len() != expected {
                return Err(GridError::ShapeMismatch {
                    name: name.clone(),
                    expected,
                    found: var.values.len(),
                });
            }
            let bad = |v: f64| match name.as_str() {
                PRECTOT => !(v >= 0.0) || !v.is_finite(),
                LWTUP => !(v > 0.0) || !v.is_finite(),
                _ => !v.is_finite(),
            };
            if let Some((index, &value)) = var.values.iter().enumerate().find(|(_, &v)| bad(v)) {
                return Err(GridError::InvalidValue { name: name.clone(), index, value });
            }
        }
        Ok(Self { lat, lon, timestamps, variables })
    }

    pub fn lat_axis(&self) -> &GridAxis {
        &self.lat
    }

    pub fn lon_axis(&self) -> &GridAxis {
        &self.lon
    }

    pub fn timestamps(&self) -> &[Instant] {
        &self.timestamps
    }

    /// Spacing between timestamps in seconds, `None` for a single snapshot.
    pub fn step_seconds(&self) -> Option<i64> {
        (self.timestamps.len() > 1).then(|| self.timestamps[1] - self.timestamps[0])
    }

    /// `(rows, cols)` = `(J, I)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.lat.len(), self.lon.len())
    }

    pub fn n_cells(&self) -> usize {
        self.lat.len() * self.lon.len()
    }

    pub fn variables(&self) -> &BTreeMap<String, Variable> {
        &self.variables
    }

    pub fn variable(&self, name: &str) -> Result<&Variable, GridError> {
        self.variables.get(name).ok_or_else(|| GridError::UnknownVariable(name.to_string()))
    }

    /// Row-major `[J, I]` values of `name` at time index `t`.
    pub fn snapshot(&self, name: &str, t: usize) -> Result<&[f64], GridError> {
        let n = self.n_cells();
        Ok(&self.variable(name)?.values[t * n..(t + 1) * n])
    }

    /// Cell areas in km², row-major `[J, I]`.
    pub fn cell_areas(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_cells());
        for j in 0..self.lat.len() {
            let (lat_lo, lat_hi) = self.lat.bounds(j);
            for i in 0..self.lon.len() {
                let (lon_lo, lon_hi) = self.lon.bounds(i);
                // Axis invariants guarantee valid bounds.
                out.push(cell_area(lat_lo, lat_hi, lon_lo, lon_hi).unwrap_or(0.0));
            }
        }
        out
    }

    /// Copy with every value of `name` multiplied by `factor > 0`.
    pub fn scaled(&self, name: &str, factor: f64) -> Result<Self, GridError> {
        let mut out = self.clone();
        let var = out
            .variables
            .get_mut(name)
            .ok_or_else(|| GridError::UnknownVariable(name.to_string()))?;
        var.values.iter_mut().for_each(|v| *v *= factor);
        Self::new(out.lat, out.lon, out.timestamps, out.variables)
    }
}

/// Area of a lat/lon cell on the sphere, km².
///
/// `R² · Δλ · (sin φ_hi − sin φ_lo)`.
pub fn cell_area(lat_lo: f64, lat_hi: f64, lon_lo: f64, lon_hi: f64) -> Result<f64, GridError> {
    let valid = lat_lo < lat_hi && lon_lo < lon_hi && lat_lo >= -90.0 && lat_hi <= 90.0;
    if !valid {
        return Err(GridError::InvalidCell { lat_lo, lat_hi, lon_lo, lon_hi });
    }
    let dlon = to_rad(lon_hi - lon_lo);
    Ok(EARTH_RADIUS_KM * EARTH_RADIUS_KM * dlon * (math::sin(to_rad(lat_hi)) - math::sin(to_rad(lat_lo))))
}

/// Parameters of a synthetic nature run.
///
/// Storms are circular cold-cloud blobs with Gaussian precipitation cores.
/// Each storm peaks at a local solar hour drawn from a von Mises
/// distribution centred on `diurnal_peak_hour`; storms near the peak are
/// also more intense by up to `exp(2 · diurnal_intensity_gain)` relative
/// to storms at the opposite hour.
///
/// The defaults describe an afternoon-peaked summer convective regime over
/// the desert Southwest: 28°N–42°N, 125°W–95°W at 0.5°, 62 days of 30-minute
/// steps from 2005-07-15.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub resolution_deg: f64,
    pub start: Instant,
    /// Exclusive.
    pub end: Instant,
    pub step_seconds: i64,
    /// Expected storm births per time step over the whole region.
    pub storm_rate: f64,
    pub diurnal_peak_hour: f64,
    /// von Mises concentration; 0 gives a uniform diurnal distribution.
    pub diurnal_concentration: f64,
    pub diurnal_intensity_gain: f64,
    pub radius_median_km: f64,
    /// Log-space standard deviation of the radius.
    pub radius_log_sd: f64,
    /// Median peak precipitation, kg m⁻² s⁻¹.
    pub intensity_median: f64,
    pub intensity_log_sd: f64,
    /// Storms last an odd number of steps, at most this many.
    pub max_lifetime_steps: u32,
    pub clear_sky_flux: f64,
    pub storm_core_flux: f64,
    pub storm_edge_flux: f64,
    pub seed: u64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            lat_min: 28.0,
            lat_max: 42.0,
            lon_min: -125.0,
            lon_max: -95.0,
            resolution_deg: 0.5,
            start: Instant::from_civil(2005, 7, 15, 0, 0, 0),
            end: Instant::from_civil(2005, 9, 15, 0, 0, 0),
            step_seconds: 1800,
            storm_rate: 4.0,
            diurnal_peak_hour: 17.0,
            diurnal_concentration: 2.0,
            diurnal_intensity_gain: 1.0,
            radius_median_km: 60.0,
            radius_log_sd: 0.2,
            intensity_median: 2.0e-3,
            intensity_log_sd: 0.3,
            max_lifetime_steps: 5,
            clear_sky_flux: 260.0,
            storm_core_flux: 95.0,
            storm_edge_flux: 125.0,
            seed: 42,
        }
    }
}

impl ScenarioSpec {
    fn validate(&self) -> Result<(), ScenarioError> {
        use ScenarioError::InvalidParameter as bad;
        if !(self.resolution_deg > 0.0) {
            return Err(bad("resolution_deg"));
        }
        if !(self.lat_min < self.lat_max) || !(self.lon_min < self.lon_max) {
            return Err(ScenarioError::DegenerateRegion);
        }
        if self.step_seconds <= 0 || self.end - self.start < self.step_seconds {
            return Err(ScenarioError::BadTimeRange);
        }
        if !(self.storm_rate >= 0.0) || !self.storm_rate.is_finite() {
            return Err(bad("storm_rate"));
        }
        if !(0.0..24.0).contains(&self.diurnal_peak_hour) {
            return Err(bad("diurnal_peak_hour"));
        }
        if !(self.diurnal_concentration >= 0.0) {
            return Err(bad("diurnal_concentration"));
        }
        if !self.diurnal_intensity_gain.is_finite() {
            return Err(bad("diurnal_intensity_gain"));
        }
        if !(self.radius_median_km > 0.0) || !(self.radius_log_sd >= 0.0) {
            return Err(bad("radius"));
        }
        if !(self.intensity_median > 0.0) || !(self.intensity_log_sd >= 0.0) {
            return Err(bad("intensity"));
        }
        if self.max_lifetime_steps == 0 {
            return Err(bad("max_lifetime_steps"));
        }
        let fluxes_ok = 0.0 < self.storm_core_flux
            && self.storm_core_flux <= self.storm_edge_flux
            && self.storm_edge_flux < self.clear_sky_flux;
        if !fluxes_ok {
            return Err(bad("fluxes"));
        }
        Ok(())
    }

    fn axes(&self) -> Result<(GridAxis, GridAxis), ScenarioError> {
        let lat = GridAxis::latitude(GridAxis::uniform_edges(self.lat_min, self.lat_max, self.resolution_deg))?;
        let lon = GridAxis::longitude(GridAxis::uniform_edges(self.lon_min, self.lon_max, self.resolution_deg))?;
        Ok((lat, lon))
    }

    fn timestamps(&self) -> Vec<Instant> {
        let n = ((self.end - self.start + self.step_seconds - 1) / self.step_seconds) as usize;
        (0..n).map(|k| self.start + k as i64 * self.step_seconds).collect()
    }
}

/// One synthetic storm, before rasterization.
#[derive(Debug, Clone, PartialEq)]
pub struct StormEvent {
    /// Time step of maximum development.
    pub peak: Instant,
    pub lat: f64,
    pub lon: f64,
    pub radius_km: f64,
    /// Peak precipitation, kg m⁻² s⁻¹.
    pub intensity: f64,
    /// Odd number of steps, centred on `peak`.
    pub lifetime_steps: u32,
}

/// Draws the storm population for `spec`. Deterministic in `spec.seed`.
pub fn sample_storm_events(spec: &ScenarioSpec) -> Result<Vec<StormEvent>, ScenarioError> {
    spec.validate()?;
    let timestamps = spec.timestamps();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let expected = spec.storm_rate * timestamps.len() as f64;
    let count = if expected > 0.0 {
        let poisson = Poisson::new(expected).map_err(|_| ScenarioError::InvalidParameter("storm_rate"))?;
        poisson.sample(&mut rng) as usize
    } else {
        0
    };
    let radius = LogNormal::new(math::log(spec.radius_median_km), spec.radius_log_sd)
        .map_err(|_| ScenarioError::InvalidParameter("radius"))?;
    let intensity = LogNormal::new(math::log(spec.intensity_median), spec.intensity_log_sd)
        .map_err(|_| ScenarioError::InvalidParameter("intensity"))?;

    // Local dates from the day before the window so that every local hour
    // has the same number of admissible dates; draws outside are redrawn.
    let first_day = spec.start.unix().div_euclid(DAY) * DAY - DAY;
    let n_days = (spec.end.unix() - first_day + DAY - 1) / DAY + 1;
    let sin_lo = math::sin(to_rad(spec.lat_min));
    let sin_hi = math::sin(to_rad(spec.lat_max));
    let peak_phase = spec.diurnal_peak_hour / 24.0 * 2.0 * PI;
    let n_life = spec.max_lifetime_steps.div_ceil(2);

    let mut events = Vec::with_capacity(count);
    while events.len() < count {
        let lon = rng.random_range(spec.lon_min..spec.lon_max);
        let lat = math::to_deg(math::asin(rng.random_range(sin_lo..sin_hi)));
        let phase = sample_von_mises(&mut rng, peak_phase, spec.diurnal_concentration);
        let local_hours = phase / (2.0 * PI) * 24.0;
        let day = rng.random_range(0..n_days);
        let utc_seconds = first_day + day * DAY + math::floor((local_hours - lon / 15.0) * 3600.0) as i64;
        // Snap to the nearest step; storms outside the window are redrawn.
        let k = (utc_seconds - spec.start.unix() + spec.step_seconds / 2).div_euclid(spec.step_seconds);
        if k < 0 || k as usize >= timestamps.len() {
            continue;
        }
        let gain = math::exp(spec.diurnal_intensity_gain * (math::cos(phase - peak_phase) - 1.0));
        events.push(StormEvent {
            peak: timestamps[k as usize],
            lat,
            lon,
            radius_km: radius.sample(&mut rng),
            intensity: intensity.sample(&mut rng) * gain,
            lifetime_steps: 2 * rng.random_range(0..n_life) + 1,
        });
    }
    Ok(events)
}

/// Best & Fisher (1979) rejection sampler on `[0, 2π)`.
fn sample_von_mises<R: Rng>(rng: &mut R, mu: f64, kappa: f64) -> f64 {
    let two_pi = 2.0 * PI;
    if kappa < 1e-8 {
        return rng.random_range(0.0..two_pi);
    }
    let tau = 1.0 + math::sqrt(1.0 + 4.0 * kappa * kappa);
    let rho = (tau - math::sqrt(2.0 * tau)) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.random();
        let z = math::cos(PI * u1);
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        let u2: f64 = rng.random();
        if c * (2.0 - c) - u2 > 0.0 || math::log(c / u2) + 1.0 - c >= 0.0 {
            let u3: f64 = rng.random();
            let theta = if u3 > 0.5 { libm::acos(f) } else { -libm::acos(f) };
            let x = mu + theta;
            return x - two_pi * math::floor(x / two_pi);
        }
    }
}

/// Generates a synthetic nature run with `LWTUP` and `PRECTOT` fields.
///
/// Overlapping storms take the colder cloud top and the summed rain rate.
pub fn generate_synthetic_scenario(spec: &ScenarioSpec) -> Result<NatureRunGrid, ScenarioError> {
    let events = sample_storm_events(spec)?;
    let (lat, lon) = spec.axes()?;
    let timestamps = spec.timestamps();
    let (rows, cols) = (lat.len(), lon.len());
    let n_cells = rows * cols;
    let mut lwtup = vec![spec.clear_sky_flux; timestamps.len() * n_cells];
    let mut prectot = vec![0.0; timestamps.len() * n_cells];
    let lat_centers = lat.centers();
    let lon_centers = lon.centers();

    for ev in &events {
        let peak_index = (ev.peak - spec.start) / spec.step_seconds;
        let half = i64::from(ev.lifetime_steps / 2);
        for offset in -half..=half {
            let t = peak_index + offset;
            if t < 0 || t as usize >= timestamps.len() {
                continue;
            }
            let stage = 1.0 - offset.unsigned_abs() as f64 / (half + 1) as f64;
            let r = ev.radius_km * (0.5 + 0.5 * stage);
            let base = t as usize * n_cells;
            let dlat = math::to_deg(r / EARTH_RADIUS_KM) + spec.resolution_deg;
            let dlon = dlat / math::cos(to_rad(ev.lat)).max(0.1);
            let centre_cell = lat.locate(ev.lat).zip(lon.locate(ev.lon));
            for (j, &lat_c) in lat_centers.iter().enumerate() {
                if math::abs(lat_c - ev.lat) > dlat {
                    continue;
                }
                for (i, &lon_c) in lon_centers.iter().enumerate() {
                    if math::abs(lon_c - ev.lon) > dlon {
                        continue;
                    }
                    let d = crate::observe::great_circle_distance(
                        (ev.lat, ev.lon),
                        (lat_c, lon_c),
                    );
                    let inside = d <= r || centre_cell == Some((j, i));
                    if !inside {
                        continue;
                    }
                    let q = (d / r).min(1.0);
                    let flux = spec.storm_core_flux + (spec.storm_edge_flux - spec.storm_core_flux) * q * q;
                    let cell = base + j * cols + i;
                    lwtup[cell] = lwtup[cell].min(flux);
                    prectot[cell] += ev.intensity * stage * math::exp(-2.0 * q * q);
                }
            }
        }
    }

    let mut variables = BTreeMap::new();
    variables.insert(LWTUP.to_string(), Variable { units: "W m-2".to_string(), values: lwtup });
    variables.insert(PRECTOT.to_string(), Variable { units: "kg m-2 s-1".to_string(), values: prectot });
    Ok(NatureRunGrid::new(lat, lon, timestamps, variables)?)
}
