//! The `.nrg` text grid format.
//!
//! ```text
//! NRG1
//! {"lat_edges":[...],"lon_edges":[...],"timestamps":["2005-07-15T00:00:00Z",...],"variables":[{"name":"LWTUP","units":"W m-2"},...]}
//! <I·J values for time 0, first variable>
//! <I·J values for time 0, second variable>
//! ...
//! ```
//!
//! Each data row holds one time step of one variable, latitude-outer and
//! longitude-inner, comma separated. Rows cycle through the variables in
//! header order within each time step. Floats are written in shortest
//! round-trip form, so a written grid reads back bit-exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use eosample_core::scenario::{GridAxis, GridError, NatureRunGrid, Variable};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::timefmt::{format_instant, parse_instant};

pub const MAGIC: &str = "NRG1";

#[derive(Debug, Error)]
pub enum NrgError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

fn format_err(line: usize, message: impl Into<String>) -> NrgError {
    NrgError::Format { line, message: message.into() }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    lat_edges: Vec<f64>,
    lon_edges: Vec<f64>,
    timestamps: Vec<String>,
    variables: Vec<VariableMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableMeta {
    name: String,
    units: String,
}

/// Reads a grid file from disk.
pub fn load_dataset(path: &Path) -> Result<NatureRunGrid, NrgError> {
    let file = File::open(path).map_err(|source| NrgError::Io { path: path.to_owned(), source })?;
    read_nrg(BufReader::new(file)).map_err(|e| match e {
        NrgError::Io { source, .. } => NrgError::Io { path: path.to_owned(), source },
        other => other,
    })
}

/// Writes a grid file to disk.
pub fn write_dataset(grid: &NatureRunGrid, path: &Path) -> Result<(), NrgError> {
    let io = |source| NrgError::Io { path: path.to_owned(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_nrg(grid, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

pub fn write_nrg<W: Write>(grid: &NatureRunGrid, w: &mut W) -> std::io::Result<()> {
    let header = Header {
        lat_edges: grid.lat_axis().edges().to_vec(),
        lon_edges: grid.lon_axis().edges().to_vec(),
        timestamps: grid.timestamps().iter().map(|&t| format_instant(t)).collect(),
        variables: grid
            .variables()
            .iter()
            .map(|(name, v)| VariableMeta { name: name.clone(), units: v.units.clone() })
            .collect(),
    };
    writeln!(w, "{MAGIC}")?;
    serde_json::to_writer(&mut *w, &header)?;
    writeln!(w)?;
    let per_step = grid.n_cells();
    for t in 0..grid.timestamps().len() {
        for var in grid.variables().values() {
            let row = &var.values[t * per_step..(t + 1) * per_step];
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    w.write_all(b",")?;
                }
                write!(w, "{v}")?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn read_nrg<R: BufRead>(reader: R) -> Result<NatureRunGrid, NrgError> {
    let io = |source| NrgError::Io { path: PathBuf::new(), source };
    let mut lines = reader.lines();
    let mut next = |lineno: usize| -> Result<Option<String>, NrgError> {
        match lines.next() {
            Some(Ok(l)) => Ok(Some(l)),
            Some(Err(e)) => Err(if e.kind() == std::io::ErrorKind::InvalidData {
                format_err(lineno, "not valid UTF-8")
            } else {
                io(e)
            }),
            None => Ok(None),
        }
    };

    match next(1)? {
        Some(l) if l.trim_end() == MAGIC => {}
        Some(l) => return Err(format_err(1, format!("expected {MAGIC:?}, found {:?}", truncate(&l)))),
        None => return Err(format_err(1, "empty file")),
    }
    let header_line = next(2)?.ok_or_else(|| format_err(2, "missing metadata header"))?;
    let header: Header =
        serde_json::from_str(&header_line).map_err(|e| format_err(2, format!("metadata header: {e}")))?;

    let lat = GridAxis::latitude(header.lat_edges).map_err(|e| format_err(2, e.to_string()))?;
    let lon = GridAxis::longitude(header.lon_edges).map_err(|e| format_err(2, e.to_string()))?;
    let timestamps = header
        .timestamps
        .iter()
        .map(|s| parse_instant(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| format_err(2, e))?;
    if header.variables.is_empty() {
        return Err(format_err(2, "no variables declared"));
    }
    let mut seen = BTreeMap::new();
    for (k, v) in header.variables.iter().enumerate() {
        if seen.insert(v.name.as_str(), k).is_some() {
            return Err(format_err(2, format!("variable {} declared twice", v.name)));
        }
    }

    let per_step = lat.len() * lon.len();
    let n_vars = header.variables.len();
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(per_step * timestamps.len()); n_vars];
    let expected_rows = timestamps.len() * n_vars;
    let mut lineno = 2;
    for row in 0..expected_rows {
        lineno += 1;
        let line = next(lineno)?.ok_or_else(|| {
            format_err(lineno, format!("expected {expected_rows} data rows, found {row}"))
        })?;
        let target = &mut values[row % n_vars];
        let before = target.len();
        for (col, field) in line.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                format_err(lineno, format!("column {}: cannot parse {:?} as a number", col + 1, truncate(field)))
            })?;
            target.push(v);
        }
        let found = target.len() - before;
        if found != per_step {
            return Err(format_err(lineno, format!("expected {per_step} values, found {found}")));
        }
    }
    while let Some(extra) = next(lineno + 1)? {
        lineno += 1;
        if !extra.trim().is_empty() {
            return Err(format_err(lineno, format!("expected {expected_rows} data rows, found more")));
        }
    }

    let order: Vec<String> = header.variables.iter().map(|v| v.name.clone()).collect();
    let variables: BTreeMap<String, Variable> = header
        .variables
        .into_iter()
        .zip(values)
        .map(|(meta, values)| (meta.name, Variable { units: meta.units, values }))
        .collect();
    NatureRunGrid::new(lat, lon, timestamps, variables).map_err(|e| match &e {
        GridError::InvalidValue { name, index, .. } => {
            let var = order.iter().position(|n| n == name).unwrap_or(0);
            let line = 3 + (index / per_step) * n_vars + var;
            format_err(line, format!("{e} (column {})", index % per_step + 1))
        }
        _ => format_err(2, e.to_string()),
    })
}

fn truncate(s: &str) -> &str {
    match s.char_indices().nth(40) {
        Some((k, _)) => &s[..k],
        None => s,
    }
}
