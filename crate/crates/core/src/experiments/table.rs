use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// One aggregated metric at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub subcarriers: usize,
    pub speed_kmh: f64,
    pub metric: String,
    pub mean: f64,
    pub trial_count: usize,
    /// Trials for NMSE-type metrics, bits for error rates.
    pub sample_count: u64,
    pub seed_first: u64,
    pub seed_last: u64,
}

const HEADER: [&str; 10] = [
    "sweep_name",
    "sweep_value",
    "subcarriers",
    "speed_kmh",
    "metric",
    "mean",
    "trial_count",
    "sample_count",
    "seed_first",
    "seed_last",
];

/// Run information written next to the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub build_id: String,
    pub seed_derivation: String,
    pub wall_time_s: f64,
    pub config: RunConfig,
}

/// Rows of one run plus its metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
    pub metadata: RunMetadata,
}

pub fn build_id() -> String {
    match option_env!("OTFS_DSE_GIT_HASH") {
        Some(hash) => format!("otfs-dse {} ({hash})", env!("CARGO_PKG_VERSION")),
        None => format!("otfs-dse {}", env!("CARGO_PKG_VERSION")),
    }
}

impl ResultTable {
    pub fn new(config: RunConfig) -> Self {
        Self {
            rows: Vec::new(),
            metadata: RunMetadata {
                build_id: build_id(),
                seed_derivation:
                    "trial seed = base_seed XOR trial index; channel, bits and noise use ChaCha8 streams 1, 2 and 3"
                        .into(),
                wall_time_s: 0.0,
                config,
            },
        }
    }

    /// The row of `metric` at one sweep point.
    pub fn find(&self, metric: &str, subcarriers: usize, sweep_value: f64, speed_kmh: f64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.metric == metric
                && r.subcarriers == subcarriers
                && r.sweep_value == sweep_value
                && r.speed_kmh == speed_kmh
        })
    }

    pub fn value(&self, metric: &str, subcarriers: usize, sweep_value: f64, speed_kmh: f64) -> Result<f64> {
        self.find(metric, subcarriers, sweep_value, speed_kmh)
            .map(|r| r.mean)
            .ok_or_else(|| {
                Error::Config(format!(
                    "no row {metric} at M = {subcarriers}, sweep value {sweep_value}, {speed_kmh} km/h"
                ))
            })
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.rows.is_empty() {
            w.write_record(HEADER)?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn metadata_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.metadata).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes `path` and the sidecar `path.meta.json`; returns the sidecar path.
    pub fn save(&self, path: &Path) -> Result<PathBuf> {
        self.write_csv(std::fs::File::create(path)?)?;
        let meta = sidecar_path(path, ".meta.json");
        std::fs::write(&meta, self.metadata_json()? + "\n")?;
        Ok(meta)
    }
}

/// `path` with `suffix` appended to the file name.
pub fn sidecar_path(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Dumps a grid as `row_index,col_index,real,imag,modulus`.
pub fn write_grid_csv<W: Write>(grid: &Grid, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["row_index", "col_index", "real", "imag", "modulus"])?;
    for r in 0..grid.rows() {
        for (c, z) in grid.row(r).iter().enumerate() {
            w.write_record(&[
                r.to_string(),
                c.to_string(),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{:e}", z.norm()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::Scenario;
    use num_complex::Complex64;

    fn table() -> ResultTable {
        let mut t = ResultTable::new(RunConfig::defaults(Scenario::SigNmse));
        t.rows.push(ResultRow {
            sweep_name: "subcarriers".into(),
            sweep_value: 128.0,
            subcarriers: 128,
            speed_kmh: 500.0,
            metric: "nmse_ignore_dse".into(),
            mean: 1.5e-3,
            trial_count: 4,
            sample_count: 4,
            seed_first: u64::MAX,
            seed_last: u64::MAX - 3,
        });
        t
    }

    #[test]
    fn csv_has_header_and_rows() {
        let s = table().to_csv_string().unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), HEADER.join(","));
        assert!(lines
            .next()
            .unwrap()
            .starts_with("subcarriers,128.0,128,500.0,nmse_ignore_dse,0.0015,4,4,"));
        assert!(lines.next().is_none());
        let empty = ResultTable::new(RunConfig::defaults(Scenario::SigNmse))
            .to_csv_string()
            .unwrap();
        assert_eq!(empty.trim_end(), HEADER.join(","));
    }

    #[test]
    fn lookup_and_sidecar() {
        let t = table();
        assert_eq!(t.value("nmse_ignore_dse", 128, 128.0, 500.0).unwrap(), 1.5e-3);
        assert!(t.value("nmse_ignore_dse", 256, 128.0, 500.0).is_err());
        let meta: RunMetadata = serde_json::from_str(&t.metadata_json().unwrap()).unwrap();
        assert_eq!(meta, t.metadata);
    }

    #[test]
    fn grid_dump() {
        let g = Grid::from_fn(2, 2, |r, c| Complex64::new(r as f64, c as f64));
        let mut buf = Vec::new();
        write_grid_csv(&g, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().count(), 5);
        assert_eq!(s.lines().nth(4).unwrap(), "1,1,1e0,1e0,1.4142135623730951e0");
    }
}
