//! On-disk artifacts: CSV snapshots and tables, gnuplot scripts, the run
//! manifest, and the output-directory lock. Floats are written with the
//! shortest round-trip formatting, so identical runs produce byte-identical
//! files.

use crate::control::{LimitProfile, ValueTable};
use crate::error::{Error, Result};
use crate::model::{Field, RadialField, RadialProblem};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Guard that serializes runs per output directory. The lock file is
/// removed on drop.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<DirLock> {
        fs::create_dir_all(dir)?;
        let path = dir.join(".gcurve.lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::LockHeld(path))
            }
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Periodic snapshot: header line `# t=<time> N=<N>`, then row-major values,
/// one grid row per line.
pub fn write_periodic_snapshot(dir: &Path, index: usize, field: &Field) -> Result<PathBuf> {
    let path = dir.join(format!("u_{index:04}.csv"));
    let mut out = String::new();
    out.push_str(&format!("# t={} N={}\n", field.time, field.grid.n));
    let n = field.grid.n;
    let rows = field.values.len() / n;
    for r in 0..rows {
        let row: Vec<String> = field.values[r * n..(r + 1) * n]
            .iter()
            .map(|v| v.to_string())
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Radial snapshot: header with t, n, r_min, r_max, then `r,U` rows.
pub fn write_radial_snapshot(
    dir: &Path,
    index: usize,
    field: &RadialField,
    problem: &RadialProblem,
) -> Result<PathBuf> {
    let path = dir.join(format!("U_{index:04}.csv"));
    let mut out = String::new();
    out.push_str(&format!(
        "# t={} n={} r_min={} r_max={}\n",
        field.time,
        problem.dim,
        field.grid.r_min,
        field.grid.r_max()
    ));
    out.push_str("r,U\n");
    for (j, v) in field.values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", field.grid.r(j), v));
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Value table in long format: `r,t,U` rows for every retained slice.
pub fn write_value_table(dir: &Path, table: &ValueTable) -> Result<PathBuf> {
    let path = dir.join("value.csv");
    let mut out = String::from("r,t,U\n");
    for (ti, t) in table.times.iter().enumerate() {
        for j in 0..table.grid.len {
            out.push_str(&format!("{},{},{}\n", table.grid.r(j), t, table.slices[ti][j]));
        }
    }
    fs::write(&path, out)?;
    Ok(path)
}

/// Limit profile as V.csv (r,V) plus v_G.csv (s,v_G).
pub fn write_limit_profile(dir: &Path, lp: &LimitProfile) -> Result<(PathBuf, PathBuf)> {
    let v_path = dir.join("V.csv");
    let mut out = String::from("r,V\n");
    for j in 0..lp.grid.len {
        out.push_str(&format!("{},{}\n", lp.grid.r(j), lp.v[j]));
    }
    fs::write(&v_path, out)?;

    let vg_path = dir.join("v_G.csv");
    let mut out = String::from("s,v_G\n");
    for (s, vg) in &lp.aubry_values {
        out.push_str(&format!("{s},{vg}\n"));
    }
    fs::write(&vg_path, out)?;
    Ok((v_path, vg_path))
}

/// Trajectory dump as `t,gamma` rows.
pub fn write_trajectory(path: &Path, times: &[f64], radii: &[f64]) -> Result<()> {
    let mut out = String::from("t,gamma\n");
    for (t, r) in times.iter().zip(radii.iter()) {
        out.push_str(&format!("{t},{r}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// A small gnuplot script plotting the listed two-column CSV files.
pub fn write_plot_script(dir: &Path, name: &str, files: &[&str], ylabel: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut out = String::new();
    out.push_str("set datafile separator ','\n");
    out.push_str("set key autotitle columnhead\n");
    out.push_str(&format!("set ylabel '{ylabel}'\n"));
    out.push_str("set xlabel 'r'\n");
    let plots: Vec<String> = files
        .iter()
        .map(|f| format!("'{f}' using 1:2 with lines"))
        .collect();
    out.push_str(&format!("plot {}\n", plots.join(", ")));
    out.push_str("pause -1\n");
    fs::write(&path, out)?;
    Ok(path)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub mode: String,
    pub config_file: String,
    pub config_sha256: String,
    pub versions: ManifestVersions,
    pub wall_time_s: f64,
    pub artifacts: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ManifestVersions {
    pub gcurve: &'static str,
    pub format: u32,
}

/// Persist the original config bytes and the manifest describing the run.
pub fn write_manifest(
    dir: &Path,
    mode: &str,
    config_bytes: &[u8],
    wall_time_s: f64,
    artifacts: &[PathBuf],
) -> Result<PathBuf> {
    fs::write(dir.join("config.json"), config_bytes)?;
    let manifest = Manifest {
        mode: mode.to_string(),
        config_file: "config.json".into(),
        config_sha256: sha256_hex(config_bytes),
        versions: ManifestVersions {
            gcurve: env!("CARGO_PKG_VERSION"),
            format: 1,
        },
        wall_time_s,
        artifacts: artifacts
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
    };
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok(path)
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Error {
        Error::Validation {
            field: "json".into(),
            message: e.to_string(),
        }
    }
}
