use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use latticehull::Estimate;
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const HEADER: &str = "body,functional,lambda,estimator,value,std_error,n_samples,n_dirs,seed,flags";

/// One CSV record. Empty optional fields are written as empty cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub body: String,
    pub functional: String,
    pub lambda: Option<f64>,
    pub estimator: String,
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub n_dirs: Option<usize>,
    pub seed: u64,
    pub flags: BTreeMap<String, u64>,
}

impl Row {
    pub fn from_estimate(body: &str, functional: &str, lambda: Option<f64>, estimator: &str, e: &Estimate) -> Self {
        Row {
            body: body.to_string(),
            functional: functional.to_string(),
            lambda,
            estimator: estimator.to_string(),
            value: e.value,
            std_error: e.std_error,
            n_samples: e.n_samples,
            n_dirs: None,
            seed: e.seed,
            flags: e.flags.clone(),
        }
    }

    pub fn with_dirs(mut self, n_dirs: usize) -> Self {
        self.n_dirs = Some(n_dirs);
        self
    }

    /// The record as a CSV line. Floats use the shortest representation that
    /// reads back to the same value; flags are `name=count` pairs joined by `;`.
    pub fn to_csv(&self) -> String {
        let opt_f = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let flags: Vec<String> = self.flags.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.body,
            self.functional,
            opt_f(self.lambda),
            self.estimator,
            self.value,
            self.std_error,
            self.n_samples,
            self.n_dirs.map(|n| n.to_string()).unwrap_or_default(),
            self.seed,
            flags.join(";")
        )
    }
}

/// Prints the header and rows to stdout and, with `out`, appends the rows to
/// that file (writing the header first if the file is new or empty).
pub fn emit(rows: &[Row], out: Option<&Path>) -> io::Result<()> {
    let mut text = String::new();
    for r in rows {
        text.push_str(&r.to_csv());
        text.push('\n');
    }
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    writeln!(lock, "{HEADER}")?;
    lock.write_all(text.as_bytes())?;
    lock.flush()?;
    if let Some(path) = out {
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(f, "{HEADER}")?;
        }
        f.write_all(text.as_bytes())?;
    }
    Ok(())
}

/// Reproducibility record written next to every output file.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, C: Serialize> {
    pub command: &'a str,
    pub config: &'a C,
    /// SHA-256 of the config's JSON form.
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: &'static str,
    pub threads: usize,
    pub duration_secs: f64,
    pub flags: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

pub fn config_hash<C: Serialize>(config: &C) -> String {
    let json = serde_json::to_vec(config).expect("configs serialize");
    Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write_manifest<C: Serialize>(out: &Path, manifest: &RunManifest<'_, C>) -> io::Result<()> {
    let json = serde_json::to_string_pretty(manifest).map_err(io::Error::other)?;
    std::fs::write(manifest_path(out), json + "\n")
}

/// Sums flag counters across rows.
pub fn total_flags(rows: &[Row]) -> BTreeMap<String, u64> {
    let mut m = BTreeMap::new();
    for r in rows {
        for (k, v) in &r.flags {
            *m.entry(k.clone()).or_insert(0) += v;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_line_layout() {
        let mut flags = BTreeMap::new();
        flags.insert("empty_intersection".to_string(), 2);
        flags.insert("a".to_string(), 1);
        let e = Estimate { value: 0.25, std_error: 0.01, n_samples: 200, seed: 7, flags };
        let row = Row::from_estimate("disk", "width", Some(8.0), "direct", &e).with_dirs(1024);
        assert_eq!(row.to_csv(), "disk,width,8,direct,0.25,0.01,200,1024,7,a=1;empty_intersection=2");
        assert_eq!(row.to_csv().split(',').count(), HEADER.split(',').count());
        let bare = Row::from_estimate("square", "tau", None, "grid", &Estimate::exact(2.0, 0));
        assert_eq!(bare.to_csv(), "square,tau,,grid,2,0,0,,0,");
    }

    #[test]
    fn hash_is_stable() {
        #[derive(Serialize)]
        struct C {
            a: u32,
        }
        assert_eq!(config_hash(&C { a: 1 }), config_hash(&C { a: 1 }));
        assert_ne!(config_hash(&C { a: 1 }), config_hash(&C { a: 2 }));
        assert_eq!(config_hash(&C { a: 1 }).len(), 64);
    }

    #[test]
    fn manifest_sits_next_to_output() {
        assert_eq!(manifest_path(Path::new("runs/a.csv")), PathBuf::from("runs/a.csv.manifest.json"));
    }
}
