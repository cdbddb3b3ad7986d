//! Plain-text dataset directories.
//!
//! A dataset directory holds five files:
//!
//! * `edges.csv`: one `u,v` pair per line; direction is ignored
//! * `features.csv`: `N` rows of `d` comma-separated reals
//! * `labels.csv`: `N` lines, one class id each
//! * `split.csv`: `N` lines of `train`, `val` or `test`
//! * `meta.json`: `{"schema_version", "num_nodes", "num_features", "num_classes"}`
//!
//! Blank lines and lines starting with `#` are ignored. Reals are written with
//! Rust's shortest round-trip formatting, so a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::{Graph, Split};

pub const DATASET_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema_version: u32,
    pub num_nodes: usize,
    pub num_features: usize,
    pub num_classes: usize,
}

/// How to read a dataset directory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetFormat {
    pub delimiter: char,
    /// L1-normalize feature rows after loading.
    pub row_normalize: bool,
}

impl Default for DatasetFormat {
    fn default() -> Self {
        Self {
            delimiter: ',',
            row_normalize: false,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Non-empty, non-comment lines with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    field
        .trim()
        .parse()
        .map_err(|e: T::Err| parse_err(path, line, format!("cannot parse `{}`: {e}", field.trim())))
}

pub fn load_dataset(dir: impl AsRef<Path>, format: &DatasetFormat) -> Result<Graph> {
    let dir = dir.as_ref();
    let meta_path = dir.join("meta.json");
    let meta: DatasetMeta = serde_json::from_str(&read(&meta_path)?)
        .map_err(|e| parse_err(&meta_path, e.line(), e.to_string()))?;
    if meta.schema_version != DATASET_SCHEMA_VERSION {
        return Err(Error::Validation(format!(
            "{}: unsupported schema version {}",
            meta_path.display(),
            meta.schema_version
        )));
    }
    let n = meta.num_nodes;
    let d = meta.num_features;

    let edges_path = dir.join("edges.csv");
    let mut edges = Vec::new();
    for (line, text) in data_lines(&read(&edges_path)?) {
        let fields: Vec<&str> = text.split(format.delimiter).collect();
        if fields.len() != 2 {
            return Err(parse_err(
                &edges_path,
                line,
                format!("expected 2 columns, found {}", fields.len()),
            ));
        }
        let u: usize = parse_field(&edges_path, line, fields[0])?;
        let v: usize = parse_field(&edges_path, line, fields[1])?;
        if u >= n || v >= n {
            return Err(Error::Validation(format!(
                "{}:{line}: edge ({u}, {v}) references a node outside [0, {n})",
                edges_path.display()
            )));
        }
        edges.push((u, v));
    }

    let features_path = dir.join("features.csv");
    let mut values = Vec::with_capacity(n * d);
    let mut rows = 0;
    for (line, text) in data_lines(&read(&features_path)?) {
        let before = values.len();
        for field in text.split(format.delimiter) {
            values.push(parse_field::<f64>(&features_path, line, field)?);
        }
        if values.len() - before != d {
            return Err(parse_err(
                &features_path,
                line,
                format!("expected {d} columns, found {}", values.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Validation(format!(
            "{}: {rows} rows for {n} nodes",
            features_path.display()
        )));
    }
    let features = Matrix::from_row_slice(n, d, &values);

    let labels_path = dir.join("labels.csv");
    let mut labels = Vec::with_capacity(n);
    for (line, text) in data_lines(&read(&labels_path)?) {
        let label: usize = parse_field(&labels_path, line, text)?;
        if label >= meta.num_classes {
            return Err(Error::Validation(format!(
                "{}:{line}: label {label} outside [0, {})",
                labels_path.display(),
                meta.num_classes
            )));
        }
        labels.push(label);
    }

    let split_path = dir.join("split.csv");
    let mut splits = Vec::with_capacity(n);
    for (line, text) in data_lines(&read(&split_path)?) {
        splits.push(
            text.parse::<Split>()
                .map_err(|e| parse_err(&split_path, line, e))?,
        );
    }

    let mut graph = Graph::new(n, edges, features, labels, meta.num_classes, splits)?;
    if format.row_normalize {
        graph.row_normalize_features();
    }
    Ok(graph)
}

/// Writes `graph` in the directory format read by [`load_dataset`].
pub fn save_dataset(graph: &Graph, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut edges = String::new();
    for (u, v) in graph.edges() {
        writeln!(edges, "{u},{v}").unwrap();
    }

    let mut features = String::new();
    for row in graph.features().row_iter() {
        let mut first = true;
        for v in row.iter() {
            if !first {
                features.push(',');
            }
            first = false;
            write!(features, "{v:?}").unwrap();
        }
        features.push('\n');
    }

    let mut labels = String::new();
    for l in graph.labels() {
        writeln!(labels, "{l}").unwrap();
    }

    let mut splits = String::new();
    for s in graph.splits() {
        writeln!(splits, "{s}").unwrap();
    }

    let meta = DatasetMeta {
        schema_version: DATASET_SCHEMA_VERSION,
        num_nodes: graph.num_nodes(),
        num_features: graph.num_features(),
        num_classes: graph.num_classes(),
    };
    let mut meta_text = serde_json::to_string_pretty(&meta).expect("meta serializes");
    meta_text.push('\n');

    let files = [
        ("meta.json", meta_text),
        ("edges.csv", edges),
        ("features.csv", features),
        ("labels.csv", labels),
        ("split.csv", splits),
    ];
    let mut written = Vec::new();
    for (name, content) in files {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
