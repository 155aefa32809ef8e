//! JSON file formats and report encoding.
//!
//! Bodies are stored as raw rays and matrices as row-major arrays. Reports
//! are `serde_json` values with sorted keys; floats use the shortest
//! representation that parses back to the same double.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::body::{make_body, ConvexBody};
use crate::error::{Error, Result};
use crate::map::ProjectiveMap;
use crate::renorm::{LabeledMap, MarkedPair};

pub const SCHEMA_VERSION: &str = "1";

pub fn report_schema_version() -> &'static str {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFile {
    pub n: usize,
    pub kind: String,
    pub rays: Vec<Vec<f64>>,
}

impl BodyFile {
    pub fn from_body(body: &ConvexBody) -> Self {
        BodyFile {
            n: body.n(),
            kind: "vpolytope".into(),
            rays: body.rays().iter().map(|r| r.coords().iter().copied().collect()).collect(),
        }
    }

    pub fn to_body(&self) -> Result<ConvexBody> {
        if self.kind != "vpolytope" {
            return Err(Error::Validation(format!("unsupported body kind `{}`", self.kind)));
        }
        let rays = self
            .rays
            .iter()
            .map(|r| {
                if r.len() != self.n + 1 {
                    return Err(Error::DimensionMismatch { expected: self.n + 1, got: r.len() });
                }
                Ok(DVector::from_column_slice(r))
            })
            .collect::<Result<Vec<_>>>()?;
        make_body(self.n, &rays)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub n: usize,
    pub labels: Vec<String>,
    pub matrices: Vec<Vec<f64>>,
}

impl GeneratorFile {
    pub fn from_maps(n: usize, maps: &[LabeledMap]) -> Self {
        GeneratorFile {
            n,
            labels: maps.iter().map(|g| g.label.clone()).collect(),
            matrices: maps.iter().map(|g| row_major(g.map.matrix())).collect(),
        }
    }

    pub fn to_maps(&self) -> Result<Vec<LabeledMap>> {
        if self.labels.len() != self.matrices.len() {
            return Err(Error::Validation(format!(
                "{} labels for {} matrices",
                self.labels.len(),
                self.matrices.len()
            )));
        }
        self.labels
            .iter()
            .zip(&self.matrices)
            .map(|(label, m)| Ok(LabeledMap { label: label.clone(), map: ProjectiveMap::from_row_slice(self.n + 1, m)? }))
            .collect()
    }
}

/// Inline generators or a path relative to the sequence file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GeneratorSource {
    Inline(GeneratorFile),
    Path(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceItem {
    pub body: BodyFile,
    pub generators: GeneratorSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub items: Vec<SequenceItem>,
}

impl SequenceFile {
    pub fn from_pairs(pairs: &[MarkedPair]) -> Self {
        SequenceFile {
            schema: Some(SCHEMA_VERSION.into()),
            items: pairs
                .iter()
                .map(|p| SequenceItem {
                    body: BodyFile::from_body(p.body()),
                    generators: GeneratorSource::Inline(GeneratorFile::from_maps(p.body().n(), p.generators())),
                })
                .collect(),
        }
    }

    /// Validated pairs; generator paths resolve against `base_dir`.
    pub fn to_pairs(&self, base_dir: &Path) -> Result<Vec<MarkedPair>> {
        self.items
            .iter()
            .map(|item| {
                let body = item.body.to_body()?;
                let gens = match &item.generators {
                    GeneratorSource::Inline(g) => g.clone(),
                    GeneratorSource::Path(p) => read_json::<GeneratorFile>(&base_dir.join(p))?,
                };
                if gens.n != body.n() {
                    return Err(Error::DimensionMismatch { expected: body.n(), got: gens.n });
                }
                MarkedPair::new(body, gens.to_maps()?)
            })
            .collect()
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

pub fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn vector(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Adds the schema field to a report object.
pub fn with_schema(mut report: Value) -> Value {
    if let Value::Object(map) = &mut report {
        map.insert("schema".into(), Value::String(SCHEMA_VERSION.into()));
    }
    report
}

pub fn error_report(e: &Error) -> Value {
    with_schema(json!({ "error": { "kind": e.kind(), "message": e.to_string() } }))
}

/// Serializes with a trailing newline.
pub fn render(value: &Value, pretty: bool) -> String {
    let mut s = if pretty {
        serde_json::to_string_pretty(value).expect("values serialize")
    } else {
        serde_json::to_string(value).expect("values serialize")
    };
    s.push('\n');
    s
}
