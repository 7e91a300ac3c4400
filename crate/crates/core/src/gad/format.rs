//! On-disk encoding: UTF-8 JSON documents with stable key order and reals
//! rounded to 9 significant digits, so equal documents give equal bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::model::{DataEntry, Extra, GadDocument, GadHeader, Keyframe};
use super::validate::{validate_gad, Severity};
use super::GadError;
use crate::geom::Vec3;

pub const HEADER_FILE: &str = "header.gad.json";
pub const DATA_LIST_FILE: &str = "datalist.gad.json";
pub const FORMAT_VERSION: &str = "1.0";

/// Rounds to 9 significant decimal digits. Non-finite values pass through.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

pub fn sig9_pair(v: [f64; 2]) -> [f64; 2] {
    [sig9(v[0]), sig9(v[1])]
}

pub fn sig9_vec(v: Vec3) -> Vec3 {
    [sig9(v[0]), sig9(v[1]), sig9(v[2])]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DataListFile {
    #[serde(rename = "data")]
    entries: Vec<DataEntry>,
    #[serde(flatten)]
    extra: Extra,
}

/// Loads the header, data list and every keyframe under `root` and checks
/// the result against all document invariants.
pub fn parse_gad(root: impl AsRef<Path>) -> Result<GadDocument, GadError> {
    let doc = read_gad(root)?;
    let mut errors = validate_gad(&doc)
        .into_iter()
        .filter(|d| d.severity == Severity::Error);
    if let Some(first) = errors.next() {
        return Err(if first.code.is_integrity() {
            GadError::IntegrityViolation {
                path: first.path,
                message: first.message,
            }
        } else {
            GadError::SchemaViolation {
                path: first.path,
                message: first.message,
            }
        });
    }
    Ok(doc)
}

/// Loads the documents under `root` without checking invariants beyond
/// the schema, so that [`validate_gad`] can report on all of them.
pub fn read_gad(root: impl AsRef<Path>) -> Result<GadDocument, GadError> {
    let root = root.as_ref();
    let header: GadHeader = read_document(root, HEADER_FILE)?;
    let data_list: DataListFile = read_document(root, &header.data_list_ref)?;
    let keyframes = header
        .keyframe_refs
        .iter()
        .map(|r| read_document::<Keyframe>(root, r))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(GadDocument {
        header,
        data_list: data_list.entries,
        data_list_extra: data_list.extra,
        keyframes,
    })
}

fn read_document<T: DeserializeOwned>(root: &Path, rel: &str) -> Result<T, GadError> {
    let path = root.join(rel);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(GadError::MissingFile(path))
        }
        Err(e) => return Err(GadError::io(path, e)),
    };
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let inner = e.path().to_string();
        GadError::SchemaViolation {
            path: if inner == "." {
                rel.to_string()
            } else {
                format!("{rel}:{inner}")
            },
            message: e.into_inner().to_string(),
        }
    })
}

/// The document as it reads back after [`serialize_gad`]: every real
/// rounded to 9 significant digits.
pub fn canonicalize(doc: &GadDocument) -> GadDocument {
    fn through<T: Serialize + DeserializeOwned>(v: &T) -> T {
        serde_json::to_value(v)
            .and_then(serde_json::from_value)
            .expect("document values are plain data")
    }
    GadDocument {
        header: doc.header.clone(),
        data_list: through(&doc.data_list),
        data_list_extra: doc.data_list_extra.clone(),
        keyframes: through(&doc.keyframes),
    }
}

/// Renders one document exactly as [`serialize_gad`] writes it.
pub fn to_canonical_string<T: Serialize>(value: &T) -> String {
    // Serializing plain data structs into a String cannot fail.
    let mut s = serde_json::to_string_pretty(value).expect("document serializes");
    s.push('\n');
    s
}

/// Writes the header, the data list and one document per keyframe under
/// `root`, returning the written paths in that order.
pub fn serialize_gad(doc: &GadDocument, root: impl AsRef<Path>) -> Result<Vec<PathBuf>, GadError> {
    let root = root.as_ref();
    let errors: Vec<_> = validate_gad(doc)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(GadError::InvalidDocument(errors));
    }

    let mut written = Vec::with_capacity(doc.keyframes.len() + 2);
    written.push(write_document(root, HEADER_FILE, &doc.header)?);
    let data_list = DataListFile {
        entries: doc.data_list.clone(),
        extra: doc.data_list_extra.clone(),
    };
    written.push(write_document(root, &doc.header.data_list_ref, &data_list)?);
    for (kf, rel) in doc.keyframes.iter().zip(&doc.header.keyframe_refs) {
        written.push(write_document(root, rel, kf)?);
    }
    Ok(written)
}

fn write_document<T: Serialize>(root: &Path, rel: &str, value: &T) -> Result<PathBuf, GadError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| GadError::io(parent, e))?;
    }
    fs::write(&path, to_canonical_string(value)).map_err(|e| GadError::io(&path, e))?;
    Ok(path)
}
