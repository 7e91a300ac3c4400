//! GAD bundles on the wire: every document of an animation keyed by its
//! path relative to the bundle root. Raw data blocks stay on the server.

use std::collections::BTreeMap;
use std::path::Path;

use gad_access::cache::link_or_copy;
use gad_core::gad::{
    format::to_canonical_string, validate_gad, DataEntry, Extra, GadDocument, GadHeader, Keyframe,
    Severity, HEADER_FILE,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::ApiError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadBundle {
    pub documents: BTreeMap<String, Value>,
}

impl GadBundle {
    pub fn from_document(doc: &GadDocument) -> Self {
        let mut documents = BTreeMap::new();
        documents.insert(HEADER_FILE.to_string(), value(&doc.header));
        let mut list = doc.data_list_extra.clone();
        list.insert("data".into(), serde_json::to_value(&doc.data_list).expect("data list serializes"));
        documents.insert(doc.header.data_list_ref.clone(), value(&list));
        for (kf, name) in doc.keyframes.iter().zip(&doc.header.keyframe_refs) {
            documents.insert(name.clone(), value(kf));
        }
        Self { documents }
    }

    /// Decodes and fully validates the bundle.
    pub fn to_document(&self) -> Result<GadDocument, ApiError> {
        let header: GadHeader = self.decode(HEADER_FILE)?;
        let mut list: Extra = self.decode(&header.data_list_ref)?;
        let entries = list
            .remove("data")
            .ok_or_else(|| invalid(format!("{}: missing field `data`", header.data_list_ref)))?;
        let data_list: Vec<DataEntry> = serde_json::from_value(entries)
            .map_err(|e| invalid(format!("{}:data: {e}", header.data_list_ref)))?;
        let keyframes = header
            .keyframe_refs
            .iter()
            .map(|r| self.decode::<Keyframe>(r))
            .collect::<Result<Vec<_>, _>>()?;
        let doc = GadDocument {
            header,
            data_list,
            data_list_extra: list,
            keyframes,
        };
        let errors: Vec<_> = validate_gad(&doc).into_iter().filter(|d| d.severity == Severity::Error).collect();
        if !errors.is_empty() {
            return Err(gad_core::gad::GadError::InvalidDocument(errors).into());
        }
        Ok(doc.canonicalized())
    }

    fn decode<T: serde::de::DeserializeOwned>(&self, name: &str) -> Result<T, ApiError> {
        let v = self
            .documents
            .get(name)
            .ok_or_else(|| invalid(format!("bundle lacks document {name:?}")))?;
        serde_json::from_value(v.clone()).map_err(|e| invalid(format!("{name}: {e}")))
    }
}

fn invalid(message: String) -> ApiError {
    ApiError::validation("invalid_gad", message)
}

/// Short content hash of a document in its on-disk encoding.
pub fn document_digest(doc: &GadDocument) -> String {
    let mut h = Sha256::new();
    for (name, v) in &GadBundle::from_document(doc).documents {
        h.update(name.as_bytes());
        h.update(to_canonical_string(v).as_bytes());
    }
    hex::encode(&h.finalize()[..6])
}

/// Hard-links (or copies) every data file of `doc` from `src` into `dst`.
/// Every referenced file must exist under `src`.
pub fn link_data(doc: &GadDocument, src: &Path, dst: &Path) -> Result<(), ApiError> {
    for (i, e) in doc.data_list.iter().enumerate() {
        let from = src.join(&e.path);
        if !from.is_file() {
            return Err(ApiError::validation(
                "unknown_data_path",
                format!("data[{i}].path {:?} is not part of the source animation", e.path),
            ));
        }
        let to = dst.join(&e.path);
        if !to.exists() {
            link_or_copy(&from, &to)?;
        }
    }
    Ok(())
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("document serializes")
}
