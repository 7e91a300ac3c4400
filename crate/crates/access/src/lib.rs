//! Remote access to time-varying volume datasets.
//!
//! A [`server`] publishes synthetic datasets over HTTP, a [`DatasetClient`]
//! fetches region/quality/timestep blocks from it with retries, and
//! [`materialize`] turns an [`AnimationSpec`] into a cached GAD bundle keyed
//! by its [`AnimationId`].

pub mod cache;
mod client;
mod dataset;
mod materialize;
pub mod server;
mod spec;

use std::path::PathBuf;

pub use cache::{AnimationCache, CacheEntry, CacheIndex, CachedFile};
pub use client::{BlockRequest, DatasetClient, RetryPolicy};
pub use dataset::{Catalog, DatasetDescriptor, FieldInfo, SyntheticDataset, VELOCITY_COMPONENTS};
pub use materialize::{
    default_camera, default_transfer_function, materialize, MaterializeOptions, Materialized,
    DEFAULT_CONCURRENCY, VELOCITY_FIELD,
};
pub use server::{spawn_dataset_server, ServerHandle};
pub use spec::{AnimationId, AnimationSpec, IdParts, SpecError, TimeRange, DEFAULT_DATASET};

#[derive(Debug, thiserror::Error)]
pub enum AccessError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("bad request: {0}")]
    BadRequest(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error(transparent)]
    Gad(#[from] gad_core::gad::GadError),
    #[error("i/o failure on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AccessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }
}
