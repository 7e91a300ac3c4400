//! Dataset descriptors and the synthetic catalog served by the dataset
//! server.

use std::collections::BTreeMap;
use std::sync::Arc;

use gad_core::volume::{extract_roi, GridMeta, SyntheticKind, SyntheticSource, VolumeBlock, VolumeError};
use gad_core::VoxelBox;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub name: String,
    pub channels: u8,
    pub value_range: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDescriptor {
    pub name: String,
    pub fields: Vec<FieldInfo>,
    pub base_dims: [u32; 3],
    pub timestep_count: u32,
    pub timestep_stride_hours: f64,
}

impl DatasetDescriptor {
    pub fn field(&self, name: &str) -> Option<&FieldInfo> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn dims_usize(&self) -> [usize; 3] {
        self.base_dims.map(|d| d as usize)
    }

    pub fn full_box(&self) -> VoxelBox {
        VoxelBox::full(self.dims_usize())
    }
}

/// Velocity components a streamline animation needs, in channel order.
pub const VELOCITY_COMPONENTS: [&str; 3] = ["u", "v", "w"];

/// A dataset whose fields are analytic functions of position and time.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    descriptor: DatasetDescriptor,
    sources: BTreeMap<String, SyntheticSource>,
}

impl SyntheticDataset {
    /// Ocean-like dataset: `temperature` (rotating eddy), `salinity`, and
    /// the velocity components `u`, `v`, `w` of a vortex.
    pub fn ocean(name: impl Into<String>, dims: [usize; 3], timesteps: u32, stride_hours: f64) -> Self {
        let base = GridMeta::new("", dims, 1).with_timesteps(timesteps, stride_hours);
        let meta = |field: &str| {
            let mut m = base.clone();
            m.field_name = field.to_string();
            m
        };
        let mut sources = BTreeMap::new();
        let mut fields = Vec::new();
        let scalar = [
            ("temperature", SyntheticKind::RotatingEddyScalar, "potential temperature, deg C"),
            ("salinity", SyntheticKind::BasinSalinityScalar, "practical salinity, PSU"),
        ];
        for (field, kind, desc) in scalar {
            sources.insert(field.to_string(), SyntheticSource::new(kind, meta(field)));
            fields.push(FieldInfo {
                name: field.to_string(),
                channels: 1,
                value_range: kind.value_range(dims),
                description: Some(desc.to_string()),
            });
        }
        let speed = SyntheticKind::VortexVelocity.value_range(dims)[1];
        let (cx, cy) = ((dims[0] / 2) as f64, (dims[1] / 2) as f64);
        let ranges = [
            [-(dims[1] as f64 - 1.0 - cy), cy],
            [-cx, dims[0] as f64 - 1.0 - cx],
            [-1.0, 1.0],
        ];
        for (c, field) in VELOCITY_COMPONENTS.iter().enumerate() {
            sources.insert(
                field.to_string(),
                SyntheticSource::component(SyntheticKind::VortexVelocity, meta(field), c),
            );
            fields.push(FieldInfo {
                name: field.to_string(),
                channels: 1,
                value_range: ranges[c],
                description: Some(format!("velocity component {c}, max speed {speed:.3}")),
            });
        }
        Self {
            descriptor: DatasetDescriptor {
                name: name.into(),
                fields,
                base_dims: dims.map(|d| d as u32),
                timestep_count: timesteps,
                timestep_stride_hours: stride_hours,
            },
            sources,
        }
    }

    /// Desk-scale default: 128 × 128 × 32 voxels, 96 daily timesteps.
    pub fn mini_ocean() -> Self {
        Self::ocean("mini-ocean", [128, 128, 32], 96, 24.0)
    }

    pub fn descriptor(&self) -> &DatasetDescriptor {
        &self.descriptor
    }

    pub fn name(&self) -> &str {
        &self.descriptor.name
    }

    /// The block a server would return: `region` of `field` at timestep `t`,
    /// downsampled to quality `q`.
    pub fn extract(&self, field: &str, region: &VoxelBox, q: i32, t: u32) -> Result<Option<VolumeBlock>, VolumeError> {
        match self.sources.get(field) {
            Some(src) => extract_roi(src, region, q, t).map(Some),
            None => Ok(None),
        }
    }
}

/// Named datasets, shared read-only by server handlers.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    datasets: BTreeMap<String, Arc<SyntheticDataset>>,
}

impl Catalog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, ds: SyntheticDataset) -> Self {
        self.insert(ds);
        self
    }

    pub fn insert(&mut self, ds: SyntheticDataset) {
        self.datasets.insert(ds.name().to_string(), Arc::new(ds));
    }

    pub fn get(&self, name: &str) -> Option<Arc<SyntheticDataset>> {
        self.datasets.get(name).cloned()
    }

    pub fn descriptors(&self) -> Vec<DatasetDescriptor> {
        self.datasets.values().map(|d| d.descriptor.clone()).collect()
    }
}

impl Default for SyntheticDataset {
    fn default() -> Self {
        Self::mini_ocean()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mini_ocean_shape() {
        let ds = SyntheticDataset::mini_ocean();
        let d = ds.descriptor();
        assert_eq!(d.base_dims, [128, 128, 32]);
        assert_eq!(d.timestep_count, 96);
        let names: Vec<_> = d.fields.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["temperature", "salinity", "u", "v", "w"]);
    }

    #[test]
    fn component_ranges_hold() {
        let ds = SyntheticDataset::ocean("t", [12, 10, 3], 4, 24.0);
        for f in ["u", "v", "w"] {
            let b = ds.extract(f, &ds.descriptor().full_box(), 0, 1).unwrap().unwrap();
            let (lo, hi) = b.min_max().unwrap();
            let r = ds.descriptor().field(f).unwrap().value_range;
            assert!(lo >= r[0] && hi <= r[1], "{f}: [{lo}, {hi}] vs {r:?}");
        }
        assert!(ds.extract("nope", &ds.descriptor().full_box(), 0, 0).unwrap().is_none());
    }
}
