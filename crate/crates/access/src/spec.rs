use std::fmt;
use std::str::FromStr;

use gad_core::VoxelBox;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetDescriptor;

pub const DEFAULT_DATASET: &str = "mini-ocean";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpecError {
    #[error("box is empty along axis {0}")]
    EmptyBox(usize),
    #[error("time range starts at {start} after it ends at {end}")]
    InvertedTime { start: u32, end: u32 },
    #[error("time step must be at least 1")]
    ZeroStep,
    #[error("quality {0} is above 0")]
    PositiveQuality(i32),
    #[error("field name {0:?} is empty or contains characters outside [A-Za-z0-9_-]")]
    BadFieldName(String),
    #[error("dataset {dataset} has no field {field}")]
    UnknownField { dataset: String, field: String },
    #[error("box {region:?} exceeds dataset dims {dims:?}")]
    BoxOutOfBounds { region: VoxelBox, dims: [u32; 3] },
    #[error("timestep {t} beyond dataset range [0, {count})")]
    TimeOutOfRange { t: u32, count: u32 },
    #[error("malformed animation id {0:?}")]
    MalformedId(String),
}

/// Timesteps `start, start + step, ...` up to and including `end` when it
/// falls on the lattice. Serialized as `[start, end, step]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 3]", into = "[u32; 3]")]
pub struct TimeRange {
    pub start: u32,
    pub end: u32,
    pub step: u32,
}

impl TimeRange {
    pub fn new(start: u32, end: u32, step: u32) -> Self {
        Self { start, end, step }
    }

    pub fn timesteps(&self) -> Vec<u32> {
        if self.step == 0 || self.end < self.start {
            return Vec::new();
        }
        (self.start..=self.end).step_by(self.step as usize).collect()
    }

    /// `⌈(end − start + 1) / step⌉`.
    pub fn count(&self) -> usize {
        self.timesteps().len()
    }
}

impl From<[u32; 3]> for TimeRange {
    fn from([start, end, step]: [u32; 3]) -> Self {
        Self { start, end, step }
    }
}

impl From<TimeRange> for [u32; 3] {
    fn from(t: TimeRange) -> Self {
        [t.start, t.end, t.step]
    }
}

/// What to animate: region, time range, quality, field and whether to add
/// streamlines of the velocity field.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnimationSpec {
    #[serde(default = "default_dataset")]
    pub dataset: String,
    #[serde(rename = "box")]
    pub region: VoxelBox,
    pub time: TimeRange,
    pub quality: i32,
    pub field: String,
    #[serde(default)]
    pub streamlines: bool,
}

fn default_dataset() -> String {
    DEFAULT_DATASET.to_string()
}

fn valid_field_name(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

impl AnimationSpec {
    pub fn new(region: VoxelBox, time: TimeRange, quality: i32, field: impl Into<String>, streamlines: bool) -> Self {
        Self {
            dataset: default_dataset(),
            region,
            time,
            quality,
            field: field.into(),
            streamlines,
        }
    }

    pub fn with_dataset(mut self, dataset: impl Into<String>) -> Self {
        self.dataset = dataset.into();
        self
    }

    /// Checks the spec on its own, without a dataset.
    pub fn validate(&self) -> Result<(), SpecError> {
        for a in 0..3 {
            if self.region.min[a] >= self.region.max[a] {
                return Err(SpecError::EmptyBox(a));
            }
        }
        if self.time.start > self.time.end {
            return Err(SpecError::InvertedTime {
                start: self.time.start,
                end: self.time.end,
            });
        }
        if self.time.step == 0 {
            return Err(SpecError::ZeroStep);
        }
        if self.quality > 0 {
            return Err(SpecError::PositiveQuality(self.quality));
        }
        if !valid_field_name(&self.field) {
            return Err(SpecError::BadFieldName(self.field.clone()));
        }
        Ok(())
    }

    /// Checks the spec and that the field, box and time range exist in `d`.
    pub fn validate_against(&self, d: &DatasetDescriptor) -> Result<(), SpecError> {
        self.validate()?;
        if d.field(&self.field).is_none() {
            return Err(SpecError::UnknownField {
                dataset: d.name.clone(),
                field: self.field.clone(),
            });
        }
        if (0..3).any(|a| self.region.max[a] > d.base_dims[a]) {
            return Err(SpecError::BoxOutOfBounds {
                region: self.region,
                dims: d.base_dims,
            });
        }
        if self.time.end >= d.timestep_count {
            return Err(SpecError::TimeOutOfRange {
                t: self.time.end,
                count: d.timestep_count,
            });
        }
        Ok(())
    }

    pub fn id(&self) -> AnimationId {
        AnimationId::of(self)
    }
}

/// Cache key:
/// `animation_{x1-y1-z1}_{x2-y2-z2}_{t1-t2-step}_{q}_{field}_{true|false}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnimationId(String);

/// Everything an [`AnimationId`] encodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdParts {
    pub region: VoxelBox,
    pub time: TimeRange,
    pub quality: i32,
    pub field: String,
    pub streamlines: bool,
}

impl IdParts {
    pub fn into_spec(self, dataset: impl Into<String>) -> AnimationSpec {
        AnimationSpec {
            dataset: dataset.into(),
            region: self.region,
            time: self.time,
            quality: self.quality,
            field: self.field,
            streamlines: self.streamlines,
        }
    }
}

impl AnimationId {
    pub fn of(spec: &AnimationSpec) -> Self {
        let [x1, y1, z1] = spec.region.min;
        let [x2, y2, z2] = spec.region.max;
        let t = spec.time;
        Self(format!(
            "animation_{x1}-{y1}-{z1}_{x2}-{y2}-{z2}_{}-{}-{}_{}_{}_{}",
            t.start, t.end, t.step, spec.quality, spec.field, spec.streamlines
        ))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Recovers the encoded fields. The field name may itself contain
    /// underscores, so the fixed-width parts are read from both ends.
    pub fn parse(s: &str) -> Result<IdParts, SpecError> {
        let bad = || SpecError::MalformedId(s.to_string());
        let rest = s.strip_prefix("animation_").ok_or_else(bad)?;
        let mut head = rest.splitn(4, '_');
        let lo = head.next().ok_or_else(bad)?;
        let hi = head.next().ok_or_else(bad)?;
        let time = head.next().ok_or_else(bad)?;
        let tail = head.next().ok_or_else(bad)?;

        let (tail, flag) = tail.rsplit_once('_').ok_or_else(bad)?;
        let (q, field) = tail.split_once('_').ok_or_else(bad)?;
        let streamlines = match flag {
            "true" => true,
            "false" => false,
            _ => return Err(bad()),
        };
        let triple = |p: &str| -> Result<[u32; 3], SpecError> {
            let v: Vec<u32> = p
                .split('-')
                .map(|x| {
                    if x.is_empty() || !x.bytes().all(|b| b.is_ascii_digit()) {
                        return Err(bad());
                    }
                    x.parse().map_err(|_| bad())
                })
                .collect::<Result<_, _>>()?;
            v.try_into().map_err(|_| bad())
        };
        let [t1, t2, step] = triple(time)?;
        if !valid_field_name(field) {
            return Err(bad());
        }
        let quality: i32 = q.parse().map_err(|_| bad())?;
        let parts = IdParts {
            region: VoxelBox::new(triple(lo)?, triple(hi)?),
            time: TimeRange::new(t1, t2, step),
            quality,
            field: field.to_string(),
            streamlines,
        };
        // Only canonical spellings round-trip (no "+3", "-0", leading zeros).
        if AnimationId::of(&parts.clone().into_spec("")).0 != s {
            return Err(bad());
        }
        Ok(parts)
    }
}

impl fmt::Display for AnimationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for AnimationId {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AnimationId::parse(s)?;
        Ok(Self(s.to_string()))
    }
}

impl AsRef<str> for AnimationId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}
