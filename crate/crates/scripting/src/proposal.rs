//! Tool-call payloads and their conversion to valid specs.

use gad_access::{AnimationSpec, DatasetDescriptor, TimeRange};
use gad_core::VoxelBox;
use serde::{Deserialize, Serialize};

use crate::context::MIN_QUALITY;

/// Spec fields as a model sends them: signed and unchecked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSpec {
    #[serde(rename = "box")]
    pub region: [[i64; 3]; 2],
    pub time: [i64; 3],
    pub quality: i64,
    pub field: String,
    #[serde(default)]
    pub streamlines: bool,
}

impl From<&AnimationSpec> for RawSpec {
    fn from(s: &AnimationSpec) -> Self {
        Self {
            region: [s.region.min.map(i64::from), s.region.max.map(i64::from)],
            time: [s.time.start, s.time.end, s.time.step].map(i64::from),
            quality: s.quality as i64,
            field: s.field.clone(),
            streamlines: s.streamlines,
        }
    }
}

impl RawSpec {
    /// Nearest valid spec for `d`, plus a note per adjusted value.
    pub fn clamp(&self, d: &DatasetDescriptor) -> (AnimationSpec, Vec<String>) {
        let mut notes = Vec::new();
        let mut note = |what: &str, from: String, to: String| {
            if from != to {
                notes.push(format!("{what} {from} clamped to {to}"));
            }
        };
        let mut lo = [0u32; 3];
        let mut hi = [0u32; 3];
        for a in 0..3 {
            let n = d.base_dims[a] as i64;
            let l = self.region[0][a].clamp(0, n - 1);
            let h = self.region[1][a].clamp(l + 1, n);
            note(&format!("box axis {a}"), format!("{:?}", [self.region[0][a], self.region[1][a]]), format!("{:?}", [l, h]));
            lo[a] = l as u32;
            hi[a] = h as u32;
        }
        let last = d.timestep_count.saturating_sub(1) as i64;
        let t1 = self.time[0].clamp(0, last);
        let t2 = self.time[1].clamp(t1, last);
        let step = self.time[2].clamp(1, (last + 1).max(1));
        note("time", format!("{:?}", self.time), format!("{:?}", [t1, t2, step]));
        let q = self.quality.clamp(MIN_QUALITY as i64, 0);
        note("quality", self.quality.to_string(), q.to_string());
        let field = if d.field(&self.field).is_some() {
            self.field.clone()
        } else {
            let f = d.fields.first().map(|f| f.name.clone()).unwrap_or_default();
            note("field", self.field.clone(), f.clone());
            f
        };
        let spec = AnimationSpec {
            dataset: d.name.clone(),
            region: VoxelBox::new(lo, hi),
            time: TimeRange::new(t1 as u32, t2 as u32, step as u32),
            quality: q as i32,
            field,
            streamlines: self.streamlines,
        };
        (spec, notes)
    }
}

/// Arguments of the propose tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProposalArgs {
    #[serde(flatten)]
    pub spec: RawSpec,
    #[serde(default)]
    pub rationale: String,
    #[serde(default)]
    pub confidence: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecProposal {
    pub spec: AnimationSpec,
    pub rationale: String,
    /// In `[0, 1]`.
    pub confidence: f64,
    /// True when any proposed value was out of bounds.
    pub clamped: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clamp_notes: Vec<String>,
}

impl SpecProposal {
    pub fn from_args(args: &ProposalArgs, d: &DatasetDescriptor) -> Self {
        let (spec, notes) = args.spec.clamp(d);
        let confidence = args.confidence.filter(|c| c.is_finite()).unwrap_or(0.5).clamp(0.0, 1.0);
        Self {
            spec,
            rationale: args.rationale.clone(),
            confidence,
            clamped: !notes.is_empty(),
            clamp_notes: notes,
        }
    }
}

/// Changed spec fields only.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpecDelta {
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub region: Option<[[i64; 3]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<[i64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub streamlines: Option<bool>,
}

impl SpecDelta {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    /// `spec` with the deltas applied, clamped to `d` so the result is
    /// always valid.
    pub fn apply(&self, spec: &AnimationSpec, d: &DatasetDescriptor) -> (AnimationSpec, Vec<String>) {
        let mut raw = RawSpec::from(spec);
        if let Some(b) = self.region {
            raw.region = b;
        }
        if let Some(t) = self.time {
            raw.time = t;
        }
        if let Some(q) = self.quality {
            raw.quality = q;
        }
        if let Some(f) = &self.field {
            raw.field = f.clone();
        }
        if let Some(s) = self.streamlines {
            raw.streamlines = s;
        }
        raw.clamp(d)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Critique {
    pub suggested_deltas: SpecDelta,
    #[serde(default)]
    pub commentary: String,
}
