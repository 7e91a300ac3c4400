use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::format::{sig9, sig9_pair, sig9_vec};
use crate::geom::{ClipBox, Vec3, VoxelBox};

/// Fields a reader did not recognize. Kept so that documents written by
/// newer tools survive a parse/serialize cycle unchanged.
pub type Extra = BTreeMap<String, serde_json::Value>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GadHeader {
    pub version: String,
    #[serde(rename = "data_list")]
    pub data_list_ref: String,
    #[serde(rename = "keyframes")]
    pub keyframe_refs: Vec<String>,
    #[serde(flatten)]
    pub extra: Extra,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    /// Regular gridded scalar data rendered as a volume.
    Structured,
    /// Three-component vector grid rendered as integral curves.
    Streamline,
}

impl DataType {
    pub fn expected_channels(self) -> u8 {
        match self {
            DataType::Structured => 1,
            DataType::Streamline => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataEntry {
    pub id: usize,
    pub path: String,
    pub dims: [u32; 3],
    pub channels: u8,
    pub data_type: DataType,
    #[serde(rename = "field")]
    pub field_name: String,
    #[serde(rename = "range", serialize_with = "ser_pair")]
    pub value_range: [f64; 2],
    #[serde(flatten)]
    pub extra: Extra,
}

impl DataEntry {
    pub fn dims_usize(&self) -> [usize; 3] {
        [
            self.dims[0] as usize,
            self.dims[1] as usize,
            self.dims[2] as usize,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    #[serde(rename = "pos", serialize_with = "ser_vec")]
    pub position: Vec3,
    #[serde(rename = "dir", serialize_with = "ser_vec")]
    pub direction: Vec3,
    #[serde(serialize_with = "ser_vec")]
    pub up: Vec3,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Camera {
    pub fn new(position: Vec3, direction: Vec3, up: Vec3) -> Self {
        Self {
            position,
            direction,
            up,
            extra: Extra::new(),
        }
    }

    /// Camera at `position` looking at `target`.
    pub fn look_at(position: Vec3, target: Vec3, up: Vec3) -> Option<Self> {
        let dir = crate::geom::normalize(crate::geom::sub(target, position))?;
        let up = crate::geom::normalize(up)?;
        Some(Self::new(position, dir, up))
    }
}

/// One transfer-function control point: `[value, [r, g, b], opacity]` on the wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlPoint {
    pub value: f64,
    pub color: [f64; 3],
    pub opacity: f64,
}

impl ControlPoint {
    pub fn new(value: f64, color: [f64; 3], opacity: f64) -> Self {
        Self {
            value,
            color,
            opacity,
        }
    }
}

impl Serialize for ControlPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        (sig9(self.value), sig9_vec(self.color), sig9(self.opacity)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ControlPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (value, color, opacity) = <(f64, [f64; 3], f64)>::deserialize(d)?;
        Ok(Self {
            value,
            color,
            opacity,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFunction {
    #[serde(serialize_with = "ser_pair")]
    pub domain: [f64; 2],
    #[serde(rename = "points")]
    pub control_points: Vec<ControlPoint>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl TransferFunction {
    pub fn new(domain: [f64; 2], control_points: Vec<ControlPoint>) -> Self {
        Self {
            domain,
            control_points,
            extra: Extra::new(),
        }
    }

    /// Grey ramp over `domain`, transparent at the low end.
    pub fn grayscale_ramp(domain: [f64; 2], max_opacity: f64) -> Self {
        let mid = 0.5 * (domain[0] + domain[1]);
        Self::new(
            domain,
            vec![
                ControlPoint::new(domain[0], [0.1, 0.1, 0.1], 0.0),
                ControlPoint::new(mid, [0.5, 0.5, 0.5], 0.25 * max_opacity),
                ControlPoint::new(domain[1], [1.0, 1.0, 1.0], max_opacity),
            ],
        )
    }

    /// Same color and opacity over the whole domain.
    pub fn constant(domain: [f64; 2], color: [f64; 3], opacity: f64) -> Self {
        Self::new(
            domain,
            vec![
                ControlPoint::new(domain[0], color, opacity),
                ControlPoint::new(domain[1], color, opacity),
            ],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Reserved in the format so spline easing can be added later.
    #[default]
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamlineParams {
    pub seed_density: u32,
    #[serde(serialize_with = "ser_f64")]
    pub step_size: f64,
    pub max_steps: u32,
}

impl Default for StreamlineParams {
    fn default() -> Self {
        Self {
            seed_density: 6,
            step_size: 0.01,
            max_steps: 120,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDataBinding {
    #[serde(rename = "data")]
    pub data_index: usize,
    #[serde(rename = "tf")]
    pub transfer_function: TransferFunction,
    #[serde(rename = "clip", default)]
    pub clip_box: Option<ClipBox>,
    #[serde(default)]
    pub interp: Interpolation,
    #[serde(
        rename = "streamline",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub streamline_params: Option<StreamlineParams>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl SceneDataBinding {
    pub fn volume(data_index: usize, transfer_function: TransferFunction) -> Self {
        Self {
            data_index,
            transfer_function,
            clip_box: None,
            interp: Interpolation::Linear,
            streamline_params: None,
            extra: Extra::new(),
        }
    }

    pub fn streamlines(
        data_index: usize,
        transfer_function: TransferFunction,
        params: StreamlineParams,
    ) -> Self {
        Self {
            streamline_params: Some(params),
            ..Self::volume(data_index, transfer_function)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Keyframe {
    #[serde(rename = "frames")]
    pub frame_range: [u32; 2],
    #[serde(rename = "bbox")]
    pub bounding_box: VoxelBox,
    /// Camera at `frame_range[0]`.
    pub camera: Camera,
    #[serde(rename = "cameras", default, skip_serializing_if = "Option::is_none")]
    pub per_frame_cameras: Option<Vec<Camera>>,
    #[serde(rename = "scene")]
    pub scene_data: Vec<SceneDataBinding>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Keyframe {
    pub fn frame_count(&self) -> u32 {
        self.frame_range[1].saturating_sub(self.frame_range[0]) + 1
    }

    /// Camera in effect at `frame`, which must lie in this keyframe's range.
    pub fn camera_at(&self, frame: u32) -> &Camera {
        match &self.per_frame_cameras {
            Some(cams) => {
                let i = frame.saturating_sub(self.frame_range[0]) as usize;
                cams.get(i).unwrap_or(&self.camera)
            }
            None => &self.camera,
        }
    }

    pub fn first_camera(&self) -> &Camera {
        self.camera_at(self.frame_range[0])
    }

    pub fn last_camera(&self) -> &Camera {
        self.camera_at(self.frame_range[1])
    }
}

/// The three documents of one animation, loaded together.
#[derive(Debug, Clone, PartialEq)]
pub struct GadDocument {
    pub header: GadHeader,
    pub data_list: Vec<DataEntry>,
    /// Unrecognized top-level fields of the data list document.
    pub data_list_extra: Extra,
    pub keyframes: Vec<Keyframe>,
}

impl GadDocument {
    /// Builds a document with a conventional header (`kf_00000.gad.json`, ...).
    pub fn new(data_list: Vec<DataEntry>, keyframes: Vec<Keyframe>) -> Self {
        let header = GadHeader {
            version: super::format::FORMAT_VERSION.to_string(),
            data_list_ref: super::format::DATA_LIST_FILE.to_string(),
            keyframe_refs: (0..keyframes.len()).map(super::keyframe_file_name).collect(),
            extra: Extra::new(),
        };
        Self {
            header,
            data_list,
            data_list_extra: Extra::new(),
            keyframes,
        }
    }

    pub fn canonicalized(&self) -> Self {
        super::format::canonicalize(self)
    }

    /// Total number of frames spanned, first keyframe start to last keyframe end.
    pub fn frame_span(&self) -> Option<(u32, u32)> {
        let first = self.keyframes.first()?;
        let last = self.keyframes.last()?;
        Some((first.frame_range[0], last.frame_range[1]))
    }
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    sig9(*v).serialize(s)
}

fn ser_pair<S: Serializer>(v: &[f64; 2], s: S) -> Result<S::Ok, S::Error> {
    sig9_pair(*v).serialize(s)
}

fn ser_vec<S: Serializer>(v: &Vec3, s: S) -> Result<S::Ok, S::Error> {
    sig9_vec(*v).serialize(s)
}
