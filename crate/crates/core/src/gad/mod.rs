//! Generalized animation descriptor.
//!
//! An animation is described by three kinds of documents that live side by
//! side in one directory:
//!
//! * a header listing the data list and the keyframe files in order,
//! * a data list naming every raw block with its dims, channel count and
//!   value range,
//! * one document per keyframe holding the base layer (frame range,
//!   bounding box, camera) and the scene data bindings (transfer functions,
//!   clip boxes, streamline parameters) that index into the data list.
//!
//! Attributes interpolate between keyframes and hold inside a keyframe's own
//! frame range; see [`expand_keyframes`].

mod error;
mod expand;
pub mod format;
mod interp;
mod model;
mod validate;

pub use error::GadError;
pub use expand::{expand_keyframes, RenderState};
pub use format::{parse_gad, read_gad, serialize_gad, DATA_LIST_FILE, HEADER_FILE};
pub use interp::{eval_tf, interpolate_camera, interpolate_tf, Rgb};
pub use model::{
    Camera, ControlPoint, DataEntry, DataType, Extra, GadDocument, GadHeader, Interpolation,
    Keyframe, SceneDataBinding, StreamlineParams, TransferFunction,
};
pub use validate::{validate_gad, Diagnostic, DiagnosticCode, Severity};

/// File name used for the keyframe document at `index`.
pub fn keyframe_file_name(index: usize) -> String {
    format!("kf_{index:05}.gad.json")
}
