use serde::Serialize;

use super::interp::{interpolate_camera, interpolate_tf};
use super::model::{Camera, GadDocument, Keyframe, SceneDataBinding};
use super::validate::{validate_gad, Severity};
use super::GadError;
use crate::geom::VoxelBox;

/// Fully resolved scene for one output frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RenderState {
    pub frame_number: u32,
    pub camera: Camera,
    /// Bindings with transfer functions already interpolated. Data indices
    /// are those of `keyframe_index`.
    pub bindings: Vec<SceneDataBinding>,
    pub bounding_box: VoxelBox,
    /// Keyframe whose data this frame displays: the one containing the
    /// frame, or the last one before it when the frame lies in a gap.
    pub keyframe_index: usize,
}

/// Emits one [`RenderState`] per frame from the first keyframe's start to
/// the last keyframe's end.
///
/// Inside a keyframe's range its own values hold (per-frame cameras win over
/// the keyframe camera). In the gap between keyframe `i` and `i + 1` the
/// camera and transfer functions blend with
/// `t = (frame - end_i) / (start_{i+1} - end_i)`; data bindings and the
/// bounding box stay those of keyframe `i`.
pub fn expand_keyframes(doc: &GadDocument) -> Result<Vec<RenderState>, GadError> {
    let errors: Vec<_> = validate_gad(doc)
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if !errors.is_empty() {
        return Err(GadError::InvalidDocument(errors));
    }

    let total = doc
        .frame_span()
        .map(|(s, e)| (e - s + 1) as usize)
        .unwrap_or(0);
    let mut states = Vec::with_capacity(total);

    for (k, kf) in doc.keyframes.iter().enumerate() {
        let [start, end] = kf.frame_range;
        for frame in start..=end {
            states.push(RenderState {
                frame_number: frame,
                camera: kf.camera_at(frame).clone(),
                bindings: kf.scene_data.clone(),
                bounding_box: kf.bounding_box,
                keyframe_index: k,
            });
        }
        if let Some(next) = doc.keyframes.get(k + 1) {
            let gap = (next.frame_range[0] - end) as f64;
            for frame in end + 1..next.frame_range[0] {
                let t = (frame - end) as f64 / gap;
                states.push(RenderState {
                    frame_number: frame,
                    camera: interpolate_camera(kf.last_camera(), next.first_camera(), t)?,
                    bindings: blend_bindings(kf, next, t)?,
                    bounding_box: kf.bounding_box,
                    keyframe_index: k,
                });
            }
        }
    }
    Ok(states)
}

fn blend_bindings(
    from: &Keyframe,
    to: &Keyframe,
    t: f64,
) -> Result<Vec<SceneDataBinding>, GadError> {
    from.scene_data
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mut out = b.clone();
            if let Some(nb) = to.scene_data.get(i) {
                let same_kind = nb.streamline_params.is_some() == b.streamline_params.is_some();
                if same_kind && nb.transfer_function.domain == b.transfer_function.domain {
                    out.transfer_function =
                        interpolate_tf(&b.transfer_function, &nb.transfer_function, t)?;
                }
            }
            Ok(out)
        })
        .collect()
}
