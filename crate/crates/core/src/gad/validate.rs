use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::model::{Camera, DataType, GadDocument, TransferFunction};
use crate::geom::{dot, norm};

const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// One class per document invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagnosticCode {
    NoKeyframes,
    DuplicateKeyframeRef,
    KeyframeCountMismatch,
    UnsafePath,
    NonContiguousIds,
    InvalidDims,
    ChannelMismatch,
    InvalidValueRange,
    NonUnitVector,
    ParallelCameraVectors,
    NonFiniteValue,
    TooFewControlPoints,
    UnsortedControlPoints,
    DomainEndpointMismatch,
    ColorOutOfRange,
    InvertedFrameRange,
    EmptyBoundingBox,
    PerFrameCameraCount,
    InvalidClipBox,
    StreamlineParamsMismatch,
    InvalidStreamlineParams,
    DanglingDataIndex,
    OverlappingFrameRanges,
}

impl DiagnosticCode {
    /// Cross-document reference problems, as opposed to malformed values.
    pub fn is_integrity(self) -> bool {
        matches!(
            self,
            DiagnosticCode::DanglingDataIndex
                | DiagnosticCode::OverlappingFrameRanges
                | DiagnosticCode::KeyframeCountMismatch
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub path: String,
    pub message: String,
}

#[derive(Default)]
struct Sink(Vec<Diagnostic>);

impl Sink {
    fn error(&mut self, code: DiagnosticCode, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            code,
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Checks every document invariant; an empty result means the document is valid.
pub fn validate_gad(doc: &GadDocument) -> Vec<Diagnostic> {
    let mut sink = Sink::default();
    check_header(doc, &mut sink);
    check_data_list(doc, &mut sink);
    check_keyframes(doc, &mut sink);
    sink.0
}

fn check_header(doc: &GadDocument, sink: &mut Sink) {
    let h = &doc.header;
    if h.keyframe_refs.is_empty() {
        sink.error(DiagnosticCode::NoKeyframes, "header.keyframes", "keyframe list is empty");
    }
    let mut seen = HashSet::new();
    for (i, r) in h.keyframe_refs.iter().enumerate() {
        if !seen.insert(r.as_str()) {
            sink.error(
                DiagnosticCode::DuplicateKeyframeRef,
                format!("header.keyframes[{i}]"),
                format!("keyframe file {r:?} listed twice"),
            );
        }
        if !is_safe_relative(r) {
            sink.error(
                DiagnosticCode::UnsafePath,
                format!("header.keyframes[{i}]"),
                format!("{r:?} is not a relative path inside the document root"),
            );
        }
    }
    if !is_safe_relative(&h.data_list_ref) {
        sink.error(
            DiagnosticCode::UnsafePath,
            "header.data_list",
            format!("{:?} is not a relative path inside the document root", h.data_list_ref),
        );
    }
    if h.keyframe_refs.len() != doc.keyframes.len() {
        sink.error(
            DiagnosticCode::KeyframeCountMismatch,
            "keyframes",
            format!(
                "header lists {} keyframes but document holds {}",
                h.keyframe_refs.len(),
                doc.keyframes.len()
            ),
        );
    }
}

fn is_safe_relative(p: &str) -> bool {
    let path = std::path::Path::new(p);
    !p.is_empty()
        && path
            .components()
            .all(|c| matches!(c, std::path::Component::Normal(_)))
}

fn check_data_list(doc: &GadDocument, sink: &mut Sink) {
    for (i, e) in doc.data_list.iter().enumerate() {
        let path = format!("data_list[{i}]");
        if e.id != i {
            sink.error(
                DiagnosticCode::NonContiguousIds,
                format!("{path}.id"),
                format!("expected id {i}, found {}", e.id),
            );
        }
        if e.dims.iter().any(|&d| d == 0) {
            sink.error(DiagnosticCode::InvalidDims, format!("{path}.dims"), "dims must be positive");
        }
        if e.channels != e.data_type.expected_channels() {
            sink.error(
                DiagnosticCode::ChannelMismatch,
                format!("{path}.channels"),
                format!(
                    "{:?} data needs {} channels, found {}",
                    e.data_type,
                    e.data_type.expected_channels(),
                    e.channels
                ),
            );
        }
        let [lo, hi] = e.value_range;
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            sink.error(
                DiagnosticCode::InvalidValueRange,
                format!("{path}.range"),
                format!("range [{lo}, {hi}] must be finite with min <= max"),
            );
        }
        if !is_safe_relative(&e.path) {
            sink.error(
                DiagnosticCode::UnsafePath,
                format!("{path}.path"),
                format!("{:?} is not a relative path inside the document root", e.path),
            );
        }
    }
}

fn check_keyframes(doc: &GadDocument, sink: &mut Sink) {
    for (k, kf) in doc.keyframes.iter().enumerate() {
        let path = format!("keyframes[{k}]");
        let [start, end] = kf.frame_range;
        if end < start {
            sink.error(
                DiagnosticCode::InvertedFrameRange,
                format!("{path}.frames"),
                format!("frame range [{start}, {end}] ends before it starts"),
            );
        }
        if kf.bounding_box.is_empty() {
            sink.error(
                DiagnosticCode::EmptyBoundingBox,
                format!("{path}.bbox"),
                "bounding box min must be below max on every axis",
            );
        }
        check_camera(&kf.camera, &format!("{path}.camera"), sink);
        if let Some(cams) = &kf.per_frame_cameras {
            if end >= start && cams.len() != kf.frame_count() as usize {
                sink.error(
                    DiagnosticCode::PerFrameCameraCount,
                    format!("{path}.cameras"),
                    format!("{} cameras for {} frames", cams.len(), kf.frame_count()),
                );
            }
            for (c, cam) in cams.iter().enumerate() {
                check_camera(cam, &format!("{path}.cameras[{c}]"), sink);
            }
        }
        for (b, binding) in kf.scene_data.iter().enumerate() {
            let bpath = format!("{path}.scene[{b}]");
            check_tf(&binding.transfer_function, &format!("{bpath}.tf"), sink);
            if let Some(clip) = &binding.clip_box {
                if !clip.is_valid() {
                    sink.error(
                        DiagnosticCode::InvalidClipBox,
                        format!("{bpath}.clip"),
                        "clip box must lie in [0,1] with min < max on every axis",
                    );
                }
            }
            if let Some(p) = &binding.streamline_params {
                if p.seed_density == 0 || p.max_steps == 0 || !(p.step_size > 0.0) || !p.step_size.is_finite() {
                    sink.error(
                        DiagnosticCode::InvalidStreamlineParams,
                        format!("{bpath}.streamline"),
                        "seed density, step size and max steps must be positive",
                    );
                }
            }
            match doc.data_list.get(binding.data_index) {
                None => sink.error(
                    DiagnosticCode::DanglingDataIndex,
                    format!("{bpath}.data"),
                    format!(
                        "data index {} outside data list of length {}",
                        binding.data_index,
                        doc.data_list.len()
                    ),
                ),
                Some(entry) => {
                    let wants_lines = entry.data_type == DataType::Streamline;
                    if wants_lines != binding.streamline_params.is_some() {
                        sink.error(
                            DiagnosticCode::StreamlineParamsMismatch,
                            format!("{bpath}.streamline"),
                            if wants_lines {
                                "streamline data needs streamline parameters"
                            } else {
                                "streamline parameters on structured data"
                            },
                        );
                    }
                }
            }
        }
    }

    for (k, pair) in doc.keyframes.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        if b.frame_range[0] <= a.frame_range[1] {
            sink.error(
                DiagnosticCode::OverlappingFrameRanges,
                format!("keyframes[{}].frames", k + 1),
                format!(
                    "frames {:?} overlap or precede keyframe {k} frames {:?}",
                    b.frame_range, a.frame_range
                ),
            );
        }
    }
}

fn check_camera(cam: &Camera, path: &str, sink: &mut Sink) {
    let all = cam.position.iter().chain(&cam.direction).chain(&cam.up);
    if all.clone().any(|v| !v.is_finite()) {
        sink.error(DiagnosticCode::NonFiniteValue, path, "camera has non-finite components");
        return;
    }
    let mut unit_ok = true;
    for (name, v) in [("dir", cam.direction), ("up", cam.up)] {
        if (norm(v) - 1.0).abs() > UNIT_TOLERANCE {
            unit_ok = false;
            sink.error(
                DiagnosticCode::NonUnitVector,
                format!("{path}.{name}"),
                format!("|{name}| = {} is not 1", norm(v)),
            );
        }
    }
    if unit_ok && dot(cam.direction, cam.up).abs() >= 1.0 - UNIT_TOLERANCE {
        sink.error(
            DiagnosticCode::ParallelCameraVectors,
            format!("{path}.up"),
            "up is parallel to the view direction",
        );
    }
}

fn check_tf(tf: &TransferFunction, path: &str, sink: &mut Sink) {
    let pts = &tf.control_points;
    let finite = tf.domain.iter().all(|v| v.is_finite())
        && pts.iter().all(|p| {
            p.value.is_finite() && p.opacity.is_finite() && p.color.iter().all(|c| c.is_finite())
        });
    if !finite {
        sink.error(DiagnosticCode::NonFiniteValue, path, "transfer function has non-finite values");
        return;
    }
    if pts.len() < 2 {
        sink.error(
            DiagnosticCode::TooFewControlPoints,
            format!("{path}.points"),
            format!("{} control points, at least 2 required", pts.len()),
        );
        return;
    }
    for (i, w) in pts.windows(2).enumerate() {
        if w[1].value <= w[0].value {
            sink.error(
                DiagnosticCode::UnsortedControlPoints,
                format!("{path}.points[{}]", i + 1),
                "control points must be strictly ascending",
            );
        }
    }
    let (first, last) = (pts[0].value, pts[pts.len() - 1].value);
    if first != tf.domain[0] || last != tf.domain[1] {
        sink.error(
            DiagnosticCode::DomainEndpointMismatch,
            format!("{path}.domain"),
            format!(
                "domain {:?} does not match control point span [{first}, {last}]",
                tf.domain
            ),
        );
    }
    for (i, p) in pts.iter().enumerate() {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        if !in_unit(p.opacity) || !p.color.iter().all(|&c| in_unit(c)) {
            sink.error(
                DiagnosticCode::ColorOutOfRange,
                format!("{path}.points[{i}]"),
                "color and opacity must lie in [0,1]",
            );
        }
    }
}
