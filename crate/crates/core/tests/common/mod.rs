#![allow(dead_code)]

use gad_core::gad::{
    Camera, ControlPoint, DataEntry, DataType, DiagnosticCode, Extra, GadDocument, Keyframe,
    SceneDataBinding, StreamlineParams, TransferFunction,
};
use gad_core::{ClipBox, VoxelBox};
use proptest::prelude::*;

pub fn salinity_entry(id: usize) -> DataEntry {
    DataEntry {
        id,
        path: format!("data/salinity_t{id:04}_q0.f32"),
        dims: [128, 128, 32],
        channels: 1,
        data_type: DataType::Structured,
        field_name: "salinity".into(),
        value_range: [33.0, 38.0],
        extra: Extra::new(),
    }
}

pub fn velocity_entry(id: usize) -> DataEntry {
    DataEntry {
        id,
        path: format!("data/velocity_t{id:04}_q0.f32"),
        dims: [128, 128, 32],
        channels: 3,
        data_type: DataType::Streamline,
        field_name: "velocity".into(),
        value_range: [0.0, 90.0],
        extra: Extra::new(),
    }
}

pub fn camera_x(x: f64) -> Camera {
    Camera::new([x, 64.0, 300.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0])
}

pub fn salinity_tf(opacity: f64) -> TransferFunction {
    TransferFunction::new(
        [33.0, 38.0],
        vec![
            ControlPoint::new(33.0, [0.0, 0.0, 0.0], 0.0),
            ControlPoint::new(35.5, [0.5, 0.5, 0.5], opacity / 2.0),
            ControlPoint::new(38.0, [1.0, 1.0, 1.0], opacity),
        ],
    )
}

pub fn keyframe(frames: [u32; 2], cam: Camera, scene: Vec<SceneDataBinding>) -> Keyframe {
    Keyframe {
        frame_range: frames,
        bounding_box: VoxelBox::new([0, 0, 0], [128, 128, 32]),
        camera: cam,
        per_frame_cameras: None,
        scene_data: scene,
        extra: Extra::new(),
    }
}

/// `n` single-frame keyframes at frames 0..n, each showing its own data entry.
pub fn one_frame_keyframes(n: usize) -> GadDocument {
    let data = (0..n).map(salinity_entry).collect();
    let kfs = (0..n)
        .map(|i| {
            keyframe(
                [i as u32, i as u32],
                camera_x(64.0),
                vec![SceneDataBinding::volume(i, salinity_tf(0.05 * (i + 1) as f64))],
            )
        })
        .collect();
    GadDocument::new(data, kfs)
}

/// Three keyframes with a streamline binding on the last one.
pub fn mixed_document() -> GadDocument {
    let data = vec![salinity_entry(0), salinity_entry(1), velocity_entry(2)];
    let kfs = vec![
        keyframe([0, 3], camera_x(0.0), vec![SceneDataBinding::volume(0, salinity_tf(0.2))]),
        keyframe([6, 6], camera_x(30.0), vec![SceneDataBinding::volume(1, salinity_tf(0.4))]),
        keyframe(
            [9, 12],
            camera_x(60.0),
            vec![
                SceneDataBinding::volume(1, salinity_tf(0.6)),
                SceneDataBinding::streamlines(
                    2,
                    TransferFunction::constant([0.0, 90.0], [1.0, 1.0, 1.0], 1.0),
                    StreamlineParams::default(),
                ),
            ],
        ),
    ];
    GadDocument::new(data, kfs)
}

/// One broken document per invariant, each expected to raise `code`.
pub fn violations() -> Vec<(DiagnosticCode, GadDocument)> {
    use DiagnosticCode::*;
    let base = mixed_document;
    let mut out = Vec::new();

    let mut d = base();
    d.header.keyframe_refs.clear();
    d.keyframes.clear();
    out.push((NoKeyframes, d));

    let mut d = base();
    d.header.keyframe_refs[1] = d.header.keyframe_refs[0].clone();
    out.push((DuplicateKeyframeRef, d));

    let mut d = base();
    d.keyframes.pop();
    out.push((KeyframeCountMismatch, d));

    let mut d = base();
    d.header.data_list_ref = "../outside.json".into();
    out.push((UnsafePath, d));

    let mut d = base();
    d.data_list[1].id = 7;
    out.push((NonContiguousIds, d));

    let mut d = base();
    d.data_list[0].dims = [128, 0, 32];
    out.push((InvalidDims, d));

    let mut d = base();
    d.data_list[0].channels = 3;
    out.push((ChannelMismatch, d));

    let mut d = base();
    d.data_list[0].value_range = [38.0, 33.0];
    out.push((InvalidValueRange, d));

    let mut d = base();
    d.keyframes[0].camera.direction = [0.0, 0.0, -2.0];
    out.push((NonUnitVector, d));

    let mut d = base();
    d.keyframes[0].camera.up = [0.0, 0.0, 1.0];
    out.push((ParallelCameraVectors, d));

    let mut d = base();
    d.keyframes[0].camera.position[0] = f64::NAN;
    out.push((NonFiniteValue, d));

    let mut d = base();
    d.keyframes[0].scene_data[0].transfer_function.control_points.truncate(1);
    out.push((TooFewControlPoints, d));

    let mut d = base();
    d.keyframes[0].scene_data[0].transfer_function.control_points[1].value = 33.0;
    out.push((UnsortedControlPoints, d));

    let mut d = base();
    d.keyframes[0].scene_data[0].transfer_function.domain = [30.0, 38.0];
    out.push((DomainEndpointMismatch, d));

    let mut d = base();
    d.keyframes[0].scene_data[0].transfer_function.control_points[1] =
        ControlPoint::new(35.5, [1.5, 0.0, 0.0], 0.5);
    out.push((ColorOutOfRange, d));

    let mut d = base();
    d.keyframes[0].frame_range = [3, 0];
    out.push((InvertedFrameRange, d));

    let mut d = base();
    d.keyframes[0].bounding_box = VoxelBox::new([0, 0, 5], [128, 128, 5]);
    out.push((EmptyBoundingBox, d));

    let mut d = base();
    d.keyframes[0].per_frame_cameras = Some(vec![camera_x(0.0); 2]);
    out.push((PerFrameCameraCount, d));

    let mut d = base();
    d.keyframes[0].scene_data[0].clip_box = Some(ClipBox {
        min: [0.5, 0.0, 0.0],
        max: [0.25, 1.0, 1.0],
    });
    out.push((InvalidClipBox, d));

    let mut d = base();
    d.keyframes[0].scene_data[0].streamline_params = Some(StreamlineParams::default());
    out.push((StreamlineParamsMismatch, d));

    let mut d = base();
    d.keyframes[2].scene_data[1].streamline_params = Some(StreamlineParams {
        seed_density: 0,
        ..StreamlineParams::default()
    });
    out.push((InvalidStreamlineParams, d));

    let mut d = base();
    d.keyframes[1].scene_data[0].data_index = 9;
    out.push((DanglingDataIndex, d));

    let mut d = base();
    d.keyframes[1].frame_range = [2, 6];
    out.push((OverlappingFrameRanges, d));

    out
}

// Reals on a 1/64 grid below 1000 have at most 9 significant digits.
pub fn real(lo: i32, hi: i32) -> impl Strategy<Value = f64> {
    (lo * 64..=hi * 64).prop_map(|v| v as f64 / 64.0)
}

pub fn unit_axis() -> impl Strategy<Value = ([f64; 3], [f64; 3])> {
    prop_oneof![
        Just(([0.0, 0.0, -1.0], [0.0, 1.0, 0.0])),
        Just(([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])),
        Just(([0.0, -1.0, 0.0], [1.0, 0.0, 0.0])),
        Just(([0.6, 0.8, 0.0], [0.0, 0.0, 1.0])),
    ]
}

pub fn camera() -> impl Strategy<Value = Camera> {
    ([real(-500, 500), real(-500, 500), real(-500, 500)], unit_axis())
        .prop_map(|(p, (d, u))| Camera::new(p, d, u))
}

pub fn tf(domain: [f64; 2]) -> impl Strategy<Value = TransferFunction> {
    prop::collection::vec((0u32..62, [0u32..=64, 0u32..=64, 0u32..=64], 0u32..=64), 0..5).prop_map(
        move |inner| {
            let span = domain[1] - domain[0];
            let mut xs: Vec<u32> = inner.iter().map(|p| 1 + p.0).collect();
            xs.sort_unstable();
            xs.dedup();
            let mut pts = vec![ControlPoint::new(domain[0], [0.0; 3], 0.0)];
            for (x, p) in xs.iter().zip(&inner) {
                let c = p.1.map(|v| v as f64 / 64.0);
                pts.push(ControlPoint::new(
                    domain[0] + span * *x as f64 / 64.0,
                    c,
                    p.2 as f64 / 64.0,
                ));
            }
            pts.push(ControlPoint::new(domain[1], [1.0; 3], 1.0));
            TransferFunction::new(domain, pts)
        },
    )
}

prop_compose! {
    pub fn document()(n_data in 1usize..5, n_kf in 1usize..6, seed in any::<u64>())
        (entries in prop::collection::vec((any::<bool>(), 1u32..200, 1u32..200, 1u32..64, real(-10, 40), real(0, 10)), n_data),
         kfs in prop::collection::vec((0u32..4, 1u32..5, camera(), prop::option::of(prop::collection::vec(camera(), 0..1)), tf([33.0, 38.0]), 0usize..64, any::<bool>()), n_kf),
         extra_note in prop::option::of("[a-z]{1,8}"),
         _seed in Just(seed))
        -> GadDocument
    {
        let data_list: Vec<DataEntry> = entries.iter().enumerate().map(|(i, e)| {
            let dt = if e.0 { DataType::Streamline } else { DataType::Structured };
            DataEntry {
                id: i,
                path: format!("data/f{i}.f32"),
                dims: [e.1, e.2, e.3],
                channels: dt.expected_channels(),
                data_type: dt,
                field_name: format!("field{i}"),
                value_range: [e.4, e.4 + e.5],
                extra: Extra::new(),
            }
        }).collect();
        let mut frame = 0u32;
        let keyframes = kfs.into_iter().map(|(gap, len, cam, per_frame, tf, pick, clip)| {
            let start = frame + gap;
            let end = start + len - 1;
            frame = end + 1;
            let idx = pick % data_list.len();
            let binding = if data_list[idx].data_type == DataType::Streamline {
                SceneDataBinding::streamlines(idx, tf, StreamlineParams { seed_density: 3, step_size: 0.125, max_steps: 50 })
            } else {
                let mut b = SceneDataBinding::volume(idx, tf);
                if clip {
                    b.clip_box = Some(ClipBox { min: [0.25, 0.0, 0.125], max: [0.75, 1.0, 0.5] });
                }
                b
            };
            let per_frame_cameras = per_frame.map(|_| vec![cam.clone(); len as usize]);
            let mut extra = Extra::new();
            if let Some(note) = &extra_note {
                extra.insert("x_note".into(), serde_json::json!(note));
            }
            Keyframe {
                frame_range: [start, end],
                bounding_box: VoxelBox::new([0, 0, 0], [10 + start, 20, 30]),
                camera: cam,
                per_frame_cameras,
                scene_data: vec![binding],
                extra,
            }
        }).collect();
        GadDocument::new(data_list, keyframes)
    }
}

