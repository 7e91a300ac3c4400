mod common;

use common::*;
use gad_core::gad::{
    eval_tf, expand_keyframes, ControlPoint, GadDocument, GadError, SceneDataBinding,
    TransferFunction,
};
use proptest::prelude::*;

#[test]
fn camera_blends_linearly_across_gap() {
    let doc = GadDocument::new(
        vec![salinity_entry(0)],
        vec![
            keyframe([0, 0], camera_x(0.0), vec![SceneDataBinding::volume(0, salinity_tf(0.25))]),
            keyframe([10, 10], camera_x(10.0), vec![SceneDataBinding::volume(0, salinity_tf(0.75))]),
        ],
    );
    let states = expand_keyframes(&doc).unwrap();
    assert_eq!(states.len(), 11);
    for (f, s) in states.iter().enumerate() {
        // Oracle: x(f) = 0 + (10 - 0) * f / 10.
        assert_eq!(s.frame_number, f as u32);
        assert!((s.camera.position[0] - f as f64).abs() < 1e-12);
    }
    assert_eq!(states[5].camera.position[0], 5.0);
    let (_, o) = eval_tf(&states[5].bindings[0].transfer_function, 38.0);
    assert!((o - 0.5).abs() < 1e-12);
}

#[test]
fn single_keyframe_holds() {
    let doc = GadDocument::new(
        vec![salinity_entry(0)],
        vec![keyframe([0, 9], camera_x(3.0), vec![SceneDataBinding::volume(0, salinity_tf(0.5))])],
    );
    let states = expand_keyframes(&doc).unwrap();
    assert_eq!(states.len(), 10);
    for (i, s) in states.iter().enumerate() {
        assert_eq!(s.frame_number, i as u32);
        assert_eq!(s.camera, states[0].camera);
        assert_eq!(s.bindings, states[0].bindings);
        assert_eq!(s.bounding_box, states[0].bounding_box);
    }
}

#[test]
fn one_frame_keyframes_keep_their_own_opacity() {
    let doc = one_frame_keyframes(10);
    let states = expand_keyframes(&doc).unwrap();
    assert_eq!(states.len(), 10);
    for (i, s) in states.iter().enumerate() {
        assert_eq!(s.keyframe_index, i);
        assert_eq!(s.bindings, doc.keyframes[i].scene_data);
        assert_eq!(s.bindings[0].data_index, i);
    }
}

#[test]
fn per_frame_cameras_override() {
    let mut kf = keyframe([2, 4], camera_x(0.0), vec![SceneDataBinding::volume(0, salinity_tf(0.5))]);
    kf.per_frame_cameras = Some(vec![camera_x(0.0), camera_x(7.0), camera_x(9.0)]);
    let doc = GadDocument::new(vec![salinity_entry(0)], vec![kf]);
    let xs: Vec<f64> = expand_keyframes(&doc)
        .unwrap()
        .iter()
        .map(|s| s.camera.position[0])
        .collect();
    assert_eq!(xs, vec![0.0, 7.0, 9.0]);
}

#[test]
fn gap_keeps_data_of_previous_keyframe() {
    let states = expand_keyframes(&mixed_document()).unwrap();
    assert_eq!(states.len(), 13);
    assert_eq!(states[4].bindings[0].data_index, 0);
    assert_eq!(states[4].keyframe_index, 0);
    assert_eq!(states[6].keyframe_index, 1);
    assert_eq!(states[8].bindings.len(), 1);
    assert_eq!(states[9].bindings.len(), 2);
}

#[test]
fn invalid_document_is_rejected() {
    let mut doc = mixed_document();
    doc.keyframes[1].frame_range = [1, 1];
    assert!(matches!(expand_keyframes(&doc), Err(GadError::InvalidDocument(_))));
}

fn ramp(opacity: f64) -> TransferFunction {
    TransferFunction::new(
        [33.0, 38.0],
        vec![
            ControlPoint::new(33.0, [0.0, 0.0, 0.0], 0.0),
            ControlPoint::new(38.0, [1.0, 1.0, 1.0], opacity),
        ],
    )
}

proptest! {
    #[test]
    fn per_frame_deltas_bounded_by_keyframe_delta(
        anchors in prop::collection::vec((1u32..4, 1u32..12, -100.0f64..100.0, 0.0f64..1.0), 2..6)
    ) {
        let mut frame = 0;
        let mut kfs = Vec::new();
        for (len, gap, x, op) in &anchors {
            let start = frame;
            let end = start + len - 1;
            frame = end + gap + 1;
            kfs.push(keyframe([start, end], camera_x(*x), vec![SceneDataBinding::volume(0, ramp(*op))]));
        }
        let doc = GadDocument::new(vec![salinity_entry(0)], kfs);
        let states = expand_keyframes(&doc).unwrap();

        for pair in doc.keyframes.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let (end, next) = (a.frame_range[1], b.frame_range[0]);
            let gap = (next - end) as f64;
            let dx = (b.camera.position[0] - a.camera.position[0]).abs() / gap;
            let op = |s: &gad_core::gad::RenderState| eval_tf(&s.bindings[0].transfer_function, 38.0).1;
            let dop = (op_of(b) - op_of(a)).abs() / gap;
            for f in end..next {
                let s0 = &states[f as usize];
                let s1 = &states[f as usize + 1];
                prop_assert!((s1.camera.position[0] - s0.camera.position[0]).abs() <= dx + 1e-9);
                prop_assert!((op(s1) - op(s0)).abs() <= dop + 1e-9);
            }
        }
    }
}

fn op_of(kf: &gad_core::gad::Keyframe) -> f64 {
    eval_tf(&kf.scene_data[0].transfer_function, 38.0).1
}
