mod common;

use std::fs;

use common::*;
use gad_core::gad::{expand_keyframes, parse_gad, serialize_gad, validate_gad, GadError, HEADER_FILE};
use proptest::prelude::*;

#[test]
fn ten_keyframes_parse_with_interpolated_opacities() {
    let dir = tempfile::tempdir().unwrap();
    let doc = one_frame_keyframes(10);
    serialize_gad(&doc, dir.path()).unwrap();
    let parsed = parse_gad(dir.path()).unwrap();
    assert_eq!(parsed.keyframes.len(), 10);
    assert_eq!(parsed.data_list.len(), 10);
    let bindings: usize = parsed.keyframes.iter().map(|k| k.scene_data.len()).sum();
    assert_eq!(bindings, 10);
    assert_eq!(parsed, doc.canonicalized());
}

#[test]
fn missing_keyframe_file() {
    let dir = tempfile::tempdir().unwrap();
    serialize_gad(&mixed_document(), dir.path()).unwrap();
    fs::remove_file(dir.path().join("kf_00001.gad.json")).unwrap();
    match parse_gad(dir.path()) {
        Err(GadError::MissingFile(p)) => assert!(p.ends_with("kf_00001.gad.json")),
        other => panic!("expected MissingFile, got {other:?}"),
    }
}

#[test]
fn missing_header() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(parse_gad(dir.path()), Err(GadError::MissingFile(_))));
}

#[test]
fn three_keyframes_write_five_files() {
    let dir = tempfile::tempdir().unwrap();
    let written = serialize_gad(&mixed_document(), dir.path()).unwrap();
    assert_eq!(written.len(), 5);
    assert!(written[0].ends_with(HEADER_FILE));
    assert!(written.iter().all(|p| p.exists()));
}

#[test]
fn serialization_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let doc = mixed_document();
    let wa = serialize_gad(&doc, a.path()).unwrap();
    let wb = serialize_gad(&doc, b.path()).unwrap();
    for (pa, pb) in wa.iter().zip(&wb) {
        assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
    }
}

#[test]
fn overlapping_ranges_refuse_to_serialize() {
    let mut doc = mixed_document();
    doc.keyframes[1].frame_range = [2, 6];
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        serialize_gad(&doc, dir.path()),
        Err(GadError::InvalidDocument(_))
    ));
}

#[test]
fn wire_format_field_names() {
    let dir = tempfile::tempdir().unwrap();
    serialize_gad(&mixed_document(), dir.path()).unwrap();
    let header: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join(HEADER_FILE)).unwrap()).unwrap();
    assert_eq!(header["version"], "1.0");
    assert_eq!(header["data_list"], "datalist.gad.json");
    assert_eq!(header["keyframes"][2], "kf_00002.gad.json");

    let list: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("datalist.gad.json")).unwrap())
            .unwrap();
    let e = &list["data"][0];
    assert_eq!(e["id"], 0);
    assert_eq!(e["dims"], serde_json::json!([128, 128, 32]));
    assert_eq!(e["data_type"], "structured");
    assert_eq!(e["field"], "salinity");
    assert_eq!(e["range"], serde_json::json!([33.0, 38.0]));

    let kf: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("kf_00000.gad.json")).unwrap())
            .unwrap();
    assert_eq!(kf["frames"], serde_json::json!([0, 3]));
    assert_eq!(kf["bbox"], serde_json::json!([[0, 0, 0], [128, 128, 32]]));
    assert_eq!(kf["camera"]["dir"], serde_json::json!([0.0, 0.0, -1.0]));
    assert_eq!(kf["scene"][0]["data"], 0);
    assert_eq!(kf["scene"][0]["clip"], serde_json::Value::Null);
    assert_eq!(kf["scene"][0]["interp"], "linear");
    assert_eq!(kf["scene"][0]["tf"]["points"][0], serde_json::json!([33.0, [0.0, 0.0, 0.0], 0.0]));
}

#[test]
fn unknown_fields_survive_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    serialize_gad(&mixed_document(), dir.path()).unwrap();
    let kf_path = dir.path().join("kf_00001.gad.json");
    let mut kf: serde_json::Value = serde_json::from_str(&fs::read_to_string(&kf_path).unwrap()).unwrap();
    kf["x_vendor"] = serde_json::json!({"lights": [1, 2.5, "warm"]});
    kf["scene"][0]["x_note"] = serde_json::json!("keep me");
    fs::write(&kf_path, serde_json::to_string(&kf).unwrap()).unwrap();

    let doc = parse_gad(dir.path()).unwrap();
    assert_eq!(doc.keyframes[1].extra["x_vendor"]["lights"][2], "warm");

    let out = tempfile::tempdir().unwrap();
    serialize_gad(&doc, out.path()).unwrap();
    let again = parse_gad(out.path()).unwrap();
    assert_eq!(again, doc);
    assert_eq!(again.keyframes[1].scene_data[0].extra["x_note"], "keep me");
}

#[test]
fn schema_error_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    serialize_gad(&mixed_document(), dir.path()).unwrap();
    let kf_path = dir.path().join("kf_00002.gad.json");
    let mut kf: serde_json::Value = serde_json::from_str(&fs::read_to_string(&kf_path).unwrap()).unwrap();
    kf["scene"][1]["streamline"]["max_steps"] = serde_json::json!("many");
    fs::write(&kf_path, serde_json::to_string(&kf).unwrap()).unwrap();
    match parse_gad(dir.path()) {
        Err(GadError::SchemaViolation { path, .. }) => {
            assert_eq!(path, "kf_00002.gad.json:scene[1].streamline.max_steps")
        }
        other => panic!("expected SchemaViolation, got {other:?}"),
    }
}

#[test]
fn dangling_index_on_disk_is_integrity_violation() {
    let dir = tempfile::tempdir().unwrap();
    serialize_gad(&mixed_document(), dir.path()).unwrap();
    let kf_path = dir.path().join("kf_00000.gad.json");
    let mut kf: serde_json::Value = serde_json::from_str(&fs::read_to_string(&kf_path).unwrap()).unwrap();
    kf["scene"][0]["data"] = serde_json::json!(17);
    fs::write(&kf_path, serde_json::to_string(&kf).unwrap()).unwrap();
    assert!(matches!(
        parse_gad(dir.path()),
        Err(GadError::IntegrityViolation { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_identity(doc in document()) {
        prop_assert!(validate_gad(&doc).is_empty(), "{:?}", validate_gad(&doc));
        let dir = tempfile::tempdir().unwrap();
        serialize_gad(&doc, dir.path()).unwrap();
        let parsed = parse_gad(dir.path()).unwrap();
        prop_assert_eq!(&parsed, &doc);

        // serialize(parse(d)) is byte-stable too.
        let dir2 = tempfile::tempdir().unwrap();
        let w1 = serialize_gad(&parsed, dir2.path()).unwrap();
        for p in w1 {
            let name = p.file_name().unwrap();
            prop_assert_eq!(fs::read(&p).unwrap(), fs::read(dir.path().join(name)).unwrap());
        }
    }

    #[test]
    fn expansion_covers_span(doc in document()) {
        let states = expand_keyframes(&doc).unwrap();
        let (s, e) = doc.frame_span().unwrap();
        prop_assert_eq!(states.len() as u32, e - s + 1);
        for (i, st) in states.iter().enumerate() {
            prop_assert_eq!(st.frame_number, s + i as u32);
        }
    }
}
