use std::sync::Arc;

use gad_access::{
    spawn_dataset_server, AnimationCache, AnimationSpec, Catalog, DatasetClient, ServerHandle, SyntheticDataset, TimeRange,
};
use gad_core::VoxelBox;
use gad_render::RenderSettings;
use gad_scripting::{
    basic_generate, build_context, menu, presets, run_loop, ChatSession, MenuAction, MockLlm, Pipeline, ScriptError,
};

struct Rig {
    server: ServerHandle,
    pipeline: Pipeline,
    _dir: tempfile::TempDir,
}

async fn rig() -> Rig {
    let server = spawn_dataset_server(Catalog::new().with(SyntheticDataset::mini_ocean()), "127.0.0.1:0".parse().unwrap())
        .await
        .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cache = Arc::new(AnimationCache::open(dir.path().join("cache")).unwrap());
    let pipeline = Pipeline::new(DatasetClient::new(server.url()).unwrap(), cache, dir.path().join("frames"))
        .with_settings(RenderSettings::default().with_size(24, 24));
    Rig { server, pipeline, _dir: dir }
}

fn session() -> ChatSession {
    let examples: Vec<_> = presets().iter().map(|p| p.example()).collect();
    ChatSession::new("loop", build_context(SyntheticDataset::mini_ocean().descriptor(), &examples))
}

#[tokio::test]
async fn accepting_critiques_refines_quality() {
    let r = rig().await;
    let mut s = session();
    let mut rounds = 0;
    let mut accept = |_: &gad_scripting::Critique| {
        rounds += 1;
        true
    };
    let out = run_loop(&mut s, "salinity in the mediterranean for 12 days", &MockLlm::new(), &r.pipeline, &mut accept)
        .await
        .unwrap();
    assert_eq!(out.len(), 3);
    assert_eq!(rounds, 3);
    let qualities: Vec<i32> = out.iter().map(|(id, _)| parts(id).quality).collect();
    assert_eq!(qualities, [-8, -6, -4]);
    assert!(!parts(&out[0].0).streamlines);
    assert!(parts(&out[1].0).streamlines);
    for (id, dir) in &out {
        assert_eq!(std::fs::read_dir(dir).unwrap().count(), 12, "{id}");
    }
    assert_eq!(s.produced_animations(), out.iter().map(|(id, _)| id.clone()).collect::<Vec<_>>());
}

#[tokio::test]
async fn declining_stops_after_one_and_rerun_hits_cache() {
    let r = rig().await;
    let mut s = session();
    let out = run_loop(&mut s, "salinity for 6 days", &MockLlm::new(), &r.pipeline, &mut |_| false)
        .await
        .unwrap();
    assert_eq!(out.len(), 1);
    let before = r.server.request_count();
    let again = run_loop(&mut s, "salinity for 6 days", &MockLlm::new(), &r.pipeline, &mut |_| false)
        .await
        .unwrap();
    assert_eq!(again[0].0, out[0].0);
    assert_eq!(r.server.request_count(), before);
}

#[tokio::test]
async fn direct_path_is_cached_and_deterministic() {
    let r = rig().await;
    let spec = AnimationSpec::new(VoxelBox::new([32, 32, 0], [96, 96, 16]), TimeRange::new(0, 7, 1), -2, "temperature", false);
    let (id, dir) = basic_generate(&spec, &r.pipeline).await.unwrap();
    let first: Vec<Vec<u8>> = frames(&dir);
    assert_eq!(first.len(), 8);
    let n = r.server.request_count();
    let g = r.pipeline.generate(&spec, gad_scripting::no_progress()).await.unwrap();
    assert!(g.cache_hit);
    assert_eq!(g.id, id);
    assert_eq!(r.server.request_count(), n);
    assert_eq!(frames(&dir), first);
}

fn frames(dir: &std::path::Path) -> Vec<Vec<u8>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths.iter().map(|p| std::fs::read(p).unwrap()).collect()
}

#[tokio::test]
async fn invalid_specs_fail_before_traffic() {
    let r = rig().await;
    let empty = AnimationSpec::new(VoxelBox::new([10, 0, 0], [10, 8, 8]), TimeRange::new(0, 1, 1), 0, "u", false);
    assert!(matches!(basic_generate(&empty, &r.pipeline).await, Err(ScriptError::Spec(_))));
    let positive = AnimationSpec::new(VoxelBox::new([0, 0, 0], [8, 8, 8]), TimeRange::new(0, 1, 1), 1, "u", false);
    assert!(matches!(basic_generate(&positive, &r.pipeline).await, Err(ScriptError::Spec(_))));
    assert_eq!(r.server.request_count(), 0);
}

#[tokio::test]
async fn ninety_day_preset() {
    let r = rig().await;
    let MenuAction::Preset { preset, cached } = menu(1, None, Some(&r.pipeline.cache)).unwrap() else {
        panic!("preset expected")
    };
    assert!(!cached);
    let mut spec = preset.spec.clone();
    spec.quality = -3;
    let (_, dir) = basic_generate(&spec, &r.pipeline).await.unwrap();
    assert_eq!(std::fs::read_dir(dir).unwrap().count(), 90);
}

fn parts(id: &gad_access::AnimationId) -> gad_access::IdParts {
    gad_access::AnimationId::parse(id.as_str()).unwrap()
}
