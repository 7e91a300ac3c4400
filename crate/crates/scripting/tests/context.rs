use gad_access::SyntheticDataset;
use gad_scripting::{build_context, presets, Example, CRITIQUE_TOOL, PROPOSE_TOOL};

fn examples() -> Vec<Example> {
    presets().iter().take(2).map(|p| p.example()).collect()
}

#[test]
fn prompt_embeds_dataset_and_examples() {
    let d = SyntheticDataset::mini_ocean().descriptor().clone();
    let ctx = build_context(&d, &examples());
    for f in ["temperature", "salinity", "u", "v", "w"] {
        assert!(ctx.system_prompt.contains(f), "{f}");
    }
    assert!(ctx.system_prompt.contains("128 x 128 x 32"));
    assert!(ctx.system_prompt.contains("96 timesteps, 24 hours apart"));
    assert!(ctx.system_prompt.contains("-8 is 1/256"));
    for e in examples() {
        assert!(ctx.system_prompt.contains(&serde_json::to_string(&e.spec).unwrap()));
        assert!(ctx.system_prompt.contains(&e.name));
    }
}

#[test]
fn template_without_examples() {
    let d = SyntheticDataset::mini_ocean().descriptor().clone();
    let ctx = build_context(&d, &[]);
    assert!(ctx.system_prompt.contains("Parameter template:"));
    assert!(ctx.system_prompt.contains("\"quality\":-8"));
    assert!(!ctx.system_prompt.contains("Examples of successful"));
}

#[test]
fn deterministic() {
    let d = SyntheticDataset::mini_ocean().descriptor().clone();
    assert_eq!(build_context(&d, &examples()), build_context(&d, &examples()));
}

#[test]
fn schema_declares_every_spec_field() {
    let d = SyntheticDataset::mini_ocean().descriptor().clone();
    let ctx = build_context(&d, &[]);
    let p = &ctx.tool(PROPOSE_TOOL).unwrap().parameters;
    for k in ["box", "time", "quality", "field", "streamlines"] {
        assert!(p["properties"][k].is_object(), "{k}");
        assert!(p["required"].as_array().unwrap().iter().any(|r| r == k), "{k}");
    }
    assert_eq!(p["properties"]["quality"]["maximum"], 0);
    assert_eq!(p["properties"]["time"]["items"]["maximum"], 95);
    assert_eq!(p["properties"]["field"]["enum"].as_array().unwrap().len(), 5);
    let c = &ctx.tool(CRITIQUE_TOOL).unwrap().parameters;
    assert!(c["properties"]["suggested_deltas"]["properties"]["quality"].is_object());
}
