use gad_access::{AnimationSpec, DatasetDescriptor};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::message::ToolSchema;

pub const PROPOSE_TOOL: &str = "propose_animation";
pub const CRITIQUE_TOOL: &str = "critique_animation";

/// Coarsest quality offered to the model.
pub const MIN_QUALITY: i32 = -12;

/// A named parameter set shown to the model as a worked example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub name: String,
    pub phenomenon: String,
    pub spec: AnimationSpec,
}

/// System prompt plus tool schemas for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub descriptor: DatasetDescriptor,
    pub system_prompt: String,
    pub tools: Vec<ToolSchema>,
}

impl Context {
    pub fn tool(&self, name: &str) -> Option<&ToolSchema> {
        self.tools.iter().find(|t| t.name == name)
    }
}

fn spec_properties(d: &DatasetDescriptor) -> serde_json::Value {
    let [nx, ny, nz] = d.base_dims;
    let last_t = d.timestep_count.saturating_sub(1);
    let fields: Vec<&str> = d.fields.iter().map(|f| f.name.as_str()).collect();
    json!({
        "box": {
            "type": "array",
            "description": format!("[[x1,y1,z1],[x2,y2,z2]] in base voxels, half-open, 0 <= x1 < x2 <= {nx}, 0 <= y1 < y2 <= {ny}, 0 <= z1 < z2 <= {nz}"),
            "minItems": 2,
            "maxItems": 2,
            "items": {
                "type": "array",
                "minItems": 3,
                "maxItems": 3,
                "items": { "type": "integer", "minimum": 0, "maximum": nx.max(ny).max(nz) }
            }
        },
        "time": {
            "type": "array",
            "description": format!("[t1,t2,step] in timesteps of {} hours, 0 <= t1 <= t2 <= {last_t}, step >= 1", d.timestep_stride_hours),
            "minItems": 3,
            "maxItems": 3,
            "items": { "type": "integer", "minimum": 0, "maximum": last_t }
        },
        "quality": {
            "type": "integer",
            "description": "resolution level; q keeps 2^q of the voxels (0 = full, -8 = 1/256)",
            "minimum": MIN_QUALITY,
            "maximum": 0
        },
        "field": { "type": "string", "enum": fields },
        "streamlines": { "type": "boolean", "description": "overlay velocity streamlines" }
    })
}

/// Builds the system prompt and tool schemas. Output depends only on the
/// arguments.
pub fn build_context(descriptor: &DatasetDescriptor, examples: &[Example]) -> Context {
    let d = descriptor;
    let mut p = String::new();
    p.push_str("You plan scientific volume animations. Translate the user's description into animation parameters ");
    p.push_str(&format!("by calling {PROPOSE_TOOL}, and review rendered frames by calling {CRITIQUE_TOOL}.\n\n"));
    p.push_str(&format!("Dataset: {}\n", d.name));
    p.push_str(&format!(
        "Grid: {} x {} x {} voxels (x, y, z); valid box corners lie in [0, {}] x [0, {}] x [0, {}].\n",
        d.base_dims[0], d.base_dims[1], d.base_dims[2], d.base_dims[0], d.base_dims[1], d.base_dims[2]
    ));
    p.push_str(&format!(
        "Time: {} timesteps, {} hours apart; valid timesteps are 0..={}.\n",
        d.timestep_count,
        d.timestep_stride_hours,
        d.timestep_count.saturating_sub(1)
    ));
    p.push_str("Fields:\n");
    for f in &d.fields {
        p.push_str(&format!(
            "  - {} ({} channel{}, range [{}, {}])",
            f.name,
            f.channels,
            if f.channels == 1 { "" } else { "s" },
            f.value_range[0],
            f.value_range[1]
        ));
        if let Some(desc) = &f.description {
            p.push_str(&format!(": {desc}"));
        }
        p.push('\n');
    }
    p.push_str(&format!(
        "Quality: an integer q in [{MIN_QUALITY}, 0]; level q keeps 2^q of the voxels (0 is full resolution, -4 is 1/16, -8 is 1/256). \
         Start coarse for previews and refine when asked.\n"
    ));
    p.push_str("Streamlines: true overlays velocity streamlines on the volume.\n\n");
    p.push_str("Parameter template:\n");
    let template = json!({
        "box": [[0, 0, 0], d.base_dims],
        "time": [0, d.timestep_count.saturating_sub(1), 1],
        "quality": -8,
        "field": d.fields.first().map(|f| f.name.as_str()).unwrap_or(""),
        "streamlines": false,
        "rationale": "why these values",
        "confidence": 0.5
    });
    p.push_str(&serde_json::to_string(&template).expect("template serializes"));
    p.push('\n');
    if !examples.is_empty() {
        p.push_str("\nExamples of successful parameter sets:\n");
        for e in examples {
            p.push_str(&format!(
                "  - {} ({}): {}\n",
                e.name,
                e.phenomenon,
                serde_json::to_string(&e.spec).expect("spec serializes")
            ));
        }
    }

    let mut props = spec_properties(d);
    let obj = props.as_object_mut().expect("object");
    obj.insert("rationale".into(), json!({ "type": "string" }));
    obj.insert("confidence".into(), json!({ "type": "number", "minimum": 0.0, "maximum": 1.0 }));
    let propose = ToolSchema {
        name: PROPOSE_TOOL.into(),
        description: "Set the parameters of the animation to produce.".into(),
        parameters: json!({
            "type": "object",
            "properties": props,
            "required": ["box", "time", "quality", "field", "streamlines"]
        }),
    };
    let critique = ToolSchema {
        name: CRITIQUE_TOOL.into(),
        description: "Assess the rendered frames and suggest parameter changes; include only fields that should change.".into(),
        parameters: json!({
            "type": "object",
            "properties": {
                "suggested_deltas": { "type": "object", "properties": spec_properties(d) },
                "commentary": { "type": "string" }
            },
            "required": ["suggested_deltas", "commentary"]
        }),
    };
    Context {
        descriptor: d.clone(),
        system_prompt: p,
        tools: vec![propose, critique],
    }
}
