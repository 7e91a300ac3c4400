use gad_access::{AnimationCache, AnimationSpec, TimeRange};
use gad_core::VoxelBox;
use serde::{Deserialize, Serialize};

use crate::context::Example;
use crate::ScriptError;

/// A bundled example phenomenon for the mini-ocean dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub choice: u32,
    pub name: String,
    pub phenomenon: String,
    pub spec: AnimationSpec,
}

impl Preset {
    pub fn example(&self) -> Example {
        Example {
            name: self.name.clone(),
            phenomenon: self.phenomenon.clone(),
            spec: self.spec.clone(),
        }
    }
}

fn preset(choice: u32, name: &str, phenomenon: &str, lo: [u32; 3], hi: [u32; 3], time: [u32; 3], q: i32, field: &str, streamlines: bool) -> Preset {
    Preset {
        choice,
        name: name.into(),
        phenomenon: phenomenon.into(),
        spec: AnimationSpec::new(VoxelBox::new(lo, hi), TimeRange::from(time), q, field, streamlines),
    }
}

/// Menu options 1 to 4.
pub fn presets() -> Vec<Preset> {
    vec![
        preset(
            1,
            "eddy ring",
            "a warm-core eddy circling the basin, 90 days at full resolution",
            [32, 32, 0],
            [96, 96, 16],
            [0, 89, 1],
            0,
            "temperature",
            false,
        ),
        preset(
            2,
            "salinity front",
            "the salty lens drifting across the basin over 60 days",
            [0, 0, 0],
            [128, 128, 32],
            [0, 59, 1],
            -8,
            "salinity",
            false,
        ),
        preset(
            3,
            "vortex circulation",
            "salinity with streamlines of the basin-scale vortex",
            [0, 0, 0],
            [128, 128, 32],
            [0, 29, 1],
            -6,
            "salinity",
            true,
        ),
        preset(
            4,
            "deep temperature",
            "temperature of the lower half of the water column every 4 days",
            [0, 0, 0],
            [128, 128, 16],
            [0, 92, 4],
            -4,
            "temperature",
            false,
        ),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub enum MenuAction {
    /// Option 0: plan from a free-text description.
    Plan(String),
    /// Options 1 to 4. `cached` is true when its GAD is already in the
    /// cache, so it can go straight to rendering.
    Preset { preset: Preset, cached: bool },
}

pub fn menu(choice: u32, custom_text: Option<&str>, cache: Option<&AnimationCache>) -> Result<MenuAction, ScriptError> {
    let text = custom_text.map(str::trim).filter(|t| !t.is_empty());
    match (choice, text) {
        (0, Some(t)) => Ok(MenuAction::Plan(t.to_string())),
        (0, None) => Err(ScriptError::InvalidChoice("option 0 needs a description".into())),
        (1..=4, None) => {
            let preset = presets().into_iter().find(|p| p.choice == choice).expect("presets 1-4 exist");
            let cached = match cache {
                Some(c) => c.lookup(&preset.spec.id())?.is_some(),
                None => false,
            };
            Ok(MenuAction::Preset { preset, cached })
        }
        (1..=4, Some(_)) => Err(ScriptError::InvalidChoice(format!("option {choice} takes no description"))),
        _ => Err(ScriptError::InvalidChoice(format!("option {choice} is not in 0-4"))),
    }
}
