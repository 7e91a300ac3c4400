//! Core data model for keyframe-driven volume animation.
//!
//! [`gad`] holds the three-file animation descriptor (header, data list,
//! keyframes) together with its validator and temporal expansion.
//! [`volume`] holds structured grids, quality-level downsampling and the
//! synthetic fields used as desk-scale stand-ins for large ocean datasets.

pub mod geom;
pub mod gad;
pub mod volume;

pub use geom::{ClipBox, Vec3, VoxelBox};
