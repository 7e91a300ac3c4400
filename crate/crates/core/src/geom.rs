//! Small vector helpers and axis-aligned boxes shared across the workspace.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Vec3 = [f64; 3];

#[inline]
pub fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Returns `None` when the vector is too short to normalize.
pub fn normalize(a: Vec3) -> Option<Vec3> {
    let n = norm(a);
    if n.is_finite() && n > 0.0 {
        Some(scale(a, 1.0 / n))
    } else {
        None
    }
}

#[inline]
pub fn lerp(a: Vec3, b: Vec3, t: f64) -> Vec3 {
    [
        a[0] + (b[0] - a[0]) * t,
        a[1] + (b[1] - a[1]) * t,
        a[2] + (b[2] - a[2]) * t,
    ]
}

/// Integer voxel box in base-resolution coordinates, half-open: `[min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VoxelBox {
    pub min: [u32; 3],
    pub max: [u32; 3],
}

impl VoxelBox {
    pub fn new(min: [u32; 3], max: [u32; 3]) -> Self {
        Self { min, max }
    }

    /// Box covering a whole grid of the given dims.
    pub fn full(dims: [usize; 3]) -> Self {
        Self {
            min: [0; 3],
            max: [dims[0] as u32, dims[1] as u32, dims[2] as u32],
        }
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|a| self.min[a] >= self.max[a])
    }

    /// Extent along each axis. Zero on inverted axes.
    pub fn extent(&self) -> [usize; 3] {
        let mut e = [0usize; 3];
        for a in 0..3 {
            e[a] = self.max[a].saturating_sub(self.min[a]) as usize;
        }
        e
    }

    pub fn voxel_count(&self) -> usize {
        self.extent().iter().product()
    }

    pub fn contains_box(&self, other: &VoxelBox) -> bool {
        (0..3).all(|a| other.min[a] >= self.min[a] && other.max[a] <= self.max[a])
    }

    pub fn center(&self) -> Vec3 {
        let mut c = [0.0; 3];
        for a in 0..3 {
            c[a] = 0.5 * (self.min[a] as f64 + self.max[a] as f64);
        }
        c
    }

    pub fn diagonal(&self) -> f64 {
        let e = self.extent();
        norm([e[0] as f64, e[1] as f64, e[2] as f64])
    }
}

impl Serialize for VoxelBox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.min, self.max].serialize(s)
    }
}

impl<'de> Deserialize<'de> for VoxelBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [min, max] = <[[u32; 3]; 2]>::deserialize(d)?;
        Ok(Self { min, max })
    }
}

/// Clip region in normalized `[0,1]^3` coordinates of the volume it applies to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClipBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl ClipBox {
    pub const UNIT: ClipBox = ClipBox {
        min: [0.0; 3],
        max: [1.0; 3],
    };

    pub fn is_valid(&self) -> bool {
        (0..3).all(|a| {
            self.min[a].is_finite()
                && self.max[a].is_finite()
                && self.min[a] >= 0.0
                && self.max[a] <= 1.0
                && self.min[a] < self.max[a]
        })
    }
}

impl Serialize for ClipBox {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [
            crate::gad::format::sig9_vec(self.min),
            crate::gad::format::sig9_vec(self.max),
        ]
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ClipBox {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [min, max] = <[Vec3; 2]>::deserialize(d)?;
        Ok(Self { min, max })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cross_of_axes() {
        assert_eq!(cross([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn zero_vector_does_not_normalize() {
        assert!(normalize([0.0; 3]).is_none());
    }

    #[test]
    fn voxel_box_extent() {
        let b = VoxelBox::new([1, 2, 3], [5, 4, 3]);
        assert_eq!(b.extent(), [4, 2, 0]);
        assert!(b.is_empty());
    }
}
