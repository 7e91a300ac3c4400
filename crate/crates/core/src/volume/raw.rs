//! Headerless little-endian `f32` block files.

use std::fs;
use std::path::Path;

use super::VolumeError;

/// Conventional relative path of a block: `data/<field>_t<tttt>_q<|q|>.f32`.
pub fn block_file_name(field: &str, t: u32, q: i32) -> String {
    format!("data/{field}_t{t:04}_q{}.f32", q.unsigned_abs())
}

pub fn encode_f32_le(samples: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 4);
    for &v in samples {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn decode_f32_le(bytes: &[u8]) -> Result<Vec<f64>, VolumeError> {
    if bytes.len() % 4 != 0 {
        return Err(VolumeError::SizeMismatch {
            expected: bytes.len().div_ceil(4) * 4,
            found: bytes.len(),
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect())
}

/// Decodes into an existing buffer so callers can reuse its allocation.
pub fn decode_f32_le_into(bytes: &[u8], out: &mut Vec<f64>) -> Result<(), VolumeError> {
    if bytes.len() % 4 != 0 {
        return Err(VolumeError::SizeMismatch {
            expected: bytes.len().div_ceil(4) * 4,
            found: bytes.len(),
        });
    }
    out.clear();
    out.extend(
        bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64),
    );
    Ok(())
}

pub fn write_raw(path: &Path, samples: &[f64]) -> Result<(), VolumeError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| VolumeError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, encode_f32_le(samples)).map_err(|source| VolumeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a block and checks it holds exactly `expected_samples` values.
pub fn read_raw(path: &Path, expected_samples: usize) -> Result<Vec<f64>, VolumeError> {
    let bytes = fs::read(path).map_err(|source| VolumeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let samples = decode_f32_le(&bytes)?;
    if samples.len() != expected_samples {
        return Err(VolumeError::SizeMismatch {
            expected: expected_samples,
            found: samples.len(),
        });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_name_convention() {
        assert_eq!(block_file_name("salinity", 7, -8), "data/salinity_t0007_q8.f32");
        assert_eq!(block_file_name("u", 123, 0), "data/u_t0123_q0.f32");
    }

    #[test]
    fn little_endian_layout() {
        assert_eq!(encode_f32_le(&[1.0]), vec![0x00, 0x00, 0x80, 0x3f]);
        assert_eq!(decode_f32_le(&[0x00, 0x00, 0x80, 0x3f]).unwrap(), vec![1.0]);
        assert!(decode_f32_le(&[0, 0, 0]).is_err());
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("data/x_t0000_q0.f32");
        write_raw(&p, &[0.5, -2.0, 33.25]).unwrap();
        assert_eq!(read_raw(&p, 3).unwrap(), vec![0.5, -2.0, 33.25]);
        assert!(matches!(read_raw(&p, 4), Err(VolumeError::SizeMismatch { .. })));
    }
}
