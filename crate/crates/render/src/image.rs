use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::RenderError;

/// Row-major RGBA, 8 bits per channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![0; width as usize * height as usize * 4],
        }
    }

    pub fn filled(width: u32, height: u32, rgb: [f64; 3]) -> Self {
        let mut img = Self::new(width, height);
        img.fill(rgb);
        img
    }

    pub fn fill(&mut self, rgb: [f64; 3]) {
        let px = [to_u8(rgb[0]), to_u8(rgb[1]), to_u8(rgb[2]), 255];
        for p in self.pixels.chunks_exact_mut(4) {
            p.copy_from_slice(&px);
        }
    }

    pub fn byte_size(&self) -> usize {
        self.pixels.len()
    }

    #[inline]
    pub fn offset(&self, x: u32, y: u32) -> usize {
        (y as usize * self.width as usize + x as usize) * 4
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let o = self.offset(x, y);
        [self.pixels[o], self.pixels[o + 1], self.pixels[o + 2], self.pixels[o + 3]]
    }

    pub fn set_pixel(&mut self, x: u32, y: u32, v: [u8; 4]) {
        let o = self.offset(x, y);
        self.pixels[o..o + 4].copy_from_slice(&v);
    }

    /// Drops the alpha channel.
    pub fn to_rgb(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.pixels.len() / 4 * 3);
        for p in self.pixels.chunks_exact(4) {
            out.extend_from_slice(&p[..3]);
        }
        out
    }
}

#[inline]
pub(crate) fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImageFormat {
    #[default]
    Png,
    Ppm,
}

impl ImageFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ImageFormat::Png => "png",
            ImageFormat::Ppm => "ppm",
        }
    }

    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("png") => ImageFormat::Png,
            _ => ImageFormat::Ppm,
        }
    }
}

/// Writes RGB data: PNG when the path ends in `.png`, binary PPM (P6)
/// otherwise.
pub fn write_image(image: &Image, path: impl AsRef<Path>) -> Result<PathBuf, RenderError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| RenderError::io(path, e))?;
    let mut w = BufWriter::new(file);
    match ImageFormat::from_path(path) {
        ImageFormat::Ppm => {
            write!(w, "P6\n{} {}\n255\n", image.width, image.height)
                .and_then(|_| w.write_all(&image.to_rgb()))
                .map_err(|e| RenderError::io(path, e))?;
        }
        ImageFormat::Png => {
            let mut enc = png::Encoder::new(&mut w, image.width, image.height);
            enc.set_color(png::ColorType::Rgb);
            enc.set_depth(png::BitDepth::Eight);
            let to_err = |e: png::EncodingError| RenderError::BackendFailure(format!("png: {e}"));
            let mut writer = enc.write_header().map_err(to_err)?;
            writer.write_image_data(&image.to_rgb()).map_err(to_err)?;
            writer.finish().map_err(to_err)?;
        }
    }
    w.flush().map_err(|e| RenderError::io(path, e))?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let mut img = Image::filled(2, 2, [1.0, 0.0, 0.0]);
        img.set_pixel(1, 1, [1, 2, 3, 255]);
        let p = write_image(&img, dir.path().join("a.ppm")).unwrap();
        let bytes = std::fs::read(p).unwrap();
        let header = b"P6\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len(), header.len() + 12);
        assert_eq!(&bytes[bytes.len() - 3..], &[1, 2, 3]);
    }

    #[test]
    fn png_is_readable() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image::filled(3, 2, [0.0, 1.0, 0.0]);
        let p = write_image(&img, dir.path().join("a.png")).unwrap();
        let dec = png::Decoder::new(std::io::BufReader::new(File::open(p).unwrap()));
        let mut reader = dec.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut buf).unwrap();
        assert_eq!((info.width, info.height), (3, 2));
        assert_eq!(&buf[..3], &[0, 255, 0]);
    }

    #[test]
    fn missing_directory_is_io_failure() {
        let img = Image::new(1, 1);
        let err = write_image(&img, "/nonexistent/dir/x.ppm").unwrap_err();
        assert!(matches!(err, RenderError::Io { .. }));
    }
}
