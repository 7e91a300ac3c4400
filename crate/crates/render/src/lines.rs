use gad_core::gad::{Rgb, RenderState};
use gad_core::geom::lerp;

use crate::image::{to_u8, Image};
use crate::streamline::Streamline;
use crate::view::View;
use crate::{RenderError, RenderSettings};

pub const LINE_OPACITY: f64 = 0.8;

/// Blue-white-red diverging map over normalized speed `s`, clamped to `[0, 1]`.
pub fn speed_color(s: f64) -> Rgb {
    let s = if s.is_nan() { 0.0 } else { s.clamp(0.0, 1.0) };
    if s <= 0.5 {
        let w = 2.0 * s;
        [w, w, 1.0]
    } else {
        let w = 2.0 * (1.0 - s);
        [1.0, w, w]
    }
}

pub fn color_by_speed(lines: Vec<Streamline>, speed_range: [f64; 2]) -> Vec<(Streamline, Vec<Rgb>)> {
    let [lo, hi] = speed_range;
    let span = hi - lo;
    lines
        .into_iter()
        .map(|l| {
            let colors = l.speeds.iter().map(|&v| speed_color((v - lo) / span)).collect();
            (l, colors)
        })
        .collect()
}

/// Clips the 2-D segment `a-b` to `[0, w] x [0, h]` (Liang-Barsky) and
/// returns the surviving parameter interval.
fn clip_to_image(a: [f64; 2], b: [f64; 2], w: f64, h: f64) -> Option<(f64, f64)> {
    let d = [b[0] - a[0], b[1] - a[1]];
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d[0], a[0]),
        (d[0], w - a[0]),
        (-d[1], a[1]),
        (d[1], h - a[1]),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
            continue;
        }
        let r = q / p;
        if p < 0.0 {
            t0 = t0.max(r);
        } else {
            t1 = t1.min(r);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((t0, t1))
}

fn blend(img: &mut Image, x: i64, y: i64, c: Rgb) {
    if x < 0 || y < 0 || x >= img.width as i64 || y >= img.height as i64 {
        return;
    }
    let o = img.offset(x as u32, y as u32);
    let px = &mut img.pixels[o..o + 4];
    for k in 0..3 {
        let old = px[k] as f64 / 255.0;
        px[k] = to_u8(LINE_OPACITY * c[k] + (1.0 - LINE_OPACITY) * old);
    }
    let old_a = px[3] as f64 / 255.0;
    px[3] = to_u8(LINE_OPACITY + (1.0 - LINE_OPACITY) * old_a);
}

/// Projects each segment with the frame camera and over-blends it onto
/// `image` at [`LINE_OPACITY`]. No depth test against the volume.
pub fn rasterize_lines(
    image: &mut Image,
    lines: &[(Streamline, Vec<Rgb>)],
    state: &RenderState,
    settings: &RenderSettings,
) -> Result<(), RenderError> {
    if image.width != settings.width || image.height != settings.height {
        return Err(RenderError::InvalidSettings(format!(
            "image is {}x{} but settings ask for {}x{}",
            image.width, image.height, settings.width, settings.height
        )));
    }
    let view = View::new(&state.camera, settings.width, settings.height, settings.fov_y)?;
    for (line, colors) in lines {
        for s in 0..line.vertices.len().saturating_sub(1) {
            draw_segment(
                image,
                &view,
                (line.vertices[s], colors[s]),
                (line.vertices[s + 1], colors[s + 1]),
            );
        }
    }
    Ok(())
}

fn draw_segment(img: &mut Image, view: &View, a: ([f64; 3], Rgb), b: ([f64; 3], Rgb)) {
    let near = 2.0 * view.near();
    let (da, db) = (view.depth(a.0), view.depth(b.0));
    if da < near && db < near {
        return;
    }
    // Cut the part behind the near plane.
    let (mut a, mut b) = (a, b);
    if da < near || db < near {
        let f = (near - da) / (db - da);
        let cut = (lerp(a.0, b.0, f), lerp(a.1, b.1, f));
        if da < near {
            a = cut;
        } else {
            b = cut;
        }
    }
    let (Some(pa), Some(pb)) = (view.project(a.0), view.project(b.0)) else {
        return;
    };
    let (w, h) = (img.width as f64, img.height as f64);
    let Some((t0, t1)) = clip_to_image([pa[0], pa[1]], [pb[0], pb[1]], w, h) else {
        return;
    };
    let at = |t: f64| [pa[0] + (pb[0] - pa[0]) * t, pa[1] + (pb[1] - pa[1]) * t];
    let (s0, s1) = (at(t0), at(t1));
    let steps = (s1[0] - s0[0]).abs().max((s1[1] - s0[1]).abs()).ceil().max(1.0) as usize;
    let mut last = None;
    for k in 0..=steps {
        let f = k as f64 / steps as f64;
        let x = (s0[0] + (s1[0] - s0[0]) * f).floor() as i64;
        let y = (s0[1] + (s1[1] - s0[1]) * f).floor() as i64;
        if last == Some((x, y)) {
            continue;
        }
        last = Some((x, y));
        let t = t0 + (t1 - t0) * f;
        blend(img, x, y, lerp(a.1, b.1, t));
    }
}
