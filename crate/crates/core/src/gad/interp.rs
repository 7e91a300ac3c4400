use super::model::{Camera, ControlPoint, TransferFunction};
use super::GadError;
use crate::geom::{dot, lerp, norm, scale, Vec3};

pub type Rgb = [f64; 3];

const DEGENERATE_NORM: f64 = 1e-9;

/// Blends two cameras: linear position, normalized linear blend (nlerp) of
/// the direction and up vectors. `t = 0` and `t = 1` return the inputs as-is.
pub fn interpolate_camera(a: &Camera, b: &Camera, t: f64) -> Result<Camera, GadError> {
    if t <= 0.0 {
        return Ok(a.clone());
    }
    if t >= 1.0 {
        return Ok(b.clone());
    }
    let direction = nlerp(a.direction, b.direction, t).ok_or(GadError::DegenerateBlend("direction"))?;
    let up = nlerp(a.up, b.up, t).ok_or(GadError::DegenerateBlend("up"))?;
    if dot(direction, up).abs() >= 1.0 - 1e-6 {
        return Err(GadError::DegenerateBlend("direction and up"));
    }
    Ok(Camera {
        position: lerp(a.position, b.position, t),
        direction,
        up,
        extra: a.extra.clone(),
    })
}

/// `None` for antipodal inputs (the blend would flip through zero) or a
/// blend shorter than the degeneracy threshold.
fn nlerp(a: Vec3, b: Vec3, t: f64) -> Option<Vec3> {
    let (na, nb) = (norm(a), norm(b));
    if na > 0.0 && nb > 0.0 && dot(a, b) / (na * nb) <= -1.0 + DEGENERATE_NORM {
        return None;
    }
    let v = lerp(a, b, t);
    let n = norm(v);
    (n >= DEGENERATE_NORM).then(|| scale(v, 1.0 / n))
}

/// Piecewise-linear lookup; `s` outside the domain clamps to the nearest end.
pub fn eval_tf(tf: &TransferFunction, s: f64) -> (Rgb, f64) {
    let pts = &tf.control_points;
    match pts.len() {
        0 => return ([0.0; 3], 0.0),
        1 => return (pts[0].color, pts[0].opacity),
        _ => {}
    }
    let first = &pts[0];
    let last = &pts[pts.len() - 1];
    if s.is_nan() || s <= first.value {
        return (first.color, first.opacity);
    }
    if s >= last.value {
        return (last.color, last.opacity);
    }
    // First point strictly above s; s > first.value so hi >= 1.
    let hi = pts.partition_point(|p| p.value <= s);
    let (p0, p1) = (&pts[hi - 1], &pts[hi]);
    if s == p0.value {
        return (p0.color, p0.opacity);
    }
    let f = (s - p0.value) / (p1.value - p0.value);
    let mix = |x: f64, y: f64| x * (1.0 - f) + y * f;
    (
        [
            mix(p0.color[0], p1.color[0]),
            mix(p0.color[1], p1.color[1]),
            mix(p0.color[2], p1.color[2]),
        ],
        mix(p0.opacity, p1.opacity),
    )
}

/// Pointwise blend `(1-t)·a + t·b`, realized on the union of both
/// functions' control-point abscissas.
pub fn interpolate_tf(
    a: &TransferFunction,
    b: &TransferFunction,
    t: f64,
) -> Result<TransferFunction, GadError> {
    if a.domain != b.domain {
        return Err(GadError::DomainMismatch {
            a: a.domain,
            b: b.domain,
        });
    }
    if t <= 0.0 {
        return Ok(a.clone());
    }
    if t >= 1.0 {
        return Ok(b.clone());
    }
    let mut xs: Vec<f64> = a
        .control_points
        .iter()
        .chain(&b.control_points)
        .map(|p| p.value)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let points = xs
        .into_iter()
        .map(|x| {
            let (ca, oa) = eval_tf(a, x);
            let (cb, ob) = eval_tf(b, x);
            let mix = |p: f64, q: f64| (1.0 - t) * p + t * q;
            ControlPoint::new(
                x,
                [mix(ca[0], cb[0]), mix(ca[1], cb[1]), mix(ca[2], cb[2])],
                mix(oa, ob),
            )
        })
        .collect();
    Ok(TransferFunction {
        domain: a.domain,
        control_points: points,
        extra: a.extra.clone(),
    })
}
