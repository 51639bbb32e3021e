//! Small 3-vector helpers shared by the mesh sources and the reslicer.

use crate::error::{Error, Result};

pub(crate) type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub(crate) fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn normalize(a: Vec3, what: &str) -> Result<Vec3> {
    let n = norm(a);
    if !(n > 1e-12 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("{what} must be a nonzero vector")));
    }
    Ok(scale(a, 1.0 / n))
}

pub(crate) fn to_vec3(v: &[f64], what: &str) -> Result<Vec3> {
    match v {
        [x, y, z] => Ok([*x, *y, *z]),
        _ => Err(Error::InvalidArgument(format!(
            "{what} needs 3 components, got {}",
            v.len()
        ))),
    }
}

/// Right-handed orthonormal frame `(u, v, n)` around a normal.
///
/// `n` is the normalised normal, `u` the normalised rejection of the canonical
/// axis least aligned with `n` (lowest axis on ties) and `v = n × u`.
pub(crate) fn frame_from_normal(normal: Vec3) -> Result<(Vec3, Vec3, Vec3)> {
    let n = normalize(normal, "normal")?;
    let mut best = 0;
    for k in 1..3 {
        if n[k].abs() < n[best].abs() {
            best = k;
        }
    }
    let mut e = [0.0; 3];
    e[best] = 1.0;
    let u = normalize(sub(e, scale(n, dot(e, n))), "in-plane axis")?;
    let v = cross(n, u);
    Ok((u, v, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_normal_gives_identity_axes() {
        let (u, v, n) = frame_from_normal([0.0, 0.0, 2.0]).unwrap();
        assert_eq!(u, [1.0, 0.0, 0.0]);
        assert_eq!(v, [0.0, 1.0, 0.0]);
        assert_eq!(n, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn frame_is_orthonormal_and_right_handed() {
        let (u, v, n) = frame_from_normal([0.3, -1.2, 0.7]).unwrap();
        for (a, b) in [(u, v), (u, n), (v, n)] {
            assert!(dot(a, b).abs() < 1e-12);
        }
        for a in [u, v, n] {
            assert!((norm(a) - 1.0).abs() < 1e-12);
        }
        assert!((dot(cross(u, v), n) - 1.0).abs() < 1e-12);
        assert!(frame_from_normal([0.0; 3]).is_err());
    }
}
