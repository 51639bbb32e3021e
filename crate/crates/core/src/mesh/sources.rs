//! Parametric mesh sources.

use std::f64::consts::PI;

use super::Mesh;
use crate::error::{Error, Result};
use crate::geometry::{add, dot, frame_from_normal, scale, sub, to_vec3, Vec3};

/// Tessellation resolution used when callers do not choose one.
pub const DEFAULT_RESOLUTION: usize = 16;

/// Closed axis-aligned box: 8 vertices, 12 outward-facing triangles.
pub fn box_mesh(center: &[f64], dims: &[f64]) -> Result<Mesh> {
    let c = to_vec3(center, "center")?;
    let d = to_vec3(dims, "dims")?;
    if d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!("box dims {d:?} must be positive")));
    }
    let points = (0..8)
        .map(|i| {
            [0, 1, 2].map(|k| {
                let sign = if i >> k & 1 == 1 { 0.5 } else { -0.5 };
                c[k] + sign * d[k]
            })
        })
        .collect();
    let quads = [
        [0, 2, 6, 4],
        [1, 3, 7, 5],
        [0, 1, 5, 4],
        [2, 3, 7, 6],
        [0, 1, 3, 2],
        [4, 5, 7, 6],
    ];
    let mut triangles = Vec::with_capacity(12);
    for q in quads {
        triangles.push([q[0] + 1, q[1] + 1, q[2] + 1]);
        triangles.push([q[0] + 1, q[2] + 1, q[3] + 1]);
    }
    outward(points, triangles, c)
}

/// Latitude-longitude sphere with single-vertex poles.
pub fn sphere_mesh(center: &[f64], radius: f64, resolution: usize) -> Result<Mesh> {
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    ellipsoid_mesh(center, &[radius; 3], resolution)
}

/// Sphere tessellation scaled per axis by `radii`.
pub fn ellipsoid_mesh(center: &[f64], radii: &[f64], resolution: usize) -> Result<Mesh> {
    let c = to_vec3(center, "center")?;
    let r = to_vec3(radii, "radii")?;
    if r.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument(format!("radii {r:?} must be positive")));
    }
    check_resolution(resolution)?;
    let res = resolution;
    let mut points = Vec::with_capacity(2 + (res - 1) * res);
    points.push([c[0], c[1], c[2] + r[2]]);
    for i in 1..res {
        let phi = PI * i as f64 / res as f64;
        for j in 0..res {
            let theta = 2.0 * PI * j as f64 / res as f64;
            points.push([
                c[0] + r[0] * phi.sin() * theta.cos(),
                c[1] + r[1] * phi.sin() * theta.sin(),
                c[2] + r[2] * phi.cos(),
            ]);
        }
    }
    points.push([c[0], c[1], c[2] - r[2]]);
    let south = points.len();
    let ring = |i: usize, j: usize| 2 + (i - 1) * res + (j % res);
    let mut triangles = Vec::with_capacity(2 * res * (res - 1));
    for j in 0..res {
        triangles.push([1, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..res - 1 {
        for j in 0..res {
            let (a, b) = (ring(i, j), ring(i, j + 1));
            let (d, e) = (ring(i + 1, j), ring(i + 1, j + 1));
            triangles.push([a, d, e]);
            triangles.push([a, e, b]);
        }
    }
    for j in 0..res {
        triangles.push([south, ring(res - 1, j + 1), ring(res - 1, j)]);
    }
    outward(points, triangles, c)
}

/// Closed cylinder along `axis`: side band plus two capping fans.
pub fn cylinder_mesh(axis: &[f64], center: &[f64], radius: f64, height: f64, resolution: usize) -> Result<Mesh> {
    let c = to_vec3(center, "center")?;
    let (u, v, w) = frame_from_normal(to_vec3(axis, "axis")?)?;
    if !(radius > 0.0 && height > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius {radius} and height {height} must be positive"
        )));
    }
    check_resolution(resolution)?;
    let res = resolution;
    let bottom = sub(c, scale(w, height / 2.0));
    let top = add(c, scale(w, height / 2.0));
    let mut points = Vec::with_capacity(2 * res + 2);
    for base in [bottom, top] {
        for j in 0..res {
            let theta = 2.0 * PI * j as f64 / res as f64;
            let dir = add(scale(u, theta.cos()), scale(v, theta.sin()));
            points.push(add(base, scale(dir, radius)));
        }
    }
    points.push(bottom);
    points.push(top);
    let (bc, tc) = (2 * res + 1, 2 * res + 2);
    let b = |j: usize| 1 + j % res;
    let t = |j: usize| 1 + res + j % res;
    let mut triangles = Vec::with_capacity(4 * res);
    for j in 0..res {
        triangles.push([b(j), b(j + 1), t(j + 1)]);
        triangles.push([b(j), t(j + 1), t(j)]);
        triangles.push([bc, b(j + 1), b(j)]);
        triangles.push([tc, t(j), t(j + 1)]);
    }
    outward(points, triangles, c)
}

/// Square of side `scale` centred at `point`, orthogonal to `normal`.
pub fn plane_mesh(point: &[f64], normal: &[f64], scale_: f64) -> Result<Mesh> {
    let p = to_vec3(point, "point")?;
    let (u, v, n) = frame_from_normal(to_vec3(normal, "normal")?)?;
    if !(scale_ > 0.0) {
        return Err(Error::InvalidArgument(format!("scale {scale_} must be positive")));
    }
    let h = scale_ / 2.0;
    let corner = |a: f64, b: f64| add(p, add(scale(u, a * h), scale(v, b * h)));
    let points = vec![
        corner(-1.0, -1.0),
        corner(1.0, -1.0),
        corner(1.0, 1.0),
        corner(-1.0, 1.0),
    ];
    let mesh = Mesh::new(points, vec![[1, 2, 3], [1, 3, 4]])?;
    debug_assert!(dot(mesh.triangle_normal(0), n) > 0.0);
    Ok(mesh)
}

fn check_resolution(resolution: usize) -> Result<()> {
    if resolution < 3 {
        return Err(Error::InvalidArgument(format!(
            "resolution {resolution} must be at least 3"
        )));
    }
    Ok(())
}

// Flips any triangle whose normal points towards `center`; valid for convex sources.
fn outward(points: Vec<Vec3>, mut triangles: Vec<[usize; 3]>, center: Vec3) -> Result<Mesh> {
    for tri in &mut triangles {
        let [a, b, c] = tri.map(|i| points[i - 1]);
        let normal = crate::geometry::cross(sub(b, a), sub(c, a));
        let centroid = [0, 1, 2].map(|k| (a[k] + b[k] + c[k]) / 3.0);
        if dot(normal, sub(centroid, center)) < 0.0 {
            tri.swap(1, 2);
        }
    }
    Mesh::new(points, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_outward(m: &Mesh, center: Vec3) {
        for t in 0..m.triangles().len() {
            let d = sub(m.triangle_centroid(t), center);
            assert!(dot(m.triangle_normal(t), d) > 0.0, "triangle {t} faces inwards");
        }
    }

    #[test]
    fn box_topology() {
        let m = box_mesh(&[0.0; 3], &[10.0, 20.0, 5.0]).unwrap();
        assert_eq!(m.points().len(), 8);
        assert_eq!(m.triangles().len(), 12);
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_closed_manifold());
        for k in 0..3 {
            let max = m.points().iter().map(|p| p[k]).fold(f64::MIN, f64::max);
            let min = m.points().iter().map(|p| p[k]).fold(f64::MAX, f64::min);
            assert_eq!((min, max), (-[5.0, 10.0, 2.5][k], [5.0, 10.0, 2.5][k]));
        }
        assert_outward(&m, [0.0; 3]);
        assert!(box_mesh(&[0.0; 3], &[1.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn sphere_and_ellipsoid() {
        let c = [1.0, -2.0, 3.0];
        let s = sphere_mesh(&c, 10.0, 20).unwrap();
        for p in s.points() {
            assert!((crate::geometry::norm(sub(*p, c)) - 10.0).abs() < 1e-9);
        }
        assert_eq!(s.euler_characteristic(), 2);
        assert!(s.is_closed_manifold());
        assert_outward(&s, c);

        let e = ellipsoid_mesh(&[0.0; 3], &[10.0, 20.0, 5.0], 20).unwrap();
        for p in e.points() {
            let r = (p[0] / 10.0).powi(2) + (p[1] / 20.0).powi(2) + (p[2] / 5.0).powi(2);
            assert!((r - 1.0).abs() < 1e-9);
        }
        assert_eq!(e.euler_characteristic(), 2);
        assert!(e.is_closed_manifold());
        assert!(sphere_mesh(&c, 0.0, 8).is_err());
        assert!(sphere_mesh(&c, 1.0, 2).is_err());
    }

    #[test]
    fn cylinder_counts() {
        let c = [0.0; 3];
        let m = cylinder_mesh(&[1.0, 0.0, 0.0], &c, 5.0, 20.0, 12).unwrap();
        assert_eq!(m.triangles().len(), 48);
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_closed_manifold());
        assert_outward(&m, c);
        for p in &m.points()[..24] {
            let radial = (p[1] * p[1] + p[2] * p[2]).sqrt();
            assert!((radial - 5.0).abs() < 1e-9);
        }
        assert!(cylinder_mesh(&[0.0; 3], &c, 5.0, 20.0, 12).is_err());
    }

    #[test]
    fn plane_square() {
        let m = plane_mesh(&[2.0, 0.0, 0.0], &[0.0, 0.0, 1.0], 2.0).unwrap();
        assert_eq!(m.points().len(), 4);
        assert_eq!(m.triangles().len(), 2);
        for p in m.points() {
            assert_eq!(p[2], 0.0);
            assert!((1.0..=3.0).contains(&p[0]));
            assert!((-1.0..=1.0).contains(&p[1]));
        }
        let n = [1.0, 2.0, -0.5];
        let q = plane_mesh(&[1.0, 1.0, 1.0], &n, 3.0).unwrap();
        for p in q.points() {
            assert!(dot(sub(*p, [1.0; 3]), n).abs() < 1e-12);
        }
        let boundary = q.edge_counts().values().filter(|&&c| c == 1).count();
        assert_eq!(boundary, 4);
        assert!(plane_mesh(&[0.0; 3], &[0.0; 3], 1.0).is_err());
    }
}
