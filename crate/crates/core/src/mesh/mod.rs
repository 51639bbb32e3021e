//! Triangulated surface meshes with per-vertex or per-triangle attributes.

mod sources;

pub use sources::{box_mesh, cylinder_mesh, ellipsoid_mesh, plane_mesh, sphere_mesh, DEFAULT_RESOLUTION};

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Which mesh elements an attribute is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Association {
    Vertex,
    Triangle,
}

/// A named array with `components` values per element.
#[derive(Clone, Debug, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub components: usize,
    /// Element-major values: element `e`, component `c` at `e * components + c`.
    pub values: Vec<f64>,
}

impl Attribute {
    pub fn new(name: impl Into<String>, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 || !values.len().is_multiple_of(components) {
            return Err(Error::InvalidArgument(format!(
                "{} values do not split into {components}-component elements",
                values.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            components,
            values,
        })
    }

    pub fn scalars(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            components: 1,
            values,
        }
    }

    pub fn element_count(&self) -> usize {
        self.values.len() / self.components
    }

    pub fn element(&self, e: usize) -> &[f64] {
        &self.values[e * self.components..(e + 1) * self.components]
    }
}

/// Triangle mesh. Triangle vertex indices are 1-based.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    points: Vec<[f64; 3]>,
    triangles: Vec<[usize; 3]>,
    attributes: Vec<Attribute>,
}

impl Mesh {
    /// Builds a mesh, checking that every triangle references three distinct
    /// existing vertices.
    pub fn new(points: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let p = points.len();
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i < 1 || i > p) {
                return Err(Error::InvalidArgument(format!(
                    "triangle {} references {tri:?}, mesh has {p} points",
                    t + 1
                )));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::InvalidArgument(format!(
                    "triangle {} is degenerate: {tri:?}",
                    t + 1
                )));
            }
        }
        Ok(Self {
            points,
            triangles,
            attributes: Vec::new(),
        })
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Adds an attribute whose element count must match the vertex or triangle count.
    pub fn add_attribute(&mut self, attribute: Attribute) -> Result<()> {
        let m = attribute.element_count();
        if m != self.points.len() && m != self.triangles.len() {
            return Err(Error::InvalidArgument(format!(
                "attribute '{}' has {m} elements; mesh has {} points and {} triangles",
                attribute.name,
                self.points.len(),
                self.triangles.len()
            )));
        }
        self.attributes.push(attribute);
        Ok(())
    }

    /// Association implied by the element count. A tie (as many points as
    /// triangles) resolves to vertices.
    pub fn association(&self, attribute: &Attribute) -> Option<Association> {
        let m = attribute.element_count();
        if m == self.points.len() {
            Some(Association::Vertex)
        } else if m == self.triangles.len() {
            Some(Association::Triangle)
        } else {
            None
        }
    }

    /// Undirected edges with the number of triangles sharing each.
    pub fn edge_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.points.len() as i64 - self.edge_counts().len() as i64 + self.triangles.len() as i64
    }

    /// True when every edge is shared by exactly two triangles.
    pub fn is_closed_manifold(&self) -> bool {
        self.edge_counts().values().all(|&c| c == 2)
    }

    /// Unnormalised triangle normal (cross product of two edges).
    pub fn triangle_normal(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.points[i - 1]);
        crate::geometry::cross(crate::geometry::sub(b, a), crate::geometry::sub(c, a))
    }

    pub fn triangle_centroid(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[t].map(|i| self.points[i - 1]);
        [0, 1, 2].map(|k| (a[k] + b[k] + c[k]) / 3.0)
    }
}
