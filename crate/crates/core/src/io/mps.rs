//! MITK point-set XML (`.mps`).

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WHAT: &str = "MPS document";

/// Labelled 3D points.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    points: Vec<[f64; 3]>,
    ids: Vec<i64>,
}

impl PointSet {
    pub fn new(points: Vec<[f64; 3]>, ids: Vec<i64>) -> Result<Self> {
        if points.len() != ids.len() {
            return Err(Error::Shape(format!("{} points but {} ids", points.len(), ids.len())));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(**id)) {
            return Err(Error::InvalidArgument(format!("duplicate point id {dup}")));
        }
        Ok(Self { points, ids })
    }

    /// Points labelled `0..m`.
    pub fn from_points(points: Vec<[f64; 3]>) -> Self {
        let ids = (0..points.len() as i64).collect();
        Self { points, ids }
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn ids(&self) -> &[i64] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn read_mps(path: impl AsRef<Path>) -> Result<PointSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mps(&text)
}

pub fn parse_mps(text: &str) -> Result<PointSet> {
    let doc = roxmltree::Document::parse(text).map_err(|e| Error::parse(WHAT, e.to_string()))?;
    let mut points = Vec::new();
    let mut ids = Vec::new();
    for (k, node) in doc.descendants().filter(|n| n.has_tag_name("point")).enumerate() {
        let field = |name: &str| -> Result<&str> {
            node.children()
                .find(|c| c.has_tag_name(name))
                .and_then(|c| c.text())
                .map(str::trim)
                .ok_or_else(|| Error::parse(WHAT, format!("point {k}: missing <{name}>")))
        };
        let coord = |name: &str| -> Result<f64> {
            let s = field(name)?;
            s.parse()
                .map_err(|_| Error::parse(WHAT, format!("point {k}: bad <{name}> value '{s}'")))
        };
        let id = match field("id") {
            Ok(s) => s
                .parse()
                .map_err(|_| Error::parse(WHAT, format!("point {k}: bad <id> value '{s}'")))?,
            Err(_) => k as i64,
        };
        points.push([coord("x")?, coord("y")?, coord("z")?]);
        ids.push(id);
    }
    PointSet::new(points, ids).map_err(|e| Error::parse(WHAT, e.to_string()))
}

pub fn write_mps(path: impl AsRef<Path>, points: &PointSet) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_mps(points)).map_err(|e| Error::io(path, e))
}

pub fn format_mps(set: &PointSet) -> String {
    let mut lo = [0.0f64; 3];
    let mut hi = [0.0f64; 3];
    if let Some(first) = set.points.first() {
        lo = *first;
        hi = *first;
        for p in &set.points {
            for d in 0..3 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
    }
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\" ?>\n<point_set_file>\n");
    s.push_str("    <file_version>0.1</file_version>\n    <point_set>\n        <time_series>\n");
    s.push_str("            <time_series_id>0</time_series_id>\n");
    s.push_str("            <Geometry3D ImageGeometry=\"false\" FrameOfReferenceID=\"0\">\n");
    s.push_str("                <IndexToWorld type=\"Matrix3x3\" m_0_0=\"1\" m_0_1=\"0\" m_0_2=\"0\" m_1_0=\"0\" m_1_1=\"1\" m_1_2=\"0\" m_2_0=\"0\" m_2_1=\"0\" m_2_2=\"1\" />\n");
    s.push_str("                <Offset type=\"Vector3D\" x=\"0\" y=\"0\" z=\"0\" />\n");
    s.push_str("                <Bounds>\n");
    let _ = writeln!(
        s,
        "                    <Min type=\"Vector3D\" x=\"{:?}\" y=\"{:?}\" z=\"{:?}\" />",
        lo[0], lo[1], lo[2]
    );
    let _ = writeln!(
        s,
        "                    <Max type=\"Vector3D\" x=\"{:?}\" y=\"{:?}\" z=\"{:?}\" />",
        hi[0], hi[1], hi[2]
    );
    s.push_str("                </Bounds>\n            </Geometry3D>\n");
    for (p, id) in set.points.iter().zip(&set.ids) {
        let _ = write!(
            s,
            "            <point>\n                <id>{id}</id>\n                <specification>0</specification>\n                <x>{:?}</x>\n                <y>{:?}</y>\n                <z>{:?}</z>\n            </point>\n",
            p[0], p[1], p[2]
        );
    }
    s.push_str("        </time_series>\n    </point_set>\n</point_set_file>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_round_trip() {
        let set = parse_mps(&format_mps(&PointSet::default())).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn duplicate_ids_rejected() {
        assert!(PointSet::new(vec![[0.0; 3]; 2], vec![3, 3]).is_err());
    }

    #[test]
    fn malformed_xml() {
        assert!(matches!(parse_mps("<point_set_file><point>"), Err(Error::Parse { .. })));
        let bad = "<point_set_file><point><id>0</id><x>1</x><y>q</y><z>0</z></point></point_set_file>";
        let err = parse_mps(bad).unwrap_err().to_string();
        assert!(err.contains("<y>"), "{err}");
    }
}
