//! STL triangle soups. Both encodings are read; binary is written.
//! Coincident vertices (within [`WELD_TOLERANCE`]) are merged on read.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub const WELD_TOLERANCE: f64 = 1e-6;
const WHAT: &str = "ASCII STL";

pub fn read_stl(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_stl_bytes(&bytes)
}

pub fn read_stl_bytes(bytes: &[u8]) -> Result<Mesh> {
    let soup = if looks_ascii(bytes) {
        parse_ascii(std::str::from_utf8(bytes).map_err(|e| Error::parse(WHAT, e.to_string()))?)?
    } else {
        parse_binary(bytes)?
    };
    weld(&soup)
}

fn looks_ascii(bytes: &[u8]) -> bool {
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if 84 + 50 * n == bytes.len() {
            return false;
        }
    }
    let head = &bytes[..bytes.len().min(512)];
    head.trim_ascii_start().starts_with(b"solid") && std::str::from_utf8(bytes).is_ok_and(|s| s.contains("facet"))
}

fn parse_binary(bytes: &[u8]) -> Result<Vec<[f64; 3]>> {
    if bytes.len() < 84 {
        return Err(Error::TruncatedData {
            expected: 84,
            found: bytes.len(),
        });
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = 84usize.saturating_add(n.saturating_mul(50));
    if bytes.len() < expected {
        return Err(Error::TruncatedData {
            expected,
            found: bytes.len(),
        });
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
    let mut soup = Vec::with_capacity(3 * n);
    for t in 0..n {
        let rec = 84 + 50 * t + 12;
        for v in 0..3 {
            let o = rec + 12 * v;
            soup.push([f(o), f(o + 4), f(o + 8)]);
        }
    }
    Ok(soup)
}

fn parse_ascii(text: &str) -> Result<Vec<[f64; 3]>> {
    let mut soup = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        if it.next() != Some("vertex") {
            continue;
        }
        let mut p = [0.0; 3];
        for c in &mut p {
            let tok = it
                .next()
                .ok_or_else(|| Error::parse(WHAT, format!("line {}: vertex needs 3 coordinates", line_no + 1)))?;
            *c = tok
                .parse()
                .map_err(|_| Error::parse(WHAT, format!("line {}: bad coordinate '{tok}'", line_no + 1)))?;
        }
        soup.push(p);
    }
    if soup.len() % 3 != 0 {
        return Err(Error::parse(
            WHAT,
            format!("{} vertices is not a multiple of 3", soup.len()),
        ));
    }
    Ok(soup)
}

/// Merges vertices closer than [`WELD_TOLERANCE`] (per coordinate) and drops
/// triangles that collapse as a result.
fn weld(soup: &[[f64; 3]]) -> Result<Mesh> {
    let key = |p: &[f64; 3]| p.map(|c| (c / WELD_TOLERANCE).floor() as i64);
    let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut remap = Vec::with_capacity(soup.len());
    for p in soup {
        let k = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        if let Some(&q) = list
                            .iter()
                            .find(|&&q| (0..3).all(|d| (points[q][d] - p[d]).abs() <= WELD_TOLERANCE))
                        {
                            found = Some(q);
                            break 'search;
                        }
                    }
                }
            }
        }
        let idx = found.unwrap_or_else(|| {
            points.push(*p);
            buckets.entry(k).or_default().push(points.len() - 1);
            points.len() - 1
        });
        remap.push(idx + 1);
    }
    let triangles: Vec<[usize; 3]> = remap
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
        .collect();
    Mesh::new(points, triangles)
}

pub fn write_stl(path: impl AsRef<Path>, mesh: &Mesh) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_stl_bytes(mesh)).map_err(|e| Error::io(path, e))
}

pub fn write_stl_bytes(mesh: &Mesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles().len());
    let mut header = [b' '; 80];
    header[..6].copy_from_slice(b"medkit");
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles().len() as u32).to_le_bytes());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let n = mesh.triangle_normal(t);
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        for c in n {
            let c = if len > 0.0 { c / len } else { 0.0 };
            out.extend_from_slice(&(c as f32).to_le_bytes());
        }
        for &v in tri {
            for c in mesh.points()[v - 1] {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}
