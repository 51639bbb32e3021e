//! Legacy ASCII VTK `POLYDATA` (triangles only).
//!
//! Both cell layouts are read: per-cell counts (file versions up to 4.2) and
//! `OFFSETS`/`CONNECTIVITY` arrays (5.x). Files are written as version 4.2.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{Association, Attribute, Mesh};

const WHAT: &str = "VTK file";

pub fn read_vtk_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vtk_mesh(&text)
}

struct Tokens<'a> {
    toks: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        let t = self.toks.get(self.pos).copied();
        self.pos += 1;
        t
    }

    fn peek(&self) -> Option<(usize, &'a str)> {
        self.toks.get(self.pos).copied()
    }

    fn word(&mut self, expecting: &str) -> Result<(usize, &'a str)> {
        self.next()
            .ok_or_else(|| Error::parse(WHAT, format!("unexpected end of file, expecting {expecting}")))
    }

    fn parse<T: std::str::FromStr>(&mut self, expecting: &str) -> Result<T> {
        let (line, tok) = self.word(expecting)?;
        tok.parse()
            .map_err(|_| Error::parse(WHAT, format!("line {line}: bad {expecting} '{tok}'")))
    }

    fn numbers(&mut self, n: usize, expecting: &str) -> Result<Vec<f64>> {
        (0..n).map(|_| self.parse(expecting)).collect()
    }

    /// Remaining tokens on `line`.
    fn rest_of_line(&mut self, line: usize) -> Vec<&'a str> {
        let mut out = Vec::new();
        while let Some((l, t)) = self.peek() {
            if l != line {
                break;
            }
            out.push(t);
            self.pos += 1;
        }
        out
    }
}

pub fn parse_vtk_mesh(text: &str) -> Result<Mesh> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.len() < 4 || !lines[0].trim_start().starts_with("# vtk DataFile") {
        return Err(Error::parse(WHAT, "missing '# vtk DataFile' header line"));
    }
    if !lines[2].trim().eq_ignore_ascii_case("ASCII") {
        return Err(Error::parse(
            WHAT,
            format!("line 3: expected ASCII, found '{}'", lines[2].trim()),
        ));
    }
    let dataset: Vec<&str> = lines[3].split_whitespace().collect();
    if dataset.len() != 2 || !dataset[0].eq_ignore_ascii_case("DATASET") || !dataset[1].eq_ignore_ascii_case("POLYDATA")
    {
        return Err(Error::parse(
            WHAT,
            format!("line 4: expected 'DATASET POLYDATA', found '{}'", lines[3].trim()),
        ));
    }

    // METADATA blocks run to the next blank line and carry nothing we keep.
    let mut toks = Vec::new();
    let mut in_metadata = false;
    for (k, line) in lines.iter().enumerate().skip(4) {
        let trimmed = line.trim();
        if in_metadata {
            in_metadata = !trimmed.is_empty();
            continue;
        }
        if trimmed.eq_ignore_ascii_case("METADATA") {
            in_metadata = true;
            continue;
        }
        toks.extend(line.split_whitespace().map(|t| (k + 1, t)));
    }
    let mut tk = Tokens { toks, pos: 0 };

    let mut points: Vec<[f64; 3]> = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut pending: Vec<(Association, Attribute)> = Vec::new();
    let mut section: Option<(Association, usize)> = None;

    while let Some((line, key)) = tk.next() {
        match key.to_ascii_uppercase().as_str() {
            "POINTS" => {
                let n: usize = tk.parse("point count")?;
                tk.word("point type")?;
                let v = tk.numbers(3 * n, "coordinate")?;
                points = v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
            }
            "POLYGONS" => triangles = read_cells(&mut tk, "POLYGONS")?,
            "VERTICES" | "LINES" | "TRIANGLE_STRIPS" => {
                let cells = read_raw_cells(&mut tk, key)?;
                if !cells.is_empty() {
                    return Err(Error::UnsupportedCell(format!("line {line}: {key} section")));
                }
            }
            "POINT_DATA" => section = Some((Association::Vertex, tk.parse("point data count")?)),
            "CELL_DATA" => section = Some((Association::Triangle, tk.parse("cell data count")?)),
            "SCALARS"
            | "VECTORS"
            | "NORMALS"
            | "TEXTURE_COORDINATES"
            | "FIELD"
            | "LOOKUP_TABLE"
            | "COLOR_SCALARS"
            | "TENSORS" => {
                let (assoc, count) = section
                    .ok_or_else(|| Error::parse(WHAT, format!("line {line}: {key} before POINT_DATA/CELL_DATA")))?;
                for attr in read_attribute(&mut tk, line, key, count)? {
                    pending.push((assoc, attr));
                }
            }
            other => {
                return Err(Error::parse(WHAT, format!("line {line}: unexpected keyword '{other}'")));
            }
        }
    }

    let mut mesh = Mesh::new(points, triangles)?;
    for (assoc, attr) in pending {
        let want = match assoc {
            Association::Vertex => mesh.points().len(),
            Association::Triangle => mesh.triangles().len(),
        };
        if attr.element_count() != want {
            return Err(Error::parse(
                WHAT,
                format!(
                    "attribute '{}' has {} elements, expected {want}",
                    attr.name,
                    attr.element_count()
                ),
            ));
        }
        mesh.add_attribute(attr)?;
    }
    Ok(mesh)
}

fn read_raw_cells(tk: &mut Tokens, key: &str) -> Result<Vec<Vec<usize>>> {
    let n: usize = tk.parse(&format!("{key} count"))?;
    let size: usize = tk.parse(&format!("{key} size"))?;
    if tk.peek().is_some_and(|(_, t)| t.eq_ignore_ascii_case("OFFSETS")) {
        tk.next();
        tk.word("offset type")?;
        let offsets: Vec<usize> = (0..n).map(|_| tk.parse("offset")).collect::<Result<_>>()?;
        let (_, conn_key) = tk.word("CONNECTIVITY")?;
        if !conn_key.eq_ignore_ascii_case("CONNECTIVITY") {
            return Err(Error::parse(WHAT, format!("expected CONNECTIVITY, found '{conn_key}'")));
        }
        tk.word("connectivity type")?;
        let conn: Vec<usize> = (0..size).map(|_| tk.parse("point index")).collect::<Result<_>>()?;
        let mut cells = Vec::new();
        for w in offsets.windows(2) {
            if w[0] > w[1] || w[1] > conn.len() {
                return Err(Error::parse(WHAT, format!("bad {key} offsets {} {}", w[0], w[1])));
            }
            cells.push(conn[w[0]..w[1]].to_vec());
        }
        Ok(cells)
    } else {
        let mut cells = Vec::with_capacity(n);
        let mut used = 0;
        for _ in 0..n {
            let k: usize = tk.parse("cell size")?;
            let cell: Vec<usize> = (0..k).map(|_| tk.parse("point index")).collect::<Result<_>>()?;
            used += k + 1;
            cells.push(cell);
        }
        if used != size {
            return Err(Error::parse(
                WHAT,
                format!("{key} size {size} does not match {used} listed values"),
            ));
        }
        Ok(cells)
    }
}

fn read_cells(tk: &mut Tokens, key: &str) -> Result<Vec<[usize; 3]>> {
    read_raw_cells(tk, key)?
        .into_iter()
        .enumerate()
        .map(|(c, cell)| match cell[..] {
            [a, b, d] => Ok([a + 1, b + 1, d + 1]),
            _ => Err(Error::UnsupportedCell(format!(
                "polygon {} has {} vertices; only triangles are supported",
                c + 1,
                cell.len()
            ))),
        })
        .collect()
}

fn decode_name(name: &str) -> String {
    name.replace("%20", " ")
}

fn read_attribute(tk: &mut Tokens, line: usize, key: &str, count: usize) -> Result<Vec<Attribute>> {
    let key = key.to_ascii_uppercase();
    match key.as_str() {
        "SCALARS" => {
            let rest = tk.rest_of_line(line);
            let name = rest
                .first()
                .ok_or_else(|| Error::parse(WHAT, format!("line {line}: SCALARS needs a name")))?;
            let comps = match rest.get(2) {
                Some(c) => c
                    .parse()
                    .map_err(|_| Error::parse(WHAT, format!("line {line}: bad component count '{c}'")))?,
                None => 1,
            };
            if tk.peek().is_some_and(|(_, t)| t.eq_ignore_ascii_case("LOOKUP_TABLE")) {
                let (l, _) = tk.next().unwrap();
                tk.rest_of_line(l);
            }
            let values = tk.numbers(comps * count, "scalar value")?;
            Ok(vec![Attribute::new(decode_name(name), comps, values)?])
        }
        "VECTORS" | "NORMALS" => {
            let rest = tk.rest_of_line(line);
            let name = rest
                .first()
                .ok_or_else(|| Error::parse(WHAT, format!("line {line}: {key} needs a name")))?;
            let values = tk.numbers(3 * count, "vector component")?;
            Ok(vec![Attribute::new(decode_name(name), 3, values)?])
        }
        "TEXTURE_COORDINATES" => {
            let rest = tk.rest_of_line(line);
            let (name, dim) = match rest[..] {
                [name, dim, ..] => (
                    name,
                    dim.parse()
                        .map_err(|_| Error::parse(WHAT, format!("line {line}: bad dimension '{dim}'")))?,
                ),
                _ => {
                    return Err(Error::parse(
                        WHAT,
                        format!("line {line}: TEXTURE_COORDINATES needs name and dimension"),
                    ))
                }
            };
            let values = tk.numbers(dim * count, "texture coordinate")?;
            Ok(vec![Attribute::new(decode_name(name), dim, values)?])
        }
        "COLOR_SCALARS" => {
            let rest = tk.rest_of_line(line);
            let (name, comps) = match rest[..] {
                [name, c, ..] => (
                    name,
                    c.parse()
                        .map_err(|_| Error::parse(WHAT, format!("line {line}: bad component count '{c}'")))?,
                ),
                _ => {
                    return Err(Error::parse(
                        WHAT,
                        format!("line {line}: COLOR_SCALARS needs name and count"),
                    ))
                }
            };
            let values = tk.numbers(comps * count, "colour value")?;
            Ok(vec![Attribute::new(decode_name(name), comps, values)?])
        }
        "TENSORS" => {
            let rest = tk.rest_of_line(line);
            let name = rest
                .first()
                .ok_or_else(|| Error::parse(WHAT, format!("line {line}: TENSORS needs a name")))?;
            let values = tk.numbers(9 * count, "tensor component")?;
            Ok(vec![Attribute::new(decode_name(name), 9, values)?])
        }
        "LOOKUP_TABLE" => {
            // a colour table definition: name size, then size RGBA tuples
            let rest = tk.rest_of_line(line);
            let size: usize = rest
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(WHAT, format!("line {line}: LOOKUP_TABLE needs a size")))?;
            tk.numbers(4 * size, "table entry")?;
            Ok(Vec::new())
        }
        "FIELD" => {
            let rest = tk.rest_of_line(line);
            let arrays: usize = rest
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::parse(WHAT, format!("line {line}: FIELD needs an array count")))?;
            let mut out = Vec::new();
            for _ in 0..arrays {
                let (_, name) = tk.word("field array name")?;
                let comps: usize = tk.parse("component count")?;
                let tuples: usize = tk.parse("tuple count")?;
                tk.word("field array type")?;
                let values = tk.numbers(comps * tuples, "field value")?;
                if tuples == count {
                    out.push(Attribute::new(decode_name(name), comps, values)?);
                }
            }
            Ok(out)
        }
        _ => unreachable!("caller filters keywords"),
    }
}

pub fn write_vtk_mesh(path: impl AsRef<Path>, mesh: &Mesh) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_vtk_mesh(mesh)).map_err(|e| Error::io(path, e))
}

pub fn format_vtk_mesh(mesh: &Mesh) -> String {
    let mut s = String::from("# vtk DataFile Version 4.2\nmedkit mesh\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(s, "POINTS {} double", mesh.points().len());
    for p in mesh.points() {
        let _ = writeln!(s, "{:?} {:?} {:?}", p[0], p[1], p[2]);
    }
    let t = mesh.triangles().len();
    let _ = writeln!(s, "POLYGONS {t} {}", 4 * t);
    for tri in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", tri[0] - 1, tri[1] - 1, tri[2] - 1);
    }
    for (assoc, header, count) in [
        (Association::Vertex, "POINT_DATA", mesh.points().len()),
        (Association::Triangle, "CELL_DATA", t),
    ] {
        let attrs: Vec<&Attribute> = mesh
            .attributes()
            .iter()
            .filter(|a| mesh.association(a) == Some(assoc))
            .collect();
        if attrs.is_empty() {
            continue;
        }
        let _ = writeln!(s, "{header} {count}");
        for a in attrs {
            let name = a.name.replace(' ', "%20");
            match a.components {
                3 => {
                    let _ = writeln!(s, "VECTORS {name} double");
                }
                1..=4 => {
                    let _ = writeln!(s, "SCALARS {name} double {}\nLOOKUP_TABLE default", a.components);
                }
                c => {
                    let _ = writeln!(s, "FIELD FieldData 1\n{name} {c} {count} double");
                }
            }
            for e in 0..a.element_count() {
                let row: Vec<String> = a.element(e).iter().map(|v| format!("{v:?}")).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUAD: &str = "# vtk DataFile Version 4.2\nq\nASCII\nDATASET POLYDATA\nPOINTS 4 float\n0 0 0 1 0 0 1 1 0 0 1 0\nPOLYGONS 1 5\n4 0 1 2 3\n";

    #[test]
    fn quad_is_unsupported() {
        assert!(matches!(parse_vtk_mesh(QUAD), Err(Error::UnsupportedCell(_))));
    }

    #[test]
    fn wrong_dataset_is_parse_error() {
        let text = QUAD.replace("POLYDATA", "STRUCTURED_POINTS");
        assert!(matches!(parse_vtk_mesh(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn scalar_round_trip() {
        let mut m = crate::mesh::sphere_mesh(&[0.0; 3], 2.0, 6).unwrap();
        let h: Vec<f64> = m.points().iter().map(|p| p[2] / 3.0).collect();
        m.add_attribute(Attribute::scalars("my height", h.clone())).unwrap();
        let back = parse_vtk_mesh(&format_vtk_mesh(&m)).unwrap();
        let a = back.attribute("my height").unwrap();
        assert_eq!(a.values, h);
        assert_eq!(back.association(a), Some(Association::Vertex));
        assert_eq!(back.points(), m.points());
        assert_eq!(back.triangles(), m.triangles());
    }
}
