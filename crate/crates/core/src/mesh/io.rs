//! OBJ and OFF readers and writers.
//!
//! Only vertex and face records are interpreted. Everything after the `v`
//! keyword (OBJ) or the whole vertex line (OFF) is kept verbatim as the
//! vertex's coordinate payload. Indices are 0-based in memory.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::{PolyMesh, QtMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Obj,
    Off,
}

impl Format {
    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(Format::Obj),
            "off" => Some(Format::Off),
            _ => None,
        }
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "obj" => Ok(Format::Obj),
            "off" => Ok(Format::Off),
            other => Err(format!("unknown mesh format '{other}'")),
        }
    }
}

/// Loads a triangle/quad mesh. Faces with more than four sides are rejected;
/// use [`load_polygon_mesh`] and `preprocess::split_large_polygons` for those.
pub fn load_mesh(bytes: &[u8], format: Format) -> Result<QtMesh> {
    QtMesh::try_from(load_polygon_mesh(bytes, format)?)
}

pub fn load_polygon_mesh(bytes: &[u8], format: Format) -> Result<PolyMesh> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("not UTF-8: {e}"),
    })?;
    let (coords, faces) = match format {
        Format::Obj => parse_obj(text)?,
        Format::Off => parse_off(text)?,
    };
    PolyMesh::new(coords.len(), &faces)?.with_coords(coords)
}

fn parse_obj(text: &str) -> Result<(Vec<String>, Vec<Vec<usize>>)> {
    let mut coords = Vec::new();
    let mut raw_faces: Vec<(usize, Vec<i64>)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        let Some((kw, rest)) = split_keyword(line) else {
            continue;
        };
        match kw {
            "v" => coords.push(rest.trim().to_string()),
            "f" => {
                let mut face = Vec::new();
                for tok in rest.split_whitespace() {
                    let idx = tok.split('/').next().unwrap_or("");
                    let i: i64 = idx.parse().map_err(|_| Error::Parse {
                        line: ln + 1,
                        msg: format!("bad face index '{tok}'"),
                    })?;
                    if i == 0 {
                        return Err(Error::Parse {
                            line: ln + 1,
                            msg: "OBJ indices are 1-based; found 0".into(),
                        });
                    }
                    // negative indices are relative to the vertices read so far
                    face.push(if i < 0 { coords.len() as i64 + i } else { i - 1 });
                }
                raw_faces.push((ln + 1, face));
            }
            _ => {}
        }
    }
    let n = coords.len();
    let faces = raw_faces
        .into_iter()
        .enumerate()
        .map(|(f, (_, face))| to_indices(f, &face, n))
        .collect::<Result<Vec<_>>>()?;
    Ok((coords, faces))
}

fn split_keyword(line: &str) -> Option<(&str, &str)> {
    if line.is_empty() {
        return None;
    }
    Some(match line.find(char::is_whitespace) {
        Some(i) => (&line[..i], &line[i..]),
        None => (line, ""),
    })
}

fn to_indices(face_idx: usize, face: &[i64], n: usize) -> Result<Vec<usize>> {
    face.iter()
        .map(|&i| {
            if i < 0 || i as usize >= n {
                Err(Error::IndexOutOfRange {
                    face: face_idx,
                    index: i,
                    vertex_count: n,
                })
            } else {
                Ok(i as usize)
            }
        })
        .collect()
}

fn parse_off(text: &str) -> Result<(Vec<String>, Vec<Vec<usize>>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let parse_err = |line: usize, msg: &str| Error::Parse {
        line,
        msg: msg.to_string(),
    };

    let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "empty OFF file"))?;
    let mut counts_line = None;
    if let Some(rest) = header.strip_prefix("OFF") {
        if !rest.trim().is_empty() {
            counts_line = Some((ln, rest.trim()));
        }
    } else {
        return Err(parse_err(ln, "missing OFF header"));
    }
    let (ln, counts) = match counts_line {
        Some(c) => c,
        None => lines.next().ok_or_else(|| parse_err(ln, "missing counts"))?,
    };
    let nums: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, "bad count")))
        .collect::<Result<_>>()?;
    if nums.len() < 2 {
        return Err(parse_err(ln, "expected vertex and face counts"));
    }
    let (nv, nf) = (nums[0], nums[1]);

    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (_, l) = lines.next().ok_or_else(|| parse_err(ln, "truncated vertex block"))?;
        coords.push(l.to_string());
    }
    let mut faces = Vec::with_capacity(nf);
    for f in 0..nf {
        let (fl, l) = lines.next().ok_or_else(|| parse_err(ln, "truncated face block"))?;
        let mut toks = l.split_whitespace();
        let k: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(fl, "bad face size"))?;
        let idx: Vec<i64> = toks
            .by_ref()
            .take(k)
            .map(|t| t.parse().map_err(|_| parse_err(fl, "bad face index")))
            .collect::<Result<_>>()?;
        if idx.len() != k {
            return Err(parse_err(fl, "face has fewer indices than declared"));
        }
        faces.push(to_indices(f, &idx, nv)?);
    }
    Ok((coords, faces))
}

fn coord_of(mesh: &PolyMesh, v: usize) -> &str {
    mesh.coords().map(|c| c[v].as_str()).unwrap_or("0 0 0")
}

pub fn write_obj(mesh: &PolyMesh) -> String {
    let mut s = String::new();
    for v in 0..mesh.vertex_count() {
        let _ = writeln!(s, "v {}", coord_of(mesh, v));
    }
    for face in mesh.faces() {
        s.push('f');
        for &v in face {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    }
    s
}

pub fn write_off(mesh: &PolyMesh) -> String {
    let mut s = String::from("OFF\n");
    let _ = writeln!(s, "{} {} {}", mesh.vertex_count(), mesh.face_count(), mesh.edge_count());
    for v in 0..mesh.vertex_count() {
        let _ = writeln!(s, "{}", coord_of(mesh, v));
    }
    for face in mesh.faces() {
        let _ = write!(s, "{}", face.len());
        for &v in face {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    s
}

pub fn write_mesh(mesh: &PolyMesh, format: Format) -> String {
    match format {
        Format::Obj => write_obj(mesh),
        Format::Off => write_off(mesh),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate;

    const CUBE_OFF: &str = "OFF
8 6 12
0 0 0
1 0 0
0 1 0
1 1 0
0 0 1
1 0 1
0 1 1
1 1 1
4 0 2 3 1
4 4 5 7 6
4 0 1 5 4
4 2 6 7 3
4 0 4 6 2
4 1 3 7 5
";

    #[test]
    fn off_cube() {
        let m = load_mesh(CUBE_OFF.as_bytes(), Format::Off).unwrap();
        let t = m.topo_counts();
        assert_eq!((t.v, t.q, t.t), (8, 6, 0));
        assert_eq!(m.coords().unwrap()[7], "1 1 1");
    }

    #[test]
    fn obj_degenerate_face() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 2\n";
        let err = load_mesh(src.as_bytes(), Format::Obj).unwrap_err();
        assert!(err.to_string().contains("degenerate face"), "{err}");
    }

    #[test]
    fn off_non_manifold_edge() {
        let src = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n1 1 1\n3 0 1 2\n3 1 0 3\n3 0 1 4\n";
        let err = load_mesh(src.as_bytes(), Format::Off).unwrap_err();
        assert!(err.to_string().contains("non-manifold edge"), "{err}");
    }

    #[test]
    fn obj_slash_and_negative_indices() {
        let src = "# tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1/1 -2/1 -1\n";
        let m = load_mesh(src.as_bytes(), Format::Obj).unwrap();
        assert_eq!(m.face(0), &[0, 1, 2]);
    }

    #[test]
    fn off_header_with_counts_and_large_faces() {
        let src = "OFF 5 1 0\n0 0 0\n1 0 0\n2 1 0\n1 2 0\n0 1 0\n5 0 1 2 3 4\n";
        assert!(matches!(
            load_mesh(src.as_bytes(), Format::Off),
            Err(Error::FaceTooLarge { size: 5, .. })
        ));
        let p = load_polygon_mesh(src.as_bytes(), Format::Off).unwrap();
        assert_eq!(p.face_size(0), 5);
    }

    #[test]
    fn writers_round_trip_connectivity() {
        let m = generate::grid(3, 2);
        for fmt in [Format::Obj, Format::Off] {
            let text = write_mesh(&m, fmt);
            let back = load_mesh(text.as_bytes(), fmt).unwrap();
            assert_eq!(back.as_poly(), m.as_poly());
            assert_eq!(back.coords(), m.coords());
        }
    }
}
