//! OBJ and ASCII PLY reading and writing.
//!
//! Only positions and triangle connectivity are kept. Polygon faces are
//! fan-triangulated around their first vertex. Normals, texture coordinates
//! and colors are skipped. Coordinates are written with Rust's shortest
//! round-trip float formatting, so a save/load cycle is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use tracing::debug;

use crate::error::{Error, Result};
use crate::mesh::{Face, Point, TriangleMesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
    /// Pick from the file extension.
    Auto,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::PlyAscii),
            _ => None,
        }
    }

    fn resolve(self, path: &Path) -> Result<MeshFormat> {
        match self {
            MeshFormat::Auto => MeshFormat::from_path(path).ok_or_else(|| {
                Error::UnsupportedFormat(format!("cannot infer format of {}", path.display()))
            }),
            f => Ok(f),
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriangleMesh> {
    let format = format.resolve(path)?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mesh = match format {
        MeshFormat::Obj => read_obj(reader),
        MeshFormat::PlyAscii => read_ply(reader),
        MeshFormat::Auto => unreachable!(),
    }
    .map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    debug!(
        "loaded {}: {} vertices, {} faces",
        path.display(),
        mesh.vertex_count(),
        mesh.face_count()
    );
    Ok(mesh)
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path, format: MeshFormat) -> Result<()> {
    let format = format.resolve(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        MeshFormat::Obj => write_obj(mesh, &mut w),
        MeshFormat::PlyAscii => write_ply(mesh, &mut w),
        MeshFormat::Auto => unreachable!(),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

fn fan(poly: &[usize], faces: &mut Vec<Face>) {
    for k in 1..poly.len() - 1 {
        faces.push([poly[0], poly[k], poly[k + 1]]);
    }
}

fn parse_f64(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?;
    tok.parse::<f64>()
        .map_err(|_| Error::parse(line, format!("bad {what} '{tok}'")))
}

/// Parse OBJ text.
pub fn read_obj<R: BufRead>(reader: R) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut poly = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io("<obj>", e))?;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), lineno, "x")?;
                let y = parse_f64(toks.next(), lineno, "y")?;
                let z = parse_f64(toks.next(), lineno, "z")?;
                if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                    return Err(Error::NonFiniteCoordinate {
                        vertex: vertices.len(),
                    });
                }
                vertices.push(Point::new(x, y, z));
            }
            Some("f") => {
                poly.clear();
                for tok in toks {
                    let head = tok.split('/').next().unwrap_or("");
                    let raw: i64 = head
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad face index '{tok}'")))?;
                    // 1-based; negative indices count back from the latest vertex
                    let idx = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        return Err(Error::parse(lineno, "face index 0"));
                    };
                    if idx < 0 {
                        return Err(Error::InvalidIndex {
                            face: faces.len(),
                            index: raw,
                            vertex_count: vertices.len(),
                        });
                    }
                    poly.push(idx as usize);
                }
                if poly.len() < 3 {
                    return Err(Error::parse(lineno, "face with fewer than 3 vertices"));
                }
                fan(&poly, &mut faces);
            }
            _ => {}
        }
    }
    // forward references are legal in OBJ, so range checks wait until the end
    TriangleMesh::new(vertices, faces)
}

pub fn write_obj<W: Write>(mesh: &TriangleMesh, w: &mut W) -> std::io::Result<()> {
    for v in &mesh.vertices {
        writeln!(w, "v {:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
    has_list: bool,
}

/// Parse ASCII PLY text.
pub fn read_ply<R: BufRead>(reader: R) -> Result<TriangleMesh> {
    let mut lines = reader.lines().enumerate();
    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((i, l)) => Ok(Some((i + 1, l.map_err(|e| Error::io("<ply>", e))?))),
        }
    };

    match next_line()? {
        Some((_, l)) if l.trim() == "ply" => {}
        Some((n, _)) => return Err(Error::parse(n, "missing 'ply' magic")),
        None => return Err(Error::parse(1, "empty file")),
    }

    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        let (n, line) = next_line()?.ok_or_else(|| Error::parse(0, "unterminated header"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", _] => {}
            ["format", other, ..] => return Err(Error::UnsupportedFormat(format!("ply format '{other}'"))),
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| Error::parse(n, format!("bad element count '{count}'")))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            ["property", "list", _, _, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(n, "property before element"))?;
                el.properties.push(name.to_string());
                el.has_list = true;
            }
            ["property", _, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| Error::parse(n, "property before element"))?;
                el.properties.push(name.to_string());
            }
            ["end_header"] => break,
            _ => return Err(Error::parse(n, format!("unrecognised header line '{line}'"))),
        }
    }

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut poly = Vec::new();
    for el in &elements {
        match el.name.as_str() {
            "vertex" => {
                let pos = |axis: &str| el.properties.iter().position(|p| p == axis);
                let (ix, iy, iz) = match (pos("x"), pos("y"), pos("z")) {
                    (Some(x), Some(y), Some(z)) => (x, y, z),
                    _ => return Err(Error::parse(0, "vertex element lacks x/y/z")),
                };
                if el.has_list {
                    return Err(Error::UnsupportedFormat("list property on vertex".into()));
                }
                for _ in 0..el.count {
                    let (n, line) = next_line()?.ok_or_else(|| Error::parse(0, "truncated vertex list"))?;
                    let toks: Vec<&str> = line.split_whitespace().collect();
                    let x = parse_f64(toks.get(ix).copied(), n, "x")?;
                    let y = parse_f64(toks.get(iy).copied(), n, "y")?;
                    let z = parse_f64(toks.get(iz).copied(), n, "z")?;
                    if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                        return Err(Error::NonFiniteCoordinate {
                            vertex: vertices.len(),
                        });
                    }
                    vertices.push(Point::new(x, y, z));
                }
            }
            "face" => {
                if el.properties.len() != 1 || !el.has_list {
                    return Err(Error::UnsupportedFormat(
                        "face element must hold exactly one index list".into(),
                    ));
                }
                for _ in 0..el.count {
                    let (n, line) = next_line()?.ok_or_else(|| Error::parse(0, "truncated face list"))?;
                    let mut toks = line.split_whitespace();
                    let k: usize = toks
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| Error::parse(n, "bad face vertex count"))?;
                    poly.clear();
                    for _ in 0..k {
                        let idx: i64 = toks
                            .next()
                            .and_then(|t| t.parse().ok())
                            .ok_or_else(|| Error::parse(n, "bad face index"))?;
                        if idx < 0 {
                            return Err(Error::InvalidIndex {
                                face: faces.len(),
                                index: idx,
                                vertex_count: vertices.len(),
                            });
                        }
                        poly.push(idx as usize);
                    }
                    if k < 3 {
                        return Err(Error::parse(n, "face with fewer than 3 vertices"));
                    }
                    fan(&poly, &mut faces);
                }
            }
            _ => {
                for _ in 0..el.count {
                    next_line()?.ok_or_else(|| Error::parse(0, "truncated element data"))?;
                }
            }
        }
    }
    TriangleMesh::new(vertices, faces)
}

pub fn write_ply<W: Write>(mesh: &TriangleMesh, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    writeln!(w, "property double x")?;
    writeln!(w, "property double y")?;
    writeln!(w, "property double z")?;
    writeln!(w, "element face {}", mesh.faces.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for v in &mesh.vertices {
        writeln!(w, "{:?} {:?} {:?}", v.x, v.y, v.z)?;
    }
    for f in &mesh.faces {
        writeln!(w, "3 {} {} {}", f[0], f[1], f[2])?;
    }
    Ok(())
}
