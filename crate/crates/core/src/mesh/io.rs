//! STL (ASCII and binary) and OBJ mesh I/O.
//!
//! Loaders weld duplicate vertices within 1e-7 m and apply the units scale
//! so that in-memory coordinates are always meters.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use nalgebra::Point3;

use super::TriangleMesh;
use crate::error::{Error, Result};

/// Supported mesh file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Stl,
    Obj,
}

impl MeshFormat {
    /// Guess from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()) {
            Some(ref e) if e == "stl" => Ok(MeshFormat::Stl),
            Some(ref e) if e == "obj" => Ok(MeshFormat::Obj),
            other => Err(Error::MeshFormat(format!(
                "unsupported mesh extension {:?} for {}",
                other,
                path.display()
            ))),
        }
    }
}

/// Welding tolerance for loaded vertices, meters.
pub const WELD_TOLERANCE: f64 = 1e-7;

/// Loads a mesh file. `units_scale` is meters per model unit and is applied
/// to every coordinate.
pub fn load_mesh(path: &Path, format: MeshFormat, units_scale: f64) -> Result<TriangleMesh> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::MeshFormat(format!("cannot read {}: {e}", path.display())))?;
    load_mesh_bytes(&bytes, format, units_scale)
}

/// Loads a mesh from raw file bytes.
pub fn load_mesh_bytes(bytes: &[u8], format: MeshFormat, units_scale: f64) -> Result<TriangleMesh> {
    if !(units_scale.is_finite() && units_scale > 0.0) {
        return Err(Error::Config(format!("units_scale must be positive, got {units_scale}")));
    }
    let mut mesh = match format {
        MeshFormat::Stl => load_stl(bytes)?,
        MeshFormat::Obj => load_obj(bytes)?,
    };
    if units_scale != 1.0 {
        mesh.map_vertices(|p| Point3::from(p.coords * units_scale));
    }
    mesh.units_scale = units_scale;
    if mesh.is_empty() {
        return Err(Error::DegenerateMesh("mesh contains no triangles".into()));
    }
    Ok(mesh)
}

fn load_stl(bytes: &[u8]) -> Result<TriangleMesh> {
    // An ASCII STL starts with "solid", but so do some binary exporters;
    // sniff for "facet"/"endsolid" in the first chunk to disambiguate.
    let head = &bytes[..bytes.len().min(1024)];
    let looks_ascii = bytes.starts_with(b"solid")
        && (head.windows(5).any(|w| w == b"facet")
            || head.windows(8).any(|w| w == b"endsolid"));
    if looks_ascii {
        load_stl_ascii(bytes)
    } else {
        load_stl_binary(bytes)
    }
}

fn load_stl_ascii(bytes: &[u8]) -> Result<TriangleMesh> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::MeshFormat("ASCII STL is not valid UTF-8".into()))?;
    let mut welder = Welder::new();
    let mut triangles = Vec::new();
    let mut current: Vec<Point3<f64>> = Vec::with_capacity(3);
    for (lineno, line) in text.lines().enumerate() {
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("vertex") => {
                let mut coord = [0.0f64; 3];
                for c in &mut coord {
                    *c = tok
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| {
                            Error::MeshFormat(format!("bad vertex on line {}", lineno + 1))
                        })?;
                }
                current.push(Point3::new(coord[0], coord[1], coord[2]));
            }
            Some("endfacet") => {
                if current.len() != 3 {
                    return Err(Error::MeshFormat(format!(
                        "facet with {} vertices on line {}",
                        current.len(),
                        lineno + 1
                    )));
                }
                let tri = [
                    welder.index(current[0]),
                    welder.index(current[1]),
                    welder.index(current[2]),
                ];
                triangles.push(tri);
                current.clear();
            }
            _ => {}
        }
    }
    Ok(TriangleMesh::new(welder.vertices, triangles))
}

fn load_stl_binary(bytes: &[u8]) -> Result<TriangleMesh> {
    if bytes.len() < 84 {
        return Err(Error::MeshFormat("binary STL shorter than header".into()));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = 84 + count * 50;
    if bytes.len() < expected {
        return Err(Error::MeshFormat(format!(
            "binary STL truncated: {} bytes, {} facets need {}",
            bytes.len(),
            count,
            expected
        )));
    }
    let mut welder = Welder::new();
    let mut triangles = Vec::with_capacity(count);
    for f in 0..count {
        let base = 84 + f * 50 + 12; // skip facet normal
        let mut tri = [0u32; 3];
        for (v, slot) in tri.iter_mut().enumerate() {
            let off = base + v * 12;
            let x = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            let y = f32::from_le_bytes(bytes[off + 4..off + 8].try_into().unwrap());
            let z = f32::from_le_bytes(bytes[off + 8..off + 12].try_into().unwrap());
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return Err(Error::MeshFormat(format!("non-finite vertex in facet {f}")));
            }
            *slot = welder.index(Point3::new(x as f64, y as f64, z as f64));
        }
        triangles.push(tri);
    }
    Ok(TriangleMesh::new(welder.vertices, triangles))
}

fn load_obj(bytes: &[u8]) -> Result<TriangleMesh> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| Error::MeshFormat("OBJ is not valid UTF-8".into()))?;
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut coord = [0.0f64; 3];
                for c in &mut coord {
                    *c = tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| {
                        Error::MeshFormat(format!("bad vertex on line {}", lineno + 1))
                    })?;
                }
                vertices.push(Point3::new(coord[0], coord[1], coord[2]));
            }
            Some("f") => {
                let idx: Vec<u32> = tok
                    .map(|part| parse_obj_index(part, vertices.len(), lineno))
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(Error::MeshFormat(format!(
                        "face with {} vertices on line {}",
                        idx.len(),
                        lineno + 1
                    )));
                }
                // Fan-triangulate polygon faces.
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    // Weld after load: OBJ files may still contain duplicated positions.
    let mut welder = Welder::new();
    let remap: Vec<u32> = vertices.iter().map(|&p| welder.index(p)).collect();
    let triangles = triangles
        .into_iter()
        .map(|t| [remap[t[0] as usize], remap[t[1] as usize], remap[t[2] as usize]])
        .collect();
    Ok(TriangleMesh::new(welder.vertices, triangles))
}

/// OBJ face token: `i`, `i/t`, `i//n`, or `i/t/n`; 1-based, negatives count
/// from the end.
fn parse_obj_index(part: &str, vertex_count: usize, lineno: usize) -> Result<u32> {
    let first = part.split('/').next().unwrap_or("");
    let raw: i64 = first
        .parse()
        .map_err(|_| Error::MeshFormat(format!("bad face index {part:?} on line {}", lineno + 1)))?;
    let resolved = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        vertex_count as i64 + raw
    } else {
        -1
    };
    if resolved < 0 || resolved >= vertex_count as i64 {
        return Err(Error::MeshFormat(format!(
            "face index {raw} out of range (have {vertex_count} vertices) on line {}",
            lineno + 1
        )));
    }
    Ok(resolved as u32)
}

/// Writes a binary STL. Output bytes are deterministic for a given mesh.
pub fn save_stl_binary(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut out = Vec::with_capacity(84 + mesh.triangles.len() * 50);
    out.extend_from_slice(&[0u8; 80]);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle_points(t);
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for v in [n.x, n.y, n.z] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        for p in [a, b, c] {
            for v in [p.x, p.y, p.z] {
                out.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&[0u8; 2]);
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes an OBJ with vertices and faces only.
pub fn save_obj(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for v in &mesh.vertices {
        writeln!(f, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(f, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// Position welding with a quantized spatial hash; merges points closer
/// than [`WELD_TOLERANCE`].
pub(crate) struct Welder {
    pub vertices: Vec<Point3<f64>>,
    buckets: HashMap<(i64, i64, i64), Vec<u32>>,
    tol: f64,
}

impl Welder {
    pub fn new() -> Self {
        Self::with_tolerance(WELD_TOLERANCE)
    }

    pub fn with_tolerance(tol: f64) -> Self {
        Self { vertices: Vec::new(), buckets: HashMap::new(), tol }
    }

    fn cell(&self, p: &Point3<f64>) -> (i64, i64, i64) {
        (
            (p.x / self.tol).floor() as i64,
            (p.y / self.tol).floor() as i64,
            (p.z / self.tol).floor() as i64,
        )
    }

    pub fn index(&mut self, p: Point3<f64>) -> u32 {
        let (cx, cy, cz) = self.cell(&p);
        let tol2 = self.tol * self.tol;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = self.buckets.get(&(cx + dx, cy + dy, cz + dz)) {
                        for &id in ids {
                            if (self.vertices[id as usize] - p).norm_squared() <= tol2 {
                                return id;
                            }
                        }
                    }
                }
            }
        }
        let id = self.vertices.len() as u32;
        self.vertices.push(p);
        self.buckets.entry((cx, cy, cz)).or_default().push(id);
        id
    }
}
