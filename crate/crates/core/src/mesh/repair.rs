//! Mesh validation and repair: vertex welding, degenerate/duplicate face
//! removal, winding unification, hole filling.
//!
//! The contract is all-or-nothing: the returned mesh is watertight and
//! orientable, or the call errors. No partially repaired mesh escapes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::io::Welder;
use super::topology::{connected_components, edge_key, edge_use_counts, submesh};
use super::TriangleMesh;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RepairOptions {
    /// Vertex weld tolerance, m.
    pub weld_tolerance: f64,
    /// Reject holes with longer boundaries than this.
    pub max_hole_edges: usize,
    /// Triangles below this area are dropped as degenerate, m².
    pub min_triangle_area: f64,
}

impl Default for RepairOptions {
    fn default() -> Self {
        Self { weld_tolerance: 1e-7, max_hole_edges: 100, min_triangle_area: 1e-16 }
    }
}

/// What repair changed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RepairReport {
    pub welded_vertices: usize,
    pub removed_degenerate: usize,
    pub removed_duplicate: usize,
    pub flipped_triangles: usize,
    pub flipped_components: usize,
    pub holes_filled: usize,
    pub hole_edges_filled: usize,
    pub components: usize,
}

impl RepairReport {
    pub fn is_clean(&self) -> bool {
        self.welded_vertices == 0
            && self.removed_degenerate == 0
            && self.removed_duplicate == 0
            && self.flipped_triangles == 0
            && self.flipped_components == 0
            && self.holes_filled == 0
    }
}

/// Repairs a mesh into watertight, orientable form, or reports why it
/// cannot be.
pub fn validate_and_repair(
    mesh: &TriangleMesh,
    options: &RepairOptions,
) -> Result<(TriangleMesh, RepairReport)> {
    if mesh.is_empty() {
        return Err(Error::DegenerateMesh("repair of empty mesh".into()));
    }
    if !mesh.indices_in_range() {
        return Err(Error::MeshFormat("triangle index out of range".into()));
    }
    let mut report = RepairReport::default();

    // 1. Weld vertices.
    let mut welder = Welder::with_tolerance(options.weld_tolerance);
    let remap: Vec<u32> = mesh.vertices.iter().map(|&p| welder.index(p)).collect();
    report.welded_vertices = mesh.vertices.len() - welder.vertices.len();
    let mut work = TriangleMesh {
        vertices: welder.vertices,
        triangles: mesh
            .triangles
            .iter()
            .map(|t| [remap[t[0] as usize], remap[t[1] as usize], remap[t[2] as usize]])
            .collect(),
        units_scale: mesh.units_scale,
    };

    // 2. Drop degenerate triangles.
    let before = work.triangles.len();
    let kept: Vec<[u32; 3]> = work
        .triangles
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            t[0] != t[1]
                && t[1] != t[2]
                && t[0] != t[2]
                && triangle_area(&work, **t) > options.min_triangle_area
                && {
                    let _ = i;
                    true
                }
        })
        .map(|(_, t)| *t)
        .collect();
    work.triangles = kept;
    report.removed_degenerate = before - work.triangles.len();

    // 3. Drop duplicate faces: same vertex set, either winding. An
    // opposite-winding pair is a zero-thickness membrane; both copies go.
    let mut seen: HashMap<[u32; 3], Vec<(usize, bool)>> = HashMap::new();
    for (i, t) in work.triangles.iter().enumerate() {
        let mut key = *t;
        key.sort_unstable();
        let ccw_of_key = is_even_permutation(*t, key);
        seen.entry(key).or_default().push((i, ccw_of_key));
    }
    let mut drop = vec![false; work.triangles.len()];
    for entries in seen.values() {
        if entries.len() <= 1 {
            continue;
        }
        let fwd = entries.iter().filter(|(_, w)| *w).count();
        let rev = entries.len() - fwd;
        // Keep one survivor only when one orientation strictly outnumbers
        // the other; balanced pairs cancel entirely.
        let (keep_orientation, keep_count) = if fwd > rev {
            (true, 1)
        } else if rev > fwd {
            (false, 1)
        } else {
            (true, 0)
        };
        let mut kept_so_far = 0;
        for &(i, w) in entries {
            if w == keep_orientation && kept_so_far < keep_count {
                kept_so_far += 1;
            } else {
                drop[i] = true;
            }
        }
    }
    let before = work.triangles.len();
    work.triangles = work
        .triangles
        .iter()
        .zip(&drop)
        .filter(|(_, &d)| !d)
        .map(|(t, _)| *t)
        .collect();
    report.removed_duplicate = before - work.triangles.len();

    if work.triangles.is_empty() {
        return Err(Error::DegenerateMesh("no triangles survive cleanup".into()));
    }

    // Non-manifold edges cannot be repaired by this pass.
    let max_use = edge_use_counts(&work).values().map(|&(f, r)| f + r).max().unwrap_or(0);
    if max_use > 2 {
        return Err(Error::Unrepairable(format!(
            "non-manifold edges remain (an edge is used {max_use} times)"
        )));
    }

    // 4. Unify winding by flood fill over shared edges.
    report.flipped_triangles = unify_winding(&mut work);

    // 5. Fill holes with a centroid fan per boundary loop.
    let loops = boundary_loops(&work);
    for lp in &loops {
        if lp.len() > options.max_hole_edges {
            return Err(Error::Unrepairable(format!(
                "hole with {} boundary edges exceeds limit {}",
                lp.len(),
                options.max_hole_edges
            )));
        }
    }
    for lp in &loops {
        fill_loop(&mut work, lp);
        report.holes_filled += 1;
        report.hole_edges_filled += lp.len();
    }

    // 6. Orient each closed component outward.
    let components = connected_components(&work);
    report.components = components.len();
    for comp in &components {
        let sub = submesh(&work, comp);
        if sub.signed_volume() < 0.0 {
            for &ti in comp {
                work.triangles[ti].swap(1, 2);
            }
            report.flipped_components += 1;
        }
    }

    // Final gate: watertight or error.
    if !super::topology::is_watertight(&work) {
        return Err(Error::Unrepairable(
            "mesh is not watertight after repair".into(),
        ));
    }
    Ok((work, report))
}

fn triangle_area(mesh: &TriangleMesh, t: [u32; 3]) -> f64 {
    let a = mesh.vertices[t[0] as usize];
    let b = mesh.vertices[t[1] as usize];
    let c = mesh.vertices[t[2] as usize];
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// True when `tri` is an even permutation of `sorted`.
fn is_even_permutation(tri: [u32; 3], sorted: [u32; 3]) -> bool {
    // Even permutations of (0,1,2): identity and the two rotations.
    let pos = |v: u32| sorted.iter().position(|&s| s == v).unwrap();
    let p = [pos(tri[0]), pos(tri[1]), pos(tri[2])];
    matches!(p, [0, 1, 2] | [1, 2, 0] | [2, 0, 1])
}

/// Flood fill: neighbors across a shared edge must traverse it in opposite
/// directions. Returns the number of flipped triangles.
fn unify_winding(mesh: &mut TriangleMesh) -> usize {
    let mut edge_to_tris: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (ti, t) in mesh.triangles.iter().enumerate() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edge_to_tris.entry(edge_key(a, b)).or_default().push(ti);
        }
    }
    let n = mesh.triangles.len();
    let mut visited = vec![false; n];
    let mut flipped = 0;
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        let mut stack = vec![seed];
        while let Some(ti) = stack.pop() {
            let t = mesh.triangles[ti];
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                for &other in &edge_to_tris[&edge_key(a, b)] {
                    if other == ti || visited[other] {
                        continue;
                    }
                    visited[other] = true;
                    if traverses(&mesh.triangles[other], a, b) {
                        // Same direction on the shared edge: inconsistent.
                        mesh.triangles[other].swap(1, 2);
                        flipped += 1;
                    }
                    stack.push(other);
                }
            }
        }
    }
    flipped
}

/// Does the triangle traverse directed edge a→b?
fn traverses(t: &[u32; 3], a: u32, b: u32) -> bool {
    (t[0] == a && t[1] == b) || (t[1] == a && t[2] == b) || (t[2] == a && t[0] == b)
}

/// Directed boundary loops (edges used exactly once), each as the vertex
/// cycle in traversal order.
fn boundary_loops(mesh: &TriangleMesh) -> Vec<Vec<u32>> {
    let counts = edge_use_counts(mesh);
    // to -> from is unambiguous for manifold boundaries; store from -> to.
    let mut next: HashMap<u32, u32> = HashMap::new();
    for t in &mesh.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let (f, r) = counts[&edge_key(a, b)];
            if f + r == 1 {
                next.insert(a, b);
            }
        }
    }
    let mut loops = Vec::new();
    let mut starts: Vec<u32> = next.keys().copied().collect();
    starts.sort_unstable();
    let mut consumed: std::collections::HashSet<u32> = std::collections::HashSet::new();
    for start in starts {
        if consumed.contains(&start) {
            continue;
        }
        let mut lp = vec![start];
        consumed.insert(start);
        let mut cur = next[&start];
        while cur != start {
            lp.push(cur);
            consumed.insert(cur);
            match next.get(&cur) {
                Some(&n) => cur = n,
                None => break, // open chain: leave it; final gate rejects
            }
        }
        loops.push(lp);
    }
    loops
}

/// Fan-fills one boundary loop about its centroid. Boundary edges are
/// traversed a→b by the surface, so fill triangles run b→a.
fn fill_loop(mesh: &mut TriangleMesh, lp: &[u32]) {
    let centroid = lp
        .iter()
        .fold(nalgebra::Vector3::zeros(), |acc, &v| acc + mesh.vertices[v as usize].coords)
        / lp.len() as f64;
    mesh.vertices.push(nalgebra::Point3::from(centroid));
    let c = (mesh.vertices.len() - 1) as u32;
    for i in 0..lp.len() {
        let a = lp[i];
        let b = lp[(i + 1) % lp.len()];
        mesh.triangles.push([b, a, c]);
    }
}
