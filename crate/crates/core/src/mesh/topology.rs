//! Edge topology queries: watertightness, boundary edges, connected
//! components.

use std::collections::HashMap;

use super::TriangleMesh;

/// Undirected edge key with deterministic ordering.
pub(crate) fn edge_key(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Map undirected edge -> (times traversed a<b, times traversed b<a).
pub(crate) fn edge_use_counts(mesh: &TriangleMesh) -> HashMap<(u32, u32), (u32, u32)> {
    let mut map: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for t in &mesh.triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            let entry = map.entry(edge_key(a, b)).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }
    map
}

/// Watertight and orientable: every edge is used exactly twice, once in
/// each direction.
pub fn is_watertight(mesh: &TriangleMesh) -> bool {
    if mesh.is_empty() || !mesh.indices_in_range() {
        return false;
    }
    edge_use_counts(mesh).values().all(|&(f, r)| f == 1 && r == 1)
}

/// Number of edges used by exactly one triangle.
pub fn boundary_edge_count(mesh: &TriangleMesh) -> usize {
    edge_use_counts(mesh).values().filter(|&&(f, r)| f + r == 1).count()
}

/// Triangle indices grouped into edge-connected components, each sorted,
/// components ordered by smallest triangle index.
pub fn connected_components(mesh: &TriangleMesh) -> Vec<Vec<usize>> {
    let mut edge_to_tris: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
    for (ti, t) in mesh.triangles.iter().enumerate() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edge_to_tris.entry(edge_key(a, b)).or_default().push(ti);
        }
    }
    let n = mesh.triangles.len();
    let mut comp = vec![usize::MAX; n];
    let mut components = Vec::new();
    for seed in 0..n {
        if comp[seed] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut stack = vec![seed];
        let mut members = Vec::new();
        comp[seed] = id;
        while let Some(ti) = stack.pop() {
            members.push(ti);
            let t = mesh.triangles[ti];
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                for &other in &edge_to_tris[&edge_key(a, b)] {
                    if comp[other] == usize::MAX {
                        comp[other] = id;
                        stack.push(other);
                    }
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }
    components
}

/// Extracts the sub-mesh of the given triangle indices, dropping unused
/// vertices.
pub(crate) fn submesh(mesh: &TriangleMesh, triangle_ids: &[usize]) -> TriangleMesh {
    let mut remap: HashMap<u32, u32> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(triangle_ids.len());
    for &ti in triangle_ids {
        let t = mesh.triangles[ti];
        let mut nt = [0u32; 3];
        for k in 0..3 {
            let old = t[k];
            let new = *remap.entry(old).or_insert_with(|| {
                vertices.push(mesh.vertices[old as usize]);
                (vertices.len() - 1) as u32
            });
            nt[k] = new;
        }
        triangles.push(nt);
    }
    TriangleMesh { vertices, triangles, units_scale: mesh.units_scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::cube;

    #[test]
    fn cube_is_watertight() {
        assert!(is_watertight(&cube(1.0)));
        assert_eq!(boundary_edge_count(&cube(1.0)), 0);
    }

    #[test]
    fn removing_a_face_opens_boundary() {
        let mut m = cube(1.0);
        m.triangles.pop();
        assert!(!is_watertight(&m));
        assert_eq!(boundary_edge_count(&m), 3);
    }

    #[test]
    fn two_cubes_are_two_components() {
        let mut m = cube(1.0);
        let other = cube(1.0).translated(nalgebra::Vector3::new(5.0, 0.0, 0.0));
        m.append(&other);
        let comps = connected_components(&m);
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0].len(), 12);
    }
}
