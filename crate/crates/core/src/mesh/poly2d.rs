//! Planar polygon helpers: signed area, centroid, ear-clipping
//! triangulation.

/// Signed shoelace area; positive for counter-clockwise winding.
pub fn polygon_area(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for i in 0..n {
        let [x0, y0] = points[i];
        let [x1, y1] = points[(i + 1) % n];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice
}

/// Area centroid of a simple polygon. Falls back to the vertex mean for
/// near-zero area.
pub fn polygon_centroid(points: &[[f64; 2]]) -> [f64; 2] {
    let a = polygon_area(points);
    let n = points.len();
    if n == 0 {
        return [0.0, 0.0];
    }
    if a.abs() < 1e-18 {
        let mut cx = 0.0;
        let mut cy = 0.0;
        for p in points {
            cx += p[0];
            cy += p[1];
        }
        return [cx / n as f64, cy / n as f64];
    }
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let [x0, y0] = points[i];
        let [x1, y1] = points[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        cx += (x0 + x1) * cross;
        cy += (y0 + y1) * cross;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn point_in_triangle(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let d1 = cross2(a, b, p);
    let d2 = cross2(b, c, p);
    let d3 = cross2(c, a, p);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Ear-clipping triangulation of a simple polygon given in CCW order.
/// Returns index triples into `points`. Falls back to a fan when no ear can
/// be found (degenerate input), which keeps boundary topology intact.
pub fn triangulate(points: &[[f64; 2]]) -> Vec<[usize; 3]> {
    let n = points.len();
    let mut tris = Vec::with_capacity(n.saturating_sub(2));
    if n < 3 {
        return tris;
    }
    let mut ring: Vec<usize> = (0..n).collect();
    // Ensure CCW; remember if we flipped so output still indexes `points`.
    let flipped = polygon_area(points) < 0.0;
    if flipped {
        ring.reverse();
    }

    'outer: while ring.len() > 3 {
        let m = ring.len();
        for k in 0..m {
            let ia = ring[(k + m - 1) % m];
            let ib = ring[k];
            let ic = ring[(k + 1) % m];
            let (a, b, c) = (points[ia], points[ib], points[ic]);
            if cross2(a, b, c) <= 0.0 {
                continue; // reflex or collinear corner
            }
            let mut blocked = false;
            for &other in &ring {
                if other == ia || other == ib || other == ic {
                    continue;
                }
                if point_in_triangle(points[other], a, b, c) {
                    blocked = true;
                    break;
                }
            }
            if !blocked {
                tris.push([ia, ib, ic]);
                ring.remove(k);
                continue 'outer;
            }
        }
        // No ear found: degenerate ring, fan out the rest.
        for k in 1..m - 1 {
            tris.push([ring[0], ring[k], ring[k + 1]]);
        }
        ring.truncate(0);
        break;
    }
    if ring.len() == 3 {
        tris.push([ring[0], ring[1], ring[2]]);
    }
    if flipped {
        for t in &mut tris {
            t.swap(1, 2);
        }
    }
    tris
}
