//! Reference implementations written without looking at the engine code.
//! They trade speed for obviousness.
#![allow(dead_code)]

/// Linear gain from image pixels to screen pixels at depth `z`.
///
/// Half the physical width visible at depth `z` is `z * sin(fov / 2)`; the
/// hand span maps onto the whole screen.
pub fn gain(z: f64, fov_deg: f64, screen_px: u32, span_m: f64, image_px: u32) -> f64 {
    let half_view = z * (fov_deg * std::f64::consts::PI / 360.0).sin();
    2.0 * half_view * screen_px as f64 / (span_m * image_px as f64)
}

/// Absolute mapping about the image and screen centers, clamped, unrounded.
pub fn absolute(
    px: f64,
    image_px: u32,
    z: f64,
    fov_deg: f64,
    screen_px: u32,
    span_m: f64,
) -> f64 {
    let offset = px - image_px as f64 * 0.5;
    let s = screen_px as f64 * 0.5 + gain(z, fov_deg, screen_px, span_m, image_px) * offset;
    s.max(0.0).min(screen_px as f64 - 1.0)
}

/// Activity after `moves` equal steps of length `c`, starting from rest.
pub fn activity_after(c: f64, moves: u32) -> f64 {
    (0..moves).fold(0.0, |a, _| 0.5 * a + c)
}

/// Frames at which dwell fires: a frame fires when it closes a run of
/// `threshold` identical hovered cells, none of them inside the cooldown
/// that follows the previous firing.
pub fn dwell_fires(cells: &[Option<u8>], threshold: usize, cooldown: usize) -> Vec<usize> {
    let mut fires = Vec::new();
    let mut earliest = 0usize;
    for i in 0..cells.len() {
        if i + 1 < earliest + threshold {
            continue;
        }
        let window = &cells[i + 1 - threshold..=i];
        if window[0].is_some() && window.iter().all(|c| *c == window[0]) {
            fires.push(i);
            earliest = i + 1 + cooldown;
        }
    }
    fires
}

fn orient(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> i64 {
    (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0)
}

fn on_segment(a: (i64, i64), b: (i64, i64), p: (i64, i64)) -> bool {
    orient(a, b, p) == 0
        && p.0 >= a.0.min(b.0)
        && p.0 <= a.0.max(b.0)
        && p.1 >= a.1.min(b.1)
        && p.1 <= a.1.max(b.1)
}

fn in_triangle(a: (i64, i64), b: (i64, i64), c: (i64, i64), p: (i64, i64)) -> bool {
    let (d1, d2, d3) = (orient(a, b, p), orient(b, c, p), orient(c, a, p));
    let neg = d1 < 0 || d2 < 0 || d3 < 0;
    let pos = d1 > 0 || d2 > 0 || d3 > 0;
    !(neg && pos)
}

/// A point of the plane is in the convex hull of a finite set exactly when
/// it lies in a triangle (possibly degenerate) spanned by three members.
pub fn in_hull(points: &[(i64, i64)], p: (i64, i64)) -> bool {
    let n = points.len();
    if points.contains(&p) {
        return true;
    }
    for i in 0..n {
        for j in i + 1..n {
            if on_segment(points[i], points[j], p) {
                return true;
            }
            for k in j + 1..n {
                if orient(points[i], points[j], points[k]) != 0 && in_triangle(points[i], points[j], points[k], p) {
                    return true;
                }
            }
        }
    }
    false
}

/// Set pixels over grid points inside the hull, by rasterizing the hull.
/// Returns `(set, covered)`.
pub fn solidity_counts(rows: &[&str]) -> (usize, usize) {
    let mut points = Vec::new();
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            if ch == '#' {
                points.push((x as i64, y as i64));
            }
        }
    }
    let w = rows.iter().map(|r| r.len()).max().unwrap_or(0) as i64;
    let h = rows.len() as i64;
    let mut covered = 0;
    for y in 0..h {
        for x in 0..w {
            if in_hull(&points, (x, y)) {
                covered += 1;
            }
        }
    }
    (points.len(), covered)
}
