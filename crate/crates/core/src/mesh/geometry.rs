//! Small fixed-size vector helpers shared by the mesh and assembly code.
//!
//! Points are always stored as `[f64; 3]`; 2D meshes keep `z = 0`.

pub type Point = [f64; 3];

#[inline]
pub fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: &Point, b: &Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: &Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn centroid(points: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in points {
        c = add(&c, p);
    }
    scale(&c, 1.0 / points.len() as f64)
}

/// Signed area (2D, first three points) or signed volume (3D, first four points)
/// of a linear simplex. Positive for counter-clockwise triangles and for
/// tetrahedra whose fourth vertex lies on the side of `(p1-p0) x (p2-p0)`.
pub fn signed_measure(dimension: usize, points: &[Point]) -> f64 {
    let e1 = sub(&points[1], &points[0]);
    let e2 = sub(&points[2], &points[0]);
    match dimension {
        2 => 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]),
        3 => {
            let e3 = sub(&points[3], &points[0]);
            dot(&cross(&e1, &e2), &e3) / 6.0
        }
        _ => unreachable!("dimension is validated to be 2 or 3"),
    }
}

/// Longest edge of a simplex given by its vertex coordinates.
pub fn max_edge_length(points: &[Point]) -> f64 {
    let mut longest: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            longest = longest.max(norm(&sub(&points[i], &points[j])));
        }
    }
    longest
}
