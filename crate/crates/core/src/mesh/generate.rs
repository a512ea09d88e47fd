//! Structured generators for the canonical verification geometries.
//!
//! Pipe: a disc made of concentric rings (ring `k` carries
//! `n_azimuthal * k` equally spaced nodes, node 0 at angle zero) around a
//! centre node, zipped ring-to-ring into triangles, then extruded along `z`
//! into `n_axial` layers of prisms. Each prism is cut into three tetrahedra
//! so that every quadrilateral side is split along the diagonal touching its
//! lowest global node index, which makes neighbouring prisms conform.
//!
//! Channel: a rectangular grid with each cell split into two triangles.

use indexmap::IndexMap;

use super::geometry::{centroid, signed_measure, Point};
use super::Mesh;
use crate::error::{Error, Result};

/// Ring and layer counts for [`generate_pipe`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipeResolution {
    pub n_radial: usize,
    pub n_azimuthal: usize,
    pub n_axial: usize,
}

impl PipeResolution {
    /// Number of disc nodes for this resolution.
    pub fn disc_nodes(&self) -> usize {
        1 + self.n_azimuthal * self.n_radial * (self.n_radial + 1) / 2
    }

    pub fn disc_triangles(&self) -> usize {
        self.n_azimuthal * self.n_radial * self.n_radial
    }

    pub fn num_nodes(&self) -> usize {
        (self.n_axial + 1) * self.disc_nodes()
    }

    pub fn num_elements(&self) -> usize {
        3 * self.disc_triangles() * self.n_axial
    }

    /// Picks counts that give roughly `target` tetrahedra with six nodes on
    /// the first ring and axial spacing close to the radial spacing.
    pub fn for_target_elements(radius: f64, length: f64, target: usize) -> Result<Self> {
        if !(radius > 0.0 && length > 0.0) {
            return Err(Error::Generator("radius and length must be positive".into()));
        }
        let n_azimuthal = 6;
        let per_ring_cube = 3.0 * n_azimuthal as f64 * length / radius;
        let n_radial = ((target as f64 / per_ring_cube).cbrt().round() as usize).max(2);
        let per_layer = 3 * n_azimuthal * n_radial * n_radial;
        let n_axial = ((target as f64 / per_layer as f64).round() as usize).max(2);
        Ok(Self {
            n_radial,
            n_azimuthal,
            n_axial,
        })
    }
}

/// Tetrahedral mesh of the cylinder `x^2 + y^2 <= R^2, 0 <= z <= L` with
/// patches `inlet` (z = 0), `outlet` (z = L) and `wall`.
pub fn generate_pipe(
    radius: f64,
    length: f64,
    n_radial: usize,
    n_azimuthal: usize,
    n_axial: usize,
) -> Result<Mesh> {
    if n_radial < 2 || n_azimuthal < 2 || n_axial < 2 {
        return Err(Error::Generator(format!(
            "pipe counts must be at least 2 (got n_radial={n_radial}, n_azimuthal={n_azimuthal}, n_axial={n_axial})"
        )));
    }
    if !(radius > 0.0 && length > 0.0) || !radius.is_finite() || !length.is_finite() {
        return Err(Error::Generator(format!(
            "pipe dimensions must be positive (got radius={radius}, length={length})"
        )));
    }

    let (disc, triangles) = disc(radius, n_radial, n_azimuthal);
    let nd = disc.len();
    let mut nodes = Vec::with_capacity(nd * (n_axial + 1));
    for layer in 0..=n_axial {
        let z = length * layer as f64 / n_axial as f64;
        nodes.extend(disc.iter().map(|&[x, y]| [x, y, z]));
    }

    let mut elements = Vec::with_capacity(12 * triangles.len() * n_axial);
    for layer in 0..n_axial {
        for tri in &triangles {
            let mut v = *tri;
            v.sort_unstable();
            let b = v.map(|i| layer * nd + i);
            let t = v.map(|i| (layer + 1) * nd + i);
            for tet in [
                [b[0], b[1], b[2], t[2]],
                [b[0], b[1], t[1], t[2]],
                [b[0], t[0], t[1], t[2]],
            ] {
                push_oriented(&nodes, &mut elements, 3, tet);
            }
        }
    }

    let z_tol = 1e-9 * length;
    with_classified_boundary(3, nodes, elements, |c| {
        if c[2].abs() < z_tol {
            "inlet"
        } else if (c[2] - length).abs() < z_tol {
            "outlet"
        } else {
            "wall"
        }
    })
}

/// Triangle mesh of `[0, L] x [0, H]` with patches `inlet` (x = 0),
/// `outlet` (x = L) and `wall` (y = 0 and y = H).
pub fn generate_channel(height: f64, length: f64, n_y: usize, n_x: usize) -> Result<Mesh> {
    if n_y < 1 || n_x < 1 {
        return Err(Error::Generator(format!(
            "channel counts must be at least 1 (got n_y={n_y}, n_x={n_x})"
        )));
    }
    if !(height > 0.0 && length > 0.0) || !height.is_finite() || !length.is_finite() {
        return Err(Error::Generator(format!(
            "channel dimensions must be positive (got height={height}, length={length})"
        )));
    }
    let row = n_x + 1;
    let mut nodes = Vec::with_capacity(row * (n_y + 1));
    for j in 0..=n_y {
        let y = height * j as f64 / n_y as f64;
        for i in 0..=n_x {
            nodes.push([length * i as f64 / n_x as f64, y, 0.0]);
        }
    }
    let mut elements = Vec::with_capacity(6 * n_x * n_y);
    for j in 0..n_y {
        for i in 0..n_x {
            let a = j * row + i;
            let (b, c, d) = (a + 1, a + row + 1, a + row);
            elements.extend_from_slice(&[a, b, c, a, c, d]);
        }
    }
    let x_tol = 1e-9 * length;
    with_classified_boundary(2, nodes, elements, |c| {
        if c[0].abs() < x_tol {
            "inlet"
        } else if (c[0] - length).abs() < x_tol {
            "outlet"
        } else {
            "wall"
        }
    })
}

/// Ring nodes of the disc and its counter-clockwise triangles.
fn disc(radius: f64, n_radial: usize, n_azimuthal: usize) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    use std::f64::consts::PI;
    let mut nodes = vec![[0.0, 0.0]];
    let ring_start = |k: usize| 1 + n_azimuthal * (k - 1) * k / 2;
    for k in 1..=n_radial {
        let r = radius * k as f64 / n_radial as f64;
        let count = n_azimuthal * k;
        for j in 0..count {
            let theta = 2.0 * PI * j as f64 / count as f64;
            nodes.push([r * theta.cos(), r * theta.sin()]);
        }
    }

    let mut triangles = Vec::with_capacity(n_azimuthal * n_radial * n_radial);
    for j in 0..n_azimuthal {
        triangles.push([0, 1 + j, 1 + (j + 1) % n_azimuthal]);
    }
    for k in 2..=n_radial {
        let (inner_start, inner) = (ring_start(k - 1), n_azimuthal * (k - 1));
        let (outer_start, outer) = (ring_start(k), n_azimuthal * k);
        let (mut i, mut j) = (0, 0);
        while i < inner || j < outer {
            let a = inner_start + i % inner;
            let b = outer_start + j % outer;
            // advance the ring whose next node comes first in angle; outer on ties
            let advance_outer = j < outer && (i == inner || (j + 1) * inner <= (i + 1) * outer);
            if advance_outer {
                triangles.push([a, b, outer_start + (j + 1) % outer]);
                j += 1;
            } else {
                triangles.push([a, b, inner_start + (i + 1) % inner]);
                i += 1;
            }
        }
    }
    for tri in &mut triangles {
        let p = tri.map(|n| [nodes[n][0], nodes[n][1], 0.0]);
        if signed_measure(2, &p) < 0.0 {
            tri.swap(1, 2);
        }
    }
    (nodes, triangles)
}

fn push_oriented(nodes: &[Point], elements: &mut Vec<usize>, dimension: usize, mut conn: [usize; 4]) {
    let pts = conn.map(|n| nodes[n]);
    if signed_measure(dimension, &pts) < 0.0 {
        conn.swap(2, 3);
    }
    elements.extend_from_slice(&conn);
}

/// Builds the mesh, then assigns every boundary facet to the patch named by
/// `classify(facet centroid)`.
fn with_classified_boundary(
    dimension: usize,
    nodes: Vec<Point>,
    elements: Vec<usize>,
    classify: impl Fn(&Point) -> &'static str,
) -> Result<Mesh> {
    let bare = Mesh::new(dimension, nodes, elements, IndexMap::new())?;
    let mut patches: IndexMap<String, Vec<usize>> = IndexMap::new();
    for name in ["inlet", "outlet", "wall"] {
        patches.insert(name.to_string(), Vec::new());
    }
    for facet in bare.boundary_facets() {
        let pts: Vec<Point> = facet.iter().map(|&n| bare.nodes[n]).collect();
        let name = classify(&centroid(&pts));
        patches
            .get_mut(name)
            .expect("classifier returns a known patch")
            .extend_from_slice(&facet);
    }
    let Mesh {
        nodes, elements, ..
    } = bare;
    Mesh::new(dimension, nodes, elements, patches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn single_cell_channel() {
        let mesh = generate_channel(1.0, 1.0, 1, 1).unwrap();
        assert_eq!(mesh.num_nodes(), 4);
        assert_eq!(mesh.num_elements(), 2);
    }

    #[test]
    fn channel_counts_and_patches() {
        let (n_y, n_x) = (4, 40);
        let mesh = generate_channel(1.0, 10.0, n_y, n_x).unwrap();
        assert_eq!(mesh.num_nodes(), 205);
        assert_eq!(mesh.num_elements(), 320);
        assert_eq!(mesh.patch("inlet").unwrap().len(), n_y);
        assert_eq!(mesh.patch("outlet").unwrap().len(), n_y);
        assert_eq!(mesh.patch("wall").unwrap().len(), 2 * n_x);
        assert!((mesh.total_measure() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn channel_rejects_bad_input() {
        assert!(generate_channel(0.0, 1.0, 1, 1).is_err());
        assert!(generate_channel(1.0, -1.0, 1, 1).is_err());
        assert!(generate_channel(1.0, 1.0, 0, 1).is_err());
    }

    #[test]
    fn pipe_rejects_bad_input() {
        assert!(generate_pipe(1.0, 1.0, 1, 4, 2).is_err());
        assert!(generate_pipe(1.0, 1.0, 2, 1, 2).is_err());
        assert!(generate_pipe(1.0, 1.0, 2, 4, 1).is_err());
        assert!(generate_pipe(0.0, 1.0, 2, 4, 2).is_err());
        assert!(generate_pipe(1.0, f64::NAN, 2, 4, 2).is_err());
    }

    #[test]
    fn small_pipe_node_count_matches_enumeration() {
        let mesh = generate_pipe(1.0, 1.0, 2, 4, 2).unwrap();
        // enumerate the distinct (x, y) positions of the construction by hand:
        // centre, 4 nodes on ring 1, 8 nodes on ring 2
        let mut disc = HashSet::new();
        disc.insert((0i64, 0i64));
        for (k, count) in [(1usize, 4usize), (2, 8)] {
            for j in 0..count {
                let th = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                let r = k as f64 / 2.0;
                disc.insert(((r * th.cos() * 1e9).round() as i64, (r * th.sin() * 1e9).round() as i64));
            }
        }
        let layers: HashSet<i64> = mesh.nodes().iter().map(|p| (p[2] * 1e9).round() as i64).collect();
        assert_eq!(disc.len(), 13);
        assert_eq!(layers.len(), 3);
        assert_eq!(mesh.num_nodes(), layers.len() * disc.len());
        let seen: HashSet<(i64, i64, i64)> = mesh
            .nodes()
            .iter()
            .map(|p| ((p[0] * 1e9).round() as i64, (p[1] * 1e9).round() as i64, (p[2] * 1e9).round() as i64))
            .collect();
        assert_eq!(seen.len(), mesh.num_nodes());
        let res = PipeResolution { n_radial: 2, n_azimuthal: 4, n_axial: 2 };
        assert_eq!(res.num_nodes(), mesh.num_nodes());
        assert_eq!(res.num_elements(), mesh.num_elements());
    }

    #[test]
    fn pipe_wall_facets_lie_on_cylinder() {
        let mesh = generate_pipe(1.5, 3.0, 3, 5, 4).unwrap();
        for facet in mesh.patch("wall").unwrap() {
            for &n in facet {
                let p = mesh.node(n);
                assert!((p[0].hypot(p[1]) - 1.5).abs() < 1e-12);
            }
        }
        assert_eq!(mesh.patch("inlet").unwrap().len(), 5 * 9);
        assert_eq!(mesh.patch("outlet").unwrap().len(), 5 * 9);
        assert_eq!(mesh.patch("wall").unwrap().len(), 2 * 5 * 3 * 4);
        assert_eq!(mesh.boundary_facets().len(), 2 * 45 + 120);
    }

    #[test]
    fn pipe_elements_positive_and_volume_converges() {
        let mesh = generate_pipe(1.0, 2.0, 4, 6, 3).unwrap();
        for e in 0..mesh.num_elements() {
            assert!(mesh.signed_element_measure(e) > 0.0);
        }
        let exact = std::f64::consts::PI * 2.0;
        assert!((mesh.total_measure() - exact).abs() / exact < 0.02);
    }

    #[test]
    fn target_elements_m1_scale() {
        let res = PipeResolution::for_target_elements(1.0, 15.0, 24_000).unwrap();
        let n = res.num_elements();
        assert!((20_000..=28_000).contains(&n), "{res:?} -> {n}");
    }
}
