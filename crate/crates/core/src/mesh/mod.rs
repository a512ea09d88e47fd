//! Unstructured linear simplex meshes with named boundary patches.
//!
//! A [`Mesh`] is immutable once built. Construction validates node indices,
//! puts every element into positive orientation, rejects degenerate
//! elements, and checks that each patch facet is a face of exactly one
//! element.

mod generate;
pub mod geometry;
mod io;

use std::collections::HashMap;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

pub use generate::{generate_channel, generate_pipe, PipeResolution};
pub use io::{read_mesh, read_mesh_str, write_mesh, write_mesh_string};

use crate::error::{Error, Result};
use geometry::{centroid, cross, dot, max_edge_length, norm, signed_measure, sub, Point};

/// Elements whose measure falls below this fraction of (longest edge)^dim
/// are rejected as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-14;

/// Sorted node tuple identifying a facet independent of its orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FacetKey([usize; 3]);

impl FacetKey {
    pub fn new(nodes: &[usize]) -> Self {
        let mut key = [usize::MAX; 3];
        key[..nodes.len()].copy_from_slice(nodes);
        key[..nodes.len()].sort_unstable();
        FacetKey(key)
    }
}

#[derive(Debug, Clone, Copy)]
struct FaceOwner {
    element: usize,
    /// Local index of the element node opposite the face.
    opposite: usize,
    count: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dimension: usize,
    nodes: Vec<Point>,
    elements: Vec<usize>,
    patches: IndexMap<String, Vec<usize>>,
    boundary: HashMap<FacetKey, (usize, usize)>,
}

/// Measure and outward unit normal of a boundary facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetGeometry {
    pub measure: f64,
    pub normal: Point,
}

impl Mesh {
    /// Builds and validates a mesh.
    ///
    /// `elements` holds `dimension + 1` node indices per element and every
    /// patch holds `dimension` node indices per facet, both flattened.
    pub fn new(
        dimension: usize,
        nodes: Vec<Point>,
        mut elements: Vec<usize>,
        patches: IndexMap<String, Vec<usize>>,
    ) -> Result<Self> {
        if dimension != 2 && dimension != 3 {
            return Err(Error::schema("dimension", format!("must be 2 or 3, got {dimension}")));
        }
        let npe = dimension + 1;
        if elements.len() % npe != 0 {
            return Err(Error::Mesh(format!(
                "element connectivity length {} is not a multiple of {npe}",
                elements.len()
            )));
        }
        if elements.is_empty() {
            return Err(Error::Mesh("mesh has no elements".into()));
        }
        for (e, conn) in elements.chunks_exact_mut(npe).enumerate() {
            for &n in conn.iter() {
                if n >= nodes.len() {
                    return Err(Error::schema(
                        format!("elements[{e}]"),
                        format!("node index {n} out of range (node count {})", nodes.len()),
                    ));
                }
            }
            let pts: Vec<Point> = conn.iter().map(|&n| nodes[n]).collect();
            let measure = signed_measure(dimension, &pts);
            let length = max_edge_length(&pts);
            if measure.abs() <= DEGENERACY_TOLERANCE * length.powi(dimension as i32) {
                return Err(Error::DegenerateElement { element: e, measure });
            }
            if measure < 0.0 {
                conn.swap(npe - 2, npe - 1);
            }
        }

        let mut faces: HashMap<FacetKey, FaceOwner> = HashMap::with_capacity(elements.len());
        let mut face = [0usize; 3];
        for (e, conn) in elements.chunks_exact(npe).enumerate() {
            for opposite in 0..npe {
                let mut k = 0;
                for (local, &n) in conn.iter().enumerate() {
                    if local != opposite {
                        face[k] = n;
                        k += 1;
                    }
                }
                faces
                    .entry(FacetKey::new(&face[..dimension]))
                    .and_modify(|owner| owner.count += 1)
                    .or_insert(FaceOwner { element: e, opposite, count: 1 });
            }
        }
        if let Some((key, owner)) = faces.iter().find(|(_, o)| o.count > 2) {
            return Err(Error::Mesh(format!(
                "face {:?} is shared by {} elements",
                &key.0[..dimension],
                owner.count
            )));
        }
        let boundary: HashMap<FacetKey, (usize, usize)> = faces
            .into_iter()
            .filter(|(_, o)| o.count == 1)
            .map(|(k, o)| (k, (o.element, o.opposite)))
            .collect();

        let mut owner_patch: HashMap<FacetKey, &str> = HashMap::new();
        for (name, facets) in &patches {
            if facets.len() % dimension != 0 {
                return Err(Error::schema(
                    format!("patches.{name}"),
                    format!("facet list length is not a multiple of {dimension}"),
                ));
            }
            for (f, facet) in facets.chunks_exact(dimension).enumerate() {
                if let Some(&n) = facet.iter().find(|&&n| n >= nodes.len()) {
                    return Err(Error::schema(
                        format!("patches.{name}[{f}]"),
                        format!("node index {n} out of range (node count {})", nodes.len()),
                    ));
                }
                let key = FacetKey::new(facet);
                if !boundary.contains_key(&key) {
                    return Err(Error::schema(
                        format!("patches.{name}[{f}]"),
                        format!("facet {facet:?} is not a face of exactly one element"),
                    ));
                }
                if let Some(previous) = owner_patch.insert(key, name) {
                    return Err(Error::schema(
                        format!("patches.{name}[{f}]"),
                        format!("facet {facet:?} already belongs to patch `{previous}`"),
                    ));
                }
            }
        }

        Ok(Mesh {
            dimension,
            nodes,
            elements,
            patches,
            boundary,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn nodes_per_element(&self) -> usize {
        self.dimension + 1
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len() / self.nodes_per_element()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Point {
        &self.nodes[i]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let npe = self.nodes_per_element();
        &self.elements[e * npe..(e + 1) * npe]
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = &[usize]> + '_ {
        self.elements.chunks_exact(self.nodes_per_element())
    }

    /// Vertex coordinates of element `e`; unused trailing slots are zero.
    pub fn element_coords(&self, e: usize) -> [Point; 4] {
        let mut pts = [[0.0; 3]; 4];
        for (slot, &n) in pts.iter_mut().zip(self.element(e)) {
            *slot = self.nodes[n];
        }
        pts
    }

    pub fn patch_names(&self) -> impl Iterator<Item = &str> + '_ {
        self.patches.keys().map(String::as_str)
    }

    pub fn has_patch(&self, name: &str) -> bool {
        self.patches.contains_key(name)
    }

    /// Facets of a patch, each a slice of `dimension` node indices.
    pub fn patch(&self, name: &str) -> Result<impl ExactSizeIterator<Item = &[usize]> + '_> {
        let facets = self
            .patches
            .get(name)
            .ok_or_else(|| Error::UnknownPatch(name.to_string()))?;
        Ok(facets.chunks_exact(self.dimension))
    }

    pub(crate) fn patch_map(&self) -> &IndexMap<String, Vec<usize>> {
        &self.patches
    }

    /// Every facet that belongs to exactly one element, in a stable order.
    pub fn boundary_facets(&self) -> Vec<Vec<usize>> {
        let mut keys: Vec<&FacetKey> = self.boundary.keys().collect();
        keys.sort_unstable();
        keys.into_iter()
            .map(|k| k.0[..self.dimension].to_vec())
            .collect()
    }

    /// Element adjacent to a boundary facet, with the local index of the
    /// element node opposite the facet.
    pub fn boundary_owner(&self, facet: &[usize]) -> Option<(usize, usize)> {
        if facet.len() != self.dimension {
            return None;
        }
        self.boundary.get(&FacetKey::new(facet)).copied()
    }

    pub fn signed_element_measure(&self, e: usize) -> f64 {
        signed_measure(self.dimension, &self.element_coords(e))
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| self.signed_element_measure(e))
            .sum()
    }

    /// Distinct nodes touched by the facets of a patch, ascending.
    pub fn patch_nodes(&self, name: &str) -> Result<Vec<usize>> {
        let mut nodes: Vec<usize> = self.patch(name)?.flatten().copied().collect();
        nodes.sort_unstable();
        nodes.dedup();
        Ok(nodes)
    }

    /// Geometry of a boundary facet: measure (length or area) and the unit
    /// normal pointing out of the adjacent element.
    pub fn boundary_facet_geometry(&self, facet: &[usize]) -> Result<FacetGeometry> {
        let (element, opposite) = self
            .boundary_owner(facet)
            .ok_or_else(|| Error::NotBoundaryFacet(facet.to_vec()))?;
        let pts: Vec<Point> = facet.iter().map(|&n| self.nodes[n]).collect();
        let (measure, mut normal) = match self.dimension {
            2 => {
                let t = sub(&pts[1], &pts[0]);
                let len = norm(&t);
                (len, [t[1] / len, -t[0] / len, 0.0])
            }
            _ => {
                let n = cross(&sub(&pts[1], &pts[0]), &sub(&pts[2], &pts[0]));
                let twice = norm(&n);
                (0.5 * twice, [n[0] / twice, n[1] / twice, n[2] / twice])
            }
        };
        let inward = sub(&self.nodes[self.element(element)[opposite]], &centroid(&pts));
        if dot(&normal, &inward) > 0.0 {
            normal = [-normal[0], -normal[1], -normal[2]];
        }
        Ok(FacetGeometry { measure, normal })
    }
}

/// How a boundary condition constrains a patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    /// Prescribed velocity `g`.
    Dirichlet,
    /// Prescribed traction `h`.
    Neumann,
}

/// Constant complex boundary data on one patch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub patch: String,
    pub kind: BoundaryKind,
    #[serde(rename = "real")]
    pub value_real: Vec<f64>,
    #[serde(rename = "imag")]
    pub value_imag: Vec<f64>,
}

impl BoundaryCondition {
    pub fn dirichlet(patch: impl Into<String>, real: &[f64], imag: &[f64]) -> Self {
        Self {
            patch: patch.into(),
            kind: BoundaryKind::Dirichlet,
            value_real: real.to_vec(),
            value_imag: imag.to_vec(),
        }
    }

    pub fn neumann(patch: impl Into<String>, real: &[f64], imag: &[f64]) -> Self {
        Self {
            patch: patch.into(),
            kind: BoundaryKind::Neumann,
            value_real: real.to_vec(),
            value_imag: imag.to_vec(),
        }
    }

    /// Real and imaginary values padded to three components.
    pub fn values(&self) -> (Point, Point) {
        let pad = |v: &[f64]| {
            let mut p = [0.0; 3];
            for (slot, x) in p.iter_mut().zip(v) {
                *slot = *x;
            }
            p
        };
        (pad(&self.value_real), pad(&self.value_imag))
    }
}
