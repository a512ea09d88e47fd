//! Neutral JSON mesh format.
//!
//! ```json
//! { "dimension": 3,
//!   "nodes": [[x, y, z], ...],
//!   "elements": [[n0, n1, n2, n3], ...],
//!   "patches": { "inlet": [[a, b, c], ...], ... } }
//! ```
//!
//! Indices are 0-based. Doubles are written in shortest round-trip form, so
//! write followed by read reproduces the mesh bit for bit.

use std::fmt;
use std::path::Path;

use indexmap::IndexMap;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Mesh;
use crate::error::{Error, Result};

#[derive(Serialize)]
struct MeshOut<'a> {
    dimension: usize,
    nodes: Vec<&'a [f64]>,
    elements: Vec<&'a [usize]>,
    patches: PatchesOut<'a>,
}

struct PatchesOut<'a>(&'a Mesh);

impl Serialize for PatchesOut<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let dim = self.0.dimension();
        let patches = self.0.patch_map();
        let mut map = serializer.serialize_map(Some(patches.len()))?;
        for (name, facets) in patches {
            let list: Vec<&[usize]> = facets.chunks_exact(dim).collect();
            map.serialize_entry(name, &list)?;
        }
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshIn {
    dimension: usize,
    nodes: Vec<Vec<f64>>,
    elements: Vec<Vec<usize>>,
    #[serde(default)]
    patches: PatchesIn,
}

/// Patch map that keeps file order and reports duplicate names instead of
/// silently keeping the last one.
#[derive(Default)]
struct PatchesIn(Vec<(String, Vec<Vec<usize>>)>);

impl<'de> Deserialize<'de> for PatchesIn {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PatchVisitor;
        impl<'de> Visitor<'de> for PatchVisitor {
            type Value = PatchesIn;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping patch names to facet lists")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<PatchesIn, A::Error> {
                let mut out = Vec::new();
                while let Some((name, facets)) = access.next_entry::<String, Vec<Vec<usize>>>()? {
                    out.push((name, facets));
                }
                Ok(PatchesIn(out))
            }
        }
        deserializer.deserialize_map(PatchVisitor)
    }
}

pub fn write_mesh_string(mesh: &Mesh) -> String {
    let dim = mesh.dimension();
    let out = MeshOut {
        dimension: dim,
        nodes: mesh.nodes().iter().map(|p| &p[..dim]).collect(),
        elements: mesh.elements().collect(),
        patches: PatchesOut(mesh),
    };
    serde_json::to_string(&out).expect("mesh serialization cannot fail")
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_mesh_string(mesh)).map_err(|e| Error::io(path, e))
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_mesh_str(&text)
}

pub fn read_mesh_str(text: &str) -> Result<Mesh> {
    let raw: MeshIn = serde_json::from_str(text)
        .map_err(|e| Error::schema(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let dim = raw.dimension;
    if dim != 2 && dim != 3 {
        return Err(Error::schema("dimension", format!("must be 2 or 3, got {dim}")));
    }
    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for (i, coords) in raw.nodes.iter().enumerate() {
        if coords.len() != dim {
            return Err(Error::schema(
                format!("nodes[{i}]"),
                format!("expected {dim} coordinates, got {}", coords.len()),
            ));
        }
        let mut p = [0.0; 3];
        p[..dim].copy_from_slice(coords);
        nodes.push(p);
    }
    let mut elements = Vec::with_capacity(raw.elements.len() * (dim + 1));
    for (e, conn) in raw.elements.iter().enumerate() {
        if conn.len() != dim + 1 {
            return Err(Error::schema(
                format!("elements[{e}]"),
                format!("expected {} node indices, got {}", dim + 1, conn.len()),
            ));
        }
        elements.extend_from_slice(conn);
    }
    let mut patches = IndexMap::new();
    for (name, facets) in raw.patches.0 {
        let mut flat = Vec::with_capacity(facets.len() * dim);
        for (f, facet) in facets.iter().enumerate() {
            if facet.len() != dim {
                return Err(Error::schema(
                    format!("patches.{name}[{f}]"),
                    format!("expected {dim} node indices, got {}", facet.len()),
                ));
            }
            flat.extend_from_slice(facet);
        }
        if patches.contains_key(&name) {
            return Err(Error::schema(format!("patches.{name}"), "duplicate patch name"));
        }
        patches.insert(name, flat);
    }
    Mesh::new(dim, nodes, elements, patches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_channel;

    const SINGLE_TET: &str = r#"{"dimension":3,"nodes":[[0.0,0.0,0.0],[1.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]],"elements":[[0,1,2,3]],"patches":{"base":[[0,1,2]]}}"#;

    #[test]
    fn single_tet_round_trip() {
        let mesh = read_mesh_str(SINGLE_TET).unwrap();
        let text = write_mesh_string(&mesh);
        assert_eq!(text, SINGLE_TET);
        assert_eq!(read_mesh_str(&text).unwrap(), mesh);
    }

    #[test]
    fn channel_round_trip_through_file() {
        let mesh = generate_channel(0.3, 1.7, 3, 7).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("channel.json");
        write_mesh(&mesh, &path).unwrap();
        let back = read_mesh(&path).unwrap();
        assert_eq!(back, mesh);
        assert_eq!(back.nodes(), mesh.nodes());
        assert_eq!(back.patch_names().collect::<Vec<_>>(), ["inlet", "outlet", "wall"]);
    }

    #[test]
    fn dangling_index_names_element() {
        let text = SINGLE_TET.replace("[0,1,2,3]", "[0,1,2,4]");
        let err = read_mesh_str(&text).unwrap_err();
        assert!(err.to_string().contains("elements[0]"), "{err}");
    }

    #[test]
    fn duplicate_patch_rejected() {
        let text = SINGLE_TET.replace(r#""base":[[0,1,2]]"#, r#""base":[[0,1,2]],"base":[[0,1,3]]"#);
        let err = read_mesh_str(&text).unwrap_err();
        assert!(err.to_string().contains("duplicate patch name"), "{err}");
    }

    #[test]
    fn missing_field_is_named() {
        let err = read_mesh_str(r#"{"dimension":3,"elements":[]}"#).unwrap_err();
        assert!(err.to_string().contains("nodes"), "{err}");
    }

    #[test]
    fn wrong_coordinate_count() {
        let text = SINGLE_TET.replace("[1.0,0.0,0.0]", "[1.0,0.0]");
        let err = read_mesh_str(&text).unwrap_err();
        assert!(err.to_string().contains("nodes[1]"), "{err}");
    }
}
