//! Legacy ASCII VTK (version 3.0) unstructured-grid output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::SolutionField;
use crate::error::{Error, Result};

const TETRA: u8 = 10;
const TRIANGLE: u8 = 5;

pub fn write_vtk(field: &SolutionField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_vtk_to(field, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

/// Points, cells, and the point-data arrays `u_r`, `u_i` (vectors) and
/// `p_r`, `p_i` (scalars), all printed with 17 significant digits.
pub fn write_vtk_to(field: &SolutionField, out: &mut impl Write) -> std::io::Result<()> {
    let mesh = &field.mesh;
    let npe = mesh.nodes_per_element();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "frequency-domain Stokes mode, omega = {:e}", field.omega)?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.num_nodes())?;
    for p in mesh.nodes() {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", p[0], p[1], p[2])?;
    }
    writeln!(out, "CELLS {} {}", mesh.num_elements(), mesh.num_elements() * (npe + 1))?;
    for conn in mesh.elements() {
        write!(out, "{npe}")?;
        for n in conn {
            write!(out, " {n}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.num_elements())?;
    let kind = if mesh.dimension() == 3 { TETRA } else { TRIANGLE };
    for _ in 0..mesh.num_elements() {
        writeln!(out, "{kind}")?;
    }
    writeln!(out, "POINT_DATA {}", mesh.num_nodes())?;
    for (name, values) in [("u_r", &field.u_r), ("u_i", &field.u_i)] {
        writeln!(out, "VECTORS {name} double")?;
        for v in values {
            writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
        }
    }
    for (name, values) in [("p_r", &field.p_r), ("p_i", &field.p_i)] {
        writeln!(out, "SCALARS {name} double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in values {
            writeln!(out, "{v:.16e}")?;
        }
    }
    Ok(())
}
