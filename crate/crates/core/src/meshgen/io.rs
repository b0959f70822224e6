use std::io::Write;

use super::{ElementKind, FittedMesh};
use crate::error::Result;

/// Legacy ASCII VTK unstructured grid with the region tag as cell data and
/// optional per-vertex arrays as point data.
pub fn write_vtk<W: Write>(mesh: &FittedMesh, mut w: W, point_data: &[(&str, &[f64])]) -> Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "fitted mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.vertices.len())?;
    for p in &mesh.vertices {
        writeln!(w, "{:.17e} {:.17e} 0", p.x, p.y)?;
    }
    let size: usize = mesh.elements.iter().map(|e| e.nodes().len() + 1).sum();
    writeln!(w, "CELLS {} {}", mesh.elements.len(), size)?;
    for el in &mesh.elements {
        write!(w, "{}", el.nodes().len())?;
        for v in el.nodes() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.elements.len())?;
    for el in &mesh.elements {
        let t = match el.kind {
            ElementKind::Tri3 => 5,
            ElementKind::Quad4 => 9,
        };
        writeln!(w, "{t}")?;
    }
    writeln!(w, "CELL_DATA {}", mesh.elements.len())?;
    writeln!(w, "SCALARS region int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for el in &mesh.elements {
        writeln!(w, "{}", el.region.tag())?;
    }
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.vertices.len())?;
        for (name, values) in point_data {
            assert_eq!(values.len(), mesh.vertices.len(), "point array `{name}`");
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in values.iter() {
                writeln!(w, "{v:.17e}")?;
            }
        }
    }
    Ok(())
}

/// Plain-text node and element listing, stable enough for golden files.
pub fn write_listing<W: Write>(mesh: &FittedMesh, mut w: W) -> Result<()> {
    writeln!(w, "nodes {}", mesh.vertices.len())?;
    for (i, p) in mesh.vertices.iter().enumerate() {
        writeln!(w, "{i} {:.12} {:.12} {}", p.x, p.y, mesh.boundary[i] as u8)?;
    }
    writeln!(w, "elements {}", mesh.elements.len())?;
    for (i, el) in mesh.elements.iter().enumerate() {
        let kind = match el.kind {
            ElementKind::Tri3 => "tri",
            ElementKind::Quad4 => "quad",
        };
        write!(w, "{i} {kind} {}", el.region.tag())?;
        for v in el.nodes() {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    writeln!(w, "interface {}", mesh.interface_nodes.len())?;
    for v in &mesh.interface_nodes {
        writeln!(w, "{v}")?;
    }
    Ok(())
}
