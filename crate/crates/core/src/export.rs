//! Plot-ready exports of a nodal field.

use std::fmt::Write;

use crate::assembly::DiscreteFunction;
use crate::mesh::Mesh;

/// `vertex_index,x,y,u`, one row per vertex.
pub fn solution_csv(mesh: &Mesh, u: &DiscreteFunction) -> String {
    let mut out = String::from("vertex_index,x,y,u\n");
    for (i, (v, value)) in mesh.vertices.iter().zip(&u.values).enumerate() {
        writeln!(out, "{i},{:e},{:e},{:e}", v[0], v[1], value).unwrap();
    }
    out
}

/// Legacy ASCII VTK unstructured grid of triangles with the point scalar `u`.
pub fn solution_vtk(mesh: &Mesh, u: &DiscreteFunction) -> String {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\nwentzell solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {} double", mesh.num_vertices()).unwrap();
    for v in &mesh.vertices {
        writeln!(out, "{:e} {:e} 0", v[0], v[1]).unwrap();
    }
    let nt = mesh.triangles.len();
    writeln!(out, "CELLS {nt} {}", 4 * nt).unwrap();
    for t in &mesh.triangles {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(out, "CELL_TYPES {nt}").unwrap();
    for _ in 0..nt {
        out.push_str("5\n");
    }
    writeln!(out, "POINT_DATA {}\nSCALARS u double 1\nLOOKUP_TABLE default", mesh.num_vertices()).unwrap();
    for value in &u.values {
        writeln!(out, "{value:e}").unwrap();
    }
    out
}
