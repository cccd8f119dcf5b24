//! Legacy ASCII VTK output.

use crate::assembly::TimeStepState;
use crate::band::SurfaceSample;
use crate::mesh::BackgroundMesh;
use crate::Result;
use std::io::Write;

fn header<W: Write>(out: &mut W, title: &str, kind: &str) -> Result<()> {
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "{title}")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET {kind}")?;
    Ok(())
}

/// Whole background mesh as an unstructured grid.
pub fn write_mesh<W: Write>(mut out: W, mesh: &BackgroundMesh) -> Result<()> {
    header(&mut out, "background mesh", "UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {} double", mesh.n_vertices())?;
    for p in mesh.vertices() {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    writeln!(out, "CELLS {} {}", mesh.n_tets(), 5 * mesh.n_tets())?;
    for t in mesh.tets() {
        writeln!(out, "4 {} {} {} {}", t[0], t[1], t[2], t[3])?;
    }
    writeln!(out, "CELL_TYPES {}", mesh.n_tets())?;
    for _ in 0..mesh.n_tets() {
        writeln!(out, "10")?;
    }
    Ok(())
}

/// Band tetrahedra with the nodal values `u_h` as point data.
pub fn write_band<W: Write>(
    mut out: W,
    mesh: &BackgroundMesh,
    state: &TimeStepState,
) -> Result<()> {
    let band = &state.band;
    header(
        &mut out,
        &format!("band step {} t={}", state.step, state.time),
        "UNSTRUCTURED_GRID",
    )?;
    writeln!(out, "POINTS {} double", band.n_dofs())?;
    for &v in &band.active_dofs {
        let p = mesh.vertices()[v];
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    let n = band.band_tets.len();
    writeln!(out, "CELLS {} {}", n, 5 * n)?;
    for &t in &band.band_tets {
        let d = band
            .tet_dofs(mesh, t)
            .expect("band tet vertices are active");
        writeln!(out, "4 {} {} {} {}", d[0], d[1], d[2], d[3])?;
    }
    writeln!(out, "CELL_TYPES {n}")?;
    for _ in 0..n {
        writeln!(out, "10")?;
    }
    writeln!(out, "POINT_DATA {}", band.n_dofs())?;
    writeln!(out, "SCALARS u double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for u in &state.values {
        writeln!(out, "{u}")?;
    }
    Ok(())
}

/// Surface triangles (unshared corners) with `u_h` at the corners and the cell normals.
pub fn write_surface<W: Write>(
    mut out: W,
    mesh: &BackgroundMesh,
    surf: &SurfaceSample,
    state: &TimeStepState,
) -> Result<()> {
    let nt = surf.triangles.len();
    header(
        &mut out,
        &format!("surface step {} t={}", state.step, state.time),
        "POLYDATA",
    )?;
    writeln!(out, "POINTS {} double", 3 * nt)?;
    for tri in &surf.triangles {
        for p in &tri.corners {
            writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
        }
    }
    writeln!(out, "POLYGONS {} {}", nt, 4 * nt)?;
    for i in 0..nt {
        writeln!(out, "3 {} {} {}", 3 * i, 3 * i + 1, 3 * i + 2)?;
    }
    writeln!(out, "POINT_DATA {}", 3 * nt)?;
    writeln!(out, "SCALARS u double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for tri in &surf.triangles {
        for b in &tri.corner_bary {
            writeln!(out, "{}", state.eval_in_tet(mesh, tri.tet, b)?)?;
        }
    }
    writeln!(out, "CELL_DATA {nt}")?;
    writeln!(out, "NORMALS normal double")?;
    for tri in &surf.triangles {
        writeln!(out, "{} {} {}", tri.normal.x, tri.normal.y, tri.normal.z)?;
    }
    Ok(())
}
