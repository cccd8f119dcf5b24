//! Cut tetrahedra, the narrow band of active tetrahedra, and the piecewise planar
//! discrete surface with its quadrature.

use crate::geometry::DiscreteLevelSet;
use crate::mesh::BackgroundMesh;
use crate::quadrature::{TET_DEG2, TRIANGLE_DEG4};
use crate::{Error, Result, Vec3};

const NO_DOF: u32 = u32::MAX;

/// Tetrahedra cut by `Γ_h^n` and the band `{S : min_S |φ_h^n| <= δ_n}` around it.
///
/// `active_dofs` lists the vertices of band tetrahedra in increasing id order;
/// the position in that list is the dof index.
#[derive(Debug, Clone)]
pub struct NarrowBand {
    pub step: usize,
    pub delta: f64,
    pub cut_tets: Vec<usize>,
    pub band_tets: Vec<usize>,
    pub active_dofs: Vec<usize>,
    dof_of_vertex: Vec<u32>,
}

impl NarrowBand {
    pub fn n_dofs(&self) -> usize {
        self.active_dofs.len()
    }

    #[inline]
    pub fn dof(&self, vertex: usize) -> Option<usize> {
        match self.dof_of_vertex[vertex] {
            NO_DOF => None,
            d => Some(d as usize),
        }
    }

    #[inline]
    pub fn contains_tet(&self, tet: usize) -> bool {
        self.band_tets.binary_search(&tet).is_ok()
    }

    #[inline]
    pub fn is_cut(&self, tet: usize) -> bool {
        self.cut_tets.binary_search(&tet).is_ok()
    }

    /// Dof indices of the four vertices of a band tetrahedron.
    #[inline]
    pub fn tet_dofs(&self, mesh: &BackgroundMesh, tet: usize) -> Option<[usize; 4]> {
        let v = mesh.tet(tet);
        Some([
            self.dof(v[0])?,
            self.dof(v[1])?,
            self.dof(v[2])?,
            self.dof(v[3])?,
        ])
    }

    /// First cut tetrahedron of `self` that is not in `previous`'s band, if any.
    pub fn nesting_violation(&self, previous: &NarrowBand) -> Option<usize> {
        self.cut_tets
            .iter()
            .copied()
            .find(|&t| !previous.contains_tet(t))
    }
}

/// Classifies tetrahedra against the P1 level set.
///
/// A tet is cut iff its vertex values are not all of one strict sign (a zero value counts
/// as both signs). It is in the band iff the exact minimum of `|φ_h|` over the tet is at
/// most `delta`: zero for cut tets, the smallest `|vertex value|` otherwise.
pub fn classify(dls: &DiscreteLevelSet, mesh: &BackgroundMesh, delta: f64) -> Result<NarrowBand> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "band width must be non-negative, got {delta}"
        )));
    }
    let phi = &dls.values;
    let mut cut_tets = Vec::new();
    let mut band_tets = Vec::new();
    for cube in 0..mesh.n_cubes() {
        let cv = mesh.cube_vertices(cube);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in &cv {
            lo = lo.min(phi[v]);
            hi = hi.max(phi[v]);
        }
        if lo > delta || hi < -delta {
            continue;
        }
        for p in 0..6 {
            let tet = 6 * cube + p;
            let vals = dls.tet_values(mesh, tet);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &x in &vals {
                lo = lo.min(x);
                hi = hi.max(x);
            }
            let cut = lo <= 0.0 && hi >= 0.0;
            let min_abs = if cut { 0.0 } else { lo.abs().min(hi.abs()) };
            if cut {
                cut_tets.push(tet);
            }
            if min_abs <= delta {
                band_tets.push(tet);
            }
        }
    }
    if cut_tets.is_empty() {
        return Err(Error::SurfaceLost { step: dls.step });
    }

    let mut dof_of_vertex = vec![NO_DOF; mesh.n_vertices()];
    for &t in &band_tets {
        for v in mesh.tet(t) {
            dof_of_vertex[v] = 0;
        }
    }
    let mut active_dofs = Vec::new();
    for (v, d) in dof_of_vertex.iter_mut().enumerate() {
        if *d != NO_DOF {
            *d = active_dofs.len() as u32;
            active_dofs.push(v);
        }
    }
    Ok(NarrowBand {
        step: dls.step,
        delta,
        cut_tets,
        band_tets,
        active_dofs,
        dof_of_vertex,
    })
}

/// One planar piece of `Γ_h^n` inside its parent tetrahedron.
#[derive(Debug, Clone)]
pub struct SurfaceTriangle {
    pub tet: usize,
    pub corners: [Vec3; 3],
    /// Barycentric coordinates of the corners with respect to the parent tet.
    pub corner_bary: [[f64; 4]; 3],
    pub area: f64,
    /// Unit normal of the parent tet's level-set gradient.
    pub normal: Vec3,
}

/// A surface quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct SurfacePoint {
    pub tet: usize,
    pub x: Vec3,
    pub bary: [f64; 4],
    pub weight: f64,
}

/// Extracted discrete surface: triangles grouped by parent tet, and the flattened
/// quadrature points of the degree-4 triangle rule.
#[derive(Debug, Clone, Default)]
pub struct SurfaceSample {
    pub triangles: Vec<SurfaceTriangle>,
    pub points: Vec<SurfacePoint>,
    /// `(tet, normal, first point, end point)` for each tet that carries surface points.
    pub tet_ranges: Vec<(usize, Vec3, usize, usize)>,
}

impl SurfaceSample {
    pub fn area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }
}

/// Marching tetrahedra on the P1 level set over the cut tets of `band`.
///
/// Zero vertex values are treated as positive, so a face lying in the zero level is
/// produced once (by the tet on its negative side). Triangles with area below
/// `1e-14 h²` are dropped.
pub fn extract_surface(
    dls: &DiscreteLevelSet,
    mesh: &BackgroundMesh,
    band: &NarrowBand,
) -> Result<SurfaceSample> {
    let tol_area = 1e-14 * mesh.h() * mesh.h();
    let mut out = SurfaceSample::default();
    for &tet in &band.cut_tets {
        let vals = dls.tet_values(mesh, tet);
        let polygon = cut_polygon(&vals, &mesh.tet_coords(tet));
        if polygon.is_empty() {
            continue;
        }
        let normal = dls.normal(mesh, tet)?;
        let start = out.points.len();
        let mut emit = |i: usize, j: usize, k: usize| {
            let corners = [polygon[i].0, polygon[j].0, polygon[k].0];
            let area = 0.5
                * (corners[1] - corners[0])
                    .cross(&(corners[2] - corners[0]))
                    .norm();
            if area < tol_area {
                return;
            }
            let corner_bary = [polygon[i].1, polygon[j].1, polygon[k].1];
            for (lam, w) in TRIANGLE_DEG4.iter() {
                let x = corners[0] * lam[0] + corners[1] * lam[1] + corners[2] * lam[2];
                let bary: [f64; 4] = std::array::from_fn(|v| {
                    corner_bary[0][v] * lam[0]
                        + corner_bary[1][v] * lam[1]
                        + corner_bary[2][v] * lam[2]
                });
                out.points.push(SurfacePoint {
                    tet,
                    x,
                    bary,
                    weight: w * area,
                });
            }
            out.triangles.push(SurfaceTriangle {
                tet,
                corners,
                corner_bary,
                area,
                normal,
            });
        };
        emit(0, 1, 2);
        if polygon.len() == 4 {
            emit(0, 2, 3);
        }
        let end = out.points.len();
        if end > start {
            out.tet_ranges.push((tet, normal, start, end));
        }
    }
    Ok(out)
}

/// Zero-level polygon of a linear function on one tetrahedron (3 or 4 corners, with
/// barycentric coordinates). A 2-2 sign split yields the quad `(ac, ad, bd, bc)` with
/// `a, b` negative and `c, d` non-negative. Empty if all values have one sign.
pub fn cut_polygon(vals: &[f64; 4], xs: &[Vec3; 4]) -> Vec<(Vec3, [f64; 4])> {
    let neg: Vec<usize> = (0..4).filter(|&i| vals[i] < 0.0).collect();
    let pos: Vec<usize> = (0..4).filter(|&i| vals[i] >= 0.0).collect();
    let crossing = |a: usize, b: usize| -> (Vec3, [f64; 4]) {
        let s = vals[a] / (vals[a] - vals[b]);
        let mut bary = [0.0; 4];
        bary[a] = 1.0 - s;
        bary[b] = s;
        (xs[a] * (1.0 - s) + xs[b] * s, bary)
    };
    match (neg.len(), pos.len()) {
        (0, _) | (_, 0) => Vec::new(),
        (1, 3) => pos.iter().map(|&p| crossing(neg[0], p)).collect(),
        (3, 1) => neg.iter().map(|&n| crossing(n, pos[0])).collect(),
        _ => {
            let (a, b, c, d) = (neg[0], neg[1], pos[0], pos[1]);
            vec![
                crossing(a, c),
                crossing(a, d),
                crossing(b, d),
                crossing(b, c),
            ]
        }
    }
}

/// Quadrature on one band tetrahedron (degree 2).
#[derive(Debug, Clone)]
pub struct TetQuadrature {
    pub tet: usize,
    pub points: [Vec3; 4],
    pub weights: [f64; 4],
}

pub fn volume_quadrature(band: &NarrowBand, mesh: &BackgroundMesh) -> Vec<TetQuadrature> {
    band.band_tets
        .iter()
        .map(|&tet| {
            let xs = mesh.tet_coords(tet);
            let vol = mesh.p1_basis(tet).volume;
            TetQuadrature {
                tet,
                points: TET_DEG2
                    .map(|(l, _)| xs[0] * l[0] + xs[1] * l[1] + xs[2] * l[2] + xs[3] * l[3]),
                weights: TET_DEG2.map(|(_, w)| w * vol),
            }
        })
        .collect()
}
