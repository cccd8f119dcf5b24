//! Uniform background tetrahedral mesh built from a cube grid with the Kuhn split.

use crate::{Error, Mat3, Result, Vec3};

/// Axis-aligned box `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    /// The cube `[-a, a]^3`.
    pub fn centered_cube(half_side: f64) -> Self {
        Self::new(Vec3::repeat(-half_side), Vec3::repeat(half_side))
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }
}

/// Axis orderings of the six monotone lattice paths from `(0,0,0)` to `(1,1,1)`.
const KUHN_PATHS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

/// Odd permutations get their first two vertices swapped so every tet is positively oriented.
const KUHN_ODD: [bool; 6] = [false, true, true, false, false, true];

/// Constant gradients of the four barycentric shape functions of one tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P1BasisData {
    pub gradients: [Vec3; 4],
    pub volume: f64,
}

impl P1BasisData {
    pub fn from_vertices(tet: usize, x: &[Vec3; 4]) -> Result<Self> {
        let jac = Mat3::from_columns(&[x[1] - x[0], x[2] - x[0], x[3] - x[0]]);
        let det = jac.determinant();
        let scale = (x[1] - x[0])
            .norm()
            .max((x[2] - x[0]).norm())
            .max((x[3] - x[0]).norm());
        if !(det.abs() > 1e-14 * scale.powi(3)) {
            return Err(Error::DegenerateElement {
                tet,
                reason: format!("Jacobian determinant {det:e}"),
            });
        }
        let inv = jac.try_inverse().ok_or_else(|| Error::DegenerateElement {
            tet,
            reason: "singular Jacobian".into(),
        })?;
        let g1: Vec3 = inv.row(0).transpose();
        let g2: Vec3 = inv.row(1).transpose();
        let g3: Vec3 = inv.row(2).transpose();
        Ok(Self {
            gradients: [-(g1 + g2 + g3), g1, g2, g3],
            volume: det.abs() / 6.0,
        })
    }

    /// Gradient of the P1 function with the given vertex values.
    #[inline]
    pub fn gradient_of(&self, values: &[f64; 4]) -> Vec3 {
        self.gradients[0] * values[0]
            + self.gradients[1] * values[1]
            + self.gradients[2] * values[2]
            + self.gradients[3] * values[3]
    }
}

/// Time-independent background mesh of `[min,max]` split into cubes of side `h`,
/// each cube split into six tetrahedra.
///
/// Vertex `(i,j,k)` has id `i + (nx+1)*(j + (ny+1)*k)`; tetrahedron `6*c + p` is the
/// `p`-th Kuhn tet of cube `c = ci + nx*(cj + ny*ck)`.
#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    domain: Aabb,
    h: f64,
    dims: [usize; 3],
    vertices: Vec<Vec3>,
    tets: Vec<[usize; 4]>,
    basis: [P1BasisData; 6],
}

impl BackgroundMesh {
    pub fn build_uniform(domain: Aabb, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidInput(format!(
                "mesh size must be positive, got {h}"
            )));
        }
        let ext = domain.extent();
        let mut dims = [0usize; 3];
        for a in 0..3 {
            if !(ext[a] > 0.0) {
                return Err(Error::InvalidInput(format!("empty domain along axis {a}")));
            }
            let n = (ext[a] / h).round();
            if n < 1.0 || (n * h - ext[a]).abs() > 1e-9 * ext[a] {
                return Err(Error::InvalidInput(format!(
                    "domain side {} along axis {a} is not an integer multiple of h = {h}",
                    ext[a]
                )));
            }
            dims[a] = n as usize;
        }
        let [nx, ny, nz] = dims;

        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    vertices.push(Vec3::new(
                        domain.min.x + i as f64 * h,
                        domain.min.y + j as f64 * h,
                        domain.min.z + k as f64 * h,
                    ));
                }
            }
        }

        let vid = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
        let mut tets = Vec::with_capacity(6 * nx * ny * nz);
        for ck in 0..nz {
            for cj in 0..ny {
                for ci in 0..nx {
                    for p in 0..6 {
                        let path = kuhn_path_offsets(p);
                        let mut ids = path.map(|o| vid(ci + o[0], cj + o[1], ck + o[2]));
                        if KUHN_ODD[p] {
                            ids.swap(0, 1);
                        }
                        tets.push(ids);
                    }
                }
            }
        }

        let mut basis = [P1BasisData {
            gradients: [Vec3::zeros(); 4],
            volume: 0.0,
        }; 6];
        for (p, b) in basis.iter_mut().enumerate() {
            let ids = tets[p];
            let x = ids.map(|v| vertices[v]);
            *b = P1BasisData::from_vertices(p, &x)?;
        }

        Ok(Self {
            domain,
            h,
            dims,
            vertices,
            tets,
            basis,
        })
    }

    pub fn domain(&self) -> &Aabb {
        &self.domain
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cube_grid_dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_tets(&self) -> usize {
        self.tets.len()
    }

    pub fn n_cubes(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn tet(&self, tet: usize) -> [usize; 4] {
        self.tets[tet]
    }

    #[inline]
    pub fn tet_coords(&self, tet: usize) -> [Vec3; 4] {
        self.tets[tet].map(|v| self.vertices[v])
    }

    /// P1 basis gradients and volume; all tets of the same Kuhn type share them.
    #[inline]
    pub fn p1_basis(&self, tet: usize) -> &P1BasisData {
        &self.basis[tet % 6]
    }

    /// The eight vertex ids of cube `c`, ordered by offset bits `(dx, dy, dz)`.
    pub fn cube_vertices(&self, cube: usize) -> [usize; 8] {
        let [nx, ny, _] = self.dims;
        let ci = cube % nx;
        let cj = (cube / nx) % ny;
        let ck = cube / (nx * ny);
        let base = ci + (nx + 1) * (cj + (ny + 1) * ck);
        let sx = 1;
        let sy = nx + 1;
        let sz = (nx + 1) * (ny + 1);
        [
            base,
            base + sx,
            base + sy,
            base + sx + sy,
            base + sz,
            base + sx + sz,
            base + sy + sz,
            base + sx + sy + sz,
        ]
    }

    /// Finds a tetrahedron containing `x` and its barycentric coordinates (in stored vertex order).
    pub fn locate_point(&self, x: &Vec3) -> Result<(usize, [f64; 4])> {
        let tol = 1e-10 * self.h;
        let d = &self.domain;
        for a in 0..3 {
            if !(x[a] >= d.min[a] - tol && x[a] <= d.max[a] + tol) {
                return Err(Error::OutOfDomain {
                    x: x.x,
                    y: x.y,
                    z: x.z,
                });
            }
        }
        let mut cell = [0usize; 3];
        let mut local = [0.0f64; 3];
        for a in 0..3 {
            let s = (x[a] - d.min[a]) / self.h;
            let c = (s.floor().max(0.0) as usize).min(self.dims[a] - 1);
            cell[a] = c;
            local[a] = s - c as f64;
        }
        // Order axes by decreasing local coordinate: that ordering is the Kuhn path.
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            local[b]
                .partial_cmp(&local[a])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let p = KUHN_PATHS
            .iter()
            .position(|path| *path == order)
            .expect("every axis ordering is a Kuhn path");
        let mut bary = [
            1.0 - local[order[0]],
            local[order[0]] - local[order[1]],
            local[order[1]] - local[order[2]],
            local[order[2]],
        ];
        if KUHN_ODD[p] {
            bary.swap(0, 1);
        }
        let [nx, ny, _] = self.dims;
        let cube = cell[0] + nx * (cell[1] + ny * cell[2]);
        Ok((6 * cube + p, bary))
    }

    /// Tetrahedra of the cube containing `x` and of its 26 neighbours.
    pub fn tets_near(&self, x: &Vec3) -> Vec<usize> {
        let mut out = Vec::new();
        let d = &self.domain;
        let mut cell = [0i64; 3];
        for a in 0..3 {
            let s = ((x[a] - d.min[a]) / self.h).floor() as i64;
            cell[a] = s.clamp(0, self.dims[a] as i64 - 1);
        }
        let [nx, ny, nz] = self.dims.map(|n| n as i64);
        for dk in -1..=1 {
            for dj in -1..=1 {
                for di in -1..=1 {
                    let (i, j, k) = (cell[0] + di, cell[1] + dj, cell[2] + dk);
                    if i < 0 || j < 0 || k < 0 || i >= nx || j >= ny || k >= nz {
                        continue;
                    }
                    let cube = (i + nx * (j + ny * k)) as usize;
                    out.extend((0..6).map(|p| 6 * cube + p));
                }
            }
        }
        out
    }

    /// Barycentric coordinates of `x` with respect to an arbitrary tetrahedron.
    pub fn barycentric(&self, tet: usize, x: &Vec3) -> [f64; 4] {
        let ids = self.tets[tet];
        let b = self.p1_basis(tet);
        let mut lam = [0.0; 4];
        for i in 0..4 {
            lam[i] = 1.0 + b.gradients[i].dot(&(x - self.vertices[ids[i]]));
        }
        lam
    }
}

fn kuhn_path_offsets(p: usize) -> [[usize; 3]; 4] {
    let path = KUHN_PATHS[p];
    let mut out = [[0usize; 3]; 4];
    for s in 0..3 {
        out[s + 1] = out[s];
        out[s + 1][path[s]] = 1;
    }
    out
}
