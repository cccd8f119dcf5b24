//! Per-step operator blocks, system matrix and right-hand side over the active dofs.

use crate::band::{NarrowBand, SurfaceSample};
use crate::geometry::{DiscreteLevelSet, LevelSetGeometry};
use crate::mesh::BackgroundMesh;
use crate::potential::DoubleWell;
use crate::solver::CsrMatrix;
use crate::{Error, Result, Vec3};

/// Source term `g(x, t)` added to the right-hand side.
pub type ForcingFn<'a> = dyn Fn(&Vec3, f64) -> f64 + Send + Sync + 'a;

/// Separately assembled pieces of the step matrix. Row index = test function,
/// column index = trial function.
#[derive(Debug, Clone)]
pub struct OperatorBlocks {
    /// `∫_Γh φ_j φ_i`
    pub mass: CsrMatrix,
    /// `½ ∫_Γh (w_T·∇_Γh φ_j) φ_i - (w_T·∇_Γh φ_i) φ_j` (skew-symmetric)
    pub advection: CsrMatrix,
    /// `-½ ∫_Γh div_Γ(w_T) φ_j φ_i`
    pub divergence: CsrMatrix,
    /// `∫_Γh ∇_Γh φ_j · ∇_Γh φ_i`
    pub stiffness: CsrMatrix,
    /// `Σ_band (n_h·∇φ_j)(n_h·∇φ_i) |S|`
    pub normal_stab: CsrMatrix,
    /// `½ max |div_Γ w_T|` over the surface quadrature points.
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    pub dt: f64,
    pub beta: f64,
    pub rho: f64,
}

impl StepParams {
    #[inline]
    pub fn mass_factor(&self) -> f64 {
        (1.0 + self.beta * self.dt) / self.dt
    }
}

#[derive(Debug, Clone)]
pub struct StepSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Global vertex id of each dof.
    pub dof_map: Vec<usize>,
}

/// Sparsity pattern: dof pairs sharing a band tetrahedron.
pub fn band_pattern(mesh: &BackgroundMesh, band: &NarrowBand) -> Result<CsrMatrix> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::with_capacity(27); band.n_dofs()];
    for &tet in &band.band_tets {
        let d = band
            .tet_dofs(mesh, tet)
            .ok_or_else(|| Error::Assembly(format!("band tet {tet} has inactive vertices")))?;
        for &i in &d {
            rows[i].extend_from_slice(&d);
        }
    }
    CsrMatrix::from_pattern(rows)
}

/// Value-array positions of the local `4×4` block; shared by matrices with the same pattern.
fn positions(m: &CsrMatrix, dofs: &[usize; 4]) -> Result<[[usize; 4]; 4]> {
    let mut pos = [[0; 4]; 4];
    for (a, &i) in dofs.iter().enumerate() {
        for (b, &j) in dofs.iter().enumerate() {
            pos[a][b] = m.position(i, j).ok_or_else(|| {
                Error::Assembly(format!("entry ({i}, {j}) outside the sparsity pattern"))
            })?;
        }
    }
    Ok(pos)
}

fn scatter(m: &mut CsrMatrix, pos: &[[usize; 4]; 4], local: &[[f64; 4]; 4]) {
    let v = m.values_mut();
    for a in 0..4 {
        for b in 0..4 {
            v[pos[a][b]] += local[a][b];
        }
    }
}

impl OperatorBlocks {
    /// Assembles all blocks at time `t` on the surface `surf` extracted from `dls`.
    pub fn assemble(
        mesh: &BackgroundMesh,
        dls: &DiscreteLevelSet,
        band: &NarrowBand,
        surf: &SurfaceSample,
        geo: &dyn LevelSetGeometry,
        t: f64,
    ) -> Result<Self> {
        let pattern = band_pattern(mesh, band)?;
        let mut mass = pattern.clone();
        let mut advection = pattern.clone();
        let mut divergence = pattern.clone();
        let mut stiffness = pattern.clone();
        let mut normal_stab = pattern;
        let mut max_div: f64 = 0.0;

        for &(tet, n, start, end) in &surf.tet_ranges {
            if !band.is_cut(tet) {
                return Err(Error::Assembly(format!(
                    "surface piece in tet {tet} which is not cut"
                )));
            }
            let dofs = band
                .tet_dofs(mesh, tet)
                .ok_or_else(|| Error::Assembly(format!("surface tet {tet} is outside the band")))?;
            let grads = mesh.p1_basis(tet).gradients;
            let tg: [Vec3; 4] = grads.map(|g| g - n * n.dot(&g));
            let mut lm = [[0.0; 4]; 4];
            let mut la = [[0.0; 4]; 4];
            let mut ld = [[0.0; 4]; 4];
            let mut area = 0.0;
            for p in &surf.points[start..end] {
                let tv = geo.tangential_velocity(&p.x, t)?;
                max_div = max_div.max(tv.div_w_t.abs());
                let wt: [f64; 4] = std::array::from_fn(|k| tv.w_t.dot(&tg[k]));
                let l = &p.bary;
                area += p.weight;
                for a in 0..4 {
                    for b in 0..4 {
                        let mm = p.weight * l[a] * l[b];
                        lm[a][b] += mm;
                        ld[a][b] -= 0.5 * tv.div_w_t * mm;
                        la[a][b] += 0.5 * p.weight * (wt[b] * l[a] - wt[a] * l[b]);
                    }
                }
            }
            let ls: [[f64; 4]; 4] =
                std::array::from_fn(|a| std::array::from_fn(|b| area * tg[a].dot(&tg[b])));
            let pos = positions(&mass, &dofs)?;
            scatter(&mut mass, &pos, &lm);
            scatter(&mut advection, &pos, &la);
            scatter(&mut divergence, &pos, &ld);
            scatter(&mut stiffness, &pos, &ls);
        }

        for &tet in &band.band_tets {
            let dofs = band
                .tet_dofs(mesh, tet)
                .expect("pattern built from band tets");
            let basis = mesh.p1_basis(tet);
            let n = dls.normal(mesh, tet)?;
            let ng: [f64; 4] = basis.gradients.map(|g| n.dot(&g));
            let ln: [[f64; 4]; 4] =
                std::array::from_fn(|a| std::array::from_fn(|b| basis.volume * ng[a] * ng[b]));
            let pos = positions(&normal_stab, &dofs)?;
            scatter(&mut normal_stab, &pos, &ln);
        }

        Ok(Self {
            mass,
            advection,
            divergence,
            stiffness,
            normal_stab,
            xi: 0.5 * max_div,
        })
    }

    /// `(1+β_sΔt)/Δt · M + a_n`.
    pub fn system_matrix(&self, p: &StepParams) -> Result<CsrMatrix> {
        CsrMatrix::combine(&[
            (p.mass_factor(), &self.mass),
            (1.0, &self.advection),
            (1.0, &self.divergence),
            (1.0, &self.stiffness),
            (p.rho, &self.normal_stab),
        ])
    }

    /// The bilinear form `a_n` alone.
    pub fn bilinear_form(&self, rho: f64) -> Result<CsrMatrix> {
        CsrMatrix::combine(&[
            (1.0, &self.advection),
            (1.0, &self.divergence),
            (1.0, &self.stiffness),
            (rho, &self.normal_stab),
        ])
    }
}

/// Nodal solution on the active dofs of one step's band.
#[derive(Debug, Clone)]
pub struct TimeStepState {
    pub step: usize,
    pub time: f64,
    pub band: NarrowBand,
    pub values: Vec<f64>,
}

impl TimeStepState {
    pub fn vertex_value(&self, vertex: usize) -> Option<f64> {
        self.band.dof(vertex).map(|d| self.values[d])
    }

    /// P1 value in a band tetrahedron given barycentric coordinates.
    pub fn eval_in_tet(&self, mesh: &BackgroundMesh, tet: usize, bary: &[f64; 4]) -> Result<f64> {
        let d = self.band.tet_dofs(mesh, tet).ok_or(Error::BandNesting {
            step: self.step + 1,
            tet,
        })?;
        Ok((0..4).map(|k| bary[k] * self.values[d[k]]).sum())
    }

    /// P1 value at an arbitrary point of the band.
    pub fn transfer_eval(&self, mesh: &BackgroundMesh, x: &Vec3) -> Result<f64> {
        let (tet, bary) = mesh.locate_point(x)?;
        if self.band.contains_tet(tet) {
            return self.eval_in_tet(mesh, tet, &bary);
        }
        // Points on a face shared with a band tet.
        let tol = -1e-10;
        for t in mesh.tets_near(x) {
            if self.band.contains_tet(t) {
                let b = mesh.barycentric(t, x);
                if b.iter().all(|&v| v >= tol) {
                    return self.eval_in_tet(mesh, t, &b);
                }
            }
        }
        Err(Error::BandNesting {
            step: self.step + 1,
            tet,
        })
    }
}

/// `rhs_i = ∫_Γh [(1+β_sΔt)/Δt u^{n-1} - ε^{-2} f(u^{n-1}) + g(·, t)] φ_i`, with `u^{n-1}`
/// evaluated in the parent tet of each surface point (which lies in the previous band).
#[allow(clippy::too_many_arguments)]
pub fn assemble_rhs(
    mesh: &BackgroundMesh,
    band: &NarrowBand,
    surf: &SurfaceSample,
    prev: &TimeStepState,
    params: &StepParams,
    pot: &DoubleWell,
    forcing: Option<&ForcingFn<'_>>,
    t: f64,
) -> Result<Vec<f64>> {
    let mut rhs = vec![0.0; band.n_dofs()];
    let c = params.mass_factor();
    let k = pot.inv_eps2();
    for &(tet, _, start, end) in &surf.tet_ranges {
        let dofs = band
            .tet_dofs(mesh, tet)
            .ok_or_else(|| Error::Assembly(format!("surface tet {tet} is outside the band")))?;
        for p in &surf.points[start..end] {
            let u = prev.eval_in_tet(mesh, tet, &p.bary)?;
            let mut val = c * u - k * pot.f(u);
            if let Some(g) = forcing {
                val += g(&p.x, t);
            }
            for a in 0..4 {
                rhs[dofs[a]] += p.weight * val * p.bary[a];
            }
        }
    }
    Ok(rhs)
}

/// `∫_Γh q(u_h)` for nodal values over the band's dofs.
pub fn surface_integral(
    mesh: &BackgroundMesh,
    band: &NarrowBand,
    surf: &SurfaceSample,
    values: &[f64],
    q: impl Fn(f64) -> f64,
) -> Result<f64> {
    let mut s = 0.0;
    for &(tet, _, start, end) in &surf.tet_ranges {
        let d = band
            .tet_dofs(mesh, tet)
            .ok_or_else(|| Error::Assembly(format!("surface tet {tet} is outside the band")))?;
        for p in &surf.points[start..end] {
            let u: f64 = (0..4).map(|k| p.bary[k] * values[d[k]]).sum();
            s += p.weight * q(u);
        }
    }
    Ok(s)
}
