//! Space-time error norms against an exact solution evaluated at surface quadrature points.

use crate::band::{NarrowBand, SurfaceSample};
use crate::mesh::BackgroundMesh;
use crate::timestepper::StepView;
use crate::{Error, Result, Vec3};

pub trait ExactSolution {
    fn value(&self, x: &Vec3, t: f64) -> f64;
    /// Gradient of the extension used for the error; only its tangential part enters.
    fn gradient(&self, x: &Vec3, t: f64) -> Vec3;
}

/// `(‖u_h - u‖², ‖P_h(∇u_h - ∇u)‖²)` on one discrete surface.
pub fn surface_errors(
    mesh: &BackgroundMesh,
    band: &NarrowBand,
    surf: &SurfaceSample,
    values: &[f64],
    t: f64,
    exact: &dyn ExactSolution,
) -> Result<(f64, f64)> {
    let (mut l2, mut h1) = (0.0, 0.0);
    for &(tet, n, start, end) in &surf.tet_ranges {
        let d = band
            .tet_dofs(mesh, tet)
            .ok_or_else(|| Error::Assembly(format!("surface tet {tet} is outside the band")))?;
        let nodal = d.map(|k| values[k]);
        let grad = mesh.p1_basis(tet).gradient_of(&nodal);
        for p in &surf.points[start..end] {
            let uh: f64 = (0..4).map(|k| p.bary[k] * nodal[k]).sum();
            let e = uh - exact.value(&p.x, t);
            let de = grad - exact.gradient(&p.x, t);
            let de = de - n * n.dot(&de);
            l2 += p.weight * e * e;
            h1 += p.weight * de.norm_squared();
        }
    }
    Ok((l2, h1))
}

/// Collects per-step errors of a run and forms `L²(0,T; H¹)` (trapezoidal rule in time)
/// and `L^∞(0,T; L²)` (max over `n = 1..N`).
#[derive(Debug, Clone, Default)]
pub struct ErrorAccumulator {
    /// `(n, ‖e‖², ‖∇_Γh e‖²)`
    pub steps: Vec<(usize, f64, f64)>,
}

impl ErrorAccumulator {
    pub fn record(&mut self, view: &StepView<'_>, exact: &dyn ExactSolution) -> Result<()> {
        let s = view.state;
        let (l2, h1) = surface_errors(view.mesh, &s.band, view.surface, &s.values, s.time, exact)?;
        self.steps.push((s.step, l2, h1));
        Ok(())
    }

    pub fn l2_h1(&self, dt: f64) -> f64 {
        let n = self.steps.len();
        let mut s = 0.0;
        for (i, &(_, l2, h1)) in self.steps.iter().enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            s += w * dt * (l2 + h1);
        }
        s.sqrt()
    }

    pub fn linf_l2(&self) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.0 >= 1)
            .map(|s| s.1.sqrt())
            .fold(0.0, f64::max)
    }
}
