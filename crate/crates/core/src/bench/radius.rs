//! Radius of the zero level of `u_h` on `Γ_h`, measured from the `z`-axis.

use crate::assembly::TimeStepState;
use crate::band::SurfaceSample;
use crate::mesh::BackgroundMesh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub mean: f64,
    /// Spread of the crossing radii (circularity diagnostic).
    pub std: f64,
    pub crossings: usize,
}

/// Linear zero crossings of `u_h` on the edges of the surface triangles; returns the
/// mean and standard deviation of their distances to the `z`-axis.
pub fn recover_radius(
    mesh: &BackgroundMesh,
    surf: &SurfaceSample,
    state: &TimeStepState,
) -> Result<RadiusEstimate> {
    let mut radii = Vec::new();
    for tri in &surf.triangles {
        let mut u = [0.0; 3];
        for k in 0..3 {
            u[k] = state.eval_in_tet(mesh, tri.tet, &tri.corner_bary[k])?;
        }
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            if u[a] * u[b] < 0.0 {
                let s = u[a] / (u[a] - u[b]);
                let p = tri.corners[a] + (tri.corners[b] - tri.corners[a]) * s;
                radii.push(p.x.hypot(p.y));
            }
        }
    }
    if radii.is_empty() {
        return Err(Error::InterfaceLost);
    }
    let n = radii.len() as f64;
    let mean = radii.iter().sum::<f64>() / n;
    let var = radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    Ok(RadiusEstimate {
        mean,
        std: var.sqrt(),
        crossings: radii.len(),
    })
}
