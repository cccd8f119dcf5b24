//! Analytic moving surfaces given as the zero level of `phi(x, t)`, their velocity
//! fields, and the nodal P1 interpolant of `phi` on the background mesh.

use crate::mesh::BackgroundMesh;
use crate::{Error, Mat3, Result, Vec3};

/// A surface `Γ(t) = {phi(·,t) = 0}` transported by the velocity field `w(x,t)`.
///
/// `velocity_jacobian` returns `∂w_i/∂x_j` in entry `(i, j)`.
pub trait LevelSetGeometry: Send + Sync {
    fn name(&self) -> &str;

    fn phi(&self, x: &Vec3, t: f64) -> f64;

    fn grad_phi(&self, x: &Vec3, t: f64) -> Result<Vec3>;

    fn hessian_phi(&self, x: &Vec3, t: f64) -> Result<Mat3>;

    fn velocity(&self, x: &Vec3, t: f64) -> Result<Vec3>;

    fn velocity_jacobian(&self, x: &Vec3, t: f64) -> Result<Mat3>;

    /// Lagrangian map `Φ(y, t)` for points `y` of the initial surface, when known in closed form.
    fn flow_map(&self, _y: &Vec3, _t: f64) -> Option<Vec3> {
        None
    }

    fn inverse_flow_map(&self, _x: &Vec3, _t: f64) -> Option<Vec3> {
        None
    }

    /// `phi` at many points for one time.
    fn phi_many(&self, xs: &[Vec3], t: f64) -> Vec<f64> {
        xs.iter().map(|x| self.phi(x, t)).collect()
    }

    /// Unit normal `∇phi / |∇phi|` of the level set through `x`.
    fn normal(&self, x: &Vec3, t: f64) -> Result<Vec3> {
        let g = self.grad_phi(x, t)?;
        let n = g.norm();
        if !(n > 0.0) {
            return Err(singular(self.name(), x));
        }
        Ok(g / n)
    }

    /// Tangential velocity `w_T = w - (w·n) n` and its surface divergence
    /// `div_Γ w_T = tr(P ∇w) - (w·n) div n` with respect to the level set through `x`.
    fn tangential_velocity(&self, x: &Vec3, t: f64) -> Result<TangentialVelocity> {
        let g = self.grad_phi(x, t)?;
        let gn = g.norm();
        if !(gn > 0.0) {
            return Err(singular(self.name(), x));
        }
        let n = g / gn;
        let hess = self.hessian_phi(x, t)?;
        let w = self.velocity(x, t)?;
        let jw = self.velocity_jacobian(x, t)?;
        let wn = w.dot(&n);
        let proj = Mat3::identity() - n * n.transpose();
        let div_n = (hess.trace() - n.dot(&(hess * n))) / gn;
        Ok(TangentialVelocity {
            w_t: w - n * wn,
            div_w_t: (proj * jw).trace() - wn * div_n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentialVelocity {
    pub w_t: Vec3,
    pub div_w_t: f64,
}

fn singular(name: &str, x: &Vec3) -> Error {
    Error::SingularPoint {
        geometry: name.to_string(),
        x: x.x,
        y: x.y,
        z: x.z,
    }
}

/// Unit sphere translating with constant velocity; `phi` is the exact signed distance.
#[derive(Debug, Clone)]
pub struct TranslatingSphere {
    pub velocity: Vec3,
    pub radius: f64,
    pub center0: Vec3,
}

impl Default for TranslatingSphere {
    fn default() -> Self {
        Self {
            velocity: Vec3::new(2.0, 0.0, 0.0),
            radius: 1.0,
            center0: Vec3::zeros(),
        }
    }
}

impl TranslatingSphere {
    pub fn center(&self, t: f64) -> Vec3 {
        self.center0 + self.velocity * t
    }

    fn offset(&self, x: &Vec3, t: f64) -> Result<(Vec3, f64)> {
        let d = x - self.center(t);
        let r = d.norm();
        if r < 1e-12 {
            return Err(singular(self.name(), x));
        }
        Ok((d, r))
    }
}

impl LevelSetGeometry for TranslatingSphere {
    fn name(&self) -> &str {
        "translating-sphere"
    }

    fn phi(&self, x: &Vec3, t: f64) -> f64 {
        (x - self.center(t)).norm() - self.radius
    }

    fn grad_phi(&self, x: &Vec3, t: f64) -> Result<Vec3> {
        let (d, r) = self.offset(x, t)?;
        Ok(d / r)
    }

    fn hessian_phi(&self, x: &Vec3, t: f64) -> Result<Mat3> {
        let (d, r) = self.offset(x, t)?;
        let n = d / r;
        Ok((Mat3::identity() - n * n.transpose()) / r)
    }

    fn velocity(&self, _x: &Vec3, _t: f64) -> Result<Vec3> {
        Ok(self.velocity)
    }

    fn velocity_jacobian(&self, _x: &Vec3, _t: f64) -> Result<Mat3> {
        Ok(Mat3::zeros())
    }

    fn flow_map(&self, y: &Vec3, t: f64) -> Option<Vec3> {
        Some(y + self.velocity * t)
    }

    fn inverse_flow_map(&self, x: &Vec3, t: f64) -> Option<Vec3> {
        Some(x - self.velocity * t)
    }
}

/// Origin-centred sphere of radius `R(t) = 1/sqrt(1 + δ cos(n t))`, moving purely in the
/// normal direction with `w = R'(t) x/|x|`.
#[derive(Debug, Clone)]
pub struct PulsatingSphere {
    pub delta: f64,
    pub frequency: f64,
}

impl Default for PulsatingSphere {
    fn default() -> Self {
        Self {
            delta: 1.0 / 6.0,
            frequency: 16.0 * std::f64::consts::PI,
        }
    }
}

impl PulsatingSphere {
    pub fn new(delta: f64, frequency: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidInput(format!(
                "pulsation amplitude must lie in (0,1), got {delta}"
            )));
        }
        Ok(Self { delta, frequency })
    }

    pub fn radius(&self, t: f64) -> f64 {
        1.0 / (1.0 + self.delta * (self.frequency * t).cos()).sqrt()
    }

    pub fn radius_rate(&self, t: f64) -> f64 {
        let c = 1.0 + self.delta * (self.frequency * t).cos();
        0.5 * self.delta * self.frequency * (self.frequency * t).sin() / (c * c.sqrt())
    }

    fn radial(&self, x: &Vec3) -> Result<(Vec3, f64)> {
        let r = x.norm();
        if r < 1e-12 {
            return Err(singular(self.name(), x));
        }
        Ok((x / r, r))
    }
}

impl LevelSetGeometry for PulsatingSphere {
    fn name(&self) -> &str {
        "pulsating-sphere"
    }

    fn phi(&self, x: &Vec3, t: f64) -> f64 {
        x.norm() - self.radius(t)
    }

    fn phi_many(&self, xs: &[Vec3], t: f64) -> Vec<f64> {
        let r = self.radius(t);
        xs.iter().map(|x| x.norm() - r).collect()
    }

    fn grad_phi(&self, x: &Vec3, _t: f64) -> Result<Vec3> {
        Ok(self.radial(x)?.0)
    }

    fn hessian_phi(&self, x: &Vec3, _t: f64) -> Result<Mat3> {
        let (n, r) = self.radial(x)?;
        Ok((Mat3::identity() - n * n.transpose()) / r)
    }

    fn velocity(&self, x: &Vec3, t: f64) -> Result<Vec3> {
        Ok(self.radial(x)?.0 * self.radius_rate(t))
    }

    fn velocity_jacobian(&self, x: &Vec3, t: f64) -> Result<Mat3> {
        let (n, r) = self.radial(x)?;
        Ok((Mat3::identity() - n * n.transpose()) * (self.radius_rate(t) / r))
    }

    fn flow_map(&self, y: &Vec3, t: f64) -> Option<Vec3> {
        let r = y.norm();
        (r > 0.0).then(|| y * ((r + self.radius(t) - self.radius(0.0)) / r))
    }

    fn inverse_flow_map(&self, x: &Vec3, t: f64) -> Option<Vec3> {
        let r = x.norm();
        (r > 0.0).then(|| x * ((r - self.radius(t) + self.radius(0.0)) / r))
    }
}

/// Deforming surface with initial shape `(x - z²)² + y² + z² = 1`, stretched by the linear
/// velocity field `w = (10x cos 100t, 20y sin 100t, 20z cos 100t)`.
///
/// The flow map scales each coordinate by an exponential, so `phi(x,t) = phi0(Φ^{-1}(x,t))`.
#[derive(Debug, Clone, Default)]
pub struct DziukOscillating;

impl DziukOscillating {
    /// Logarithms of the coordinate stretch factors at time `t`.
    pub fn log_stretch(t: f64) -> Vec3 {
        let s = (100.0 * t).sin();
        let c = (100.0 * t).cos();
        Vec3::new(0.1 * s, 0.2 * (1.0 - c), 0.2 * s)
    }

    fn shrink(t: f64) -> Vec3 {
        Self::log_stretch(t).map(|a| (-a).exp())
    }

    pub fn phi0(p: &Vec3) -> f64 {
        let s = p.x - p.z * p.z;
        s * s + p.y * p.y + p.z * p.z - 1.0
    }

    fn grad_phi0(p: &Vec3) -> Vec3 {
        let s = p.x - p.z * p.z;
        Vec3::new(2.0 * s, 2.0 * p.y, -4.0 * p.z * s + 2.0 * p.z)
    }

    fn hessian_phi0(p: &Vec3) -> Mat3 {
        let s = p.x - p.z * p.z;
        Mat3::new(
            2.0,
            0.0,
            -4.0 * p.z,
            0.0,
            2.0,
            0.0,
            -4.0 * p.z,
            0.0,
            -4.0 * s + 8.0 * p.z * p.z + 2.0,
        )
    }
}

impl LevelSetGeometry for DziukOscillating {
    fn name(&self) -> &str {
        "dziuk-oscillating"
    }

    fn phi(&self, x: &Vec3, t: f64) -> f64 {
        Self::phi0(&x.component_mul(&Self::shrink(t)))
    }

    fn phi_many(&self, xs: &[Vec3], t: f64) -> Vec<f64> {
        let d = Self::shrink(t);
        xs.iter()
            .map(|x| Self::phi0(&x.component_mul(&d)))
            .collect()
    }

    fn grad_phi(&self, x: &Vec3, t: f64) -> Result<Vec3> {
        let d = Self::shrink(t);
        Ok(Self::grad_phi0(&x.component_mul(&d)).component_mul(&d))
    }

    fn hessian_phi(&self, x: &Vec3, t: f64) -> Result<Mat3> {
        let d = Self::shrink(t);
        let dm = Mat3::from_diagonal(&d);
        Ok(dm * Self::hessian_phi0(&x.component_mul(&d)) * dm)
    }

    fn velocity(&self, x: &Vec3, t: f64) -> Result<Vec3> {
        let (s, c) = (100.0 * t).sin_cos();
        Ok(Vec3::new(10.0 * x.x * c, 20.0 * x.y * s, 20.0 * x.z * c))
    }

    fn velocity_jacobian(&self, _x: &Vec3, t: f64) -> Result<Mat3> {
        let (s, c) = (100.0 * t).sin_cos();
        Ok(Mat3::from_diagonal(&Vec3::new(
            10.0 * c,
            20.0 * s,
            20.0 * c,
        )))
    }

    fn flow_map(&self, y: &Vec3, t: f64) -> Option<Vec3> {
        Some(y.component_mul(&Self::log_stretch(t).map(f64::exp)))
    }

    fn inverse_flow_map(&self, x: &Vec3, t: f64) -> Option<Vec3> {
        Some(x.component_mul(&Self::shrink(t)))
    }
}

/// Sphere at rest (`w = 0`).
#[derive(Debug, Clone)]
pub struct StationarySphere {
    pub center: Vec3,
    pub radius: f64,
}

impl LevelSetGeometry for StationarySphere {
    fn name(&self) -> &str {
        "stationary-sphere"
    }

    fn phi(&self, x: &Vec3, _t: f64) -> f64 {
        (x - self.center).norm() - self.radius
    }

    fn grad_phi(&self, x: &Vec3, _t: f64) -> Result<Vec3> {
        let d = x - self.center;
        let r = d.norm();
        if r < 1e-12 {
            return Err(singular(self.name(), x));
        }
        Ok(d / r)
    }

    fn hessian_phi(&self, x: &Vec3, _t: f64) -> Result<Mat3> {
        let n = self.grad_phi(x, 0.0)?;
        let r = (x - self.center).norm();
        Ok((Mat3::identity() - n * n.transpose()) / r)
    }

    fn velocity(&self, _x: &Vec3, _t: f64) -> Result<Vec3> {
        Ok(Vec3::zeros())
    }

    fn velocity_jacobian(&self, _x: &Vec3, _t: f64) -> Result<Mat3> {
        Ok(Mat3::zeros())
    }

    fn flow_map(&self, y: &Vec3, _t: f64) -> Option<Vec3> {
        Some(*y)
    }

    fn inverse_flow_map(&self, x: &Vec3, _t: f64) -> Option<Vec3> {
        Some(*x)
    }
}

/// Plane `normal · x = offset` at rest; `normal` must be a unit vector.
#[derive(Debug, Clone)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl LevelSetGeometry for Plane {
    fn name(&self) -> &str {
        "plane"
    }

    fn phi(&self, x: &Vec3, _t: f64) -> f64 {
        self.normal.dot(x) - self.offset
    }

    fn grad_phi(&self, _x: &Vec3, _t: f64) -> Result<Vec3> {
        Ok(self.normal)
    }

    fn hessian_phi(&self, _x: &Vec3, _t: f64) -> Result<Mat3> {
        Ok(Mat3::zeros())
    }

    fn velocity(&self, _x: &Vec3, _t: f64) -> Result<Vec3> {
        Ok(Vec3::zeros())
    }

    fn velocity_jacobian(&self, _x: &Vec3, _t: f64) -> Result<Mat3> {
        Ok(Mat3::zeros())
    }
}

/// Nodal P1 interpolant `φ_h^n` of the level-set function at time node `t_n`.
#[derive(Debug, Clone)]
pub struct DiscreteLevelSet {
    pub step: usize,
    pub time: f64,
    pub values: Vec<f64>,
}

impl DiscreteLevelSet {
    pub fn interpolate(
        geo: &dyn LevelSetGeometry,
        mesh: &BackgroundMesh,
        step: usize,
        time: f64,
    ) -> Self {
        let values = geo.phi_many(mesh.vertices(), time);
        Self { step, time, values }
    }

    #[inline]
    pub fn tet_values(&self, mesh: &BackgroundMesh, tet: usize) -> [f64; 4] {
        mesh.tet(tet).map(|v| self.values[v])
    }

    /// Exact (constant) gradient of the P1 interpolant on `tet`.
    #[inline]
    pub fn gradient(&self, mesh: &BackgroundMesh, tet: usize) -> Vec3 {
        mesh.p1_basis(tet).gradient_of(&self.tet_values(mesh, tet))
    }

    pub fn normal(&self, mesh: &BackgroundMesh, tet: usize) -> Result<Vec3> {
        let g = self.gradient(mesh, tet);
        let n = g.norm();
        if !(n > 1e-14) {
            return Err(Error::DegenerateElement {
                tet,
                reason: "vanishing level-set gradient".into(),
            });
        }
        Ok(g / n)
    }

    /// Value of the interpolant at a point given by barycentric coordinates in `tet`.
    #[inline]
    pub fn eval(&self, mesh: &BackgroundMesh, tet: usize, bary: &[f64; 4]) -> f64 {
        let v = self.tet_values(mesh, tet);
        v[0] * bary[0] + v[1] * bary[1] + v[2] * bary[2] + v[3] * bary[3]
    }
}
