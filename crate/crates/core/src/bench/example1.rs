//! Translating unit sphere with the manufactured solution
//! `u = α(t)(√(3/π) ŷ + 1)`, `α(t) = ½(1 - 0.8e^{-40t})`, where `ŷ` is the `y`-component of
//! the unit vector from the moving center (the normal extension of `y - y₀` off the sphere).

use crate::bench::norms::ExactSolution;
use crate::geometry::TranslatingSphere;
use crate::potential::DoubleWell;
use crate::{Result, Vec3};
use std::f64::consts::PI;

pub const EPS: f64 = 0.1;
pub const FINAL_TIME: f64 = 0.1;
pub const DOMAIN_HALF_WIDTH: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct Example1 {
    pub geo: TranslatingSphere,
    pub pot: DoubleWell,
}

impl Example1 {
    pub fn new(eps: f64) -> Result<Self> {
        Ok(Self {
            geo: TranslatingSphere::default(),
            pot: DoubleWell::standard(2.0, eps)?,
        })
    }

    #[inline]
    pub fn slope() -> f64 {
        (3.0 / PI).sqrt()
    }

    pub fn amplitude(t: f64) -> f64 {
        0.5 * (1.0 - 0.8 * (-40.0 * t).exp())
    }

    pub fn amplitude_rate(t: f64) -> f64 {
        16.0 * (-40.0 * t).exp()
    }

    fn offset(&self, x: &Vec3, t: f64) -> (Vec3, f64) {
        let r = x - self.geo.center(t);
        let d = r.norm();
        (r, d)
    }

    fn yhat(&self, x: &Vec3, t: f64) -> f64 {
        let (r, d) = self.offset(x, t);
        r.y / d
    }

    /// `g = u̇ - Δ_Γ u + ε^{-2} f(u)`, using `Δ_Γ ŷ = -2ŷ` on the unit sphere and
    /// `u̇ = α'(aŷ + 1)` (`ŷ` is constant along the translation).
    pub fn forcing(&self, x: &Vec3, t: f64) -> f64 {
        let a = Self::slope();
        let y = self.yhat(x, t);
        let u = Self::amplitude(t) * (a * y + 1.0);
        Self::amplitude_rate(t) * (a * y + 1.0)
            + 2.0 * Self::amplitude(t) * a * y
            + self.pot.inv_eps2() * self.pot.f(u)
    }
}

impl ExactSolution for Example1 {
    fn value(&self, x: &Vec3, t: f64) -> f64 {
        Self::amplitude(t) * (Self::slope() * self.yhat(x, t) + 1.0)
    }

    fn gradient(&self, x: &Vec3, t: f64) -> Vec3 {
        let (r, d) = self.offset(x, t);
        let rhat = r / d;
        let dy = (Vec3::y() - rhat * rhat.y) / d;
        dy * (Self::amplitude(t) * Self::slope())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forcing_special_values() {
        let ex = Example1::new(EPS).unwrap();
        // Equator relative to the moving center: y-terms vanish.
        for t in [0.0, 0.03, 0.1] {
            let x = ex.geo.center(t) + Vec3::new(0.6, 0.0, 0.8);
            let c = Example1::amplitude(t);
            let expect = Example1::amplitude_rate(t) + 100.0 * c * (c * c - 1.0);
            assert!((ex.forcing(&x, t) - expect).abs() < 1e-12);
        }
        // Late-time limit of the linear part.
        let t = 10.0;
        let x = ex.geo.center(t) + Vec3::new(0.0, 0.6, 0.8);
        let u = ex.value(&x, t);
        let linear = ex.forcing(&x, t) - 100.0 * ex.pot.f(u);
        assert!((linear - Example1::slope() * 0.6).abs() < 1e-12);
    }

    #[test]
    fn gradient_is_tangential_and_matches_differences() {
        let ex = Example1::new(EPS).unwrap();
        let t = 0.04;
        let x = ex.geo.center(t) + Vec3::new(0.3, -0.5, 0.2).normalize() * 1.05;
        let g = ex.gradient(&x, t);
        let n = (x - ex.geo.center(t)).normalize();
        assert!(g.dot(&n).abs() < 1e-14);
        let h = 1e-6;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            let fd = (ex.value(&(x + e), t) - ex.value(&(x - e), t)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }
}
