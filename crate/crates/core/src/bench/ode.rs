//! Radius `r(t)` of a latitude circle moving by geodesic curvature flow on a sphere of
//! radius `R(t)`:  `r' = (r² - R²)/(r R²) + (r/R) R'`.

use crate::geometry::PulsatingSphere;
use crate::{Error, Result};

/// Result of integrating the radius equation.
#[derive(Debug, Clone)]
pub struct OdeReference {
    pub r0: f64,
    pub times: Vec<f64>,
    /// `r` at `times`; zero after shrink-off.
    pub r: Vec<f64>,
    /// Sphere radius `R` at `times`.
    pub sphere_radius: Vec<f64>,
    /// Time at which the circle collapsed, if it did before the last sample.
    pub shrink_off: Option<f64>,
}

impl OdeReference {
    /// Linear interpolation in time.
    pub fn at(&self, t: f64) -> f64 {
        match self.times.iter().position(|&s| s >= t) {
            Some(0) => self.r[0],
            Some(k) => {
                let (t0, t1) = (self.times[k - 1], self.times[k]);
                let s = (t - t0) / (t1 - t0);
                self.r[k - 1] * (1.0 - s) + self.r[k] * s
            }
            None => *self.r.last().expect("non-empty"),
        }
    }
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) for a scalar ODE, sampled at the increasing `outputs`.
/// Integration stops early when `stop(t, y)` holds; the stopping time is returned and the
/// remaining samples are `None`.
pub fn dopri5(
    f: impl Fn(f64, f64) -> f64,
    t0: f64,
    y0: f64,
    outputs: &[f64],
    tol: f64,
    stop: impl Fn(f64, f64) -> bool,
) -> Result<(Vec<Option<f64>>, Option<f64>)> {
    let mut t = t0;
    let mut y = y0;
    let mut h: f64 = 1e-4;
    let mut out = Vec::with_capacity(outputs.len());
    for &target in outputs {
        if target < t - 1e-15 {
            return Err(Error::InvalidInput(
                "output times must be increasing".into(),
            ));
        }
        while t < target {
            if stop(t, y) {
                out.resize(outputs.len(), None);
                return Ok((out, Some(t)));
            }
            let step = h.min(target - t);
            let mut k = [0.0; 7];
            for s in 0..7 {
                let mut yi = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    yi += step * A[s][j] * kj;
                }
                k[s] = f(t + C[s] * step, yi);
            }
            let y5 = y + step * (0..7).map(|s| B5[s] * k[s]).sum::<f64>();
            let err = step * (0..7).map(|s| (B5[s] - B4[s]) * k[s]).sum::<f64>();
            let scale = tol * (1.0 + y.abs().max(y5.abs()));
            let ratio = err.abs() / scale;
            if ratio <= 1.0 && y5.is_finite() {
                t += step;
                y = y5;
                if t > target - 1e-14 * target.abs().max(1.0) {
                    t = target;
                }
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = step * factor;
            if h < 1e-14 {
                out.resize(outputs.len(), None);
                return Ok((out, Some(t)));
            }
        }
        out.push(Some(y));
    }
    Ok((out, None))
}

/// Integrates the radius equation with the given sphere radius history.
pub fn ode_reference(
    r0: f64,
    radius: impl Fn(f64) -> f64,
    radius_rate: impl Fn(f64) -> f64,
    times: &[f64],
    tol: f64,
) -> Result<OdeReference> {
    let t0 = times.first().copied().unwrap_or(0.0);
    if !(r0 > 0.0 && r0 < radius(t0)) {
        return Err(Error::InvalidInput(format!(
            "need 0 < r0 < R(0), got r0 = {r0}"
        )));
    }
    let rhs = |t: f64, r: f64| {
        let big = radius(t);
        (r * r - big * big) / (r * big * big) + r / big * radius_rate(t)
    };
    let (samples, shrink) = dopri5(rhs, t0, r0, times, tol, |t, r| r < 1e-3 * radius(t))?;
    if let Some(ts) = shrink {
        log::info!("circle shrinks off at t = {ts:.6}");
    }
    Ok(OdeReference {
        r0,
        times: times.to_vec(),
        r: samples.iter().map(|v| v.unwrap_or(0.0)).collect(),
        sphere_radius: times.iter().map(|&t| radius(t)).collect(),
        shrink_off: shrink,
    })
}

/// Reference for the pulsating sphere.
pub fn pulsating_reference(
    sphere: &PulsatingSphere,
    r0: f64,
    times: &[f64],
    tol: f64,
) -> Result<OdeReference> {
    ode_reference(
        r0,
        |t| sphere.radius(t),
        |t| sphere.radius_rate(t),
        times,
        tol,
    )
}
