//! Double-well potential `F` and its derivative `f = F'`.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `F(u) = (1 - u²)²/4` with `f` continued linearly outside `[-M, M]`.
    Standard { m: f64 },
    /// `f(u) = u²(1 - u²)`, no cutoff.
    Example3,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWell {
    pub kind: PotentialKind,
    pub eps: f64,
}

impl DoubleWell {
    pub fn standard(m: f64, eps: f64) -> Result<Self> {
        if !(m > 1.0) {
            return Err(Error::InvalidInput(format!(
                "cutoff bound must exceed 1, got {m}"
            )));
        }
        Self::checked(PotentialKind::Standard { m }, eps)
    }

    pub fn example3(eps: f64) -> Result<Self> {
        Self::checked(PotentialKind::Example3, eps)
    }

    fn checked(kind: PotentialKind, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "interface width must be positive, got {eps}"
            )));
        }
        Ok(Self { kind, eps })
    }

    #[inline]
    pub fn inv_eps2(&self) -> f64 {
        1.0 / (self.eps * self.eps)
    }

    /// `f(x)`.
    pub fn f(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::Standard { m } => {
                if x > m {
                    (3.0 * m * m - 1.0) * x - 2.0 * m * m * m
                } else if x < -m {
                    (3.0 * m * m - 1.0) * x + 2.0 * m * m * m
                } else {
                    x * (x * x - 1.0)
                }
            }
            PotentialKind::Example3 => x * x * (1.0 - x * x),
        }
    }

    /// `F(x)`, the antiderivative of `f` (with `F(±1) = 0` for the standard variant).
    #[allow(non_snake_case)]
    pub fn F(&self, x: f64) -> f64 {
        match self.kind {
            PotentialKind::Standard { m } => {
                let inner = |y: f64| 0.25 * (1.0 - y * y).powi(2);
                if x.abs() <= m {
                    inner(x)
                } else {
                    let a = x.abs();
                    inner(m) + 0.5 * (3.0 * m * m - 1.0) * (a * a - m * m)
                        - 2.0 * m * m * m * (a - m)
                }
            }
            PotentialKind::Example3 => x.powi(3) / 3.0 - x.powi(5) / 5.0,
        }
    }

    /// Lipschitz constant of `f`: `3M² - 1` for the standard variant, `max |f'|` on
    /// `[-0.5, 1.5]` for the example-3 variant.
    pub fn lipschitz(&self) -> f64 {
        match self.kind {
            PotentialKind::Standard { m } => (3.0 * m * m - 1.0).max(1.0),
            // f'(u) = 2u - 4u³ is monotone decreasing past 1/√6, so the max is at u = 1.5.
            PotentialKind::Example3 => 10.5,
        }
    }
}
