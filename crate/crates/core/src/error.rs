use thiserror::Error;

/// Errors raised by mesh construction, geometry handling, assembly and the time loop.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("point ({x:.6}, {y:.6}, {z:.6}) lies outside the mesh domain")]
    OutOfDomain { x: f64, y: f64, z: f64 },

    #[error("degenerate element {tet}: {reason}")]
    DegenerateElement { tet: usize, reason: String },

    #[error("geometry `{geometry}` is singular at ({x:.3e}, {y:.3e}, {z:.3e})")]
    SingularPoint {
        geometry: String,
        x: f64,
        y: f64,
        z: f64,
    },

    #[error("discrete surface lost at step {step}: no tetrahedron is cut by the zero level")]
    SurfaceLost { step: usize },

    #[error(
        "band nesting violated at step {step}: tetrahedron {tet} is outside the previous band"
    )]
    BandNesting { step: usize, tet: usize },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverFailure { iterations: usize, residual: f64 },

    #[error("condition estimate unavailable: {0}")]
    EstimateUnavailable(String),

    #[error("interface lost: the phase field does not change sign on the surface")]
    InterfaceLost,

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
