use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Singular values below `rank * sigma_max` count as zero.
    pub rank: f64,
    /// Eigen-angles of relative unitaries below this (radians) count as intersections.
    pub angle: f64,
    /// Allowed isotropy residual of orthonormalized frames.
    pub isotropy: f64,
    /// Allowed relative symplecticity residual of integrated solutions.
    pub symplectic: f64,
    /// Morse kernel band, relative to the operator scale.
    pub zero_band: f64,
    /// Upper edge of the flagged band, relative to the operator scale.
    pub unstable_band: f64,
    /// Band around |lambda| = 1 and Im lambda = 0 for spectral classes.
    pub class_band: f64,
    /// Bisection steps used to localize crossings.
    pub bisection_depth: usize,
    /// Interval halvings allowed when phase tracking is unresolved.
    pub refinement_depth: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: 1e-8,
            angle: 1e-7,
            isotropy: 1e-8,
            symplectic: 1e-8,
            zero_band: 1e-6,
            unstable_band: 1e-4,
            class_band: 1e-7,
            bisection_depth: 40,
            refinement_depth: 20,
        }
    }
}
