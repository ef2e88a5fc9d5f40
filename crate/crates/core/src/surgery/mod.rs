//! Metric surgeries on cusps and connected sums, with their curvature and volume checks.

mod conformal;
mod leeb;
mod seifert;
mod tube;

pub use conformal::{
    conformal_change, conformal_constant, hyperbolic_flatten, ConformalCusp, FlattenVolume,
    FlattenedCusp, TorusCuspSpec,
};
pub use leeb::{leeb_compatibility, orbifold_euler, SeifertFibrationData};
pub use seifert::{seifert_cusp_cap, seifert_zeta_bar, SeifertCap};
pub use tube::{
    tube_metric, unit_sphere_area, TubeDiagnostics, TubeMetric, TubeSpec, MAX_TUBE_RADIUS,
};
