//! One function per experiment kind.

mod cat0;
mod entropy;
mod jacobian;
mod surgery;

use crate::config::{ExperimentConfig, Kind};
use crate::error::CliError;
use crate::output::Outcome;

/// Run the experiment named by `cfg.kind` without writing anything.
pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cfg.kind {
        Kind::Cap => surgery::cap(cfg),
        Kind::Conformal => surgery::conformal(cfg),
        Kind::Flatten => surgery::flatten(cfg),
        Kind::Tube => surgery::tube(cfg),
        Kind::Compat => surgery::compat(cfg),
        Kind::Poincare => entropy::poincare(cfg),
        Kind::Freeproduct => entropy::freeproduct(cfg),
        Kind::Minent => entropy::minent(cfg),
        Kind::Barycenter => cat0::barycenter_run(cfg),
        Kind::Comparison => cat0::comparison(cfg),
        Kind::Algebraic => jacobian::algebraic(cfg),
        Kind::Jacobi => jacobian::jacobi(cfg),
    }
}

/// Down-sample `points` to at most `max` entries for plotting.
pub(crate) fn thin(points: Vec<(f64, f64)>, max: usize) -> Vec<(f64, f64)> {
    if points.len() <= max {
        return points;
    }
    let step = points.len().div_ceil(max);
    points.into_iter().step_by(step).collect()
}
