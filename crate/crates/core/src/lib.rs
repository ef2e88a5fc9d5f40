//! Numerical laboratory for minimal-entropy constructions on 3-manifolds:
//! warped cusp metrics and their surgeries, Poincaré series of free products,
//! barycenters on CAT(0) wedge spaces, and the Jacobian estimates behind them.

pub mod error;
pub mod profiles;

pub use error::{LabError, Result};
pub mod numeric;
pub mod quadrature;
pub mod entropy;
pub mod surgery;
pub mod warped;
pub mod cat0;
pub mod jacobian;
