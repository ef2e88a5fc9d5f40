//! CAT(0) wedge spaces: model leaves glued along a tree, comparison checks and
//! barycenters of finite measures.

mod barycenter;
mod leaf;
mod wedge;

pub use barycenter::{barycenter, barycenter_from, certificate, Barycenter, CERTIFICATE_SAMPLES};
pub use leaf::Leaf;
pub use wedge::{
    comparison_check, comparison_sides, euclid_median_identity, fixtures, leibniz, Comparison, Hub,
    PointRef, PointedMeasure, WedgeSpace,
};
