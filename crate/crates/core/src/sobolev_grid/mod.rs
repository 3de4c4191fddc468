//! Grid discretizations of Sobolev spaces, mollifiers and the boundary
//! push-in machinery.

pub mod chart;
pub mod difference;
pub mod domain;
pub mod dual_norm;
pub mod mollifier;
pub mod prop35;
pub mod pushin;

pub use chart::{build_boundary_chart, BoundaryChart, ChartKind};
pub use difference::{sobolev_norm, SobolevOperator};
pub use domain::{DomainKind, GridDomain, GridFunction, Point};
pub use dual_norm::{negative_sobolev_norm, DualNormEstimate, NegativeSobolevNorm};
pub use mollifier::{convolution_operator, mollifier_scheme, mollify, Mollifier};
pub use prop35::positive_dominant_w0;
pub use pushin::{approx_identity_with_boundary, pushin_operator, BoundaryApproximation, ChartCover, PushIn};
