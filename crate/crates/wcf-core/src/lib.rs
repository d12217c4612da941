//! Exact wall-crossing factorizations on a rank-2 charge lattice.
//!
//! The crate implements, with exact rational arithmetic throughout:
//!
//! * [`lattice`] — charges `(a, b)`, the skew pairing `<x, y> = k (x.a y.b -
//!   y.a x.b)`, sign-valued quadratic refinements, and the clockwise slope
//!   order on rays of the positive cone;
//! * [`series`] — formal series truncated at a fixed total degree, with the
//!   twisted product `e_x e_y = (-1)^{<x, y>} e_{x + y}`;
//! * [`autos`] — formal Poisson automorphisms of the truncated algebra,
//!   stored by their unit multipliers on the two generators, plus the
//!   dilogarithm flows `theta` attached to a ray;
//! * [`factor`] — slope-ordered products of dilogarithm flows and the
//!   inverse problem: peeling an automorphism into its unique ray spectrum;
//! * [`stability`] — exact wall-finding along straight-line central-charge
//!   paths, the support property, and transport of a ray spectrum across
//!   walls.
//!
//! All computations are exact: coefficients are arbitrary-precision
//! rationals, wall parameters are rationals or quadratic surds with isolating
//! intervals, and every equality asserted by the API is literal equality of
//! truncated series.

pub mod autos;
pub mod factor;
pub mod lattice;
pub mod series;
pub mod stability;

pub use autos::{lie_bracket, poisson_bracket, HamiltonianElement, OrdinaryAuto, TorusAuto};
pub use factor::{dilog_invert, factorize, spectrum_to_auto, Direction, RaySpectrum};
pub use lattice::{slope_compare, Charge, Pairing, QuadraticRefinement, Sign};
pub use series::{ConeSeries, Rat, TruncationOrder};
pub use stability::{
    check_support, cross_wall, find_walls, lift_path, CentralCharge, PathParam, QuadraticForm,
    RationalComplex, StabilityData, SupportReport, SupportViolation, Wall,
};
