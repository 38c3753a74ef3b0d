//! Combinatorics and numerics of the parabolic and elliptic Riley slices.
//!
//! The slice `R^{a,b}` is the set of `rho` for which
//! `<X, Y_rho>` (cone orders `a`, `b`) is discrete and free on its generators.
//! This crate computes:
//!
//! * Möbius algebra and the trace taxonomy ([`moebius`]),
//! * slopes, Farey neighbours and Farey words ([`farey`]),
//! * Farey trace polynomials, exact and recursive, plus root finding ([`traces`]),
//! * pleating rays, cusps and ray neighbourhoods ([`pleating`]),
//! * slice-level classification, cusp clouds and renders ([`slice`]),
//! * limit sets of `Γ_rho` ([`limitset`]),
//! * file formats shared with the command-line tool ([`io`], [`raster`]).

pub mod error;
mod numeric;
pub mod farey;
pub mod io;
pub mod limitset;
pub mod moebius;
pub mod pleating;
pub mod raster;
pub mod slice;
pub mod traces;

pub use error::{Error, Result};
pub use farey::{FareyWord, Letter, Slope};
pub use moebius::{ConeOrders, MapClass, MoebiusMap, Order, SpherePoint};
pub use num_complex::Complex64;
pub use pleating::{CuspPoint, RayTrace};
pub use raster::{Raster, Viewport};
pub use slice::{SlicePoint, Verdict};
pub use traces::TracePolynomial;
