//! Numerical laboratory for rotationally symmetric mean curvature flow of
//! stacked pancake profiles.
//!
//! A hypersurface of revolution about the `x`-axis is represented by its
//! profile curve in the half-plane `{(x, r) : r >= 0}`. Under mean curvature
//! flow the profile moves with normal speed `kappa + (n - 1) cos(theta) / r`.

pub mod barrier;
pub mod curve;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod io;
pub mod join;
pub mod measure;
pub mod numeric;
pub mod pancake;
pub mod presets;
pub mod resample;
pub mod shoot;

pub use curve::{CurveView, ParamCurve, Point, ProfileGraph, Region};
pub use error::*;
