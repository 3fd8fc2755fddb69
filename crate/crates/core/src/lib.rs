//! Anisotropic curvature of hypersurfaces: Wulff shapes, F-Weingarten operators,
//! anisotropic parallel and focal sets, and isoparametric classification.

pub mod anisotropy;
pub mod catalog;
pub mod classify;
pub mod cli;
pub mod error;
pub mod fit;
pub mod focal;
pub mod hypersurface;
pub mod linalg;
pub mod parallel;
pub mod patch;
pub mod sphere;
pub mod wulff;

pub use anisotropy::{AnisotropyFunction, DerivativeMode, Family};
pub use error::{Error, Result};
pub use patch::ImmersionPatch;
pub use wulff::SubsphereSpec;
