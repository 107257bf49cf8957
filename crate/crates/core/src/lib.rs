//! Mechanics of coupled anisotropic laminates via the polar formalism.
//!
//! The crate homogenizes stacking sequences into the six stiffness and
//! compliance tensors of classical laminated-plate theory, converts between
//! Cartesian Kelvin components and polar invariants, evaluates the symmetry,
//! singularity and shape conditions of the two coupling tensors, computes
//! plate curvature responses, and searches stacking sequences for prescribed
//! coupling properties.

pub mod coupling;
pub mod error;
pub mod kelvin;
pub mod laminate;
pub mod material;
pub mod polar;
pub mod response;
pub mod search;

pub use error::{Error, Result};
pub use kelvin::{Tensor4Gen, Tensor4Sym, Vec3K};
pub use laminate::{LaminateTensors, LaminationParameters, Stack};
pub use material::Material;
pub use polar::{PolarElastic, PolarGeneral, SymmetryClass};
