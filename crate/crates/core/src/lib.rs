//! Discretized sum-product and projection experiments over R, C, H and
//! unramified extensions of Q_p.

pub mod algebra;
pub mod budget;
pub mod dset;
pub mod energy;
pub mod error;
pub mod format;
pub mod lab;
pub mod setops;
pub mod structure;

pub use algebra::{make_algebra, Algebra, AlgebraDescriptor, AlgebraKind, AlgebraSpec, Base, Element, Side};
pub use error::{Error, Result};
