//! Exact symbolic computation on the d-ary Cantor set: prefix-replacement
//! bijections (Higman-Thompson groups V_d), their dynamics, finite
//! permutation audits, exact piecewise-linear interval maps, and chart
//! machinery for suspension flows with a dihedral symmetry.
//!
//! All arithmetic is exact: words over finite alphabets, eventually periodic
//! sequences, and arbitrary-precision rationals. No floating point is used
//! anywhere in the library.

pub mod dynamics;
pub mod error;
pub mod flow;
pub mod perm;
pub mod pl;
pub mod prefix;
pub mod vd;

pub use dynamics::{BrinDecomposition, CompressTarget};
pub use error::{Error, Result};
pub use flow::{CylinderX, DInftySystem, FlowElement, StoneSystem, TwoSidedPoint};
pub use prefix::{Antichain, ClopenSet, EvPeriodicPoint, Word};
pub use vd::{Germ, PrefixMap};
