//! Workbench for weighted modules and chain complexes over group rings.
//!
//! Everything is exact: scalars are arbitrary-precision rationals, weights are
//! rationals, and every inequality a checker reports was evaluated in rational
//! arithmetic. Verification over sample sets is data-parallel when the
//! `parallel` feature is enabled (it is by default); results are reduced in
//! a fixed order so reports are byte-reproducible for a given seed.

pub mod bounding;
pub mod complexes;
pub mod encode;
pub mod exec;
pub mod groups;
pub mod maps;
pub mod modules;
pub mod monomial;
pub mod obstruction;
pub mod rat;
pub mod report;
pub mod waldhausen;

pub use bounding::{BoundingClass, BoundingFunction, ClassExpr, ClassName};
pub use groups::{GroupElement, GroupModel, LengthOracle};
pub use maps::{BoundednessCertificate, CheckStatus, ModuleMap};
pub use modules::{FormalSum, Key, Module, NormedRing};
pub use rat::Rat;
