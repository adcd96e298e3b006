//! Complex dimensions, fractal tube formulas and Minkowski contents of
//! self-similar tilings with a monophase generator.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod content;
pub mod error;
pub mod generator;
pub mod ifs_zeta;
pub mod oracle;
pub mod quad;
pub mod roots;
pub mod tube;

pub use content::{tiling_content, ContentKind, ContentReport};
pub use error::{Error, Result};
pub use generator::{GeneratorSource, MonophaseGenerator};
pub use ifs_zeta::{
    abscissa, complex_dimensions, detect_lattice, moran_sum, residue_at, string_lengths,
    validate_ifs, zeta_eval, ComplexDimension, FractalString, IfsSystem, LatticeClass, LatticeSpec,
};
pub use oracle::{direct_tiling_volume, PlanarIfs};
pub use tube::{build_tube_model, periodic_profile, tube_volume, PeriodicProfile, TubeModel};
