//! Constructing MDS generator matrices with a prescribed zero pattern
//! from Generalized Reed–Solomon codes, and exact tools for studying when
//! the GRS transformation matrix is generically singular.
//!
//! The pipeline: a binary support matrix `M` gives root sets `N_i` (the
//! complements of the row supports), each row becomes the polynomial
//! `P_i(x) = prod_{g in N_i} (x - a_g)`, and the code is `G = T V` where
//! `T` holds the coefficients of the `P_i` and `V` is the Vandermonde
//! matrix at the evaluation points. `det T` is the polynomial
//! `W(P_1..P_m)` evaluated at those points.

pub mod cli;
pub mod codegen;
pub mod error;
pub mod fields;
pub mod io;
pub mod polyring;
pub mod reduction;
pub mod structures;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{make_field, FieldElem, FieldMatrix, FieldSpec};
pub use polyring::{build_p, wdet, Monomial, MultiPoly, UniPolyOverRing};
pub use structures::{
    has_grp, has_rp, higher_order, mds_condition, to_root_family, RootFamily, RsSubset, SupportMatrix,
};
