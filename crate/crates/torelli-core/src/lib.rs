//! Exact-rational representation theory of sl_g and sp_2g modules built from
//! the standard representation.

pub mod characters;
pub mod decompose;
pub mod equivariant_maps;
pub mod exterior;
pub mod freegroup_johnson;
pub mod rep_spaces;
pub mod scalar_linalg;
