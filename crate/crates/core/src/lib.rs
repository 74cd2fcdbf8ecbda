//! Engel branch groups acting on rooted trees, as exact symbolic objects.
//!
//! The crate builds the growing-valency groups `𝒢_p` and the regular-tree
//! groups `ℋ_{p,r}` from words over their generators, and provides checkers
//! for section identities, contraction, separation, orbit bounds and Engel
//! towers in congruence quotients and finite iterated wreath products.

pub mod alphabet;
pub mod engel;
pub mod error;
pub mod finitewreath;
pub mod group;
pub mod metrics;
pub mod treeauto;

pub use alphabet::{FpVector, TreeSignature};
pub use error::{Error, Result};
pub use group::GroupOps;
pub use treeauto::{GenLetter, Vertex, Word};
