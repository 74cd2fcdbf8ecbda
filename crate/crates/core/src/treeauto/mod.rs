//! Symbolic tree automorphisms: words over the recursive generators `b_n`
//! and the rooted letters of `X_n`.
//!
//! Conventions: automorphisms act on the right, products act left to right
//! (`u.(gh) = (u.g).h`), `g^h = h⁻¹gh` and `[x, y] = x⁻¹y⁻¹xy`.

mod basis;
mod fractal;
mod orbit;
mod section;
mod trivial;
mod word;

pub use basis::choose_basis_v;
pub use fractal::fractality_witness;
pub use orbit::{orbit, orbit_of_word, Orbit};
pub use section::{letter_section, ConjFactor, ConjForm};
pub use trivial::{equal_to_depth, is_trivial_to_depth, prove_trivial, trivial_outside_to_depth, TrivialityVerdict};
pub use word::{GenLetter, Vertex, Word, WordGroup};
