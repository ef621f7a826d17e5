//! Engines for verifying that line-complementable subsets of discrete boxes
//! have sizes representable by the box's side lengths, together with the
//! cube-tiling machinery on flat tori that motivates the question.
//!
//! The crate is organized around four engines:
//!
//! * [`semigroup`] — coin-system representability (`n = n₁k₁ + ⋯ + n_dk_d`)
//!   with O(1) membership queries after a residue-table build.
//! * [`boxgeom`] — discrete boxes, axis lines, exact-cover decomposition of a
//!   subset's complement into disjoint lines, and exhaustive enumeration of
//!   the line-count vectors realizable by disjoint line families.
//! * [`sweep3`] — the high-throughput d=3 numerical sweep over triples
//!   `1 < k₁ < k₂ < k₃`, checkpointable and parallel.
//! * [`torus`] — exact-rational cube tilings of flat tori: validation,
//!   integer codes, simple components, and the constructive bridge between
//!   complementable sets and tilings.

pub mod bits;
pub mod boxgeom;
pub mod semigroup;
pub mod sweep3;
pub mod torus;

pub use boxgeom::{BoxDims, CellSet, Line, LineDecomposition, MVector};
pub use semigroup::{DenominationVector, Frobenius, ResidueTable};
pub use sweep3::{SweepRange, SweepReport};
pub use torus::{RationalPoint, SimpleComponent, TorusTiling};
