//! Calculator library for toroidal degenerations.
//!
//! Given a toric fiber space (a map of fans together with a lattice map) or a
//! local monomial chart model, this crate validates the weak-semistability
//! structure, computes special-fiber stratifications, real-oriented-blow-up
//! fiber invariants, log-sheaf monodromy cohomology, and weight/Hodge
//! spectral-sequence pages, checking the degeneration statements numerically
//! against independent oracles.
//!
//! Everything is exact: integer lattice computations use arbitrary-precision
//! integers, cohomology is over `Q`, and monodromy computations are over the
//! field `Q(tau)` with `tau` a formal transcendental.

pub mod cli;
pub mod exact_linalg;
pub mod fan_geometry;
pub mod fiber_space;
pub mod log_sheaves;
pub mod rob_combinatorics;
pub mod special_fiber;
pub mod toric_cohomology;
pub mod weight_ss;
