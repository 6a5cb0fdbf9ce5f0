//! Proper 3-colorings of the even discrete torus `T_{L,d}`.
//!
//! The crate covers the lattice itself ([`torus`]), colorings and their phase
//! classes ([`coloring`]), single-site and block Markov chains ([`glauber`]),
//! exhaustive small-instance ground truth ([`exactgibbs`]), zero-free cutsets
//! ([`cutset`]), the shift/flow surgery on cutset interiors ([`peierls`]) and
//! closed-form counting checks ([`bounds`]).

pub mod bounds;
pub mod coloring;
pub mod cutset;
pub mod exactgibbs;
pub mod glauber;
pub mod peierls;
pub mod rho;
pub mod torus;

pub use coloring::{Coloring, ColoringError, Phase, PhaseClass};
pub use rho::Rho;
pub use torus::{Direction, Edge, Parity, Torus, TorusError, VertexSet};
