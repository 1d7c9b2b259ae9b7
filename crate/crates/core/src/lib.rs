//! Khovanov complexes, wall-crossing cones and finite-type audits for knot
//! diagrams.

pub mod atlas;
pub mod complex;
pub mod diagram;
pub mod khovanov;
pub mod polynomial;
pub mod wallcross;

pub use diagram::{parse_pd, DiagramError, KnotDiagram, ResolutionState, SingularDiagram, State};
pub use polynomial::{h_expansion, jones_unnormalized, kauffman_bracket, LaurentPoly, ScalarInvariant};
