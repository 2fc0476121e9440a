//! Construction and verification of minimal Cuntz-Krieger dilations for
//! finite-dimensional operator tuples satisfying A-relations.

pub mod cli;
pub mod dilate;
pub mod error;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod pieces;
pub mod random;
pub mod report;
pub mod tuples;
pub mod variety;
pub mod words;

pub use error::{Error, Result};
pub use tuples::OperatorTuple;
pub use words::{TransitionMatrix, Word};
