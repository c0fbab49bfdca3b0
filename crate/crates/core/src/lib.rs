//! Exact verification and classification of homogeneous odd Rota-Baxter
//! operators of weight zero on the modified Witt-type Lie superalgebra.

pub mod algebra;
pub mod coeff;
pub mod decomposition;
pub mod derivations;
pub mod error;
pub mod audit;
pub mod classification;
pub mod io;
pub mod linalg;
pub mod operator;
pub mod report;
pub mod structures;
pub mod window;

pub use algebra::{bracket, BasisVector, Element, Family, Parity};
pub use coeff::{CoeffPoly, Rational};
pub use error::{Error, Result};
pub use operator::{OddOperator, ResidualReport, Tuple};
pub use window::Window;
