//! Exact symbolic engine for the curved Koszul duality of the operad `uAs` of unital
//! associative algebras: the curved cooperad `uAs^¡`, the resolution `uA∞`, homotopy
//! unital A∞-algebras and their ∞-morphisms, homotopy transfer along strong deformation
//! retracts, rectification, and André–Quillen cohomology.
//!
//! All arithmetic is over the rationals. Grading is homological (differentials lower
//! degree by one). Sign conventions are summarised in `SIGNS.md` at the repository root.

pub mod algebra;
pub mod aq;
pub mod bar;
pub mod comb;
pub mod complex;
pub mod cooperad;
pub mod error;
pub mod io;
pub mod linalg;
pub mod multilinear;
pub mod operad;
pub mod rational;
pub mod rectification;
pub mod shapes;
pub mod structures;
pub mod transfer;

pub use comb::Comb;
pub use complex::{homology, sdr_to_homology, ChainComplex, Homology, Sdr};
pub use error::{Error, Result};
pub use multilinear::{Expr, MultilinearMap};
pub use rational::Rational;
