//! Complex-function calculus for the map classes: evaluation, exact
//! derivatives and reflections, residues, roots and winding numbers.

pub mod grid;
pub mod maps;
pub mod poly;
pub mod rational;
pub mod roots;
pub mod winding;

pub use num_complex::Complex64;

pub use grid::CircleGrid;
pub use maps::{AnalyticMap, ExampleAbcMap, PolynomialMap, RationalMap};
pub use poly::Poly;
pub use rational::{contour_residue, LaurentSlice, Pole, RationalFn};
pub use roots::{match_roots, polynomial_roots};
pub use winding::{winding_number, BoundaryCurve, Winding};
