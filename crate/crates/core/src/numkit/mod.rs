//! Dense complex linear algebra helpers, uniform time grids, unitary
//! generators and sample interpolation.

mod grid;
pub mod interp;
mod unitary;

pub use grid::{make_time_grid, TimeGrid};
pub use unitary::{haar_random_unitary, named_unitary, CMatrix, Unitary, UnitaryKind};
