//! Exact Hochschild and de Rham cohomology of rings of differential
//! operators on affine coordinate charts.

pub mod algebra;
pub mod catalog;
pub mod center;
pub mod de_rham;
pub mod deform;
pub mod diffop;
pub mod error;
pub mod forms;
pub mod hochschild;
pub mod koszul;
pub mod linalg;
pub mod parse;
pub mod poly;
pub mod resolution;
pub mod space;
pub mod vector_field;
mod windowed;

pub use error::{Error, Result};
