//! Connectivity compression for closed and bordered quadrilateral and mixed
//! triangle/quad meshes.

pub mod error;
pub mod mesh;
pub mod preprocess;
pub mod baseline;
pub mod bits;
pub mod container;
pub mod decoder;
pub mod entropy;
pub mod fixed;
pub mod traversal;

pub use error::{Error, Result};
pub use mesh::{PolyMesh, QtMesh, TopoCounts};
