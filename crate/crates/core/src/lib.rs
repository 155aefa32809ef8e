pub mod body;
pub mod center;
pub mod cli;
pub mod ellipsoid;
pub mod error;
pub mod hausdorff;
pub mod hull;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod map;
pub mod moments;
pub mod normalize;
pub mod renorm;
pub mod sphere;

pub use error::{Error, Result};
