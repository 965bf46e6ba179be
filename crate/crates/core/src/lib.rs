pub mod error;
pub mod fourier;
pub mod geometry;
pub mod inversion;
pub mod json;
pub mod limits;
pub mod ks;
pub mod measure;
pub mod quad;
pub mod radial;
pub mod regvar;
pub mod simulate;
pub mod specfun;
pub mod stable;

pub use error::{LevyError, Result};
