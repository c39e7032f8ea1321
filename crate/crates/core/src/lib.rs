//! Order-dependent mapping (ODM) resummation of factorially divergent series.

pub mod error;
pub mod mapping;
pub mod oracles;
pub mod poly;
pub mod precision;
pub mod rho;
pub mod roots;
pub mod saddle;
pub mod series;

pub use error::{OdmError, Result};
