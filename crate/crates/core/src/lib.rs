//! Numerical laboratory for the disordered generalized Poland–Scheraga model.

pub mod bracket;
pub mod budget;
pub mod conv2d;
pub mod error;
pub mod fit;
pub mod intersection;
pub mod kernel;
pub mod numeric;
pub mod oracle;
pub mod polymer;
pub mod relevance;
pub mod renewal;
pub mod rng;
pub mod scaled;

mod dp;
mod parallel;

pub use bracket::Bracket;
pub use budget::Budget;
pub use error::{Error, Result};
pub use fit::ExponentFit;
pub use kernel::{Kernel, SlowlyVarying, SvFamily, TailSumTable};
pub use scaled::ScaledNonneg;
