//! Core library: Python source analysis, alert detection, repository
//! mining, labeling functions, CCP computation, and impact analytics.

pub mod detect;
pub mod error;
#[doc(hidden)]
pub mod fixture;
pub mod impact;
pub mod keywords;
pub mod labeling;
pub mod metrics;
pub mod ccp;
pub mod source;
pub mod vcs;

pub use error::{Error, Result};
pub use source::{enumerate_functions, parse_bytes, parse_source, SourceUnit};
