pub mod circuits;
pub mod cost;
pub mod dilution;
pub mod error;
pub mod noise;
pub mod quantum;
pub mod sweep;
pub mod synthesis;
pub mod verify;

pub use error::{Error, Result};

/// The guide in `book/`, compiled here so its examples run as doctests.
#[doc(hidden)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod chapter0 {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    pub mod chapter1 {}
    #[doc = include_str!("../../../book/src/noise.md")]
    pub mod chapter2 {}
    #[doc = include_str!("../../../book/src/dilution.md")]
    pub mod chapter3 {}
    #[doc = include_str!("../../../book/src/cost.md")]
    pub mod chapter4 {}
    #[doc = include_str!("../../../book/src/synthesis.md")]
    pub mod chapter5 {}
    #[doc = include_str!("../../../book/src/sweep.md")]
    pub mod chapter6 {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod chapter7 {}
}
