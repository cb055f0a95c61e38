// NaN has to fail the `!(x > 0.0)` style guards
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calculus;
pub mod cli;
pub mod config;
pub mod error;
pub mod gibbs;
pub mod sampler;
pub mod space;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/configurations.md")]
mod book_configurations {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/gibbs.md")]
mod book_gibbs {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/calculus.md")]
mod book_calculus {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/identities.md")]
mod book_identities {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/oracle.md")]
mod book_oracle {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/closability.md")]
mod book_closability {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
mod book_cli {}
