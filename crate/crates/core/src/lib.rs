//! Capacity bounds and achievable rates for the two-user Gaussian interference
//! channel with a full-duplex relay.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::too_many_arguments)]

pub mod achievable;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod gap;
pub mod gauss_info;
pub mod hull;
pub mod model;
pub mod optim;
pub mod simplex;

pub use error::{Error, Result};
