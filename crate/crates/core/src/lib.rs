//! Building blocks for Poisson image restoration by proximal splitting.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure numerical
//! code:
//!
//! * [`prox`]: closed-form proximity operators for scalar and 2-D potentials,
//!   separable penalties and the [`ProxFunction`] abstraction used by the solvers.
//! * [`oracle`]: a brute-force proximity oracle used to check the closed forms.
//! * [`conv`]: (decimated) convolution operators, their partition into
//!   families of orthogonal rows and the composed proximity operator built on it.
//! * [`tv`]: discrete total variation, its block split and the block prox.
//! * [`frame`]: tight frames (identity, Haar, shifted Haar union).
//! * [`ppxa`]: the parallel proximal algorithm, its frame form and the
//!   accelerated frame form which needs three frame applications per iteration.
//!
//! Enable the `parallel` feature to evaluate the per-function proximity
//! operators of one iteration on the rayon pool. Reductions stay sequential,
//! so results are bit-identical with and without it.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod conv;
mod error;
mod ext;
pub mod frame;
mod image;
pub mod oracle;
pub mod ppxa;
pub mod prox;
pub mod tv;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use image::Image;
pub use prox::ProxFunction;
