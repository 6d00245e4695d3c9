//! Singular values of resolvent differences for elliptic operators with
//! δ and δ′ interactions on closed curves and surfaces.
//!
//! The crate is `no_std` with `alloc` when the default `std` feature is off.
//! The `parallel` feature enables rayon for per-mode sweeps.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod asymptotics;
pub mod bessel;
mod error;
pub mod fd;
pub mod geometry;
pub mod modes;
pub mod quadrature;
pub mod seeley;
pub mod symbol;

pub use error::{Error, Result};
pub use symbol::Kind;
