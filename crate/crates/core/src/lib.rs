//! Finite-depth models of straight hairy Cantor sets.
//!
//! The crate builds exact-rational Cantor approximations and length
//! functions on them, and runs the constructive homeomorphism machinery on
//! that finite data: bump functions, matched partition nests, vertical-shear
//! iterations, shuffle normalization, and Whitney height functions. Every
//! quantitative bound is checked exactly and reported in a certificate.

pub mod bump;
pub mod cantor;
pub mod cli;
pub mod error;
pub mod generate;
pub mod hair;
pub mod height;
pub mod homeo;
pub mod matching;
pub mod rational;
pub mod render;

pub use cantor::{Address, CantorApprox, ChildSelector, Interval, Scheme};
pub use error::{Error, Result};
pub use hair::LengthModel;
pub use rational::Rational;
