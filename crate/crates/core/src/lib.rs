//! Exact synthesis and verification of ReLU networks computing maxima and
//! continuous piecewise linear functions.

pub mod format;
pub mod geometry;
pub mod ir;
pub mod linalg;
pub mod passes;
pub mod rational;
pub mod sample;
pub mod synth;
pub mod verify;

pub use rational::Rational;
