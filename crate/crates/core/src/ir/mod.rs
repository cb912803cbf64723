//! Exact-arithmetic network IR.

mod affine;
mod network;
mod ops;
mod stats;

pub use affine::{axpy_row, dot, normalize_row, scale_row, AffineMap, SparseRow};
pub use network::ReluNetwork;
pub use ops::{compose, concat, difference, linear_combination, pad_depth, parallel};
pub use stats::{stats, NetworkStats};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IrError {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("hidden layer counts differ: expected {expected}, found {found}")]
    DepthMismatch { expected: usize, found: usize },
    #[error("cannot pad a network with {current} hidden layers down to {target}")]
    DepthBelowCurrent { current: usize, target: usize },
    #[error("empty network list")]
    Empty,
    #[error("network has no layers")]
    NoLayers,
    #[error("network input dimension must be positive")]
    ZeroInputDim,
}
