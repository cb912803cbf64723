//! Exact polytopes, sum/join certificates and subdivisions.

pub mod expr;
pub mod polytope;
pub mod subdivision;

use crate::rational::Rational;
use crate::verify::VerifyError;

pub use expr::{eval_expr, PolytopeExpr};
pub use polytope::{intersect, is_face, join, minkowski_sum, Facet, HRep, HalfSpace, Polytope, MAX_EXACT_DIM};
pub use subdivision::{
    build_simplex3_subdivision, check_cover, check_full_additivity, check_valuation, lift_to_simplex4,
    newton_polytope, CoverReport, IdentityReport, Piece, SubdivisionComplex,
};

#[derive(Debug, thiserror::Error)]
pub enum GeometryError {
    #[error("empty point set")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("dimension {dim} above the supported maximum {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("malformed polytope expression: {0}")]
    Malformed(String),
    #[error("intersection of {} is empty", subset.join(", "))]
    EmptyIntersection { subset: Vec<String> },
    #[error("{m} pieces, above the maximum of {cap}")]
    TooManyPieces { m: usize, cap: usize },
    #[error("union is not convex: a point of the hull lies in neither piece")]
    NotConvexUnion { witness: Vec<Rational> },
    #[error("complex is not a subdivided 3-simplex")]
    EmbeddingMismatch,
    #[error(transparent)]
    Verify(#[from] VerifyError),
}
