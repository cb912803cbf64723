use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::geometry::{join, minkowski_sum, GeometryError, Polytope};
use crate::rational::Rational;

/// A polytope built from points by Minkowski sums and joins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolytopeExpr {
    Point(Vec<Rational>),
    Sum(Vec<PolytopeExpr>),
    Join(Vec<PolytopeExpr>),
}

impl PolytopeExpr {
    pub fn point(p: Vec<Rational>) -> Self {
        PolytopeExpr::Point(p)
    }

    pub fn sum(a: PolytopeExpr, b: PolytopeExpr) -> Self {
        PolytopeExpr::Sum(vec![a, b])
    }

    pub fn join(a: PolytopeExpr, b: PolytopeExpr) -> Self {
        PolytopeExpr::Join(vec![a, b])
    }

    /// Operands of a join after flattening nested joins.
    fn join_operands(&self) -> Vec<&PolytopeExpr> {
        match self {
            PolytopeExpr::Join(args) => args.iter().flat_map(|a| a.join_operands()).collect(),
            other => vec![other],
        }
    }

    /// Smallest `k` for which this expression certifies membership in `𝒫_k`.
    ///
    /// Points have depth 0 and sums keep the largest depth of their
    /// summands. A join of several operands is regrouped into binary joins
    /// by always joining the two shallowest operands first, which minimizes
    /// the depth of the result, since `depth(P * Q) = max + 1`.
    pub fn depth(&self) -> usize {
        match self {
            PolytopeExpr::Point(_) => 0,
            PolytopeExpr::Sum(args) => args.iter().map(PolytopeExpr::depth).max().unwrap_or(0),
            PolytopeExpr::Join(_) => {
                let mut heap: BinaryHeap<Reverse<usize>> =
                    self.join_operands().into_iter().map(|a| Reverse(a.depth())).collect();
                while heap.len() > 1 {
                    let Reverse(_) = heap.pop().expect("two operands");
                    let Reverse(b) = heap.pop().expect("two operands");
                    heap.push(Reverse(b + 1));
                }
                heap.pop().map_or(0, |Reverse(d)| d)
            }
        }
    }

    pub fn eval(&self) -> Result<Polytope, GeometryError> {
        match self {
            PolytopeExpr::Point(p) => {
                if p.is_empty() {
                    return Err(GeometryError::Malformed("point with no coordinates".into()));
                }
                Ok(Polytope::point(p.clone()))
            }
            PolytopeExpr::Sum(args) | PolytopeExpr::Join(args) => {
                let mut it = args.iter();
                let first = it
                    .next()
                    .ok_or_else(|| GeometryError::Malformed("operator without operands".into()))?;
                let mut acc = first.eval()?;
                for a in it {
                    let v = a.eval()?;
                    acc = match self {
                        PolytopeExpr::Sum(_) => minkowski_sum(&acc, &v)?,
                        _ => join(&acc, &v)?,
                    };
                }
                Ok(acc)
            }
        }
    }
}

/// Value and certificate depth of `e`.
pub fn eval_expr(e: &PolytopeExpr) -> Result<(Polytope, usize), GeometryError> {
    Ok((e.eval()?, e.depth()))
}

impl fmt::Display for PolytopeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, args: &[PolytopeExpr], op: &str| -> fmt::Result {
            write!(f, "(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")
        };
        match self {
            PolytopeExpr::Point(p) => {
                let coords: Vec<String> = p.iter().map(ToString::to_string).collect();
                write!(f, "[{}]", coords.join(","))
            }
            PolytopeExpr::Sum(args) => list(f, args, "+"),
            PolytopeExpr::Join(args) => list(f, args, "*"),
        }
    }
}
