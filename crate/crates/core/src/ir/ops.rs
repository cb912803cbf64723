//! Network algebra. Every combinator returns a new network and preserves
//! semantics exactly; boundary affine maps are fused so affine glue never adds
//! a hidden layer.

use crate::ir::{AffineMap, IrError, ReluNetwork};
use crate::rational::Rational;

/// `x ↦ outer(inner(x))` with `hidden(outer) + hidden(inner)` hidden layers.
pub fn compose(outer: &ReluNetwork, inner: &ReluNetwork) -> Result<ReluNetwork, IrError> {
    if outer.input_dim() != inner.output_dim() {
        return Err(IrError::DimensionMismatch {
            context: "compose",
            expected: outer.input_dim(),
            found: inner.output_dim(),
        });
    }
    let (inner_last, inner_hidden) = inner.layers().split_last().expect("non-empty");
    let (outer_first, outer_rest) = outer.layers().split_first().expect("non-empty");
    let mut layers: Vec<AffineMap> = inner_hidden.to_vec();
    layers.push(inner_last.then(outer_first)?);
    layers.extend(outer_rest.iter().cloned());
    ReluNetwork::new(inner.input_dim(), layers)
}

fn check_equal_depth(nets: &[ReluNetwork]) -> Result<usize, IrError> {
    let depth = nets.first().ok_or(IrError::Empty)?.hidden_layers();
    if let Some(bad) = nets.iter().find(|n| n.hidden_layers() != depth) {
        return Err(IrError::DepthMismatch {
            expected: depth,
            found: bad.hidden_layers(),
        });
    }
    Ok(depth)
}

/// Side-by-side juxtaposition: inputs and outputs are concatenated.
pub fn concat(nets: &[ReluNetwork]) -> Result<ReluNetwork, IrError> {
    let depth = check_equal_depth(nets)?;
    let input_dim = nets.iter().map(ReluNetwork::input_dim).sum();
    let layers = (0..=depth)
        .map(|i| {
            let maps: Vec<&AffineMap> = nets.iter().map(|n| &n.layers()[i]).collect();
            AffineMap::block_diag(&maps)
        })
        .collect();
    ReluNetwork::new(input_dim, layers)
}

/// All networks read the same input; outputs are concatenated.
pub fn parallel(nets: &[ReluNetwork]) -> Result<ReluNetwork, IrError> {
    let depth = check_equal_depth(nets)?;
    let input_dim = nets[0].input_dim();
    if let Some(bad) = nets.iter().find(|n| n.input_dim() != input_dim) {
        return Err(IrError::DimensionMismatch {
            context: "parallel input",
            expected: input_dim,
            found: bad.input_dim(),
        });
    }
    let mut first = nets[0].layers()[0].clone();
    for n in &nets[1..] {
        first = first.stack(&n.layers()[0])?;
    }
    let mut layers = vec![first];
    for i in 1..=depth {
        let maps: Vec<&AffineMap> = nets.iter().map(|n| &n.layers()[i]).collect();
        layers.push(AffineMap::block_diag(&maps));
    }
    ReluNetwork::new(input_dim, layers)
}

/// `x ↦ Σ coefs[i]·nets[i](x)` for scalar-output networks sharing one input.
/// Shallower networks are padded to the deepest one.
pub fn linear_combination(nets: &[ReluNetwork], coefs: &[Rational]) -> Result<ReluNetwork, IrError> {
    if nets.is_empty() {
        return Err(IrError::Empty);
    }
    if nets.len() != coefs.len() {
        return Err(IrError::DimensionMismatch {
            context: "linear combination coefficients",
            expected: nets.len(),
            found: coefs.len(),
        });
    }
    if let Some(bad) = nets.iter().find(|n| n.output_dim() != 1) {
        return Err(IrError::DimensionMismatch {
            context: "linear combination output",
            expected: 1,
            found: bad.output_dim(),
        });
    }
    let depth = nets.iter().map(ReluNetwork::hidden_layers).max().expect("non-empty");
    let padded = nets
        .iter()
        .map(|n| pad_depth(n, depth))
        .collect::<Result<Vec<_>, _>>()?;
    let stacked = parallel(&padded)?;
    let row = coefs.iter().cloned().enumerate().collect();
    let sum = AffineMap::from_sparse(nets.len(), vec![row], vec![Rational::zero()])?;
    stacked.then_affine(&sum)
}

/// `a(x) − b(x)` for networks with equal input and output dimensions.
pub fn difference(a: &ReluNetwork, b: &ReluNetwork) -> Result<ReluNetwork, IrError> {
    if a.output_dim() != b.output_dim() {
        return Err(IrError::DimensionMismatch {
            context: "difference output",
            expected: a.output_dim(),
            found: b.output_dim(),
        });
    }
    let depth = a.hidden_layers().max(b.hidden_layers());
    let stacked = parallel(&[pad_depth(a, depth)?, pad_depth(b, depth)?])?;
    let m = a.output_dim();
    let rows = (0..m)
        .map(|i| vec![(i, Rational::one()), (m + i, -Rational::one())])
        .collect();
    let diff = AffineMap::from_sparse(2 * m, rows, vec![Rational::zero(); m])?;
    stacked.then_affine(&diff)
}

/// Adds hidden layers that carry the output through `t = relu(t) − relu(−t)`.
pub fn pad_depth(net: &ReluNetwork, target_hidden: usize) -> Result<ReluNetwork, IrError> {
    let current = net.hidden_layers();
    if target_hidden < current {
        return Err(IrError::DepthBelowCurrent {
            current,
            target: target_hidden,
        });
    }
    let mut layers = net.layers().to_vec();
    for _ in current..target_hidden {
        let last = layers.pop().expect("non-empty");
        let m = last.rows();
        layers.push(last.stack(&last.scaled(&-Rational::one()))?);
        let rows = (0..m)
            .map(|i| vec![(i, Rational::one()), (m + i, -Rational::one())])
            .collect();
        layers.push(AffineMap::from_sparse(2 * m, rows, vec![Rational::zero(); m])?);
    }
    ReluNetwork::new(net.input_dim(), layers)
}
