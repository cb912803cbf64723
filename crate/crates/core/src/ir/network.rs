use crate::ir::{AffineMap, IrError};
use crate::rational::Rational;

/// A feed-forward ReLU network: affine layers with a ReLU after every layer
/// except the last.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<AffineMap>,
}

impl ReluNetwork {
    pub fn new(input_dim: usize, layers: Vec<AffineMap>) -> Result<Self, IrError> {
        if input_dim == 0 {
            return Err(IrError::ZeroInputDim);
        }
        if layers.is_empty() {
            return Err(IrError::NoLayers);
        }
        let mut width = input_dim;
        for l in &layers {
            if l.cols() != width {
                return Err(IrError::DimensionMismatch {
                    context: "layer chaining",
                    expected: width,
                    found: l.cols(),
                });
            }
            width = l.rows();
        }
        Ok(ReluNetwork { input_dim, layers })
    }

    /// Network with no hidden layer computing `map`.
    pub fn affine(map: AffineMap) -> Result<Self, IrError> {
        Self::new(map.cols(), vec![map])
    }

    pub fn identity(n: usize) -> Self {
        ReluNetwork {
            input_dim: n,
            layers: vec![AffineMap::identity(n)],
        }
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, AffineMap::rows)
    }

    pub fn layers(&self) -> &[AffineMap] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<AffineMap> {
        self.layers
    }

    pub fn hidden_layers(&self) -> usize {
        self.layers.len() - 1
    }

    /// Widths of the hidden layers.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1].iter().map(AffineMap::rows).collect()
    }

    pub fn neurons(&self) -> usize {
        self.hidden_widths().iter().sum()
    }

    pub fn output_layer(&self) -> &AffineMap {
        self.layers.last().expect("non-empty")
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>, IrError> {
        if x.len() != self.input_dim {
            return Err(IrError::DimensionMismatch {
                context: "network input",
                expected: self.input_dim,
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[Rational]) -> Vec<Rational> {
        let (last, hidden) = self.layers.split_last().expect("non-empty");
        let mut cur: Vec<Rational> = x.to_vec();
        for l in hidden {
            cur = l.apply_unchecked(&cur).into_iter().map(|v| v.relu()).collect();
        }
        last.apply_unchecked(&cur)
    }

    /// Evaluates a single-output network.
    pub fn eval_scalar(&self, x: &[Rational]) -> Result<Rational, IrError> {
        if self.output_dim() != 1 {
            return Err(IrError::DimensionMismatch {
                context: "scalar output",
                expected: 1,
                found: self.output_dim(),
            });
        }
        Ok(self.eval(x)?.pop().expect("one output"))
    }

    /// Pre-activation values of every hidden layer at `x`.
    pub fn pre_activations(&self, x: &[Rational]) -> Result<Vec<Vec<Rational>>, IrError> {
        if x.len() != self.input_dim {
            return Err(IrError::DimensionMismatch {
                context: "network input",
                expected: self.input_dim,
                found: x.len(),
            });
        }
        let mut out = Vec::with_capacity(self.hidden_layers());
        let mut cur: Vec<Rational> = x.to_vec();
        for l in &self.layers[..self.layers.len() - 1] {
            let pre = l.apply_unchecked(&cur);
            cur = pre.iter().map(Rational::relu).collect();
            out.push(pre);
        }
        Ok(out)
    }

    /// Replaces the output layer by `map ∘ output`, fusing the affine maps.
    pub fn then_affine(&self, map: &AffineMap) -> Result<Self, IrError> {
        let mut layers = self.layers.clone();
        let last = layers.pop().expect("non-empty");
        layers.push(last.then(map)?);
        Ok(ReluNetwork {
            input_dim: self.input_dim,
            layers,
        })
    }

    /// Pre-composes with an affine map on the input, fusing into the first layer.
    pub fn after_affine(&self, map: &AffineMap) -> Result<Self, IrError> {
        let mut layers = self.layers.clone();
        layers[0] = map.then(&layers[0])?;
        Self::new(map.cols(), layers)
    }

    /// Multiplies the output by `lambda`.
    pub fn scaled(&self, lambda: &Rational) -> Self {
        let mut layers = self.layers.clone();
        let last = layers.pop().expect("non-empty");
        layers.push(last.scaled(lambda));
        ReluNetwork {
            input_dim: self.input_dim,
            layers,
        }
    }

    /// Returns a copy with one weight replaced; used for fault-injection tests.
    pub fn with_weight(&self, layer: usize, row: usize, col: usize, value: Rational) -> Result<Self, IrError> {
        let l = self.layers.get(layer).ok_or(IrError::NoLayers)?;
        if row >= l.rows() || col >= l.cols() {
            return Err(IrError::DimensionMismatch {
                context: "weight index",
                expected: l.rows(),
                found: row,
            });
        }
        let (cols, mut rows, bias) = l.clone().into_parts();
        rows[row].retain(|(c, _)| *c != col);
        rows[row].push((col, value));
        let mut layers = self.layers.clone();
        layers[layer] = AffineMap::from_sparse(cols, rows, bias)?;
        Ok(ReluNetwork {
            input_dim: self.input_dim,
            layers,
        })
    }
}
