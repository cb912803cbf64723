use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::ir::ReluNetwork;
use crate::rational::is_power_of_two;

/// Size and weight statistics of a network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkStats {
    pub hidden_layers: usize,
    /// Total hidden ReLU units.
    pub neurons: usize,
    /// Widest hidden layer (0 for a purely affine network).
    pub max_width: usize,
    /// Denominator → number of stored weights and biases carrying it.
    pub weight_denominators: BTreeMap<BigInt, usize>,
    pub is_dyadic: bool,
}

pub fn stats(net: &ReluNetwork) -> NetworkStats {
    let widths = net.hidden_widths();
    let mut weight_denominators = BTreeMap::new();
    for layer in net.layers() {
        for c in layer.coefficients() {
            *weight_denominators.entry(c.denom()).or_insert(0) += 1;
        }
    }
    let is_dyadic = weight_denominators.keys().all(|d| is_power_of_two(d));
    NetworkStats {
        hidden_layers: net.hidden_layers(),
        neurons: widths.iter().sum(),
        max_width: widths.iter().copied().max().unwrap_or(0),
        weight_denominators,
        is_dyadic,
    }
}

impl std::fmt::Display for NetworkStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hidden_layers={} neurons={} dyadic={}",
            self.hidden_layers, self.neurons, self.is_dyadic
        )
    }
}
