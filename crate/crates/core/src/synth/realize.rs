use std::collections::HashMap;

use crate::ir::{compose, linear_combination, pad_depth, AffineMap, ReluNetwork, SparseRow};
use crate::rational::Rational;
use crate::synth::{
    build_five_ary_max, build_max2, build_tree_max, expand_full, expansion_size, Form, SynthError, TabTerm,
    TermCombo,
};

/// Default ceiling on the number of terms the ternary expansion may produce.
pub const DEFAULT_TERM_LIMIT: u64 = 1_000_000;
/// Environment variable overriding [`DEFAULT_TERM_LIMIT`].
pub const TERM_LIMIT_ENV: &str = "RELU_FORGE_TERM_LIMIT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub term_limit: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            term_limit: DEFAULT_TERM_LIMIT,
        }
    }
}

impl SynthConfig {
    /// Reads the term limit from the environment; unparsable values are
    /// ignored.
    pub fn from_env() -> Self {
        let term_limit = std::env::var(TERM_LIMIT_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_TERM_LIMIT);
        SynthConfig { term_limit }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Tree,
    Five,
    Ternary,
}

impl std::str::FromStr for Method {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tree" => Ok(Method::Tree),
            "five" => Ok(Method::Five),
            "ternary" => Ok(Method::Ternary),
            other => Err(SynthError::UnknownMethod(other.to_string())),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Tree => "tree",
            Method::Five => "five",
            Method::Ternary => "ternary",
        })
    }
}

/// Smallest `k` with `3^k ≥ m` (m ≥ 1).
pub fn ceil_log(base: usize, m: usize) -> usize {
    let mut k = 0;
    let mut p = 1usize;
    while p < m {
        p = p.saturating_mul(base);
        k += 1;
    }
    k
}

/// Hidden layers of the network [`build_ternary_max`] produces for MAX_n.
pub fn ternary_depth(n: usize) -> usize {
    match n {
        0 | 1 => 0,
        2 => 1,
        3 | 4 => 2,
        _ => ceil_log(3, n - 2) + 1,
    }
}

/// Hidden layers for each constructor.
pub fn expected_depth(method: Method, n: usize) -> usize {
    match method {
        Method::Tree => ceil_log(2, n),
        Method::Five => 2 * ceil_log(5, n),
        Method::Ternary => ternary_depth(n),
    }
}

/// Number of expanded terms the ternary construction of MAX_n needs, before
/// deduplication. `Some(0)` for sizes built without expansion.
pub fn ternary_term_count(n: usize) -> Option<u64> {
    if n < 5 {
        return Some(0);
    }
    let k = ceil_log(3, n - 2) as u32;
    expansion_size(3usize.checked_pow(k)? + 2, 2)
}

/// Fixed order for a pair, so that `max(p, r)` and `max(r, p)` produce the
/// same neuron.
fn ordered(p: &Form, r: &Form) -> [Form; 2] {
    if p <= r {
        [p.clone(), r.clone()]
    } else {
        [r.clone(), p.clone()]
    }
}

/// The values feeding the inner maximum: one per block and one per pair of
/// extras (an odd last extra stands alone).
fn first_layer_values(term: &TabTerm) -> Vec<Vec<[Form; 2]>> {
    let forms = term.forms();
    let mut values = Vec::new();
    for j in 0..term.blocks {
        let b = &forms[4 * j..4 * j + 4];
        values.push(vec![ordered(&b[0], &b[1]), ordered(&b[2], &b[3])]);
    }
    let extras = &forms[4 * term.blocks..];
    for pair in extras.chunks(2) {
        let second = pair.get(1).unwrap_or(&pair[0]).clone();
        values.push(vec![ordered(&pair[0], &second)]);
    }
    values
}

/// One hidden layer computing the block sums and paired extras of `term`.
///
/// `max(p, r) = relu(r − p) + p`; the affine remainder of every value is
/// carried as `relu(z) − relu(−z)`.
fn first_stage(term: &TabTerm) -> Result<ReluNetwork, SynthError> {
    let n = term.ambient_dim();
    let mut hidden: Vec<SparseRow> = Vec::new();
    let mut hidden_bias: Vec<Rational> = Vec::new();
    let mut out_rows: Vec<SparseRow> = Vec::new();
    let mut out_bias: Vec<Rational> = Vec::new();
    for maxes in first_layer_values(term) {
        let mut out: SparseRow = Vec::new();
        let mut affine = Form::zero();
        for [p, r] in maxes {
            let diff = r.sub(&p);
            if diff.is_constant() {
                affine = affine.add(&p).add(&Form {
                    row: Vec::new(),
                    bias: diff.bias.relu(),
                });
            } else {
                out.push((hidden.len(), Rational::one()));
                hidden.push(diff.row);
                hidden_bias.push(diff.bias);
                affine = affine.add(&p);
            }
        }
        if affine.is_constant() {
            out_bias.push(affine.bias);
        } else {
            out.push((hidden.len(), Rational::one()));
            out.push((hidden.len() + 1, -Rational::one()));
            let neg = affine.scale(&-Rational::one());
            hidden.push(affine.row);
            hidden_bias.push(affine.bias);
            hidden.push(neg.row);
            hidden_bias.push(neg.bias);
            out_bias.push(Rational::zero());
        }
        out_rows.push(out);
    }
    let h = hidden.len();
    let first = AffineMap::from_sparse(n, hidden, hidden_bias)?;
    let second = AffineMap::from_sparse(h, out_rows, out_bias)?;
    Ok(ReluNetwork::new(n, vec![first, second])?)
}

/// Number of inputs of the inner maximum used by [`realize_term`].
pub fn inner_arity(term: &TabTerm) -> usize {
    term.blocks + term.extras.div_ceil(2)
}

/// Realizes `coef·T_{a,b}∘L` with a given max network for the inner stage.
pub fn realize_term_with(term: &TabTerm, inner_max: &ReluNetwork) -> Result<ReluNetwork, SynthError> {
    let m = inner_arity(term);
    if inner_max.input_dim() != m {
        return Err(SynthError::Arity {
            expected: m,
            found: inner_max.input_dim(),
        });
    }
    let net = compose(inner_max, &first_stage(term)?)?;
    Ok(net.scaled(&term.coef))
}

/// Realizes `coef·T_{a,b}∘L` with `1 + inner_budget_layers` hidden layers.
///
/// The first hidden layer computes the pair maxima of every block and of
/// consecutive pairs of extras; the remaining layers take the maximum of the
/// `a + ⌈b/2⌉` resulting values.
pub fn realize_term(term: &TabTerm, inner_budget_layers: usize) -> Result<ReluNetwork, SynthError> {
    let inner = inner_max_network(inner_arity(term), inner_budget_layers)?;
    realize_term_with(term, &inner)
}

fn inner_max_network(m: usize, budget: usize) -> Result<ReluNetwork, SynthError> {
    let needed = ternary_depth(m);
    if needed > budget {
        return Err(SynthError::BudgetInsufficient {
            arity: m,
            needed,
            budget,
        });
    }
    let inner = build_ternary_max_with(m, &SynthConfig::default())?;
    Ok(pad_depth(&inner, budget)?)
}

/// Realizes every term with `1 + inner_budget_layers` hidden layers and sums
/// them; the sum is fused into the output layer.
pub fn realize_combo(combo: &TermCombo, inner_budget_layers: usize) -> Result<ReluNetwork, SynthError> {
    if combo.is_empty() {
        return Err(SynthError::EmptyCombo);
    }
    let mut inner_cache: HashMap<usize, ReluNetwork> = HashMap::new();
    let mut nets = Vec::with_capacity(combo.len());
    for t in &combo.terms {
        let m = inner_arity(t);
        if !inner_cache.contains_key(&m) {
            inner_cache.insert(m, inner_max_network(m, inner_budget_layers)?);
        }
        nets.push(realize_term_with(t, &inner_cache[&m])?);
    }
    let ones = vec![Rational::one(); nets.len()];
    Ok(linear_combination(&nets, &ones)?)
}

/// MAX_n with `⌈log₃(n−2)⌉ + 1` hidden layers (n ≥ 5).
///
/// MAX_n is padded to `N = 3^k + 2` arguments by repeating `x₁`, written as
/// `T_{0,N}`, expanded into terms of shape `(3^{k−1}, 2)` and each term is
/// realized on top of a recursively built MAX_{3^{k−1}+1}.
pub fn build_ternary_max(n: usize) -> Result<ReluNetwork, SynthError> {
    build_ternary_max_with(n, &SynthConfig::from_env())
}

pub fn build_ternary_max_with(n: usize, config: &SynthConfig) -> Result<ReluNetwork, SynthError> {
    match n {
        0 => return Err(SynthError::EmptyMax),
        1 => return Ok(ReluNetwork::identity(1)),
        2 => return Ok(build_max2()),
        3 | 4 => return build_tree_max(n),
        _ => {}
    }
    let terms = ternary_term_count(n);
    if terms.is_none_or(|t| t > config.term_limit) {
        return Err(SynthError::TermLimit {
            n,
            terms,
            limit: config.term_limit,
        });
    }
    let combo = ternary_expansion(n)?;
    let k = ceil_log(3, n - 2);
    realize_combo(&combo, k)
}

/// The deduplicated `(3^{k−1}, 2)`-shaped term combination equal to MAX_n.
pub fn ternary_expansion(n: usize) -> Result<TermCombo, SynthError> {
    if n < 5 {
        return Err(SynthError::Arity { expected: 5, found: n });
    }
    let k = ceil_log(3, n - 2) as u32;
    let padded = 3usize.pow(k) + 2;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.resize(padded, 0);
    let start = TabTerm::new(Rational::one(), 0, padded, AffineMap::selection(n, &idx)?)?;
    Ok(expand_full(&TermCombo::single(start), 2)?.dedup())
}

/// Dispatches to the requested constructor.
pub fn build_max(n: usize, method: Method, config: &SynthConfig) -> Result<ReluNetwork, SynthError> {
    match method {
        Method::Tree => build_tree_max(n),
        Method::Five => build_five_ary_max(n),
        Method::Ternary => build_ternary_max_with(n, config),
    }
}
