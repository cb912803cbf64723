//! Semantics-preserving rewrites of [`ReluNetwork`]s.
//!
//! Every pass keeps the number of hidden layers and never widens a layer.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ir::{axpy_row, scale_row, AffineMap, ReluNetwork, SparseRow};
use crate::rational::Rational;

/// Canonical identity of a hidden neuron: its layer and its incoming row and
/// bias scaled to a primitive integer vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NeuronKey {
    pub layer_index: usize,
    pub row: SparseRow,
    pub bias: Rational,
}

/// Mutable working copy of a network.
struct Layers {
    input_dim: usize,
    /// `(cols, rows, bias)` per affine layer.
    maps: Vec<(usize, Vec<SparseRow>, Vec<Rational>)>,
}

impl Layers {
    fn from_net(net: &ReluNetwork) -> Self {
        Layers {
            input_dim: net.input_dim(),
            maps: net.layers().iter().cloned().map(AffineMap::into_parts).collect(),
        }
    }

    fn into_net(self) -> ReluNetwork {
        let layers = self
            .maps
            .into_iter()
            .map(|(c, r, b)| AffineMap::from_sparse(c, r, b).expect("pass keeps maps consistent"))
            .collect();
        ReluNetwork::new(self.input_dim, layers).expect("pass keeps the chain consistent")
    }

    fn hidden(&self) -> usize {
        self.maps.len() - 1
    }

    fn width(&self, l: usize) -> usize {
        self.maps[l].1.len()
    }

    fn neurons(&self) -> usize {
        (0..self.hidden()).map(|l| self.width(l)).sum()
    }

    /// Outgoing weights of every neuron of hidden layer `l`, as sparse
    /// columns of layer `l + 1`.
    fn columns(&self, l: usize) -> Vec<SparseRow> {
        let (_, rows, _) = &self.maps[l + 1];
        let mut cols: Vec<SparseRow> = vec![Vec::new(); self.width(l)];
        for (r, row) in rows.iter().enumerate() {
            for (c, w) in row {
                cols[*c].push((r, w.clone()));
            }
        }
        cols
    }

    /// Replaces hidden layer `l` by `neurons` (incoming row, bias, outgoing
    /// column); `extra_bias` is added to the next layer's bias.
    fn replace_layer(&mut self, l: usize, neurons: Vec<(SparseRow, Rational, SparseRow)>, extra_bias: &[Rational]) {
        let next_rows = self.maps[l + 1].1.len();
        let mut out_rows: Vec<SparseRow> = vec![Vec::new(); next_rows];
        let mut rows = Vec::with_capacity(neurons.len());
        let mut bias = Vec::with_capacity(neurons.len());
        for (j, (row, b, col)) in neurons.into_iter().enumerate() {
            for (r, w) in col {
                out_rows[r].push((j, w));
            }
            rows.push(row);
            bias.push(b);
        }
        let width = rows.len();
        self.maps[l].1 = rows;
        self.maps[l].2 = bias;
        let next = &mut self.maps[l + 1];
        next.0 = width;
        next.1 = out_rows;
        for (b, e) in next.2.iter_mut().zip(extra_bias) {
            *b += e;
        }
    }

    /// Current neurons of hidden layer `l` with their outgoing columns.
    fn take_layer(&self, l: usize) -> Vec<(SparseRow, Rational, SparseRow)> {
        let cols = self.columns(l);
        let (_, rows, bias) = &self.maps[l];
        rows.iter()
            .cloned()
            .zip(bias.iter().cloned())
            .zip(cols)
            .map(|((r, b), c)| (r, b, c))
            .collect()
    }
}

fn lcm_den(values: impl Iterator<Item = BigInt>) -> BigInt {
    values.fold(BigInt::one(), |acc, d| acc.lcm(&d))
}

fn gcd_num(values: impl Iterator<Item = BigInt>) -> BigInt {
    values.fold(BigInt::zero(), |acc, n| acc.gcd(&n))
}

/// Writes `(row, bias) = α·(row', bias')` with `α > 0` and `(row', bias')` a
/// primitive integer vector. Returns `None` for the zero vector.
pub fn primitive(row: &[(usize, Rational)], bias: &Rational) -> Option<(SparseRow, Rational, Rational)> {
    let entries = || row.iter().map(|(_, v)| v).chain(std::iter::once(bias)).filter(|v| !v.is_zero());
    entries().next()?;
    let l = lcm_den(entries().map(Rational::denom));
    let g = gcd_num(entries().map(|v| (v.numer() * (&l / v.denom())).abs()));
    let alpha = Rational::from_bigints(g, l);
    let inv = alpha.recip();
    Some((scale_row(row, &inv), bias * &inv, alpha))
}

/// The key under which [`cse`] merges a neuron.
pub fn neuron_key(layer_index: usize, row: &[(usize, Rational)], bias: &Rational) -> Option<NeuronKey> {
    primitive(row, bias).map(|(row, bias, _)| NeuronKey {
        layer_index,
        row,
        bias,
    })
}

/// Common-subexpression elimination.
///
/// Working front to back, neurons whose incoming row and bias agree up to a
/// positive factor are merged into one neuron with primitive integer weights
/// and the scaled outgoing weights summed. Neurons with a zero incoming row
/// are constants and are folded into the next layer's bias.
pub fn cse(net: &ReluNetwork) -> ReluNetwork {
    let mut layers = Layers::from_net(net);
    for l in 0..layers.hidden() {
        cse_layer(&mut layers, l);
    }
    layers.into_net()
}

fn cse_layer(layers: &mut Layers, l: usize) {
    let next_rows = layers.maps[l + 1].1.len();
    let mut extra = vec![Rational::zero(); next_rows];
    let mut out: Vec<(SparseRow, Rational, SparseRow)> = Vec::new();
    let mut seen: HashMap<NeuronKey, usize> = HashMap::new();
    for (row, bias, col) in layers.take_layer(l) {
        if row.is_empty() {
            let c = bias.relu();
            if !c.is_zero() {
                for (r, w) in &col {
                    extra[*r] += w * &c;
                }
            }
            continue;
        }
        let (prow, pbias, alpha) = primitive(&row, &bias).expect("non-zero row");
        let key = NeuronKey {
            layer_index: l,
            row: prow,
            bias: pbias,
        };
        match seen.get(&key) {
            Some(&i) => out[i].2 = axpy_row(&out[i].2, &alpha, &col),
            None => {
                seen.insert(key.clone(), out.len());
                out.push((key.row, key.bias, scale_row(&col, &alpha)));
            }
        }
    }
    layers.replace_layer(l, out, &extra);
}

/// Removes hidden neurons that cannot influence the output, iterated to a
/// fixpoint: neurons with no outgoing weight, and neurons fed only by
/// earlier ReLU outputs through non-positive weights and bias (which are
/// identically zero).
pub fn prune(net: &ReluNetwork) -> ReluNetwork {
    let mut layers = Layers::from_net(net);
    loop {
        let before = layers.neurons();
        for l in (0..layers.hidden()).rev() {
            let neurons: Vec<_> = layers
                .take_layer(l)
                .into_iter()
                .filter(|(row, bias, col)| {
                    let dead = l > 0 && !bias.is_positive() && row.iter().all(|(_, w)| w.is_negative());
                    !col.is_empty() && !dead
                })
                .collect();
            let zeros = vec![Rational::zero(); layers.maps[l + 1].1.len()];
            layers.replace_layer(l, neurons, &zeros);
        }
        if layers.neurons() == before {
            break;
        }
    }
    layers.into_net()
}

/// Incremental row echelon form over sparse vectors, remembering how every
/// stored vector is combined from the accepted basis vectors.
struct Echelon {
    /// pivot column → (reduced vector, combination of basis indices)
    rows: HashMap<usize, (SparseRow, SparseRow)>,
    basis: usize,
}

impl Echelon {
    fn new() -> Self {
        Echelon {
            rows: HashMap::new(),
            basis: 0,
        }
    }

    /// Reduces `v`. Returns `Ok(coords)` when `v` lies in the span of the
    /// basis (coords over basis indices), otherwise records `v` as a new basis
    /// vector and returns its index.
    fn insert(&mut self, mut v: SparseRow) -> Result<SparseRow, usize> {
        let mut combo: SparseRow = Vec::new();
        while let Some((piv, lead)) = v.first().cloned() {
            match self.rows.get(&piv) {
                Some((r, c)) => {
                    let f = &lead / &r[0].1;
                    v = axpy_row(&v, &-&f, r);
                    combo = axpy_row(&combo, &f, c);
                }
                None => {
                    let idx = self.basis;
                    self.basis += 1;
                    let own = axpy_row(&vec![(idx, Rational::one())], &-Rational::one(), &combo);
                    self.rows.insert(piv, (v, own));
                    return Err(idx);
                }
            }
        }
        Ok(combo)
    }
}

/// Augmented vector `(row, bias)` with the bias stored in column `cols`.
fn augment(row: &[(usize, Rational)], bias: &Rational, cols: usize) -> SparseRow {
    let mut v = row.to_vec();
    if !bias.is_zero() {
        v.push((cols, bias.clone()));
    }
    v
}

fn split_aug(v: &[(usize, Rational)], cols: usize) -> (SparseRow, Rational) {
    match v.last() {
        Some((c, b)) if *c == cols => (v[..v.len() - 1].to_vec(), b.clone()),
        _ => (v.to_vec(), Rational::zero()),
    }
}

fn layer_is_dyadic(neurons: &[(SparseRow, Rational, SparseRow)]) -> bool {
    neurons.iter().all(|(r, b, c)| {
        b.is_dyadic() && r.iter().all(|(_, w)| w.is_dyadic()) && c.iter().all(|(_, w)| w.is_dyadic())
    })
}

/// Consolidates linear pass-throughs.
///
/// A pair `relu(z)`, `relu(−z)` with outgoing columns `c`, `c'` contributes
/// `−c'·z` linearly plus `(c + c')·relu(z)`. All such linear contributions
/// of a layer are collected and re-expressed through one `relu(±b)` pair per
/// vector `b` of a basis of the carried forms. The rewrite is kept only when
/// it shrinks the layer and does not introduce non-dyadic weights into a
/// dyadic layer.
pub fn fuse_carries(net: &ReluNetwork) -> ReluNetwork {
    let mut layers = Layers::from_net(net);
    for l in 0..layers.hidden() {
        fuse_layer(&mut layers, l);
    }
    layers.into_net()
}

fn fuse_layer(layers: &mut Layers, l: usize) {
    let cols = layers.maps[l].0;
    let original = layers.take_layer(l);
    let mut neurons = original.clone();
    let index: HashMap<SparseRow, usize> = neurons
        .iter()
        .enumerate()
        .map(|(j, (r, b, _))| (augment(r, b, cols), j))
        .collect();

    // (carried augmented form, linear column)
    let mut carried: Vec<(SparseRow, SparseRow)> = Vec::new();
    let mut used = vec![false; neurons.len()];
    for j in 0..neurons.len() {
        if used[j] {
            continue;
        }
        let aug = augment(&neurons[j].0, &neurons[j].1, cols);
        let neg = scale_row(&aug, &-Rational::one());
        let Some(&k) = index.get(&neg) else { continue };
        if used[k] || k == j {
            continue;
        }
        used[j] = true;
        used[k] = true;
        let s = scale_row(&neurons[k].2, &-Rational::one());
        neurons[j].2 = axpy_row(&neurons[j].2, &Rational::one(), &neurons[k].2);
        neurons[k].2 = Vec::new();
        carried.push((aug, s));
    }
    if carried.len() < 2 {
        return;
    }

    // Two ways to carry Σ s_p·z_p: through a basis of the carried forms, or
    // through a basis of the combined forms feeding each next-layer row.
    let next_rows = layers.maps[l + 1].1.len();
    let mut per_row: Vec<SparseRow> = vec![Vec::new(); next_rows];
    for (aug, s) in &carried {
        for (o, w) in s {
            per_row[*o] = axpy_row(&per_row[*o], w, aug);
        }
    }
    let by_row: Vec<(SparseRow, SparseRow)> = per_row
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_empty())
        .map(|(o, v)| (v, vec![(o, Rational::one())]))
        .collect();
    let kept: Vec<(SparseRow, Rational, SparseRow)> =
        neurons.into_iter().filter(|(_, _, c)| !c.is_empty()).collect();
    let options = [carry_through(&carried), carry_through(&by_row)];

    let zeros = vec![Rational::zero(); next_rows];
    let dyadic_before = layer_is_dyadic(&original);
    let mut best = original;
    for pairs in options {
        let mut candidate = kept.clone();
        for (aug, col) in pairs {
            let (row, bias) = split_aug(&aug, cols);
            let neg_col = scale_row(&col, &-Rational::one());
            candidate.push((scale_row(&row, &-Rational::one()), -&bias, neg_col));
            candidate.push((row, bias, col));
        }
        layers.replace_layer(l, candidate, &zeros);
        cse_layer(layers, l);
        let after = layers.take_layer(l);
        if after.len() < best.len() && (!dyadic_before || layer_is_dyadic(&after)) {
            best = after;
        }
    }
    layers.replace_layer(l, best, &zeros);
}

/// Given forms `v_i` with outgoing columns `c_i`, returns pairs `(b, w_b)`
/// with `Σ_i c_i·v_i = Σ_b w_b·b` and the `b` linearly independent, chosen
/// greedily from the sparsest `v_i`.
fn carry_through(forms: &[(SparseRow, SparseRow)]) -> Vec<(SparseRow, SparseRow)> {
    let mut order: Vec<usize> = (0..forms.len()).collect();
    order.sort_by_key(|&p| {
        let v = &forms[p].0;
        let height = v.iter().map(|(_, w)| w.abs()).max().unwrap_or_else(Rational::zero);
        (v.len(), height, p)
    });
    let mut ech = Echelon::new();
    let mut basis_vecs: Vec<SparseRow> = Vec::new();
    let mut coords: Vec<SparseRow> = vec![Vec::new(); forms.len()];
    for &p in &order {
        coords[p] = match ech.insert(forms[p].0.clone()) {
            Ok(c) => c,
            Err(idx) => {
                debug_assert_eq!(idx, basis_vecs.len());
                basis_vecs.push(forms[p].0.clone());
                vec![(idx, Rational::one())]
            }
        };
    }
    let mut w: Vec<SparseRow> = vec![Vec::new(); basis_vecs.len()];
    for (p, (_, c)) in forms.iter().enumerate() {
        for (b, t) in &coords[p] {
            w[*b] = axpy_row(&w[*b], t, c);
        }
    }
    basis_vecs.into_iter().zip(w).filter(|(_, w)| !w.is_empty()).collect()
}

/// `cse`, `fuse_carries` and `prune` repeated until the neuron count stops
/// decreasing.
pub fn optimize(net: &ReluNetwork) -> ReluNetwork {
    let mut cur = prune(&cse(net));
    loop {
        let next = prune(&cse(&fuse_carries(&cur)));
        if next.neurons() >= cur.neurons() {
            return cur;
        }
        cur = next;
    }
}
