//! Shared strategies and independent reference evaluators.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use relu_forge::ir::{AffineMap, ReluNetwork};
use relu_forge::Rational;

pub fn rational() -> impl Strategy<Value = Rational> {
    (-64i64..=64, prop::sample::select(vec![1i64, 2, 3, 4, 8])).prop_map(|(n, d)| Rational::new(n, d))
}

pub fn weight() -> impl Strategy<Value = Rational> {
    prop_oneof![
        2 => Just(Rational::zero()),
        5 => (-4i64..=4, prop::sample::select(vec![1i64, 2])).prop_map(|(n, d)| Rational::new(n, d)),
    ]
}

pub fn point(dim: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), dim)
}

pub fn affine(rows: usize, cols: usize) -> impl Strategy<Value = AffineMap> {
    (
        prop::collection::vec(prop::collection::vec(weight(), cols), rows),
        prop::collection::vec(weight(), rows),
    )
        .prop_map(move |(m, b)| AffineMap::from_dense(cols, m, b).unwrap())
}

/// Random network with the given input and output sizes.
pub fn network_with(input: usize, output: usize, max_hidden: usize, max_width: usize) -> impl Strategy<Value = ReluNetwork> {
    prop::collection::vec(1..=max_width, 0..=max_hidden).prop_flat_map(move |widths| {
        let mut dims = vec![input];
        dims.extend(widths);
        dims.push(output);
        let maps: Vec<_> = dims.windows(2).map(|w| affine(w[1], w[0])).collect();
        maps.prop_map(move |layers| ReluNetwork::new(input, layers).unwrap())
    })
}

pub fn network(max_in: usize, max_out: usize) -> impl Strategy<Value = ReluNetwork> {
    (1..=max_in, 1..=max_out).prop_flat_map(|(i, o)| network_with(i, o, 3, 4))
}

/// A network and a batch of input points for it.
pub fn network_and_points(max_in: usize, max_out: usize, points: usize) -> impl Strategy<Value = (ReluNetwork, Vec<Vec<Rational>>)> {
    network(max_in, max_out).prop_flat_map(move |n| {
        let d = n.input_dim();
        (Just(n), prop::collection::vec(point(d), points))
    })
}

pub fn big(r: &Rational) -> BigRational {
    BigRational::new(r.numer(), r.denom())
}

pub fn from_big(r: &BigRational) -> Rational {
    Rational::from_bigints(r.numer().clone(), r.denom().clone())
}

/// Dense evaluation with `num_rational`, independent of the crate's
/// arithmetic and sparse storage.
pub fn reference_eval(net: &ReluNetwork, x: &[Rational]) -> Vec<Rational> {
    let zero = BigRational::from_integer(BigInt::from(0));
    let mut cur: Vec<BigRational> = x.iter().map(big).collect();
    let last = net.layers().len() - 1;
    for (k, layer) in net.layers().iter().enumerate() {
        let dense = layer.to_dense();
        cur = dense
            .iter()
            .zip(layer.bias())
            .map(|(row, b)| {
                let v = row.iter().zip(&cur).fold(big(b), |acc, (w, xv)| acc + big(w) * xv);
                if k < last && v < zero {
                    zero.clone()
                } else {
                    v
                }
            })
            .collect();
    }
    cur.iter().map(from_big).collect()
}

pub fn max_of(x: &[Rational]) -> Rational {
    let mut best = big(&x[0]);
    for v in &x[1..] {
        let b = big(v);
        if b > best {
            best = b;
        }
    }
    from_big(&best)
}

/// Seeded inputs with many ties, built without the crate's sampler.
pub fn points_with_ties(dim: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let pool: Vec<Rational> = (0..3).map(|_| Rational::new(rng.random_range(-50..=50), 1 << rng.random_range(0..4))).collect();
            (0..dim)
                .map(|_| {
                    if rng.random_bool(0.4) {
                        pool[rng.random_range(0..3)].clone()
                    } else {
                        Rational::new(rng.random_range(-1000..=1000), 1 << rng.random_range(0..4))
                    }
                })
                .collect()
        })
        .collect()
}
