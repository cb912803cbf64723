use crate::ir::{compose, parallel, AffineMap, ReluNetwork};
use crate::rational::Rational;
use crate::synth::{build_max5, SynthError};

/// `max(x1, x2) = relu(x2 − x1) + x1`, with `x1` carried through the hidden
/// layer as `relu(x1) − relu(−x1)`.
pub fn build_max2() -> ReluNetwork {
    pairwise_stage(2)
}

/// One hidden layer mapping `R^m → R^⌈m/2⌉`: consecutive pairs are maxed, an
/// odd last coordinate passes through.
pub(crate) fn pairwise_stage(m: usize) -> ReluNetwork {
    let one = Rational::one;
    let mut hidden = Vec::new();
    let mut out = Vec::new();
    let mut i = 0;
    while i < m {
        let base = hidden.len();
        if i + 1 < m {
            hidden.push(vec![(i, -one()), (i + 1, one())]);
            hidden.push(vec![(i, one())]);
            hidden.push(vec![(i, -one())]);
            out.push(vec![(base, one()), (base + 1, one()), (base + 2, -one())]);
        } else {
            hidden.push(vec![(i, one())]);
            hidden.push(vec![(i, -one())]);
            out.push(vec![(base, one()), (base + 1, -one())]);
        }
        i += 2;
    }
    let h = hidden.len();
    let o = out.len();
    let first = AffineMap::from_sparse(m, hidden, vec![Rational::zero(); h]).expect("valid rows");
    let second = AffineMap::from_sparse(h, out, vec![Rational::zero(); o]).expect("valid rows");
    ReluNetwork::new(m, vec![first, second]).expect("valid chain")
}

/// Binary tree of MAX₂ gadgets: `⌈log₂ n⌉` hidden layers.
pub fn build_tree_max(n: usize) -> Result<ReluNetwork, SynthError> {
    if n == 0 {
        return Err(SynthError::EmptyMax);
    }
    let mut net = ReluNetwork::identity(n);
    let mut m = n;
    while m > 1 {
        net = compose(&pairwise_stage(m), &net)?;
        m = m.div_ceil(2);
    }
    Ok(net)
}

/// Tree of MAX₅ networks: `2⌈log₅ n⌉` hidden layers. Short groups repeat
/// their first argument.
pub fn build_five_ary_max(n: usize) -> Result<ReluNetwork, SynthError> {
    if n == 0 {
        return Err(SynthError::EmptyMax);
    }
    let max5 = build_max5();
    let mut net = ReluNetwork::identity(n);
    let mut m = n;
    while m > 1 {
        let groups: Vec<ReluNetwork> = (0..m)
            .step_by(5)
            .map(|start| {
                let end = (start + 5).min(m);
                let mut idx: Vec<usize> = (start..end).collect();
                idx.resize(5, start);
                max5.after_affine(&AffineMap::selection(m, &idx)?)
            })
            .collect::<Result<_, _>>()?;
        net = compose(&parallel(&groups)?, &net)?;
        m = m.div_ceil(5);
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::stats;
    use crate::rational::{q, qvec};

    #[test]
    fn max2_examples() {
        let n = build_max2();
        assert_eq!(n.eval(&qvec(&[0, 0])).unwrap(), qvec(&[0]));
        assert_eq!(n.eval(&qvec(&[3, 5])).unwrap(), qvec(&[5]));
        assert_eq!(n.eval(&qvec(&[-2, -9])).unwrap(), qvec(&[-2]));
        assert_eq!(n.eval(&[q(-7, 2), q(-7, 2)]).unwrap(), vec![q(-7, 2)]);
        let s = stats(&n);
        assert_eq!(s.hidden_layers, 1);
        assert_eq!(s.neurons, 3);
        assert!(s.is_dyadic);
    }

    #[test]
    fn tree_examples() {
        assert_eq!(build_tree_max(1).unwrap().hidden_layers(), 0);
        let t4 = build_tree_max(4).unwrap();
        assert_eq!(t4.hidden_layers(), 2);
        assert_eq!(t4.eval(&qvec(&[1, 7, 5, 2])).unwrap(), qvec(&[7]));
        assert_eq!(build_tree_max(5).unwrap().hidden_layers(), 3);
        assert!(matches!(build_tree_max(0), Err(SynthError::EmptyMax)));
    }

    #[test]
    fn five_ary_examples() {
        assert_eq!(build_five_ary_max(25).unwrap().hidden_layers(), 4);
        let six = build_five_ary_max(6).unwrap();
        assert_eq!(six.eval(&qvec(&[0, 0, 0, 0, 0, 1])).unwrap(), qvec(&[1]));
        assert_eq!(build_five_ary_max(1).unwrap().hidden_layers(), 0);
    }
}
