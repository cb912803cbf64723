//! Symbolic `T_{a,b}` terms and the expansion that trades four extra
//! arguments for one pair-max block.
//!
//! `T_{a,b}(y)` is the maximum of `a` block values
//! `max(y₁,y₂) + max(y₃,y₄)` and `b` extra arguments. A [`TabTerm`] stores it
//! pre-composed with an affine map and scaled by a coefficient; a
//! [`TermCombo`] is a sum of such terms over a common input space.

use std::collections::HashMap;

use crate::ir::{axpy_row, dot, scale_row, AffineMap, SparseRow};
use crate::rational::{q, Rational};
use crate::synth::SynthError;

/// An affine form `row·x + bias`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    pub row: SparseRow,
    pub bias: Rational,
}

impl Form {
    pub fn zero() -> Self {
        Form {
            row: Vec::new(),
            bias: Rational::zero(),
        }
    }

    pub fn coord(i: usize) -> Self {
        Form {
            row: vec![(i, Rational::one())],
            bias: Rational::zero(),
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        Form {
            row: axpy_row(&self.row, &Rational::one(), &other.row),
            bias: &self.bias + &other.bias,
        }
    }

    pub fn sub(&self, other: &Form) -> Form {
        Form {
            row: axpy_row(&self.row, &-Rational::one(), &other.row),
            bias: &self.bias - &other.bias,
        }
    }

    pub fn scale(&self, lambda: &Rational) -> Form {
        Form {
            row: scale_row(&self.row, lambda),
            bias: &self.bias * lambda,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.row.is_empty()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.row, x) + &self.bias
    }

    fn half(&self) -> Form {
        self.scale(&q(1, 2))
    }

    fn avg(&self, other: &Form) -> Form {
        self.add(other).half()
    }
}

/// `T_{a,b}(y)`; `None` when there is nothing to maximize over.
pub fn t_value(blocks: usize, extras: usize, y: &[Rational]) -> Option<Rational> {
    debug_assert_eq!(y.len(), 4 * blocks + extras);
    let block_vals = (0..blocks).map(|j| {
        let b = &y[4 * j..4 * j + 4];
        b[0].clone().max(b[1].clone()) + b[2].clone().max(b[3].clone())
    });
    block_vals.chain(y[4 * blocks..].iter().cloned()).max()
}

/// `x ↦ coef · T_{blocks,extras}(pre_map(x))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TabTerm {
    pub coef: Rational,
    pub blocks: usize,
    pub extras: usize,
    pub pre_map: AffineMap,
}

impl TabTerm {
    pub fn new(coef: Rational, blocks: usize, extras: usize, pre_map: AffineMap) -> Result<Self, SynthError> {
        if pre_map.rows() != 4 * blocks + extras {
            return Err(SynthError::ShapeMismatch {
                expected: 4 * blocks + extras,
                found: pre_map.rows(),
            });
        }
        if blocks + extras == 0 {
            return Err(SynthError::EmptyMax);
        }
        Ok(TabTerm {
            coef,
            blocks,
            extras,
            pre_map,
        })
    }

    pub fn from_forms(
        coef: Rational,
        blocks: usize,
        extras: usize,
        ambient_dim: usize,
        forms: &[Form],
    ) -> Result<Self, SynthError> {
        let rows = forms.iter().map(|f| f.row.clone()).collect();
        let bias = forms.iter().map(|f| f.bias.clone()).collect();
        let pre_map = AffineMap::from_sparse(ambient_dim, rows, bias)?;
        Self::new(coef, blocks, extras, pre_map)
    }

    /// Identity-pre-mapped `T_{0,n}`, i.e. MAX_n.
    pub fn max_of(n: usize) -> Result<Self, SynthError> {
        Self::new(Rational::one(), 0, n, AffineMap::identity(n))
    }

    pub fn ambient_dim(&self) -> usize {
        self.pre_map.cols()
    }

    pub fn form(&self, i: usize) -> Form {
        Form {
            row: self.pre_map.row(i).to_vec(),
            bias: self.pre_map.bias()[i].clone(),
        }
    }

    pub fn forms(&self) -> Vec<Form> {
        (0..self.pre_map.rows()).map(|i| self.form(i)).collect()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational, SynthError> {
        let y = self.pre_map.apply(x)?;
        let t = t_value(self.blocks, self.extras, &y).ok_or(SynthError::EmptyMax)?;
        Ok(&self.coef * t)
    }

    /// Same function with the pre-map rows in a canonical order: pairs sorted
    /// inside each block, the two pairs of a block sorted, blocks sorted and
    /// extras sorted.
    pub fn canonical(&self) -> TabTerm {
        let forms = self.forms();
        let mut blocks: Vec<[Form; 4]> = forms[..4 * self.blocks]
            .chunks(4)
            .map(|c| {
                let mut p = [c[0].clone(), c[1].clone()];
                let mut r = [c[2].clone(), c[3].clone()];
                p.sort();
                r.sort();
                if r < p {
                    std::mem::swap(&mut p, &mut r);
                }
                [p[0].clone(), p[1].clone(), r[0].clone(), r[1].clone()]
            })
            .collect();
        blocks.sort();
        let mut extras = forms[4 * self.blocks..].to_vec();
        extras.sort();
        let all: Vec<Form> = blocks.into_iter().flatten().chain(extras).collect();
        TabTerm::from_forms(self.coef.clone(), self.blocks, self.extras, self.ambient_dim(), &all)
            .expect("same shape")
    }

    fn key(&self) -> (usize, usize, Vec<Form>) {
        (self.blocks, self.extras, self.forms())
    }
}

/// `x ↦ Σ term(x)` over a common input space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermCombo {
    pub ambient_dim: usize,
    pub terms: Vec<TabTerm>,
}

impl TermCombo {
    pub fn new(ambient_dim: usize, terms: Vec<TabTerm>) -> Result<Self, SynthError> {
        if let Some(bad) = terms.iter().find(|t| t.ambient_dim() != ambient_dim) {
            return Err(SynthError::ShapeMismatch {
                expected: ambient_dim,
                found: bad.ambient_dim(),
            });
        }
        Ok(TermCombo { ambient_dim, terms })
    }

    pub fn single(term: TabTerm) -> Self {
        TermCombo {
            ambient_dim: term.ambient_dim(),
            terms: vec![term],
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational, SynthError> {
        let mut acc = Rational::zero();
        for t in &self.terms {
            acc += t.eval(x)?;
        }
        Ok(acc)
    }

    /// Canonicalizes every term, merges terms that compute the same function
    /// up to coefficient, drops zero coefficients and sorts the result.
    pub fn dedup(&self) -> TermCombo {
        let mut merged: HashMap<(usize, usize, Vec<Form>), (Rational, TabTerm)> = HashMap::new();
        for t in &self.terms {
            let c = t.canonical();
            merged
                .entry(c.key())
                .and_modify(|(coef, _)| *coef += &t.coef)
                .or_insert_with(|| (t.coef.clone(), c));
        }
        let mut entries: Vec<_> = merged.into_iter().filter(|(_, (c, _))| !c.is_zero()).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let terms = entries
            .into_iter()
            .map(|(_, (coef, mut t))| {
                t.coef = coef;
                t
            })
            .collect();
        TermCombo {
            ambient_dim: self.ambient_dim,
            terms,
        }
    }
}

/// Rewrites `coef·T_{a,b}∘L` with `b ≥ 4` as nine terms of shape
/// `(a+1, b−3)`.
///
/// The last four extras `u₁…u₄` play the role of `x₁…x₄` in the nine-term
/// MAX₅ formula and the remaining `T_{a,b−4}` plays `x₅`. Each term is halved
/// so that `2·T_{a,b−4}` becomes `T_{a,b−4}`, which turns the formula's ½ into
/// a ±1 on every child. Q and the R's carry fewer arguments; two of their
/// averages are packed into a block with a `max(0,0)` half and the remaining
/// average is kept as an extra, so every child has the same shape.
pub fn expand_step(term: &TabTerm) -> Result<TermCombo, SynthError> {
    if term.extras < 4 {
        return Err(SynthError::TooFewExtras { extras: term.extras });
    }
    if term.blocks == 0 && term.extras == 4 {
        return Err(SynthError::EmptyRemainder);
    }
    let forms = term.forms();
    let split = 4 * term.blocks + term.extras - 4;
    let (rest, u) = forms.split_at(split);
    let (rest_blocks, rest_extras) = rest.split_at(4 * term.blocks);
    let h: Vec<Form> = u.iter().map(Form::half).collect();
    let avg = |i: usize, j: usize| u[i].avg(&u[j]);
    let zero = Form::zero;

    // (sign, new block, new extra)
    let children: [(i64, [Form; 4], Form); 9] = [
        (1, [h[0].clone(), h[2].clone(), h[0].clone(), h[3].clone()], avg(0, 1)),
        (1, [h[1].clone(), h[2].clone(), h[1].clone(), h[3].clone()], avg(0, 1)),
        (1, [h[2].clone(), h[0].clone(), h[2].clone(), h[1].clone()], avg(2, 3)),
        (1, [h[3].clone(), h[0].clone(), h[3].clone(), h[1].clone()], avg(2, 3)),
        (1, [avg(0, 1), avg(2, 3), zero(), zero()], avg(0, 1)),
        (-1, [avg(0, 2), avg(0, 1), zero(), zero()], avg(2, 3)),
        (-1, [avg(0, 3), avg(0, 1), zero(), zero()], avg(2, 3)),
        (-1, [avg(1, 2), avg(0, 1), zero(), zero()], avg(2, 3)),
        (-1, [avg(1, 3), avg(0, 1), zero(), zero()], avg(2, 3)),
    ];

    let terms = children
        .into_iter()
        .map(|(sign, block, extra)| {
            let all: Vec<Form> = rest_blocks
                .iter()
                .cloned()
                .chain(block)
                .chain(rest_extras.iter().cloned())
                .chain(std::iter::once(extra))
                .collect();
            TabTerm::from_forms(
                &term.coef * Rational::from(sign),
                term.blocks + 1,
                term.extras - 3,
                term.ambient_dim(),
                &all,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    TermCombo::new(term.ambient_dim(), terms)
}

/// Expands until every term has exactly `target_extras` extras.
pub fn expand_full(start: &TermCombo, target_extras: usize) -> Result<TermCombo, SynthError> {
    for t in &start.terms {
        if t.extras < target_extras || (t.extras - target_extras) % 3 != 0 {
            return Err(SynthError::ModulusMismatch {
                extras: t.extras,
                target: target_extras,
            });
        }
    }
    let mut current = start.terms.clone();
    while current.iter().any(|t| t.extras > target_extras) {
        let mut next = Vec::with_capacity(current.len() * 9);
        for t in current {
            if t.extras > target_extras {
                next.extend(expand_step(&t)?.terms);
            } else {
                next.push(t);
            }
        }
        current = next;
    }
    TermCombo::new(start.ambient_dim, current)
}

/// Number of terms `expand_full` produces from `T_{0,extras}`, or `None` on
/// overflow.
pub fn expansion_size(extras: usize, target_extras: usize) -> Option<u64> {
    let steps = (extras.checked_sub(target_extras)? / 3) as u32;
    9u64.checked_pow(steps)
}
