//! Activation-region enumeration.

use std::ops::ControlFlow;

use crate::ir::{AffineMap, ReluNetwork};
use crate::rational::Rational;
use crate::verify::lp::{lp_feasible, Constraint, Relation};
use crate::verify::VerifyError;

/// Default ceiling on the number of hidden neurons of a network handed to
/// the region enumerator.
pub const DEFAULT_NEURON_CAP: usize = 128;

/// Which sign patterns to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionMode {
    /// Every non-empty pattern, using the `{≥ 0, < 0}` convention, including
    /// lower-dimensional ones.
    All,
    /// Only patterns whose region has non-empty interior. Boundaries are
    /// never explored, so this is much cheaper than [`RegionMode::All`].
    FullDimensional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionOptions {
    pub cap: usize,
    pub mode: RegionMode,
}

impl Default for RegionOptions {
    fn default() -> Self {
        RegionOptions {
            cap: DEFAULT_NEURON_CAP,
            mode: RegionMode::All,
        }
    }
}

/// Per hidden layer, per neuron: `true` iff the pre-activation is `≥ 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern(pub Vec<Vec<bool>>);

impl ActivationPattern {
    /// The pattern of the region containing `x`.
    pub fn at(net: &ReluNetwork, x: &[Rational]) -> Result<Self, VerifyError> {
        let pre = net.pre_activations(x)?;
        let hidden = net.hidden_layers();
        Ok(ActivationPattern(
            pre.into_iter()
                .take(hidden)
                .map(|layer| layer.iter().map(|z| !z.is_negative()).collect())
                .collect(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub pattern: ActivationPattern,
    /// The network restricted to the region, as a map on the input space.
    pub affine: AffineMap,
    /// A point of the region.
    pub point: Vec<Rational>,
    /// A point with every non-vanishing pre-activation non-zero, if the
    /// region is full-dimensional.
    pub interior: Option<Vec<Rational>>,
}

/// Affine form on the input space: coefficients and constant.
#[derive(Clone, Debug)]
struct Form {
    coef: Vec<Rational>,
    constant: Rational,
}

impl Form {
    fn is_constant(&self) -> bool {
        self.coef.iter().all(Rational::is_zero)
    }

    fn eval(&self, x: &[Rational]) -> Rational {
        let mut acc = self.constant.clone();
        for (a, v) in self.coef.iter().zip(x) {
            if !a.is_zero() {
                acc += a * v;
            }
        }
        acc
    }

    fn neg(&self) -> Form {
        Form {
            coef: self.coef.iter().map(|v| -v).collect(),
            constant: -&self.constant,
        }
    }

    /// Scaled so that the first non-zero entry has absolute value one.
    fn key(&self) -> Vec<Rational> {
        let all: Vec<Rational> = self.coef.iter().chain(std::iter::once(&self.constant)).cloned().collect();
        match all.iter().find(|v| !v.is_zero()) {
            Some(lead) => {
                let s = lead.abs().recip();
                all.iter().map(|v| v * &s).collect()
            }
            None => all,
        }
    }
}

fn layer_forms(map: &AffineMap, h: &[Form], dim: usize) -> Vec<Form> {
    (0..map.rows())
        .map(|r| {
            let mut coef = vec![Rational::zero(); dim];
            let mut constant = map.bias()[r].clone();
            for (c, w) in map.row(r) {
                for (acc, v) in coef.iter_mut().zip(&h[*c].coef) {
                    if !v.is_zero() {
                        *acc += w * v;
                    }
                }
                constant += w * &h[*c].constant;
            }
            Form { coef, constant }
        })
        .collect()
}

struct Search<'a, F> {
    net: &'a ReluNetwork,
    dim: usize,
    mode: RegionMode,
    constraints: Vec<Constraint>,
    keys: Vec<Vec<Rational>>,
    pattern: Vec<Vec<bool>>,
    count: usize,
    visit: F,
}

enum Branch {
    Infeasible,
    Feasible(Vec<Rational>, bool),
}

impl<F: FnMut(&Region) -> ControlFlow<()>> Search<'_, F> {
    /// Feasibility of the current system extended by `form (rel) 0`.
    /// Returns the new witness and whether a constraint must be pushed.
    fn extend(&self, form: &Form, rel: Relation, witness: &[Rational]) -> Result<Branch, VerifyError> {
        let key = form.key();
        let neg_key = form.neg().key();
        let mut implied = false;
        for (k, c) in self.keys.iter().zip(&self.constraints) {
            if *k == key && (c.relation == Relation::Gt || rel == Relation::Geq) {
                implied = true;
            }
            if *k == neg_key && (c.relation == Relation::Gt || rel == Relation::Gt) {
                return Ok(Branch::Infeasible);
            }
        }
        if implied {
            return Ok(Branch::Feasible(witness.to_vec(), false));
        }
        let v = form.eval(witness);
        let ok = match rel {
            Relation::Geq => !v.is_negative(),
            Relation::Gt => v.is_positive(),
        };
        if ok {
            return Ok(Branch::Feasible(witness.to_vec(), true));
        }
        let mut cs = self.constraints.clone();
        cs.push(constraint(form, rel));
        Ok(match lp_feasible(self.dim, &cs)? {
            Some(p) => Branch::Feasible(p, true),
            None => Branch::Infeasible,
        })
    }

    fn descend(
        &mut self,
        layer: usize,
        forms: &[Form],
        j: usize,
        witness: Vec<Rational>,
    ) -> Result<ControlFlow<()>, VerifyError> {
        if j == forms.len() {
            return self.finish_layer(layer, forms, witness);
        }
        let f = &forms[j];
        if f.is_constant() {
            self.pattern[layer].push(!f.constant.is_negative());
            let r = self.descend(layer, forms, j + 1, witness);
            self.pattern[layer].pop();
            return r;
        }
        let active_rel = match self.mode {
            RegionMode::All => Relation::Geq,
            RegionMode::FullDimensional => Relation::Gt,
        };
        for (active, form, rel) in [(true, f.clone(), active_rel), (false, f.neg(), Relation::Gt)] {
            if let Branch::Feasible(w, push) = self.extend(&form, rel, &witness)? {
                if push {
                    self.keys.push(form.key());
                    self.constraints.push(constraint(&form, rel));
                }
                self.pattern[layer].push(active);
                let r = self.descend(layer, forms, j + 1, w);
                self.pattern[layer].pop();
                if push {
                    self.keys.pop();
                    self.constraints.pop();
                }
                if r?.is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    fn finish_layer(&mut self, layer: usize, forms: &[Form], witness: Vec<Rational>) -> Result<ControlFlow<()>, VerifyError> {
        let zero = Form {
            coef: vec![Rational::zero(); self.dim],
            constant: Rational::zero(),
        };
        let h: Vec<Form> = forms
            .iter()
            .zip(&self.pattern[layer])
            .map(|(f, &on)| if on { f.clone() } else { zero.clone() })
            .collect();
        let next = layer + 1;
        let maps = self.net.layers();
        let next_forms = layer_forms(&maps[next], &h, self.dim);
        if next == maps.len() - 1 {
            return self.leaf(&next_forms, witness);
        }
        self.pattern.push(Vec::with_capacity(next_forms.len()));
        let r = self.descend(next, &next_forms, 0, witness);
        self.pattern.pop();
        r
    }

    fn leaf(&mut self, out: &[Form], point: Vec<Rational>) -> Result<ControlFlow<()>, VerifyError> {
        let interior = match self.mode {
            RegionMode::FullDimensional => Some(point.clone()),
            RegionMode::All => {
                let strict: Vec<Constraint> = self
                    .constraints
                    .iter()
                    .map(|c| Constraint::gt(c.row.clone(), c.rhs.clone()))
                    .collect();
                if strict == self.constraints {
                    Some(point.clone())
                } else {
                    lp_feasible(self.dim, &strict)?
                }
            }
        };
        let rows: Vec<Vec<Rational>> = out.iter().map(|f| f.coef.clone()).collect();
        let bias = out.iter().map(|f| f.constant.clone()).collect();
        let affine = AffineMap::from_dense(self.dim, rows, bias)?;
        let region = Region {
            pattern: ActivationPattern(self.pattern.clone()),
            affine,
            point,
            interior,
        };
        self.count += 1;
        Ok((self.visit)(&region))
    }
}

fn constraint(form: &Form, rel: Relation) -> Constraint {
    Constraint {
        row: form.coef.clone(),
        relation: rel,
        rhs: -&form.constant,
    }
}

/// Depth-first walk over the activation regions of `net`, calling `visit` on
/// each until it breaks. Returns the number of regions visited.
pub fn for_each_region<F>(net: &ReluNetwork, opts: RegionOptions, visit: F) -> Result<usize, VerifyError>
where
    F: FnMut(&Region) -> ControlFlow<()>,
{
    let neurons = net.neurons();
    if neurons > opts.cap {
        return Err(VerifyError::CapExceeded { neurons, cap: opts.cap });
    }
    let dim = net.input_dim();
    let input: Vec<Form> = (0..dim)
        .map(|i| {
            let mut coef = vec![Rational::zero(); dim];
            coef[i] = Rational::one();
            Form {
                coef,
                constant: Rational::zero(),
            }
        })
        .collect();
    let mut search = Search {
        net,
        dim,
        mode: opts.mode,
        constraints: Vec::new(),
        keys: Vec::new(),
        pattern: Vec::new(),
        count: 0,
        visit,
    };
    let first = layer_forms(&net.layers()[0], &input, dim);
    let origin = vec![Rational::zero(); dim];
    if net.hidden_layers() == 0 {
        let _ = search.leaf(&first, origin)?;
    } else {
        search.pattern.push(Vec::with_capacity(first.len()));
        let _ = search.descend(0, &first, 0, origin)?;
    }
    Ok(search.count)
}

/// All activation regions of `net`.
pub fn enumerate_regions(net: &ReluNetwork, opts: RegionOptions) -> Result<Vec<Region>, VerifyError> {
    let mut out = Vec::new();
    for_each_region(net, opts, |r| {
        out.push(r.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}
