//! Exact checking of networks: seeded random testing against an oracle and
//! complete region enumeration.

pub mod lp;
pub mod regions;

use std::ops::ControlFlow;

use serde::Serialize;

use crate::ir::{difference, IrError, ReluNetwork};
use crate::rational::Rational;
use crate::sample::RationalSampler;

pub use lp::{lp_feasible, maximize, solve_standard, Constraint, IneqOutcome, Relation, StdOutcome};
pub use regions::{
    enumerate_regions, for_each_region, ActivationPattern, Region, RegionMode, RegionOptions, DEFAULT_NEURON_CAP,
};

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("empty input")]
    EmptyInput,
    #[error("constraint rows do not share one dimension")]
    LpDimension,
    #[error("network has {neurons} hidden neurons, above the cap of {cap}")]
    CapExceeded { neurons: usize, cap: usize },
    #[error(transparent)]
    Ir(#[from] IrError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Counterexample,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckMethod {
    Random,
    Regions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub witness: Option<Vec<Rational>>,
    pub samples_tested: u64,
    pub regions_enumerated: Option<u64>,
    pub method: CheckMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// `max(x)`.
pub fn oracle_max(x: &[Rational]) -> Result<Rational, VerifyError> {
    x.iter().max().cloned().ok_or(VerifyError::EmptyInput)
}

/// Evaluates `net` on `samples` seeded random points and compares with
/// `oracle`. Stops at the first mismatch. Never reports equivalence.
pub fn check_random<O>(net: &ReluNetwork, oracle: O, samples: u64, seed: u64) -> Result<VerificationReport, VerifyError>
where
    O: Fn(&[Rational]) -> Vec<Rational>,
{
    let mut sampler = RationalSampler::new(seed);
    let dim = net.input_dim();
    for i in 0..samples {
        let x = sampler.vector(dim);
        if net.eval(&x)? != oracle(&x) {
            return Ok(VerificationReport {
                verdict: Verdict::Counterexample,
                witness: Some(x),
                samples_tested: i + 1,
                regions_enumerated: None,
                method: CheckMethod::Random,
                reason: None,
            });
        }
    }
    Ok(VerificationReport {
        verdict: Verdict::Inconclusive,
        witness: None,
        samples_tested: samples,
        regions_enumerated: None,
        method: CheckMethod::Random,
        reason: Some("random testing cannot certify equivalence".into()),
    })
}

/// [`check_random`] with `MAX_n` as the oracle.
pub fn check_random_max(net: &ReluNetwork, samples: u64, seed: u64) -> Result<VerificationReport, VerifyError> {
    if net.input_dim() == 0 {
        return Err(VerifyError::EmptyInput);
    }
    check_random(net, |x| vec![oracle_max(x).expect("non-empty")], samples, seed)
}

/// Moves `p` inside the open region cut out by `region` until the affine
/// output `out` is non-zero there.
fn nonzero_witness(net: &ReluNetwork, region: &Region, p: &[Rational]) -> Result<Vec<Rational>, VerifyError> {
    if net.eval(p)?.iter().any(|v| !v.is_zero()) {
        return Ok(p.to_vec());
    }
    let r = (0..region.affine.rows())
        .find(|&i| !region.affine.row(i).is_empty())
        .expect("non-zero restriction with zero value has a gradient");
    let mut g = vec![Rational::zero(); p.len()];
    for (c, w) in region.affine.row(r) {
        g[*c] = w.clone();
    }
    // Halve the step until the activation pattern is unchanged.
    let mut step = Rational::one();
    loop {
        let cand: Vec<Rational> = p.iter().zip(&g).map(|(a, b)| a + &(&step * b)).collect();
        if ActivationPattern::at(net, &cand)? == region.pattern && net.eval(&cand)?.iter().any(|v| !v.is_zero()) {
            return Ok(cand);
        }
        step = step * Rational::new(1, 2);
    }
}

/// Decides `a ≡ b` by enumerating the full-dimensional regions of `a − b`.
///
/// Lower-dimensional regions are not needed: both sides are continuous, so
/// agreement on a dense set is agreement everywhere.
pub fn check_exact_equiv(a: &ReluNetwork, b: &ReluNetwork, cap: usize) -> Result<VerificationReport, VerifyError> {
    let diff = difference(a, b)?;
    let mut witness = None;
    let opts = RegionOptions {
        cap,
        mode: RegionMode::FullDimensional,
    };
    let mut found: Option<Region> = None;
    let count = match for_each_region(&diff, opts, |r| {
        if r.affine.nnz() == 0 && r.affine.bias().iter().all(Rational::is_zero) {
            ControlFlow::Continue(())
        } else {
            found = Some(r.clone());
            ControlFlow::Break(())
        }
    }) {
        Ok(c) => c,
        Err(VerifyError::CapExceeded { neurons, cap }) => {
            return Ok(VerificationReport {
                verdict: Verdict::Inconclusive,
                witness: None,
                samples_tested: 0,
                regions_enumerated: None,
                method: CheckMethod::Regions,
                reason: Some(format!(
                    "difference network has {neurons} hidden neurons, above the exact-check cap of {cap}"
                )),
            })
        }
        Err(e) => return Err(e),
    };
    if let Some(region) = &found {
        let p = region.interior.as_ref().unwrap_or(&region.point);
        witness = Some(nonzero_witness(&diff, region, p)?);
    }
    Ok(VerificationReport {
        verdict: if witness.is_some() {
            Verdict::Counterexample
        } else {
            Verdict::Equivalent
        },
        witness,
        samples_tested: 0,
        regions_enumerated: Some(count as u64),
        method: CheckMethod::Regions,
        reason: None,
    })
}

/// True iff every weight and bias has a power-of-two denominator.
pub fn check_dyadic(net: &ReluNetwork) -> bool {
    net.layers()
        .iter()
        .all(|l| l.coefficients().all(Rational::is_dyadic) && l.bias().iter().all(Rational::is_dyadic))
}
