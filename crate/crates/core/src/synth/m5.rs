//! The nine-term representation of MAX₅:
//!
//! `MAX₅ = ½(P₁ + P₂ + P₃ + P₄ + Q − R₁₃ − R₁₄ − R₂₃ − R₂₄)`
//!
//! where every term is a maximum of a few sums of two coordinates.

use std::fmt;
use std::str::FromStr;

use crate::ir::ReluNetwork;
use crate::rational::{q, Rational};
use crate::synth::{realize_combo, Form, SynthError, TabTerm, TermCombo};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermId {
    P1,
    P2,
    P3,
    P4,
    Q,
    R13,
    R14,
    R23,
    R24,
}

impl TermId {
    pub const ALL: [TermId; 9] = [
        TermId::P1,
        TermId::P2,
        TermId::P3,
        TermId::P4,
        TermId::Q,
        TermId::R13,
        TermId::R14,
        TermId::R23,
        TermId::R24,
    ];

    /// +1 for the P's and Q, −1 for the R's.
    pub fn sign(self) -> i64 {
        match self {
            TermId::R13 | TermId::R14 | TermId::R23 | TermId::R24 => -1,
            _ => 1,
        }
    }

    /// The pairs `(i, j)` (0-based) such that the term is `max(x_i + x_j)`
    /// over them; `(4, 4)` is `2x₅`.
    pub fn pair_sums(self) -> &'static [(usize, usize)] {
        match self {
            TermId::P1 => &[(4, 4), (0, 1), (0, 0), (0, 2), (0, 3), (2, 3)],
            TermId::P2 => &[(4, 4), (0, 1), (1, 1), (1, 2), (1, 3), (2, 3)],
            TermId::P3 => &[(4, 4), (2, 3), (2, 2), (2, 0), (2, 1), (0, 1)],
            TermId::P4 => &[(4, 4), (2, 3), (3, 3), (3, 0), (3, 1), (0, 1)],
            TermId::Q => &[(4, 4), (0, 1), (2, 3)],
            TermId::R13 => &[(4, 4), (0, 2), (0, 1), (2, 3)],
            TermId::R14 => &[(4, 4), (0, 3), (0, 1), (2, 3)],
            TermId::R23 => &[(4, 4), (1, 2), (0, 1), (2, 3)],
            TermId::R24 => &[(4, 4), (1, 3), (0, 1), (2, 3)],
        }
    }

    /// The same term written as a `T_{a,b}` instance: P's are
    /// `max(2x₅, x₁+x₂, max(x₁,x₃)+max(x₁,x₄))` and friends; Q and the R's are
    /// plain maxima of pair sums.
    pub fn structured(self) -> TabTerm {
        let x = |i: usize| Form::coord(i);
        let two_x5 = x(4).scale(&Rational::from(2));
        let sum = |i: usize, j: usize| x(i).add(&x(j));
        let coef = q(self.sign(), 2);
        let (blocks, extras, forms) = match self {
            TermId::P1 => (1, 2, vec![x(0), x(2), x(0), x(3), two_x5, sum(0, 1)]),
            TermId::P2 => (1, 2, vec![x(1), x(2), x(1), x(3), two_x5, sum(0, 1)]),
            TermId::P3 => (1, 2, vec![x(2), x(0), x(2), x(1), two_x5, sum(2, 3)]),
            TermId::P4 => (1, 2, vec![x(3), x(0), x(3), x(1), two_x5, sum(2, 3)]),
            TermId::Q => (0, 3, vec![two_x5, sum(0, 1), sum(2, 3)]),
            TermId::R13 => (0, 4, vec![two_x5, sum(0, 2), sum(0, 1), sum(2, 3)]),
            TermId::R14 => (0, 4, vec![two_x5, sum(0, 3), sum(0, 1), sum(2, 3)]),
            TermId::R23 => (0, 4, vec![two_x5, sum(1, 2), sum(0, 1), sum(2, 3)]),
            TermId::R24 => (0, 4, vec![two_x5, sum(1, 3), sum(0, 1), sum(2, 3)]),
        };
        TabTerm::from_forms(coef, blocks, extras, 5, &forms).expect("fixed shapes")
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for TermId {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TermId::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| SynthError::UnknownTerm(s.to_string()))
    }
}

fn check_five(x: &[Rational]) -> Result<(), SynthError> {
    if x.len() != 5 {
        return Err(SynthError::Arity {
            expected: 5,
            found: x.len(),
        });
    }
    Ok(())
}

/// Closed-form value of one of the nine terms.
pub fn term_eval(term: TermId, x: &[Rational]) -> Result<Rational, SynthError> {
    check_five(x)?;
    Ok(term
        .pair_sums()
        .iter()
        .map(|&(i, j)| &x[i] + &x[j])
        .max()
        .expect("non-empty"))
}

/// `½(P₁+P₂+P₃+P₄+Q−R₁₃−R₁₄−R₂₃−R₂₄)(x)`.
pub fn eval_m(x: &[Rational]) -> Result<Rational, SynthError> {
    check_five(x)?;
    let mut acc = Rational::zero();
    for t in TermId::ALL {
        let v = term_eval(t, x)?;
        if t.sign() > 0 {
            acc += v;
        } else {
            acc -= v;
        }
    }
    Ok(acc * q(1, 2))
}

/// The nine terms with coefficients ±½, as a term combination on `R^5`.
pub fn m_term_combo() -> TermCombo {
    TermCombo::new(5, TermId::ALL.iter().map(|t| t.structured()).collect()).expect("shapes agree")
}

/// MAX₅ with two hidden layers, realized term by term from the nine-term
/// formula.
pub fn build_max5() -> ReluNetwork {
    realize_combo(&m_term_combo(), 1).expect("every term needs only MAX₂ after the first layer")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;

    #[test]
    fn term_values() {
        let x = qvec(&[2, -1, 0, 1, 1]);
        assert_eq!(term_eval(TermId::P1, &x).unwrap(), Rational::from(4));
        assert_eq!(term_eval(TermId::R14, &x).unwrap(), Rational::from(3));
        assert_eq!(term_eval(TermId::Q, &qvec(&[0; 5])).unwrap(), Rational::zero());
        assert!(matches!(term_eval(TermId::Q, &qvec(&[1])), Err(SynthError::Arity { .. })));
    }

    #[test]
    fn m_examples() {
        let t = q(9, 4);
        assert_eq!(eval_m(&vec![t.clone(); 5]).unwrap(), t);
        assert_eq!(eval_m(&qvec(&[0, 0, 0, 0, 1])).unwrap(), Rational::one());
        assert_eq!(eval_m(&qvec(&[2, -1, 0, 1, 1])).unwrap(), Rational::from(2));
    }

    #[test]
    fn structured_forms_match_closed_forms() {
        let x = vec![q(3, 2), q(-7, 4), q(5, 1), q(1, 8), q(-2, 1)];
        for t in TermId::ALL {
            let s = t.structured();
            let expected = term_eval(t, &x).unwrap() * q(t.sign(), 2);
            assert_eq!(s.eval(&x).unwrap(), expected, "{t}");
        }
    }

    #[test]
    fn parse_term_ids() {
        assert_eq!("R23".parse::<TermId>().unwrap(), TermId::R23);
        assert!(matches!("R12".parse::<TermId>(), Err(SynthError::UnknownTerm(_))));
    }

    #[test]
    fn max5_network() {
        let n = build_max5();
        assert_eq!(n.hidden_layers(), 2);
        assert_eq!(n.eval(&qvec(&[0; 5])).unwrap(), qvec(&[0]));
        assert_eq!(n.eval(&qvec(&[2, -1, 0, 1, 1])).unwrap(), qvec(&[2]));
        assert!(crate::ir::stats(&n).is_dyadic);
    }
}
