use crate::ir::{linear_combination, AffineMap, ReluNetwork};
use crate::rational::Rational;
use crate::synth::{build_max, Method, SynthConfig, SynthError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i64(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// One summand `σ·MAX_{n+1}(A(x))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpwlTerm {
    pub sign: Sign,
    /// `R^n → R^{n+1}`.
    pub map: AffineMap,
}

/// `f(x) = Σ σᵢ·MAX_{n+1}(Aᵢ(x))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CpwlDecomposition {
    pub n: usize,
    pub terms: Vec<CpwlTerm>,
}

impl CpwlDecomposition {
    pub fn new(n: usize, terms: Vec<CpwlTerm>) -> Result<Self, SynthError> {
        let d = CpwlDecomposition { n, terms };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n == 0 {
            return Err(SynthError::Malformed("input dimension must be positive".into()));
        }
        if self.terms.is_empty() {
            return Err(SynthError::Malformed("decomposition has no terms".into()));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if t.map.cols() != self.n || t.map.rows() != self.n + 1 {
                return Err(SynthError::Malformed(format!(
                    "term {i}: map is {}x{}, expected {}x{}",
                    t.map.rows(),
                    t.map.cols(),
                    self.n + 1,
                    self.n
                )));
            }
        }
        Ok(())
    }

    /// Direct evaluation of the signed sum of maxima.
    pub fn eval(&self, x: &[Rational]) -> Result<Rational, SynthError> {
        let mut acc = Rational::zero();
        for t in &self.terms {
            let y = t.map.apply(x)?;
            let m = y.into_iter().max().expect("n + 1 ≥ 2 entries");
            match t.sign {
                Sign::Plus => acc += m,
                Sign::Minus => acc -= m,
            }
        }
        Ok(acc)
    }
}

/// Network computing the decomposition with the chosen MAX_{n+1} constructor.
pub fn compile_cpwl(
    decomp: &CpwlDecomposition,
    method: Method,
    config: &SynthConfig,
) -> Result<ReluNetwork, SynthError> {
    decomp.validate()?;
    let max_net = build_max(decomp.n + 1, method, config)?;
    let nets = decomp
        .terms
        .iter()
        .map(|t| max_net.after_affine(&t.map))
        .collect::<Result<Vec<_>, _>>()?;
    let coefs: Vec<Rational> = decomp.terms.iter().map(|t| Rational::from(t.sign.as_i64())).collect();
    Ok(linear_combination(&nets, &coefs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;

    #[test]
    fn abs_value() {
        let d = CpwlDecomposition::new(
            1,
            vec![CpwlTerm {
                sign: Sign::Plus,
                map: AffineMap::from_ints(&[&[1], &[-1]], &[0, 0]).unwrap(),
            }],
        )
        .unwrap();
        for m in [Method::Tree, Method::Five, Method::Ternary] {
            let net = compile_cpwl(&d, m, &SynthConfig::default()).unwrap();
            assert_eq!(net.eval(&qvec(&[-3])).unwrap(), qvec(&[3]));
        }
    }

    #[test]
    fn two_term_difference() {
        // MAX₂(x₁,x₂) − MAX₂(x₁,0), each written as a MAX₃ with a repeat
        let d = CpwlDecomposition::new(
            2,
            vec![
                CpwlTerm {
                    sign: Sign::Plus,
                    map: AffineMap::from_ints(&[&[1, 0], &[0, 1], &[1, 0]], &[0, 0, 0]).unwrap(),
                },
                CpwlTerm {
                    sign: Sign::Minus,
                    map: AffineMap::from_ints(&[&[1, 0], &[0, 0], &[0, 0]], &[0, 0, 0]).unwrap(),
                },
            ],
        )
        .unwrap();
        assert_eq!(d.eval(&qvec(&[-1, 5])).unwrap(), Rational::from(5));
        let net = compile_cpwl(&d, Method::Ternary, &SynthConfig::default()).unwrap();
        assert_eq!(net.hidden_layers(), 2);
        assert_eq!(net.eval(&qvec(&[-1, 5])).unwrap(), qvec(&[5]));
    }

    #[test]
    fn malformed() {
        let bad = CpwlDecomposition::new(
            2,
            vec![CpwlTerm {
                sign: Sign::Plus,
                map: AffineMap::from_ints(&[&[1, 0], &[0, 1]], &[0, 0]).unwrap(),
            }],
        );
        assert!(matches!(bad, Err(SynthError::Malformed(_))));
        assert!(CpwlDecomposition::new(1, vec![]).is_err());
    }
}
