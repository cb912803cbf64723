//! Dense exact linear algebra for the small systems of the geometry code.

use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Reduced row echelon form; returns the reduced matrix and pivot columns.
pub fn rref(m: &[Vec<Rational>]) -> (Matrix, Vec<usize>) {
    let mut a: Matrix = m.to_vec();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for v in a[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    rref(m).1.len()
}

/// A basis of `{x : m·x = 0}`; `cols` is needed when `m` has no rows.
pub fn nullspace(m: &[Vec<Rational>], cols: usize) -> Matrix {
    let (r, pivots) = rref(m);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -&r[i][f];
            }
            v
        })
        .collect()
}

/// The unique solution of `a·x = b`, if there is one.
pub fn solve(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, v)| {
            let mut r = row.clone();
            r.push(v.clone());
            r
        })
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.contains(&cols) || pivots.len() != cols {
        return None;
    }
    Some((0..cols).map(|i| r[i][cols].clone()).collect())
}

/// Determinant by Gaussian elimination.
pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a: Matrix = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in c + 1..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let v = &f * &a[c][j];
                a[i][j] -= v;
            }
        }
    }
    d
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[Rational], s: &Rational) -> Vec<Rational> {
    a.iter().map(|x| x * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qvec};

    #[test]
    fn solve_and_rank() {
        let a = vec![qvec(&[2, 1]), qvec(&[1, 3])];
        assert_eq!(solve(&a, &qvec(&[3, 4])).unwrap(), qvec(&[1, 1]));
        assert_eq!(rank(&a), 2);
        let sing = vec![qvec(&[1, 2]), qvec(&[2, 4])];
        assert_eq!(rank(&sing), 1);
        assert!(solve(&sing, &qvec(&[1, 2])).is_none());
    }

    #[test]
    fn nullspace_is_orthogonal() {
        let m = vec![qvec(&[1, 1, 0]), qvec(&[0, 1, 1])];
        let ns = nullspace(&m, 3);
        assert_eq!(ns.len(), 1);
        for row in &m {
            assert!(dot(row, &ns[0]).is_zero());
        }
        assert_eq!(nullspace(&[], 2).len(), 2);
    }

    #[test]
    fn determinants() {
        assert_eq!(det(&[qvec(&[2, 2, 0]), qvec(&[0, 2, 2]), qvec(&[2, 0, 2])]), Rational::from(16));
        assert_eq!(det(&[qvec(&[0, 1]), qvec(&[1, 0])]), Rational::from(-1));
        assert_eq!(det(&[vec![q(1, 2)]]), q(1, 2));
    }
}
