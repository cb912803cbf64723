//! Exact linear programming over the rationals.
//!
//! The workhorse is a two-phase tableau simplex for `min c·λ, Aλ = b, λ ≥ 0`
//! with the least-index (Bland) pivot rule. Inequality systems in free
//! variables are solved through their dual, which keeps the tableau as tall
//! as the (small) number of variables rather than the number of constraints.

use crate::rational::Rational;
use crate::verify::VerifyError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Relation {
    /// `row·x ≥ rhs`
    Geq,
    /// `row·x > rhs`
    Gt,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub row: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn geq(row: Vec<Rational>, rhs: Rational) -> Self {
        Constraint {
            row,
            relation: Relation::Geq,
            rhs,
        }
    }

    pub fn gt(row: Vec<Rational>, rhs: Rational) -> Self {
        Constraint {
            row,
            relation: Relation::Gt,
            rhs,
        }
    }

    pub fn is_satisfied(&self, x: &[Rational]) -> bool {
        let lhs: Rational = self.row.iter().zip(x).map(|(a, b)| a * b).sum();
        match self.relation {
            Relation::Geq => lhs >= self.rhs,
            Relation::Gt => lhs > self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StdOutcome {
    Infeasible,
    Unbounded,
    /// `x` optimal, `duals` satisfy `Aᵀπ ≤ c` and `b·π = value`.
    Optimal {
        x: Vec<Rational>,
        duals: Vec<Rational>,
        value: Rational,
    },
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries, the last being the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Reduced costs, `ncols + 1` entries (last = minus objective value).
    obj: Vec<Rational>,
    /// Columns allowed to enter the basis.
    allowed: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            let inv = p.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let pivot_row = self.rows[r].clone();
        let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &j in &nz {
                self.obj[j] -= &f * &pivot_row[j];
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule to optimality. Returns `false` if unbounded.
    fn run(&mut self) -> bool {
        loop {
            let Some(c) = (0..self.allowed).find(|&j| self.obj[j].is_negative()) else {
                return true;
            };
            let rhs = self.obj.len() - 1;
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }
}

/// `min c·λ` subject to `Aλ = b`, `λ ≥ 0`.
pub fn solve_standard(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> Result<StdOutcome, VerifyError> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(VerifyError::LpDimension);
    }
    // columns: n real, m artificial, then rhs
    let width = n + m + 1;
    let mut signs = Vec::with_capacity(m);
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let s = if b[i].is_negative() { -1 } else { 1 };
        signs.push(s);
        let mut row = vec![Rational::zero(); width];
        for j in 0..n {
            row[j] = if s < 0 { -&a[i][j] } else { a[i][j].clone() };
        }
        row[n + i] = Rational::one();
        row[width - 1] = b[i].abs();
        rows.push(row);
    }
    let mut obj = vec![Rational::zero(); width];
    for row in &rows {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        obj,
        allowed: n,
    };
    t.run();
    if !t.obj[width - 1].is_zero() {
        return Ok(StdOutcome::Infeasible);
    }
    // drive zero-level artificials out where possible
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, c);
            }
        }
    }
    let mut obj = vec![Rational::zero(); width];
    obj[..n].clone_from_slice(c);
    for (r, row) in t.rows.iter().enumerate() {
        let cb = if t.basis[r] < n { c[t.basis[r]].clone() } else { Rational::zero() };
        if cb.is_zero() {
            continue;
        }
        for j in 0..width {
            if !row[j].is_zero() {
                obj[j] -= &cb * &row[j];
            }
        }
    }
    t.obj = obj;
    if !t.run() {
        return Ok(StdOutcome::Unbounded);
    }
    let mut x = vec![Rational::zero(); n];
    for (r, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rows[r][width - 1].clone();
        }
    }
    let duals = (0..m)
        .map(|i| {
            let d = -&t.obj[n + i];
            if signs[i] < 0 {
                -d
            } else {
                d
            }
        })
        .collect();
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(StdOutcome::Optimal { x, duals, value })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IneqOutcome {
    /// Infeasible, or feasible with unbounded objective.
    InfeasibleOrUnbounded,
    Infeasible,
    Optimal { y: Vec<Rational>, value: Rational },
}

/// `max c·y` subject to `G·y ≤ h` with `y` free, solved through the dual
/// `min h·λ, Gᵀλ = c, λ ≥ 0`.
pub fn maximize(g: &[Vec<Rational>], h: &[Rational], c: &[Rational]) -> Result<IneqOutcome, VerifyError> {
    let n = c.len();
    if g.len() != h.len() || g.iter().any(|r| r.len() != n) {
        return Err(VerifyError::LpDimension);
    }
    let at: Vec<Vec<Rational>> = (0..n).map(|i| g.iter().map(|r| r[i].clone()).collect()).collect();
    Ok(match solve_standard(&at, c, h)? {
        StdOutcome::Infeasible => IneqOutcome::InfeasibleOrUnbounded,
        StdOutcome::Unbounded => IneqOutcome::Infeasible,
        StdOutcome::Optimal { duals, value, .. } => IneqOutcome::Optimal { y: duals, value },
    })
}

/// A point satisfying every constraint (strict ones strictly), or `None`.
///
/// Strict constraints share one slack `t ∈ (0, 1]` that is maximized; the
/// system is feasible iff the optimum is positive.
pub fn lp_feasible(dim: usize, constraints: &[Constraint]) -> Result<Option<Vec<Rational>>, VerifyError> {
    if constraints.iter().any(|c| c.row.len() != dim) {
        return Err(VerifyError::LpDimension);
    }
    let mut g = Vec::with_capacity(constraints.len() + 1);
    let mut h = Vec::with_capacity(constraints.len() + 1);
    let mut any_strict = false;
    for con in constraints {
        let mut row: Vec<Rational> = con.row.iter().map(|v| -v).collect();
        let strict = con.relation == Relation::Gt;
        any_strict |= strict;
        row.push(if strict { Rational::one() } else { Rational::zero() });
        g.push(row);
        h.push(-&con.rhs);
    }
    let mut cap = vec![Rational::zero(); dim + 1];
    cap[dim] = Rational::one();
    g.push(cap.clone());
    h.push(Rational::one());
    match maximize(&g, &h, &cap)? {
        IneqOutcome::Optimal { mut y, value } => {
            if any_strict && !value.is_positive() {
                return Ok(None);
            }
            y.truncate(dim);
            debug_assert!(constraints.iter().all(|c| c.is_satisfied(&y)));
            Ok(Some(y))
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qvec};

    #[test]
    fn interval() {
        let cs = [Constraint::geq(qvec(&[1]), q(0, 1)), Constraint::geq(qvec(&[-1]), q(-1, 1))];
        let p = lp_feasible(1, &cs).unwrap().unwrap();
        assert!(p[0] >= Rational::zero() && p[0] <= Rational::one());
    }

    #[test]
    fn strict_contradiction() {
        let cs = [Constraint::gt(qvec(&[1]), q(0, 1)), Constraint::gt(qvec(&[-1]), q(0, 1))];
        assert_eq!(lp_feasible(1, &cs).unwrap(), None);
        let touching = [Constraint::geq(qvec(&[1]), q(0, 1)), Constraint::geq(qvec(&[-1]), q(0, 1))];
        assert_eq!(lp_feasible(1, &touching).unwrap(), Some(qvec(&[0])));
    }

    #[test]
    fn cone_point() {
        let cs = [
            Constraint::gt(qvec(&[1, 1]), q(0, 1)),
            Constraint::gt(qvec(&[1, -1]), q(0, 1)),
            Constraint::geq(qvec(&[-1, 0]), q(-1, 1)),
        ];
        let p = lp_feasible(2, &cs).unwrap().unwrap();
        assert!(p[0] > p[1].abs() && p[0] <= Rational::one());
    }

    #[test]
    fn empty_system() {
        assert_eq!(lp_feasible(3, &[]).unwrap().unwrap().len(), 3);
        assert!(matches!(
            lp_feasible(2, &[Constraint::geq(qvec(&[1]), q(0, 1))]),
            Err(VerifyError::LpDimension)
        ));
    }

    #[test]
    fn standard_form() {
        // min x + 2y, x + y = 3, x - y = 1
        let a = vec![qvec(&[1, 1]), qvec(&[1, -1])];
        match solve_standard(&a, &qvec(&[3, 1]), &qvec(&[1, 2])).unwrap() {
            StdOutcome::Optimal { x, value, duals } => {
                assert_eq!(x, qvec(&[2, 1]));
                assert_eq!(value, Rational::from(4));
                let bd: Rational = duals.iter().zip(qvec(&[3, 1])).map(|(p, b)| p * &b).sum();
                assert_eq!(bd, value);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            solve_standard(&[qvec(&[1, 1])], &qvec(&[-1]), &qvec(&[0, 0])).unwrap(),
            StdOutcome::Infeasible
        );
        assert_eq!(
            solve_standard(&[qvec(&[1, -1])], &qvec(&[0]), &qvec(&[-1, 0])).unwrap(),
            StdOutcome::Unbounded
        );
    }

    #[test]
    fn maximize_box() {
        // max x + y over x ≤ 1, y ≤ 2, -x ≤ 0
        let g = vec![qvec(&[1, 0]), qvec(&[0, 1]), qvec(&[-1, 0])];
        match maximize(&g, &qvec(&[1, 2, 0]), &qvec(&[1, 1])).unwrap() {
            IneqOutcome::Optimal { y, value } => {
                assert_eq!(value, Rational::from(3));
                assert_eq!(y, qvec(&[1, 2]));
            }
            other => panic!("{other:?}"),
        }
    }
}
