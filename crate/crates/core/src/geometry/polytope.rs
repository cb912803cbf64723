use crate::geometry::GeometryError;
use crate::linalg::{self, det, dot, nullspace, rref, sub};
use crate::rational::Rational;
use crate::verify::{lp_feasible, solve_standard, Constraint, StdOutcome};

/// Largest ambient dimension for which facets, intersections and volumes
/// are computed.
pub const MAX_EXACT_DIM: usize = 4;

/// A convex polytope given by its vertices.
///
/// The vertex list is irredundant and sorted, so equal polytopes compare
/// equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Polytope {
    dim: usize,
    vertices: Vec<Vec<Rational>>,
}

/// `a·x ≤ b` (or `= b`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HalfSpace {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl HalfSpace {
    fn value(&self, x: &[Rational]) -> Rational {
        dot(&self.normal, x)
    }
}

/// Facet description: equations of the affine hull and one inequality per
/// facet within it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HRep {
    pub equalities: Vec<HalfSpace>,
    pub inequalities: Vec<HalfSpace>,
}

impl HRep {
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.equalities.iter().all(|h| h.value(x) == h.offset)
            && self.inequalities.iter().all(|h| h.value(x) <= h.offset)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Facet {
    pub halfspace: HalfSpace,
    /// Indices into [`Polytope::vertices`].
    pub vertices: Vec<usize>,
}

fn check_dim(expected: usize, found: usize) -> Result<(), GeometryError> {
    if expected != found {
        return Err(GeometryError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Scales `v` so that its first non-zero entry has absolute value one.
fn normalized(v: &[Rational]) -> Vec<Rational> {
    match v.iter().find(|x| !x.is_zero()) {
        Some(lead) => {
            let s = lead.abs().recip();
            v.iter().map(|x| x * &s).collect()
        }
        None => v.to_vec(),
    }
}

/// Whether `p` is a convex combination of `others`.
fn in_hull(p: &[Rational], others: &[&Vec<Rational>]) -> Result<bool, GeometryError> {
    if others.is_empty() {
        return Ok(false);
    }
    let d = p.len();
    let mut a: Vec<Vec<Rational>> = (0..d).map(|i| others.iter().map(|v| v[i].clone()).collect()).collect();
    a.push(vec![Rational::one(); others.len()]);
    let mut b = p.to_vec();
    b.push(Rational::one());
    let cost = vec![Rational::zero(); others.len()];
    Ok(matches!(solve_standard(&a, &b, &cost)?, StdOutcome::Optimal { .. }))
}

impl Polytope {
    /// Convex hull of `points`.
    pub fn from_points(dim: usize, points: Vec<Vec<Rational>>) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::Empty);
        }
        for p in &points {
            check_dim(dim, p.len())?;
        }
        let mut pts = points;
        pts.sort();
        pts.dedup();
        let mut keep = Vec::with_capacity(pts.len());
        for (i, p) in pts.iter().enumerate() {
            let others: Vec<&Vec<Rational>> = pts.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).collect();
            if !in_hull(p, &others)? {
                keep.push(p.clone());
            }
        }
        Ok(Polytope { dim, vertices: keep })
    }

    pub fn point(p: Vec<Rational>) -> Self {
        Polytope {
            dim: p.len(),
            vertices: vec![p],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<Rational>] {
        &self.vertices
    }

    /// `h_P(x) = max ⟨x, v⟩` over the vertices.
    pub fn support(&self, x: &[Rational]) -> Result<Rational, GeometryError> {
        check_dim(self.dim, x.len())?;
        Ok(self.vertices.iter().map(|v| dot(x, v)).max().expect("non-empty"))
    }

    /// Membership by a convex-combination LP.
    pub fn contains(&self, x: &[Rational]) -> Result<bool, GeometryError> {
        check_dim(self.dim, x.len())?;
        let refs: Vec<&Vec<Rational>> = self.vertices.iter().collect();
        in_hull(x, &refs)
    }

    pub fn translate(&self, t: &[Rational]) -> Result<Self, GeometryError> {
        check_dim(self.dim, t.len())?;
        let mut vertices: Vec<Vec<Rational>> = self.vertices.iter().map(|v| linalg::add(v, t)).collect();
        vertices.sort();
        Ok(Polytope { dim: self.dim, vertices })
    }

    /// Basis (in reduced echelon form) of the direction space of the affine
    /// hull.
    fn directions(&self) -> Vec<Vec<Rational>> {
        let v0 = &self.vertices[0];
        let diffs: Vec<Vec<Rational>> = self.vertices[1..].iter().map(|v| sub(v, v0)).collect();
        let (r, pivots) = rref(&diffs);
        r.into_iter().take(pivots.len()).collect()
    }

    /// Dimension of the affine hull.
    pub fn affine_dim(&self) -> usize {
        self.directions().len()
    }

    fn check_cap(&self) -> Result<(), GeometryError> {
        if self.dim > MAX_EXACT_DIM {
            return Err(GeometryError::DimensionCap {
                dim: self.dim,
                cap: MAX_EXACT_DIM,
            });
        }
        Ok(())
    }

    /// Facets by exhaustive search: every set of `r` vertices (`r` the
    /// affine dimension) spanning a hyperplane of the affine hull is tested
    /// for having all vertices on one side.
    pub fn facets(&self) -> Result<Vec<Facet>, GeometryError> {
        self.check_cap()?;
        let basis = self.directions();
        let r = basis.len();
        if r == 0 {
            return Ok(Vec::new());
        }
        let mut seen: Vec<Vec<Rational>> = Vec::new();
        let mut out = Vec::new();
        for subset in combinations(self.vertices.len(), r) {
            let u0 = &self.vertices[subset[0]];
            let m: Vec<Vec<Rational>> = subset[1..]
                .iter()
                .map(|&k| {
                    let d = sub(&self.vertices[k], u0);
                    basis.iter().map(|b| dot(b, &d)).collect()
                })
                .collect();
            let ns = nullspace(&m, r);
            if ns.len() != 1 {
                continue;
            }
            let mut normal = vec![Rational::zero(); self.dim];
            for (c, b) in ns[0].iter().zip(&basis) {
                for (n, bv) in normal.iter_mut().zip(b) {
                    *n += c * bv;
                }
            }
            let offset = dot(&normal, u0);
            let vals: Vec<Rational> = self.vertices.iter().map(|v| dot(&normal, v)).collect();
            let below = vals.iter().all(|v| *v <= offset);
            let above = vals.iter().all(|v| *v >= offset);
            if !below && !above {
                continue;
            }
            let (normal, offset) = if below { (normal, offset) } else { (normal.iter().map(|x| -x).collect(), -offset) };
            let mut key = normal.clone();
            key.push(offset.clone());
            let key = normalized(&key);
            if seen.contains(&key) {
                continue;
            }
            seen.push(key);
            let vertices = self
                .vertices
                .iter()
                .enumerate()
                .filter(|(_, v)| dot(&normal, v) == offset)
                .map(|(i, _)| i)
                .collect();
            out.push(Facet {
                halfspace: HalfSpace { normal, offset },
                vertices,
            });
        }
        Ok(out)
    }

    /// Equations of the affine hull together with the facet inequalities.
    pub fn h_rep(&self) -> Result<HRep, GeometryError> {
        self.check_cap()?;
        let basis = self.directions();
        let v0 = &self.vertices[0];
        let equalities = nullspace(&basis, self.dim)
            .into_iter()
            .map(|n| {
                let offset = dot(&n, v0);
                HalfSpace { normal: n, offset }
            })
            .collect();
        let inequalities = self.facets()?.into_iter().map(|f| f.halfspace).collect();
        Ok(HRep {
            equalities,
            inequalities,
        })
    }

    /// Triangulation into simplices of the affine dimension, by pulling the
    /// first vertex.
    pub fn triangulate(&self) -> Result<Vec<Vec<Vec<Rational>>>, GeometryError> {
        self.check_cap()?;
        if self.vertices.len() == 1 {
            return Ok(vec![self.vertices.clone()]);
        }
        let apex = &self.vertices[0];
        let mut out = Vec::new();
        for f in self.facets()? {
            if f.vertices.contains(&0) {
                continue;
            }
            let face = Polytope {
                dim: self.dim,
                vertices: f.vertices.iter().map(|&i| self.vertices[i].clone()).collect(),
            };
            for mut simplex in face.triangulate()? {
                simplex.insert(0, apex.clone());
                out.push(simplex);
            }
        }
        Ok(out)
    }

    /// `dim`-dimensional volume (zero unless full-dimensional).
    pub fn volume(&self) -> Result<Rational, GeometryError> {
        self.check_cap()?;
        if self.affine_dim() < self.dim {
            return Ok(Rational::zero());
        }
        let fact: i64 = (1..=self.dim as i64).product();
        let mut total = Rational::zero();
        for s in self.triangulate()? {
            let m: Vec<Vec<Rational>> = s[1..].iter().map(|v| sub(v, &s[0])).collect();
            total += det(&m).abs();
        }
        Ok(total / Rational::from(fact))
    }
}

/// `P + Q`.
pub fn minkowski_sum(p: &Polytope, q: &Polytope) -> Result<Polytope, GeometryError> {
    check_dim(p.dim, q.dim)?;
    let pts = p
        .vertices
        .iter()
        .flat_map(|a| q.vertices.iter().map(move |b| linalg::add(a, b)))
        .collect();
    Polytope::from_points(p.dim, pts)
}

/// `P * Q = conv(P ∪ Q)`.
pub fn join(p: &Polytope, q: &Polytope) -> Result<Polytope, GeometryError> {
    check_dim(p.dim, q.dim)?;
    let pts = p.vertices.iter().chain(&q.vertices).cloned().collect();
    Polytope::from_points(p.dim, pts)
}

/// `P ∩ Q`, or `None` if empty.
///
/// Both facet descriptions are combined and vertices are recovered by
/// solving every square subsystem and keeping the feasible solutions.
pub fn intersect(p: &Polytope, q: &Polytope) -> Result<Option<Polytope>, GeometryError> {
    check_dim(p.dim, q.dim)?;
    p.check_cap()?;
    let hp = p.h_rep()?;
    let hq = q.h_rep()?;
    let d = p.dim;
    let equalities: Vec<HalfSpace> = hp.equalities.into_iter().chain(hq.equalities).collect();
    let inequalities: Vec<HalfSpace> = hp.inequalities.into_iter().chain(hq.inequalities).collect();
    let all = HRep {
        equalities: equalities.clone(),
        inequalities: inequalities.clone(),
    };
    let eq_rows: Vec<Vec<Rational>> = equalities.iter().map(|h| h.normal.clone()).collect();
    let e = linalg::rank(&eq_rows);
    if e > d {
        return Ok(None);
    }
    let need = d - e;
    let mut points = Vec::new();
    if need > inequalities.len() {
        return Ok(None);
    }
    for subset in combinations(inequalities.len(), need) {
        let mut rows = eq_rows.clone();
        let mut rhs: Vec<Rational> = equalities.iter().map(|h| h.offset.clone()).collect();
        for &i in &subset {
            rows.push(inequalities[i].normal.clone());
            rhs.push(inequalities[i].offset.clone());
        }
        if let Some(x) = linalg::solve(&rows, &rhs) {
            if all.contains(&x) {
                points.push(x);
            }
        }
    }
    if points.is_empty() {
        return Ok(None);
    }
    Polytope::from_points(d, points).map(Some)
}

/// Whether `f` is a face of `p`: its vertices are vertices of `p` and some
/// linear functional is maximized over `p` exactly on them.
pub fn is_face(f: &Polytope, p: &Polytope) -> Result<bool, GeometryError> {
    check_dim(p.dim, f.dim)?;
    if !f.vertices.iter().all(|v| p.vertices.contains(v)) {
        return Ok(false);
    }
    let rest: Vec<&Vec<Rational>> = p.vertices.iter().filter(|v| !f.vertices.contains(v)).collect();
    if rest.is_empty() {
        return Ok(true);
    }
    // unknowns (c, δ): c·v = δ on f, c·v ≤ δ − 1 elsewhere
    let n = p.dim + 1;
    let row = |v: &Vec<Rational>, sign: i64| -> Vec<Rational> {
        let s = Rational::from(sign);
        let mut r: Vec<Rational> = v.iter().map(|x| x * &s).collect();
        r.push(-s);
        r
    };
    let mut cs = Vec::new();
    for v in &f.vertices {
        cs.push(Constraint::geq(row(v, 1), Rational::zero()));
        cs.push(Constraint::geq(row(v, -1), Rational::zero()));
    }
    for v in rest {
        cs.push(Constraint::geq(row(v, -1), Rational::one()));
    }
    Ok(lp_feasible(n, &cs)?.is_some())
}

/// Index subsets of size `k` of `0..n`, in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qvec};

    fn poly(pts: &[&[i64]]) -> Polytope {
        Polytope::from_points(pts[0].len(), pts.iter().map(|p| qvec(p)).collect()).unwrap()
    }

    #[test]
    fn hull_drops_interior_points() {
        let sq = poly(&[&[-1, -1], &[1, -1], &[-1, 1], &[1, 1], &[0, 0], &[1, 0]]);
        assert_eq!(sq.vertices().len(), 4);
        assert_eq!(sq.support(&qvec(&[1, 2])).unwrap(), Rational::from(3));
        assert!(sq.contains(&[q(1, 2), q(-1, 3)]).unwrap());
        assert!(!sq.contains(&qvec(&[2, 0])).unwrap());
    }

    #[test]
    fn sums_and_joins() {
        let a = poly(&[&[0, 0], &[1, 0]]);
        let b = poly(&[&[0, 0], &[0, 1]]);
        assert_eq!(minkowski_sum(&a, &b).unwrap(), poly(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]));
        let e1 = poly(&[&[1, 0]]);
        let e2 = poly(&[&[0, 1]]);
        assert_eq!(join(&e1, &e2).unwrap().vertices().len(), 2);
        assert_eq!(join(&a, &a).unwrap(), a);
        let rh = minkowski_sum(&poly(&[&[0, 0], &[1, 1]]), &poly(&[&[0, 0], &[1, -1]])).unwrap();
        assert_eq!(rh.vertices().len(), 4);
    }

    #[test]
    fn segment_intersections() {
        let a = poly(&[&[0], &[2]]);
        let b = poly(&[&[1], &[3]]);
        assert_eq!(intersect(&a, &b).unwrap().unwrap(), poly(&[&[1], &[2]]));
        let c = poly(&[&[5], &[6]]);
        assert_eq!(intersect(&a, &c).unwrap(), None);
    }

    #[test]
    fn facets_of_square_and_triangle_in_space() {
        let sq = poly(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        assert_eq!(sq.facets().unwrap().len(), 4);
        let tri = poly(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let h = tri.h_rep().unwrap();
        assert_eq!(h.equalities.len(), 1);
        assert_eq!(h.inequalities.len(), 3);
        assert!(h.contains(&[q(1, 3), q(1, 3), q(1, 3)]));
        assert!(!h.contains(&qvec(&[1, 1, -1])));
    }

    #[test]
    fn volumes() {
        let cube = poly(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, 0], &[1, 0, 1], &[0, 1, 1], &[1, 1, 1]]);
        assert_eq!(cube.volume().unwrap(), Rational::one());
        let simplex = poly(&[&[0, 0, 0], &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        assert_eq!(simplex.volume().unwrap(), q(1, 6));
        assert_eq!(poly(&[&[0, 0, 0], &[1, 1, 1]]).volume().unwrap(), Rational::zero());
    }

    #[test]
    fn faces() {
        let sq = poly(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        assert!(is_face(&poly(&[&[0, 0], &[1, 0]]), &sq).unwrap());
        assert!(!is_face(&poly(&[&[0, 0], &[1, 1]]), &sq).unwrap());
        assert!(is_face(&sq, &sq).unwrap());
    }

    #[test]
    fn combination_counts() {
        assert_eq!(combinations(5, 2).len(), 10);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }
}
