use crate::geometry::{intersect, join, GeometryError, HRep, Polytope, PolytopeExpr};
use crate::linalg;
use crate::rational::Rational;
use crate::sample::RationalSampler;

/// Largest number of pieces for the full additivity check (it visits all
/// `2^m − 1` subsets).
pub const MAX_PIECES: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Piece {
    pub name: String,
    pub polytope: Polytope,
    /// Sum/join expression evaluating to `polytope`, when known.
    pub certificate: Option<PolytopeExpr>,
}

/// A polytope `X` together with pieces whose union should be `X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubdivisionComplex {
    pub ambient: Polytope,
    pub pieces: Vec<Piece>,
}

impl SubdivisionComplex {
    pub fn new(ambient: Polytope, pieces: Vec<Piece>) -> Result<Self, GeometryError> {
        for p in &pieces {
            if p.polytope.dim() != ambient.dim() {
                return Err(GeometryError::DimensionMismatch {
                    expected: ambient.dim(),
                    found: p.polytope.dim(),
                });
            }
        }
        Ok(SubdivisionComplex { ambient, pieces })
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }
}

/// Outcome of a support-function identity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityReport {
    pub passed: bool,
    pub directions_checked: usize,
    /// First failing direction with the two sides of the identity there.
    pub failure: Option<(Vec<Rational>, Rational, Rational)>,
}

fn check_identity<F>(dim: usize, directions: usize, seed: u64, sides: F) -> Result<IdentityReport, GeometryError>
where
    F: Fn(&[Rational]) -> Result<(Rational, Rational), GeometryError>,
{
    let mut sampler = RationalSampler::new(seed);
    for i in 0..directions {
        let x = sampler.vector(dim);
        let (lhs, rhs) = sides(&x)?;
        if lhs != rhs {
            return Ok(IdentityReport {
                passed: false,
                directions_checked: i + 1,
                failure: Some((x, lhs, rhs)),
            });
        }
    }
    Ok(IdentityReport {
        passed: true,
        directions_checked: directions,
        failure: None,
    })
}

/// A random point of `p`: a convex combination of its vertices with
/// random positive weights.
pub fn random_point(p: &Polytope, sampler: &mut RationalSampler) -> Vec<Rational> {
    let weights: Vec<Rational> = p.vertices().iter().map(|_| Rational::from(sampler.int_in(1, 1000))).collect();
    let total: Rational = weights.iter().cloned().sum();
    let mut x = vec![Rational::zero(); p.dim()];
    for (v, w) in p.vertices().iter().zip(&weights) {
        x = linalg::add(&x, &linalg::scale(v, &(w / &total)));
    }
    x
}

fn hreps(pieces: &[&Polytope]) -> Result<Vec<HRep>, GeometryError> {
    pieces.iter().map(|p| p.h_rep()).collect()
}

/// Checks `h_{P∪Q} + h_{P∩Q} = h_P + h_Q` on random directions.
///
/// `P ∪ Q` must be convex; this is tested on `samples` random points of
/// `conv(P ∪ Q)`, each of which must lie in `P` or `Q`.
pub fn check_valuation(
    p: &Polytope,
    q: &Polytope,
    directions: usize,
    seed: u64,
) -> Result<IdentityReport, GeometryError> {
    let union = join(p, q)?;
    let inter = intersect(p, q)?.ok_or(GeometryError::EmptyIntersection {
        subset: vec!["P".into(), "Q".into()],
    })?;
    let hr = hreps(&[p, q])?;
    let mut sampler = RationalSampler::new(seed ^ 0x5eed);
    for _ in 0..200 {
        let x = random_point(&union, &mut sampler);
        if !hr.iter().any(|h| h.contains(&x)) {
            return Err(GeometryError::NotConvexUnion { witness: x });
        }
    }
    check_identity(p.dim(), directions, seed, |x| {
        Ok((union.support(x)? + inter.support(x)?, p.support(x)? + q.support(x)?))
    })
}

/// All non-empty intersections `Q_S`, in order of the bit mask `S`.
pub fn subset_intersections(c: &SubdivisionComplex) -> Result<Vec<(usize, Polytope)>, GeometryError> {
    let m = c.pieces.len();
    if m == 0 {
        return Err(GeometryError::Empty);
    }
    if m > MAX_PIECES {
        return Err(GeometryError::TooManyPieces { m, cap: MAX_PIECES });
    }
    let mut out: Vec<(usize, Polytope)> = Vec::with_capacity((1 << m) - 1);
    for mask in 1usize..(1 << m) {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << low);
        let value = if rest == 0 {
            Some(c.pieces[low].polytope.clone())
        } else {
            let prev = &out.iter().find(|(s, _)| *s == rest).expect("smaller masks first").1;
            intersect(prev, &c.pieces[low].polytope)?
        };
        match value {
            Some(v) => out.push((mask, v)),
            None => {
                let names = (0..m).filter(|i| mask >> i & 1 == 1).map(|i| c.pieces[i].name.clone()).collect();
                return Err(GeometryError::EmptyIntersection { subset: names });
            }
        }
    }
    Ok(out)
}

/// Checks `h_X + Σ_{|S| even} h_{Q_S} = Σ_{|S| odd} h_{Q_S}` over all
/// non-empty `S ⊆ [m]` on random directions. Any empty `Q_S` is an error.
pub fn check_full_additivity(
    c: &SubdivisionComplex,
    directions: usize,
    seed: u64,
) -> Result<IdentityReport, GeometryError> {
    let qs = subset_intersections(c)?;
    check_identity(c.dim(), directions, seed, |x| {
        let mut lhs = c.ambient.support(x)?;
        let mut rhs = Rational::zero();
        for (mask, q) in &qs {
            let h = q.support(x)?;
            if mask.count_ones() % 2 == 0 {
                lhs += h;
            } else {
                rhs += h;
            }
        }
        Ok((lhs, rhs))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverReport {
    pub pieces_inside: bool,
    pub samples: usize,
    /// A sampled point of the ambient polytope in no piece.
    pub uncovered: Option<Vec<Rational>>,
}

impl CoverReport {
    pub fn passed(&self) -> bool {
        self.pieces_inside && self.uncovered.is_none()
    }
}

/// Checks that every piece lies in `X` and that random points of `X` lie in
/// some piece.
pub fn check_cover(c: &SubdivisionComplex, samples: usize, seed: u64) -> Result<CoverReport, GeometryError> {
    let amb = c.ambient.h_rep()?;
    let pieces_inside = c
        .pieces
        .iter()
        .all(|p| p.polytope.vertices().iter().all(|v| amb.contains(v)));
    let refs: Vec<&Polytope> = c.pieces.iter().map(|p| &p.polytope).collect();
    let hr = hreps(&refs)?;
    let mut sampler = RationalSampler::new(seed);
    for _ in 0..samples {
        let x = random_point(&c.ambient, &mut sampler);
        if !hr.iter().any(|h| h.contains(&x)) {
            return Ok(CoverReport {
                pieces_inside,
                samples,
                uncovered: Some(x),
            });
        }
    }
    Ok(CoverReport {
        pieces_inside,
        samples,
        uncovered: None,
    })
}

fn r(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| Rational::from(x)).collect()
}

/// The vertices `x₁ = (−1,−1,−1)`, `x₂ = (1,1,−1)`, `x₃ = (−1,1,1)`,
/// `x₄ = (1,−1,1)` of the regular tetrahedron.
pub fn tetrahedron_vertices() -> [Vec<Rational>; 4] {
    [r(&[-1, -1, -1]), r(&[1, 1, -1]), r(&[-1, 1, 1]), r(&[1, -1, 1])]
}

/// Midpoint `x_ij` (1-based indices).
pub fn midpoint(i: usize, j: usize) -> Vec<Rational> {
    let x = tetrahedron_vertices();
    let half = Rational::new(1, 2);
    linalg::scale(&linalg::add(&x[i - 1], &x[j - 1]), &half)
}

/// Apex and rhombus base `b₀, b₁, b₂, b₃` (in cyclic order, with
/// `b₂ = b₁ + b₃ − b₀`) of the four pyramids, as 1-based vertex labels;
/// `(i, i)` is `x_i`, otherwise the midpoint `x_ij`.
const PYRAMIDS: [((usize, usize), [(usize, usize); 4]); 4] = [
    ((1, 2), [(1, 1), (1, 4), (3, 4), (1, 3)]),
    ((1, 2), [(2, 2), (2, 3), (3, 4), (2, 4)]),
    ((3, 4), [(3, 3), (1, 3), (1, 2), (2, 3)]),
    ((3, 4), [(4, 4), (1, 4), (1, 2), (2, 4)]),
];

fn label(l: (usize, usize)) -> Vec<Rational> {
    if l.0 == l.1 {
        tetrahedron_vertices()[l.0 - 1].clone()
    } else {
        midpoint(l.0, l.1)
    }
}

fn label_name(l: (usize, usize)) -> String {
    if l.0 == l.1 {
        format!("x{}", l.0)
    } else {
        format!("x{}{}", l.0, l.1)
    }
}

/// The rhombus with corners `b₀, b₁, b₂, b₃` as `(b₀ * b₁) + (0 * (b₃ − b₀))`.
pub fn rhombus_certificate(b0: &[Rational], b1: &[Rational], b3: &[Rational]) -> PolytopeExpr {
    let zero = vec![Rational::zero(); b0.len()];
    PolytopeExpr::sum(
        PolytopeExpr::join(PolytopeExpr::point(b0.to_vec()), PolytopeExpr::point(b1.to_vec())),
        PolytopeExpr::join(PolytopeExpr::point(zero), PolytopeExpr::point(linalg::sub(b3, b0))),
    )
}

/// The tetrahedron `conv{x₁,…,x₄}` cut by the planes `x = 0` and `y = 0`
/// into four rhombic pyramids, each with certificate `apex * rhombus`.
pub fn build_simplex3_subdivision() -> SubdivisionComplex {
    let ambient = Polytope::from_points(3, tetrahedron_vertices().to_vec()).expect("tetrahedron");
    let pieces = PYRAMIDS
        .iter()
        .enumerate()
        .map(|(i, (apex, base))| {
            let pts: Vec<Vec<Rational>> = base.iter().map(|&l| label(l)).collect();
            let z = rhombus_certificate(&pts[0], &pts[1], &pts[3]);
            let cert = PolytopeExpr::join(PolytopeExpr::point(label(*apex)), z);
            let mut all = pts.clone();
            all.push(label(*apex));
            let names: Vec<String> = base.iter().map(|&l| label_name(l)).collect();
            Piece {
                name: format!("Q{} apex {} base {}", i + 1, label_name(*apex), names.join(",")),
                polytope: Polytope::from_points(3, all).expect("pyramid"),
                certificate: Some(cert),
            }
        })
        .collect();
    SubdivisionComplex { ambient, pieces }
}

fn lift_point(p: &[Rational]) -> Vec<Rational> {
    let mut v = p.to_vec();
    v.push(Rational::zero());
    v
}

fn lift_expr(e: &PolytopeExpr) -> PolytopeExpr {
    match e {
        PolytopeExpr::Point(p) => PolytopeExpr::Point(lift_point(p)),
        PolytopeExpr::Sum(a) => PolytopeExpr::Sum(a.iter().map(lift_expr).collect()),
        PolytopeExpr::Join(a) => PolytopeExpr::Join(a.iter().map(lift_expr).collect()),
    }
}

/// The new vertex used by [`lift_to_simplex4`].
pub fn lift_apex() -> Vec<Rational> {
    r(&[0, 0, 0, 1])
}

/// Embeds a subdivided 3-simplex as the face `x₄ = 0` of a 4-simplex and
/// joins every piece with the new vertex `x₅ = (0,0,0,1)`. A certificate
/// `p * Z` becomes `(x₅ * p) * Z`.
pub fn lift_to_simplex4(c: &SubdivisionComplex) -> Result<SubdivisionComplex, GeometryError> {
    if c.dim() != 3 || c.ambient.vertices().len() != 4 || c.ambient.affine_dim() != 3 {
        return Err(GeometryError::EmbeddingMismatch);
    }
    let apex = lift_apex();
    let lift_poly = |p: &Polytope| -> Result<Polytope, GeometryError> {
        let mut pts: Vec<Vec<Rational>> = p.vertices().iter().map(|v| lift_point(v)).collect();
        pts.push(apex.clone());
        Polytope::from_points(4, pts)
    };
    let ambient = lift_poly(&c.ambient)?;
    let x5 = PolytopeExpr::point(apex.clone());
    let pieces = c
        .pieces
        .iter()
        .map(|p| {
            let certificate = p.certificate.as_ref().map(|cert| match cert {
                PolytopeExpr::Join(args) if args.len() == 2 => PolytopeExpr::join(
                    PolytopeExpr::join(x5.clone(), lift_expr(&args[0])),
                    lift_expr(&args[1]),
                ),
                other => PolytopeExpr::join(x5.clone(), lift_expr(other)),
            });
            Ok(Piece {
                name: format!("x5 * {}", p.name),
                polytope: lift_poly(&p.polytope)?,
                certificate,
            })
        })
        .collect::<Result<Vec<_>, GeometryError>>()?;
    Ok(SubdivisionComplex { ambient, pieces })
}

/// Newton polytope of `max_i ⟨c_i, x⟩`: the hull of the coefficient
/// vectors.
pub fn newton_polytope(terms: &[Vec<Rational>]) -> Result<Polytope, GeometryError> {
    let dim = terms.first().ok_or(GeometryError::Empty)?.len();
    Polytope::from_points(dim, terms.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qvec;

    fn seg(a: i64, b: i64) -> Polytope {
        Polytope::from_points(1, vec![qvec(&[a]), qvec(&[b])]).unwrap()
    }

    #[test]
    fn first_pyramid_matches_table() {
        let c = build_simplex3_subdivision();
        let mut expected = vec![qvec(&[0, 0, -1]), qvec(&[-1, -1, -1]), qvec(&[0, -1, 0]), qvec(&[0, 0, 1]), qvec(&[-1, 0, 0])];
        expected.sort();
        assert_eq!(c.pieces[0].polytope.vertices(), &expected[..]);
        for p in &c.pieces {
            let cert = p.certificate.as_ref().unwrap();
            assert_eq!(cert.eval().unwrap(), p.polytope);
            assert_eq!(cert.depth(), 2);
        }
    }

    #[test]
    fn segment_valuation() {
        let r = check_valuation(&seg(0, 1), &seg(1, 2), 50, 3).unwrap();
        assert!(r.passed);
        assert!(check_valuation(&seg(0, 1), &seg(0, 1), 20, 3).unwrap().passed);
        assert!(matches!(
            check_valuation(&seg(0, 1), &seg(2, 3), 5, 3),
            Err(GeometryError::EmptyIntersection { .. })
        ));
    }

    #[test]
    fn segment_cover_additivity() {
        let c = SubdivisionComplex::new(
            seg(0, 2),
            vec![
                Piece { name: "a".into(), polytope: seg(0, 1), certificate: None },
                Piece { name: "b".into(), polytope: seg(1, 2), certificate: None },
            ],
        )
        .unwrap();
        assert!(check_full_additivity(&c, 30, 1).unwrap().passed);
        assert!(check_cover(&c, 100, 1).unwrap().passed());
    }

    #[test]
    fn lift_shapes() {
        let l = lift_to_simplex4(&build_simplex3_subdivision()).unwrap();
        assert_eq!(l.pieces.len(), 4);
        for p in &l.pieces {
            assert_eq!(p.polytope.vertices().len(), 6);
            let cert = p.certificate.as_ref().unwrap();
            assert_eq!(cert.depth(), 2);
            assert_eq!(cert.eval().unwrap(), p.polytope);
        }
        let flat = SubdivisionComplex::new(seg(0, 1), vec![]).unwrap();
        assert!(matches!(lift_to_simplex4(&flat), Err(GeometryError::EmbeddingMismatch)));
    }
}
