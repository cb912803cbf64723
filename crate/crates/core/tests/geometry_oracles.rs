mod common;

use common::*;
use num_rational::BigRational;
use proptest::prelude::*;
use relu_forge::geometry::subdivision::{midpoint, tetrahedron_vertices};
use relu_forge::geometry::*;
use relu_forge::rational::qvec;
use relu_forge::synth::{term_eval, TermId};
use relu_forge::Rational;

fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    from_big(&a.iter().zip(b).fold(BigRational::from_integer(0.into()), |acc, (x, y)| acc + big(x) * big(y)))
}

/// Support function straight from a point list.
fn support_of(points: &[Vec<Rational>], x: &[Rational]) -> Rational {
    points.iter().map(|p| dot(p, x)).max().unwrap()
}

fn points(dim: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
    prop::collection::vec(prop::collection::vec((-6i64..=6).prop_map(Rational::from), dim), 1..9)
}

fn poly_pair() -> impl Strategy<Value = (Vec<Vec<Rational>>, Vec<Vec<Rational>>, Vec<Vec<Rational>>)> {
    (1usize..=3).prop_flat_map(|d| (points(d), points(d), prop::collection::vec(point(d), 20)))
}

fn sorted(mut v: Vec<Vec<Rational>>) -> Vec<Vec<Rational>> {
    v.sort();
    v.dedup();
    v
}

fn det3(m: [[BigRational; 3]; 3]) -> BigRational {
    m[0][0].clone() * (m[1][1].clone() * m[2][2].clone() - m[1][2].clone() * m[2][1].clone())
        - m[0][1].clone() * (m[1][0].clone() * m[2][2].clone() - m[1][2].clone() * m[2][0].clone())
        + m[0][2].clone() * (m[1][0].clone() * m[2][1].clone() - m[1][1].clone() * m[2][0].clone())
}

fn tet_volume(v: [&Vec<Rational>; 4]) -> Rational {
    let row = |i: usize| -> [BigRational; 3] { [0, 1, 2].map(|k| big(&v[i][k]) - big(&v[0][k])) };
    let d = det3([row(1), row(2), row(3)]);
    from_big(&(if d < BigRational::from_integer(0.into()) { -d } else { d } / BigRational::from_integer(6.into())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn support_additivity((a, b, dirs) in poly_pair()) {
        let d = a[0].len();
        let p = Polytope::from_points(d, a.clone()).unwrap();
        let q = Polytope::from_points(d, b.clone()).unwrap();
        let s = minkowski_sum(&p, &q).unwrap();
        let j = join(&p, &q).unwrap();
        for x in &dirs {
            prop_assert_eq!(p.support(x).unwrap(), support_of(&a, x));
            prop_assert_eq!(s.support(x).unwrap(), support_of(&a, x) + support_of(&b, x));
            prop_assert_eq!(j.support(x).unwrap(), support_of(&a, x).max(support_of(&b, x)));
        }
    }

    #[test]
    fn hull_is_irredundant((a, _b, dirs) in poly_pair()) {
        let d = a[0].len();
        let p = Polytope::from_points(d, a.clone()).unwrap();
        for v in p.vertices() {
            prop_assert!(a.contains(v));
        }
        for (i, v) in p.vertices().iter().enumerate() {
            let rest: Vec<_> = p.vertices().iter().enumerate().filter(|&(k, _)| k != i).map(|(_, w)| w.clone()).collect();
            if rest.is_empty() {
                continue;
            }
            let smaller = Polytope::from_points(d, rest).unwrap();
            prop_assert!(!smaller.contains(v).unwrap());
        }
        for x in &dirs {
            prop_assert_eq!(p.support(x).unwrap(), support_of(&a, x));
        }
    }

    #[test]
    fn facets_round_trip(a in points(3)) {
        let p = Polytope::from_points(3, a).unwrap();
        let h = p.h_rep().unwrap();
        for v in p.vertices() {
            prop_assert!(h.contains(v));
        }
        // facet → vertex: every vertex is tight on enough independent facets
        if p.affine_dim() == 3 {
            let mut recovered = Vec::new();
            let ineq = &h.inequalities;
            for i in 0..ineq.len() {
                for j in i + 1..ineq.len() {
                    for k in j + 1..ineq.len() {
                        let m = [i, j, k].map(|r| [0, 1, 2].map(|c| big(&ineq[r].normal[c])));
                        let dm = det3(m.clone());
                        if dm == BigRational::from_integer(0.into()) {
                            continue;
                        }
                        let rhs = [i, j, k].map(|r| big(&ineq[r].offset));
                        let x: Vec<Rational> = (0..3)
                            .map(|c| {
                                let mut mc = m.clone();
                                for r in 0..3 {
                                    mc[r][c] = rhs[r].clone();
                                }
                                from_big(&(det3(mc) / dm.clone()))
                            })
                            .collect();
                        if ineq.iter().all(|hs| dot(&hs.normal, &x) <= hs.offset) {
                            recovered.push(x);
                        }
                    }
                }
            }
            prop_assert_eq!(sorted(recovered), p.vertices().to_vec());
        }
    }

    #[test]
    fn intersection_contains_only_common_points((a, b, dirs) in poly_pair()) {
        let d = a[0].len();
        let p = Polytope::from_points(d, a).unwrap();
        let q = Polytope::from_points(d, b).unwrap();
        match intersect(&p, &q).unwrap() {
            Some(i) => {
                for v in i.vertices() {
                    prop_assert!(p.contains(v).unwrap() && q.contains(v).unwrap());
                }
                for x in &dirs {
                    let s = i.support(x).unwrap();
                    prop_assert!(s <= p.support(x).unwrap() && s <= q.support(x).unwrap());
                }
            }
            None => {
                for v in p.vertices() {
                    prop_assert!(!q.contains(v).unwrap());
                }
            }
        }
    }
}

fn q3(v: [i64; 3]) -> Vec<Rational> {
    qvec(&v)
}

#[test]
fn simplex3_table() {
    let c = build_simplex3_subdivision();
    let x = tetrahedron_vertices();
    let m = midpoint;
    let table = [
        (m(1, 2), [x[0].clone(), m(1, 4), m(3, 4), m(1, 3)]),
        (m(1, 2), [x[1].clone(), m(2, 3), m(3, 4), m(2, 4)]),
        (m(3, 4), [x[2].clone(), m(1, 3), m(1, 2), m(2, 3)]),
        (m(3, 4), [x[3].clone(), m(1, 4), m(1, 2), m(2, 4)]),
    ];
    assert_eq!(m(1, 2), q3([0, 0, -1]));
    assert_eq!(m(1, 4), q3([0, -1, 0]));
    let mut total = Rational::zero();
    for (piece, (apex, base)) in c.pieces.iter().zip(&table) {
        let mut all = base.to_vec();
        all.push(apex.clone());
        assert_eq!(piece.polytope.vertices(), &sorted(all)[..]);
        // b₀ b₁ b₂ b₃ in cyclic order: split along the diagonal b₀b₂
        let v = tet_volume([apex, &base[0], &base[1], &base[2]]) + tet_volume([apex, &base[0], &base[2], &base[3]]);
        assert_eq!(v, Rational::new(2, 3));
        assert_eq!(piece.polytope.volume().unwrap(), v);
        total += v;
        let rhombus = Polytope::from_points(3, base.to_vec()).unwrap();
        assert_eq!(rhombus.vertices().len(), 4);
        assert_eq!(rhombus.affine_dim(), 2);
        let d4: Vec<Rational> = (0..3).map(|k| &base[1][k] + &base[3][k] - &base[0][k]).collect();
        assert_eq!(d4, base[2]);
    }
    assert_eq!(total, Rational::new(8, 3));
    assert_eq!(tet_volume([&x[0], &x[1], &x[2], &x[3]]), total);
    assert_eq!(c.ambient.volume().unwrap(), total);
    assert!(check_cover(&c, 1000, 5).unwrap().passed());
}

#[test]
fn pyramid_intersections() {
    let c = build_simplex3_subdivision();
    let p = |i: usize| &c.pieces[i].polytope;
    let tri = |pts: Vec<Vec<Rational>>| Polytope::from_points(3, pts).unwrap();
    let i13 = intersect(p(0), p(2)).unwrap().unwrap();
    assert_eq!(i13, tri(vec![midpoint(1, 2), midpoint(3, 4), midpoint(1, 3)]));
    let i14 = intersect(p(0), p(3)).unwrap().unwrap();
    assert_eq!(i14, tri(vec![midpoint(1, 2), midpoint(3, 4), midpoint(1, 4)]));
    let i12 = intersect(p(0), p(1)).unwrap().unwrap();
    assert_eq!(i12, tri(vec![midpoint(1, 2), midpoint(3, 4)]));
    for face in [&i13, &i14, &i12] {
        assert!(is_face(face, p(0)).unwrap());
    }
    let dirs = points_with_ties(3, 50, 2);
    for x in &dirs {
        assert_eq!(i13.support(x).unwrap(), support_of(&[midpoint(1, 2), midpoint(3, 4), midpoint(1, 3)], x));
    }
}

#[test]
fn valuation_instances() {
    let seg = |a: i64, b: i64| Polytope::from_points(1, vec![qvec(&[a]), qvec(&[b])]).unwrap();
    assert!(check_valuation(&seg(0, 1), &seg(1, 2), 200, 1).unwrap().passed);
    assert!(check_valuation(&seg(0, 2), &seg(0, 2), 50, 1).unwrap().passed);
    let c = build_simplex3_subdivision();
    for j in [2, 3] {
        let r = check_valuation(&c.pieces[0].polytope, &c.pieces[j].polytope, 200, 4).unwrap();
        assert!(r.passed && r.directions_checked == 200);
    }
    assert!(matches!(
        check_valuation(&c.pieces[0].polytope, &c.pieces[1].polytope, 10, 4),
        Err(GeometryError::NotConvexUnion { .. })
    ));
}

#[test]
fn full_additivity_and_rejections() {
    let c = build_simplex3_subdivision();
    let r = check_full_additivity(&c, 200, 8).unwrap();
    assert!(r.passed);
    assert_eq!(r.directions_checked, 200);
    // dropping a piece breaks the identity
    let mut partial = c.clone();
    partial.pieces.pop();
    let r = check_full_additivity(&partial, 200, 8).unwrap();
    assert!(!r.passed);
    let (x, lhs, rhs) = r.failure.unwrap();
    assert_ne!(lhs, rhs);
    assert_eq!(x.len(), 3);
    assert!(!check_cover(&partial, 1000, 8).unwrap().passed());

    let seg = |a: i64, b: i64| Piece {
        name: format!("[{a},{b}]"),
        polytope: Polytope::from_points(1, vec![qvec(&[a]), qvec(&[b])]).unwrap(),
        certificate: None,
    };
    let single = SubdivisionComplex::new(seg(0, 2).polytope, vec![seg(0, 2)]).unwrap();
    assert!(check_full_additivity(&single, 20, 1).unwrap().passed);
    let chain = SubdivisionComplex::new(seg(0, 3).polytope, vec![seg(0, 1), seg(1, 2), seg(2, 3)]).unwrap();
    match check_full_additivity(&chain, 20, 1) {
        Err(GeometryError::EmptyIntersection { subset }) => assert_eq!(subset, vec!["[0,1]", "[2,3]"]),
        other => panic!("expected rejection, got {other:?}"),
    }
    let many = SubdivisionComplex::new(seg(0, 1).polytope, (0..6).map(|_| seg(0, 1)).collect()).unwrap();
    assert!(matches!(check_full_additivity(&many, 1, 1), Err(GeometryError::TooManyPieces { m: 6, cap: 5 })));
}

#[test]
fn lifted_subdivision() {
    let l = lift_to_simplex4(&build_simplex3_subdivision()).unwrap();
    assert_eq!(l.pieces.len(), 4);
    let mut all = Vec::new();
    for p in &l.pieces {
        assert_eq!(p.polytope.vertices().len(), 6);
        let (value, depth) = eval_expr(p.certificate.as_ref().unwrap()).unwrap();
        assert_eq!((value, depth), (p.polytope.clone(), 2));
        all.extend(p.polytope.vertices().iter().cloned());
    }
    let corners: Vec<Vec<Rational>> = tetrahedron_vertices()
        .iter()
        .map(|v| v.iter().cloned().chain([Rational::zero()]).collect())
        .chain([qvec(&[0, 0, 0, 1])])
        .collect();
    for x in points_with_ties(4, 100, 3) {
        assert_eq!(support_of(&all, &x), support_of(&corners, &x));
    }
    assert!(check_full_additivity(&l, 200, 2).unwrap().passed);
    assert!(check_cover(&l, 500, 2).unwrap().passed());
}

fn pair_vector(i: usize, j: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); 5];
    v[i] += Rational::one();
    v[j] += Rational::one();
    v
}

fn newton_of(t: TermId) -> Polytope {
    let vs: Vec<_> = t.pair_sums().iter().map(|&(i, j)| pair_vector(i, j)).collect();
    newton_polytope(&vs).unwrap()
}

#[test]
fn newton_polytopes() {
    for n in 1..=5usize {
        let e: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|k| Rational::from((i == k) as i64)).collect()).collect();
        let simplex = newton_polytope(&e).unwrap();
        assert_eq!(simplex.vertices().len(), n);
        assert_eq!(simplex.affine_dim(), n - 1);
        for x in points_with_ties(n, 20, n as u64) {
            assert_eq!(simplex.support(&x).unwrap(), max_of(&x));
        }
    }
    let p1 = newton_of(TermId::P1);
    assert_eq!(p1.vertices().len(), 6);
    assert_eq!(newton_polytope(&[qvec(&[1, 2])]).unwrap().vertices().len(), 1);
    assert!(newton_polytope(&[]).is_err());
    for x in points_with_ties(5, 100, 4) {
        for t in TermId::ALL {
            assert_eq!(newton_of(t).support(&x).unwrap(), term_eval(t, &x).unwrap());
        }
    }
}

/// `y ↦ ½ Σ yᵢ vᵢ` with `vᵢ = (xᵢ, 0)` for `i ≤ 4` and `v₅ = (0,0,0,1)`.
fn bridge(y: &[Rational]) -> Vec<Rational> {
    let x = tetrahedron_vertices();
    let mut v: Vec<Vec<Rational>> = x.iter().map(|p| p.iter().cloned().chain([Rational::zero()]).collect()).collect();
    v.push(qvec(&[0, 0, 0, 1]));
    let half = Rational::new(1, 2);
    (0..4).map(|k| (0..5).map(|i| &y[i] * &v[i][k]).sum::<Rational>() * &half).collect()
}

#[test]
fn newton_polytopes_match_lifted_pieces() {
    let lifted = lift_to_simplex4(&build_simplex3_subdivision()).unwrap();
    let ps = [TermId::P1, TermId::P2, TermId::P3, TermId::P4];
    for (t, piece) in ps.iter().zip(&lifted.pieces) {
        let image: Vec<_> = newton_of(*t).vertices().iter().map(|y| bridge(y)).collect();
        assert_eq!(Polytope::from_points(4, image).unwrap(), piece.polytope, "{t}");
    }
    for t in [TermId::Q, TermId::R13, TermId::R14, TermId::R23, TermId::R24] {
        let small = newton_of(t);
        let host = ps.iter().find(|p| is_face(&small, &newton_of(**p)).unwrap());
        assert!(host.is_some(), "{t} is not a face of any P");
        let host = newton_of(*host.unwrap());
        for x in points_with_ties(5, 30, 6) {
            assert!(small.support(&x).unwrap() <= host.support(&x).unwrap());
        }
    }
    assert!(!is_face(&newton_of(TermId::P1), &newton_of(TermId::P2)).unwrap());
}
