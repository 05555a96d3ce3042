use dpsod::intersection::rewrite;
use dpsod::lattice::rational_rank;
use dpsod::quiver::{double_burban, path_basis, Dimension, Quiver};
use dpsod::sod::{Ambient, Provenance};
use dpsod::wps::point;
use dpsod::{
    build_nodal_hypersurface, defect, rational_nullspace, smith_normal_form, Basis, BlowupGeometry, Decomposition,
    DivisorClass, FactStore, IntMatrix, SodNode, WeightedSpace,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matrix(max_dim: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-6i64..=6, c), r))
}

fn det(m: &[Vec<BigInt>]) -> BigInt {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    (0..m.len())
        .map(|j| {
            let minor: Vec<Vec<BigInt>> = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let s = if j % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            s * &m[0][j] * det(&minor)
        })
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (0..n)
        .flat_map(|first| {
            subsets(n, k - 1)
                .into_iter()
                .filter(move |rest| rest.first().is_none_or(|&r| r > first))
                .map(move |mut rest| {
                    rest.insert(0, first);
                    rest
                })
        })
        .collect()
}

/// gcd of all k×k minors.
fn minor_gcd(m: &[Vec<i64>], k: usize) -> BigInt {
    let (r, c) = (m.len(), m[0].len());
    let mut g = BigInt::zero();
    for rows in subsets(r, k) {
        for cols in subsets(c, k) {
            let sub: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|&i| cols.iter().map(|&j| BigInt::from(m[i][j])).collect())
                .collect();
            g = g.gcd(&det(&sub));
        }
    }
    g
}

/// A unimodular matrix as a product of elementary row operations.
fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut u = IntMatrix::identity(n);
    for &(i, j, k) in ops {
        let (i, j) = (i % n, j % n);
        if i == j {
            continue;
        }
        for c in 0..n {
            let add = &u[(j, c)] * BigInt::from(k);
            u[(i, c)] += add;
        }
    }
    u
}

fn class() -> impl Strategy<Value = DivisorClass> {
    (-5i64..=5, -5i64..=5).prop_map(|(a, b)| DivisorClass::he(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn smith_diagonal_divides_and_matches_minors(m in matrix(3)) {
        let snf = smith_normal_form(&IntMatrix::from_rows(&m));
        let diag = &snf.diagonal;
        for w in diag.windows(2) {
            prop_assert!(w[0].is_positive());
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        let mut prefix = BigInt::one();
        for k in 1..=m.len().min(m[0].len()) {
            let oracle = minor_gcd(&m, k);
            if k <= snf.rank {
                prefix *= &diag[k - 1];
                prop_assert_eq!(&prefix, &oracle);
            } else {
                prop_assert!(oracle.is_zero());
            }
        }
    }

    #[test]
    fn smith_diagonal_product_is_the_determinant(n in 5usize..=7, seed in prop::collection::vec(-20i64..=20, 49)) {
        let m: Vec<Vec<i64>> = (0..n).map(|i| seed[i * n..i * n + n].to_vec()).collect();
        let snf = smith_normal_form(&IntMatrix::from_rows(&m));
        let big: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        let prod: BigInt = snf.diagonal.iter().product();
        prop_assert_eq!(prod, det(&big).abs());
    }

    #[test]
    fn smith_form_is_unimodular_invariant(
        m in matrix(6),
        left in prop::collection::vec((0usize..6, 0usize..6, -3i64..=3), 0..8),
        right in prop::collection::vec((0usize..6, 0usize..6, -3i64..=3), 0..8),
    ) {
        let a = IntMatrix::from_rows(&m);
        let u = unimodular(a.rows(), &left);
        let v = unimodular(a.cols(), &right);
        let b = u.mul(&a).mul(&v);
        prop_assert_eq!(smith_normal_form(&a), smith_normal_form(&b));
    }

    #[test]
    fn rank_plus_nullity(m in matrix(5)) {
        let a = IntMatrix::from_rows(&m);
        let kernel = rational_nullspace(&a);
        prop_assert_eq!(a.rank() + kernel.len(), a.cols());
        for v in &kernel {
            for i in 0..a.rows() {
                let dot: BigRational = a.row(i).iter().zip(v).map(|(x, y)| BigRational::from_integer(x.clone()) * y).sum();
                prop_assert!(dot.is_zero());
            }
        }
        let rows: Vec<Vec<BigRational>> = (0..a.rows())
            .map(|i| a.row(i).iter().map(|x| BigRational::from_integer(x.clone())).collect())
            .collect();
        prop_assert_eq!(rational_rank(&rows, a.cols()), smith_normal_form(&a).rank);
    }

    #[test]
    fn intersection_form_is_symmetric_and_trilinear(d in 4i64..=6, a in class(), b in class(), c in class(), e in class(), k in -3i64..=3) {
        let g = BlowupGeometry::new(d).unwrap();
        let t = |x, y, z| g.triple(x, y, z).unwrap();
        prop_assert_eq!(t(a, b, c), t(b, a, c));
        prop_assert_eq!(t(a, b, c), t(c, b, a));
        prop_assert_eq!(t(a, b, c), t(a, c, b));
        prop_assert_eq!(t(a.plus(e.scaled(k)), b, c), t(a, b, c) + k * t(e, b, c));
    }

    #[test]
    fn basis_rewrites_round_trip(d in 4i64..=5, a in class()) {
        let hd = rewrite(a, Basis::HD, d).unwrap();
        prop_assert_eq!(hd.basis, Basis::HD);
        prop_assert_eq!(rewrite(hd, Basis::HE, d).unwrap(), a);
        let g = BlowupGeometry::new(d).unwrap();
        prop_assert_eq!(g.cube(hd).unwrap(), g.cube(a).unwrap());
    }

    #[test]
    fn vanishing_is_closed_under_twists(d in 4i64..=5, a in class(), b in class(), l in class(), m in class()) {
        prop_assume!(a != b);
        let mut store = FactStore::new(d);
        let dec = Decomposition::new(Ambient::Y(d), vec![SodNode::line(a), SodNode::line(b)]);
        store.record_decomposition(&dec, Provenance::Axiom { source: "test".into() }).unwrap();
        let tw = |x: DivisorClass, t: DivisorClass| SodNode::line(x.plus(t));
        prop_assert!(store.vanishes(&tw(b, l), &tw(a, l)));
        prop_assert!(store.vanishes(&tw(tw(b, l).class().unwrap(), m), &tw(tw(a, l).class().unwrap(), m)));
        prop_assert_eq!(store.vanishes(&tw(b, l.plus(m)), &tw(a, l.plus(m))), true);
        // closure never manufactures the other direction
        prop_assert!(!store.vanishes(&tw(a, l), &tw(b, l)));
    }

    #[test]
    fn quiver_reports_are_relabeling_invariant(perm in Just(vec![0usize, 1, 2]).prop_shuffle(), suffix in "[a-z]{1,3}") {
        let q = double_burban();
        let new_v = |v: &str| format!("v{}", perm[v.parse::<usize>().unwrap() - 1]);
        let mut r = Quiver::new("relabeled");
        let mut vs: Vec<String> = q.vertices.iter().map(|v| new_v(v)).collect();
        vs.sort();
        for v in &vs {
            r = r.vertex(v);
        }
        for a in &q.arrows {
            r = r.arrow(&format!("{}{suffix}", a.name), &new_v(&a.source), &new_v(&a.target));
        }
        for rel in &q.relations {
            let names: Vec<String> = rel.iter().map(|x| format!("{x}{suffix}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            r = r.relation(&refs);
        }
        let (a, b) = (path_basis(&q).unwrap(), path_basis(&r).unwrap());
        prop_assert_eq!(a.dimension, Dimension::Finite(9));
        prop_assert_eq!(a.dimension, b.dimension);
        let (ca, cb) = (a.cartan.unwrap(), b.cartan.unwrap());
        for i in 0..3 {
            for j in 0..3 {
                prop_assert_eq!(ca[i][j], cb[perm[i]][perm[j]]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn defect_is_coordinate_independent(
        nodes in 1usize..=3,
        ops in prop::collection::vec((0usize..5, 0usize..5, -2i64..=2), 1..6),
        seed in 0u64..1000,
    ) {
        let space = WeightedSpace::projective(4);
        let pts: Vec<_> = (0..nodes)
            .map(|i| {
                let mut c = [0i64; 5];
                c[i] = 1;
                point(&c)
            })
            .collect();
        let x = build_nodal_hypersurface(&space, 3, &pts, seed).unwrap();
        let u = unimodular(5, &ops);
        let m: Vec<Vec<BigRational>> = (0..5)
            .map(|i| (0..5).map(|j| BigRational::from_integer(u[(i, j)].clone())).collect())
            .collect();
        let y = x.change_coordinates(&m).unwrap();
        prop_assert_eq!(defect(&x).unwrap(), defect(&y).unwrap());
    }
}
