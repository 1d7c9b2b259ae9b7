use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use khwall::atlas::{bundled_table, r_moves};
use khwall::complex::{homology, homology_with, snf_integer, Coefficients, SparseMatrix};
use khwall::khovanov::build_ckh;
use khwall::{jones_unnormalized, kauffman_bracket, parse_pd, KnotDiagram, LaurentPoly};

/// A table diagram pushed through one Reidemeister move per pick, staying
/// under `max_crossings`.
fn walked(entry: usize, picks: &[usize], max_crossings: usize) -> KnotDiagram {
    let table = bundled_table();
    let mut d = table[entry % table.len()].diagram.clone();
    for &p in picks {
        let next: Vec<KnotDiagram> = r_moves(&d)
            .into_iter()
            .filter(|m| m.crossing_count() <= max_crossings)
            .collect();
        if next.is_empty() {
            break;
        }
        d = next[p % next.len()].clone();
    }
    d
}

fn diagram(max_crossings: usize) -> impl Strategy<Value = KnotDiagram> {
    (any::<usize>(), prop::collection::vec(any::<usize>(), 0..3))
        .prop_map(move |(e, picks)| walked(e, &picks, max_crossings))
}

fn poly() -> impl Strategy<Value = LaurentPoly> {
    prop::collection::vec((-6i32..6, -5i64..5), 0..5).prop_map(LaurentPoly::from_terms)
}

fn dense(max: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-4i64..=4, c), r))
}

fn rational_rank(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .map(|row| row.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in 0..a.len() {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] / &a[rank][c];
                for k in 0..cols {
                    let v = &f * &a[rank][k];
                    a[r][k] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn bareiss_det(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pd_round_trip(d in diagram(8)) {
        let again = parse_pd(&d.render_pd()).unwrap();
        prop_assert_eq!(&again, &d);
        prop_assert_eq!(again.writhe(), d.writhe());
    }

    #[test]
    fn canonical_is_idempotent_and_jones_preserving(d in diagram(8)) {
        let c = d.canonical();
        prop_assert_eq!(c.canonical(), c.clone());
        prop_assert_eq!(jones_unnormalized(&c), jones_unnormalized(&d));
    }

    #[test]
    fn cube_edges_change_circle_count_by_one(d in diagram(8), s in any::<u64>(), k in any::<usize>()) {
        let n = d.crossing_count();
        prop_assume!(n > 0);
        let k = k % n;
        let s = (s & ((1u64 << n) - 1)) & !(1u64 << k);
        let a = d.circle_count(s) as i64;
        let b = d.circle_count(s | 1 << k) as i64;
        prop_assert_eq!((a - b).abs(), 1);
    }

    #[test]
    fn reidemeister_neighbors_share_jones(d in diagram(7), pick in any::<usize>()) {
        let moves = r_moves(&d);
        prop_assert!(!moves.is_empty());
        let m = &moves[pick % moves.len()];
        prop_assert_eq!(jones_unnormalized(m), jones_unnormalized(&d));
    }

    #[test]
    fn khovanov_complex_decategorifies(d in diagram(8)) {
        let c = build_ckh(&d).unwrap();
        for (i, j) in c.bidegrees().collect::<Vec<_>>() {
            prop_assert!(c.differential((i + 1, j)).mul(&c.differential((i, j))).is_zero());
        }
        prop_assert_eq!(homology(&c).euler_characteristic(), jones_unnormalized(&d));
    }

    #[test]
    fn mirror_dualizes_mod2_ranks(d in diagram(6)) {
        let h = homology_with(&build_ckh(&d).unwrap(), Coefficients::Z2).mod2_ranks();
        let m = homology_with(&build_ckh(&d.mirror()).unwrap(), Coefficients::Z2).mod2_ranks();
        let flipped: std::collections::BTreeMap<_, _> = h.iter().map(|(&(i, j), &r)| ((-i, -j), r)).collect();
        prop_assert_eq!(flipped, m);
    }

    #[test]
    fn mirror_inverts_q(d in diagram(8)) {
        let n = d.crossing_count() as i32;
        let sign = if n % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(kauffman_bracket(&d.mirror()), kauffman_bracket(&d).inverted().scale_shift(sign, n));
        prop_assert_eq!(jones_unnormalized(&d.mirror()), jones_unnormalized(&d).inverted());
    }
}

proptest! {
    #[test]
    fn laurent_ring_laws(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a - &a), &LaurentPoly::zero());
        prop_assert_eq!((&a * &b).at_one(), a.at_one() * b.at_one());
    }

    #[test]
    fn snf_rank_matches_rational_rank(m in dense(6)) {
        let s = snf_integer(&SparseMatrix::from_dense(&m));
        prop_assert_eq!(s.rank, rational_rank(&m));
        let t = snf_integer(&SparseMatrix::from_dense(&m).transpose());
        prop_assert_eq!(t.rank, s.rank);
        prop_assert_eq!(t.torsion, s.torsion);
    }

    #[test]
    fn snf_factors_multiply_to_determinant(n in 1usize..6, seed in prop::collection::vec(-5i64..=5, 36)) {
        let m: Vec<Vec<i64>> = (0..n).map(|r| seed[r * n..r * n + n].to_vec()).collect();
        let det = bareiss_det(&m).abs();
        let s = snf_integer(&SparseMatrix::from_dense(&m));
        if det.is_zero() {
            prop_assert!(s.rank < n);
        } else {
            prop_assert_eq!(s.rank, n);
            let product = s.torsion.iter().fold(BigInt::one(), |acc, t| acc * t);
            prop_assert_eq!(product, det);
            for w in s.torsion.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
        }
    }
}
