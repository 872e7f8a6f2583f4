use kerneldim::field::{PrimeField, Rational, Rationals, Ring};
use kerneldim::linalg::{det, det_int, mat_mul, rank, rank_int, rank_poly_matrix, ExactMatrix, RankStrategy};
use kerneldim::par::Execution;
use kerneldim::poly::{MultilinearPoly, Shape};
use num_bigint::BigInt;
use proptest::prelude::*;

fn int_matrix(rows: usize, cols: usize, bound: i64) -> impl Strategy<Value = ExactMatrix<i64>> {
    proptest::collection::vec(-bound..=bound, rows * cols).prop_map(move |v| ExactMatrix::new(rows, cols, v).unwrap())
}

/// Products of `n x r` and `r x n` factors, so of rank at most `r`.
fn low_rank(n: usize) -> impl Strategy<Value = (ExactMatrix<i64>, usize)> {
    (0..=n).prop_flat_map(move |r| {
        (int_matrix(n, r.max(1), 3), int_matrix(r.max(1), n, 3)).prop_map(move |(a, b)| {
            let a = if r == 0 { ExactMatrix::filled(n, 1, 0) } else { a };
            let m = mat_mul(&Rationals, &a.map(|&v| Rational::from_integer(v.into())), &b.map(|&v| Rational::from_integer(v.into())))
                .unwrap()
                .map(|q| i64::try_from(q.to_integer()).unwrap());
            (m, r)
        })
    })
}

fn to_q(m: &ExactMatrix<i64>) -> ExactMatrix<Rational> {
    m.map(|&v| Rational::from_integer(v.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn determinant_is_multiplicative(a in int_matrix(4, 4, 9), b in int_matrix(4, 4, 9)) {
        let (qa, qb) = (to_q(&a), to_q(&b));
        let ab = mat_mul(&Rationals, &qa, &qb).unwrap();
        prop_assert_eq!(det(&Rationals, &ab).unwrap(), det(&Rationals, &qa).unwrap() * det(&Rationals, &qb).unwrap());
        let f = PrimeField::default();
        let (pa, pb) = (a.map(|&v| f.from_i64(v)), b.map(|&v| f.from_i64(v)));
        let pab = mat_mul(&f, &pa, &pb).unwrap();
        prop_assert_eq!(det(&f, &pab).unwrap(), f.mul(&det(&f, &pa).unwrap(), &det(&f, &pb).unwrap()));
    }

    #[test]
    fn bareiss_matches_field_determinant(a in int_matrix(5, 5, 20)) {
        let q = det(&Rationals, &to_q(&a)).unwrap();
        let z = det_int(&a.map(|&v| BigInt::from(v))).unwrap();
        prop_assert_eq!(q, Rational::from_integer(z));
    }

    #[test]
    fn rank_agrees_across_fields((m, r) in low_rank(5)) {
        // Entries are tiny, so no minor can vanish modulo 2^61 - 1 without
        // vanishing over Q.
        let f = PrimeField::default();
        let q = rank(&Rationals, &to_q(&m));
        prop_assert!(q <= r);
        prop_assert_eq!(rank_int(&m), q);
        prop_assert_eq!(rank(&f, &m.map(|&v| f.from_i64(v))), q);
    }

    #[test]
    fn rank_mod_small_prime_never_exceeds_rank_over_q(m in int_matrix(4, 6, 10)) {
        let f = PrimeField::new(5).unwrap();
        prop_assert!(rank(&f, &m.map(|&v| f.from_i64(v))) <= rank_int(&m));
        prop_assert_eq!(rank_int(&m), rank_int(&m.transpose()));
    }
}

#[test]
fn singular_and_empty_cases() {
    let z = ExactMatrix::filled(3, 3, 0i64);
    assert_eq!(rank_int(&z), 0);
    assert_eq!(det_int(&z.map(|&v| BigInt::from(v))).unwrap(), BigInt::from(0));
    let id = ExactMatrix::from_fn(3, 3, |i, j| Rational::from_integer(((i == j) as i64).into()));
    assert_eq!(det(&Rationals, &id).unwrap(), Rational::from_integer(1.into()));
    assert!(det(&Rationals, &ExactMatrix::filled(2, 3, Rational::from_integer(0.into()))).is_err());
}

#[test]
fn exact_and_randomized_polynomial_rank_agree() {
    // [[x10, x11], [x20, x21]] has rank 2; [[x10, x11], [x10, x11]] has rank 1;
    // the generic Vandermonde-like matrix built from products has full rank.
    let shape = Shape::new(2, 2);
    let x = |g, a| MultilinearPoly::var(Rationals, shape, g, a).unwrap();
    let full = ExactMatrix::from_rows(vec![vec![x(1, 0), x(1, 1)], vec![x(2, 0), x(2, 1)]]).unwrap();
    let deficient = ExactMatrix::from_rows(vec![vec![x(1, 0), x(1, 1)], vec![x(1, 0), x(1, 1)]]).unwrap();
    let det_zero = ExactMatrix::from_rows(vec![
        vec![x(1, 0).disjoint_mul(&x(2, 0)).unwrap(), x(1, 0).disjoint_mul(&x(2, 1)).unwrap()],
        vec![x(1, 1).disjoint_mul(&x(2, 0)).unwrap(), x(1, 1).disjoint_mul(&x(2, 1)).unwrap()],
    ])
    .unwrap();
    for (m, expected) in [(&full, 2), (&deficient, 1), (&det_zero, 1)] {
        for strategy in [RankStrategy::Exact, RankStrategy::randomized(3, 11)] {
            for exec in [Execution::Sequential, Execution::Parallel] {
                let est = rank_poly_matrix(m, strategy, exec).unwrap();
                assert_eq!(est.rank, expected, "{strategy:?}");
                assert_eq!(est.exact, strategy == RankStrategy::Exact);
            }
        }
    }
    let bad = RankStrategy::Randomized { trials: 0, seed: 0, prime: 101 };
    assert!(rank_poly_matrix(&full, bad, Execution::Sequential).is_err());
}
