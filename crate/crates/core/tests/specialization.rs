use kerneldim::field::{Rational, Rationals, Ring};
use kerneldim::poly::{Assignment, Monomial};
use kerneldim::par::Execution;
use kerneldim::specialization::{
    block_lj_direct, blocks_via_operator, build_a, cyclic_matrix, gr_of_monomial, mon_of_graph, BlockOperator,
    Exponents,
};
use kerneldim::commutator::operator_matrix;
use kerneldim::linalg::ExactMatrix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn dictionary_round_trip(n in 1usize..6, s in proptest::collection::vec(-4i64..5, 1..6), j in 0usize..6, seed in proptest::collection::vec(0usize..6, 6)) {
        let exps = Exponents::custom(s).unwrap();
        let sources: Vec<usize> = seed.iter().take(exps.k()).map(|&x| x % n).collect();
        let m = Monomial::from_sources(&sources);
        let g = gr_of_monomial(&m, n, &exps, j % n).unwrap();
        prop_assert_eq!(g.edge_count(), exps.k());
        for l in 1..=exps.k() {
            let tar = (sources[l - 1] as i64 + exps.s(l)).rem_euclid(n as i64) as usize;
            prop_assert_eq!(g.target(l), Some(tar));
        }
        prop_assert_eq!(mon_of_graph(&g).unwrap(), m);
    }
}

#[test]
fn partial_monomials_are_rejected() {
    let exps = Exponents::canonical(1).unwrap();
    assert!(gr_of_monomial(&Monomial::var(1, 0), 3, &exps, 0).is_err());
}

/// The general (non-canonical) exponent vectors go through the same graph
/// dictionary; both constructions must agree on them as well.
#[test]
fn direct_blocks_match_the_operator_for_other_exponents() {
    for (n, s) in [(3, vec![1, 2, -1]), (2, vec![1, 1, 1]), (4, vec![0, 1]), (3, vec![2])] {
        let exps = Exponents::custom(s.clone()).unwrap();
        let via_op = blocks_via_operator(n, &exps).unwrap();
        for (j, expected) in via_op.iter().enumerate() {
            let direct = block_lj_direct(n, &exps, j, Execution::Parallel).unwrap();
            assert_eq!(&direct, expected, "n={n} s={s:?} j={j}");
        }
    }
}

#[test]
fn parallel_and_sequential_blocks_agree() {
    let exps = Exponents::canonical(2).unwrap();
    for j in 0..4 {
        let a = block_lj_direct(4, &exps, j, Execution::Sequential).unwrap();
        let b = block_lj_direct(4, &exps, j, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn block_json_round_trip() {
    let exps = Exponents::canonical(2).unwrap();
    let block = block_lj_direct(5, &exps, 1, Execution::Parallel).unwrap();
    assert_eq!(BlockOperator::from_json(&block.to_json()).unwrap(), block);
}

#[test]
fn specialized_matrices_evaluate_to_cyclic_powers() {
    // At x = 1 every A_l becomes C^{s_l}; the operator is then the one of
    // those powers.
    let exps = Exponents::canonical(2).unwrap();
    let n = 4;
    let shape = exps.shape(n);
    let one = Assignment::from_fn(shape, |_, _| Rational::from_integer(1.into()));
    let c = cyclic_matrix(&Rationals, n);
    let power = |s: i64| {
        let e = s.rem_euclid(n as i64) as usize;
        let mut m = ExactMatrix::from_fn(n, n, |i, j| if i == j { Rationals.one() } else { Rationals.zero() });
        for _ in 0..e {
            m = kerneldim::linalg::mat_mul(&Rationals, &m, &c).unwrap();
        }
        m
    };
    let mut mats = Vec::new();
    for l in 1..=exps.k() {
        let a = build_a(l, exps.s(l), shape).unwrap();
        let at_one = a.map(|p| p.eval(&one).unwrap());
        assert_eq!(at_one, power(exps.s(l)));
        mats.push(at_one);
    }
    let op = operator_matrix(&Rationals, &mats).unwrap();
    let blocks = blocks_via_operator(n, &exps).unwrap();
    let s = exps.sum().rem_euclid(n as i64) as usize;
    for blk in &blocks {
        for a in 0..n {
            for b in 0..n {
                let row = op.index(a, (a + blk.j + s) % n);
                let col = op.index(b, (b + blk.j) % n);
                assert_eq!(&blk.body.get(a, b).eval(&one).unwrap(), op.body.get(row, col));
            }
        }
    }
}
