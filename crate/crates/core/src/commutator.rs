//! The standard polynomial `[A_1, ..., A_m]` and the operator
//! `L(A_1, ..., A_k): X -> [A_1, ..., A_k, X]` on n x n matrices.
//!
//! Operator matrices use the basis `E_ab` ordered lexicographically, `a`
//! outer and `b` inner: basis element `E_ab` has index `a * n + b`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, FieldChoice, PrimeField, Rationals, Ring};
use crate::linalg::{mat_mul, ExactMatrix, LinearAlgebra};
use crate::par::{map_range, Execution};
use crate::rng::{trial_rng, TrialRng};

/// Permutation enumeration is factorial; beyond this it is not desk scale.
pub const MAX_STANDARD_POLY_ARITY: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    pub n: usize,
    pub body: ExactMatrix<T>,
}

impl<T> OperatorMatrix<T> {
    /// Index of the basis element `E_ab`.
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.n + b
    }
}

fn common_size<T: Clone>(mats: &[ExactMatrix<T>]) -> Result<usize> {
    let n = mats.first().map_or(0, ExactMatrix::rows);
    for (i, m) in mats.iter().enumerate() {
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "argument {} is {}x{}, expected {n}x{n}",
                i + 1,
                m.rows(),
                m.cols()
            )));
        }
    }
    Ok(n)
}

pub fn identity<R: Ring>(ring: &R, n: usize) -> ExactMatrix<R::Elem> {
    ExactMatrix::from_fn(n, n, |i, j| if i == j { ring.one() } else { ring.zero() })
}

/// The matrix unit `E_ab`.
pub fn unit<R: Ring>(ring: &R, n: usize, a: usize, b: usize) -> ExactMatrix<R::Elem> {
    ExactMatrix::from_fn(n, n, |i, j| if (i, j) == (a, b) { ring.one() } else { ring.zero() })
}

fn mat_add_assign<R: Ring>(ring: &R, acc: &mut ExactMatrix<R::Elem>, x: &ExactMatrix<R::Elem>, negate: bool) {
    for i in 0..acc.rows() {
        for j in 0..acc.cols() {
            let v = x.get(i, j);
            if ring.is_zero(v) {
                continue;
            }
            let v = if negate { ring.neg(v) } else { v.clone() };
            let mut cur = acc.get(i, j).clone();
            ring.add_assign(&mut cur, &v);
            acc.set(i, j, cur);
        }
    }
}

/// `sum over sigma of sgn(sigma) A_sigma(1) ... A_sigma(m)`, enumerating
/// permutations with Heap's algorithm.
pub fn standard_polynomial<R: Ring>(ring: &R, mats: &[ExactMatrix<R::Elem>]) -> Result<ExactMatrix<R::Elem>> {
    let m = mats.len();
    if m == 0 {
        return Err(Error::InvalidArgument("the standard polynomial needs at least one argument".into()));
    }
    if m > MAX_STANDARD_POLY_ARITY {
        return Err(Error::InvalidArgument(format!(
            "{m} arguments exceed the enumeration limit of {MAX_STANDARD_POLY_ARITY}"
        )));
    }
    let n = common_size(mats)?;
    let mut perm: Vec<usize> = (0..m).collect();
    let mut odd = false;
    let mut acc = ExactMatrix::filled(n, n, ring.zero());
    let product = |perm: &[usize]| -> Result<ExactMatrix<R::Elem>> {
        let mut p = mats[perm[0]].clone();
        for &i in &perm[1..] {
            p = mat_mul(ring, &p, &mats[i])?;
        }
        Ok(p)
    };
    mat_add_assign(ring, &mut acc, &product(&perm)?, odd);
    let mut c = vec![0usize; m];
    let mut i = 1;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            odd = !odd;
            mat_add_assign(ring, &mut acc, &product(&perm)?, odd);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(acc)
}

/// Matrix of `L(A_1, ..., A_k)` in the `E_ab` basis.
///
/// Splitting each permutation of `A_1, ..., A_k, X` at the position of `X`
/// gives `[A_1..A_k, X] = sum_S eps_S s(A_S) X s(A_T)`, where `T` is the
/// complement of `S`, `s(A_S)` is the standard polynomial of the `A_i`
/// with `i` in `S` (ascending), and `eps_S` is the sign of moving `X` past
/// `T` and the elements of `S` past the smaller ones of `T`. Column
/// `(a, b)`, row `(c, d)` then reads `sum_S eps_S s(A_S)[c][a] s(A_T)[b][d]`.
pub fn operator_matrix<R: Ring>(ring: &R, mats: &[ExactMatrix<R::Elem>]) -> Result<OperatorMatrix<R::Elem>> {
    let k = mats.len();
    if k >= 31 {
        return Err(Error::InvalidArgument(format!("{k} arguments is too many for subset expansion")));
    }
    let n = common_size(mats)?;
    if k == 0 {
        // L(X) = [X] = X.
        return Ok(OperatorMatrix {
            n,
            body: identity(ring, n * n),
        });
    }
    let subsets = 1usize << k;
    let mut s: Vec<ExactMatrix<R::Elem>> = Vec::with_capacity(subsets);
    s.push(identity(ring, n));
    for mask in 1..subsets {
        let mut acc = ExactMatrix::filled(n, n, ring.zero());
        let mut pos = 0;
        for (i, a) in mats.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            let rest = mask & !(1 << i);
            mat_add_assign(ring, &mut acc, &mat_mul(ring, a, &s[rest])?, pos % 2 == 1);
            pos += 1;
        }
        s.push(acc);
    }
    let full = subsets - 1;
    let sign_neg: Vec<bool> = (0..subsets)
        .map(|mask| {
            let t = full & !mask;
            let mut cross = 0u32;
            for i in 0..k {
                if mask >> i & 1 == 1 {
                    cross += (t & ((1 << i) - 1)).count_ones();
                }
            }
            (cross + t.count_ones()) % 2 == 1
        })
        .collect();

    let dim = n * n;
    let mut body = ExactMatrix::filled(dim, dim, ring.zero());
    for mask in 0..subsets {
        let (sa, ta) = (&s[mask], &s[full & !mask]);
        for a in 0..n {
            for c in 0..n {
                let left = sa.get(c, a);
                if ring.is_zero(left) {
                    continue;
                }
                for b in 0..n {
                    for d in 0..n {
                        let right = ta.get(b, d);
                        if ring.is_zero(right) {
                            continue;
                        }
                        let mut term = ring.mul(left, right);
                        if sign_neg[mask] {
                            term = ring.neg(&term);
                        }
                        let (row, col) = (c * n + d, a * n + b);
                        let mut cur = body.get(row, col).clone();
                        ring.add_assign(&mut cur, &term);
                        body.set(row, col, cur);
                    }
                }
            }
        }
    }
    Ok(OperatorMatrix { n, body })
}

/// `[A_1, ..., A_k, X]`, evaluated directly.
pub fn apply_operator<R: Ring>(
    ring: &R,
    mats: &[ExactMatrix<R::Elem>],
    x: &ExactMatrix<R::Elem>,
) -> Result<ExactMatrix<R::Elem>> {
    let mut all = mats.to_vec();
    all.push(x.clone());
    standard_polynomial(ring, &all)
}

pub fn random_matrix<F: Field>(field: &F, n: usize, rng: &mut TrialRng) -> ExactMatrix<F::Elem> {
    ExactMatrix::from_fn(n, n, |_, _| field.random_elem(rng))
}

/// Which case of the generic-nullity conjecture a `(n, k)` pair falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureCase {
    /// `k` even: `d = k`.
    EvenK,
    /// `k` odd, `n` even: `d = k + 1`.
    OddKEvenN,
    /// `k` and `n` odd: `d = k + 2`.
    OddKOddN,
}

impl ConjectureCase {
    pub fn of(n: usize, k: usize) -> Self {
        match (k % 2, n % 2) {
            (0, _) => ConjectureCase::EvenK,
            (_, 0) => ConjectureCase::OddKEvenN,
            _ => ConjectureCase::OddKOddN,
        }
    }

    pub fn predicted_nullity(self, k: usize) -> usize {
        match self {
            ConjectureCase::EvenK => k,
            ConjectureCase::OddKEvenN => k + 1,
            ConjectureCase::OddKOddN => k + 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjectureReport {
    pub n: usize,
    pub k: usize,
    pub field: FieldChoice,
    pub trials: usize,
    pub seed: u64,
    pub case: ConjectureCase,
    pub predicted_nullity: usize,
    /// Nullity observed in each trial, in trial order.
    pub nullities: Vec<usize>,
    pub histogram: BTreeMap<usize, usize>,
    pub matching_trials: usize,
    /// Only the even-k case is asserted; for odd k over a prime field the
    /// data is reported as is.
    pub asserted: bool,
}

impl ConjectureReport {
    /// Whether at least `numer / denom` of the trials hit the prediction.
    pub fn meets(&self, numer: usize, denom: usize) -> bool {
        self.matching_trials * denom >= numer * self.trials
    }
}

fn nullities_for<F: LinearAlgebra>(
    field: &F,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<usize>> {
    map_range(exec, trials, |t| {
        let mut rng = trial_rng(seed, t as u64);
        let mats: Vec<_> = (0..k).map(|_| random_matrix(field, n, &mut rng)).collect();
        let op = operator_matrix(field, &mats)?;
        Ok(op.body.cols() - field.rank(&op.body))
    })
    .into_iter()
    .collect()
}

/// Sample `trials` random k-tuples of n x n matrices and record the nullity
/// of `L(A_1, ..., A_k)` for each.
pub fn conjecture_experiment(
    n: usize,
    k: usize,
    field: FieldChoice,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<ConjectureReport> {
    if n < 2 || k < 2 || k > 2 * n - 2 {
        return Err(Error::InvalidArgument(format!("need n >= 2 and 2 <= k <= 2n-2, got n={n}, k={k}")));
    }
    let r = k.div_ceil(2);
    if !field.admissible_for(r)? {
        return Err(Error::InadmissibleCharacteristic {
            p: field.characteristic(),
            r,
        });
    }
    let nullities = match field {
        FieldChoice::Rational => nullities_for(&Rationals, n, k, trials, seed, exec)?,
        FieldChoice::Prime { p } => nullities_for(&PrimeField::new(p)?, n, k, trials, seed, exec)?,
    };
    let case = ConjectureCase::of(n, k);
    let predicted = case.predicted_nullity(k);
    let mut histogram = BTreeMap::new();
    for &d in &nullities {
        *histogram.entry(d).or_insert(0) += 1;
    }
    Ok(ConjectureReport {
        n,
        k,
        field,
        trials,
        seed,
        case,
        predicted_nullity: predicted,
        matching_trials: nullities.iter().filter(|&&d| d == predicted).count(),
        nullities,
        histogram,
        asserted: case == ConjectureCase::EvenK || field == FieldChoice::Rational,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlCheckReport {
    pub n: usize,
    pub m: usize,
    pub field: FieldChoice,
    pub trials: usize,
    pub seed: u64,
    /// Trials in which the standard polynomial did not vanish.
    pub nonvanishing_trials: Vec<usize>,
    pub passed: bool,
}

fn al_failures<F: Field>(field: &F, n: usize, m: usize, trials: usize, seed: u64, exec: Execution) -> Result<Vec<usize>> {
    let flags = map_range(exec, trials, |t| -> Result<bool> {
        let mut rng = trial_rng(seed, t as u64);
        let mats: Vec<_> = (0..m).map(|_| random_matrix(field, n, &mut rng)).collect();
        let s = standard_polynomial(field, &mats)?;
        Ok(s.entries().iter().all(|e| field.is_zero(e)))
    });
    let mut failures = Vec::new();
    for (t, f) in flags.into_iter().enumerate() {
        if !f? {
            failures.push(t);
        }
    }
    Ok(failures)
}

/// Check that `[A_1, ..., A_m]` vanishes on random n x n matrices, m >= 2n.
pub fn al_check(n: usize, m: usize, field: FieldChoice, trials: usize, seed: u64, exec: Execution) -> Result<AlCheckReport> {
    if n == 0 || m < 2 * n {
        return Err(Error::InvalidArgument(format!(
            "vanishing is only expected for m >= 2n (n={n}, m={m}); probe smaller m with standard_polynomial"
        )));
    }
    let failures = match field {
        FieldChoice::Rational => al_failures(&Rationals, n, m, trials, seed, exec)?,
        FieldChoice::Prime { p } => al_failures(&PrimeField::new(p)?, n, m, trials, seed, exec)?,
    };
    Ok(AlCheckReport {
        n,
        m,
        field,
        trials,
        seed,
        passed: failures.is_empty(),
        nonvanishing_trials: failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf() -> PrimeField {
        PrimeField::new(1_000_003).unwrap()
    }

    #[test]
    fn two_arguments_give_the_commutator() {
        let f = gf();
        let mut rng = trial_rng(1, 0);
        let a = random_matrix(&f, 3, &mut rng);
        let b = random_matrix(&f, 3, &mut rng);
        let ab = mat_mul(&f, &a, &b).unwrap();
        let ba = mat_mul(&f, &b, &a).unwrap();
        let expected = ExactMatrix::from_fn(3, 3, |i, j| f.sub(ab.get(i, j), ba.get(i, j)));
        assert_eq!(standard_polynomial(&f, &[a, b]).unwrap(), expected);
    }

    #[test]
    fn unit_matrix_examples() {
        let q = Rationals;
        let e = |a, b| unit(&q, 2, a, b);
        assert_eq!(standard_polynomial(&q, &[e(0, 0), e(0, 1)]).unwrap(), e(0, 1));
        assert_eq!(standard_polynomial(&q, &[e(0, 0), e(0, 1), e(1, 1)]).unwrap(), e(0, 1));
    }

    #[test]
    fn vanishes_at_twice_the_size() {
        let f = gf();
        let mut rng = trial_rng(2, 0);
        let mats: Vec<_> = (0..4).map(|_| random_matrix(&f, 2, &mut rng)).collect();
        assert!(standard_polynomial(&f, &mats).unwrap().entries().iter().all(|&x| x == 0));
    }

    #[test]
    fn arity_limits() {
        let q = Rationals;
        assert!(standard_polynomial::<Rationals>(&q, &[]).is_err());
        let many = vec![identity(&q, 1); MAX_STANDARD_POLY_ARITY + 1];
        assert!(standard_polynomial(&q, &many).is_err());
        let mixed = vec![identity(&q, 2), identity(&q, 3)];
        assert!(matches!(standard_polynomial(&q, &mixed), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn repeated_identity_gives_zero_operator() {
        let q = Rationals;
        let op = operator_matrix(&q, &[identity(&q, 3), identity(&q, 3)]).unwrap();
        assert!(op.body.entries().iter().all(|x| q.is_zero(x)));
    }

    #[test]
    fn operator_columns_match_direct_evaluation() {
        let f = gf();
        for (n, k) in [(2, 1), (2, 2), (3, 2), (3, 3), (2, 3)] {
            let mut rng = trial_rng(3, (n * 10 + k) as u64);
            let mats: Vec<_> = (0..k).map(|_| random_matrix(&f, n, &mut rng)).collect();
            let op = operator_matrix(&f, &mats).unwrap();
            for a in 0..n {
                for b in 0..n {
                    let col = apply_operator(&f, &mats, &unit(&f, n, a, b)).unwrap();
                    for c in 0..n {
                        for d in 0..n {
                            assert_eq!(op.body.get(c * n + d, op.index(a, b)), col.get(c, d));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn arguments_lie_in_the_kernel() {
        let f = gf();
        let mut rng = trial_rng(4, 0);
        let n = 3;
        let mats: Vec<_> = (0..3).map(|_| random_matrix(&f, n, &mut rng)).collect();
        let op = operator_matrix(&f, &mats).unwrap();
        for a in &mats {
            for row in 0..n * n {
                let mut acc = 0;
                for col in 0..n * n {
                    acc = f.add(&acc, &f.mul(op.body.get(row, col), a.entries().get(col).unwrap()));
                }
                assert_eq!(acc, 0);
            }
        }
    }

    #[test]
    fn conjecture_small_cases() {
        let rep = conjecture_experiment(3, 2, FieldChoice::prime_default(), 4, 7, Execution::Parallel).unwrap();
        assert_eq!(rep.nullities, vec![2; 4]);
        assert!(rep.asserted && rep.meets(1, 1));
        let rep = conjecture_experiment(2, 2, FieldChoice::Rational, 2, 7, Execution::Sequential).unwrap();
        assert_eq!(rep.nullities, vec![2; 2]);
        assert!(conjecture_experiment(3, 5, FieldChoice::prime_default(), 1, 0, Execution::Sequential).is_err());
        assert!(matches!(
            conjecture_experiment(3, 2, FieldChoice::Prime { p: 3 }, 1, 0, Execution::Sequential),
            Err(Error::InadmissibleCharacteristic { .. })
        ));
    }

    #[test]
    fn al_check_contract() {
        let rep = al_check(2, 4, FieldChoice::prime_default(), 5, 1, Execution::Parallel).unwrap();
        assert!(rep.passed);
        assert!(al_check(2, 3, FieldChoice::prime_default(), 5, 1, Execution::Parallel).is_err());
    }
}
