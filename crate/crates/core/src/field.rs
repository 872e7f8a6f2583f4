//! Exact scalar arithmetic: the rationals and prime fields GF(p).
//!
//! Rings are passed around as small context values (`Rationals` is zero
//! sized, `PrimeField` carries its modulus) so that element types can stay
//! plain data.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Mersenne prime 2^61 - 1.
pub const DEFAULT_PRIME: u64 = (1u64 << 61) - 1;

/// Bound for random rational samples: integers drawn uniformly from
/// `[-RATIONAL_SAMPLE_BOUND, RATIONAL_SAMPLE_BOUND]`.
pub const RATIONAL_SAMPLE_BOUND: i64 = 1_000_000;

pub type Rational = BigRational;

/// A commutative ring with identity, given as a context object.
pub trait Ring: Clone + Send + Sync + fmt::Debug {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        *a = self.add(a, b);
    }
}

/// A field with exact arithmetic.
pub trait Field: Ring {
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// 0 for the rationals, p for GF(p).
    fn characteristic(&self) -> u64;

    /// Image of a rational number, `None` when its denominator is not
    /// invertible.
    fn from_rational(&self, q: &Rational) -> Option<Self::Elem>;

    /// Exact rational value of an element; only defined in characteristic 0.
    fn to_rational(&self, a: &Self::Elem) -> Option<Rational>;

    fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;

    fn format_elem(&self, a: &Self::Elem) -> String;

    fn parse_elem(&self, s: &str) -> Result<Self::Elem>;

    fn from_bigint(&self, v: &BigInt) -> Self::Elem {
        self.from_rational(&Rational::from_integer(v.clone()))
            .expect("integers are always representable")
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    /// Whether the characteristic avoids every prime factor of 2(2r+1)r!.
    fn admissible_for(&self, r: usize) -> bool {
        let p = self.characteristic();
        if p == 0 {
            return true;
        }
        p != 2 && (2 * r as u64 + 1) % p != 0 && p > r as u64
    }
}

/// The field of rational numbers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl Ring for Rationals {
    type Elem = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }

    fn one(&self) -> Rational {
        Rational::one()
    }

    fn from_i64(&self, v: i64) -> Rational {
        Rational::from_integer(BigInt::from(v))
    }

    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }

    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }

    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }

    fn neg(&self, a: &Rational) -> Rational {
        -a
    }

    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }

    fn add_assign(&self, a: &mut Rational, b: &Rational) {
        *a += b;
    }
}

impl Field for Rationals {
    fn inv(&self, a: &Rational) -> Option<Rational> {
        (!a.is_zero()).then(|| a.recip())
    }

    fn characteristic(&self) -> u64 {
        0
    }

    fn from_rational(&self, q: &Rational) -> Option<Rational> {
        Some(q.clone())
    }

    fn to_rational(&self, a: &Rational) -> Option<Rational> {
        Some(a.clone())
    }

    fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> Rational {
        self.from_i64(rng.gen_range(-RATIONAL_SAMPLE_BOUND..=RATIONAL_SAMPLE_BOUND))
    }

    fn format_elem(&self, a: &Rational) -> String {
        format!("{}/{}", a.numer(), a.denom())
    }

    fn parse_elem(&self, s: &str) -> Result<Rational> {
        let s = s.trim();
        let parse_int =
            |t: &str| BigInt::from_str(t.trim()).map_err(|e| Error::Parse(format!("{t:?}: {e}")));
        match s.split_once('/') {
            Some((num, den)) => {
                let den = parse_int(den)?;
                if den.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in {s:?}")));
                }
                Ok(Rational::new(parse_int(num)?, den))
            }
            None => Ok(Rational::from_integer(parse_int(s)?)),
        }
    }
}

/// The prime field GF(p) for a prime `p < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 63 || !is_prime_u64(p) {
            return Err(Error::BadModulus(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn reduce_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        v.mod_floor(&m).to_u64().expect("residue fits in u64")
    }

    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, self.p);
            }
            base = mul_mod(base, base, self.p);
            exp >>= 1;
        }
        acc
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self { p: DEFAULT_PRIME }
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

impl Ring for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.p
    }

    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }

    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
}

impl Field for PrimeField {
    fn inv(&self, a: &u64) -> Option<u64> {
        (*a != 0).then(|| self.pow(*a, self.p - 2))
    }

    fn characteristic(&self) -> u64 {
        self.p
    }

    fn from_rational(&self, q: &Rational) -> Option<u64> {
        let num = self.reduce_bigint(q.numer());
        let den = self.reduce_bigint(q.denom());
        self.inv(&den).map(|d| self.mul(&num, &d))
    }

    fn to_rational(&self, _a: &u64) -> Option<Rational> {
        None
    }

    fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }

    fn format_elem(&self, a: &u64) -> String {
        a.to_string()
    }

    fn parse_elem(&self, s: &str) -> Result<u64> {
        let v = BigInt::from_str(s.trim()).map_err(|e| Error::Parse(format!("{s:?}: {e}")))?;
        Ok(self.reduce_bigint(&v))
    }

    fn from_bigint(&self, v: &BigInt) -> u64 {
        self.reduce_bigint(v)
    }
}

/// Runtime selection of the scalar field for experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FieldChoice {
    Rational,
    Prime { p: u64 },
}

impl FieldChoice {
    pub fn prime_default() -> Self {
        FieldChoice::Prime { p: DEFAULT_PRIME }
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            FieldChoice::Rational => 0,
            FieldChoice::Prime { p } => *p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FieldChoice::Rational => Ok(()),
            FieldChoice::Prime { p } => PrimeField::new(*p).map(|_| ()),
        }
    }

    pub fn admissible_for(&self, r: usize) -> Result<bool> {
        Ok(match self {
            FieldChoice::Rational => true,
            FieldChoice::Prime { p } => PrimeField::new(*p)?.admissible_for(r),
        })
    }
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let pow = |mut base: u64, mut e: u64| {
        let mut acc = 1u64;
        base %= n;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(acc, base, n);
            }
            base = mul_mod(base, base, n);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// `n!` as a big integer.
pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// The integer value of a rational, if it is an integer that fits in i64.
pub fn rational_to_i64(q: &Rational) -> Option<i64> {
    if q.is_integer() {
        q.numer().to_i64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Signed;
    use rand::SeedableRng;

    #[test]
    fn mersenne_default_is_prime() {
        assert!(is_prime_u64(DEFAULT_PRIME));
        assert!(!is_prime_u64(DEFAULT_PRIME - 2));
        assert!(PrimeField::new(4).is_err());
        assert!(PrimeField::new(1).is_err());
    }

    #[test]
    fn prime_field_inverse() {
        let f = PrimeField::new(101).unwrap();
        for a in 1..101u64 {
            let ai = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &ai), 1);
        }
        assert_eq!(f.inv(&0), None);
        assert_eq!(f.from_i64(-1), 100);
    }

    #[test]
    fn rational_reduction_mod_p() {
        let f = PrimeField::new(7).unwrap();
        let half = Rational::new(BigInt::from(1), BigInt::from(2));
        assert_eq!(f.from_rational(&half), Some(4));
        let seventh = Rational::new(BigInt::from(1), BigInt::from(7));
        assert_eq!(f.from_rational(&seventh), None);
    }

    #[test]
    fn admissibility() {
        let q = Rationals;
        assert!(q.admissible_for(10));
        assert!(!PrimeField::new(2).unwrap().admissible_for(1));
        assert!(!PrimeField::new(5).unwrap().admissible_for(2)); // 5 | 2r+1
        assert!(!PrimeField::new(3).unwrap().admissible_for(3)); // 3 | r!
        assert!(PrimeField::new(11).unwrap().admissible_for(4));
        assert!(PrimeField::default().admissible_for(12));
    }

    #[test]
    fn parse_and_format_round_trip() {
        let q = Rationals;
        let x = q.parse_elem("-6/4").unwrap();
        assert_eq!(q.format_elem(&x), "-3/2");
        assert_eq!(q.parse_elem("5").unwrap(), q.from_i64(5));
        assert!(q.parse_elem("1/0").is_err());
        let f = PrimeField::new(13).unwrap();
        assert_eq!(f.parse_elem("-1").unwrap(), 12);
    }

    #[test]
    fn random_samples_in_range() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let f = PrimeField::new(17).unwrap();
        for _ in 0..100 {
            assert!(f.random_elem(&mut rng) < 17);
            let q = Rationals.random_elem(&mut rng);
            assert!(q.is_integer() && q.abs() <= Rationals.from_i64(RATIONAL_SAMPLE_BOUND));
        }
    }
}
