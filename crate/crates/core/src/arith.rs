//! Integers, rationals, primality and the prime schedule driving the tower.

use std::sync::RwLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision non-negative integer.
pub type Nat = BigUint;

/// Exact rational number, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Default bit budget for schedule entries.
pub const DEFAULT_SCHEDULE_BITS: u64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("prime schedule entry {index} needs about {bits} bits, over the budget of {max_bits}")]
    BitBudgetExceeded {
        index: usize,
        bits: u64,
        max_bits: u64,
    },
    #[error("cover threshold needs genus >= 2, got {0}")]
    GenusTooSmall(Nat),
    #[error("{0} is outside the domain of this function")]
    Domain(Nat),
}

/// How much trust a primality verdict carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primality {
    Composite,
    /// Proven: trial division or Miller-Rabin with a witness set that is
    /// known to be deterministic below 3.3 * 10^24.
    Prime,
    /// Passed Baillie-PSW. No counterexample is known, but the test is not proven.
    ProbablePrime,
}

const SMALL_PRIMES: [u32; 13] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41];

// Miller-Rabin with the first 13 primes as bases is deterministic below this bound.
const DETERMINISTIC_MR_LIMIT: &str = "3317044064679887385961981";

const TRIAL_DIVISION_LIMIT: u64 = 1 << 20;

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Classifies `n` without any randomness.
pub fn primality(n: &Nat) -> Primality {
    if n < &Nat::from(2u32) {
        return Primality::Composite;
    }
    for &p in SMALL_PRIMES.iter() {
        let p = Nat::from(p);
        if n == &p {
            return Primality::Prime;
        }
        if (n % &p).is_zero() {
            return Primality::Composite;
        }
    }
    if let Some(small) = n.to_u64() {
        if small < TRIAL_DIVISION_LIMIT {
            return if trial_division_is_prime(small) {
                Primality::Prime
            } else {
                Primality::Composite
            };
        }
    }
    let limit: Nat = DETERMINISTIC_MR_LIMIT.parse().expect("constant parses");
    if n < &limit {
        let all_pass = SMALL_PRIMES
            .iter()
            .all(|&b| strong_probable_prime(n, &Nat::from(b)));
        return if all_pass {
            Primality::Prime
        } else {
            Primality::Composite
        };
    }
    if strong_probable_prime(n, &Nat::from(2u32)) && strong_lucas_probable_prime(n) {
        Primality::ProbablePrime
    } else {
        Primality::Composite
    }
}

pub fn is_prime(n: &Nat) -> bool {
    primality(n) != Primality::Composite
}

fn trial_division_is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn strong_probable_prime(n: &Nat, base: &Nat) -> bool {
    let one = Nat::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let mut x = base.modpow(&d, n);
    if x == one || x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_one {
            return true;
        }
        if x == one {
            return false;
        }
    }
    false
}

/// Jacobi symbol (a/n) for odd positive n.
fn jacobi(a: &BigInt, n: &BigInt) -> i32 {
    let mut a = a.mod_floor(n);
    let mut n = n.clone();
    let mut result = 1;
    let three = BigInt::from(3);
    let five = BigInt::from(5);
    let eight = BigInt::from(8);
    while !a.is_zero() {
        while a.is_even() {
            a >>= 1;
            let r = n.mod_floor(&eight);
            if r == three || r == five {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a.mod_floor(&BigInt::from(4)) == three && n.mod_floor(&BigInt::from(4)) == three {
            result = -result;
        }
        a = a.mod_floor(&n);
    }
    if n.is_one() {
        result
    } else {
        0
    }
}

// Strong Lucas test with Selfridge's parameter choice (P = 1).
fn strong_lucas_probable_prime(n: &Nat) -> bool {
    let root = n.sqrt();
    if &(&root * &root) == n {
        return false;
    }
    let n_int = BigInt::from_biguint(Sign::Plus, n.clone());
    let mut d_param = BigInt::from(5);
    loop {
        let j = jacobi(&d_param, &n_int);
        if j == -1 {
            break;
        }
        if j == 0 && d_param.abs() != n_int {
            return false;
        }
        d_param = if d_param.is_positive() {
            -(d_param + BigInt::from(2))
        } else {
            -(d_param - BigInt::from(2))
        };
    }
    let q_param: BigInt = (BigInt::one() - &d_param) / BigInt::from(4);
    let reduce = |v: BigInt| v.mod_floor(&n_int);
    let halve = |v: BigInt| {
        let v: BigInt = if v.is_odd() { v + &n_int } else { v };
        let half: BigInt = v >> 1u32;
        half.mod_floor(&n_int)
    };

    let n_plus_one: BigInt = &n_int + 1u32;
    let s = n_plus_one.trailing_zeros().unwrap_or(0);
    let d = &n_plus_one >> s;

    let mut u = BigInt::one();
    let mut v = BigInt::one();
    let mut qk = reduce(q_param.clone());
    let bits = d.bits();
    for i in (0..bits - 1).rev() {
        u = reduce(&u * &v);
        v = reduce(&v * &v - &qk - &qk);
        qk = reduce(&qk * &qk);
        if d.bit(i) {
            let new_u = halve(&u + &v);
            let new_v = halve(&d_param * &u + &v);
            u = new_u;
            v = new_v;
            qk = reduce(&qk * &q_param);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = reduce(&v * &v - &qk - &qk);
        if v.is_zero() {
            return true;
        }
        qk = reduce(&qk * &qk);
    }
    false
}

/// Least prime strictly greater than `n`.
pub fn next_prime(n: &Nat) -> Nat {
    let two = Nat::from(2u32);
    if n < &two {
        return two;
    }
    let mut candidate = n + 1u32;
    if candidate.is_even() && candidate != two {
        candidate += 1u32;
    }
    while !is_prime(&candidate) {
        candidate += 2u32;
    }
    candidate
}

/// (N-1)(N-2)/2, the genus of a smooth plane curve of degree N.
pub fn genus(n: &Nat) -> Result<Nat, ArithError> {
    if n.is_zero() {
        return Err(ArithError::Domain(n.clone()));
    }
    if n < &Nat::from(3u32) {
        return Ok(Nat::zero());
    }
    Ok((n - 1u32) * (n - 2u32) / 2u32)
}

/// 64 g^2: above this, a prime exponent's Fermat curve is not covered by a genus-g curve.
pub fn cover_threshold(g: &Nat) -> Result<Nat, ArithError> {
    if g < &Nat::from(2u32) {
        return Err(ArithError::GenusTooSmall(g.clone()));
    }
    Ok(g * g * 64u32)
}

/// Euler's totient by trial-division factorization.
pub fn totient(n: &Nat) -> Result<Nat, ArithError> {
    if n.is_zero() {
        return Err(ArithError::Domain(n.clone()));
    }
    let mut rest = n.clone();
    let mut result = n.clone();
    let mut p = Nat::from(2u32);
    while &p * &p <= rest {
        if (&rest % &p).is_zero() {
            while (&rest % &p).is_zero() {
                rest /= &p;
            }
            result = result / &p * (&p - 1u32);
        }
        p += 1u32;
    }
    if rest > Nat::one() {
        result = result / &rest * (&rest - 1u32);
    }
    Ok(result)
}

/// The square (4(p-1)(p-2))^2 whose successor prime is the next schedule entry.
pub fn schedule_base(p: &Nat) -> Nat {
    let inner = (p - 1u32) * (p - 2u32) * 4u32;
    &inner * &inner
}

/// Memoized prime schedule: p_0 = 5, p_{i+1} = least prime above (4(p_i-1)(p_i-2))^2.
#[derive(Debug)]
pub struct PrimeSchedule {
    max_bits: u64,
    memo: RwLock<Vec<Nat>>,
}

impl Default for PrimeSchedule {
    fn default() -> Self {
        Self::new(DEFAULT_SCHEDULE_BITS)
    }
}

impl PrimeSchedule {
    pub fn new(max_bits: u64) -> Self {
        PrimeSchedule {
            max_bits,
            memo: RwLock::new(vec![Nat::from(5u32)]),
        }
    }

    pub fn max_bits(&self) -> u64 {
        self.max_bits
    }

    pub fn get(&self, index: usize) -> Result<Nat, ArithError> {
        if let Some(p) = self.memo.read().expect("schedule lock").get(index) {
            return Ok(p.clone());
        }
        let mut memo = self.memo.write().expect("schedule lock");
        while memo.len() <= index {
            let last = memo.last().expect("schedule is never empty");
            let base = schedule_base(last);
            // the next prime has at most one more bit than the base
            let bits = base.bits() + 1;
            if bits > self.max_bits {
                return Err(ArithError::BitBudgetExceeded {
                    index: memo.len(),
                    bits,
                    max_bits: self.max_bits,
                });
            }
            let next = next_prime(&base);
            memo.push(next);
        }
        Ok(memo[index].clone())
    }

    /// The first `count` entries.
    pub fn prefix(&self, count: usize) -> Result<Vec<Nat>, ArithError> {
        (0..count).map(|i| self.get(i)).collect()
    }
}

static DEFAULT_SCHEDULE: std::sync::OnceLock<PrimeSchedule> = std::sync::OnceLock::new();

/// p_i from a process-wide schedule with the default bit budget.
pub fn prime_schedule(index: usize) -> Result<Nat, ArithError> {
    DEFAULT_SCHEDULE
        .get_or_init(PrimeSchedule::default)
        .get(index)
}

/// Bit length of the larger of numerator and denominator.
pub fn rational_bits(q: &Rational) -> u64 {
    q.numer().bits().max(q.denom().bits())
}

/// "n" for integers, "n/d" otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
