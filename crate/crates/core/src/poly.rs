//! Dense univariate polynomials and rational functions over an abstract exact field.
//!
//! The same kernel serves Q, Q(x), and every level of the Fermat tower: a
//! coefficient field is any value implementing [`Field`], which hands out the
//! arithmetic on its elements. Elements themselves are plain data, so
//! canonical forms can be compared and hashed structurally.

use std::fmt::Debug;
use std::hash::Hash;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("gcd of two zero polynomials is undefined")]
    BothZero,
    #[error("resultant of a zero polynomial")]
    ZeroInput,
    #[error("inversion of zero")]
    InverseOfZero,
}

/// An exact field of characteristic zero.
///
/// Elements must be kept in a canonical form, so `==` on elements is field equality.
pub trait Field: Clone + Debug {
    type Elem: Clone + Eq + Hash + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `None` exactly when `a` is zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Image of a rational number under the prime-field embedding.
    fn from_rational(&self, q: &Rational) -> Self::Elem;

    fn is_one(&self, a: &Self::Elem) -> bool {
        a == &self.one()
    }

    /// Prime `q` of a residue map to `F_q`, if the field offers one.
    fn residue_prime(&self) -> Option<u64> {
        None
    }

    /// Image under a ring homomorphism from a local subring into `F_q`;
    /// `None` when `a` lies outside that subring.
    /// The element as a rational number, for fields that are Q itself.
    fn as_rational(&self, _a: &Self::Elem) -> Option<Rational> {
        None
    }

    fn residue(&self, _a: &Self::Elem) -> Option<u64> {
        None
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem> {
        self.inv(b).map(|b_inv| self.mul(a, &b_inv))
    }

    fn pow(&self, a: &Self::Elem, mut exp: u64) -> Self::Elem {
        let mut result = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(&result, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }
}

/// The rationals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RationalField;

/// Arithmetic in `F_q` for `q < 2^63`.
pub mod modq {
    use num_bigint::BigInt;
    use num_traits::{Signed, ToPrimitive, Zero};

    use crate::arith::Rational;

    pub fn mul(a: u64, b: u64, q: u64) -> u64 {
        ((a as u128 * b as u128) % q as u128) as u64
    }

    pub fn add(a: u64, b: u64, q: u64) -> u64 {
        let s = a + b;
        if s >= q {
            s - q
        } else {
            s
        }
    }

    pub fn sub(a: u64, b: u64, q: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + q - b
        }
    }

    pub fn pow(mut a: u64, mut e: u64, q: u64) -> u64 {
        let mut r = 1 % q;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a, q);
            }
            a = mul(a, a, q);
            e >>= 1;
        }
        r
    }

    /// Inverse of a nonzero residue, `q` prime.
    pub fn inv(a: u64, q: u64) -> Option<u64> {
        (a % q != 0).then(|| pow(a, q - 2, q))
    }

    pub fn from_int(n: &BigInt, q: u64) -> u64 {
        let r = n % BigInt::from(q);
        let r = if r.is_negative() {
            r + BigInt::from(q)
        } else {
            r
        };
        r.to_u64().expect("reduced below q")
    }

    pub fn from_rational(x: &Rational, q: u64) -> Option<u64> {
        if x.is_zero() {
            return Some(0);
        }
        let d = inv(from_int(x.denom(), q), q)?;
        Some(mul(from_int(x.numer(), q), d, q))
    }

    /// Horner evaluation of a coefficient list (lowest degree first).
    pub fn eval(coeffs: &[u64], at: u64, q: u64) -> u64 {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| add(mul(acc, at, q), c, q))
    }

    fn trim(mut v: Vec<u64>) -> Vec<u64> {
        while v.last() == Some(&0) {
            v.pop();
        }
        v
    }

    /// Monic gcd of two polynomials over `F_q`, not both zero.
    pub fn gcd(a: Vec<u64>, b: Vec<u64>, q: u64) -> Vec<u64> {
        let (mut r0, mut r1) = (trim(a), trim(b));
        while !r1.is_empty() {
            let lead_inv = inv(*r1.last().expect("nonzero"), q).expect("q prime");
            while r0.len() >= r1.len() {
                let shift = r0.len() - r1.len();
                let f = mul(*r0.last().expect("nonzero"), lead_inv, q);
                for (i, &c) in r1.iter().enumerate() {
                    r0[i + shift] = sub(r0[i + shift], mul(f, c, q), q);
                }
                r0 = trim(r0);
                if r0.is_empty() {
                    break;
                }
            }
            std::mem::swap(&mut r0, &mut r1);
        }
        let lead_inv = inv(*r0.last().expect("not both zero"), q).expect("q prime");
        r0.iter().map(|&c| mul(c, lead_inv, q)).collect()
    }

    /// Degree of the gcd of two nonzero polynomials over `F_q`.
    pub fn gcd_degree(a: Vec<u64>, b: Vec<u64>, q: u64) -> usize {
        gcd(a, b, q).len() - 1
    }
}

/// Modular gcd over Q: images modulo word-sized primes, glued by CRT until the
/// candidate stops changing and divides both inputs.
mod qgcd {
    use std::sync::OnceLock;

    use num_bigint::BigInt;
    use num_integer::Integer;
    use num_traits::{One, Zero};

    use super::{modq, Field, PolyRing, RationalField};
    use crate::arith::{is_prime, Nat, Rational};

    const PRIMES: usize = 256;

    fn primes() -> &'static [u64] {
        static CELL: OnceLock<Vec<u64>> = OnceLock::new();
        CELL.get_or_init(|| {
            let mut out = Vec::with_capacity(PRIMES);
            let mut n = (1u64 << 62) - 1;
            while out.len() < PRIMES {
                if is_prime(&Nat::from(n)) {
                    out.push(n);
                }
                n -= 2;
            }
            out
        })
    }

    /// Integer polynomial with content 1 and the same roots.
    fn primitive(a: &[Rational]) -> Vec<BigInt> {
        let lcm = a.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let ints: Vec<BigInt> = a.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
        let content = ints.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
        ints.into_iter().map(|c| c / &content).collect()
    }

    fn divides(d: &[BigInt], a: &[BigInt]) -> bool {
        let ring = PolyRing::new(RationalField);
        let to_q =
            |v: &[BigInt]| ring.from_coeffs(v.iter().map(|c| Rational::from(c.clone())).collect());
        ring.rem(&to_q(a), &to_q(d)).is_ok_and(|r| r.is_zero())
    }

    /// Monic gcd of two nonconstant polynomials, `None` if the prime supply runs out.
    pub fn gcd(a: &[Rational], b: &[Rational]) -> Option<Vec<Rational>> {
        let (a, b) = (primitive(a), primitive(b));
        let (la, lb) = (a.last()?, b.last()?);
        let gamma = la.gcd(lb);
        let mut acc: Option<(Vec<BigInt>, BigInt)> = None;
        for &p in primes() {
            if modq::from_int(la, p) == 0 || modq::from_int(lb, p) == 0 {
                continue;
            }
            let reduce = |v: &[BigInt]| v.iter().map(|c| modq::from_int(c, p)).collect::<Vec<_>>();
            let g = modq::gcd(reduce(&a), reduce(&b), p);
            if g.len() == 1 {
                return Some(vec![Rational::one()]);
            }
            let scale = modq::from_int(&gamma, p);
            let g: Vec<u64> = g.iter().map(|&c| modq::mul(c, scale, p)).collect();
            let (h, m) = match acc.take() {
                Some((h, m)) if h.len() == g.len() => (h, m),
                Some((h, m)) if h.len() < g.len() => {
                    acc = Some((h, m));
                    continue;
                }
                _ => {
                    let lifted = g
                        .iter()
                        .map(|&c| symmetric(BigInt::from(c), &BigInt::from(p)))
                        .collect();
                    acc = Some((lifted, BigInt::from(p)));
                    continue;
                }
            };
            let pm = BigInt::from(p);
            let m_inv = modq::inv(modq::from_int(&m, p), p).expect("distinct primes");
            let mp = &m * &pm;
            let next: Vec<BigInt> = h
                .iter()
                .zip(&g)
                .map(|(hc, &gc)| {
                    let t = modq::mul(modq::sub(gc, modq::from_int(hc, p), p), m_inv, p);
                    symmetric(hc + &m * BigInt::from(t), &mp)
                })
                .collect();
            if next == h {
                let content = h.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
                let cand: Vec<BigInt> = h.iter().map(|c| c / &content).collect();
                if divides(&cand, &a) && divides(&cand, &b) {
                    let lead = Rational::from(cand.last().expect("nonzero").clone());
                    return Some(
                        cand.into_iter()
                            .map(|c| {
                                RationalField
                                    .div(&Rational::from(c), &lead)
                                    .expect("nonzero")
                            })
                            .collect(),
                    );
                }
            }
            acc = Some((next, mp));
        }
        None
    }

    fn symmetric(c: BigInt, m: &BigInt) -> BigInt {
        let c = c.mod_floor(m);
        if &c + &c > *m {
            c - m
        } else {
            c
        }
    }
}

impl Field for RationalField {
    type Elem = Rational;

    fn zero(&self) -> Rational {
        Rational::zero()
    }
    fn one(&self) -> Rational {
        Rational::one()
    }
    fn is_zero(&self, a: &Rational) -> bool {
        a.is_zero()
    }
    fn is_one(&self, a: &Rational) -> bool {
        a.is_one()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn neg(&self, a: &Rational) -> Rational {
        -a
    }
    fn sub(&self, a: &Rational, b: &Rational) -> Rational {
        a - b
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn inv(&self, a: &Rational) -> Option<Rational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn as_rational(&self, a: &Rational) -> Option<Rational> {
        Some(a.clone())
    }

    fn from_rational(&self, q: &Rational) -> Rational {
        q.clone()
    }
}

/// Coefficient vector, index = degree. Never carries a zero leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial<E> {
    coeffs: Vec<E>,
}

impl<E> Polynomial<E> {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[E] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&E> {
        self.coeffs.get(i)
    }

    pub fn leading(&self) -> Option<&E> {
        self.coeffs.last()
    }

    pub fn into_coeffs(self) -> Vec<E> {
        self.coeffs
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }
}

/// Univariate polynomial arithmetic over `F`.
#[derive(Debug, Clone)]
pub struct PolyRing<F: Field> {
    field: F,
}

impl<F: Field> PolyRing<F> {
    pub fn new(field: F) -> Self {
        PolyRing { field }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    /// Builds a polynomial, stripping trailing zeros.
    pub fn from_coeffs(&self, mut coeffs: Vec<F::Elem>) -> Polynomial<F::Elem> {
        while coeffs.last().is_some_and(|c| self.field.is_zero(c)) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn constant(&self, c: F::Elem) -> Polynomial<F::Elem> {
        self.from_coeffs(vec![c])
    }

    pub fn one(&self) -> Polynomial<F::Elem> {
        self.constant(self.field.one())
    }

    /// c * X^k
    pub fn monomial(&self, c: F::Elem, k: usize) -> Polynomial<F::Elem> {
        if self.field.is_zero(&c) {
            return Polynomial::zero();
        }
        let mut coeffs = vec![self.field.zero(); k];
        coeffs.push(c);
        Polynomial { coeffs }
    }

    pub fn variable(&self) -> Polynomial<F::Elem> {
        self.monomial(self.field.one(), 1)
    }

    pub fn is_one(&self, a: &Polynomial<F::Elem>) -> bool {
        a.coeffs.len() == 1 && self.field.is_one(&a.coeffs[0])
    }

    pub fn add(&self, a: &Polynomial<F::Elem>, b: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        let n = a.coeffs.len().max(b.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (a.coeffs.get(i), b.coeffs.get(i)) {
                (Some(x), Some(y)) => self.field.add(x, y),
                (Some(x), None) | (None, Some(x)) => x.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        self.from_coeffs(coeffs)
    }

    pub fn neg(&self, a: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        Polynomial {
            coeffs: a.coeffs.iter().map(|c| self.field.neg(c)).collect(),
        }
    }

    pub fn sub(&self, a: &Polynomial<F::Elem>, b: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        self.add(a, &self.neg(b))
    }

    pub fn scale(&self, a: &Polynomial<F::Elem>, c: &F::Elem) -> Polynomial<F::Elem> {
        if self.field.is_zero(c) {
            return Polynomial::zero();
        }
        if self.field.is_one(c) {
            return a.clone();
        }
        self.from_coeffs(a.coeffs.iter().map(|x| self.field.mul(x, c)).collect())
    }

    pub fn mul(&self, a: &Polynomial<F::Elem>, b: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        if a.is_zero() || b.is_zero() {
            return Polynomial::zero();
        }
        if a.coeffs.len() == 1 {
            return self.scale(b, &a.coeffs[0]);
        }
        if b.coeffs.len() == 1 {
            return self.scale(a, &b.coeffs[0]);
        }
        let mut coeffs: Vec<Option<F::Elem>> = vec![None; a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if self.field.is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if self.field.is_zero(y) {
                    continue;
                }
                let term = self.field.mul(x, y);
                coeffs[i + j] = Some(match coeffs[i + j].take() {
                    Some(acc) => self.field.add(&acc, &term),
                    None => term,
                });
            }
        }
        self.from_coeffs(
            coeffs
                .into_iter()
                .map(|c| c.unwrap_or_else(|| self.field.zero()))
                .collect(),
        )
    }

    pub fn pow(&self, a: &Polynomial<F::Elem>, mut exp: u64) -> Polynomial<F::Elem> {
        let mut result = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(&result, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        result
    }

    /// Quotient and remainder with `a = q * b + r`, `deg r < deg b`.
    pub fn divmod(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
    ) -> Result<(Polynomial<F::Elem>, Polynomial<F::Elem>), PolyError> {
        b.degree().ok_or(PolyError::DivisionByZero)?;
        let lead_inv = self
            .field
            .inv(b.leading().expect("nonzero"))
            .expect("leading coefficient is nonzero");
        Ok(self.divmod_with(a, b, &lead_inv))
    }

    /// `divmod` with the inverse of `b`'s leading coefficient supplied; `b` is nonzero.
    fn divmod_with(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
        lead_inv: &F::Elem,
    ) -> (Polynomial<F::Elem>, Polynomial<F::Elem>) {
        let db = b.degree().expect("nonzero divisor");
        let mut rem = a.coeffs.clone();
        if rem.len() <= db {
            return (Polynomial::zero(), a.clone());
        }
        let mut quot = vec![self.field.zero(); rem.len() - db];
        for k in (db..rem.len()).rev() {
            let c = rem[k].clone();
            if self.field.is_zero(&c) {
                continue;
            }
            let factor = self.field.mul(&c, lead_inv);
            for (j, bj) in b.coeffs.iter().enumerate().take(db) {
                if self.field.is_zero(bj) {
                    continue;
                }
                let t = self.field.mul(&factor, bj);
                rem[k - db + j] = self.field.sub(&rem[k - db + j], &t);
            }
            rem[k] = self.field.zero();
            quot[k - db] = factor;
        }
        rem.truncate(db);
        (self.from_coeffs(quot), self.from_coeffs(rem))
    }

    pub fn rem(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
    ) -> Result<Polynomial<F::Elem>, PolyError> {
        self.divmod(a, b).map(|(_, r)| r)
    }

    /// Exact quotient; the caller guarantees `b` divides `a`.
    pub fn div_exact(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
    ) -> Polynomial<F::Elem> {
        if self.is_one(b) {
            return a.clone();
        }
        let (q, r) = self
            .divmod(a, b)
            .expect("exact division by a nonzero polynomial");
        debug_assert!(r.is_zero(), "div_exact with a nonzero remainder");
        q
    }

    /// Solves the square system `m u = rhs` over the fraction field by Bareiss
    /// elimination, which keeps every entry a polynomial. Returns `(d, v)` with
    /// `u = v / d`, or `None` when `m` is singular.
    pub fn solve_fraction_free(
        &self,
        mut m: Vec<Vec<Polynomial<F::Elem>>>,
        rhs: Vec<Polynomial<F::Elem>>,
    ) -> Option<(Polynomial<F::Elem>, Vec<Polynomial<F::Elem>>)> {
        let n = m.len();
        for (row, r) in m.iter_mut().zip(rhs) {
            row.push(r);
        }
        let exact = |t: &Polynomial<F::Elem>, d: &Polynomial<F::Elem>, d_inv: &F::Elem| {
            let (q, r) = self.divmod_with(t, d, d_inv);
            debug_assert!(r.is_zero(), "Bareiss division is exact");
            q
        };
        let (mut prev, mut prev_inv) = (self.one(), self.field.one());
        for k in 0..n {
            let pivot = (k..n).find(|&i| !m[i][k].is_zero())?;
            m.swap(k, pivot);
            let row_k = m[k].clone();
            for row in m.iter_mut().skip(k + 1) {
                for j in k + 1..=n {
                    let mut t = self.mul(&row_k[k], &row[j]);
                    if !row[k].is_zero() {
                        t = self.sub(&t, &self.mul(&row[k], &row_k[j]));
                    }
                    row[j] = exact(&t, &prev, &prev_inv);
                }
                row[k] = Polynomial::zero();
            }
            prev = row_k[k].clone();
            prev_inv = self
                .field
                .inv(prev.leading().expect("nonzero pivot"))
                .expect("nonzero");
        }
        let det = prev;
        let mut v = vec![Polynomial::zero(); n];
        for i in (0..n).rev() {
            let mut t = self.mul(&det, &m[i][n]);
            for j in i + 1..n {
                if !m[i][j].is_zero() && !v[j].is_zero() {
                    t = self.sub(&t, &self.mul(&m[i][j], &v[j]));
                }
            }
            let lead_inv = self
                .field
                .inv(m[i][i].leading().expect("nonzero pivot"))
                .expect("nonzero");
            v[i] = exact(&t, &m[i][i], &lead_inv);
        }
        Some((det, v))
    }

    pub fn monic(&self, a: &Polynomial<F::Elem>) -> Polynomial<F::Elem> {
        match a.leading() {
            None => Polynomial::zero(),
            Some(lc) if self.field.is_one(lc) => a.clone(),
            Some(lc) => self.scale(a, &self.field.inv(lc).expect("nonzero")),
        }
    }

    /// Monic gcd by Euclid's algorithm, after cheap exits for shared powers of `X`,
    /// coprime residue images and one input dividing the other.
    pub fn gcd(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
    ) -> Result<Polynomial<F::Elem>, PolyError> {
        if a.is_zero() && b.is_zero() {
            return Err(PolyError::BothZero);
        }
        if a.is_zero() || b.is_zero() {
            return Ok(self.monic(if a.is_zero() { b } else { a }));
        }
        // a nonzero constant on either side forces gcd 1
        if a.degree() == Some(0) || b.degree() == Some(0) {
            return Ok(self.one());
        }
        let (va, vb) = (self.valuation(a), self.valuation(b));
        if va > 0 || vb > 0 {
            let g = self.gcd(&self.shift_down(a, va), &self.shift_down(b, vb))?;
            let mut coeffs = vec![self.field.zero(); va.min(vb)];
            coeffs.extend(g.coeffs);
            return Ok(self.from_coeffs(coeffs));
        }
        let (small, large) = if a.degree() <= b.degree() {
            (a, b)
        } else {
            (b, a)
        };
        match self.gcd_degree_mod_q(a, b) {
            Some(0) => return Ok(self.one()),
            Some(d) if Some(d) == small.degree() => {
                if self.rem(large, small)?.is_zero() {
                    return Ok(self.monic(small));
                }
            }
            _ => {}
        }
        let rational = |p: &Polynomial<F::Elem>| -> Option<Vec<Rational>> {
            p.coeffs.iter().map(|c| self.field.as_rational(c)).collect()
        };
        if let (Some(qa), Some(qb)) = (rational(a), rational(b)) {
            if let Some(g) = qgcd::gcd(&qa, &qb) {
                return Ok(
                    self.from_coeffs(g.iter().map(|c| self.field.from_rational(c)).collect())
                );
            }
        }
        let (mut r0, mut r1) = (self.monic(a), self.monic(b));
        while !r1.is_zero() {
            let r = self.rem(&r0, &r1)?;
            r0 = r1;
            r1 = self.monic(&r);
        }
        Ok(r0)
    }

    fn valuation(&self, a: &Polynomial<F::Elem>) -> usize {
        a.coeffs
            .iter()
            .take_while(|c| self.field.is_zero(c))
            .count()
    }

    fn shift_down(&self, a: &Polynomial<F::Elem>, k: usize) -> Polynomial<F::Elem> {
        self.from_coeffs(a.coeffs[k..].to_vec())
    }

    /// Degree of the gcd of the residue images, when both images keep their degrees.
    /// This bounds the true gcd degree from above; 0 proves coprimality since the
    /// resultant then reduces to a unit.
    fn gcd_degree_mod_q(&self, a: &Polynomial<F::Elem>, b: &Polynomial<F::Elem>) -> Option<usize> {
        let q = self.field.residue_prime()?;
        let image = |p: &Polynomial<F::Elem>| -> Option<Vec<u64>> {
            let v: Option<Vec<u64>> = p.coeffs.iter().map(|c| self.field.residue(c)).collect();
            v.filter(|v| v.last().is_some_and(|&c| c != 0))
        };
        Some(modq::gcd_degree(image(a)?, image(b)?, q))
    }

    /// `(g, u, v)` with `u a + v b = g` and `g` monic.
    #[allow(clippy::type_complexity)]
    pub fn ext_gcd(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
    ) -> Result<
        (
            Polynomial<F::Elem>,
            Polynomial<F::Elem>,
            Polynomial<F::Elem>,
        ),
        PolyError,
    > {
        if a.is_zero() && b.is_zero() {
            return Err(PolyError::BothZero);
        }
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (self.one(), Polynomial::zero());
        let (mut t0, mut t1) = (Polynomial::zero(), self.one());
        while !r1.is_zero() {
            let (q, r) = self.divmod(&r0, &r1)?;
            let s = self.sub(&s0, &self.mul(&q, &s1));
            let t = self.sub(&t0, &self.mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s);
            t0 = std::mem::replace(&mut t1, t);
        }
        let lc_inv = self
            .field
            .inv(r0.leading().expect("nonzero gcd"))
            .expect("nonzero");
        Ok((
            self.scale(&r0, &lc_inv),
            self.scale(&s0, &lc_inv),
            self.scale(&t0, &lc_inv),
        ))
    }

    /// Resultant with respect to the polynomial variable, by the Euclidean remainder sequence.
    pub fn resultant(
        &self,
        a: &Polynomial<F::Elem>,
        b: &Polynomial<F::Elem>,
    ) -> Result<F::Elem, PolyError> {
        if a.is_zero() || b.is_zero() {
            return Err(PolyError::ZeroInput);
        }
        let field = &self.field;
        let mut acc = field.one();
        let (mut a, mut b) = (a.clone(), b.clone());
        loop {
            let m = a.degree().expect("nonzero");
            let n = b.degree().expect("nonzero");
            if n == 0 {
                let lead_pow = field.pow(&b.coeffs[0], m as u64);
                return Ok(field.mul(&acc, &lead_pow));
            }
            let r = self.rem(&a, &b)?;
            let Some(dr) = r.degree() else {
                return Ok(field.zero());
            };
            let mut factor = field.pow(b.leading().expect("nonzero"), (m - dr) as u64);
            if (m * n) % 2 == 1 {
                factor = field.neg(&factor);
            }
            acc = field.mul(&acc, &factor);
            a = b;
            b = r;
        }
    }

    /// Horner evaluation at a point of the coefficient field.
    pub fn eval(&self, a: &Polynomial<F::Elem>, x: &F::Elem) -> F::Elem {
        let mut acc = self.field.zero();
        for c in a.coeffs.iter().rev() {
            acc = self.field.add(&self.field.mul(&acc, x), c);
        }
        acc
    }

    /// Applies `f` to every coefficient, landing in the ring over `target`.
    pub fn map_coeffs<G: Field>(
        &self,
        a: &Polynomial<F::Elem>,
        target: &PolyRing<G>,
        f: impl Fn(&F::Elem) -> G::Elem,
    ) -> Polynomial<G::Elem> {
        target.from_coeffs(a.coeffs.iter().map(f).collect())
    }
}

/// `num / den` with `den` monic and coprime to `num`; zero is `0 / 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RatFunc<E> {
    num: Polynomial<E>,
    den: Polynomial<E>,
}

impl<E> RatFunc<E> {
    pub fn num(&self) -> &Polynomial<E> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<E> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when both numerator and denominator are constants.
    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }
}

/// The field of rational functions `F(X)`.
#[derive(Debug, Clone)]
pub struct RatFuncField<F: Field> {
    ring: PolyRing<F>,
}

impl<F: Field> RatFuncField<F> {
    pub fn new(field: F) -> Self {
        RatFuncField {
            ring: PolyRing::new(field),
        }
    }

    pub fn ring(&self) -> &PolyRing<F> {
        &self.ring
    }

    pub fn coefficient_field(&self) -> &F {
        self.ring.field()
    }

    /// Reduces `num / den` to canonical form.
    pub fn from_parts(
        &self,
        num: Polynomial<F::Elem>,
        den: Polynomial<F::Elem>,
    ) -> Result<RatFunc<F::Elem>, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(self.zero());
        }
        let g = self.ring.gcd(&num, &den)?;
        let (num, den) = if self.ring.is_one(&g) {
            (num, den)
        } else {
            (self.ring.div_exact(&num, &g), self.ring.div_exact(&den, &g))
        };
        Ok(self.with_monic_den(num, den))
    }

    // num and den are already coprime
    fn with_monic_den(
        &self,
        num: Polynomial<F::Elem>,
        den: Polynomial<F::Elem>,
    ) -> RatFunc<F::Elem> {
        let field = self.ring.field();
        let lc = den.leading().expect("nonzero denominator");
        if field.is_one(lc) {
            return RatFunc { num, den };
        }
        let lc_inv = field.inv(lc).expect("nonzero");
        RatFunc {
            num: self.ring.scale(&num, &lc_inv),
            den: self.ring.scale(&den, &lc_inv),
        }
    }

    pub fn from_poly(&self, p: Polynomial<F::Elem>) -> RatFunc<F::Elem> {
        RatFunc {
            num: p,
            den: self.ring.one(),
        }
    }

    pub fn constant(&self, c: F::Elem) -> RatFunc<F::Elem> {
        self.from_poly(self.ring.constant(c))
    }

    /// The indeterminate X.
    pub fn variable(&self) -> RatFunc<F::Elem> {
        self.from_poly(self.ring.variable())
    }

    /// Constant coefficient when the function is a constant.
    pub fn as_constant(&self, a: &RatFunc<F::Elem>) -> Option<F::Elem> {
        if !a.is_constant() {
            return None;
        }
        Some(
            a.num
                .coeff(0)
                .cloned()
                .unwrap_or_else(|| self.ring.field().zero()),
        )
    }

    /// Evaluates at a point of the coefficient field; `None` if the denominator vanishes there.
    pub fn eval(&self, a: &RatFunc<F::Elem>, x: &F::Elem) -> Option<F::Elem> {
        let n = self.ring.eval(&a.num, x);
        let d = self.ring.eval(&a.den, x);
        self.ring.field().div(&n, &d)
    }
}

impl<F: Field> Field for RatFuncField<F> {
    type Elem = RatFunc<F::Elem>;

    fn zero(&self) -> Self::Elem {
        RatFunc {
            num: Polynomial::zero(),
            den: self.ring.one(),
        }
    }

    fn one(&self) -> Self::Elem {
        RatFunc {
            num: self.ring.one(),
            den: self.ring.one(),
        }
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.num.is_zero()
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        self.ring.is_one(&a.num) && self.ring.is_one(&a.den)
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let ring = &self.ring;
        if a.is_zero() {
            return b.clone();
        }
        if b.is_zero() {
            return a.clone();
        }
        if a.den == b.den {
            let num = ring.add(&a.num, &b.num);
            if ring.is_one(&a.den) {
                return self.from_poly(num);
            }
            return self.from_parts(num, a.den.clone()).expect("nonzero den");
        }
        let g = ring.gcd(&a.den, &b.den).expect("nonzero dens");
        if ring.is_one(&g) {
            // coprime denominators: the sum is already reduced
            let num = ring.add(&ring.mul(&a.num, &b.den), &ring.mul(&b.num, &a.den));
            if num.is_zero() {
                return self.zero();
            }
            return RatFunc {
                num,
                den: ring.mul(&a.den, &b.den),
            };
        }
        let a_cofactor = ring.div_exact(&a.den, &g);
        let b_cofactor = ring.div_exact(&b.den, &g);
        let num = ring.add(
            &ring.mul(&a.num, &b_cofactor),
            &ring.mul(&b.num, &a_cofactor),
        );
        if num.is_zero() {
            return self.zero();
        }
        let h = ring.gcd(&num, &g).expect("nonzero");
        let den = ring.mul(&ring.mul(&a_cofactor, &b_cofactor), &g);
        if ring.is_one(&h) {
            RatFunc { num, den }
        } else {
            RatFunc {
                num: ring.div_exact(&num, &h),
                den: ring.div_exact(&den, &h),
            }
        }
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        RatFunc {
            num: self.ring.neg(&a.num),
            den: a.den.clone(),
        }
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let ring = &self.ring;
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        if ring.is_one(&a.den) && ring.is_one(&b.den) {
            return self.from_poly(ring.mul(&a.num, &b.num));
        }
        let g1 = ring.gcd(&a.num, &b.den).expect("nonzero");
        let g2 = ring.gcd(&b.num, &a.den).expect("nonzero");
        let num = ring.mul(&ring.div_exact(&a.num, &g1), &ring.div_exact(&b.num, &g2));
        let den = ring.mul(&ring.div_exact(&a.den, &g2), &ring.div_exact(&b.den, &g1));
        self.with_monic_den(num, den)
    }

    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem> {
        if a.is_zero() {
            return None;
        }
        Some(self.with_monic_den(a.den.clone(), a.num.clone()))
    }

    fn from_rational(&self, q: &Rational) -> Self::Elem {
        self.constant(self.ring.field().from_rational(q))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{integer, rational};
    use proptest::prelude::*;

    type QPoly = Polynomial<Rational>;

    fn qring() -> PolyRing<RationalField> {
        PolyRing::new(RationalField)
    }

    fn qpoly(coeffs: &[i64]) -> QPoly {
        qring().from_coeffs(coeffs.iter().map(|&c| integer(c)).collect())
    }

    fn qfunc() -> RatFuncField<RationalField> {
        RatFuncField::new(RationalField)
    }

    #[test]
    fn ring_examples() {
        let r = qring();
        assert_eq!(r.mul(&qpoly(&[1, 1]), &qpoly(&[-1, 1])), qpoly(&[-1, 0, 1]));
        let a = qpoly(&[3, 0, 2]);
        assert_eq!(r.add(&a, &QPoly::zero()), a);
        assert_eq!(r.add(&qpoly(&[1, 0, 1]), &qpoly(&[0, 0, -1])), qpoly(&[1]));
        assert_eq!(r.add(&a, &r.neg(&a)), QPoly::zero());
    }

    #[test]
    fn divmod_examples() {
        let r = qring();
        let x5 = r.monomial(integer(1), 5);
        let x2 = r.monomial(integer(1), 2);
        assert_eq!(
            r.divmod(&x5, &x2).unwrap(),
            (r.monomial(integer(1), 3), QPoly::zero())
        );
        assert_eq!(
            r.divmod(&qpoly(&[1, 0, 1]), &qpoly(&[0, 1])).unwrap(),
            (qpoly(&[0, 1]), qpoly(&[1]))
        );
        let c = integer(7);
        let y5c = r.add(&x5, &r.constant(c.clone()));
        assert_eq!(r.divmod(&x5, &y5c).unwrap(), (qpoly(&[1]), r.constant(-c)));
        assert_eq!(
            r.divmod(&x5, &QPoly::zero()),
            Err(PolyError::DivisionByZero)
        );
    }

    #[test]
    fn gcd_examples() {
        let r = qring();
        assert_eq!(
            r.gcd(&qpoly(&[-1, 0, 1]), &qpoly(&[-1, 1])).unwrap(),
            qpoly(&[-1, 1])
        );
        let a = qpoly(&[2, 4, 6]);
        assert_eq!(r.gcd(&a, &QPoly::zero()).unwrap(), r.monic(&a));
        assert_eq!(
            r.gcd(&QPoly::zero(), &QPoly::zero()),
            Err(PolyError::BothZero)
        );
    }

    #[test]
    fn ext_gcd_examples() {
        let r = qring();
        let (a, b) = (qpoly(&[0, 1]), qpoly(&[1, 1]));
        let (g, u, v) = r.ext_gcd(&a, &b).unwrap();
        assert_eq!(g, qpoly(&[1]));
        assert_eq!(r.add(&r.mul(&u, &a), &r.mul(&v, &b)), g);
        let a = qpoly(&[3, 0, 6]);
        let (g, u, v) = r.ext_gcd(&a, &a).unwrap();
        assert_eq!(g, r.monic(&a));
        assert_eq!(r.add(&r.mul(&u, &a), &r.mul(&v, &a)), g);
        assert_eq!(
            r.ext_gcd(&QPoly::zero(), &QPoly::zero()),
            Err(PolyError::BothZero)
        );
    }

    #[test]
    fn resultant_examples() {
        let r = qring();
        let (c, d) = (rational(3, 2), integer(-5));
        let lin = |t: &Rational| r.from_coeffs(vec![-t.clone(), integer(1)]);
        assert_eq!(r.resultant(&lin(&c), &lin(&d)).unwrap(), &c - &d);
        let p = qpoly(&[-2, 0, 1]);
        assert_eq!(r.resultant(&p, &p).unwrap(), integer(0));
        assert_eq!(r.resultant(&p, &QPoly::zero()), Err(PolyError::ZeroInput));
        // resultant of a constant: c^deg
        assert_eq!(r.resultant(&qpoly(&[3]), &p).unwrap(), integer(9));
    }

    #[test]
    fn ratfunc_examples() {
        let f = qfunc();
        let x = f.variable();
        let inv_x = f.inv(&x).unwrap();
        assert_eq!(f.mul(&inv_x, &x), f.one());
        assert_eq!(f.add(&x, &f.neg(&x)), f.zero());
        let x_plus_1 = f.from_poly(qpoly(&[1, 1]));
        let a = f.div(&x, &x_plus_1).unwrap();
        let b = f.div(&f.one(), &x_plus_1).unwrap();
        assert_eq!(f.add(&a, &b), f.one());
        assert_eq!(f.inv(&f.zero()), None);
        assert_eq!(
            f.from_parts(qpoly(&[1]), QPoly::zero()),
            Err(PolyError::DivisionByZero)
        );
    }

    #[test]
    fn canonical_form_is_reduced_with_monic_den() {
        let f = qfunc();
        // (2x^2 - 2) / (4x - 4) = (x + 1) / 2
        let a = f.from_parts(qpoly(&[-2, 0, 2]), qpoly(&[-4, 4])).unwrap();
        assert_eq!(
            a.num(),
            &qring().from_coeffs(vec![rational(1, 2), rational(1, 2)])
        );
        assert!(qring().is_one(a.den()));
        // normalizing an already-canonical pair changes nothing
        let again = f.from_parts(a.num().clone(), a.den().clone()).unwrap();
        assert_eq!(again, a);
    }

    // Independent oracle: Sylvester determinant by cofactor expansion.
    fn determinant(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 0 {
            return integer(1);
        }
        if n == 1 {
            return m[0][0].clone();
        }
        let mut total = integer(0);
        for col in 0..n {
            if m[0][col].is_zero() {
                continue;
            }
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != col)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = &m[0][col] * determinant(&minor);
            if col % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
        }
        total
    }

    fn sylvester_resultant(a: &QPoly, b: &QPoly) -> Rational {
        let m = a.degree().unwrap();
        let n = b.degree().unwrap();
        let size = m + n;
        let mut rows = Vec::new();
        for i in 0..n {
            let mut row = vec![integer(0); size];
            for (k, c) in a.coeffs().iter().rev().enumerate() {
                row[i + k] = c.clone();
            }
            rows.push(row);
        }
        for i in 0..m {
            let mut row = vec![integer(0); size];
            for (k, c) in b.coeffs().iter().rev().enumerate() {
                row[i + k] = c.clone();
            }
            rows.push(row);
        }
        determinant(&rows)
    }

    fn small_poly(max_deg: usize) -> impl Strategy<Value = QPoly> {
        prop::collection::vec(-4i64..=4, 0..=max_deg + 1).prop_map(|c| qpoly(&c))
    }

    fn nonconstant_poly(max_deg: usize) -> impl Strategy<Value = QPoly> {
        (prop::collection::vec(-4i64..=4, 1..=max_deg), 1i64..=3).prop_map(|(mut c, lead)| {
            c.push(lead);
            qpoly(&c)
        })
    }

    fn small_ratfunc() -> impl Strategy<Value = RatFunc<Rational>> {
        (small_poly(3), small_poly(2)).prop_map(|(n, d)| {
            let d = if d.is_zero() { qpoly(&[1]) } else { d };
            qfunc().from_parts(n, d).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_axioms(a in small_poly(4), b in small_poly(4), c in small_poly(4)) {
            let r = qring();
            prop_assert_eq!(r.add(&a, &b), r.add(&b, &a));
            prop_assert_eq!(r.mul(&a, &b), r.mul(&b, &a));
            prop_assert_eq!(r.mul(&r.mul(&a, &b), &c), r.mul(&a, &r.mul(&b, &c)));
            prop_assert_eq!(r.mul(&a, &r.add(&b, &c)), r.add(&r.mul(&a, &b), &r.mul(&a, &c)));
            prop_assert_eq!(r.mul(&a, &r.one()), a.clone());
            prop_assert!(r.add(&a, &r.neg(&a)).is_zero());
        }

        #[test]
        fn divmod_identity(a in small_poly(6), b in nonconstant_poly(3)) {
            let r = qring();
            let (q, rem) = r.divmod(&a, &b).unwrap();
            prop_assert_eq!(r.add(&r.mul(&q, &b), &rem), a);
            prop_assert!(rem.degree().map_or(true, |d| d < b.degree().unwrap()));
        }

        #[test]
        fn gcd_scales_with_common_factor(a in nonconstant_poly(3), b in nonconstant_poly(3), c in nonconstant_poly(2)) {
            let r = qring();
            let g = r.gcd(&a, &b).unwrap();
            prop_assume!(r.is_one(&g));
            let lhs = r.gcd(&r.mul(&a, &c), &r.mul(&b, &c)).unwrap();
            prop_assert_eq!(lhs, r.monic(&c));
        }

        #[test]
        fn gcd_with_repeated_factor_matches_euclid(
            a in nonconstant_poly(4),
            b in nonconstant_poly(4),
            c in nonconstant_poly(3),
        ) {
            let r = qring();
            let a = r.mul(&r.mul(&a, &c), &c);
            let b = r.mul(&b, &c);
            let (g, _, _) = r.ext_gcd(&a, &b).unwrap();
            prop_assert_eq!(r.gcd(&a, &b).unwrap(), g);
        }

        #[test]
        fn fraction_free_solve(entries in proptest::collection::vec(small_poly(2), 12)) {
            let r = qring();
            let m: Vec<Vec<QPoly>> = entries.chunks(4).take(3).map(|row| row[..3].to_vec()).collect();
            let rhs: Vec<QPoly> = entries.chunks(4).take(3).map(|row| row[3].clone()).collect();
            match r.solve_fraction_free(m.clone(), rhs.clone()) {
                Some((d, v)) => {
                    prop_assert!(!d.is_zero());
                    for (row, b) in m.iter().zip(&rhs) {
                        let lhs = row.iter().zip(&v).fold(QPoly::zero(), |acc, (x, y)| r.add(&acc, &r.mul(x, y)));
                        prop_assert_eq!(lhs, r.mul(&d, b));
                    }
                }
                None => {
                    // singular: the 3x3 determinant vanishes
                    let det = |i: usize, j: usize, k: usize| r.mul(&m[0][i], &r.sub(&r.mul(&m[1][j], &m[2][k]), &r.mul(&m[1][k], &m[2][j])));
                    let total = r.add(&r.sub(&det(0, 1, 2), &det(1, 0, 2)), &det(2, 0, 1));
                    prop_assert!(total.is_zero());
                }
            }
        }

        #[test]
        fn bezout_identity(a in small_poly(5), b in small_poly(5)) {
            prop_assume!(!(a.is_zero() && b.is_zero()));
            let r = qring();
            let (g, u, v) = r.ext_gcd(&a, &b).unwrap();
            prop_assert_eq!(r.add(&r.mul(&u, &a), &r.mul(&v, &b)), g.clone());
            prop_assert_eq!(g.clone(), r.gcd(&a, &b).unwrap());
            prop_assert!(g.leading().unwrap().is_one());
        }

        #[test]
        fn resultant_matches_sylvester(a in nonconstant_poly(4), b in nonconstant_poly(4)) {
            let r = qring();
            prop_assert_eq!(r.resultant(&a, &b).unwrap(), sylvester_resultant(&a, &b));
        }

        #[test]
        fn resultant_vanishes_iff_common_factor(a in nonconstant_poly(3), b in nonconstant_poly(3), c in small_poly(1)) {
            let r = qring();
            let (a, b) = if c.degree() == Some(1) { (r.mul(&a, &c), r.mul(&b, &c)) } else { (a, b) };
            let res = r.resultant(&a, &b).unwrap();
            let g = r.gcd(&a, &b).unwrap();
            prop_assert_eq!(res.is_zero(), g.degree().unwrap() > 0);
        }

        #[test]
        fn ratfunc_field_axioms(a in small_ratfunc(), b in small_ratfunc(), c in small_ratfunc()) {
            let f = qfunc();
            prop_assert_eq!(f.add(&a, &b), f.add(&b, &a));
            prop_assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
            prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
            prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
            prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            prop_assert_eq!(f.add(&a, &f.zero()), a.clone());
            prop_assert_eq!(f.mul(&a, &f.one()), a.clone());
            prop_assert!(f.is_zero(&f.add(&a, &f.neg(&a))));
            if let Some(ai) = f.inv(&a) {
                prop_assert!(f.is_one(&f.mul(&a, &ai)));
            } else {
                prop_assert!(a.is_zero());
            }
        }

        #[test]
        fn ratfunc_equality_is_cross_multiplication(a in small_ratfunc(), b in small_ratfunc()) {
            let r = qring();
            let cross_equal = r.mul(a.num(), b.den()) == r.mul(b.num(), a.den());
            prop_assert_eq!(a == b, cross_equal);
        }

        #[test]
        fn ratfunc_over_ratfunc_axioms(a in small_ratfunc(), b in small_ratfunc(), c in small_ratfunc()) {
            // Q(s)(t): constants of the outer field are rational functions in s
            let inner = qfunc();
            let outer = RatFuncField::new(inner.clone());
            let ring = outer.ring();
            let p = outer.from_parts(ring.from_coeffs(vec![a.clone(), b.clone()]), ring.from_coeffs(vec![c.clone(), inner.one()])).unwrap();
            let q = outer.from_parts(ring.from_coeffs(vec![b.clone(), inner.one()]), ring.one()).unwrap();
            prop_assert_eq!(outer.mul(&outer.add(&p, &q), &p), outer.add(&outer.mul(&p, &p), &outer.mul(&q, &p)));
            if let Some(pi) = outer.inv(&p) {
                prop_assert!(outer.is_one(&outer.mul(&p, &pi)));
            }
        }
    }
}
