//! The field tower F_0 = Q, F_{s+1} = F_s(x_s)[y_s] / (x_s^p + y_s^p - 1).
//!
//! An element of level `s + 1` is a polynomial in `y_s` of degree below `p_s`
//! whose coefficients are reduced rational functions in `x_s` over `F_s`.
//! Every nesting depth keeps monic denominators, so two elements of the same
//! level are equal exactly when their representations are identical.
//!
//! Besides Fermat levels a tower may contain purely transcendental levels
//! (adjoin `x_s` only). Those are used for fields of symbolic generators,
//! e.g. Q(a_0, ..., a_n) when eliminating variables.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use thiserror::Error;

use crate::arith::{format_rational, is_prime, rational_bits, Nat, Rational};
use crate::poly::{modq, Field, PolyRing, Polynomial, RatFunc, RatFuncField};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("exponent {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("exponent {0} gives genus below 2; pass the unchecked flag to allow it")]
    GenusTooSmall(u64),
    #[error("exponent {0} appears twice")]
    RepeatedPrime(u64),
    #[error("depth {depth} exceeds the {available} listed primes")]
    DepthTooLarge { depth: usize, available: usize },
    #[error("generator index {index} is out of range for depth {depth}")]
    GeneratorOutOfRange { index: usize, depth: usize },
    #[error("level {level} has no y generator")]
    NoYGenerator { level: usize },
    #[error("cannot represent a level-{from} element at level {to}")]
    CannotLower { from: usize, to: usize },
    #[error("level {level} exceeds tower depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("inversion of zero")]
    InverseOfZero,
    #[error("substitution sends a denominator to zero")]
    SubstitutionPole,
    #[error("substitution is missing the image of level {0}")]
    MissingImage(usize),
}

/// What a level adjoins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LevelKind {
    /// `x_s` transcendental, then `y_s` with `x_s^p + y_s^p = 1`.
    Fermat(u64),
    /// `x_s` only.
    Transcendental,
}

impl LevelKind {
    /// Bound on the stored `y` degree.
    fn y_bound(self) -> usize {
        match self {
            LevelKind::Fermat(p) => p as usize,
            LevelKind::Transcendental => 1,
        }
    }
}

/// Prime list and depth for a Fermat tower.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerConfig {
    pub primes: Vec<u64>,
    pub depth: usize,
    /// Allows p = 3 (genus 1). Exponents must still be distinct odd primes.
    pub unchecked: bool,
}

impl TowerConfig {
    pub fn new(primes: Vec<u64>) -> Self {
        let depth = primes.len();
        TowerConfig {
            primes,
            depth,
            unchecked: false,
        }
    }

    pub fn unchecked(mut self) -> Self {
        self.unchecked = true;
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn validate(&self) -> Result<(), TowerError> {
        if self.depth > self.primes.len() {
            return Err(TowerError::DepthTooLarge {
                depth: self.depth,
                available: self.primes.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for &p in &self.primes[..self.depth] {
            if p % 2 == 0 || !is_prime(&Nat::from(p)) {
                return Err(TowerError::NotOddPrime(p));
            }
            if p <= 3 && !self.unchecked {
                return Err(TowerError::GenusTooSmall(p));
            }
            if !seen.insert(p) {
                return Err(TowerError::RepeatedPrime(p));
            }
        }
        Ok(())
    }
}

/// Canonical element of some level of a tower.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TowerElem {
    Rational(Rational),
    Ext(Arc<ExtElem>),
}

/// Level `level >= 1`: coefficients of `y_{level-1}^k`, each a function of `x_{level-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElem {
    level: usize,
    coeffs: Vec<RatFunc<TowerElem>>,
}

impl TowerElem {
    pub fn level(&self) -> usize {
        match self {
            TowerElem::Rational(_) => 0,
            TowerElem::Ext(e) => e.level,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            TowerElem::Rational(q) => q.is_zero(),
            TowerElem::Ext(e) => e.coeffs.is_empty(),
        }
    }

    /// Coefficients in `y` of an element of level >= 1.
    pub fn y_coeffs(&self) -> &[RatFunc<TowerElem>] {
        match self {
            TowerElem::Rational(_) => &[],
            TowerElem::Ext(e) => &e.coeffs,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            TowerElem::Rational(q) => Some(q),
            TowerElem::Ext(_) => None,
        }
    }

    /// The rational number this element equals, if it is one.
    pub fn rational_value(&self) -> Option<Rational> {
        match self {
            TowerElem::Rational(q) => Some(q.clone()),
            TowerElem::Ext(e) => match e.coeffs.as_slice() {
                [] => Some(Rational::zero()),
                [c] if c.is_constant() => c.num().coeff(0)?.rational_value(),
                _ => None,
            },
        }
    }

    /// Lowest level whose generators this element actually uses.
    pub fn native_level(&self) -> usize {
        match self {
            TowerElem::Rational(_) => 0,
            TowerElem::Ext(e) => match e.coeffs.as_slice() {
                [] => 0,
                [c] if c.is_constant() => c.num().coeff(0).map_or(0, |k| k.native_level()),
                _ => e.level,
            },
        }
    }

    /// Number of nonzero rational leaves and the largest bit length among them.
    pub fn size(&self) -> (usize, u64) {
        let mut count = 0;
        let mut bits = 0;
        self.visit_leaves(&mut |q| {
            count += 1;
            bits = bits.max(rational_bits(q));
        });
        (count, bits)
    }

    fn visit_leaves(&self, f: &mut impl FnMut(&Rational)) {
        match self {
            TowerElem::Rational(q) => {
                if !q.is_zero() {
                    f(q)
                }
            }
            TowerElem::Ext(e) => {
                for c in &e.coeffs {
                    for k in c.num().coeffs().iter().chain(c.den().coeffs()) {
                        k.visit_leaves(f);
                    }
                }
            }
        }
    }
}

fn write_poly(f: &mut fmt::Formatter<'_>, p: &Polynomial<TowerElem>) -> fmt::Result {
    write!(f, "[")?;
    for (i, c) in p.coeffs().iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, "]")
}

/// Canonical serialization: rationals as `n` or `n/d`, a level-s element as
/// `L<s>{(num;den),...}` listing the `y` coefficients from degree 0 upward,
/// each numerator and denominator as a bracketed coefficient list in `x`.
impl fmt::Display for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerElem::Rational(q) => write!(f, "{}", format_rational(q)),
            TowerElem::Ext(e) => {
                write!(f, "L{}{{", e.level)?;
                for (i, c) in e.coeffs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "(")?;
                    write_poly(f, c.num())?;
                    write!(f, ";")?;
                    write_poly(f, c.den())?;
                    write!(f, ")")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// Image of one level's generators under a substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorImage {
    pub x: TowerElem,
    /// Ignored for transcendental levels.
    pub y: Option<TowerElem>,
}

#[derive(Debug)]
struct LevelData {
    kind: LevelKind,
    x_name: String,
    y_name: String,
    one: TowerElem,
    /// `1 - x^p` as a coefficient of the level above; `None` for transcendental levels.
    relation: Option<RatFunc<TowerElem>>,
    /// `Y^p + x^p - 1` over the coefficient field.
    modulus: Option<Polynomial<RatFunc<TowerElem>>>,
}

#[derive(Debug)]
struct TowerInner {
    levels: Vec<LevelData>,
    residues: ResiduePoints,
}

/// A point of the tower's variety over `F_q`, used for fast coprimality tests.
#[derive(Debug, Clone)]
struct ResiduePoints {
    q: u64,
    /// `(x_s, y_s)` residues; `y_s` is absent on transcendental levels.
    points: Vec<(u64, Option<u64>)>,
}

impl ResiduePoints {
    fn new(kinds: &[LevelKind]) -> ResiduePoints {
        let exps: Vec<u64> = kinds
            .iter()
            .filter_map(|k| match k {
                LevelKind::Fermat(p) => Some(*p),
                LevelKind::Transcendental => None,
            })
            .collect();
        // q - 1 prime to every exponent makes p-th roots unique in F_q
        let mut q: u64 = (1 << 62) - 1;
        while !(is_prime(&Nat::from(q)) && exps.iter().all(|&p| (q - 1) % p != 0)) {
            q -= 2;
        }
        let points = kinds
            .iter()
            .enumerate()
            .map(|(s, kind)| {
                let x = 1_000_003 + 7919 * s as u64;
                let y = match kind {
                    LevelKind::Fermat(p) => {
                        let rhs = modq::sub(1, modq::pow(x, *p, q), q);
                        let e = inverse_mod(*p, q - 1);
                        Some(modq::pow(rhs, e, q))
                    }
                    LevelKind::Transcendental => None,
                };
                (x, y)
            })
            .collect();
        ResiduePoints { q, points }
    }
}

fn inverse_mod(a: u64, m: u64) -> u64 {
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    assert_eq!(r0, 1, "not invertible");
    t0.rem_euclid(m as i128) as u64
}

/// A built tower; cheap to clone and read-only after construction.
#[derive(Debug, Clone)]
pub struct Tower {
    inner: Arc<TowerInner>,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.kinds() == other.kinds()
    }
}

/// Arithmetic on elements of exactly one level of a tower.
#[derive(Debug, Clone)]
pub struct LevelField {
    tower: Tower,
    level: usize,
}

type CoeffField = RatFuncField<LevelField>;

impl Tower {
    /// Builds the Fermat tower described by `config`.
    pub fn new(config: &TowerConfig) -> Result<Tower, TowerError> {
        config.validate()?;
        let kinds = config.primes[..config.depth]
            .iter()
            .map(|&p| LevelKind::Fermat(p))
            .collect();
        Ok(Tower::from_levels(kinds))
    }

    /// Q(a_0, ..., a_{n-1}) as a tower of transcendental levels named `a0`, `a1`, ...
    pub fn rational_function_field(n: usize, prefix: &str) -> Tower {
        let names = (0..n)
            .map(|i| (format!("{prefix}{i}"), String::new()))
            .collect();
        Tower::with_names(vec![LevelKind::Transcendental; n], names)
    }

    /// Arbitrary level list with default generator names.
    pub fn from_levels(kinds: Vec<LevelKind>) -> Tower {
        let names = (0..kinds.len())
            .map(|i| (format!("x{i}"), format!("y{i}")))
            .collect();
        Tower::with_names(kinds, names)
    }

    pub fn with_names(kinds: Vec<LevelKind>, names: Vec<(String, String)>) -> Tower {
        let residues = ResiduePoints::new(&kinds);
        let mut tower = Tower {
            inner: Arc::new(TowerInner {
                levels: Vec::new(),
                residues: residues.clone(),
            }),
        };
        let mut levels: Vec<LevelData> = Vec::new();
        let mut one = TowerElem::Rational(Rational::one());
        for (s, (kind, (x_name, y_name))) in kinds.into_iter().zip(names).enumerate() {
            let lower = LevelField {
                tower: tower.clone(),
                level: s,
            };
            let coeff_field = RatFuncField::new(lower);
            let (relation, modulus) = match kind {
                LevelKind::Fermat(p) => {
                    let x_pow = coeff_field.pow(&coeff_field.variable(), p);
                    let relation = coeff_field.sub(&coeff_field.one(), &x_pow);
                    // Y^p + x^p - 1
                    let mut m = vec![coeff_field.neg(&relation)];
                    m.extend((1..p).map(|_| coeff_field.zero()));
                    m.push(coeff_field.one());
                    (
                        Some(relation),
                        Some(PolyRing::new(coeff_field.clone()).from_coeffs(m)),
                    )
                }
                LevelKind::Transcendental => (None, None),
            };
            one = TowerElem::Ext(Arc::new(ExtElem {
                level: s + 1,
                coeffs: vec![coeff_field.constant(one)],
            }));
            levels.push(LevelData {
                kind,
                x_name,
                y_name,
                one: one.clone(),
                relation,
                modulus,
            });
            // later levels need the earlier ones in place
            tower = Tower {
                inner: Arc::new(TowerInner {
                    levels: levels.iter().map(LevelData::shallow_clone).collect(),
                    residues: residues.clone(),
                }),
            };
        }
        tower
    }

    pub fn depth(&self) -> usize {
        self.inner.levels.len()
    }

    /// Image of `a` at the tower's residue point, `None` on a pole.
    fn residue(&self, a: &TowerElem) -> Option<u64> {
        let rp = &self.inner.residues;
        self.residue_at(a, rp.q, &rp.points)
    }

    /// Image of `a` over `F_q` at the point with coordinates `points[s] = (x_s, y_s)`,
    /// `None` on a pole. `y_s` may be `None` on transcendental levels.
    pub fn residue_at(&self, a: &TowerElem, q: u64, points: &[(u64, Option<u64>)]) -> Option<u64> {
        match a {
            TowerElem::Rational(x) => modq::from_rational(x, q),
            TowerElem::Ext(e) => {
                let (x, y) = points[e.level - 1];
                let eval = |p: &Polynomial<TowerElem>| -> Option<u64> {
                    let cs: Option<Vec<u64>> = p
                        .coeffs()
                        .iter()
                        .map(|c| self.residue_at(c, q, points))
                        .collect();
                    Some(modq::eval(&cs?, x, q))
                };
                let mut acc = 0;
                for (k, c) in e.coeffs.iter().enumerate().rev() {
                    if k + 1 < e.coeffs.len() {
                        acc = modq::mul(acc, y?, q);
                    }
                    let v = modq::mul(eval(c.num())?, modq::inv(eval(c.den())?, q)?, q);
                    acc = modq::add(acc, v, q);
                }
                Some(acc)
            }
        }
    }

    /// A point over `F_q` with the given `x` coordinates, or `None` when some
    /// exponent divides `q - 1` and `p`-th roots are not unique.
    pub fn point_over(&self, q: u64, xs: &[u64]) -> Option<Vec<(u64, Option<u64>)>> {
        self.inner
            .levels
            .iter()
            .zip(xs)
            .map(|(level, &x)| match level.kind {
                LevelKind::Fermat(p) => {
                    if (q - 1) % p == 0 {
                        return None;
                    }
                    let rhs = modq::sub(1, modq::pow(x, p, q), q);
                    Some((x, Some(modq::pow(rhs, inverse_mod(p, q - 1), q))))
                }
                LevelKind::Transcendental => Some((x, None)),
            })
            .collect()
    }

    pub fn kinds(&self) -> Vec<LevelKind> {
        self.inner.levels.iter().map(|l| l.kind).collect()
    }

    pub fn level_kind(&self, index: usize) -> Option<LevelKind> {
        self.inner.levels.get(index).map(|l| l.kind)
    }

    /// Fermat exponent of level `index`, if that level is a Fermat level.
    pub fn prime(&self, index: usize) -> Option<u64> {
        match self.level_kind(index)? {
            LevelKind::Fermat(p) => Some(p),
            LevelKind::Transcendental => None,
        }
    }

    pub fn primes(&self) -> Vec<u64> {
        (0..self.depth()).filter_map(|i| self.prime(i)).collect()
    }

    pub fn field(&self, level: usize) -> LevelField {
        assert!(
            level <= self.depth(),
            "level {level} beyond depth {}",
            self.depth()
        );
        LevelField {
            tower: self.clone(),
            level,
        }
    }

    pub fn top(&self) -> LevelField {
        self.field(self.depth())
    }

    pub fn zero_at(&self, level: usize) -> TowerElem {
        if level == 0 {
            TowerElem::Rational(Rational::zero())
        } else {
            ext(level, Vec::new())
        }
    }

    pub fn one_at(&self, level: usize) -> TowerElem {
        if level == 0 {
            TowerElem::Rational(Rational::one())
        } else {
            self.inner.levels[level - 1].one.clone()
        }
    }

    pub fn rational(&self, q: Rational) -> TowerElem {
        TowerElem::Rational(q)
    }

    pub fn int(&self, n: i64) -> TowerElem {
        TowerElem::Rational(Rational::from_integer(n.into()))
    }

    /// x_i, living at level i + 1.
    pub fn gen_x(&self, index: usize) -> Result<TowerElem, TowerError> {
        if index >= self.depth() {
            return Err(TowerError::GeneratorOutOfRange {
                index,
                depth: self.depth(),
            });
        }
        let cf = self.coeff_field(index + 1);
        Ok(ext(index + 1, vec![cf.variable()]))
    }

    /// y_i, living at level i + 1.
    pub fn gen_y(&self, index: usize) -> Result<TowerElem, TowerError> {
        if index >= self.depth() {
            return Err(TowerError::GeneratorOutOfRange {
                index,
                depth: self.depth(),
            });
        }
        if self.inner.levels[index].kind == LevelKind::Transcendental {
            return Err(TowerError::NoYGenerator { level: index });
        }
        let cf = self.coeff_field(index + 1);
        Ok(ext(index + 1, vec![cf.zero(), cf.one()]))
    }

    fn coeff_field(&self, level: usize) -> CoeffField {
        RatFuncField::new(self.field(level - 1))
    }

    /// Re-expresses `a` at a level at or above its own.
    pub fn coerce(&self, a: &TowerElem, level: usize) -> Result<TowerElem, TowerError> {
        let from = a.level();
        if level < from {
            return Err(TowerError::CannotLower { from, to: level });
        }
        if level > self.depth() {
            return Err(TowerError::LevelOutOfRange {
                level,
                depth: self.depth(),
            });
        }
        let mut current = a.clone();
        for l in from + 1..=level {
            current = if current.is_zero() {
                self.zero_at(l)
            } else {
                let cf = self.coeff_field(l);
                ext(l, vec![cf.constant(current)])
            };
        }
        Ok(current)
    }

    fn lift_pair(&self, a: &TowerElem, b: &TowerElem) -> (usize, TowerElem, TowerElem) {
        let level = a.level().max(b.level());
        let a = self.coerce(a, level).expect("upward coercion");
        let b = self.coerce(b, level).expect("upward coercion");
        (level, a, b)
    }

    pub fn add(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        let (level, a, b) = self.lift_pair(a, b);
        self.field(level).add(&a, &b)
    }

    pub fn sub(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        let (level, a, b) = self.lift_pair(a, b);
        self.field(level).sub(&a, &b)
    }

    pub fn mul(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        let (level, a, b) = self.lift_pair(a, b);
        self.field(level).mul(&a, &b)
    }

    pub fn neg(&self, a: &TowerElem) -> TowerElem {
        self.field(a.level()).neg(a)
    }

    pub fn inv(&self, a: &TowerElem) -> Result<TowerElem, TowerError> {
        self.field(a.level())
            .inv(a)
            .ok_or(TowerError::InverseOfZero)
    }

    pub fn div(&self, a: &TowerElem, b: &TowerElem) -> Result<TowerElem, TowerError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &TowerElem, exp: u64) -> TowerElem {
        self.field(a.level()).pow(a, exp)
    }

    /// Field equality, comparing at the higher of the two levels.
    pub fn eq(&self, a: &TowerElem, b: &TowerElem) -> bool {
        if a.level() == b.level() {
            return a == b;
        }
        let (_, a, b) = self.lift_pair(a, b);
        a == b
    }

    /// Re-expresses `a` at a lower level when it does not use the generators in between.
    pub fn lower(&self, a: &TowerElem, level: usize) -> Option<TowerElem> {
        let mut current = a.clone();
        while current.level() > level {
            current = match current.y_coeffs() {
                [] => self.zero_at(current.level() - 1),
                [c] if c.is_constant() => c.num().coeff(0)?.clone(),
                _ => return None,
            };
        }
        Some(current)
    }

    /// The element `p(x_index)` of level `index + 1`, for `p` with coefficients of level `index`.
    pub fn from_x_poly(&self, index: usize, p: Polynomial<TowerElem>) -> TowerElem {
        if p.is_zero() {
            return self.zero_at(index + 1);
        }
        ext(index + 1, vec![self.coeff_field(index + 1).from_poly(p)])
    }

    /// Evaluates `a` with each generator replaced by its image, computing in `target`.
    pub fn substitute(
        &self,
        a: &TowerElem,
        images: &[GeneratorImage],
        target: &Tower,
    ) -> Result<TowerElem, TowerError> {
        match a {
            TowerElem::Rational(q) => Ok(target.rational(q.clone())),
            TowerElem::Ext(e) => {
                let s = e.level - 1;
                let image = images.get(s).ok_or(TowerError::MissingImage(s))?;
                let mut acc = target.int(0);
                for (k, c) in e.coeffs.iter().enumerate().rev() {
                    if k + 1 < e.coeffs.len() {
                        let y = image.y.as_ref().ok_or(TowerError::MissingImage(s))?;
                        acc = target.mul(&acc, y);
                    }
                    let num = self.substitute_poly(c.num(), &image.x, images, target)?;
                    let den = self.substitute_poly(c.den(), &image.x, images, target)?;
                    let term = target
                        .div(&num, &den)
                        .map_err(|_| TowerError::SubstitutionPole)?;
                    acc = target.add(&acc, &term);
                }
                Ok(acc)
            }
        }
    }

    fn substitute_poly(
        &self,
        p: &Polynomial<TowerElem>,
        x: &TowerElem,
        images: &[GeneratorImage],
        target: &Tower,
    ) -> Result<TowerElem, TowerError> {
        let mut acc = target.int(0);
        for c in p.coeffs().iter().rev() {
            acc = target.mul(&acc, x);
            acc = target.add(&acc, &self.substitute(c, images, target)?);
        }
        Ok(acc)
    }

    /// Identity images for every level, usable with [`Tower::substitute`].
    pub fn identity_images(&self) -> Vec<GeneratorImage> {
        (0..self.depth())
            .map(|i| GeneratorImage {
                x: self.gen_x(i).expect("in range"),
                y: self.gen_y(i).ok(),
            })
            .collect()
    }

    /// Human-readable expression in the generator names.
    pub fn pretty(&self, a: &TowerElem) -> String {
        match a {
            TowerElem::Rational(q) => format_rational(q),
            TowerElem::Ext(e) => {
                let data = &self.inner.levels[e.level - 1];
                let terms: Vec<(String, String)> = e
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| (self.pretty_ratfunc(c, &data.x_name), power(&data.y_name, k)))
                    .collect();
                join_terms(terms)
            }
        }
    }

    fn pretty_ratfunc(&self, c: &RatFunc<TowerElem>, x: &str) -> String {
        let num = self.pretty_poly(c.num(), x);
        if c.den().is_constant() {
            return num;
        }
        let den = self.pretty_poly(c.den(), x);
        format!("{}/{}", wrap(&num), wrap(&den))
    }

    fn pretty_poly(&self, p: &Polynomial<TowerElem>, x: &str) -> String {
        let terms = p
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (self.pretty(c), power(x, k)))
            .collect();
        join_terms(terms)
    }

    /// A seeded random element of the given level with the default [`ElementShape`].
    pub fn random_element<R: Rng>(&self, rng: &mut R, level: usize) -> TowerElem {
        self.random_element_shaped(rng, level, &ElementShape::default())
    }

    /// A short sum of monomials in the generators with small integer
    /// coefficients, sometimes divided by another such sum.
    pub fn random_element_shaped<R: Rng>(
        &self,
        rng: &mut R,
        level: usize,
        shape: &ElementShape,
    ) -> TowerElem {
        let numerator = self.random_polynomial(rng, level, shape);
        if level > 0 && shape.quotient_one_in > 0 && rng.gen_ratio(1, shape.quotient_one_in) {
            loop {
                let denominator = self.random_polynomial(rng, level, shape);
                if !denominator.is_zero() {
                    return self.div(&numerator, &denominator).expect("nonzero");
                }
            }
        }
        numerator
    }

    pub fn random_polynomial<R: Rng>(
        &self,
        rng: &mut R,
        level: usize,
        shape: &ElementShape,
    ) -> TowerElem {
        let terms = rng.gen_range(1..=shape.max_terms.max(1));
        let mut acc = self.zero_at(level);
        for _ in 0..terms {
            let mut term = self
                .coerce(&self.int(rng.gen_range(-3..=3)), level)
                .expect("up");
            for s in 0..level {
                let xe = rng.gen_range(0..=shape.max_exp);
                if xe > 0 {
                    term = self.mul(&term, &self.pow(&self.gen_x(s).expect("in range"), xe));
                }
                if let Ok(y) = self.gen_y(s) {
                    let ye = rng.gen_range(0..=shape.max_exp);
                    if ye > 0 {
                        term = self.mul(&term, &self.pow(&y, ye));
                    }
                }
            }
            acc = self.add(&acc, &term);
        }
        acc
    }
}

/// Size knobs for [`Tower::random_element_shaped`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ElementShape {
    /// Monomials per polynomial, at least one.
    pub max_terms: usize,
    /// Largest exponent of each generator in a monomial.
    pub max_exp: u64,
    /// A quotient is drawn with probability `1 / quotient_one_in`; 0 never divides.
    pub quotient_one_in: u32,
}

impl Default for ElementShape {
    fn default() -> Self {
        ElementShape {
            max_terms: 3,
            max_exp: 2,
            quotient_one_in: 3,
        }
    }
}

impl ElementShape {
    /// Smaller elements, for bulk sampling at deep levels.
    pub fn light() -> Self {
        ElementShape {
            max_terms: 2,
            max_exp: 1,
            quotient_one_in: 4,
        }
    }
}

fn power(name: &str, k: usize) -> String {
    match k {
        0 => String::new(),
        1 => name.to_string(),
        _ => format!("{name}^{k}"),
    }
}

fn wrap(s: &str) -> String {
    if s.contains(['+', ' ', '/']) || s.starts_with('-') {
        format!("({s})")
    } else {
        s.to_string()
    }
}

fn join_terms(terms: Vec<(String, String)>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (coeff, var)) in terms.into_iter().enumerate() {
        let term = match (coeff.as_str(), var.is_empty()) {
            (c, true) => c.to_string(),
            ("1", false) => var,
            ("-1", false) => format!("-{var}"),
            (c, false) => format!("{}*{var}", wrap(c)),
        };
        if i == 0 {
            out.push_str(&term);
        } else if let Some(rest) = term.strip_prefix('-') {
            out.push_str(" - ");
            out.push_str(rest);
        } else {
            out.push_str(" + ");
            out.push_str(&term);
        }
    }
    out
}

fn ext(level: usize, coeffs: Vec<RatFunc<TowerElem>>) -> TowerElem {
    TowerElem::Ext(Arc::new(ExtElem { level, coeffs }))
}

impl LevelData {
    fn shallow_clone(&self) -> LevelData {
        LevelData {
            kind: self.kind,
            x_name: self.x_name.clone(),
            y_name: self.y_name.clone(),
            one: self.one.clone(),
            relation: self.relation.clone(),
            modulus: self.modulus.clone(),
        }
    }
}

impl LevelField {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    fn data(&self) -> &LevelData {
        &self.tower.inner.levels[self.level - 1]
    }

    fn coeff_field(&self) -> CoeffField {
        self.tower.coeff_field(self.level)
    }

    fn y_ring(&self) -> PolyRing<CoeffField> {
        PolyRing::new(self.coeff_field())
    }

    fn to_poly(&self, a: &TowerElem) -> Polynomial<RatFunc<TowerElem>> {
        debug_assert_eq!(a.level(), self.level, "element at the wrong level");
        self.y_ring().from_coeffs(a.y_coeffs().to_vec())
    }

    fn from_poly(&self, p: Polynomial<RatFunc<TowerElem>>) -> TowerElem {
        debug_assert!(p.coeffs().len() <= self.data().kind.y_bound());
        ext(self.level, p.into_coeffs())
    }

    /// Common denominator of the coefficients and the numerators over it, as
    /// polynomials in `x`.
    fn cleared(
        &self,
        coeffs: &[RatFunc<TowerElem>],
    ) -> (Polynomial<TowerElem>, Vec<Polynomial<TowerElem>>) {
        let ring = self.coeff_field().ring().clone();
        let mut den = ring.one();
        for c in coeffs {
            if !ring.is_one(c.den()) {
                let g = ring.gcd(&den, c.den()).expect("nonzero");
                den = ring.mul(&den, &ring.div_exact(c.den(), &g));
            }
        }
        let numer = coeffs
            .iter()
            .map(|c| ring.mul(c.num(), &ring.div_exact(&den, c.den())))
            .collect();
        (den, numer)
    }

    /// Matrix of multiplication by `sum numer[k] y^k` on the basis `1, y, ..., y^(p-1)`.
    fn multiplication_matrix(
        &self,
        numer: &[Polynomial<TowerElem>],
    ) -> Vec<Vec<Polynomial<TowerElem>>> {
        let cf = self.coeff_field();
        let ring = cf.ring();
        let p = self.data().kind.y_bound();
        let relation = self.data().relation.as_ref().expect("Fermat level").num();
        let entry = |k: usize| numer.get(k).cloned().unwrap_or_else(Polynomial::zero);
        // column j holds A * y^j, folded with y^p = 1 - x^p
        (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| {
                        if i >= j {
                            entry(i - j)
                        } else {
                            ring.mul(relation, &entry(i + p - j))
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// A polynomial in `x` vanishing wherever `a` does: the norm down to the
    /// level below of `a` times a denominator. `a` must be nonzero.
    pub fn norm_numerator(&self, a: &TowerElem) -> Polynomial<TowerElem> {
        let (_, numer) = self.cleared(a.y_coeffs());
        if numer.len() == 1 {
            return numer.into_iter().next().expect("one coefficient");
        }
        let ring = self.coeff_field().ring().clone();
        let m = self.multiplication_matrix(&numer);
        let mut rhs = vec![Polynomial::zero(); m.len()];
        rhs[0] = ring.one();
        let (det, _) = ring
            .solve_fraction_free(m, rhs)
            .expect("a nonzero element has a nonsingular multiplication matrix");
        det
    }

    /// Inverse of a nonzero element with at least two `y`-coefficients: clear the
    /// coefficient denominators, then solve `A u = 1` against the multiplication
    /// matrix of `A` over the polynomial ring in `x`.
    fn invert_by_elimination(&self, coeffs: &[RatFunc<TowerElem>]) -> TowerElem {
        let cf = self.coeff_field();
        let ring = cf.ring();
        let (den, numer) = self.cleared(coeffs);
        let p = self.data().kind.y_bound();
        let m = self.multiplication_matrix(&numer);
        let mut rhs = vec![Polynomial::zero(); p];
        rhs[0] = ring.one();
        let (det, v) = ring
            .solve_fraction_free(m, rhs)
            .expect("a nonzero element of a field has an invertible multiplication matrix");
        // 1 - x^p = -(x - 1)(1 + x + ... + x^(p-1)) is the usual shared factor
        let lower = ring.field();
        let one = lower.one();
        let factors = [
            ring.from_coeffs(vec![lower.neg(&one), one.clone()]),
            ring.from_coeffs(vec![one.clone(); p]),
        ];
        let out: Vec<_> = v
            .into_iter()
            .map(|vk| {
                let (mut num, mut d) = (ring.mul(&den, &vk), det.clone());
                for f in &factors {
                    loop {
                        let (qn, rn) = ring.divmod(&num, f).expect("nonzero");
                        if !rn.is_zero() {
                            break;
                        }
                        let (qd, rd) = ring.divmod(&d, f).expect("nonzero");
                        if !rd.is_zero() {
                            break;
                        }
                        num = qn;
                        d = qd;
                    }
                }
                cf.from_parts(num, d).expect("nonzero determinant")
            })
            .collect();
        self.from_poly(self.y_ring().from_coeffs(out))
    }

    /// Folds `y^k` for `k >= p` back using `y^p = 1 - x^p`.
    fn reduce(&self, p: Polynomial<RatFunc<TowerElem>>) -> Polynomial<RatFunc<TowerElem>> {
        let data = self.data();
        let bound = data.kind.y_bound();
        if p.coeffs().len() <= bound {
            return p;
        }
        let relation = data
            .relation
            .as_ref()
            .expect("only Fermat levels exceed the y bound");
        let cf = self.coeff_field();
        let mut coeffs = p.into_coeffs();
        for k in (bound..coeffs.len()).rev() {
            let c = std::mem::replace(&mut coeffs[k], cf.zero());
            if cf.is_zero(&c) {
                continue;
            }
            let folded = cf.mul(&c, relation);
            coeffs[k - bound] = cf.add(&coeffs[k - bound], &folded);
        }
        coeffs.truncate(bound);
        self.y_ring().from_coeffs(coeffs)
    }
}

impl Field for LevelField {
    type Elem = TowerElem;

    fn residue_prime(&self) -> Option<u64> {
        Some(self.tower.inner.residues.q)
    }

    fn residue(&self, a: &TowerElem) -> Option<u64> {
        self.tower.residue(a)
    }

    fn as_rational(&self, a: &TowerElem) -> Option<Rational> {
        match a {
            TowerElem::Rational(x) if self.level == 0 => Some(x.clone()),
            _ => None,
        }
    }

    fn zero(&self) -> TowerElem {
        self.tower.zero_at(self.level)
    }

    fn one(&self) -> TowerElem {
        self.tower.one_at(self.level)
    }

    fn is_zero(&self, a: &TowerElem) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        match (a, b) {
            (TowerElem::Rational(x), TowerElem::Rational(y)) => TowerElem::Rational(x + y),
            _ => {
                if a.is_zero() {
                    return b.clone();
                }
                if b.is_zero() {
                    return a.clone();
                }
                let ring = self.y_ring();
                self.from_poly(ring.add(&self.to_poly(a), &self.to_poly(b)))
            }
        }
    }

    fn neg(&self, a: &TowerElem) -> TowerElem {
        match a {
            TowerElem::Rational(x) => TowerElem::Rational(-x),
            TowerElem::Ext(_) => self.from_poly(self.y_ring().neg(&self.to_poly(a))),
        }
    }

    fn mul(&self, a: &TowerElem, b: &TowerElem) -> TowerElem {
        match (a, b) {
            (TowerElem::Rational(x), TowerElem::Rational(y)) => TowerElem::Rational(x * y),
            _ => {
                if a.is_zero() || b.is_zero() {
                    return self.zero();
                }
                let one = self.one();
                if a == &one {
                    return b.clone();
                }
                if b == &one {
                    return a.clone();
                }
                let product = self.y_ring().mul(&self.to_poly(a), &self.to_poly(b));
                self.from_poly(self.reduce(product))
            }
        }
    }

    fn inv(&self, a: &TowerElem) -> Option<TowerElem> {
        match a {
            TowerElem::Rational(x) => {
                if x.is_zero() {
                    None
                } else {
                    Some(TowerElem::Rational(x.recip()))
                }
            }
            TowerElem::Ext(e) => {
                let cf = self.coeff_field();
                match e.coeffs.as_slice() {
                    [] => None,
                    [c] => Some(ext(self.level, vec![cf.inv(c)?])),
                    _ => Some(self.invert_by_elimination(&e.coeffs)),
                }
            }
        }
    }

    fn from_rational(&self, q: &Rational) -> TowerElem {
        self.tower
            .coerce(&TowerElem::Rational(q.clone()), self.level)
            .expect("within depth")
    }
}

/// Sign-aware check used by tests and reports.
pub fn is_negative_rational(a: &TowerElem) -> bool {
    a.as_rational().is_some_and(|q| q.is_negative())
}
