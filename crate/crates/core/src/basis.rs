//! Annihilating polynomials over subfields generated by tower elements, and
//! membership in a transcendence basis.
//!
//! `t` is shown algebraic over `Q(g_0, ..., g_{n-1})` by a nonzero polynomial
//! `P(T)` whose coefficients are rational functions in symbols `a_j` standing
//! for the `g_j`. Every witness is checked by substituting back before it is
//! returned.

use crate::arith::{is_prime, Nat, Rational};
use crate::census::{self, CensusError};
use crate::poly::{modq, PolyRing, Polynomial};
use crate::tower::{GeneratorImage, LevelKind, Tower, TowerElem, TowerError};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BasisError {
    #[error("at least one generator is required")]
    NoGenerators,
    #[error("no annihilator found within budget")]
    NotFound,
    #[error("no annihilator over the first {tried} basis elements within budget")]
    BudgetExhausted { tried: usize },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Census(#[from] CensusError),
}

/// How [`annihilator`] searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Norms down each Fermat level, then resultants in `x`. Gives up when an
    /// intermediate polynomial exceeds `max_degree` in `x`.
    Elimination { max_degree: usize },
    /// Finds the first linear relation, in order of total degree, among the
    /// values of the monomials in `T` and the symbols at random points of the
    /// curves over large prime fields. The relation is lifted to Q by CRT and
    /// rational reconstruction and kept once it checks exactly. Gives up past
    /// total degree `max_degree` or `max_columns` monomials.
    Interpolation {
        max_degree: usize,
        max_columns: usize,
    },
    /// Tries sparse polynomials with coefficients `+-1` in increasing total
    /// degree, testing each by evaluation.
    Enumeration {
        max_degree: usize,
        max_terms: usize,
        max_candidates: u64,
    },
}

impl Strategy {
    pub fn elimination() -> Strategy {
        Strategy::Elimination { max_degree: 400 }
    }

    pub fn interpolation() -> Strategy {
        Strategy::Interpolation {
            max_degree: 64,
            max_columns: 2500,
        }
    }

    pub fn enumeration() -> Strategy {
        Strategy::Enumeration {
            max_degree: 6,
            max_terms: 3,
            max_candidates: 200_000,
        }
    }
}

/// A nonzero `P(T)` over `Q(a_0, ..., a_{n-1})`, normalized monic when possible.
#[derive(Debug, Clone)]
pub struct AnnihilatorWitness {
    generator_count: usize,
    /// Coefficient of `T^k` at index `k`, as elements of `symbols`.
    coeffs: Vec<TowerElem>,
    symbols: Tower,
}

impl AnnihilatorWitness {
    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[TowerElem] {
        &self.coeffs
    }

    /// `Q(a_0, ..., a_{n-1})`, where the coefficients live.
    pub fn symbols(&self) -> &Tower {
        &self.symbols
    }

    /// Coefficients with each `a_j` replaced by `gens[j]`.
    pub fn coefficient_images(
        &self,
        tower: &Tower,
        gens: &[TowerElem],
    ) -> Result<Vec<TowerElem>, TowerError> {
        let images: Vec<GeneratorImage> = gens
            .iter()
            .map(|g| GeneratorImage {
                x: g.clone(),
                y: None,
            })
            .collect();
        self.coeffs
            .iter()
            .map(|c| self.symbols.substitute(c, &images, tower))
            .collect()
    }

    /// `P(t)` computed in `tower` with `a_j = gens[j]`.
    pub fn evaluate(
        &self,
        tower: &Tower,
        t: &TowerElem,
        gens: &[TowerElem],
    ) -> Result<TowerElem, TowerError> {
        let mut acc = tower.int(0);
        for c in self.coefficient_images(tower, gens)?.iter().rev() {
            acc = tower.add(&tower.mul(&acc, t), c);
        }
        Ok(acc)
    }

    /// Text form in `T` and the symbols `a_j`, highest power first.
    pub fn render(&self) -> String {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let c = self.symbols.pretty(c);
            let t = match k {
                0 => String::new(),
                1 => "T".to_string(),
                _ => format!("T^{k}"),
            };
            terms.push(match (c.as_str(), k) {
                (_, 0) => c,
                ("1", _) => t,
                ("-1", _) => format!("-{t}"),
                _ if c.contains(['+', ' ', '/']) || c[1..].contains('-') => format!("({c})*{t}"),
                _ => format!("{c}*{t}"),
            });
        }
        terms.join(" + ").replace("+ -", "- ")
    }

    /// The witness with `a_j` written as the given names.
    pub fn render_with(&self, names: &[String]) -> String {
        let mut out = self.render();
        for (j, name) in names.iter().enumerate().rev() {
            out = out.replace(&format!("a{j}"), name);
        }
        out
    }
}

/// A computable sequence `a_0, a_1, ...` of tower elements.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisEnumeration {
    /// `z_0, z_1, ...`
    Intrinsic,
    /// `x_0, x_1, ...`
    Coordinates,
    Listed(Vec<TowerElem>),
}

impl BasisEnumeration {
    /// Number of elements that exist in `tower`.
    pub fn len(&self, tower: &Tower) -> usize {
        match self {
            BasisEnumeration::Intrinsic | BasisEnumeration::Coordinates => tower.depth(),
            BasisEnumeration::Listed(v) => v.len(),
        }
    }

    pub fn is_empty(&self, tower: &Tower) -> bool {
        self.len(tower) == 0
    }

    pub fn element(&self, tower: &Tower, i: usize) -> Result<TowerElem, BasisError> {
        match self {
            BasisEnumeration::Intrinsic => intrinsic_basis(tower, i),
            BasisEnumeration::Coordinates => Ok(tower.gen_x(i)?),
            BasisEnumeration::Listed(v) => v.get(i).cloned().ok_or(
                TowerError::LevelOutOfRange {
                    level: i,
                    depth: v.len(),
                }
                .into(),
            ),
        }
    }

    pub fn prefix(&self, tower: &Tower, count: usize) -> Result<Vec<TowerElem>, BasisError> {
        (0..count).map(|i| self.element(tower, i)).collect()
    }
}

/// Search limits for [`member_basis`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemberBudget {
    /// Largest number of basis elements to adjoin.
    pub max_generators: usize,
    /// Used for each generator count in turn.
    pub strategy: Strategy,
}

impl Default for MemberBudget {
    fn default() -> Self {
        MemberBudget {
            max_generators: usize::MAX,
            strategy: Strategy::interpolation(),
        }
    }
}

/// `z_i`.
pub fn intrinsic_basis(tower: &Tower, i: usize) -> Result<TowerElem, BasisError> {
    Ok(census::z_element(tower, i)?)
}

/// A verified nonzero polynomial over `Q(gens)` vanishing at `t`.
pub fn annihilator(
    tower: &Tower,
    t: &TowerElem,
    gens: &[TowerElem],
    strategy: Strategy,
) -> Result<AnnihilatorWitness, BasisError> {
    if gens.is_empty() {
        return Err(BasisError::NoGenerators);
    }
    for e in gens.iter().chain([t]) {
        if e.level() > tower.depth() {
            return Err(TowerError::LevelOutOfRange {
                level: e.level(),
                depth: tower.depth(),
            }
            .into());
        }
    }
    let symbols = symbol_tower(gens.len());
    let linear = |c0: TowerElem| vec![symbols.neg(&c0), symbols.int(1)];
    let coeffs = if let Some(q) = t.rational_value() {
        linear(symbols.rational(q))
    } else if let Some(j) = gens.iter().position(|g| tower.eq(g, t)) {
        linear(symbols.gen_x(j)?)
    } else {
        // a level t uses but no generator does makes t transcendental over Q(gens)
        let (mut in_t, mut in_gens) = (vec![false; tower.depth()], vec![false; tower.depth()]);
        mark_levels(t, &mut in_t);
        gens.iter().for_each(|g| mark_levels(g, &mut in_gens));
        if in_t.iter().zip(&in_gens).any(|(&a, &b)| a && !b) {
            return Err(BasisError::NotFound);
        }
        match strategy {
            Strategy::Elimination { max_degree } => eliminate(tower, t, gens, max_degree)?,
            Strategy::Interpolation {
                max_degree,
                max_columns,
            } => interpolate(tower, t, gens, max_degree, max_columns)?,
            Strategy::Enumeration {
                max_degree,
                max_terms,
                max_candidates,
            } => enumerate(tower, t, gens, max_degree, max_terms, max_candidates)?,
        }
    };
    let raw = AnnihilatorWitness {
        generator_count: gens.len(),
        coeffs,
        symbols: symbols.clone(),
    };
    let lead = raw.coeffs.last().expect("nonzero polynomial");
    let monic = AnnihilatorWitness {
        coeffs: raw
            .coeffs
            .iter()
            .map(|c| symbols.div(c, lead))
            .collect::<Result<_, _>>()?,
        ..raw.clone()
    };
    for w in [monic, raw] {
        // the leading coefficient must survive the substitution, or the
        // polynomial is zero over Q(gens)
        let Ok(images) = w.coefficient_images(tower, gens) else {
            continue;
        };
        if images.last().is_some_and(|c| !c.is_zero()) && w.evaluate(tower, t, gens)?.is_zero() {
            return Ok(w);
        }
    }
    match strategy {
        Strategy::Elimination { .. } => Err(BasisError::InvariantViolation(format!(
            "eliminated polynomial does not annihilate {}",
            tower.pretty(t)
        ))),
        Strategy::Enumeration { .. } | Strategy::Interpolation { .. } => Err(BasisError::NotFound),
    }
}

fn symbol_tower(n: usize) -> Tower {
    Tower::rational_function_field(n, "a")
}

/// Marks the generator indices `a` actually depends on.
fn mark_levels(a: &TowerElem, used: &mut [bool]) {
    let coeffs = a.y_coeffs();
    if let [c] = coeffs {
        if c.is_constant() {
            if let Some(k) = c.num().coeff(0) {
                mark_levels(k, used);
            }
            return;
        }
    }
    if coeffs.is_empty() {
        return;
    }
    used[a.level() - 1] = true;
    for c in coeffs {
        for k in c.num().coeffs().iter().chain(c.den().coeffs()) {
            mark_levels(k, used);
        }
    }
}

/// The tower `Q(a_0, ..., a_{n-1}, T)` with the listed levels of `tower` on top.
fn elimination_tower(tower: &Tower, n: usize, levels: &[usize]) -> Result<Tower, TowerError> {
    let mut kinds = vec![LevelKind::Transcendental; n + 1];
    let mut names: Vec<(String, String)> = (0..n)
        .map(|j| (format!("a{j}"), String::new()))
        .chain([("T".to_string(), String::new())])
        .collect();
    for &s in levels {
        kinds.push(tower.level_kind(s).expect("in range"));
        let y = match tower.gen_y(s) {
            Ok(y) => tower.pretty(&y),
            Err(_) => String::new(),
        };
        names.push((tower.pretty(&tower.gen_x(s)?), y));
    }
    Ok(Tower::with_names(kinds, names))
}

/// Eliminates the tower generators from `t - T = 0` and `g_j - a_j = 0`, top
/// level first: each equation is replaced by its norm in `y_s`, then `x_s` is
/// removed by a resultant against a generator equation.
fn eliminate(
    tower: &Tower,
    t: &TowerElem,
    gens: &[TowerElem],
    max_degree: usize,
) -> Result<Vec<TowerElem>, BasisError> {
    let n = gens.len();
    let base = n + 1;
    let mut used = vec![false; tower.depth()];
    for a in gens.iter().chain([t]) {
        mark_levels(a, &mut used);
    }
    let levels: Vec<usize> = (0..tower.depth()).filter(|&s| used[s]).collect();
    let e = elimination_tower(tower, n, &levels)?;
    let mut images = Vec::new();
    let mut next = base;
    for s in 0..tower.depth() {
        images.push(if used[s] {
            next += 1;
            GeneratorImage {
                x: e.gen_x(next - 1)?,
                y: e.gen_y(next - 1).ok(),
            }
        } else {
            // never reached with more than a constant coefficient
            GeneratorImage {
                x: e.int(0),
                y: Some(e.int(0)),
            }
        });
    }
    let mut target = e.sub(&tower.substitute(t, &images, &e)?, &e.gen_x(n)?);
    let mut others = gens
        .iter()
        .enumerate()
        .map(|(j, g)| Ok(e.sub(&tower.substitute(g, &images, &e)?, &e.gen_x(j)?)))
        .collect::<Result<Vec<_>, TowerError>>()?;

    for m in (base..base + levels.len()).rev() {
        let field = e.field(m + 1);
        let ring = PolyRing::new(e.field(m));
        // a polynomial in x_m over the level below, or the equation itself lowered
        let split =
            |a: &TowerElem| -> Result<Result<Polynomial<TowerElem>, TowerElem>, BasisError> {
                if let Some(low) = e.lower(a, m) {
                    return Ok(Err(low));
                }
                let p = field.norm_numerator(&e.coerce(a, m + 1)?);
                if p.degree().unwrap_or(0) > max_degree {
                    return Err(BasisError::NotFound);
                }
                Ok(match p.degree() {
                    Some(0) | None => Err(p.coeff(0).cloned().unwrap_or_else(|| e.zero_at(m))),
                    _ => Ok(p),
                })
            };
        let mut partners = Vec::new();
        let mut kept = Vec::new();
        for a in &others {
            match split(a)? {
                Ok(p) => partners.push(p),
                Err(low) if !low.is_zero() => kept.push(low),
                Err(_) => {}
            }
        }
        partners.sort_by_key(|p| p.degree());
        target = match split(&target)? {
            Err(low) => low,
            Ok(tp) => partners
                .iter()
                .map(|q| ring.resultant(&tp, q).expect("nonzero inputs"))
                .find(|r| !r.is_zero())
                .ok_or(BasisError::NotFound)?,
        };
        if let Some((pivot, rest)) = partners.split_first() {
            for q in rest {
                let r = ring.resultant(q, pivot).expect("nonzero inputs");
                if !r.is_zero() {
                    kept.push(r);
                }
            }
        }
        others = kept;
    }

    // what is left lives in Q(a_0, ..., a_{n-1})(T) and must involve T
    if target.is_zero() || e.lower(&target, n).is_some() {
        return Err(BasisError::NotFound);
    }
    let target = e.coerce(&target, n + 1)?;
    let [c] = target.y_coeffs() else {
        unreachable!("transcendental levels have no y")
    };
    Ok(c.num().coeffs().to_vec())
}

/// Primes near `2^62` whose predecessor is prime to every exponent of `tower`,
/// so each point has a unique `y` coordinate.
fn point_primes(tower: &Tower) -> impl Iterator<Item = u64> + '_ {
    let mut q: u64 = (1 << 62) - 1;
    std::iter::from_fn(move || loop {
        q -= 2;
        if is_prime(&Nat::from(q)) && tower.point_over(q, &vec![2; tower.depth()]).is_some() {
            return Some(q);
        }
    })
}

/// Values of `t` and the generators at `count` random points over `F_q`.
fn sample_values(
    tower: &Tower,
    t: &TowerElem,
    gens: &[TowerElem],
    q: u64,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(u64, Vec<u64>)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let xs: Vec<u64> = (0..tower.depth()).map(|_| rng.gen_range(2..q)).collect();
        let point = tower
            .point_over(q, &xs)
            .expect("prime chosen for unique roots");
        let at = |a: &TowerElem| tower.residue_at(a, q, &point);
        if let (Some(tv), Some(gv)) = (at(t), gens.iter().map(at).collect::<Option<Vec<_>>>()) {
            out.push((tv, gv));
        }
    }
    out
}

/// The monomial with exponents `exps` of `(a_0, ..., a_{n-1}, T)` at each sample.
fn column(samples: &[(u64, Vec<u64>)], exps: &[usize], q: u64) -> Vec<u64> {
    let n = exps.len() - 1;
    samples
        .iter()
        .map(|(tv, gv)| {
            gv.iter()
                .zip(exps)
                .fold(modq::pow(*tv, exps[n] as u64, q), |acc, (&g, &e)| {
                    modq::mul(acc, modq::pow(g, e as u64, q), q)
                })
        })
        .collect()
}

/// Returns the index of the first column that depends on the earlier ones in
/// a way `accept` likes, with the dependency: coefficients of all columns up
/// to it, the last being 1. Rejected dependent columns are dropped.
fn first_dependency(
    columns: impl Iterator<Item = Vec<u64>>,
    q: u64,
    accept: impl Fn(&[u64]) -> bool,
) -> Option<(usize, Vec<u64>)> {
    // reduced columns with their pivot rows and their expression in the originals
    let mut basis: Vec<(Vec<u64>, usize, Vec<u64>)> = Vec::new();
    for (index, mut c) in columns.enumerate() {
        let mut combo = vec![0u64; index + 1];
        combo[index] = 1;
        for (v, pivot, expr) in &basis {
            let f = c[*pivot];
            if f == 0 {
                continue;
            }
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci = modq::sub(*ci, modq::mul(f, *vi, q), q);
            }
            for (ci, ei) in combo.iter_mut().zip(expr) {
                *ci = modq::sub(*ci, modq::mul(f, *ei, q), q);
            }
        }
        match c.iter().position(|&v| v != 0) {
            None if accept(&combo) => return Some((index, combo)),
            None => {}
            Some(pivot) => {
                let inv = modq::inv(c[pivot], q).expect("nonzero pivot");
                c.iter_mut().for_each(|v| *v = modq::mul(*v, inv, q));
                combo.iter_mut().for_each(|v| *v = modq::mul(*v, inv, q));
                basis.push((c, pivot, combo));
            }
        }
    }
    None
}

/// `a/b` with `a/b = u mod m` and both below `sqrt(m/2)`, if one exists.
fn rational_reconstruction(u: &BigInt, m: &BigInt) -> Option<Rational> {
    let bound = (m / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let k = &r0 / &r1;
        (r0, r1) = (r1.clone(), &r0 - &k * &r1);
        (t0, t1) = (t1.clone(), &t0 - &k * &t1);
    }
    (!t1.is_zero() && t1.abs() <= bound).then(|| Rational::new(r1, t1))
}

/// Modular search for a relation; see [`Strategy::Interpolation`]. The degree
/// bound grows by half from 8, so small relations stay cheap.
fn interpolate(
    tower: &Tower,
    t: &TowerElem,
    gens: &[TowerElem],
    max_degree: usize,
    max_columns: usize,
) -> Result<Vec<TowerElem>, BasisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut bound = 8;
    loop {
        let degree = bound.min(max_degree);
        // exponents of (a_0, ..., a_{n-1}, T) by total degree
        let columns: Vec<Vec<usize>> = (0..=degree)
            .flat_map(|d| exponent_vectors(gens.len() + 1, d))
            .collect();
        if columns.len() > max_columns {
            return Err(BasisError::NotFound);
        }
        if let Some(found) = interpolate_within(tower, t, gens, &columns, &mut rng)? {
            return Ok(found);
        }
        if degree == max_degree {
            return Err(BasisError::NotFound);
        }
        bound += bound / 2;
    }
}

fn interpolate_within(
    tower: &Tower,
    t: &TowerElem,
    gens: &[TowerElem],
    all: &[Vec<usize>],
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<TowerElem>>, BasisError> {
    const MAX_PRIMES: usize = 64;
    let n = gens.len();
    let has_t = |combo: &[u64]| combo.iter().zip(all).any(|(&c, e)| c != 0 && e[n] > 0);
    let mut primes = point_primes(tower);

    // the first prime fixes which columns the relation uses
    let q = primes.next().expect("infinite");
    let samples = sample_values(tower, t, gens, q, all.len() + 8, rng);
    let Some((last, relation)) =
        first_dependency(all.iter().map(|e| column(&samples, e, q)), q, has_t)
    else {
        return Ok(None);
    };
    let (support, mut residues): (Vec<Vec<usize>>, Vec<BigInt>) = (0..=last)
        .filter(|&i| relation[i] != 0)
        .map(|i| (all[i].clone(), BigInt::from(relation[i])))
        .unzip();

    let symbols = symbol_tower(n);
    let mut modulus = BigInt::from(q);
    let mut previous: Option<Vec<Rational>> = None;
    for _ in 1..MAX_PRIMES {
        let lifted: Option<Vec<Rational>> = residues
            .iter()
            .map(|u| rational_reconstruction(u, &modulus))
            .collect();
        if let Some(coeffs) = lifted {
            if previous.as_ref() == Some(&coeffs) {
                let top = support.iter().map(|e| e[n]).max().unwrap_or(0);
                let mut poly = vec![symbols.int(0); top + 1];
                for (exps, c) in support.iter().zip(&coeffs) {
                    let mut m = symbols.rational(c.clone());
                    for (j, &d) in exps[..n].iter().enumerate() {
                        m = symbols.mul(&m, &symbols.pow(&symbols.gen_x(j)?, d as u64));
                    }
                    poly[exps[n]] = symbols.add(&poly[exps[n]], &m);
                }
                let w = AnnihilatorWitness {
                    generator_count: n,
                    coeffs: poly.clone(),
                    symbols: symbols.clone(),
                };
                if w.evaluate(tower, t, gens).is_ok_and(|v| v.is_zero()) {
                    return Ok(Some(poly));
                }
            }
            previous = Some(coeffs);
        }
        // lift one more prime; a prime where the support degenerates is skipped
        let q = primes.next().expect("infinite");
        let samples = sample_values(tower, t, gens, q, support.len() + 8, rng);
        let Some((index, rel)) =
            first_dependency(support.iter().map(|e| column(&samples, e, q)), q, |_| true)
        else {
            continue;
        };
        if index + 1 != support.len() || rel.contains(&0) {
            continue;
        }
        let (qb, mb) = (BigInt::from(q), modulus.clone());
        let inv = mb.modinv(&qb).expect("distinct primes");
        for (u, &r) in residues.iter_mut().zip(&rel) {
            // u' = u + m ((r - u) m^-1 mod q)
            let h = ((BigInt::from(r) - &*u) * &inv).mod_floor(&qb);
            *u = &*u + &mb * h;
        }
        modulus = mb * qb;
    }
    Ok(None)
}

/// Blind search over sparse polynomials with unit coefficients.
fn enumerate(
    tower: &Tower,
    t: &TowerElem,
    gens: &[TowerElem],
    max_degree: usize,
    max_terms: usize,
    max_candidates: u64,
) -> Result<Vec<TowerElem>, BasisError> {
    let n = gens.len();
    // exponent vectors (a_0, ..., a_{n-1}, T) by total degree
    let mut monomials: Vec<Vec<usize>> = Vec::new();
    let mut values: Vec<TowerElem> = Vec::new();
    let mut tried = 0u64;
    for degree in 0..=max_degree {
        let first_new = monomials.len();
        for exps in exponent_vectors(n + 1, degree) {
            let mut v = tower.pow(t, exps[n] as u64);
            for (g, &k) in gens.iter().zip(&exps) {
                v = tower.mul(&v, &tower.pow(g, k as u64));
            }
            monomials.push(exps);
            values.push(v);
        }
        if degree == 0 {
            continue;
        }
        for r in 1..=max_terms.min(monomials.len()) {
            let mut found = None;
            for_each_combination(monomials.len(), r, &mut |idx| {
                // each subset is tried once, at the degree of its largest member
                if *idx.last().expect("r >= 1") < first_new
                    || idx.iter().all(|&i| monomials[i][n] == 0)
                {
                    return true;
                }
                for signs in 0..1u32 << (r - 1) {
                    tried += 1;
                    if tried > max_candidates {
                        return false;
                    }
                    let sign = |k: usize| k > 0 && signs >> (k - 1) & 1 == 1;
                    let mut acc = tower.int(0);
                    for (k, &i) in idx.iter().enumerate() {
                        acc = if sign(k) {
                            tower.sub(&acc, &values[i])
                        } else {
                            tower.add(&acc, &values[i])
                        };
                    }
                    if acc.is_zero() {
                        found = Some(
                            idx.iter()
                                .enumerate()
                                .map(|(k, &i)| (monomials[i].clone(), sign(k)))
                                .collect::<Vec<_>>(),
                        );
                        return false;
                    }
                }
                true
            });
            if let Some(terms) = found {
                return Ok(assemble(n, &terms)?);
            }
            if tried > max_candidates {
                return Err(BasisError::NotFound);
            }
        }
    }
    Err(BasisError::NotFound)
}

/// Collects signed monomials into coefficients of powers of `T`.
fn assemble(n: usize, terms: &[(Vec<usize>, bool)]) -> Result<Vec<TowerElem>, TowerError> {
    let symbols = symbol_tower(n);
    let top = terms.iter().map(|(e, _)| e[n]).max().unwrap_or(0);
    let mut coeffs = vec![symbols.int(0); top + 1];
    for (exps, negative) in terms {
        let mut c = symbols.int(if *negative { -1 } else { 1 });
        for (j, &k) in exps[..n].iter().enumerate() {
            c = symbols.mul(&c, &symbols.pow(&symbols.gen_x(j)?, k as u64));
        }
        coeffs[exps[n]] = symbols.add(&coeffs[exps[n]], &c);
    }
    Ok(coeffs)
}

fn exponent_vectors(vars: usize, degree: usize) -> Vec<Vec<usize>> {
    if vars == 1 {
        return vec![vec![degree]];
    }
    (0..=degree)
        .rev()
        .flat_map(|k| {
            exponent_vectors(vars - 1, degree - k)
                .into_iter()
                .map(move |mut rest| {
                    rest.insert(0, k);
                    rest
                })
        })
        .collect()
}

/// Calls `f` on each increasing `r`-subset of `0..len` until it returns false.
fn for_each_combination(len: usize, r: usize, f: &mut impl FnMut(&[usize]) -> bool) {
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let Some(i) = (0..r).rev().find(|&i| idx[i] < len - r + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Decides `t in {a_0, a_1, ...}`: find the least `n` with `t` algebraic over
/// `Q(a_0, ..., a_n)`, then compare `t` with those elements.
pub fn member_basis(
    tower: &Tower,
    t: &TowerElem,
    basis: &BasisEnumeration,
    budget: MemberBudget,
) -> Result<bool, BasisError> {
    if t.rational_value().is_some() {
        return Ok(false);
    }
    let limit = budget.max_generators.min(basis.len(tower));
    let mut gens = Vec::new();
    for i in 0..limit {
        gens.push(basis.element(tower, i)?);
        match annihilator(tower, t, &gens, budget.strategy) {
            Ok(_) => return Ok(gens.iter().any(|g| tower.eq(g, t))),
            Err(BasisError::NotFound) => continue,
            Err(err) => return Err(err),
        }
    }
    Err(BasisError::BudgetExhausted { tried: limit })
}

/// Witnesses that `z_i` and `x_i` are algebraic over each other: first `z_i`
/// over `Q(x_i)`, then `x_i` over `Q(z_i)`.
pub fn interdependence_check(
    tower: &Tower,
    i: usize,
) -> Result<(AnnihilatorWitness, AnnihilatorWitness), BasisError> {
    let z = intrinsic_basis(tower, i)?;
    let x = tower.gen_x(i)?;
    let z_over_x = annihilator(
        tower,
        &z,
        std::slice::from_ref(&x),
        Strategy::interpolation(),
    )?;
    let x_over_z = annihilator(tower, &x, &[z], Strategy::interpolation())?;
    let p = tower.prime(i).ok_or(CensusError::NotFermat(i))? as usize;
    if z_over_x.degree() > p {
        return Err(BasisError::InvariantViolation(format!(
            "z_{i} has degree {} over Q(x_{i}), above {p}",
            z_over_x.degree()
        )));
    }
    Ok((z_over_x, x_over_z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::TowerConfig;

    fn tower(primes: &[u64]) -> Tower {
        Tower::new(&TowerConfig::new(primes.to_vec())).unwrap()
    }

    #[test]
    fn y_over_x_is_the_defining_relation() {
        let t = tower(&[5]);
        let (x, y) = (t.gen_x(0).unwrap(), t.gen_y(0).unwrap());
        let expected = [
            t.sub(&t.pow(&x, 5), &t.int(1)),
            t.int(0),
            t.int(0),
            t.int(0),
            t.int(0),
            t.int(1),
        ];
        for strategy in [Strategy::elimination(), Strategy::interpolation()] {
            let w = annihilator(&t, &y, &[x.clone()], strategy).unwrap();
            assert_eq!(w.generator_count(), 1);
            let got = w.coefficient_images(&t, &[x.clone()]).unwrap();
            assert_eq!(got.len(), expected.len());
            for (a, b) in got.iter().zip(&expected) {
                assert!(t.eq(a, b));
            }
            assert_eq!(w.render(), "T^5 - 1 + a0^5");
        }
    }

    #[test]
    fn trivial_witnesses() {
        let t = tower(&[5]);
        let x = t.gen_x(0).unwrap();
        let w = annihilator(&t, &x, &[x.clone()], Strategy::elimination()).unwrap();
        assert_eq!(w.render(), "T - a0");
        let q = t.rational(Rational::new(3.into(), 4.into()));
        let w = annihilator(&t, &q, &[x.clone()], Strategy::elimination()).unwrap();
        assert_eq!(w.render(), "T - 3/4");
        assert!(matches!(
            annihilator(&t, &x, &[], Strategy::elimination()),
            Err(BasisError::NoGenerators)
        ));
    }

    #[test]
    fn x_over_z_is_verified() {
        let t = tower(&[5]);
        let x = t.gen_x(0).unwrap();
        let z = intrinsic_basis(&t, 0).unwrap();
        let w = annihilator(&t, &x, &[z.clone()], Strategy::elimination()).unwrap();
        assert!(w.degree() >= 1);
        assert!(w.evaluate(&t, &x, &[z.clone()]).unwrap().is_zero());
        // z0 has 4 simple poles over each of x = oo, x = 0 and y = 0, so x0 has
        // degree 12 over Q(z0); the resultant carries extra factors from the
        // cleared denominators but must be a multiple
        let v = annihilator(&t, &x, &[z], Strategy::interpolation()).unwrap();
        assert_eq!(v.degree(), 12);
        let ring = PolyRing::new(v.symbols().field(1));
        let (_, r) = ring
            .divmod(
                &ring.from_coeffs(w.coefficients().to_vec()),
                &ring.from_coeffs(v.coefficients().to_vec()),
            )
            .unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn transcendental_target_is_not_found() {
        let t = tower(&[5, 7]);
        let x1 = t.gen_x(1).unwrap();
        let x0 = t.gen_x(0).unwrap();
        for strategy in [
            Strategy::elimination(),
            Strategy::interpolation(),
            Strategy::enumeration(),
        ] {
            assert!(matches!(
                annihilator(&t, &x1, &[x0.clone()], strategy),
                Err(BasisError::NotFound)
            ));
        }
        // y0 needs T^5 plus a degree-5 coefficient, beyond a budget of total degree 4
        let small = Strategy::Interpolation {
            max_degree: 4,
            max_columns: 100,
        };
        assert!(matches!(
            annihilator(&t, &t.gen_y(0).unwrap(), &[x0], small),
            Err(BasisError::NotFound)
        ));
    }

    #[test]
    fn strategies_agree_on_small_cases() {
        let t = tower(&[5]);
        let (x, y) = (t.gen_x(0).unwrap(), t.gen_y(0).unwrap());
        let cases = [
            (y.clone(), x.clone()),
            (t.add(&x, &t.int(1)), x.clone()),
            (t.mul(&x, &x), x.clone()),
            (t.pow(&y, 5), x.clone()),
        ];
        for (target, g) in cases {
            let a = annihilator(&t, &target, &[g.clone()], Strategy::elimination()).unwrap();
            let b = annihilator(&t, &target, &[g.clone()], Strategy::enumeration()).unwrap();
            let c = annihilator(&t, &target, &[g], Strategy::interpolation()).unwrap();
            assert_eq!(a.coefficients(), b.coefficients(), "{}", t.pretty(&target));
            assert_eq!(a.coefficients(), c.coefficients(), "{}", t.pretty(&target));
        }
    }

    #[test]
    fn membership_examples() {
        let t = tower(&[5, 7]);
        let budget = MemberBudget::default();
        let z = BasisEnumeration::Intrinsic;
        let xs = BasisEnumeration::Coordinates;
        let x0 = t.gen_x(0).unwrap();
        assert!(member_basis(&t, &intrinsic_basis(&t, 0).unwrap(), &z, budget).unwrap());
        assert!(member_basis(&t, &intrinsic_basis(&t, 1).unwrap(), &z, budget).unwrap());
        assert!(!member_basis(&t, &x0, &z, budget).unwrap());
        assert!(!member_basis(&t, &t.add(&x0, &t.int(1)), &z, budget).unwrap());
        assert!(member_basis(&t, &t.gen_x(1).unwrap(), &xs, budget).unwrap());
        assert!(!member_basis(&t, &t.gen_y(1).unwrap(), &xs, budget).unwrap());
        assert!(!member_basis(&t, &t.int(2), &z, budget).unwrap());
        let tight = MemberBudget {
            max_generators: 1,
            ..budget
        };
        assert!(matches!(
            member_basis(&t, &t.gen_x(1).unwrap(), &xs, tight),
            Err(BasisError::BudgetExhausted { tried: 1 })
        ));
    }

    #[test]
    fn interdependence_degrees() {
        let t = tower(&[5, 7]);
        for i in 0..2 {
            let (zx, xz) = interdependence_check(&t, i).unwrap();
            assert!(zx.degree() <= t.prime(i).unwrap() as usize);
            assert!(zx.degree() >= 1 && xz.degree() >= 1);
        }
    }

    #[test]
    fn several_generators() {
        let t = tower(&[5, 7]);
        let gens = [t.gen_x(0).unwrap(), t.gen_x(1).unwrap()];
        let y1 = t.gen_y(1).unwrap();
        let w = annihilator(&t, &y1, &gens, Strategy::interpolation()).unwrap();
        assert_eq!(w.generator_count(), 2);
        assert_eq!(w.render(), "T^7 - 1 + a1^7");
        let sum = t.add(&gens[0], &gens[1]);
        let w = annihilator(&t, &sum, &gens, Strategy::elimination()).unwrap();
        assert_eq!(w.render(), "T - a0 - a1");
    }

    #[test]
    fn rendering_with_names() {
        let t = tower(&[5]);
        let (x, y) = (t.gen_x(0).unwrap(), t.gen_y(0).unwrap());
        let w = annihilator(&t, &y, &[x], Strategy::elimination()).unwrap();
        assert_eq!(w.render_with(&["x0".to_string()]), "T^5 - 1 + x0^5");
    }

    #[test]
    fn combinations_are_complete() {
        let mut seen = Vec::new();
        for_each_combination(5, 3, &mut |c| {
            seen.push(c.to_vec());
            true
        });
        assert_eq!(seen.len(), 10);
        assert_eq!(exponent_vectors(3, 2).len(), 6);
    }
}
