//! Building a computable isomorphism from the tower onto another presentation.
//!
//! Level by level, the search looks in the target for a solution of the
//! level's Fermat equation other than the rational ones and sends `(x_s, y_s)`
//! there. Elements are then mapped by evaluating their canonical form with
//! target operations.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::Rational;
use crate::census::Relabeling;
use crate::poly::{Polynomial, RatFunc};
use crate::presentation::{
    ground_truth_iso, Code, FieldPresentation, PresentationError, TowerPresentation,
};
use crate::tower::{ElementShape, Tower, TowerElem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoricalError {
    #[error("search budget exhausted at level {level} after {steps} operations")]
    BudgetExhausted { level: usize, steps: u64 },
    #[error("budget fields must be positive")]
    InvalidBudget,
    #[error("element uses level {level} but only {done} levels are embedded")]
    LevelTooHigh { level: usize, done: usize },
    #[error("requested {levels} levels from a tower of depth {depth}")]
    TooManyLevels { levels: usize, depth: usize },
    #[error("forced image at level {level} does not solve the level's equation")]
    BadForcedImage { level: usize },
    #[error("embedding is corrupt: {0}")]
    Corruption(String),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// Caps for one level of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Only codes below this are considered.
    pub max_codes: u64,
    /// Target operations allowed.
    pub max_steps: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_codes: 4096,
            max_steps: 1_000_000,
        }
    }
}

impl SearchBudget {
    pub fn validate(&self) -> Result<(), CategoricalError> {
        if self.max_codes == 0 || self.max_steps == 0 {
            return Err(CategoricalError::InvalidBudget);
        }
        Ok(())
    }
}

/// Target operations with a step count.
struct Metered<'a> {
    target: &'a dyn FieldPresentation,
    steps: u64,
    max: u64,
    level: usize,
}

impl Metered<'_> {
    fn tick(&mut self, n: u64) -> Result<(), CategoricalError> {
        self.steps += n;
        if self.steps > self.max {
            return Err(CategoricalError::BudgetExhausted {
                level: self.level,
                steps: self.steps,
            });
        }
        Ok(())
    }

    fn solves(
        &mut self,
        powers: &mut HashMap<Code, Code>,
        p: u64,
        a: Code,
        b: Code,
    ) -> Result<bool, CategoricalError> {
        let mut pow = |c: Code, m: &mut Self| -> Result<Code, CategoricalError> {
            if let Some(&v) = powers.get(&c) {
                return Ok(v);
            }
            m.tick(2 * u64::from(64 - p.leading_zeros()))?;
            let v = m.target.pow(c, p);
            powers.insert(c, v);
            Ok(v)
        };
        let pa = pow(a, self)?;
        let pb = pow(b, self)?;
        self.tick(1)?;
        Ok(self.target.eq(self.target.add(pa, pb), self.target.one()))
    }
}

/// Codes `(a, b)` with `a^p + b^p = 1`, neither `a` nor `b` the zero or one
/// code, and the pair not in `exclude`. Pairs are tried in order of `a + b`,
/// then `a`.
pub fn find_nontrivial_solution(
    target: &dyn FieldPresentation,
    p: u64,
    budget: SearchBudget,
    exclude: &[(Code, Code)],
) -> Result<(Code, Code), CategoricalError> {
    find_in_level(target, p, budget, exclude, 0)
}

fn find_in_level(
    target: &dyn FieldPresentation,
    p: u64,
    budget: SearchBudget,
    exclude: &[(Code, Code)],
    level: usize,
) -> Result<(Code, Code), CategoricalError> {
    budget.validate()?;
    let mut m = Metered {
        target,
        steps: 0,
        max: budget.max_steps,
        level,
    };
    let (zero, one) = (target.zero(), target.one());
    let mut powers = HashMap::new();
    let n = budget.max_codes;
    for d in 0..(2 * n - 1) {
        for a in d.saturating_sub(n - 1)..=d.min(n - 1) {
            let (a, b) = (target.enumerate(a), target.enumerate(d - a));
            if [zero, one].contains(&a) || [zero, one].contains(&b) || exclude.contains(&(a, b)) {
                continue;
            }
            if m.solves(&mut powers, p, a, b)? {
                return Ok((a, b));
            }
        }
    }
    Err(CategoricalError::BudgetExhausted {
        level,
        steps: m.steps,
    })
}

/// The first `j` solutions among images of rationals, ordered by height.
fn rational_solutions(
    m: &mut Metered<'_>,
    base: &mut BaseMap,
    p: u64,
    j: usize,
    max_codes: u64,
) -> Result<Vec<(Code, Code)>, CategoricalError> {
    let mut found = Vec::new();
    if j == 0 {
        return Ok(found);
    }
    let mut powers = HashMap::new();
    let mut seen: Vec<Code> = Vec::new();
    for q in rationals_by_height().take(max_codes as usize) {
        m.tick(64)?;
        let c = base.image(m.target, &q);
        seen.push(c);
        // pairs whose later member is the new rational, in both orders
        for &other in &seen {
            for (a, b) in [(other, c), (c, other)] {
                if !found.contains(&(a, b)) && m.solves(&mut powers, p, a, b)? {
                    found.push((a, b));
                    if found.len() == j {
                        return Ok(found);
                    }
                }
            }
        }
    }
    Err(CategoricalError::BudgetExhausted {
        level: m.level,
        steps: m.steps,
    })
}

/// `0, 1, -1, 2, -2, 1/2, -1/2, ...`: rationals `n/d` ordered by
/// `max(|n|, d)`, then `d`, then `|n|`, positive before negative.
pub fn rationals_by_height() -> impl Iterator<Item = Rational> {
    std::iter::once(Rational::zero()).chain((1u64..).flat_map(|h| {
        let mut v = Vec::new();
        for d in 1..=h {
            for n in 1..=h {
                if n.max(d) == h && n.gcd(&d) == 1 {
                    let q = Rational::new((n as i64).into(), (d as i64).into());
                    v.push(q.clone());
                    v.push(-q);
                }
            }
        }
        v
    }))
}

/// The embedding under construction: images of the generators of each
/// completed level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialEmbedding {
    zero: Code,
    one: Code,
    images: Vec<(Code, Code)>,
    /// Rational solutions set aside at each level.
    rational: Vec<Vec<(Code, Code)>>,
}

impl PartialEmbedding {
    /// An embedding with the given generator images, unchecked. Verification
    /// code uses it to build deliberately broken maps.
    pub fn from_parts(zero: Code, one: Code, images: Vec<(Code, Code)>) -> Self {
        let rational = vec![Vec::new(); images.len()];
        PartialEmbedding {
            zero,
            one,
            images,
            rational,
        }
    }

    pub fn levels_done(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[(Code, Code)] {
        &self.images
    }

    pub fn rational_solutions(&self, level: usize) -> &[(Code, Code)] {
        &self.rational[level]
    }

    pub fn zero(&self) -> Code {
        self.zero
    }

    pub fn one(&self) -> Code {
        self.one
    }
}

/// Knobs for [`synthesize_with`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynthesisOptions {
    /// Number of rational solutions to set aside per level; `None` means 2,
    /// the count for Fermat curves of prime exponent above 3.
    pub rational_points: Option<usize>,
    /// Images to use instead of searching, per level.
    pub forced: Vec<Option<(Code, Code)>>,
}

/// Extends an embedding of `Q` into `target` through the first `levels`
/// levels of `tower`.
pub fn synthesize(
    tower: &Tower,
    target: &dyn FieldPresentation,
    levels: usize,
    budget: SearchBudget,
) -> Result<PartialEmbedding, CategoricalError> {
    synthesize_with(tower, target, levels, budget, &SynthesisOptions::default())
}

pub fn synthesize_with(
    tower: &Tower,
    target: &dyn FieldPresentation,
    levels: usize,
    budget: SearchBudget,
    options: &SynthesisOptions,
) -> Result<PartialEmbedding, CategoricalError> {
    budget.validate()?;
    if levels > tower.depth() {
        return Err(CategoricalError::TooManyLevels {
            levels,
            depth: tower.depth(),
        });
    }
    let j = options.rational_points.unwrap_or(2);
    let mut f = PartialEmbedding {
        zero: target.zero(),
        one: target.one(),
        images: Vec::new(),
        rational: Vec::new(),
    };
    let mut base = BaseMap::default();
    for s in 0..levels {
        let p = tower.prime(s).expect("Fermat level");
        let mut m = Metered {
            target,
            steps: 0,
            max: budget.max_steps,
            level: s,
        };
        let rational = rational_solutions(&mut m, &mut base, p, j, budget.max_codes)?;
        let pair = match options.forced.get(s).copied().flatten() {
            Some((a, b)) => {
                let mut powers = HashMap::new();
                let trivial = [f.zero, f.one].contains(&a) || [f.zero, f.one].contains(&b);
                if trivial || !m.solves(&mut powers, p, a, b)? {
                    return Err(CategoricalError::BadForcedImage { level: s });
                }
                (a, b)
            }
            None => {
                let remaining = SearchBudget {
                    max_steps: budget.max_steps.saturating_sub(m.steps).max(1),
                    ..budget
                };
                find_in_level(target, p, remaining, &rational, s)?
            }
        };
        f.images.push(pair);
        f.rational.push(rational);
    }
    Ok(f)
}

#[derive(Default)]
struct BaseMap {
    cache: HashMap<Rational, Code>,
}

impl BaseMap {
    fn image(&mut self, t: &dyn FieldPresentation, q: &Rational) -> Code {
        if let Some(&c) = self.cache.get(q) {
            return c;
        }
        let num = integer_image(t, q.numer());
        let c = if q.denom().is_one() {
            num
        } else {
            let den = integer_image(t, q.denom());
            t.div(num, den).expect("denominator is a nonzero integer")
        };
        self.cache.insert(q.clone(), c);
        c
    }
}

/// `n` as a sum of ones, by doubling.
fn integer_image(t: &dyn FieldPresentation, n: &num_bigint::BigInt) -> Code {
    let mut acc = t.zero();
    let one = t.one();
    let bits = n.magnitude().bits();
    for i in (0..bits).rev() {
        acc = t.add(acc, acc);
        if n.magnitude().bit(i) {
            acc = t.add(acc, one);
        }
    }
    if n.is_negative() {
        t.neg(acc)
    } else {
        acc
    }
}

/// Evaluates tower elements through an embedding, memoizing subresults.
pub struct Evaluator<'a> {
    f: &'a PartialEmbedding,
    target: &'a dyn FieldPresentation,
    base: BaseMap,
    memo: HashMap<TowerElem, Code>,
}

impl<'a> Evaluator<'a> {
    pub fn new(f: &'a PartialEmbedding, target: &'a dyn FieldPresentation) -> Self {
        Evaluator {
            f,
            target,
            base: BaseMap::default(),
            memo: HashMap::new(),
        }
    }

    pub fn apply(&mut self, a: &TowerElem) -> Result<Code, CategoricalError> {
        if let Some(&c) = self.memo.get(a) {
            return Ok(c);
        }
        let t = self.target;
        let c = match a {
            TowerElem::Rational(q) => self.base.image(t, q),
            TowerElem::Ext(_) => {
                let coeffs = a.y_coeffs();
                match coeffs {
                    [] => self.f.zero,
                    [c] if c.is_constant() => {
                        let inner = c.num().coeff(0).expect("nonzero constant").clone();
                        self.apply(&inner)?
                    }
                    _ => {
                        let s = a.level() - 1;
                        let &(fx, fy) =
                            self.f.images.get(s).ok_or(CategoricalError::LevelTooHigh {
                                level: s,
                                done: self.f.levels_done(),
                            })?;
                        let mut acc = self.f.zero;
                        for c in coeffs.iter().rev() {
                            let v = self.ratfunc(c, fx)?;
                            acc = t.add(t.mul(acc, fy), v);
                        }
                        acc
                    }
                }
            }
        };
        self.memo.insert(a.clone(), c);
        Ok(c)
    }

    fn ratfunc(&mut self, c: &RatFunc<TowerElem>, fx: Code) -> Result<Code, CategoricalError> {
        let num = self.poly(c.num(), fx)?;
        if c.den().is_constant() {
            return Ok(num);
        }
        let den = self.poly(c.den(), fx)?;
        match self.target.div(num, den) {
            Some(v) => Ok(v),
            None => Err(CategoricalError::Corruption(
                "a denominator maps to zero".to_string(),
            )),
        }
    }

    fn poly(&mut self, p: &Polynomial<TowerElem>, fx: Code) -> Result<Code, CategoricalError> {
        let t = self.target;
        let mut acc = self.f.zero;
        for k in p.coeffs().iter().rev() {
            let v = self.apply(k)?;
            acc = t.add(t.mul(acc, fx), v);
        }
        Ok(acc)
    }
}

/// `f(a)` as a target code.
pub fn apply(
    f: &PartialEmbedding,
    a: &TowerElem,
    target: &dyn FieldPresentation,
) -> Result<Code, CategoricalError> {
    Evaluator::new(f, target).apply(a)
}

/// Tallies of the homomorphism checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomReport {
    pub samples: usize,
    pub seed: u64,
    pub additive_failures: usize,
    pub multiplicative_failures: usize,
    pub injectivity_failures: usize,
    pub errors: usize,
    /// Descriptions of the first few failures.
    pub failures: Vec<String>,
}

impl HomReport {
    pub fn failure_count(&self) -> usize {
        self.additive_failures
            + self.multiplicative_failures
            + self.injectivity_failures
            + self.errors
    }

    pub fn passed(&self) -> bool {
        self.failure_count() == 0
    }

    fn note(&mut self, s: String) {
        if self.failures.len() < 5 {
            self.failures.push(s);
        }
    }
}

/// Checks `f(a+b) = f(a)+f(b)`, `f(ab) = f(a)f(b)` and `f(a) = f(b) iff a = b`
/// on seeded random pairs from the embedded levels. About one pair in eight
/// is equal, built along a different route.
pub fn verify_hom(
    f: &PartialEmbedding,
    tower: &Tower,
    target: &dyn FieldPresentation,
    sample_count: usize,
    seed: u64,
) -> HomReport {
    let mut report = HomReport {
        samples: sample_count,
        seed,
        ..HomReport::default()
    };
    let level = f.levels_done();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ev = Evaluator::new(f, target);
    for i in 0..sample_count {
        let a = hom_sample(tower, &mut rng, level);
        let b = if rng.gen_ratio(1, 8) {
            let c = hom_sample(tower, &mut rng, level);
            tower.sub(&tower.add(&a, &c), &c)
        } else {
            hom_sample(tower, &mut rng, level)
        };
        let sum = tower.add(&a, &b);
        let prod = tower.mul(&a, &b);
        let images = [&a, &b, &sum, &prod].map(|e| ev.apply(e));
        let [fa, fb, fs, fp] = match images {
            [Ok(fa), Ok(fb), Ok(fs), Ok(fp)] => [fa, fb, fs, fp],
            _ => {
                report.errors += 1;
                report.note(format!("sample {i}: evaluation failed"));
                continue;
            }
        };
        if target.add(fa, fb) != fs {
            report.additive_failures += 1;
            report.note(format!("sample {i}: f(a+b) != f(a)+f(b)"));
        }
        if target.mul(fa, fb) != fp {
            report.multiplicative_failures += 1;
            report.note(format!("sample {i}: f(ab) != f(a)f(b)"));
        }
        if target.eq(fa, fb) != tower.eq(&a, &b) {
            report.injectivity_failures += 1;
            report.note(format!("sample {i}: equality not preserved"));
        }
    }
    report
}

/// A light polynomial at `level` times a power of the top `y` below its
/// degree, so products reach the relation; a quarter of the time divided by a
/// light polynomial from the level below times a power of the top `x`.
/// Denominators of this kind keep images under any relabeling cheap to invert.
fn hom_sample(tower: &Tower, rng: &mut ChaCha8Rng, level: usize) -> TowerElem {
    let shape = ElementShape::light();
    let mut numerator = tower.random_polynomial(rng, level, &shape);
    if level == 0 {
        return numerator;
    }
    if let (Ok(y), Some(p)) = (tower.gen_y(level - 1), tower.prime(level - 1)) {
        numerator = tower.mul(&numerator, &tower.pow(&y, rng.gen_range(0..p)));
    }
    if !rng.gen_ratio(1, 4) {
        return numerator;
    }
    loop {
        let low = tower.random_polynomial(rng, level - 1, &shape);
        if low.is_zero() {
            continue;
        }
        let x = tower.gen_x(level - 1).expect("level in range");
        let d = tower.mul(&low, &tower.pow(&x, rng.gen_range(0..=2)));
        return tower.div(&numerator, &d).expect("nonzero");
    }
}

/// For each embedded level, the relabeling carrying the ground-truth image of
/// `(x_s, y_s)` to the decoded image under `f`, if there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageReport {
    pub levels: Vec<Option<Relabeling>>,
}

impl ImageReport {
    pub fn level_passed(&self, level: usize) -> bool {
        matches!(self.levels.get(level), Some(Some(_)))
    }

    pub fn passed(&self) -> bool {
        self.levels.iter().all(Option::is_some)
    }
}

/// Compares `f` with the isomorphism a scrambled target was built from: at
/// each level, `f(x_s), f(y_s)` must decode to a relabeling of the true
/// images, so both generate the same subfield.
pub fn verify_image(
    f: &PartialEmbedding,
    target: &TowerPresentation,
) -> Result<ImageReport, CategoricalError> {
    let gt = ground_truth_iso(target)?;
    let t = target.tower();
    let mut levels = Vec::new();
    for (s, &(fx, fy)) in f.images.iter().enumerate() {
        let (u, v) = (gt.decode(fx), gt.decode(fy));
        let (gx, gy) = gt.generator_images(s).map_err(PresentationError::from)?;
        let hit = Relabeling::ALL
            .into_iter()
            .find(|r| match r.apply(t, &gx, &gy) {
                Ok((a, b)) => t.eq(&a, &u) && t.eq(&b, &v),
                Err(_) => false,
            });
        levels.push(hit);
    }
    Ok(ImageReport { levels })
}

/// Plain-text summary of a synthesis run.
pub fn iso_report(
    tower: &Tower,
    target: &dyn FieldPresentation,
    budget: SearchBudget,
    f: &PartialEmbedding,
    hom: &HomReport,
    image: Option<&ImageReport>,
) -> String {
    let mut out = String::new();
    let primes: Vec<String> = tower.primes().iter().map(|p| p.to_string()).collect();
    writeln!(out, "tower: primes={}", primes.join(",")).unwrap();
    writeln!(out, "target: {}", target.describe()).unwrap();
    writeln!(
        out,
        "budget: max_codes={} max_steps={}",
        budget.max_codes, budget.max_steps
    )
    .unwrap();
    writeln!(out, "zero: {} one: {}", f.zero, f.one).unwrap();
    for (s, (fx, fy)) in f.images.iter().enumerate() {
        let rational: Vec<String> = f.rational[s]
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect();
        writeln!(
            out,
            "level {s}: p={} rational={} image=({fx},{fy})",
            tower.prime(s).unwrap_or(0),
            rational.join(",")
        )
        .unwrap();
    }
    writeln!(
        out,
        "verify_hom: samples={} seed={} additive_failures={} multiplicative_failures={} injectivity_failures={} errors={}",
        hom.samples,
        hom.seed,
        hom.additive_failures,
        hom.multiplicative_failures,
        hom.injectivity_failures,
        hom.errors
    )
    .unwrap();
    for line in &hom.failures {
        writeln!(out, "  {line}").unwrap();
    }
    if let Some(image) = image {
        for (s, hit) in image.levels.iter().enumerate() {
            match hit {
                Some(r) => writeln!(out, "verify_image: level {s} relabeling={r}").unwrap(),
                None => writeln!(out, "verify_image: level {s} no-match").unwrap(),
            }
        }
    }
    let verdict = hom.passed() && image.is_none_or(|i| i.passed());
    writeln!(out, "result: {}", if verdict { "pass" } else { "fail" }).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::census::{six_solutions, z_closed_form};
    use crate::presentation::{canonical_presentation, scrambled_presentation, ScrambleSpec};
    use crate::tower::TowerConfig;

    fn tower(primes: &[u64]) -> Tower {
        Tower::new(&TowerConfig::new(primes.to_vec()).unchecked()).unwrap()
    }

    fn relation_holds(t: &dyn FieldPresentation, p: u64, (a, b): (Code, Code)) -> bool {
        t.eq(t.add(t.pow(a, p), t.pow(b, p)), t.one())
    }

    #[test]
    fn rationals_come_by_height() {
        let got: Vec<String> = rationals_by_height()
            .take(11)
            .map(|q| q.to_string())
            .collect();
        assert_eq!(
            got,
            ["0", "1", "-1", "2", "-2", "1/2", "-1/2", "3", "-3", "3/2", "-3/2"]
        );
    }

    #[test]
    fn tiny_budgets() {
        let t = tower(&[5]);
        let target = canonical_presentation(&t);
        let one_code = SearchBudget {
            max_codes: 1,
            ..SearchBudget::default()
        };
        assert!(matches!(
            find_nontrivial_solution(&target, 5, one_code, &[]),
            Err(CategoricalError::BudgetExhausted { level: 0, .. })
        ));
        let zero = SearchBudget {
            max_steps: 0,
            ..SearchBudget::default()
        };
        assert_eq!(
            find_nontrivial_solution(&target, 5, zero, &[]),
            Err(CategoricalError::InvalidBudget)
        );
        assert!(matches!(
            synthesize(&t, &target, 2, SearchBudget::default()),
            Err(CategoricalError::TooManyLevels {
                levels: 2,
                depth: 1
            })
        ));
    }

    #[test]
    fn canonical_search_finds_the_generators() {
        let t = tower(&[5]);
        let target = canonical_presentation(&t);
        let (a, b) = find_nontrivial_solution(&target, 5, SearchBudget::default(), &[]).unwrap();
        let (x, y) = (target.element_of(a).unwrap(), target.element_of(b).unwrap());
        assert_eq!((x, y), (t.gen_x(0).unwrap(), t.gen_y(0).unwrap()));
        let six = six_solutions(&t, 0).unwrap();
        assert!(six
            .iter()
            .any(|s| s.x == t.gen_x(0).unwrap() && s.y == t.gen_y(0).unwrap()));
    }

    #[test]
    fn base_map_alone() {
        let t = tower(&[5, 7]);
        let target = canonical_presentation(&t);
        let f = synthesize(&t, &target, 0, SearchBudget::default()).unwrap();
        assert_eq!(f.levels_done(), 0);
        let one = target.one();
        let two = target.add(one, one);
        let three = target.add(two, one);
        let expected = target.mul(three, target.inv(two).unwrap());
        let got = apply(&f, &t.rational(Rational::new(3.into(), 2.into())), &target).unwrap();
        assert_eq!(got, expected);
        assert!(matches!(
            apply(&f, &t.gen_x(0).unwrap(), &target),
            Err(CategoricalError::LevelTooHigh { level: 0, done: 0 })
        ));
    }

    #[test]
    fn level_invariants_after_synthesis() {
        let t = tower(&[5, 7]);
        for spec in [
            ScrambleSpec::identity(),
            ScrambleSpec::swap_all(2).with_seed(Some(5)),
        ] {
            let target = scrambled_presentation(&t, &spec).unwrap();
            let f = synthesize(&t, &target, 2, SearchBudget::default()).unwrap();
            for (s, &(a, b)) in f.images().iter().enumerate() {
                assert!(relation_holds(&target, t.prime(s).unwrap(), (a, b)));
                for c in [a, b] {
                    assert!(c != f.zero() && c != f.one());
                }
                assert_eq!(f.rational_solutions(s).len(), 2);
            }
        }
    }

    #[test]
    fn apply_examples() {
        let t = tower(&[5, 7]);
        let target =
            scrambled_presentation(&t, &ScrambleSpec::relabel_at(0, 3).with_seed(Some(2))).unwrap();
        let f = synthesize(&t, &target, 2, SearchBudget::default()).unwrap();
        let mut ev = Evaluator::new(&f, &target);
        assert_eq!(ev.apply(&t.int(1)).unwrap(), target.one());
        let (x, y) = (t.gen_x(0).unwrap(), t.gen_y(0).unwrap());
        let relation = t.add(&t.pow(&x, 5), &t.pow(&y, 5));
        assert_eq!(ev.apply(&relation).unwrap(), target.one());
        // x + y + 1/y - x/y + 1/x - y/x on the image codes
        let (fx, fy) = f.images()[0];
        let tp = &target;
        let inv = |c| tp.inv(c).unwrap();
        let terms = [
            fx,
            fy,
            inv(fy),
            tp.neg(tp.mul(fx, inv(fy))),
            inv(fx),
            tp.neg(tp.mul(fy, inv(fx))),
        ];
        let z = terms.into_iter().fold(tp.zero(), |acc, c| tp.add(acc, c));
        assert_eq!(ev.apply(&z_closed_form(&t, 0).unwrap()).unwrap(), z);
    }

    #[test]
    fn identity_scramble_verifies() {
        let t = tower(&[5, 7]);
        let target = scrambled_presentation(&t, &ScrambleSpec::identity()).unwrap();
        let f = synthesize(&t, &target, 2, SearchBudget::default()).unwrap();
        let report = verify_hom(&f, &t, &target, 200, 3);
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.samples, 200);
        let empty = verify_hom(&f, &t, &target, 0, 3);
        assert!(empty.passed());
        assert_eq!(empty.samples, 0);
        assert!(empty.failures.is_empty());
    }

    #[test]
    fn corrupted_image_is_caught() {
        let t = tower(&[5, 7]);
        let target = canonical_presentation(&t);
        let f = synthesize(&t, &target, 1, SearchBudget::default()).unwrap();
        let (fx, _) = f.images()[0];
        let bad = PartialEmbedding::from_parts(f.zero(), f.one(), vec![(fx, fx)]);
        let report = verify_hom(&bad, &t, &target, 100, 1);
        assert!(report.multiplicative_failures > 0, "{report:?}");
        assert!(!report.passed());
        let text = iso_report(&t, &target, SearchBudget::default(), &bad, &report, None);
        assert!(text.ends_with("result: fail\n"));
    }

    #[test]
    fn image_check_for_each_relabeling() {
        let t = tower(&[5, 7]);
        for choice in 0..6 {
            let spec = ScrambleSpec::relabel_at(0, choice).with_seed(Some(40 + u64::from(choice)));
            let target = scrambled_presentation(&t, &spec).unwrap();
            let f = synthesize(&t, &target, 1, SearchBudget::default()).unwrap();
            let image = verify_image(&f, &target).unwrap();
            assert!(image.level_passed(0), "choice {choice}");
            assert!(verify_hom(&f, &t, &target, 50, 9).passed());
        }
        let canonical = canonical_presentation(&t);
        let f = synthesize(&t, &canonical, 1, SearchBudget::default()).unwrap();
        assert!(matches!(
            verify_image(&f, &canonical),
            Err(CategoricalError::Presentation(
                PresentationError::NoGroundTruth
            ))
        ));
    }

    #[test]
    fn deterministic_and_monotone() {
        let t = tower(&[5, 7]);
        let spec = ScrambleSpec::swap(&[0]).with_seed(Some(19));
        let run = |levels| {
            let target = scrambled_presentation(&t, &spec).unwrap();
            synthesize(&t, &target, levels, SearchBudget::default()).unwrap()
        };
        let two = run(2);
        assert_eq!(two, run(2));
        assert_eq!(&two.images()[..1], run(1).images());
    }

    #[test]
    fn every_catalog_pair_can_be_forced() {
        let t = tower(&[5, 7]);
        let target = canonical_presentation(&t);
        for s in six_solutions(&t, 0).unwrap() {
            let forced = (target.encode(&s.x), target.encode(&s.y));
            let options = SynthesisOptions {
                forced: vec![Some(forced)],
                ..SynthesisOptions::default()
            };
            let f = synthesize_with(&t, &target, 2, SearchBudget::default(), &options).unwrap();
            assert_eq!(f.images()[0], forced);
            assert!(verify_hom(&f, &t, &target, 40, 4).passed());
        }
        let options = SynthesisOptions {
            forced: vec![Some((target.one(), target.zero()))],
            ..SynthesisOptions::default()
        };
        assert_eq!(
            synthesize_with(&t, &target, 1, SearchBudget::default(), &options),
            Err(CategoricalError::BadForcedImage { level: 0 })
        );
    }
}
