//! Solutions of `X^p + Y^p = 1` in the tower: the two rational points, the six
//! relabelings of `(x_i, y_i)`, the symmetric sum `z_i`, and bounded searches
//! that check nothing else turns up.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::presentation::{
    canonical_presentation, Code, FieldPresentation, PresentationError, TowerPresentation,
};
use crate::tower::{GeneratorImage, LevelKind, Tower, TowerElem, TowerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("level {0} is not a Fermat level")]
    NotFermat(usize),
    #[error("only {found} of 6 witnesses within the first {bound} codes")]
    InsufficientBound { found: usize, bound: u64 },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    Trivial,
    Nontrivial,
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionKind::Trivial => write!(f, "trivial"),
            SolutionKind::Nontrivial => write!(f, "nontrivial"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SolutionPair {
    pub x: TowerElem,
    pub y: TowerElem,
    pub kind: SolutionKind,
}

/// One of the six substitutions permuting the nontrivial solutions, indexed
/// 0..5 in the order
/// `(x,y) (y,x) (-y/x,1/x) (1/x,-y/x) (-x/y,1/y) (1/y,-x/y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relabeling(u8);

const FORMULAS: [&str; 6] = [
    "(x,y)",
    "(y,x)",
    "(-y/x,1/x)",
    "(1/x,-y/x)",
    "(-x/y,1/y)",
    "(1/y,-x/y)",
];

impl Relabeling {
    pub const ALL: [Relabeling; 6] = [
        Relabeling(0),
        Relabeling(1),
        Relabeling(2),
        Relabeling(3),
        Relabeling(4),
        Relabeling(5),
    ];

    pub const IDENTITY: Relabeling = Relabeling(0);
    pub const SWAP: Relabeling = Relabeling(1);

    pub fn from_index(i: u8) -> Option<Relabeling> {
        (i < 6).then_some(Relabeling(i))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn formula(self) -> &'static str {
        FORMULAS[self.0 as usize]
    }

    /// The pair this relabeling assigns to `(x, y)`.
    pub fn apply(
        self,
        t: &Tower,
        x: &TowerElem,
        y: &TowerElem,
    ) -> Result<(TowerElem, TowerElem), TowerError> {
        let pair = match self.0 {
            0 => (x.clone(), y.clone()),
            1 => (y.clone(), x.clone()),
            2 => (t.neg(&t.div(y, x)?), t.inv(x)?),
            3 => (t.inv(x)?, t.neg(&t.div(y, x)?)),
            4 => (t.neg(&t.div(x, y)?), t.inv(y)?),
            _ => (t.inv(y)?, t.neg(&t.div(x, y)?)),
        };
        Ok(pair)
    }
}

impl fmt::Display for Relabeling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.formula())
    }
}

fn fermat_prime(t: &Tower, i: usize) -> Result<u64, CensusError> {
    t.gen_x(i)?;
    t.prime(i).ok_or(CensusError::NotFermat(i))
}

fn generators(t: &Tower, i: usize) -> Result<(TowerElem, TowerElem), CensusError> {
    fermat_prime(t, i)?;
    Ok((t.gen_x(i)?, t.gen_y(i)?))
}

/// `x^p + y^p == 1`.
pub fn satisfies_relation(t: &Tower, p: u64, x: &TowerElem, y: &TowerElem) -> bool {
    let lhs = t.add(&t.pow(x, p), &t.pow(y, p));
    t.eq(&lhs, &t.int(1))
}

/// `(0, 1)` and `(1, 0)` at level `i + 1`.
pub fn trivial_solutions(t: &Tower, i: usize) -> Result<Vec<SolutionPair>, CensusError> {
    fermat_prime(t, i)?;
    let zero = t.coerce(&t.int(0), i + 1)?;
    let one = t.coerce(&t.int(1), i + 1)?;
    Ok(vec![
        SolutionPair {
            x: zero.clone(),
            y: one.clone(),
            kind: SolutionKind::Trivial,
        },
        SolutionPair {
            x: one,
            y: zero,
            kind: SolutionKind::Trivial,
        },
    ])
}

/// The images of `(x_i, y_i)` under the six relabelings, in index order.
pub fn six_solutions(t: &Tower, i: usize) -> Result<Vec<SolutionPair>, CensusError> {
    let (x, y) = generators(t, i)?;
    Relabeling::ALL
        .iter()
        .map(|r| {
            let (a, b) = r.apply(t, &x, &y)?;
            Ok(SolutionPair {
                x: a,
                y: b,
                kind: SolutionKind::Nontrivial,
            })
        })
        .collect()
}

/// Trivial solutions followed by the six nontrivial ones.
pub fn catalog(t: &Tower, i: usize) -> Result<Vec<SolutionPair>, CensusError> {
    let mut all = trivial_solutions(t, i)?;
    all.extend(six_solutions(t, i)?);
    Ok(all)
}

/// Position of `(x, y)` in [`catalog`], compared as field elements.
pub fn catalog_index(
    t: &Tower,
    cat: &[SolutionPair],
    x: &TowerElem,
    y: &TowerElem,
) -> Option<usize> {
    cat.iter().position(|s| t.eq(&s.x, x) && t.eq(&s.y, y))
}

/// `((1-x)/(1-x^p)) y^(p-1) + ((x-1)/x) y + (x^2+1)/x`.
pub fn z_closed_form(t: &Tower, i: usize) -> Result<TowerElem, CensusError> {
    let p = fermat_prime(t, i)?;
    let (x, y) = generators(t, i)?;
    let one = t.int(1);
    let a = t.div(&t.sub(&one, &x), &t.sub(&one, &t.pow(&x, p)))?;
    let b = t.div(&t.sub(&x, &one), &x)?;
    let c = t.div(&t.add(&t.mul(&x, &x), &one), &x)?;
    let sum = t.add(&t.mul(&a, &t.pow(&y, p - 1)), &t.mul(&b, &y));
    Ok(t.add(&sum, &c))
}

/// `z_i = x + y + 1/y - x/y + 1/x - y/x`, checked against the closed form.
pub fn z_element(t: &Tower, i: usize) -> Result<TowerElem, CensusError> {
    let sum = six_solutions(t, i)?
        .iter()
        .fold(t.coerce(&t.int(0), i + 1)?, |acc, s| t.add(&acc, &s.x));
    let closed = z_closed_form(t, i)?;
    if sum != closed {
        return Err(CensusError::InvariantViolation(format!(
            "z_{i} sum {} differs from closed form {}",
            t.pretty(&sum),
            t.pretty(&closed)
        )));
    }
    Ok(sum)
}

/// Composition table and element orders of the six relabelings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelabelingGroup {
    /// `table[r][s]` is the index of `phi_r . phi_s`, where `phi_r` is the
    /// field map sending `(x, y)` to relabeling `r`'s pair.
    pub table: [[u8; 6]; 6],
    pub orders: [u32; 6],
}

impl RelabelingGroup {
    /// Element orders in increasing order.
    pub fn order_profile(&self) -> Vec<u32> {
        let mut v = self.orders.to_vec();
        v.sort_unstable();
        v
    }

    pub fn is_abelian(&self) -> bool {
        (0..6).all(|r| (0..6).all(|s| self.table[r][s] == self.table[s][r]))
    }
}

/// Composes the relabelings as substitutions in the free field `Q(x)(y)`
/// and checks the group axioms.
pub fn relabeling_group() -> Result<RelabelingGroup, CensusError> {
    let t = Tower::with_names(
        vec![LevelKind::Transcendental, LevelKind::Transcendental],
        vec![("x".into(), String::new()), ("y".into(), String::new())],
    );
    let x = t.coerce(&t.gen_x(0)?, 2)?;
    let y = t.gen_x(1)?;
    let pairs: Vec<(TowerElem, TowerElem)> = Relabeling::ALL
        .iter()
        .map(|r| r.apply(&t, &x, &y))
        .collect::<Result<_, _>>()?;
    let find = |a: &TowerElem, b: &TowerElem| pairs.iter().position(|(u, v)| u == a && v == b);
    let mut table = [[0u8; 6]; 6];
    for (r, (rx, ry)) in pairs.iter().enumerate() {
        for (s, rel) in Relabeling::ALL.iter().enumerate() {
            // phi_r(phi_s(x)) is phi_s's formula evaluated at phi_r's pair
            let (cx, cy) = rel.apply(&t, rx, ry)?;
            let k = find(&cx, &cy).ok_or_else(|| {
                CensusError::InvariantViolation(format!(
                    "composition of {} and {} leaves the set",
                    FORMULAS[r], FORMULAS[s]
                ))
            })?;
            table[r][s] = k as u8;
        }
    }
    let violation = |m: &str| Err(CensusError::InvariantViolation(m.to_string()));
    if (0..6).any(|r| table[0][r] as usize != r || table[r][0] as usize != r) {
        return violation("index 0 is not the identity");
    }
    if (0..6).any(|r| !(0..6).any(|s| table[r][s] == 0)) {
        return violation("an element has no inverse");
    }
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                let left = table[table[a][b] as usize][c];
                let right = table[a][table[b][c] as usize];
                if left != right {
                    return violation("composition is not associative");
                }
            }
        }
    }
    let mut orders = [0u32; 6];
    for (r, order) in orders.iter_mut().enumerate() {
        let mut k = 1;
        let mut g = r;
        while g != 0 {
            g = table[g][r] as usize;
            k += 1;
        }
        *order = k;
    }
    Ok(RelabelingGroup { table, orders })
}

/// The function field of the single curve at level `i`, with generators named
/// as in the main tower.
pub fn single_curve_tower(t: &Tower, i: usize) -> Result<Tower, CensusError> {
    let p = fermat_prime(t, i)?;
    Ok(Tower::with_names(
        vec![LevelKind::Fermat(p)],
        vec![(format!("x{i}"), format!("y{i}"))],
    ))
}

/// A solution found by a search, with the codes it was found at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSolution {
    pub codes: (Code, Code),
    pub pair: SolutionPair,
}

/// All pairs among the first `bound` codes with `a^p + b^p = 1`, in code
/// order. Powers are taken in the tower, so the codes are exactly the
/// enumeration order.
fn solutions_among(pres: &TowerPresentation, p: u64, bound: u64) -> Vec<(Code, Code)> {
    let t = pres.tower();
    let codes: Vec<Code> = (0..bound).map(|n| pres.enumerate(n)).collect();
    let powers: Vec<TowerElem> = codes
        .iter()
        .map(|&c| t.pow(&pres.element_of(c).expect("canonical"), p))
        .collect();
    let mut by_power: HashMap<&TowerElem, Vec<Code>> = HashMap::new();
    for (&c, pw) in codes.iter().zip(&powers) {
        by_power.entry(pw).or_default().push(c);
    }
    let one = t.one_at(t.depth());
    let mut found = Vec::new();
    for (&a, pa) in codes.iter().zip(&powers) {
        if let Some(bs) = by_power.get(&t.sub(&one, pa)) {
            found.extend(bs.iter().map(|&b| (a, b)));
        }
    }
    found
}

fn into_main(t: &Tower, curve: &Tower, i: usize, e: &TowerElem) -> Result<TowerElem, CensusError> {
    let images = [GeneratorImage {
        x: t.gen_x(i)?,
        y: Some(t.gen_y(i)?),
    }];
    let r = curve.substitute(e, &images, t)?;
    Ok(t.coerce(&r, i + 1)?)
}

/// Searches the first `bound` codes of the canonical presentation of the
/// curve's function field for solutions of the level-`i` relation. Anything
/// outside the eight-pair catalog is reported as an invariant violation.
pub fn bounded_solution_search(
    t: &Tower,
    i: usize,
    bound: u64,
) -> Result<Vec<CodedSolution>, CensusError> {
    let p = fermat_prime(t, i)?;
    let curve = single_curve_tower(t, i)?;
    let pres = canonical_presentation(&curve);
    let cat = catalog(t, i)?;
    let mut out = Vec::new();
    for (a, b) in solutions_among(&pres, p, bound) {
        let x = into_main(t, &curve, i, &pres.element_of(a)?)?;
        let y = into_main(t, &curve, i, &pres.element_of(b)?)?;
        let k = catalog_index(t, &cat, &x, &y).ok_or_else(|| {
            CensusError::InvariantViolation(format!(
                "solution ({}, {}) at codes ({a}, {b}) is outside the catalog",
                t.pretty(&x),
                t.pretty(&y)
            ))
        })?;
        out.push(CodedSolution {
            codes: (a, b),
            pair: cat[k].clone(),
        });
    }
    Ok(out)
}

/// Codes of the catalog's coordinates in the canonical presentation of the
/// curve's function field, as `(x, y)` pairs in catalog order.
pub fn catalog_codes(t: &Tower, i: usize) -> Result<Vec<(Code, Code)>, CensusError> {
    const LIMIT: u64 = 1 << 20;
    let curve = single_curve_tower(t, i)?;
    let pres = canonical_presentation(&curve);
    let x = curve.gen_x(0)?;
    let y = curve.gen_y(0)?;
    let mut pairs = vec![(curve.int(0), curve.int(1)), (curve.int(1), curve.int(0))];
    for r in Relabeling::ALL {
        pairs.push(r.apply(&curve, &x, &y)?);
    }
    let code = |e: &TowerElem| {
        pres.find_code(e, LIMIT).ok_or_else(|| {
            CensusError::InvariantViolation(format!("{} not enumerated", curve.pretty(e)))
        })
    };
    pairs
        .iter()
        .map(|(a, b)| Ok((code(a)?, code(b)?)))
        .collect()
}

/// Least bound whose codes include every catalog coordinate.
pub fn catalog_cover_bound(t: &Tower, i: usize) -> Result<u64, CensusError> {
    let codes = catalog_codes(t, i)?;
    Ok(codes.iter().map(|(a, b)| a.0.max(b.0)).max().unwrap_or(0) + 1)
}

/// Outcome of evaluating the defining formula of `z_i` on a finite part of
/// the field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiCheck {
    /// The six `x` values, in code order, as elements of the main tower.
    pub witnesses: Vec<TowerElem>,
    pub sum: TowerElem,
}

/// Collects every `x` other than 0 and 1 among the first `bound` codes that
/// has a partner `y` (also within the bound) with `x^p + y^p = 1`, and sums
/// them. Six witnesses are required; the sum must equal `z_i`.
pub fn psi_definition_check(t: &Tower, i: usize, bound: u64) -> Result<PsiCheck, CensusError> {
    let p = fermat_prime(t, i)?;
    let curve = single_curve_tower(t, i)?;
    let pres = canonical_presentation(&curve);
    let (zero, one) = (Code(0), Code(1));
    let mut xs: Vec<Code> = solutions_among(&pres, p, bound)
        .into_iter()
        .map(|(a, _)| a)
        .filter(|&a| a != zero && a != one)
        .collect();
    xs.sort_unstable();
    xs.dedup();
    if xs.len() < 6 {
        return Err(CensusError::InsufficientBound {
            found: xs.len(),
            bound,
        });
    }
    if xs.len() > 6 {
        return Err(CensusError::InvariantViolation(format!(
            "{} witnesses found; at most six exist",
            xs.len()
        )));
    }
    let witnesses: Vec<TowerElem> = xs
        .iter()
        .map(|&c| into_main(t, &curve, i, &pres.element_of(c)?))
        .collect::<Result<_, _>>()?;
    let sum = witnesses
        .iter()
        .fold(t.coerce(&t.int(0), i + 1)?, |acc, w| t.add(&acc, w));
    let z = z_element(t, i)?;
    if sum != z {
        return Err(CensusError::InvariantViolation(format!(
            "witness sum {} differs from z_{i}",
            t.pretty(&sum)
        )));
    }
    Ok(PsiCheck { witnesses, sum })
}

/// A solution found by [`exploratory_search`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExploredSolution {
    pub codes: (Code, Code),
    pub x: TowerElem,
    pub y: TowerElem,
    pub in_catalog: bool,
}

/// Searches the first `bound` codes of the canonical presentation of the
/// whole tower for solutions of the level-`i` relation. With several levels,
/// extra solutions are not ruled out by theory, so they are reported rather
/// than treated as errors.
pub fn exploratory_search(
    t: &Tower,
    i: usize,
    bound: u64,
) -> Result<Vec<ExploredSolution>, CensusError> {
    let p = fermat_prime(t, i)?;
    let pres = canonical_presentation(t);
    let cat = catalog(t, i)?;
    let mut out = Vec::new();
    for (a, b) in solutions_among(&pres, p, bound) {
        let x = pres.element_of(a)?;
        let y = pres.element_of(b)?;
        let in_catalog = catalog_index(t, &cat, &x, &y).is_some();
        out.push(ExploredSolution {
            codes: (a, b),
            x,
            y,
            in_catalog,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tower::TowerConfig;

    fn tower(primes: &[u64]) -> Tower {
        Tower::new(&TowerConfig::new(primes.to_vec()).unchecked()).unwrap()
    }

    #[test]
    fn trivial_pairs() {
        let t = tower(&[5]);
        let triv = trivial_solutions(&t, 0).unwrap();
        assert_eq!(triv.len(), 2);
        for s in &triv {
            assert!(satisfies_relation(&t, 5, &s.x, &s.y));
        }
        // transposing each pair gives the other
        assert!(t.eq(&triv[0].x, &triv[1].y) && t.eq(&triv[0].y, &triv[1].x));
    }

    #[test]
    fn six_pairs_solve_and_are_distinct() {
        for primes in [&[5u64][..], &[5, 7]] {
            let t = tower(primes);
            for i in 0..primes.len() {
                let p = primes[i];
                let cat = catalog(&t, i).unwrap();
                for s in &cat {
                    assert!(satisfies_relation(&t, p, &s.x, &s.y));
                }
                for a in 0..8 {
                    for b in a + 1..8 {
                        assert!(!(t.eq(&cat[a].x, &cat[b].x) && t.eq(&cat[a].y, &cat[b].y)));
                    }
                }
            }
        }
    }

    #[test]
    fn third_solution_by_hand() {
        let t = tower(&[5]);
        let x = t.gen_x(0).unwrap();
        let y = t.gen_y(0).unwrap();
        let a = t.neg(&t.div(&y, &x).unwrap());
        let b = t.inv(&x).unwrap();
        // (-y^5 + 1) / x^5 = x^5 / x^5
        let lhs = t.add(&t.pow(&a, 5), &t.pow(&b, 5));
        assert_eq!(lhs.rational_value(), Some(crate::arith::integer(1)));
    }

    #[test]
    fn catalog_closed_under_relabeling_and_transposition() {
        let t = tower(&[7]);
        let cat = catalog(&t, 0).unwrap();
        for s in &cat {
            assert!(catalog_index(&t, &cat, &s.y, &s.x).is_some());
            if s.kind == SolutionKind::Nontrivial {
                for r in Relabeling::ALL {
                    let (a, b) = r.apply(&t, &s.x, &s.y).unwrap();
                    assert!(catalog_index(&t, &cat, &a, &b).is_some());
                }
            }
        }
    }

    #[test]
    fn z_is_symmetric_and_irrational() {
        for p in [5u64, 7] {
            let t = tower(&[p]);
            let z = z_element(&t, 0).unwrap();
            assert_eq!(z.rational_value(), None);
            let x = t.gen_x(0).unwrap();
            let y = t.gen_y(0).unwrap();
            for r in Relabeling::ALL {
                let (a, b) = r.apply(&t, &x, &y).unwrap();
                let img = t
                    .substitute(&z, &[GeneratorImage { x: a, y: Some(b) }], &t)
                    .unwrap();
                assert_eq!(img, z, "relabeling {r}");
            }
        }
    }

    #[test]
    fn group_is_s3() {
        let g = relabeling_group().unwrap();
        assert_eq!(g.order_profile(), vec![1, 2, 2, 2, 3, 3]);
        assert!(!g.is_abelian());
        // swap twice, and the order-3 element (-y/x, 1/x)
        assert_eq!(g.table[1][1], 0);
        assert_eq!(g.orders[2], 3);
        assert_eq!(g.table[2][2], 5);
        assert_eq!(g.table[2][5], 0);
    }

    #[test]
    fn search_stays_inside_catalog() {
        let t = tower(&[5]);
        assert!(bounded_solution_search(&t, 0, 1).unwrap().is_empty());
        let small = bounded_solution_search(&t, 0, 6).unwrap();
        assert!(small.len() < 8);
        let n = catalog_cover_bound(&t, 0).unwrap();
        let all = bounded_solution_search(&t, 0, n).unwrap();
        assert_eq!(all.len(), 8);
        let cat = catalog(&t, 0).unwrap();
        for s in &cat {
            assert!(all.iter().any(|f| f.pair == *s));
        }
    }

    #[test]
    fn psi_defines_z() {
        let t = tower(&[5]);
        assert!(matches!(
            psi_definition_check(&t, 0, 3),
            Err(CensusError::InsufficientBound { .. })
        ));
        let n = catalog_cover_bound(&t, 0).unwrap();
        let check = psi_definition_check(&t, 0, n).unwrap();
        assert_eq!(check.witnesses.len(), 6);
        let six = six_solutions(&t, 0).unwrap();
        for s in &six {
            assert!(check.witnesses.iter().any(|w| t.eq(w, &s.x)));
        }
        assert_eq!(check.sum, z_element(&t, 0).unwrap());
    }

    #[test]
    fn upper_level_census_uses_its_own_curve() {
        let t = tower(&[5, 7]);
        let n = catalog_cover_bound(&t, 1).unwrap();
        let all = bounded_solution_search(&t, 1, n).unwrap();
        assert_eq!(all.len(), 8);
        assert!(all.iter().all(|s| s.pair.x.level() == 2));
    }
}
