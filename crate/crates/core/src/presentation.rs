//! Fields as black boxes over the natural numbers.
//!
//! A presentation hands out integer codes for field elements and answers
//! operation queries on codes. Codes are realized lazily. Every fourth slot
//! (those congruent to 3 mod 4) is reserved for values produced by operations
//! that the enumeration has not reached yet; any other slot, or a reserved
//! one touched before an operation claims it, takes the next element of the
//! canonical enumeration not already coded. The table therefore depends on
//! the order of queries, and replaying the same queries yields the same codes.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::census::Relabeling;
use crate::tower::{GeneratorImage, Tower, TowerElem, TowerError};

/// Width of the blocks permuted by the renumbering.
pub const BLOCK_WIDTH: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code(pub u64);

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresentationError {
    #[error("relabel choice {choice} at level {level} is outside 0..5")]
    InvalidRelabel { level: usize, choice: u8 },
    #[error("level {level} is outside the tower of depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },
    #[error("the presentation carries no ground truth")]
    NoGroundTruth,
    #[error("malformed scramble spec: {0}")]
    Parse(String),
    #[error(transparent)]
    Tower(#[from] TowerError),
}

/// A computable field: codes, constants and operations.
pub trait FieldPresentation: Send + Sync {
    fn zero(&self) -> Code;
    fn one(&self) -> Code;
    fn add(&self, a: Code, b: Code) -> Code;
    fn neg(&self, a: Code) -> Code;
    fn mul(&self, a: Code, b: Code) -> Code;
    /// `None` for the zero code.
    fn inv(&self, a: Code) -> Option<Code>;
    /// Code of the `n`-th domain element.
    fn enumerate(&self, n: u64) -> Code;
    /// Number of codes realized so far.
    fn realized(&self) -> u64;
    /// One-line description used in dump headers.
    fn describe(&self) -> String;

    fn eq(&self, a: Code, b: Code) -> bool {
        a == b
    }

    fn sub(&self, a: Code, b: Code) -> Code {
        let nb = self.neg(b);
        self.add(a, nb)
    }

    fn div(&self, a: Code, b: Code) -> Option<Code> {
        self.inv(b).map(|ib| self.mul(a, ib))
    }

    fn pow(&self, a: Code, mut exp: u64) -> Code {
        let mut result = self.one();
        let mut base = a;
        while exp > 0 {
            if exp & 1 == 1 {
                result = self.mul(result, base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(base, base);
            }
        }
        result
    }
}

/// An automorphism of the tower plus a renumbering of codes.
///
/// Level `s` is first relabeled by `relabel[s]` (missing entries mean the
/// identity), then transposed if `s` is in `swapped`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScrambleSpec {
    pub swapped: BTreeSet<usize>,
    pub relabel: Vec<u8>,
    pub seed: Option<u64>,
}

impl ScrambleSpec {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn swap_all(depth: usize) -> Self {
        ScrambleSpec {
            swapped: (0..depth).collect(),
            ..Self::default()
        }
    }

    pub fn swap(levels: &[usize]) -> Self {
        ScrambleSpec {
            swapped: levels.iter().copied().collect(),
            ..Self::default()
        }
    }

    pub fn relabel_at(level: usize, choice: u8) -> Self {
        let mut relabel = vec![0; level + 1];
        relabel[level] = choice;
        ScrambleSpec {
            relabel,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    pub fn relabel_choice(&self, level: usize) -> u8 {
        self.relabel.get(level).copied().unwrap_or(0)
    }

    pub fn validate(&self, depth: usize) -> Result<(), PresentationError> {
        for (level, &choice) in self.relabel.iter().enumerate() {
            if Relabeling::from_index(choice).is_none() {
                return Err(PresentationError::InvalidRelabel { level, choice });
            }
        }
        let relabeled = self
            .relabel
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(l, _)| l);
        match self
            .swapped
            .iter()
            .copied()
            .chain(relabeled)
            .find(|&l| l >= depth)
        {
            Some(level) => Err(PresentationError::LevelOutOfRange { level, depth }),
            None => Ok(()),
        }
    }

    /// Images of the generators under the automorphism, at the tower's top level.
    pub fn images(&self, tower: &Tower) -> Result<Vec<GeneratorImage>, PresentationError> {
        self.validate(tower.depth())?;
        let top = tower.depth();
        (0..top)
            .map(|s| {
                let x = tower.coerce(&tower.gen_x(s)?, top)?;
                let y = tower.coerce(&tower.gen_y(s)?, top)?;
                let r = Relabeling::from_index(self.relabel_choice(s)).expect("validated");
                let (mut a, mut b) = r.apply(tower, &x, &y)?;
                if self.swapped.contains(&s) {
                    std::mem::swap(&mut a, &mut b);
                }
                Ok(GeneratorImage { x: a, y: Some(b) })
            })
            .collect()
    }

    pub fn is_identity_map(&self) -> bool {
        self.swapped.is_empty() && self.relabel.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for ScrambleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let swapped: Vec<String> = self.swapped.iter().map(|s| s.to_string()).collect();
        let relabel: Vec<String> = self.relabel.iter().map(|s| s.to_string()).collect();
        write!(
            f,
            "swap={} relabel={} seed=",
            swapped.join(","),
            relabel.join(",")
        )?;
        match self.seed {
            Some(s) => write!(f, "{s}"),
            None => write!(f, "none"),
        }
    }
}

/// Parses `swap=0,1 relabel=2,0 seed=7`; fields may be separated by spaces or
/// semicolons and any of them may be omitted.
impl FromStr for ScrambleSpec {
    type Err = PresentationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| PresentationError::Parse(m.to_string());
        let mut spec = ScrambleSpec::default();
        for field in s.split([' ', ';']).filter(|f| !f.is_empty()) {
            let (key, value) = field.split_once('=').ok_or_else(|| bad(field))?;
            let items = value.split(',').filter(|v| !v.is_empty());
            match key {
                "swap" => {
                    for v in items {
                        spec.swapped.insert(v.parse().map_err(|_| bad(v))?);
                    }
                }
                "relabel" => {
                    for v in items {
                        spec.relabel.push(v.parse().map_err(|_| bad(v))?);
                    }
                }
                "seed" => {
                    spec.seed = match value {
                        "none" | "" => None,
                        v => Some(v.parse().map_err(|_| bad(v))?),
                    }
                }
                _ => return Err(bad(key)),
            }
        }
        Ok(spec)
    }
}

/// Canonical elements in a fixed order: the constants 0 and 1 and the
/// generators, then every value of a single field operation applied to
/// earlier values, grouped by the number of operations used. Within a group,
/// values are sorted by level, leaf count, largest bit length and
/// serialization. Every element appears exactly once.
struct ElementStream {
    tower: Tower,
    stages: Vec<Vec<TowerElem>>,
    seen: HashSet<TowerElem>,
    stage: usize,
    pos: usize,
}

impl ElementStream {
    fn new(tower: &Tower) -> ElementStream {
        let top = tower.depth();
        let mut atoms = vec![tower.zero_at(top), tower.one_at(top)];
        for s in 0..top {
            atoms.push(
                tower
                    .coerce(&tower.gen_x(s).expect("in range"), top)
                    .expect("up"),
            );
            if let Ok(y) = tower.gen_y(s) {
                atoms.push(tower.coerce(&y, top).expect("up"));
            }
        }
        let mut seen = HashSet::new();
        atoms.retain(|a| seen.insert(a.clone()));
        ElementStream {
            tower: tower.clone(),
            stages: vec![atoms],
            seen,
            stage: 0,
            pos: 0,
        }
    }

    fn next_element(&mut self) -> TowerElem {
        loop {
            if let Some(e) = self.stages[self.stage].get(self.pos) {
                self.pos += 1;
                return e.clone();
            }
            self.stage += 1;
            self.pos = 0;
            if self.stage == self.stages.len() {
                self.build_stage();
            }
        }
    }

    fn build_stage(&mut self) {
        let k = self.stages.len();
        let t = &self.tower;
        let mut fresh = Vec::new();
        for i in 0..k {
            let j = k - 1 - i;
            for a in &self.stages[i] {
                for b in &self.stages[j] {
                    let mut results = vec![t.add(a, b), t.sub(a, b), t.mul(a, b)];
                    if let Ok(q) = t.div(a, b) {
                        results.push(q);
                    }
                    for r in results {
                        if self.seen.insert(r.clone()) {
                            fresh.push(r);
                        }
                    }
                }
            }
        }
        let mut keyed: Vec<_> = fresh
            .into_iter()
            .map(|e| {
                let (count, bits) = e.size();
                ((e.native_level(), count, bits, e.to_string()), e)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        self.stages
            .push(keyed.into_iter().map(|(_, e)| e).collect());
    }
}

/// Slots reserved for operation results are `OP_SLOT mod OP_STRIDE`.
const OP_STRIDE: u64 = 4;
const OP_SLOT: u64 = 3;

struct State {
    slots: Vec<Option<TowerElem>>,
    index: HashMap<TowerElem, u64>,
    stream: ElementStream,
    perms: HashMap<u64, (Vec<u8>, Vec<u8>)>,
    next_op: u64,
}

/// A presentation of a tower's top field, canonical or scrambled.
pub struct TowerPresentation {
    tower: Tower,
    spec: Option<ScrambleSpec>,
    images: Option<Vec<GeneratorImage>>,
    state: Mutex<State>,
}

/// The canonical presentation of the tower's top field: code 0 is zero, code 1
/// is one, and further codes follow the canonical element order.
pub fn canonical_presentation(tower: &Tower) -> TowerPresentation {
    TowerPresentation::build(tower, None, None)
}

/// A second presentation whose code `n` denotes the image of the canonical
/// `n`-th element under the spec's automorphism, with codes then permuted
/// block by block according to the seed.
pub fn scrambled_presentation(
    tower: &Tower,
    spec: &ScrambleSpec,
) -> Result<TowerPresentation, PresentationError> {
    let images = spec.images(tower)?;
    Ok(TowerPresentation::build(
        tower,
        Some(spec.clone()),
        Some(images),
    ))
}

impl TowerPresentation {
    fn build(
        tower: &Tower,
        spec: Option<ScrambleSpec>,
        images: Option<Vec<GeneratorImage>>,
    ) -> TowerPresentation {
        let images = images.filter(|_| !spec.as_ref().is_some_and(|s| s.is_identity_map()));
        let pres = TowerPresentation {
            tower: tower.clone(),
            spec,
            images,
            state: Mutex::new(State {
                slots: Vec::new(),
                index: HashMap::new(),
                stream: ElementStream::new(tower),
                perms: HashMap::new(),
                next_op: OP_SLOT,
            }),
        };
        // zero and one lead the stream, so they hold internal indices 0 and 1
        pres.with_state(|st| {
            pres.fill(st, 0);
            pres.fill(st, 1);
        });
        pres
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn spec(&self) -> Option<&ScrambleSpec> {
        self.spec.as_ref()
    }

    fn with_state<R>(&self, f: impl FnOnce(&mut State) -> R) -> R {
        let mut st = self.state.lock().expect("presentation lock");
        f(&mut st)
    }

    fn seed(&self) -> Option<u64> {
        self.spec.as_ref().and_then(|s| s.seed)
    }

    fn block_perm<'a>(&self, st: &'a mut State, block: u64) -> &'a (Vec<u8>, Vec<u8>) {
        let seed = self.seed().expect("renumbered");
        st.perms.entry(block).or_insert_with(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(block);
            let mut fwd: Vec<u8> = (0..BLOCK_WIDTH as u8).collect();
            fwd.shuffle(&mut rng);
            let mut back = vec![0u8; BLOCK_WIDTH as usize];
            for (i, &j) in fwd.iter().enumerate() {
                back[j as usize] = i as u8;
            }
            (fwd, back)
        })
    }

    fn to_code(&self, st: &mut State, internal: u64) -> Code {
        if self.seed().is_none() {
            return Code(internal);
        }
        let (block, pos) = (internal / BLOCK_WIDTH, internal % BLOCK_WIDTH);
        let fwd = &self.block_perm(st, block).0;
        Code(block * BLOCK_WIDTH + fwd[pos as usize] as u64)
    }

    fn to_internal(&self, st: &mut State, code: Code) -> u64 {
        if self.seed().is_none() {
            return code.0;
        }
        let (block, pos) = (code.0 / BLOCK_WIDTH, code.0 % BLOCK_WIDTH);
        let back = &self.block_perm(st, block).1;
        block * BLOCK_WIDTH + back[pos as usize] as u64
    }

    fn twist(&self, e: TowerElem) -> TowerElem {
        match &self.images {
            None => e,
            Some(images) => {
                let image = self
                    .tower
                    .substitute(&e, images, &self.tower)
                    .expect("automorphism has no poles");
                self.tower
                    .coerce(&image, self.tower.depth())
                    .expect("upward coercion")
            }
        }
    }

    fn assign(&self, st: &mut State, slot: u64, e: TowerElem) {
        if st.slots.len() as u64 <= slot {
            st.slots.resize(slot as usize + 1, None);
        }
        st.index.insert(e.clone(), slot);
        st.slots[slot as usize] = Some(e);
    }

    /// Gives an empty slot the next enumerated element not yet coded.
    fn fill(&self, st: &mut State, slot: u64) {
        if st.slots.get(slot as usize).is_some_and(Option::is_some) {
            return;
        }
        loop {
            let e = st.stream.next_element();
            let g = self.twist(e);
            if !st.index.contains_key(&g) {
                self.assign(st, slot, g);
                return;
            }
        }
    }

    fn element(&self, st: &mut State, code: Code) -> TowerElem {
        let i = self.to_internal(st, code);
        self.fill(st, i);
        st.slots[i as usize].clone().expect("filled")
    }

    fn intern(&self, st: &mut State, e: TowerElem) -> Code {
        let i = match st.index.get(&e) {
            Some(&i) => i,
            None => {
                while st
                    .slots
                    .get(st.next_op as usize)
                    .is_some_and(Option::is_some)
                {
                    st.next_op += OP_STRIDE;
                }
                let i = st.next_op;
                st.next_op += OP_STRIDE;
                self.assign(st, i, e);
                i
            }
        };
        self.to_code(st, i)
    }

    fn binary(
        &self,
        a: Code,
        b: Code,
        op: impl Fn(&Tower, &TowerElem, &TowerElem) -> TowerElem,
    ) -> Code {
        self.with_state(|st| {
            let x = self.element(st, a);
            let y = self.element(st, b);
            let r = op(&self.tower, &x, &y);
            self.intern(st, r)
        })
    }

    /// Code of `e` (a field element of the tower) if it is already coded or
    /// the enumeration reaches it before `max_realized` codes exist. Empty
    /// slots are filled in increasing order while looking.
    pub fn find_code(&self, e: &TowerElem, max_realized: u64) -> Option<Code> {
        let e = self.tower.coerce(e, self.tower.depth()).ok()?;
        self.with_state(|st| {
            let mut slot = 0;
            loop {
                if let Some(&i) = st.index.get(&e) {
                    return Some(self.to_code(st, i));
                }
                if st.index.len() as u64 >= max_realized {
                    return None;
                }
                while st.slots.get(slot as usize).is_some_and(Option::is_some) {
                    slot += 1;
                }
                self.fill(st, slot);
            }
        })
    }

    /// Code of `e`, extending the table with it if it is new.
    pub fn encode(&self, e: &TowerElem) -> Code {
        let e = self
            .tower
            .coerce(e, self.tower.depth())
            .expect("element of this tower");
        self.with_state(|st| self.intern(st, e))
    }

    /// The canonical element a code denotes. For a scrambled presentation this
    /// is the ground truth; only verification code should call it.
    fn decode(&self, code: Code) -> TowerElem {
        self.with_state(|st| self.element(st, code))
    }

    /// Element of a canonical presentation; errors on scrambled ones.
    pub fn element_of(&self, code: Code) -> Result<TowerElem, PresentationError> {
        if self.spec.is_some() {
            return Err(PresentationError::NoGroundTruth);
        }
        Ok(self.decode(code))
    }
}

impl FieldPresentation for TowerPresentation {
    fn zero(&self) -> Code {
        self.with_state(|st| self.to_code(st, 0))
    }

    fn one(&self) -> Code {
        self.with_state(|st| self.to_code(st, 1))
    }

    fn add(&self, a: Code, b: Code) -> Code {
        self.binary(a, b, Tower::add)
    }

    fn neg(&self, a: Code) -> Code {
        self.with_state(|st| {
            let x = self.element(st, a);
            let r = self.tower.neg(&x);
            self.intern(st, r)
        })
    }

    fn mul(&self, a: Code, b: Code) -> Code {
        self.binary(a, b, Tower::mul)
    }

    fn inv(&self, a: Code) -> Option<Code> {
        self.with_state(|st| {
            let x = self.element(st, a);
            let r = self.tower.inv(&x).ok()?;
            Some(self.intern(st, r))
        })
    }

    fn sub(&self, a: Code, b: Code) -> Code {
        self.binary(a, b, Tower::sub)
    }

    fn enumerate(&self, n: u64) -> Code {
        self.with_state(|st| {
            let i = self.to_internal(st, Code(n));
            self.fill(st, i);
        });
        Code(n)
    }

    fn realized(&self) -> u64 {
        self.with_state(|st| st.index.len() as u64)
    }

    fn describe(&self) -> String {
        let primes: Vec<String> = self.tower.primes().iter().map(|p| p.to_string()).collect();
        match &self.spec {
            None => format!("canonical primes={}", primes.join(",")),
            Some(spec) => format!("scrambled primes={} {spec}", primes.join(",")),
        }
    }
}

/// Private view of a scrambled presentation's isomorphism with the canonical
/// field: `psi(a)` is the code of the image of `a` under the spec's
/// automorphism. For verification only; synthesis never sees it.
pub struct GroundTruth<'a> {
    pres: &'a TowerPresentation,
}

pub fn ground_truth_iso(p: &TowerPresentation) -> Result<GroundTruth<'_>, PresentationError> {
    match p.spec {
        Some(_) => Ok(GroundTruth { pres: p }),
        None => Err(PresentationError::NoGroundTruth),
    }
}

impl GroundTruth<'_> {
    /// The automorphism applied to a canonical element, as a tower element.
    pub fn automorphism(&self, a: &TowerElem) -> TowerElem {
        let top = self.pres.tower.depth();
        let a = self
            .pres
            .tower
            .coerce(a, top)
            .expect("element of this tower");
        self.pres.twist(a)
    }

    pub fn psi(&self, a: &TowerElem) -> Code {
        let image = self.automorphism(a);
        self.pres.encode(&image)
    }

    /// Images of `(x_s, y_s)` under the automorphism.
    pub fn generator_images(&self, level: usize) -> Result<(TowerElem, TowerElem), TowerError> {
        let t = &self.pres.tower;
        let x = self.automorphism(&t.gen_x(level)?);
        let y = self.automorphism(&t.gen_y(level)?);
        Ok((x, y))
    }

    pub fn decode(&self, code: Code) -> TowerElem {
        self.pres.decode(code)
    }
}

/// The `n` by `n` addition and multiplication tables over codes below `n`,
/// as text: a header, then one row of decimal codes per line.
pub fn table_dump(p: &dyn FieldPresentation, n: u64) -> String {
    let mut out = String::new();
    writeln!(out, "presentation: {}", p.describe()).unwrap();
    writeln!(out, "n: {n}").unwrap();
    let codes: Vec<Code> = (0..n).map(|i| p.enumerate(i)).collect();
    for (name, op) in [("add", 0), ("mul", 1)] {
        writeln!(out, "{name}:").unwrap();
        for &a in &codes {
            let row: Vec<String> = codes
                .iter()
                .map(|&b| if op == 0 { p.add(a, b) } else { p.mul(a, b) }.to_string())
                .collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
    }
    out
}
