//! Command-line front end. Every command writes a plain-text report to
//! `<out>/<command>.txt` and echoes it on stdout.
//!
//! Exit codes: 0 success, 1 I/O or other error, 2 usage error,
//! 3 budget exhausted, 4 invariant violation or failed verification.

use crate::arith::{cover_threshold, genus, ArithError, PrimeSchedule};
use crate::basis::{
    annihilator, interdependence_check, member_basis, BasisEnumeration, BasisError, MemberBudget,
    Strategy,
};
use crate::categorical::{
    iso_report, synthesize, verify_hom, verify_image, CategoricalError, SearchBudget,
};
use crate::census::{self, CensusError};
use crate::presentation::{
    canonical_presentation, scrambled_presentation, table_dump, PresentationError, ScrambleSpec,
};
use crate::tower::{Tower, TowerConfig, TowerElem, TowerError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Environment variable naming the default report directory.
pub const OUT_ENV: &str = "FERMAT_TOWER_OUT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Parser)]
#[command(
    name = "fermat-tower",
    version,
    about = "Exact computations in a tower of Fermat-curve function fields"
)]
pub struct RunConfig {
    /// Report directory; defaults to $FERMAT_TOWER_OUT, then the current directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Prime schedule with genera and cover thresholds.
    Schedule {
        #[arg(long, default_value_t = 2)]
        count: usize,
        #[arg(long, default_value_t = crate::arith::DEFAULT_SCHEDULE_BITS)]
        max_bits: u64,
    },
    /// Solutions of one level's Fermat equation, with exact checks.
    Census {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Codes searched; defaults to the least bound covering the catalog.
        #[arg(long)]
        bound: Option<u64>,
    },
    /// Operation tables of the canonical presentation.
    Build {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, default_value_t = 8)]
        dump: u64,
    },
    /// Operation tables of a scrambled presentation.
    Scramble {
        #[command(flatten)]
        tower: TowerArgs,
        #[command(flatten)]
        scramble: ScrambleArgs,
        #[arg(long, default_value_t = 8)]
        dump: u64,
    },
    /// Builds an embedding into a scrambled copy and verifies it.
    Synthesize {
        #[command(flatten)]
        tower: TowerArgs,
        #[command(flatten)]
        scramble: ScrambleArgs,
        /// Levels to embed; defaults to the whole tower.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, default_value_t = 4096)]
        max_codes: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        verify_seed: u64,
    },
    /// Annihilators and basis membership.
    Basis {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, value_enum)]
        op: BasisOp,
        /// Element expression in x<i>, y<i>, z<i>, integers, + - * / ^ and parentheses.
        #[arg(long)]
        target: Option<String>,
        /// Generators for `annihilator`.
        #[arg(long, value_delimiter = ';')]
        gens: Vec<String>,
        #[arg(long, value_enum, default_value_t = BasisKind::Intrinsic)]
        basis: BasisKind,
        #[arg(long, value_enum, default_value_t = StrategyKind::Interpolation)]
        strategy: StrategyKind,
        /// Level for `interdep`.
        #[arg(long, default_value_t = 0)]
        level: usize,
        /// Largest number of basis elements `member` may adjoin.
        #[arg(long)]
        max_generators: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct TowerArgs {
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub primes: Vec<u64>,
    /// Allow exponents off the schedule's genus bound (p = 3).
    #[arg(long)]
    pub unchecked: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Args)]
pub struct ScrambleArgs {
    /// For example `swap=0,1 relabel=2,0`.
    #[arg(long, default_value = "")]
    pub spec: String,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisOp {
    Member,
    Annihilator,
    Interdep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisKind {
    Intrinsic,
    Coordinates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyKind {
    Elimination,
    Interpolation,
    Enumeration,
}

impl StrategyKind {
    fn strategy(self) -> Strategy {
        match self {
            StrategyKind::Elimination => Strategy::elimination(),
            StrategyKind::Interpolation => Strategy::interpolation(),
            StrategyKind::Enumeration => Strategy::enumeration(),
        }
    }
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

fn join<T: ToString>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

impl TowerArgs {
    fn push_args(&self, out: &mut Vec<String>) {
        out.extend(["--primes".into(), join(&self.primes, ",")]);
        if self.unchecked {
            out.push("--unchecked".into());
        }
    }

    fn build(&self) -> Result<Tower, TowerError> {
        let mut config = TowerConfig::new(self.primes.clone());
        if self.unchecked {
            config = config.unchecked();
        }
        Tower::new(&config)
    }
}

impl ScrambleArgs {
    fn push_args(&self, out: &mut Vec<String>) {
        if !self.spec.is_empty() {
            out.extend(["--spec".into(), self.spec.clone()]);
        }
        if let Some(s) = self.seed {
            out.extend(["--seed".into(), s.to_string()]);
        }
    }

    fn parse(&self, depth: usize) -> Result<ScrambleSpec, PresentationError> {
        let mut spec: ScrambleSpec = self.spec.parse()?;
        if self.seed.is_some() {
            spec.seed = self.seed;
        }
        spec.validate(depth)?;
        Ok(spec)
    }
}

impl RunConfig {
    /// Canonical argument list (without the program name) that parses back to `self`.
    pub fn to_args(&self) -> Vec<String> {
        let mut a = Vec::new();
        if let Some(out) = &self.out {
            a.extend(["--out".into(), out.display().to_string()]);
        }
        a.extend(self.command_args());
        a
    }

    /// The subcommand and its arguments; the report header echoes these.
    pub fn command_args(&self) -> Vec<String> {
        let mut a: Vec<String> = vec![self.command_name().into()];
        match &self.command {
            Command::Schedule { count, max_bits } => {
                a.extend(["--count".into(), count.to_string()]);
                a.extend(["--max-bits".into(), max_bits.to_string()]);
            }
            Command::Census {
                tower,
                level,
                bound,
            } => {
                tower.push_args(&mut a);
                a.extend(["--level".into(), level.to_string()]);
                if let Some(b) = bound {
                    a.extend(["--bound".into(), b.to_string()]);
                }
            }
            Command::Build { tower, dump } => {
                tower.push_args(&mut a);
                a.extend(["--dump".into(), dump.to_string()]);
            }
            Command::Scramble {
                tower,
                scramble,
                dump,
            } => {
                tower.push_args(&mut a);
                scramble.push_args(&mut a);
                a.extend(["--dump".into(), dump.to_string()]);
            }
            Command::Synthesize {
                tower,
                scramble,
                levels,
                max_codes,
                max_steps,
                samples,
                verify_seed,
            } => {
                tower.push_args(&mut a);
                scramble.push_args(&mut a);
                if let Some(l) = levels {
                    a.extend(["--levels".into(), l.to_string()]);
                }
                a.extend(["--max-codes".into(), max_codes.to_string()]);
                a.extend(["--max-steps".into(), max_steps.to_string()]);
                a.extend(["--samples".into(), samples.to_string()]);
                a.extend(["--verify-seed".into(), verify_seed.to_string()]);
            }
            Command::Basis {
                tower,
                op,
                target,
                gens,
                basis,
                strategy,
                level,
                max_generators,
            } => {
                tower.push_args(&mut a);
                a.extend(["--op".into(), value_name(*op)]);
                if let Some(t) = target {
                    a.extend(["--target".into(), t.clone()]);
                }
                if !gens.is_empty() {
                    a.extend(["--gens".into(), gens.join(";")]);
                }
                a.extend(["--basis".into(), value_name(*basis)]);
                a.extend(["--strategy".into(), value_name(*strategy)]);
                a.extend(["--level".into(), level.to_string()]);
                if let Some(m) = max_generators {
                    a.extend(["--max-generators".into(), m.to_string()]);
                }
            }
        }
        a
    }

    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Schedule { .. } => "schedule",
            Command::Census { .. } => "census",
            Command::Build { .. } => "build",
            Command::Scramble { .. } => "scramble",
            Command::Synthesize { .. } => "synthesize",
            Command::Basis { .. } => "basis",
        }
    }
}

/// Why a run failed, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    /// Short machine-readable tag.
    pub reason: &'static str,
    pub detail: String,
}

impl Failure {
    fn budget(detail: impl ToString) -> Failure {
        Failure {
            code: EXIT_BUDGET,
            reason: "budget-exhausted",
            detail: detail.to_string(),
        }
    }

    fn invariant(detail: impl ToString) -> Failure {
        Failure {
            code: EXIT_INVARIANT,
            reason: "invariant-violation",
            detail: detail.to_string(),
        }
    }

    fn usage(detail: impl ToString) -> Failure {
        Failure {
            code: EXIT_USAGE,
            reason: "usage",
            detail: detail.to_string(),
        }
    }
}

impl From<TowerError> for Failure {
    fn from(e: TowerError) -> Self {
        match e {
            TowerError::NotOddPrime(_)
            | TowerError::GenusTooSmall(_)
            | TowerError::RepeatedPrime(_)
            | TowerError::DepthTooLarge { .. }
            | TowerError::GeneratorOutOfRange { .. }
            | TowerError::LevelOutOfRange { .. } => Failure::usage(e),
            _ => Failure::invariant(e),
        }
    }
}

impl From<ArithError> for Failure {
    fn from(e: ArithError) -> Self {
        match e {
            ArithError::BitBudgetExceeded { .. } => Failure::budget(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<PresentationError> for Failure {
    fn from(e: PresentationError) -> Self {
        match e {
            PresentationError::Tower(t) => t.into(),
            PresentationError::NoGroundTruth => Failure::invariant(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<CensusError> for Failure {
    fn from(e: CensusError) -> Self {
        match e {
            CensusError::Tower(t) => t.into(),
            CensusError::Presentation(p) => p.into(),
            CensusError::NotFermat(_) => Failure::usage(e),
            CensusError::InsufficientBound { .. } => Failure::budget(e),
            CensusError::InvariantViolation(_) => Failure::invariant(e),
        }
    }
}

impl From<CategoricalError> for Failure {
    fn from(e: CategoricalError) -> Self {
        match e {
            CategoricalError::BudgetExhausted { .. } => Failure::budget(e),
            CategoricalError::InvalidBudget
            | CategoricalError::TooManyLevels { .. }
            | CategoricalError::BadForcedImage { .. } => Failure::usage(e),
            CategoricalError::Presentation(p) => p.into(),
            _ => Failure::invariant(e),
        }
    }
}

impl From<BasisError> for Failure {
    fn from(e: BasisError) -> Self {
        match e {
            BasisError::NotFound | BasisError::BudgetExhausted { .. } => Failure::budget(e),
            BasisError::NoGenerators => Failure::usage(e),
            BasisError::Tower(t) => t.into(),
            BasisError::Census(c) => c.into(),
            BasisError::InvariantViolation(_) => Failure::invariant(e),
        }
    }
}

/// Report body plus whether every check in it passed.
struct Outcome {
    body: String,
    passed: bool,
}

/// Parses `args` (program name first) and runs the command. Reports go to
/// `--out`, else `default_out`, else the current directory.
pub fn run<I, T>(args: I, default_out: Option<&Path>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return code;
        }
    };
    let dir = config
        .out
        .clone()
        .or_else(|| default_out.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let mut report = String::new();
    writeln!(report, "command: {}", config.command_name()).unwrap();
    writeln!(report, "config: {}", config.command_args().join(" ")).unwrap();
    let code = match execute(&config.command) {
        Ok(outcome) => {
            report.push_str(&outcome.body);
            if outcome.passed {
                writeln!(report, "result: pass").unwrap();
                EXIT_OK
            } else {
                writeln!(report, "result: fail").unwrap();
                writeln!(report, "reason: verification-failed").unwrap();
                EXIT_INVARIANT
            }
        }
        Err(f) => {
            writeln!(report, "result: fail").unwrap();
            writeln!(report, "reason: {}", f.reason).unwrap();
            writeln!(report, "detail: {}", f.detail).unwrap();
            eprintln!("error ({}): {}", f.reason, f.detail);
            f.code
        }
    };
    print!("{report}");
    let path = dir.join(format!("{}.txt", config.command_name()));
    if let Err(e) = std::fs::create_dir_all(&dir).and_then(|_| std::fs::write(&path, &report)) {
        eprintln!("error (io): cannot write {}: {e}", path.display());
        return if code == EXIT_OK { EXIT_ERROR } else { code };
    }
    code
}

fn execute(command: &Command) -> Result<Outcome, Failure> {
    match command {
        Command::Schedule { count, max_bits } => schedule(*count, *max_bits),
        Command::Census {
            tower,
            level,
            bound,
        } => census_report(&tower.build()?, *level, *bound),
        Command::Build { tower, dump } => {
            let t = tower.build()?;
            Ok(Outcome {
                body: table_dump(&canonical_presentation(&t), *dump),
                passed: true,
            })
        }
        Command::Scramble {
            tower,
            scramble,
            dump,
        } => {
            let t = tower.build()?;
            let spec = scramble.parse(t.depth())?;
            Ok(Outcome {
                body: table_dump(&scrambled_presentation(&t, &spec)?, *dump),
                passed: true,
            })
        }
        Command::Synthesize {
            tower,
            scramble,
            levels,
            max_codes,
            max_steps,
            samples,
            verify_seed,
        } => {
            let t = tower.build()?;
            let spec = scramble.parse(t.depth())?;
            let target = scrambled_presentation(&t, &spec)?;
            let budget = SearchBudget {
                max_codes: *max_codes,
                max_steps: *max_steps,
            };
            let f = synthesize(&t, &target, levels.unwrap_or(t.depth()), budget)?;
            let hom = verify_hom(&f, &t, &target, *samples, *verify_seed);
            let image = verify_image(&f, &target)?;
            let body = iso_report(&t, &target, budget, &f, &hom, Some(&image));
            // iso_report carries its own verdict line; keep one
            let passed = hom.passed() && image.passed();
            let body = body
                .lines()
                .filter(|l| !l.starts_with("result: "))
                .map(|l| format!("{l}\n"))
                .collect();
            Ok(Outcome { body, passed })
        }
        Command::Basis {
            tower,
            op,
            target,
            gens,
            basis,
            strategy,
            level,
            max_generators,
        } => {
            let t = tower.build()?;
            basis_report(
                &t,
                *op,
                target.as_deref(),
                gens,
                *basis,
                strategy.strategy(),
                *level,
                *max_generators,
            )
        }
    }
}

fn schedule(count: usize, max_bits: u64) -> Result<Outcome, Failure> {
    let sched = PrimeSchedule::new(max_bits);
    let mut body = String::new();
    let mut passed = true;
    let primes = sched.prefix(count)?;
    for (i, p) in primes.iter().enumerate() {
        let g = genus(p)?;
        write!(body, "p_{i}: {p} genus={g}").unwrap();
        if let Some(prev) = i.checked_sub(1).map(|j| &primes[j]) {
            let threshold = cover_threshold(&genus(prev)?)?;
            let ok = p > &threshold;
            passed &= ok;
            write!(body, " threshold={threshold} above={ok}").unwrap();
        }
        writeln!(body).unwrap();
    }
    Ok(Outcome { body, passed })
}

fn census_report(t: &Tower, level: usize, bound: Option<u64>) -> Result<Outcome, Failure> {
    let p = t.prime(level).ok_or(TowerError::LevelOutOfRange {
        level,
        depth: t.depth(),
    })?;
    let mut body = String::new();
    let mut passed = true;
    writeln!(body, "level: {level} p={p}").unwrap();
    let catalog = census::catalog(t, level)?;
    for (k, s) in catalog.iter().enumerate() {
        let ok = census::satisfies_relation(t, p, &s.x, &s.y);
        passed &= ok;
        writeln!(
            body,
            "pair {k}: {} x={} y={} relation={}",
            s.kind,
            t.pretty(&s.x),
            t.pretty(&s.y),
            if ok { "exact" } else { "FAILS" }
        )
        .unwrap();
    }
    let distinct = catalog.iter().enumerate().all(|(i, a)| {
        catalog[i + 1..]
            .iter()
            .all(|b| (&a.x, &a.y) != (&b.x, &b.y))
    });
    passed &= distinct;
    writeln!(body, "distinct: {distinct}").unwrap();

    let codes = census::catalog_codes(t, level)?;
    let cover = census::catalog_cover_bound(t, level)?;
    let bound = bound.unwrap_or(cover);
    writeln!(
        body,
        "catalog codes: {}",
        codes
            .iter()
            .map(|(a, b)| format!("({a},{b})"))
            .collect::<Vec<_>>()
            .join(" ")
    )
    .unwrap();
    writeln!(body, "bound: {bound} covering={}", bound >= cover).unwrap();
    let found = census::bounded_solution_search(t, level, bound)?;
    for s in &found {
        writeln!(body, "found: ({},{}) {}", s.codes.0, s.codes.1, s.pair.kind).unwrap();
    }
    let in_catalog = found.iter().all(|s| {
        catalog
            .iter()
            .any(|c| t.eq(&c.x, &s.pair.x) && t.eq(&c.y, &s.pair.y))
    });
    passed &= in_catalog;
    writeln!(
        body,
        "found {} pairs, all in catalog: {in_catalog}",
        found.len()
    )
    .unwrap();
    if bound >= cover {
        let exact = found.len() == catalog.len();
        passed &= exact;
        writeln!(body, "catalog recovered: {exact}").unwrap();
        let psi = census::psi_definition_check(t, level, bound)?;
        let z = census::z_element(t, level)?;
        writeln!(body, "psi witnesses: {}", psi.witnesses.len()).unwrap();
        writeln!(body, "z_{level}: {}", t.pretty(&z)).unwrap();
        writeln!(body, "psi sum equals z_{level}: {}", psi.sum == z).unwrap();
        passed &= psi.sum == z;
    }
    let group = census::relabeling_group()?;
    writeln!(
        body,
        "relabeling orders: {}",
        join(&group.order_profile(), ",")
    )
    .unwrap();
    Ok(Outcome { body, passed })
}

#[allow(clippy::too_many_arguments)]
fn basis_report(
    t: &Tower,
    op: BasisOp,
    target: Option<&str>,
    gens: &[String],
    basis: BasisKind,
    strategy: Strategy,
    level: usize,
    max_generators: Option<usize>,
) -> Result<Outcome, Failure> {
    let mut body = String::new();
    let need_target = || -> Result<TowerElem, Failure> {
        let text = target.ok_or_else(|| Failure::usage("--target is required"))?;
        parse_element(t, text)
    };
    match op {
        BasisOp::Member => {
            let e = need_target()?;
            let enumeration = match basis {
                BasisKind::Intrinsic => BasisEnumeration::Intrinsic,
                BasisKind::Coordinates => BasisEnumeration::Coordinates,
            };
            let budget = MemberBudget {
                max_generators: max_generators.unwrap_or(usize::MAX),
                strategy,
            };
            let member = member_basis(t, &e, &enumeration, budget)?;
            writeln!(body, "target: {}", t.pretty(&e)).unwrap();
            writeln!(body, "member: {member}").unwrap();
        }
        BasisOp::Annihilator => {
            let e = need_target()?;
            if gens.is_empty() {
                return Err(Failure::usage("--gens is required"));
            }
            let g: Vec<TowerElem> = gens
                .iter()
                .map(|s| parse_element(t, s))
                .collect::<Result<_, _>>()?;
            let w = annihilator(t, &e, &g, strategy)?;
            writeln!(body, "target: {}", t.pretty(&e)).unwrap();
            writeln!(body, "generators: {}", gens.join("; ")).unwrap();
            writeln!(body, "degree: {}", w.degree()).unwrap();
            writeln!(body, "witness: {}", w.render_with(gens)).unwrap();
            writeln!(body, "verified: true").unwrap();
        }
        BasisOp::Interdep => {
            let (zx, xz) = interdependence_check(t, level)?;
            let (z, x) = (format!("z{level}"), format!("x{level}"));
            writeln!(
                body,
                "z over x: degree={} witness: {}",
                zx.degree(),
                zx.render_with(std::slice::from_ref(&x))
            )
            .unwrap();
            writeln!(
                body,
                "x over z: degree={} witness: {}",
                xz.degree(),
                xz.render_with(&[z])
            )
            .unwrap();
        }
    }
    Ok(Outcome { body, passed: true })
}

/// Parses an element expression over the tower's generators.
pub fn parse_element(t: &Tower, text: &str) -> Result<TowerElem, Failure> {
    let mut p = ExprParser {
        t,
        chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
    };
    let e = p.expr()?;
    if p.pos != p.chars.len() {
        return Err(p.error("unexpected input"));
    }
    Ok(e)
}

struct ExprParser<'a> {
    t: &'a Tower,
    chars: Vec<char>,
    pos: usize,
}

impl ExprParser<'_> {
    fn error(&self, what: &str) -> Failure {
        let text: String = self.chars.iter().collect();
        Failure::usage(format!("{what} at offset {} in `{text}`", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn number(&mut self) -> Option<u64> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let digits: String = self.chars[start..self.pos].iter().collect();
        digits.parse().ok()
    }

    fn expr(&mut self) -> Result<TowerElem, Failure> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' {
                self.t.add(&acc, &rhs)
            } else {
                self.t.sub(&acc, &rhs)
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<TowerElem, Failure> {
        let mut acc = self.factor()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = if c == '*' {
                self.t.mul(&acc, &rhs)
            } else {
                self.t
                    .div(&acc, &rhs)
                    .map_err(|_| self.error("division by zero"))?
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<TowerElem, Failure> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(self.t.neg(&self.factor()?));
        }
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp = self
                .number()
                .ok_or_else(|| self.error("expected an exponent"))?;
            return Ok(self.t.pow(&base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<TowerElem, Failure> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self
                    .number()
                    .ok_or_else(|| self.error("number too large"))?;
                Ok(self.t.rational(crate::arith::integer(n as i64)))
            }
            Some(c @ ('x' | 'y' | 'z')) => {
                self.pos += 1;
                let i = self
                    .number()
                    .ok_or_else(|| self.error("expected a level index"))?
                    as usize;
                Ok(match c {
                    'x' => self.t.gen_x(i)?,
                    'y' => self.t.gen_y(i)?,
                    _ => census::z_element(self.t, i)?,
                })
            }
            _ => Err(self.error("expected a number, generator or `(`")),
        }
    }
}
