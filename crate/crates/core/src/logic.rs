//! Axiom schemas, the four tangled logics, soundness suites and bounded
//! countermodel search.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, TangleArgs};
use crate::frame::{rows_from_pairs, ClassFlags, Frame, RawFrame};
use crate::random::{random_formula, random_frame_in_class, random_tangle_args};
use crate::semantics::{valid_on_frame, valuation_names, SemanticsError, Valuation, ValidityMode, Verdict};

/// Largest world count enumerated exhaustively by [`countermodel_search`].
pub const EXHAUSTIVE_SEARCH_WORLDS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("schema {schema} expects slots ({expected}), got ({found})")]
    Arity {
        schema: &'static str,
        expected: String,
        found: String,
    },
    #[error("unknown logic {0:?} (expected K4C, K4DC, K4I or K4DI)")]
    UnknownLogic(String),
    #[error("unknown axiom schema {0:?}")]
    UnknownSchema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AxiomSchema {
    K,
    Four,
    D,
    NextNeg,
    NextAnd,
    CDot,
    C,
    Fix,
    Ind,
    CTanDot,
    CTan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotKind {
    Formula,
    Set,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Slot {
    Formula(Formula),
    Set(TangleArgs),
}

impl Slot {
    fn kind(&self) -> SlotKind {
        match self {
            Slot::Formula(_) => SlotKind::Formula,
            Slot::Set(_) => SlotKind::Set,
        }
    }
}

fn describe(kinds: impl Iterator<Item = SlotKind>) -> String {
    kinds
        .map(|k| match k {
            SlotKind::Formula => "formula",
            SlotKind::Set => "set",
        })
        .collect::<Vec<_>>()
        .join(", ")
}

impl AxiomSchema {
    pub const ALL: [AxiomSchema; 11] = [
        AxiomSchema::K,
        AxiomSchema::Four,
        AxiomSchema::D,
        AxiomSchema::NextNeg,
        AxiomSchema::NextAnd,
        AxiomSchema::CDot,
        AxiomSchema::C,
        AxiomSchema::Fix,
        AxiomSchema::Ind,
        AxiomSchema::CTanDot,
        AxiomSchema::CTan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomSchema::K => "K",
            AxiomSchema::Four => "4",
            AxiomSchema::D => "D",
            AxiomSchema::NextNeg => "Next¬",
            AxiomSchema::NextAnd => "Next∧",
            AxiomSchema::CDot => "C◇̇",
            AxiomSchema::C => "C◇",
            AxiomSchema::Fix => "Fix◇∞",
            AxiomSchema::Ind => "Ind◇∞",
            AxiomSchema::CTanDot => "CTan◇̇",
            AxiomSchema::CTan => "CTan◇",
        }
    }

    /// ASCII identifier, accepted by [`FromStr`] alongside [`AxiomSchema::name`].
    pub fn ascii(self) -> &'static str {
        match self {
            AxiomSchema::K => "K",
            AxiomSchema::Four => "4",
            AxiomSchema::D => "D",
            AxiomSchema::NextNeg => "NextNeg",
            AxiomSchema::NextAnd => "NextAnd",
            AxiomSchema::CDot => "CDot",
            AxiomSchema::C => "C",
            AxiomSchema::Fix => "Fix",
            AxiomSchema::Ind => "Ind",
            AxiomSchema::CTanDot => "CTanDot",
            AxiomSchema::CTan => "CTan",
        }
    }

    pub fn slots(self) -> &'static [SlotKind] {
        use SlotKind::*;
        match self {
            AxiomSchema::D => &[],
            AxiomSchema::K | AxiomSchema::NextAnd => &[Formula, Formula],
            AxiomSchema::Four | AxiomSchema::NextNeg | AxiomSchema::CDot | AxiomSchema::C => &[Formula],
            AxiomSchema::Fix | AxiomSchema::CTanDot | AxiomSchema::CTan => &[Set],
            AxiomSchema::Ind => &[Set, Formula],
        }
    }

    /// Substitutes `slots` into the schema. Conjunctions over a set slot
    /// follow the set's canonical order.
    pub fn instantiate(self, slots: &[Slot]) -> Result<Formula, LogicError> {
        let expected = self.slots();
        if slots.len() != expected.len() || slots.iter().zip(expected).any(|(s, k)| s.kind() != *k) {
            return Err(LogicError::Arity {
                schema: self.name(),
                expected: describe(expected.iter().copied()),
                found: describe(slots.iter().map(Slot::kind)),
            });
        }
        let f = |i: usize| match &slots[i] {
            Slot::Formula(f) => f.clone(),
            Slot::Set(_) => unreachable!("kinds checked"),
        };
        let set = |i: usize| match &slots[i] {
            Slot::Set(s) => s.clone(),
            Slot::Formula(_) => unreachable!("kinds checked"),
        };
        let each_diamond = |phi: &TangleArgs, with: &Formula| {
            let parts: Vec<Formula> = phi.iter().map(|p| Formula::diamond(Formula::and(p.clone(), with.clone()))).collect();
            parts.into_iter().reduce(Formula::and).expect("nonempty")
        };
        let next_set = |phi: &TangleArgs| TangleArgs::new(phi.iter().map(|p| Formula::next(p.clone()))).expect("nonempty");
        Ok(match self {
            AxiomSchema::K => Formula::implies(
                Formula::boxed(Formula::implies(f(0), f(1))),
                Formula::implies(Formula::boxed(f(0)), Formula::boxed(f(1))),
            ),
            AxiomSchema::Four => Formula::implies(Formula::boxed(f(0)), Formula::boxed(Formula::boxed(f(0)))),
            AxiomSchema::D => Formula::diamond(Formula::top()),
            AxiomSchema::NextNeg => Formula::iff(Formula::neg(Formula::next(f(0))), Formula::next(Formula::neg(f(0)))),
            AxiomSchema::NextAnd => Formula::iff(
                Formula::next(Formula::and(f(0), f(1))),
                Formula::and(Formula::next(f(0)), Formula::next(f(1))),
            ),
            AxiomSchema::CDot => Formula::implies(
                Formula::dot_diamond(Formula::next(f(0))),
                Formula::next(Formula::dot_diamond(f(0))),
            ),
            AxiomSchema::C => Formula::implies(Formula::diamond(Formula::next(f(0))), Formula::next(Formula::diamond(f(0)))),
            AxiomSchema::Fix => {
                let phi = set(0);
                let tangle = Formula::Tangle(phi.clone());
                Formula::implies(tangle.clone(), each_diamond(&phi, &tangle))
            }
            AxiomSchema::Ind => {
                let (phi, theta) = (set(0), f(1));
                Formula::implies(
                    Formula::dot_box(Formula::implies(theta.clone(), each_diamond(&phi, &theta))),
                    Formula::implies(theta, Formula::Tangle(phi)),
                )
            }
            AxiomSchema::CTanDot => {
                let phi = set(0);
                Formula::implies(Formula::dot_tangle(next_set(&phi)), Formula::next(Formula::dot_tangle(phi)))
            }
            AxiomSchema::CTan => {
                let phi = set(0);
                Formula::implies(Formula::Tangle(next_set(&phi)), Formula::next(Formula::Tangle(phi)))
            }
        })
    }
}

impl fmt::Display for AxiomSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AxiomSchema {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        AxiomSchema::ALL
            .into_iter()
            .find(|a| a.name() == t || a.ascii().eq_ignore_ascii_case(t))
            .ok_or_else(|| LogicError::UnknownSchema(s.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LogicId {
    K4C,
    K4DC,
    K4I,
    K4DI,
}

impl LogicId {
    pub const ALL: [LogicId; 4] = [LogicId::K4C, LogicId::K4DC, LogicId::K4I, LogicId::K4DI];

    pub fn name(self) -> &'static str {
        match self {
            LogicId::K4C => "K4C∞",
            LogicId::K4DC => "K4DC∞",
            LogicId::K4I => "K4I∞",
            LogicId::K4DI => "K4DI∞",
        }
    }

    pub fn is_serial(self) -> bool {
        matches!(self, LogicId::K4DC | LogicId::K4DI)
    }

    pub fn is_immersive(self) -> bool {
        matches!(self, LogicId::K4I | LogicId::K4DI)
    }

    pub fn schemas(self) -> Vec<AxiomSchema> {
        use AxiomSchema::*;
        let mut out = vec![K, Four];
        if self.is_serial() {
            out.push(D);
        }
        out.extend([NextNeg, NextAnd]);
        if self.is_immersive() {
            out.extend([C, Fix, Ind, CTan]);
        } else {
            out.extend([CDot, Fix, Ind, CTanDot]);
        }
        out
    }

    pub fn frame_class(self) -> ClassFlags {
        ClassFlags {
            transitive: true,
            serial: self.is_serial(),
            monotonic: true,
            strictly_monotonic: self.is_immersive(),
        }
    }
}

impl fmt::Display for LogicId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogicId {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let t = t.strip_suffix('∞').or_else(|| t.strip_suffix("inf")).unwrap_or(t);
        LogicId::ALL
            .into_iter()
            .find(|l| l.name().trim_end_matches('∞').eq_ignore_ascii_case(t))
            .ok_or_else(|| LogicError::UnknownLogic(s.into()))
    }
}

/// Instance of `schema` using plain variables: `p`, `q` for formula slots,
/// `{p}` for set slots (and `q` for the extra slot of Ind).
pub fn plain_instance(schema: AxiomSchema) -> Formula {
    let mut vars = ["p", "q"].into_iter().cycle();
    let slots: Vec<Slot> = schema
        .slots()
        .iter()
        .map(|k| match k {
            SlotKind::Formula => Slot::Formula(Formula::var(vars.next().expect("cycle"))),
            SlotKind::Set => Slot::Set(TangleArgs::new([Formula::var(vars.next().expect("cycle"))]).expect("one")),
        })
        .collect();
    schema.instantiate(&slots).expect("slots match")
}

/// Random instance over `{p, q}`: slot formulas of depth ≤ 2, sets of one or two.
pub fn random_instance<R: Rng>(rng: &mut R, schema: AxiomSchema) -> Formula {
    let vars = ["p", "q"];
    let slots: Vec<Slot> = schema
        .slots()
        .iter()
        .map(|k| match k {
            SlotKind::Formula => Slot::Formula(random_formula(rng, &vars, 2)),
            SlotKind::Set => {
                let k = rng.gen_range(1..=2);
                Slot::Set(random_tangle_args(rng, &vars, 1, k))
            }
        })
        .collect();
    schema.instantiate(&slots).expect("slots match")
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
    pub max_worlds: usize,
    /// Random instances per schema per frame, after the plain instance.
    pub random_instances: usize,
    /// Valuations tried when exhaustive checking exceeds its bound.
    pub samples: usize,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> SuiteConfig {
        SuiteConfig {
            trials,
            seed,
            max_worlds: 4,
            random_instances: 2,
            samples: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemaViolation {
    pub schema: String,
    pub instance: String,
    pub world: String,
    pub frame: RawFrame,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub logic: String,
    pub schemas: Vec<String>,
    pub seed: u64,
    pub trials: usize,
    pub max_worlds: usize,
    pub instances_checked: usize,
    pub exhaustive_checks: usize,
    pub sampled_checks: usize,
    pub violations: Vec<SchemaViolation>,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Default)]
struct FrameOutcome {
    instances: usize,
    exhaustive: usize,
    sampled: usize,
    violations: Vec<SchemaViolation>,
}

/// Exhaustive when the valuation space fits, otherwise seeded sampling.
fn check_validity(frame: &Frame, formula: &Formula, samples: usize, seed: u64) -> (Verdict, bool) {
    match valid_on_frame(frame, formula, ValidityMode::Exhaustive) {
        Ok(v) => (v, true),
        Err(SemanticsError::ExhaustiveBound { .. }) => {
            let v = valid_on_frame(frame, formula, ValidityMode::Sampled { samples, seed }).expect("sampling has no bound");
            (v, false)
        }
        Err(e) => panic!("schema instances are well formed: {e}"),
    }
}

fn witness(frame: &Frame, valuation: &Valuation) -> RawFrame {
    let mut raw = frame.to_raw();
    raw.valuation = Some(valuation_names(frame, valuation));
    raw
}

fn check_frame(schemas: &[AxiomSchema], frame: &Frame, seed: u64, config: &SuiteConfig) -> FrameOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = FrameOutcome::default();
    for &schema in schemas {
        let mut instances = vec![plain_instance(schema)];
        if !schema.slots().is_empty() {
            instances.extend((0..config.random_instances).map(|_| random_instance(&mut rng, schema)));
        }
        for instance in instances {
            out.instances += 1;
            let (verdict, exhaustive) = check_validity(frame, &instance, config.samples, rng.gen());
            if exhaustive {
                out.exhaustive += 1;
            } else {
                out.sampled += 1;
            }
            if let Verdict::Countermodel { valuation, world } = verdict {
                out.violations.push(SchemaViolation {
                    schema: schema.name().into(),
                    instance: instance.to_string(),
                    world: frame.name(world).into(),
                    frame: witness(frame, &valuation),
                });
            }
        }
    }
    out
}

fn report(
    logic: &str,
    schemas: &[AxiomSchema],
    config: &SuiteConfig,
    outcomes: impl IntoIterator<Item = FrameOutcome>,
) -> SoundnessReport {
    let mut r = SoundnessReport {
        logic: logic.into(),
        schemas: schemas.iter().map(|s| s.name().to_string()).collect(),
        seed: config.seed,
        trials: config.trials,
        max_worlds: config.max_worlds,
        instances_checked: 0,
        exhaustive_checks: 0,
        sampled_checks: 0,
        violations: Vec::new(),
    };
    for o in outcomes {
        r.instances_checked += o.instances;
        r.exhaustive_checks += o.exhaustive;
        r.sampled_checks += o.sampled;
        r.violations.extend(o.violations);
    }
    r
}

/// Checks every schema of `logic` on `trials` seeded random frames of its class.
pub fn soundness_suite(logic: LogicId, config: &SuiteConfig) -> SoundnessReport {
    run_suite(logic.name(), &logic.schemas(), &logic.frame_class(), config)
}

/// Soundness suite for an arbitrary schema list over frames of `class`.
pub fn run_suite(label: &str, schemas: &[AxiomSchema], class: &ClassFlags, config: &SuiteConfig) -> SoundnessReport {
    let mut master = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds: Vec<u64> = (0..config.trials).map(|_| master.gen()).collect();
    let outcomes: Vec<FrameOutcome> = seeds
        .par_iter()
        .map(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let frame = random_frame_in_class(&mut rng, config.max_worlds, class);
            check_frame(schemas, &frame, rng.gen(), config)
        })
        .collect();
    report(label, schemas, config, outcomes)
}

/// Checks the schemas of `logic` on one given frame, whatever its class.
pub fn check_logic_on_frame(logic: LogicId, frame: &Frame, config: &SuiteConfig) -> SoundnessReport {
    let schemas = logic.schemas();
    let outcome = check_frame(&schemas, frame, config.seed, config);
    let mut r = report(logic.name(), &schemas, config, [outcome]);
    r.trials = 1;
    r
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countermodel {
    pub frame: Frame,
    pub valuation: Valuation,
    pub world: usize,
}

impl Countermodel {
    pub fn to_raw(&self) -> RawFrame {
        witness(&self.frame, &self.valuation)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Countermodel(Countermodel),
    /// Nothing refutes the formula within the explored bounds. This is not a
    /// validity verdict.
    NoneWithinBounds {
        exhaustive_worlds: usize,
        random_trials: usize,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub max_worlds: usize,
    pub seed: u64,
    /// Random frames tried for sizes above [`EXHAUSTIVE_SEARCH_WORLDS`].
    pub random_trials: usize,
    pub samples: usize,
}

impl SearchConfig {
    pub fn new(max_worlds: usize, seed: u64) -> SearchConfig {
        SearchConfig {
            max_worlds,
            seed,
            random_trials: 2000,
            samples: 256,
        }
    }
}

/// Transitive relations on `n ≤ 5` worlds as `n²`-bit masks (bit `i*n+j`
/// for `i ⊏ j`), ascending, keeping only the least mask of each
/// isomorphism class.
pub fn canonical_relations(n: usize) -> &'static [u32] {
    static CACHE: [OnceLock<Vec<u32>>; EXHAUSTIVE_SEARCH_WORLDS + 1] = [const { OnceLock::new() }; EXHAUSTIVE_SEARCH_WORLDS + 1];
    assert!(n <= EXHAUSTIVE_SEARCH_WORLDS, "exhaustive enumeration is limited to {EXHAUSTIVE_SEARCH_WORLDS} worlds");
    CACHE[n].get_or_init(|| {
        let perms = permutations(n);
        transitive_relations(n)
            .into_iter()
            .filter(|&m| perms.iter().all(|p| permute_mask(m, n, p) >= m))
            .collect()
    })
}

/// All transitive relations on `n` worlds, ascending.
pub fn transitive_relations(n: usize) -> Vec<u32> {
    // bits decided from most to least significant; state: 0 unknown, 1 absent, 2 present
    fn go(n: usize, bit: usize, state: &mut Vec<u8>, mask: u32, out: &mut Vec<u32>) {
        if bit == 0 {
            out.push(mask);
            return;
        }
        let b = bit - 1;
        let (a, c) = (b / n, b % n);
        for present in [false, true] {
            state[b] = if present { 2 } else { 1 };
            let ok = if present {
                (0..n).all(|x| {
                    !(state[c * n + x] == 2 && state[a * n + x] == 1) && !(state[x * n + a] == 2 && state[x * n + c] == 1)
                })
            } else {
                (0..n).all(|x| !(state[a * n + x] == 2 && state[x * n + c] == 2))
            };
            if ok {
                go(n, b, state, if present { mask | (1 << b) } else { mask }, out);
            }
        }
        state[b] = 0;
    }
    let mut out = Vec::new();
    let mut state = vec![0u8; n * n];
    go(n, n * n, &mut state, 0, &mut out);
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(p.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, p, out);
            let j = if k % 2 == 0 { i } else { 0 };
            p.swap(j, k - 1);
        }
    }
    heap(n, &mut p, &mut out);
    out
}

fn permute_mask(mask: u32, n: usize, p: &[usize]) -> u32 {
    let mut out = 0;
    for i in 0..n {
        for j in 0..n {
            if mask >> (i * n + j) & 1 == 1 {
                out |= 1 << (p[i] * n + p[j]);
            }
        }
    }
    out
}

fn frame_from_mask(n: usize, mask: u32, func: Vec<usize>) -> Frame {
    let pairs: Vec<(usize, usize)> = (0..n * n).filter(|b| mask >> b & 1 == 1).map(|b| (b / n, b % n)).collect();
    let names = (0..n).map(|i| format!("w{i}")).collect();
    Frame::from_rows_unchecked(names, rows_from_pairs(n, &pairs), func)
}

/// Calls `visit` on every function of `class` over `frame`'s relation, in
/// lexicographic order, until it returns `Some`.
fn find_function<T>(frame: &Frame, class: &ClassFlags, visit: &mut impl FnMut(Vec<usize>) -> Option<T>) -> Option<T> {
    fn go<T>(
        frame: &Frame,
        class: &ClassFlags,
        partial: &mut Vec<usize>,
        visit: &mut impl FnMut(Vec<usize>) -> Option<T>,
    ) -> Option<T> {
        let w = partial.len();
        if w == frame.len() {
            return visit(partial.clone());
        }
        for c in frame.worlds() {
            let ok = !(class.monotonic || class.strictly_monotonic)
                || frame.extends_monotone(partial, w, c, class.strictly_monotonic);
            if ok {
                partial.push(c);
                let found = go(frame, class, partial, visit);
                partial.pop();
                if found.is_some() {
                    return found;
                }
            }
        }
        None
    }
    go(frame, class, &mut Vec::with_capacity(frame.len()), visit)
}

fn refute(frame: &Frame, formula: &Formula, samples: usize, seed: u64) -> Option<Countermodel> {
    match check_validity(frame, formula, samples, seed).0 {
        Verdict::Valid => None,
        Verdict::Countermodel { valuation, world } => Some(Countermodel {
            frame: frame.clone(),
            valuation,
            world,
        }),
    }
}

/// Searches the frame class of `logic` for a model refuting `formula`.
///
/// Sizes up to [`EXHAUSTIVE_SEARCH_WORLDS`] are enumerated exhaustively
/// (up to isomorphism) in canonical order: world count, relation mask,
/// function, valuation mask. Larger sizes are sampled with the given seed.
pub fn countermodel_search(formula: &Formula, logic: LogicId, config: &SearchConfig) -> SearchOutcome {
    let class = logic.frame_class();
    let exhaustive = config.max_worlds.min(EXHAUSTIVE_SEARCH_WORLDS);
    for n in 1..=exhaustive {
        let found = canonical_relations(n).par_iter().find_map_first(|&mask| {
            let bare = frame_from_mask(n, mask, (0..n).collect());
            if class.serial && !bare.is_serial() {
                return None;
            }
            find_function(&bare, &class, &mut |func| {
                let frame = frame_from_mask(n, mask, func);
                refute(&frame, formula, config.samples, config.seed)
            })
        });
        if let Some(c) = found {
            return SearchOutcome::Countermodel(c);
        }
    }
    let mut trials = 0;
    if config.max_worlds > EXHAUSTIVE_SEARCH_WORLDS {
        trials = config.random_trials;
        let mut master = ChaCha8Rng::seed_from_u64(config.seed);
        let seeds: Vec<u64> = (0..trials).map(|_| master.gen()).collect();
        let found = seeds.par_iter().find_map_first(|&s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let n = rng.gen_range(EXHAUSTIVE_SEARCH_WORLDS + 1..=config.max_worlds);
            let frame = loop {
                let p = rng.gen_range(0.1..0.7);
                if let Some(f) = crate::random::random_frame(&mut rng, n, p, &class) {
                    break f;
                }
            };
            refute(&frame, formula, config.samples, rng.gen())
        });
        if let Some(c) = found {
            return SearchOutcome::Countermodel(c);
        }
    }
    SearchOutcome::NoneWithinBounds {
        exhaustive_worlds: exhaustive,
        random_trials: trials,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::frame::fixtures::{f1, f2, f3};

    fn set(names: &[&str]) -> Slot {
        Slot::Set(TangleArgs::new(names.iter().map(|n| parse(n).unwrap())).unwrap())
    }

    fn var(n: &str) -> Slot {
        Slot::Formula(Formula::var(n))
    }

    #[test]
    fn instantiation_examples() {
        assert_eq!(
            AxiomSchema::Fix.instantiate(&[set(&["p"])]).unwrap(),
            parse("<t>{p} -> <d>(p & <t>{p})").unwrap()
        );
        assert_eq!(
            AxiomSchema::Four.instantiate(&[var("p")]).unwrap(),
            parse("[d]p -> [d][d]p").unwrap()
        );
        assert_eq!(
            AxiomSchema::CTan.instantiate(&[set(&["p"])]).unwrap(),
            parse("<t>{O p} -> O <t>{p}").unwrap()
        );
        assert_eq!(
            AxiomSchema::Ind.instantiate(&[set(&["p"]), var("q")]).unwrap(),
            parse("[d.](q -> <d>(p & q)) -> (q -> <t>{p})").unwrap()
        );
        assert_eq!(AxiomSchema::D.instantiate(&[]).unwrap(), parse("<d>T").unwrap());
    }

    #[test]
    fn set_slots_conjoin_in_canonical_order() {
        let fix = AxiomSchema::Fix.instantiate(&[set(&["q", "p"])]).unwrap();
        assert_eq!(fix, parse("<t>{p, q} -> <d>(p & <t>{p, q}) & <d>(q & <t>{p, q})").unwrap());
    }

    #[test]
    fn arity_errors() {
        assert!(matches!(AxiomSchema::K.instantiate(&[var("p")]), Err(LogicError::Arity { schema: "K", .. })));
        assert!(AxiomSchema::Fix.instantiate(&[var("p")]).is_err());
        assert!(AxiomSchema::Ind.instantiate(&[var("q"), set(&["p"])]).is_err());
    }

    #[test]
    fn names_parse() {
        for s in AxiomSchema::ALL {
            assert_eq!(s.name().parse::<AxiomSchema>().unwrap(), s);
            assert_eq!(s.ascii().parse::<AxiomSchema>().unwrap(), s);
        }
        for l in LogicId::ALL {
            assert_eq!(l.name().parse::<LogicId>().unwrap(), l);
        }
        assert_eq!("k4dc".parse::<LogicId>().unwrap(), LogicId::K4DC);
        assert!("S4".parse::<LogicId>().is_err());
    }

    #[test]
    fn logic_membership() {
        assert!(LogicId::K4I.schemas().contains(&AxiomSchema::CTan));
        assert!(!LogicId::K4C.schemas().contains(&AxiomSchema::CTan));
        assert!(LogicId::K4DC.schemas().contains(&AxiomSchema::D));
        assert!(LogicId::K4DI.frame_class().strictly_monotonic);
    }

    #[test]
    fn transitive_relation_counts() {
        // labelled transitive relations: 1, 2, 13, 171, 3994
        let counts: Vec<usize> = (0..=4).map(|n| transitive_relations(n).len()).collect();
        assert_eq!(counts, [1, 2, 13, 171, 3994]);
        // unlabelled: 2, 8, 39, 242
        let iso: Vec<usize> = (1..=4).map(|n| canonical_relations(n).len()).collect();
        assert_eq!(iso, [2, 8, 39, 242]);
        let all = transitive_relations(3);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn soundness_small() {
        let config = SuiteConfig::new(100, 7);
        let r = soundness_suite(LogicId::K4C, &config);
        assert!(r.passed(), "{:?}", r.violations.first());
        assert_eq!(r.trials, 100);
    }

    #[test]
    fn misconfigured_suite_finds_ctan_violation() {
        let mut schemas = LogicId::K4C.schemas();
        schemas.push(AxiomSchema::CTan);
        let r = run_suite("K4C∞+CTan◇", &schemas, &LogicId::K4C.frame_class(), &SuiteConfig::new(300, 7));
        assert!(!r.violations.is_empty());
        assert!(r.violations.iter().all(|v| v.schema == "CTan◇"));
        let f3_report = check_logic_on_frame(LogicId::K4I, &f3(), &SuiteConfig::new(1, 1));
        assert!(f3_report.violations.iter().any(|v| v.schema == "CTan◇"));
    }

    #[test]
    fn d_fails_at_dead_end() {
        let r = check_logic_on_frame(LogicId::K4DI, &f2(), &SuiteConfig::new(1, 1));
        let d: Vec<_> = r.violations.iter().filter(|v| v.schema == "D").collect();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].world, "o");
        assert!(check_logic_on_frame(LogicId::K4DI, &f1(), &SuiteConfig::new(1, 1)).passed());
    }

    #[test]
    fn search_examples() {
        let ctan = parse("<t>{O p} -> O <t>{p}").unwrap();
        let found = countermodel_search(&ctan, LogicId::K4C, &SearchConfig::new(3, 0));
        let SearchOutcome::Countermodel(c) = found else {
            panic!("expected a countermodel")
        };
        assert!(c.frame.is_monotonic());
        assert!(c.frame.len() <= 3);
        let model = crate::semantics::Model::new(c.frame.clone(), c.valuation.clone());
        assert!(!model.truth_set(&ctan).contains(c.world));

        let none = countermodel_search(&ctan, LogicId::K4I, &SearchConfig::new(4, 0));
        assert!(matches!(none, SearchOutcome::NoneWithinBounds { exhaustive_worlds: 4, .. }));
        let taut = parse("p -> p").unwrap();
        for l in LogicId::ALL {
            assert!(matches!(countermodel_search(&taut, l, &SearchConfig::new(3, 0)), SearchOutcome::NoneWithinBounds { .. }));
        }
    }

    #[test]
    fn search_is_deterministic_and_minimal() {
        let f = parse("p -> <d>p").unwrap();
        let a = countermodel_search(&f, LogicId::K4C, &SearchConfig::new(3, 1));
        let b = countermodel_search(&f, LogicId::K4C, &SearchConfig::new(3, 99));
        assert_eq!(a, b);
        let SearchOutcome::Countermodel(c) = a else { panic!() };
        assert_eq!(c.frame.len(), 1);
    }
}
