//! Truth sets of formulas on finite dynamic models.
//!
//! `‖◇φ‖` is the derivative `↓⊏‖φ‖`, `‖○φ‖ = g⁻¹‖φ‖`, and the tangle
//! `‖<t>Φ‖` is the greatest set `A` with `A ⊆ ↓⊏(‖φ‖ ∩ A)` for every
//! `φ ∈ Φ`.

use std::collections::BTreeMap;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::formula::{Formula, RESERVED_VAR};
use crate::frame::{lookup, Frame, FrameError, RawFrame};
use crate::worldset::WorldSet;

/// Largest `|worlds| · |vars|` accepted by exhaustive validity checking.
pub const EXHAUSTIVE_BITS_LIMIT: usize = 24;

/// Largest frame accepted by the subset-enumeration tangle oracle.
pub const SUBSET_ORACLE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("tangle needs at least one argument set")]
    EmptyTangle,
    #[error("subset oracle supports at most {SUBSET_ORACLE_LIMIT} worlds, frame has {0}")]
    OracleTooLarge(usize),
    #[error("exhaustive validity needs |worlds|·|vars| ≤ {EXHAUSTIVE_BITS_LIMIT}, got {worlds}·{vars}")]
    ExhaustiveBound { worlds: usize, vars: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Variables absent from the map denote the empty set.
pub type Valuation = BTreeMap<String, WorldSet>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub frame: Frame,
    pub valuation: Valuation,
}

impl Model {
    pub fn new(frame: Frame, valuation: Valuation) -> Model {
        Model { frame, valuation }
    }

    pub fn from_raw(raw: &RawFrame, close_transitively: bool) -> Result<Model, FrameError> {
        let frame = Frame::from_raw(raw, close_transitively)?;
        let valuation = match &raw.valuation {
            Some(v) => parse_valuation(&frame, v)?,
            None => Valuation::new(),
        };
        Ok(Model { frame, valuation })
    }

    pub fn to_raw(&self) -> RawFrame {
        let mut raw = self.frame.to_raw();
        raw.valuation = Some(valuation_names(&self.frame, &self.valuation));
        raw
    }

    pub fn truth_set(&self, formula: &Formula) -> WorldSet {
        truth_set(self, formula)
    }
}

pub fn parse_valuation(
    frame: &Frame,
    named: &IndexMap<String, Vec<String>>,
) -> Result<Valuation, FrameError> {
    let index: std::collections::HashMap<String, usize> =
        frame.names().iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
    let mut out = Valuation::new();
    for (var, worlds) in named {
        let mut set = WorldSet::empty(frame.len());
        for w in worlds {
            set.insert(lookup(&index, w, &format!("valuation of {var}"))?);
        }
        out.insert(var.clone(), set);
    }
    Ok(out)
}

pub fn valuation_names(frame: &Frame, valuation: &Valuation) -> IndexMap<String, Vec<String>> {
    valuation
        .iter()
        .map(|(var, set)| (var.clone(), frame.set_names(set)))
        .collect()
}

/// Counters gathered while evaluating a formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalStats {
    pub tangle_evaluations: usize,
    pub max_tangle_iterations: usize,
}

pub fn truth_set(model: &Model, formula: &Formula) -> WorldSet {
    truth_set_with_stats(model, formula).0
}

pub fn truth_set_with_stats(model: &Model, formula: &Formula) -> (WorldSet, EvalStats) {
    let mut stats = EvalStats::default();
    let lookup = |name: &str| model.valuation.get(name);
    let set = eval(&model.frame, formula, &lookup, &mut stats);
    (set, stats)
}

fn eval<'v, L>(frame: &Frame, formula: &Formula, lookup: &L, stats: &mut EvalStats) -> WorldSet
where
    L: Fn(&str) -> Option<&'v WorldSet>,
{
    let n = frame.len();
    match formula {
        Formula::Var(name) => {
            if name == RESERVED_VAR {
                // only ever occurs as p ∨ ¬p / p ∧ ¬p, so any fixed value works
                return WorldSet::empty(n);
            }
            lookup(name).cloned().unwrap_or_else(|| WorldSet::empty(n))
        }
        Formula::Neg(a) => eval(frame, a, lookup, stats).complement(),
        Formula::And(a, b) => {
            let mut s = eval(frame, a, lookup, stats);
            s.intersect_with(&eval(frame, b, lookup, stats));
            s
        }
        Formula::Or(a, b) => {
            let mut s = eval(frame, a, lookup, stats);
            s.union_with(&eval(frame, b, lookup, stats));
            s
        }
        Formula::Implies(a, b) => {
            let mut s = eval(frame, a, lookup, stats).complement();
            s.union_with(&eval(frame, b, lookup, stats));
            s
        }
        Formula::Diamond(a) => frame.down(&eval(frame, a, lookup, stats)),
        Formula::Box(a) => frame.down(&eval(frame, a, lookup, stats).complement()).complement(),
        Formula::Next(a) => frame.preimage(&eval(frame, a, lookup, stats)),
        Formula::Tangle(args) => {
            let sets: Vec<WorldSet> = args.iter().map(|a| eval(frame, a, lookup, stats)).collect();
            let (set, iterations) = tangle_fixpoint(frame, &sets);
            stats.tangle_evaluations += 1;
            stats.max_tangle_iterations = stats.max_tangle_iterations.max(iterations);
            set
        }
    }
}

/// Decreasing iteration `A₀ = W`, `A_{k+1} = A_k ∩ ⋂ᵢ ↓⊏(Sᵢ ∩ A_k)`.
/// Returns the fixed point and the number of steps evaluated.
fn tangle_fixpoint(frame: &Frame, sets: &[WorldSet]) -> (WorldSet, usize) {
    let mut current = frame.all();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut next = WorldSet::empty(frame.len());
        for w in &current {
            let row = frame.successors(w);
            if sets.iter().all(|s| row.intersects_both(s, &current)) {
                next.insert(w);
            }
        }
        if next == current {
            return (current, iterations);
        }
        current = next;
        if current.is_empty() {
            return (current, iterations);
        }
    }
}

/// Greatest `A` in which every set of `sets` is tangled.
pub fn tangled_derivative(frame: &Frame, sets: &[WorldSet]) -> Result<WorldSet, SemanticsError> {
    tangled_derivative_counted(frame, sets).map(|(s, _)| s)
}

/// As [`tangled_derivative`], also returning the iteration count (≤ |worlds|).
pub fn tangled_derivative_counted(
    frame: &Frame,
    sets: &[WorldSet],
) -> Result<(WorldSet, usize), SemanticsError> {
    if sets.is_empty() {
        return Err(SemanticsError::EmptyTangle);
    }
    Ok(tangle_fixpoint(frame, sets))
}

/// Union of all subsets `A ⊆ W` with `A ⊆ ↓⊏(S ∩ A)` for every `S`, by
/// enumerating all `2^|W|` subsets.
pub fn tangled_oracle_subsets(frame: &Frame, sets: &[WorldSet]) -> Result<WorldSet, SemanticsError> {
    let n = frame.len();
    if n > SUBSET_ORACLE_LIMIT {
        return Err(SemanticsError::OracleTooLarge(n));
    }
    if sets.is_empty() {
        return Err(SemanticsError::EmptyTangle);
    }
    let succ: Vec<u64> = frame
        .worlds()
        .map(|w| frame.worlds().filter(|&v| frame.sees(w, v)).fold(0u64, |m, v| m | 1 << v))
        .collect();
    let masks: Vec<u64> = sets
        .iter()
        .map(|s| frame.worlds().filter(|&v| s.contains(v)).fold(0u64, |m, v| m | 1 << v))
        .collect();
    let mut union = 0u64;
    for a in 0u64..(1u64 << n) {
        let tangled = masks.iter().all(|&s| {
            let target = s & a;
            (0..n).filter(|&w| a >> w & 1 == 1).all(|w| succ[w] & target != 0)
        });
        if tangled {
            union |= a;
        }
    }
    Ok(WorldSet::from_worlds(n, (0..n).filter(|&w| union >> w & 1 == 1)))
}

/// Worlds `w` such that some reflexive cluster `C(v)` with `w ⊑ v` meets
/// every set.
pub fn tangled_oracle_clusters(frame: &Frame, sets: &[WorldSet]) -> Result<WorldSet, SemanticsError> {
    if sets.is_empty() {
        return Err(SemanticsError::EmptyTangle);
    }
    let n = frame.len();
    let good_top = |v: usize| {
        frame.sees(v, v)
            && sets.iter().all(|s| {
                (0..n).any(|u| s.contains(u) && (u == v || (frame.sees(u, v) && frame.sees(v, u))))
            })
    };
    let tops: Vec<usize> = (0..n).filter(|&v| good_top(v)).collect();
    Ok(WorldSet::from_worlds(
        n,
        (0..n).filter(|&w| tops.iter().any(|&v| w == v || frame.sees(w, v))),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityMode {
    Exhaustive,
    Sampled { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Countermodel { valuation: Valuation, world: usize },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

/// Valuation over `vars` encoded by consecutive `n`-bit blocks of `mask`.
pub(crate) fn valuation_from_mask(n: usize, vars: &[String], mask: u64) -> Vec<WorldSet> {
    let block = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    vars.iter()
        .enumerate()
        .map(|(j, _)| WorldSet::from_mask(n, (mask >> (j * n)) & block))
        .collect()
}

/// First world (canonical order) where `formula` fails under `sets`.
pub(crate) fn refuting_world(frame: &Frame, formula: &Formula, vars: &[String], sets: &[WorldSet]) -> Option<usize> {
    let lookup = |name: &str| vars.iter().position(|v| v == name).map(|i| &sets[i]);
    let mut stats = EvalStats::default();
    eval(frame, formula, &lookup, &mut stats).complement().first()
}

fn to_valuation(vars: &[String], sets: Vec<WorldSet>) -> Valuation {
    vars.iter().cloned().zip(sets).collect()
}

/// Checks `formula` under every valuation of its variables (exhaustive) or
/// under seeded pseudo-random valuations (sampled). The first failing
/// valuation in enumeration order and its first failing world are returned.
pub fn valid_on_frame(frame: &Frame, formula: &Formula, mode: ValidityMode) -> Result<Verdict, SemanticsError> {
    let vars: Vec<String> = formula.vars().into_iter().collect();
    let n = frame.len();
    match mode {
        ValidityMode::Exhaustive => {
            let bits = n * vars.len();
            if bits > EXHAUSTIVE_BITS_LIMIT {
                return Err(SemanticsError::ExhaustiveBound {
                    worlds: n,
                    vars: vars.len(),
                });
            }
            let total = 1u64 << bits;
            let check = |mask: u64| {
                let sets = valuation_from_mask(n, &vars, mask);
                refuting_world(frame, formula, &vars, &sets).map(|w| (sets, w))
            };
            let found = if total <= 4096 {
                (0..total).find_map(check)
            } else {
                (0..total).into_par_iter().find_map_first(check)
            };
            Ok(match found {
                Some((sets, world)) => Verdict::Countermodel {
                    valuation: to_valuation(&vars, sets),
                    world,
                },
                None => Verdict::Valid,
            })
        }
        ValidityMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                let sets: Vec<WorldSet> = vars
                    .iter()
                    .map(|_| WorldSet::from_worlds(n, (0..n).filter(|_| rng.gen_bool(0.5))))
                    .collect();
                if let Some(world) = refuting_world(frame, formula, &vars, &sets) {
                    return Ok(Verdict::Countermodel {
                        valuation: to_valuation(&vars, sets),
                        world,
                    });
                }
            }
            Ok(Verdict::Valid)
        }
    }
}
