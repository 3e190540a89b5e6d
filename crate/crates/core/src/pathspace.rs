//! Path spaces over finite frames.
//!
//! A path is an infinite `⊑`-increasing world sequence. Paths are kept in an
//! exact finite form: a prefix followed by a cycle repeated forever.
//! Eventually constant paths (the countable space used for the rational
//! numbers) have a cycle of length one; longer cycles are needed to exercise
//! limit assignments on paths that keep moving inside a reflexive cluster.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::frame::Frame;
use crate::story::Story;

/// Longest cycle used when enumerating eventually periodic paths.
pub const PERIODIC_MAX_CYCLE: usize = 2;
/// Longest prefix used when enumerating eventually periodic paths.
pub const PERIODIC_MAX_PREFIX: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PathError {
    #[error("path cycle is empty")]
    EmptyCycle,
    #[error("not increasing at index {index}: {from} does not see {to}")]
    NotIncreasing { index: usize, from: String, to: String },
    #[error("unknown world {0:?} in path")]
    UnknownWorld(String),
    #[error("malformed path dump {0:?}: expected \"w0,...,wk;tail\"")]
    Malformed(String),
    #[error("world {world:?} lies in a reflexive cluster with a single point; apply reflexive duplication first")]
    SmallReflexiveCluster { world: String },
}

/// `prefix · cycle^ω` in canonical form: the cycle is primitive and the
/// prefix never ends with the cycle's last element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    prefix: Vec<usize>,
    cycle: Vec<usize>,
}

fn canonicalize(mut prefix: Vec<usize>, mut cycle: Vec<usize>) -> Path {
    let len = cycle.len();
    if let Some(d) = (1..=len).find(|&d| len % d == 0 && (d..len).all(|i| cycle[i] == cycle[i - d])) {
        cycle.truncate(d);
    }
    while prefix.last().is_some_and(|&w| Some(&w) == cycle.last()) {
        prefix.pop();
        cycle.rotate_right(1);
    }
    Path { prefix, cycle }
}

impl Path {
    pub fn constant(world: usize) -> Path {
        Path {
            prefix: vec![],
            cycle: vec![world],
        }
    }

    /// Validates that the sequence is `⊑`-increasing (the cycle wraps) and
    /// returns its canonical form.
    pub fn new(frame: &Frame, prefix: Vec<usize>, cycle: Vec<usize>) -> Result<Path, PathError> {
        if cycle.is_empty() {
            return Err(PathError::EmptyCycle);
        }
        let seq: Vec<usize> = prefix.iter().chain(&cycle).chain(cycle.first()).copied().collect();
        for (index, pair) in seq.windows(2).enumerate() {
            if pair.iter().any(|&w| w >= frame.len()) {
                return Err(PathError::UnknownWorld(pair[1].to_string()));
            }
            if !frame.sees_or_eq(pair[0], pair[1]) {
                return Err(PathError::NotIncreasing {
                    index,
                    from: frame.name(pair[0]).into(),
                    to: frame.name(pair[1]).into(),
                });
            }
        }
        Ok(canonicalize(prefix, cycle))
    }

    pub fn eventually_constant(frame: &Frame, prefix: Vec<usize>, tail: usize) -> Result<Path, PathError> {
        Path::new(frame, prefix, vec![tail])
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    /// The constant tail, for eventually constant paths.
    pub fn tail(&self) -> Option<usize> {
        (self.cycle.len() == 1).then(|| self.cycle[0])
    }

    pub fn is_eventually_constant(&self) -> bool {
        self.cycle.len() == 1
    }

    #[inline]
    pub fn at(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    pub fn expand(&self, len: usize) -> Vec<usize> {
        (0..len).map(|i| self.at(i)).collect()
    }

    /// Worlds occurring infinitely often.
    pub fn recurring(&self) -> &[usize] {
        &self.cycle
    }

    /// Index beyond which both paths repeat with a common period.
    fn horizon(&self, other: &Path) -> usize {
        let (a, b) = (self.cycle.len(), other.cycle.len());
        self.prefix.len().max(other.prefix.len()) + a / gcd(a, b) * b
    }

    pub fn display<'a>(&'a self, frame: &'a Frame) -> PathDisplay<'a> {
        PathDisplay { path: self, frame }
    }

    /// Parses a dump line `w0,w1,...,wk;tail` (or `...;c0,c1` for cycles).
    pub fn parse(frame: &Frame, line: &str) -> Result<Path, PathError> {
        let (prefix, cycle) = line.split_once(';').ok_or_else(|| PathError::Malformed(line.into()))?;
        let names = |s: &str| -> Result<Vec<usize>, PathError> {
            s.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| frame.world(t).ok_or_else(|| PathError::UnknownWorld(t.into())))
                .collect()
        };
        Path::new(frame, names(prefix)?, names(cycle)?)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub struct PathDisplay<'a> {
    path: &'a Path,
    frame: &'a Frame,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ws: &[usize]| ws.iter().map(|&w| self.frame.name(w)).collect::<Vec<_>>().join(",");
        write!(f, "{};{}", join(&self.path.prefix), join(&self.path.cycle))
    }
}

/// Exact path distance: `0` or `2^-n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Distance(Option<u32>);

impl Distance {
    pub const ZERO: Distance = Distance(None);

    pub fn pow2_neg(n: u32) -> Distance {
        Distance(Some(n))
    }

    pub fn is_zero(self) -> bool {
        self.0.is_none()
    }

    /// `n` with `self = 2^-n`, if nonzero.
    pub fn exponent(self) -> Option<u32> {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        match self.0 {
            None => 0.0,
            Some(n) => 0.5f64.powi(n as i32),
        }
    }

    /// Numerator of `self` over the common denominator `2^scale` (requires `n ≤ scale`).
    pub fn scaled(self, scale: u32) -> u128 {
        match self.0 {
            None => 0,
            Some(n) => {
                assert!(n <= scale && scale < 127);
                1u128 << (scale - n)
            }
        }
    }
}

impl Ord for Distance {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0, other.0) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(&a),
        }
    }
}

impl PartialOrd for Distance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            None => write!(f, "0"),
            Some(n) => write!(f, "2^-{n}"),
        }
    }
}

/// `2^-n` for the least `n` where the paths differ, `0` if they are equal.
pub fn path_metric(u: &Path, v: &Path) -> Distance {
    let horizon = u.horizon(v);
    match (0..horizon).find(|&i| u.at(i) != v.at(i)) {
        Some(n) => Distance::pow2_neg(n as u32),
        None => Distance::ZERO,
    }
}

/// Componentwise image under the frame's transition function.
pub fn next_path(frame: &Frame, path: &Path) -> Path {
    canonicalize(
        path.prefix.iter().map(|&w| frame.g(w)).collect(),
        path.cycle.iter().map(|&w| frame.g(w)).collect(),
    )
}

/// All eventually constant paths whose canonical prefix has length at most
/// `max_prefix`, ordered by prefix length, then prefix, then tail.
pub fn enumerate_paths(frame: &Frame, max_prefix: usize) -> Vec<Path> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for m in 0..=max_prefix {
        for prefix in &layer {
            match prefix.last() {
                None => out.extend(frame.worlds().map(Path::constant)),
                Some(&last) => {
                    for t in frame.successors(last).iter().filter(|&t| t != last) {
                        out.push(Path {
                            prefix: prefix.clone(),
                            cycle: vec![t],
                        });
                    }
                }
            }
        }
        if m < max_prefix {
            layer = extend_prefixes(frame, &layer);
        }
    }
    out
}

fn extend_prefixes(frame: &Frame, layer: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut next = Vec::new();
    for prefix in layer {
        let choices: Vec<usize> = match prefix.last() {
            None => frame.worlds().collect(),
            Some(&last) => frame.worlds().filter(|&w| frame.sees_or_eq(last, w)).collect(),
        };
        for w in choices {
            let mut p = prefix.clone();
            p.push(w);
            next.push(p);
        }
    }
    next
}

/// Eventually periodic paths with cycle length in `2..=max_cycle` (inside a
/// reflexive cluster) and canonical prefix length at most `max_prefix`.
pub fn enumerate_periodic_paths(frame: &Frame, max_prefix: usize, max_cycle: usize) -> Vec<Path> {
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for cluster in frame.clusters().iter().filter(|c| c.len() >= 2) {
        let members: Vec<usize> = cluster.iter().collect();
        let mut layer: Vec<Vec<usize>> = members.iter().map(|&m| vec![m]).collect();
        for _ in 2..=max_cycle {
            layer = layer
                .iter()
                .flat_map(|c| members.iter().map(move |&m| [c.as_slice(), &[m]].concat()))
                .collect();
            cycles.extend(layer.iter().filter(|c| canonicalize(vec![], (*c).clone()).cycle.len() == c.len()).cloned());
        }
    }
    let mut out = BTreeSet::new();
    let mut layer: Vec<Vec<usize>> = vec![vec![]];
    for m in 0..=max_prefix {
        for prefix in &layer {
            for cycle in &cycles {
                let attaches = prefix.last().is_none_or(|&l| frame.sees_or_eq(l, cycle[0]) && Some(&l) != cycle.last());
                if attaches {
                    out.insert(Path {
                        prefix: prefix.clone(),
                        cycle: cycle.clone(),
                    });
                }
            }
        }
        if m < max_prefix {
            layer = extend_prefixes(frame, &layer);
        }
    }
    out.into_iter().collect()
}

/// Per-world ranks: the limit of a path is its lowest-ranked recurring world.
/// Ranks are injective within each level of a story.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitAssignment {
    ranks: Vec<u64>,
}

impl LimitAssignment {
    pub fn from_ranks(ranks: Vec<u64>) -> LimitAssignment {
        LimitAssignment { ranks }
    }

    pub fn ranks(&self) -> &[u64] {
        &self.ranks
    }

    pub fn rank(&self, world: usize) -> u64 {
        self.ranks[world]
    }

    pub fn swap(&mut self, a: usize, b: usize) {
        self.ranks.swap(a, b);
    }
}

/// Level 0 is ranked in canonical order; on level `i+1` a world in the range
/// of `f_i` takes the least rank among its preimages, and the remaining
/// worlds get fresh ranks above all of those, in canonical order.
pub fn build_limit_assignment(story: &Story) -> LimitAssignment {
    let frame = story.frame();
    let mut ranks = vec![0u64; frame.len()];
    let levels = story.levels();
    for (w, r) in ranks.iter_mut().enumerate().take(levels[0].len()) {
        *r = w as u64;
    }
    for (i, f) in story.maps().iter().enumerate() {
        let (src_off, dst_off) = (story.offset(i), story.offset(i + 1));
        let mut level: Vec<Option<u64>> = vec![None; levels[i + 1].len()];
        for (v, &w) in f.iter().enumerate() {
            let r = ranks[src_off + v];
            level[w] = Some(level[w].map_or(r, |cur| cur.min(r)));
        }
        let mut fresh = level.iter().flatten().max().map_or(0, |m| m + 1);
        for (w, slot) in level.iter().enumerate() {
            ranks[dst_off + w] = match slot {
                Some(r) => *r,
                None => {
                    fresh += 1;
                    fresh - 1
                }
            };
        }
    }
    LimitAssignment { ranks }
}

/// Lowest-ranked world among those occurring infinitely often.
pub fn limit(path: &Path, assignment: &LimitAssignment) -> usize {
    *path
        .recurring()
        .iter()
        .min_by_key(|&&w| assignment.rank(w))
        .expect("cycle is nonempty")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PathViolation {
    pub condition: &'static str,
    pub path: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimReport {
    pub resolution: usize,
    pub paths: usize,
    pub periodic_paths: usize,
    pub back_witnesses: usize,
    pub violations: Vec<PathViolation>,
}

impl LimReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, condition: &str) -> usize {
        self.violations.iter().filter(|v| v.condition == condition).count()
    }
}

/// Fails when some reflexive cluster has a single world.
pub fn check_cluster_sizes(frame: &Frame) -> Result<(), PathError> {
    for cluster in frame.clusters() {
        if cluster.len() == 1 && frame.is_reflexive_cluster(&cluster) {
            let w = cluster.first().expect("nonempty");
            return Err(PathError::SmallReflexiveCluster {
                world: frame.name(w).into(),
            });
        }
    }
    Ok(())
}

/// Checks, over the eventually constant paths with prefix at most
/// `resolution`, that `lim` is a dynamic p-morphism:
///
/// * forth: with `k` the first index where `lim x` occurs, every other path
///   within `2^-k` of `x` has a limit strictly above `lim x`;
/// * back: for every `v ⊐ lim x` and `k ≤ resolution`, the path that follows
///   `x` up to an occurrence of `lim x` at index `≥ k` inside the constant
///   tail and then moves to `v`
///   (through a cluster mate when `v = lim x`) lies within `2^-k`, differs
///   from `x`, and has limit `v`;
/// * commuting: `lim(g x) = g(lim x)`, also on eventually periodic paths.
pub fn verify_lim_pmorphism(
    story: &Story,
    assignment: &LimitAssignment,
    resolution: usize,
) -> Result<LimReport, PathError> {
    let frame = story.frame();
    check_cluster_sizes(frame)?;
    let paths = enumerate_paths(frame, resolution);
    let periodic = enumerate_periodic_paths(frame, PERIODIC_MAX_PREFIX.min(resolution), PERIODIC_MAX_CYCLE);
    let mut violations = Vec::new();
    let limits: Vec<usize> = paths.iter().map(|p| limit(p, assignment)).collect();

    check_forth(frame, &paths, &limits, resolution, &mut violations);
    let back_witnesses = check_back(frame, assignment, &paths, &limits, resolution, &mut violations);

    for path in paths.iter().chain(&periodic) {
        let lim = limit(path, assignment);
        let moved = limit(&next_path(frame, path), assignment);
        if moved != frame.g(lim) {
            violations.push(PathViolation {
                condition: "commuting",
                path: path.display(frame).to_string(),
                detail: format!(
                    "lim(g path) = {} but g(lim path) = {}",
                    frame.name(moved),
                    frame.name(frame.g(lim))
                ),
            });
        }
    }
    Ok(LimReport {
        resolution,
        paths: paths.len(),
        periodic_paths: periodic.len(),
        back_witnesses,
        violations,
    })
}

fn first_index_of(path: &Path, world: usize) -> usize {
    (0..).find(|&i| path.at(i) == world).expect("recurring world occurs")
}

fn check_forth(frame: &Frame, paths: &[Path], limits: &[usize], resolution: usize, out: &mut Vec<PathViolation>) {
    // two enumerated paths agreeing on indices 0..=resolution are equal
    let width = resolution + 1;
    let expansions: Vec<Vec<usize>> = paths.iter().map(|p| p.expand(width)).collect();
    let mut order: Vec<usize> = (0..paths.len()).collect();
    order.sort_by(|&a, &b| expansions[a].cmp(&expansions[b]));

    // limits (with count and two sample paths) among paths sharing a key prefix
    type Summary = Vec<(usize, usize, [usize; 2])>;
    let mut summaries: HashMap<Vec<usize>, Summary> = HashMap::new();
    for (x, path) in paths.iter().enumerate() {
        let k = first_index_of(path, limits[x]);
        let key = expansions[x][..=k].to_vec();
        if summaries.contains_key(&key) {
            continue;
        }
        let lo = order.partition_point(|&i| expansions[i][..=k] < key[..]);
        let hi = order.partition_point(|&i| expansions[i][..=k] <= key[..]);
        let mut summary: Summary = Vec::new();
        for &y in &order[lo..hi] {
            match summary.iter_mut().find(|(l, _, _)| *l == limits[y]) {
                Some(entry) => {
                    if entry.1 == 1 {
                        entry.2[1] = y;
                    }
                    entry.1 += 1;
                }
                None => summary.push((limits[y], 1, [y, y])),
            }
        }
        summaries.insert(key, summary);
    }
    for (x, path) in paths.iter().enumerate() {
        let lim = limits[x];
        let k = first_index_of(path, lim);
        let summary = &summaries[&expansions[x][..=k]];
        for &(l, count, samples) in summary {
            if frame.sees(lim, l) {
                continue;
            }
            let witness = if l != lim {
                Some(samples[0])
            } else if count > 1 {
                Some(if samples[0] == x { samples[1] } else { samples[0] })
            } else {
                None
            };
            if let Some(y) = witness {
                out.push(PathViolation {
                    condition: "forth",
                    path: path.display(frame).to_string(),
                    detail: format!(
                        "{} at distance {} has limit {} not above {}",
                        paths[y].display(frame),
                        path_metric(path, &paths[y]),
                        frame.name(l),
                        frame.name(lim)
                    ),
                });
            }
        }
    }
}

fn check_back(
    frame: &Frame,
    assignment: &LimitAssignment,
    paths: &[Path],
    limits: &[usize],
    resolution: usize,
    out: &mut Vec<PathViolation>,
) -> usize {
    let mut witnesses = 0;
    for (x, path) in paths.iter().enumerate() {
        let lim = limits[x];
        let mut seen_n = Vec::new();
        for k in 0..=resolution {
            let start = k.max(path.prefix().len());
            let n = (start..).find(|&i| path.at(i) == lim).expect("limit recurs");
            if seen_n.contains(&n) {
                continue;
            }
            seen_n.push(n);
            for v in frame.successors(lim) {
                witnesses += 1;
                let mut prefix = path.expand(n + 1);
                if v == lim {
                    match frame.cluster_of(v).iter().find(|&u| u != v) {
                        Some(mate) => prefix.push(mate),
                        None => {
                            out.push(PathViolation {
                                condition: "back",
                                path: path.display(frame).to_string(),
                                detail: format!("reflexive {} has no cluster mate", frame.name(v)),
                            });
                            continue;
                        }
                    }
                }
                let problem = match Path::eventually_constant(frame, prefix, v) {
                    Err(e) => Some(format!("witness is not a path: {e}")),
                    Ok(y) => {
                        let d = path_metric(path, &y);
                        let within = d.exponent().is_some_and(|e| e as usize > k);
                        if d.is_zero() || !within {
                            Some(format!("witness {} at distance {d}, needed 0 < d < 2^-{k}", y.display(frame)))
                        } else if limit(&y, assignment) != v {
                            Some(format!(
                                "witness {} has limit {}, expected {}",
                                y.display(frame),
                                frame.name(limit(&y, assignment)),
                                frame.name(v)
                            ))
                        } else {
                            None
                        }
                    }
                };
                if let Some(detail) = problem {
                    out.push(PathViolation {
                        condition: "back",
                        path: path.display(frame).to_string(),
                        detail,
                    });
                }
            }
        }
    }
    witnesses
}

/// Finite preconditions of the Cantor-space and rational-space embeddings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CantorPreconditions {
    pub nonempty: bool,
    pub serial: bool,
    pub reflexive_clusters_at_least_two: bool,
    /// Every enumerated path has another path within `2^-k` for all `k ≤ N`.
    pub perfect_at_resolution: bool,
}

pub fn cantor_preconditions(frame: &Frame, resolution: usize) -> CantorPreconditions {
    let perfect = enumerate_paths(frame, resolution).iter().all(|path| {
        (0..=resolution).all(|k| {
            let n = k.max(path.prefix().len());
            let here = path.at(n);
            frame.successors(here).iter().any(|v| {
                let mut prefix = path.expand(n + 1);
                let tail = if v == here {
                    match frame.cluster_of(v).iter().find(|&u| u != v) {
                        Some(mate) => {
                            prefix.push(mate);
                            v
                        }
                        None => return false,
                    }
                } else {
                    v
                };
                Path::eventually_constant(frame, prefix, tail)
                    .map(|y| {
                        let d = path_metric(path, &y);
                        !d.is_zero() && d.exponent().is_some_and(|e| e as usize > k)
                    })
                    .unwrap_or(false)
            })
        })
    });
    CantorPreconditions {
        nonempty: !frame.is_empty(),
        serial: frame.is_serial(),
        reflexive_clusters_at_least_two: check_cluster_sizes(frame).is_ok(),
        perfect_at_resolution: perfect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::fixtures::{f1, f2};
    use crate::semantics::Valuation;
    use crate::story::Moment;

    fn f1_plus() -> Frame {
        f1().duplicate_reflexive().0
    }

    fn story_of(frame: Frame, root: usize) -> Story {
        Story::single_level(Moment::new(frame, root, Valuation::new()).unwrap())
    }

    #[test]
    fn canonical_form_is_unique() {
        let f = f1_plus();
        // b0 b1 b1 b1 ... written with a redundant prefix and a doubled cycle
        let a = Path::new(&f, vec![1, 2, 2], vec![2, 2]).unwrap();
        let b = Path::new(&f, vec![1], vec![2]).unwrap();
        assert_eq!(a, b);
        let c = Path::new(&f, vec![1, 2, 1], vec![2, 1]).unwrap();
        let d = Path::new(&f, vec![1], vec![2, 1]).unwrap();
        assert_eq!(c, d);
        assert_eq!(c.prefix(), &[] as &[usize]);
        assert_eq!(c.cycle(), &[1, 2]);
    }

    #[test]
    fn rejects_decreasing_sequences() {
        assert!(matches!(
            Path::eventually_constant(&f1(), vec![1], 0),
            Err(PathError::NotIncreasing { index: 0, .. })
        ));
        assert_eq!(Path::new(&f1(), vec![], vec![]), Err(PathError::EmptyCycle));
    }

    #[test]
    fn limit_examples() {
        let f = f1();
        let story = story_of(f.clone(), 0);
        let l = build_limit_assignment(&story);
        assert_eq!(limit(&Path::eventually_constant(&f, vec![0], 1).unwrap(), &l), 1);
        assert_eq!(limit(&Path::constant(0), &l), 0);
        let fp = f1_plus();
        let l = build_limit_assignment(&story_of(fp.clone(), 0));
        assert_eq!(l.ranks(), &[0, 1, 2]);
        assert_eq!(limit(&Path::eventually_constant(&fp, vec![0, 1], 2).unwrap(), &l), 2);
    }

    #[test]
    fn metric_examples() {
        let f = f1();
        let a = Path::constant(0);
        let ab = Path::eventually_constant(&f, vec![0], 1).unwrap();
        assert_eq!(path_metric(&a, &a), Distance::ZERO);
        assert_eq!(path_metric(&a, &ab), Distance::pow2_neg(1));
        let fp = f1_plus();
        let u = Path::eventually_constant(&fp, vec![0, 1], 2).unwrap();
        let v = Path::eventually_constant(&fp, vec![0, 1, 2], 1).unwrap();
        // a b0 b1 b1 ... vs a b0 b1 b0 ...
        assert_eq!(path_metric(&u, &v), Distance::pow2_neg(3));
    }

    #[test]
    fn metric_on_cycles_uses_common_period() {
        let fp = f1_plus();
        let u = Path::new(&fp, vec![0], vec![1, 2]).unwrap();
        let v = Path::new(&fp, vec![0, 1, 2, 1, 2, 1], vec![1]).unwrap();
        assert_eq!(path_metric(&u, &v), Distance::pow2_neg(6));
    }

    #[test]
    fn next_path_examples() {
        let f = f1();
        assert_eq!(next_path(&f, &Path::constant(0)), Path::constant(1));
        assert_eq!(next_path(&f, &Path::constant(1)), Path::constant(1));
        let ab = Path::eventually_constant(&f, vec![0], 1).unwrap();
        assert_eq!(next_path(&f, &ab), Path::constant(1));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(enumerate_paths(&f2(), 2), vec![Path::constant(0)]);
        assert_eq!(enumerate_paths(&f1(), 0), vec![Path::constant(0), Path::constant(1)]);
        let one = enumerate_paths(&f1(), 1);
        assert_eq!(one.len(), 3);
        assert_eq!(one[2], Path::eventually_constant(&f1(), vec![0], 1).unwrap());
        // a;b and a,a;b
        assert_eq!(enumerate_paths(&f1(), 2).len(), 4);
    }

    #[test]
    fn enumeration_is_canonical_and_distinct() {
        let fp = f1_plus();
        let paths = enumerate_paths(&fp, 4);
        let set: BTreeSet<_> = paths.iter().cloned().collect();
        assert_eq!(set.len(), paths.len());
        for p in &paths {
            assert_eq!(&Path::new(&fp, p.prefix().to_vec(), p.cycle().to_vec()).unwrap(), p);
        }
        let periodic = enumerate_periodic_paths(&fp, 2, 2);
        assert!(periodic.iter().all(|p| p.cycle().len() == 2));
        assert!(periodic.contains(&Path::new(&fp, vec![], vec![1, 2]).unwrap()));
    }

    #[test]
    fn min_rule_on_collapse() {
        // level 0: r below irreflexive leaves v2, x, v1 (ranks 1, 2, 3)
        let names = |ns: &[&str]| ns.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let l0 = Frame::from_indices(names(&["r", "v2", "x", "v1"]), &[(0, 1), (0, 2), (0, 3)], vec![0, 1, 2, 3], false)
            .unwrap();
        let l1 = Frame::from_indices(names(&["r'", "w", "x'", "new"]), &[(0, 1), (0, 2), (0, 3)], vec![0, 1, 2, 3], false)
            .unwrap();
        let story = Story::from_parts(
            vec![
                Moment::new(l0, 0, Valuation::new()).unwrap(),
                Moment::new(l1, 0, Valuation::new()).unwrap(),
            ],
            vec![vec![0, 1, 2, 1]],
        )
        .unwrap();
        let l = build_limit_assignment(&story);
        assert_eq!(l.ranks(), &[0, 1, 2, 3, 0, 1, 2, 3]);
    }

    #[test]
    fn verify_examples() {
        let report = verify_lim_pmorphism(&story_of(f1_plus(), 0), &build_limit_assignment(&story_of(f1_plus(), 0)), 6)
            .unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert!(report.back_witnesses > 0);

        let single = story_of(f2(), 0);
        let report = verify_lim_pmorphism(&single, &build_limit_assignment(&single), 4).unwrap();
        assert!(report.passed());
        assert_eq!(report.back_witnesses, 0);

        let small = story_of(f1(), 0);
        assert_eq!(
            verify_lim_pmorphism(&small, &build_limit_assignment(&small), 2),
            Err(PathError::SmallReflexiveCluster { world: "b".into() })
        );
    }

    #[test]
    fn dump_round_trip() {
        let fp = f1_plus();
        for p in enumerate_paths(&fp, 3).iter().chain(&enumerate_periodic_paths(&fp, 2, 2)) {
            let line = p.display(&fp).to_string();
            assert_eq!(&Path::parse(&fp, &line).unwrap(), p);
        }
        assert_eq!(Path::constant(0).display(&fp).to_string(), ";a#0");
        assert!(matches!(Path::parse(&fp, "a#0"), Err(PathError::Malformed(_))));
    }

    #[test]
    fn cantor_preconditions_of_f1_plus() {
        let c = cantor_preconditions(&f1_plus(), 4);
        assert!(c.nonempty && c.serial && c.reflexive_clusters_at_least_two && c.perfect_at_resolution);
        let c = cantor_preconditions(&f2(), 3);
        assert!(!c.serial && !c.perfect_at_resolution);
    }
}
