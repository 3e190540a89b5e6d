//! Moments (finite rooted tree-like frames with a valuation) and stories
//! (sequences of moments linked by monotone maps).

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{index_names, lookup, Frame, FrameError};
use crate::semantics::{parse_valuation, valuation_names, Valuation};
use crate::worldset::WorldSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error("root {0:?} is not a world of the moment")]
    UnknownRoot(String),
    #[error("root does not reach {0:?}")]
    NotRooted(String),
    #[error("not tree-like: {a:?} and {b:?} both below {c:?} but incomparable")]
    NotTreeLike { a: String, b: String, c: String },
    #[error("root {0:?} is not in the root cluster")]
    RootOutsideCluster(String),
    #[error("an irreflexive root cluster must be a singleton, got {0} worlds")]
    IrreflexiveCluster(usize),
}

/// The story conditions, in the order they are checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoryCondition {
    Monotonic,
    RootPreserving,
    AlmostInjective,
    ClusterPreserving,
    Stabilising,
}

impl fmt::Display for StoryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StoryCondition::Monotonic => "monotonicity",
            StoryCondition::RootPreserving => "root preservation",
            StoryCondition::AlmostInjective => "almost injectivity",
            StoryCondition::ClusterPreserving => "cluster-preservation",
            StoryCondition::Stabilising => "stabilisation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoryError {
    #[error("story has no levels")]
    NoLevels,
    #[error("level {level}: {source}")]
    Moment { level: usize, source: MomentError },
    #[error("world name {0:?} occurs on more than one level")]
    DuplicateWorld(String),
    #[error("expected {expected} or {} maps, found {found}", expected + 1)]
    MapCount { expected: usize, found: usize },
    #[error("map {level}: {source}")]
    Map { level: usize, source: FrameError },
    #[error("map {level} is not total: no image for {world:?}")]
    MapNotTotal { level: usize, world: String },
    #[error("monotonicity fails at ({x}, {y}) on level {level}")]
    NotMonotonic { level: usize, x: String, y: String },
    #[error("root preservation fails on level {level}: root {root} maps to {image}, not the next root")]
    NotRootPreserving { level: usize, root: String, image: String },
    #[error("almost injectivity fails on level {level}: {x} and {y} both map to reflexive {image}")]
    NotAlmostInjective {
        level: usize,
        x: String,
        y: String,
        image: String,
    },
    #[error("cluster-preservation fails at {world} on level {level}")]
    NotClusterPreserving { level: usize, world: String },
    #[error("stabilisation fails: last-level map sends {world} to {image}")]
    NotStabilising { world: String, image: String },
}

impl StoryError {
    /// The violated story condition, for condition failures.
    pub fn condition(&self) -> Option<StoryCondition> {
        match self {
            StoryError::NotMonotonic { .. } => Some(StoryCondition::Monotonic),
            StoryError::NotRootPreserving { .. } => Some(StoryCondition::RootPreserving),
            StoryError::NotAlmostInjective { .. } => Some(StoryCondition::AlmostInjective),
            StoryError::NotClusterPreserving { .. } => Some(StoryCondition::ClusterPreserving),
            StoryError::NotStabilising { .. } => Some(StoryCondition::Stabilising),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMoment {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub rel: Vec<(String, String)>,
    pub root: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<IndexMap<String, Vec<String>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawStory {
    pub levels: Vec<RawMoment>,
    #[serde(default)]
    pub maps: Vec<IndexMap<String, String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    Reflexive,
    Irreflexive,
}

/// A finite rooted tree-like transitive frame with a valuation. The frame's
/// transition function is the identity and carries no meaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Moment {
    frame: Frame,
    root: usize,
    valuation: Valuation,
}

fn first_tree_violation(frame: &Frame) -> Option<(usize, usize, usize)> {
    for c in frame.worlds() {
        let below: Vec<usize> = frame.worlds().filter(|&a| frame.sees_or_eq(a, c)).collect();
        for (i, &a) in below.iter().enumerate() {
            for &b in &below[i + 1..] {
                if !frame.sees_or_eq(a, b) && !frame.sees_or_eq(b, a) {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

impl Moment {
    pub fn new(frame: Frame, root: usize, valuation: Valuation) -> Result<Moment, MomentError> {
        if let Some(w) = frame.worlds().find(|&w| !frame.sees_or_eq(root, w)) {
            return Err(MomentError::NotRooted(frame.name(w).to_string()));
        }
        if let Some((a, b, c)) = first_tree_violation(&frame) {
            return Err(MomentError::NotTreeLike {
                a: frame.name(a).into(),
                b: frame.name(b).into(),
                c: frame.name(c).into(),
            });
        }
        let identity: Vec<usize> = frame.worlds().collect();
        let frame = if frame.func() == identity.as_slice() {
            frame
        } else {
            Frame::from_indices(frame.names().to_vec(), &frame.pairs(), identity, false)?
        };
        Ok(Moment { frame, root, valuation })
    }

    pub fn from_raw(raw: &RawMoment, close_transitively: bool) -> Result<Moment, MomentError> {
        let identity: Vec<usize> = (0..raw.worlds.len()).collect();
        let index = index_names(&raw.worlds)?;
        let mut pairs = Vec::with_capacity(raw.rel.len());
        for (a, b) in &raw.rel {
            pairs.push((lookup(&index, a, "rel")?, lookup(&index, b, "rel")?));
        }
        let frame = Frame::from_indices(raw.worlds.clone(), &pairs, identity, close_transitively)?;
        let root = frame
            .world(&raw.root)
            .ok_or_else(|| MomentError::UnknownRoot(raw.root.clone()))?;
        let valuation = match &raw.valuation {
            Some(v) => parse_valuation(&frame, v)?,
            None => Valuation::new(),
        };
        Moment::new(frame, root, valuation)
    }

    pub fn to_raw(&self) -> RawMoment {
        let raw = self.frame.to_raw();
        RawMoment {
            worlds: raw.worlds,
            rel: raw.rel,
            root: self.frame.name(self.root).to_string(),
            valuation: (!self.valuation.is_empty()).then(|| valuation_names(&self.frame, &self.valuation)),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn len(&self) -> usize {
        self.frame.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frame.is_empty()
    }

    pub fn is_serial(&self) -> bool {
        self.frame.is_serial()
    }

    /// Number of clusters on a longest strictly ascending chain.
    pub fn height(&self) -> usize {
        let mut memo = vec![0usize; self.len()];
        // process worlds with the fewest successors first: every strict
        // successor of w has strictly fewer successors than w
        let mut order: Vec<usize> = self.frame.worlds().collect();
        order.sort_by_key(|&w| self.frame.successors(w).len());
        for w in order {
            let cluster = self.frame.cluster_of(w);
            memo[w] = 1 + self
                .frame
                .successors(w)
                .iter()
                .filter(|v| !cluster.contains(*v))
                .map(|v| memo[v])
                .max()
                .unwrap_or(0);
        }
        memo[self.root]
    }

    /// Level-wise reflexive duplication; the root becomes copy 0 of the root.
    fn duplicated(&self) -> (Moment, Vec<usize>) {
        let (frame, projection) = self.frame.duplicate_reflexive();
        let root = projection.iter().position(|&w| w == self.root).expect("root has a copy");
        let valuation = lift_valuation(&self.valuation, &projection, frame.len());
        (
            Moment::new(frame, root, valuation).expect("duplication preserves moments"),
            projection,
        )
    }
}

pub(crate) fn lift_valuation(valuation: &Valuation, projection: &[usize], n: usize) -> Valuation {
    valuation
        .iter()
        .map(|(var, set)| {
            let lifted = WorldSet::from_worlds(n, (0..n).filter(|&x| set.contains(projection[x])));
            (var.clone(), lifted)
        })
        .collect()
}

/// Builds the moment with root cluster `cluster ∋ root` of the given kind
/// placed below every world of `submoments`.
pub fn compose_moment(
    root: &str,
    cluster: &[String],
    kind: ClusterKind,
    submoments: &[Moment],
    cluster_valuation: &IndexMap<String, Vec<String>>,
) -> Result<Moment, MomentError> {
    if !cluster.iter().any(|c| c == root) {
        return Err(MomentError::RootOutsideCluster(root.to_string()));
    }
    if kind == ClusterKind::Irreflexive && cluster.len() != 1 {
        return Err(MomentError::IrreflexiveCluster(cluster.len()));
    }
    let mut names: Vec<String> = cluster.to_vec();
    let k = cluster.len();
    let mut pairs = Vec::new();
    if kind == ClusterKind::Reflexive {
        for a in 0..k {
            for b in 0..k {
                pairs.push((a, b));
            }
        }
    }
    let mut offset = k;
    for sub in submoments {
        names.extend(sub.frame.names().iter().cloned());
        for a in 0..k {
            for v in 0..sub.len() {
                pairs.push((a, offset + v));
            }
        }
        pairs.extend(sub.frame.pairs().into_iter().map(|(a, b)| (offset + a, offset + b)));
        offset += sub.len();
    }
    let n = names.len();
    let frame = Frame::from_indices(names, &pairs, (0..n).collect(), false)?;
    let mut valuation = parse_valuation(&frame, cluster_valuation)?;
    let mut offset = k;
    for sub in submoments {
        for (var, set) in &sub.valuation {
            let entry = valuation.entry(var.clone()).or_insert_with(|| WorldSet::empty(n));
            for w in set {
                entry.insert(offset + w);
            }
        }
        offset += sub.len();
    }
    let root = frame.world(root).expect("root is in the cluster");
    Moment::new(frame, root, valuation)
}

/// A validated story of duration `levels.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Story {
    levels: Vec<Moment>,
    maps: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    frame: Frame,
    valuation: Valuation,
    immersive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoryClass {
    pub k4c: bool,
    pub k4dc: bool,
    pub k4i: bool,
    pub k4di: bool,
}

impl Story {
    /// Checks the story conditions on level-local maps; `maps` holds one map
    /// per level transition, optionally followed by the last level's self-map.
    pub fn from_parts(levels: Vec<Moment>, mut maps: Vec<Vec<usize>>) -> Result<Story, StoryError> {
        if levels.is_empty() {
            return Err(StoryError::NoLevels);
        }
        let duration = levels.len() - 1;
        if maps.len() != duration && maps.len() != duration + 1 {
            return Err(StoryError::MapCount {
                expected: duration,
                found: maps.len(),
            });
        }
        let mut seen = HashMap::new();
        for m in &levels {
            for name in m.frame.names() {
                if seen.insert(name.clone(), ()).is_some() {
                    return Err(StoryError::DuplicateWorld(name.clone()));
                }
            }
        }
        for (i, map) in maps.iter().enumerate() {
            let target = levels.get(i + 1).unwrap_or(&levels[duration]);
            if map.len() != levels[i].len() || map.iter().any(|&t| t >= target.len()) {
                return Err(StoryError::MapNotTotal {
                    level: i,
                    world: levels[i].frame.name(map.len().min(levels[i].len() - 1)).to_string(),
                });
            }
        }

        let transitions = &maps[..duration];
        for (i, f) in transitions.iter().enumerate() {
            let (src, dst) = (&levels[i].frame, &levels[i + 1].frame);
            for x in src.worlds() {
                for y in src.successors(x) {
                    if !dst.sees_or_eq(f[x], f[y]) {
                        return Err(StoryError::NotMonotonic {
                            level: i,
                            x: src.name(x).into(),
                            y: src.name(y).into(),
                        });
                    }
                }
            }
        }
        for (i, f) in transitions.iter().enumerate() {
            let root = levels[i].root;
            if f[root] != levels[i + 1].root {
                return Err(StoryError::NotRootPreserving {
                    level: i,
                    root: levels[i].frame.name(root).into(),
                    image: levels[i + 1].frame.name(f[root]).into(),
                });
            }
        }
        for (i, f) in transitions.iter().enumerate() {
            let (src, dst) = (&levels[i].frame, &levels[i + 1].frame);
            for x in src.worlds() {
                for y in (x + 1)..src.len() {
                    if f[x] == f[y] && dst.is_reflexive(f[x]) {
                        return Err(StoryError::NotAlmostInjective {
                            level: i,
                            x: src.name(x).into(),
                            y: src.name(y).into(),
                            image: dst.name(f[x]).into(),
                        });
                    }
                }
            }
        }
        for (i, f) in transitions.iter().enumerate() {
            let (src, dst) = (&levels[i].frame, &levels[i + 1].frame);
            for x in src.worlds() {
                let image = WorldSet::from_worlds(dst.len(), src.cluster_of(x).iter().map(|v| f[v]));
                if dst.cluster_of(f[x]) != image {
                    return Err(StoryError::NotClusterPreserving {
                        level: i,
                        world: src.name(x).into(),
                    });
                }
            }
        }
        if maps.len() == duration + 1 {
            let last = maps.pop().expect("length checked");
            if let Some(w) = (0..last.len()).find(|&w| last[w] != w) {
                let frame = &levels[duration].frame;
                return Err(StoryError::NotStabilising {
                    world: frame.name(w).into(),
                    image: frame.name(last[w]).into(),
                });
            }
        }

        let immersive = maps.iter().enumerate().all(|(i, f)| {
            let (src, dst) = (&levels[i].frame, &levels[i + 1].frame);
            let mut hit = WorldSet::empty(dst.len());
            for &t in f {
                if hit.contains(t) {
                    return false;
                }
                hit.insert(t);
            }
            src.worlds().all(|x| src.successors(x).iter().all(|y| dst.sees(f[x], f[y])))
        });

        let mut offsets = Vec::with_capacity(levels.len());
        let mut names = Vec::new();
        let mut pairs = Vec::new();
        let mut func = Vec::new();
        for (i, m) in levels.iter().enumerate() {
            let off = names.len();
            offsets.push(off);
            names.extend(m.frame.names().iter().cloned());
            pairs.extend(m.frame.pairs().into_iter().map(|(a, b)| (off + a, off + b)));
            let next_off = off + m.len();
            match maps.get(i) {
                Some(f) => func.extend(f.iter().map(|&t| next_off + t)),
                None => func.extend(off..next_off),
            }
        }
        let n = names.len();
        let frame = Frame::from_indices(names, &pairs, func, false).map_err(|e| StoryError::Map { level: 0, source: e })?;
        let mut valuation = Valuation::new();
        for (m, &off) in levels.iter().zip(&offsets) {
            for (var, set) in &m.valuation {
                let entry = valuation.entry(var.clone()).or_insert_with(|| WorldSet::empty(n));
                for w in set {
                    entry.insert(off + w);
                }
            }
        }
        Ok(Story {
            levels,
            maps,
            offsets,
            frame,
            valuation,
            immersive,
        })
    }

    pub fn from_raw(raw: &RawStory, close_transitively: bool) -> Result<Story, StoryError> {
        let levels = raw
            .levels
            .iter()
            .enumerate()
            .map(|(level, m)| Moment::from_raw(m, close_transitively).map_err(|source| StoryError::Moment { level, source }))
            .collect::<Result<Vec<_>, _>>()?;
        if levels.is_empty() {
            return Err(StoryError::NoLevels);
        }
        let duration = levels.len() - 1;
        let mut maps = Vec::with_capacity(raw.maps.len());
        for (i, named) in raw.maps.iter().enumerate() {
            let src = &levels[i.min(duration)].frame;
            let dst = &levels[(i + 1).min(duration)].frame;
            let mut map = vec![usize::MAX; src.len()];
            for (from, to) in named {
                let x = src.world(from).ok_or_else(|| StoryError::Map {
                    level: i,
                    source: FrameError::UnknownWorld {
                        world: from.clone(),
                        context: format!("map {i} domain"),
                    },
                })?;
                let y = dst.world(to).ok_or_else(|| StoryError::Map {
                    level: i,
                    source: FrameError::UnknownWorld {
                        world: to.clone(),
                        context: format!("map {i} codomain"),
                    },
                })?;
                map[x] = y;
            }
            if let Some(w) = map.iter().position(|&t| t == usize::MAX) {
                return Err(StoryError::MapNotTotal {
                    level: i,
                    world: src.name(w).into(),
                });
            }
            maps.push(map);
        }
        if raw.maps.len() > levels.len() {
            return Err(StoryError::MapCount {
                expected: duration,
                found: raw.maps.len(),
            });
        }
        Story::from_parts(levels, maps)
    }

    pub fn to_raw(&self) -> RawStory {
        RawStory {
            levels: self.levels.iter().map(Moment::to_raw).collect(),
            maps: self
                .maps
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let (src, dst) = (&self.levels[i].frame, &self.levels[i + 1].frame);
                    src.worlds().map(|x| (src.name(x).to_string(), dst.name(f[x]).to_string())).collect()
                })
                .collect(),
        }
    }

    /// A duration-0 story over one moment.
    pub fn single_level(moment: Moment) -> Story {
        Story::from_parts(vec![moment], vec![]).expect("a single moment is a story")
    }

    pub fn duration(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn levels(&self) -> &[Moment] {
        &self.levels
    }

    /// Level-local transition maps `f_i`, `i < duration`.
    pub fn maps(&self) -> &[Vec<usize>] {
        &self.maps
    }

    /// The assembled frame: disjoint union of the levels with `f` as transition.
    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn valuation(&self) -> &Valuation {
        &self.valuation
    }

    pub fn offset(&self, level: usize) -> usize {
        self.offsets[level]
    }

    /// Level and level-local index of an assembled-frame world.
    pub fn locate(&self, world: usize) -> (usize, usize) {
        let level = self.offsets.partition_point(|&o| o <= world) - 1;
        (level, world - self.offsets[level])
    }

    pub fn is_immersive(&self) -> bool {
        self.immersive
    }

    pub fn class(&self) -> StoryClass {
        let serial = self.levels.iter().all(Moment::is_serial);
        StoryClass {
            k4c: true,
            k4dc: serial,
            k4i: self.immersive,
            k4di: self.immersive && serial,
        }
    }

    /// Level-wise reflexive duplication with `f⊕(w,i) = (f(w),i)`, falling
    /// back to copy 0 when `f(w)` is irreflexive.
    pub fn duplicate_reflexive(&self) -> Story {
        self.duplicate_reflexive_with_projection().0
    }

    /// As [`Story::duplicate_reflexive`], with the projection of the lifted
    /// assembled frame onto this story's assembled frame.
    pub fn duplicate_reflexive_with_projection(&self) -> (Story, Vec<usize>) {
        let lifted: Vec<(Moment, Vec<usize>)> = self.levels.iter().map(Moment::duplicated).collect();
        let copy_index = |proj: &[usize], x: usize| usize::from(x > 0 && proj[x - 1] == proj[x]);
        let mut maps = Vec::with_capacity(self.maps.len());
        for (i, f) in self.maps.iter().enumerate() {
            let proj = &lifted[i].1;
            let dst_proj = &lifted[i + 1].1;
            let map = (0..proj.len())
                .map(|x| {
                    let target = f[proj[x]];
                    let first = dst_proj.iter().position(|&y| y == target).expect("every world has a copy");
                    let wanted = first + copy_index(proj, x);
                    if dst_proj.get(wanted) == Some(&target) {
                        wanted
                    } else {
                        first
                    }
                })
                .collect();
            maps.push(map);
        }
        let projection = lifted
            .iter()
            .enumerate()
            .flat_map(|(i, (_, proj))| proj.iter().map(move |&w| self.offsets[i] + w))
            .collect();
        let levels = lifted.into_iter().map(|(m, _)| m).collect();
        let story = Story::from_parts(levels, maps).expect("reflexive duplication preserves the story conditions");
        (story, projection)
    }
}
