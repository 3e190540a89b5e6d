//! Finite dynamic Kripke frames `⟨W, ⊏, g⟩` with a transitive relation.
//!
//! `⊏` is stored explicitly, reflexive loops included; `⊑` is always
//! computed as its reflexive closure.

use std::collections::HashMap;

use indexmap::IndexMap;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::worldset::WorldSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame has no worlds")]
    Empty,
    #[error("duplicate world name {0:?}")]
    DuplicateWorld(String),
    #[error("unknown world {world:?} referenced in {context}")]
    UnknownWorld { world: String, context: String },
    #[error("transition function is not total: no image for {0:?}")]
    NonTotalFunction(String),
    #[error("relation is not transitive: ({a}, {b}) and ({b}, {c}) present but ({a}, {c}) missing")]
    NotTransitive { a: String, b: String, c: String },
}

/// Frame description as read from and written to frame files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawFrame {
    pub worlds: Vec<String>,
    #[serde(default)]
    pub rel: Vec<(String, String)>,
    pub func: IndexMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub valuation: Option<IndexMap<String, Vec<String>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFlags {
    pub transitive: bool,
    pub serial: bool,
    pub monotonic: bool,
    pub strictly_monotonic: bool,
}

impl ClassFlags {
    /// Every property required by `class` holds here.
    pub fn satisfies(&self, class: &ClassFlags) -> bool {
        (self.transitive || !class.transitive)
            && (self.serial || !class.serial)
            && (self.monotonic || !class.monotonic)
            && (self.strictly_monotonic || !class.strictly_monotonic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    names: Vec<String>,
    index: HashMap<String, usize>,
    succ: Vec<WorldSet>,
    func: Vec<usize>,
}

/// Index-level view used by the p-morphism checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PMorphismViolation {
    Forth { w: usize, v: usize },
    Back { w: usize, target: usize },
    Commute { w: usize },
}

/// Resolves world names against a declared list.
pub(crate) fn index_names(names: &[String]) -> Result<HashMap<String, usize>, FrameError> {
    let mut index = HashMap::with_capacity(names.len());
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i).is_some() {
            return Err(FrameError::DuplicateWorld(n.clone()));
        }
    }
    Ok(index)
}

pub(crate) fn lookup(index: &HashMap<String, usize>, name: &str, context: &str) -> Result<usize, FrameError> {
    index.get(name).copied().ok_or_else(|| FrameError::UnknownWorld {
        world: name.to_string(),
        context: context.to_string(),
    })
}

/// Successor rows from a list of edges.
pub(crate) fn rows_from_pairs(n: usize, pairs: &[(usize, usize)]) -> Vec<WorldSet> {
    let mut succ = vec![WorldSet::empty(n); n];
    for &(a, b) in pairs {
        succ[a].insert(b);
    }
    succ
}

/// Transitive closure of a successor-row relation.
///
/// Strongly connected components are visited sinks first, so each
/// component's reach is the union of its out-edges and the reach of the
/// components they enter.
pub fn transitive_closure(succ: &[WorldSet]) -> Vec<WorldSet> {
    let n = succ.len();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for (a, row) in succ.iter().enumerate() {
        for b in row {
            graph.add_edge(nodes[a], nodes[b], ());
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut component = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for m in members {
            component[m.index()] = c;
        }
    }
    let mut reach: Vec<WorldSet> = Vec::with_capacity(sccs.len());
    for (c, members) in sccs.iter().enumerate() {
        let mut r = WorldSet::empty(n);
        for m in members {
            for b in &succ[m.index()] {
                r.insert(b);
                let cb = component[b];
                if cb != c {
                    r.union_with(&reach[cb]);
                }
            }
        }
        // a cycle through the component reaches every member
        if members.len() > 1 {
            for m in members {
                r.insert(m.index());
            }
        }
        reach.push(r);
    }
    (0..n).map(|w| reach[component[w]].clone()).collect()
}

fn first_transitivity_violation(succ: &[WorldSet]) -> Option<(usize, usize, usize)> {
    for (a, row) in succ.iter().enumerate() {
        for b in row {
            if let Some(c) = succ[b].difference(row).first() {
                return Some((a, b, c));
            }
        }
    }
    None
}

impl Frame {
    /// Validates a frame description. With `close_transitively`, the relation
    /// is replaced by its transitive closure; otherwise a non-transitive
    /// relation is rejected.
    pub fn from_raw(raw: &RawFrame, close_transitively: bool) -> Result<Frame, FrameError> {
        if raw.worlds.is_empty() {
            return Err(FrameError::Empty);
        }
        let index = index_names(&raw.worlds)?;
        let mut pairs = Vec::with_capacity(raw.rel.len());
        for (a, b) in &raw.rel {
            pairs.push((lookup(&index, a, "rel")?, lookup(&index, b, "rel")?));
        }
        let mut func = vec![usize::MAX; raw.worlds.len()];
        for (from, to) in &raw.func {
            let f = lookup(&index, from, "func")?;
            func[f] = lookup(&index, to, "func")?;
        }
        if let Some(missing) = func.iter().position(|&t| t == usize::MAX) {
            return Err(FrameError::NonTotalFunction(raw.worlds[missing].clone()));
        }
        Frame::from_indices(raw.worlds.clone(), &pairs, func, close_transitively)
    }

    /// Builds a frame from index-level data.
    pub fn from_indices(
        names: Vec<String>,
        pairs: &[(usize, usize)],
        func: Vec<usize>,
        close_transitively: bool,
    ) -> Result<Frame, FrameError> {
        if names.is_empty() {
            return Err(FrameError::Empty);
        }
        let index = index_names(&names)?;
        let n = names.len();
        if func.len() != n {
            return Err(FrameError::NonTotalFunction(names[func.len().min(n - 1)].clone()));
        }
        if let Some(&bad) = func.iter().find(|&&t| t >= n) {
            return Err(FrameError::UnknownWorld {
                world: bad.to_string(),
                context: "func".into(),
            });
        }
        let mut succ = rows_from_pairs(n, pairs);
        if close_transitively {
            succ = transitive_closure(&succ);
        } else if let Some((a, b, c)) = first_transitivity_violation(&succ) {
            return Err(FrameError::NotTransitive {
                a: names[a].clone(),
                b: names[b].clone(),
                c: names[c].clone(),
            });
        }
        Ok(Frame { names, index, succ, func })
    }

    /// Builds a frame from rows already known to be transitive.
    pub(crate) fn from_rows_unchecked(names: Vec<String>, succ: Vec<WorldSet>, func: Vec<usize>) -> Frame {
        let index = index_names(&names).expect("names are unique");
        debug_assert!(first_transitivity_violation(&succ).is_none());
        Frame { names, index, succ, func }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, w: usize) -> &str {
        &self.names[w]
    }

    pub fn world(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn worlds(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }

    pub fn all(&self) -> WorldSet {
        WorldSet::full(self.len())
    }

    /// `⊏`-successors of `w`.
    pub fn successors(&self, w: usize) -> &WorldSet {
        &self.succ[w]
    }

    pub fn rows(&self) -> &[WorldSet] {
        &self.succ
    }

    /// `w ⊏ v`
    #[inline]
    pub fn sees(&self, w: usize, v: usize) -> bool {
        self.succ[w].contains(v)
    }

    /// `w ⊑ v`
    #[inline]
    pub fn sees_or_eq(&self, w: usize, v: usize) -> bool {
        w == v || self.succ[w].contains(v)
    }

    pub fn is_reflexive(&self, w: usize) -> bool {
        self.succ[w].contains(w)
    }

    #[inline]
    pub fn g(&self, w: usize) -> usize {
        self.func[w]
    }

    pub fn func(&self) -> &[usize] {
        &self.func
    }

    /// Relation pairs in canonical order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.worlds()
            .flat_map(|a| self.succ[a].iter().map(move |b| (a, b)))
            .collect()
    }

    /// Worlds with at least one `⊏`-successor in `set`.
    pub fn down(&self, set: &WorldSet) -> WorldSet {
        let mut out = WorldSet::empty(self.len());
        if set.is_empty() {
            return out;
        }
        for (w, row) in self.succ.iter().enumerate() {
            if row.intersects(set) {
                out.insert(w);
            }
        }
        out
    }

    /// `g⁻¹(set)`
    pub fn preimage(&self, set: &WorldSet) -> WorldSet {
        let mut out = WorldSet::empty(self.len());
        for (w, &t) in self.func.iter().enumerate() {
            if set.contains(t) {
                out.insert(w);
            }
        }
        out
    }

    /// Cluster of `w`: worlds `v` with `w ⊑ v` and `v ⊑ w`.
    pub fn cluster_of(&self, w: usize) -> WorldSet {
        let mut c = WorldSet::singleton(self.len(), w);
        for v in &self.succ[w] {
            if self.succ[v].contains(w) {
                c.insert(v);
            }
        }
        c
    }

    /// Partition of the worlds into clusters, ordered by least member.
    pub fn clusters(&self) -> Vec<WorldSet> {
        let mut seen = WorldSet::empty(self.len());
        let mut out = Vec::new();
        for w in self.worlds() {
            if !seen.contains(w) {
                let c = self.cluster_of(w);
                seen.union_with(&c);
                out.push(c);
            }
        }
        out
    }

    /// A cluster is reflexive when all (equivalently, any) of its points are.
    pub fn is_reflexive_cluster(&self, cluster: &WorldSet) -> bool {
        cluster.first().is_some_and(|w| self.is_reflexive(w))
    }

    pub fn is_serial(&self) -> bool {
        self.succ.iter().all(|row| !row.is_empty())
    }

    pub fn is_transitive(&self) -> bool {
        first_transitivity_violation(&self.succ).is_none()
    }

    pub fn is_monotonic(&self) -> bool {
        self.worlds().all(|w| {
            self.succ[w]
                .iter()
                .all(|v| self.sees_or_eq(self.func[w], self.func[v]))
        })
    }

    pub fn is_strictly_monotonic(&self) -> bool {
        self.worlds()
            .all(|w| self.succ[w].iter().all(|v| self.sees(self.func[w], self.func[v])))
    }

    /// Whether `g(w) = c` is compatible with `partial` (the values of `g` on
    /// worlds `0..w`) under (strict) monotonicity.
    pub(crate) fn extends_monotone(&self, partial: &[usize], w: usize, c: usize, strict: bool) -> bool {
        let related = |a: usize, b: usize| if strict { self.sees(a, b) } else { self.sees_or_eq(a, b) };
        (!self.sees(w, w) || related(c, c))
            && partial.iter().enumerate().all(|(u, &gu)| {
                (!self.sees(w, u) || related(c, gu)) && (!self.sees(u, w) || related(gu, c))
            })
    }

    pub fn classify(&self) -> ClassFlags {
        ClassFlags {
            transitive: self.is_transitive(),
            serial: self.is_serial(),
            monotonic: self.is_monotonic(),
            strictly_monotonic: self.is_strictly_monotonic(),
        }
    }

    /// Reflexive duplication `F⊕` and its projection onto `F`.
    ///
    /// Every reflexive world `w` gets copies `w#0`, `w#1`; irreflexive worlds
    /// keep a single copy `w#0`. `(w,i) ⊏ (v,j)` iff `w ⊏ v` and
    /// `g(w,i) = (g(w),i)`, falling back to copy 0 when `g(w)` has no copy `i`.
    pub fn duplicate_reflexive(&self) -> (Frame, Vec<usize>) {
        let mut names = Vec::new();
        let mut projection = Vec::new();
        let mut copies = vec![[usize::MAX; 2]; self.len()];
        for w in self.worlds() {
            let n_copies = if self.is_reflexive(w) { 2 } else { 1 };
            for (i, slot) in copies[w].iter_mut().enumerate().take(n_copies) {
                *slot = names.len();
                names.push(format!("{}#{i}", self.names[w]));
                projection.push(w);
            }
        }
        let n = names.len();
        let mut succ = vec![WorldSet::empty(n); n];
        for (x, &w) in projection.iter().enumerate() {
            for v in &self.succ[w] {
                for &c in copies[v].iter().filter(|&&c| c != usize::MAX) {
                    succ[x].insert(c);
                }
            }
        }
        let func = projection
            .iter()
            .enumerate()
            .map(|(x, &w)| {
                let i = if copies[w][1] == x { 1 } else { 0 };
                let target = copies[self.func[w]];
                if target[i] != usize::MAX {
                    target[i]
                } else {
                    target[0]
                }
            })
            .collect();
        (Frame::from_rows_unchecked(names, succ, func), projection)
    }

    /// Forth, back and commutation conditions for `map: self → target`.
    pub fn check_pmorphism(&self, target: &Frame, map: &[usize]) -> Result<(), PMorphismViolation> {
        for w in self.worlds() {
            for v in &self.succ[w] {
                if !target.sees(map[w], map[v]) {
                    return Err(PMorphismViolation::Forth { w, v });
                }
            }
            for u in target.successors(map[w]) {
                if !self.succ[w].iter().any(|v| map[v] == u) {
                    return Err(PMorphismViolation::Back { w, target: u });
                }
            }
            if map[self.func[w]] != target.g(map[w]) {
                return Err(PMorphismViolation::Commute { w });
            }
        }
        Ok(())
    }

    /// Frame with worlds reordered: new world `i` is old world `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Frame {
        let mut inverse = vec![0; self.len()];
        for (new, &old) in order.iter().enumerate() {
            inverse[old] = new;
        }
        let names = order.iter().map(|&o| self.names[o].clone()).collect();
        let pairs: Vec<_> = self.pairs().into_iter().map(|(a, b)| (inverse[a], inverse[b])).collect();
        let func = order.iter().map(|&o| inverse[self.func[o]]).collect();
        Frame::from_indices(names, &pairs, func, false).expect("permutation preserves validity")
    }

    pub fn set_names(&self, set: &WorldSet) -> Vec<String> {
        set.iter().map(|w| self.names[w].clone()).collect()
    }

    pub fn to_raw(&self) -> RawFrame {
        RawFrame {
            worlds: self.names.clone(),
            rel: self
                .pairs()
                .into_iter()
                .map(|(a, b)| (self.names[a].clone(), self.names[b].clone()))
                .collect(),
            func: self
                .worlds()
                .map(|w| (self.names[w].clone(), self.names[self.func[w]].clone()))
                .collect(),
            valuation: None,
        }
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    fn named(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// a ⊏ b, b ⊏ b, g ≡ b
    pub fn f1() -> Frame {
        Frame::from_indices(named(&["a", "b"]), &[(0, 1), (1, 1)], vec![1, 1], false).unwrap()
    }

    /// single irreflexive o
    pub fn f2() -> Frame {
        Frame::from_indices(named(&["o"]), &[], vec![0], false).unwrap()
    }

    /// reflexive cluster {q1, q2} and isolated irreflexive o, g ≡ o
    pub fn f3() -> Frame {
        Frame::from_indices(
            named(&["q1", "q2", "o"]),
            &[(0, 0), (0, 1), (1, 0), (1, 1)],
            vec![2, 2, 2],
            false,
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn raw(worlds: &[&str], rel: &[(&str, &str)], func: &[(&str, &str)]) -> RawFrame {
        RawFrame {
            worlds: worlds.iter().map(|s| s.to_string()).collect(),
            rel: rel.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            func: func.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect(),
            valuation: None,
        }
    }

    #[test]
    fn validates_f1() {
        let f = Frame::from_raw(&raw(&["a", "b"], &[("a", "b"), ("b", "b")], &[("a", "b"), ("b", "b")]), false)
            .unwrap();
        assert_eq!(f, f1());
    }

    #[test]
    fn rejects_or_closes_non_transitive() {
        let r = raw(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[("a", "a"), ("b", "b"), ("c", "c")]);
        let err = Frame::from_raw(&r, false).unwrap_err();
        assert_eq!(
            err,
            FrameError::NotTransitive {
                a: "a".into(),
                b: "b".into(),
                c: "c".into()
            }
        );
        let closed = Frame::from_raw(&r, true).unwrap();
        assert_eq!(closed.pairs(), vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn input_errors() {
        let unknown = raw(&["a"], &[("a", "z")], &[("a", "a")]);
        assert!(matches!(Frame::from_raw(&unknown, false), Err(FrameError::UnknownWorld { .. })));
        let partial = raw(&["a", "b"], &[], &[("a", "a")]);
        assert_eq!(
            Frame::from_raw(&partial, false).unwrap_err(),
            FrameError::NonTotalFunction("b".into())
        );
        let dup = raw(&["a", "a"], &[], &[("a", "a")]);
        assert_eq!(Frame::from_raw(&dup, false).unwrap_err(), FrameError::DuplicateWorld("a".into()));
        assert_eq!(Frame::from_raw(&raw(&[], &[], &[]), false).unwrap_err(), FrameError::Empty);
    }

    #[test]
    fn down_examples() {
        let f = f1();
        assert!(f.down(&WorldSet::empty(2)).is_empty());
        assert_eq!(f.down(&WorldSet::singleton(2, 1)), WorldSet::from_worlds(2, [0, 1]));
        assert!(f.down(&WorldSet::singleton(2, 0)).is_empty());
    }

    #[test]
    fn cluster_examples() {
        assert_eq!(f1().clusters(), vec![WorldSet::singleton(2, 0), WorldSet::singleton(2, 1)]);
        assert_eq!(
            f3().clusters(),
            vec![WorldSet::from_worlds(3, [0, 1]), WorldSet::singleton(3, 2)]
        );
        assert_eq!(f2().clusters(), vec![WorldSet::singleton(1, 0)]);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            f1().classify(),
            ClassFlags {
                transitive: true,
                serial: true,
                monotonic: true,
                strictly_monotonic: true
            }
        );
        let c3 = f3().classify();
        assert!(c3.monotonic && !c3.strictly_monotonic);
        assert!(!f2().classify().serial);
    }

    #[test]
    fn duplicate_f1() {
        let (dup, proj) = f1().duplicate_reflexive();
        assert_eq!(dup.names(), &["a#0", "b#0", "b#1"]);
        assert_eq!(proj, vec![0, 1, 1]);
        assert_eq!(dup.pairs(), vec![(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2)]);
        assert_eq!(dup.g(0), 1);
        assert_eq!(dup.g(2), 2);
        assert_eq!(dup.check_pmorphism(&f1(), &proj), Ok(()));
    }

    #[test]
    fn duplicate_without_reflexive_points_is_isomorphic() {
        let (dup, proj) = f2().duplicate_reflexive();
        assert_eq!(dup.len(), 1);
        assert!(dup.pairs().is_empty());
        assert_eq!(proj, vec![0]);
    }

    #[test]
    fn duplicate_falls_back_to_single_copy() {
        // g maps the reflexive cluster onto the irreflexive o
        let (dup, proj) = f3().duplicate_reflexive();
        assert_eq!(dup.len(), 5);
        assert!(dup.worlds().all(|w| dup.g(w) == 4));
        assert_eq!(dup.check_pmorphism(&f3(), &proj), Ok(()));
    }

    #[test]
    fn pmorphism_violations_detected() {
        let f = f1();
        assert!(matches!(f.check_pmorphism(&f2(), &[0, 0]), Err(PMorphismViolation::Forth { .. })));
        // o has no successor while its image b sees itself
        assert_eq!(
            f2().check_pmorphism(&f, &[1]),
            Err(PMorphismViolation::Back { w: 0, target: 1 })
        );
        let names = vec!["x".to_string(), "y".to_string()];
        let swap = Frame::from_indices(names.clone(), &[], vec![1, 0], false).unwrap();
        let still = Frame::from_indices(names, &[], vec![0, 1], false).unwrap();
        assert_eq!(
            swap.check_pmorphism(&still, &[0, 1]),
            Err(PMorphismViolation::Commute { w: 0 })
        );
        assert_eq!(f.check_pmorphism(&f, &[0, 1]), Ok(()));
    }
}
