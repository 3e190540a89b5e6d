//! Seeded generators for frames, formulas, valuations and stories.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::formula::{Formula, TangleArgs};
use crate::frame::{rows_from_pairs, transitive_closure, ClassFlags, Frame};
use crate::semantics::Valuation;
use crate::story::{Moment, Story};
use crate::worldset::WorldSet;

fn world_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("w{i}")).collect()
}

/// Transitive closure of a random relation with edge probability `p`.
pub fn random_relation<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<WorldSet> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .filter(|_| rng.gen_bool(p))
        .collect();
    transitive_closure(&rows_from_pairs(n, &pairs))
}

/// A (strictly) monotone function on `frame`, found by randomized
/// backtracking. The identity is always a solution, so this never fails.
pub fn random_monotone_function<R: Rng>(rng: &mut R, frame: &Frame, strict: bool) -> Vec<usize> {
    fn go<R: Rng>(rng: &mut R, frame: &Frame, strict: bool, partial: &mut Vec<usize>) -> bool {
        let w = partial.len();
        if w == frame.len() {
            return true;
        }
        let mut candidates: Vec<usize> = frame.worlds().collect();
        candidates.shuffle(rng);
        for c in candidates {
            if frame.extends_monotone(partial, w, c, strict) {
                partial.push(c);
                if go(rng, frame, strict, partial) {
                    return true;
                }
                partial.pop();
            }
        }
        false
    }
    let mut partial = Vec::with_capacity(frame.len());
    assert!(go(rng, frame, strict, &mut partial), "identity is always monotone");
    partial
}

/// A random frame on `n` worlds satisfying `class`, or `None` when the
/// sampled relation cannot carry it (only seriality can fail).
pub fn random_frame<R: Rng>(rng: &mut R, n: usize, p: f64, class: &ClassFlags) -> Option<Frame> {
    let rows = random_relation(rng, n, p);
    let bare = Frame::from_rows_unchecked(world_names(n), rows, (0..n).collect());
    if class.serial && !bare.is_serial() {
        return None;
    }
    let func = if class.strictly_monotonic || class.monotonic {
        random_monotone_function(rng, &bare, class.strictly_monotonic)
    } else {
        (0..n).map(|_| rng.gen_range(0..n)).collect()
    };
    Some(Frame::from_rows_unchecked(world_names(n), bare.rows().to_vec(), func))
}

/// Rejection-samples a frame of `class` with between 1 and `max_worlds` worlds.
pub fn random_frame_in_class<R: Rng>(rng: &mut R, max_worlds: usize, class: &ClassFlags) -> Frame {
    loop {
        let n = rng.gen_range(1..=max_worlds);
        let p = rng.gen_range(0.1..0.7);
        if let Some(f) = random_frame(rng, n, p, class) {
            return f;
        }
    }
}

/// A large tree-like transitive frame for benchmarking: clusters of one to
/// three worlds hang below a uniformly chosen earlier cluster, and `g` is an
/// arbitrary function.
pub fn random_tree_frame<R: Rng>(rng: &mut R, n: usize) -> Frame {
    let mut cluster_of = Vec::with_capacity(n);
    let mut parent: Vec<Option<usize>> = Vec::new();
    let mut reflexive = Vec::new();
    while cluster_of.len() < n {
        let c = parent.len();
        parent.push((c > 0).then(|| rng.gen_range(0..c)));
        let size = rng.gen_range(1..=3).min(n - cluster_of.len());
        reflexive.push(size > 1 || rng.gen_bool(0.5));
        cluster_of.extend(std::iter::repeat(c).take(size));
    }
    let clusters = parent.len();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); clusters];
    for (w, &c) in cluster_of.iter().enumerate() {
        members[c].push(w);
    }
    // descendants, children after parents so fill bottom-up
    let mut below: Vec<WorldSet> = vec![WorldSet::empty(n); clusters];
    for c in (0..clusters).rev() {
        if reflexive[c] {
            for &w in &members[c] {
                below[c].insert(w);
            }
        }
        if let Some(p) = parent[c] {
            let mut add = below[c].clone();
            for &w in &members[c] {
                add.insert(w);
            }
            below[p].union_with(&add);
        }
    }
    let rows = cluster_of.iter().map(|&c| below[c].clone()).collect();
    let func = (0..n).map(|_| rng.gen_range(0..n)).collect();
    Frame::from_rows_unchecked(world_names(n), rows, func)
}

/// Random valuation assigning each variable an independent random set.
pub fn random_valuation<R: Rng>(rng: &mut R, n: usize, vars: &[&str]) -> Valuation {
    vars.iter()
        .map(|v| (v.to_string(), WorldSet::from_worlds(n, (0..n).filter(|_| rng.gen_bool(0.5)))))
        .collect()
}

/// Random formula over `vars` with at most `depth` nested connectives.
/// Tangles take one or two arguments.
pub fn random_formula<R: Rng>(rng: &mut R, vars: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return Formula::var(*vars.choose(rng).expect("at least one variable"));
    }
    let d = depth - 1;
    match rng.gen_range(0..9) {
        0 => Formula::neg(random_formula(rng, vars, d)),
        1 => Formula::and(random_formula(rng, vars, d), random_formula(rng, vars, d)),
        2 => Formula::or(random_formula(rng, vars, d), random_formula(rng, vars, d)),
        3 => Formula::implies(random_formula(rng, vars, d), random_formula(rng, vars, d)),
        4 => Formula::diamond(random_formula(rng, vars, d)),
        5 => Formula::boxed(random_formula(rng, vars, d)),
        6 => Formula::next(random_formula(rng, vars, d)),
        _ => {
            let k = rng.gen_range(1..=2);
            Formula::Tangle(random_tangle_args(rng, vars, d, k))
        }
    }
}

pub fn random_tangle_args<R: Rng>(rng: &mut R, vars: &[&str], depth: usize, k: usize) -> TangleArgs {
    TangleArgs::new((0..k).map(|_| random_formula(rng, vars, depth))).expect("k ≥ 1")
}

/// Shape parameters for [`random_story`].
#[derive(Debug, Clone, Copy)]
pub struct StoryShape {
    pub max_levels: usize,
    pub max_clusters: usize,
    /// Every leaf cluster reflexive.
    pub serial: bool,
    /// Only injective, strictly monotone maps.
    pub immersive: bool,
}

#[derive(Debug, Clone)]
struct Cluster {
    parent: Option<usize>,
    reflexive: bool,
    size: usize,
}

struct Level {
    clusters: Vec<Cluster>,
    first: Vec<usize>,
    len: usize,
}

impl Level {
    fn new(clusters: Vec<Cluster>) -> Level {
        let mut first = Vec::with_capacity(clusters.len());
        let mut len = 0;
        for c in &clusters {
            first.push(len);
            len += c.size;
        }
        Level { clusters, first, len }
    }

    fn has_children(&self, c: usize) -> bool {
        self.clusters.iter().any(|d| d.parent == Some(c))
    }

    fn moment(&self, level: usize, rng: &mut impl Rng) -> Moment {
        let n = self.len;
        let mut names = Vec::with_capacity(n);
        for (c, cl) in self.clusters.iter().enumerate() {
            for k in 0..cl.size {
                names.push(format!("s{level}c{c}w{k}"));
            }
        }
        let mut pairs = Vec::new();
        for (c, cl) in self.clusters.iter().enumerate() {
            let worlds = self.first[c]..self.first[c] + cl.size;
            if cl.reflexive {
                for a in worlds.clone() {
                    for b in worlds.clone() {
                        pairs.push((a, b));
                    }
                }
            }
            let mut anc = cl.parent;
            while let Some(p) = anc {
                for a in self.first[p]..self.first[p] + self.clusters[p].size {
                    for b in worlds.clone() {
                        pairs.push((a, b));
                    }
                }
                anc = self.clusters[p].parent;
            }
        }
        let frame = Frame::from_indices(names, &pairs, (0..n).collect(), false).expect("tree order is transitive");
        let valuation = random_valuation(rng, n, &["p", "q"]);
        Moment::new(frame, 0, valuation).expect("cluster trees are rooted and tree-like")
    }
}

fn random_cluster<R: Rng>(rng: &mut R, parent: Option<usize>) -> Cluster {
    let reflexive = rng.gen_bool(0.5);
    Cluster {
        parent,
        reflexive,
        size: if reflexive { rng.gen_range(1..=2) } else { 1 },
    }
}

fn force_serial(clusters: &mut [Cluster]) {
    for c in 0..clusters.len() {
        let leaf = !clusters.iter().any(|d| d.parent == Some(c));
        if leaf && !clusters[c].reflexive {
            clusters[c].reflexive = true;
        }
    }
}

/// A random valid story. Each level is a cluster tree; each transition keeps
/// clusters, collapses inner clusters to irreflexive points (merging
/// collapsed siblings), and adds fresh clusters. With probability one half
/// the last level's identity self-map is included.
pub fn random_story<R: Rng>(rng: &mut R, shape: &StoryShape) -> Story {
    let mut clusters = vec![random_cluster(rng, None)];
    let count = rng.gen_range(1..=shape.max_clusters);
    for c in 1..count {
        let parent = rng.gen_range(0..c);
        clusters.push(random_cluster(rng, Some(parent)));
    }
    if shape.serial {
        force_serial(&mut clusters);
    }
    let mut levels = vec![Level::new(clusters)];
    let mut maps = Vec::new();
    let duration = rng.gen_range(0..shape.max_levels.max(1));
    for _ in 0..duration {
        let old = levels.last().expect("nonempty");
        let mut next: Vec<Cluster> = Vec::new();
        let mut image = vec![0usize; old.clusters.len()];
        let mut collapsed_into: Vec<Option<usize>> = vec![None; old.clusters.len()];
        for (c, cl) in old.clusters.iter().enumerate() {
            let parent = cl.parent.map(|p| image[p]);
            let collapsible = !shape.immersive && c > 0 && (!shape.serial || old.has_children(c));
            if collapsible && rng.gen_bool(0.3) {
                // merge with an earlier collapsed sibling
                let sibling = (0..c).find(|&d| old.clusters[d].parent == cl.parent && collapsed_into[d].is_some());
                if let Some(d) = sibling.filter(|_| rng.gen_bool(0.5)) {
                    image[c] = collapsed_into[d].expect("collapsed");
                } else {
                    image[c] = next.len();
                    next.push(Cluster {
                        parent,
                        reflexive: false,
                        size: 1,
                    });
                }
                collapsed_into[c] = Some(image[c]);
            } else {
                image[c] = next.len();
                next.push(Cluster { parent, ..cl.clone() });
            }
        }
        let kept = next.len();
        for _ in 0..rng.gen_range(0..=2) {
            if next.len() >= shape.max_clusters + 2 {
                break;
            }
            let parent = rng.gen_range(0..next.len());
            next.push(random_cluster(rng, Some(parent)));
        }
        if shape.serial {
            // only fresh clusters may be adjusted; kept leaves are already reflexive
            let mut tail = next.split_off(kept);
            let all: Vec<Cluster> = next.iter().chain(&tail).cloned().collect();
            for (i, cl) in tail.iter_mut().enumerate() {
                let idx = kept + i;
                if !all.iter().any(|d| d.parent == Some(idx)) {
                    cl.reflexive = true;
                }
            }
            next.extend(tail);
        }
        let new = Level::new(next);
        let mut map = vec![0usize; old.len];
        for (c, cl) in old.clusters.iter().enumerate() {
            let target = image[c];
            for k in 0..cl.size {
                let offset = if new.clusters[target].size == cl.size { k } else { 0 };
                map[old.first[c] + k] = new.first[target] + offset;
            }
        }
        maps.push(map);
        levels.push(new);
    }
    if rng.gen_bool(0.5) {
        maps.push((0..levels.last().expect("nonempty").len).collect());
    }
    let moments = levels.iter().enumerate().map(|(i, l)| l.moment(i, rng)).collect();
    Story::from_parts(moments, maps).expect("generated stories satisfy the story conditions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn frames_respect_requested_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let classes = [
            ClassFlags { transitive: true, serial: false, monotonic: true, strictly_monotonic: false },
            ClassFlags { transitive: true, serial: true, monotonic: true, strictly_monotonic: true },
        ];
        for class in &classes {
            for _ in 0..200 {
                let f = random_frame_in_class(&mut rng, 5, class);
                assert!(f.classify().satisfies(class));
            }
        }
    }

    #[test]
    fn tree_frames_are_transitive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [1, 2, 7, 40] {
            let f = random_tree_frame(&mut rng, n);
            assert_eq!(f.len(), n);
            assert!(f.is_transitive());
        }
    }

    #[test]
    fn stories_validate_in_requested_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (serial, immersive) in [(false, false), (true, false), (false, true), (true, true)] {
            let shape = StoryShape {
                max_levels: 4,
                max_clusters: 4,
                serial,
                immersive,
            };
            for _ in 0..100 {
                let s = random_story(&mut rng, &shape);
                let class = s.class();
                assert!(class.k4c);
                if serial {
                    assert!(class.k4dc);
                }
                if immersive {
                    assert!(class.k4i, "{:?}", s.to_raw());
                }
            }
        }
    }
}
