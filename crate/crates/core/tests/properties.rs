use indexmap::IndexMap;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tanglecheck_core::formula::{closure_of, parse, subformula_closure, Formula, TangleArgs};
use tanglecheck_core::frame::{ClassFlags, Frame};
use tanglecheck_core::logic::{AxiomSchema, Slot};
use tanglecheck_core::pathspace::{enumerate_paths, next_path, path_metric};
use tanglecheck_core::random::{random_frame_in_class, random_story, random_valuation, StoryShape};
use tanglecheck_core::semantics::{
    tangled_derivative, tangled_derivative_counted, tangled_oracle_clusters, tangled_oracle_subsets, truth_set,
    valid_on_frame, Model, ValidityMode,
};
use tanglecheck_core::story::{compose_moment, ClusterKind, Moment};
use tanglecheck_core::worldset::WorldSet;

const ANY: ClassFlags = ClassFlags {
    transitive: true,
    serial: false,
    monotonic: false,
    strictly_monotonic: false,
};

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["p", "q", "r"]).prop_map(Formula::var),
        Just(Formula::top()),
        Just(Formula::bot()),
    ];
    leaf.prop_recursive(4, 32, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::neg),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            inner.clone().prop_map(Formula::diamond),
            inner.clone().prop_map(Formula::boxed),
            inner.clone().prop_map(Formula::next),
            prop::collection::vec(inner, 1..3).prop_map(|v| Formula::tangle(v).unwrap()),
        ]
    })
}

fn frame(max_worlds: usize, class: ClassFlags) -> impl Strategy<Value = Frame> {
    any::<u64>().prop_map(move |seed| random_frame_in_class(&mut ChaCha8Rng::seed_from_u64(seed), max_worlds, &class))
}

fn sets(n: usize, k: usize, seed: u64) -> Vec<WorldSet> {
    let v = random_valuation(&mut ChaCha8Rng::seed_from_u64(seed), n, &["a", "b", "c"]);
    v.into_values().take(k).collect()
}

fn model(f: Frame, seed: u64) -> Model {
    let n = f.len();
    Model::new(f, random_valuation(&mut ChaCha8Rng::seed_from_u64(seed), n, &["p", "q", "r"]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn print_parse_round_trip(phi in formula()) {
        prop_assert_eq!(parse(&phi.to_string()).unwrap(), phi);
    }

    #[test]
    fn closure_idempotent_and_monotone(phi in formula(), psi in formula()) {
        let c = subformula_closure(&phi);
        prop_assert_eq!(closure_of(&c), c.clone());
        prop_assert!(c.is_subset(&closure_of([&phi, &psi])));
        prop_assert!(c.contains(&phi));
    }

    #[test]
    fn next_depth_bounded_by_size(phi in formula()) {
        prop_assert!(phi.next_depth() <= phi.size());
    }

    #[test]
    fn tangle_oracles_agree(f in frame(6, ANY), k in 1usize..=3, seed in any::<u64>()) {
        let s = sets(f.len(), k, seed);
        let (t, iterations) = tangled_derivative_counted(&f, &s).unwrap();
        prop_assert!(iterations <= f.len());
        prop_assert_eq!(&t, &tangled_oracle_subsets(&f, &s).unwrap());
        prop_assert_eq!(&t, &tangled_oracle_clusters(&f, &s).unwrap());
    }

    #[test]
    fn tangle_antitone_in_arguments(f in frame(6, ANY), seed in any::<u64>()) {
        let s = sets(f.len(), 3, seed);
        let small = tangled_derivative(&f, &s[..2]).unwrap();
        let large = tangled_derivative(&f, &s).unwrap();
        prop_assert!(large.is_subset(&small));
    }

    #[test]
    fn fixed_point_clauses(f in frame(6, ANY), seed in any::<u64>()) {
        let s = sets(f.len(), 2, seed);
        let t = tangled_derivative(&f, &s).unwrap();
        for a in &s {
            prop_assert!(t.is_subset(&f.down(&a.intersection(&t))));
        }
        // any post-fixed point lies below the greatest one
        let mut a = s[0].union(&s[1]);
        loop {
            let next = s.iter().fold(a.clone(), |acc, x| acc.intersection(&f.down(&x.intersection(&a))));
            if next == a { break; }
            a = next;
        }
        prop_assert!(a.is_subset(&t));
    }

    #[test]
    fn down_distributes_and_contracts(f in frame(6, ANY), seed in any::<u64>()) {
        let s = sets(f.len(), 2, seed);
        prop_assert_eq!(f.down(&s[0].union(&s[1])), f.down(&s[0]).union(&f.down(&s[1])));
        prop_assert!(f.down(&f.down(&s[0])).is_subset(&f.down(&s[0])));
        prop_assert!(f.down(&WorldSet::empty(f.len())).is_empty());
    }

    #[test]
    fn box_is_dual_of_diamond(f in frame(5, ANY), phi in formula(), seed in any::<u64>()) {
        let m = model(f, seed);
        let t = m.truth_set(&phi);
        let boxed = m.truth_set(&Formula::boxed(phi));
        prop_assert_eq!(boxed, m.frame.down(&t.complement()).complement());
    }

    #[test]
    fn next_axioms_hold_sidewise(f in frame(5, ANY), phi in formula(), psi in formula(), seed in any::<u64>()) {
        let m = model(f, seed);
        let neg = AxiomSchema::NextNeg.instantiate(&[Slot::Formula(phi.clone())]).unwrap();
        let and = AxiomSchema::NextAnd.instantiate(&[Slot::Formula(phi), Slot::Formula(psi)]).unwrap();
        prop_assert_eq!(m.truth_set(&neg), m.frame.all());
        prop_assert_eq!(m.truth_set(&and), m.frame.all());
    }

    #[test]
    fn strict_implies_monotone(f in frame(5, ANY)) {
        let c = f.classify();
        prop_assert!(c.transitive);
        prop_assert!(!c.strictly_monotonic || c.monotonic);
    }

    #[test]
    fn classify_invariant_under_renaming(f in frame(5, ANY), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = f.worlds().collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(f.permuted(&order).classify(), f.classify());
    }

    #[test]
    fn duplication_is_a_pmorphism(f in frame(5, ANY), phi in formula(), seed in any::<u64>()) {
        let (dup, proj) = f.duplicate_reflexive();
        prop_assert!(dup.check_pmorphism(&f, &proj).is_ok());
        for w in dup.worlds().filter(|&w| dup.is_reflexive(w)) {
            prop_assert!(dup.cluster_of(w).len() >= 2);
        }
        let m = model(f, seed);
        let lifted_val = m.valuation.iter()
            .map(|(k, s)| (k.clone(), WorldSet::from_worlds(dup.len(), dup.worlds().filter(|&x| s.contains(proj[x])))))
            .collect();
        let up = Model::new(dup.clone(), lifted_val);
        let t = m.truth_set(&phi);
        prop_assert_eq!(up.truth_set(&phi), WorldSet::from_worlds(dup.len(), dup.worlds().filter(|&x| t.contains(proj[x]))));
    }

    #[test]
    fn d_valid_exactly_on_serial_frames(f in frame(4, ANY)) {
        let d = AxiomSchema::D.instantiate(&[]).unwrap();
        let valid = valid_on_frame(&f, &d, ValidityMode::Exhaustive).unwrap().is_valid();
        prop_assert_eq!(valid, f.is_serial());
    }

    #[test]
    fn stories_classify_as_declared(seed in any::<u64>(), serial in any::<bool>(), immersive in any::<bool>()) {
        let shape = StoryShape { max_levels: 4, max_clusters: 4, serial, immersive };
        let s = random_story(&mut ChaCha8Rng::seed_from_u64(seed), &shape);
        let c = s.frame().classify();
        prop_assert!(c.transitive && c.monotonic);
        if s.is_immersive() {
            prop_assert!(c.strictly_monotonic);
        }
        if serial {
            prop_assert!(c.serial);
        }
        let (lifted, proj) = s.duplicate_reflexive_with_projection();
        prop_assert!(lifted.frame().check_pmorphism(s.frame(), &proj).is_ok());
        prop_assert_eq!(lifted.class(), s.class());
    }

    #[test]
    fn immersive_next_path_locally_injective(seed in any::<u64>()) {
        let shape = StoryShape { max_levels: 3, max_clusters: 3, serial: false, immersive: true };
        let s = random_story(&mut ChaCha8Rng::seed_from_u64(seed), &shape).duplicate_reflexive();
        let f = s.frame();
        let paths = enumerate_paths(f, 3);
        let mut seen = std::collections::HashMap::new();
        for p in &paths {
            let key = (p.at(0), next_path(f, p));
            if let Some(q) = seen.insert(key, p.clone()) {
                prop_assert_eq!(&q, p);
            }
        }
    }

    #[test]
    fn metric_is_ultrametric_and_g_lipschitz(f in frame(4, ANY)) {
        let paths = enumerate_paths(&f, 2);
        for u in &paths {
            for v in &paths {
                let d = path_metric(u, v);
                prop_assert_eq!(d, path_metric(v, u));
                prop_assert_eq!(d.is_zero(), u == v);
                prop_assert!(path_metric(&next_path(&f, u), &next_path(&f, v)) <= d);
            }
        }
    }
}

#[test]
fn compose_height_is_one_plus_max() {
    let names = |ns: &[&str]| ns.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let leaf = |name: &str, kind| compose_moment(name, &names(&[name]), kind, &[], &IndexMap::new()).unwrap();
    let a = leaf("a", ClusterKind::Reflexive);
    let b = leaf("b", ClusterKind::Irreflexive);
    let mid = compose_moment("m", &names(&["m", "m2"]), ClusterKind::Reflexive, &[a.clone()], &IndexMap::new()).unwrap();
    assert_eq!(a.height(), 1);
    assert_eq!(mid.height(), 2);
    let top: Moment = compose_moment("r", &names(&["r"]), ClusterKind::Irreflexive, &[mid.clone(), b.clone()], &IndexMap::new()).unwrap();
    assert_eq!(top.height(), 1 + mid.height().max(b.height()));
    let tangle = Formula::Tangle(TangleArgs::new([Formula::var("p")]).unwrap());
    assert!(truth_set(&Model::new(top.frame().clone(), top.valuation().clone()), &tangle).is_empty());
}
