use std::collections::BTreeMap;

use mlrelax::linearization::{mccormick_from_flower, standard_linearization};
use mlrelax::model::ml_vertices;
use mlrelax::poly::{is_member, is_valid};
use mlrelax::rational::{self, ratio};
use mlrelax::relax::{enumerate_flowers, flower_relaxation, separate_flower, standard_relaxation, DEFAULT_CENTER_GUARD};
use mlrelax::verify::sampler::{self, SamplerConfig};
use mlrelax::verify::{self, Relaxation};
use mlrelax::{Hypergraph, Rational, VarKey};
use proptest::prelude::*;
use rand::Rng;

const SMALL: SamplerConfig = SamplerConfig::new(2, 6, 5);

fn graph(seed: u64) -> Hypergraph {
    sampler::random_hypergraph(&mut sampler::rng(seed), SMALL)
}

/// A point in the unit box with denominators up to 4.
fn box_point(g: &Hypergraph, seed: u64) -> BTreeMap<VarKey, Rational> {
    let mut rng = sampler::rng(seed ^ 0x9e37_79b9);
    g.keys().into_iter().map(|k| (k, ratio(rng.gen_range(0..=4), 4))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vertices_lie_in_the_flower_relaxation(seed in any::<u64>()) {
        let g = graph(seed);
        let fr = flower_relaxation(&g, None);
        for v in ml_vertices(&g, 8).unwrap() {
            let p = v.to_point();
            prop_assert!(is_member(&fr, &p).unwrap().is_inside());
            prop_assert!(separate_flower(&g, &p, None, DEFAULT_CENTER_GUARD).unwrap().is_none());
        }
    }

    /// Separation returns the largest violation over the enumerated rows.
    #[test]
    fn separation_matches_enumeration(seed in any::<u64>(), cap in prop::option::of(1usize..4)) {
        let g = graph(seed);
        let z = box_point(&g, seed);
        let fr = flower_relaxation(&g, cap);
        let best = fr.ineqs().iter().map(|r| r.violation_at(&z).unwrap()).max().unwrap();
        let sep = separate_flower(&g, &z, cap, DEFAULT_CENTER_GUARD).unwrap();
        match sep {
            None => prop_assert!(best <= rational::zero()),
            Some(s) => {
                prop_assert_eq!(&s.violation, &best);
                prop_assert!(s.flower.is_nonredundant());
                prop_assert!(cap.is_none_or(|c| s.flower.k() <= c || s.flower.neighbors().iter().all(|n| n.is_singleton())));
                prop_assert_eq!(s.flower.violation_at(&z), Some(best));
            }
        }
    }

    #[test]
    fn flowers_are_certified_by_their_construction(seed in any::<u64>()) {
        let g = graph(seed);
        for (f, _) in enumerate_flowers(&g, None).into_iter().take(8) {
            let d = mccormick_from_flower(&g, &f).unwrap();
            let class = d.classify(&g);
            prop_assert!(class.mccormick && class.of_g);
            prop_assert!(is_valid(&d.relaxation_system(), &f.to_ineq()).unwrap());
        }
    }

    #[test]
    fn linearization_files_round_trip(seed in any::<u64>()) {
        let mut rng = sampler::rng(seed);
        let g = sampler::random_hypergraph(&mut rng, SMALL);
        let d = sampler::random_linearization(&mut rng, &g);
        let (back, g2, class) = d.to_file(Some(&g)).load().unwrap();
        prop_assert_eq!(back, d);
        prop_assert_eq!(g2, g);
        prop_assert!(class.of_g);
    }

    #[test]
    fn standard_linearization_gives_standard_relaxation(seed in any::<u64>()) {
        let g = graph(seed);
        let d = standard_linearization(&g);
        let p = d.project_onto_edges(&g).unwrap();
        prop_assert!(mlrelax::poly::poly_equal(&p, &standard_relaxation(&g)).unwrap());
    }

    #[test]
    fn bounds_are_ordered(seed in any::<u64>()) {
        let inst = sampler::random_instance(&mut sampler::rng(seed), SMALL);
        let s = verify::bound_static(&inst, &Relaxation::Standard).unwrap();
        let f = verify::bound_static(&inst, &Relaxation::Flower(None)).unwrap();
        let capped = verify::bound_static(&inst, &Relaxation::Flower(Some(2))).unwrap();
        let opt = f.integer_opt.clone().unwrap();
        prop_assert!(s.bound <= capped.bound && capped.bound <= f.bound && f.bound <= opt);
        let cp = verify::bound_cutting_plane(&inst, None, 1000).unwrap();
        prop_assert!(cp.completed);
        prop_assert_eq!(cp.bound, f.bound);
    }
}
