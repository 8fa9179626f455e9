use coarse_lab::cayley::build_ball;
use coarse_lab::covers::{
    cross_definition, exact_coloring, greedy_coloring, make_brick_cover_z2, make_interval_cover_z, perturb,
    ProximityGraph,
};
use coarse_lab::models::{model_from_descriptor, Element, GroupModel};
use coarse_lab::presentation::{Letter, Word};
use proptest::prelude::*;

fn letter(gens: usize) -> impl Strategy<Value = Letter> {
    (0..gens, any::<bool>()).prop_map(|(g, i)| Letter::new(g, i))
}

fn word(gens: usize, max: usize) -> impl Strategy<Value = Word> {
    proptest::collection::vec(letter(gens), 0..max).prop_map(Word::new)
}

fn model(d: &str) -> GroupModel {
    model_from_descriptor(d).unwrap()
}

/// Brute-force chromatic number by trying every assignment.
fn chromatic_number(g: &ProximityGraph) -> usize {
    if g.nodes == 0 {
        return 0;
    }
    (1..=g.nodes)
        .find(|&k| {
            let total = k.pow(g.nodes as u32);
            (0..total).any(|mut code| {
                let colors: Vec<u32> = (0..g.nodes)
                    .map(|_| {
                        let c = (code % k) as u32;
                        code /= k;
                        c
                    })
                    .collect();
                g.is_proper(&colors)
            })
        })
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn free_reduction_is_idempotent_and_inverse_cancels(w in word(3, 20)) {
        let r = w.free_reduce();
        prop_assert!(r.is_freely_reduced());
        prop_assert_eq!(r.free_reduce(), r.clone());
        prop_assert!(w.concat(&w.inverse()).free_reduce().is_empty());
    }

    #[test]
    fn word_lengths_obey_the_triangle_inequality(
        which in 0..4usize,
        u in word(2, 10),
        v in word(2, 10),
    ) {
        let m = model(["z^2", "free:2", "lamplighter", "dihedral_inf"][which]);
        let (x, y) = (m.evaluate_word(&u).unwrap(), m.evaluate_word(&v).unwrap());
        let len = |e: &Element| m.word_length(e).unwrap();
        prop_assert!(len(&m.multiply(&x, &y)) <= len(&x) + len(&y));
        prop_assert!(len(&x) <= u.len() as u64);
        prop_assert_eq!(len(&m.invert(&x)), len(&x));
    }

    #[test]
    fn exact_coloring_matches_brute_force(
        n in 1..8usize,
        raw in proptest::collection::vec((0..8usize, 0..8usize), 0..20),
    ) {
        let g = ProximityGraph::from_edges(n, raw.into_iter().filter(|&(a, b)| a < n && b < n));
        let exact = exact_coloring(&g);
        prop_assert!(g.is_proper(&exact));
        let k = exact.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        prop_assert_eq!(k, chromatic_number(&g));
        let greedy = greedy_coloring(&g);
        prop_assert!(g.is_proper(&greedy));
        prop_assert!(greedy.iter().map(|&c| c as usize + 1).max().unwrap_or(0) >= k);
    }
}

#[test]
fn spheres_partition_the_ball() {
    for d in ["z", "z^2", "free:2", "lamplighter", "dihedral_inf", "cyclic:7"] {
        let m = model(d);
        let b = build_ball(&m, 6, 1 << 20).unwrap();
        assert_eq!(b.sphere_sizes().iter().sum::<u64>(), b.len() as u64, "{d}");
        for v in 0..b.len() {
            assert_eq!(u64::from(b.dist(v)), m.word_length(b.element(v)).unwrap(), "{d}");
        }
    }
}

#[test]
fn cross_definition_on_perturbed_covers() {
    let z = model("z");
    let bz = build_ball(&z, 40, 1 << 20).unwrap();
    let z2 = model("z^2");
    let b2 = build_ball(&z2, 16, 1 << 20).unwrap();
    let mut covers = Vec::new();
    for l in [2, 4, 8] {
        covers.push((&z, &bz, make_interval_cover_z(&bz, &z, l).unwrap()));
    }
    covers.push((&z2, &b2, make_brick_cover_z2(&b2, &z2, 8).unwrap()));
    let base = covers.clone();
    for seed in 0..200u64 {
        let (m, b, c) = &base[seed as usize % base.len()];
        covers.push((m, b, perturb(b, c, seed, 1 + seed as usize % 5)));
    }
    let mut passing = 0;
    for (m, b, c) in &covers {
        if let Some(ok) = cross_definition(b, m, c, c.d, c.bound).unwrap() {
            assert!(ok);
            passing += 1;
        }
    }
    assert!(passing >= base.len());
}
