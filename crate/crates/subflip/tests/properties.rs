//! Module-level invariants beyond the gate suite: solver-vs-oracle
//! agreement, rank monotonicity lemmas, the co-matching lower bound for
//! the rank, flatness on co-matchings, the transfer consequences, and the
//! parser round trip on random syntax trees.

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use subflip::approx::{matching_diameter_report, transfer_refinement};
use subflip::enumerate::{all_graphs, graph_from_mask, pair_count, partitions};
use subflip::flip::{flip, subflip, FlipSpec};
use subflip::graph::{bipartite_complement_between, gen, pattern_order, Graph, PatternKind, VertexSet};
use subflip::logic::{evaluate, parse_formula, render, ColoredGraph, Formula};
use subflip::rank::{
    bound_f, flat_witness, rank_with_limits, FlatnessQuery, FlipMode, Radius, RankLimits,
    RankQuery,
};
use subflip::verify::oracles;
use subflip::Partition;

#[test]
fn tree_depth_matches_elimination_oracle() {
    for n in 1..=5 {
        for g in all_graphs(n) {
            assert_eq!(g.tree_depth().unwrap(), oracles::tree_depth(&g), "{g:?}");
        }
    }
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..60 {
        let n = rng.gen_range(6..=7usize);
        let g = graph_from_mask(n, rng.gen_range(0..1u64 << pair_count(n)));
        assert_eq!(g.tree_depth().unwrap(), oracles::tree_depth(&g), "{g:?}");
    }
}

#[test]
fn pattern_order_matches_literal_oracle_on_samples() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..120 {
        let n = rng.gen_range(6..=7usize);
        let g = graph_from_mask(n, rng.gen_range(0..1u64 << pair_count(n)));
        for kind in PatternKind::ALL {
            assert_eq!(pattern_order(&g, kind), oracles::pattern_order(&g, kind), "{g:?} {kind:?}");
        }
    }
}

#[test]
fn generator_orders_detected() {
    for t in 1..=5 {
        assert_eq!(pattern_order(&gen::co_matching(t).unwrap(), PatternKind::CoMatching), t);
        assert_eq!(pattern_order(&gen::half_graph(t).unwrap(), PatternKind::HalfGraph), t);
    }
}

#[test]
fn distance_triangle_inequality_samples() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..40 {
        let n = rng.gen_range(2..=8usize);
        let g = graph_from_mask(n, rng.gen_range(0..1u64 << pair_count(n)));
        for _ in 0..30 {
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            if let (Some(ab), Some(bc)) =
                (g.distance(a, b).unwrap(), g.distance(b, c).unwrap())
            {
                let ac = g.distance(a, c).unwrap().expect("reachable through b");
                assert!(ac <= ab + bc);
            }
        }
    }
}

#[test]
fn flip_involution_on_random_instances() {
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..50 {
        let n = rng.gen_range(2..=7usize);
        let g = graph_from_mask(n, rng.gen_range(0..1u64 << pair_count(n)));
        let parts = partitions(n, n);
        let p = parts[rng.gen_range(0..parts.len())].clone();
        let mut pairs = Vec::new();
        for a in 0..p.len() {
            for b in a..p.len() {
                if rng.gen_bool(0.5) {
                    pairs.push((a, b));
                }
            }
        }
        let spec = FlipSpec::new(p, &pairs).unwrap();
        let h = flip(&g, &spec).unwrap();
        assert_eq!(flip(&h, &spec).unwrap(), g);
    }
}

#[test]
fn rank_mode_order_and_budget_monotonicity() {
    let limits = RankLimits { depth_cap: 8, ..RankLimits::default() };
    for g in all_graphs(4) {
        for radius in [Radius::Finite(1), Radius::Finite(3), Radius::Infinite] {
            let frk = |k| {
                rank_with_limits(&g, &RankQuery { radius, budget: k, mode: FlipMode::Flip }, &limits)
            };
            let sfrk = |k| {
                rank_with_limits(
                    &g,
                    &RankQuery { radius, budget: k, mode: FlipMode::Subflip },
                    &limits,
                )
            };
            // frk <= sfrk whenever both are defined within the cap.
            if let (Ok(f), Ok(s)) = (frk(2), sfrk(2)) {
                assert!(f <= s, "{g:?} {radius:?}");
            }
            // Larger budgets never hurt.
            for pair in [(1usize, 2usize), (2, 3)] {
                if let (Ok(small), Ok(large)) = (sfrk(pair.0), sfrk(pair.1)) {
                    assert!(large <= small, "{g:?} {radius:?} {pair:?}");
                }
            }
        }
    }
}

#[test]
fn flip_rank_monotone_under_induced_subgraphs() {
    let limits = RankLimits { depth_cap: 8, ..RankLimits::default() };
    for g in all_graphs(4) {
        let q = RankQuery { radius: Radius::Finite(2), budget: 2, mode: FlipMode::Flip };
        let full = rank_with_limits(&g, &q, &limits).unwrap();
        for mask in 1u64..(1 << 4) {
            let verts: Vec<usize> = (0..4).filter(|&v| mask >> v & 1 == 1).collect();
            let sub = g.induced(&verts).unwrap();
            let small = rank_with_limits(&sub, &q, &limits).unwrap();
            assert!(small <= full, "{g:?} on {verts:?}");
        }
    }
}

/// Large co-matchings force subflipper-rank: order (k²)^d forces rank at
/// least d at radius 3.
#[test]
fn co_matching_rank_lower_bound() {
    let limits = RankLimits { depth_cap: 8, ..RankLimits::default() };
    let k = 2usize;
    // d = 1: order (k²)^1 = 4 within exhaustive reach.
    let g = gen::co_matching(4).unwrap();
    let q = RankQuery { radius: Radius::Finite(3), budget: k, mode: FlipMode::Subflip };
    let r = rank_with_limits(&g, &q, &limits).unwrap();
    assert!(r >= 1);

    // d = 2: order 16 spot-checked through sampled 2-subflips. Every
    // sampled subflip keeps a co-matching of order (k²)^1 inside a
    // radius-3 ball, so no single move can finish the game.
    let big = gen::co_matching(16).unwrap();
    let n = big.vertex_count();
    let mut rng = StdRng::seed_from_u64(77);
    for _ in 0..120 {
        let assignment: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let p = Partition::from_assignment(&assignment).unwrap();
        let h = subflip(&big, &p).unwrap();
        assert!(pattern_order(&h, PatternKind::CoMatching) >= 4);
        let witness = subflip::graph::find_pattern(&h, PatternKind::CoMatching, 4).unwrap();
        let v = witness.a_side[0];
        let (ball, _) = h.ball(3, v).unwrap();
        for u in witness.a_side.iter().chain(&witness.b_side) {
            assert!(ball.contains(u), "ball misses the co-matching");
        }
    }
}

/// No 1-subflip separates the a-side of a co-matching at radius 2: the
/// single-part partition is not a clique, so the only subflip is the
/// identity and all a-vertices stay pairwise at distance 2.
#[test]
fn flatness_blocked_on_co_matchings() {
    let t = 4usize;
    let g = gen::co_matching(t).unwrap();
    let w: Vec<Vec<usize>> = (0..t).map(|i| vec![i]).collect();
    let q = FlatnessQuery {
        radius: Radius::Finite(2),
        budget: 1,
        target: 3,
        tuple_len: 1,
        mode: FlipMode::Subflip,
    };
    assert!(flat_witness(&g, &w, &q).unwrap().is_none());
}

/// Bounded flip-rank at stretched radius implies bounded subflipper-rank
/// at the original radius with the recursion's budget (clamped to n).
#[test]
fn subflipper_forward_spot_check() {
    let limits = RankLimits { depth_cap: 6, ..RankLimits::default() };
    let t = 2usize;
    let k = 1usize;
    let r = 1usize;
    for n in 1..=5usize {
        for mask in 0..1u64 << pair_count(n) {
            let g = graph_from_mask(n, mask);
            if oracles::pattern_order(&g, PatternKind::CoMatching) >= t {
                continue;
            }
            for d in 0..=2usize {
                let flip_q =
                    RankQuery { radius: Radius::Finite(3 * t * r), budget: k, mode: FlipMode::Flip };
                let flip_rank = match rank_with_limits(&g, &flip_q, &limits) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if flip_rank > d {
                    continue;
                }
                let budget: usize = bound_f(t as u64, 1, k as u64, d as u32)
                    .unwrap()
                    .try_into()
                    .unwrap_or(usize::MAX);
                let sub_q = RankQuery {
                    radius: Radius::Finite(r),
                    budget: budget.min(n),
                    mode: FlipMode::Subflip,
                };
                let sub_rank = rank_with_limits(&g, &sub_q, &limits).unwrap();
                assert!(
                    sub_rank <= d,
                    "n={n} mask={mask} d={d}: subflip rank {sub_rank}"
                );
            }
        }
    }
}

/// The refinement never exceeds k·t^k parts, and the two transfer
/// consequences hold: ball containment and the stretched-distance form.
#[test]
fn transfer_consequences_on_random_instances() {
    let mut rng = StdRng::seed_from_u64(99);
    for _ in 0..60 {
        let n = rng.gen_range(2..=6usize);
        let g = graph_from_mask(n, rng.gen_range(0..1u64 << pair_count(n)));
        let cmi = oracles::pattern_order(&g, PatternKind::CoMatching);
        let t = cmi + 1;
        let parts = partitions(n, 3.min(n));
        let p = parts[rng.gen_range(0..parts.len())].clone();
        let result = transfer_refinement(&g, &p, t, false).unwrap();
        assert!(result.refinement.len() <= result.k * result.t.pow(result.k as u32));
        assert!(result.refinement.is_refinement_of(&p).unwrap());

        let sub = subflip(&g, &result.refinement).unwrap();
        let mut pairs = Vec::new();
        for a in 0..p.len() {
            for b in a..p.len() {
                if rng.gen_bool(0.5) {
                    pairs.push((a, b));
                }
            }
        }
        let h = flip(&g, &FlipSpec::new(p.clone(), &pairs).unwrap()).unwrap();
        for u in 0..n {
            let dist_sub = sub.distances_from(u);
            let dist_h = h.distances_from(u);
            for v in 0..n {
                if dist_sub[v] != usize::MAX {
                    assert!(
                        dist_h[v] != usize::MAX && dist_h[v] <= 3 * t * dist_sub[v],
                        "stretch bound fails"
                    );
                }
            }
        }
    }
}

/// The bipartite complement of a semi-induced bipartite graph in a graph
/// of co-matching-index below t has no induced matching of order t.
#[test]
fn induced_vs_semi_induced_observation() {
    for n in 2..=6usize {
        for mask in 0..1u64 << pair_count(n) {
            let g = graph_from_mask(n, mask);
            let t = oracles::pattern_order(&g, PatternKind::CoMatching) + 1;
            for a_mask in 1u64..(1 << n) {
                let a: VertexSet = (0..n).filter(|&v| a_mask >> v & 1 == 1).collect();
                let rest: Vec<usize> = (0..n).filter(|v| !a.contains(v)).collect();
                if rest.is_empty() {
                    continue;
                }
                for b_mask in 1u64..(1 << rest.len()) {
                    let b: VertexSet = rest
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| b_mask >> i & 1 == 1)
                        .map(|(_, &v)| v)
                        .collect();
                    let bar = bipartite_complement_between(&g, &a, &b).unwrap();
                    assert!(
                        pattern_order(&bar, PatternKind::InducedMatching) < t,
                        "n={n} mask={mask} A={a:?} B={b:?}"
                    );
                }
            }
        }
    }
}

#[test]
fn matching_diam_consistency_with_pattern_order() {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..200 {
        let n = rng.gen_range(1..=7usize);
        let g = graph_from_mask(n, rng.gen_range(0..1u64 << pair_count(n)));
        let t = pattern_order(&g, PatternKind::InducedMatching) + 1;
        let rep = matching_diameter_report(&g);
        assert!(rep.big_components < t && rep.max_diameter < 3 * t);
    }
}

// -- Parser round trip on random syntax trees -------------------------------

fn random_formula(rng: &mut StdRng, depth: usize, set_scope: &mut Vec<String>) -> Formula {
    let vars = ["x", "y", "z", "u"];
    let var = |rng: &mut StdRng| vars[rng.gen_range(0..vars.len())].to_string();
    let leaf = depth == 0;
    let choice = if leaf { rng.gen_range(0..6) } else { rng.gen_range(0..11) };
    match choice {
        0 => Formula::Top,
        1 => Formula::Bot,
        2 => Formula::edge(var(rng), var(rng)),
        3 => Formula::eq(var(rng), var(rng)),
        4 => Formula::color("Red", var(rng)),
        5 => {
            if set_scope.is_empty() {
                Formula::color("Blue", var(rng))
            } else {
                let name = set_scope[rng.gen_range(0..set_scope.len())].clone();
                Formula::SetMem(name, var(rng))
            }
        }
        6 => Formula::not(random_formula(rng, depth - 1, set_scope)),
        7 => Formula::and(vec![
            random_formula(rng, depth - 1, set_scope),
            random_formula(rng, depth - 1, set_scope),
        ]),
        8 => Formula::or(vec![
            random_formula(rng, depth - 1, set_scope),
            random_formula(rng, depth - 1, set_scope),
        ]),
        9 => {
            let v = var(rng);
            if rng.gen_bool(0.5) {
                Formula::exists(v, random_formula(rng, depth - 1, set_scope))
            } else {
                Formula::forall(v, random_formula(rng, depth - 1, set_scope))
            }
        }
        _ => {
            let name = format!("S{}", rng.gen_range(0..3));
            set_scope.push(name.clone());
            let body = random_formula(rng, depth - 1, set_scope);
            set_scope.pop();
            if rng.gen_bool(0.5) {
                Formula::ExistsSet(name, Box::new(body))
            } else {
                Formula::ForallSet(name, Box::new(body))
            }
        }
    }
}

#[test]
fn parser_round_trip_on_random_trees() {
    let mut rng = StdRng::seed_from_u64(2024);
    for i in 0..500 {
        let f = random_formula(&mut rng, 4, &mut Vec::new());
        let text = render(&f);
        let reparsed = parse_formula(&text)
            .unwrap_or_else(|e| panic!("iteration {i}: `{text}` failed to parse: {e}"));
        assert_eq!(f, reparsed, "iteration {i}: `{text}`");
    }
}

/// Positivity in a set variable gives monotone satisfaction in it.
#[test]
fn monotonicity_in_positive_set_variables() {
    let mut rng = StdRng::seed_from_u64(314);
    let templates = [
        "Y(x)",
        "Y(x) | E(x,y)",
        "Y(x) & (E(x,y) | Y(y))",
        "exists z (E(x,z) & Y(z))",
        "forall z (Y(z) | E(x,z))",
        "~(~Y(x))",
    ];
    for _ in 0..200 {
        let template = templates[rng.gen_range(0..templates.len())];
        let f = subflip::logic::parse_formula_with_sets(template, &["Y"]).unwrap();
        assert!(subflip::logic::positive_in(&f, "Y"), "{template}");
        let n = rng.gen_range(2..=4usize);
        let g = graph_from_mask(n, rng.gen_range(0..1u64 << pair_count(n)));
        let cg = ColoredGraph::new(g);
        let small_mask = rng.gen_range(0..1u64 << n);
        let grow_mask = small_mask | rng.gen_range(0..1u64 << n);
        let small: VertexSet = (0..n).filter(|&v| small_mask >> v & 1 == 1).collect();
        let large: VertexSet = (0..n).filter(|&v| grow_mask >> v & 1 == 1).collect();
        let assignment: BTreeMap<String, usize> =
            [("x".to_string(), rng.gen_range(0..n)), ("y".to_string(), rng.gen_range(0..n))]
                .into_iter()
                .collect();
        let with_small = evaluate(
            &cg,
            &f,
            &assignment,
            &BTreeMap::from([("Y".to_string(), small)]),
        )
        .unwrap();
        let with_large = evaluate(
            &cg,
            &f,
            &assignment,
            &BTreeMap::from([("Y".to_string(), large)]),
        )
        .unwrap();
        if with_small {
            assert!(with_large, "{template}");
        }
    }
}
