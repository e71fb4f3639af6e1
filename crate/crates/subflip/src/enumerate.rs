//! Exhaustive enumeration helpers: labeled graphs by edge mask, set
//! partitions as restricted growth strings, and subsets.

use crate::graph::{Graph, VertexSet};
use crate::partition::Partition;

/// Number of vertex pairs `{u,v}` with `u < v < n`.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// The graph on `n` vertices whose edges are the set bits of `mask`, in
/// colex pair order `(0,1),(0,2),(1,2),(0,3),...`; no loops.
pub fn graph_from_mask(n: usize, mask: u64) -> Graph {
    let mut g = Graph::new(n).expect("n >= 1");
    let mut idx = 0;
    for v in 1..n {
        for u in 0..v {
            if mask >> idx & 1 == 1 {
                g.set_edge(u, v, true);
            }
            idx += 1;
        }
    }
    g
}

/// All irreflexive labeled graphs on `n` vertices.
pub fn all_graphs(n: usize) -> impl Iterator<Item = Graph> {
    assert!(pair_count(n) <= 63, "too many vertices to enumerate");
    (0u64..1 << pair_count(n)).map(move |mask| graph_from_mask(n, mask))
}

/// All graphs on `n` vertices including every loop pattern.
pub fn all_graphs_with_loops(n: usize) -> impl Iterator<Item = Graph> {
    all_graphs(n).flat_map(move |g| {
        (0u64..1 << n).map(move |loop_mask| {
            let mut h = g.clone();
            for v in 0..n {
                if loop_mask >> v & 1 == 1 {
                    h.set_loop(v, true);
                }
            }
            h
        })
    })
}

/// All partitions of `0..n` with at most `max_parts` parts, in lexicographic
/// restricted-growth-string order.
pub fn partitions(n: usize, max_parts: usize) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    rgs_rec(n, max_parts, 1, &mut rgs, &mut out);
    out
}

fn rgs_rec(n: usize, max_parts: usize, pos: usize, rgs: &mut Vec<usize>, out: &mut Vec<Partition>) {
    if pos == n {
        out.push(Partition::from_assignment(rgs).expect("rgs is a valid assignment"));
        return;
    }
    let used = rgs[..pos].iter().copied().max().unwrap_or(0) + 1;
    for next in 0..=used.min(max_parts - 1) {
        rgs[pos] = next;
        rgs_rec(n, max_parts, pos + 1, rgs, out);
    }
    rgs[pos] = 0;
}

/// All partitions of `0..n` (no part cap).
pub fn all_partitions(n: usize) -> Vec<Partition> {
    partitions(n, n)
}

/// All refinements of `p`, obtained by partitioning each part independently.
pub fn refinements_of(p: &Partition) -> Vec<Partition> {
    let per_part: Vec<Vec<Vec<Vec<usize>>>> = p
        .parts()
        .iter()
        .map(|part| {
            all_partitions(part.len())
                .into_iter()
                .map(|q| {
                    q.parts()
                        .iter()
                        .map(|block| block.iter().map(|&i| part[i]).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_part.len()];
    loop {
        let mut parts: Vec<Vec<usize>> = Vec::new();
        for (i, options) in per_part.iter().enumerate() {
            parts.extend(options[choice[i]].iter().cloned());
        }
        out.push(Partition::from_parts(p.host_size(), parts).expect("valid refinement"));
        let mut i = 0;
        loop {
            if i == choice.len() {
                return out;
            }
            choice[i] += 1;
            if choice[i] < per_part[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// All nonempty subsets of `0..n`, ascending by bitmask.
pub fn nonempty_subsets(n: usize) -> impl Iterator<Item = VertexSet> {
    (1u64..1 << n).map(move |mask| (0..n).filter(|&v| mask >> v & 1 == 1).collect())
}

/// All symmetric relations over `k` parts, each as a list of canonical
/// `(min,max)` pairs; ascending by inclusion mask.
pub fn symmetric_relations(k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a..k {
            pairs.push((a, b));
        }
    }
    let m = pairs.len();
    assert!(m <= 20, "too many part pairs to enumerate");
    (0u64..1 << m)
        .map(|mask| {
            pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_counts() {
        assert_eq!(all_graphs(3).count(), 8);
        assert_eq!(all_graphs_with_loops(2).count(), 2 * 4);
    }

    #[test]
    fn partition_counts_match_bell_and_stirling() {
        assert_eq!(all_partitions(4).len(), 15);
        assert_eq!(all_partitions(5).len(), 52);
        assert_eq!(partitions(6, 3).len(), 1 + 31 + 90);
        assert_eq!(partitions(5, 1).len(), 1);
    }

    #[test]
    fn refinements() {
        let p = Partition::whole(3).unwrap();
        assert_eq!(refinements_of(&p).len(), 5);
        let q = Partition::singletons(3).unwrap();
        assert_eq!(refinements_of(&q).len(), 1);
        for r in refinements_of(&p) {
            assert!(r.is_refinement_of(&p).unwrap());
        }
    }

    #[test]
    fn relations() {
        assert_eq!(symmetric_relations(2).len(), 8);
        assert_eq!(symmetric_relations(3).len(), 64);
    }
}
