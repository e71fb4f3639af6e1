//! Independent brute-force oracles. These deliberately avoid the main
//! implementation paths: patterns are matched against the literal ordered
//! definitions, tree-depth enumerates elimination orders, and the rank
//! oracle carries its own graph representation, partition enumeration,
//! and game recursion.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::graph::{Graph, PatternKind};
use crate::rank::{FlipMode, Radius};

/// Largest order of the pattern by exhaustive search over ordered,
/// pairwise-distinct side tuples checked against the literal definition.
pub fn pattern_order(g: &Graph, kind: PatternKind) -> usize {
    let n = g.vertex_count();
    let max_t = match kind {
        PatternKind::IrreflexiveClique => n,
        _ => n / 2,
    };
    let mut best = 0;
    for t in 1..=max_t {
        if exists_ordered(g, kind, t) {
            best = t;
        } else {
            break;
        }
    }
    best
}

fn exists_ordered(g: &Graph, kind: PatternKind, t: usize) -> bool {
    match kind {
        PatternKind::IrreflexiveClique => {
            let mut chosen = Vec::new();
            place_clique(g, t, 0, &mut chosen)
        }
        _ => {
            let mut a = Vec::new();
            let mut b = Vec::new();
            place_pair(g, kind, t, &mut a, &mut b)
        }
    }
}

fn place_clique(g: &Graph, t: usize, start: usize, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == t {
        return true;
    }
    for v in start..g.vertex_count() {
        if g.has_loop(v) || !chosen.iter().all(|&u| g.adjacent(u, v)) {
            continue;
        }
        chosen.push(v);
        if place_clique(g, t, v + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Places aligned pairs `(a_i, b_i)` one at a time, checking the literal
/// adjacency condition against every previously placed pair.
fn place_pair(g: &Graph, kind: PatternKind, t: usize, a: &mut Vec<usize>, b: &mut Vec<usize>) -> bool {
    if a.len() == t {
        return true;
    }
    let relation = |i: usize, j: usize| -> bool {
        match kind {
            PatternKind::CoMatching => i != j,
            PatternKind::HalfGraph => i <= j,
            PatternKind::Biclique => true,
            PatternKind::SemiInducedMatching | PatternKind::InducedMatching => i == j,
            PatternKind::IrreflexiveClique => unreachable!(),
        }
    };
    let i = a.len();
    let n = g.vertex_count();
    for va in 0..n {
        if a.contains(&va) || b.contains(&va) {
            continue;
        }
        a.push(va);
        'next_b: for vb in 0..n {
            if a.contains(&vb) || b.contains(&vb) {
                continue;
            }
            b.push(vb);
            // Literal definition against all placed indices.
            for (j, (&aj, &bj)) in a.iter().zip(b.iter()).enumerate() {
                if g.adjacent(aj, *b.last().unwrap()) != relation(j, i)
                    || g.adjacent(va, bj) != relation(i, j)
                {
                    b.pop();
                    continue 'next_b;
                }
            }
            if kind == PatternKind::InducedMatching {
                let within_ok = a.iter().take(i).all(|&u| !g.adjacent(u, va))
                    && b.iter().take(i).all(|&u| !g.adjacent(u, vb));
                if !within_ok {
                    b.pop();
                    continue 'next_b;
                }
            }
            if place_pair(g, kind, t, a, b) {
                return true;
            }
            b.pop();
        }
        a.pop();
    }
    false
}

/// Tree-depth as the minimum over all elimination orders: the earliest
/// surviving vertex of the permutation roots each connected piece.
pub fn tree_depth(g: &Graph) -> usize {
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = usize::MAX;
    permute(&mut order, 0, &mut |perm| {
        let verts: Vec<usize> = (0..n).collect();
        let depth = eliminate(g, &verts, perm);
        best = best.min(depth);
    });
    best
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

fn eliminate(g: &Graph, verts: &[usize], perm: &[usize]) -> usize {
    if verts.len() == 1 {
        return 0;
    }
    let comps = components_within(g, verts);
    if comps.len() > 1 {
        return comps.iter().map(|c| eliminate(g, c, perm)).max().unwrap();
    }
    let root = *perm.iter().find(|v| verts.contains(v)).unwrap();
    let rest: Vec<usize> = verts.iter().copied().filter(|&v| v != root).collect();
    if rest.is_empty() {
        return 0;
    }
    1 + components_within(g, &rest)
        .iter()
        .map(|c| eliminate(g, c, perm))
        .max()
        .unwrap()
}

fn components_within(g: &Graph, verts: &[usize]) -> Vec<Vec<usize>> {
    let inside: BTreeSet<usize> = verts.iter().copied().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for &start in verts {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = vec![start];
        seen.insert(start);
        let mut queue = VecDeque::from([start]);
        while let Some(w) = queue.pop_front() {
            for x in g.neighbors(w) {
                if inside.contains(&x) && seen.insert(x) {
                    comp.push(x);
                    queue.push_back(x);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// The oracle's own graph representation: plain sorted edge and loop sets.
#[derive(Clone, PartialEq, Eq, Hash)]
struct Plain {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    loops: BTreeSet<usize>,
}

impl Plain {
    fn from_graph(g: &Graph) -> Plain {
        Plain {
            n: g.vertex_count(),
            edges: g.edges().collect(),
            loops: g.loops().into_iter().collect(),
        }
    }

    fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.edges.contains(&(u.min(v), u.max(v)))
    }

    fn restrict(&self, keep: &[usize]) -> Plain {
        let index: HashMap<usize, usize> =
            keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Plain {
            n: keep.len(),
            edges: self
                .edges
                .iter()
                .filter(|(u, v)| index.contains_key(u) && index.contains_key(v))
                .map(|(u, v)| {
                    let (a, b) = (index[u], index[v]);
                    (a.min(b), a.max(b))
                })
                .collect(),
            loops: self.loops.iter().filter_map(|v| index.get(v).copied()).collect(),
        }
    }

    fn bfs(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[from] = Some(0);
        let mut queue = VecDeque::from([from]);
        while let Some(w) = queue.pop_front() {
            for x in 0..self.n {
                if self.has_edge(w, x) && dist[x].is_none() {
                    dist[x] = Some(dist[w].unwrap() + 1);
                    queue.push_back(x);
                }
            }
        }
        dist
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(w) = queue.pop_front() {
                for x in 0..self.n {
                    if self.has_edge(w, x) && !seen[x] {
                        seen[x] = true;
                        comp.push(x);
                        queue.push_back(x);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// All partitions with at most `k` blocks, enumerated as normalized
/// assignment vectors (every vertex tries every block label, duplicates
/// removed by canonicalization).
fn oracle_partitions(n: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    let k = k.min(n);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];
    loop {
        let canon = canonical(&assignment);
        if seen.insert(canon.clone()) {
            let blocks = canon.iter().copied().max().unwrap() + 1;
            let mut parts = vec![Vec::new(); blocks];
            for (v, &b) in canon.iter().enumerate() {
                parts[b].push(v);
            }
            out.push(parts);
        }
        // Odometer over k^n assignments.
        let mut pos = 0;
        loop {
            if pos == n {
                return out;
            }
            assignment[pos] += 1;
            if assignment[pos] < k {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

fn canonical(assignment: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    let mut next = 0;
    assignment
        .iter()
        .map(|&b| {
            *map.entry(b).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

fn fully_adjacent_plain(g: &Plain, a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|&u| b.iter().all(|&v| u == v || g.has_edge(u, v)))
}

fn apply_flip(g: &Plain, parts: &[Vec<usize>], related: &dyn Fn(usize, usize) -> bool) -> Plain {
    let part_of: HashMap<usize, usize> = parts
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.iter().map(move |&v| (v, i)))
        .collect();
    let mut edges = BTreeSet::new();
    for u in 0..g.n {
        for v in (u + 1)..g.n {
            let flip_here = related(part_of[&u], part_of[&v]);
            if g.has_edge(u, v) != flip_here {
                edges.insert((u, v));
            }
        }
    }
    Plain { n: g.n, edges, loops: g.loops.clone() }
}

/// The flip/subflip candidates available from one partition.
fn moves(g: &Plain, parts: &[Vec<usize>], mode: FlipMode) -> Vec<Plain> {
    match mode {
        FlipMode::Subflip => {
            let adjacency: Vec<Vec<bool>> = (0..parts.len())
                .map(|i| {
                    (0..parts.len())
                        .map(|j| fully_adjacent_plain(g, &parts[i], &parts[j]))
                        .collect()
                })
                .collect();
            vec![apply_flip(g, parts, &|i, j| adjacency[i][j])]
        }
        FlipMode::Flip => {
            let m = parts.len();
            let mut pair_list = Vec::new();
            for i in 0..m {
                for j in i..m {
                    pair_list.push((i, j));
                }
            }
            (0u64..1 << pair_list.len())
                .map(|mask| {
                    let chosen: HashSet<(usize, usize)> = pair_list
                        .iter()
                        .enumerate()
                        .filter(|(idx, _)| mask >> idx & 1 == 1)
                        .map(|(_, &p)| p)
                        .collect();
                    apply_flip(g, parts, &|i, j| chosen.contains(&(i.min(j), i.max(j))))
                })
                .collect()
        }
    }
}

fn arenas(h: &Plain, radius: Radius) -> Vec<Plain> {
    let mut out: Vec<Plain> = Vec::new();
    match radius {
        Radius::Finite(r) => {
            for v in 0..h.n {
                let dist = h.bfs(v);
                let keep: Vec<usize> =
                    (0..h.n).filter(|&u| dist[u].is_some_and(|d| d <= r)).collect();
                let sub = h.restrict(&keep);
                if !out.contains(&sub) {
                    out.push(sub);
                }
            }
        }
        Radius::Infinite => {
            for comp in h.components() {
                let sub = h.restrict(&comp);
                if !out.contains(&sub) {
                    out.push(sub);
                }
            }
        }
    }
    out
}

/// The least number of rounds within `cap` in which the flipper reduces
/// the graph to single vertices, or `None`.
pub fn rank(g: &Graph, radius: Radius, budget: usize, mode: FlipMode, cap: usize) -> Option<usize> {
    let plain = Plain::from_graph(g);
    let mut memo = HashMap::new();
    (0..=cap).find(|&d| wins(&plain, d, radius, budget, mode, &mut memo))
}

fn wins(
    g: &Plain,
    d: usize,
    radius: Radius,
    budget: usize,
    mode: FlipMode,
    memo: &mut HashMap<(Plain, usize), bool>,
) -> bool {
    if g.n == 1 {
        return true;
    }
    if d == 0 {
        return false;
    }
    if let Some(&known) = memo.get(&(g.clone(), d)) {
        return known;
    }
    let mut winnable = false;
    'outer: for parts in oracle_partitions(g.n, budget) {
        for h in moves(g, &parts, mode) {
            if arenas(&h, radius)
                .iter()
                .all(|sub| wins(sub, d - 1, radius, budget, mode, memo))
            {
                winnable = true;
                break 'outer;
            }
        }
    }
    memo.insert((g.clone(), d), winnable);
    winnable
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen;

    #[test]
    fn oracle_patterns_on_generators() {
        for t in 1..=3 {
            assert_eq!(pattern_order(&gen::co_matching(t).unwrap(), PatternKind::CoMatching), t);
            assert_eq!(pattern_order(&gen::half_graph(t).unwrap(), PatternKind::HalfGraph), t);
            assert_eq!(pattern_order(&gen::biclique(t).unwrap(), PatternKind::Biclique), t);
        }
        assert_eq!(pattern_order(&gen::path(4).unwrap(), PatternKind::CoMatching), 2);
    }

    #[test]
    fn oracle_tree_depth_basics() {
        assert_eq!(tree_depth(&gen::independent(1).unwrap()), 0);
        assert_eq!(tree_depth(&gen::clique(4).unwrap()), 3);
        assert_eq!(tree_depth(&gen::path(4).unwrap()), 2);
    }

    #[test]
    fn oracle_rank_basics() {
        let k1 = gen::independent(1).unwrap();
        assert_eq!(rank(&k1, Radius::Finite(3), 1, FlipMode::Subflip, 4), Some(0));
        let two_k2 = Graph::build(4, &[(0, 1), (2, 3)], &Default::default()).unwrap();
        assert_eq!(rank(&two_k2, Radius::Finite(3), 2, FlipMode::Subflip, 4), Some(1));
        let p4 = gen::path(4).unwrap();
        assert_eq!(rank(&p4, Radius::Infinite, 2, FlipMode::Subflip, 5), Some(2));
    }
}
