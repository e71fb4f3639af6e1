//! Finite labeled graphs with a symmetric edge relation and explicit
//! self-loops (partially reflexive graphs), together with the metric and
//! pattern machinery the rest of the workbench builds on.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// A set of vertex ids inside some host graph.
pub type VertexSet = BTreeSet<usize>;

/// Vertex subsets are capped here before the subset-memoized solvers run.
const TREE_DEPTH_CAP: usize = 24;

/// A finite graph on dense vertex ids `0..n`. The adjacency matrix is
/// symmetric; the diagonal stores self-loops. Equality is labeled equality:
/// same vertex count, same edges, same loops.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Graph(n={}, edges={:?}, loops={:?})",
            self.n,
            self.edges().collect::<Vec<_>>(),
            self.loops()
        )
    }
}

impl Graph {
    /// An edgeless, loopless graph on `n` vertices.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Graph { n, adj: vec![false; n * n] })
    }

    /// Builds a graph from an edge list and a loop set.
    /// Self-pairs in the edge list are rejected; loops go in `loops`.
    pub fn build(n: usize, edge_list: &[(usize, usize)], loops: &VertexSet) -> Result<Self> {
        let mut g = Graph::new(n)?;
        for &(u, v) in edge_list {
            if u == v {
                return Err(Error::SelfPairInEdgeList(u));
            }
            g.check_vertex(u)?;
            g.check_vertex(v)?;
            g.set_edge(u, v, true);
        }
        for &v in loops {
            g.check_vertex(v)?;
            g.set_loop(v, true);
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> {
        0..self.n
    }

    fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::VertexOutOfRange(v, self.n));
        }
        Ok(())
    }

    /// Adjacency between two distinct vertices. `adjacent(v, v)` is false;
    /// use [`Graph::has_loop`] for the diagonal.
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u * self.n + v]
    }

    pub fn has_loop(&self, v: usize) -> bool {
        self.adj[v * self.n + v]
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        debug_assert_ne!(u, v);
        self.adj[u * self.n + v] = present;
        self.adj[v * self.n + u] = present;
    }

    pub fn toggle_edge(&mut self, u: usize, v: usize) {
        debug_assert_ne!(u, v);
        self.adj[u * self.n + v] = !self.adj[u * self.n + v];
        self.adj[v * self.n + u] = !self.adj[v * self.n + u];
    }

    pub fn set_loop(&mut self, v: usize, present: bool) {
        self.adj[v * self.n + v] = present;
    }

    /// Edges between distinct vertices as ordered pairs `u < v`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            ((u + 1)..self.n).filter_map(move |v| self.adjacent(u, v).then_some((u, v)))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn loops(&self) -> VertexSet {
        (0..self.n).filter(|&v| self.has_loop(v)).collect()
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|v| self.has_loop(v))
    }

    pub fn is_irreflexive(&self) -> bool {
        (0..self.n).all(|v| !self.has_loop(v))
    }

    /// Marks every vertex with a self-loop.
    pub fn with_all_loops(mut self) -> Self {
        for v in 0..self.n {
            self.set_loop(v, true);
        }
        self
    }

    /// Neighbors of `v` among distinct vertices, ascending.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.adjacent(v, u))
    }

    /// The subgraph induced by `verts`, relabeled onto `0..verts.len()` in
    /// ascending order of the original ids. Loops restrict accordingly.
    pub fn induced(&self, verts: &[usize]) -> Result<Graph> {
        let mut g = Graph::new(verts.len())?;
        for (i, &u) in verts.iter().enumerate() {
            self.check_vertex(u)?;
            if self.has_loop(u) {
                g.set_loop(i, true);
            }
            for (j, &v) in verts.iter().enumerate().skip(i + 1) {
                if self.adjacent(u, v) {
                    g.set_edge(i, j, true);
                }
            }
        }
        Ok(g)
    }

    /// Shortest-path distance ignoring self-loops; `None` across components.
    pub fn distance(&self, u: usize, v: usize) -> Result<Option<usize>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let mut dist = vec![usize::MAX; self.n];
        dist[u] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(w) = queue.pop_front() {
            if w == v {
                return Ok(Some(dist[w]));
            }
            for x in self.neighbors(w) {
                if dist[x] == usize::MAX {
                    dist[x] = dist[w] + 1;
                    queue.push_back(x);
                }
            }
        }
        Ok(None)
    }

    /// All distances from `u`; `usize::MAX` marks unreachable vertices.
    pub fn distances_from(&self, u: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[u] = 0;
        let mut queue = VecDeque::from([u]);
        while let Some(w) = queue.pop_front() {
            for x in self.neighbors(w) {
                if dist[x] == usize::MAX {
                    dist[x] = dist[w] + 1;
                    queue.push_back(x);
                }
            }
        }
        dist
    }

    /// The closed `r`-neighborhood of `v` and its induced subgraph
    /// (relabeled, ascending original ids).
    pub fn ball(&self, r: usize, v: usize) -> Result<(VertexSet, Graph)> {
        self.check_vertex(v)?;
        let dist = self.distances_from(v);
        let members: VertexSet = (0..self.n).filter(|&u| dist[u] <= r).collect();
        let verts: Vec<usize> = members.iter().copied().collect();
        let sub = self.induced(&verts)?;
        Ok((members, sub))
    }

    /// Connected components as vertex sets, ordered by minimum vertex.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] {
                continue;
            }
            let mut comp = VertexSet::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(w) = queue.pop_front() {
                comp.insert(w);
                for x in self.neighbors(w) {
                    if !seen[x] {
                        seen[x] = true;
                        queue.push_back(x);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    /// Connected components with their exact diameters.
    pub fn components_and_diameters(&self) -> Vec<(VertexSet, usize)> {
        self.components()
            .into_iter()
            .map(|comp| {
                let mut diam = 0;
                for &u in &comp {
                    let dist = self.distances_from(u);
                    for &v in &comp {
                        diam = diam.max(dist[v]);
                    }
                }
                (comp, diam)
            })
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Exact tree-depth, with the single-vertex graph at depth 0. A
    /// disjoint union takes the maximum over its components. Self-loops
    /// are ignored.
    pub fn tree_depth(&self) -> Result<usize> {
        if self.n > TREE_DEPTH_CAP {
            return Err(Error::TooLarge(self.n, TREE_DEPTH_CAP));
        }
        let mut memo = HashMap::new();
        let all: Vec<usize> = (0..self.n).collect();
        Ok(self.tree_depth_rec(&all, &mut memo))
    }

    fn tree_depth_rec(&self, verts: &[usize], memo: &mut HashMap<u64, usize>) -> usize {
        if verts.len() == 1 {
            return 0;
        }
        let key = verts.iter().fold(0u64, |m, &v| m | (1 << v));
        if let Some(&d) = memo.get(&key) {
            return d;
        }
        let comps = split_components(self, verts);
        let depth = if comps.len() > 1 {
            comps.iter().map(|c| self.tree_depth_rec(c, memo)).max().unwrap()
        } else {
            verts
                .iter()
                .map(|&v| {
                    let rest: Vec<usize> = verts.iter().copied().filter(|&u| u != v).collect();
                    1 + self.tree_depth_rec(&rest, memo)
                })
                .min()
                .unwrap()
        };
        memo.insert(key, depth);
        depth
    }
}

/// Connected components of the subgraph induced by `verts`, in original ids.
pub(crate) fn split_components(g: &Graph, verts: &[usize]) -> Vec<Vec<usize>> {
    let inside: VertexSet = verts.iter().copied().collect();
    let mut seen = VertexSet::new();
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

/// The bipartite graph on the host vertex set whose edges are exactly the
/// non-edges of `g` between `a` and `b`. Vertices outside `a ∪ b` stay
/// isolated; no loops, no within-side edges.
pub fn bipartite_complement_between(g: &Graph, a: &VertexSet, b: &VertexSet) -> Result<Graph> {
    if a.intersection(b).next().is_some() {
        return Err(Error::OverlappingSides);
    }
    let mut out = Graph::new(g.vertex_count())?;
    for &u in a {
        g.check_vertex(u)?;
        for &v in b {
            g.check_vertex(v)?;
            if !g.adjacent(u, v) {
                out.set_edge(u, v, true);
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Semi-induced pattern detection
// ---------------------------------------------------------------------------

/// The patterns searched for between (or on) vertex sets. The bipartite
/// kinds quantify over two disjoint side sets; the clique and induced
/// matching kinds over a single vertex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PatternKind {
    CoMatching,
    HalfGraph,
    Biclique,
    InducedMatching,
    SemiInducedMatching,
    IrreflexiveClique,
}

impl PatternKind {
    pub const ALL: [PatternKind; 6] = [
        PatternKind::CoMatching,
        PatternKind::HalfGraph,
        PatternKind::Biclique,
        PatternKind::InducedMatching,
        PatternKind::SemiInducedMatching,
        PatternKind::IrreflexiveClique,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PatternKind::CoMatching => "co-matching",
            PatternKind::HalfGraph => "half-graph",
            PatternKind::Biclique => "biclique",
            PatternKind::InducedMatching => "induced-matching",
            PatternKind::SemiInducedMatching => "semi-induced-matching",
            PatternKind::IrreflexiveClique => "irreflexive-clique",
        }
    }

    pub fn parse(s: &str) -> Option<PatternKind> {
        PatternKind::ALL.iter().copied().find(|k| k.name() == s)
    }
}

/// An ordered occurrence of a pattern. For the bipartite kinds the sides
/// are aligned: `a_side[i]` pairs with `b_side[i]`. For irreflexive
/// cliques `b_side` is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternWitness {
    pub a_side: Vec<usize>,
    pub b_side: Vec<usize>,
}

/// Largest order of the pattern occurring (semi-)induced in `g`, with side
/// sets required pairwise disjoint; 0 if the pattern does not occur at all.
pub fn pattern_order(g: &Graph, kind: PatternKind) -> usize {
    let n = g.vertex_count();
    let max_t = match kind {
        PatternKind::IrreflexiveClique => n,
        _ => n / 2,
    };
    let mut best = 0;
    for t in 1..=max_t {
        if find_pattern(g, kind, t).is_some() {
            best = t;
        } else {
            break;
        }
    }
    best
}

/// The lexicographically least occurrence of the pattern of order `t`,
/// searching side sets in ascending subset order.
pub fn find_pattern(g: &Graph, kind: PatternKind, t: usize) -> Option<PatternWitness> {
    if t == 0 {
        return Some(PatternWitness { a_side: vec![], b_side: vec![] });
    }
    let n = g.vertex_count();
    match kind {
        PatternKind::IrreflexiveClique => {
            let mut found = None;
            for_subsets(n, t, &mut |s| {
                let ok = s.iter().all(|&v| !g.has_loop(v))
                    && pairs_all(s, |u, v| g.adjacent(u, v));
                if ok {
                    found = Some(PatternWitness { a_side: s.to_vec(), b_side: vec![] });
                }
                found.is_some()
            });
            found
        }
        _ => {
            let mut found = None;
            for_subsets(n, t, &mut |a| {
                let rest: Vec<usize> =
                    (0..n).filter(|v| !a.contains(v)).collect();
                for_subsets_of(&rest, t, &mut |b| {
                    if let Some(w) = check_sides(g, kind, a, b) {
                        found = Some(w);
                    }
                    found.is_some()
                });
                found.is_some()
            });
            found
        }
    }
}

/// Checks whether the bipartite graph semi-induced between `a` and `b`
/// realizes the pattern, returning the aligned witness if so.
fn check_sides(g: &Graph, kind: PatternKind, a: &[usize], b: &[usize]) -> Option<PatternWitness> {
    let t = a.len();
    match kind {
        PatternKind::Biclique => {
            let ok = a.iter().all(|&u| b.iter().all(|&v| g.adjacent(u, v)));
            ok.then(|| PatternWitness { a_side: a.to_vec(), b_side: b.to_vec() })
        }
        PatternKind::CoMatching => {
            // Exactly one non-neighbor on the other side for every vertex.
            let mut b_aligned = Vec::with_capacity(t);
            for &u in a {
                let missing: Vec<usize> =
                    b.iter().copied().filter(|&v| !g.adjacent(u, v)).collect();
                if missing.len() != 1 {
                    return None;
                }
                b_aligned.push(missing[0]);
            }
            let mut dedup = b_aligned.clone();
            dedup.sort_unstable();
            dedup.dedup();
            (dedup.len() == t)
                .then(|| PatternWitness { a_side: a.to_vec(), b_side: b_aligned })
        }
        PatternKind::SemiInducedMatching | PatternKind::InducedMatching => {
            let mut b_aligned = Vec::with_capacity(t);
            for &u in a {
                let hit: Vec<usize> =
                    b.iter().copied().filter(|&v| g.adjacent(u, v)).collect();
                if hit.len() != 1 {
                    return None;
                }
                b_aligned.push(hit[0]);
            }
            let mut dedup = b_aligned.clone();
            dedup.sort_unstable();
            dedup.dedup();
            if dedup.len() != t {
                return None;
            }
            if kind == PatternKind::InducedMatching {
                let indep = |s: &[usize]| pairs_all(s, |u, v| !g.adjacent(u, v));
                if !indep(a) || !indep(b) {
                    return None;
                }
            }
            Some(PatternWitness { a_side: a.to_vec(), b_side: b_aligned })
        }
        PatternKind::HalfGraph => {
            // Neighborhoods on the b side must form a strict chain with
            // sizes t, t-1, ..., 1 once the a side is ordered accordingly.
            let mut rows: Vec<(usize, Vec<usize>)> = a
                .iter()
                .map(|&u| {
                    let nb: Vec<usize> =
                        b.iter().copied().filter(|&v| g.adjacent(u, v)).collect();
                    (u, nb)
                })
                .collect();
            rows.sort_by(|x, y| y.1.len().cmp(&x.1.len()).then(x.0.cmp(&y.0)));
            for (i, (_, nb)) in rows.iter().enumerate() {
                if nb.len() != t - i {
                    return None;
                }
            }
            for w in rows.windows(2) {
                if !w[1].1.iter().all(|v| w[0].1.contains(v)) {
                    return None;
                }
            }
            // Row j has neighborhood {b_{j+1}, ..., b_t}; the neighbor it
            // gains over row j+1 is b_{j+1}.
            let mut b_aligned = Vec::with_capacity(t);
            for j in 0..t {
                let cur = &rows[j].1;
                let next: &[usize] = if j + 1 < t { &rows[j + 1].1 } else { &[] };
                let fresh: Vec<usize> =
                    cur.iter().copied().filter(|v| !next.contains(v)).collect();
                if fresh.len() != 1 {
                    return None;
                }
                b_aligned.push(fresh[0]);
            }
            let a_aligned: Vec<usize> = rows.iter().map(|(u, _)| *u).collect();
            debug_assert!(is_half_graph(g, &a_aligned, &b_aligned));
            Some(PatternWitness { a_side: a_aligned, b_side: b_aligned })
        }
        PatternKind::IrreflexiveClique => unreachable!(),
    }
}

fn is_half_graph(g: &Graph, a: &[usize], b: &[usize]) -> bool {
    a.iter().enumerate().all(|(i, &u)| {
        b.iter().enumerate().all(|(j, &v)| g.adjacent(u, v) == (i <= j))
    })
}

fn pairs_all(s: &[usize], mut f: impl FnMut(usize, usize) -> bool) -> bool {
    for (i, &u) in s.iter().enumerate() {
        for &v in &s[i + 1..] {
            if !f(u, v) {
                return false;
            }
        }
    }
    true
}

/// Visits the size-`t` subsets of `0..n` in lexicographic order until the
/// callback returns true.
pub(crate) fn for_subsets(n: usize, t: usize, f: &mut impl FnMut(&[usize]) -> bool) {
    let all: Vec<usize> = (0..n).collect();
    for_subsets_of(&all, t, f);
}

pub(crate) fn for_subsets_of(pool: &[usize], t: usize, f: &mut impl FnMut(&[usize]) -> bool) {
    fn rec(
        pool: &[usize],
        t: usize,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut impl FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == t {
            return f(cur);
        }
        for i in start..pool.len() {
            if pool.len() - i < t - cur.len() {
                break;
            }
            cur.push(pool[i]);
            if rec(pool, t, i + 1, cur, f) {
                cur.pop();
                return true;
            }
            cur.pop();
        }
        false
    }
    if t <= pool.len() {
        rec(pool, t, 0, &mut Vec::new(), f);
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// A star or clique r-crossing together with its layer structure
/// `L_0, ..., L_{r+1}`.
#[derive(Debug, Clone)]
pub struct CrossingLayers {
    pub graph: Graph,
    pub layers: Vec<VertexSet>,
    pub order: usize,
    pub radius: usize,
}

/// Generators for the stock graphs. All outputs are irreflexive; use
/// [`Graph::with_all_loops`] for reflexive variants.
pub mod gen {
    use super::*;

    pub fn clique(n: usize) -> Result<Graph> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let mut g = Graph::new(n)?;
        for u in 0..n {
            for v in (u + 1)..n {
                g.set_edge(u, v, true);
            }
        }
        Ok(g)
    }

    pub fn independent(n: usize) -> Result<Graph> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        Graph::new(n)
    }

    pub fn path(n: usize) -> Result<Graph> {
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let mut g = Graph::new(n)?;
        for v in 1..n {
            g.set_edge(v - 1, v, true);
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Result<Graph> {
        if n < 3 {
            return Err(Error::ZeroOrder);
        }
        let mut g = path(n)?;
        g.set_edge(n - 1, 0, true);
        Ok(g)
    }

    /// Sides `a_i = i-1` and `b_j = t+j-1` with `a_i b_j` an edge iff `i ≠ j`.
    pub fn co_matching(t: usize) -> Result<Graph> {
        if t == 0 {
            return Err(Error::ZeroOrder);
        }
        let mut g = Graph::new(2 * t)?;
        for i in 0..t {
            for j in 0..t {
                if i != j {
                    g.set_edge(i, t + j, true);
                }
            }
        }
        Ok(g)
    }

    /// Sides as in [`co_matching`] with `a_i b_j` an edge iff `i ≤ j`.
    pub fn half_graph(t: usize) -> Result<Graph> {
        if t == 0 {
            return Err(Error::ZeroOrder);
        }
        let mut g = Graph::new(2 * t)?;
        for i in 0..t {
            for j in i..t {
                g.set_edge(i, t + j, true);
            }
        }
        Ok(g)
    }

    pub fn biclique(t: usize) -> Result<Graph> {
        if t == 0 {
            return Err(Error::ZeroOrder);
        }
        let mut g = Graph::new(2 * t)?;
        for i in 0..t {
            for j in 0..t {
                g.set_edge(i, t + j, true);
            }
        }
        Ok(g)
    }

    /// The r-subdivision of the order-t biclique: roots `a_1..a_t`
    /// (ids `0..t`) and `b_1..b_t` (ids `t..2t`), plus t² paths of r
    /// vertices laid out layer-major after the roots.
    pub fn star_crossing(r: usize, t: usize) -> Result<CrossingLayers> {
        crossing(r, t, false)
    }

    /// The star r-crossing with the neighborhood of each root turned into
    /// a clique.
    pub fn clique_crossing(r: usize, t: usize) -> Result<CrossingLayers> {
        crossing(r, t, true)
    }

    fn crossing(r: usize, t: usize, cliques: bool) -> Result<CrossingLayers> {
        if r == 0 || t == 0 {
            return Err(Error::ZeroOrder);
        }
        let n = 2 * t + r * t * t;
        let mut g = Graph::new(n)?;
        // Position l (1-based) of the path from a_{i+1} to b_{j+1}.
        let path_vertex = |l: usize, i: usize, j: usize| 2 * t + (l - 1) * t * t + i * t + j;
        for i in 0..t {
            for j in 0..t {
                for l in 1..r {
                    g.set_edge(path_vertex(l, i, j), path_vertex(l + 1, i, j), true);
                }
                g.set_edge(i, path_vertex(1, i, j), true);
                g.set_edge(t + j, path_vertex(r, i, j), true);
            }
        }
        if cliques {
            for i in 0..t {
                let starts: Vec<usize> = (0..t).map(|j| path_vertex(1, i, j)).collect();
                for (x, &u) in starts.iter().enumerate() {
                    for &v in &starts[x + 1..] {
                        g.set_edge(u, v, true);
                    }
                }
            }
            for j in 0..t {
                let ends: Vec<usize> = (0..t).map(|i| path_vertex(r, i, j)).collect();
                for (x, &u) in ends.iter().enumerate() {
                    for &v in &ends[x + 1..] {
                        g.set_edge(u, v, true);
                    }
                }
            }
        }
        let mut layers = Vec::with_capacity(r + 2);
        layers.push((0..t).collect::<VertexSet>());
        for l in 1..=r {
            layers.push((0..t).flat_map(|i| (0..t).map(move |j| path_vertex(l, i, j))).collect());
        }
        layers.push((t..2 * t).collect::<VertexSet>());
        Ok(CrossingLayers { graph: g, layers, order: t, radius: r })
    }
}
