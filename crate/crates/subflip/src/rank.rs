//! Exact solvers for flipper- and subflipper-rank (radius `∞` gives
//! flip-depth and subflip-depth), SC-depth, the budget recursion, flatness
//! witness search, and labeled subflip search.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::enumerate::{partitions, symmetric_relations};
use crate::error::{Error, Result};
use crate::flip::{flip, subflip, FlipSpec};
use crate::graph::{split_components, Graph};
use crate::partition::Partition;

/// A localization radius; `Infinite` replaces balls by connected
/// components in the rank recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Radius {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlipMode {
    Flip,
    Subflip,
}

#[derive(Debug, Clone, Copy)]
pub struct RankQuery {
    pub radius: Radius,
    pub budget: usize,
    pub mode: FlipMode,
}

/// Instance-size caps for the exponential solvers. Budgets larger than the
/// vertex count are clamped to it (a partition cannot have more parts).
#[derive(Debug, Clone, Copy)]
pub struct RankLimits {
    pub max_vertices_flip: usize,
    pub max_vertices_subflip: usize,
    /// Ranks above this value are reported as an error; the literal
    /// recursion has no finite value on some instances.
    pub depth_cap: usize,
}

impl Default for RankLimits {
    fn default() -> Self {
        RankLimits { max_vertices_flip: 5, max_vertices_subflip: 8, depth_cap: 12 }
    }
}

pub fn rank(g: &Graph, q: &RankQuery) -> Result<usize> {
    rank_with_limits(g, q, &RankLimits::default())
}

/// Exact (sub)flipper-rank by depth-bounded search with memoization on the
/// labeled graph state.
pub fn rank_with_limits(g: &Graph, q: &RankQuery, limits: &RankLimits) -> Result<usize> {
    if q.budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let cap = match q.mode {
        FlipMode::Flip => limits.max_vertices_flip,
        FlipMode::Subflip => limits.max_vertices_subflip,
    };
    if g.vertex_count() > cap {
        return Err(Error::TooLarge(g.vertex_count(), cap));
    }
    let mut memo = HashMap::new();
    for d in 0..=limits.depth_cap {
        if can_reduce(g, d, q, &mut memo)? {
            return Ok(d);
        }
    }
    Err(Error::DepthCapExceeded(limits.depth_cap))
}

/// Whether the graph can be brought down to single vertices within `d`
/// rounds of flip-then-localize.
fn can_reduce(
    g: &Graph,
    d: usize,
    q: &RankQuery,
    memo: &mut HashMap<(Graph, usize), bool>,
) -> Result<bool> {
    let n = g.vertex_count();
    if n == 1 {
        return Ok(true);
    }
    if d == 0 {
        return Ok(false);
    }
    if let Some(&known) = memo.get(&(g.clone(), d)) {
        return Ok(known);
    }
    let mut winnable = false;
    'outer: for p in partitions(n, q.budget.min(n)) {
        let candidates: Vec<Graph> = match q.mode {
            FlipMode::Subflip => vec![subflip(g, &p)?],
            FlipMode::Flip => {
                let mut out = Vec::new();
                for pairs in symmetric_relations(p.len()) {
                    out.push(flip(g, &FlipSpec::new(p.clone(), &pairs)?)?);
                }
                out
            }
        };
        for h in candidates {
            let mut all_good = true;
            for sub in sub_instances(&h, q.radius)? {
                if !can_reduce(&sub, d - 1, q, memo)? {
                    all_good = false;
                    break;
                }
            }
            if all_good {
                winnable = true;
                break 'outer;
            }
        }
    }
    memo.insert((g.clone(), d), winnable);
    Ok(winnable)
}

/// The arenas the localizer can move to: all closed balls for a finite
/// radius, the connected components for radius `∞`. Deduplicated.
fn sub_instances(h: &Graph, radius: Radius) -> Result<Vec<Graph>> {
    let mut out: Vec<Graph> = Vec::new();
    match radius {
        Radius::Finite(r) => {
            for v in h.vertices() {
                let (_, ball) = h.ball(r, v)?;
                if !out.contains(&ball) {
                    out.push(ball);
                }
            }
        }
        Radius::Infinite => {
            for comp in h.components() {
                let verts: Vec<usize> = comp.iter().copied().collect();
                let sub = h.induced(&verts)?;
                if !out.contains(&sub) {
                    out.push(sub);
                }
            }
        }
    }
    Ok(out)
}

const SC_DEPTH_MAX_N: usize = 5;

pub fn sc_depth(g: &Graph) -> Result<usize> {
    sc_depth_with_cap(g, SC_DEPTH_MAX_N)
}

/// Exact SC-depth: like flip-depth but the moves complement the edges
/// inside an arbitrary vertex subset.
pub fn sc_depth_with_cap(g: &Graph, max_n: usize) -> Result<usize> {
    if g.vertex_count() > max_n {
        return Err(Error::TooLarge(g.vertex_count(), max_n));
    }
    let mut memo = HashMap::new();
    for d in 0..=(g.edge_count() + 1) {
        if sc_can_reduce(g, d, &mut memo)? {
            return Ok(d);
        }
    }
    Err(Error::DepthCapExceeded(g.edge_count() + 1))
}

fn sc_can_reduce(g: &Graph, d: usize, memo: &mut HashMap<(Graph, usize), bool>) -> Result<bool> {
    let n = g.vertex_count();
    if n == 1 {
        return Ok(true);
    }
    if d == 0 {
        return Ok(false);
    }
    if let Some(&known) = memo.get(&(g.clone(), d)) {
        return Ok(known);
    }
    let mut winnable = false;
    'outer: for mask in 1u64..(1 << n) {
        let mut h = g.clone();
        for u in 0..n {
            for v in (u + 1)..n {
                if mask >> u & 1 == 1 && mask >> v & 1 == 1 {
                    h.toggle_edge(u, v);
                }
            }
        }
        let mut all_good = true;
        for sub in sub_instances(&h, Radius::Infinite)? {
            if !sc_can_reduce(&sub, d - 1, memo)? {
                all_good = false;
                break;
            }
        }
        if all_good {
            winnable = true;
            break 'outer;
        }
    }
    memo.insert((g.clone(), d), winnable);
    Ok(winnable)
}

/// Practical guard: exponents beyond this many bits are refused rather
/// than computed.
const BOUND_F_EXPONENT_CAP: u64 = 1 << 22;

/// The budget recursion: `f(t,m,k,0) = m` and
/// `f(t,m,k,d+1) = f(t, m·k·t^(m·k), m·k²·t^(m·k), d)`, evaluated exactly
/// in arbitrary precision.
pub fn bound_f(t: u64, m: u64, k: u64, d: u32) -> Result<BigUint> {
    if t == 0 || m == 0 || k == 0 {
        return Err(Error::ZeroOrder);
    }
    let t = BigUint::from(t);
    let mut m = BigUint::from(m);
    let mut k = BigUint::from(k);
    for _ in 0..d {
        let exponent = &m * &k;
        let exponent: u64 = exponent
            .try_into()
            .ok()
            .filter(|&e| e <= BOUND_F_EXPONENT_CAP)
            .ok_or(Error::TooLarge(usize::MAX, BOUND_F_EXPONENT_CAP as usize))?;
        let power = t.pow(exponent as u32);
        let new_m = &m * &k * &power;
        let new_k = &m * &k * &k * &power;
        m = new_m;
        k = new_k;
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy)]
pub struct FlatnessQuery {
    pub radius: Radius,
    pub budget: usize,
    pub target: usize,
    pub tuple_len: usize,
    pub mode: FlipMode,
}

/// A selection of tuples pairwise far apart in the flipped graph, plus
/// the flip that separates them.
#[derive(Debug, Clone)]
pub struct FlatnessWitness {
    pub selected: Vec<Vec<usize>>,
    pub partition: Partition,
    /// Part pairs of the flip relation; `None` in subflip mode.
    pub relation: Option<Vec<(usize, usize)>>,
}

/// Searches for `target` many tuples from `w` and a flip within budget
/// putting them at pairwise tuple distance greater than the radius.
/// Returns the lexicographically least witness, or `None` after
/// exhausting selections and flips.
pub fn flat_witness(g: &Graph, w: &[Vec<usize>], q: &FlatnessQuery) -> Result<Option<FlatnessWitness>> {
    if q.budget == 0 {
        return Err(Error::ZeroBudget);
    }
    for tuple in w {
        if tuple.len() != q.tuple_len {
            return Err(Error::TupleLengthMismatch(q.tuple_len, tuple.len()));
        }
        for &v in tuple {
            if v >= g.vertex_count() {
                return Err(Error::VertexOutOfRange(v, g.vertex_count()));
            }
        }
    }
    if q.tuple_len > 1 {
        for (i, a) in w.iter().enumerate() {
            for b in &w[i + 1..] {
                if a.iter().any(|x| b.contains(x)) {
                    return Err(Error::NonDisjointTuples);
                }
            }
        }
    }
    if q.target > w.len() {
        return Ok(None);
    }
    let n = g.vertex_count();
    let parts_list = partitions(n, q.budget.min(n));
    let mut result = None;
    crate::graph::for_subsets(w.len(), q.target, &mut |selection| {
        let tuples: Vec<&Vec<usize>> = selection.iter().map(|&i| &w[i]).collect();
        'parts: for p in &parts_list {
            match q.mode {
                FlipMode::Subflip => {
                    let h = subflip(g, p).expect("hosts match");
                    if tuples_separated(&h, &tuples, q.radius) {
                        result = Some(FlatnessWitness {
                            selected: tuples.iter().map(|t| (*t).clone()).collect(),
                            partition: p.clone(),
                            relation: None,
                        });
                        break 'parts;
                    }
                }
                FlipMode::Flip => {
                    for pairs in symmetric_relations(p.len()) {
                        let spec = FlipSpec::new(p.clone(), &pairs).expect("valid parts");
                        let h = flip(g, &spec).expect("hosts match");
                        if tuples_separated(&h, &tuples, q.radius) {
                            result = Some(FlatnessWitness {
                                selected: tuples.iter().map(|t| (*t).clone()).collect(),
                                partition: p.clone(),
                                relation: Some(pairs),
                            });
                            break 'parts;
                        }
                    }
                }
            }
        }
        result.is_some()
    });
    Ok(result)
}

/// Tuple distance is the minimum over coordinate pairs; separation means
/// it exceeds the radius (different components for radius `∞`).
fn tuples_separated(h: &Graph, tuples: &[&Vec<usize>], radius: Radius) -> bool {
    for (i, a) in tuples.iter().enumerate() {
        for b in &tuples[i + 1..] {
            for &u in a.iter() {
                let dist = h.distances_from(u);
                for &v in b.iter() {
                    match radius {
                        Radius::Finite(r) => {
                            if dist[v] <= r {
                                return false;
                            }
                        }
                        Radius::Infinite => {
                            if dist[v] != usize::MAX {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// First partition (in enumeration order) with at most `k` parts whose
/// subflip of `g` equals `h` exactly, or `None`.
pub fn labeled_subflip_search(g: &Graph, h: &Graph, k: usize) -> Result<Option<Partition>> {
    if g.vertex_count() != h.vertex_count() {
        return Err(Error::VertexSetMismatch(g.vertex_count(), h.vertex_count()));
    }
    if k == 0 {
        return Err(Error::ZeroBudget);
    }
    let n = g.vertex_count();
    for p in partitions(n, k.min(n)) {
        if subflip(g, &p)? == *h {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// Components of `g` as relabeled graphs (ascending by minimum vertex).
pub fn component_graphs(g: &Graph) -> Vec<Graph> {
    split_components(g, &(0..g.vertex_count()).collect::<Vec<_>>())
        .iter()
        .map(|verts| g.induced(verts).expect("component vertices valid"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen;
    use crate::graph::VertexSet;

    fn q(radius: Radius, budget: usize, mode: FlipMode) -> RankQuery {
        RankQuery { radius, budget, mode }
    }

    #[test]
    fn single_vertex_has_rank_zero() {
        let k1 = gen::independent(1).unwrap();
        for mode in [FlipMode::Flip, FlipMode::Subflip] {
            for radius in [Radius::Finite(1), Radius::Finite(3), Radius::Infinite] {
                assert_eq!(rank(&k1, &q(radius, 1, mode)).unwrap(), 0);
            }
        }
    }

    #[test]
    fn two_disjoint_edges() {
        let g = Graph::build(4, &[(0, 1), (2, 3)], &VertexSet::new()).unwrap();
        assert_eq!(rank(&g, &q(Radius::Finite(3), 2, FlipMode::Subflip)).unwrap(), 1);
    }

    #[test]
    fn path_subflip_depth() {
        let p4 = gen::path(4).unwrap();
        assert_eq!(rank(&p4, &q(Radius::Infinite, 2, FlipMode::Subflip)).unwrap(), 2);
    }

    #[test]
    fn budget_monotonicity_small() {
        for g in crate::enumerate::all_graphs(4) {
            for radius in [Radius::Finite(2), Radius::Infinite] {
                let r1 = rank(&g, &q(radius, 1, FlipMode::Subflip));
                let r2 = rank(&g, &q(radius, 2, FlipMode::Subflip)).unwrap();
                if let Ok(r1) = r1 {
                    assert!(r2 <= r1, "budget monotonicity failed on {g:?}");
                }
            }
        }
    }

    #[test]
    fn flip_rank_at_most_subflip_rank() {
        for g in crate::enumerate::all_graphs(4) {
            let fr = rank(&g, &q(Radius::Finite(2), 2, FlipMode::Flip)).unwrap();
            let sr = rank(&g, &q(Radius::Finite(2), 2, FlipMode::Subflip));
            if let Ok(sr) = sr {
                assert!(fr <= sr, "mode order failed on {g:?}");
            }
        }
    }

    #[test]
    fn zero_budget_rejected() {
        let g = gen::path(2).unwrap();
        assert!(matches!(rank(&g, &q(Radius::Finite(1), 0, FlipMode::Flip)), Err(Error::ZeroBudget)));
    }

    #[test]
    fn sc_depth_examples() {
        assert_eq!(sc_depth(&gen::independent(1).unwrap()).unwrap(), 0);
        for n in 2..=5 {
            assert_eq!(sc_depth(&gen::clique(n).unwrap()).unwrap(), 1);
        }
        assert_eq!(sc_depth(&gen::path(4).unwrap()).unwrap(), 2);
    }

    #[test]
    fn bound_f_examples() {
        assert_eq!(bound_f(2, 7, 3, 0).unwrap(), BigUint::from(7u32));
        assert_eq!(bound_f(2, 1, 2, 1).unwrap(), BigUint::from(8u32));
        assert_eq!(bound_f(2, 1, 2, 2).unwrap(), BigUint::from(2u32).pow(135));
    }

    #[test]
    fn flatness_already_separated() {
        let g = gen::independent(3).unwrap();
        let w: Vec<Vec<usize>> = (0..3).map(|v| vec![v]).collect();
        let fq = FlatnessQuery {
            radius: Radius::Finite(5),
            budget: 1,
            target: 3,
            tuple_len: 1,
            mode: FlipMode::Subflip,
        };
        let witness = flat_witness(&g, &w, &fq).unwrap().unwrap();
        assert_eq!(witness.selected, w);
        assert_eq!(witness.partition, Partition::whole(3).unwrap());
    }

    #[test]
    fn flatness_blocked_on_co_matching() {
        let g = gen::co_matching(3).unwrap();
        let w: Vec<Vec<usize>> = vec![vec![0], vec![1], vec![2]];
        let fq = FlatnessQuery {
            radius: Radius::Finite(2),
            budget: 1,
            target: 2,
            tuple_len: 1,
            mode: FlipMode::Subflip,
        };
        assert!(flat_witness(&g, &w, &fq).unwrap().is_none());
    }

    #[test]
    fn flatness_with_tuples() {
        // Each tuple takes one endpoint from each of the two edges.
        let g = Graph::build(4, &[(0, 1), (2, 3)], &VertexSet::new()).unwrap();
        let w: Vec<Vec<usize>> = vec![vec![0, 2], vec![1, 3]];
        let fq = FlatnessQuery {
            radius: Radius::Infinite,
            budget: 2,
            target: 2,
            tuple_len: 2,
            mode: FlipMode::Subflip,
        };
        let witness = flat_witness(&g, &w, &fq).unwrap().unwrap();
        let expected = Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert_eq!(witness.partition, expected);
    }

    #[test]
    fn labeled_search_examples() {
        let k2 = gen::clique(2).unwrap();
        let found = labeled_subflip_search(&k2, &gen::independent(2).unwrap(), 1).unwrap();
        assert_eq!(found, Some(Partition::whole(2).unwrap()));

        let two_k2 = Graph::build(4, &[(0, 1), (2, 3)], &VertexSet::new()).unwrap();
        let found = labeled_subflip_search(&two_k2, &two_k2, 1).unwrap();
        assert_eq!(found, Some(Partition::whole(4).unwrap()));

        let target = Graph::build(4, &[(0, 1)], &VertexSet::new()).unwrap();
        assert_eq!(labeled_subflip_search(&two_k2, &target, 2).unwrap(), None);
    }
}
