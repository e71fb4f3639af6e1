//! Approximating arbitrary flips by subflips: the refinement construction
//! and its distance guarantee, plus the matching/diameter analysis that
//! feeds it.

use std::collections::BTreeMap;

use crate::enumerate::symmetric_relations;
use crate::error::{Error, Result};
use crate::flip::{flip, subflip, FlipSpec};
use crate::graph::{bipartite_complement_between, Graph, PatternKind, VertexSet};
use crate::partition::Partition;

/// Component statistics driving the diameter bound: the number of
/// connected components of size at least 2 and the largest diameter
/// among them (0 if there are none).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingDiameterReport {
    pub big_components: usize,
    pub max_diameter: usize,
}

pub fn matching_diameter_report(g: &Graph) -> MatchingDiameterReport {
    let mut big = 0;
    let mut max_diam = 0;
    for (comp, diam) in g.components_and_diameters() {
        if comp.len() >= 2 {
            big += 1;
            max_diam = max_diam.max(diam);
        }
    }
    MatchingDiameterReport { big_components: big, max_diameter: max_diam }
}

/// The refinement produced for a partition on a graph of co-matching-index
/// below `t`, together with the per-pair part splits that built it.
#[derive(Debug, Clone)]
pub struct TransferResult {
    pub refinement: Partition,
    /// Ordered pairs of part ids of the input partition, mapped to the
    /// split of the first part (vertex sets in host ids).
    pub per_pair_parts: BTreeMap<(usize, usize), Vec<Vec<usize>>>,
    pub t: usize,
    pub k: usize,
}

/// Refines `p` so that the subflip by the refinement only keeps edges that
/// stay short in every `p`-flip: an edge of `G ⊖ Q` has distance below
/// `3t` in every flip `H = G ⊕ (p, F)`.
///
/// Set `validate` to also check the co-matching precondition (expensive).
pub fn transfer_refinement(
    g: &Graph,
    p: &Partition,
    t: usize,
    validate: bool,
) -> Result<TransferResult> {
    if t == 0 {
        return Err(Error::ZeroOrder);
    }
    if p.host_size() != g.vertex_count() {
        return Err(Error::SizeMismatch(p.host_size(), g.vertex_count()));
    }
    if validate && crate::graph::pattern_order(g, PatternKind::CoMatching) >= t {
        return Err(Error::CoMatchingTooLarge(t));
    }
    let n = g.vertex_count();
    let k = p.len();
    let mut per_pair_parts = BTreeMap::new();
    let mut refinement = p.clone();
    for a in 0..k {
        let part_a: VertexSet = p.part(a).iter().copied().collect();
        for b in 0..k {
            let complement = if a == b {
                // Complement of G[P] on the host vertex set.
                let mut c = Graph::new(n)?;
                for &u in &part_a {
                    for &v in &part_a {
                        if u < v && !g.adjacent(u, v) {
                            c.set_edge(u, v, true);
                        }
                    }
                }
                c
            } else {
                let part_b: VertexSet = p.part(b).iter().copied().collect();
                bipartite_complement_between(g, &part_a, &part_b)?
            };
            let split = split_part(&complement, &part_a);
            let lifted = lift_split(n, &part_a, &split)?;
            refinement = refinement.refine(&lifted)?;
            per_pair_parts.insert((a, b), split);
        }
    }
    Ok(TransferResult { refinement, per_pair_parts, t, k })
}

/// Splits `part` into the vertices isolated in `complement` plus one block
/// per size-2-or-larger component of `complement`, intersected with the part.
fn split_part(complement: &Graph, part: &VertexSet) -> Vec<Vec<usize>> {
    let mut split = Vec::new();
    let isolated: Vec<usize> = part
        .iter()
        .copied()
        .filter(|&v| complement.neighbors(v).next().is_none())
        .collect();
    if !isolated.is_empty() {
        split.push(isolated);
    }
    for comp in complement.components() {
        if comp.len() < 2 {
            continue;
        }
        let block: Vec<usize> = comp.iter().copied().filter(|v| part.contains(v)).collect();
        if !block.is_empty() {
            split.push(block);
        }
    }
    split
}

fn lift_split(n: usize, part: &VertexSet, split: &[Vec<usize>]) -> Result<Partition> {
    let mut parts: Vec<Vec<usize>> = split.to_vec();
    let rest: Vec<usize> = (0..n).filter(|v| !part.contains(v)).collect();
    if !rest.is_empty() {
        parts.push(rest);
    }
    Partition::from_parts(n, parts)
}

/// Relations with more part pairs than this are sampled instead of
/// enumerated.
const EXHAUSTIVE_PART_CAP: usize = 3;
const SAMPLED_RELATIONS: usize = 500;

/// Checks the distance guarantee of the refinement against every flip of
/// the input partition (all symmetric relations for up to 3 parts, 500
/// seeded samples beyond), plus the ball-containment consequence for
/// radii 1 and 2. Returns false only if a guarantee is violated.
pub fn verify_transfer(g: &Graph, p: &Partition, result: &TransferResult) -> Result<bool> {
    let sub = subflip(g, &result.refinement)?;
    let bound = 3 * result.t;
    let relations: Vec<Vec<(usize, usize)>> = if p.len() <= EXHAUSTIVE_PART_CAP {
        symmetric_relations(p.len())
    } else {
        sample_relations(p.len(), SAMPLED_RELATIONS)
    };
    for pairs in relations {
        let spec = FlipSpec::new(p.clone(), &pairs)?;
        let h = flip(g, &spec)?;
        for (u, v) in sub.edges() {
            match h.distance(u, v)? {
                Some(d) if d < bound => {}
                _ => return Ok(false),
            }
        }
        for v in g.vertices() {
            let dist_sub = sub.distances_from(v);
            let dist_h = h.distances_from(v);
            for r in [1usize, 2] {
                for u in g.vertices() {
                    if dist_sub[u] <= r && !(dist_h[u] <= bound * r) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

fn sample_relations(k: usize, count: usize) -> Vec<Vec<(usize, usize)>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5f1b);
    let mut pairs = Vec::new();
    for a in 0..k {
        for b in a..k {
            pairs.push((a, b));
        }
    }
    (0..count)
        .map(|_| pairs.iter().copied().filter(|_| rng.gen_bool(0.5)).collect())
        .collect()
}
