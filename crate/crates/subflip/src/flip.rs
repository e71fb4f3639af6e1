//! Flips `G ⊕ (P,F)`, subflips `G ⊖ P`, pure flips, and mediator
//! similarity.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::partition::Partition;

/// A partition together with a symmetric relation over its parts, stored
/// as canonical `(min, max)` part-id pairs. A part may pair with itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipSpec {
    pub partition: Partition,
    pub relation: BTreeSet<(usize, usize)>,
}

impl FlipSpec {
    pub fn new(partition: Partition, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut relation = BTreeSet::new();
        for &(a, b) in pairs {
            if a >= partition.len() {
                return Err(Error::PartOutOfRange(a, partition.len()));
            }
            if b >= partition.len() {
                return Err(Error::PartOutOfRange(b, partition.len()));
            }
            relation.insert((a.min(b), a.max(b)));
        }
        Ok(FlipSpec { partition, relation })
    }

    pub fn related(&self, a: usize, b: usize) -> bool {
        self.relation.contains(&(a.min(b), a.max(b)))
    }
}

fn check_hosts(g: &Graph, p: &Partition) -> Result<()> {
    if p.host_size() != g.vertex_count() {
        return Err(Error::SizeMismatch(p.host_size(), g.vertex_count()));
    }
    Ok(())
}

/// `G ⊕ (P,F)`: complements the edges between distinct vertices whose
/// parts are related; self-loops are preserved.
pub fn flip(g: &Graph, spec: &FlipSpec) -> Result<Graph> {
    check_hosts(g, &spec.partition)?;
    let mut out = g.clone();
    for u in 0..g.vertex_count() {
        for v in (u + 1)..g.vertex_count() {
            if spec.related(spec.partition.part_of(u), spec.partition.part_of(v)) {
                out.toggle_edge(u, v);
            }
        }
    }
    Ok(out)
}

/// Whether every two distinct vertices `a ∈ A`, `b ∈ B` are adjacent.
/// With `A = B` this is the clique test. Self-loops are irrelevant.
pub fn fully_adjacent(g: &Graph, a: &VertexSet, b: &VertexSet) -> Result<bool> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    for &u in a {
        for &v in b {
            if u != v && !g.adjacent(u, v) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The flip relation that removes the most edges: exactly the fully
/// adjacent part pairs of `p` in `g`.
pub fn max_flip_relation(g: &Graph, p: &Partition) -> Result<FlipSpec> {
    check_hosts(g, p)?;
    let mut pairs = Vec::new();
    for a in 0..p.len() {
        for b in a..p.len() {
            let sa: VertexSet = p.part(a).iter().copied().collect();
            let sb: VertexSet = p.part(b).iter().copied().collect();
            if fully_adjacent(g, &sa, &sb)? {
                pairs.push((a, b));
            }
        }
    }
    FlipSpec::new(p.clone(), &pairs)
}

/// `G ⊖ P`, always a subgraph of `G`.
pub fn subflip(g: &Graph, p: &Partition) -> Result<Graph> {
    flip(g, &max_flip_relation(g, p)?)
}

/// Whether every related pair is fully adjacent or fully non-adjacent in `g`.
pub fn is_pure_flip(g: &Graph, spec: &FlipSpec) -> Result<bool> {
    check_hosts(g, &spec.partition)?;
    for &(a, b) in &spec.relation {
        let sa: VertexSet = spec.partition.part(a).iter().copied().collect();
        let sb: VertexSet = spec.partition.part(b).iter().copied().collect();
        if !fully_adjacent(g, &sa, &sb)? && !fully_non_adjacent(g, &sa, &sb) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn fully_non_adjacent(g: &Graph, a: &VertexSet, b: &VertexSet) -> bool {
    a.iter().all(|&u| b.iter().all(|&v| u == v || !g.adjacent(u, v)))
}

/// The result of composing two flips into a single flip over the common
/// refinement: a refined pair is related iff an odd number of the two
/// original specs relate its covering coarse pairs.
pub fn compose_flips(spec1: &FlipSpec, spec2: &FlipSpec) -> Result<FlipSpec> {
    let refined = spec1.partition.refine(&spec2.partition)?;
    let mut pairs = Vec::new();
    for a in 0..refined.len() {
        for b in a..refined.len() {
            let u = refined.part(a)[0];
            let v = refined.part(b)[0];
            let in1 = spec1.related(spec1.partition.part_of(u), spec1.partition.part_of(v));
            let in2 = spec2.related(spec2.partition.part_of(u), spec2.partition.part_of(v));
            if in1 != in2 {
                pairs.push((a, b));
            }
        }
    }
    FlipSpec::new(refined, &pairs)
}

/// The mediator partition and the common subflip certifying that two
/// graphs are `M`-similar.
#[derive(Debug, Clone)]
pub struct SimilarityWitness {
    pub mediator: Partition,
    pub common: Graph,
}

/// Checks `G₁ ⊖ M = G₂ ⊖ M` and returns the witness if the subflips are
/// labeled-equal.
pub fn m_similar(g1: &Graph, g2: &Graph, mediator: &Partition) -> Result<Option<SimilarityWitness>> {
    if g1.vertex_count() != g2.vertex_count() {
        return Err(Error::VertexSetMismatch(g1.vertex_count(), g2.vertex_count()));
    }
    let s1 = subflip(g1, mediator)?;
    let s2 = subflip(g2, mediator)?;
    if s1 == s2 {
        Ok(Some(SimilarityWitness { mediator: mediator.clone(), common: s1 }))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen;

    fn k2() -> Graph {
        gen::clique(2).unwrap()
    }

    fn two_k2() -> Graph {
        Graph::build(4, &[(0, 1), (2, 3)], &VertexSet::new()).unwrap()
    }

    #[test]
    fn empty_relation_is_identity() {
        let g = gen::path(4).unwrap();
        let spec = FlipSpec::new(Partition::whole(4).unwrap(), &[]).unwrap();
        assert_eq!(flip(&g, &spec).unwrap(), g);
    }

    #[test]
    fn single_complement() {
        let spec = FlipSpec::new(Partition::singletons(2).unwrap(), &[(0, 1)]).unwrap();
        assert_eq!(flip(&k2(), &spec).unwrap(), gen::independent(2).unwrap());
    }

    #[test]
    fn flip_is_involutive() {
        let g = Graph::build(5, &[(0, 2), (1, 4), (2, 3)], &VertexSet::from([1])).unwrap();
        let p = Partition::from_parts(5, vec![vec![0, 3], vec![1, 2, 4]]).unwrap();
        let spec = FlipSpec::new(p, &[(0, 0), (0, 1)]).unwrap();
        let h = flip(&g, &spec).unwrap();
        assert_ne!(h, g);
        assert_eq!(flip(&h, &spec).unwrap(), g);
    }

    #[test]
    fn fully_adjacent_cases() {
        let g = k2();
        let v0 = VertexSet::from([0]);
        let both = VertexSet::from([0, 1]);
        assert!(fully_adjacent(&g, &v0, &v0).unwrap());
        assert!(fully_adjacent(&g, &both, &both).unwrap());
        let cm = gen::co_matching(2).unwrap();
        let a = VertexSet::from([0, 1]);
        let b = VertexSet::from([2, 3]);
        assert!(!fully_adjacent(&cm, &a, &b).unwrap());
        assert!(matches!(fully_adjacent(&g, &VertexSet::new(), &v0), Err(Error::EmptySet)));
    }

    #[test]
    fn max_relation_examples() {
        let edgeless = gen::independent(3).unwrap();
        let p = Partition::from_parts(3, vec![vec![0], vec![1, 2]]).unwrap();
        let spec = max_flip_relation(&edgeless, &p).unwrap();
        assert_eq!(spec.relation, BTreeSet::from([(0, 0)]));

        let k4 = gen::clique(4).unwrap().with_all_loops();
        let spec = max_flip_relation(&k4, &Partition::whole(4).unwrap()).unwrap();
        assert_eq!(spec.relation, BTreeSet::from([(0, 0)]));

        let spec = max_flip_relation(&two_k2(), &Partition::whole(4).unwrap()).unwrap();
        assert!(spec.relation.is_empty());
    }

    #[test]
    fn subflip_examples() {
        assert_eq!(subflip(&two_k2(), &Partition::whole(4).unwrap()).unwrap(), two_k2());

        let g = Graph::build(3, &[(0, 1), (1, 2)], &VertexSet::from([2])).unwrap();
        let s = subflip(&g, &Partition::singletons(3).unwrap()).unwrap();
        assert_eq!(s.edge_count(), 0);
        assert_eq!(s.loops(), VertexSet::from([2]));

        let kn = gen::clique(4).unwrap();
        assert_eq!(
            subflip(&kn, &Partition::whole(4).unwrap()).unwrap(),
            gen::independent(4).unwrap()
        );
    }

    #[test]
    fn subflip_is_subgraph() {
        let g = Graph::build(5, &[(0, 1), (0, 2), (1, 2), (3, 4)], &VertexSet::from([0])).unwrap();
        let p = Partition::from_parts(5, vec![vec![0, 1, 2], vec![3, 4]]).unwrap();
        let h = subflip(&g, &p).unwrap();
        for (u, v) in h.edges() {
            assert!(g.adjacent(u, v));
        }
        assert_eq!(h.loops(), g.loops());
    }

    #[test]
    fn pure_flip_examples() {
        let g = two_k2();
        let spec = max_flip_relation(&g, &Partition::whole(4).unwrap()).unwrap();
        assert!(is_pure_flip(&g, &spec).unwrap());

        let empty = FlipSpec::new(Partition::whole(4).unwrap(), &[]).unwrap();
        assert!(is_pure_flip(&g, &empty).unwrap());

        let p4 = gen::path(4).unwrap();
        let p = Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let spec = FlipSpec::new(p, &[(0, 1)]).unwrap();
        assert!(!is_pure_flip(&p4, &spec).unwrap());
    }

    #[test]
    fn similarity_examples() {
        let g = gen::path(4).unwrap();
        assert!(m_similar(&g, &g, &Partition::whole(4).unwrap()).unwrap().is_some());

        let p = Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let h = subflip(&g, &p).unwrap();
        assert!(m_similar(&g, &h, &p).unwrap().is_some());

        let w = m_similar(&k2(), &gen::independent(2).unwrap(), &Partition::singletons(2).unwrap())
            .unwrap()
            .unwrap();
        assert_eq!(w.common, gen::independent(2).unwrap());
    }
}
