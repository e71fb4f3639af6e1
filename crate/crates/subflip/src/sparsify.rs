//! Sparsification of bounded-subflip-depth graphs into bounded-tree-depth
//! subgraphs with exact recovery, both as a direct data path and as
//! executable transductions, plus the cover machinery for
//! structurally-bounded-expansion inputs.

use std::collections::BTreeMap;

use crate::enumerate::partitions;
use crate::error::{Error, Result};
use crate::flip::{flip, max_flip_relation, subflip, FlipSpec};
use crate::graph::{find_pattern, pattern_order, Graph, PatternKind, PatternWitness, VertexSet};
use crate::partition::Partition;
use crate::transduction::{
    compose, compose_witness, parallel, parallel_witness, pure_flip_budget_transduction,
    pure_flip_budget_witness, vc_edit_spec, EditDirection, Transduction, Witness,
};

const DECOMPOSE_MAX_N: usize = 12;

/// A witness for bounded subflip-depth: at every internal node the
/// children are exactly the connected components of the node graph's
/// subflip by the stored partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionTree {
    /// Original vertex ids, ascending.
    pub vertices: Vec<usize>,
    /// Partition of the node's local vertex set plus subtrees; `None` on
    /// single-vertex leaves.
    pub node: Option<(Partition, Vec<DecompositionTree>)>,
}

impl DecompositionTree {
    pub fn depth(&self) -> usize {
        match &self.node {
            None => 0,
            Some((_, children)) => 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    /// Structural validation against the host graph: partitions small
    /// enough, children matching the subflip components, leaves single.
    pub fn validate(&self, g: &Graph, k: usize) -> Result<()> {
        self.validate_node(g, &(0..g.vertex_count()).collect::<Vec<_>>(), k)
    }

    fn validate_node(&self, g_local: &Graph, expected: &[usize], k: usize) -> Result<()> {
        if self.vertices != expected {
            return Err(Error::InvalidTree(format!(
                "node vertex set {:?} does not match {:?}",
                self.vertices, expected
            )));
        }
        match &self.node {
            None => {
                if self.vertices.len() != 1 {
                    return Err(Error::InvalidTree("leaf with more than one vertex".into()));
                }
                Ok(())
            }
            Some((p, children)) => {
                if p.len() > k {
                    return Err(Error::InvalidTree(format!(
                        "partition has {} parts, budget is {k}",
                        p.len()
                    )));
                }
                if p.host_size() != g_local.vertex_count() {
                    return Err(Error::InvalidTree("partition hosts the wrong set".into()));
                }
                let h = subflip(g_local, p)?;
                let comps = h.components();
                if comps.len() != children.len() {
                    return Err(Error::InvalidTree(format!(
                        "subflip has {} components, node has {} children",
                        comps.len(),
                        children.len()
                    )));
                }
                for (comp, child) in comps.iter().zip(children) {
                    let comp_local: Vec<usize> = comp.iter().copied().collect();
                    let comp_orig: Vec<usize> =
                        comp_local.iter().map(|&l| self.vertices[l]).collect();
                    let child_graph = h.induced(&comp_local)?;
                    child.validate_node(&child_graph, &comp_orig, k)?;
                }
                Ok(())
            }
        }
    }
}

/// An optimal-depth decomposition tree (first optimal partition in
/// enumeration order at every node), or `None` if the subflip-depth
/// exceeds `d_max`.
pub fn decompose(g: &Graph, k: usize, d_max: usize) -> Result<Option<DecompositionTree>> {
    if k == 0 {
        return Err(Error::ZeroBudget);
    }
    if g.vertex_count() > DECOMPOSE_MAX_N {
        return Err(Error::TooLarge(g.vertex_count(), DECOMPOSE_MAX_N));
    }
    let mut memo = HashMapMemo::default();
    let all: Vec<usize> = (0..g.vertex_count()).collect();
    for d in 0..=d_max {
        if feasible(g, k, d, &mut memo)? {
            return Ok(Some(build_tree(g, &all, k, d, &mut memo)?));
        }
    }
    Ok(None)
}

type HashMapMemo = std::collections::HashMap<(Graph, usize), bool>;

fn feasible(g: &Graph, k: usize, d: usize, memo: &mut HashMapMemo) -> Result<bool> {
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
    let mut ok = false;
    'outer: for p in partitions(n, k.min(n)) {
        let h = subflip(g, &p)?;
        for comp in h.components() {
            let verts: Vec<usize> = comp.iter().copied().collect();
            if !feasible(&h.induced(&verts)?, k, d - 1, memo)? {
                continue 'outer;
            }
        }
        ok = true;
        break;
    }
    memo.insert((g.clone(), d), ok);
    Ok(ok)
}

fn build_tree(
    g: &Graph,
    verts_orig: &[usize],
    k: usize,
    d: usize,
    memo: &mut HashMapMemo,
) -> Result<DecompositionTree> {
    let n = g.vertex_count();
    if n == 1 {
        return Ok(DecompositionTree { vertices: verts_orig.to_vec(), node: None });
    }
    for p in partitions(n, k.min(n)) {
        let h = subflip(g, &p)?;
        let comps = h.components();
        let mut all_ok = true;
        for comp in &comps {
            let verts: Vec<usize> = comp.iter().copied().collect();
            if !feasible(&h.induced(&verts)?, k, d - 1, memo)? {
                all_ok = false;
                break;
            }
        }
        if !all_ok {
            continue;
        }
        let mut children = Vec::new();
        for comp in &comps {
            let local: Vec<usize> = comp.iter().copied().collect();
            let orig: Vec<usize> = local.iter().map(|&l| verts_orig[l]).collect();
            children.push(build_tree(&h.induced(&local)?, &orig, k, d - 1, memo)?);
        }
        return Ok(DecompositionTree { vertices: verts_orig.to_vec(), node: Some((p, children)) });
    }
    Err(Error::InvalidTree("no partition achieves the feasible depth".into()))
}

/// Per-node sparsification data; leaders are original vertex ids, X edges
/// are canonical original-id pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsifyNode {
    pub vertices: Vec<usize>,
    pub data: Option<NodeData>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeData {
    pub flip_partition: Partition,
    pub leaders: Vec<usize>,
    pub x_edges: Vec<(usize, usize)>,
    pub children: Vec<SparsifyNode>,
}

/// The full sparsification certificate: the annotated tree and the
/// resulting subgraph `G*`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsifyWitness {
    pub root: SparsifyNode,
    pub result: Graph,
    pub k: usize,
    pub d: usize,
}

impl SparsifyNode {
    pub fn depth(&self) -> usize {
        match &self.data {
            None => 0,
            Some(data) => 1 + data.children.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }
}

/// Builds `G*` from a decomposition tree: each level keeps the subflip's
/// components sparsified recursively and re-adds the leader edges X
/// (leader-to-others inside clique parts, leaders to the opposite part
/// across fully adjacent pairs). `G*` is a reflexive subgraph of `G` with
/// tree-depth at most `k·d`, preserving connectivity per component.
pub fn sparsify(g: &Graph, tree: &DecompositionTree, k: usize, d: usize) -> Result<SparsifyWitness> {
    if !g.is_reflexive() {
        return Err(Error::NotReflexive);
    }
    tree.validate(g, k)?;
    if tree.depth() > d {
        return Err(Error::InvalidTree(format!(
            "tree depth {} exceeds declared d = {d}",
            tree.depth()
        )));
    }
    let (root, result) = sparsify_node(g, tree)?;
    Ok(SparsifyWitness { root, result, k, d })
}

fn sparsify_node(g_local: &Graph, tree: &DecompositionTree) -> Result<(SparsifyNode, Graph)> {
    let Some((p, children)) = &tree.node else {
        return Ok((
            SparsifyNode { vertices: tree.vertices.clone(), data: None },
            g_local.clone(),
        ));
    };
    let spec = max_flip_relation(g_local, p)?;
    let h = flip(g_local, &spec)?;
    let comps = h.components();

    let mut star = Graph::new(g_local.vertex_count())?;
    for v in 0..g_local.vertex_count() {
        star.set_loop(v, true);
    }
    let mut built_children = Vec::new();
    for (comp, child_tree) in comps.iter().zip(children) {
        let local: Vec<usize> = comp.iter().copied().collect();
        let (child_node, child_star) = sparsify_node(&h.induced(&local)?, child_tree)?;
        for (u, v) in child_star.edges() {
            star.set_edge(local[u], local[v], true);
        }
        built_children.push(child_node);
    }

    let leaders: Vec<usize> = p.parts().iter().map(|part| tree.vertices[part[0]]).collect();
    let mut x_edges = Vec::new();
    for (i, part) in p.parts().iter().enumerate() {
        if spec.related(i, i) && part.len() >= 2 {
            let lead = part[0];
            for &other in &part[1..] {
                x_edges.push((lead.min(other), lead.max(other)));
                star.set_edge(lead, other, true);
            }
        }
        for (j, other_part) in p.parts().iter().enumerate().skip(i + 1) {
            if !spec.related(i, j) {
                continue;
            }
            let lead_i = part[0];
            let lead_j = other_part[0];
            for &v in other_part.iter() {
                x_edges.push((lead_i.min(v), lead_i.max(v)));
                star.set_edge(lead_i, v, true);
            }
            for &u in part.iter() {
                if u == lead_i {
                    continue;
                }
                x_edges.push((lead_j.min(u), lead_j.max(u)));
                star.set_edge(lead_j, u, true);
            }
        }
    }
    let mut x_orig: Vec<(usize, usize)> = x_edges
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (tree.vertices[u], tree.vertices[v]);
            (a.min(b), a.max(b))
        })
        .collect();
    x_orig.sort_unstable();
    x_orig.dedup();

    Ok((
        SparsifyNode {
            vertices: tree.vertices.clone(),
            data: Some(NodeData {
                flip_partition: p.clone(),
                leaders,
                x_edges: x_orig,
                children: built_children,
            }),
        },
        star,
    ))
}

/// Reconstructs the original graph exactly: strip the X edges at every
/// node, recover the children, and flip back the relation derived from
/// the partition and the X edges.
pub fn recover(witness: &SparsifyWitness) -> Result<Graph> {
    recover_node(&witness.root, &witness.result)
}

fn recover_node(node: &SparsifyNode, g_star_local: &Graph) -> Result<Graph> {
    let Some(data) = &node.data else {
        if g_star_local.vertex_count() != 1 {
            return Err(Error::InvalidWitness("leaf with more than one vertex".into()));
        }
        return Ok(g_star_local.clone());
    };
    let orig_to_local: BTreeMap<usize, usize> =
        node.vertices.iter().enumerate().map(|(l, &o)| (o, l)).collect();
    let mut stripped = g_star_local.clone();
    for &(a, b) in &data.x_edges {
        let (u, v) = (
            *orig_to_local.get(&a).ok_or_else(|| Error::InvalidWitness(format!("x edge endpoint {a} not in node")))?,
            *orig_to_local.get(&b).ok_or_else(|| Error::InvalidWitness(format!("x edge endpoint {b} not in node")))?,
        );
        if !stripped.adjacent(u, v) {
            return Err(Error::InvalidWitness(format!("x edge ({a},{b}) missing from the sparsified graph")));
        }
        stripped.set_edge(u, v, false);
    }

    let mut h = Graph::new(g_star_local.vertex_count())?;
    for v in node.vertices.iter().enumerate().map(|(l, _)| l) {
        if g_star_local.has_loop(v) {
            h.set_loop(v, true);
        }
    }
    for child in &data.children {
        let local: Vec<usize> = child
            .vertices
            .iter()
            .map(|o| {
                orig_to_local
                    .get(o)
                    .copied()
                    .ok_or_else(|| Error::InvalidWitness(format!("child vertex {o} not in node")))
            })
            .collect::<Result<_>>()?;
        let child_star = stripped.induced(&local)?;
        let recovered = recover_node(child, &child_star)?;
        for (u, v) in recovered.edges() {
            h.set_edge(local[u], local[v], true);
        }
    }
    // After stripping X, every remaining edge must lie inside a child.
    let child_of: BTreeMap<usize, usize> = data
        .children
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.vertices.iter().map(move |&v| (v, i)))
        .collect();
    for (u, v) in stripped.edges() {
        if child_of.get(&node.vertices[u]) != child_of.get(&node.vertices[v]) {
            return Err(Error::InvalidWitness(format!(
                "stripped edge ({},{}) crosses children",
                node.vertices[u], node.vertices[v]
            )));
        }
    }

    let spec = derive_relation(data)?;
    flip(&h, &spec)
}

/// The flipped pairs are recoverable from X: an internal X edge marks a
/// clique part, a cross X edge marks a fully adjacent pair. Pairs that
/// toggle nothing (singleton self-pairs) are irrelevant.
fn derive_relation(data: &NodeData) -> Result<FlipSpec> {
    let p = &data.flip_partition;
    let verts: Vec<usize> = {
        let mut all: Vec<usize> = data.children.iter().flat_map(|c| c.vertices.clone()).collect();
        all.sort_unstable();
        all
    };
    let orig_part = |orig: usize| -> Option<usize> {
        verts.iter().position(|&o| o == orig).map(|l| p.part_of(l))
    };
    let mut pairs = Vec::new();
    for &(a, b) in &data.x_edges {
        let pa = orig_part(a)
            .ok_or_else(|| Error::InvalidWitness(format!("x endpoint {a} outside node")))?;
        let pb = orig_part(b)
            .ok_or_else(|| Error::InvalidWitness(format!("x endpoint {b} outside node")))?;
        pairs.push((pa, pb));
    }
    FlipSpec::new(p.clone(), &pairs)
}

// ---------------------------------------------------------------------------
// Executable transductions for sparsify and recover
// ---------------------------------------------------------------------------

/// Both directions as transductions with their witness colorings.
#[derive(Debug, Clone)]
pub struct SparsifyTransductions {
    pub sparsify: (Transduction, Witness),
    pub recover: (Transduction, Witness),
}

/// Assembles executable EP transductions realizing the sparsification and
/// the recovery: per level, a pure-flip step for the subflip, a parallel
/// application of the previous level to the components, and a
/// vertex-cover edit for the X edges, chained by composition. The
/// diameter bounds for the parallel steps are computed exactly from the
/// instance.
pub fn build_transductions(g: &Graph, witness: &SparsifyWitness) -> Result<SparsifyTransductions> {
    let d = witness.d;

    // Walk once to collect, per level, the diameter bounds needed by the
    // parallel steps and the part budgets needed by the pure-flip steps.
    let mut levels = LevelData {
        diam_sp: vec![0usize; d + 1],
        diam_rc: vec![0usize; d + 1],
        sub_budget: vec![1usize; d + 1],
        x_budget: vec![1usize; d + 1],
    };
    collect_level_data(g, &witness.root, &witness.result, d, &mut levels)?;

    // Uniform per-level transductions.
    let mut sp_levels: Vec<Transduction> = vec![Transduction::identity()];
    let mut rc_levels: Vec<Transduction> = vec![Transduction::identity()];
    for level in 1..=d {
        let pf_sub = pure_flip_budget_transduction(levels.sub_budget[level])?
            .with_prefixed_colors(&format!("S{level}a"));
        let par = parallel(&sp_levels[level - 1], levels.diam_sp[level])?;
        let pf_x = pure_flip_budget_transduction(levels.x_budget[level])?
            .with_prefixed_colors(&format!("S{level}c"));
        sp_levels.push(compose(&compose(&pf_sub, &par)?, &pf_x)?);

        let pf_strip = pure_flip_budget_transduction(levels.x_budget[level])?
            .with_prefixed_colors(&format!("R{level}c"));
        let par = parallel(&rc_levels[level - 1], levels.diam_rc[level])?;
        let pf_undo = pure_flip_budget_transduction(levels.sub_budget[level])?
            .with_prefixed_colors(&format!("R{level}a"));
        rc_levels.push(compose(&compose(&pf_strip, &par)?, &pf_undo)?);
    }

    let sp_witness = sparsify_witness_at(g, &witness.root, &witness.result, d, &levels)?;
    let rc_witness = recover_witness_at(g, &witness.root, &witness.result, d, &levels)?;
    Ok(SparsifyTransductions {
        sparsify: (sp_levels[d].clone(), sp_witness),
        recover: (rc_levels[d].clone(), rc_witness),
    })
}

struct LevelData {
    diam_sp: Vec<usize>,
    diam_rc: Vec<usize>,
    sub_budget: Vec<usize>,
    x_budget: Vec<usize>,
}

/// The node's subflip data, substituting the trivial one-part identity on
/// padded leaves.
fn node_spec(g_local: &Graph, node: &SparsifyNode) -> Result<(FlipSpec, Vec<(usize, usize)>)> {
    match &node.data {
        Some(data) => {
            let spec = max_flip_relation(g_local, &data.flip_partition)?;
            Ok((spec, data.x_edges.clone()))
        }
        None => {
            let spec = FlipSpec::new(Partition::whole(g_local.vertex_count())?, &[])?;
            Ok((spec, vec![]))
        }
    }
}

fn children_of<'a>(node: &'a SparsifyNode) -> Vec<&'a SparsifyNode> {
    match &node.data {
        Some(data) => data.children.iter().collect(),
        None => vec![],
    }
}

fn collect_level_data(
    g_local: &Graph,
    node: &SparsifyNode,
    g_star_local: &Graph,
    level: usize,
    levels: &mut LevelData,
) -> Result<()> {
    if level == 0 {
        return Ok(());
    }
    let (spec, x_edges) = node_spec(g_local, node)?;
    let h = flip(g_local, &spec)?;
    for (_, diam) in h.components_and_diameters() {
        levels.diam_sp[level] = levels.diam_sp[level].max(diam);
    }
    let stripped = strip_edges(g_star_local, &node.vertices, &x_edges)?;
    for (_, diam) in stripped.components_and_diameters() {
        levels.diam_rc[level] = levels.diam_rc[level].max(diam);
    }
    levels.sub_budget[level] = levels.sub_budget[level].max(spec.partition.len());
    let local_x = local_x_edges(node, &x_edges);
    let cover = leader_cover(node, &local_x);
    let (x_spec, _) = vc_edit_spec(&stripped, &local_x, &cover, EditDirection::Add)?;
    levels.x_budget[level] = levels.x_budget[level].max(x_spec.partition.len());

    let children = children_of(node);
    if children.is_empty() {
        // Padded leaf: both intermediate graphs stay `K_1` further down.
        return Ok(());
    }
    for child in children {
        let local: Vec<usize> = child
            .vertices
            .iter()
            .map(|o| node.vertices.iter().position(|v| v == o).unwrap())
            .collect();
        collect_level_data(
            &h.induced(&local)?,
            child,
            &stripped.induced(&local)?,
            level - 1,
            levels,
        )?;
    }
    Ok(())
}

fn local_x_edges(node: &SparsifyNode, x_edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    x_edges
        .iter()
        .map(|&(a, b)| {
            let u = node.vertices.iter().position(|&o| o == a).unwrap();
            let v = node.vertices.iter().position(|&o| o == b).unwrap();
            (u.min(v), u.max(v))
        })
        .collect()
}

fn strip_edges(g: &Graph, vertices: &[usize], x_edges: &[(usize, usize)]) -> Result<Graph> {
    let mut out = g.clone();
    for &(a, b) in x_edges {
        let u = vertices
            .iter()
            .position(|&o| o == a)
            .ok_or_else(|| Error::InvalidWitness(format!("x endpoint {a} outside node")))?;
        let v = vertices
            .iter()
            .position(|&o| o == b)
            .ok_or_else(|| Error::InvalidWitness(format!("x endpoint {b} outside node")))?;
        if !out.adjacent(u, v) {
            return Err(Error::InvalidWitness(format!("x edge ({a},{b}) absent")));
        }
        out.set_edge(u, v, false);
    }
    Ok(out)
}

fn sparsify_witness_at(
    g_local: &Graph,
    node: &SparsifyNode,
    g_star_local: &Graph,
    level: usize,
    levels: &LevelData,
) -> Result<Witness> {
    if level == 0 {
        return Ok(Witness::plain(g_local.clone()));
    }
    let (spec, x_edges) = node_spec(g_local, node)?;
    let h = flip(g_local, &spec)?;
    // Subflip step: recover h from the colored g (h flipped back is g).
    let w_sub = pure_flip_budget_witness(&h, &spec, levels.sub_budget[level])?
        .with_prefixed_colors(&format!("S{level}a"));

    let stripped = strip_edges(g_star_local, &node.vertices, &x_edges)?;
    let comps = h.components();
    let children = children_of(node);
    let mut per_component = Vec::new();
    if children.is_empty() {
        // Padded leaf: one component, itself.
        per_component.push(sparsify_witness_at(&h, node, &stripped, level - 1, levels)?);
    } else {
        for (comp, child) in comps.iter().zip(&children) {
            let local: Vec<usize> = comp.iter().copied().collect();
            per_component.push(sparsify_witness_at(
                &h.induced(&local)?,
                child,
                &stripped.induced(&local)?,
                level - 1,
                levels,
            )?);
        }
    }
    let w_par = parallel_witness(&h, levels.diam_sp[level], &per_component)?;

    // X step: add x_edges to the stripped graph.
    let local_x = local_x_edges(node, &x_edges);
    let cover = leader_cover(node, &local_x);
    let (x_spec, edited) = vc_edit_spec(&stripped, &local_x, &cover, EditDirection::Add)?;
    debug_assert_eq!(&edited, g_star_local);
    let w_x = pure_flip_budget_witness(&edited, &x_spec, levels.x_budget[level])?
        .with_prefixed_colors(&format!("S{level}c"));

    compose_witness(&compose_witness(&w_sub, &w_par)?, &w_x)
}

fn recover_witness_at(
    g_local: &Graph,
    node: &SparsifyNode,
    g_star_local: &Graph,
    level: usize,
    levels: &LevelData,
) -> Result<Witness> {
    if level == 0 {
        return Ok(Witness::plain(g_star_local.clone()));
    }
    let (spec, x_edges) = node_spec(g_local, node)?;
    let h = flip(g_local, &spec)?;
    let stripped = strip_edges(g_star_local, &node.vertices, &x_edges)?;

    // Strip step: remove x_edges from the colored g_star.
    let local_x = local_x_edges(node, &x_edges);
    let cover = leader_cover(node, &local_x);
    let (x_spec, edited) = vc_edit_spec(g_star_local, &local_x, &cover, EditDirection::Remove)?;
    debug_assert_eq!(&edited, &stripped);
    let w_strip = pure_flip_budget_witness(&edited, &x_spec, levels.x_budget[level])?
        .with_prefixed_colors(&format!("R{level}c"));

    let comps = stripped.components();
    let children = children_of(node);
    let mut per_component = Vec::new();
    if children.is_empty() {
        per_component.push(recover_witness_at(&h, node, &stripped, level - 1, levels)?);
    } else {
        if comps.len() != children.len() {
            return Err(Error::InvalidWitness(format!(
                "sparsified graph has {} components, node has {} children",
                comps.len(),
                children.len()
            )));
        }
        for (comp, child) in comps.iter().zip(&children) {
            let local: Vec<usize> = comp.iter().copied().collect();
            per_component.push(recover_witness_at(
                &h.induced(&local)?,
                child,
                &stripped.induced(&local)?,
                level - 1,
                levels,
            )?);
        }
    }
    let w_par = parallel_witness(&stripped, levels.diam_rc[level], &per_component)?;

    // Undo step: recover g from the colored h.
    let w_undo = pure_flip_budget_witness(g_local, &spec, levels.sub_budget[level])?
        .with_prefixed_colors(&format!("R{level}a"));

    compose_witness(&compose_witness(&w_strip, &w_par)?, &w_undo)
}

/// The leaders cover every X edge by construction; padded leaves have no
/// X edges and an empty cover.
fn leader_cover(node: &SparsifyNode, local_x: &[(usize, usize)]) -> VertexSet {
    match &node.data {
        Some(data) => {
            let leader_locals: VertexSet = data
                .leaders
                .iter()
                .filter_map(|lead| node.vertices.iter().position(|v| v == lead))
                .collect();
            // Keep only leaders actually touching an X edge.
            leader_locals
                .into_iter()
                .filter(|&l| local_x.iter().any(|&(u, v)| u == l || v == l))
                .collect()
        }
        None => VertexSet::new(),
    }
}

// ---------------------------------------------------------------------------
// Covers
// ---------------------------------------------------------------------------

/// Exhaustively checks that every subset of size at most `p` lies inside
/// some set of the family.
pub fn p_cover_check(n: usize, sets: &[VertexSet], p: usize) -> bool {
    fn rec(n: usize, sets: &[VertexSet], current: &mut Vec<usize>, start: usize, left: usize) -> bool {
        if !sets.iter().any(|s| current.iter().all(|v| s.contains(v))) {
            return false;
        }
        if left == 0 {
            return true;
        }
        for v in start..n {
            current.push(v);
            if !rec(n, sets, current, v + 1, left - 1) {
                current.pop();
                return false;
            }
            current.pop();
        }
        true
    }
    rec(n, sets, &mut Vec::new(), 0, p)
}

/// A validated cover family with per-set decomposition trees.
#[derive(Debug, Clone)]
pub struct CoverFamily {
    pub sets: Vec<VertexSet>,
    pub p: usize,
    pub decompositions: Vec<DecompositionTree>,
}

impl CoverFamily {
    /// Validates the p-cover property and decomposes every induced piece
    /// within the depth cap.
    pub fn build(g: &Graph, sets: Vec<VertexSet>, p: usize, k: usize, d_max: usize) -> Result<Self> {
        if !p_cover_check(g.vertex_count(), &sets, p) {
            return Err(Error::NotAPCover(p));
        }
        let mut decompositions = Vec::new();
        for set in &sets {
            let verts: Vec<usize> = set.iter().copied().collect();
            let piece = g.induced(&verts)?;
            let tree = decompose(&piece, k, d_max)?
                .ok_or_else(|| Error::InvalidTree(format!("piece exceeds subflip-depth {d_max}")))?;
            decompositions.push(tree);
        }
        Ok(CoverFamily { sets, p, decompositions })
    }
}

/// The union `G* = ⋃ G_i*` of the per-piece sparsifications and the data
/// needed to undo it.
#[derive(Debug, Clone)]
pub struct CoverSparsifyResult {
    pub result: Graph,
    pub sets: Vec<VertexSet>,
    pub pieces: Vec<SparsifyWitness>,
    /// Largest semi-induced biclique order of the union.
    pub union_biclique_order: usize,
}

/// Sparsifies each cover piece and takes the union of the results over
/// the full vertex set. Requires a reflexive input and a 2-cover.
pub fn cover_sparsify(g: &Graph, cover: &CoverFamily, k: usize, d: usize) -> Result<CoverSparsifyResult> {
    if !g.is_reflexive() {
        return Err(Error::NotReflexive);
    }
    if cover.p < 2 || !p_cover_check(g.vertex_count(), &cover.sets, 2) {
        return Err(Error::NotAPCover(2));
    }
    let mut result = Graph::new(g.vertex_count())?;
    for v in 0..g.vertex_count() {
        result.set_loop(v, true);
    }
    let mut pieces = Vec::new();
    for (set, tree) in cover.sets.iter().zip(&cover.decompositions) {
        let verts: Vec<usize> = set.iter().copied().collect();
        let piece = g.induced(&verts)?;
        let witness = sparsify(&piece, tree, k, d)?;
        for (u, v) in witness.result.edges() {
            result.set_edge(verts[u], verts[v], true);
        }
        pieces.push(witness);
    }
    let union_biclique_order = pattern_order(&result, PatternKind::Biclique);
    Ok(CoverSparsifyResult { result, sets: cover.sets.clone(), pieces, union_biclique_order })
}

/// Exact recovery from a covered union using the stored per-piece
/// subgraphs: every piece recovers independently and the union of the
/// recovered pieces is the original graph (a 2-cover covers every edge).
pub fn recover_covered(res: &CoverSparsifyResult, n: usize) -> Result<Graph> {
    let mut out = Graph::new(n)?;
    for (set, witness) in res.sets.iter().zip(&res.pieces) {
        let verts: Vec<usize> = set.iter().copied().collect();
        let piece = recover(witness)?;
        if piece.vertex_count() != verts.len() {
            return Err(Error::InvalidWitness("piece size mismatch".into()));
        }
        for (u, v) in piece.edges() {
            out.set_edge(verts[u], verts[v], true);
        }
        for l in piece.loops() {
            out.set_loop(verts[l], true);
        }
    }
    Ok(out)
}

/// Pigeonhole extraction: a co-matching of order `s·t` in a 2-covered
/// graph lands entirely inside one cover set at order `t`. Returns the
/// set index and the witness (original ids).
pub fn comatching_cover_lift(
    g: &Graph,
    sets: &[VertexSet],
    s: usize,
    t: usize,
) -> Result<(usize, PatternWitness)> {
    if sets.len() > s {
        return Err(Error::NotAPCover(2));
    }
    let order = s * t;
    let witness = find_pattern(g, PatternKind::CoMatching, order)
        .ok_or(Error::NoCoMatching(order))?;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); sets.len()];
    for m in 0..order {
        let (a, b) = (witness.a_side[m], witness.b_side[m]);
        let i = sets
            .iter()
            .position(|u| u.contains(&a) && u.contains(&b))
            .ok_or(Error::NotAPCover(2))?;
        buckets[i].push(m);
    }
    let (i, indices) = buckets
        .iter()
        .enumerate()
        .find(|(_, idx)| idx.len() >= t)
        .ok_or(Error::NotAPCover(2))?;
    let chosen = &indices[..t];
    Ok((
        i,
        PatternWitness {
            a_side: chosen.iter().map(|&m| witness.a_side[m]).collect(),
            b_side: chosen.iter().map(|&m| witness.b_side[m]).collect(),
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen;
    use crate::transduction::apply;

    fn reflexive(g: Graph) -> Graph {
        g.with_all_loops()
    }

    #[test]
    fn decompose_examples() {
        let k1 = gen::independent(1).unwrap();
        let tree = decompose(&k1, 1, 3).unwrap().unwrap();
        assert_eq!(tree.depth(), 0);

        let k3 = reflexive(gen::clique(3).unwrap());
        let tree = decompose(&k3, 1, 3).unwrap().unwrap();
        assert_eq!(tree.depth(), 1);
        let (p, children) = tree.node.as_ref().unwrap();
        assert_eq!(p, &Partition::whole(3).unwrap());
        assert_eq!(children.len(), 3);

        let p4 = gen::path(4).unwrap();
        let tree = decompose(&p4, 2, 4).unwrap().unwrap();
        assert_eq!(tree.depth(), 2);
        tree.validate(&p4, 2).unwrap();
    }

    #[test]
    fn decompose_respects_cap() {
        let p3 = gen::path(3).unwrap();
        assert!(decompose(&p3, 1, 1).unwrap().is_none());
    }

    #[test]
    fn sparsify_k3_to_star() {
        let g = reflexive(gen::clique(3).unwrap());
        let tree = decompose(&g, 1, 3).unwrap().unwrap();
        let witness = sparsify(&g, &tree, 1, 1).unwrap();
        let expect = Graph::build(3, &[(0, 1), (0, 2)], &VertexSet::from([0, 1, 2])).unwrap();
        assert_eq!(witness.result, expect);
        assert_eq!(witness.result.tree_depth().unwrap(), 1);
        assert_eq!(recover(&witness).unwrap(), g);
    }

    #[test]
    fn sparsify_c4_with_cross_partition() {
        let g = reflexive(gen::cycle(4).unwrap());
        let p = Partition::from_parts(4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let children = (0..4)
            .map(|v| DecompositionTree { vertices: vec![v], node: None })
            .collect();
        let tree = DecompositionTree { vertices: vec![0, 1, 2, 3], node: Some((p, children)) };
        tree.validate(&g, 2).unwrap();
        let witness = sparsify(&g, &tree, 2, 1).unwrap();
        let expect =
            Graph::build(4, &[(0, 1), (0, 3), (1, 2)], &VertexSet::from([0, 1, 2, 3])).unwrap();
        assert_eq!(witness.result, expect);
        assert_eq!(witness.result.tree_depth().unwrap(), 2);
        assert!(witness.result.is_connected());
        assert_eq!(recover(&witness).unwrap(), g);
    }

    #[test]
    fn transductions_round_trip_small_cases() {
        for g in [
            reflexive(gen::clique(3).unwrap()),
            reflexive(gen::cycle(4).unwrap()),
            reflexive(gen::path(4).unwrap()),
            reflexive(gen::independent(1).unwrap()),
        ] {
            let k = 2;
            let tree = decompose(&g, k, 5).unwrap().unwrap();
            let d = tree.depth();
            let witness = sparsify(&g, &tree, k, d).unwrap();
            let ts = build_transductions(&g, &witness).unwrap();

            assert!(ts.sparsify.0.is_ep());
            assert!(ts.recover.0.is_ep());
            let n = g.vertex_count();
            let out = apply(&ts.sparsify.0, &ts.sparsify.1).unwrap();
            assert_eq!(out.expect_total(n).unwrap(), &witness.result, "sparsify direction");
            let out = apply(&ts.recover.0, &ts.recover.1).unwrap();
            assert_eq!(out.expect_total(n).unwrap(), &g, "recover direction");
        }
    }

    #[test]
    fn p_cover_examples() {
        let all = vec![VertexSet::from([0, 1, 2])];
        assert!(p_cover_check(3, &all, 3));
        let pairs = vec![
            VertexSet::from([0, 1]),
            VertexSet::from([1, 2]),
            VertexSet::from([0, 2]),
        ];
        assert!(p_cover_check(3, &pairs, 2));
        let split = vec![VertexSet::from([0, 1]), VertexSet::from([2, 3])];
        assert!(!p_cover_check(4, &split, 2));
    }

    #[test]
    fn cover_sparsify_trivial_cover() {
        let g = reflexive(gen::clique(3).unwrap());
        let cover = CoverFamily::build(&g, vec![(0..3).collect()], 2, 1, 3).unwrap();
        let res = cover_sparsify(&g, &cover, 1, 1).unwrap();
        let direct = sparsify(&g, &cover.decompositions[0], 1, 1).unwrap();
        assert_eq!(res.result, direct.result);
        assert_eq!(recover_covered(&res, 3).unwrap(), g);
    }

    #[test]
    fn cover_sparsify_c4_two_pieces() {
        let g = reflexive(gen::cycle(4).unwrap());
        let sets = vec![VertexSet::from([0, 1, 2]), VertexSet::from([2, 3, 0]), VertexSet::from([1, 3])];
        // Those three sets 2-cover the cycle's vertex pairs.
        assert!(p_cover_check(4, &sets, 2));
        let cover = CoverFamily::build(&g, sets, 2, 2, 4).unwrap();
        let res = cover_sparsify(&g, &cover, 2, 2).unwrap();
        assert_eq!(recover_covered(&res, 4).unwrap(), g);
        for (u, v) in res.result.edges() {
            assert!(g.adjacent(u, v));
        }
    }

    #[test]
    fn cover_must_be_two_cover() {
        let g = reflexive(gen::cycle(4).unwrap());
        let cover = CoverFamily {
            sets: vec![VertexSet::from([0, 1]), VertexSet::from([2, 3])],
            p: 2,
            decompositions: vec![],
        };
        assert!(matches!(cover_sparsify(&g, &cover, 1, 1), Err(Error::NotAPCover(2))));
    }

    #[test]
    fn comatching_lift_examples() {
        let g = gen::co_matching(4).unwrap();
        let all: VertexSet = (0..8).collect();
        let (i, w) = comatching_cover_lift(&g, &[all], 1, 4).unwrap();
        assert_eq!(i, 0);
        assert_eq!(w.a_side.len(), 4);

        // Split the pairs across two sets evenly.
        let sets = vec![
            VertexSet::from([0, 1, 4, 5]),
            VertexSet::from([2, 3, 6, 7]),
        ];
        let (i, w) = comatching_cover_lift(&g, &sets, 2, 2).unwrap();
        assert!(i < 2);
        assert_eq!(w.a_side.len(), 2);
        for (x, &a) in w.a_side.iter().enumerate() {
            for (y, &b) in w.b_side.iter().enumerate() {
                assert_eq!(g.adjacent(a, b), x != y);
            }
        }

        let small = gen::co_matching(2).unwrap();
        let all: VertexSet = (0..4).collect();
        assert!(matches!(
            comatching_cover_lift(&small, &[all], 1, 4),
            Err(Error::NoCoMatching(4))
        ));
    }
}
