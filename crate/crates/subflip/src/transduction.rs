//! Executable transductions: a color signature, a domain formula `ν(x)`,
//! and a symmetric edge formula `η(x,y)`. Membership in the output is
//! always certified by an explicit witness coloring rather than searched.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::flip::{flip, fully_adjacent, fully_non_adjacent, max_flip_relation, FlipSpec};
use crate::graph::{pattern_order, Graph, PatternKind, VertexSet};
use crate::logic::{classify, eval_binary, eval_unary, ColoredGraph, Formula};
use crate::partition::Partition;

pub const DOMAIN_VAR: &str = "x";
pub const EDGE_VAR: &str = "y";

/// A simple interpretation over a fixed color signature. The edge formula
/// is symmetric; `η(v,v)` produces a self-loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transduction {
    colors: Vec<String>,
    domain: Formula,
    edge: Formula,
    ep: bool,
}

impl Transduction {
    /// Builds a transduction, trusting that the edge formula is symmetric
    /// under swapping `x` and `y` (all constructions in this crate are
    /// symmetric by shape).
    pub fn new_unchecked(colors: Vec<String>, domain: Formula, edge: Formula) -> Result<Self> {
        check_free_vars(&domain, &[DOMAIN_VAR])?;
        check_free_vars(&edge, &[DOMAIN_VAR, EDGE_VAR])?;
        let mut seen = BTreeSet::new();
        for c in &colors {
            if !seen.insert(c.clone()) {
                return Err(Error::ColorClash(c.clone()));
            }
        }
        for name in domain.color_names().union(&edge.color_names()) {
            if !seen.contains(name) {
                return Err(Error::UnknownColor(name.clone()));
            }
        }
        let ep = classify(&domain)?.ep && classify(&edge)?.ep;
        Ok(Transduction { colors, domain, edge, ep })
    }

    /// Builds a transduction with the edge formula symmetrized
    /// syntactically as `η(x,y) ∨ η(y,x)` unless it is already invariant
    /// under the swap (modulo conjunct/disjunct order).
    pub fn symmetrized(colors: Vec<String>, domain: Formula, edge: Formula) -> Result<Self> {
        let sym = if swap_invariant(&edge) {
            edge
        } else {
            let swapped = swap_xy(&edge);
            Formula::or(vec![edge, swapped])
        };
        Transduction::new_unchecked(colors, domain, sym)
    }

    /// The identity transduction: total domain, edges and loops copied.
    pub fn identity() -> Self {
        Transduction {
            colors: vec![],
            domain: Formula::Top,
            edge: Formula::edge(DOMAIN_VAR, EDGE_VAR),
            ep: true,
        }
    }

    pub fn colors(&self) -> &[String] {
        &self.colors
    }

    pub fn domain_formula(&self) -> &Formula {
        &self.domain
    }

    pub fn edge_formula(&self) -> &Formula {
        &self.edge
    }

    pub fn is_ep(&self) -> bool {
        self.ep
    }

    pub fn is_total(&self) -> bool {
        self.domain == Formula::Top
    }

    /// Renames every color to `prefix + name`; used to keep signatures
    /// disjoint across compositions.
    pub fn with_prefixed_colors(&self, prefix: &str) -> Self {
        let map: BTreeMap<String, String> =
            self.colors.iter().map(|c| (c.clone(), format!("{prefix}{c}"))).collect();
        Transduction {
            colors: self.colors.iter().map(|c| format!("{prefix}{c}")).collect(),
            domain: self.domain.rename_colors(&map),
            edge: self.edge.rename_colors(&map),
            ep: self.ep,
        }
    }

    /// Checks semantic symmetry of the edge formula on every colored graph
    /// in the suite.
    pub fn edge_symmetric_on(&self, suite: &[ColoredGraph]) -> Result<bool> {
        for cg in suite {
            let n = cg.graph.vertex_count();
            let m = eval_binary(cg, &self.edge, DOMAIN_VAR, EDGE_VAR)?;
            for u in 0..n {
                for v in 0..n {
                    if m[u * n + v] != m[v * n + u] {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }
}

fn check_free_vars(f: &Formula, allowed: &[&str]) -> Result<()> {
    if !f.free_set_vars().is_empty() {
        return Err(Error::BadInterpretationVariables);
    }
    for v in f.free_vars() {
        if !allowed.contains(&v.as_str()) {
            return Err(Error::BadInterpretationVariables);
        }
    }
    Ok(())
}

fn swap_xy(f: &Formula) -> Formula {
    f.substitute_var(DOMAIN_VAR, "#swap")
        .substitute_var(EDGE_VAR, DOMAIN_VAR)
        .substitute_var("#swap", EDGE_VAR)
}

fn swap_invariant(f: &Formula) -> bool {
    sort_junctions(f) == sort_junctions(&swap_xy(f))
}

/// Recursively sorts conjuncts and disjuncts into a canonical order so
/// that swap-invariance can be compared structurally.
fn sort_junctions(f: &Formula) -> Formula {
    match f {
        Formula::And(fs) | Formula::Or(fs) => {
            let mut children: Vec<Formula> = fs.iter().map(sort_junctions).collect();
            children.sort_by_key(|c| format!("{c:?}"));
            if matches!(f, Formula::And(..)) {
                Formula::And(children)
            } else {
                Formula::Or(children)
            }
        }
        Formula::Not(inner) => Formula::not(sort_junctions(inner)),
        Formula::Exists(v, b) => Formula::Exists(v.clone(), Box::new(sort_junctions(b))),
        Formula::Forall(v, b) => Formula::Forall(v.clone(), Box::new(sort_junctions(b))),
        Formula::ExistsSet(s, b) => Formula::ExistsSet(s.clone(), Box::new(sort_junctions(b))),
        Formula::ForallSet(s, b) => Formula::ForallSet(s.clone(), Box::new(sort_junctions(b))),
        other => other.clone(),
    }
}

/// The coloring certifying one application of a transduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub coloring: ColoredGraph,
}

impl Witness {
    pub fn new(coloring: ColoredGraph) -> Self {
        Witness { coloring }
    }

    pub fn plain(graph: Graph) -> Self {
        Witness { coloring: ColoredGraph::new(graph) }
    }

    pub fn with_prefixed_colors(&self, prefix: &str) -> Self {
        let mut coloring = ColoredGraph::new(self.coloring.graph.clone());
        for (name, set) in &self.coloring.colors {
            coloring.colors.insert(format!("{prefix}{name}"), set.clone());
        }
        Witness { coloring }
    }
}

/// The output of applying a transduction: the surviving original vertex
/// ids and the output graph relabeled onto `0..len` in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interpreted {
    pub vertex_ids: Vec<usize>,
    pub graph: Graph,
}

impl Interpreted {
    /// The output graph when the domain kept every input vertex.
    pub fn expect_total(&self, n: usize) -> Result<&Graph> {
        if self.vertex_ids.len() != n {
            return Err(Error::BadWitnessDomain);
        }
        Ok(&self.graph)
    }
}

/// Evaluates the interpretation on the witness coloring.
pub fn apply(t: &Transduction, w: &Witness) -> Result<Interpreted> {
    for name in w.coloring.colors.keys() {
        if !t.colors.contains(name) {
            return Err(Error::UnknownColor(name.clone()));
        }
    }
    let n = w.coloring.graph.vertex_count();
    let domain_bits = eval_unary(&w.coloring, &t.domain, DOMAIN_VAR)?;
    let vertex_ids: Vec<usize> = (0..n).filter(|&v| domain_bits[v]).collect();
    if vertex_ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let edge_bits = eval_binary(&w.coloring, &t.edge, DOMAIN_VAR, EDGE_VAR)?;
    let mut graph = Graph::new(vertex_ids.len())?;
    for (i, &u) in vertex_ids.iter().enumerate() {
        if edge_bits[u * n + u] {
            graph.set_loop(i, true);
        }
        for (j, &v) in vertex_ids.iter().enumerate().skip(i + 1) {
            if edge_bits[u * n + v] {
                graph.set_edge(i, j, true);
            }
        }
    }
    Ok(Interpreted { vertex_ids, graph })
}

// ---------------------------------------------------------------------------
// Composition
// ---------------------------------------------------------------------------

/// Substitutes the first transduction's edge formula into every edge atom
/// of the host, freshening bound variables against capture.
fn subst_edge_atoms(host: &Formula, replacement: &Formula, counter: &mut usize) -> Formula {
    match host {
        Formula::Edge(s, t) => {
            let mut fresh = replacement.clone();
            for bound in bound_vars(replacement) {
                let new_name = format!("w{}", *counter);
                *counter += 1;
                fresh = rename_bound(&fresh, &bound, &new_name);
            }
            fresh
                .substitute_var(DOMAIN_VAR, "#cx")
                .substitute_var(EDGE_VAR, "#cy")
                .substitute_var("#cx", s)
                .substitute_var("#cy", t)
        }
        Formula::Not(f) => Formula::not(subst_edge_atoms(f, replacement, counter)),
        Formula::And(fs) => {
            Formula::And(fs.iter().map(|f| subst_edge_atoms(f, replacement, counter)).collect())
        }
        Formula::Or(fs) => {
            Formula::Or(fs.iter().map(|f| subst_edge_atoms(f, replacement, counter)).collect())
        }
        Formula::Exists(v, f) => {
            Formula::Exists(v.clone(), Box::new(subst_edge_atoms(f, replacement, counter)))
        }
        Formula::Forall(v, f) => {
            Formula::Forall(v.clone(), Box::new(subst_edge_atoms(f, replacement, counter)))
        }
        Formula::ExistsSet(s, f) => {
            Formula::ExistsSet(s.clone(), Box::new(subst_edge_atoms(f, replacement, counter)))
        }
        Formula::ForallSet(s, f) => {
            Formula::ForallSet(s.clone(), Box::new(subst_edge_atoms(f, replacement, counter)))
        }
        other => other.clone(),
    }
}

fn bound_vars(f: &Formula) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    fn rec(f: &Formula, out: &mut BTreeSet<String>) {
        match f {
            Formula::Not(f) => rec(f, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|c| rec(c, out)),
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                out.insert(v.clone());
                rec(f, out);
            }
            Formula::ExistsSet(_, f) | Formula::ForallSet(_, f) => rec(f, out),
            _ => {}
        }
    }
    rec(f, &mut out);
    out
}

/// Renames a bound variable and its occurrences (used only with fresh
/// targets).
fn rename_bound(f: &Formula, from: &str, to: &str) -> Formula {
    match f {
        Formula::Exists(v, body) if v == from => {
            Formula::Exists(to.to_string(), Box::new(rename_bound(body, from, to).substitute_var(from, to)))
        }
        Formula::Forall(v, body) if v == from => {
            Formula::Forall(to.to_string(), Box::new(rename_bound(body, from, to).substitute_var(from, to)))
        }
        Formula::Not(body) => Formula::not(rename_bound(body, from, to)),
        Formula::And(fs) => Formula::And(fs.iter().map(|c| rename_bound(c, from, to)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|c| rename_bound(c, from, to)).collect()),
        Formula::Exists(v, body) => {
            Formula::Exists(v.clone(), Box::new(rename_bound(body, from, to)))
        }
        Formula::Forall(v, body) => {
            Formula::Forall(v.clone(), Box::new(rename_bound(body, from, to)))
        }
        Formula::ExistsSet(s, body) => {
            Formula::ExistsSet(s.clone(), Box::new(rename_bound(body, from, to)))
        }
        Formula::ForallSet(s, body) => {
            Formula::ForallSet(s.clone(), Box::new(rename_bound(body, from, to)))
        }
        other => other.clone(),
    }
}

/// Chains two transductions (first `t1`, then `t2`) by substituting `t1`'s
/// edge formula into `t2`'s atoms. Color signatures must be disjoint and
/// `t1`'s domain total; every construction in scope uses total domains.
pub fn compose(t1: &Transduction, t2: &Transduction) -> Result<Transduction> {
    if let Some(shared) = t1.colors.iter().find(|c| t2.colors.contains(c)) {
        return Err(Error::OverlappingColors(shared.clone()));
    }
    if !t1.is_total() {
        return Err(Error::PartialDomain);
    }
    let mut counter = 0;
    let domain = subst_edge_atoms(&t2.domain, &t1.edge, &mut counter);
    let edge = subst_edge_atoms(&t2.edge, &t1.edge, &mut counter);
    let mut colors = t1.colors.clone();
    colors.extend(t2.colors.iter().cloned());
    Transduction::new_unchecked(colors, domain, edge)
}

/// Merges the colorings of the two stages onto the first stage's input
/// graph; `apply(compose(t1,t2), ·)` on the result equals
/// `apply(t2, w2)`.
pub fn compose_witness(w1: &Witness, w2: &Witness) -> Result<Witness> {
    if w1.coloring.graph.vertex_count() != w2.coloring.graph.vertex_count() {
        return Err(Error::BadWitnessDomain);
    }
    let mut coloring = ColoredGraph::new(w1.coloring.graph.clone());
    for (name, set) in w1.coloring.colors.iter().chain(w2.coloring.colors.iter()) {
        if coloring.colors.contains_key(name) {
            return Err(Error::OverlappingColors(name.clone()));
        }
        coloring.colors.insert(name.clone(), set.clone());
    }
    Ok(Witness { coloring })
}

// ---------------------------------------------------------------------------
// Gluing and parallel application
// ---------------------------------------------------------------------------

fn glue_piece_color(i: usize) -> String {
    format!("U{}", i + 1)
}

fn glue_piece_complement_color(i: usize) -> String {
    format!("UBar{}", i + 1)
}

fn glue_lifted_color(c: &str, i: usize) -> String {
    format!("{}_{}", c, i + 1)
}

/// The transduction applying `t` independently inside `s` marked vertex
/// subsets and returning the union of the outputs.
pub fn glue(t: &Transduction, s: usize) -> Result<Transduction> {
    if s == 0 {
        return Err(Error::ZeroOrder);
    }
    let mut colors = Vec::new();
    for i in 0..s {
        for fresh in [glue_piece_color(i), glue_piece_complement_color(i)] {
            if t.colors.contains(&fresh) {
                return Err(Error::ColorClash(fresh));
            }
            colors.push(fresh);
        }
        for c in &t.colors {
            colors.push(glue_lifted_color(c, i));
        }
    }
    let mut domain_parts = Vec::new();
    let mut edge_parts = Vec::new();
    for i in 0..s {
        let nu_i = relativize_to_piece(&t.domain, i)?;
        let eta_i = relativize_to_piece(&t.edge, i)?;
        domain_parts.push(Formula::and(vec![
            Formula::color(glue_piece_color(i), DOMAIN_VAR),
            nu_i,
        ]));
        edge_parts.push(Formula::and(vec![
            Formula::color(glue_piece_color(i), DOMAIN_VAR),
            Formula::color(glue_piece_color(i), EDGE_VAR),
            eta_i,
        ]));
    }
    Transduction::new_unchecked(colors, Formula::or(domain_parts), Formula::or(edge_parts))
}

/// Reads colors from the `i`-th palette and guards quantifiers with the
/// `i`-th piece marker (existentials) or its complement (universals).
fn relativize_to_piece(f: &Formula, i: usize) -> Result<Formula> {
    Ok(match f {
        Formula::Color(c, x) => Formula::color(glue_lifted_color(c, i), x.clone()),
        Formula::Not(inner) => Formula::not(relativize_to_piece(inner, i)?),
        Formula::And(fs) => Formula::And(
            fs.iter().map(|c| relativize_to_piece(c, i)).collect::<Result<_>>()?,
        ),
        Formula::Or(fs) => Formula::Or(
            fs.iter().map(|c| relativize_to_piece(c, i)).collect::<Result<_>>()?,
        ),
        Formula::Exists(v, body) => Formula::exists(
            v.clone(),
            Formula::and(vec![
                Formula::color(glue_piece_color(i), v.clone()),
                relativize_to_piece(body, i)?,
            ]),
        ),
        Formula::Forall(v, body) => Formula::forall(
            v.clone(),
            Formula::or(vec![
                Formula::color(glue_piece_complement_color(i), v.clone()),
                relativize_to_piece(body, i)?,
            ]),
        ),
        Formula::ExistsSet(..) | Formula::ForallSet(..) | Formula::SetMem(..) => {
            return Err(Error::IllScoped("set quantifiers are unsupported in gluing".into()))
        }
        other => other.clone(),
    })
}

/// Assembles the witness for a glued application from per-piece witnesses:
/// each piece witness must color exactly the induced subgraph on its set.
pub fn glue_witness(
    t: &Transduction,
    g: &Graph,
    pieces: &[(VertexSet, Witness)],
) -> Result<Witness> {
    let n = g.vertex_count();
    let mut coloring = ColoredGraph::new(g.clone());
    for (i, (set, w)) in pieces.iter().enumerate() {
        let verts: Vec<usize> = set.iter().copied().collect();
        if w.coloring.graph != g.induced(&verts)? {
            return Err(Error::BadWitnessDomain);
        }
        coloring.insert_color(glue_piece_color(i), set.clone())?;
        coloring
            .insert_color(glue_piece_complement_color(i), (0..n).filter(|v| !set.contains(v)).collect())?;
        for c in &t.colors {
            let local = w.coloring.color(c);
            let lifted: VertexSet = local.iter().map(|&l| verts[l]).collect();
            coloring.insert_color(glue_lifted_color(c, i), lifted)?;
        }
    }
    Ok(Witness { coloring })
}

/// A distance guard with capture-free chain variables.
fn same_component_formula(d: usize, x: &str, y: &str, counter: &mut usize) -> Formula {
    if d == 0 {
        return Formula::eq(x, y);
    }
    fn chain(i: usize, d: usize, prev: &str, y: &str, base: usize) -> Formula {
        if i == d {
            Formula::edge(prev, y)
        } else {
            let z = format!("c{}_{}", base, i);
            Formula::exists(
                z.clone(),
                Formula::and(vec![Formula::edge(prev, &z), chain(i + 1, d, &z, y, base)]),
            )
        }
    }
    let base = *counter;
    *counter += 1;
    // With self-loops optional, "distance <= d" must also accept equality.
    Formula::or(vec![Formula::eq(x, y), chain(1, d, x, y, base)])
}

/// Applies an EP-transduction to every connected component simultaneously,
/// assuming all components of the input have diameter at most `d`: the
/// same-component predicate becomes a distance check and every quantifier
/// is relativized to the component of `x`.
pub fn parallel(t: &Transduction, d: usize) -> Result<Transduction> {
    if !t.is_ep() {
        return Err(Error::NotEp("parallel application needs EP formulas".into()));
    }
    let mut counter = 0;
    let domain = relativize_to_component(&t.domain, d, &mut counter)?;
    let guard = same_component_formula(d, DOMAIN_VAR, EDGE_VAR, &mut counter);
    let edge = Formula::and(vec![guard, relativize_to_component(&t.edge, d, &mut counter)?]);
    Transduction::new_unchecked(t.colors.clone(), domain, edge)
}

fn relativize_to_component(f: &Formula, d: usize, counter: &mut usize) -> Result<Formula> {
    Ok(match f {
        Formula::Exists(v, body) => {
            let guard = same_component_formula(d, DOMAIN_VAR, v, counter);
            Formula::exists(
                v.clone(),
                Formula::and(vec![guard, relativize_to_component(body, d, counter)?]),
            )
        }
        Formula::And(fs) => Formula::And(
            fs.iter().map(|c| relativize_to_component(c, d, counter)).collect::<Result<_>>()?,
        ),
        Formula::Or(fs) => Formula::Or(
            fs.iter().map(|c| relativize_to_component(c, d, counter)).collect::<Result<_>>()?,
        ),
        Formula::Forall(..) | Formula::Not(..) => {
            return Err(Error::NotEp("universal quantifier or negation in parallel".into()))
        }
        Formula::ExistsSet(..) | Formula::ForallSet(..) | Formula::SetMem(..) => {
            return Err(Error::IllScoped("set quantifiers are unsupported in parallel".into()))
        }
        other => other.clone(),
    })
}

/// Builds the witness for a parallel application from per-component
/// witnesses (components ordered by minimum vertex). Fails if any
/// component's diameter exceeds the bound.
pub fn parallel_witness(g: &Graph, d: usize, per_component: &[Witness]) -> Result<Witness> {
    let comps = g.components_and_diameters();
    if comps.len() != per_component.len() {
        return Err(Error::BadWitnessDomain);
    }
    let mut coloring = ColoredGraph::new(g.clone());
    for ((set, diam), w) in comps.iter().zip(per_component) {
        if *diam > d {
            return Err(Error::DiameterExceeded(
                set.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "),
                *diam,
                d,
            ));
        }
        let verts: Vec<usize> = set.iter().copied().collect();
        if w.coloring.graph != g.induced(&verts)? {
            return Err(Error::BadWitnessDomain);
        }
        for (name, local) in &w.coloring.colors {
            let lifted: VertexSet = local.iter().map(|&l| verts[l]).collect();
            let mut merged = coloring.color(name);
            merged.extend(lifted);
            coloring.colors.insert(name.clone(), merged);
        }
    }
    Ok(Witness { coloring })
}

// ---------------------------------------------------------------------------
// Pure-flip transductions
// ---------------------------------------------------------------------------

fn part_color(i: usize) -> String {
    format!("P{i}")
}

fn pair_flag_top(a: usize, b: usize) -> String {
    format!("Ftop{a}_{b}")
}

fn pair_flag_ok(a: usize, b: usize) -> String {
    format!("Fok{a}_{b}")
}

/// The quantifier-free positive recovery formula for pure flips within a
/// part budget. The formula depends only on the budget; the actual
/// partition, and which related pairs were fully adjacent or fully
/// non-adjacent, live in the witness colors.
pub fn pure_flip_budget_transduction(budget: usize) -> Result<Transduction> {
    if budget == 0 {
        return Err(Error::ZeroBudget);
    }
    let mut colors = Vec::new();
    for i in 0..budget {
        colors.push(part_color(i));
    }
    for a in 0..budget {
        for b in a..budget {
            colors.push(pair_flag_top(a, b));
            colors.push(pair_flag_ok(a, b));
        }
    }
    let alpha = Formula::and(vec![
        Formula::eq(DOMAIN_VAR, EDGE_VAR),
        Formula::edge(DOMAIN_VAR, DOMAIN_VAR),
    ]);
    let mut beta_parts = Vec::new();
    let mut gamma_parts = Vec::new();
    for i in 0..budget {
        for j in 0..budget {
            let (a, b) = (i.min(j), i.max(j));
            beta_parts.push(Formula::and(vec![
                Formula::color(part_color(i), DOMAIN_VAR),
                Formula::color(part_color(j), EDGE_VAR),
                Formula::color(pair_flag_top(a, b), DOMAIN_VAR),
            ]));
            gamma_parts.push(Formula::and(vec![
                Formula::color(part_color(i), DOMAIN_VAR),
                Formula::color(part_color(j), EDGE_VAR),
                Formula::color(pair_flag_ok(a, b), DOMAIN_VAR),
            ]));
        }
    }
    let gamma = Formula::and(vec![
        Formula::edge(DOMAIN_VAR, EDGE_VAR),
        Formula::or(gamma_parts),
    ]);
    let edge = Formula::or(vec![alpha, Formula::or(beta_parts), gamma]);
    Transduction::new_unchecked(colors, Formula::Top, edge)
}

/// The witness coloring of `h = flip(g, spec)` under which the
/// budget-`budget` pure-flip transduction reproduces `g`.
///
/// Requires every related pair to be fully adjacent or fully non-adjacent
/// in `g`, and a self-loop on every vertex whose part is flipped with
/// itself.
pub fn pure_flip_budget_witness(g: &Graph, spec: &FlipSpec, budget: usize) -> Result<Witness> {
    let p = &spec.partition;
    if p.host_size() != g.vertex_count() {
        return Err(Error::SizeMismatch(p.host_size(), g.vertex_count()));
    }
    let k = p.len();
    if k > budget {
        return Err(Error::PartOutOfRange(k, budget));
    }
    let mut f_top = BTreeSet::new();
    for &(a, b) in &spec.relation {
        let sa: VertexSet = p.part(a).iter().copied().collect();
        let sb: VertexSet = p.part(b).iter().copied().collect();
        if fully_adjacent(g, &sa, &sb)? {
            f_top.insert((a, b));
        } else if !fully_non_adjacent(g, &sa, &sb) {
            return Err(Error::NotPure(a, b));
        }
    }
    for v in 0..g.vertex_count() {
        let part = p.part_of(v);
        if spec.related(part, part) && !g.has_loop(v) {
            return Err(Error::LoopConditionViolated(v));
        }
    }

    let h = flip(g, spec)?;
    let all: VertexSet = (0..g.vertex_count()).collect();
    let mut coloring = ColoredGraph::new(h);
    for i in 0..k {
        coloring.insert_color(part_color(i), p.part(i).iter().copied().collect())?;
    }
    for a in 0..budget {
        for b in a..budget {
            if f_top.contains(&(a, b)) {
                coloring.insert_color(pair_flag_top(a, b), all.clone())?;
            }
            let in_f_bot = a < k
                && b < k
                && spec.relation.contains(&(a, b))
                && !f_top.contains(&(a, b));
            if !in_f_bot {
                coloring.insert_color(pair_flag_ok(a, b), all.clone())?;
            }
        }
    }
    Ok(Witness { coloring })
}

/// One-shot pure-flip recovery at budget `|spec.partition|`: the witness
/// colors `h = flip(g, spec)` and applying the transduction to it yields
/// `g` exactly.
pub fn pure_flip_transduction(g: &Graph, spec: &FlipSpec) -> Result<(Transduction, Witness)> {
    let budget = spec.partition.len();
    let t = pure_flip_budget_transduction(budget)?;
    let w = pure_flip_budget_witness(g, spec, budget)?;
    Ok((t, w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EditDirection {
    Remove,
    Add,
}

/// Removes (or adds) an edge set with a small vertex cover via a pure
/// flip over the common refinement of the per-cover-vertex partitions:
/// applying the returned transduction to the colored input graph yields
/// `(V, E∖X)` or `(V, E∪X)`.
pub fn vc_edit(
    g: &Graph,
    x_edges: &[(usize, usize)],
    cover: &VertexSet,
    direction: EditDirection,
) -> Result<(Transduction, Witness)> {
    let (spec, edited) = vc_edit_spec(g, x_edges, cover, direction)?;
    pure_flip_transduction(&edited, &spec)
}

/// The pure-flip data realizing the edit: the common refinement of the
/// per-cover-vertex partitions, the relation pairing each cover vertex
/// with its edit neighborhood, and the edited graph.
pub fn vc_edit_spec(
    g: &Graph,
    x_edges: &[(usize, usize)],
    cover: &VertexSet,
    direction: EditDirection,
) -> Result<(FlipSpec, Graph)> {
    if !g.is_reflexive() {
        return Err(Error::NotReflexive);
    }
    let n = g.vertex_count();
    for &(u, v) in x_edges {
        if u == v {
            return Err(Error::BadEditEdges(format!("self-pair ({u},{u})")));
        }
        if u >= n || v >= n {
            return Err(Error::BadEditEdges(format!("vertex out of range in ({u},{v})")));
        }
        if !cover.contains(&u) && !cover.contains(&v) {
            return Err(Error::NotACover);
        }
        match direction {
            EditDirection::Remove if !g.adjacent(u, v) => {
                return Err(Error::BadEditEdges(format!("({u},{v}) is not an edge")));
            }
            EditDirection::Add if g.adjacent(u, v) => {
                return Err(Error::BadEditEdges(format!("({u},{v}) is already an edge")));
            }
            _ => {}
        }
    }

    // Per cover vertex: {v_i}, its X-neighborhood, and the rest.
    let mut refined = Partition::whole(n)?;
    for &vi in cover {
        let x_neighbors: Vec<usize> = (0..n)
            .filter(|&u| {
                u != vi
                    && x_edges
                        .iter()
                        .any(|&(a, b)| (a, b) == (vi.min(u), vi.max(u)) || (a, b) == (vi.max(u), vi.min(u)))
            })
            .collect();
        let mut parts = vec![vec![vi]];
        if !x_neighbors.is_empty() {
            parts.push(x_neighbors.clone());
        }
        let rest: Vec<usize> =
            (0..n).filter(|&u| u != vi && !x_neighbors.contains(&u)).collect();
        if !rest.is_empty() {
            parts.push(rest);
        }
        refined = refined.refine(&Partition::from_parts(n, parts)?)?;
    }

    let mut pairs = Vec::new();
    for &vi in cover {
        let vi_part = refined.part_of(vi);
        for (idx, part) in refined.parts().iter().enumerate() {
            if part.iter().all(|&u| {
                u != vi
                    && x_edges
                        .iter()
                        .any(|&(a, b)| (a, b) == (vi.min(u), vi.max(u)) || (a, b) == (vi.max(u), vi.min(u)))
            }) {
                pairs.push((vi_part, idx));
            }
        }
    }
    let spec = FlipSpec::new(refined, &pairs)?;
    let edited = flip(g, &spec)?;
    // The flip must realize exactly the requested edit.
    debug_assert_eq!(edited, {
        let mut e = g.clone();
        for &(u, v) in x_edges {
            e.set_edge(u, v, matches!(direction, EditDirection::Add));
        }
        e
    });
    Ok((spec, edited))
}

/// Extends a quantifier-free positive transduction of `h_without_b` into
/// one of the full graph `h`, marking the previous vertex set, the new
/// vertex, and its intended neighborhood (which contains `b` itself when
/// the target has a self-loop there).
pub fn add_one(
    t: &Transduction,
    prev: &Witness,
    h: &Graph,
    b: usize,
    target_neighborhood: &VertexSet,
) -> Result<(Transduction, Witness)> {
    let class_d = classify(t.domain_formula())?;
    let class_e = classify(t.edge_formula())?;
    if !(t.is_total() && class_d.positive && class_e.positive && class_e.qrank == 0) {
        return Err(Error::NotEp("add-one extension needs a quantifier-free positive base".into()));
    }
    let n = h.vertex_count();
    if b >= n {
        return Err(Error::VertexOutOfRange(b, n));
    }
    let rest: Vec<usize> = (0..n).filter(|&v| v != b).collect();
    if prev.coloring.graph != h.induced(&rest)? {
        return Err(Error::BadWitnessDomain);
    }

    let taken: BTreeSet<String> = t.colors.iter().cloned().collect();
    let a_color = fresh_color("A", &taken);
    let cb_color = fresh_color("Cb", &taken);
    let nb_color = fresh_color("Nb", &taken);

    let mut colors = t.colors.clone();
    colors.extend([a_color.clone(), cb_color.clone(), nb_color.clone()]);
    let edge = Formula::or(vec![
        Formula::and(vec![
            Formula::color(cb_color.clone(), DOMAIN_VAR),
            Formula::color(nb_color.clone(), EDGE_VAR),
        ]),
        Formula::and(vec![
            Formula::color(cb_color.clone(), EDGE_VAR),
            Formula::color(nb_color.clone(), DOMAIN_VAR),
        ]),
        Formula::and(vec![
            Formula::color(a_color.clone(), DOMAIN_VAR),
            Formula::color(a_color.clone(), EDGE_VAR),
            t.edge_formula().clone(),
        ]),
    ]);
    let extended = Transduction::new_unchecked(colors, Formula::Top, edge)?;

    let mut coloring = ColoredGraph::new(h.clone());
    for (name, local) in &prev.coloring.colors {
        let lifted: VertexSet = local.iter().map(|&l| rest[l]).collect();
        coloring.colors.insert(name.clone(), lifted);
    }
    coloring.insert_color(a_color, rest.iter().copied().collect())?;
    coloring.insert_color(cb_color, VertexSet::from([b]))?;
    coloring.insert_color(nb_color, target_neighborhood.clone())?;
    Ok((extended, Witness { coloring }))
}

fn fresh_color(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let mut i = 2;
    loop {
        let candidate = format!("{base}{i}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

/// Recovers `g` from the colored subflip `g ⊖ p` with a quantifier-free
/// positive formula, provided `g` has no induced irreflexive clique of
/// order `t`: the loopless vertices inside self-flipped clique parts are
/// peeled off, the rest is recovered as a pure flip, and the peeled
/// vertices are added back one by one.
pub fn subflip_recover(g: &Graph, p: &Partition, t: usize) -> Result<(Transduction, Witness)> {
    if pattern_order(g, PatternKind::IrreflexiveClique) >= t {
        return Err(Error::IrreflexiveCliqueFound(t));
    }
    let spec = max_flip_relation(g, p)?;
    let h = flip(g, &spec)?;
    let n = g.vertex_count();

    let peel: Vec<usize> = (0..n)
        .filter(|&v| {
            let part = p.part_of(v);
            spec.related(part, part) && !g.has_loop(v)
        })
        .collect();
    let keep: Vec<usize> = (0..n).filter(|v| !peel.contains(v)).collect();

    let (mut t_cur, mut w_cur, mut current) = if keep.is_empty() {
        // Everything is peeled; start from the first peeled vertex, where
        // the subflip left the (loopless) single-vertex graph unchanged.
        let first = peel[0];
        let base = Witness::plain(h.induced(&[first])?);
        (Transduction::identity(), base, vec![first])
    } else {
        let keep_set: VertexSet = keep.iter().copied().collect();
        let g_keep = g.induced(&keep)?;
        let restricted = restrict_spec(&spec, &keep_set)?;
        let (t0, w0) = pure_flip_transduction(&g_keep, &restricted)?;
        (t0, w0, keep.clone())
    };

    for &b in &peel {
        if current.contains(&b) {
            continue;
        }
        let mut extended = current.clone();
        extended.push(b);
        extended.sort_unstable();
        let local_b = extended.iter().position(|&v| v == b).unwrap();
        let mut neighborhood: VertexSet = extended
            .iter()
            .enumerate()
            .filter(|&(_, &u)| u != b && g.adjacent(b, u))
            .map(|(i, _)| i)
            .collect();
        if g.has_loop(b) {
            neighborhood.insert(local_b);
        }
        let h_ext = h.induced(&extended)?;
        let (t_next, w_next) = add_one(&t_cur, &w_cur, &h_ext, local_b, &neighborhood)?;
        t_cur = t_next;
        w_cur = w_next;
        current = extended;
    }
    Ok((t_cur, w_cur))
}

/// Restricts a flip spec to a vertex subset (relabeled), dropping pairs
/// whose parts were emptied.
fn restrict_spec(spec: &FlipSpec, s: &VertexSet) -> Result<FlipSpec> {
    let restricted = spec.partition.restrict(s)?;
    let verts: Vec<usize> = s.iter().copied().collect();
    // Map old part id -> new part id via any surviving member.
    let mut old_to_new: BTreeMap<usize, usize> = BTreeMap::new();
    for (local, &v) in verts.iter().enumerate() {
        old_to_new.insert(spec.partition.part_of(v), restricted.part_of(local));
    }
    let pairs: Vec<(usize, usize)> = spec
        .relation
        .iter()
        .filter_map(|&(a, b)| Some((*old_to_new.get(&a)?, *old_to_new.get(&b)?)))
        .collect();
    FlipSpec::new(restricted, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flip::subflip;
    use crate::graph::gen;

    fn apply_total(t: &Transduction, w: &Witness) -> Graph {
        let n = w.coloring.graph.vertex_count();
        let out = apply(t, w).unwrap();
        out.expect_total(n).unwrap().clone()
    }

    #[test]
    fn identity_reproduces_input() {
        let g = Graph::build(4, &[(0, 2), (1, 3)], &VertexSet::from([1, 2])).unwrap();
        let t = Transduction::identity();
        assert_eq!(apply_total(&t, &Witness::plain(g.clone())), g);
    }

    #[test]
    fn square_transduction_on_star() {
        let mut g = Graph::new(4).unwrap();
        for leaf in 1..4 {
            g.set_edge(0, leaf, true);
        }
        let square = crate::logic::parse_formula("E(x,y) | exists z (E(x,z) & E(z,y))").unwrap();
        let t = Transduction::new_unchecked(vec![], Formula::Top, square).unwrap();
        let out = apply_total(&t, &Witness::plain(g));
        assert!(out.is_reflexive());
        for u in 1..4 {
            for v in (u + 1)..4 {
                assert!(out.adjacent(u, v));
            }
        }
    }

    #[test]
    fn domain_restricts_output() {
        let g = gen::path(4).unwrap();
        let t = Transduction::new_unchecked(
            vec!["Red".into()],
            Formula::color("Red", DOMAIN_VAR),
            Formula::edge(DOMAIN_VAR, EDGE_VAR),
        )
        .unwrap();
        let w = Witness::new(
            ColoredGraph::new(g.clone()).with_color("Red", VertexSet::from([1, 2, 3])).unwrap(),
        );
        let out = apply(&t, &w).unwrap();
        assert_eq!(out.vertex_ids, vec![1, 2, 3]);
        assert_eq!(out.graph, gen::path(3).unwrap());
    }

    #[test]
    fn compose_identities() {
        let t1 = Transduction::identity().with_prefixed_colors("L");
        let t2 = Transduction::identity().with_prefixed_colors("R");
        let t = compose(&t1, &t2).unwrap();
        assert!(t.is_ep());
        for g in crate::enumerate::all_graphs(4) {
            let w = compose_witness(&Witness::plain(g.clone()), &Witness::plain(g.clone())).unwrap();
            assert_eq!(apply_total(&t, &w), g);
        }
    }

    #[test]
    fn compose_requires_disjoint_colors_and_total_domain() {
        let base = Transduction::new_unchecked(
            vec!["Red".into()],
            Formula::Top,
            Formula::edge(DOMAIN_VAR, EDGE_VAR),
        )
        .unwrap();
        assert!(matches!(compose(&base, &base), Err(Error::OverlappingColors(_))));

        let partial = Transduction::new_unchecked(
            vec!["Red".into()],
            Formula::color("Red", DOMAIN_VAR),
            Formula::edge(DOMAIN_VAR, EDGE_VAR),
        )
        .unwrap();
        assert!(matches!(
            compose(&partial, &Transduction::identity()),
            Err(Error::PartialDomain)
        ));
    }

    #[test]
    fn compose_substitutes_edges() {
        // First stage: the square transduction; second: one more step.
        let square = crate::logic::parse_formula("E(x,y) | exists z (E(x,z) & E(z,y))").unwrap();
        let t1 = Transduction::new_unchecked(vec![], Formula::Top, square).unwrap();
        let step = crate::logic::parse_formula("exists z (E(x,z) & E(z,y))").unwrap();
        let t2 = Transduction::new_unchecked(vec![], Formula::Top, step).unwrap();
        let t = compose(&t1, &t2).unwrap();

        let g = gen::path(5).unwrap();
        let mid = apply_total(&t1, &Witness::plain(g.clone()));
        let expect = apply_total(&t2, &Witness::plain(mid));
        let got = apply_total(&t, &Witness::plain(g));
        assert_eq!(got, expect);
    }

    #[test]
    fn glue_two_pieces_of_a_path() {
        let g = gen::path(4).unwrap();
        let t = Transduction::identity();
        let glued = glue(&t, 2).unwrap();
        assert!(glued.is_ep());
        let sets = [VertexSet::from([0, 1]), VertexSet::from([2, 3])];
        let pieces: Vec<(VertexSet, Witness)> = sets
            .iter()
            .map(|s| {
                let verts: Vec<usize> = s.iter().copied().collect();
                (s.clone(), Witness::plain(g.induced(&verts).unwrap()))
            })
            .collect();
        let w = glue_witness(&t, &g, &pieces).unwrap();
        let out = apply_total(&glued, &w);
        // Union of the two induced edges: the cross edge 1-2 is gone.
        let expect = Graph::build(4, &[(0, 1), (2, 3)], &VertexSet::new()).unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn glue_overlapping_pieces_of_a_triangle() {
        let g = gen::cycle(3).unwrap();
        let t = Transduction::identity();
        let glued = glue(&t, 2).unwrap();
        let sets = [VertexSet::from([0, 1]), VertexSet::from([1, 2])];
        let pieces: Vec<(VertexSet, Witness)> = sets
            .iter()
            .map(|s| {
                let verts: Vec<usize> = s.iter().copied().collect();
                (s.clone(), Witness::plain(g.induced(&verts).unwrap()))
            })
            .collect();
        let w = glue_witness(&t, &g, &pieces).unwrap();
        let out = apply_total(&glued, &w);
        let expect = Graph::build(3, &[(0, 1), (1, 2)], &VertexSet::new()).unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn parallel_on_two_components() {
        let g = Graph::build(4, &[(0, 1), (2, 3)], &VertexSet::from([0, 1, 2, 3])).unwrap();
        let t = Transduction::identity();
        let par = parallel(&t, 1).unwrap();
        let comps: Vec<Witness> = g
            .components()
            .iter()
            .map(|c| {
                let verts: Vec<usize> = c.iter().copied().collect();
                Witness::plain(g.induced(&verts).unwrap())
            })
            .collect();
        let w = parallel_witness(&g, 1, &comps).unwrap();
        assert_eq!(apply_total(&par, &w), g);
    }

    #[test]
    fn parallel_detects_large_diameter() {
        let g = gen::path(4).unwrap();
        let w = vec![Witness::plain(g.clone())];
        assert!(matches!(parallel_witness(&g, 2, &w), Err(Error::DiameterExceeded(..))));
    }

    #[test]
    fn pure_flip_round_trip_examples() {
        // Reflexive K_2 flipped across singleton parts: two loops back to K_2.
        let g = gen::clique(2).unwrap().with_all_loops();
        let spec = FlipSpec::new(Partition::singletons(2).unwrap(), &[(0, 1)]).unwrap();
        let (t, w) = pure_flip_transduction(&g, &spec).unwrap();
        assert_eq!(w.coloring.graph.edge_count(), 0);
        assert_eq!(apply_total(&t, &w), g);
        assert!(classify(t.edge_formula()).unwrap().positive);
        assert_eq!(crate::logic::qrank(t.edge_formula()), 0);

        // Empty relation: the formula reduces to an adjacency copy.
        let g = gen::path(3).unwrap().with_all_loops();
        let spec = FlipSpec::new(Partition::whole(3).unwrap(), &[]).unwrap();
        let (t, w) = pure_flip_transduction(&g, &spec).unwrap();
        assert_eq!(apply_total(&t, &w), g);
    }

    #[test]
    fn pure_flip_rejects_impure_and_loopless() {
        let p4 = gen::path(4).unwrap();
        let p = Partition::from_parts(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let spec = FlipSpec::new(p, &[(0, 1)]).unwrap();
        assert!(matches!(pure_flip_transduction(&p4, &spec), Err(Error::NotPure(0, 1))));

        let k2 = gen::clique(2).unwrap();
        let spec = FlipSpec::new(Partition::whole(2).unwrap(), &[(0, 0)]).unwrap();
        assert!(matches!(
            pure_flip_transduction(&k2, &spec),
            Err(Error::LoopConditionViolated(0))
        ));
    }

    #[test]
    fn vc_edit_examples() {
        // X = ∅ is the identity edit.
        let g = gen::path(3).unwrap().with_all_loops();
        let (t, w) = vc_edit(&g, &[], &VertexSet::new(), EditDirection::Remove).unwrap();
        assert_eq!(apply_total(&t, &w), g);

        // Reflexive P_3, drop the edge 0-1 with cover {1}.
        let (t, w) = vc_edit(&g, &[(0, 1)], &VertexSet::from([1]), EditDirection::Remove).unwrap();
        let out = apply_total(&t, &w);
        let expect = Graph::build(3, &[(1, 2)], &VertexSet::from([0, 1, 2])).unwrap();
        assert_eq!(out, expect);

        // Reflexive K_3, drop the star at vertex 0.
        let k3 = gen::clique(3).unwrap().with_all_loops();
        let (t, w) =
            vc_edit(&k3, &[(0, 1), (0, 2)], &VertexSet::from([0]), EditDirection::Remove).unwrap();
        let out = apply_total(&t, &w);
        let expect = Graph::build(3, &[(1, 2)], &VertexSet::from([0, 1, 2])).unwrap();
        assert_eq!(out, expect);

        // Adding back is the inverse.
        let (t, w) = vc_edit(&expect, &[(0, 1), (0, 2)], &VertexSet::from([0]), EditDirection::Add)
            .unwrap();
        assert_eq!(apply_total(&t, &w), k3);
    }

    #[test]
    fn add_one_isolated_and_dominating() {
        let base_graph = gen::path(3).unwrap().with_all_loops();
        let t = Transduction::identity();
        // Extend by an isolated (loopless) vertex 3.
        let mut h = Graph::new(4).unwrap();
        for v in 0..3 {
            h.set_loop(v, true);
        }
        h.set_edge(0, 1, true);
        h.set_edge(1, 2, true);
        let (t1, w1) =
            add_one(&t, &Witness::plain(base_graph.clone()), &h, 3, &VertexSet::new()).unwrap();
        assert_eq!(apply_total(&t1, &w1), h);

        // Extend by a dominating vertex with a loop instead.
        let neighborhood = VertexSet::from([0, 1, 2, 3]);
        let (t2, w2) = add_one(&t, &Witness::plain(base_graph), &h, 3, &neighborhood).unwrap();
        let out = apply_total(&t2, &w2);
        let mut expect = h.clone();
        expect.set_loop(3, true);
        for v in 0..3 {
            expect.set_edge(v, 3, true);
        }
        assert_eq!(out, expect);
    }

    #[test]
    fn subflip_recover_reflexive_reduces_to_pure_flip() {
        let g = gen::clique(3).unwrap().with_all_loops();
        let p = Partition::whole(3).unwrap();
        let (t, w) = subflip_recover(&g, &p, 3).unwrap();
        assert_eq!(w.coloring.graph, subflip(&g, &p).unwrap());
        assert_eq!(apply_total(&t, &w), g);
    }

    #[test]
    fn subflip_recover_irreflexive_k2() {
        let g = gen::clique(2).unwrap();
        let p = Partition::whole(2).unwrap();
        let (t, w) = subflip_recover(&g, &p, 3).unwrap();
        assert_eq!(w.coloring.graph, gen::independent(2).unwrap());
        assert_eq!(apply_total(&t, &w), g);
        let c = classify(t.edge_formula()).unwrap();
        assert!(c.positive && c.qrank == 0);
    }

    #[test]
    fn subflip_recover_rejects_large_irreflexive_clique() {
        let g = gen::clique(4).unwrap();
        let p = Partition::whole(4).unwrap();
        assert!(matches!(subflip_recover(&g, &p, 3), Err(Error::IrreflexiveCliqueFound(3))));
    }

    #[test]
    fn subflip_recover_mixed_loops() {
        // Clique part with exactly one loopless vertex: that vertex gets
        // peeled and added back.
        let mut g = gen::clique(3).unwrap();
        g.set_loop(0, true);
        g.set_loop(1, true);
        let p = Partition::whole(3).unwrap();
        let (t, w) = subflip_recover(&g, &p, 2).unwrap();
        assert_eq!(w.coloring.graph, subflip(&g, &p).unwrap());
        assert_eq!(apply_total(&t, &w), g);
    }
}
