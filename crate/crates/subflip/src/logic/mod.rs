//! FO/MSO formulas over the colored-graph signature: abstract syntax,
//! parsing and rendering, naive and relational evaluation, the existential
//! positive normal form, the positive-MSO collapse, and the monadic
//! non-equality-property toolkit.

mod eval;
mod mso;
mod nep;
mod normal;
mod parser;

pub use eval::{eval_binary, eval_unary, evaluate};
pub use mso::mso_collapse;
pub use nep::{disjointify, nep_check, sunflower_tuples, NEPInstance};
pub use normal::{clique_formula_check, ep_normal_form, Conjunct, NormalForm};
pub use parser::{parse_formula, parse_formula_with_sets, render};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};

/// First-order / monadic second-order formulas. Terms are variables; `E`
/// applied to the same variable twice reads the self-loop set. There is no
/// primitive `≠`: it only arises as `Not(Eq(..))`, so "positive" is exactly
/// "no `Not` node".
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Top,
    Bot,
    Edge(String, String),
    Eq(String, String),
    /// A color predicate applied to a variable.
    Color(String, String),
    /// A set-variable atom `Y(x)`.
    SetMem(String, String),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(String, Box<Formula>),
    Forall(String, Box<Formula>),
    ExistsSet(String, Box<Formula>),
    ForallSet(String, Box<Formula>),
}

impl Formula {
    /// N-ary conjunction with flattening; empty is `Top`, singleton is the
    /// child itself.
    pub fn and(children: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::Top,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    /// N-ary disjunction with flattening; empty is `Bot`.
    pub fn or(children: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for c in children {
            match c {
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::Bot,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Exists(var.into(), Box::new(body))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::Forall(var.into(), Box::new(body))
    }

    pub fn not(body: Formula) -> Formula {
        Formula::Not(Box::new(body))
    }

    pub fn edge(x: impl Into<String>, y: impl Into<String>) -> Formula {
        Formula::Edge(x.into(), y.into())
    }

    pub fn eq(x: impl Into<String>, y: impl Into<String>) -> Formula {
        Formula::Eq(x.into(), y.into())
    }

    pub fn color(name: impl Into<String>, x: impl Into<String>) -> Formula {
        Formula::Color(name.into(), x.into())
    }

    /// Free first-order variables.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::Top | Formula::Bot => {}
            Formula::Edge(x, y) | Formula::Eq(x, y) => {
                for v in [x, y] {
                    if !bound.contains(v) {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Color(_, x) | Formula::SetMem(_, x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Exists(v, f) | Formula::Forall(v, f) => {
                bound.push(v.clone());
                f.collect_free(bound, out);
                bound.pop();
            }
            Formula::ExistsSet(_, f) | Formula::ForallSet(_, f) => f.collect_free(bound, out),
        }
    }

    /// Free set variables.
    pub fn free_set_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free_sets(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free_sets(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::SetMem(name, _) => {
                if !bound.contains(name) {
                    out.insert(name.clone());
                }
            }
            Formula::Not(f) => f.collect_free_sets(bound, out),
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free_sets(bound, out);
                }
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => f.collect_free_sets(bound, out),
            Formula::ExistsSet(name, f) | Formula::ForallSet(name, f) => {
                bound.push(name.clone());
                f.collect_free_sets(bound, out);
                bound.pop();
            }
            _ => {}
        }
    }

    /// All variable names occurring anywhere (bound or free).
    pub fn all_var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| match f {
            Formula::Edge(x, y) | Formula::Eq(x, y) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Formula::Color(_, x) | Formula::SetMem(_, x) => {
                out.insert(x.clone());
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// All color names referenced by `Color` atoms.
    pub fn color_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Color(name, _) = f {
                out.insert(name.clone());
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(inner) => inner.walk(f),
            Formula::And(fs) | Formula::Or(fs) => {
                for c in fs {
                    c.walk(f);
                }
            }
            Formula::Exists(_, inner)
            | Formula::Forall(_, inner)
            | Formula::ExistsSet(_, inner)
            | Formula::ForallSet(_, inner) => inner.walk(f),
            _ => {}
        }
    }

    /// Renames free occurrences of the FO variable `from` to `to`. The
    /// target name must not be bound anywhere along the way; callers pick
    /// fresh names.
    pub fn substitute_var(&self, from: &str, to: &str) -> Formula {
        let ren = |v: &String| if v == from { to.to_string() } else { v.clone() };
        match self {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Edge(x, y) => Formula::Edge(ren(x), ren(y)),
            Formula::Eq(x, y) => Formula::Eq(ren(x), ren(y)),
            Formula::Color(c, x) => Formula::Color(c.clone(), ren(x)),
            Formula::SetMem(s, x) => Formula::SetMem(s.clone(), ren(x)),
            Formula::Not(f) => Formula::not(f.substitute_var(from, to)),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|f| f.substitute_var(from, to)).collect())
            }
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.substitute_var(from, to)).collect()),
            Formula::Exists(v, f) if v != from => {
                Formula::Exists(v.clone(), Box::new(f.substitute_var(from, to)))
            }
            Formula::Forall(v, f) if v != from => {
                Formula::Forall(v.clone(), Box::new(f.substitute_var(from, to)))
            }
            Formula::Exists(..) | Formula::Forall(..) => self.clone(),
            Formula::ExistsSet(s, f) => {
                Formula::ExistsSet(s.clone(), Box::new(f.substitute_var(from, to)))
            }
            Formula::ForallSet(s, f) => {
                Formula::ForallSet(s.clone(), Box::new(f.substitute_var(from, to)))
            }
        }
    }

    /// Renames every color atom through the map (other names untouched).
    pub fn rename_colors(&self, map: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::Color(c, x) => {
                let name = map.get(c).cloned().unwrap_or_else(|| c.clone());
                Formula::Color(name, x.clone())
            }
            Formula::Not(f) => Formula::not(f.rename_colors(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|f| f.rename_colors(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|f| f.rename_colors(map)).collect()),
            Formula::Exists(v, f) => Formula::Exists(v.clone(), Box::new(f.rename_colors(map))),
            Formula::Forall(v, f) => Formula::Forall(v.clone(), Box::new(f.rename_colors(map))),
            Formula::ExistsSet(s, f) => {
                Formula::ExistsSet(s.clone(), Box::new(f.rename_colors(map)))
            }
            Formula::ForallSet(s, f) => {
                Formula::ForallSet(s.clone(), Box::new(f.rename_colors(map)))
            }
            other => other.clone(),
        }
    }

    /// Replaces every edge atom `E(s,t)` by `replacement` with its two
    /// distinguished free variables substituted by `s` and `t`. The
    /// replacement's bound variables are freshened against the host.
    pub fn substitute_edges(&self, replacement: &Formula, x: &str, y: &str) -> Formula {
        match self {
            Formula::Edge(s, t) => {
                let fresh = replacement.clone();
                // x/y are free in the replacement; rename them to the
                // atom's terms via intermediate names to dodge swaps.
                let tmp_x = "#subst_x".to_string();
                let tmp_y = "#subst_y".to_string();
                fresh
                    .substitute_var(x, &tmp_x)
                    .substitute_var(y, &tmp_y)
                    .substitute_var(&tmp_x, s)
                    .substitute_var(&tmp_y, t)
            }
            Formula::Not(f) => Formula::not(f.substitute_edges(replacement, x, y)),
            Formula::And(fs) => {
                Formula::And(fs.iter().map(|f| f.substitute_edges(replacement, x, y)).collect())
            }
            Formula::Or(fs) => {
                Formula::Or(fs.iter().map(|f| f.substitute_edges(replacement, x, y)).collect())
            }
            Formula::Exists(v, f) => {
                Formula::Exists(v.clone(), Box::new(f.substitute_edges(replacement, x, y)))
            }
            Formula::Forall(v, f) => {
                Formula::Forall(v.clone(), Box::new(f.substitute_edges(replacement, x, y)))
            }
            Formula::ExistsSet(s, f) => {
                Formula::ExistsSet(s.clone(), Box::new(f.substitute_edges(replacement, x, y)))
            }
            Formula::ForallSet(s, f) => {
                Formula::ForallSet(s.clone(), Box::new(f.substitute_edges(replacement, x, y)))
            }
            other => other.clone(),
        }
    }
}

/// A graph expanded by named vertex colors. Colors absent from the map
/// are empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoredGraph {
    pub graph: Graph,
    pub colors: BTreeMap<String, VertexSet>,
}

impl ColoredGraph {
    pub fn new(graph: Graph) -> Self {
        ColoredGraph { graph, colors: BTreeMap::new() }
    }

    pub fn with_color(mut self, name: impl Into<String>, set: VertexSet) -> Result<Self> {
        self.insert_color(name, set)?;
        Ok(self)
    }

    pub fn insert_color(&mut self, name: impl Into<String>, set: VertexSet) -> Result<()> {
        let name = name.into();
        for &v in &set {
            if v >= self.graph.vertex_count() {
                return Err(Error::VertexOutOfRange(v, self.graph.vertex_count()));
            }
        }
        self.colors.insert(name, set);
        Ok(())
    }

    pub fn color(&self, name: &str) -> VertexSet {
        self.colors.get(name).cloned().unwrap_or_default()
    }

    pub fn has_vertex_color(&self, name: &str, v: usize) -> bool {
        self.colors.get(name).is_some_and(|s| s.contains(&v))
    }
}

/// Syntactic classification flags of a formula.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    /// No negation at all (hence no `≠`).
    pub positive: bool,
    /// No universal quantifier and negation only on quantifier-free parts.
    pub existential: bool,
    /// Existential, positive, and purely first-order.
    pub ep: bool,
    /// First-order quantifier rank.
    pub qrank: usize,
    /// Set variables whose every occurrence sits under an even number of
    /// negations.
    pub positive_in: BTreeSet<String>,
}

pub fn classify(f: &Formula) -> Result<Classification> {
    check_scoping(f)?;
    let positive = !contains_not(f);
    let existential = is_existential(f);
    let first_order = is_first_order(f);
    let mut parity: BTreeMap<String, (bool, bool)> = BTreeMap::new();
    collect_parities(f, false, &mut parity);
    let positive_in = parity
        .into_iter()
        .filter(|(_, (_, odd))| !odd)
        .map(|(name, _)| name)
        .collect();
    Ok(Classification {
        positive,
        existential,
        ep: positive && existential && first_order,
        qrank: qrank(f),
        positive_in,
    })
}

/// A name may not be used both as a first-order variable and as a set
/// variable.
fn check_scoping(f: &Formula) -> Result<()> {
    let fo = f.all_var_names();
    let mut so = f.free_set_vars();
    f.walk_set_binders(&mut |name| {
        so.insert(name.to_string());
    });
    if let Some(clash) = fo.intersection(&so).next() {
        return Err(Error::IllScoped(format!(
            "`{clash}` is used both as a vertex variable and a set variable"
        )));
    }
    Ok(())
}

impl Formula {
    fn walk_set_binders(&self, f: &mut impl FnMut(&str)) {
        match self {
            Formula::ExistsSet(name, inner) | Formula::ForallSet(name, inner) => {
                f(name);
                inner.walk_set_binders(f);
            }
            Formula::Not(inner)
            | Formula::Exists(_, inner)
            | Formula::Forall(_, inner) => inner.walk_set_binders(f),
            Formula::And(fs) | Formula::Or(fs) => {
                for c in fs {
                    c.walk_set_binders(f);
                }
            }
            _ => {}
        }
    }
}

fn contains_not(f: &Formula) -> bool {
    match f {
        Formula::Not(_) => true,
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(contains_not),
        Formula::Exists(_, f)
        | Formula::Forall(_, f)
        | Formula::ExistsSet(_, f)
        | Formula::ForallSet(_, f) => contains_not(f),
        _ => false,
    }
}

fn contains_quantifier(f: &Formula) -> bool {
    match f {
        Formula::Exists(..) | Formula::Forall(..) | Formula::ExistsSet(..) | Formula::ForallSet(..) => true,
        Formula::Not(f) => contains_quantifier(f),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(contains_quantifier),
        _ => false,
    }
}

fn is_existential(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) | Formula::ForallSet(..) => false,
        Formula::Not(inner) => !contains_quantifier(inner),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().all(is_existential),
        Formula::Exists(_, f) | Formula::ExistsSet(_, f) => is_existential(f),
        _ => true,
    }
}

fn is_first_order(f: &Formula) -> bool {
    match f {
        Formula::SetMem(..) | Formula::ExistsSet(..) | Formula::ForallSet(..) => false,
        Formula::Not(f) => is_first_order(f),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().all(is_first_order),
        Formula::Exists(_, f) | Formula::Forall(_, f) => is_first_order(f),
        _ => true,
    }
}

/// First-order quantifier rank; set quantifiers are transparent.
pub fn qrank(f: &Formula) -> usize {
    match f {
        Formula::Not(f) => qrank(f),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().map(qrank).max().unwrap_or(0),
        Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + qrank(f),
        Formula::ExistsSet(_, f) | Formula::ForallSet(_, f) => qrank(f),
        _ => 0,
    }
}

fn collect_parities(f: &Formula, odd: bool, out: &mut BTreeMap<String, (bool, bool)>) {
    match f {
        Formula::SetMem(name, _) => {
            let entry = out.entry(name.clone()).or_insert((false, false));
            if odd {
                entry.1 = true;
            } else {
                entry.0 = true;
            }
        }
        Formula::Not(f) => collect_parities(f, !odd, out),
        Formula::And(fs) | Formula::Or(fs) => {
            for c in fs {
                collect_parities(c, odd, out);
            }
        }
        Formula::Exists(_, f)
        | Formula::Forall(_, f)
        | Formula::ExistsSet(_, f)
        | Formula::ForallSet(_, f) => collect_parities(f, odd, out),
        _ => {}
    }
}

/// Whether every occurrence of the set variable is under an even number of
/// negations (vacuously true if it does not occur).
pub fn positive_in(f: &Formula, set_var: &str) -> bool {
    let mut parity = BTreeMap::new();
    collect_parities(f, false, &mut parity);
    parity.get(set_var).map_or(true, |&(_, odd)| !odd)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        let f = Formula::not(Formula::eq("x", "y"));
        let c = classify(&f).unwrap();
        assert!(!c.positive);
        assert!(c.existential);

        // E(x,y) | exists z (E(x,z) & E(z,y))
        let square = Formula::or(vec![
            Formula::edge("x", "y"),
            Formula::exists("z", Formula::and(vec![Formula::edge("x", "z"), Formula::edge("z", "y")])),
        ]);
        let c = classify(&square).unwrap();
        assert!(c.ep);
        assert_eq!(c.qrank, 1);

        let f = Formula::forall("x", Formula::edge("x", "x"));
        assert!(!classify(&f).unwrap().existential);

        let f = Formula::ExistsSet("Y".into(), Box::new(Formula::SetMem("Y".into(), "x".into())));
        let c = classify(&f).unwrap();
        assert!(c.positive && c.existential && !c.ep);
        assert!(c.positive_in.contains("Y"));

        let f = Formula::ExistsSet(
            "Y".into(),
            Box::new(Formula::not(Formula::SetMem("Y".into(), "x".into()))),
        );
        assert!(!classify(&f).unwrap().positive_in.contains("Y"));
    }

    #[test]
    fn scoping_clash_detected() {
        let f = Formula::ExistsSet("Y".into(), Box::new(Formula::edge("Y", "x")));
        assert!(matches!(classify(&f), Err(Error::IllScoped(_))));
    }

    #[test]
    fn flattening_constructors() {
        assert_eq!(Formula::and(vec![]), Formula::Top);
        assert_eq!(Formula::or(vec![]), Formula::Bot);
        let inner = Formula::and(vec![Formula::Top, Formula::Top]);
        if let Formula::And(fs) = Formula::and(vec![inner, Formula::Bot]) {
            assert_eq!(fs.len(), 3);
        } else {
            panic!("expected flattened And");
        }
    }
}
