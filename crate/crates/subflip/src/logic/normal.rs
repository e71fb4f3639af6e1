//! The positive-DNF normal form for existential positive formulas: a
//! disjunction of conjunctions of clique formulas over subtuples of the
//! free variables, at radius `2^q` for quantifier rank `q`.

use std::collections::BTreeMap;

use super::{classify, evaluate, ColoredGraph, Formula};
use crate::error::{Error, Result};

/// A clique-formula conjunct together with its free-variable subtuple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conjunct {
    pub formula: Formula,
    pub free_vars: Vec<String>,
}

/// A positive DNF of clique formulas equivalent to the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    /// `2^q` for the input's quantifier rank `q`.
    pub radius: usize,
    pub disjuncts: Vec<Vec<Conjunct>>,
}

impl NormalForm {
    /// Reassembles the normal form into a single (EP) formula.
    pub fn to_formula(&self) -> Formula {
        Formula::or(
            self.disjuncts
                .iter()
                .map(|d| Formula::and(d.iter().map(|c| c.formula.clone()).collect()))
                .collect(),
        )
    }
}

/// Rewrites an EP formula into the normal form, following the structure
/// recursion: atoms stand alone, conjunctions distribute into DNF, the
/// existential pushes through the disjunction and captures exactly the
/// conjuncts mentioning its variable.
pub fn ep_normal_form(f: &Formula) -> Result<NormalForm> {
    let class = classify(f)?;
    if !class.ep {
        return Err(Error::NotEp(super::render(f)));
    }
    let disjuncts = nf(f);
    Ok(NormalForm { radius: 1usize << class.qrank.min(62), disjuncts })
}

fn nf(f: &Formula) -> Vec<Vec<Conjunct>> {
    match f {
        Formula::Top => vec![vec![]],
        Formula::Bot => vec![],
        Formula::Edge(..) | Formula::Eq(..) | Formula::Color(..) => {
            let free = f.free_vars().into_iter().collect();
            vec![vec![Conjunct { formula: f.clone(), free_vars: free }]]
        }
        Formula::And(fs) => {
            let mut acc: Vec<Vec<Conjunct>> = vec![vec![]];
            for child in fs {
                let child_disjuncts = nf(child);
                let mut next = Vec::new();
                for left in &acc {
                    for right in &child_disjuncts {
                        let mut merged = left.clone();
                        merged.extend(right.iter().cloned());
                        next.push(merged);
                    }
                }
                acc = next;
            }
            acc
        }
        Formula::Or(fs) => fs.iter().flat_map(nf).collect(),
        Formula::Exists(var, body) => {
            let mut out = Vec::new();
            for disjunct in nf(body) {
                let (with_var, without_var): (Vec<Conjunct>, Vec<Conjunct>) =
                    disjunct.into_iter().partition(|c| c.free_vars.contains(var));
                let mut rebuilt = without_var;
                if !with_var.is_empty() {
                    let inner =
                        Formula::and(with_var.iter().map(|c| c.formula.clone()).collect());
                    let captured = Formula::exists(var.clone(), inner);
                    let mut free: Vec<String> = captured.free_vars().into_iter().collect();
                    free.sort();
                    rebuilt.push(Conjunct { formula: captured, free_vars: free });
                }
                out.push(rebuilt);
            }
            out
        }
        // classify() already excluded everything else.
        _ => unreachable!("non-EP node in normal form recursion"),
    }
}

/// Semantic spot check of the clique property: on every supplied colored
/// graph, every satisfying assignment of the free variables forms a
/// pairwise distance-`r` clique. The universal claim over all graphs is
/// not decidable by evaluation; this checks the given suite only.
pub fn clique_formula_check(f: &Formula, r: usize, graphs: &[ColoredGraph]) -> Result<bool> {
    if !f.free_set_vars().is_empty() {
        return Err(Error::IllScoped("free set variables in clique check".into()));
    }
    let free: Vec<String> = f.free_vars().into_iter().collect();
    for cg in graphs {
        let n = cg.graph.vertex_count();
        let total = n.pow(free.len() as u32);
        let mut assignment: BTreeMap<String, usize> = BTreeMap::new();
        for idx in 0..total {
            let mut rest = idx;
            let mut values = Vec::with_capacity(free.len());
            for var in free.iter().rev() {
                assignment.insert(var.clone(), rest % n);
                values.push(rest % n);
                rest /= n;
            }
            if !evaluate(cg, f, &assignment, &BTreeMap::new())? {
                continue;
            }
            for (i, &u) in values.iter().enumerate() {
                for &v in &values[i + 1..] {
                    match cg.graph.distance(u, v)? {
                        Some(d) if d <= r => {}
                        _ => return Ok(false),
                    }
                }
            }
        }
    }
    Ok(true)
}
