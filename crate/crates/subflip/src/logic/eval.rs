//! Two evaluation routes: a naive assignment-based evaluator covering all
//! of MSO (set quantifiers by subset enumeration), and a bottom-up
//! relational evaluator for first-order formulas that `apply` and the
//! heavier suites use.

use std::collections::BTreeMap;

use super::{ColoredGraph, Formula};
use crate::error::{Error, Result};
use crate::graph::VertexSet;

const SET_QUANTIFIER_CAP: usize = 20;

/// Naive semantics. First-order quantifiers range over the vertices, set
/// quantifiers over all vertex subsets. `E(t,t)` reads the self-loop set.
pub fn evaluate(
    cg: &ColoredGraph,
    f: &Formula,
    assignment: &BTreeMap<String, usize>,
    set_assignment: &BTreeMap<String, VertexSet>,
) -> Result<bool> {
    let mut env = assignment.clone();
    let mut set_env = set_assignment.clone();
    eval_rec(cg, f, &mut env, &mut set_env)
}

fn eval_rec(
    cg: &ColoredGraph,
    f: &Formula,
    env: &mut BTreeMap<String, usize>,
    set_env: &mut BTreeMap<String, VertexSet>,
) -> Result<bool> {
    let n = cg.graph.vertex_count();
    let lookup = |env: &BTreeMap<String, usize>, v: &String| -> Result<usize> {
        env.get(v).copied().ok_or_else(|| Error::UnassignedVariable(v.clone()))
    };
    match f {
        Formula::Top => Ok(true),
        Formula::Bot => Ok(false),
        Formula::Edge(x, y) => {
            let u = lookup(env, x)?;
            let v = lookup(env, y)?;
            Ok(if u == v { cg.graph.has_loop(u) } else { cg.graph.adjacent(u, v) })
        }
        Formula::Eq(x, y) => Ok(lookup(env, x)? == lookup(env, y)?),
        Formula::Color(name, x) => {
            let v = lookup(env, x)?;
            Ok(cg.has_vertex_color(name, v))
        }
        Formula::SetMem(name, x) => {
            let v = lookup(env, x)?;
            let set = set_env
                .get(name)
                .ok_or_else(|| Error::UnassignedVariable(name.clone()))?;
            Ok(set.contains(&v))
        }
        Formula::Not(inner) => Ok(!eval_rec(cg, inner, env, set_env)?),
        Formula::And(fs) => {
            for c in fs {
                if !eval_rec(cg, c, env, set_env)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(fs) => {
            for c in fs {
                if eval_rec(cg, c, env, set_env)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Exists(v, body) | Formula::Forall(v, body) => {
            let forall = matches!(f, Formula::Forall(..));
            let saved = env.get(v).copied();
            let mut result = forall;
            for candidate in 0..n {
                env.insert(v.clone(), candidate);
                let holds = eval_rec(cg, body, env, set_env)?;
                if holds != forall {
                    result = !forall;
                    break;
                }
            }
            match saved {
                Some(old) => env.insert(v.clone(), old),
                None => env.remove(v),
            };
            Ok(result)
        }
        Formula::ExistsSet(name, body) | Formula::ForallSet(name, body) => {
            if n > SET_QUANTIFIER_CAP {
                return Err(Error::TooLarge(n, SET_QUANTIFIER_CAP));
            }
            let forall = matches!(f, Formula::ForallSet(..));
            let saved = set_env.get(name).cloned();
            let mut result = forall;
            for mask in 0u64..(1 << n) {
                let subset: VertexSet = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
                set_env.insert(name.clone(), subset);
                let holds = eval_rec(cg, body, env, set_env)?;
                if holds != forall {
                    result = !forall;
                    break;
                }
            }
            match saved {
                Some(old) => set_env.insert(name.clone(), old),
                None => set_env.remove(name),
            };
            Ok(result)
        }
    }
}

/// A relation over a sorted list of variables, stored as satisfaction bits
/// over all `n^|vars|` assignments (mixed-radix, first variable most
/// significant).
struct Rel {
    vars: Vec<String>,
    bits: Vec<bool>,
}

impl Rel {
    fn constant(value: bool) -> Rel {
        Rel { vars: vec![], bits: vec![value] }
    }

    fn unary(var: &str, n: usize, mut pred: impl FnMut(usize) -> bool) -> Rel {
        Rel { vars: vec![var.to_string()], bits: (0..n).map(&mut pred).collect() }
    }

    fn binary(x: &str, y: &str, n: usize, mut pred: impl FnMut(usize, usize) -> bool) -> Rel {
        debug_assert!(x < y);
        let mut bits = Vec::with_capacity(n * n);
        for u in 0..n {
            for v in 0..n {
                bits.push(pred(u, v));
            }
        }
        Rel { vars: vec![x.to_string(), y.to_string()], bits }
    }

    fn index_of(&self, assignment: &[usize], n: usize) -> usize {
        let mut idx = 0;
        for &v in assignment {
            idx = idx * n + v;
        }
        idx
    }

    fn negate(mut self) -> Rel {
        for b in &mut self.bits {
            *b = !*b;
        }
        self
    }

    /// The stride each union variable contributes to this relation's
    /// index (0 for variables it does not mention).
    fn strides_for(&self, union_vars: &[String], n: usize) -> Vec<usize> {
        union_vars
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|w| w == v)
                    .map(|pos| n.pow((self.vars.len() - 1 - pos) as u32))
                    .unwrap_or(0)
            })
            .collect()
    }

    /// Pointwise combination over the union of the variable lists,
    /// walking all assignments with an odometer instead of div/mod.
    fn combine(&self, other: &Rel, n: usize, op: impl Fn(bool, bool) -> bool) -> Rel {
        if self.vars.is_empty() {
            let a = self.bits[0];
            return Rel {
                vars: other.vars.clone(),
                bits: other.bits.iter().map(|&b| op(a, b)).collect(),
            };
        }
        if other.vars.is_empty() {
            let b = other.bits[0];
            return Rel { vars: self.vars.clone(), bits: self.bits.iter().map(|&a| op(a, b)).collect() };
        }
        if self.vars == other.vars {
            return Rel {
                vars: self.vars.clone(),
                bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect(),
            };
        }
        let mut vars: Vec<String> = self.vars.clone();
        for v in &other.vars {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        vars.sort();
        let stride_a = self.strides_for(&vars, n);
        let stride_b = other.strides_for(&vars, n);
        let width = vars.len();
        let total = n.pow(width as u32);
        let mut bits = Vec::with_capacity(total);
        let mut digits = vec![0usize; width];
        let (mut ia, mut ib) = (0usize, 0usize);
        loop {
            bits.push(op(self.bits[ia], other.bits[ib]));
            let mut slot = width;
            loop {
                if slot == 0 {
                    return Rel { vars, bits };
                }
                slot -= 1;
                digits[slot] += 1;
                ia += stride_a[slot];
                ib += stride_b[slot];
                if digits[slot] < n {
                    break;
                }
                digits[slot] = 0;
                ia -= n * stride_a[slot];
                ib -= n * stride_b[slot];
            }
        }
    }

    /// Eliminates a variable by OR (exists) or AND (forall) over its values.
    fn project(&self, var: &str, n: usize, forall: bool) -> Rel {
        let Some(pos) = self.vars.iter().position(|v| v == var) else {
            // Unused quantified variable over a nonempty domain.
            return Rel { vars: self.vars.clone(), bits: self.bits.clone() };
        };
        let vars: Vec<String> =
            self.vars.iter().filter(|v| v.as_str() != var).cloned().collect();
        let var_stride = n.pow((self.vars.len() - 1 - pos) as u32);
        let outer_strides: Vec<usize> = self
            .vars
            .iter()
            .enumerate()
            .filter(|&(slot, _)| slot != pos)
            .map(|(slot, _)| n.pow((self.vars.len() - 1 - slot) as u32))
            .collect();
        let width = vars.len();
        let total = n.pow(width as u32);
        let mut bits = Vec::with_capacity(total);
        let mut digits = vec![0usize; width];
        let mut base = 0usize;
        loop {
            let mut acc = forall;
            let mut idx = base;
            for _ in 0..n {
                if self.bits[idx] != forall {
                    acc = !forall;
                    break;
                }
                idx += var_stride;
            }
            bits.push(acc);
            if width == 0 {
                return Rel { vars, bits };
            }
            let mut slot = width;
            loop {
                if slot == 0 {
                    return Rel { vars, bits };
                }
                slot -= 1;
                digits[slot] += 1;
                base += outer_strides[slot];
                if digits[slot] < n {
                    break;
                }
                digits[slot] = 0;
                base -= n * outer_strides[slot];
            }
        }
    }
}

fn eval_rel(cg: &ColoredGraph, f: &Formula) -> Result<Rel> {
    let n = cg.graph.vertex_count();
    match f {
        Formula::Top => Ok(Rel::constant(true)),
        Formula::Bot => Ok(Rel::constant(false)),
        Formula::Edge(x, y) => {
            if x == y {
                Ok(Rel::unary(x, n, |v| cg.graph.has_loop(v)))
            } else {
                let (a, b, swap) = if x < y { (x, y, false) } else { (y, x, true) };
                Ok(Rel::binary(a, b, n, |u, v| {
                    let (u, v) = if swap { (v, u) } else { (u, v) };
                    if u == v {
                        cg.graph.has_loop(u)
                    } else {
                        cg.graph.adjacent(u, v)
                    }
                }))
            }
        }
        Formula::Eq(x, y) => {
            if x == y {
                Ok(Rel::constant(true))
            } else {
                let (a, b) = if x < y { (x, y) } else { (y, x) };
                Ok(Rel::binary(a, b, n, |u, v| u == v))
            }
        }
        Formula::Color(name, x) => {
            let set = cg.color(name);
            Ok(Rel::unary(x, n, |v| set.contains(&v)))
        }
        Formula::SetMem(name, _) => Err(Error::IllScoped(format!(
            "set variable `{name}` in a first-order evaluation"
        ))),
        Formula::Not(inner) => Ok(eval_rel(cg, inner)?.negate()),
        Formula::And(fs) => {
            let mut acc = Rel::constant(true);
            for c in fs {
                if acc.bits.iter().all(|&b| !b) {
                    break;
                }
                let r = eval_rel(cg, c)?;
                acc = acc.combine(&r, n, |a, b| a && b);
            }
            Ok(acc)
        }
        Formula::Or(fs) => {
            let mut acc = Rel::constant(false);
            for c in fs {
                if acc.bits.iter().all(|&b| b) {
                    break;
                }
                let r = eval_rel(cg, c)?;
                acc = acc.combine(&r, n, |a, b| a || b);
            }
            Ok(acc)
        }
        Formula::Exists(v, body) => Ok(eval_rel(cg, body)?.project(v, n, false)),
        Formula::Forall(v, body) => Ok(eval_rel(cg, body)?.project(v, n, true)),
        Formula::ExistsSet(..) | Formula::ForallSet(..) => {
            Err(Error::IllScoped("set quantifier in a first-order evaluation".into()))
        }
    }
}

/// The satisfaction set of a formula with one free variable, computed by
/// the relational route.
pub fn eval_unary(cg: &ColoredGraph, f: &Formula, x: &str) -> Result<Vec<bool>> {
    let n = cg.graph.vertex_count();
    let rel = eval_rel(cg, f)?;
    for v in &rel.vars {
        if v != x {
            return Err(Error::UnassignedVariable(v.clone()));
        }
    }
    if rel.vars.is_empty() {
        return Ok(vec![rel.bits[0]; n]);
    }
    Ok(rel.bits)
}

/// The satisfaction matrix (row-major by `x`) of a formula with two free
/// variables, computed by the relational route.
pub fn eval_binary(cg: &ColoredGraph, f: &Formula, x: &str, y: &str) -> Result<Vec<bool>> {
    let n = cg.graph.vertex_count();
    let rel = eval_rel(cg, f)?;
    for v in &rel.vars {
        if v != x && v != y {
            return Err(Error::UnassignedVariable(v.clone()));
        }
    }
    let mut bits = Vec::with_capacity(n * n);
    for u in 0..n {
        for v in 0..n {
            let assignment: Vec<usize> = rel
                .vars
                .iter()
                .map(|name| if name == x { u } else { v })
                .collect();
            bits.push(rel.bits[rel.index_of(&assignment, n)]);
        }
    }
    Ok(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen, Graph};
    use crate::logic::parse_formula;

    fn star(leaves: usize) -> ColoredGraph {
        let mut g = Graph::new(leaves + 1).unwrap();
        for v in 1..=leaves {
            g.set_edge(0, v, true);
        }
        ColoredGraph::new(g)
    }

    fn assign(pairs: &[(&str, usize)]) -> BTreeMap<String, usize> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn evaluate_atoms() {
        let cg = ColoredGraph::new(gen::path(3).unwrap());
        let f = parse_formula("E(x,y)").unwrap();
        assert!(evaluate(&cg, &f, &assign(&[("x", 0), ("y", 1)]), &BTreeMap::new()).unwrap());
        assert!(!evaluate(&cg, &f, &assign(&[("x", 0), ("y", 2)]), &BTreeMap::new()).unwrap());
        assert!(matches!(
            evaluate(&cg, &f, &assign(&[("x", 0)]), &BTreeMap::new()),
            Err(Error::UnassignedVariable(_))
        ));
    }

    #[test]
    fn square_formula_creates_loops_on_star() {
        // Walking leaf-center-leaf satisfies the square formula at x = y.
        let cg = star(3);
        let f = parse_formula("E(x,y) | exists z (E(x,z) & E(z,y))").unwrap();
        for leaf in 1..=3 {
            assert!(evaluate(&cg, &f, &assign(&[("x", leaf), ("y", leaf)]), &BTreeMap::new())
                .unwrap());
        }
    }

    #[test]
    fn set_quantifier_by_subsets() {
        let cg = ColoredGraph::new(gen::path(3).unwrap());
        let f = parse_formula("existsS Y forall x Y(x)").unwrap();
        assert!(evaluate(&cg, &f, &BTreeMap::new(), &BTreeMap::new()).unwrap());
        let f = parse_formula("forallS Y forall x Y(x)").unwrap();
        assert!(!evaluate(&cg, &f, &BTreeMap::new(), &BTreeMap::new()).unwrap());
    }

    #[test]
    fn relational_matches_naive() {
        let formulas = [
            "E(x,y)",
            "E(x,x) & E(x,y)",
            "x = y | ~E(x,y)",
            "exists z (E(x,z) & E(z,y))",
            "forall z (E(x,z) | ~E(z,y))",
            "dist<=3(x,y)",
            "Red(x) & exists z (E(x,z) & Red(z) & E(z,y))",
        ];
        let mut g = gen::cycle(5).unwrap();
        g.set_loop(2, true);
        let cg = ColoredGraph::new(g)
            .with_color("Red", VertexSet::from([0, 2, 3]))
            .unwrap();
        for text in formulas {
            let f = parse_formula(text).unwrap();
            let matrix = eval_binary(&cg, &f, "x", "y").unwrap();
            let n = cg.graph.vertex_count();
            for u in 0..n {
                for v in 0..n {
                    let naive =
                        evaluate(&cg, &f, &assign(&[("x", u), ("y", v)]), &BTreeMap::new())
                            .unwrap();
                    assert_eq!(matrix[u * n + v], naive, "{text} at ({u},{v})");
                }
            }
        }
    }
}
