//! The monadic non-equality-property: instance checking, the tuple
//! sunflower extraction, and the constructive disjointification step that
//! trades shared coordinates for singleton color predicates.

use std::collections::{BTreeMap, BTreeSet};

use super::{evaluate, ColoredGraph, Formula};
use crate::error::{Error, Result};
use crate::graph::VertexSet;

/// A formula with two equal-length free tuples, a colored graph, and a
/// tuple family, to be tested for `φ(ā_i, ā_j) ⟺ i ≠ j`.
#[derive(Debug, Clone)]
pub struct NEPInstance {
    pub formula: Formula,
    pub x_vars: Vec<String>,
    pub y_vars: Vec<String>,
    pub colored: ColoredGraph,
    pub tuples: Vec<Vec<usize>>,
}

impl NEPInstance {
    pub fn tuple_len(&self) -> usize {
        self.x_vars.len()
    }

    fn validate(&self) -> Result<()> {
        if self.x_vars.len() != self.y_vars.len() {
            return Err(Error::TupleLengthMismatch(self.x_vars.len(), self.y_vars.len()));
        }
        if self.x_vars.iter().any(|x| self.y_vars.contains(x)) {
            return Err(Error::IllScoped("x and y tuple variables overlap".into()));
        }
        for tuple in &self.tuples {
            if tuple.len() != self.tuple_len() {
                return Err(Error::TupleLengthMismatch(self.tuple_len(), tuple.len()));
            }
            for &v in tuple {
                if v >= self.colored.graph.vertex_count() {
                    return Err(Error::VertexOutOfRange(v, self.colored.graph.vertex_count()));
                }
            }
        }
        Ok(())
    }
}

/// Whether `φ(ā_i, ā_j)` holds exactly for `i ≠ j`, including the `i = j`
/// diagonal.
pub fn nep_check(inst: &NEPInstance) -> Result<bool> {
    inst.validate()?;
    for (i, a) in inst.tuples.iter().enumerate() {
        for (j, b) in inst.tuples.iter().enumerate() {
            let mut assignment: BTreeMap<String, usize> = BTreeMap::new();
            for (var, &v) in inst.x_vars.iter().zip(a) {
                assignment.insert(var.clone(), v);
            }
            for (var, &v) in inst.y_vars.iter().zip(b) {
                assignment.insert(var.clone(), v);
            }
            let holds = evaluate(&inst.colored, &inst.formula, &assignment, &BTreeMap::new())?;
            if holds != (i != j) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn support(tuple: &[usize]) -> VertexSet {
    tuple.iter().copied().collect()
}

/// Finds `m` tuples agreeing exactly on a coordinate set `I` and pairwise
/// disjoint outside it: a greedy pass over disjoint supports first, then
/// exhaustive search over index subsets. Returns the chosen tuple indices
/// (ascending) and `I`.
pub fn sunflower_tuples(
    tuples: &[Vec<usize>],
    m: usize,
) -> Option<(Vec<usize>, BTreeSet<usize>)> {
    if m == 0 || m > tuples.len() {
        return None;
    }
    let t = tuples[0].len();
    // Greedy pass: pairwise disjoint supports form a sunflower with an
    // empty core, provided no coordinate happens to agree.
    let mut greedy: Vec<usize> = Vec::new();
    for (i, tuple) in tuples.iter().enumerate() {
        let sup = support(tuple);
        if greedy.iter().all(|&j| support(&tuples[j]).is_disjoint(&sup)) {
            greedy.push(i);
        }
    }
    if greedy.len() >= m {
        let chosen: Vec<usize> = greedy[..m].to_vec();
        if let Some(i_set) = sunflower_core(tuples, &chosen, t) {
            return Some((chosen, i_set));
        }
    }
    let mut found = None;
    crate::graph::for_subsets(tuples.len(), m, &mut |chosen| {
        if let Some(i_set) = sunflower_core(tuples, chosen, t) {
            found = Some((chosen.to_vec(), i_set));
        }
        found.is_some()
    });
    found
}

/// The exact agreement coordinates of the chosen tuples, provided the
/// remaining coordinates are pairwise disjoint across tuples.
fn sunflower_core(tuples: &[Vec<usize>], chosen: &[usize], t: usize) -> Option<BTreeSet<usize>> {
    let first = &tuples[chosen[0]];
    let agree: BTreeSet<usize> = (0..t)
        .filter(|&c| chosen.iter().all(|&i| tuples[i][c] == first[c]))
        .collect();
    let petals: Vec<VertexSet> = chosen
        .iter()
        .map(|&i| {
            (0..t).filter(|c| !agree.contains(c)).map(|c| tuples[i][c]).collect::<VertexSet>()
        })
        .collect();
    for (a, pa) in petals.iter().enumerate() {
        for pb in &petals[a + 1..] {
            if !pa.is_disjoint(pb) {
                return None;
            }
        }
    }
    Some(agree)
}

/// Rewrites an instance with possibly overlapping tuples into one with
/// pairwise disjoint, strictly shorter tuples: the shared coordinates are
/// fixed by fresh singleton color predicates and re-quantified
/// existentially inside the formula. Positivity and existentiality are
/// preserved; the non-equality property carries over.
pub fn disjointify(inst: &NEPInstance) -> Result<NEPInstance> {
    inst.validate()?;
    if !nep_check(inst)? {
        return Err(Error::NepFails);
    }
    let t = inst.tuple_len();
    let mut best = None;
    for m in (2..=inst.tuples.len()).rev() {
        if let Some(found) = sunflower_tuples(&inst.tuples, m) {
            best = Some(found);
            break;
        }
    }
    let (chosen, core) = best.ok_or(Error::NoSunflower)?;
    if core.len() == t {
        // All chosen tuples equal; the property cannot hold on them.
        return Err(Error::NepFails);
    }
    let outer: Vec<usize> = (0..t).filter(|c| !core.contains(c)).collect();

    if core.is_empty() {
        return Ok(NEPInstance {
            formula: inst.formula.clone(),
            x_vars: inst.x_vars.clone(),
            y_vars: inst.y_vars.clone(),
            colored: inst.colored.clone(),
            tuples: chosen.iter().map(|&i| inst.tuples[i].clone()).collect(),
        });
    }

    let mut colored = inst.colored.clone();
    let taken: BTreeSet<String> = colored.colors.keys().cloned().collect();
    let used_vars = inst.formula.all_var_names();

    let mut body = inst.formula.clone();
    let mut quantified = Vec::new();
    let mut guards = Vec::new();
    for &c in &core {
        let shared = inst.tuples[chosen[0]][c];
        let color = fresh_name(&format!("X{}", c + 1), &taken);
        colored.insert_color(color.clone(), VertexSet::from([shared]))?;
        let z = fresh_var(&format!("z{}", c + 1), &used_vars);
        body = body.substitute_var(&inst.x_vars[c], &z);
        body = body.substitute_var(&inst.y_vars[c], &z);
        guards.push(Formula::color(color, z.clone()));
        quantified.push(z);
    }
    guards.push(body);
    let mut formula = Formula::and(guards);
    for z in quantified.into_iter().rev() {
        formula = Formula::exists(z, formula);
    }

    Ok(NEPInstance {
        formula,
        x_vars: outer.iter().map(|&c| inst.x_vars[c].clone()).collect(),
        y_vars: outer.iter().map(|&c| inst.y_vars[c].clone()).collect(),
        colored,
        tuples: chosen
            .iter()
            .map(|&i| outer.iter().map(|&c| inst.tuples[i][c]).collect())
            .collect(),
    })
}

fn fresh_name(base: &str, taken: &BTreeSet<String>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    let mut i = 2;
    loop {
        let candidate = format!("{base}_{i}");
        if !taken.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

fn fresh_var(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    let mut i = 2;
    loop {
        let candidate = format!("{base}_{i}");
        if !used.contains(&candidate) {
            return candidate;
        }
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen;
    use crate::logic::parse_formula;

    fn co_matching_instance(l: usize) -> NEPInstance {
        let g = gen::co_matching(l).unwrap();
        NEPInstance {
            formula: parse_formula("E(x1,y2)").unwrap(),
            x_vars: vec!["x1".into(), "x2".into()],
            y_vars: vec!["y1".into(), "y2".into()],
            colored: ColoredGraph::new(g),
            tuples: (0..l).map(|i| vec![i, l + i]).collect(),
        }
    }

    #[test]
    fn co_matching_family_has_the_property() {
        for l in 1..=5 {
            assert!(nep_check(&co_matching_instance(l)).unwrap(), "order {l}");
        }
    }

    #[test]
    fn irreflexive_clique_family_has_the_property() {
        for l in 2..=5 {
            let inst = NEPInstance {
                formula: parse_formula("E(x,y)").unwrap(),
                x_vars: vec!["x".into()],
                y_vars: vec!["y".into()],
                colored: ColoredGraph::new(gen::clique(l).unwrap()),
                tuples: (0..l).map(|v| vec![v]).collect(),
            };
            assert!(nep_check(&inst).unwrap());
        }
    }

    #[test]
    fn diagonal_failure_detected() {
        let mut inst = co_matching_instance(3);
        // A reflexive-by-name formula that also holds on the diagonal.
        inst.formula = parse_formula("E(x1,y2) | x1 = y1").unwrap();
        assert!(!nep_check(&inst).unwrap());
    }

    #[test]
    fn sunflower_identical_tuples() {
        let tuples = vec![vec![4, 7], vec![4, 7], vec![4, 7]];
        let (chosen, core) = sunflower_tuples(&tuples, 3).unwrap();
        assert_eq!(chosen, vec![0, 1, 2]);
        assert_eq!(core, BTreeSet::from([0, 1]));
    }

    #[test]
    fn sunflower_disjoint_tuples() {
        let tuples = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
        let (chosen, core) = sunflower_tuples(&tuples, 3).unwrap();
        assert_eq!(chosen, vec![0, 1, 2]);
        assert!(core.is_empty());
    }

    #[test]
    fn sunflower_shared_first_coordinate() {
        let tuples = vec![vec![9, 1], vec![9, 2], vec![9, 3]];
        let (chosen, core) = sunflower_tuples(&tuples, 3).unwrap();
        assert_eq!(chosen, vec![0, 1, 2]);
        assert_eq!(core, BTreeSet::from([0]));
    }

    #[test]
    fn disjointify_shared_coordinate() {
        // Clique 0..l-1 plus an apex c = l adjacent to everything; tuples
        // (v_i, c) share coordinate 2, and the formula reads it.
        let l = 4;
        let mut g = gen::clique(l + 1).unwrap();
        g.set_loop(l, true);
        let inst = NEPInstance {
            formula: parse_formula("E(x1,y1) & E(x2,y1)").unwrap(),
            x_vars: vec!["x1".into(), "x2".into()],
            y_vars: vec!["y1".into(), "y2".into()],
            colored: ColoredGraph::new(g),
            tuples: (0..l).map(|i| vec![i, l]).collect(),
        };
        assert!(nep_check(&inst).unwrap());
        let out = disjointify(&inst).unwrap();
        assert_eq!(out.tuple_len(), 1);
        assert_eq!(out.tuples, (0..l).map(|i| vec![i]).collect::<Vec<_>>());
        assert_eq!(out.colored.color("X2"), VertexSet::from([l]));
        assert!(nep_check(&out).unwrap());
        for (i, a) in out.tuples.iter().enumerate() {
            for b in &out.tuples[i + 1..] {
                assert!(support(a).is_disjoint(&support(b)));
            }
        }
    }

    #[test]
    fn disjointify_keeps_disjoint_instances() {
        let inst = co_matching_instance(4);
        let out = disjointify(&inst).unwrap();
        assert_eq!(out.tuples, inst.tuples);
        assert_eq!(out.formula, inst.formula);
    }

    #[test]
    fn all_equal_tuples_rejected() {
        let mut inst = co_matching_instance(3);
        inst.tuples = vec![vec![0, 3], vec![0, 3], vec![0, 3]];
        assert!(matches!(disjointify(&inst), Err(Error::NepFails)));
    }
}
