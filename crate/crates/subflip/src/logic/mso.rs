//! Eliminating monadic set quantifiers from positive formulas: an
//! existential set quantifier collapses by reading its variable as the
//! full vertex set (substitute `⊤`), a universal one by reading it as the
//! empty set (substitute `⊥`). Monotonicity in the variable makes both
//! directions sound.

use super::{positive_in, Formula};
use crate::error::{Error, Result};

/// Collapses every set quantifier, yielding an equivalent first-order
/// formula. Each eliminated variable must occur positively in its body;
/// existential inputs stay existential.
pub fn mso_collapse(f: &Formula) -> Result<Formula> {
    match f {
        Formula::ExistsSet(name, body) | Formula::ForallSet(name, body) => {
            let collapsed_body = mso_collapse(body)?;
            if !positive_in(&collapsed_body, name) {
                return Err(Error::NotPositiveIn(name.clone()));
            }
            let value = matches!(f, Formula::ExistsSet(..));
            Ok(substitute_set_atoms(&collapsed_body, name, value))
        }
        Formula::Not(inner) => Ok(Formula::not(mso_collapse(inner)?)),
        Formula::And(fs) => Ok(Formula::And(fs.iter().map(mso_collapse).collect::<Result<_>>()?)),
        Formula::Or(fs) => Ok(Formula::Or(fs.iter().map(mso_collapse).collect::<Result<_>>()?)),
        Formula::Exists(v, body) => Ok(Formula::Exists(v.clone(), Box::new(mso_collapse(body)?))),
        Formula::Forall(v, body) => Ok(Formula::Forall(v.clone(), Box::new(mso_collapse(body)?))),
        other => Ok(other.clone()),
    }
}

fn substitute_set_atoms(f: &Formula, name: &str, value: bool) -> Formula {
    match f {
        Formula::SetMem(set, _) if set == name => {
            if value {
                Formula::Top
            } else {
                Formula::Bot
            }
        }
        Formula::Not(inner) => Formula::not(substitute_set_atoms(inner, name, value)),
        Formula::And(fs) => {
            Formula::And(fs.iter().map(|c| substitute_set_atoms(c, name, value)).collect())
        }
        Formula::Or(fs) => {
            Formula::Or(fs.iter().map(|c| substitute_set_atoms(c, name, value)).collect())
        }
        Formula::Exists(v, body) => {
            Formula::Exists(v.clone(), Box::new(substitute_set_atoms(body, name, value)))
        }
        Formula::Forall(v, body) => {
            Formula::Forall(v.clone(), Box::new(substitute_set_atoms(body, name, value)))
        }
        Formula::ExistsSet(set, body) if set != name => {
            Formula::ExistsSet(set.clone(), Box::new(substitute_set_atoms(body, name, value)))
        }
        Formula::ForallSet(set, body) if set != name => {
            Formula::ForallSet(set.clone(), Box::new(substitute_set_atoms(body, name, value)))
        }
        // An inner binder of the same name shadows; collapse already
        // processed it recursively, so no same-name binders remain here.
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{classify, parse_formula};

    #[test]
    fn existential_set_substitutes_top() {
        let f = parse_formula("existsS Y forall x Y(x)").unwrap();
        assert_eq!(mso_collapse(&f).unwrap(), parse_formula("forall x top").unwrap());
    }

    #[test]
    fn universal_set_substitutes_bot() {
        let f = parse_formula("forallS Y (Y(x) | E(x,y))").unwrap();
        assert_eq!(mso_collapse(&f).unwrap(), parse_formula("bot | E(x,y)").unwrap());
    }

    #[test]
    fn negative_occurrence_rejected() {
        let f = parse_formula("existsS Y ~Y(x)").unwrap();
        assert!(matches!(mso_collapse(&f), Err(Error::NotPositiveIn(_))));
    }

    #[test]
    fn existential_inputs_stay_existential() {
        let f = parse_formula("existsS Y exists x (Y(x) & E(x,x))").unwrap();
        let collapsed = mso_collapse(&f).unwrap();
        let c = classify(&collapsed).unwrap();
        assert!(c.existential && c.ep);
    }
}
