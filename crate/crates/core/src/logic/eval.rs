use std::collections::HashMap;

use super::{FiniteInterpretation, Formula, Term};
use crate::error::{Error, Result};

/// Node budget for quantifier expansion.
pub const DEFAULT_NODE_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct TruthTable {
    pub symbols: Vec<String>,
    /// Assignment in symbol order, then the value of the formula. Rows run
    /// from all-true to all-false with the first symbol varying slowest.
    pub rows: Vec<(Vec<bool>, bool)>,
    pub valid: bool,
}

fn eval_prop(f: &Formula, env: &HashMap<&str, bool>) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Prop(p) => env[p.as_str()],
        Formula::Not(a) => !eval_prop(a, env),
        Formula::And(a, b) => eval_prop(a, env) && eval_prop(b, env),
        Formula::Or(a, b) => eval_prop(a, env) || eval_prop(b, env),
        Formula::Implies(a, b) => !eval_prop(a, env) || eval_prop(b, env),
        Formula::Iff(a, b) => eval_prop(a, env) == eval_prop(b, env),
        _ => unreachable!("checked propositional"),
    }
}

pub fn truth_table_prove(f: &Formula) -> Result<TruthTable> {
    if !f.is_propositional() {
        return Err(Error::Kind(
            "truth tables need a purely propositional formula".into(),
        ));
    }
    let symbols = f.props();
    let k = symbols.len();
    if k > 24 {
        return Err(Error::ResourceCap(format!("{k} symbols give 2^{k} rows")));
    }
    let mut rows = Vec::with_capacity(1 << k);
    for r in 0..(1usize << k) {
        let assignment: Vec<bool> = (0..k).map(|i| (r >> (k - 1 - i)) & 1 == 0).collect();
        let env: HashMap<&str, bool> = symbols
            .iter()
            .map(String::as_str)
            .zip(assignment.iter().copied())
            .collect();
        let v = eval_prop(f, &env);
        rows.push((assignment, v));
    }
    let valid = rows.iter().all(|r| r.1);
    Ok(TruthTable {
        symbols,
        rows,
        valid,
    })
}

/// Size of the fully expanded formula, saturating.
fn expanded_size(f: &Formula, n: u128) -> u128 {
    match f {
        Formula::Forall(_, a) | Formula::Exists(_, a) => {
            n.saturating_mul(expanded_size(a, n)).saturating_add(n - 1)
        }
        Formula::Not(a) => expanded_size(a, n).saturating_add(1),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
            expanded_size(a, n)
                .saturating_add(expanded_size(b, n))
                .saturating_add(1)
        }
        _ => f.node_count() as u128,
    }
}

fn expand(f: &Formula, n: usize) -> Formula {
    match f {
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            let body = expand(a, n);
            let join = if matches!(f, Formula::Forall(..)) {
                Formula::and
            } else {
                Formula::or
            };
            (1..n).fold(body.substitute(x, 0), |acc, d| {
                join(acc, body.substitute(x, d))
            })
        }
        Formula::Not(a) => Formula::not(expand(a, n)),
        Formula::And(a, b) => Formula::and(expand(a, n), expand(b, n)),
        Formula::Or(a, b) => Formula::or(expand(a, n), expand(b, n)),
        Formula::Implies(a, b) => Formula::implies(expand(a, n), expand(b, n)),
        Formula::Iff(a, b) => Formula::iff(expand(a, n), expand(b, n)),
        _ => f.clone(),
    }
}

/// Replaces every quantifier, innermost first, by the left-nested
/// disjunction or conjunction of its body instantiated at `#0 .. #(n-1)`.
pub fn eliminate_quantifiers(f: &Formula, domain_size: usize) -> Result<Formula> {
    eliminate_quantifiers_capped(f, domain_size, DEFAULT_NODE_CAP)
}

pub fn eliminate_quantifiers_capped(
    f: &Formula,
    domain_size: usize,
    node_cap: usize,
) -> Result<Formula> {
    if domain_size == 0 {
        return Err(Error::Parameter("domain must be nonempty".into()));
    }
    let size = expanded_size(f, domain_size as u128);
    if size > node_cap as u128 {
        return Err(Error::ResourceCap(format!(
            "expansion has {size} nodes, cap is {node_cap}"
        )));
    }
    Ok(expand(f, domain_size))
}

fn eval_term(t: &Term, i: &FiniteInterpretation, env: &HashMap<String, usize>) -> Result<usize> {
    match t {
        Term::Var(v) => env
            .get(v)
            .copied()
            .ok_or_else(|| Error::Kind(format!("free variable {v}"))),
        Term::Elem(d) if *d < i.size() => Ok(*d),
        Term::Elem(d) => Err(Error::Interpretation(format!(
            "#{d} outside domain of size {}",
            i.size()
        ))),
        Term::App(name, args) => {
            let vals = args
                .iter()
                .map(|a| eval_term(a, i, env))
                .collect::<Result<Vec<_>>>()?;
            i.apply(name, &vals)
        }
    }
}

fn eval(f: &Formula, i: &FiniteInterpretation, env: &mut HashMap<String, usize>) -> Result<bool> {
    Ok(match f {
        Formula::Const(b) => *b,
        Formula::Prop(p) => i.holds(p, &[])?,
        Formula::Pred(name, args) => {
            let vals = args
                .iter()
                .map(|a| eval_term(a, i, env))
                .collect::<Result<Vec<_>>>()?;
            i.holds(name, &vals)?
        }
        Formula::Eq(a, b) => eval_term(a, i, env)? == eval_term(b, i, env)?,
        Formula::Not(a) => !eval(a, i, env)?,
        Formula::And(a, b) => {
            let (x, y) = (eval(a, i, env)?, eval(b, i, env)?);
            x && y
        }
        Formula::Or(a, b) => {
            let (x, y) = (eval(a, i, env)?, eval(b, i, env)?);
            x || y
        }
        Formula::Implies(a, b) => {
            let (x, y) = (eval(a, i, env)?, eval(b, i, env)?);
            !x || y
        }
        Formula::Iff(a, b) => eval(a, i, env)? == eval(b, i, env)?,
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            let universal = matches!(f, Formula::Forall(..));
            let saved = env.get(x).copied();
            let mut acc = universal;
            for d in 0..i.size() {
                env.insert(x.clone(), d);
                let v = eval(a, i, env)?;
                acc = if universal { acc && v } else { acc || v };
            }
            match saved {
                Some(d) => env.insert(x.clone(), d),
                None => env.remove(x),
            };
            acc
        }
    })
}

fn require_statement(f: &Formula) -> Result<()> {
    let free = f.free_vars();
    if free.is_empty() {
        Ok(())
    } else {
        Err(Error::Kind(format!(
            "not a statement; free variables {free:?}"
        )))
    }
}

/// Expands quantifiers over the domain, then folds terms, predicates and
/// equalities to truth values. Every subformula is evaluated, so an
/// uninterpreted symbol is reported even where it could be short-circuited.
pub fn decide(f: &Formula, interp: &FiniteInterpretation) -> Result<bool> {
    require_statement(f)?;
    let flat = eliminate_quantifiers(f, interp.size())?;
    eval(&flat, interp, &mut HashMap::new())
}

/// Evaluates by enumerating variable assignments, with no syntactic
/// expansion.
pub fn evaluate_direct(f: &Formula, interp: &FiniteInterpretation) -> Result<bool> {
    require_statement(f)?;
    eval(f, interp, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::super::{gf3, parse_formula};
    use super::*;

    #[test]
    fn semantic_proofs() {
        let t = truth_table_prove(&parse_formula("(p -> (q -> p))").unwrap()).unwrap();
        assert!(t.valid);
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.rows[0].0, vec![true, true]);
        let c = truth_table_prove(&parse_formula("(p & ~p)").unwrap()).unwrap();
        assert!(!c.valid && c.rows.iter().all(|r| !r.1));
        assert!(
            truth_table_prove(&parse_formula("((p -> q) <-> (~p | q))").unwrap())
                .unwrap()
                .valid
        );
        assert!(matches!(
            truth_table_prove(&parse_formula("P(a)").unwrap()),
            Err(Error::Kind(_))
        ));
    }

    #[test]
    fn expansion_shapes() {
        let f = parse_formula("exists x. (x = 1)").unwrap();
        assert_eq!(
            eliminate_quantifiers(&f, 3).unwrap().to_string(),
            "(((#0 = 1) | (#1 = 1)) | (#2 = 1))"
        );
        let g = parse_formula("forall x. P(x)").unwrap();
        assert_eq!(eliminate_quantifiers(&g, 1).unwrap().to_string(), "P(#0)");
        let deep = parse_formula("forall x. forall y. forall z. forall w. (x = y)").unwrap();
        assert!(matches!(
            eliminate_quantifiers_capped(&deep, 10, 1000),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn gf3_examples() {
        let g = gf3();
        let d = |s: &str| decide(&parse_formula(s).unwrap(), &g).unwrap();
        assert!(d("forall x. (x * 0 = 0)"));
        assert!(d(
            "(forall x. ((x = 0) | (x = 1) | (x = 2)) & ~(0 = 1) & ~(0 = 2) & ~(1 = 2))"
        ));
        assert!(!d("exists x. (x * x = 2)"));
        assert!(matches!(
            decide(&parse_formula("Q(0)").unwrap(), &g),
            Err(Error::Interpretation(_))
        ));
        assert!(matches!(
            decide(&parse_formula("(x = 0)").unwrap(), &g),
            Err(Error::Kind(_))
        ));
    }
}
