//! Finite logic: propositional truth tables and first-order statements
//! decided over finite interpretations by quantifier expansion.
//!
//! Concrete syntax is ASCII with mandatory parentheses around binary
//! connectives:
//!
//! ```text
//! (p -> (q -> p))
//! forall x. exists y. ((x + y) = 0)
//! ((x = 0) | (x = 1) | (x = 2))
//! ```
//!
//! `&` and `|` may chain inside one pair of parentheses; `->` and `<->`
//! may not. Identifiers of the form `u`..`z` followed by digits or primes
//! are variables, as is any identifier bound by an enclosing quantifier.
//! Terms use infix `+` and `*` (`*` binds tighter) and prefix application
//! `f(t, ...)`; `#i` denotes the `i`-th domain element.

mod eval;
mod interp;
mod parse;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

pub use eval::{
    decide, eliminate_quantifiers, eliminate_quantifiers_capped, evaluate_direct,
    truth_table_prove, TruthTable, DEFAULT_NODE_CAP,
};
pub use interp::{gf3, parse_interpretation, FiniteInterpretation};
pub use parse::{parse_formula, parse_formula_file};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    /// A domain element by index.
    Elem(usize),
    /// Function application; constants are 0-ary.
    App(String, Vec<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    /// Propositional symbol.
    Prop(String),
    Pred(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

fn is_infix(name: &str) -> bool {
    name == "+" || name == "*"
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Elem(i) => write!(f, "#{i}"),
            Term::App(name, args) if args.is_empty() => write!(f, "{name}"),
            Term::App(name, args) if is_infix(name) && args.len() == 2 => {
                write!(f, "({} {name} {})", args[0], args[1])
            }
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(b) => write!(f, "{b}"),
            Formula::Prop(p) => write!(f, "{p}"),
            Formula::Pred(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Formula::Eq(a, b) => write!(f, "({a} = {b})"),
            Formula::Not(a) => write!(f, "~{a}"),
            Formula::And(a, b) => write!(f, "({a} & {b})"),
            Formula::Or(a, b) => write!(f, "({a} | {b})"),
            Formula::Implies(a, b) => write!(f, "({a} -> {b})"),
            Formula::Iff(a, b) => write!(f, "({a} <-> {b})"),
            Formula::Forall(x, a) => write!(f, "forall {x}. {a}"),
            Formula::Exists(x, a) => write!(f, "exists {x}. {a}"),
        }
    }
}

impl Term {
    pub fn free_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Elem(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.free_vars(out)),
        }
    }

    pub fn substitute(&self, x: &str, d: usize) -> Term {
        match self {
            Term::Var(v) if v == x => Term::Elem(d),
            Term::Var(_) | Term::Elem(_) => self.clone(),
            Term::App(n, args) => {
                Term::App(n.clone(), args.iter().map(|a| a.substitute(x, d)).collect())
            }
        }
    }

    fn node_count(&self) -> usize {
        match self {
            Term::Var(_) | Term::Elem(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::node_count).sum::<usize>(),
        }
    }

    fn collect_symbols(&self, out: &mut HashMap<String, usize>, funcs: bool) -> Result<()> {
        if let Term::App(name, args) = self {
            if funcs {
                note_arity(out, name, args.len())?;
            }
            for a in args {
                a.collect_symbols(out, funcs)?;
            }
        }
        Ok(())
    }
}

fn note_arity(out: &mut HashMap<String, usize>, name: &str, n: usize) -> Result<()> {
    match out.get(name) {
        Some(&m) if m != n => Err(Error::Arity {
            symbol: name.to_string(),
            expected: m,
            found: n,
        }),
        _ => {
            out.insert(name.to_string(), n);
            Ok(())
        }
    }
}

impl Formula {
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }
    pub fn forall(x: &str, a: Formula) -> Formula {
        Formula::Forall(x.to_string(), Box::new(a))
    }
    pub fn exists(x: &str, a: Formula) -> Formula {
        Formula::Exists(x.to_string(), Box::new(a))
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Const(_) | Formula::Prop(_) => {}
            Formula::Pred(_, args) => args.iter().for_each(|a| a.free_vars(out)),
            Formula::Eq(a, b) => {
                a.free_vars(out);
                b.free_vars(out);
            }
            Formula::Not(a) => a.free_vars_into(out),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let mut inner = BTreeSet::new();
                a.free_vars_into(&mut inner);
                inner.remove(x);
                out.extend(inner);
            }
        }
    }

    pub fn is_statement(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Forall(..) | Formula::Exists(..) => false,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            _ => true,
        }
    }

    /// Only constants, propositional symbols and connectives.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Prop(_) => true,
            Formula::Not(a) => a.is_propositional(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => a.is_propositional() && b.is_propositional(),
            _ => false,
        }
    }

    /// Replaces free occurrences of `x` by domain element `d`.
    pub fn substitute(&self, x: &str, d: usize) -> Formula {
        match self {
            Formula::Const(_) | Formula::Prop(_) => self.clone(),
            Formula::Pred(n, args) => {
                Formula::Pred(n.clone(), args.iter().map(|a| a.substitute(x, d)).collect())
            }
            Formula::Eq(a, b) => Formula::Eq(a.substitute(x, d), b.substitute(x, d)),
            Formula::Not(a) => Formula::not(a.substitute(x, d)),
            Formula::And(a, b) => Formula::and(a.substitute(x, d), b.substitute(x, d)),
            Formula::Or(a, b) => Formula::or(a.substitute(x, d), b.substitute(x, d)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(x, d), b.substitute(x, d)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(x, d), b.substitute(x, d)),
            Formula::Forall(y, _) | Formula::Exists(y, _) if y == x => self.clone(),
            Formula::Forall(y, a) => Formula::forall(y, a.substitute(x, d)),
            Formula::Exists(y, a) => Formula::exists(y, a.substitute(x, d)),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Prop(_) => 1,
            Formula::Pred(_, args) => 1 + args.iter().map(Term::node_count).sum::<usize>(),
            Formula::Eq(a, b) => 1 + a.node_count() + b.node_count(),
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.node_count(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Iff(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Propositional symbols in first-appearance order.
    pub fn props(&self) -> Vec<String> {
        fn rec(f: &Formula, out: &mut Vec<String>) {
            match f {
                Formula::Prop(p) => {
                    if !out.contains(p) {
                        out.push(p.clone());
                    }
                }
                Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => rec(a, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    rec(a, out);
                    rec(b, out);
                }
                _ => {}
            }
        }
        let mut out = Vec::new();
        rec(self, &mut out);
        out
    }

    /// Checks that every function and predicate symbol is used with one
    /// arity throughout.
    pub fn check_arities(&self) -> Result<()> {
        fn rec(
            f: &Formula,
            funcs: &mut HashMap<String, usize>,
            preds: &mut HashMap<String, usize>,
        ) -> Result<()> {
            match f {
                Formula::Const(_) => Ok(()),
                Formula::Prop(p) => note_arity(preds, p, 0),
                Formula::Pred(n, args) => {
                    note_arity(preds, n, args.len())?;
                    args.iter().try_for_each(|a| a.collect_symbols(funcs, true))
                }
                Formula::Eq(a, b) => {
                    a.collect_symbols(funcs, true)?;
                    b.collect_symbols(funcs, true)
                }
                Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => {
                    rec(a, funcs, preds)
                }
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Implies(a, b)
                | Formula::Iff(a, b) => {
                    rec(a, funcs, preds)?;
                    rec(b, funcs, preds)
                }
            }
        }
        rec(self, &mut HashMap::new(), &mut HashMap::new())
    }
}
