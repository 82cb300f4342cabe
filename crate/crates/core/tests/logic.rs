use std::collections::HashMap;

use finlab::experiments::GF3_STATEMENTS;
use finlab::logic::{
    decide, eliminate_quantifiers, eliminate_quantifiers_capped, evaluate_direct, gf3,
    parse_formula, parse_formula_file, parse_interpretation, truth_table_prove,
    FiniteInterpretation, Formula, Term,
};
use finlab::rng::stream;
use finlab::Error;
use proptest::prelude::*;
use rand::Rng;

fn p(s: &str) -> Formula {
    parse_formula(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Tarskian evaluation over gf3 with an explicit assignment.
fn term_value(t: &Term, env: &HashMap<String, usize>) -> usize {
    match t {
        Term::Var(v) => env[v],
        Term::Elem(i) => *i,
        Term::App(name, args) => {
            let xs: Vec<usize> = args.iter().map(|a| term_value(a, env)).collect();
            match (name.as_str(), xs.as_slice()) {
                ("+", [a, b]) => (a + b) % 3,
                ("*", [a, b]) => (a * b) % 3,
                (n, []) => n.parse().unwrap(),
                _ => panic!("unknown symbol {name}"),
            }
        }
    }
}

fn truth(f: &Formula, env: &mut HashMap<String, usize>) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Eq(a, b) => term_value(a, env) == term_value(b, env),
        Formula::Not(a) => !truth(a, env),
        Formula::And(a, b) => truth(a, env) & truth(b, env),
        Formula::Or(a, b) => truth(a, env) | truth(b, env),
        Formula::Implies(a, b) => !truth(a, env) | truth(b, env),
        Formula::Iff(a, b) => truth(a, env) == truth(b, env),
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            let saved = env.get(x).copied();
            let mut vals = Vec::new();
            for d in 0..3 {
                env.insert(x.clone(), d);
                vals.push(truth(a, env));
            }
            match saved {
                Some(v) => env.insert(x.clone(), v),
                None => env.remove(x),
            };
            if matches!(f, Formula::Forall(..)) {
                vals.iter().all(|&v| v)
            } else {
                vals.iter().any(|&v| v)
            }
        }
        Formula::Prop(_) | Formula::Pred(..) => panic!("not in the gf3 language"),
    }
}

fn oracle(f: &Formula) -> bool {
    truth(f, &mut HashMap::new())
}

/// Random gf3 statement over variables bound on the way down.
fn random_term<R: Rng>(rng: &mut R, vars: &[String], depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.4) {
        return if !vars.is_empty() && rng.gen_bool(0.7) {
            Term::Var(vars[rng.gen_range(0..vars.len())].clone())
        } else {
            Term::App(rng.gen_range(0..3usize).to_string(), vec![])
        };
    }
    let op = if rng.gen_bool(0.5) { "+" } else { "*" };
    Term::App(
        op.into(),
        vec![
            random_term(rng, vars, depth - 1),
            random_term(rng, vars, depth - 1),
        ],
    )
}

fn random_statement<R: Rng>(rng: &mut R, vars: &mut Vec<String>, depth: usize) -> Formula {
    let pick = if depth == 0 { 0 } else { rng.gen_range(0..8) };
    match pick {
        0 => Formula::Eq(random_term(rng, vars, 2), random_term(rng, vars, 2)),
        1 => Formula::not(random_statement(rng, vars, depth - 1)),
        2..=5 => {
            let a = random_statement(rng, vars, depth - 1);
            let b = random_statement(rng, vars, depth - 1);
            [Formula::and, Formula::or, Formula::implies, Formula::iff][pick - 2](a, b)
        }
        _ => {
            let x = ["x", "y", "z", "w"][vars.len() % 4].to_string();
            vars.push(x.clone());
            let body = random_statement(rng, vars, depth - 1);
            vars.pop();
            if pick == 6 {
                Formula::forall(&x, body)
            } else {
                Formula::exists(&x, body)
            }
        }
    }
}

#[test]
fn parser_examples() {
    assert_eq!(
        p("(p -> (q -> p))"),
        Formula::implies(
            Formula::Prop("p".into()),
            Formula::implies(Formula::Prop("q".into()), Formula::Prop("p".into()))
        )
    );
    let f = p("forall x. exists y. ((x + y) = 0)");
    assert!(
        matches!(&f, Formula::Forall(x, b) if x == "x" && matches!(**b, Formula::Exists(ref y, _) if y == "y"))
    );
    assert!(f.is_statement());
    match parse_formula("(p -> q") {
        Err(Error::Syntax { pos, .. }) => assert_eq!(pos, 7),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_formula("forall x. (f(x) = f(x, x))"),
        Err(Error::Arity { .. })
    ));
}

#[test]
fn printer_round_trips_the_corpus() {
    for (s, _) in GF3_STATEMENTS {
        let f = p(s);
        assert_eq!(p(&f.to_string()), f, "{s}");
    }
}

#[test]
fn formula_files_skip_comments() {
    let got =
        parse_formula_file("# header\n\n(p | ~p)  # excluded middle\n((1 + 1) = 2)\n").unwrap();
    assert_eq!(got.iter().map(|x| x.0).collect::<Vec<_>>(), vec![3, 4]);
    assert!(matches!(
        parse_formula_file("(p |\n"),
        Err(Error::Format { line: 1, .. })
    ));
}

#[test]
fn truth_table_examples() {
    let t = truth_table_prove(&p("(p -> (q -> p))")).unwrap();
    assert!(t.valid);
    assert_eq!(t.rows.len(), 4);
    assert!(t.rows.iter().all(|r| r.1));
    let t = truth_table_prove(&p("(p & ~p)")).unwrap();
    assert!(!t.valid && t.rows.iter().all(|r| !r.1));
    assert!(
        truth_table_prove(&p("((p -> q) <-> (~p | q))"))
            .unwrap()
            .valid
    );
    assert!(matches!(
        truth_table_prove(&p("forall x. (x = x)")),
        Err(Error::Kind(_))
    ));
}

#[test]
fn valid_formulas_hold_under_every_assignment() {
    for s in [
        "(p -> (q -> p))",
        "((p -> q) <-> (~p | q))",
        "((p & q) -> p)",
        "(p | ~p)",
        "((p -> q) | (q -> r))",
    ] {
        let f = p(s);
        let t = truth_table_prove(&f).unwrap();
        assert!(t.valid, "{s}");
        // Substitute each assignment and decide the closed result.
        for (assign, _) in &t.rows {
            let mut g = f.clone();
            for (sym, &v) in t.symbols.iter().zip(assign) {
                g = replace_prop(&g, sym, v);
            }
            assert!(decide(&g, &gf3()).unwrap(), "{s} at {assign:?}");
        }
    }
}

fn replace_prop(f: &Formula, sym: &str, v: bool) -> Formula {
    let r = |a: &Formula| Box::new(replace_prop(a, sym, v));
    match f {
        Formula::Prop(q) if q == sym => Formula::Const(v),
        Formula::Not(a) => Formula::Not(r(a)),
        Formula::And(a, b) => Formula::And(r(a), r(b)),
        Formula::Or(a, b) => Formula::Or(r(a), r(b)),
        Formula::Implies(a, b) => Formula::Implies(r(a), r(b)),
        Formula::Iff(a, b) => Formula::Iff(r(a), r(b)),
        other => other.clone(),
    }
}

#[test]
fn elimination_examples() {
    let e = eliminate_quantifiers(&p("exists x. (x = 1)"), 3).unwrap();
    assert!(e.is_quantifier_free());
    let disj = |d: usize| Formula::Eq(Term::Elem(d), Term::App("1".into(), vec![]));
    assert_eq!(e, Formula::or(Formula::or(disj(0), disj(1)), disj(2)));

    let body = p("forall x. ((x * x) = x)");
    let one = eliminate_quantifiers(&body, 1).unwrap();
    let Formula::Forall(_, inner) = &body else {
        unreachable!()
    };
    assert_eq!(one, inner.substitute("x", 0));

    let nested = eliminate_quantifiers(&p("forall x. exists y. ((x + y) = 0)"), 3).unwrap();
    fn count(f: &Formula, and: bool) -> usize {
        match (f, and) {
            (Formula::And(a, b), true) => count(a, true) + count(b, true),
            (Formula::Or(a, b), false) => count(a, false) + count(b, false),
            (g, true) => {
                assert_eq!(count(g, false), 3);
                1
            }
            (Formula::Eq(..), false) => 1,
            (g, _) => panic!("unexpected {g}"),
        }
    }
    assert_eq!(count(&nested, true), 3);
}

#[test]
fn expansion_cap_is_enforced() {
    let f = p("forall x. forall y. forall z. forall w. (((x + y) + (z + w)) = 0)");
    assert!(matches!(
        eliminate_quantifiers_capped(&f, 3, 50),
        Err(Error::ResourceCap(_))
    ));
    assert!(eliminate_quantifiers_capped(&f, 3, 10_000).is_ok());
}

#[test]
fn gf3_examples_and_corpus() {
    let g = gf3();
    assert!(decide(&p("forall x. ((x * 0) = 0)"), &g).unwrap());
    assert!(!decide(&p("exists x. ((x * x) = 2)"), &g).unwrap());
    assert!(decide(&p("forall x. ((x = 0) | (x = 1) | (x = 2))"), &g).unwrap());
    for (s, expected) in GF3_STATEMENTS {
        let f = p(s);
        assert_eq!(decide(&f, &g).unwrap(), expected, "{s}");
        assert_eq!(oracle(&f), expected, "{s}");
        assert_eq!(evaluate_direct(&f, &g).unwrap(), expected, "{s}");
        assert_eq!(decide(&Formula::not(f), &g).unwrap(), !expected, "{s}");
    }
}

#[test]
fn field_axioms_hold_in_gf3() {
    let g = gf3();
    for s in [
        "forall x. forall y. ((x + y) = (y + x))",
        "forall x. forall y. ((x * y) = (y * x))",
        "forall x. forall y. forall z. (((x + y) + z) = (x + (y + z)))",
        "forall x. forall y. forall z. (((x * y) * z) = (x * (y * z)))",
        "forall x. forall y. forall z. ((x * (y + z)) = ((x * y) + (x * z)))",
        "forall x. exists y. ((x + y) = 0)",
        "forall x. (~(x = 0) -> exists y. ((x * y) = 1))",
    ] {
        assert!(decide(&p(s), &g).unwrap(), "{s}");
    }
}

#[test]
fn uninterpreted_symbols_are_errors() {
    let g = gf3();
    assert!(matches!(
        decide(&p("forall x. (f(x) = x)"), &g),
        Err(Error::Interpretation(_))
    ));
    assert!(matches!(
        decide(&p("exists x. even(x)"), &g),
        Err(Error::Interpretation(_))
    ));
    assert!(decide(&p("(x = 0)"), &g).is_err());
}

#[test]
fn interpretation_files() {
    let text = "domain a b\nfunction s 1\na b\nb a\npredicate even 1\na true\nb false\n";
    let i = parse_interpretation(text).unwrap();
    assert_eq!(i.size(), 2);
    assert!(decide(&p("forall x. (even(x) <-> ~even(s(x)))"), &i).unwrap());
    assert!(decide(&p("forall x. (s(s(x)) = x)"), &i).unwrap());
    assert!(matches!(
        parse_interpretation("domain a b\nfunction s 1\na b\n"),
        Err(Error::Format { .. })
    ));
    assert!(FiniteInterpretation::new(vec![]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn random_statements_agree_with_tarskian_oracle(seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let f = random_statement(&mut rng, &mut Vec::new(), 4);
        let g = gf3();
        let v = decide(&f, &g).unwrap();
        prop_assert_eq!(v, oracle(&f), "{}", f);
        prop_assert_eq!(evaluate_direct(&f, &g).unwrap(), v);
        prop_assert_eq!(decide(&Formula::not(f.clone()), &g).unwrap(), !v);
        let e = eliminate_quantifiers(&f, 3).unwrap();
        prop_assert!(e.is_quantifier_free());
        prop_assert_eq!(decide(&e, &g).unwrap(), v);
        prop_assert_eq!(p(&f.to_string()), f);
    }
}
