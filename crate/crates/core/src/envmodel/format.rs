//! Textual model interchange format.
//!
//! One construct per line; `#` starts a comment. Tables:
//!
//! ```text
//! model table
//! states 2
//! actions 2
//! observations 2
//! start 0
//! row 0 0 0.2 0.3 0 0.5     # state action, then p(s', o) for s' major, o minor
//! ```
//!
//! Networks declare variables by kind, the initial state bits, and one
//! prefix expression per state (`next`) and observation (`emit`) variable:
//!
//! ```text
//! model network
//! state s r v
//! action a b c d
//! observation o p
//! init 0 0 1
//! next s (choice 0.99 (xor r v) (not (xor r v)))
//! next r s
//! next v r
//! emit o (or (and b c) (and (not b) s))
//! emit p (or (and b d) (and (not b) v))
//! ```
//!
//! Probabilities are written with the shortest decimal that reads back to
//! the same double, so `parse_model(write_model(q)) == q`.

use std::fmt::Write as _;

use super::network::{BooleanNetwork, Expr};
use super::table::TransitionTable;
use super::{EnvModel, ModelForm};
use crate::error::{Error, Result};

pub fn write_model(q: &EnvModel) -> String {
    let mut out = String::new();
    match q.form() {
        ModelForm::Table => {
            let t = q.table();
            let _ = writeln!(out, "model table");
            let _ = writeln!(out, "states {}", t.n_states());
            let _ = writeln!(out, "actions {}", t.n_actions());
            let _ = writeln!(out, "observations {}", t.n_observations());
            let _ = writeln!(out, "start {}", t.start());
            for s in 0..t.n_states() {
                for a in 0..t.n_actions() {
                    let _ = write!(out, "row {s} {a}");
                    for p in t.row(s, a) {
                        let _ = write!(out, " {p}");
                    }
                    out.push('\n');
                }
            }
        }
        ModelForm::Network(n) => {
            let _ = writeln!(out, "model network");
            let _ = writeln!(out, "{}", join_line("state", n.state_names()));
            let _ = writeln!(out, "{}", join_line("action", n.action_names()));
            let _ = writeln!(out, "{}", join_line("observation", n.observation_names()));
            let bits: Vec<String> = n
                .initial()
                .iter()
                .map(|&b| u8::from(b).to_string())
                .collect();
            let _ = writeln!(out, "{}", join_line("init", &bits));
            for (name, e) in n.state_names().iter().zip(n.updates()) {
                let _ = writeln!(out, "next {name} {}", expr_text(e, n));
            }
            for (name, e) in n.observation_names().iter().zip(n.emits()) {
                let _ = writeln!(out, "emit {name} {}", expr_text(e, n));
            }
        }
    }
    out
}

fn join_line(head: &str, items: &[String]) -> String {
    std::iter::once(head.to_string())
        .chain(items.iter().cloned())
        .collect::<Vec<_>>()
        .join(" ")
}

fn expr_text(e: &Expr, n: &BooleanNetwork) -> String {
    match e {
        Expr::Lit(b) => b.to_string(),
        Expr::State(i) => n.state_names()[*i].clone(),
        Expr::Action(j) => n.action_names()[*j].clone(),
        Expr::Not(a) => format!("(not {})", expr_text(a, n)),
        Expr::And(a, b) => format!("(and {} {})", expr_text(a, n), expr_text(b, n)),
        Expr::Or(a, b) => format!("(or {} {})", expr_text(a, n), expr_text(b, n)),
        Expr::Xor(a, b) => format!("(xor {} {})", expr_text(a, n), expr_text(b, n)),
        Expr::Choice(p, a, b) => format!("(choice {p} {} {})", expr_text(a, n), expr_text(b, n)),
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| err(line, format!("bad number {s:?}")))
}

pub fn parse_model(text: &str) -> Result<EnvModel> {
    let lines: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            (
                i + 1,
                l.split('#')
                    .next()
                    .unwrap_or("")
                    .split_whitespace()
                    .collect::<Vec<_>>(),
            )
        })
        .filter(|(_, w)| !w.is_empty())
        .collect();
    let Some((first_line, head)) = lines.first() else {
        return Err(err(0, "empty model file"));
    };
    match head.as_slice() {
        ["model", "table"] => parse_table(&lines[1..]),
        ["model", "network"] => parse_network(&lines[1..]),
        _ => Err(err(
            *first_line,
            "expected `model table` or `model network`",
        )),
    }
}

fn parse_table(lines: &[(usize, Vec<&str>)]) -> Result<EnvModel> {
    let (mut ns, mut na, mut no, mut start) = (None, None, None, 0usize);
    let mut rows: Vec<(usize, usize, usize, Vec<f64>)> = Vec::new();
    for (ln, w) in lines {
        match w[0] {
            "states" | "actions" | "observations" | "start" if w.len() == 2 => {
                let v: usize = parse_num(w[1], *ln)?;
                match w[0] {
                    "states" => ns = Some(v),
                    "actions" => na = Some(v),
                    "observations" => no = Some(v),
                    _ => start = v,
                }
            }
            "row" if w.len() >= 3 => {
                let s = parse_num(w[1], *ln)?;
                let a = parse_num(w[2], *ln)?;
                let ps = w[3..]
                    .iter()
                    .map(|x| parse_num(x, *ln))
                    .collect::<Result<Vec<f64>>>()?;
                rows.push((*ln, s, a, ps));
            }
            _ => {
                return Err(err(
                    *ln,
                    format!("unexpected line starting with {:?}", w[0]),
                ))
            }
        }
    }
    let (ns, na, no) = match (ns, na, no) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(err(0, "table needs states, actions and observations lines")),
    };
    let width = ns * no;
    let mut probs = vec![f64::NAN; ns * na * width];
    for (ln, s, a, ps) in rows {
        if s >= ns || a >= na {
            return Err(err(ln, "row index out of range"));
        }
        if ps.len() != width {
            return Err(err(ln, format!("row needs {width} entries")));
        }
        probs[(s * na + a) * width..(s * na + a + 1) * width].copy_from_slice(&ps);
    }
    if probs.iter().any(|p| p.is_nan()) {
        return Err(err(0, "missing table rows"));
    }
    Ok(TransitionTable::new(ns, na, no, start, probs)?.into())
}

fn parse_network(lines: &[(usize, Vec<&str>)]) -> Result<EnvModel> {
    let mut states: Vec<String> = Vec::new();
    let mut actions: Vec<String> = Vec::new();
    let mut observations: Vec<String> = Vec::new();
    let mut init: Option<Vec<bool>> = None;
    let mut nexts: Vec<(usize, String, String)> = Vec::new();
    let mut emits: Vec<(usize, String, String)> = Vec::new();
    for (ln, w) in lines {
        let names = || w[1..].iter().map(|s| s.to_string()).collect::<Vec<_>>();
        match w[0] {
            "state" => states = names(),
            "action" => actions = names(),
            "observation" => observations = names(),
            "init" => {
                init = Some(
                    w[1..]
                        .iter()
                        .map(|x| match *x {
                            "0" | "false" => Ok(false),
                            "1" | "true" => Ok(true),
                            _ => Err(err(*ln, format!("bad initial value {x:?}"))),
                        })
                        .collect::<Result<_>>()?,
                )
            }
            "next" | "emit" if w.len() >= 3 => {
                let entry = (*ln, w[1].to_string(), w[2..].join(" "));
                if w[0] == "next" {
                    nexts.push(entry)
                } else {
                    emits.push(entry)
                }
            }
            _ => {
                return Err(err(
                    *ln,
                    format!("unexpected line starting with {:?}", w[0]),
                ))
            }
        }
    }
    let init = init.ok_or_else(|| err(0, "missing init line"))?;
    let order =
        |decls: &[String], defs: &[(usize, String, String)], kind: &str| -> Result<Vec<Expr>> {
            let mut out = Vec::with_capacity(decls.len());
            for name in decls {
                let (ln, _, text) = defs
                    .iter()
                    .find(|d| &d.1 == name)
                    .ok_or_else(|| err(0, format!("no {kind} expression for {name}")))?;
                out.push(parse_expr(text, &states, &actions, *ln)?);
            }
            if defs.len() != decls.len() {
                return Err(err(
                    0,
                    format!("{kind} expressions do not match declarations"),
                ));
            }
            Ok(out)
        };
    let updates = order(&states, &nexts, "next")?;
    let emit_exprs = order(&observations, &emits, "emit")?;
    Ok(BooleanNetwork::new(states, actions, observations, init, updates, emit_exprs)?.into())
}

fn parse_expr(text: &str, states: &[String], actions: &[String], line: usize) -> Result<Expr> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let toks: Vec<&str> = spaced.split_whitespace().collect();
    let mut pos = 0;
    let e = expr_at(&toks, &mut pos, states, actions, line)?;
    if pos != toks.len() {
        return Err(err(line, "trailing tokens after expression"));
    }
    Ok(e)
}

fn expr_at(
    toks: &[&str],
    pos: &mut usize,
    states: &[String],
    actions: &[String],
    line: usize,
) -> Result<Expr> {
    let tok = *toks
        .get(*pos)
        .ok_or_else(|| err(line, "unexpected end of expression"))?;
    *pos += 1;
    if tok != "(" {
        return match tok {
            "true" => Ok(Expr::Lit(true)),
            "false" => Ok(Expr::Lit(false)),
            name => {
                if let Some(i) = states.iter().position(|s| s == name) {
                    Ok(Expr::State(i))
                } else if let Some(j) = actions.iter().position(|s| s == name) {
                    Ok(Expr::Action(j))
                } else {
                    Err(err(line, format!("unknown variable {name:?}")))
                }
            }
        };
    }
    let op = *toks
        .get(*pos)
        .ok_or_else(|| err(line, "unexpected end of expression"))?;
    *pos += 1;
    let sub = |pos: &mut usize| expr_at(toks, pos, states, actions, line);
    let e = match op {
        "not" => Expr::not(sub(pos)?),
        "and" | "or" | "xor" => {
            let a = sub(pos)?;
            let b = sub(pos)?;
            match op {
                "and" => Expr::and(a, b),
                "or" => Expr::or(a, b),
                _ => Expr::xor(a, b),
            }
        }
        "choice" => {
            let p: f64 = parse_num(
                toks.get(*pos)
                    .ok_or_else(|| err(line, "missing probability"))?,
                line,
            )?;
            *pos += 1;
            let a = sub(pos)?;
            let b = sub(pos)?;
            Expr::choice(p, a, b)
        }
        other => return Err(err(line, format!("unknown operator {other:?}"))),
    };
    if toks.get(*pos) != Some(&")") {
        return Err(err(line, "expected `)`"));
    }
    *pos += 1;
    Ok(e)
}
