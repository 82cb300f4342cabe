use super::{Formula, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Elem(usize),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    Plus,
    Star,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '~' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, start));
            i += 1;
        } else if text[i..].starts_with("<->") {
            out.push((Tok::Iff, start));
            i += 3;
        } else if text[i..].starts_with("->") {
            out.push((Tok::Implies, start));
            i += 2;
        } else if c == '#' {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start + 1..i].parse().map_err(|_| Error::Syntax {
                pos: start,
                msg: "expected element index after #".into(),
            })?;
            out.push((Tok::Elem(n), start));
        } else if c.is_ascii_alphanumeric() || c == '_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_' || bytes[i] == b'\'')
            {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            return Err(Error::Syntax {
                pos: start,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

/// `u`..`z` followed only by digits or primes.
fn looks_like_var(name: &str) -> bool {
    let mut cs = name.chars();
    matches!(cs.next(), Some('u'..='z')) && cs.all(|c| c.is_ascii_digit() || c == '\'')
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    end: usize,
    scope: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.offset(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn is_var(&self, name: &str) -> bool {
        self.scope.iter().any(|v| v == name) || looks_like_var(name)
    }

    fn formula(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.formula()?))
            }
            Some(Tok::Ident(q)) if q == "forall" || q == "exists" => {
                self.pos += 1;
                let x = match self.peek() {
                    Some(Tok::Ident(x)) => x.clone(),
                    _ => return self.err("expected variable after quantifier"),
                };
                self.pos += 1;
                self.expect(Tok::Dot, "'.' after quantified variable")?;
                self.scope.push(x.clone());
                let body = self.formula();
                self.scope.pop();
                let body = body?;
                Ok(if q == "forall" {
                    Formula::forall(&x, body)
                } else {
                    Formula::exists(&x, body)
                })
            }
            Some(Tok::LParen) => {
                let save = self.pos;
                if let Ok(eq) = self.equality() {
                    return Ok(eq);
                }
                self.pos = save + 1;
                self.paren_body()
            }
            Some(Tok::Ident(_)) | Some(Tok::Elem(_)) => {
                let save = self.pos;
                if let Ok(eq) = self.equality() {
                    return Ok(eq);
                }
                self.pos = save;
                self.atom()
            }
            Some(_) => self.err("expected formula"),
            None => self.err("unexpected end of input"),
        }
    }

    /// `term = term`, possibly wrapped in one pair of parentheses.
    fn equality(&mut self) -> Result<Formula> {
        if self.peek() == Some(&Tok::LParen) {
            self.pos += 1;
            let lhs = self.term()?;
            self.expect(Tok::Eq, "'='")?;
            let rhs = self.term()?;
            self.expect(Tok::RParen, "')'")?;
            Ok(Formula::Eq(lhs, rhs))
        } else {
            let lhs = self.term()?;
            self.expect(Tok::Eq, "'='")?;
            Ok(Formula::Eq(lhs, self.term()?))
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        let name = match self.peek() {
            Some(Tok::Ident(n)) => n.clone(),
            _ => return self.err("expected symbol"),
        };
        self.pos += 1;
        if name == "true" || name == "false" {
            return Ok(Formula::Const(name == "true"));
        }
        if self.peek() == Some(&Tok::LParen) {
            let args = self.args()?;
            return Ok(Formula::Pred(name, args));
        }
        if self.is_var(&name) {
            self.pos -= 1;
            return self.err(format!("variable {name} used as a formula"));
        }
        Ok(Formula::Prop(name))
    }

    fn paren_body(&mut self) -> Result<Formula> {
        let first = self.formula()?;
        let op = match self.peek() {
            Some(Tok::RParen) => {
                self.pos += 1;
                return Ok(first);
            }
            Some(t @ (Tok::And | Tok::Or | Tok::Implies | Tok::Iff)) => t.clone(),
            _ => return self.err("expected connective or ')'"),
        };
        self.pos += 1;
        let mut acc = first;
        loop {
            let rhs = self.formula()?;
            acc = match op {
                Tok::And => Formula::and(acc, rhs),
                Tok::Or => Formula::or(acc, rhs),
                Tok::Implies => Formula::implies(acc, rhs),
                _ => Formula::iff(acc, rhs),
            };
            match self.peek() {
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(acc);
                }
                Some(t) if *t == op && matches!(op, Tok::And | Tok::Or) => self.pos += 1,
                Some(Tok::And | Tok::Or | Tok::Implies | Tok::Iff) => {
                    return self.err("mixed connectives need their own parentheses")
                }
                _ => return self.err("expected ')'"),
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Term>> {
        self.expect(Tok::LParen, "'('")?;
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::RParen) {
            self.pos += 1;
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RParen) => {
                    self.pos += 1;
                    return Ok(args);
                }
                _ => return self.err("expected ',' or ')'"),
            }
        }
    }

    fn term(&mut self) -> Result<Term> {
        let mut acc = self.product()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            acc = Term::App("+".into(), vec![acc, self.product()?]);
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Term> {
        let mut acc = self.primary()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = Term::App("*".into(), vec![acc, self.primary()?]);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Term> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(t)
            }
            Some(Tok::Elem(i)) => {
                self.pos += 1;
                Ok(Term::Elem(i))
            }
            Some(Tok::Ident(name))
                if !matches!(name.as_str(), "forall" | "exists" | "true" | "false") =>
            {
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    return Ok(Term::App(name, self.args()?));
                }
                Ok(if self.is_var(&name) {
                    Term::Var(name)
                } else {
                    Term::App(name, Vec::new())
                })
            }
            _ => self.err("expected term"),
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: text.len(),
        scope: Vec::new(),
    };
    let f = p.formula()?;
    if p.pos != toks.len() {
        return p.err("trailing input");
    }
    f.check_arities()?;
    Ok(f)
}

/// One statement per line; blank lines and `#` comments are skipped.
/// Returns `(line number, formula)` pairs.
pub fn parse_formula_file(text: &str) -> Result<Vec<(usize, Formula)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let f = parse_formula(body).map_err(|e| Error::Format {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push((i + 1, f));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implication_tree() {
        let f = parse_formula("(p -> (q -> p))").unwrap();
        let p = || Formula::Prop("p".into());
        assert_eq!(
            f,
            Formula::implies(p(), Formula::implies(Formula::Prop("q".into()), p()))
        );
    }

    #[test]
    fn nested_quantifiers() {
        let f = parse_formula("forall x. exists y. (x + y = 0)").unwrap();
        let sum = Term::App(
            "+".into(),
            vec![Term::Var("x".into()), Term::Var("y".into())],
        );
        let zero = Term::App("0".into(), vec![]);
        assert_eq!(
            f,
            Formula::forall("x", Formula::exists("y", Formula::Eq(sum, zero)))
        );
    }

    #[test]
    fn unclosed_paren_reports_end() {
        let text = "(p -> q";
        assert!(matches!(parse_formula(text), Err(Error::Syntax { pos, .. }) if pos == text.len()));
    }

    #[test]
    fn chains_and_precedence() {
        let f = parse_formula("((x = 0) | (x = 1) | (x = 2))").unwrap();
        assert!(matches!(f, Formula::Or(..)));
        let g = parse_formula("(1 + 2 * 2 = 2)").unwrap();
        assert_eq!(g.to_string(), "((1 + (2 * 2)) = 2)");
        assert!(parse_formula("(p & q | r)").is_err());
        assert!(parse_formula("(p -> q -> r)").is_err());
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            parse_formula("(P(a) & P(a, b))"),
            Err(Error::Arity { .. })
        ));
    }

    #[test]
    fn printer_round_trip() {
        for s in [
            "forall x. (~(x = 0) -> exists y. ((x * y) = 1))",
            "(R(#1, f(a)) <-> ~true)",
            "exists n. P(n)",
        ] {
            let f = parse_formula(s).unwrap();
            assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        }
    }
}
