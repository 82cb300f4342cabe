use std::collections::HashMap;

use crate::error::{Error, Result};

/// A finite domain with total tables for functions and predicates, keyed
/// by `(name, arity)`. Tables are row-major over `D^n` with the first
/// argument most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteInterpretation {
    domain: Vec<String>,
    functions: HashMap<(String, usize), Vec<usize>>,
    predicates: HashMap<(String, usize), Vec<bool>>,
}

impl FiniteInterpretation {
    pub fn new(domain: Vec<String>) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::Parameter("domain must be nonempty".into()));
        }
        let mut seen = domain.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != domain.len() {
            return Err(Error::Parameter(
                "domain element names must be distinct".into(),
            ));
        }
        Ok(FiniteInterpretation {
            domain,
            functions: HashMap::new(),
            predicates: HashMap::new(),
        })
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn size(&self) -> usize {
        self.domain.len()
    }

    fn table_len(&self, arity: usize) -> usize {
        self.size().pow(arity as u32)
    }

    pub fn add_function(&mut self, name: &str, arity: usize, table: Vec<usize>) -> Result<()> {
        if table.len() != self.table_len(arity) || table.iter().any(|&v| v >= self.size()) {
            return Err(Error::Interpretation(format!(
                "function {name}/{arity} needs a total table over the domain"
            )));
        }
        self.functions.insert((name.to_string(), arity), table);
        Ok(())
    }

    pub fn add_predicate(&mut self, name: &str, arity: usize, table: Vec<bool>) -> Result<()> {
        if table.len() != self.table_len(arity) {
            return Err(Error::Interpretation(format!(
                "predicate {name}/{arity} needs a total table"
            )));
        }
        self.predicates.insert((name.to_string(), arity), table);
        Ok(())
    }

    fn index(&self, args: &[usize]) -> usize {
        args.iter().fold(0, |acc, &a| acc * self.size() + a)
    }

    /// Declared functions first; an undeclared constant naming a domain
    /// element denotes that element.
    pub fn apply(&self, name: &str, args: &[usize]) -> Result<usize> {
        if let Some(t) = self.functions.get(&(name.to_string(), args.len())) {
            return Ok(t[self.index(args)]);
        }
        if args.is_empty() {
            if let Some(i) = self.domain.iter().position(|d| d == name) {
                return Ok(i);
            }
        }
        Err(Error::Interpretation(format!("{name}/{}", args.len())))
    }

    pub fn holds(&self, name: &str, args: &[usize]) -> Result<bool> {
        self.predicates
            .get(&(name.to_string(), args.len()))
            .map(|t| t[self.index(args)])
            .ok_or_else(|| Error::Interpretation(format!("{name}/{}", args.len())))
    }

    fn element(&self, name: &str) -> Option<usize> {
        self.domain.iter().position(|d| d == name)
    }
}

/// The three-element field: domain `0 1 2` with `+` and `*` mod 3.
pub fn gf3() -> FiniteInterpretation {
    let mut i =
        FiniteInterpretation::new(vec!["0".into(), "1".into(), "2".into()]).expect("valid domain");
    let add: Vec<usize> = (0..9).map(|k| (k / 3 + k % 3) % 3).collect();
    let mul: Vec<usize> = (0..9).map(|k| (k / 3) * (k % 3) % 3).collect();
    i.add_function("+", 2, add).expect("total table");
    i.add_function("*", 2, mul).expect("total table");
    i
}

/// Reads the interpretation format:
///
/// ```text
/// domain 0 1 2
/// function + 2
/// 0 0 0
/// 0 1 1
/// ...
/// predicate even 1
/// 0 true
/// ...
/// ```
///
/// Each table row lists the arguments then the value; rows may come in any
/// order but must cover every argument tuple exactly once.
pub fn parse_interpretation(text: &str) -> Result<FiniteInterpretation> {
    enum Pending {
        Function(String, usize, Vec<Option<usize>>),
        Predicate(String, usize, Vec<Option<bool>>),
    }
    let fail = |line: usize, msg: String| Error::Format { line, msg };
    let mut interp: Option<FiniteInterpretation> = None;
    let mut pending: Option<(usize, Pending)> = None;

    fn finish(interp: &mut FiniteInterpretation, p: (usize, Pending)) -> Result<()> {
        let (line, p) = p;
        let missing = |name: &str| Error::Format {
            line,
            msg: format!("table for {name} is incomplete"),
        };
        match p {
            Pending::Function(name, arity, rows) => {
                let t: Option<Vec<usize>> = rows.into_iter().collect();
                interp.add_function(&name, arity, t.ok_or_else(|| missing(&name))?)
            }
            Pending::Predicate(name, arity, rows) => {
                let t: Option<Vec<bool>> = rows.into_iter().collect();
                interp.add_predicate(&name, arity, t.ok_or_else(|| missing(&name))?)
            }
        }
    }

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match words[0] {
            "domain" => {
                if interp.is_some() {
                    return Err(fail(line_no, "duplicate domain line".into()));
                }
                interp = Some(
                    FiniteInterpretation::new(words[1..].iter().map(|s| s.to_string()).collect())
                        .map_err(|e| fail(line_no, e.to_string()))?,
                );
            }
            kw @ ("function" | "predicate") => {
                let it = interp
                    .as_mut()
                    .ok_or_else(|| fail(line_no, "domain must come first".into()))?;
                if let Some(p) = pending.take() {
                    finish(it, p)?;
                }
                if words.len() != 3 {
                    return Err(fail(line_no, format!("expected '{kw} NAME ARITY'")));
                }
                let arity: usize = words[2]
                    .parse()
                    .map_err(|_| fail(line_no, "bad arity".into()))?;
                let n = it.table_len(arity);
                let name = words[1].to_string();
                pending = Some((
                    line_no,
                    if kw == "function" {
                        Pending::Function(name, arity, vec![None; n])
                    } else {
                        Pending::Predicate(name, arity, vec![None; n])
                    },
                ));
            }
            _ => {
                let it = interp
                    .as_ref()
                    .ok_or_else(|| fail(line_no, "domain must come first".into()))?;
                let Some((_, p)) = pending.as_mut() else {
                    return Err(fail(line_no, "table row outside a declaration".into()));
                };
                let arity = match p {
                    Pending::Function(_, a, _) | Pending::Predicate(_, a, _) => *a,
                };
                if words.len() != arity + 1 {
                    return Err(fail(
                        line_no,
                        format!("expected {arity} arguments and a value"),
                    ));
                }
                let args: Vec<usize> = words[..arity]
                    .iter()
                    .map(|w| {
                        it.element(w)
                            .ok_or_else(|| fail(line_no, format!("unknown element {w}")))
                    })
                    .collect::<Result<_>>()?;
                let idx = it.index(&args);
                let value = words[arity];
                let dup = || fail(line_no, "duplicate table row".into());
                match p {
                    Pending::Function(_, _, rows) => {
                        let v = it
                            .element(value)
                            .ok_or_else(|| fail(line_no, format!("unknown element {value}")))?;
                        if rows[idx].replace(v).is_some() {
                            return Err(dup());
                        }
                    }
                    Pending::Predicate(_, _, rows) => {
                        let v = match value {
                            "true" | "1" => true,
                            "false" | "0" => false,
                            _ => {
                                return Err(fail(
                                    line_no,
                                    format!("expected true or false, got {value}"),
                                ))
                            }
                        };
                        if rows[idx].replace(v).is_some() {
                            return Err(dup());
                        }
                    }
                }
            }
        }
    }
    let mut it = interp.ok_or_else(|| fail(0, "missing domain line".into()))?;
    if let Some(p) = pending.take() {
        finish(&mut it, p)?;
    }
    Ok(it)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf3_tables() {
        let g = gf3();
        assert_eq!(g.apply("+", &[2, 2]), Ok(1));
        assert_eq!(g.apply("*", &[2, 2]), Ok(1));
        assert_eq!(g.apply("2", &[]), Ok(2));
        assert!(g.apply("f", &[0]).is_err());
    }

    #[test]
    fn parses_file() {
        let text = "domain a b\nfunction f 1\na b\nb a\npredicate P 1 # comment\na true\nb false\n";
        let i = parse_interpretation(text).unwrap();
        assert_eq!(i.apply("f", &[0]), Ok(1));
        assert_eq!(i.holds("P", &[1]), Ok(false));
        let partial = "domain a b\nfunction f 1\na b\n";
        assert!(matches!(
            parse_interpretation(partial),
            Err(Error::Format { .. })
        ));
    }
}
