//! Canonical token serialization and description length.
//!
//! Every model serializes to a sequence over one fixed vocabulary; the
//! description length is the token count times the bits needed to index
//! that vocabulary.
//!
//! | token        | count  |
//! |--------------|--------|
//! | `Table`, `Network` headers | 2 |
//! | boolean literals | 2 |
//! | `Not And Or Xor Choice` | 5 |
//! | variable slots | 64 |
//! | probability literals `k/1024` | 1025 |
//! | integer literals `0..65536` | 65536 |
//!
//! Tables emit `Table |S| |A| |O| start` and then every probability in
//! row-major order. Networks emit `Network n_state n_action n_obs`, the
//! initial state bits, then each update and observation expression in
//! prefix order. State variable `i` uses slot `i`; action variable `j`
//! uses slot `n_state + j`.

use super::network::Expr;
use super::{EnvModel, ModelForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Table,
    Network,
    Lit(bool),
    Not,
    And,
    Or,
    Xor,
    Choice,
    Var(u8),
    Prob(u16),
    Int(u16),
}

pub const VOCABULARY_SIZE: u64 = 2 + 2 + 5 + 64 + 1025 + 65536;
pub const BITS_PER_TOKEN: u64 = 64 - (VOCABULARY_SIZE - 1).leading_zeros() as u64;

pub fn quantize_probability(p: f64) -> u16 {
    (p.clamp(0.0, 1.0) * 1024.0).round() as u16
}

fn int_token(n: usize) -> Token {
    Token::Int(u16::try_from(n).expect("count exceeds the integer vocabulary"))
}

fn push_expr(e: &Expr, n_state: usize, out: &mut Vec<Token>) {
    match e {
        Expr::Lit(b) => out.push(Token::Lit(*b)),
        Expr::State(i) => out.push(Token::Var(*i as u8)),
        Expr::Action(j) => out.push(Token::Var((n_state + j) as u8)),
        Expr::Not(a) => {
            out.push(Token::Not);
            push_expr(a, n_state, out);
        }
        Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
            out.push(match e {
                Expr::And(..) => Token::And,
                Expr::Or(..) => Token::Or,
                _ => Token::Xor,
            });
            push_expr(a, n_state, out);
            push_expr(b, n_state, out);
        }
        Expr::Choice(p, a, b) => {
            out.push(Token::Choice);
            out.push(Token::Prob(quantize_probability(*p)));
            push_expr(a, n_state, out);
            push_expr(b, n_state, out);
        }
    }
}

pub fn canonical_tokens(q: &EnvModel) -> Vec<Token> {
    match q.form() {
        ModelForm::Table => {
            let t = q.table();
            let mut out = vec![
                Token::Table,
                int_token(t.n_states()),
                int_token(t.n_actions()),
                int_token(t.n_observations()),
                int_token(t.start()),
            ];
            out.extend(
                t.probs()
                    .iter()
                    .map(|&p| Token::Prob(quantize_probability(p))),
            );
            out
        }
        ModelForm::Network(n) => {
            let ns = n.state_names().len();
            let mut out = vec![
                Token::Network,
                int_token(ns),
                int_token(n.action_names().len()),
                int_token(n.observation_names().len()),
            ];
            out.extend(n.initial().iter().map(|&b| Token::Lit(b)));
            for e in n.updates().iter().chain(n.emits()) {
                push_expr(e, ns, &mut out);
            }
            out
        }
    }
}

/// `|q|` in bits.
pub fn description_length(q: &EnvModel) -> u64 {
    canonical_tokens(q).len() as u64 * BITS_PER_TOKEN
}

/// `2^-|q|`; underflows to zero beyond 1074 bits, see [`log2_prior`].
pub fn prior(q: &EnvModel) -> f64 {
    log2_prior(q).exp2()
}

pub fn log2_prior(q: &EnvModel) -> f64 {
    -(description_length(q) as f64)
}

/// Length in bits of the table-lookup program that replays a history of
/// `len` steps: a chain of `len + 1` states emitting each recorded
/// observation with certainty.
pub fn table_lookup_length(n_actions: usize, n_observations: usize, len: usize) -> u64 {
    let n = (len + 1) as u64;
    (5 + n * n_actions as u64 * n * n_observations as u64) * BITS_PER_TOKEN
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envmodel::{delusion_env_6_3, table_4_1};

    #[test]
    fn vocabulary_bits() {
        assert_eq!(BITS_PER_TOKEN, 17);
        assert!(1u64 << BITS_PER_TOKEN >= VOCABULARY_SIZE);
        assert!(1u64 << (BITS_PER_TOKEN - 1) < VOCABULARY_SIZE);
    }

    #[test]
    fn table_tokens() {
        let q = table_4_1();
        assert_eq!(canonical_tokens(&q).len(), 5 + 16);
        assert_eq!(description_length(&q), 21 * BITS_PER_TOKEN);
    }

    #[test]
    fn stable_across_calls() {
        let q = delusion_env_6_3(0.99).unwrap();
        assert_eq!(canonical_tokens(&q), canonical_tokens(&q.clone()));
    }
}
