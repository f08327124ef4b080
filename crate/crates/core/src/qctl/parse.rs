//! Recursive-descent parser for the textual formula syntax.

use super::{Formula, QctlError, QuantKind};
use crate::kripke::valid_ident;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Dot,
    Eof,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
}

fn lex(text: &str) -> Result<Lexer, QctlError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let mut step = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '~' | '!' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '.' => Some(Tok::Dot),
            '-' if chars.get(i + 1) == Some(&'>') => {
                step = 2;
                Some(Tok::Implies)
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                step = 3;
                Some(Tok::Iff)
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                step = j - i;
                Some(Tok::Ident(chars[i..j].iter().collect()))
            }
            other => {
                return Err(QctlError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        if let Some(t) = tok {
            toks.push((t, start.0, start.1));
        }
        i += step;
        col += step;
    }
    toks.push((Tok::Eof, line, col));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

const RESERVED: &[&str] = &[
    "E", "A", "X", "F", "G", "U", "W", "EX", "AX", "EF", "AF", "EG", "AG", "true", "false",
    "exists", "forall", "exists1", "forall1",
];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, QctlError> {
        let (_, line, col) = &self.toks[self.pos];
        Err(QctlError::Syntax {
            line: *line,
            col: *col,
            msg: msg.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), QctlError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn is_kw(&self, k: usize, kw: &str) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if s == kw)
    }

    fn iff(&mut self) -> Result<Formula, QctlError> {
        let mut lhs = self.implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, QctlError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, QctlError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, QctlError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    /// Path quantifier followed by a temporal letter, either `E X` or `EX`.
    fn modality(&self) -> Option<(char, char, usize)> {
        let Tok::Ident(s) = self.peek() else {
            return None;
        };
        match s.as_str() {
            "E" | "A" => match self.peek_at(1) {
                Tok::Ident(t) if matches!(t.as_str(), "X" | "F" | "G") => {
                    Some((s.chars().next()?, t.chars().next()?, 2))
                }
                Tok::LBrack => Some((s.chars().next()?, '[', 1)),
                _ => None,
            },
            "EX" | "AX" | "EF" | "AF" | "EG" | "AG" => {
                let mut c = s.chars();
                Some((c.next()?, c.next()?, 1))
            }
            _ => None,
        }
    }

    fn unary(&mut self) -> Result<Formula, QctlError> {
        if *self.peek() == Tok::Not {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        let quant = match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "exists" => Some(QuantKind::Exists),
                "forall" => Some(QuantKind::Forall),
                "exists1" => Some(QuantKind::Exists1),
                "forall1" => Some(QuantKind::Forall1),
                _ => None,
            },
            _ => None,
        };
        if let Some(k) = quant {
            self.bump();
            let p = self.prop()?;
            self.expect(Tok::Dot, "`.` after quantified proposition")?;
            let body = self.iff()?;
            return Ok(Formula::quant(k, &p, body));
        }
        if let Some((path, op, n)) = self.modality() {
            for _ in 0..n {
                self.bump();
            }
            if op == '[' {
                self.expect(Tok::LBrack, "`[`")?;
                let lhs = self.iff()?;
                let until = if self.is_kw(0, "U") {
                    true
                } else if self.is_kw(0, "W") {
                    false
                } else {
                    return self.err("expected `U` or `W`");
                };
                self.bump();
                let rhs = self.iff()?;
                self.expect(Tok::RBrack, "`]`")?;
                return Ok(match (path, until) {
                    ('E', true) => Formula::eu(lhs, rhs),
                    ('A', true) => Formula::au(lhs, rhs),
                    ('E', false) => Formula::ew(lhs, rhs),
                    _ => Formula::aw(lhs, rhs),
                });
            }
            let arg = self.unary()?;
            return Ok(match (path, op) {
                ('E', 'X') => Formula::ex(arg),
                ('A', 'X') => Formula::ax(arg),
                ('E', 'F') => Formula::ef(arg),
                ('A', 'F') => Formula::af(arg),
                ('E', 'G') => Formula::eg(arg),
                _ => Formula::ag(arg),
            });
        }
        self.primary()
    }

    fn prop(&mut self) -> Result<String, QctlError> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                if !valid_ident(&s) {
                    return self.err(format!("invalid proposition name `{s}`"));
                }
                self.bump();
                Ok(s)
            }
            _ => self.err("expected a proposition"),
        }
    }

    fn primary(&mut self) -> Result<Formula, QctlError> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(_) => Ok(Formula::atom(&self.prop()?)),
            Tok::Eof => self.err("unexpected end of input"),
            other => self.err(format!("unexpected token {other:?}")),
        }
    }
}

/// Parses the surface syntax. Precedence from tightest: unary operators,
/// `&`, `|`, `->` (right associative), `<->`. Quantifiers extend as far
/// right as possible.
pub fn parse_qctl(text: &str) -> Result<Formula, QctlError> {
    let lx = lex(text)?;
    let mut p = Parser {
        toks: lx.toks,
        pos: 0,
    };
    let f = p.iff()?;
    if *p.peek() != Tok::Eof {
        return p.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Formula as F;

    #[test]
    fn quantified_invariant() {
        let f = parse_qctl("exists p. A G (p -> E X p)").unwrap();
        let want = F::exists("p", F::ag(F::implies(F::atom("p"), F::ex(F::atom("p")))));
        assert_eq!(f, want);
    }

    #[test]
    fn until_brackets() {
        assert_eq!(
            parse_qctl("E [ a U b ]").unwrap(),
            F::eu(F::atom("a"), F::atom("b"))
        );
        assert_eq!(
            parse_qctl("A[a W b]").unwrap(),
            F::aw(F::atom("a"), F::atom("b"))
        );
    }

    #[test]
    fn self_loop_detector() {
        let f = parse_qctl("forall p. (p -> E X p)").unwrap();
        assert_eq!(
            f,
            F::forall("p", F::implies(F::atom("p"), F::ex(F::atom("p"))))
        );
    }

    #[test]
    fn precedence_levels() {
        let f = parse_qctl("a & b | c -> d <-> e").unwrap();
        let want = F::iff(
            F::implies(
                F::or(F::and(F::atom("a"), F::atom("b")), F::atom("c")),
                F::atom("d"),
            ),
            F::atom("e"),
        );
        assert_eq!(f, want);
        let g = parse_qctl("~E X a & b").unwrap();
        assert_eq!(g, F::and(F::not(F::ex(F::atom("a"))), F::atom("b")));
    }

    #[test]
    fn quantifier_scope_is_maximal() {
        let f = parse_qctl("a & exists p. p | b").unwrap();
        let want = F::and(
            F::atom("a"),
            F::exists("p", F::or(F::atom("p"), F::atom("b"))),
        );
        assert_eq!(f, want);
    }

    #[test]
    fn compact_modalities() {
        assert_eq!(parse_qctl("AG EF a").unwrap(), F::ag(F::ef(F::atom("a"))));
    }

    #[test]
    fn errors_carry_position() {
        match parse_qctl("a &\n  & b") {
            Err(QctlError::Syntax { line, col, .. }) => assert_eq!((line, col), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(parse_qctl("exists p__s0. p").is_err());
        assert!(parse_qctl("E [a U b").is_err());
    }
}
