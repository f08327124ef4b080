//! Parser for the sabotage logic surface syntax.

use super::{is_reserved, Sml, SmlError};
use crate::kripke::valid_ident;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Iff,
    LParen,
    RParen,
    /// Index into [`MODALS`].
    Modal(usize),
    Eof,
}

type Modal = fn(Sml) -> Sml;

const MODALS: &[(&str, Modal)] = &[
    ("<~l>", Sml::local_some),
    ("[~l]", Sml::local_every),
    ("<~>", Sml::sabotage_some),
    ("[~]", Sml::sabotage_every),
    ("<>", Sml::diamond),
    ("[]", Sml::square),
];

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SmlError> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let rest = &text[i..];
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let col = i + 1;
        if rest.starts_with("<->") {
            out.push((Tok::Iff, col));
            i += 3;
            continue;
        }
        if let Some((m, (sym, _))) = MODALS
            .iter()
            .enumerate()
            .find(|(_, (s, _))| rest.starts_with(s))
        {
            out.push((Tok::Modal(m), col));
            i += sym.len();
            continue;
        }
        if rest.starts_with("->") {
            out.push((Tok::Implies, col));
            i += 2;
            continue;
        }
        let tok = match c {
            b'~' | b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                let len = rest
                    .bytes()
                    .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                    .count();
                let word = &rest[..len];
                i += len;
                out.push((
                    match word {
                        "true" => Tok::True,
                        "false" => Tok::False,
                        _ => Tok::Ident(word.to_string()),
                    },
                    col,
                ));
                continue;
            }
            _ => {
                let ch = rest.chars().next().unwrap_or('?');
                return Err(SmlError::Syntax {
                    col,
                    msg: format!("unexpected character `{ch}`"),
                });
            }
        };
        out.push((tok, col));
        i += 1;
    }
    out.push((Tok::Eof, text.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        self.pos = (self.pos + 1).min(self.toks.len() - 1);
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SmlError> {
        Err(SmlError::Syntax {
            col: self.toks[self.pos].1,
            msg: msg.into(),
        })
    }

    fn iff(&mut self) -> Result<Sml, SmlError> {
        let mut l = self.implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let r = self.implies()?;
            let fwd = Sml::or(Sml::not(l.clone()), r.clone());
            let back = Sml::or(Sml::not(r), l);
            l = Sml::and(fwd, back);
        }
        Ok(l)
    }

    fn implies(&mut self) -> Result<Sml, SmlError> {
        let l = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let r = self.implies()?;
            return Ok(Sml::or(Sml::not(l), r));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Sml, SmlError> {
        let mut l = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            l = Sml::or(l, self.and()?);
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Sml, SmlError> {
        let mut l = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            l = Sml::and(l, self.unary()?);
        }
        Ok(l)
    }

    fn unary(&mut self) -> Result<Sml, SmlError> {
        match self.bump() {
            Tok::Not => Ok(Sml::not(self.unary()?)),
            Tok::Modal(m) => Ok(MODALS[m].1(self.unary()?)),
            Tok::True => Ok(Sml::True),
            Tok::False => Ok(Sml::not(Sml::True)),
            Tok::Ident(name) => {
                if is_reserved(&name) {
                    return Err(SmlError::Reserved(name));
                }
                if !valid_ident(&name) {
                    self.pos = self.pos.saturating_sub(1);
                    return self.err(format!("invalid proposition name `{name}`"));
                }
                Ok(Sml::atom(&name))
            }
            Tok::LParen => {
                let f = self.iff()?;
                if self.bump() != Tok::RParen {
                    self.pos = self.pos.saturating_sub(1);
                    return self.err("expected `)`");
                }
                Ok(f)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                self.err("expected a formula")
            }
        }
    }
}

/// Parses `<> [] <~> [~] <~l> [~l] ~ ! & | -> <-> true false` and parentheses;
/// unary operators bind tightest, then `&`, `|`, `->` (right associative)
/// and `<->`.
pub fn parse_sml(text: &str) -> Result<Sml, SmlError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let f = p.iff()?;
    if *p.peek() != Tok::Eof {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}
