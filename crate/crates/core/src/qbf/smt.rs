//! SMT-LIB2 text for closed circuits: `sat` exactly when the circuit is valid.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{CircuitBuilder, CircuitMeta, Gate, NodeId, QbfCircuit, QbfError, Quantifier};

fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

struct Emitter<'a> {
    c: &'a QbfCircuit,
    owner: Vec<u32>,
    refs: Vec<u32>,
}

const TOP: u32 = u32::MAX;

impl Emitter<'_> {
    fn bound(&self, n: NodeId) -> bool {
        match self.c.gate(n) {
            Gate::And(_) | Gate::Or(_) => true,
            Gate::Quant(..) => self.refs[n.index()] > 1,
            _ => false,
        }
    }

    fn term(&self, n: NodeId, out: &mut String) {
        let c = self.c;
        if self.bound(n) {
            write!(out, "%g{}", n.0).unwrap();
            return;
        }
        match c.gate(n) {
            Gate::Const(b) => out.push_str(if *b { "true" } else { "false" }),
            Gate::Var(v) => out.push_str(&symbol(c.var_name(*v))),
            Gate::Not(a) => {
                out.push_str("(not ");
                self.term(*a, out);
                out.push(')');
            }
            Gate::Quant(..) => self.definition(n, out),
            Gate::And(_) | Gate::Or(_) => unreachable!("let-bound"),
        }
    }

    fn definition(&self, n: NodeId, out: &mut String) {
        match self.c.gate(n) {
            Gate::And(cs) | Gate::Or(cs) => {
                out.push_str(if matches!(self.c.gate(n), Gate::And(_)) {
                    "(and"
                } else {
                    "(or"
                });
                for &ch in cs {
                    out.push(' ');
                    self.term(ch, out);
                }
                out.push(')');
            }
            Gate::Quant(q, vs, body) => {
                write!(out, "({} (", q.keyword()).unwrap();
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        out.push(' ');
                    }
                    write!(out, "({} Bool)", symbol(self.c.var_name(*v))).unwrap();
                }
                out.push_str(") ");
                self.scope(n.0, *body, out);
                out.push(')');
            }
            _ => self.term(n, out),
        }
    }

    /// Let-binds the gates owned by `scope` below `body`, innermost last.
    fn scope(&self, scope: u32, body: NodeId, out: &mut String) {
        let mut owned = Vec::new();
        let mut seen = HashMap::new();
        let mut stack = vec![body];
        while let Some(n) = stack.pop() {
            if seen.insert(n, ()).is_some() {
                continue;
            }
            let o = self.owner[n.index()];
            // nodes owned by an enclosing scope cannot reach nodes owned here
            if o != scope && (o == TOP || (scope != TOP && o > scope)) {
                continue;
            }
            if o == scope && self.bound(n) {
                owned.push(n);
            }
            stack.extend(self.c.gate(n).children().iter().copied());
        }
        owned.sort();
        for &g in &owned {
            write!(out, "(let ((%g{} ", g.0).unwrap();
            self.definition(g, out);
            out.push_str(")) ");
        }
        self.term(body, out);
        for _ in &owned {
            out.push(')');
        }
    }
}

/// `(assert <closed formula>)` followed by `(check-sat)`.
pub fn emit_smt(c: &QbfCircuit) -> Result<String, QbfError> {
    c.validate()?;
    let scopes = c.scopes();
    let owner = scopes
        .free_binders
        .iter()
        .map(|fb| fb.first().copied().unwrap_or(TOP))
        .collect();
    let mut refs = vec![0u32; c.nodes().len()];
    for g in c.nodes() {
        for ch in g.children() {
            refs[ch.index()] += 1;
        }
    }
    let em = Emitter { c, owner, refs };
    let mut out = String::from("; closed QBF, sat iff valid\n(assert ");
    stacker::maybe_grow(256 * 1024, 8 * 1024 * 1024, || {
        em.scope(TOP, c.root(), &mut out)
    });
    out.push_str(")\n(check-sat)\n");
    Ok(out)
}

enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

// Let chains nest as deep as the circuit is large; drop them without recursion.
impl Drop for Sexp {
    fn drop(&mut self) {
        if let Sexp::List(items, _) = self {
            let mut stack = std::mem::take(items);
            while let Some(mut s) = stack.pop() {
                if let Sexp::List(inner, _) = &mut s {
                    stack.append(inner);
                }
            }
        }
    }
}

impl Sexp {
    fn line(&self) -> usize {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }
}

fn read_sexps(text: &str) -> Result<Vec<Sexp>, QbfError> {
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), 1)];
    let mut line = 1;
    let mut chars = text.chars().peekable();
    while let Some(ch) = chars.next() {
        match ch {
            '\n' => line += 1,
            ';' => {
                for c in chars.by_ref() {
                    if c == '\n' {
                        line += 1;
                        break;
                    }
                }
            }
            '(' => stack.push((Vec::new(), line)),
            ')' => {
                let (items, l) = stack.pop().ok_or_else(|| QbfError::Syntax {
                    line,
                    msg: "unbalanced `)`".into(),
                })?;
                let parent = stack.last_mut().ok_or_else(|| QbfError::Syntax {
                    line,
                    msg: "unbalanced `)`".into(),
                })?;
                parent.0.push(Sexp::List(items, l));
            }
            c if c.is_whitespace() => {}
            '|' => {
                let mut s = String::new();
                for c in chars.by_ref() {
                    if c == '|' {
                        break;
                    }
                    s.push(c);
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(s, line));
            }
            c => {
                let mut s = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    s.push(n);
                    chars.next();
                }
                stack.last_mut().unwrap().0.push(Sexp::Atom(s, line));
            }
        }
    }
    if stack.len() != 1 {
        return Err(QbfError::Syntax {
            line,
            msg: "unbalanced `(`".into(),
        });
    }
    Ok(stack.pop().unwrap().0)
}

struct Reader {
    b: CircuitBuilder,
    env: Vec<(String, NodeId)>,
    fresh: usize,
}

impl Reader {
    fn err<T>(&self, s: &Sexp, msg: &str) -> Result<T, QbfError> {
        Err(QbfError::Syntax {
            line: s.line(),
            msg: msg.into(),
        })
    }

    fn term(&mut self, s: &Sexp) -> Result<NodeId, QbfError> {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.term_inner(s))
    }

    fn term_inner(&mut self, s: &Sexp) -> Result<NodeId, QbfError> {
        match s {
            Sexp::Atom(a, _) => match a.as_str() {
                "true" => Ok(self.b.constant(true)),
                "false" => Ok(self.b.constant(false)),
                name => match self.env.iter().rev().find(|(n, _)| n == name) {
                    Some(&(_, id)) => Ok(id),
                    None => self.err(s, &format!("unbound symbol `{name}`")),
                },
            },
            Sexp::List(items, _) => {
                let Some(Sexp::Atom(head, _)) = items.first() else {
                    return self.err(s, "expected an operator");
                };
                let args = &items[1..];
                match head.as_str() {
                    "not" if args.len() == 1 => {
                        let a = self.term(&args[0])?;
                        Ok(self.b.not(a))
                    }
                    "and" | "or" => {
                        let mut cs = Vec::with_capacity(args.len());
                        for a in args {
                            cs.push(self.term(a)?);
                        }
                        Ok(if head == "and" {
                            self.b.and(cs)
                        } else {
                            self.b.or(cs)
                        })
                    }
                    "=>" if args.len() == 2 => {
                        let (x, y) = (self.term(&args[0])?, self.term(&args[1])?);
                        Ok(self.b.implies(x, y))
                    }
                    "=" if args.len() == 2 => {
                        let (x, y) = (self.term(&args[0])?, self.term(&args[1])?);
                        Ok(self.b.iff(x, y))
                    }
                    "let" if args.len() == 2 => {
                        let Sexp::List(binds, _) = &args[0] else {
                            return self.err(s, "bad let");
                        };
                        let mut new = Vec::new();
                        for bnd in binds {
                            match bnd {
                                Sexp::List(pair, _) if pair.len() == 2 => {
                                    let Sexp::Atom(n, _) = &pair[0] else {
                                        return self.err(bnd, "bad binding");
                                    };
                                    new.push((n.clone(), self.term(&pair[1])?));
                                }
                                _ => return self.err(bnd, "bad binding"),
                            }
                        }
                        let k = new.len();
                        self.env.extend(new);
                        let r = self.term(&args[1]);
                        self.env.truncate(self.env.len() - k);
                        r
                    }
                    "exists" | "forall" if args.len() == 2 => {
                        let Sexp::List(decls, _) = &args[0] else {
                            return self.err(s, "bad binder list");
                        };
                        let mut vars = Vec::new();
                        for d in decls {
                            match d {
                                Sexp::List(pair, _)
                                    if pair.len() == 2
                                        && matches!(&pair[1], Sexp::Atom(t, _) if t == "Bool") =>
                                {
                                    let Sexp::Atom(n, _) = &pair[0] else {
                                        return self.err(d, "bad binder");
                                    };
                                    let v = match self.b.new_var(n) {
                                        Ok(v) => v,
                                        Err(_) => {
                                            self.fresh += 1;
                                            self.b.new_var(&format!("{n}#{}", self.fresh))?
                                        }
                                    };
                                    let lit = self.b.lit(v);
                                    self.env.push((n.clone(), lit));
                                    vars.push(v);
                                }
                                _ => return self.err(d, "only Bool binders are supported"),
                            }
                        }
                        let body = self.term(&args[1]);
                        self.env.truncate(self.env.len() - vars.len());
                        let q = if head == "exists" {
                            Quantifier::Exists
                        } else {
                            Quantifier::Forall
                        };
                        Ok(self.b.quant(q, vars, body?))
                    }
                    _ => self.err(s, &format!("unsupported term `{head}`")),
                }
            }
        }
    }
}

/// Reads back the subset written by [`emit_smt`]: the conjunction of all
/// assertions.
pub fn parse_smt(text: &str) -> Result<QbfCircuit, QbfError> {
    let cmds = read_sexps(text)?;
    let mut r = Reader {
        b: CircuitBuilder::new(),
        env: Vec::new(),
        fresh: 0,
    };
    let mut asserts = Vec::new();
    for cmd in &cmds {
        let Sexp::List(items, _) = cmd else {
            return r.err(cmd, "expected a command");
        };
        match items.first() {
            Some(Sexp::Atom(h, _)) if h == "assert" && items.len() == 2 => {
                asserts.push(r.term(&items[1])?);
            }
            Some(Sexp::Atom(h, _))
                if matches!(
                    h.as_str(),
                    "check-sat" | "set-logic" | "set-option" | "exit"
                ) => {}
            _ => return r.err(cmd, "unsupported command"),
        }
    }
    let root = r.b.and(asserts);
    let mut c = r.b.finish(
        root,
        CircuitMeta {
            exact: true,
            ..Default::default()
        },
    );
    c.meta.prenex = c.is_prenex();
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exists_forall() -> QbfCircuit {
        let mut b = CircuitBuilder::new();
        let a = b.new_var("a__s0").unwrap();
        let x = b.new_var("x__s1").unwrap();
        let (la, lx) = (b.lit(a), b.lit(x));
        let nx = b.not(lx);
        let g = b.or(vec![la, nx]);
        let h = b.or(vec![lx, g]);
        let q = b.quant(Quantifier::Forall, vec![x], h);
        let r = b.quant(Quantifier::Exists, vec![a], q);
        b.finish(r, CircuitMeta::default())
    }

    #[test]
    fn emits_nested_binders_with_lets() {
        let text = emit_smt(&exists_forall()).unwrap();
        assert!(
            text.contains("(exists ((a__s0 Bool)) (forall ((x__s1 Bool)) (let"),
            "{text}"
        );
        assert!(text.ends_with("(check-sat)\n"));
    }

    #[test]
    fn round_trip_preserves_structure() {
        let c = exists_forall();
        let back = parse_smt(&emit_smt(&c).unwrap()).unwrap();
        assert!(back.validate().is_ok());
        assert_eq!(back.num_vars(), 2);
        assert!(back.is_prenex());
    }

    #[test]
    fn constants() {
        let f = emit_smt(&QbfCircuit::constant(false)).unwrap();
        assert!(f.contains("(assert false)"));
        assert_eq!(parse_smt(&f).unwrap().as_const(), Some(false));
    }

    #[test]
    fn rejects_unknown() {
        assert!(parse_smt("(assert (xor a b))").is_err());
        assert!(parse_smt("(assert y)").is_err());
    }
}
