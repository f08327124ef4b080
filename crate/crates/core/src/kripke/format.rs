//! The line-oriented `.kri` structure format.
//!
//! ```text
//! states: x0 x1
//! init: x0
//! labels: x1: b ; x0:
//! edges: x0->x1 x1->x1
//! ```
//!
//! Each section may be repeated; repeated sections accumulate.

use std::fmt::Write as _;

use super::{valid_ident, Kripke, KripkeBuilder, KripkeError};

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> KripkeError {
    KripkeError::Syntax {
        line,
        msg: format!("column {col}: {}", msg.into()),
    }
}

fn ident(tok: &str, line: usize, col: usize) -> Result<&str, KripkeError> {
    if valid_ident(tok) {
        Ok(tok)
    } else {
        Err(syntax(line, col, format!("invalid identifier `{tok}`")))
    }
}

/// Column (1-based) of `part` inside `line`, both borrowed from the same text.
fn col_of(line: &str, part: &str) -> usize {
    part.as_ptr() as usize - line.as_ptr() as usize + 1
}

pub fn parse_kri(text: &str) -> Result<Kripke, KripkeError> {
    let mut b = KripkeBuilder::default();
    let mut init: Option<(String, usize)> = None;
    let mut labels: Vec<(String, Vec<String>, usize)> = Vec::new();
    let mut edges: Vec<(String, String, usize)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, rest)) = line.split_once(':') else {
            return Err(syntax(ln, 1, "expected `<section>:`"));
        };
        match key.trim() {
            "states" => {
                for tok in rest.split_whitespace() {
                    let name = ident(tok, ln, col_of(raw, tok))?;
                    b.state(name).map_err(|e| match e {
                        KripkeError::DuplicateState(s) => {
                            syntax(ln, col_of(raw, tok), format!("duplicate state `{s}`"))
                        }
                        other => other,
                    })?;
                }
            }
            "init" => {
                let toks: Vec<&str> = rest.split_whitespace().collect();
                if toks.len() != 1 {
                    return Err(syntax(ln, col_of(raw, rest), "init takes one state"));
                }
                if init.is_some() {
                    return Err(syntax(ln, 1, "init given twice"));
                }
                init = Some((ident(toks[0], ln, col_of(raw, toks[0]))?.to_string(), ln));
            }
            "labels" => {
                for entry in rest.split(';') {
                    if entry.trim().is_empty() {
                        continue;
                    }
                    let Some((st, props)) = entry.split_once(':') else {
                        return Err(syntax(
                            ln,
                            col_of(raw, entry),
                            "expected `<state>: <props>`",
                        ));
                    };
                    let st = st.trim();
                    ident(st, ln, col_of(raw, entry))?;
                    let mut ps = Vec::new();
                    for p in props.split_whitespace() {
                        ps.push(ident(p, ln, col_of(raw, p))?.to_string());
                    }
                    labels.push((st.to_string(), ps, ln));
                }
            }
            "edges" => {
                for tok in rest.split_whitespace() {
                    let col = col_of(raw, tok);
                    let Some((a, c)) = tok.split_once("->") else {
                        return Err(syntax(ln, col, format!("expected `a->b`, found `{tok}`")));
                    };
                    ident(a, ln, col)?;
                    ident(c, ln, col)?;
                    edges.push((a.to_string(), c.to_string(), ln));
                }
            }
            other => return Err(syntax(ln, 1, format!("unknown section `{other}`"))),
        }
    }

    for (st, ps, _) in labels {
        let id = b.id(&st)?;
        for p in ps {
            b.label(id, &p)?;
        }
    }
    for (a, c, _) in edges {
        b.edge_by_name(&a, &c)?;
    }
    if let Some((name, _)) = init {
        b.id(&name)?;
        b.init(&name);
    }
    b.build()
}

/// Canonical text: states in declaration order, labels in state order, edges
/// sorted by (source name, target name).
pub fn serialize_kri(k: &Kripke) -> String {
    let mut out = String::new();
    let names: Vec<&str> = k.states().map(|s| k.name(s)).collect();
    writeln!(out, "states: {}", names.join(" ")).unwrap();
    writeln!(out, "init: {}", k.name(k.init())).unwrap();
    let labelled: Vec<String> = k
        .states()
        .filter(|&s| !k.labels(s).is_empty())
        .map(|s| {
            let ps: Vec<&str> = k.labels(s).iter().map(|p| p.as_str()).collect();
            format!("{}: {}", k.name(s), ps.join(" "))
        })
        .collect();
    if labelled.is_empty() {
        out.push_str("labels:\n");
    } else {
        writeln!(out, "labels: {}", labelled.join(" ; ")).unwrap();
    }
    let mut es: Vec<(&str, &str)> = k.edges().map(|(a, b)| (k.name(a), k.name(b))).collect();
    es.sort_unstable();
    let es: Vec<String> = es.iter().map(|(a, b)| format!("{a}->{b}")).collect();
    writeln!(out, "edges: {}", es.join(" ")).unwrap();
    out
}
