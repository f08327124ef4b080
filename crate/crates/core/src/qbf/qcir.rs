//! QCIR-G14 text emission and parsing.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{CircuitBuilder, CircuitMeta, Gate, NodeId, QbfCircuit, QbfError, Quantifier, VarId};

pub(crate) struct Plan {
    pub prefix: Vec<(Quantifier, Vec<VarId>)>,
    pub output: String,
    pub gates: Vec<String>,
}

fn is_gate(g: &Gate) -> bool {
    matches!(
        g,
        Gate::And(_) | Gate::Or(_) | Gate::Quant(..) | Gate::Const(_)
    )
}

pub(crate) fn plan(c: &QbfCircuit) -> Plan {
    let (prefix, matrix) = if c.is_prenex() {
        c.prefix_chain()
    } else {
        (Vec::new(), c.root())
    };
    let (top, negated) = match c.gate(matrix) {
        Gate::Not(a) if is_gate(c.gate(*a)) => (*a, true),
        _ => (matrix, false),
    };

    // pre-order numbering from the output gate
    let mut number: HashMap<NodeId, usize> = HashMap::new();
    let mut gates_out: Vec<(NodeId, usize)> = Vec::new();
    let mut wrapper: Option<String> = None;
    if is_gate(c.gate(top)) {
        let mut stack = vec![top];
        while let Some(n) = stack.pop() {
            if number.contains_key(&n) {
                continue;
            }
            let id = number.len() + 1;
            number.insert(n, id);
            gates_out.push((n, id));
            for ch in c.gate(n).children().iter().rev() {
                let inner = match c.gate(*ch) {
                    Gate::Not(a) => *a,
                    _ => *ch,
                };
                if is_gate(c.gate(inner)) && !number.contains_key(&inner) {
                    stack.push(inner);
                }
            }
        }
    } else {
        // a bare literal is wrapped in a unary conjunction
        wrapper = Some(String::new());
    }

    let lit = |n: NodeId| -> String {
        match c.gate(n) {
            Gate::Var(v) => c.var_name(*v).to_string(),
            Gate::Not(a) => match c.gate(*a) {
                Gate::Var(v) => format!("-{}", c.var_name(*v)),
                _ => format!("-g{}", number[a]),
            },
            _ => format!("g{}", number[&n]),
        }
    };

    let mut gates = Vec::new();
    if wrapper.is_some() {
        gates.push(format!("g1 = and({})", lit(matrix)));
        return Plan {
            prefix,
            output: "g1".into(),
            gates,
        };
    }
    // definitions in node order, which lists children before parents
    gates_out.sort_by_key(|&(n, _)| n);
    for (n, id) in gates_out {
        let body = match c.gate(n) {
            Gate::Const(true) => "and()".to_string(),
            Gate::Const(false) => "or()".to_string(),
            Gate::And(cs) => format!(
                "and({})",
                cs.iter().map(|&x| lit(x)).collect::<Vec<_>>().join(", ")
            ),
            Gate::Or(cs) => format!(
                "or({})",
                cs.iter().map(|&x| lit(x)).collect::<Vec<_>>().join(", ")
            ),
            Gate::Quant(q, vs, b) => {
                let names: Vec<&str> = vs.iter().map(|&v| c.var_name(v)).collect();
                format!("{}({}; {})", q.keyword(), names.join(", "), lit(*b))
            }
            _ => unreachable!("only gates are numbered"),
        };
        gates.push(format!("g{id} = {body}"));
    }
    let output = if negated {
        "-g1".to_string()
    } else {
        "g1".to_string()
    };
    Plan {
        prefix,
        output,
        gates,
    }
}

/// QCIR-G14 text. Prenex circuits get prefix lines, others quantifier gates.
pub fn emit_qcir(c: &QbfCircuit) -> Result<String, QbfError> {
    c.validate()?;
    let p = plan(c);
    let mut out = String::from("#QCIR-G14\n");
    for (q, vs) in &p.prefix {
        let names: Vec<&str> = vs.iter().map(|&v| c.var_name(v)).collect();
        writeln!(out, "{}({})", q.keyword(), names.join(", ")).unwrap();
    }
    writeln!(out, "output({})", p.output).unwrap();
    for g in &p.gates {
        out.push_str(g);
        out.push('\n');
    }
    Ok(out)
}

enum Def {
    And(Vec<String>),
    Or(Vec<String>),
    Quant(Quantifier, Vec<String>, String),
}

fn syntax(line: usize, msg: impl Into<String>) -> QbfError {
    QbfError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn split_args(s: &str) -> Vec<String> {
    s.split(',')
        .map(|x| x.trim().to_string())
        .filter(|x| !x.is_empty())
        .collect()
}

/// Parses QCIR-G14 with `and`, `or`, `exists` and `forall` gates.
pub fn parse_qcir(text: &str) -> Result<QbfCircuit, QbfError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, h)) if h.starts_with("#QCIR-G14") => {}
        _ => return Err(syntax(1, "missing `#QCIR-G14` header")),
    }
    let mut prefix: Vec<(Quantifier, Vec<String>)> = Vec::new();
    let mut output: Option<(String, usize)> = None;
    let mut defs: HashMap<String, (Def, usize)> = HashMap::new();
    for (ln, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let open = line.find('(').ok_or_else(|| syntax(ln, "expected `(`"))?;
        if !line.ends_with(')') {
            return Err(syntax(ln, "expected `)` at end of line"));
        }
        let head = line[..open].trim();
        let inner = &line[open + 1..line.len() - 1];
        if let Some((name, kind)) = head.split_once('=') {
            let (name, kind) = (name.trim().to_string(), kind.trim());
            let def = match kind {
                "and" => Def::And(split_args(inner)),
                "or" => Def::Or(split_args(inner)),
                "exists" | "forall" => {
                    let (vs, body) = inner
                        .split_once(';')
                        .ok_or_else(|| syntax(ln, "quantifier gate needs `;`"))?;
                    let q = if kind == "exists" {
                        Quantifier::Exists
                    } else {
                        Quantifier::Forall
                    };
                    Def::Quant(q, split_args(vs), body.trim().to_string())
                }
                other => return Err(syntax(ln, format!("unsupported gate type `{other}`"))),
            };
            if defs.insert(name.clone(), (def, ln)).is_some() {
                return Err(syntax(ln, format!("gate `{name}` defined twice")));
            }
        } else {
            match head {
                "exists" | "forall" => {
                    if output.is_some() {
                        return Err(syntax(ln, "prefix after output"));
                    }
                    let q = if head == "exists" {
                        Quantifier::Exists
                    } else {
                        Quantifier::Forall
                    };
                    prefix.push((q, split_args(inner)));
                }
                "free" => return Err(syntax(ln, "free variables are not supported")),
                "output" => output = Some((inner.trim().to_string(), ln)),
                other => return Err(syntax(ln, format!("unknown statement `{other}`"))),
            }
        }
    }
    let (out_lit, out_line) = output.ok_or_else(|| syntax(0, "missing output statement"))?;

    let mut b = CircuitBuilder::new();
    for (_, vs) in &prefix {
        for v in vs {
            b.new_var(v)?;
        }
    }
    for (def, _) in defs.values() {
        if let Def::Quant(_, vs, _) = def {
            for v in vs {
                b.new_var(v)?;
            }
        }
    }

    let mut built: HashMap<String, NodeId> = HashMap::new();
    let root = resolve(&out_lit, out_line, &defs, &mut built, &mut b)?;
    let root = prefix.iter().rev().fold(root, |acc, (q, vs)| {
        let ids = vs
            .iter()
            .map(|v| b.var_by_name(v).expect("declared above"))
            .collect();
        b.quant(*q, ids, acc)
    });
    let c = b.finish(
        root,
        CircuitMeta {
            exact: true,
            ..Default::default()
        },
    );
    let prenex = c.is_prenex();
    let mut c = c;
    c.meta.prenex = prenex;
    Ok(c)
}

fn resolve(
    lit: &str,
    line: usize,
    defs: &HashMap<String, (Def, usize)>,
    built: &mut HashMap<String, NodeId>,
    b: &mut CircuitBuilder,
) -> Result<NodeId, QbfError> {
    let (neg, name) = match lit.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, lit),
    };
    let node = if let Some(&n) = built.get(name) {
        n
    } else if let Some((def, ln)) = defs.get(name) {
        let ln = *ln;
        let n = stacker::maybe_grow(64 * 1024, 1024 * 1024, || -> Result<NodeId, QbfError> {
            Ok(match def {
                Def::And(xs) | Def::Or(xs) => {
                    let mut cs = Vec::with_capacity(xs.len());
                    for x in xs {
                        cs.push(resolve(x, ln, defs, built, b)?);
                    }
                    if matches!(def, Def::And(_)) {
                        b.and(cs)
                    } else {
                        b.or(cs)
                    }
                }
                Def::Quant(q, vs, body) => {
                    let body = resolve(body, ln, defs, built, b)?;
                    let ids = vs
                        .iter()
                        .map(|v| b.var_by_name(v).expect("declared"))
                        .collect();
                    b.quant(*q, ids, body)
                }
            })
        })?;
        built.insert(name.to_string(), n);
        n
    } else if let Some(v) = b.var_by_name(name) {
        b.lit(v)
    } else {
        return Err(syntax(line, format!("undefined literal `{name}`")));
    };
    Ok(if neg { b.not(node) } else { node })
}
