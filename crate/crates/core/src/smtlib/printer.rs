use std::collections::{HashMap, HashSet};
use std::fmt::Write;

use super::{Command, Script};
use crate::ir::{Kind, TermId, TermTable};

const RESERVED: &[&str] = &[
    "!",
    "_",
    "as",
    "let",
    "exists",
    "forall",
    "match",
    "par",
    "BINARY",
    "DECIMAL",
    "HEXADECIMAL",
    "NUMERAL",
    "STRING",
];

/// Emits `name` as a simple symbol when possible, `|quoted|` otherwise.
pub fn quote_symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c))
        && !RESERVED.contains(&name);
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

/// Prints `t` in SMT-LIB 2 syntax. Non-leaf subterms referenced more than
/// once are bound with `let`, so the output stays linear in the DAG size.
pub fn print_term(tt: &TermTable, t: TermId) -> String {
    let order = tt.post_order(&[t]);
    let mut refs: HashMap<TermId, u32> = HashMap::new();
    for &n in &order {
        for &c in tt.children(n) {
            *refs.entry(c).or_default() += 1;
        }
    }
    let shared: Vec<TermId> = order
        .iter()
        .copied()
        .filter(|&n| n != t && !tt.kind(n).is_leaf() && refs.get(&n).copied().unwrap_or(0) > 1)
        .collect();
    if shared.is_empty() {
        let mut out = String::new();
        write_app(tt, t, &HashMap::new(), &mut out);
        return out;
    }

    // binder names must not capture free symbols of the term
    let free: HashSet<String> = tt
        .free_symbols(&[t])
        .into_iter()
        .filter_map(|s| tt.symbol_name(s).map(str::to_string))
        .collect();
    let mut prefix = String::from("_let");
    while free.iter().any(|n| n.starts_with(&prefix)) {
        prefix.push('_');
    }

    // group bindings by depth so each `let` layer only refers to earlier ones
    let shared_set: HashSet<TermId> = shared.iter().copied().collect();
    let mut level: HashMap<TermId, usize> = HashMap::new();
    for &n in &order {
        let below = tt
            .children(n)
            .iter()
            .map(|c| level.get(c).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let own = if shared_set.contains(&n) {
            below + 1
        } else {
            below
        };
        level.insert(n, own);
    }
    let mut layers: Vec<Vec<TermId>> = Vec::new();
    for &n in &shared {
        let l = level[&n];
        if layers.len() < l {
            layers.resize(l, Vec::new());
        }
        layers[l - 1].push(n);
    }

    let mut names: HashMap<TermId, String> = HashMap::new();
    let mut out = String::new();
    for layer in &layers {
        out.push_str("(let (");
        for (j, &n) in layer.iter().enumerate() {
            let name = format!("{prefix}{}", names.len());
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({name} ");
            write_app(tt, n, &names, &mut out);
            out.push(')');
            names.insert(n, name);
        }
        out.push_str(") ");
    }
    write_app(tt, t, &names, &mut out);
    out.push_str(&")".repeat(layers.len()));
    out
}

fn write_app(tt: &TermTable, root: TermId, names: &HashMap<TermId, String>, out: &mut String) {
    enum Step {
        Open(TermId),
        Text(&'static str),
    }
    let mut stack = vec![Step::Open(root)];
    while let Some(step) = stack.pop() {
        let n = match step {
            Step::Text(s) => {
                out.push_str(s);
                continue;
            }
            Step::Open(n) => n,
        };
        if n != root {
            if let Some(name) = names.get(&n) {
                out.push_str(name);
                continue;
            }
        }
        let kind = tt.kind(n);
        match kind {
            Kind::BoolConst(b) => out.push_str(if *b { "true" } else { "false" }),
            Kind::BvConst(v) => out.push_str(&v.to_smtlib()),
            Kind::Symbol(s) => out.push_str(&quote_symbol(s)),
            _ => {
                match kind {
                    Kind::Extract { hi, lo } => {
                        let _ = write!(out, "((_ extract {hi} {lo})");
                    }
                    Kind::SignExtend(k) => {
                        let _ = write!(out, "((_ sign_extend {k})");
                    }
                    Kind::ZeroExtend(k) => {
                        let _ = write!(out, "((_ zero_extend {k})");
                    }
                    other => {
                        out.push('(');
                        out.push_str(other.smtlib_name());
                    }
                }
                stack.push(Step::Text(")"));
                for &c in tt.children(n).iter().rev() {
                    stack.push(Step::Open(c));
                    stack.push(Step::Text(" "));
                }
            }
        }
    }
}

/// Prints a whole script, one command per line.
pub fn print_script(tt: &TermTable, script: &Script) -> String {
    let mut out = String::new();
    for cmd in &script.commands {
        match cmd {
            Command::SetLogic(l) => {
                let _ = writeln!(out, "(set-logic {l})");
            }
            Command::SetInfo(k, v) => {
                let _ = writeln!(out, "(set-info :{k} {v})");
            }
            Command::SetOption(k, v) => {
                let _ = writeln!(out, "(set-option :{k} {v})");
            }
            Command::Declare(s) => {
                let name = tt.symbol_name(*s).expect("declared symbol");
                let _ = writeln!(
                    out,
                    "(declare-fun {} () {})",
                    quote_symbol(name),
                    tt.sort(*s)
                );
            }
            Command::Assert(t) => {
                let _ = writeln!(out, "(assert {})", print_term(tt, *t));
            }
            Command::CheckSat => out.push_str("(check-sat)\n"),
            Command::GetModel => out.push_str("(get-model)\n"),
            Command::GetValue(ts) => {
                let items: Vec<String> = ts.iter().map(|t| print_term(tt, *t)).collect();
                let _ = writeln!(out, "(get-value ({}))", items.join(" "));
            }
            Command::Exit => out.push_str("(exit)\n"),
        }
    }
    out
}
