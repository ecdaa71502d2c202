//! Minimal interactive SMT-LIB solver over stdin/stdout, backed by plain
//! bit-blasting. Used as an external backend in tests.

use std::io::{BufRead, Write};

use lazybv::backend::{BackendHandle, BackendKind, CheckResult};
use lazybv::ir::{eval, TermTable};
use lazybv::smtlib::{print_term, Command, Session};

fn balance(s: &str) -> i64 {
    let mut depth = 0;
    let mut in_str = false;
    let mut in_comment = false;
    for c in s.chars() {
        match c {
            '\n' => in_comment = false,
            _ if in_comment => {}
            '"' => in_str = !in_str,
            _ if in_str => {}
            ';' => in_comment = true,
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
    }
    depth
}

pub fn run() -> anyhow::Result<()> {
    let stdin = std::io::stdin();
    let mut out = std::io::stdout().lock();
    let mut tt = TermTable::new();
    let mut session = Session::new();
    let mut backend = BackendHandle::new(&BackendKind::Builtin)?;
    let mut pending = String::new();
    let mut print_success = true;
    for line in stdin.lock().lines() {
        pending.push_str(&line?);
        pending.push('\n');
        if balance(&pending) > 0 {
            continue;
        }
        let chunk = std::mem::take(&mut pending);
        let script = match session.feed(&mut tt, &chunk) {
            Ok(s) => s,
            Err(e) => {
                writeln!(out, "(error \"{}\")", e.to_string().replace('"', "'"))?;
                out.flush()?;
                continue;
            }
        };
        for cmd in &script.commands {
            let reply = match cmd {
                Command::SetOption(k, v) => {
                    if k == "print-success" {
                        print_success = v != "false";
                    }
                    None
                }
                Command::Declare(s) => {
                    backend.declare(&tt, *s)?;
                    None
                }
                Command::Assert(t) => {
                    backend.assert_term(&tt, *t)?;
                    None
                }
                Command::CheckSat => Some(
                    match backend.check_sat(&tt, None)? {
                        CheckResult::Sat => "sat",
                        CheckResult::Unsat => "unsat",
                        CheckResult::Unknown(_) => "unknown",
                    }
                    .to_string(),
                ),
                Command::GetValue(ts) => {
                    let syms = tt.free_symbols(ts);
                    let m = backend.get_value(&tt, &syms)?;
                    let mut items = Vec::new();
                    for &t in ts {
                        let v = eval(&tt, t, &m)?;
                        items.push(format!("({} {})", print_term(&tt, t), v.to_smtlib()));
                    }
                    Some(format!("({})", items.join(" ")))
                }
                Command::Exit => return Ok(()),
                _ => None,
            };
            match reply {
                Some(r) => writeln!(out, "{r}")?,
                None if print_success => writeln!(out, "success")?,
                None => {}
            }
        }
        out.flush()?;
    }
    Ok(())
}
