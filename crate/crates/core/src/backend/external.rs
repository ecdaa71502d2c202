use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Instant;

use super::{Backend, BackendError, CheckResult, UnknownReason};
use crate::ir::{Model, TermId, TermTable};
use crate::smtlib::sexpr::{read_all, SExpr};
use crate::smtlib::{literal_value, print_term, quote_symbol};

/// Drives an SMT-LIB 2 solver process over its standard streams.
pub struct ExternalBackend {
    child: Option<Child>,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    declared: HashSet<TermId>,
}

impl ExternalBackend {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, BackendError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        let stdout = child.stdout.take().expect("piped stdout");
        let stdin = child.stdin.take();
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut b = ExternalBackend {
            child: Some(child),
            stdin,
            lines: rx,
            declared: HashSet::new(),
        };
        b.send("(set-option :print-success false)")?;
        b.send("(set-option :produce-models true)")?;
        b.send("(set-logic QF_BV)")?;
        Ok(b)
    }

    fn send(&mut self, cmd: &str) -> Result<(), BackendError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| BackendError::Protocol("solver process is gone".into()))?;
        writeln!(stdin, "{cmd}")?;
        stdin.flush()?;
        Ok(())
    }

    /// Reads one complete response. `Ok(None)` means the deadline passed.
    fn response(&mut self, deadline: Option<Instant>) -> Result<Option<String>, BackendError> {
        let mut text = String::new();
        let mut depth = 0i64;
        loop {
            let line = match deadline {
                Some(d) => {
                    let left = d.saturating_duration_since(Instant::now());
                    match self.lines.recv_timeout(left) {
                        Ok(l) => l,
                        Err(RecvTimeoutError::Timeout) => return Ok(None),
                        Err(RecvTimeoutError::Disconnected) => return Err(self.gone()),
                    }
                }
                None => self.lines.recv().map_err(|_| self.gone())?,
            };
            depth += paren_balance(&line);
            if !text.is_empty() {
                text.push('\n');
            }
            text.push_str(&line);
            if depth <= 0 && !text.trim().is_empty() {
                return Ok(Some(text));
            }
        }
    }

    fn gone(&self) -> BackendError {
        BackendError::Protocol("solver process closed its output".into())
    }

    fn kill(&mut self) {
        self.stdin = None;
        if let Some(mut c) = self.child.take() {
            let _ = c.kill();
            let _ = c.wait();
        }
    }

    fn declare_one(&mut self, tt: &TermTable, s: TermId) -> Result<(), BackendError> {
        if self.declared.insert(s) {
            let name = tt
                .symbol_name(s)
                .ok_or_else(|| BackendError::Protocol("only symbols can be declared".into()))?;
            self.send(&format!(
                "(declare-const {} {})",
                quote_symbol(name),
                tt.sort(s)
            ))?;
        }
        Ok(())
    }
}

/// Net count of `(` minus `)` outside string literals and quoted symbols.
fn paren_balance(line: &str) -> i64 {
    let mut depth = 0;
    let mut in_str = false;
    let mut in_bar = false;
    for c in line.chars() {
        match c {
            '"' if !in_bar => in_str = !in_str,
            '|' if !in_str => in_bar = !in_bar,
            '(' if !in_str && !in_bar => depth += 1,
            ')' if !in_str && !in_bar => depth -= 1,
            _ => {}
        }
    }
    depth
}

impl Drop for ExternalBackend {
    fn drop(&mut self) {
        let _ = self.send("(exit)");
        self.kill();
    }
}

impl Backend for ExternalBackend {
    fn declare(&mut self, tt: &TermTable, sym: TermId) -> Result<(), BackendError> {
        self.declare_one(tt, sym)
    }

    fn assert_term(&mut self, tt: &TermTable, t: TermId) -> Result<(), BackendError> {
        for s in tt.free_symbols(&[t]) {
            self.declare_one(tt, s)?;
        }
        self.send(&format!("(assert {})", print_term(tt, t)))
    }

    fn check_sat(
        &mut self,
        _tt: &TermTable,
        deadline: Option<Instant>,
    ) -> Result<CheckResult, BackendError> {
        self.send("(check-sat)")?;
        match self.response(deadline)? {
            None => {
                self.kill();
                Ok(CheckResult::Unknown(UnknownReason::Timeout))
            }
            Some(r) => match r.trim() {
                "sat" => Ok(CheckResult::Sat),
                "unsat" => Ok(CheckResult::Unsat),
                "unknown" => Ok(CheckResult::Unknown(UnknownReason::Incomplete)),
                other => Err(BackendError::Protocol(format!(
                    "unexpected check-sat answer `{other}`"
                ))),
            },
        }
    }

    fn get_value(&mut self, tt: &TermTable, syms: &[TermId]) -> Result<Model, BackendError> {
        if syms.is_empty() {
            return Ok(Model::new());
        }
        let mut names = Vec::with_capacity(syms.len());
        for &s in syms {
            if !self.declared.contains(&s) {
                return Err(BackendError::Undeclared(
                    tt.symbol_name(s).unwrap_or("?").to_string(),
                ));
            }
            names.push(quote_symbol(tt.symbol_name(s).expect("declared symbol")));
        }
        self.send(&format!("(get-value ({}))", names.join(" ")))?;
        let text = self.response(None)?.ok_or_else(|| self.gone())?;
        let bad = || BackendError::Protocol(format!("malformed get-value answer `{text}`"));
        let exprs = read_all(&text).map_err(|_| bad())?;
        let [SExpr::List(pairs, _)] = exprs.as_slice() else {
            return Err(bad());
        };
        let mut m = Model::new();
        for p in pairs {
            let [k, v] = p.as_list().ok_or_else(bad)? else {
                return Err(bad());
            };
            let name = k.as_symbol().ok_or_else(bad)?;
            let sym = syms
                .iter()
                .copied()
                .find(|&s| tt.symbol_name(s) == Some(name))
                .ok_or_else(bad)?;
            let val = literal_value(v).ok_or_else(bad)?;
            m.insert(sym, val);
        }
        if m.len() != syms.iter().collect::<HashSet<_>>().len() {
            return Err(bad());
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::paren_balance;

    #[test]
    fn balance_ignores_strings_and_quotes() {
        assert_eq!(paren_balance("((x #b01)"), 1);
        assert_eq!(paren_balance("(error \"(\")"), 0);
        assert_eq!(paren_balance("(|a)b| #x1)"), 0);
    }
}
