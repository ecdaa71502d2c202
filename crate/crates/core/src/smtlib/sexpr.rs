//! S-expression reader for SMT-LIB 2 concrete syntax.

use std::fmt;

use super::SmtError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    /// Simple or `|quoted|` symbol, quotes removed.
    Symbol(String),
    Keyword(String),
    Numeral(String),
    Decimal(String),
    /// Digits after `#b`.
    Binary(String),
    /// Digits after `#x`.
    Hex(String),
    Str(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SExpr {
    Atom(Atom, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Atom(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Atom(Atom::Symbol(s), _) => Some(s),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            _ => None,
        }
    }

    pub fn as_numeral(&self) -> Option<&str> {
        match self {
            SExpr::Atom(Atom::Numeral(n), _) => Some(n),
            _ => None,
        }
    }
}

impl fmt::Display for SExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SExpr::Atom(a, _) => match a {
                Atom::Symbol(s) => f.write_str(&super::printer::quote_symbol(s)),
                Atom::Keyword(k) => write!(f, ":{k}"),
                Atom::Numeral(n) | Atom::Decimal(n) => f.write_str(n),
                Atom::Binary(b) => write!(f, "#b{b}"),
                Atom::Hex(h) => write!(f, "#x{h}"),
                Atom::Str(s) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            },
            SExpr::List(items, _) => {
                f.write_str("(")?;
                for (i, it) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{it}")?;
                }
                f.write_str(")")
            }
        }
    }
}

fn is_symbol_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn syntax(&self, at: Pos, msg: impl Into<String>) -> SmtError {
        SmtError::Syntax {
            line: at.line,
            col: at.col,
            msg: msg.into(),
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if !pred(c) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    fn atom(&mut self) -> Result<SExpr, SmtError> {
        let start = self.pos;
        let c = *self.chars.peek().expect("caller checked");
        let atom = match c {
            '|' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('|') => break,
                        Some('\\') => {
                            return Err(self.syntax(self.pos, "backslash in quoted symbol"))
                        }
                        Some(c) => s.push(c),
                        None => return Err(self.syntax(start, "unterminated quoted symbol")),
                    }
                }
                Atom::Symbol(s)
            }
            '"' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some('"') => {
                            if self.chars.peek() == Some(&'"') {
                                self.bump();
                                s.push('"');
                            } else {
                                break;
                            }
                        }
                        Some(c) => s.push(c),
                        None => return Err(self.syntax(start, "unterminated string literal")),
                    }
                }
                Atom::Str(s)
            }
            '#' => {
                self.bump();
                match self.bump() {
                    Some('b') => {
                        let d = self.take_while(|c| c == '0' || c == '1');
                        if d.is_empty() {
                            return Err(self.syntax(start, "empty binary literal"));
                        }
                        Atom::Binary(d)
                    }
                    Some('x') => {
                        let d = self.take_while(|c| c.is_ascii_hexdigit());
                        if d.is_empty() {
                            return Err(self.syntax(start, "empty hexadecimal literal"));
                        }
                        Atom::Hex(d.to_ascii_lowercase())
                    }
                    _ => return Err(self.syntax(start, "expected #b or #x literal")),
                }
            }
            ':' => {
                self.bump();
                Atom::Keyword(self.take_while(is_symbol_char))
            }
            c if c.is_ascii_digit() => {
                let n = self.take_while(|c| c.is_ascii_digit());
                if self.chars.peek() == Some(&'.') {
                    self.bump();
                    let frac = self.take_while(|c| c.is_ascii_digit());
                    Atom::Decimal(format!("{n}.{frac}"))
                } else {
                    Atom::Numeral(n)
                }
            }
            c if is_symbol_char(c) => Atom::Symbol(self.take_while(is_symbol_char)),
            c => return Err(self.syntax(start, format!("unexpected character `{c}`"))),
        };
        if let Some(&c) = self.chars.peek() {
            if !(c.is_whitespace() || c == '(' || c == ')' || c == ';') {
                return Err(self.syntax(self.pos, format!("unexpected character `{c}` after atom")));
            }
        }
        Ok(SExpr::Atom(atom, start))
    }
}

/// Reads every top-level s-expression of `text`.
pub fn read_all(text: &str) -> Result<Vec<SExpr>, SmtError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    // explicit stack keeps deeply nested input off the call stack
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    loop {
        r.skip_trivia();
        let Some(&c) = r.chars.peek() else { break };
        let item = match c {
            '(' => {
                stack.push((Vec::new(), r.pos));
                r.bump();
                continue;
            }
            ')' => {
                let at = r.pos;
                r.bump();
                let Some((items, start)) = stack.pop() else {
                    return Err(r.syntax(at, "unbalanced `)`"));
                };
                SExpr::List(items, start)
            }
            _ => r.atom()?,
        };
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None => out.push(item),
        }
    }
    if let Some((_, start)) = stack.last() {
        return Err(r.syntax(*start, "unbalanced `(`"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_literals_and_comments() {
        let xs = read_all("(a #b01 #xFf 12 :status |x y|) ; tail\n\"s\"\"q\"").unwrap();
        assert_eq!(xs.len(), 2);
        let items = xs[0].as_list().unwrap();
        assert_eq!(
            items[1],
            SExpr::Atom(Atom::Binary("01".into()), Pos { line: 1, col: 4 })
        );
        assert!(matches!(&items[2], SExpr::Atom(Atom::Hex(h), _) if h == "ff"));
        assert_eq!(items[4].as_symbol(), None);
        assert!(matches!(&items[5], SExpr::Atom(Atom::Symbol(s), _) if s == "x y"));
        assert!(matches!(&xs[1], SExpr::Atom(Atom::Str(s), _) if s == "s\"q"));
    }

    #[test]
    fn reports_positions() {
        let err = read_all("(a\n  (b c)").unwrap_err();
        assert_eq!(
            err,
            SmtError::Syntax {
                line: 1,
                col: 1,
                msg: "unbalanced `(`".into()
            }
        );
        let err = read_all("(a)\n )").unwrap_err();
        assert!(matches!(
            err,
            SmtError::Syntax {
                line: 2,
                col: 2,
                ..
            }
        ));
        assert!(read_all("#q").is_err());
    }
}
