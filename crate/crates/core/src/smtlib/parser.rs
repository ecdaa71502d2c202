use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Num;

use super::sexpr::{read_all, Atom, Pos, SExpr};
use super::{Command, Script, SmtError};
use crate::ir::{BvValue, IrError, Kind, Sort, TermId, TermTable};

/// Parses a QF_BV script into `tt`.
pub fn parse_script(tt: &mut TermTable, text: &str) -> Result<Script, SmtError> {
    let exprs = read_all(text)?;
    let mut p = Parser::new(tt);
    let mut script = Script::default();
    for e in &exprs {
        p.command(e, &mut script)?;
    }
    Ok(script)
}

/// Parser state carried across the commands of an interactive session, so
/// that symbols declared by one chunk resolve in the next.
#[derive(Debug, Default)]
pub struct Session {
    declared: HashMap<String, TermId>,
    defined: HashMap<String, TermId>,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses the commands in `text`. Commands before a failing one keep
    /// their effect on the session.
    pub fn feed(&mut self, tt: &mut TermTable, text: &str) -> Result<Script, SmtError> {
        let exprs = read_all(text)?;
        let mut p = Parser {
            tt,
            declared: std::mem::take(&mut self.declared),
            defined: std::mem::take(&mut self.defined),
            scopes: Vec::new(),
        };
        let mut script = Script::default();
        let mut res = Ok(());
        for e in &exprs {
            if let Err(err) = p.command(e, &mut script) {
                res = Err(err);
                break;
            }
        }
        self.declared = p.declared;
        self.defined = p.defined;
        res.map(|()| script)
    }
}

/// Parses a single term. `declared` lists the symbols that may occur free.
pub fn parse_term(tt: &mut TermTable, text: &str, declared: &[TermId]) -> Result<TermId, SmtError> {
    let exprs = read_all(text)?;
    let [e] = exprs.as_slice() else {
        return Err(SmtError::Syntax {
            line: 1,
            col: 1,
            msg: "expected exactly one term".into(),
        });
    };
    let mut p = Parser::new(tt);
    for &s in declared {
        let name =
            p.tt.symbol_name(s)
                .expect("declared term must be a symbol")
                .to_string();
        p.declared.insert(name, s);
    }
    p.term(e)
}

/// Parses a `(_ BitVec n)` or `Bool` sort.
pub(crate) fn parse_sort(e: &SExpr) -> Result<Sort, SmtError> {
    if let Some(s) = e.as_symbol() {
        return match s {
            "Bool" => Ok(Sort::Bool),
            other => Err(SmtError::Unsupported(format!("sort `{other}`"))),
        };
    }
    let items = e.as_list().unwrap_or_default();
    match items {
        [u, bv, n] if u.as_symbol() == Some("_") && bv.as_symbol() == Some("BitVec") => {
            let w = numeral_u32(n)?;
            if w == 0 {
                return Err(syntax(e.pos(), "bit-vector width must be positive"));
            }
            Ok(Sort::BitVec(w))
        }
        [head, ..] if head.as_symbol() == Some("Array") => {
            Err(SmtError::Unsupported("arrays".into()))
        }
        _ => Err(syntax(e.pos(), format!("malformed sort `{e}`"))),
    }
}

fn syntax(at: Pos, msg: impl Into<String>) -> SmtError {
    SmtError::Syntax {
        line: at.line,
        col: at.col,
        msg: msg.into(),
    }
}

fn numeral_u32(e: &SExpr) -> Result<u32, SmtError> {
    e.as_numeral()
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| syntax(e.pos(), format!("expected a numeral, found `{e}`")))
}

fn ir_err(at: Pos, e: IrError) -> SmtError {
    match e {
        IrError::SortMismatch(m) => SmtError::SortMismatch(format!("{at}: {m}")),
        IrError::InvalidAttr(m) => syntax(at, m),
        IrError::UnboundSymbol(s) => SmtError::Undeclared(s),
    }
}

pub(crate) struct Parser<'t> {
    pub(crate) tt: &'t mut TermTable,
    pub(crate) declared: HashMap<String, TermId>,
    defined: HashMap<String, TermId>,
    scopes: Vec<HashMap<String, TermId>>,
}

impl<'t> Parser<'t> {
    pub(crate) fn new(tt: &'t mut TermTable) -> Self {
        Parser {
            tt,
            declared: HashMap::new(),
            defined: HashMap::new(),
            scopes: Vec::new(),
        }
    }

    fn command(&mut self, e: &SExpr, script: &mut Script) -> Result<(), SmtError> {
        let items = e
            .as_list()
            .ok_or_else(|| syntax(e.pos(), "expected a command"))?;
        let Some(head) = items.first().and_then(SExpr::as_symbol) else {
            return Err(syntax(e.pos(), "expected a command name"));
        };
        let args = &items[1..];
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(syntax(e.pos(), format!("`{head}` expects {n} argument(s)")))
            }
        };
        match head {
            "set-logic" => {
                arity(1)?;
                let logic = args[0]
                    .as_symbol()
                    .ok_or_else(|| syntax(args[0].pos(), "expected a logic name"))?
                    .to_string();
                script.logic = Some(logic.clone());
                script.commands.push(Command::SetLogic(logic));
            }
            "set-info" | "set-option" => {
                let key = match args.first() {
                    Some(SExpr::Atom(Atom::Keyword(k), _)) => k.clone(),
                    _ => return Err(syntax(e.pos(), format!("`{head}` expects a keyword"))),
                };
                let value = args.get(1).map(|v| v.to_string()).unwrap_or_default();
                script.commands.push(if head == "set-info" {
                    Command::SetInfo(key, value)
                } else {
                    Command::SetOption(key, value)
                });
            }
            "declare-fun" | "declare-const" => {
                let (name, sort) = if head == "declare-fun" {
                    arity(3)?;
                    match args[1].as_list() {
                        Some([]) => {}
                        _ => {
                            return Err(SmtError::Unsupported(
                                "declare-fun with non-zero arity (uninterpreted functions)".into(),
                            ))
                        }
                    }
                    (&args[0], parse_sort(&args[2])?)
                } else {
                    arity(2)?;
                    (&args[0], parse_sort(&args[1])?)
                };
                let name = name
                    .as_symbol()
                    .ok_or_else(|| syntax(name.pos(), "expected a symbol name"))?;
                if self.declared.contains_key(name) || self.defined.contains_key(name) {
                    return Err(syntax(e.pos(), format!("symbol `{name}` declared twice")));
                }
                let sym = self
                    .tt
                    .mk_symbol(name, sort)
                    .map_err(|err| ir_err(e.pos(), err))?;
                self.declared.insert(name.to_string(), sym);
                script.declarations.push(sym);
                script.commands.push(Command::Declare(sym));
            }
            "define-fun" => {
                arity(4)?;
                if !matches!(args[1].as_list(), Some([])) {
                    return Err(SmtError::Unsupported("define-fun with parameters".into()));
                }
                let name = args[0]
                    .as_symbol()
                    .ok_or_else(|| syntax(args[0].pos(), "expected a symbol name"))?;
                let sort = parse_sort(&args[2])?;
                let body = self.term(&args[3])?;
                if self.tt.sort(body) != sort {
                    return Err(SmtError::SortMismatch(format!(
                        "{}: definition of `{name}` has sort {} but declares {sort}",
                        e.pos(),
                        self.tt.sort(body)
                    )));
                }
                self.defined.insert(name.to_string(), body);
            }
            "assert" => {
                arity(1)?;
                let t = self.term(&args[0])?;
                if !self.tt.sort(t).is_bool() {
                    return Err(SmtError::SortMismatch(format!(
                        "{}: assertion has sort {}",
                        args[0].pos(),
                        self.tt.sort(t)
                    )));
                }
                script.assertions.push(t);
                script.commands.push(Command::Assert(t));
            }
            "check-sat" => script.commands.push(Command::CheckSat),
            "get-model" => script.commands.push(Command::GetModel),
            "get-value" => {
                arity(1)?;
                let terms = args[0]
                    .as_list()
                    .ok_or_else(|| syntax(args[0].pos(), "expected a term list"))?
                    .iter()
                    .map(|t| self.term(t))
                    .collect::<Result<Vec<_>, _>>()?;
                script.commands.push(Command::GetValue(terms));
            }
            "exit" => script.commands.push(Command::Exit),
            "get-info" | "echo" | "get-assertions" | "get-assignment" => {}
            "push" | "pop" => {
                return Err(SmtError::Unsupported(format!(
                    "`{head}` (incremental scripts)"
                )))
            }
            other => return Err(SmtError::Unsupported(format!("command `{other}`"))),
        }
        Ok(())
    }

    fn resolve(&self, name: &str) -> Option<TermId> {
        for scope in self.scopes.iter().rev() {
            if let Some(&t) = scope.get(name) {
                return Some(t);
            }
        }
        self.defined
            .get(name)
            .or_else(|| self.declared.get(name))
            .copied()
    }

    fn mk(&mut self, at: Pos, kind: Kind, args: &[TermId]) -> Result<TermId, SmtError> {
        self.tt.mk(kind, args).map_err(|e| ir_err(at, e))
    }

    fn left_assoc(&mut self, at: Pos, kind: Kind, args: &[TermId]) -> Result<TermId, SmtError> {
        if args.len() < 2 {
            return Err(syntax(
                at,
                format!("`{}` expects at least two arguments", kind.smtlib_name()),
            ));
        }
        let mut acc = args[0];
        for &a in &args[1..] {
            acc = self.mk(at, kind.clone(), &[acc, a])?;
        }
        Ok(acc)
    }

    fn width_of(&self, at: Pos, t: TermId) -> Result<u32, SmtError> {
        self.tt
            .sort(t)
            .width()
            .ok_or_else(|| SmtError::SortMismatch(format!("{at}: expected a bit-vector argument")))
    }

    pub(crate) fn term(&mut self, e: &SExpr) -> Result<TermId, SmtError> {
        let at = e.pos();
        match e {
            SExpr::Atom(atom, _) => match atom {
                Atom::Binary(d) => {
                    let v = BigUint::from_str_radix(d, 2).expect("binary digits");
                    Ok(self.tt.bv_const(BvValue::from_biguint(d.len() as u32, &v)))
                }
                Atom::Hex(d) => {
                    let v = BigUint::from_str_radix(d, 16).expect("hex digits");
                    Ok(self
                        .tt
                        .bv_const(BvValue::from_biguint(4 * d.len() as u32, &v)))
                }
                Atom::Symbol(s) => match s.as_str() {
                    "true" => Ok(self.tt.bool_const(true)),
                    "false" => Ok(self.tt.bool_const(false)),
                    name => self
                        .resolve(name)
                        .ok_or_else(|| SmtError::Undeclared(name.to_string())),
                },
                other => Err(syntax(
                    at,
                    format!("unexpected `{other:?}` in term position"),
                )),
            },
            SExpr::List(items, _) => {
                let Some(head) = items.first() else {
                    return Err(syntax(at, "empty application"));
                };
                if let Some(idx) = head.as_list() {
                    return self.indexed_app(at, idx, &items[1..]);
                }
                match head.as_symbol() {
                    Some("_") => self.indexed_constant(at, &items[1..]),
                    Some("let") => self.let_term(at, &items[1..]),
                    Some("!") => match items.get(1) {
                        Some(t) => self.term(t),
                        None => Err(syntax(at, "empty annotation")),
                    },
                    Some("forall") | Some("exists") => {
                        Err(SmtError::Unsupported("quantifiers".into()))
                    }
                    Some("select") | Some("store") => Err(SmtError::Unsupported("arrays".into())),
                    Some(op) => {
                        let op = op.to_string();
                        let args = items[1..]
                            .iter()
                            .map(|a| self.term(a))
                            .collect::<Result<Vec<_>, _>>()?;
                        self.plain_app(at, &op, &args)
                    }
                    None => Err(syntax(at, "expected an operator")),
                }
            }
        }
    }

    fn indexed_constant(&mut self, at: Pos, rest: &[SExpr]) -> Result<TermId, SmtError> {
        match rest {
            [SExpr::Atom(Atom::Symbol(bv), _), w] if bv.starts_with("bv") => {
                let digits = &bv[2..];
                let v: BigUint = digits
                    .parse()
                    .map_err(|_| syntax(at, format!("malformed literal `{bv}`")))?;
                let w = numeral_u32(w)?;
                if w == 0 {
                    return Err(syntax(at, "bit-vector width must be positive"));
                }
                Ok(self.tt.bv_const(BvValue::from_biguint(w, &v)))
            }
            _ => Err(syntax(at, "malformed indexed constant")),
        }
    }

    fn let_term(&mut self, at: Pos, rest: &[SExpr]) -> Result<TermId, SmtError> {
        let [bindings, body] = rest else {
            return Err(syntax(at, "malformed let"));
        };
        let bindings = bindings
            .as_list()
            .ok_or_else(|| syntax(at, "malformed let bindings"))?;
        let mut scope = HashMap::new();
        for b in bindings {
            match b.as_list() {
                Some([name, value]) => {
                    let name = name
                        .as_symbol()
                        .ok_or_else(|| syntax(name.pos(), "expected a binder name"))?;
                    let t = self.term(value)?;
                    scope.insert(name.to_string(), t);
                }
                _ => return Err(syntax(b.pos(), "malformed let binding")),
            }
        }
        self.scopes.push(scope);
        let result = self.term(body);
        self.scopes.pop();
        result
    }

    fn indexed_app(&mut self, at: Pos, idx: &[SExpr], args: &[SExpr]) -> Result<TermId, SmtError> {
        if idx.first().and_then(SExpr::as_symbol) != Some("_") || idx.len() < 2 {
            return Err(syntax(at, "expected an indexed operator"));
        }
        let name = idx[1]
            .as_symbol()
            .ok_or_else(|| syntax(at, "expected an indexed operator name"))?
            .to_string();
        let nums = idx[2..]
            .iter()
            .map(numeral_u32)
            .collect::<Result<Vec<_>, _>>()?;
        let args = args
            .iter()
            .map(|a| self.term(a))
            .collect::<Result<Vec<_>, _>>()?;
        let [arg] = args.as_slice() else {
            return Err(syntax(at, format!("`{name}` expects one argument")));
        };
        let arg = *arg;
        match (name.as_str(), nums.as_slice()) {
            ("extract", [hi, lo]) => self.mk(at, Kind::Extract { hi: *hi, lo: *lo }, &[arg]),
            ("sign_extend", [k]) => self.mk(at, Kind::SignExtend(*k), &[arg]),
            ("zero_extend", [k]) => self.mk(at, Kind::ZeroExtend(*k), &[arg]),
            ("repeat", [k]) => {
                if *k == 0 {
                    return Err(syntax(at, "repeat count must be positive"));
                }
                self.width_of(at, arg)?;
                let copies = vec![arg; *k as usize];
                if copies.len() == 1 {
                    Ok(arg)
                } else {
                    self.left_assoc(at, Kind::Concat, &copies)
                }
            }
            ("rotate_left", [k]) | ("rotate_right", [k]) => {
                let w = self.width_of(at, arg)?;
                let mut k = *k % w;
                if name == "rotate_right" {
                    k = (w - k) % w;
                }
                if k == 0 {
                    return Ok(arg);
                }
                // rotate_left by k: x[w-k-1:0] ++ x[w-1:w-k]
                let low = self.mk(
                    at,
                    Kind::Extract {
                        hi: w - k - 1,
                        lo: 0,
                    },
                    &[arg],
                )?;
                let high = self.mk(
                    at,
                    Kind::Extract {
                        hi: w - 1,
                        lo: w - k,
                    },
                    &[arg],
                )?;
                self.mk(at, Kind::Concat, &[low, high])
            }
            _ => Err(SmtError::Unsupported(format!("indexed operator `{name}`"))),
        }
    }

    fn plain_app(&mut self, at: Pos, op: &str, args: &[TermId]) -> Result<TermId, SmtError> {
        let binary = |kind: Kind| -> Result<Kind, SmtError> {
            if args.len() == 2 {
                Ok(kind)
            } else {
                Err(syntax(at, format!("`{op}` expects two arguments")))
            }
        };
        match op {
            "not" => self.mk(at, Kind::Not, args),
            "and" | "or" => {
                let kind = if op == "and" { Kind::And } else { Kind::Or };
                match args.len() {
                    0 => Ok(self.tt.bool_const(op == "and")),
                    1 => {
                        if !self.tt.sort(args[0]).is_bool() {
                            return Err(SmtError::SortMismatch(format!(
                                "{at}: `{op}` of non-Boolean"
                            )));
                        }
                        Ok(args[0])
                    }
                    _ => self.mk(at, kind, args),
                }
            }
            "xor" => self.left_assoc(at, Kind::Xor, args),
            "=>" => {
                if args.len() < 2 {
                    return Err(syntax(at, "`=>` expects at least two arguments"));
                }
                let mut acc = *args.last().unwrap();
                for &a in args[..args.len() - 1].iter().rev() {
                    acc = self.mk(at, Kind::Implies, &[a, acc])?;
                }
                Ok(acc)
            }
            "=" => {
                if args.len() < 2 {
                    return Err(syntax(at, "`=` expects at least two arguments"));
                }
                let eqs = args
                    .windows(2)
                    .map(|p| self.mk(at, Kind::Eq, p))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(self.tt.and_all(eqs))
            }
            "distinct" => {
                if args.len() < 2 {
                    return Err(syntax(at, "`distinct` expects at least two arguments"));
                }
                let mut ne = Vec::new();
                for i in 0..args.len() {
                    for j in i + 1..args.len() {
                        let e = self.mk(at, Kind::Eq, &[args[i], args[j]])?;
                        ne.push(self.mk(at, Kind::Not, &[e])?);
                    }
                }
                Ok(self.tt.and_all(ne))
            }
            "ite" => self.mk(at, Kind::Ite, args),
            "bvnot" => self.mk(at, Kind::BvNot, args),
            "bvneg" => self.mk(at, Kind::BvNeg, args),
            "bvand" => self.left_assoc(at, Kind::BvAnd, args),
            "bvor" => self.left_assoc(at, Kind::BvOr, args),
            "bvxor" => self.left_assoc(at, Kind::BvXor, args),
            "bvadd" => self.left_assoc(at, Kind::BvAdd, args),
            "bvmul" => self.left_assoc(at, Kind::BvMul, args),
            "concat" => self.left_assoc(at, Kind::Concat, args),
            "bvsub" => self.mk(at, binary(Kind::BvSub)?, args),
            "bvudiv" => self.mk(at, binary(Kind::BvUdiv)?, args),
            "bvsdiv" => self.mk(at, binary(Kind::BvSdiv)?, args),
            "bvurem" => self.mk(at, binary(Kind::BvUrem)?, args),
            "bvsrem" => self.mk(at, binary(Kind::BvSrem)?, args),
            "bvshl" => self.mk(at, binary(Kind::BvShl)?, args),
            "bvlshr" => self.mk(at, binary(Kind::BvLshr)?, args),
            "bvashr" => self.mk(at, binary(Kind::BvAshr)?, args),
            "bvult" => self.mk(at, binary(Kind::BvUlt)?, args),
            "bvule" => self.mk(at, binary(Kind::BvUle)?, args),
            "bvslt" => self.mk(at, binary(Kind::BvSlt)?, args),
            "bvsle" => self.mk(at, binary(Kind::BvSle)?, args),
            "bvugt" => self.mk(at, binary(Kind::BvUlt)?, &[args[1], args[0]]),
            "bvuge" => self.mk(at, binary(Kind::BvUle)?, &[args[1], args[0]]),
            "bvsgt" => self.mk(at, binary(Kind::BvSlt)?, &[args[1], args[0]]),
            "bvsge" => self.mk(at, binary(Kind::BvSle)?, &[args[1], args[0]]),
            "bvnand" | "bvnor" | "bvxnor" => {
                let inner = match op {
                    "bvnand" => Kind::BvAnd,
                    "bvnor" => Kind::BvOr,
                    _ => Kind::BvXor,
                };
                let t = self.mk(at, binary(inner)?, args)?;
                self.mk(at, Kind::BvNot, &[t])
            }
            "bvcomp" => {
                let e = self.mk(at, binary(Kind::Eq)?, args)?;
                let one = self.tt.bv_u64(1, 1);
                let zero = self.tt.bv_u64(1, 0);
                self.mk(at, Kind::Ite, &[e, one, zero])
            }
            "bvsmod" => {
                binary(Kind::BvUrem)?;
                self.smod(at, args[0], args[1])
            }
            other => Err(SmtError::Unsupported(format!("operator `{other}`"))),
        }
    }

    /// `bvsmod` through its SMT-LIB definition in terms of `bvurem`.
    fn smod(&mut self, at: Pos, s: TermId, t: TermId) -> Result<TermId, SmtError> {
        let w = self.width_of(at, s)?;
        self.width_of(at, t)?;
        let tt = &mut *self.tt;
        if tt.sort(s) != tt.sort(t) {
            return Err(SmtError::SortMismatch(format!(
                "{at}: `bvsmod` width mismatch"
            )));
        }
        let msb_s = tt.extract(w - 1, w - 1, s);
        let msb_t = tt.extract(w - 1, w - 1, t);
        let zero1 = tt.bv_u64(1, 0);
        let one1 = tt.bv_u64(1, 1);
        let s_pos = tt.eq(msb_s, zero1);
        let t_pos = tt.eq(msb_t, zero1);
        let s_neg = tt.eq(msb_s, one1);
        let t_neg = tt.eq(msb_t, one1);
        let neg_s = tt.bvneg(s);
        let neg_t = tt.bvneg(t);
        let abs_s = tt.ite(s_pos, s, neg_s);
        let abs_t = tt.ite(t_pos, t, neg_t);
        let u = tt.bin(Kind::BvUrem, abs_s, abs_t);
        let zero = tt.bv_u64(w, 0);
        let u_zero = tt.eq(u, zero);
        let neg_u = tt.bvneg(u);
        let neg_u_plus_t = tt.bin(Kind::BvAdd, neg_u, t);
        let u_plus_t = tt.bin(Kind::BvAdd, u, t);
        let both_pos = tt.and2(s_pos, t_pos);
        let neg_pos = tt.and2(s_neg, t_pos);
        let pos_neg = tt.and2(s_pos, t_neg);
        let e3 = tt.ite(pos_neg, u_plus_t, neg_u);
        let e2 = tt.ite(neg_pos, neg_u_plus_t, e3);
        let e1 = tt.ite(both_pos, u, e2);
        Ok(tt.ite(u_zero, u, e1))
    }
}
