use std::collections::HashMap;
use std::fmt;

use super::value::BvValue;
use super::IrError;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Sort {
    Bool,
    BitVec(u32),
}

impl Sort {
    pub fn width(self) -> Option<u32> {
        match self {
            Sort::Bool => None,
            Sort::BitVec(w) => Some(w),
        }
    }

    pub fn is_bool(self) -> bool {
        self == Sort::Bool
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => f.write_str("Bool"),
            Sort::BitVec(w) => write!(f, "(_ BitVec {w})"),
        }
    }
}

/// Handle to a node of a [`TermTable`]. Only meaningful for the table that
/// produced it.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    BoolConst(bool),
    BvConst(BvValue),
    Symbol(String),
    Not,
    /// n-ary, at least two children
    And,
    /// n-ary, at least two children
    Or,
    Xor,
    Implies,
    Eq,
    Ite,
    BvNot,
    BvAnd,
    BvOr,
    BvXor,
    BvNeg,
    BvAdd,
    BvSub,
    BvMul,
    BvUdiv,
    BvSdiv,
    BvUrem,
    BvSrem,
    BvShl,
    BvLshr,
    BvAshr,
    BvUlt,
    BvUle,
    BvSlt,
    BvSle,
    Concat,
    Extract {
        hi: u32,
        lo: u32,
    },
    SignExtend(u32),
    ZeroExtend(u32),
}

impl Kind {
    /// SMT-LIB operator name. Indexed operators return the bare name.
    pub fn smtlib_name(&self) -> &'static str {
        use Kind::*;
        match self {
            BoolConst(true) => "true",
            BoolConst(false) => "false",
            BvConst(_) | Symbol(_) => "",
            Not => "not",
            And => "and",
            Or => "or",
            Xor => "xor",
            Implies => "=>",
            Eq => "=",
            Ite => "ite",
            BvNot => "bvnot",
            BvAnd => "bvand",
            BvOr => "bvor",
            BvXor => "bvxor",
            BvNeg => "bvneg",
            BvAdd => "bvadd",
            BvSub => "bvsub",
            BvMul => "bvmul",
            BvUdiv => "bvudiv",
            BvSdiv => "bvsdiv",
            BvUrem => "bvurem",
            BvSrem => "bvsrem",
            BvShl => "bvshl",
            BvLshr => "bvlshr",
            BvAshr => "bvashr",
            BvUlt => "bvult",
            BvUle => "bvule",
            BvSlt => "bvslt",
            BvSle => "bvsle",
            Concat => "concat",
            Extract { .. } => "extract",
            SignExtend(_) => "sign_extend",
            ZeroExtend(_) => "zero_extend",
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            Kind::BoolConst(_) | Kind::BvConst(_) | Kind::Symbol(_)
        )
    }
}

#[derive(Clone, Debug)]
pub struct Node {
    pub kind: Kind,
    pub children: Vec<TermId>,
    pub sort: Sort,
}

/// Hash-consed store of sorted terms. Structurally equal terms share one id.
#[derive(Default, Clone)]
pub struct TermTable {
    nodes: Vec<Node>,
    dedup: HashMap<(Kind, Vec<TermId>), TermId>,
    symbols: HashMap<String, TermId>,
    fresh_counter: u64,
}

impl TermTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, t: TermId) -> &Node {
        &self.nodes[t.index()]
    }

    pub fn kind(&self, t: TermId) -> &Kind {
        &self.nodes[t.index()].kind
    }

    pub fn children(&self, t: TermId) -> &[TermId] {
        &self.nodes[t.index()].children
    }

    pub fn sort(&self, t: TermId) -> Sort {
        self.nodes[t.index()].sort
    }

    /// Width of a bit-vector term. Panics on Boolean terms.
    pub fn width(&self, t: TermId) -> u32 {
        self.sort(t).width().expect("bit-vector term expected")
    }

    pub fn is_symbol(&self, t: TermId) -> bool {
        matches!(self.kind(t), Kind::Symbol(_))
    }

    pub fn symbol_name(&self, t: TermId) -> Option<&str> {
        match self.kind(t) {
            Kind::Symbol(name) => Some(name),
            _ => None,
        }
    }

    pub fn lookup_symbol(&self, name: &str) -> Option<TermId> {
        self.symbols.get(name).copied()
    }

    pub fn as_bv_const(&self, t: TermId) -> Option<&BvValue> {
        match self.kind(t) {
            Kind::BvConst(v) => Some(v),
            _ => None,
        }
    }

    fn intern(&mut self, kind: Kind, children: Vec<TermId>, sort: Sort) -> TermId {
        let key = (kind, children);
        if let Some(&id) = self.dedup.get(&key) {
            return id;
        }
        let id = TermId(u32::try_from(self.nodes.len()).expect("term table overflow"));
        self.nodes.push(Node {
            kind: key.0.clone(),
            children: key.1.clone(),
            sort,
        });
        self.dedup.insert(key, id);
        id
    }

    /// Declares (or returns the already declared) symbol `name`.
    pub fn mk_symbol(&mut self, name: &str, sort: Sort) -> Result<TermId, IrError> {
        if let Sort::BitVec(0) = sort {
            return Err(IrError::InvalidAttr(
                "bit-vector width must be positive".into(),
            ));
        }
        if let Some(&id) = self.symbols.get(name) {
            if self.sort(id) != sort {
                return Err(IrError::SortMismatch(format!(
                    "symbol `{name}` already declared with sort {}",
                    self.sort(id)
                )));
            }
            return Ok(id);
        }
        let id = self.intern(Kind::Symbol(name.to_string()), Vec::new(), sort);
        self.symbols.insert(name.to_string(), id);
        Ok(id)
    }

    /// Creates a symbol whose name is not yet used in this table.
    pub fn fresh_symbol(&mut self, prefix: &str, sort: Sort) -> TermId {
        loop {
            let name = format!("{prefix}!{}", self.fresh_counter);
            self.fresh_counter += 1;
            if !self.symbols.contains_key(&name) {
                return self.mk_symbol(&name, sort).expect("fresh symbol");
            }
        }
    }

    pub fn bool_const(&mut self, b: bool) -> TermId {
        self.intern(Kind::BoolConst(b), Vec::new(), Sort::Bool)
    }

    pub fn bv_const(&mut self, v: BvValue) -> TermId {
        let w = v.width();
        self.intern(Kind::BvConst(v), Vec::new(), Sort::BitVec(w))
    }

    pub fn bv_u64(&mut self, width: u32, v: u64) -> TermId {
        self.bv_const(BvValue::new(width, v))
    }

    /// Builds the hash-consed application `kind(children)` after checking
    /// the operator signature.
    pub fn mk(&mut self, kind: Kind, children: &[TermId]) -> Result<TermId, IrError> {
        let sort = self.infer_sort(&kind, children)?;
        Ok(self.intern(kind, children.to_vec(), sort))
    }

    fn infer_sort(&self, kind: &Kind, ch: &[TermId]) -> Result<Sort, IrError> {
        use Kind::*;
        let sorts: Vec<Sort> = ch.iter().map(|&c| self.sort(c)).collect();
        let mismatch = || {
            let shown: Vec<String> = sorts.iter().map(|s| s.to_string()).collect();
            IrError::SortMismatch(format!(
                "`{}` applied to [{}]",
                kind.smtlib_name(),
                shown.join(", ")
            ))
        };
        let arity = |n: usize| {
            if ch.len() == n {
                Ok(())
            } else {
                Err(mismatch())
            }
        };
        let all_bool = || sorts.iter().all(|s| s.is_bool());
        let same_bv = || -> Result<u32, IrError> {
            match sorts.first() {
                Some(Sort::BitVec(w)) if sorts.iter().all(|s| *s == Sort::BitVec(*w)) => Ok(*w),
                _ => Err(mismatch()),
            }
        };
        match kind {
            BoolConst(_) | BvConst(_) | Symbol(_) => Err(IrError::InvalidAttr(
                "leaf terms are built with their dedicated constructors".into(),
            )),
            Not => {
                arity(1)?;
                if all_bool() {
                    Ok(Sort::Bool)
                } else {
                    Err(mismatch())
                }
            }
            And | Or => {
                if ch.len() < 2 || !all_bool() {
                    return Err(mismatch());
                }
                Ok(Sort::Bool)
            }
            Xor | Implies => {
                arity(2)?;
                if all_bool() {
                    Ok(Sort::Bool)
                } else {
                    Err(mismatch())
                }
            }
            Eq => {
                arity(2)?;
                if sorts[0] == sorts[1] {
                    Ok(Sort::Bool)
                } else {
                    Err(mismatch())
                }
            }
            Ite => {
                arity(3)?;
                if sorts[0].is_bool() && sorts[1] == sorts[2] {
                    Ok(sorts[1])
                } else {
                    Err(mismatch())
                }
            }
            BvNot | BvNeg => {
                arity(1)?;
                Ok(Sort::BitVec(same_bv()?))
            }
            BvAnd | BvOr | BvXor | BvAdd | BvSub | BvMul | BvUdiv | BvSdiv | BvUrem | BvSrem
            | BvShl | BvLshr | BvAshr => {
                arity(2)?;
                Ok(Sort::BitVec(same_bv()?))
            }
            BvUlt | BvUle | BvSlt | BvSle => {
                arity(2)?;
                same_bv()?;
                Ok(Sort::Bool)
            }
            Concat => {
                arity(2)?;
                match (sorts[0], sorts[1]) {
                    (Sort::BitVec(a), Sort::BitVec(b)) => Ok(Sort::BitVec(a + b)),
                    _ => Err(mismatch()),
                }
            }
            Extract { hi, lo } => {
                arity(1)?;
                let Sort::BitVec(w) = sorts[0] else {
                    return Err(mismatch());
                };
                if hi < lo || *hi >= w {
                    return Err(IrError::InvalidAttr(format!(
                        "extract {hi} {lo} on a {w}-bit term"
                    )));
                }
                Ok(Sort::BitVec(hi - lo + 1))
            }
            SignExtend(k) | ZeroExtend(k) => {
                arity(1)?;
                let Sort::BitVec(w) = sorts[0] else {
                    return Err(mismatch());
                };
                Ok(Sort::BitVec(w + k))
            }
        }
    }

    // Infallible builders for internally constructed terms whose sorts are
    // correct by construction. A failure here is a bug in the caller.

    pub fn app(&mut self, kind: Kind, children: &[TermId]) -> TermId {
        match self.mk(kind, children) {
            Ok(t) => t,
            Err(e) => panic!("ill-sorted internal term: {e}"),
        }
    }

    pub fn not(&mut self, a: TermId) -> TermId {
        match self.kind(a) {
            Kind::BoolConst(b) => {
                let b = !*b;
                self.bool_const(b)
            }
            _ => self.app(Kind::Not, &[a]),
        }
    }

    pub fn and_all(&mut self, items: impl IntoIterator<Item = TermId>) -> TermId {
        let items: Vec<TermId> = items.into_iter().collect();
        match items.len() {
            0 => self.bool_const(true),
            1 => items[0],
            _ => self.app(Kind::And, &items),
        }
    }

    pub fn or_all(&mut self, items: impl IntoIterator<Item = TermId>) -> TermId {
        let items: Vec<TermId> = items.into_iter().collect();
        match items.len() {
            0 => self.bool_const(false),
            1 => items[0],
            _ => self.app(Kind::Or, &items),
        }
    }

    pub fn and2(&mut self, a: TermId, b: TermId) -> TermId {
        self.and_all([a, b])
    }

    pub fn or2(&mut self, a: TermId, b: TermId) -> TermId {
        self.or_all([a, b])
    }

    pub fn implies(&mut self, a: TermId, b: TermId) -> TermId {
        self.app(Kind::Implies, &[a, b])
    }

    pub fn eq(&mut self, a: TermId, b: TermId) -> TermId {
        self.app(Kind::Eq, &[a, b])
    }

    pub fn neq(&mut self, a: TermId, b: TermId) -> TermId {
        let e = self.eq(a, b);
        self.not(e)
    }

    pub fn ite(&mut self, c: TermId, t: TermId, e: TermId) -> TermId {
        self.app(Kind::Ite, &[c, t, e])
    }

    pub fn bin(&mut self, kind: Kind, a: TermId, b: TermId) -> TermId {
        self.app(kind, &[a, b])
    }

    pub fn bvneg(&mut self, a: TermId) -> TermId {
        self.app(Kind::BvNeg, &[a])
    }

    pub fn extract(&mut self, hi: u32, lo: u32, a: TermId) -> TermId {
        if lo == 0 && hi + 1 == self.width(a) {
            return a;
        }
        self.app(Kind::Extract { hi, lo }, &[a])
    }

    pub fn sign_extend(&mut self, a: TermId, k: u32) -> TermId {
        if k == 0 {
            return a;
        }
        self.app(Kind::SignExtend(k), &[a])
    }

    pub fn zero_extend(&mut self, a: TermId, k: u32) -> TermId {
        if k == 0 {
            return a;
        }
        self.app(Kind::ZeroExtend(k), &[a])
    }

    /// Boolean view of bit `i` of `a`.
    pub fn bit(&mut self, a: TermId, i: u32) -> TermId {
        let b = self.extract(i, i, a);
        let one = self.bv_u64(1, 1);
        self.eq(b, one)
    }

    /// Post-order (children before parents) listing of every node reachable
    /// from `roots`, each node once.
    pub fn post_order(&self, roots: &[TermId]) -> Vec<TermId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack: Vec<(TermId, bool)> = roots.iter().rev().map(|&r| (r, false)).collect();
        while let Some((t, expanded)) = stack.pop() {
            if expanded {
                out.push(t);
                continue;
            }
            if seen[t.index()] {
                continue;
            }
            seen[t.index()] = true;
            stack.push((t, true));
            for &c in self.children(t).iter().rev() {
                if !seen[c.index()] {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    /// Free symbols reachable from `roots`, in order of first occurrence.
    pub fn free_symbols(&self, roots: &[TermId]) -> Vec<TermId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack: Vec<TermId> = roots.iter().rev().copied().collect();
        while let Some(t) = stack.pop() {
            if seen[t.index()] {
                continue;
            }
            seen[t.index()] = true;
            if self.is_symbol(t) {
                out.push(t);
            }
            stack.extend(self.children(t).iter().rev().copied());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_consing_returns_same_id() {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(8)).unwrap();
        let y = tt.mk_symbol("y", Sort::BitVec(8)).unwrap();
        let a = tt.mk(Kind::BvAdd, &[x, y]).unwrap();
        let b = tt.mk(Kind::BvAdd, &[x, y]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, tt.mk(Kind::BvAdd, &[y, x]).unwrap());
    }

    #[test]
    fn extract_width() {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(8)).unwrap();
        let e = tt.mk(Kind::Extract { hi: 3, lo: 0 }, &[x]).unwrap();
        assert_eq!(tt.sort(e), Sort::BitVec(4));
        assert!(matches!(
            tt.mk(Kind::Extract { hi: 0, lo: 3 }, &[x]),
            Err(IrError::InvalidAttr(_))
        ));
        assert!(matches!(
            tt.mk(Kind::Extract { hi: 8, lo: 0 }, &[x]),
            Err(IrError::InvalidAttr(_))
        ));
    }

    #[test]
    fn sort_mismatches() {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(8)).unwrap();
        let b = tt.mk_symbol("b", Sort::Bool).unwrap();
        let y = tt.mk_symbol("y", Sort::BitVec(4)).unwrap();
        assert!(matches!(
            tt.mk(Kind::Eq, &[x, b]),
            Err(IrError::SortMismatch(_))
        ));
        assert!(matches!(
            tt.mk(Kind::BvAdd, &[x, y]),
            Err(IrError::SortMismatch(_))
        ));
        assert!(matches!(
            tt.mk(Kind::Not, &[x]),
            Err(IrError::SortMismatch(_))
        ));
        assert!(matches!(
            tt.mk(Kind::Ite, &[x, x, x]),
            Err(IrError::SortMismatch(_))
        ));
        assert!(matches!(
            tt.mk(Kind::And, &[b]),
            Err(IrError::SortMismatch(_))
        ));
        assert!(matches!(
            tt.mk_symbol("x", Sort::Bool),
            Err(IrError::SortMismatch(_))
        ));
        // Bool and (_ BitVec 1) are distinct sorts
        let one = tt.bv_u64(1, 1);
        assert!(tt.mk(Kind::Eq, &[b, one]).is_err());
    }

    #[test]
    fn fresh_symbols_avoid_declared_names() {
        let mut tt = TermTable::new();
        tt.mk_symbol("ap!0", Sort::BitVec(4)).unwrap();
        let f = tt.fresh_symbol("ap", Sort::BitVec(4));
        assert_eq!(tt.symbol_name(f), Some("ap!1"));
    }

    #[test]
    fn free_symbols_in_first_occurrence_order() {
        let mut tt = TermTable::new();
        let x = tt.mk_symbol("x", Sort::BitVec(4)).unwrap();
        let y = tt.mk_symbol("y", Sort::BitVec(4)).unwrap();
        let m = tt.bin(Kind::BvMul, y, x);
        let s = tt.bin(Kind::BvAdd, m, y);
        assert_eq!(tt.free_symbols(&[s]), vec![y, x]);
        let order = tt.post_order(&[s]);
        assert_eq!(order.last(), Some(&s));
        assert_eq!(order.len(), 4);
    }
}
