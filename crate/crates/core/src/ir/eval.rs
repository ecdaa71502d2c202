use std::collections::{BTreeMap, HashMap};
use std::fmt;

use super::term::{Kind, TermId, TermTable};
use super::value::BvValue;
use super::IrError;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Bv(BvValue),
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Bv(_) => None,
        }
    }

    pub fn as_bv(&self) -> Option<&BvValue> {
        match self {
            Value::Bv(v) => Some(v),
            Value::Bool(_) => None,
        }
    }

    pub fn to_smtlib(&self) -> String {
        match self {
            Value::Bool(b) => b.to_string(),
            Value::Bv(v) => v.to_smtlib(),
        }
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Bv(v) => write!(f, "{v:?}"),
        }
    }
}

impl From<BvValue> for Value {
    fn from(v: BvValue) -> Self {
        Value::Bv(v)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

/// Assignment of values to symbols, keyed by the symbol's term id.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Model {
    values: BTreeMap<TermId, Value>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, sym: TermId, v: impl Into<Value>) {
        self.values.insert(sym, v.into());
    }

    pub fn remove(&mut self, sym: TermId) -> Option<Value> {
        self.values.remove(&sym)
    }

    pub fn get(&self, sym: TermId) -> Option<&Value> {
        self.values.get(&sym)
    }

    pub fn bv(&self, sym: TermId) -> Option<&BvValue> {
        self.get(sym).and_then(Value::as_bv)
    }

    pub fn contains(&self, sym: TermId) -> bool {
        self.values.contains_key(&sym)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Value)> {
        self.values.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn extend(&mut self, other: &Model) {
        for (k, v) in other.iter() {
            self.values.insert(k, v.clone());
        }
    }

    /// Keeps only the listed symbols.
    pub fn restrict(&self, keep: &[TermId]) -> Model {
        Model {
            values: keep
                .iter()
                .filter_map(|k| self.values.get(k).map(|v| (*k, v.clone())))
                .collect(),
        }
    }
}

/// Evaluates `t` under `model`. Every symbol reachable from `t` must be
/// assigned.
pub fn eval(tt: &TermTable, t: TermId, model: &Model) -> Result<Value, IrError> {
    let mut ev = PartialEval::new(|s| model.get(s).cloned());
    match ev.eval(tt, t) {
        Some(v) => Ok(v),
        None => {
            let missing = tt
                .free_symbols(&[t])
                .into_iter()
                .find(|s| !model.contains(*s))
                .and_then(|s| tt.symbol_name(s).map(str::to_string))
                .unwrap_or_default();
            Err(IrError::UnboundSymbol(missing))
        }
    }
}

pub fn eval_bool(tt: &TermTable, t: TermId, model: &Model) -> Result<bool, IrError> {
    match eval(tt, t, model)? {
        Value::Bool(b) => Ok(b),
        Value::Bv(_) => Err(IrError::SortMismatch("expected a Boolean term".into())),
    }
}

pub fn eval_bv(tt: &TermTable, t: TermId, model: &Model) -> Result<BvValue, IrError> {
    match eval(tt, t, model)? {
        Value::Bv(v) => Ok(v),
        Value::Bool(_) => Err(IrError::SortMismatch("expected a bit-vector term".into())),
    }
}

/// Three-valued evaluator: symbols the lookup cannot resolve evaluate to
/// unknown (`None`), and Boolean connectives short-circuit where the known
/// operands already decide the result. Results are memoized per node, so one
/// evaluator serves many roots under a fixed assignment.
pub struct PartialEval<F> {
    lookup: F,
    memo: HashMap<TermId, Option<Value>>,
}

impl<F: FnMut(TermId) -> Option<Value>> PartialEval<F> {
    pub fn new(lookup: F) -> Self {
        PartialEval {
            lookup,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, tt: &TermTable, root: TermId) -> Option<Value> {
        if let Some(v) = self.memo.get(&root) {
            return v.clone();
        }
        for t in tt.post_order(&[root]) {
            if self.memo.contains_key(&t) {
                continue;
            }
            let v = self.step(tt, t);
            self.memo.insert(t, v);
        }
        self.memo[&root].clone()
    }

    fn child(&self, t: TermId) -> Option<&Value> {
        self.memo.get(&t).and_then(|v| v.as_ref())
    }

    fn child_bool(&self, t: TermId) -> Option<bool> {
        self.child(t).and_then(Value::as_bool)
    }

    fn step(&mut self, tt: &TermTable, t: TermId) -> Option<Value> {
        use Kind::*;
        let ch = tt.children(t);
        match tt.kind(t) {
            BoolConst(b) => Some(Value::Bool(*b)),
            BvConst(v) => Some(Value::Bv(v.clone())),
            Symbol(_) => (self.lookup)(t),
            Not => self.child_bool(ch[0]).map(|b| Value::Bool(!b)),
            And => {
                let mut unknown = false;
                for &c in ch {
                    match self.child_bool(c) {
                        Some(false) => return Some(Value::Bool(false)),
                        Some(true) => {}
                        None => unknown = true,
                    }
                }
                (!unknown).then_some(Value::Bool(true))
            }
            Or => {
                let mut unknown = false;
                for &c in ch {
                    match self.child_bool(c) {
                        Some(true) => return Some(Value::Bool(true)),
                        Some(false) => {}
                        None => unknown = true,
                    }
                }
                (!unknown).then_some(Value::Bool(false))
            }
            Implies => match (self.child_bool(ch[0]), self.child_bool(ch[1])) {
                (Some(false), _) | (_, Some(true)) => Some(Value::Bool(true)),
                (Some(true), Some(false)) => Some(Value::Bool(false)),
                _ => None,
            },
            Xor => {
                let (a, b) = (self.child_bool(ch[0])?, self.child_bool(ch[1])?);
                Some(Value::Bool(a ^ b))
            }
            Eq => {
                let (a, b) = (self.child(ch[0])?, self.child(ch[1])?);
                Some(Value::Bool(a == b))
            }
            Ite => {
                let then = self.child(ch[1]).cloned();
                let other = self.child(ch[2]).cloned();
                match self.child_bool(ch[0]) {
                    Some(true) => then,
                    Some(false) => other,
                    None => match (then, other) {
                        (Some(a), Some(b)) if a == b => Some(a),
                        _ => None,
                    },
                }
            }
            kind => {
                let args: Vec<&BvValue> = ch
                    .iter()
                    .map(|&c| self.child(c).and_then(Value::as_bv))
                    .collect::<Option<_>>()?;
                Some(apply_bv(kind, &args))
            }
        }
    }
}

/// Concrete semantics of the bit-vector operators on known arguments.
pub fn apply_bv(kind: &Kind, a: &[&BvValue]) -> Value {
    use Kind::*;
    let bv = |v: BvValue| Value::Bv(v);
    match kind {
        BvNot => bv(a[0].bvnot()),
        BvNeg => bv(a[0].bvneg()),
        BvAnd => bv(a[0].bvand(a[1])),
        BvOr => bv(a[0].bvor(a[1])),
        BvXor => bv(a[0].bvxor(a[1])),
        BvAdd => bv(a[0].bvadd(a[1])),
        BvSub => bv(a[0].bvsub(a[1])),
        BvMul => bv(a[0].bvmul(a[1])),
        BvUdiv => bv(a[0].bvudiv(a[1])),
        BvSdiv => bv(a[0].bvsdiv(a[1])),
        BvUrem => bv(a[0].bvurem(a[1])),
        BvSrem => bv(a[0].bvsrem(a[1])),
        BvShl => bv(a[0].bvshl(a[1])),
        BvLshr => bv(a[0].bvlshr(a[1])),
        BvAshr => bv(a[0].bvashr(a[1])),
        BvUlt => Value::Bool(a[0].bvult(a[1])),
        BvUle => Value::Bool(a[0].bvule(a[1])),
        BvSlt => Value::Bool(a[0].bvslt(a[1])),
        BvSle => Value::Bool(a[0].bvsle(a[1])),
        Concat => bv(a[0].concat(a[1])),
        Extract { hi, lo } => bv(a[0].extract(*hi, *lo)),
        SignExtend(k) => bv(a[0].sign_extend(*k)),
        ZeroExtend(k) => bv(a[0].zero_extend(*k)),
        other => unreachable!("`{}` is not a bit-vector operator", other.smtlib_name()),
    }
}

/// Replaces every occurrence of each key of `map` by its value. Replacement
/// is simultaneous: replaced subterms are not visited again.
pub fn substitute(
    tt: &mut TermTable,
    t: TermId,
    map: &HashMap<TermId, TermId>,
) -> Result<TermId, IrError> {
    for (&from, &to) in map {
        if tt.sort(from) != tt.sort(to) {
            return Err(IrError::SortMismatch(format!(
                "substitution maps a {} term to a {} term",
                tt.sort(from),
                tt.sort(to)
            )));
        }
    }
    if map.is_empty() {
        return Ok(t);
    }
    let mut done: HashMap<TermId, TermId> = HashMap::new();
    let mut stack = vec![(t, false)];
    while let Some((n, expanded)) = stack.pop() {
        if done.contains_key(&n) {
            continue;
        }
        if let Some(&r) = map.get(&n) {
            done.insert(n, r);
            continue;
        }
        if !expanded {
            stack.push((n, true));
            for &c in tt.children(n) {
                if !done.contains_key(&c) {
                    stack.push((c, false));
                }
            }
            continue;
        }
        let old = tt.children(n).to_vec();
        let new: Vec<TermId> = old.iter().map(|c| done[c]).collect();
        let r = if new == old {
            n
        } else {
            tt.mk(tt.kind(n).clone(), &new)?
        };
        done.insert(n, r);
    }
    Ok(done[&t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Sort;

    fn two_vars(tt: &mut TermTable, w: u32) -> (TermId, TermId) {
        (
            tt.mk_symbol("x", Sort::BitVec(w)).unwrap(),
            tt.mk_symbol("y", Sort::BitVec(w)).unwrap(),
        )
    }

    fn assign(x: TermId, xv: BvValue, y: TermId, yv: BvValue) -> Model {
        let mut m = Model::new();
        m.insert(x, xv);
        m.insert(y, yv);
        m
    }

    #[test]
    fn spot_values_at_width_four() {
        let mut tt = TermTable::new();
        let (x, y) = two_vars(&mut tt, 4);
        let mul = tt.bin(Kind::BvMul, x, y);
        let sdiv = tt.bin(Kind::BvSdiv, x, y);
        let udiv = tt.bin(Kind::BvUdiv, x, y);
        let srem = tt.bin(Kind::BvSrem, x, y);
        let m = assign(x, BvValue::new(4, 3), y, BvValue::new(4, 5));
        assert_eq!(eval_bv(&tt, mul, &m).unwrap(), BvValue::new(4, 15));
        let m = assign(x, BvValue::new(4, 8), y, BvValue::new(4, 2));
        assert_eq!(eval_bv(&tt, mul, &m).unwrap(), BvValue::new(4, 0));
        let m = assign(x, BvValue::new(4, 0b1001), y, BvValue::new(4, 0b0010));
        assert_eq!(eval_bv(&tt, sdiv, &m).unwrap(), BvValue::new(4, 0b1101));
        assert_eq!(eval_bv(&tt, srem, &m).unwrap(), BvValue::new(4, 0b1111));
        let m = assign(x, BvValue::new(4, 5), y, BvValue::new(4, 0));
        assert_eq!(eval_bv(&tt, udiv, &m).unwrap(), BvValue::new(4, 0b1111));
    }

    #[test]
    fn unbound_symbol_is_reported() {
        let mut tt = TermTable::new();
        let (x, y) = two_vars(&mut tt, 4);
        let add = tt.bin(Kind::BvAdd, x, y);
        let mut m = Model::new();
        m.insert(x, BvValue::new(4, 1));
        assert_eq!(eval(&tt, add, &m), Err(IrError::UnboundSymbol("y".into())));
    }

    #[test]
    fn partial_evaluation_short_circuits() {
        let mut tt = TermTable::new();
        let (x, y) = two_vars(&mut tt, 4);
        let zero = tt.bv_u64(4, 0);
        let xz = tt.eq(x, zero);
        let yz = tt.eq(y, zero);
        let or = tt.or2(xz, yz);
        let and = tt.and2(xz, yz);
        let mut ev = PartialEval::new(|s| (s == x).then(|| Value::Bv(BvValue::zero(4))));
        assert_eq!(ev.eval(&tt, or), Some(Value::Bool(true)));
        assert_eq!(ev.eval(&tt, and), None);
        assert_eq!(ev.eval(&tt, yz), None);
    }

    #[test]
    fn substitution_cases() {
        let mut tt = TermTable::new();
        let (x, y) = two_vars(&mut tt, 4);
        let m = tt.bin(Kind::BvMul, x, y);
        let ap = tt.mk_symbol("ap", Sort::BitVec(4)).unwrap();
        let map: HashMap<_, _> = [(m, ap)].into_iter().collect();
        assert_eq!(substitute(&mut tt, m, &map).unwrap(), ap);
        assert_eq!(substitute(&mut tt, x, &HashMap::new()).unwrap(), x);
        let sum = tt.bin(Kind::BvAdd, m, m);
        let expect = tt.bin(Kind::BvAdd, ap, ap);
        assert_eq!(substitute(&mut tt, sum, &map).unwrap(), expect);
        // untouched when the key does not occur
        let other = tt.bin(Kind::BvSub, x, y);
        assert_eq!(substitute(&mut tt, other, &map).unwrap(), other);
        // simultaneous: x -> y and y -> x swap
        let swap: HashMap<_, _> = [(x, y), (y, x)].into_iter().collect();
        let swapped = tt.bin(Kind::BvMul, y, x);
        assert_eq!(substitute(&mut tt, m, &swap).unwrap(), swapped);
        let b = tt.mk_symbol("b", Sort::Bool).unwrap();
        let bad: HashMap<_, _> = [(x, b)].into_iter().collect();
        assert!(substitute(&mut tt, m, &bad).is_err());
    }
}
