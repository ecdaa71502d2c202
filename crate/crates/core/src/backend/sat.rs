//! Incremental CDCL SAT solver.
//!
//! Two-watched-literal propagation, first-UIP learning with non-chronological
//! backjumping, VSIDS branching with phase saving and Luby restarts. Clauses
//! may be added between calls to [`SatSolver::solve`]; learned clauses are
//! kept across calls. With learning switched off the solver degrades to
//! plain DPLL with chronological backtracking.

use std::time::Instant;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(pub u32);

/// Literal encoded as `2 * var + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Lit(u32);

impl Lit {
    pub fn new(v: Var, positive: bool) -> Lit {
        Lit(v.0 << 1 | (!positive) as u32)
    }

    pub fn pos(v: Var) -> Lit {
        Lit::new(v, true)
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS form: 1-based, negative for negated literals.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var().0 as i64 + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(d: i64) -> Lit {
        assert!(d != 0);
        Lit::new(Var(d.unsigned_abs() as u32 - 1), d > 0)
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SatResult {
    Sat,
    Unsat,
    Unknown,
}

/// Resource limits for one `solve` call.
#[derive(Clone, Copy, Debug, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
    pub max_conflicts: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SatStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learned: u64,
    pub deleted: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

/// Binary max-heap of variables ordered by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<Var>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn grow(&mut self, n: usize) {
        self.pos.resize(n, None);
    }

    fn contains(&self, v: Var) -> bool {
        self.pos[v.0 as usize].is_some()
    }

    fn insert(&mut self, v: Var, act: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.heap.push(v);
        self.pos[v.0 as usize] = Some(self.heap.len() - 1);
        self.sift_up(self.heap.len() - 1, act);
    }

    fn bumped(&mut self, v: Var, act: &[f64]) {
        if let Some(i) = self.pos[v.0 as usize] {
            self.sift_up(i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<Var> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().expect("non-empty");
        self.pos[top.0 as usize] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last.0 as usize] = Some(0);
            self.sift_down(0, act);
        }
        Some(top)
    }

    fn sift_up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let p = self.heap[parent];
            if act[p.0 as usize] >= act[v.0 as usize] {
                break;
            }
            self.heap[i] = p;
            self.pos[p.0 as usize] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v.0 as usize] = Some(i);
    }

    fn sift_down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r].0 as usize] > act[self.heap[l].0 as usize] {
                r
            } else {
                l
            };
            let cv = self.heap[c];
            if act[cv.0 as usize] <= act[v.0 as usize] {
                break;
            }
            self.heap[i] = cv;
            self.pos[cv.0 as usize] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v.0 as usize] = Some(i);
    }
}

/// Luby sequence 1, 1, 2, 1, 1, 2, 4, ... (0-based index).
fn luby(mut i: u64) -> u64 {
    let (mut size, mut seq) = (1u64, 0u32);
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1 << seq
}

const RESTART_UNIT: u64 = 100;

pub struct SatSolver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    /// DPLL mode: whether the decision of each level is already flipped.
    flipped: Vec<bool>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    order: VarHeap,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    model: Vec<bool>,
    ok: bool,
    learning: bool,
    num_learnts: usize,
    max_learnts: f64,
    stats: SatStats,
}

impl Default for SatSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl SatSolver {
    pub fn new() -> Self {
        SatSolver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            flipped: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            order: VarHeap::default(),
            polarity: Vec::new(),
            seen: Vec::new(),
            model: Vec::new(),
            ok: true,
            learning: true,
            num_learnts: 0,
            max_learnts: 4000.0,
            stats: SatStats::default(),
        }
    }

    /// A solver without clause learning (chronological DPLL).
    pub fn without_learning() -> Self {
        SatSolver {
            learning: false,
            ..Self::new()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses
            .iter()
            .filter(|c| !c.learnt && !c.deleted)
            .count()
    }

    pub fn stats(&self) -> SatStats {
        self.stats
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(LBool::Undef);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.polarity.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.order.grow(self.assigns.len());
        self.order.insert(v, &self.activity);
        v
    }

    fn value(&self, l: Lit) -> LBool {
        match self.assigns[l.var().0 as usize] {
            LBool::Undef => LBool::Undef,
            LBool::True if l.is_positive() => LBool::True,
            LBool::False if !l.is_positive() => LBool::True,
            _ => LBool::False,
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    /// Adds a clause at the root level. Returns `false` once the clause set
    /// is known to be unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut ls: Vec<Lit> = lits.to_vec();
        ls.sort();
        ls.dedup();
        let mut kept = Vec::with_capacity(ls.len());
        for (i, &l) in ls.iter().enumerate() {
            if i + 1 < ls.len() && ls[i + 1] == !l {
                return true; // tautology
            }
            match self.value(l) {
                LBool::True => return true,
                LBool::False => {}
                LBool::Undef => kept.push(l),
            }
        }
        match kept.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(kept[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(kept, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[(!lits[0]).index()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[(!lits[1]).index()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause {
            lits,
            learnt,
            deleted: false,
            activity: 0.0,
        });
        if learnt {
            self.num_learnts += 1;
        }
        cref
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        let v = l.var().0 as usize;
        debug_assert!(self.assigns[v] == LBool::Undef);
        self.assigns[v] = if l.is_positive() {
            LBool::True
        } else {
            LBool::False
        };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Unit propagation; returns a conflicting clause if one is found.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.index()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.clauses[w.cref as usize].deleted {
                    continue;
                }
                if self.value(w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let c = &mut self.clauses[w.cref as usize];
                if c.lits[0] == false_lit {
                    c.lits.swap(0, 1);
                }
                let first = c.lits[0];
                let nw = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                if first != w.blocker && self.value(first) == LBool::True {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                // look for a new literal to watch
                let c = &self.clauses[w.cref as usize];
                let mut found = None;
                for k in 2..c.lits.len() {
                    if self.value(c.lits[k]) != LBool::False {
                        found = Some(k);
                        break;
                    }
                }
                if let Some(k) = found {
                    let c = &mut self.clauses[w.cref as usize];
                    c.lits.swap(1, k);
                    let nl = c.lits[1];
                    self.watches[(!nl).index()].push(nw);
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == LBool::False {
                    conflict = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            // watchers added for `p` while it was taken out would be lost
            let added = std::mem::take(&mut self.watches[p.index()]);
            ws.extend(added);
            self.watches[p.index()] = ws;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let lim = self.trail_lim[level as usize];
        for k in (lim..self.trail.len()).rev() {
            let l = self.trail[k];
            let v = l.var().0 as usize;
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.polarity[v] = l.is_positive();
            self.order.insert(l.var(), &self.activity);
        }
        self.trail.truncate(lim);
        self.trail_lim.truncate(level as usize);
        self.flipped.truncate(level as usize);
        self.qhead = lim;
    }

    fn bump_var(&mut self, v: Var) {
        let a = &mut self.activity[v.0 as usize];
        *a += self.var_inc;
        if *a > 1e100 {
            for x in self.activity.iter_mut() {
                *x *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.bumped(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.learnt {
            return;
        }
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for c in self.clauses.iter_mut().filter(|c| c.learnt) {
                c.activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, u32) {
        let mut learnt = vec![Lit(0)];
        let mut path = 0;
        let mut p: Option<Lit> = None;
        let mut idx = self.trail.len();
        let dl = self.decision_level();
        loop {
            self.bump_clause(confl);
            let lits = self.clauses[confl as usize].lits.clone();
            let start = if p.is_some() { 1 } else { 0 };
            for &q in &lits[start..] {
                let v = q.var().0 as usize;
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(q.var());
                    if self.level[v] >= dl {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var().0 as usize] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[pl.var().0 as usize] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var().0 as usize].expect("implied literal has a reason");
            // reasons keep their implied literal in position 0
            let c = &mut self.clauses[confl as usize];
            if c.lits[0] != pl {
                let k = c
                    .lits
                    .iter()
                    .position(|&l| l == pl)
                    .expect("reason contains literal");
                c.lits.swap(0, k);
            }
        }
        learnt[0] = !p.expect("conflict at non-root level");

        // drop literals whose reason is subsumed by the clause
        let keep: Vec<bool> = learnt
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                if i == 0 {
                    return true;
                }
                match self.reason[l.var().0 as usize] {
                    None => true,
                    Some(r) => self.clauses[r as usize].lits.iter().any(|&q| {
                        q.var() != l.var()
                            && !self.seen[q.var().0 as usize]
                            && self.level[q.var().0 as usize] > 0
                    }),
                }
            })
            .collect();
        for l in &learnt {
            self.seen[l.var().0 as usize] = false;
        }
        let mut learnt: Vec<Lit> = learnt
            .into_iter()
            .zip(keep)
            .filter(|(_, k)| *k)
            .map(|(l, _)| l)
            .collect();

        let bt = if learnt.len() == 1 {
            0
        } else {
            let mut max_i = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().0 as usize]
                    > self.level[learnt[max_i].var().0 as usize]
                {
                    max_i = i;
                }
            }
            learnt.swap(1, max_i);
            self.level[learnt[1].var().0 as usize]
        };
        (learnt, bt)
    }

    fn reduce_db(&mut self) {
        let mut cands: Vec<(f64, u32)> = self
            .clauses
            .iter()
            .enumerate()
            .filter(|(_, c)| c.learnt && !c.deleted && c.lits.len() > 2)
            .map(|(i, c)| (c.activity, i as u32))
            .collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0));
        let locked = |s: &Self, cref: u32| {
            let l = s.clauses[cref as usize].lits[0];
            s.value(l) == LBool::True && s.reason[l.var().0 as usize] == Some(cref)
        };
        let half = cands.len() / 2;
        for &(_, cref) in &cands[..half] {
            if !locked(self, cref) {
                self.clauses[cref as usize].deleted = true;
                self.clauses[cref as usize].lits = Vec::new();
                self.num_learnts -= 1;
                self.stats.deleted += 1;
            }
        }
        for ws in self.watches.iter_mut() {
            ws.retain(|w| !self.clauses[w.cref as usize].deleted);
        }
    }

    fn pick_branch(&mut self) -> Option<Lit> {
        while let Some(v) = self.order.pop(&self.activity) {
            if self.assigns[v.0 as usize] == LBool::Undef {
                return Some(Lit::new(v, self.polarity[v.0 as usize]));
            }
        }
        None
    }

    /// Decides the current clause set.
    pub fn solve(&mut self, budget: Budget) -> SatResult {
        if !self.ok {
            return SatResult::Unsat;
        }
        self.cancel_until(0);
        if self.propagate().is_some() {
            self.ok = false;
            return SatResult::Unsat;
        }
        let start_conflicts = self.stats.conflicts;
        let mut restart_idx = 0u64;
        let mut until_restart = luby(restart_idx) * RESTART_UNIT;
        let mut ticks = 0u64;
        loop {
            ticks += 1;
            if ticks.is_multiple_of(256) {
                if let Some(d) = budget.deadline {
                    if Instant::now() >= d {
                        self.cancel_until(0);
                        return SatResult::Unknown;
                    }
                }
                if let Some(m) = budget.max_conflicts {
                    if self.stats.conflicts - start_conflicts >= m {
                        self.cancel_until(0);
                        return SatResult::Unknown;
                    }
                }
            }
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatResult::Unsat;
                }
                if !self.learning {
                    // chronological backtracking: flip the deepest unflipped decision
                    let Some(lvl) = (0..self.flipped.len()).rev().find(|&i| !self.flipped[i])
                    else {
                        self.cancel_until(0);
                        self.ok = false;
                        return SatResult::Unsat;
                    };
                    let decision = self.trail[self.trail_lim[lvl]];
                    self.cancel_until(lvl as u32);
                    self.trail_lim.push(self.trail.len());
                    self.flipped.push(true);
                    self.enqueue(!decision, None);
                    continue;
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(first, Some(cref));
                }
                self.stats.learned += 1;
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                until_restart = until_restart.saturating_sub(1);
                continue;
            }
            if self.learning && until_restart == 0 {
                self.stats.restarts += 1;
                restart_idx += 1;
                until_restart = luby(restart_idx) * RESTART_UNIT;
                self.cancel_until(0);
                continue;
            }
            if self.learning
                && self.num_learnts as f64 >= self.max_learnts + self.trail.len() as f64
            {
                self.reduce_db();
                self.max_learnts *= 1.1;
            }
            match self.pick_branch() {
                None => {
                    self.model = self.assigns.iter().map(|a| *a == LBool::True).collect();
                    self.cancel_until(0);
                    return SatResult::Sat;
                }
                Some(l) => {
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.flipped.push(false);
                    self.enqueue(l, None);
                }
            }
        }
    }

    /// Value of `v` in the last satisfying assignment.
    pub fn model_value(&self, v: Var) -> bool {
        self.model.get(v.0 as usize).copied().unwrap_or(false)
    }

    pub fn lit_model_value(&self, l: Lit) -> bool {
        self.model_value(l.var()) == l.is_positive()
    }
}
