//! A small conflict-driven clause-learning SAT engine.
//!
//! Decisions follow variable index order and always try `false` first, so
//! every run over the same clause sequence visits the same models. There is
//! no activity heuristic, no restarts and no clause deletion.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn pos(var: usize) -> Lit {
        Lit((var as u32) << 1)
    }

    pub fn neg(var: usize) -> Lit {
        Lit(((var as u32) << 1) | 1)
    }

    pub fn new(var: usize, positive: bool) -> Lit {
        if positive {
            Lit::pos(var)
        } else {
            Lit::neg(var)
        }
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn negate(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Value {
    True,
    False,
    Unassigned,
}

#[derive(Debug, Default)]
pub struct Cdcl {
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    values: Vec<Option<bool>>,
    level: Vec<usize>,
    reason: Vec<Option<usize>>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    unsat: bool,
    seen: Vec<bool>,
}

impl Cdcl {
    pub fn new() -> Self {
        Cdcl::default()
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn new_var(&mut self) -> usize {
        let v = self.values.len();
        self.values.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    pub fn ensure_vars(&mut self, n: usize) {
        while self.values.len() < n {
            self.new_var();
        }
    }

    fn value(&self, lit: Lit) -> Value {
        match self.values[lit.var()] {
            None => Value::Unassigned,
            Some(b) if b != lit.is_negative() => Value::True,
            Some(_) => Value::False,
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, lit: Lit, reason: Option<usize>) {
        let v = lit.var();
        self.values[v] = Some(!lit.is_negative());
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn backtrack(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level];
        for lit in self.trail.drain(keep..) {
            self.values[lit.var()] = None;
            self.reason[lit.var()] = None;
        }
        self.trail_lim.truncate(level);
        self.qhead = self.trail.len();
    }

    /// Adds a clause permanently. Backtracks to the root first, so this may
    /// be called between `solve` calls.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if self.unsat {
            return;
        }
        self.backtrack(0);
        let max_var = lits.iter().map(|l| l.var() + 1).max().unwrap_or(0);
        self.ensure_vars(max_var);
        let mut clause: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            if clause.contains(&l.negate()) {
                return;
            }
            match self.value(l) {
                Value::True => return,
                Value::False => continue,
                Value::Unassigned => {
                    if !clause.contains(&l) {
                        clause.push(l);
                    }
                }
            }
        }
        match clause.len() {
            0 => self.unsat = true,
            1 => self.enqueue(clause[0], None),
            _ => {
                let id = self.clauses.len();
                self.watches[clause[0].code()].push(id);
                self.watches[clause[1].code()].push(id);
                self.clauses.push(clause);
            }
        }
    }

    fn propagate(&mut self) -> Option<usize> {
        while self.qhead < self.trail.len() {
            let false_lit = self.trail[self.qhead].negate();
            self.qhead += 1;
            let watchers = core::mem::take(&mut self.watches[false_lit.code()]);
            let mut kept = Vec::with_capacity(watchers.len());
            let mut conflict = None;
            let mut iter = watchers.into_iter();
            for cid in iter.by_ref() {
                if self.clauses[cid][0] == false_lit {
                    self.clauses[cid].swap(0, 1);
                }
                let first = self.clauses[cid][0];
                if self.value(first) == Value::True {
                    kept.push(cid);
                    continue;
                }
                let replacement = (2..self.clauses[cid].len())
                    .find(|&k| self.value(self.clauses[cid][k]) != Value::False);
                if let Some(k) = replacement {
                    self.clauses[cid].swap(1, k);
                    let w = self.clauses[cid][1];
                    self.watches[w.code()].push(cid);
                    continue;
                }
                kept.push(cid);
                if self.value(first) == Value::False {
                    conflict = Some(cid);
                    break;
                }
                self.enqueue(first, Some(cid));
            }
            kept.extend(iter);
            self.watches[false_lit.code()].extend(kept);
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP learning. Returns the learnt clause (asserting literal
    /// first) and the level to jump back to.
    fn analyze(&mut self, mut conflict: usize) -> (Vec<Lit>, usize) {
        let mut learnt = vec![Lit(0)];
        let mut pending = 0usize;
        let mut implied: Option<Lit> = None;
        let mut idx = self.trail.len();
        loop {
            for k in 0..self.clauses[conflict].len() {
                let q = self.clauses[conflict][k];
                if Some(q) == implied {
                    continue;
                }
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    if self.level[v] == self.decision_level() {
                        pending += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let p = self.trail[idx];
            self.seen[p.var()] = false;
            pending -= 1;
            implied = Some(p);
            if pending == 0 {
                learnt[0] = p.negate();
                break;
            }
            conflict = self.reason[p.var()].expect("implied literal has a reason");
        }
        for l in &learnt[1..] {
            self.seen[l.var()] = false;
        }
        let mut jump = 0;
        if learnt.len() > 1 {
            let (best, lvl) = learnt[1..]
                .iter()
                .enumerate()
                .map(|(i, l)| (i + 1, self.level[l.var()]))
                .max_by_key(|&(_, lvl)| lvl)
                .expect("non-empty");
            learnt.swap(1, best);
            jump = lvl;
        }
        (learnt, jump)
    }

    /// Finds a satisfying assignment (all variables assigned) or proves
    /// there is none.
    pub fn solve(&mut self) -> Option<Vec<bool>> {
        if self.unsat {
            return None;
        }
        loop {
            if let Some(conflict) = self.propagate() {
                if self.decision_level() == 0 {
                    self.unsat = true;
                    return None;
                }
                let (learnt, jump) = self.analyze(conflict);
                self.backtrack(jump);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let id = self.clauses.len();
                    self.watches[learnt[0].code()].push(id);
                    self.watches[learnt[1].code()].push(id);
                    let asserting = learnt[0];
                    self.clauses.push(learnt);
                    self.enqueue(asserting, Some(id));
                }
                continue;
            }
            match self.values.iter().position(Option::is_none) {
                None => {
                    return Some(self.values.iter().map(|v| v.expect("assigned")).collect());
                }
                Some(v) => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(Lit::neg(v), None);
                }
            }
        }
    }
}
